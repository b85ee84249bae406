from django import forms

from .montecarlo import PHASE_MODES
from .states import BITS, Basis


class FloatListField(forms.Field):
    """
    A list of floats given as a JSON array or a comma-separated string.
    """
    default_error_messages = {
        'invalid': 'Enter a list of numbers.',
        'empty': 'Enter at least one number.',
    }

    def to_python(self, value):
        if value in self.empty_values:
            return []
        if isinstance(value, str):
            value = [part for part in value.split(',') if part.strip()]
        if not isinstance(value, (list, tuple)):
            raise forms.ValidationError(self.error_messages['invalid'], code='invalid')
        try:
            return [float(item) for item in value]
        except (TypeError, ValueError):
            raise forms.ValidationError(self.error_messages['invalid'], code='invalid')

    def validate(self, value):
        super().validate(value)
        if self.required and not value:
            raise forms.ValidationError(self.error_messages['empty'], code='empty')


class SourceForm(forms.Form):
    """
    One station's intensity settings
    Intensities run from the signal level down to vacuum
    """
    intensities = FloatListField()
    extinction_db = forms.FloatField(min_value=0.0)
    prep_phase_error_rad = forms.FloatField(required=False)

    def clean_intensities(self):
        values = self.cleaned_data['intensities']
        if any(mu < 0 for mu in values):
            raise forms.ValidationError('Intensities must be non-negative.')
        if values[-1] != 0.0:
            raise forms.ValidationError('The last intensity must be vacuum (0).')
        if any(a <= b for a, b in zip(values, values[1:])):
            raise forms.ValidationError('Intensities must be strictly decreasing.')
        return values

    def clean_extinction_db(self):
        value = self.cleaned_data['extinction_db']
        if value == 0:
            raise forms.ValidationError('Extinction ratio must be positive.')
        return value


class ChannelForm(forms.Form):
    length_km = forms.FloatField(min_value=0.0)
    attenuation_db_per_km = forms.FloatField(min_value=0.0)
    extra_loss_db = forms.FloatField(min_value=0.0, required=False)


class DetectorForm(forms.Form):
    """
    SNSPD settings
    tau_ns may be left empty when kinetic_inductance and kappa are given;
    the dead time is then derived from them.
    """
    eta = forms.FloatField(min_value=0.0, max_value=1.0)
    dark_rate_hz = forms.FloatField(min_value=0.0)
    tau_ns = forms.FloatField(min_value=0.0, required=False)
    kinetic_inductance = forms.FloatField(min_value=0.0, required=False)
    load_resistance_ohm = forms.FloatField(min_value=50.0)
    pileup_floor_ns = forms.FloatField(min_value=0.0, required=False)
    kappa = forms.FloatField(min_value=0.0, required=False)

    def clean(self):
        """
        Validate that a dead time is given or can be derived
        """
        cleaned_data = super().clean()
        tau = cleaned_data.get('tau_ns')
        inductance = cleaned_data.get('kinetic_inductance')
        kappa = cleaned_data.get('kappa')

        if tau is None and (not inductance or not kappa):
            raise forms.ValidationError(
                'Give tau_ns, or kinetic_inductance and kappa to derive it.'
            )
        return cleaned_data


class TimingForm(forms.Form):
    rep_rate_hz = forms.FloatField(min_value=0.0)
    bin_separation_ns = forms.FloatField(min_value=0.0)
    pulse_width_ns = forms.FloatField(min_value=0.0)

    def clean(self):
        cleaned_data = super().clean()
        rate = cleaned_data.get('rep_rate_hz')
        separation = cleaned_data.get('bin_separation_ns')
        width = cleaned_data.get('pulse_width_ns')
        if rate is None or separation is None or width is None:
            return cleaned_data

        if rate == 0:
            self.add_error('rep_rate_hz', 'Repetition rate must be positive.')
            return cleaned_data
        if not 0 < width < separation:
            self.add_error('pulse_width_ns', 'Pulse width must be positive and shorter than the bin separation.')
        if not separation < 1e9 / rate:
            self.add_error(
                'bin_separation_ns',
                f'Bin separation must fit in the {1e9 / rate:.1f} ns clock period.',
            )
        return cleaned_data


STATE_CHOICES = [(bit, bit) for bits in BITS.values() for bit in bits]
BASIS_CHOICES = [(basis.value, basis.value) for basis in Basis]


class ScheduleEntryForm(forms.Form):
    basis = forms.ChoiceField(choices=BASIS_CHOICES)
    state_a = forms.ChoiceField(choices=STATE_CHOICES)
    state_b = forms.ChoiceField(choices=STATE_CHOICES)
    mu_a = forms.FloatField(min_value=0.0)
    mu_b = forms.FloatField(min_value=0.0)
    weight = forms.FloatField(min_value=0.0)

    def clean(self):
        """
        Validate that both states belong to the entry's basis
        """
        cleaned_data = super().clean()
        basis = cleaned_data.get('basis')
        if basis is None:
            return cleaned_data
        bits = BITS[Basis(basis)]
        for name in ('state_a', 'state_b'):
            state = cleaned_data.get(name)
            if state is not None and state not in bits:
                self.add_error(name, f'State {state} is not in the {basis} basis.')
        return cleaned_data


class RunSettingsForm(forms.Form):
    cycles = forms.IntegerField(min_value=1)
    seed = forms.IntegerField(min_value=0, max_value=2 ** 64 - 1)
    workers = forms.IntegerField(min_value=1)
    phase_mode = forms.ChoiceField(choices=[(mode, mode) for mode in PHASE_MODES])
    theta = forms.FloatField(required=False)
