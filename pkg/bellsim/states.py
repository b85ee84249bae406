"""
Time-bin qubit states carried by phase-randomised attenuated laser pulses.

A state is the pair of coherent amplitudes in the early and late bins;
|amp|^2 is the mean photon number in that bin.
"""

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

import numpy as np
from scipy.stats import poisson

from .exceptions import DomainError


class Basis(str, Enum):
    Z = 'z'
    X = 'x'


BITS = {
    Basis.Z: ('0', '1'),
    Basis.X: ('+', '-'),
}

# Same-basis input pairs in schedule order
STATE_PAIRS = {
    basis: tuple((a, b) for a in bits for b in bits)
    for basis, bits in BITS.items()
}


def basis_of(bit: str) -> Basis:
    for basis, bits in BITS.items():
        if bit in bits:
            return basis
    raise DomainError(f'unknown qubit label {bit!r}; expected one of 0, 1, +, -')


@dataclass(frozen=True)
class TimeBinState:
    amp_early: complex
    amp_late: complex
    label: Optional[Tuple[str, str]] = field(default=None, compare=False)

    @property
    def intensity_early(self) -> float:
        return abs(self.amp_early) ** 2

    @property
    def intensity_late(self) -> float:
        return abs(self.amp_late) ** 2

    @property
    def intensity(self) -> float:
        return self.intensity_early + self.intensity_late

    def amplitudes(self) -> np.ndarray:
        return np.array([self.amp_early, self.amp_late], dtype=complex)

    def with_amplitudes(self, early: complex, late: complex) -> 'TimeBinState':
        return TimeBinState(complex(early), complex(late), self.label)


VACUUM = TimeBinState(0j, 0j)


@dataclass(frozen=True)
class SourceConfig:
    """
    One station's intensity modulator settings.
    Intensities are (signal, decoy, ..., 0), strictly decreasing.
    """
    intensities: Tuple[float, ...] = (0.11, 0.05, 0.0)
    extinction_db: float = 50.0
    prep_phase_error_rad: float = 0.0

    def __post_init__(self):
        values = tuple(float(mu) for mu in self.intensities)
        object.__setattr__(self, 'intensities', values)
        if not values or values[-1] != 0.0:
            raise DomainError('source intensities must end with vacuum (0)')
        if any(mu < 0 or not math.isfinite(mu) for mu in values):
            raise DomainError('source intensities must be finite and non-negative')
        if any(a <= b for a, b in zip(values, values[1:])):
            raise DomainError('source intensities must be strictly decreasing')
        if not self.extinction_db > 0:
            raise DomainError('extinction ratio must be positive (dB)')

    @property
    def signal(self) -> float:
        return self.intensities[0]


def prepare(basis, bit: str, mu: float, global_phase: float = 0.0) -> TimeBinState:
    """
    Prepare |0>, |1>, |+> or |-> with mean photon number mu.

    z-basis states put all intensity in one bin; x-basis states split it
    evenly, with a pi phase on the late bin for |->.
    """
    basis = Basis(basis)
    if mu < 0 or not math.isfinite(mu):
        raise DomainError(f'mean photon number must be finite and >= 0, got {mu}')
    if bit not in BITS[basis]:
        raise DomainError(f'{bit!r} is not a {basis.value}-basis state')

    phase = cmath.exp(1j * global_phase)
    if basis is Basis.Z:
        amp = math.sqrt(mu) * phase
        early, late = (amp, 0j) if bit == '0' else (0j, amp)
    else:
        amp = math.sqrt(mu / 2.0) * phase
        early, late = amp, (amp if bit == '+' else -amp)
    return TimeBinState(complex(early), complex(late), (basis.value, bit))


def apply_extinction(state: TimeBinState, extinction_db: float, mu: float) -> TimeBinState:
    """
    Leak mu * 10^(-ER/10) into every nominally empty bin.

    Leakage is coherent with the source: it takes the phase of the populated
    bin (or zero phase if the pulse is vacuum).
    """
    if not extinction_db > 0:
        raise DomainError('extinction ratio must be positive (dB)')
    if math.isinf(extinction_db) or mu == 0:
        return state

    leak = math.sqrt(mu * 10.0 ** (-extinction_db / 10.0))
    amps = [state.amp_early, state.amp_late]
    populated = [a for a in amps if a != 0]
    phase = populated[0] / abs(populated[0]) if populated else 1.0
    amps = [a if a != 0 else leak * phase for a in amps]
    return state.with_amplitudes(*amps)


def apply_prep_phase_error(state: TimeBinState, delta_phi: float) -> TimeBinState:
    if delta_phi == 0:
        return state
    return state.with_amplitudes(state.amp_early, state.amp_late * cmath.exp(1j * delta_phi))


def prepare_from_source(source: SourceConfig, bit: str, mu: float, global_phase: float = 0.0) -> TimeBinState:
    """prepare(), then the source's extinction leakage and |-> phase error."""
    basis = basis_of(bit)
    state = prepare(basis, bit, mu, global_phase)
    state = apply_extinction(state, source.extinction_db, mu)
    if bit == '-':
        state = apply_prep_phase_error(state, source.prep_phase_error_rad)
    return state


@dataclass(frozen=True)
class PhotonState:
    """
    Exact photon-number state of one station's two time bins.
    `terms` maps (n_early, n_late) to a probability amplitude.
    """
    terms: Tuple[Tuple[Tuple[int, int], complex], ...]
    label: Optional[Tuple[str, str]] = field(default=None, compare=False)

    def as_dict(self):
        return dict(self.terms)

    @property
    def max_photons(self) -> int:
        return max((n_e + n_l for (n_e, n_l), _ in self.terms), default=0)


def single_photon(basis, bit: str) -> PhotonState:
    """One photon in the time-bin qubit state |bit>."""
    qubit = prepare(basis, bit, 1.0)
    terms = []
    if qubit.amp_early != 0:
        terms.append(((1, 0), qubit.amp_early))
    if qubit.amp_late != 0:
        terms.append(((0, 1), qubit.amp_late))
    return PhotonState(tuple(terms), qubit.label)


def poisson_probability(n: int, mu: float) -> float:
    """P_n(mu) = e^-mu mu^n / n!"""
    if mu < 0:
        raise DomainError(f'mean photon number must be >= 0, got {mu}')
    if mu == 0:
        return 1.0 if n == 0 else 0.0
    return float(poisson.pmf(n, mu))


def poisson_vector(mu: float, cutoff: int) -> np.ndarray:
    """[P_0(mu), ..., P_cutoff(mu)]; the tail beyond cutoff is not included."""
    if mu < 0:
        raise DomainError(f'mean photon number must be >= 0, got {mu}')
    if mu == 0:
        vec = np.zeros(cutoff + 1)
        vec[0] = 1.0
        return vec
    return poisson.pmf(np.arange(cutoff + 1), mu).astype(np.float64)
