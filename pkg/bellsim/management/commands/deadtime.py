from bellsim.detector import DETECTOR_1, DETECTOR_2, DETECTOR_2_SERIES, fit_tail_rate, interarrival_histogram
from bellsim.exceptions import DomainError
from bellsim.manifest import manifest_path_for
from bellsim.serializers import histogram_to_csv, histogram_to_json, with_manifest_comment

from ._common import BellsimCommand, output_stem

PRESETS = {
    '1': DETECTOR_1,
    '2': DETECTOR_2,
    '2-series': DETECTOR_2_SERIES,
}


class Command(BellsimCommand):
    help = 'Inter-arrival time histogram of a Poisson stream behind a non-paralysable dead time'
    name = 'deadtime'

    def add_arguments(self, parser):
        parser.add_argument('--rate', type=float, required=True, help='Incident detection rate (Hz)')
        parser.add_argument('--tau', type=float, help='Dead time (ns)')
        parser.add_argument('--detector', choices=sorted(PRESETS), help='Take the dead time from a detector preset')
        parser.add_argument('--duration', type=float, default=1.0, help='Stream duration (s)')
        parser.add_argument('--bin-width', type=float, default=1.0, help='Histogram bin width (ns)')
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--out', default='histogram', help='Output path without extension')
        parser.add_argument('--format', choices=['csv', 'json'], default='csv')

    def run(self, *args, **options):
        if options.get('tau') is None and options.get('detector') is None:
            raise DomainError('give --tau or --detector')
        tau = options['tau'] if options.get('tau') is not None else PRESETS[options['detector']].tau_ns
        if tau < 0:
            raise DomainError(f'dead time must be >= 0, got {tau}')

        histogram = interarrival_histogram(
            options['rate'], tau, options['duration'], options['bin_width'], seed=options['seed'],
        )
        first = histogram.first_nonzero_ns()
        self.stdout.write(f'{histogram.n_detections} detections, dead time {tau:g} ns')
        if first is not None:
            self.stdout.write(f'first non-empty bin starts at {first:g} ns')
        if histogram.total:
            self.stdout.write(f'fitted tail rate {fit_tail_rate(histogram):.4g} Hz (configured {options["rate"]:.4g} Hz)')

        stem = output_stem(options['out'])
        manifest_name = manifest_path_for(stem).name
        if options['format'] == 'csv':
            outputs = {stem.with_name(stem.name + '.csv'): with_manifest_comment(histogram_to_csv(histogram), manifest_name)}
        else:
            outputs = {stem.with_name(stem.name + '.json'): histogram_to_json(histogram, manifest_name)}
        manifest = self.start_manifest(
            seed=options['seed'],
            parameters={
                'rate_hz': options['rate'],
                'tau_ns': tau,
                'duration_s': options['duration'],
                'bin_width_ns': options['bin_width'],
            },
        )
        self.commit(stem, outputs, manifest)
        self.stdout.write(self.style.SUCCESS('Histogram complete'))
