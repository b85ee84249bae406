from pathlib import Path

from bellsim.bsm import basis_averaged_efficiency
from bellsim.decoy import COMBINED, DEFAULT_CUTOFF, DEFAULT_SIGMAS, decoy_report
from bellsim.manifest import manifest_path_for
from bellsim.serializers import decoy_to_csv, decoy_to_json, decoy_to_text, read_counts, with_manifest_comment
from bellsim.states import Basis

from ._common import BellsimCommand, output_stem


def combined_basis_average(results):
    """(eta_z + 2 eta_x) / 3 from the combined-outcome bounds, when both bases have one."""
    etas = {r.basis: r.eta_bsm for r in results if r.outcome == COMBINED}
    if etas.get(Basis.Z) is None or etas.get(Basis.X) is None:
        return None
    return basis_averaged_efficiency(min(etas[Basis.Z], 1.0), min(etas[Basis.X], 1.0))


class Command(BellsimCommand):
    help = 'Decoy-state bounds on the single-photon-pair yield, gain and error rate'
    name = 'decoy'

    def add_arguments(self, parser):
        parser.add_argument('counts_path', help='Counts table with signal, decoy and vacuum intensities')
        parser.add_argument('--cutoff', type=int, default=DEFAULT_CUTOFF, help='Photon-number cutoff N of the LP')
        parser.add_argument('--sigmas', type=float, default=DEFAULT_SIGMAS, help='Statistical confidence in standard errors')
        parser.add_argument('--transmission', type=float, help='Per-arm transmission t (default: from the counts metadata)')
        parser.add_argument('--out', help='Report path without extension (default: next to the counts file)')
        parser.add_argument('--format', choices=['csv', 'json'], default='json')

    def run(self, *args, **options):
        counts_path = options['counts_path']
        counts = read_counts(counts_path)
        results = decoy_report(counts, options['cutoff'], options['sigmas'], options.get('transmission'))
        average = combined_basis_average(results)

        self.stdout.write(decoy_to_text(results, average), ending='')

        stem = output_stem(options.get('out') or Path(counts_path).with_suffix('').as_posix() + '.decoy')
        manifest_name = manifest_path_for(stem).name
        if options['format'] == 'json':
            outputs = {stem.with_name(stem.name + '.json'): decoy_to_json(results, average, manifest_name)}
        else:
            outputs = {stem.with_name(stem.name + '.csv'): with_manifest_comment(decoy_to_csv(results), manifest_name)}
        manifest = self.start_manifest(
            config_digest=counts.config_digest or '',
            physics_digest=counts.config_digest or '',
            inputs=[str(counts_path)],
            parameters={
                'cutoff': options['cutoff'],
                'sigmas': options['sigmas'],
                'transmission': options.get('transmission'),
            },
        )
        self.commit(stem, outputs, manifest)
        self.stdout.write(self.style.SUCCESS('Decoy bounds complete'))
