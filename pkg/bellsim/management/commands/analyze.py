from pathlib import Path

from bellsim.bsm import analyze
from bellsim.manifest import manifest_path_for
from bellsim.serializers import analysis_to_csv, analysis_to_json, analysis_to_text, read_counts, with_manifest_comment

from ._common import BellsimCommand, output_stem, parse_pair


class Command(BellsimCommand):
    help = 'Raw error rates and projection efficiencies per basis and outcome from a counts file'
    name = 'analyze'

    def add_arguments(self, parser):
        parser.add_argument('counts_path', help='Counts table written by simulate (CSV or JSON)')
        parser.add_argument('--intensities', help='Intensity pair MU_A,MU_B to analyse (default: the highest on each side)')
        parser.add_argument('--etas', help='Detector efficiencies ETA1,ETA2 for the eta1 eta2 / 2 reference line (default: from the counts metadata)')
        parser.add_argument('--out', help='Report path without extension (default: next to the counts file)')
        parser.add_argument('--format', choices=['csv', 'json'], default='json')

    def run(self, *args, **options):
        counts_path = options['counts_path']
        counts = read_counts(counts_path)
        etas = parse_pair(options.get('etas'), '--etas') or counts.metadata.get('detector_eta')
        report = analyze(counts, parse_pair(options.get('intensities'), '--intensities'), etas)

        self.stdout.write(analysis_to_text(report), ending='')

        stem = output_stem(options.get('out') or Path(counts_path).with_suffix('').as_posix() + '.analysis')
        manifest_name = manifest_path_for(stem).name
        if options['format'] == 'json':
            outputs = {stem.with_name(stem.name + '.json'): analysis_to_json(report, manifest_name)}
        else:
            outputs = {stem.with_name(stem.name + '.csv'): with_manifest_comment(analysis_to_csv(report), manifest_name)}
        manifest = self.start_manifest(
            config_digest=counts.config_digest or '',
            physics_digest=counts.config_digest or '',
            inputs=[str(counts_path)],
            parameters={'intensities': list(report.intensities) if report.intensities else None},
        )
        self.commit(stem, outputs, manifest)
        if report.has_projections:
            self.stdout.write(self.style.SUCCESS('Analysis complete'))
        else:
            self.stdout.write(self.style.WARNING('Analysis complete: no projections'))
