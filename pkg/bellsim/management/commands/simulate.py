import time

from bellsim.config import load_config
from bellsim.manifest import manifest_path_for
from bellsim.montecarlo import merge, run
from bellsim.serializers import counts_to_csv, counts_to_json, read_counts

from ._common import BellsimCommand, output_stem, parse_count


class Command(BellsimCommand):
    help = 'Run the Monte-Carlo simulation and write a counts table (CSV and JSON) with its manifest'
    name = 'simulate'

    def add_arguments(self, parser):
        parser.add_argument('--config', help='JSON run configuration; missing keys take the default parameters')
        parser.add_argument('--seed', help='Override the configured seed')
        parser.add_argument('--cycles', help='Override the number of clock cycles (e.g. 1e6)')
        parser.add_argument(
            '--set', dest='overrides', action='append', default=[], metavar='KEY=VALUE',
            help='Override one configuration value by dotted path, e.g. detectors.0.tau_ns=100',
        )
        parser.add_argument('--workers', help='Worker processes for chunk sampling')
        parser.add_argument('--merge', dest='merge_with', help='Add the counts of an earlier run of the same physics')
        parser.add_argument('--out', default='counts', help='Output path without extension')
        parser.add_argument(
            '--format', choices=['csv', 'json'],
            help='Write only this format (default: both)',
        )

    def run(self, *args, **options):
        overrides = list(options['overrides'])
        if options.get('workers') is not None:
            overrides.append(f'workers={parse_count(options["workers"])}')
        config = load_config(
            options.get('config'),
            overrides,
            cycles=parse_count(options['cycles']) if options.get('cycles') is not None else None,
            seed=parse_count(options['seed']) if options.get('seed') is not None else None,
        )
        manifest = self.start_manifest(
            config_digest=config.config_digest(),
            physics_digest=config.physics_digest(),
            seed=config.seed,
            config=config.to_dict(),
            inputs=[p for p in (options.get('config'), options.get('merge_with')) if p],
            parameters={'overrides': options['overrides']},
        )

        started = time.perf_counter()
        counts = run(config)
        elapsed = time.perf_counter() - started
        if options.get('merge_with'):
            counts = merge(read_counts(options['merge_with']), counts)

        stem = output_stem(options['out'])
        manifest_name = manifest_path_for(stem).name
        outputs = {}
        if options.get('format') in (None, 'csv'):
            outputs[stem.with_name(stem.name + '.csv')] = counts_to_csv(counts, manifest_name)
        if options.get('format') in (None, 'json'):
            outputs[stem.with_name(stem.name + '.json')] = counts_to_json(counts, manifest_name)

        rate = config.cycles / elapsed if elapsed > 0 else float('inf')
        self.stdout.write(f'{config.cycles} cycles in {elapsed:.2f} s ({rate:.3g} cycles/s)')
        self.stdout.write(f'{"basis":<6}{"pair":<6}{"mu_a":>7}{"mu_b":>7}{"cycles":>12}{"psi-":>10}{"psi+":>10}')
        for key, tally in counts.sorted_items():
            self.stdout.write(
                f'{key.basis:<6}{key.state_a + key.state_b:<6}{key.mu_a:>7g}{key.mu_b:>7g}'
                f'{tally.n_cycles:>12}{tally.n_psiminus:>10}{tally.n_psiplus:>10}'
            )
        self.commit(stem, outputs, manifest)
        self.stdout.write(self.style.SUCCESS(f'Simulation complete (config {manifest.config_digest[:12]})'))
