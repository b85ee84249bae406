import json
import tempfile
from io import StringIO
from pathlib import Path

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase, override_settings
from django.utils.dateparse import parse_datetime

from bellsim.decoy import gains_from_yields, counts_from_gains
from bellsim.exceptions import DomainError
from bellsim.management.commands._common import parse_count
from bellsim.models import RunRecord
from bellsim.montecarlo import oracle_counts
from bellsim.scenarios import IDEAL_DETECTORS
from bellsim.serializers import counts_from_csv, counts_to_csv
from bellsim.tests.test_decoy import INTENSITIES, single_photon_world

HEADER = 'basis,state_a,state_b,mu_a,mu_b,n_cycles,n_psiminus,n_psiplus'


@override_settings(BELLSIM_OUTPUT_DIR='', BELLSIM_MANIFEST_SUFFIX='.manifest.json')
class CommandTestCase(TestCase):
    def setUp(self):
        super().setUp()
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.dir = Path(self.tmp.name)

    def call(self, *args):
        out, err = StringIO(), StringIO()
        call_command(*args, stdout=out, stderr=err)
        return out.getvalue(), err.getvalue()

    def call_failing(self, *args):
        out, err = StringIO(), StringIO()
        with self.assertRaises(CommandError) as ctx:
            call_command(*args, stdout=out, stderr=err)
        return ctx.exception, out.getvalue(), err.getvalue()


class SimulateCommandTests(CommandTestCase):
    def simulate(self, *extra, name='counts'):
        stem = self.dir / name
        self.call('simulate', '--cycles', '2e4', '--seed', '7', '--out', str(stem), *extra)
        return stem

    def test_outputs_are_reproducible(self):
        stem = self.simulate()
        first = (stem.with_name('counts.csv').read_bytes(), stem.with_name('counts.json').read_bytes())
        self.simulate()
        second = (stem.with_name('counts.csv').read_bytes(), stem.with_name('counts.json').read_bytes())
        self.assertEqual(first, second)
        self.assertTrue(first[0].startswith(b'# manifest: counts.manifest.json\n'))

    def test_manifest_and_registry(self):
        stem = self.simulate()
        manifest = json.loads(stem.with_name('counts.manifest.json').read_text())
        self.assertEqual(manifest['command'], 'simulate')
        self.assertEqual(manifest['seed'], 7)
        self.assertEqual(manifest['config']['cycles'], 20000)
        self.assertEqual(len(manifest['outputs']), 2)
        record = RunRecord.objects.get()
        self.assertEqual(record.command, 'simulate')
        self.assertEqual(record.config_digest, manifest['config_digest'])

    def test_single_format(self):
        stem = self.simulate('--format', 'csv')
        self.assertTrue(stem.with_name('counts.csv').exists())
        self.assertFalse(stem.with_name('counts.json').exists())

    def test_slow_detectors_give_no_psi_plus(self):
        stem = self.simulate('--set', 'detectors.0.tau_ns=100', '--set', 'detectors.1.tau_ns=100')
        counts = counts_from_csv(stem.with_name('counts.csv').read_text())
        self.assertEqual(sum(t.n_psiplus for t in counts.entries.values()), 0)
        self.assertGreater(sum(t.n_psiminus for t in counts.entries.values()), 0)

    def test_merge_adds_cycles(self):
        first = self.simulate(name='first')
        self.call(
            'simulate', '--cycles', '1e4', '--seed', '8', '--merge', str(first.with_name('first.csv')),
            '--out', str(self.dir / 'merged'), '--format', 'csv',
        )
        merged = counts_from_csv((self.dir / 'merged.csv').read_text())
        self.assertEqual(merged.total_cycles, 30000)
        self.assertEqual(merged.seeds, (7, 8))

    def test_missing_config(self):
        exc, _, _ = self.call_failing('simulate', '--config', str(self.dir / 'nope.json'))
        self.assertEqual(exc.returncode, 2)
        self.assertIn('nope.json', str(exc))
        self.assertFalse(RunRecord.objects.exists())

    def test_invalid_override(self):
        exc, _, _ = self.call_failing(
            'simulate', '--cycles', '100', '--set', 'detectors.0.eta=1.5', '--out', str(self.dir / 'bad'),
        )
        self.assertEqual(exc.returncode, 2)
        self.assertIn('detectors.0.eta', str(exc))
        self.assertEqual(list(self.dir.iterdir()), [])

    def test_largest_seed_is_indexed(self):
        stem = self.dir / 'wide'
        self.call(
            'simulate', '--cycles', '1000', '--set', 'seed=18446744073709551615',
            '--out', str(stem), '--format', 'json',
        )
        manifest = json.loads((self.dir / 'wide.manifest.json').read_text())
        self.assertEqual(manifest['seed'], 2 ** 64 - 1)
        record = RunRecord.objects.get()
        self.assertEqual(record.seed, '18446744073709551615')

    def test_seed_option_is_exact(self):
        self.call('simulate', '--cycles', '1000', '--seed', '12345678901234567891', '--out', str(self.dir / 'big'))
        manifest = json.loads((self.dir / 'big.manifest.json').read_text())
        self.assertEqual(manifest['seed'], 12345678901234567891)
        self.assertEqual(RunRecord.objects.get().seed, '12345678901234567891')

    def test_registry_keeps_start_time(self):
        stem = self.simulate()
        manifest = json.loads(stem.with_name('counts.manifest.json').read_text())
        record = RunRecord.objects.get()
        self.assertEqual(record.started_at, parse_datetime(manifest['started_at']))
        self.assertLessEqual(record.started_at, record.finished_at)


class ParseCountTests(SimpleTestCase):
    def test_integers_stay_exact(self):
        self.assertEqual(parse_count('12345678901234567891'), 12345678901234567891)
        self.assertEqual(parse_count('18446744073709551615'), 2 ** 64 - 1)
        self.assertEqual(parse_count('1_000_000'), 1000000)

    def test_scientific_notation(self):
        self.assertEqual(parse_count('1e6'), 1000000)
        self.assertEqual(parse_count('2.5E3'), 2500)

    def test_rejects_fractions_and_negatives(self):
        for text in ('1.5', '-3', '1e-2', 'nan', 'ten'):
            with self.subTest(text=text):
                with self.assertRaises(DomainError):
                    parse_count(text)


class AnalyzeCommandTests(CommandTestCase):
    def write(self, name, text):
        path = self.dir / name
        path.write_text(text)
        return path

    def test_ideal_single_photons(self):
        path = self.write('ideal.csv', counts_to_csv(oracle_counts(10000, IDEAL_DETECTORS)))
        out, _ = self.call('analyze', str(path), '--etas', '1,1')
        self.assertIn('Analysis complete', out)
        report = json.loads((self.dir / 'ideal.analysis.json').read_text())
        self.assertEqual(report['manifest'], 'ideal.analysis.manifest.json')
        for basis in ('z', 'x'):
            self.assertEqual(report['bases'][basis]['error_rates'], {'psi-': 0.0, 'psi+': 0.0})
        self.assertAlmostEqual(report['basis_averaged_efficiency'], 0.5)
        self.assertTrue((self.dir / 'ideal.analysis.manifest.json').exists())

    def test_no_projections(self):
        path = self.write('empty.csv', f'{HEADER}\nz,0,1,0.11,0.11,1000,0,0\n')
        out, _ = self.call('analyze', str(path))
        self.assertIn('no projections', out)

    def test_malformed_counts(self):
        path = self.write('broken.csv', f'{HEADER}\nz,0,1,0.11,0.11,1000,0,0\nz,0,1,0.11\n')
        exc, _, _ = self.call_failing('analyze', str(path))
        self.assertEqual(exc.returncode, 3)
        self.assertIn('line 3', str(exc))
        self.assertFalse((self.dir / 'broken.analysis.json').exists())


class DecoyCommandTests(CommandTestCase):
    def test_error_free_synthetic_data(self):
        gains = gains_from_yields(*single_photon_world(0.3), INTENSITIES, INTENSITIES)
        gains.transmission = (0.5, 0.5)
        path = self.dir / 'synthetic.csv'
        path.write_text(counts_to_csv(counts_from_gains(gains, 10 ** 9)))
        out, _ = self.call('decoy', str(path), '--sigmas', '1')
        self.assertIn('LP decoy bound', out)
        report = json.loads((self.dir / 'synthetic.decoy.json').read_text())
        combined = [b for b in report['bounds'] if b['outcome'] == 'combined']
        self.assertEqual({b['basis'] for b in combined}, {'z', 'x'})
        for bounds in combined:
            self.assertLess(bounds['e11_upper'], 0.01)
            self.assertGreater(bounds['Y11_lower'], 0.29)
        self.assertIsNotNone(report['basis_averaged_eta_bsm'])

    def test_inconsistent_gains(self):
        rows = []
        for a in INTENSITIES:
            for b in INTENSITIES:
                minus = 500 if (a, b) == (0.0, 0.0) else 0
                rows.append(f'z,0,1,{a!r},{b!r},1000,{minus},0')
        path = self.dir / 'doctored.csv'
        path.write_text(HEADER + '\n' + '\n'.join(rows) + '\n')
        exc, _, err = self.call_failing('decoy', str(path), '--sigmas', '0')
        self.assertEqual(exc.returncode, 3)
        self.assertIn('phase-1 residual', err)
        self.assertIn('violated: yield[z 0,0] lower', err)

    def test_missing_decoy_intensity(self):
        path = self.dir / 'signal-only.csv'
        path.write_text(f'{HEADER}\nz,0,1,0.11,0.11,1000,10,0\n')
        exc, _, _ = self.call_failing('decoy', str(path))
        self.assertEqual(exc.returncode, 3)


class DeadtimeCommandTests(CommandTestCase):
    def test_histogram_respects_dead_time(self):
        for args, tau in ((['--tau', '100'], 100), (['--detector', '2-series'], 40)):
            with self.subTest(tau=tau):
                stem = self.dir / f'hist{tau}'
                out, _ = self.call('deadtime', '--rate', '1e6', '--duration', '0.05', '--out', str(stem), *args)
                self.assertIn(f'dead time {tau} ns', out)
                lines = stem.with_name(stem.name + '.csv').read_text().splitlines()
                self.assertEqual(lines[0], f'# manifest: hist{tau}.manifest.json')
                self.assertEqual(lines[1], 'bin_start_ns,count')
                counts = [int(line.split(',')[1]) for line in lines[2:]]
                self.assertEqual(sum(counts[:tau]), 0)
                self.assertGreater(counts[tau], 0)

    def test_invalid_rate(self):
        exc, _, _ = self.call_failing('deadtime', '--rate', '0', '--tau', '100', '--out', str(self.dir / 'h'))
        self.assertEqual(exc.returncode, 2)

    def test_needs_dead_time(self):
        exc, _, _ = self.call_failing('deadtime', '--rate', '1e6')
        self.assertEqual(exc.returncode, 2)


class OracleCommandTests(CommandTestCase):
    def test_weak_coherent_pass(self):
        out, _ = self.call('oracle', 'weak-coherent-x-basis')
        self.assertIn('PASS', out)

    def test_single_photon_values(self):
        out, _ = self.call('oracle', 'single-photon-ideal', '--cutoff', '2')
        self.assertIn('psi-=0.500000 psi+=0.500000', out)
        self.assertIn('PASS', out)

    def test_truncation_fails(self):
        exc, out, _ = self.call_failing('oracle', 'weak-coherent-x-basis', '--cutoff', '1', '--mu', '0.3')
        self.assertEqual(exc.returncode, 4)
        self.assertIn('FAIL', out)

    def test_unknown_scenario(self):
        exc, _, _ = self.call_failing('oracle', 'bogus')
        self.assertEqual(exc.returncode, 2)
        self.assertIn('weak-coherent-z-basis', str(exc))
