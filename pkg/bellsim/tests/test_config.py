import json
import tempfile
from pathlib import Path

from django.test import SimpleTestCase

from bellsim.config import apply_override, load_config, merge_defaults, parse_override
from bellsim.defaults import DEFAULT_RUN_CONFIG
from bellsim.exceptions import ConfigurationError


class ConfigFileMixin:
    def setUp(self):
        super().setUp()
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def write_config(self, data, name='run.json'):
        path = Path(self.tmp.name) / name
        path.write_text(data if isinstance(data, str) else json.dumps(data), encoding='utf-8')
        return path


class LoadConfigTests(ConfigFileMixin, SimpleTestCase):
    def test_defaults(self):
        config = load_config()
        self.assertEqual(config.cycles, 1_000_000)
        self.assertEqual(config.seed, 0)
        self.assertEqual(config.sources[0].intensities, (0.11, 0.05, 0.0))
        self.assertAlmostEqual(config.channels[1].transmission, 10 ** -0.4)
        self.assertEqual([d.tau_ns for d in config.detectors], [30.0, 40.0])
        self.assertEqual(config.timing.bin_separation_ns, 75.0)
        self.assertEqual(len(config.schedule), 72)

    def test_partial_file_keeps_defaults(self):
        path = self.write_config({'cycles': 5000, 'detectors': [{'eta': 0.9}, {}]})
        config = load_config(path)
        self.assertEqual(config.cycles, 5000)
        self.assertEqual(config.detectors[0].eta, 0.9)
        self.assertEqual(config.detectors[0].tau_ns, 30.0)
        self.assertEqual(config.detectors[1].eta, 0.762)

    def test_command_line_wins(self):
        path = self.write_config({'cycles': 5000, 'seed': 1})
        config = load_config(path, ['seed=2', 'detectors.0.tau_ns=100'], cycles=1000, seed=9)
        self.assertEqual((config.cycles, config.seed), (1000, 9))
        self.assertEqual(config.detectors[0].tau_ns, 100.0)

    def test_string_override(self):
        config = load_config(overrides=['phase_mode=fixed', 'theta=1.5'])
        self.assertEqual(config.phase_mode, 'fixed')
        self.assertEqual(config.theta, 1.5)

    def test_missing_file(self):
        path = Path(self.tmp.name) / 'absent.json'
        with self.assertRaises(ConfigurationError) as ctx:
            load_config(path)
        self.assertEqual(ctx.exception.exit_code, 2)
        self.assertIn(str(path), str(ctx.exception))

    def test_malformed_json_reports_position(self):
        path = self.write_config('{\n  "cycles": ,\n}')
        with self.assertRaises(ConfigurationError) as ctx:
            load_config(path)
        self.assertIn('line 2', ctx.exception.diagnostics['config'])

    def test_unknown_keys(self):
        path = self.write_config({'cycels': 10, 'timing': {'jitter_ns': 1}})
        with self.assertRaises(ConfigurationError) as ctx:
            load_config(path)
        self.assertEqual(set(ctx.exception.diagnostics), {'cycels', 'timing.jitter_ns'})

    def test_field_diagnostics_collected(self):
        overrides = ['detectors.0.eta=1.5', 'sources.1.intensities=[0.05, 0.11, 0]', 'cycles=0']
        with self.assertRaises(ConfigurationError) as ctx:
            load_config(overrides=overrides)
        diagnostics = ctx.exception.diagnostics
        self.assertIn('detectors.0.eta', diagnostics)
        self.assertIn('sources.1.intensities', diagnostics)
        self.assertIn('run.cycles', diagnostics)
        self.assertIn('detectors.0.eta', str(ctx.exception))

    def test_dead_time_from_detector_physics(self):
        overrides = ['detectors.1.tau_ns=null', 'detectors.1.kinetic_inductance=1', 'detectors.1.kappa=5000']
        config = load_config(overrides=overrides)
        self.assertAlmostEqual(config.detectors[1].tau_ns, 40.0)
        config = load_config(overrides=overrides + ['detectors.1.load_resistance_ohm=50'])
        self.assertAlmostEqual(config.detectors[1].tau_ns, 100.0)

    def test_dead_time_must_be_derivable(self):
        with self.assertRaises(ConfigurationError) as ctx:
            load_config(overrides=['detectors.0.tau_ns=null'])
        self.assertIn('detectors.0', ctx.exception.diagnostics)

    def test_schedule_states_checked(self):
        entry = {'basis': 'z', 'state_a': '0', 'state_b': '+', 'mu_a': 0.11, 'mu_b': 0.11, 'weight': 1.0}
        path = self.write_config({'schedule': [entry]})
        with self.assertRaises(ConfigurationError) as ctx:
            load_config(path)
        self.assertIn('schedule.0.state_b', ctx.exception.diagnostics)

    def test_custom_schedule(self):
        entry = {'basis': 'x', 'state_a': '+', 'state_b': '-', 'mu_a': 0.11, 'mu_b': 0.05, 'weight': 1.0}
        config = load_config(self.write_config({'schedule': [entry]}))
        self.assertEqual(len(config.schedule), 1)
        self.assertEqual(config.schedule[0].key.mu_b, 0.05)

    def test_timing_checked(self):
        with self.assertRaises(ConfigurationError) as ctx:
            load_config(overrides=['timing.pulse_width_ns=80'])
        self.assertIn('timing.pulse_width_ns', ctx.exception.diagnostics)
        with self.assertRaises(ConfigurationError) as ctx:
            load_config(overrides=['timing.rep_rate_hz=2e7'])
        self.assertIn('timing.bin_separation_ns', ctx.exception.diagnostics)

    def test_digests(self):
        a, b = load_config(seed=1), load_config(seed=2)
        self.assertNotEqual(a.config_digest(), b.config_digest())
        self.assertEqual(a.physics_digest(), b.physics_digest())
        self.assertEqual(a.config_digest(), load_config(seed=1).config_digest())


class OverrideTests(SimpleTestCase):
    def test_parse(self):
        self.assertEqual(parse_override('detectors.0.tau_ns=100'), ('detectors.0.tau_ns', 100))
        self.assertEqual(parse_override('phase_mode=fixed'), ('phase_mode', 'fixed'))
        with self.assertRaises(ConfigurationError):
            parse_override('cycles')

    def test_bad_paths(self):
        data = merge_defaults({})
        with self.assertRaises(ConfigurationError) as ctx:
            apply_override(data, 'detectors.2.eta=0.5')
        self.assertIn('detectors.2', ctx.exception.diagnostics)
        with self.assertRaises(ConfigurationError):
            apply_override(data, 'timing.jitter=1')
        with self.assertRaises(ConfigurationError):
            apply_override(data, 'cycles.x=1')

    def test_defaults_untouched(self):
        data = merge_defaults({})
        apply_override(data, 'detectors.0.eta=0.5')
        self.assertEqual(DEFAULT_RUN_CONFIG['detectors'][0]['eta'], 0.775)
