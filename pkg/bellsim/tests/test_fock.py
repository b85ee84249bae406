import math

import numpy as np
from django.test import SimpleTestCase

from bellsim.detector import DetectorConfig
from bellsim.exceptions import DomainError, TruncationError
from bellsim.fock import beam_splitter_tensor, coherent_amplitudes, fock_pattern_oracle, source_tensor
from bellsim.optics import pattern_distribution
from bellsim.scenarios import IDEAL_DETECTORS, LAB_DETECTORS, run_scenario
from bellsim.states import prepare, single_photon


class BeamSplitterTensorTests(SimpleTestCase):
    def test_hong_ou_mandel(self):
        bs = beam_splitter_tensor(2)
        self.assertAlmostEqual(bs[1, 1, 1, 1], 0.0)
        self.assertAlmostEqual(abs(bs[1, 1, 2, 0]) ** 2 + abs(bs[1, 1, 0, 2]) ** 2, 1.0)

    def test_unitary_on_each_photon_number(self):
        bs = beam_splitter_tensor(4)
        for n in range(5):
            for m in range(5):
                self.assertAlmostEqual(float(np.sum(bs[n, m] ** 2)), 1.0, places=12)

    def test_read_only(self):
        with self.assertRaises(ValueError):
            beam_splitter_tensor(3)[0, 0, 0, 0] = 1.0


class SourceTensorTests(SimpleTestCase):
    def test_coherent_amplitudes_poisson(self):
        amps = coherent_amplitudes(math.sqrt(0.3), 10)
        probs = np.abs(amps) ** 2
        self.assertAlmostEqual(probs[1], 0.3 * math.exp(-0.3))
        self.assertAlmostEqual(probs.sum(), 1.0, places=12)

    def test_truncation_error(self):
        with self.assertRaises(TruncationError):
            source_tensor(prepare('z', '0', 0.3), 1)

    def test_bad_cutoff(self):
        with self.assertRaises(DomainError):
            source_tensor(prepare('z', '0', 0.1), 0)

    def test_photon_state_needs_room(self):
        psi = source_tensor(single_photon('x', '+'), 1)
        self.assertAlmostEqual(float(np.sum(np.abs(psi) ** 2)), 1.0)


class OracleTests(SimpleTestCase):
    def test_ideal_single_photon_z(self):
        dist = fock_pattern_oracle(single_photon('z', '0'), single_photon('z', '1'), IDEAL_DETECTORS, cutoff=2)
        self.assertAlmostEqual(dist.psi_minus, 0.5, places=12)
        self.assertAlmostEqual(dist.psi_plus, 0.5, places=12)

    def test_identical_z_photons_bunch(self):
        dist = fock_pattern_oracle(single_photon('z', '0'), single_photon('z', '0'), IDEAL_DETECTORS, cutoff=2)
        self.assertAlmostEqual(dist.psi_minus, 0.0, places=12)
        self.assertAlmostEqual(dist.psi_plus, 0.0, places=12)

    def test_x_basis_interference(self):
        same = fock_pattern_oracle(single_photon('x', '+'), single_photon('x', '+'), IDEAL_DETECTORS, cutoff=2)
        self.assertAlmostEqual(same.psi_minus, 0.0, places=12)
        self.assertAlmostEqual(same.psi_plus, 0.5, places=12)
        orthogonal = fock_pattern_oracle(single_photon('x', '+'), single_photon('x', '-'), IDEAL_DETECTORS, cutoff=2)
        self.assertAlmostEqual(orthogonal.psi_minus, 0.5, places=12)
        self.assertAlmostEqual(orthogonal.psi_plus, 0.0, places=12)

    def test_dead_time_suppresses_psi_plus(self):
        slow = (DetectorConfig(eta=1.0, dark_rate_hz=0.0, tau_ns=75.0),) * 2
        dist = fock_pattern_oracle(single_photon('z', '0'), single_photon('z', '1'), slow, cutoff=2)
        self.assertEqual(dist.psi_plus, 0.0)
        self.assertAlmostEqual(dist.psi_minus, 0.5, places=12)

    def test_matches_coherent_model(self):
        a, b = prepare('x', '+', 0.2), prepare('x', '-', 0.15)
        for theta in (0.0, 1.0, math.pi):
            analytic = pattern_distribution(a, b, LAB_DETECTORS, theta)
            oracle = fock_pattern_oracle(a, b, LAB_DETECTORS, theta, cutoff=10)
            self.assertLess(analytic.max_abs_difference(oracle), 1e-6)


class ScenarioTests(SimpleTestCase):
    def test_builtin_scenarios_pass(self):
        for name in ('weak-coherent-x-basis', 'weak-coherent-z-basis', 'dead-time-suppressed',
                     'single-photon-ideal', 'single-photon-lab-detectors'):
            with self.subTest(name=name):
                self.assertTrue(run_scenario(name).passed)

    def test_random_sweep(self):
        result = run_scenario('random', cutoff=10, seed=7)
        self.assertEqual(len(result.comparisons), 100)
        self.assertLess(result.max_discrepancy, 1e-6)

    def test_low_cutoff_truncates(self):
        with self.assertRaises(TruncationError):
            run_scenario('weak-coherent-x-basis', cutoff=1, mu=0.3)

    def test_unknown_scenario_lists_names(self):
        with self.assertRaisesMessage(DomainError, 'single-photon-ideal'):
            run_scenario('nope')
