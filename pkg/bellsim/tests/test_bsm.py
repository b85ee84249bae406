from django.test import SimpleTestCase

from bellsim.bsm import (
    LINEAR_OPTICS_LIMIT, OUTCOME_TABLE, PSI_MINUS_ONLY_LIMIT, BSMOutcome, ClickPattern, analyze, basis_averaged_efficiency,
    classify, eq1_efficiency, error_rates, ideal_projection_table, is_erroneous,
    max_bin_separation_for_stability, min_bin_separation, phase_error_from_detuning,
    required_frequency_stability, restricted_efficiency,
)
from bellsim.detector import DetectorConfig
from bellsim.exceptions import DomainError
from bellsim.montecarlo import CountsKey, CountsTable, Tally, oracle_counts
from bellsim.scenarios import IDEAL_DETECTORS, LAB_DETECTORS
from bellsim.states import Basis

LAB_ETAS = (0.775, 0.762)


class ClassifierTests(SimpleTestCase):
    def test_two_click_patterns(self):
        self.assertIs(classify(ClickPattern(d1_early=True, d2_late=True)), BSMOutcome.PSI_MINUS)
        self.assertIs(classify(ClickPattern(d1_late=True, d2_early=True)), BSMOutcome.PSI_MINUS)
        self.assertIs(classify(ClickPattern(d1_early=True, d1_late=True)), BSMOutcome.PSI_PLUS)
        self.assertIs(classify(ClickPattern(d2_early=True, d2_late=True)), BSMOutcome.PSI_PLUS)
        self.assertIs(classify(ClickPattern(d1_early=True, d2_early=True)), BSMOutcome.NO_PROJECTION)

    def test_other_click_counts_fail(self):
        self.assertIs(classify(ClickPattern()), BSMOutcome.NO_PROJECTION)
        self.assertIs(classify(ClickPattern(d1_early=True)), BSMOutcome.NO_PROJECTION)
        self.assertIs(classify(ClickPattern(True, True, True, False)), BSMOutcome.NO_PROJECTION)
        self.assertIs(classify(ClickPattern(True, True, True, True)), BSMOutcome.NO_PROJECTION)

    def test_outcome_table(self):
        self.assertEqual(int((OUTCOME_TABLE == BSMOutcome.PSI_MINUS.code).sum()), 2)
        self.assertEqual(int((OUTCOME_TABLE == BSMOutcome.PSI_PLUS.code).sum()), 2)
        for index in range(16):
            self.assertEqual(ClickPattern.from_index(index).index, index)

    def test_error_definitions(self):
        self.assertTrue(is_erroneous('z', '0', '0', BSMOutcome.PSI_MINUS))
        self.assertTrue(is_erroneous('z', '1', '1', BSMOutcome.PSI_PLUS))
        self.assertFalse(is_erroneous('z', '0', '1', BSMOutcome.PSI_PLUS))
        self.assertTrue(is_erroneous('x', '+', '+', BSMOutcome.PSI_MINUS))
        self.assertFalse(is_erroneous('x', '+', '+', BSMOutcome.PSI_PLUS))
        self.assertTrue(is_erroneous('x', '+', '-', BSMOutcome.PSI_PLUS))
        self.assertFalse(is_erroneous('x', '-', '+', BSMOutcome.PSI_MINUS))

    def test_outcome_labels(self):
        self.assertIs(BSMOutcome.from_label('psi+'), BSMOutcome.PSI_PLUS)
        with self.assertRaises(DomainError):
            BSMOutcome.from_label('phi+')


class EfficiencyTests(SimpleTestCase):
    def test_eq1(self):
        self.assertAlmostEqual(eq1_efficiency(*LAB_ETAS), 0.295275, places=6)
        self.assertAlmostEqual(eq1_efficiency(1.0, 1.0), LINEAR_OPTICS_LIMIT)
        self.assertAlmostEqual(restricted_efficiency(*LAB_ETAS), 0.1476375, places=7)

    def test_basis_average(self):
        self.assertAlmostEqual(basis_averaged_efficiency(0.281, 0.298), 0.293, delta=1e-3)
        with self.assertRaises(DomainError):
            basis_averaged_efficiency(1.2, 0.3)

    def test_frequency_stability(self):
        self.assertAlmostEqual(required_frequency_stability(75.0, 5.0), 185185.185, places=2)
        self.assertAlmostEqual(phase_error_from_detuning(185185.185, 75.0), 5.0, places=5)
        self.assertAlmostEqual(max_bin_separation_for_stability(185185.185, 5.0), 75.0, places=5)
        with self.assertRaises(DomainError):
            required_frequency_stability(0.0, 5.0)

    def test_min_bin_separation(self):
        self.assertEqual(min_bin_separation(LAB_DETECTORS), 40.0)


class IdealTableTests(SimpleTestCase):
    def test_perfect_detectors(self):
        table = ideal_projection_table()
        self.assertEqual(table[('z', '0', '1')], {BSMOutcome.PSI_MINUS: 0.5, BSMOutcome.PSI_PLUS: 0.5})
        self.assertEqual(table[('z', '1', '1')], {BSMOutcome.PSI_MINUS: 0.0, BSMOutcome.PSI_PLUS: 0.0})
        self.assertEqual(table[('x', '+', '+')][BSMOutcome.PSI_MINUS], 0.0)
        self.assertEqual(table[('x', '+', '-')][BSMOutcome.PSI_PLUS], 0.0)

    def test_lab_detectors_average(self):
        table = ideal_projection_table(*LAB_ETAS)
        per_basis = {}
        for (basis, _, _), probs in table.items():
            per_basis.setdefault(basis, []).append(sum(probs.values()))
        eta_z = sum(per_basis['z']) / 4
        eta_x = sum(per_basis['x']) / 4
        self.assertAlmostEqual(eta_z, eta_x)
        self.assertAlmostEqual(basis_averaged_efficiency(eta_z, eta_x), 0.2952961, places=6)

    def test_dead_time_limits_to_psi_minus(self):
        table = ideal_projection_table(psi_plus_enabled=False)
        total = sum(sum(probs.values()) for probs in table.values()) / len(table)
        self.assertAlmostEqual(total, PSI_MINUS_ONLY_LIMIT)
        self.assertTrue(all(probs[BSMOutcome.PSI_PLUS] == 0.0 for probs in table.values()))


class AnalyzeTests(SimpleTestCase):
    def test_ideal_single_photons(self):
        report = analyze(oracle_counts(1_000_000, IDEAL_DETECTORS), detector_etas=(1.0, 1.0))
        self.assertEqual(report.intensities, (1.0, 1.0))
        for basis in (Basis.Z, Basis.X):
            summary = report.bases[basis]
            self.assertEqual(summary.error_rate(BSMOutcome.PSI_MINUS), 0.0)
            self.assertEqual(summary.error_rate(BSMOutcome.PSI_PLUS), 0.0)
            self.assertAlmostEqual(summary.total_efficiency, 0.5, places=6)
        self.assertAlmostEqual(report.eq1_reference, 0.5)
        self.assertAlmostEqual(report.basis_averaged, 0.5, places=6)

    def test_slow_detectors_drop_psi_plus(self):
        slow = (DetectorConfig(eta=1.0, dark_rate_hz=0.0, tau_ns=100.0),) * 2
        report = analyze(oracle_counts(100_000, slow))
        for summary in report.bases.values():
            self.assertIsNone(summary.error_rate(BSMOutcome.PSI_PLUS))
            self.assertEqual(summary.projections[BSMOutcome.PSI_PLUS], 0)

    def test_error_rates_count_wrong_projections(self):
        counts = CountsTable(entries={
            CountsKey('x', '+', '+', 0.1, 0.1): Tally(1000, 3, 40),
            CountsKey('x', '+', '-', 0.1, 0.1): Tally(1000, 37, 2),
            CountsKey('z', '0', '1', 0.1, 0.1): Tally(1000, 50, 50),
            CountsKey('z', '0', '0', 0.1, 0.1): Tally(1000, 1, 0),
            CountsKey('z', '0', '1', 0.05, 0.1): Tally(1000, 500, 0),
        })
        rates = error_rates(counts)
        self.assertAlmostEqual(rates[Basis.X][BSMOutcome.PSI_MINUS], 3 / 40)
        self.assertAlmostEqual(rates[Basis.X][BSMOutcome.PSI_PLUS], 2 / 42)
        self.assertAlmostEqual(rates[Basis.Z][BSMOutcome.PSI_MINUS], 1 / 51)
        self.assertAlmostEqual(rates[Basis.Z][BSMOutcome.PSI_PLUS], 0.0)

    def test_empty_counts(self):
        report = analyze(CountsTable())
        self.assertFalse(report.has_projections)
        self.assertIsNone(report.basis_averaged)
