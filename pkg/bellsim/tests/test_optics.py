import math

import numpy as np
from django.test import SimpleTestCase

from bellsim.bsm import BSMOutcome, ClickPattern
from bellsim.detector import DetectorConfig
from bellsim.exceptions import DomainError
from bellsim.optics import (
    ChannelConfig, PatternDistribution, TimingConfig, attenuate, beamsplit, click_prob,
    pattern_distribution, phase_average, suppresses_late,
)
from bellsim.states import prepare

NO_DARK = (DetectorConfig(eta=0.775, dark_rate_hz=0.0, tau_ns=30.0), DetectorConfig(eta=0.762, dark_rate_hz=0.0, tau_ns=40.0))
SLOW = (DetectorConfig(tau_ns=100.0), DetectorConfig(eta=0.762, tau_ns=100.0))


class ChannelTests(SimpleTestCase):
    def test_twenty_km_transmission(self):
        channel = ChannelConfig()
        self.assertAlmostEqual(channel.loss_db, 4.0)
        self.assertAlmostEqual(channel.transmission, 0.3981, places=4)

    def test_attenuate_scales_intensity(self):
        state = attenuate(prepare('x', '+', 0.11), ChannelConfig())
        self.assertAlmostEqual(state.intensity, 0.11 * 10 ** -0.4)

    def test_negative_length_rejected(self):
        with self.assertRaises(DomainError):
            ChannelConfig(length_km=-1.0)

    def test_timing_must_fit_period(self):
        self.assertAlmostEqual(TimingConfig().period_ns, 200.0)
        with self.assertRaises(DomainError):
            TimingConfig(rep_rate_hz=2e7, bin_separation_ns=75.0)
        with self.assertRaises(DomainError):
            TimingConfig(pulse_width_ns=80.0)


class BeamSplitterTests(SimpleTestCase):
    def test_single_input_splits_evenly(self):
        c, d = beamsplit(prepare('z', '0', 0.2), prepare('z', '0', 0.0))
        self.assertAlmostEqual(c.intensity, 0.1)
        self.assertAlmostEqual(d.intensity, 0.1)

    def test_identical_inputs_interfere(self):
        state = prepare('x', '+', 0.1)
        c, d = beamsplit(state, state, 0.0)
        self.assertAlmostEqual(c.intensity, 0.2)
        self.assertAlmostEqual(d.intensity, 0.0)
        c, d = beamsplit(state, state, math.pi)
        self.assertAlmostEqual(c.intensity, 0.0)


class ClickProbabilityTests(SimpleTestCase):
    def test_click_prob(self):
        self.assertEqual(click_prob(0.0, 0.8, 0.0), 0.0)
        self.assertAlmostEqual(click_prob(0.3, 1.0, 0.0), 1 - math.exp(-0.3))
        self.assertAlmostEqual(click_prob(0.0, 0.8, 1e-3), 1e-3)
        arr = click_prob(np.array([0.0, 0.1]), 0.5, 0.0)
        self.assertEqual(arr.shape, (2,))

    def test_click_prob_domain(self):
        with self.assertRaises(DomainError):
            click_prob(0.1, 1.2, 0.0)
        with self.assertRaises(DomainError):
            click_prob(-0.1, 0.5, 0.0)


class PatternDistributionTests(SimpleTestCase):
    def test_normalised(self):
        dist = pattern_distribution(prepare('z', '0', 0.11), prepare('z', '1', 0.11), NO_DARK)
        self.assertAlmostEqual(dist.probabilities.sum(), 1.0, places=12)
        self.assertGreater(dist.psi_minus, 0.0)
        self.assertGreater(dist.psi_plus, 0.0)

    def test_rejects_unnormalised(self):
        with self.assertRaises(DomainError):
            PatternDistribution(np.full(16, 0.1))
        with self.assertRaises(DomainError):
            PatternDistribution(np.ones(15) / 15)

    def test_identical_x_inputs_never_give_psi_minus_in_phase(self):
        state = prepare('x', '+', 0.11)
        dist = pattern_distribution(state, state, NO_DARK, theta=0.0)
        self.assertEqual(dist.psi_minus, 0.0)
        self.assertGreater(dist.psi_plus, 0.0)

    def test_dead_time_longer_than_bin_separation_removes_psi_plus(self):
        for a, b in (('0', '1'), ('1', '0')):
            dist = pattern_distribution(prepare('z', a, 0.3), prepare('z', b, 0.3), SLOW, theta=0.4)
            self.assertEqual(dist.psi_plus, 0.0)
            self.assertGreater(dist.psi_minus, 0.0)

    def test_dead_time_equal_to_bin_separation_suppresses(self):
        timing = TimingConfig()
        self.assertTrue(suppresses_late(DetectorConfig(tau_ns=75.0), timing.bin_separation_ns))
        self.assertFalse(suppresses_late(DetectorConfig(tau_ns=74.9), timing.bin_separation_ns))

    def test_pattern_lookup(self):
        dist = pattern_distribution(prepare('z', '0', 0.11), prepare('z', '1', 0.11), NO_DARK)
        pattern = ClickPattern(d1_early=True, d2_late=True)
        self.assertEqual(dist[pattern], dist.probabilities[pattern.index])
        self.assertAlmostEqual(
            dist.outcome_probability(BSMOutcome.NO_PROJECTION) + dist.psi_minus + dist.psi_plus, 1.0,
        )

    def test_phase_average(self):
        state = prepare('x', '+', 0.11)
        dist = phase_average(state, state, NO_DARK, n_points=16)
        self.assertGreater(dist.psi_minus, 0.0)
        with self.assertRaises(DomainError):
            phase_average(state, state, NO_DARK, n_points=4)

    def test_z_basis_independent_of_phase(self):
        a, b = prepare('z', '0', 0.11), prepare('z', '1', 0.11)
        d0 = pattern_distribution(a, b, NO_DARK, theta=0.0)
        d1 = pattern_distribution(a, b, NO_DARK, theta=2.0)
        self.assertLess(d0.max_abs_difference(d1), 1e-15)
