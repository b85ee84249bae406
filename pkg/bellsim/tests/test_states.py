import math

from django.test import SimpleTestCase

from bellsim.exceptions import DomainError
from bellsim.states import (
    Basis, SourceConfig, apply_extinction, apply_prep_phase_error, basis_of, poisson_probability,
    poisson_vector, prepare, prepare_from_source, single_photon,
)


class PrepareTests(SimpleTestCase):
    def test_z_states_populate_one_bin(self):
        zero = prepare(Basis.Z, '0', 0.11)
        one = prepare('z', '1', 0.11)
        self.assertAlmostEqual(zero.intensity_early, 0.11)
        self.assertEqual(zero.intensity_late, 0.0)
        self.assertEqual(one.intensity_early, 0.0)
        self.assertAlmostEqual(one.intensity_late, 0.11)

    def test_x_states_split_intensity_with_relative_phase(self):
        plus = prepare('x', '+', 0.1)
        minus = prepare('x', '-', 0.1)
        self.assertAlmostEqual(plus.intensity_early, 0.05)
        self.assertAlmostEqual(plus.intensity_late, 0.05)
        self.assertAlmostEqual(plus.amp_late, plus.amp_early)
        self.assertAlmostEqual(minus.amp_late, -minus.amp_early)

    def test_global_phase_leaves_intensities(self):
        state = prepare('x', '-', 0.2, global_phase=1.3)
        self.assertAlmostEqual(state.intensity, 0.2)

    def test_rejects_bad_inputs(self):
        with self.assertRaises(DomainError):
            prepare('z', '+', 0.1)
        with self.assertRaises(DomainError):
            prepare('x', '+', -0.1)
        with self.assertRaises(DomainError):
            basis_of('2')

    def test_vacuum_intensity(self):
        self.assertEqual(prepare('z', '0', 0.0).intensity, 0.0)


class SourceImperfectionTests(SimpleTestCase):
    def test_extinction_leaks_into_empty_bin(self):
        state = apply_extinction(prepare('z', '0', 0.11), 50.0, 0.11)
        self.assertAlmostEqual(state.intensity_late, 0.11 * 1e-5, places=15)
        self.assertAlmostEqual(state.intensity_early, 0.11)

    def test_infinite_extinction_and_vacuum_unchanged(self):
        state = prepare('z', '1', 0.05)
        self.assertEqual(apply_extinction(state, math.inf, 0.05), state)
        vacuum = prepare('z', '1', 0.0)
        self.assertEqual(apply_extinction(vacuum, 20.0, 0.0), vacuum)

    def test_phase_error_rotates_late_bin_only(self):
        state = apply_prep_phase_error(prepare('x', '-', 0.1), math.pi)
        self.assertAlmostEqual(state.amp_late, state.amp_early)

    def test_phase_error_applies_to_minus_only(self):
        source = SourceConfig(extinction_db=50.0, prep_phase_error_rad=0.2)
        plus = prepare_from_source(source, '+', 0.1)
        self.assertAlmostEqual(plus.amp_late, plus.amp_early)
        minus = prepare_from_source(source, '-', 0.1)
        self.assertNotAlmostEqual(minus.amp_late, -minus.amp_early)

    def test_source_intensities_validated(self):
        with self.assertRaises(DomainError):
            SourceConfig(intensities=(0.05, 0.11, 0.0))
        with self.assertRaises(DomainError):
            SourceConfig(intensities=(0.11, 0.05))
        self.assertEqual(SourceConfig().signal, 0.11)


class PhotonNumberTests(SimpleTestCase):
    def test_single_photon_terms(self):
        zero = single_photon('z', '0')
        self.assertEqual(zero.as_dict(), {(1, 0): 1.0})
        plus = single_photon('x', '+').as_dict()
        self.assertAlmostEqual(abs(plus[(1, 0)]) ** 2, 0.5)
        self.assertAlmostEqual(abs(plus[(0, 1)]) ** 2, 0.5)
        self.assertEqual(single_photon('x', '-').max_photons, 1)

    def test_poisson(self):
        self.assertAlmostEqual(poisson_probability(1, 0.11), 0.11 * math.exp(-0.11))
        self.assertEqual(poisson_probability(0, 0.0), 1.0)
        self.assertEqual(list(poisson_vector(0.0, 3)), [1.0, 0.0, 0.0, 0.0])
        self.assertAlmostEqual(poisson_vector(0.5, 30).sum(), 1.0)
        with self.assertRaises(DomainError):
            poisson_probability(1, -0.1)
