"""
Built-in oracle scenarios: the analytic coherent-state pattern model and
the closed-form single-photon table checked against brute-force Fock
calculations.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from .bsm import BSMOutcome, ideal_projection_table
from .detector import DetectorConfig
from .exceptions import DomainError
from .fock import DEFAULT_CUTOFF, fock_pattern_oracle
from .optics import TimingConfig, pattern_distribution
from .states import STATE_PAIRS, Basis, SourceConfig, prepare_from_source, single_photon

ORACLE_TOLERANCE = 1e-6
DEFAULT_MU = 0.11
RANDOM_SCENARIOS = 100
RANDOM_MAX_MU = 0.3
PHASES = (0.0, math.pi / 3, math.pi)

# Lab detectors, detector 2 behind its series resistor
LAB_DETECTORS = (
    DetectorConfig(eta=0.775, dark_rate_hz=10.0, tau_ns=30.0),
    DetectorConfig(eta=0.762, dark_rate_hz=10.0, tau_ns=40.0),
)
IDEAL_DETECTORS = (
    DetectorConfig(eta=1.0, dark_rate_hz=0.0, tau_ns=0.0),
    DetectorConfig(eta=1.0, dark_rate_hz=0.0, tau_ns=0.0),
)


@dataclass
class Comparison:
    label: str
    discrepancy: float
    psi_minus: float
    psi_plus: float


@dataclass
class ScenarioResult:
    name: str
    comparisons: List[Comparison] = field(default_factory=list)
    tolerance: float = ORACLE_TOLERANCE

    @property
    def max_discrepancy(self) -> float:
        return max((c.discrepancy for c in self.comparisons), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_discrepancy < self.tolerance


def _coherent_pairs(basis: Basis, mu: float, detectors, cutoff, timing, source=None):
    source = source or SourceConfig()
    out = []
    for a, b in STATE_PAIRS[basis]:
        state_a = prepare_from_source(source, a, mu)
        state_b = prepare_from_source(source, b, mu)
        for theta in PHASES:
            analytic = pattern_distribution(state_a, state_b, detectors, theta, timing)
            oracle = fock_pattern_oracle(state_a, state_b, detectors, theta, cutoff, timing)
            out.append(Comparison(
                label=f'{basis.value} {a}{b} mu={mu:g} theta={theta:.3f}',
                discrepancy=analytic.max_abs_difference(oracle),
                psi_minus=oracle.psi_minus,
                psi_plus=oracle.psi_plus,
            ))
    return out


def weak_coherent_x_basis(cutoff=DEFAULT_CUTOFF, mu=DEFAULT_MU, seed=0):
    return _coherent_pairs(Basis.X, mu, LAB_DETECTORS, cutoff, TimingConfig())


def weak_coherent_z_basis(cutoff=DEFAULT_CUTOFF, mu=DEFAULT_MU, seed=0):
    return _coherent_pairs(Basis.Z, mu, LAB_DETECTORS, cutoff, TimingConfig())


def dead_time_suppressed(cutoff=DEFAULT_CUTOFF, mu=DEFAULT_MU, seed=0):
    detectors = tuple(DetectorConfig(eta=d.eta, dark_rate_hz=d.dark_rate_hz, tau_ns=100.0) for d in LAB_DETECTORS)
    return [
        c for basis in Basis
        for c in _coherent_pairs(basis, mu, detectors, cutoff, TimingConfig())
    ]


def _single_photon_pairs(detectors, cutoff, timing):
    eta_1, eta_2 = detectors[0].eta, detectors[1].eta
    psi_plus_enabled = all(d.tau_ns < timing.bin_separation_ns for d in detectors)
    table = ideal_projection_table(eta_1, eta_2, psi_plus_enabled)
    out = []
    for basis, pairs in STATE_PAIRS.items():
        for a, b in pairs:
            oracle = fock_pattern_oracle(single_photon(basis, a), single_photon(basis, b), detectors, 0.0, cutoff, timing)
            expected = table[(basis.value, a, b)]
            out.append(Comparison(
                label=f'{basis.value} |{a}{b}>',
                discrepancy=max(
                    abs(oracle.psi_minus - expected[BSMOutcome.PSI_MINUS]),
                    abs(oracle.psi_plus - expected[BSMOutcome.PSI_PLUS]),
                ),
                psi_minus=oracle.psi_minus,
                psi_plus=oracle.psi_plus,
            ))
    return out


def single_photon_ideal(cutoff=DEFAULT_CUTOFF, mu=None, seed=0):
    return _single_photon_pairs(IDEAL_DETECTORS, cutoff, TimingConfig())


def single_photon_lab_detectors(cutoff=DEFAULT_CUTOFF, mu=None, seed=0):
    detectors = tuple(DetectorConfig(eta=d.eta, dark_rate_hz=0.0, tau_ns=d.tau_ns) for d in LAB_DETECTORS)
    return _single_photon_pairs(detectors, cutoff, TimingConfig())


def random_scenarios(cutoff=DEFAULT_CUTOFF, mu=None, seed=0, n=RANDOM_SCENARIOS):
    """Random states, intensities up to mu (default 0.3), phases and detectors."""
    max_mu = RANDOM_MAX_MU if mu is None else mu
    rng = np.random.default_rng(seed)
    timing = TimingConfig()
    out = []
    for index in range(n):
        basis = Basis.Z if rng.random() < 0.5 else Basis.X
        a, b = STATE_PAIRS[basis][rng.integers(len(STATE_PAIRS[basis]))]
        mu_a, mu_b = rng.uniform(0.0, max_mu, size=2)
        theta = rng.uniform(0.0, 2.0 * math.pi)
        detectors = tuple(
            DetectorConfig(
                eta=float(rng.uniform(0.3, 1.0)),
                dark_rate_hz=float(rng.choice([0.0, rng.uniform(0.0, 1e5)])),
                tau_ns=float(rng.uniform(0.0, 150.0)),
            )
            for _ in range(2)
        )
        source = SourceConfig(extinction_db=float(rng.uniform(20.0, 60.0)))
        state_a = prepare_from_source(source, a, float(mu_a))
        state_b = prepare_from_source(source, b, float(mu_b))
        analytic = pattern_distribution(state_a, state_b, detectors, theta, timing)
        oracle = fock_pattern_oracle(state_a, state_b, detectors, theta, cutoff, timing)
        out.append(Comparison(
            label=f'#{index:03d} {basis.value} {a}{b} mu=({mu_a:.3f},{mu_b:.3f})',
            discrepancy=analytic.max_abs_difference(oracle),
            psi_minus=oracle.psi_minus,
            psi_plus=oracle.psi_plus,
        ))
    return out


SCENARIOS: Dict[str, Callable] = {
    'weak-coherent-x-basis': weak_coherent_x_basis,
    'weak-coherent-z-basis': weak_coherent_z_basis,
    'dead-time-suppressed': dead_time_suppressed,
    'single-photon-ideal': single_photon_ideal,
    'single-photon-lab-detectors': single_photon_lab_detectors,
    'random': random_scenarios,
}


def run_scenario(name: str, cutoff: int = DEFAULT_CUTOFF, mu: Optional[float] = None, seed: int = 0,
                 tolerance: float = ORACLE_TOLERANCE) -> ScenarioResult:
    """TruncationError propagates when the cutoff cannot hold the states."""
    if name not in SCENARIOS:
        raise DomainError(f'unknown scenario {name!r}; available: {", ".join(sorted(SCENARIOS))}')
    kwargs = {'cutoff': cutoff, 'seed': seed}
    if mu is not None:
        kwargs['mu'] = mu
    return ScenarioResult(name, SCENARIOS[name](**kwargs), tolerance)
