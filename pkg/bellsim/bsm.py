"""
Bell state analysis: click-pattern classification, error rates,
efficiencies and the closed-form reference values they are compared with.
"""

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional, Tuple

import numpy as np

from .exceptions import DomainError
from .states import Basis, STATE_PAIRS

# Linear optics, no ancillas: at most half of all Bell states are identified
LINEAR_OPTICS_LIMIT = 0.5
# Only psi- when dead time exceeds the bin separation
PSI_MINUS_ONLY_LIMIT = 0.25
# Three-state analyser bound
THREE_STATE_LIMIT = 5.0 / 16.0


class BSMOutcome(Enum):
    NO_PROJECTION = (0, 'none')
    PSI_MINUS = (1, 'psi-')
    PSI_PLUS = (2, 'psi+')

    def __init__(self, code, label):
        self.code = code
        self.label = label

    @classmethod
    def from_label(cls, label):
        for outcome in cls:
            if outcome.label == label:
                return outcome
        raise DomainError(f'unknown outcome {label!r}')


PROJECTIONS = (BSMOutcome.PSI_MINUS, BSMOutcome.PSI_PLUS)


@dataclass(frozen=True)
class ClickPattern:
    d1_early: bool = False
    d1_late: bool = False
    d2_early: bool = False
    d2_late: bool = False

    @property
    def index(self) -> int:
        return (int(self.d1_early) << 3) | (int(self.d1_late) << 2) | (int(self.d2_early) << 1) | int(self.d2_late)

    @classmethod
    def from_index(cls, index: int) -> 'ClickPattern':
        return cls(*(bool(bit) for bit in PATTERN_BITS[index]))

    @property
    def clicks(self) -> int:
        return int(self.d1_early) + int(self.d1_late) + int(self.d2_early) + int(self.d2_late)


N_PATTERNS = 16
# PATTERN_BITS[index] = (d1_early, d1_late, d2_early, d2_late)
PATTERN_BITS = tuple(itertools.product((0, 1), repeat=4))


def classify(pattern: ClickPattern) -> BSMOutcome:
    """
    psi-: one click per detector, in different bins.
    psi+: both clicks on one detector, early and late.
    Anything else, including three or four clicks, is no projection.
    """
    if pattern.clicks != 2:
        return BSMOutcome.NO_PROJECTION
    if (pattern.d1_early and pattern.d2_late) or (pattern.d1_late and pattern.d2_early):
        return BSMOutcome.PSI_MINUS
    if (pattern.d1_early and pattern.d1_late) or (pattern.d2_early and pattern.d2_late):
        return BSMOutcome.PSI_PLUS
    return BSMOutcome.NO_PROJECTION


# Outcome code for every pattern index
OUTCOME_TABLE = np.array(
    [classify(ClickPattern.from_index(i)).code for i in range(N_PATTERNS)], dtype=np.int8,
)


def is_erroneous(basis, state_a: str, state_b: str, outcome: BSMOutcome) -> bool:
    """
    z: any projection from identical inputs.
    x: psi- from identical inputs, psi+ from orthogonal inputs.
    """
    basis = Basis(basis)
    identical = state_a == state_b
    if basis is Basis.Z:
        return identical and outcome in PROJECTIONS
    if outcome is BSMOutcome.PSI_MINUS:
        return identical
    if outcome is BSMOutcome.PSI_PLUS:
        return not identical
    return False


def eq1_efficiency(eta_det_1, eta_det_2) -> float:
    _check_probability(eta_det_1, eta_det_2)
    return 0.5 * eta_det_1 * eta_det_2


def restricted_efficiency(eta_det_1, eta_det_2) -> float:
    """Analyser limited to psi- projections."""
    _check_probability(eta_det_1, eta_det_2)
    return 0.25 * eta_det_1 * eta_det_2


def basis_averaged_efficiency(eta_z, eta_x) -> float:
    """Average over x, y and z with the y basis taken equal to x."""
    _check_probability(eta_z, eta_x)
    return (eta_z + 2.0 * eta_x) / 3.0


def required_frequency_stability(t0_ns, max_phase_error_deg) -> float:
    """Largest laser detuning (Hz) keeping 2 pi dnu t0 under the phase budget."""
    if not t0_ns > 0:
        raise DomainError('bin separation must be positive')
    return (max_phase_error_deg / 360.0) / (t0_ns * 1e-9)


def phase_error_from_detuning(delta_nu_hz, t0_ns) -> float:
    """Phase error in degrees accumulated across the bin separation."""
    return 360.0 * delta_nu_hz * t0_ns * 1e-9


def max_bin_separation_for_stability(delta_nu_hz, max_phase_error_deg) -> float:
    """Largest t0 (ns) a laser with the given detuning allows."""
    if not delta_nu_hz > 0:
        raise DomainError('detuning must be positive')
    return (max_phase_error_deg / 360.0) / delta_nu_hz * 1e9


def min_bin_separation(detectors) -> float:
    """Bin separation (ns) above which every detector can register psi+."""
    return max(det.tau_ns for det in detectors)


def _check_probability(*values):
    for value in values:
        if not 0.0 <= value <= 1.0:
            raise DomainError(f'efficiency must lie in [0, 1], got {value}')


def ideal_projection_table(eta_1=1.0, eta_2=1.0, psi_plus_enabled=True) -> Dict[Tuple[str, str, str], Dict[BSMOutcome, float]]:
    """
    Single-photon projection probabilities for every same-basis input pair,
    no dark counts. Keys are (basis, state_a, state_b).

    Photons in different bins leave through different ports with probability
    1/2 (psi-, needs eta_1 eta_2) or share a port (psi+, needs eta_k^2).
    Identical z inputs bunch; x inputs interfere so only one of the two
    outcomes survives.
    """
    _check_probability(eta_1, eta_2)
    psi_minus = 0.5 * eta_1 * eta_2
    psi_plus = 0.25 * (eta_1 ** 2 + eta_2 ** 2) if psi_plus_enabled else 0.0
    table = {}
    for basis, pairs in STATE_PAIRS.items():
        for a, b in pairs:
            identical = a == b
            if basis is Basis.Z:
                probs = (0.0, 0.0) if identical else (psi_minus, psi_plus)
            else:
                probs = (0.0, psi_plus) if identical else (psi_minus, 0.0)
            table[(basis.value, a, b)] = {
                BSMOutcome.PSI_MINUS: probs[0],
                BSMOutcome.PSI_PLUS: probs[1],
            }
    return table


@dataclass
class BasisSummary:
    basis: Basis
    n_cycles: int = 0
    projections: Dict[BSMOutcome, int] = field(default_factory=dict)
    errors: Dict[BSMOutcome, int] = field(default_factory=dict)
    efficiencies: Dict[BSMOutcome, float] = field(default_factory=dict)

    def error_rate(self, outcome: BSMOutcome) -> Optional[float]:
        total = self.projections.get(outcome, 0)
        if total == 0:
            return None
        return self.errors.get(outcome, 0) / total

    @property
    def error_rates(self) -> Dict[BSMOutcome, Optional[float]]:
        return {outcome: self.error_rate(outcome) for outcome in PROJECTIONS}

    @property
    def total_efficiency(self) -> float:
        return sum(self.efficiencies.get(outcome, 0.0) for outcome in PROJECTIONS)


@dataclass
class AnalysisReport:
    intensities: Optional[Tuple[float, float]]
    bases: Dict[Basis, BasisSummary] = field(default_factory=dict)
    eq1_reference: Optional[float] = None

    @property
    def has_projections(self) -> bool:
        return any(sum(s.projections.values()) for s in self.bases.values())

    @property
    def basis_averaged(self) -> Optional[float]:
        if Basis.Z not in self.bases or Basis.X not in self.bases:
            return None
        return basis_averaged_efficiency(
            self.bases[Basis.Z].total_efficiency, self.bases[Basis.X].total_efficiency,
        )


def _select_keys(counts, intensities):
    keys = [key for key in counts.entries if counts.entries[key].n_cycles > 0]
    if intensities is None:
        if not keys:
            return [], None
        intensities = (max(k.mu_a for k in keys), max(k.mu_b for k in keys))
    mu_a, mu_b = intensities
    chosen = [k for k in keys if k.mu_a == mu_a and k.mu_b == mu_b]
    return chosen, (mu_a, mu_b)


def error_rates(counts, intensities=None) -> Dict[Basis, Dict[BSMOutcome, Optional[float]]]:
    """Per basis and outcome: erroneous / all projections onto that outcome (None if none)."""
    report = analyze(counts, intensities)
    return {basis: summary.error_rates for basis, summary in report.bases.items()}


def analyze(counts, intensities=None, detector_etas=None) -> AnalysisReport:
    """
    Raw error rates and projection efficiencies at one intensity pair
    (default: the highest intensity on each side).

    The efficiency of an outcome is its per-cycle probability averaged over
    the same-basis input pairs.
    """
    keys, chosen = _select_keys(counts, intensities)
    report = AnalysisReport(intensities=chosen)
    if detector_etas is not None:
        report.eq1_reference = eq1_efficiency(*detector_etas)

    per_pair = {}
    for key in keys:
        tally = counts.entries[key]
        basis = Basis(key.basis)
        summary = report.bases.setdefault(basis, BasisSummary(basis))
        summary.n_cycles += tally.n_cycles
        for outcome in PROJECTIONS:
            n = tally.count(outcome)
            summary.projections[outcome] = summary.projections.get(outcome, 0) + n
            if is_erroneous(basis, key.state_a, key.state_b, outcome):
                summary.errors[outcome] = summary.errors.get(outcome, 0) + n
            per_pair.setdefault((basis, outcome), []).append(n / tally.n_cycles)

    for basis, summary in report.bases.items():
        for outcome in PROJECTIONS:
            rates = per_pair.get((basis, outcome), [])
            summary.efficiencies[outcome] = float(np.mean(rates)) if rates else 0.0
    return report
