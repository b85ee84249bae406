"""
Decoy-state bounds on the single-photon-pair yield and error rate.

Gains measured at the three intensities of each station constrain the
photon-number-resolved yields Y_nm through

    Q_ab = sum_nm P_n(a) P_m(b) Y_nm

The sums are truncated at n, m <= cutoff; the dropped mass T_ab is added
to the lower side of each constraint, so the truncated LP still contains
the true yields. The bounds are labelled "LP decoy bound".
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .bsm import PROJECTIONS, BSMOutcome, is_erroneous
from .exceptions import DomainError, IncompleteDataError, InfeasibleError
from .montecarlo import CountsKey, CountsTable, Tally
from .simplex import LinearProgram, simplex_solve
from .states import STATE_PAIRS, Basis, poisson_probability, poisson_vector

logger = logging.getLogger(__name__)

BOUND_LABEL = 'LP decoy bound'
DEFAULT_CUTOFF = 7
DEFAULT_SIGMAS = 1.0
MIN_CUTOFF = 3
MAX_CUTOFF = 12
# Yield lower bounds at or below this are treated as zero
YIELD_FLOOR = 1e-9
COMBINED = 'combined'
OUTCOME_FILTERS = ('psi-', 'psi+', COMBINED)


def _outcomes_for(outcome_filter: str) -> Tuple[BSMOutcome, ...]:
    if outcome_filter == COMBINED:
        return PROJECTIONS
    if outcome_filter not in OUTCOME_FILTERS:
        raise DomainError(f'unknown outcome filter {outcome_filter!r}; use one of {", ".join(OUTCOME_FILTERS)}')
    return (BSMOutcome.from_label(outcome_filter),)


@dataclass(frozen=True)
class GainEntry:
    """
    Gain and error gain (erroneous projections per cycle) for one
    intensity pair. n_cycles is None for exact, noise-free data.
    """
    gain: float
    error_gain: float
    n_cycles: Optional[int] = None
    n_projections: Optional[int] = None
    n_errors: Optional[int] = None

    def __post_init__(self):
        if not 0.0 <= self.gain <= 1.0:
            raise DomainError(f'gain must lie in [0, 1], got {self.gain}')
        if not 0.0 <= self.error_gain <= self.gain + 1e-15:
            raise DomainError(f'error gain {self.error_gain} must lie in [0, gain={self.gain}]')

    @classmethod
    def from_counts(cls, n_cycles: int, n_projections: int, n_errors: int) -> 'GainEntry':
        if n_cycles <= 0:
            raise IncompleteDataError('intensity pair has no recorded cycles')
        return cls(n_projections / n_cycles, n_errors / n_cycles, n_cycles, n_projections, n_errors)

    @property
    def error_rate(self) -> Optional[float]:
        if self.gain == 0:
            return None
        return min(self.error_gain / self.gain, 1.0)

    def _se(self, k: Optional[int]) -> float:
        if self.n_cycles is None:
            return 0.0
        # One count of uncertainty even when nothing was observed
        p = max(k, 1) / self.n_cycles
        return math.sqrt(p * (1.0 - p) / self.n_cycles)

    @property
    def gain_se(self) -> float:
        return self._se(self.n_projections)

    @property
    def error_gain_se(self) -> float:
        return self._se(self.n_errors)


@dataclass
class GainsTable:
    outcome: str
    intensities_a: Tuple[float, float, float]
    intensities_b: Tuple[float, float, float]
    bases: Dict[Basis, Dict[Tuple[float, float], GainEntry]] = field(default_factory=dict)
    transmission: Optional[Tuple[float, float]] = None

    @property
    def mu(self) -> Tuple[float, float]:
        return self.intensities_a[0], self.intensities_b[0]

    @property
    def nu(self) -> Tuple[float, float]:
        return self.intensities_a[1], self.intensities_b[1]

    def pairs(self):
        return list(itertools.product(self.intensities_a, self.intensities_b))

    def entry(self, basis, mu_a, mu_b) -> GainEntry:
        return self.bases[Basis(basis)][(mu_a, mu_b)]


def _decoy_intensities(values, side) -> Tuple[float, float, float]:
    values = sorted(set(values), reverse=True)
    if len(values) != 3 or values[2] != 0.0 or not values[0] > values[1] > 0.0:
        raise IncompleteDataError(
            f'station {side} needs signal, decoy and vacuum intensities (mu > nu > 0), '
            f'found {", ".join(f"{v:g}" for v in values) or "none"}'
        )
    return tuple(values)


def assemble_gains(counts: CountsTable, outcome: str = COMBINED) -> GainsTable:
    """
    Per basis and intensity pair: projections per cycle and erroneous
    projections per cycle, summed over the basis's input pairs.
    """
    outcomes = _outcomes_for(outcome)
    mus_a, mus_b = counts.intensity_values()
    intensities_a = _decoy_intensities(mus_a, 'A')
    intensities_b = _decoy_intensities(mus_b, 'B')

    totals: Dict[Tuple[Basis, float, float], List[int]] = {}
    for key, tally in counts.entries.items():
        basis = Basis(key.basis)
        slot = totals.setdefault((basis, key.mu_a, key.mu_b), [0, 0, 0])
        slot[0] += tally.n_cycles
        for o in outcomes:
            n = tally.count(o)
            slot[1] += n
            if is_erroneous(basis, key.state_a, key.state_b, o):
                slot[2] += n

    transmission = counts.metadata.get('transmission')
    table = GainsTable(
        outcome=outcome,
        intensities_a=intensities_a,
        intensities_b=intensities_b,
        transmission=tuple(transmission) if transmission else None,
    )
    for basis in sorted({b for b, _, _ in totals}, key=lambda b: b.value):
        entries = {}
        for mu_a, mu_b in table.pairs():
            slot = totals.get((basis, mu_a, mu_b))
            if slot is None or slot[0] == 0:
                raise IncompleteDataError(f'{basis.value} basis is missing intensity pair ({mu_a:g}, {mu_b:g})')
            entries[(mu_a, mu_b)] = GainEntry.from_counts(*slot)
        table.bases[basis] = entries
    if not table.bases:
        raise IncompleteDataError('counts contain no basis')
    return table


# LP construction

def _check_lp_args(gains: GainsTable, basis, cutoff, sigmas) -> Basis:
    if not MIN_CUTOFF <= cutoff <= MAX_CUTOFF:
        raise DomainError(f'photon-number cutoff must lie in [{MIN_CUTOFF}, {MAX_CUTOFF}], got {cutoff}')
    if sigmas < 0:
        raise DomainError(f'confidence sigmas must be >= 0, got {sigmas}')
    basis = Basis(basis)
    if basis not in gains.bases:
        raise IncompleteDataError(f'no gains for the {basis.value} basis')
    return basis


def _weights(a: float, b: float, cutoff: int) -> np.ndarray:
    return np.outer(poisson_vector(a, cutoff), poisson_vector(b, cutoff)).ravel()


def _gain_rows(gains, basis, cutoff, sigmas, kind):
    """
    Rows (coefficients, rhs, label) for  Q - u - T <= w.V <= Q + u,
    where V are yields (kind 'yield') or error gains (kind 'error').
    """
    rows = []
    for a, b in gains.pairs():
        entry = gains.bases[basis][(a, b)]
        w = _weights(a, b, cutoff)
        tail = max(0.0, 1.0 - float(w.sum()))
        if kind == 'yield':
            value, u = entry.gain, sigmas * entry.gain_se
        else:
            value, u = entry.error_gain, sigmas * entry.error_gain_se
        tag = f'{kind}[{basis.value} {a:g},{b:g}]'
        rows.append((w, value + u, f'{tag} upper'))
        lower = value - u - tail
        if lower > 0.0:
            rows.append((-w, -lower, f'{tag} lower'))
    return rows


def _index_11(cutoff: int) -> int:
    return 1 * (cutoff + 1) + 1


def _solve(lp: LinearProgram, what: str):
    try:
        return simplex_solve(lp)
    except InfeasibleError as exc:
        raise InfeasibleError(
            f'{what}: gains are inconsistent with any nonnegative yields '
            f'(phase-1 residual {exc.residual:.3e})',
            violated=exc.violated,
            residual=exc.residual,
        ) from exc


def yield_program(gains: GainsTable, basis, cutoff: int = DEFAULT_CUTOFF, confidence_sigmas: float = DEFAULT_SIGMAS) -> LinearProgram:
    """Minimise Y11 over yields in [0, 1] consistent with the gains."""
    basis = _check_lp_args(gains, basis, cutoff, confidence_sigmas)
    size = (cutoff + 1) ** 2
    rows = _gain_rows(gains, basis, cutoff, confidence_sigmas, 'yield')
    c = np.zeros(size)
    c[_index_11(cutoff)] = 1.0
    return LinearProgram(
        c=c,
        lower=0.0,
        upper=1.0,
        A_ub=np.array([r[0] for r in rows]),
        b_ub=np.array([r[1] for r in rows]),
        ub_labels=[r[2] for r in rows],
    )


def lp_bound_yield(gains: GainsTable, cutoff: int = DEFAULT_CUTOFF, confidence_sigmas: float = DEFAULT_SIGMAS, basis='z') -> float:
    """Smallest Y11 consistent with the measured gains."""
    lp = yield_program(gains, basis, cutoff, confidence_sigmas)
    solution = _solve(lp, f'{Basis(basis).value}-basis yield bound')
    return float(min(max(solution.x[_index_11(cutoff)], 0.0), 1.0))


def _joint_rows(gains, basis, cutoff, sigmas):
    """Yield rows on Y and error rows on B, over the stacked variables [Y | B]."""
    size = (cutoff + 1) ** 2
    zeros = np.zeros(size)
    rows = [(np.concatenate([w, zeros]), rhs, label) for w, rhs, label in _gain_rows(gains, basis, cutoff, sigmas, 'yield')]
    rows += [(np.concatenate([zeros, w]), rhs, label) for w, rhs, label in _gain_rows(gains, basis, cutoff, sigmas, 'error')]
    return rows


def _coupling(cutoff):
    size = (cutoff + 1) ** 2
    labels = [f'B[{n},{m}] <= Y[{n},{m}]' for n in range(cutoff + 1) for m in range(cutoff + 1)]
    return np.hstack([-np.eye(size), np.eye(size)]), labels


def error_program(gains: GainsTable, basis, cutoff: int = DEFAULT_CUTOFF, confidence_sigmas: float = DEFAULT_SIGMAS, y11_lower: float = None) -> LinearProgram:
    """
    Maximise e11 = B11 / Y11 over yields Y and error yields 0 <= B <= Y
    jointly consistent with the gains, with Y11 >= y11_lower.

    The ratio is made linear by the substitution s = 1 / Y11, y = s Y,
    b = s B: every data row  w.V <= q  becomes  w.v - q s <= 0, Y <= 1
    becomes y <= s, and y11 = 1. The objective b11 is then e11 itself.
    All variables lie in [0, 1 / y11_lower].
    """
    basis = _check_lp_args(gains, basis, cutoff, confidence_sigmas)
    if not y11_lower > 0:
        raise DomainError('error bound needs a positive single-photon yield lower bound')
    size = (cutoff + 1) ** 2
    n_vars = 2 * size + 1

    A, labels = [], []
    for w, rhs, label in _joint_rows(gains, basis, cutoff, confidence_sigmas):
        A.append(np.concatenate([w, [-rhs]]))
        labels.append(label)
    coupling, coupling_labels = _coupling(cutoff)
    A.extend(np.hstack([coupling, np.zeros((size, 1))]))
    labels.extend(coupling_labels)
    capped = np.hstack([np.eye(size), np.zeros((size, size)), -np.ones((size, 1))])
    A.extend(capped)
    labels.extend(f'Y[{n},{m}] <= 1' for n in range(cutoff + 1) for m in range(cutoff + 1))

    normalise = np.zeros((1, n_vars))
    normalise[0, _index_11(cutoff)] = 1.0
    c = np.zeros(n_vars)
    c[size + _index_11(cutoff)] = -1.0
    return LinearProgram(
        c=c,
        lower=0.0,
        upper=1.0 / y11_lower,
        A_ub=np.array(A),
        b_ub=np.zeros(len(A)),
        A_eq=normalise,
        b_eq=[1.0],
        ub_labels=labels,
        eq_labels=['Y[1,1] scaled to 1'],
    )


def joint_program(gains: GainsTable, basis, cutoff: int = DEFAULT_CUTOFF, confidence_sigmas: float = DEFAULT_SIGMAS) -> LinearProgram:
    """Maximise B11 over yields and error yields 0 <= B <= Y consistent with the gains."""
    basis = _check_lp_args(gains, basis, cutoff, confidence_sigmas)
    size = (cutoff + 1) ** 2
    rows = _joint_rows(gains, basis, cutoff, confidence_sigmas)
    coupling, coupling_labels = _coupling(cutoff)
    c = np.zeros(2 * size)
    c[size + _index_11(cutoff)] = -1.0
    return LinearProgram(
        c=c,
        lower=0.0,
        upper=1.0,
        A_ub=np.vstack([np.array([r[0] for r in rows]), coupling]),
        b_ub=np.concatenate([[r[1] for r in rows], np.zeros(size)]),
        ub_labels=[r[2] for r in rows] + coupling_labels,
    )


def lp_bound_error(gains: GainsTable, cutoff: int = DEFAULT_CUTOFF, confidence_sigmas: float = DEFAULT_SIGMAS, y11_lower: float = None, basis='z') -> float:
    """
    Largest single-photon-pair error rate consistent with the data, never
    above max(B11) / y11_lower.
    """
    basis = _check_lp_args(gains, basis, cutoff, confidence_sigmas)
    if y11_lower is None:
        y11_lower = lp_bound_yield(gains, cutoff, confidence_sigmas, basis)
    lp = error_program(gains, basis, cutoff, confidence_sigmas, y11_lower)
    try:
        solution = simplex_solve(lp)
    except InfeasibleError as exc:
        # Labelled certificate when the data admit no (Y, B) at all
        _solve(joint_program(gains, basis, cutoff, confidence_sigmas), f'{basis.value}-basis error bound')
        raise InfeasibleError(
            f'{basis.value}-basis error bound: no yields reach the lower bound Y11 >= {y11_lower:.6g}',
            violated=['Y[1,1] >= yield lower bound'],
            residual=exc.residual,
        ) from exc
    size = (cutoff + 1) ** 2
    return float(min(max(solution.x[size + _index_11(cutoff)], 0.0), 1.0))


# Single-photon-pair projection rate

def _check_mu_t(mu, t):
    if not mu > 0:
        raise DomainError(f'mean photon number must be positive, got {mu}')
    if not 0 < t <= 1:
        raise DomainError(f'transmission must lie in (0, 1], got {t}')


def expected_q11(mu: float, t: float, eta_bsm: float) -> float:
    """Single-photon-pair projections per clock cycle: P1(mu)^2 t^2 eta."""
    _check_mu_t(mu, t)
    return poisson_probability(1, mu) ** 2 * t ** 2 * eta_bsm


def efficiency_from_q11(q11: float, mu: float, t: float) -> float:
    _check_mu_t(mu, t)
    if q11 < 0:
        raise DomainError(f'gain must be >= 0, got {q11}')
    return q11 / (poisson_probability(1, mu) ** 2 * t ** 2)


def effective_transmission(transmission: Sequence[float]) -> float:
    """Geometric mean of the two arm transmissions."""
    t_a, t_b = transmission
    return math.sqrt(t_a * t_b)


@dataclass
class DecoyBounds:
    basis: Basis
    outcome: str
    Y11_lower: float
    e11_upper: float
    Q11_lower: float
    eta_bsm: Optional[float]
    mu: Tuple[float, float]
    cutoff: int
    sigmas: float
    transmission: Optional[float] = None
    label: str = BOUND_LABEL


def bound_single_photon(gains: GainsTable, basis, cutoff: int = DEFAULT_CUTOFF, confidence_sigmas: float = DEFAULT_SIGMAS, transmission: Optional[float] = None) -> DecoyBounds:
    basis = Basis(basis)
    y11 = lp_bound_yield(gains, cutoff, confidence_sigmas, basis)
    if y11 > YIELD_FLOOR:
        e11 = lp_bound_error(gains, cutoff, confidence_sigmas, y11, basis)
    else:
        logger.warning(
            '%s basis, %s: single-photon yield lower bound is 0; error rate left unbounded (reported as 1)',
            basis.value, gains.outcome,
        )
        e11 = 1.0

    mu_a, mu_b = gains.mu
    q11 = poisson_probability(1, mu_a) * poisson_probability(1, mu_b) * y11
    if transmission is None and gains.transmission is not None:
        transmission = effective_transmission(gains.transmission)
    eta = y11 / transmission ** 2 if transmission else None
    return DecoyBounds(
        basis=basis,
        outcome=gains.outcome,
        Y11_lower=y11,
        e11_upper=e11,
        Q11_lower=q11,
        eta_bsm=eta,
        mu=(mu_a, mu_b),
        cutoff=cutoff,
        sigmas=confidence_sigmas,
        transmission=transmission,
    )


def decoy_report(counts: CountsTable, cutoff: int = DEFAULT_CUTOFF, confidence_sigmas: float = DEFAULT_SIGMAS, transmission: Optional[float] = None) -> List[DecoyBounds]:
    """Bounds for every basis in the counts, per outcome and combined."""
    results = []
    for outcome in OUTCOME_FILTERS:
        gains = assemble_gains(counts, outcome)
        for basis in gains.bases:
            results.append(bound_single_photon(gains, basis, cutoff, confidence_sigmas, transmission))
    results.sort(key=lambda r: (r.basis.value != 'z', OUTCOME_FILTERS.index(r.outcome)))
    return results


# Known-yield data, for checking the bounds

def gains_from_yields(yields, error_yields, intensities_a, intensities_b, n_cycles=None, bases=('z', 'x'), outcome=COMBINED) -> GainsTable:
    """
    Gains implied by yield and error-yield matrices (indexed [n, m]; photon
    numbers beyond the matrices have zero yield). With n_cycles the gains
    are rounded to whole counts and carry statistical uncertainty.
    """
    yields = np.asarray(yields, dtype=np.float64)
    error_yields = np.asarray(error_yields, dtype=np.float64)
    if yields.shape != error_yields.shape or yields.ndim != 2:
        raise DomainError('yield and error-yield matrices must have the same 2-d shape')
    if np.any(yields < 0) or np.any(yields > 1) or np.any(error_yields < 0) or np.any(error_yields > yields + 1e-15):
        raise DomainError('need 0 <= error yield <= yield <= 1')
    table = GainsTable(outcome, tuple(intensities_a), tuple(intensities_b))
    for basis in bases:
        entries = {}
        for a, b in table.pairs():
            w = np.outer(poisson_vector(a, yields.shape[0] - 1), poisson_vector(b, yields.shape[1] - 1))
            q = float(np.sum(w * yields))
            g = min(float(np.sum(w * error_yields)), q)
            if n_cycles is None:
                entries[(a, b)] = GainEntry(q, g)
            else:
                k = int(round(q * n_cycles))
                k_err = min(int(round(g * n_cycles)), k)
                entries[(a, b)] = GainEntry.from_counts(n_cycles, k, k_err)
        table.bases[Basis(basis)] = entries
    return table


def counts_from_gains(gains: GainsTable, cycles_per_pair: int) -> CountsTable:
    """
    A counts table reproducing the gains: every projection is recorded as
    psi-, errors on identical inputs and correct events on orthogonal ones.
    """
    entries = {}
    for basis, per_pair in gains.bases.items():
        pairs = STATE_PAIRS[basis]
        identical = [p for p in pairs if p[0] == p[1]]
        orthogonal = [p for p in pairs if p[0] != p[1]]
        for (mu_a, mu_b), entry in per_pair.items():
            n_err = round(entry.error_gain * len(pairs) * cycles_per_pair / len(identical))
            n_ok = round((entry.gain - entry.error_gain) * len(pairs) * cycles_per_pair / len(orthogonal))
            if n_err > cycles_per_pair or n_ok > cycles_per_pair:
                raise DomainError(f'gain at ({mu_a:g}, {mu_b:g}) does not fit in {cycles_per_pair} cycles per input pair')
            for a, b in identical:
                entries[CountsKey(basis.value, a, b, mu_a, mu_b)] = Tally(cycles_per_pair, n_err, 0)
            for a, b in orthogonal:
                entries[CountsKey(basis.value, a, b, mu_a, mu_b)] = Tally(cycles_per_pair, n_ok, 0)
    metadata = {'source': 'synthetic'}
    if gains.transmission is not None:
        metadata['transmission'] = list(gains.transmission)
    return CountsTable(entries=entries, metadata=metadata)
