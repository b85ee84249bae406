"""
Coherent-state optics: channel loss, the 50/50 beam splitter and exact
click-pattern distributions for two threshold detectors.

Detector 1 watches beam-splitter output c, detector 2 watches output d.
"""

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .bsm import N_PATTERNS, PATTERN_BITS, ClickPattern, BSMOutcome, OUTCOME_TABLE
from .detector import DetectorConfig, dark_click_prob
from .exceptions import DomainError
from .states import TimeBinState

SQRT_HALF = math.sqrt(0.5)
NORMALIZATION_TOL = 1e-9
DEFAULT_PHASE_POINTS = 16


@dataclass(frozen=True)
class ChannelConfig:
    length_km: float = 20.0
    attenuation_db_per_km: float = 0.2
    extra_loss_db: float = 0.0

    def __post_init__(self):
        for name in ('length_km', 'attenuation_db_per_km', 'extra_loss_db'):
            value = getattr(self, name)
            if value < 0 or not math.isfinite(value):
                raise DomainError(f'{name} must be finite and >= 0, got {value}')

    @property
    def loss_db(self) -> float:
        return self.length_km * self.attenuation_db_per_km + self.extra_loss_db

    @property
    def transmission(self) -> float:
        return transmission_from_db(self.loss_db)


def transmission_from_db(loss_db: float) -> float:
    return 10.0 ** (-loss_db / 10.0)


@dataclass(frozen=True)
class TimingConfig:
    rep_rate_hz: float = 5e6
    bin_separation_ns: float = 75.0
    pulse_width_ns: float = 0.5

    def __post_init__(self):
        if not self.rep_rate_hz > 0:
            raise DomainError('repetition rate must be positive')
        if not 0 < self.pulse_width_ns < self.bin_separation_ns:
            raise DomainError('pulse width must be positive and shorter than the bin separation')
        if not self.bin_separation_ns < self.period_ns:
            raise DomainError(
                f'bin separation {self.bin_separation_ns} ns does not fit in the '
                f'{self.period_ns:.1f} ns clock period'
            )

    @property
    def period_ns(self) -> float:
        return 1e9 / self.rep_rate_hz


def attenuate(state: TimeBinState, channel: ChannelConfig) -> TimeBinState:
    scale = math.sqrt(channel.transmission)
    return state.with_amplitudes(state.amp_early * scale, state.amp_late * scale)


def beamsplit(a: TimeBinState, b: TimeBinState, theta: float = 0.0) -> Tuple[TimeBinState, TimeBinState]:
    """c = (a + b e^{i theta}) / sqrt2 and d = (a - b e^{i theta}) / sqrt2, per bin."""
    rot = complex(math.cos(theta), math.sin(theta))
    b_e, b_l = b.amp_early * rot, b.amp_late * rot
    c = TimeBinState(SQRT_HALF * (a.amp_early + b_e), SQRT_HALF * (a.amp_late + b_l))
    d = TimeBinState(SQRT_HALF * (a.amp_early - b_e), SQRT_HALF * (a.amp_late - b_l))
    return c, d


def click_prob(lam, eta, p_dark):
    """1 - (1 - p_dark) e^{-eta lambda}; accepts scalars or arrays for lambda."""
    if not 0.0 <= eta <= 1.0 or not 0.0 <= p_dark <= 1.0:
        raise DomainError(f'eta and p_dark must lie in [0, 1], got {eta}, {p_dark}')
    lam_arr = np.asarray(lam, dtype=np.float64)
    if np.any(lam_arr < 0):
        raise DomainError('mean photon number at the detector must be >= 0')
    p = 1.0 - (1.0 - p_dark) * np.exp(-eta * lam_arr)
    return float(p) if np.ndim(p) == 0 else p


@dataclass(frozen=True)
class PatternDistribution:
    """Probabilities of the 16 click patterns, indexed by ClickPattern.index."""
    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=np.float64)
        if p.shape != (N_PATTERNS,):
            raise DomainError(f'expected {N_PATTERNS} pattern probabilities, got shape {p.shape}')
        if np.any(p < -NORMALIZATION_TOL) or np.any(p > 1 + NORMALIZATION_TOL):
            raise DomainError('pattern probabilities must lie in [0, 1]')
        if abs(p.sum() - 1.0) > NORMALIZATION_TOL:
            raise DomainError(f'pattern probabilities sum to {p.sum():.12f}, not 1')
        object.__setattr__(self, 'probabilities', p)

    def __getitem__(self, pattern: ClickPattern) -> float:
        return float(self.probabilities[pattern.index])

    def outcome_probability(self, outcome: BSMOutcome) -> float:
        return float(self.probabilities[OUTCOME_TABLE == outcome.code].sum())

    @property
    def psi_minus(self) -> float:
        return self.outcome_probability(BSMOutcome.PSI_MINUS)

    @property
    def psi_plus(self) -> float:
        return self.outcome_probability(BSMOutcome.PSI_PLUS)

    def max_abs_difference(self, other: 'PatternDistribution') -> float:
        return float(np.max(np.abs(self.probabilities - other.probabilities)))


def suppresses_late(detector: DetectorConfig, bin_separation_ns: float) -> bool:
    """A click in the early bin blinds the detector for the late bin."""
    return detector.tau_ns >= bin_separation_ns


def detector_joint(p_early, p_late, suppressed: bool):
    """
    P(early click, late click) for one detector as an array [..., 2, 2]
    indexed [early, late]. Bins are independent unless dead time removes
    the late click after an early one.
    """
    p_early = np.asarray(p_early, dtype=np.float64)
    p_late = np.asarray(p_late, dtype=np.float64)
    joint = np.empty(p_early.shape + (2, 2))
    joint[..., 0, 0] = (1 - p_early) * (1 - p_late)
    joint[..., 0, 1] = (1 - p_early) * p_late
    if suppressed:
        joint[..., 1, 0] = p_early
        joint[..., 1, 1] = 0.0
    else:
        joint[..., 1, 0] = p_early * (1 - p_late)
        joint[..., 1, 1] = p_early * p_late
    return joint


def joint_to_patterns(joint_1, joint_2) -> np.ndarray:
    """Combine two independent detectors' [..., 2, 2] tables into [..., 16]."""
    out = np.empty(np.broadcast_shapes(joint_1.shape[:-2], joint_2.shape[:-2]) + (N_PATTERNS,))
    for index, (d1e, d1l, d2e, d2l) in enumerate(PATTERN_BITS):
        out[..., index] = joint_1[..., d1e, d1l] * joint_2[..., d2e, d2l]
    return out


def _dark_probabilities(detectors, timing):
    return [dark_click_prob(det.dark_rate_hz, timing.pulse_width_ns) for det in detectors]


def output_intensities(state_a: TimeBinState, state_b: TimeBinState, theta):
    """Mean photon numbers [..., 4] at (c early, c late, d early, d late) for theta arrays."""
    theta = np.asarray(theta, dtype=np.float64)
    rot = np.exp(1j * theta)
    a = state_a.amplitudes()
    b = state_b.amplitudes()
    c = SQRT_HALF * (a[None, :] + b[None, :] * rot.reshape(-1, 1))
    d = SQRT_HALF * (a[None, :] - b[None, :] * rot.reshape(-1, 1))
    lam = np.concatenate([np.abs(c) ** 2, np.abs(d) ** 2], axis=1)
    return lam.reshape(theta.shape + (4,))


def pattern_probabilities(state_a, state_b, detectors: Sequence[DetectorConfig], theta, timing=None) -> np.ndarray:
    """Vectorised core of pattern_distribution: returns [..., 16] for an array of phases."""
    timing = timing or TimingConfig()
    det_1, det_2 = detectors
    p_dark_1, p_dark_2 = _dark_probabilities(detectors, timing)
    lam = output_intensities(state_a, state_b, theta)
    p = np.empty_like(lam)
    p[..., 0:2] = click_prob(lam[..., 0:2], det_1.eta, p_dark_1)
    p[..., 2:4] = click_prob(lam[..., 2:4], det_2.eta, p_dark_2)
    joint_1 = detector_joint(p[..., 0], p[..., 1], suppresses_late(det_1, timing.bin_separation_ns))
    joint_2 = detector_joint(p[..., 2], p[..., 3], suppresses_late(det_2, timing.bin_separation_ns))
    return joint_to_patterns(joint_1, joint_2)


def pattern_distribution(state_a, state_b, detectors, theta=0.0, timing=None) -> PatternDistribution:
    return PatternDistribution(pattern_probabilities(state_a, state_b, detectors, float(theta), timing))


def phase_average(state_a, state_b, detectors, n_points=DEFAULT_PHASE_POINTS, timing=None) -> PatternDistribution:
    """Uniform trapezoidal average over theta in [0, 2 pi)."""
    if n_points < 8:
        raise DomainError(f'phase averaging needs at least 8 points, got {n_points}')
    thetas = 2.0 * math.pi * np.arange(n_points) / n_points
    probs = pattern_probabilities(state_a, state_b, detectors, thetas, timing)
    return PatternDistribution(probs.mean(axis=0))
