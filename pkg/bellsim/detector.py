"""
Superconducting nanowire detector model.

Dead time follows tau = kappa * L_k / R_l, floored by the pile-up limit of
the discriminator. Timestamp streams are filtered with a non-paralysable
(greedy) dead-time rule.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from .exceptions import DomainError, PreconditionError

logger = logging.getLogger(__name__)

CABLE_IMPEDANCE_OHM = 50.0
MIN_HISTOGRAM_DETECTIONS = 10_000


@dataclass(frozen=True)
class DetectorConfig:
    eta: float = 0.775
    dark_rate_hz: float = 10.0
    tau_ns: float = 30.0
    kinetic_inductance: Optional[float] = None
    load_resistance_ohm: float = CABLE_IMPEDANCE_OHM
    pileup_floor_ns: float = 0.0
    kappa: Optional[float] = None

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise DomainError(f'detection efficiency must lie in [0, 1], got {self.eta}')
        for name in ('dark_rate_hz', 'tau_ns', 'pileup_floor_ns'):
            value = getattr(self, name)
            if value < 0 or not math.isfinite(value):
                raise DomainError(f'{name} must be finite and >= 0, got {value}')
        if self.load_resistance_ohm < CABLE_IMPEDANCE_OHM:
            raise DomainError(
                f'load resistance includes the {CABLE_IMPEDANCE_OHM:.0f} ohm cable, '
                f'got {self.load_resistance_ohm}'
            )

    @classmethod
    def from_physics(cls, kinetic_inductance, load_resistance_ohm, kappa, pileup_floor_ns=0.0, **kwargs):
        tau = deadtime_from_physics(kinetic_inductance, load_resistance_ohm, kappa, pileup_floor_ns)
        return cls(
            tau_ns=tau,
            kinetic_inductance=kinetic_inductance,
            load_resistance_ohm=load_resistance_ohm,
            pileup_floor_ns=pileup_floor_ns,
            kappa=kappa,
            **kwargs,
        )

    def with_series_resistor(self, series_ohm: float) -> 'DetectorConfig':
        """Same detector with R_l = 50 ohm + R_s; needs L_k and kappa."""
        if self.kinetic_inductance is None or self.kappa is None:
            raise DomainError('series resistor scaling needs kinetic_inductance and kappa')
        load = CABLE_IMPEDANCE_OHM + series_ohm
        tau = deadtime_from_physics(self.kinetic_inductance, load, self.kappa, self.pileup_floor_ns)
        return replace(self, load_resistance_ohm=load, tau_ns=tau)

    def dark_click_probability(self, window_ns: float) -> float:
        return dark_click_prob(self.dark_rate_hz, window_ns)


def deadtime_from_physics(kinetic_inductance, load_resistance_ohm, kappa, pileup_floor_ns=0.0) -> float:
    if not load_resistance_ohm > 0:
        raise DomainError(f'load resistance must be positive, got {load_resistance_ohm}')
    return max(kappa * kinetic_inductance / load_resistance_ohm, pileup_floor_ns)


def calibrate_kappa(tau_ns, kinetic_inductance, load_resistance_ohm) -> float:
    """kappa from one measured (R_l, tau) pair taken above the pile-up floor."""
    if not load_resistance_ohm > 0 or not kinetic_inductance > 0:
        raise DomainError('calibration needs positive inductance and resistance')
    return tau_ns * load_resistance_ohm / kinetic_inductance


def load_resistance_for_deadtime(target_tau_ns, kinetic_inductance, kappa, pileup_floor_ns=0.0) -> float:
    """Smallest R_l reaching target_tau_ns."""
    if target_tau_ns < pileup_floor_ns:
        raise DomainError(
            f'{target_tau_ns} ns is below the {pileup_floor_ns} ns pile-up floor'
        )
    if not target_tau_ns > 0:
        raise DomainError('target dead time must be positive')
    return kappa * kinetic_inductance / target_tau_ns


# Lab detectors. Kinetic inductance is in arbitrary units (1.0); kappa carries the scale.
DETECTOR_1 = DetectorConfig(
    eta=0.775, dark_rate_hz=10.0, tau_ns=30.0,
    kinetic_inductance=1.0, load_resistance_ohm=50.0, kappa=30.0 * 50.0,
)
DETECTOR_2 = DetectorConfig(
    eta=0.762, dark_rate_hz=10.0, tau_ns=100.0,
    kinetic_inductance=1.0, load_resistance_ohm=50.0, pileup_floor_ns=40.0, kappa=100.0 * 50.0,
)
DETECTOR_2_SERIES = DETECTOR_2.with_series_resistor(300.0)


def _check_sorted(timestamps):
    if timestamps.size > 1 and np.any(np.diff(timestamps) < 0):
        raise PreconditionError('timestamps must be sorted in ascending order')


def deadtime_mask(timestamps, tau_ns, last_kept=-math.inf, closed=False) -> Tuple[np.ndarray, float]:
    """
    Greedy non-paralysable filter.

    Returns (keep mask, time of the last kept event). `last_kept` carries
    detector state across calls. With closed=False an event exactly tau
    after the last kept one survives; with closed=True it is blocked.
    """
    ts = np.asarray(timestamps, dtype=np.float64)
    _check_sorted(ts)
    keep = np.ones(ts.size, dtype=bool)
    if ts.size == 0:
        return keep, last_kept

    prev = np.empty_like(ts)
    prev[0] = last_kept
    prev[1:] = ts[:-1]
    gaps = ts - prev
    blocked = gaps <= tau_ns if closed else gaps < tau_ns

    # An event whose gap to the previous *raw* event is long enough is always
    # kept; only runs of short gaps need the sequential rule.
    suspects = np.flatnonzero(blocked)
    ref = last_kept
    for i in suspects:
        if i > 0 and not blocked[i - 1]:
            ref = ts[i - 1]
        gap = ts[i] - ref
        ok = gap > tau_ns if closed else gap >= tau_ns
        keep[i] = ok
        if ok:
            ref = ts[i]

    kept = np.flatnonzero(keep)
    new_last = float(ts[kept[-1]]) if kept.size else last_kept
    return keep, new_last


def apply_deadtime(timestamps, tau_ns, closed=False) -> np.ndarray:
    """Surviving timestamps: the first is kept, then t_i iff t_i - last kept >= tau."""
    ts = np.asarray(timestamps, dtype=np.float64)
    keep, _ = deadtime_mask(ts, tau_ns, closed=closed)
    return ts[keep]


def dark_click_prob(dark_rate_hz, window_ns) -> float:
    if dark_rate_hz < 0 or window_ns < 0:
        raise DomainError('dark rate and window must be >= 0')
    return -math.expm1(-dark_rate_hz * window_ns * 1e-9)


def surviving_rate(rate_hz, tau_ns) -> float:
    """Detected rate of a Poisson stream behind a non-paralysable dead time."""
    return rate_hz / (1.0 + rate_hz * tau_ns * 1e-9)


@dataclass(frozen=True)
class Histogram:
    bin_width_ns: float
    counts: np.ndarray
    n_detections: int
    tau_ns: float
    rate_hz: float

    @property
    def bin_starts(self) -> np.ndarray:
        return np.arange(self.counts.size) * self.bin_width_ns

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def first_nonzero_ns(self) -> Optional[float]:
        nz = np.flatnonzero(self.counts)
        return float(nz[0] * self.bin_width_ns) if nz.size else None

    def rows(self):
        return [(float(start), int(count)) for start, count in zip(self.bin_starts, self.counts)]


def simulate_stream(rate_hz, duration_s, rng) -> np.ndarray:
    """Homogeneous Poisson arrival times in ns over [0, duration)."""
    expected = rate_hz * duration_s
    # Over-draw gaps, then trim to the window
    n = int(expected + 6.0 * math.sqrt(expected) + 16)
    gaps = rng.exponential(1e9 / rate_hz, size=n)
    times = np.cumsum(gaps)
    return times[times < duration_s * 1e9]


def interarrival_histogram(rate_hz, tau_ns, duration_s, bin_width_ns=1.0, seed=0, rng=None) -> Histogram:
    """
    Histogram of consecutive gaps between detections that survive dead time.
    Total counts = surviving detections - 1.
    """
    if not rate_hz > 0:
        raise DomainError(f'detection rate must be positive, got {rate_hz}')
    if not duration_s > 0 or not bin_width_ns > 0:
        raise DomainError('duration and bin width must be positive')

    if rng is None:
        rng = np.random.default_rng(seed)
    arrivals = simulate_stream(rate_hz, duration_s, rng)
    detections = apply_deadtime(arrivals, tau_ns)
    if detections.size < MIN_HISTOGRAM_DETECTIONS:
        logger.warning(
            'only %d detections in %.3g s at %.3g Hz; the histogram will be noisy',
            detections.size, duration_s, rate_hz,
        )

    deltas = np.diff(detections)
    if deltas.size == 0:
        counts = np.zeros(1, dtype=np.int64)
    else:
        n_bins = int(deltas.max() // bin_width_ns) + 1
        idx = np.floor(deltas / bin_width_ns).astype(np.int64)
        counts = np.bincount(idx, minlength=n_bins)
    logger.debug('histogram: %d detections, %d gaps', detections.size, deltas.size)
    return Histogram(bin_width_ns, counts, int(detections.size), float(tau_ns), float(rate_hz))


def fit_tail_rate(histogram: Histogram, tau_ns: Optional[float] = None) -> float:
    """
    Maximum-likelihood rate of the exponential tail above tau.

    Behind a non-paralysable dead time, gaps are tau + Exp(rate), so the
    estimate is 1 / mean(gap - tau) using bin centres.
    """
    tau = histogram.tau_ns if tau_ns is None else tau_ns
    centres = histogram.bin_starts + histogram.bin_width_ns / 2.0
    mask = centres >= tau
    weights = histogram.counts[mask]
    if weights.sum() == 0:
        raise DomainError('histogram has no mass above tau')
    mean_excess = float(np.average(centres[mask] - tau, weights=weights))
    # Bins straddling tau bias the mean by at most half a bin width
    return 1e9 / mean_excess
