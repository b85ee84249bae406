"""
Per-clock-cycle Monte-Carlo of source -> channel -> beam splitter ->
detectors -> classifier.

Clicks are drawn as Bernoulli events from coherent-state click
probabilities. Cycles are processed in fixed-size chunks; chunk k always
draws from the substream PCG64(SeedSequence(seed, spawn_key=(k,))), so the
result does not depend on how chunks are spread over worker processes.
Dead time is applied afterwards, in cycle order, over the sparse click
records, carrying each detector's last accepted timestamp across cycles.
"""

import hashlib
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .bsm import OUTCOME_TABLE, BSMOutcome
from .detector import DetectorConfig, deadtime_mask, dark_click_prob
from .exceptions import ConfigurationError, MergeError
from .fock import fock_pattern_oracle
from .optics import ChannelConfig, TimingConfig, attenuate, pattern_distribution, phase_average
from .states import STATE_PAIRS, Basis, SourceConfig, basis_of, prepare_from_source, single_photon

logger = logging.getLogger(__name__)

CHUNK_CYCLES = 1 << 18
PHASE_MODES = ('random', 'fixed')
SCHEDULE_TOL = 1e-9
# Bit of each (detector, bin) slot in a click mask; matches ClickPattern.index
SLOT_BITS = np.array([8, 4, 2, 1], dtype=np.int64)


class CountsKey(NamedTuple):
    basis: str
    state_a: str
    state_b: str
    mu_a: float
    mu_b: float


@dataclass
class Tally:
    n_cycles: int = 0
    n_psiminus: int = 0
    n_psiplus: int = 0

    def count(self, outcome: BSMOutcome) -> int:
        if outcome is BSMOutcome.PSI_MINUS:
            return self.n_psiminus
        if outcome is BSMOutcome.PSI_PLUS:
            return self.n_psiplus
        return self.n_cycles - self.n_psiminus - self.n_psiplus

    def __add__(self, other: 'Tally') -> 'Tally':
        return Tally(
            self.n_cycles + other.n_cycles,
            self.n_psiminus + other.n_psiminus,
            self.n_psiplus + other.n_psiplus,
        )


@dataclass
class CountsTable:
    entries: Dict[CountsKey, Tally] = field(default_factory=dict)
    seeds: Tuple[int, ...] = ()
    config_digest: Optional[str] = None
    metadata: dict = field(default_factory=dict)

    @classmethod
    def empty(cls) -> 'CountsTable':
        return cls()

    @property
    def is_empty(self) -> bool:
        return not self.entries and self.config_digest is None

    @property
    def total_cycles(self) -> int:
        return sum(t.n_cycles for t in self.entries.values())

    def sorted_items(self):
        return sorted(self.entries.items(), key=lambda item: (
            item[0].basis, item[0].state_a, item[0].state_b, -item[0].mu_a, -item[0].mu_b,
        ))

    def intensity_values(self):
        mus_a = sorted({k.mu_a for k in self.entries}, reverse=True)
        mus_b = sorted({k.mu_b for k in self.entries}, reverse=True)
        return tuple(mus_a), tuple(mus_b)


def merge(a: CountsTable, b: CountsTable) -> CountsTable:
    """Keywise sum of two runs of the same physics (seeds and cycles may differ)."""
    if a.is_empty:
        return CountsTable(dict(b.entries), tuple(sorted(b.seeds)), b.config_digest, dict(b.metadata))
    if b.is_empty:
        return CountsTable(dict(a.entries), tuple(sorted(a.seeds)), a.config_digest, dict(a.metadata))
    if a.config_digest != b.config_digest:
        raise MergeError(
            f'cannot merge counts from different configurations '
            f'({a.config_digest} vs {b.config_digest})'
        )
    entries = dict(a.entries)
    for key, tally in b.entries.items():
        entries[key] = entries.get(key, Tally()) + tally
    return CountsTable(entries, tuple(sorted(a.seeds + b.seeds)), a.config_digest, dict(a.metadata))


class ScheduleEntry(NamedTuple):
    basis: str
    state_a: str
    state_b: str
    mu_a: float
    mu_b: float
    weight: float

    @property
    def key(self) -> CountsKey:
        return CountsKey(self.basis, self.state_a, self.state_b, self.mu_a, self.mu_b)


def default_schedule(intensities_a: Sequence[float], intensities_b: Sequence[float]) -> Tuple[ScheduleEntry, ...]:
    """Uniform over same-basis state pairs and all intensity pairs."""
    combos = [
        (basis.value, a, b, float(mu_a), float(mu_b))
        for basis, pairs in STATE_PAIRS.items()
        for a, b in pairs
        for mu_a in intensities_a
        for mu_b in intensities_b
    ]
    weight = 1.0 / len(combos)
    return tuple(ScheduleEntry(*combo, weight) for combo in combos)


@dataclass(frozen=True)
class RunConfig:
    cycles: int
    seed: int
    sources: Tuple[SourceConfig, SourceConfig] = (SourceConfig(), SourceConfig())
    channels: Tuple[ChannelConfig, ChannelConfig] = (ChannelConfig(), ChannelConfig())
    detectors: Tuple[DetectorConfig, DetectorConfig] = (DetectorConfig(), DetectorConfig())
    timing: TimingConfig = TimingConfig()
    schedule: Tuple[ScheduleEntry, ...] = ()
    phase_mode: str = 'random'
    theta: float = 0.0
    workers: int = 1

    def __post_init__(self):
        if not self.schedule:
            object.__setattr__(
                self, 'schedule', default_schedule(self.sources[0].intensities, self.sources[1].intensities),
            )
        problems = self.validate()
        if problems:
            raise ConfigurationError('inconsistent run configuration', problems)

    def validate(self) -> Dict[str, str]:
        problems = {}
        if int(self.cycles) != self.cycles or self.cycles <= 0:
            problems['cycles'] = f'must be a positive integer, got {self.cycles}'
        if not 0 <= self.seed < 2 ** 64:
            problems['seed'] = 'must fit in 64 bits'
        for name in ('sources', 'channels', 'detectors'):
            if len(getattr(self, name)) != 2:
                problems[name] = 'exactly two entries (Alice, Bob) are required'
        if self.phase_mode not in PHASE_MODES:
            problems['phase_mode'] = f'must be one of {", ".join(PHASE_MODES)}'
        if self.workers < 1:
            problems['workers'] = 'must be >= 1'
        total = sum(entry.weight for entry in self.schedule)
        if abs(total - 1.0) > SCHEDULE_TOL:
            problems['schedule'] = f'weights sum to {total:.12g}, not 1'
        for i, entry in enumerate(self.schedule):
            if entry.weight < 0:
                problems[f'schedule.{i}.weight'] = 'must be >= 0'
            if basis_of(entry.state_a).value != entry.basis or basis_of(entry.state_b).value != entry.basis:
                problems[f'schedule.{i}'] = 'both states must belong to the entry basis'
            if len(self.sources) == 2:
                if entry.mu_a not in self.sources[0].intensities:
                    problems[f'schedule.{i}.mu_a'] = f'{entry.mu_a} is not an intensity of source 0'
                if entry.mu_b not in self.sources[1].intensities:
                    problems[f'schedule.{i}.mu_b'] = f'{entry.mu_b} is not an intensity of source 1'
        return problems

    def to_dict(self) -> dict:
        return {
            'cycles': int(self.cycles),
            'seed': int(self.seed),
            'workers': int(self.workers),
            'sources': [
                {
                    'intensities': [float(mu) for mu in s.intensities],
                    'extinction_db': float(s.extinction_db),
                    'prep_phase_error_rad': float(s.prep_phase_error_rad),
                }
                for s in self.sources
            ],
            'channels': [
                {
                    'length_km': float(c.length_km),
                    'attenuation_db_per_km': float(c.attenuation_db_per_km),
                    'extra_loss_db': float(c.extra_loss_db),
                }
                for c in self.channels
            ],
            'detectors': [
                {
                    'eta': float(d.eta),
                    'dark_rate_hz': float(d.dark_rate_hz),
                    'tau_ns': float(d.tau_ns),
                    'kinetic_inductance': d.kinetic_inductance,
                    'load_resistance_ohm': float(d.load_resistance_ohm),
                    'pileup_floor_ns': float(d.pileup_floor_ns),
                    'kappa': d.kappa,
                }
                for d in self.detectors
            ],
            'timing': {
                'rep_rate_hz': float(self.timing.rep_rate_hz),
                'bin_separation_ns': float(self.timing.bin_separation_ns),
                'pulse_width_ns': float(self.timing.pulse_width_ns),
            },
            'schedule': [entry._asdict() for entry in self.schedule],
            'phase_mode': self.phase_mode,
            'theta': float(self.theta),
        }

    def physics_dict(self) -> dict:
        data = self.to_dict()
        for name in ('cycles', 'seed', 'workers'):
            data.pop(name)
        return data

    def physics_digest(self) -> str:
        return digest(self.physics_dict())

    def config_digest(self) -> str:
        return digest(self.to_dict())


def canonical_json(data) -> str:
    return json.dumps(data, sort_keys=True, separators=(',', ':'))


def digest(data) -> str:
    return hashlib.sha256(canonical_json(data).encode('utf-8')).hexdigest()


@dataclass
class ChunkClicks:
    start: int
    cycles_per_key: np.ndarray
    cycle_offsets: np.ndarray
    keys: np.ndarray
    masks: np.ndarray


def chunk_generator(seed: int, chunk_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(chunk_index,))))


def key_amplitudes(config: RunConfig) -> np.ndarray:
    """[K, 4] amplitudes (A early, A late, B early, B late) at the beam splitter."""
    amps = np.empty((len(config.schedule), 4), dtype=complex)
    for k, entry in enumerate(config.schedule):
        a = attenuate(prepare_from_source(config.sources[0], entry.state_a, entry.mu_a), config.channels[0])
        b = attenuate(prepare_from_source(config.sources[1], entry.state_b, entry.mu_b), config.channels[1])
        amps[k] = (a.amp_early, a.amp_late, b.amp_early, b.amp_late)
    return amps


def _sample_chunk(task) -> ChunkClicks:
    (seed, chunk_index, start, n, probs, amps, eta, p_dark, phase_mode, theta) = task
    rng = chunk_generator(seed, chunk_index)
    keys = rng.choice(probs.size, size=n, p=probs)
    if phase_mode == 'random':
        thetas = rng.random(n) * (2.0 * math.pi)
    else:
        thetas = np.full(n, theta)
    rot = np.exp(1j * thetas)

    sel = amps[keys]
    b_early = sel[:, 2] * rot
    b_late = sel[:, 3] * rot
    lam = np.empty((n, 4))
    lam[:, 0] = 0.5 * np.abs(sel[:, 0] + b_early) ** 2
    lam[:, 1] = 0.5 * np.abs(sel[:, 1] + b_late) ** 2
    lam[:, 2] = 0.5 * np.abs(sel[:, 0] - b_early) ** 2
    lam[:, 3] = 0.5 * np.abs(sel[:, 1] - b_late) ** 2
    p = 1.0 - (1.0 - p_dark) * np.exp(-eta * lam)

    clicks = rng.random((n, 4)) < p
    masks = clicks.astype(np.int64) @ SLOT_BITS
    hit = np.flatnonzero(masks)
    return ChunkClicks(
        start=start,
        cycles_per_key=np.bincount(keys, minlength=probs.size),
        cycle_offsets=hit,
        keys=keys[hit],
        masks=masks[hit],
    )


class DeadTimeFilter:
    """Applies each detector's dead time to click masks in cycle order."""

    def __init__(self, detectors, timing: TimingConfig):
        self.taus = [det.tau_ns for det in detectors]
        self.period_ns = timing.period_ns
        self.offsets = np.array([0.0, timing.bin_separation_ns])
        self.last_kept = [-math.inf] * len(detectors)
        # (early bit, late bit) per detector
        self.bits = [(SLOT_BITS[0], SLOT_BITS[1]), (SLOT_BITS[2], SLOT_BITS[3])]

    def __call__(self, cycles: np.ndarray, masks: np.ndarray) -> np.ndarray:
        masks = masks.copy()
        base = cycles.astype(np.float64) * self.period_ns
        for det, (early_bit, late_bit) in enumerate(self.bits):
            slot_bits = np.array([early_bit, late_bit])
            present = ((masks[:, None] & slot_bits[None, :]) != 0).ravel()
            if not present.any():
                continue
            times = (base[:, None] + self.offsets[None, :]).ravel()
            flat = np.flatnonzero(present)
            keep, self.last_kept[det] = deadtime_mask(times[flat], self.taus[det], self.last_kept[det], closed=True)
            dropped = flat[~keep]
            if dropped.size:
                rows = dropped // 2
                clear = np.where(dropped % 2 == 0, early_bit, late_bit)
                np.bitwise_and.at(masks, rows, ~clear)
        return masks


def _chunk_tasks(config: RunConfig, probs, amps):
    eta = np.array([config.detectors[0].eta] * 2 + [config.detectors[1].eta] * 2)
    p_dark = np.array(
        [dark_click_prob(config.detectors[0].dark_rate_hz, config.timing.pulse_width_ns)] * 2
        + [dark_click_prob(config.detectors[1].dark_rate_hz, config.timing.pulse_width_ns)] * 2
    )
    n_chunks = -(-config.cycles // CHUNK_CYCLES)
    for index in range(n_chunks):
        start = index * CHUNK_CYCLES
        n = min(CHUNK_CYCLES, config.cycles - start)
        yield (config.seed, index, start, n, probs, amps, eta, p_dark, config.phase_mode, config.theta)


def run(config: RunConfig) -> CountsTable:
    """Simulate config.cycles clock cycles; deterministic for a fixed seed."""
    probs = np.array([entry.weight for entry in config.schedule], dtype=np.float64)
    probs = probs / probs.sum()
    amps = key_amplitudes(config)
    n_keys = probs.size

    cycles_per_key = np.zeros(n_keys, dtype=np.int64)
    psi_minus = np.zeros(n_keys, dtype=np.int64)
    psi_plus = np.zeros(n_keys, dtype=np.int64)
    deadtime = DeadTimeFilter(config.detectors, config.timing)

    started = time.perf_counter()
    tasks = _chunk_tasks(config, probs, amps)
    if config.workers > 1:
        executor = ProcessPoolExecutor(max_workers=config.workers)
        chunks = executor.map(_sample_chunk, tasks)
    else:
        executor = None
        chunks = map(_sample_chunk, tasks)
    try:
        for chunk in chunks:
            cycles_per_key += chunk.cycles_per_key
            masks = deadtime(chunk.start + chunk.cycle_offsets, chunk.masks)
            outcomes = OUTCOME_TABLE[masks]
            psi_minus += np.bincount(chunk.keys[outcomes == BSMOutcome.PSI_MINUS.code], minlength=n_keys)
            psi_plus += np.bincount(chunk.keys[outcomes == BSMOutcome.PSI_PLUS.code], minlength=n_keys)
    finally:
        if executor is not None:
            executor.shutdown()
    elapsed = time.perf_counter() - started
    logger.info(
        'simulated %d cycles in %.2f s (%.3g cycles/s)',
        config.cycles, elapsed, config.cycles / elapsed if elapsed > 0 else float('inf'),
    )

    entries = {}
    for k, entry in enumerate(config.schedule):
        tally = Tally(int(cycles_per_key[k]), int(psi_minus[k]), int(psi_plus[k]))
        entries[entry.key] = entries.get(entry.key, Tally()) + tally
    return CountsTable(
        entries=entries,
        seeds=(int(config.seed),),
        config_digest=config.physics_digest(),
        metadata=counts_metadata(config),
    )


def counts_metadata(config: RunConfig) -> dict:
    return {
        'source': 'coherent',
        'transmission': [c.transmission for c in config.channels],
        'detector_eta': [d.eta for d in config.detectors],
        'intensities': [list(s.intensities) for s in config.sources],
    }


SINGLE_PHOTON_LABEL = 1.0


def oracle_counts(cycles_per_key, detectors, timing=None, cutoff=2) -> CountsTable:
    """
    Expected counts for exact single photons from the Fock oracle.
    Intensity labels are 1 (one photon per station).
    """
    timing = timing or TimingConfig()
    entries = {}
    for basis, pairs in STATE_PAIRS.items():
        for a, b in pairs:
            dist = fock_pattern_oracle(single_photon(basis, a), single_photon(basis, b), detectors, 0.0, cutoff, timing)
            key = CountsKey(basis.value, a, b, SINGLE_PHOTON_LABEL, SINGLE_PHOTON_LABEL)
            entries[key] = Tally(
                cycles_per_key,
                int(round(dist.psi_minus * cycles_per_key)),
                int(round(dist.psi_plus * cycles_per_key)),
            )
    physics = {
        'source': 'single-photon',
        'detectors': [[d.eta, d.dark_rate_hz, d.tau_ns] for d in detectors],
        'timing': [timing.rep_rate_hz, timing.bin_separation_ns, timing.pulse_width_ns],
        'cutoff': cutoff,
    }
    return CountsTable(
        entries=entries,
        seeds=(),
        config_digest=digest(physics),
        metadata={
            'source': 'single-photon',
            'transmission': [1.0, 1.0],
            'detector_eta': [d.eta for d in detectors],
            'intensities': [[SINGLE_PHOTON_LABEL], [SINGLE_PHOTON_LABEL]],
        },
    )


def expected_counts(config: RunConfig, n_points: int = 64) -> CountsTable:
    """
    The counts run() converges to: cycles per key from the schedule
    weights, projections from the phase-averaged (or fixed-phase) pattern
    distribution. Dead time acts within a cycle only, which matches run()
    whenever the late bin plus tau ends before the next clock cycle.
    """
    entries = {}
    for entry in config.schedule:
        a = attenuate(prepare_from_source(config.sources[0], entry.state_a, entry.mu_a), config.channels[0])
        b = attenuate(prepare_from_source(config.sources[1], entry.state_b, entry.mu_b), config.channels[1])
        if config.phase_mode == 'random':
            dist = phase_average(a, b, config.detectors, n_points, config.timing)
        else:
            dist = pattern_distribution(a, b, config.detectors, config.theta, config.timing)
        n = int(round(entry.weight * config.cycles))
        tally = Tally(n, int(round(dist.psi_minus * n)), int(round(dist.psi_plus * n)))
        entries[entry.key] = entries.get(entry.key, Tally()) + tally
    metadata = counts_metadata(config)
    metadata['source'] = 'expected'
    return CountsTable(entries=entries, seeds=(), config_digest=config.physics_digest(), metadata=metadata)
