"""
Brute-force photon-number oracle for the beam-splitter analyser.

Each station's two bins are expanded in the Fock basis, the beam splitter
acts on photon-number states bin by bin, and threshold detectors with
efficiency eta click with probability 1 - (1 - p_dark)(1 - eta)^n.
"""

import math
from functools import lru_cache

import numpy as np

from .detector import dark_click_prob
from .exceptions import DomainError, TruncationError
from .optics import PatternDistribution, TimingConfig, detector_joint, suppresses_late
from .states import PhotonState, TimeBinState

TAIL_TOLERANCE = 1e-9
DEFAULT_CUTOFF = 10


@lru_cache(maxsize=16)
def beam_splitter_tensor(cutoff: int) -> np.ndarray:
    """
    U[n, m, p, q]: amplitude for |n>_a |m>_b -> |p>_c |q>_d with
    a -> (c + d)/sqrt2 and b -> (c - d)/sqrt2.
    """
    out_dim = 2 * cutoff + 1
    tensor = np.zeros((cutoff + 1, cutoff + 1, out_dim, out_dim))
    for n in range(cutoff + 1):
        for m in range(cutoff + 1):
            norm = math.factorial(n) * math.factorial(m) * 2.0 ** (n + m)
            for p in range(n + m + 1):
                q = n + m - p
                total = 0.0
                for j in range(max(0, p - m), min(n, p) + 1):
                    k = p - j
                    total += math.comb(n, j) * math.comb(m, k) * (-1) ** (m - k)
                tensor[n, m, p, q] = total * math.sqrt(math.factorial(p) * math.factorial(q) / norm)
    tensor.setflags(write=False)
    return tensor


def coherent_amplitudes(alpha: complex, cutoff: int) -> np.ndarray:
    n = np.arange(cutoff + 1)
    log_fact = np.array([math.lgamma(k + 1) for k in n])
    if alpha == 0:
        amps = np.zeros(cutoff + 1, dtype=complex)
        amps[0] = 1.0
        return amps
    mag = np.exp(-abs(alpha) ** 2 / 2.0 + n * math.log(abs(alpha)) - 0.5 * log_fact)
    return mag * np.exp(1j * n * np.angle(alpha))


def source_tensor(source, cutoff: int) -> np.ndarray:
    """psi[n_early, n_late] for a coherent TimeBinState or an exact PhotonState."""
    if cutoff < 1:
        raise DomainError(f'Fock cutoff must be >= 1, got {cutoff}')
    if isinstance(source, PhotonState):
        if source.max_photons > cutoff:
            raise TruncationError(
                f'photon state holds {source.max_photons} photons, cutoff is {cutoff}'
            )
        psi = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
        for (n_e, n_l), amp in source.terms:
            psi[n_e, n_l] += amp
        return psi

    if not isinstance(source, TimeBinState):
        raise DomainError(f'unsupported oracle input {type(source).__name__}')
    early = coherent_amplitudes(source.amp_early, cutoff)
    late = coherent_amplitudes(source.amp_late, cutoff)
    tail = 1.0 - float(np.sum(np.abs(early) ** 2)) * float(np.sum(np.abs(late) ** 2))
    if tail > TAIL_TOLERANCE:
        raise TruncationError(
            f'Fock cutoff {cutoff} leaves tail mass {tail:.2e} '
            f'(> {TAIL_TOLERANCE:.0e}) for mean photon number {source.intensity:.3g}'
        )
    return np.outer(early, late)


def detector_click_table(detector, p_dark, n_max, suppressed):
    """[n_early, n_late, early click, late click] for one threshold detector."""
    n = np.arange(n_max + 1)
    click = 1.0 - (1.0 - p_dark) * (1.0 - detector.eta) ** n
    return detector_joint(click[:, None], click[None, :], suppressed)


def output_photon_distribution(state_a, state_b, theta, cutoff):
    """P[c_early, c_late, d_early, d_late] after the beam splitter."""
    psi_a = source_tensor(state_a, cutoff)
    psi_b = source_tensor(state_b, cutoff)
    n = np.arange(cutoff + 1)
    # Phase theta on every photon of station B
    phase_b = np.exp(1j * theta * (n[:, None] + n[None, :]))
    psi_b = psi_b * phase_b

    bs = beam_splitter_tensor(cutoff)
    # psi[a_e, a_l] psi[b_e, b_l] -> out[c_e, c_l, d_e, d_l]
    joint = np.einsum('ae,bf->aebf', psi_a, psi_b)
    out = np.einsum('aebf,abpq,efrs->prqs', joint, bs, bs, optimize=True)
    return np.abs(out) ** 2


def fock_pattern_oracle(state_a, state_b, detectors, theta=0.0, cutoff=DEFAULT_CUTOFF, timing=None) -> PatternDistribution:
    timing = timing or TimingConfig()
    probs = output_photon_distribution(state_a, state_b, theta, cutoff)
    norm = probs.sum()
    if not norm > 0:
        raise TruncationError('no probability mass inside the Fock cutoff')
    n_max = probs.shape[0] - 1

    tables = []
    for det in detectors:
        p_dark = dark_click_prob(det.dark_rate_hz, timing.pulse_width_ns)
        tables.append(detector_click_table(det, p_dark, n_max, suppresses_late(det, timing.bin_separation_ns)))
    patterns = np.einsum('prqs,prij,qskl->ijkl', probs, tables[0], tables[1], optimize=True)
    return PatternDistribution(patterns.reshape(16) / norm)
