"""Joint and individual maximum-likelihood decoders and error detection.

The individual decoder marginalizes the posterior over the symbols a
receiver is not interested in; the marginalization runs in log-sum-exp
form because the exponents span hundreds of orders of magnitude across a
power sweep.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .model import (BeamVector, ChannelState, NetworkConfig, PowerPoint,
                    full_alphabet, super_alphabet)
from .channel import channel_coefficients, effective_noise_var


@dataclass(frozen=True)
class DecodeOutcome:
    """Per-receiver decoded super-symbols and error flags for one trial."""

    decoded: tuple          # length L, super-symbol tuples
    receiver_error: tuple   # length L, bool
    network_error: bool     # OR of receiver flags


def tuple_group_indices(cfg: NetworkConfig, l: int) -> np.ndarray:
    """Map each full-tuple index to its super-symbol index at receiver l."""
    sizes = cfg.alphabet_sizes
    dset = cfg.decode_sets[l]
    idx_grid = np.array(list(itertools.product(*[range(n) for n in sizes])))
    sub = idx_grid[:, list(dset)].T
    return np.ravel_multi_index(tuple(sub), tuple(sizes[k] for k in dset))


def receive_means(cfg: NetworkConfig, P: PowerPoint, h: ChannelState,
                  x: BeamVector, l: int) -> np.ndarray:
    """Noise-free received value at receiver l for every full symbol tuple."""
    tuples = np.asarray(full_alphabet(cfg), dtype=complex)  # (M, K)
    c = channel_coefficients(cfg, P, h, x)[:, l]
    return (tuples * np.sqrt(P.source_powers(cfg))) @ c  # (M,)


def _joint_decision(y: complex, means: np.ndarray) -> int:
    """Index of the most likely full tuple; ties fall to the lowest index."""
    return int(np.argmin(np.abs(y - means) ** 2))


def _individual_decision(y: complex, means: np.ndarray, sigma2: float,
                         groups: np.ndarray, n_groups: int) -> int:
    """Most likely super-symbol after marginalizing interfering symbols.

    Log-sum-exp with max subtraction; ties fall to the lowest super index.
    """
    logp = -np.abs(y - means) ** 2 / sigma2
    w = np.exp(logp - np.max(logp))
    scores = np.zeros(n_groups)
    np.add.at(scores, groups, w)
    return int(np.argmax(scores))


def joint_ml(cfg: NetworkConfig, P: PowerPoint, h: ChannelState, x: BeamVector,
             l: int, y_l: complex) -> tuple:
    """Full-tuple ML decision at receiver l (uniform priors)."""
    means = receive_means(cfg, P, h, x, l)
    return full_alphabet(cfg)[_joint_decision(y_l, means)]


def individual_ml(cfg: NetworkConfig, P: PowerPoint, h: ChannelState,
                  x: BeamVector, l: int, y_l: complex) -> tuple:
    """Super-symbol ML decision at receiver l over its decode set."""
    means = receive_means(cfg, P, h, x, l)
    sigma2 = effective_noise_var(cfg, P, h, x, l)
    groups = tuple_group_indices(cfg, l)
    alphabet = super_alphabet(cfg, l)
    j = _individual_decision(y_l, means, sigma2, groups, len(alphabet))
    return alphabet[j]


def restrict_symbols(cfg: NetworkConfig, s, l: int) -> tuple:
    """Restriction of a full symbol tuple to receiver l's decode set."""
    s = tuple(s)
    return tuple(s[k] for k in cfg.decode_sets[l])


def detect_errors(cfg: NetworkConfig, s, decoded) -> DecodeOutcome:
    """Flag each receiver whose decision differs from its transmitted super-symbol."""
    decoded = tuple(tuple(d) for d in decoded)
    if len(decoded) != cfg.L:
        raise ValueError(f"need one decision per receiver (L = {cfg.L})")
    flags = tuple(
        decoded[l] != restrict_symbols(cfg, s, l) for l in range(cfg.L)
    )
    return DecodeOutcome(decoded, flags, any(flags))
