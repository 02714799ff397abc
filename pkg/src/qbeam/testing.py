"""Shared fixtures for the test suite and the built-in self-check.

Only instance generators and reference configurations live here; oracle
formulas stay local to their checks so the dual-route comparisons remain
independent.
"""

from __future__ import annotations

import numpy as np

from .model import (BeamVector, ChannelState, NetworkConfig, builtin_constellation,
                    validate_config)
from .channel import complex_normal

# Local-NSNR matrix (rows: relays, columns: receivers) used by the quantizer
# walkthrough in docs, demos, tests and the self-check.
WALKTHROUGH_OMEGA = np.array([
    [1.7, 0.28],
    [0.8, 0.67],
    [1.2, 2.3],
])
WALKTHROUGH_XI = 0.5
WALKTHROUGH_BINS = 5


def equal_network() -> NetworkConfig:
    """K=R=L=2, all variances and power coefficients 1, BPSK everywhere."""
    cfg = NetworkConfig(
        K=2, L=2, R=2,
        sigma_f=np.ones((2, 2)),
        sigma_g=np.ones((2, 2)),
        p_S=np.ones(2),
        p_R=np.ones(2),
        constellations=(builtin_constellation("bpsk"),) * 2,
        decode_sets=((0, 1), (0, 1)),
    )
    validate_config(cfg)
    return cfg


def unequal_network() -> NetworkConfig:
    """K=R=3, L=4 benchmark with unequal variances, powers and alphabets."""
    cfg = NetworkConfig(
        K=3, L=4, R=3,
        sigma_f=np.array([[2.0, 1.0, 0.7],
                          [1.5, 0.9, 3.0],
                          [1.0, 4.0, 0.5]]),
        sigma_g=np.array([[7.0, 1.2, 2.5, 0.9],
                          [0.4, 1.3, 3.0, 2.0],
                          [1.3, 0.9, 1.6, 5.0]]),
        p_S=np.array([1.0, 1.3, 0.7]),
        p_R=np.array([0.6, 2.0, 0.7]),
        constellations=(builtin_constellation("bpsk"),
                        builtin_constellation("arc4"),
                        builtin_constellation("bpsk")),
        decode_sets=((0, 1, 2),) * 4,
    )
    validate_config(cfg)
    return cfg


def random_config(rng: np.random.Generator, max_dim: int = 3) -> NetworkConfig:
    """A random valid network: dimensions, variances, powers, alphabets, decode sets."""
    K = int(rng.integers(1, max_dim + 1))
    R = int(rng.integers(1, max_dim + 1))
    L = int(rng.integers(1, max_dim + 1))
    cons = tuple(
        builtin_constellation(rng.choice(["bpsk", "arc4"])) for _ in range(K)
    )
    dsets = []
    for _ in range(L):
        size = int(rng.integers(1, K + 1))
        dsets.append(set(rng.choice(K, size=size, replace=False).tolist()))
    for k in range(K):  # coverage invariant
        if not any(k in d for d in dsets):
            dsets[int(rng.integers(L))].add(k)
    cfg = NetworkConfig(
        K=K, L=L, R=R,
        sigma_f=rng.uniform(0.2, 3.0, size=(K, R)),
        sigma_g=rng.uniform(0.2, 3.0, size=(R, L)),
        p_S=rng.uniform(0.3, 2.0, size=K),
        p_R=rng.uniform(0.3, 2.0, size=R),
        constellations=cons,
        decode_sets=tuple(tuple(sorted(d)) for d in dsets),
    )
    validate_config(cfg)
    return cfg


def random_state(cfg: NetworkConfig, rng: np.random.Generator) -> ChannelState:
    return ChannelState(
        complex_normal(rng, (cfg.K, cfg.R), cfg.sigma_f),
        complex_normal(rng, (cfg.R, cfg.L), cfg.sigma_g),
    )


def random_beam(cfg: NetworkConfig, rng: np.random.Generator) -> BeamVector:
    mags = rng.uniform(0.0, 1.0, size=cfg.R)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=cfg.R)
    return BeamVector(mags * np.exp(1j * phases))
