"""Vectorized kernels over batches of channel states.

These mirror the scalar operations in channel/metrics/decode/quantize and
are cross-checked against them in the test suite; the Monte Carlo engine
and the empirical quantizer run on them.  Shapes: B channel states, n
noise/symbol draws per state, M full symbol tuples.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .model import NetworkConfig
from .channel import complex_normal
from .decode import tuple_group_indices


@dataclass(frozen=True)
class Precomp:
    """Per-config constants reused across chunks."""

    cfg: NetworkConfig
    sizes: tuple
    strides: np.ndarray       # (K,) mixed-radix strides for tuple indices
    amp0: np.ndarray          # (M, K) tuple values scaled by sqrt(p_S)
    diffs0: np.ndarray        # (n_pairs, K) unordered pair differences of amp0
    groups: tuple             # per receiver: (M,) super-symbol index of each tuple
    onehots: tuple            # per receiver: (M, G_l) group indicator matrix


def build_precomp(cfg: NetworkConfig) -> Precomp:
    sizes = cfg.alphabet_sizes
    tuples = np.array(
        list(itertools.product(*[c.points for c in cfg.constellations])),
        dtype=complex,
    )
    amp0 = tuples * np.sqrt(cfg.p_S)
    idx = np.array(list(itertools.combinations(range(len(tuples)), 2)))
    diffs0 = amp0[idx[:, 0]] - amp0[idx[:, 1]]
    strides = np.array([int(np.prod(sizes[k + 1:])) for k in range(cfg.K)])
    groups = tuple(tuple_group_indices(cfg, l) for l in range(cfg.L))
    onehots = tuple(
        np.equal.outer(g, np.arange(int(np.prod([sizes[k] for k in cfg.decode_sets[l]]))))
        .astype(float)
        for l, g in enumerate(groups)
    )
    return Precomp(cfg, sizes, strides, amp0, diffs0, groups, onehots)


def draw_channels(cfg: NetworkConfig, rng: np.random.Generator, B: int):
    f = complex_normal(rng, (B, cfg.K, cfg.R), cfg.sigma_f)
    g = complex_normal(rng, (B, cfg.R, cfg.L), cfg.sigma_g)
    return f, g


def draw_symbol_indices(pre: Precomp, rng: np.random.Generator, B: int, n: int):
    s_idx = np.stack(
        [rng.integers(sz, size=(B, n)) for sz in pre.sizes], axis=-1
    )  # (B, n, K)
    return s_idx, s_idx @ pre.strides  # indices and flat tuple index


def draw_noises(cfg: NetworkConfig, rng: np.random.Generator, B: int, n: int):
    eta0 = complex_normal(rng, (B, n, cfg.R))
    eta1 = complex_normal(rng, (B, n, cfg.L))
    return eta0, eta1


def relay_gain_batch(cfg: NetworkConfig, P: float, f: np.ndarray):
    """(rho, interference) per relay; interference = sum_k |f_kr|^2 P_Sk."""
    interf = np.einsum("bkr,k->br", np.abs(f) ** 2, cfg.p_S * P)
    rho = (cfg.p_R * P) / (1.0 + interf)
    return rho, interf


def local_nsnr_batch(pre: Precomp, P: float, f: np.ndarray, g: np.ndarray,
                     interf: np.ndarray) -> np.ndarray:
    """omega (B, R, L), same closed form as metrics.local_nsnr_matrix."""
    proj = np.einsum("pk,bkr->bpr", pre.diffs0, f)
    q = P * np.min(np.abs(proj) ** 2, axis=1)  # (B, R)
    g2 = np.abs(g) ** 2
    pr = pre.cfg.p_R * P
    denom = 1.0 + interf[:, :, None] + g2 * pr[None, :, None]
    return 0.25 * q[:, :, None] * g2 * pr[None, :, None] / denom


def select_max_min(values: np.ndarray) -> np.ndarray:
    """argmax over relays of the min over receivers; first index wins ties."""
    return np.argmax(values.min(axis=2), axis=1)


def codes_batch(omega: np.ndarray, xi: float, n_bins: int) -> np.ndarray:
    return np.minimum(np.floor(omega / xi), n_bins - 1).astype(np.int64)


def variable_bits_batch(codes: np.ndarray, n_bins: int, R: int) -> np.ndarray:
    """(B, L) compressor output lengths for the variable-length kind."""
    active_bits = (n_bins ** R - 2).bit_length() if n_bins >= 2 else 0
    all_overflow = np.all(codes == n_bins - 1, axis=1)  # (B, L)
    return np.where(all_overflow, 0, active_bits).astype(np.int64)


def selection_receive(pre: Precomp, P: float, f, g, rho, sel, j_true, eta0, eta1):
    """Received samples and decoder inputs when relay `sel[b]` transmits alone.

    Returns (y (B,n,L), means (B,M,L), sigma2 (B,L)).
    """
    B = f.shape[0]
    b_idx = np.arange(B)
    rho_sel = rho[b_idx, sel]                      # (B,)
    rs = np.sqrt(rho_sel)
    fsel = f[b_idx, :, sel]                        # (B, K)
    gsel = g[b_idx, sel, :]                        # (B, L)
    c = rs[:, None, None] * fsel[:, :, None] * gsel[:, None, :]   # (B, K, L)
    means = np.einsum("mk,bkl->bml", pre.amp0 * np.sqrt(P), c)    # (B, M, L)
    sigma2 = 1.0 + rho_sel[:, None] * np.abs(gsel) ** 2           # (B, L)
    eta0_sel = np.take_along_axis(eta0, sel[:, None, None], axis=2)[:, :, 0]
    signal = means[b_idx[:, None], j_true]                        # (B, n, L)
    relay_noise = rs[:, None, None] * gsel[:, None, :] * eta0_sel[:, :, None]
    return signal + relay_noise + eta1, means, sigma2


def decode_errors(pre: Precomp, y, means, sigma2, j_true):
    """Individual-ML decisions vs truth: (per-receiver errors (B,n,L), network (B,n))."""
    logp = -np.abs(y[:, :, None, :] - means[:, None, :, :]) ** 2 \
        / sigma2[:, None, None, :]
    w = np.exp(logp - logp.max(axis=2, keepdims=True))
    B, n = j_true.shape
    rec_err = np.empty((B, n, pre.cfg.L), dtype=bool)
    for l in range(pre.cfg.L):
        dec = np.argmax(w[:, :, :, l] @ pre.onehots[l], axis=2)
        rec_err[:, :, l] = dec != pre.groups[l][j_true]
    return rec_err, rec_err.any(axis=2)
