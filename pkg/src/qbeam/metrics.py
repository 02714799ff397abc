"""SNR and network-SNR measures plus the conditional-NER union-bound chain.

The network SNR (NSNR) is the minimum, over receivers and distinct symbol
pairs, of the pairwise SNR; relay-selection vectors admit a closed form
that each receiver can evaluate from its own observable channels alone.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy import special

from .model import BeamVector, ChannelState, NetworkConfig, PowerPoint, full_alphabet
from .channel import channel_coefficients, effective_noise_var


@dataclass(frozen=True)
class LocalNsnrMatrix:
    """omega[r, l]: receiver l's relay-selection NSNR for relay r."""

    omega: np.ndarray  # (R, L) nonnegative

    def __post_init__(self):
        object.__setattr__(self, "omega", np.asarray(self.omega, dtype=float))
        if np.any(self.omega < 0) or not np.all(np.isfinite(self.omega)):
            raise ValueError("local NSNR entries must be finite and nonnegative")


def qfunc(x) -> np.ndarray:
    """Gaussian tail function Q(x), accurate into the deep-tail regime."""
    return special.ndtr(-np.asarray(x, dtype=float))


def log_qfunc(x) -> np.ndarray:
    return special.log_ndtr(-np.asarray(x, dtype=float))


def _unordered_pairs(n: int):
    return itertools.combinations(range(n), 2)


def pairwise_snr(cfg: NetworkConfig, P: PowerPoint, h: ChannelState, x: BeamVector,
                 l: int, s, s_hat) -> float:
    """Pairwise SNR between symbol tuples s and s_hat at receiver l.

    |sum_k (s_k - s_hat_k) sqrt(P_Sk) c_kl|^2 / (4 sigma2_l) with c the
    effective channel coefficients and sigma2_l the combined noise variance.
    """
    c = channel_coefficients(cfg, P, h, x)[:, l]  # (K,)
    d = np.asarray(s, dtype=complex) - np.asarray(s_hat, dtype=complex)
    num = np.abs(np.sum(d * np.sqrt(P.source_powers(cfg)) * c)) ** 2
    return float(num / (4.0 * effective_noise_var(cfg, P, h, x, l)))


def _pair_snrs(cfg, P, h, x, l) -> np.ndarray:
    """All unordered-pair SNRs at receiver l (each distinct pair once)."""
    tuples = np.asarray(full_alphabet(cfg), dtype=complex)  # (M, K)
    c = channel_coefficients(cfg, P, h, x)[:, l]
    amp = tuples * np.sqrt(P.source_powers(cfg))  # (M, K)
    proj = amp @ c  # (M,)
    idx = np.array(list(_unordered_pairs(len(tuples))))
    num = np.abs(proj[idx[:, 0]] - proj[idx[:, 1]]) ** 2
    return num / (4.0 * effective_noise_var(cfg, P, h, x, l))


def receiver_nsnr(cfg: NetworkConfig, P: PowerPoint, h: ChannelState,
                  x: BeamVector, l: int) -> float:
    """Minimum pairwise SNR over all distinct symbol-tuple pairs at receiver l."""
    return float(np.min(_pair_snrs(cfg, P, h, x, l)))


def network_nsnr(cfg: NetworkConfig, P: PowerPoint, h: ChannelState,
                 x: BeamVector) -> float:
    """NSNR: minimum of receiver_nsnr over all receivers."""
    return min(receiver_nsnr(cfg, P, h, x, l) for l in range(cfg.L))


def local_nsnr_matrix(cfg: NetworkConfig, P: PowerPoint,
                      h: ChannelState) -> LocalNsnrMatrix:
    """Closed-form relay-selection NSNRs omega[r, l].

    omega[r, l] = min over distinct pairs of
    (1/4) |sum_k (s_k - s_hat_k) sqrt(P_Sk) f_kr|^2 |g_rl|^2 P_Rr
    / (1 + sum_k |f_kr|^2 P_Sk + |g_rl|^2 P_Rr).
    Evaluated directly, not through the general pairwise SNR.
    """
    p_s = P.source_powers(cfg)
    p_r = P.relay_powers(cfg)
    tuples = np.asarray(full_alphabet(cfg), dtype=complex)
    amp = tuples * np.sqrt(p_s)  # (M, K)
    idx = np.array(list(_unordered_pairs(len(tuples))))
    diffs = amp[idx[:, 0]] - amp[idx[:, 1]]  # (n_pairs, K)
    # q[r] = min over pairs of |sum_k diff_k f_kr|^2; the remaining factors
    # are pair-independent, so the min factorizes out of the full ratio.
    q = np.min(np.abs(diffs @ h.f) ** 2, axis=0)  # (R,)
    g2 = np.abs(h.g) ** 2  # (R, L)
    interference = (np.abs(h.f) ** 2 * p_s[:, None]).sum(axis=0)  # (R,)
    denom = 1.0 + interference[:, None] + g2 * p_r[:, None]
    omega = 0.25 * q[:, None] * g2 * p_r[:, None] / denom
    return LocalNsnrMatrix(omega)


def cner_union_bound(cfg: NetworkConfig, P: PowerPoint, h: ChannelState,
                     x: BeamVector) -> tuple:
    """Bounds on the conditional network error rate at a fixed (x, h).

    Returns (B_sum, B_minQ, B_exp):
      B_sum  = (1/|S|) sum_l sum_pairs Q(sqrt(2 gamma_pair)),
               each distinct pair counted once;
      B_minQ = 2 C0 Q(sqrt(2 gamma_network));
      B_exp  = C0 exp(-gamma_network);  C0 = L (|S| - 1) / 4.
    B_sum <= B_minQ <= B_exp holds pointwise.
    """
    m = cfg.joint_alphabet_size()
    c0 = cfg.L * (m - 1) / 4.0
    gammas = [np.asarray(_pair_snrs(cfg, P, h, x, l)) for l in range(cfg.L)]
    b_sum = sum(float(np.sum(qfunc(np.sqrt(2.0 * g)))) for g in gammas) / m
    g_net = min(float(np.min(g)) for g in gammas)
    # log-domain forms survive deep tails where Q and exp underflow
    b_minq = float(np.exp(np.log(2.0 * c0) + log_qfunc(np.sqrt(2.0 * g_net))))
    b_exp = float(np.exp(np.log(c0) - g_net))
    return b_sum, b_minq, b_exp
