"""Random channel/noise generation and the two-step AF transmission physics.

Complex Gaussian convention: CN(0, v) has independent real and imaginary
parts of variance v/2 each.  All randomness is passed in explicitly (or as
a numpy Generator) so the physics stays deterministic and unit-testable;
the Monte Carlo engine owns stream keying.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import BeamVector, ChannelState, NetworkConfig, PowerPoint


class SymbolOutOfAlphabetError(ValueError):
    pass


@dataclass(frozen=True)
class NoiseDraw:
    """One realization of relay noises (eta0) and receiver noises (eta1)."""

    eta0: np.ndarray  # (R,) complex, CN(0, 1)
    eta1: np.ndarray  # (L,) complex, CN(0, 1)

    def __post_init__(self):
        object.__setattr__(self, "eta0", np.asarray(self.eta0, dtype=complex))
        object.__setattr__(self, "eta1", np.asarray(self.eta1, dtype=complex))

    @classmethod
    def zero(cls, R: int, L: int) -> "NoiseDraw":
        return cls(np.zeros(R, dtype=complex), np.zeros(L, dtype=complex))


def complex_normal(rng: np.random.Generator, shape, var=1.0) -> np.ndarray:
    """Draw CN(0, var) samples: var/2 per real/imaginary component."""
    scale = np.sqrt(np.asarray(var) / 2.0)
    z = rng.standard_normal(tuple(shape) + (2,))
    return scale * (z[..., 0] + 1j * z[..., 1])


def draw_channel(cfg: NetworkConfig, rng: np.random.Generator) -> ChannelState:
    """Draw one channel state: f ~ CN(0, sigma_f), g ~ CN(0, sigma_g), all independent."""
    f = complex_normal(rng, (cfg.K, cfg.R), cfg.sigma_f)
    g = complex_normal(rng, (cfg.R, cfg.L), cfg.sigma_g)
    return ChannelState(f, g)


def draw_noise(cfg: NetworkConfig, rng: np.random.Generator) -> NoiseDraw:
    return NoiseDraw(
        complex_normal(rng, (cfg.R,)), complex_normal(rng, (cfg.L,))
    )


def draw_symbols(cfg: NetworkConfig, rng: np.random.Generator) -> tuple:
    """Uniformly draw one transmit symbol per transmitter."""
    return tuple(
        c.points[rng.integers(c.size)] for c in cfg.constellations
    )


def relay_gain(cfg: NetworkConfig, P: PowerPoint, h: ChannelState, r: int) -> float:
    """Normalization factor of relay r: P_Rr / (1 + sum_k |f_kr|^2 P_Sk)."""
    return float(relay_gains(cfg, P, h)[r])


def relay_gains(cfg: NetworkConfig, P: PowerPoint, h: ChannelState) -> np.ndarray:
    p_s = P.source_powers(cfg)
    denom = 1.0 + (np.abs(h.f) ** 2 * p_s[:, None]).sum(axis=0)
    return P.relay_powers(cfg) / denom


def _check_symbols(cfg: NetworkConfig, s) -> np.ndarray:
    s = tuple(s)
    if len(s) != cfg.K:
        raise SymbolOutOfAlphabetError(f"need one symbol per transmitter (K = {cfg.K})")
    for k, sk in enumerate(s):
        if complex(sk) not in cfg.constellations[k].points:
            raise SymbolOutOfAlphabetError(
                f"symbol {sk!r} is not in the alphabet of transmitter {k + 1}"
            )
    return np.asarray(s, dtype=complex)


def channel_coefficients(cfg: NetworkConfig, P: PowerPoint, h: ChannelState,
                         x: BeamVector) -> np.ndarray:
    """Effective symbol-to-receiver coefficients c[k, l] = sum_r x_r sqrt(rho_r) f_kr g_rl."""
    rho = relay_gains(cfg, P, h)
    w = x.x * np.sqrt(rho)  # (R,)
    return np.einsum("r,kr,rl->kl", w, h.f, h.g)


def transmit(cfg: NetworkConfig, P: PowerPoint, h: ChannelState, x: BeamVector,
             s, noise: NoiseDraw) -> np.ndarray:
    """Received values y_l after the two-step AF protocol, for one symbol tuple.

    y_l = sum_k sum_r x_r sqrt(rho_r) f_kr g_rl sqrt(P_Sk) s_k
          + sum_r x_r g_rl sqrt(rho_r) eta0_r + eta1_l
    """
    s_arr = _check_symbols(cfg, s)
    rho = relay_gains(cfg, P, h)
    c = channel_coefficients(cfg, P, h, x)  # (K, L)
    amp = np.sqrt(P.source_powers(cfg)) * s_arr  # (K,)
    signal = amp @ c  # (L,)
    relay_noise = (x.x * np.sqrt(rho) * noise.eta0) @ h.g  # (L,)
    return signal + relay_noise + noise.eta1


def effective_noise_var(cfg: NetworkConfig, P: PowerPoint, h: ChannelState,
                        x: BeamVector, l: int) -> float:
    """Total variance of the combined noise at receiver l: 1 + sum_r rho_r |g_rl|^2 |x_r|^2."""
    rho = relay_gains(cfg, P, h)
    return float(1.0 + np.sum(rho * np.abs(h.g[:, l]) ** 2 * np.abs(x.x) ** 2))
