"""Network description, constellations and super-symbol alphabets.

A network is a set of K transmitters, R amplify-and-forward relays and L
receivers with no direct transmitter-receiver links.  Every other module
consumes the immutable :class:`NetworkConfig` built here.

Index conventions: transmitter/relay/receiver indices are 0-based
throughout the Python API; configuration files and human-readable messages
use 1-based indices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

CONSTELLATION_POWER_TOL = 1e-12
BEAM_MAGNITUDE_TOL = 1e-12


class ConfigError(ValueError):
    """A network description violates one of its invariants."""


class EmptyDecodeSetError(ConfigError):
    pass


class UncoveredTransmitterError(ConfigError):
    pass


class NonPositiveParameterError(ConfigError):
    pass


class UnnormalizedConstellationError(ConfigError):
    pass


class UnknownConstellationError(ConfigError):
    pass


@dataclass(frozen=True)
class Constellation:
    """A finite symbol alphabet with unit average power.

    ``points`` are the complex constellation symbols; their mean squared
    magnitude must equal 1 (the per-transmitter power normalization).
    """

    points: tuple
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(complex(p) for p in self.points))

    @property
    def size(self) -> int:
        return len(self.points)

    def mean_power(self) -> float:
        return float(np.mean(np.abs(np.asarray(self.points)) ** 2))


def builtin_constellation(name: str) -> Constellation:
    """Return one of the named built-in constellations.

    ``bpsk`` is {+1, -1}; ``arc4`` is the four unit-modulus points at
    angles 45, 90, 135 and 180 degrees.
    """
    if name == "bpsk":
        return Constellation((1.0 + 0.0j, -1.0 + 0.0j), name="bpsk")
    if name == "arc4":
        pts = tuple(np.exp(1j * np.pi * theta / 4) for theta in (1, 2, 3, 4))
        return Constellation(pts, name="arc4")
    raise UnknownConstellationError(
        f"unknown constellation {name!r}; built-ins are 'bpsk' and 'arc4'"
    )


@dataclass(frozen=True)
class NetworkConfig:
    """Static description of one relay-interference network.

    sigma_f[k, r] is the variance of the transmitter-k to relay-r channel,
    sigma_g[r, l] the variance of the relay-r to receiver-l channel.
    p_S / p_R are the per-terminal power coefficients: at power level P the
    k-th transmitter uses P_Sk = p_S[k] * P and the r-th relay P_Rr =
    p_R[r] * P.  decode_sets[l] lists the (0-based) transmitters whose
    symbols receiver l must decode.
    """

    K: int
    L: int
    R: int
    sigma_f: np.ndarray
    sigma_g: np.ndarray
    p_S: np.ndarray
    p_R: np.ndarray
    constellations: tuple
    decode_sets: tuple

    def __post_init__(self):
        object.__setattr__(self, "sigma_f", np.asarray(self.sigma_f, dtype=float))
        object.__setattr__(self, "sigma_g", np.asarray(self.sigma_g, dtype=float))
        object.__setattr__(self, "p_S", np.asarray(self.p_S, dtype=float))
        object.__setattr__(self, "p_R", np.asarray(self.p_R, dtype=float))
        object.__setattr__(self, "constellations", tuple(self.constellations))
        object.__setattr__(
            self, "decode_sets", tuple(tuple(sorted(d)) for d in self.decode_sets)
        )

    @property
    def alphabet_sizes(self) -> tuple:
        return tuple(c.size for c in self.constellations)

    def joint_alphabet_size(self) -> int:
        return int(np.prod(self.alphabet_sizes))


def validate_config(cfg: NetworkConfig) -> None:
    """Raise a ConfigError naming the first violated invariant."""
    if not (cfg.K >= 1 and cfg.L >= 1 and cfg.R >= 1):
        raise NonPositiveParameterError("K, L and R must all be >= 1")
    if cfg.sigma_f.shape != (cfg.K, cfg.R):
        raise ConfigError(
            f"sigma_f must be K x R = {cfg.K} x {cfg.R}, got {cfg.sigma_f.shape}"
        )
    if cfg.sigma_g.shape != (cfg.R, cfg.L):
        raise ConfigError(
            f"sigma_g must be R x L = {cfg.R} x {cfg.L}, got {cfg.sigma_g.shape}"
        )
    if cfg.p_S.shape != (cfg.K,):
        raise ConfigError(f"p_S must have length K = {cfg.K}")
    if cfg.p_R.shape != (cfg.R,):
        raise ConfigError(f"p_R must have length R = {cfg.R}")
    for mat_name, mat in (("sigma_f", cfg.sigma_f), ("sigma_g", cfg.sigma_g),
                          ("p_S", cfg.p_S), ("p_R", cfg.p_R)):
        if not np.all(np.isfinite(mat)) or np.any(mat <= 0):
            raise NonPositiveParameterError(
                f"{mat_name} entries must be strictly positive and finite"
            )
    if len(cfg.constellations) != cfg.K:
        raise ConfigError(f"need one constellation per transmitter (K = {cfg.K})")
    for k, con in enumerate(cfg.constellations):
        if con.size < 2:
            raise ConfigError(
                f"constellation of transmitter {k + 1} needs at least 2 points"
            )
        if abs(con.mean_power() - 1.0) > CONSTELLATION_POWER_TOL:
            raise UnnormalizedConstellationError(
                f"constellation of transmitter {k + 1} has mean power "
                f"{con.mean_power():.6g}, expected 1"
            )
        if len(set(con.points)) != con.size:
            raise ConfigError(
                f"constellation of transmitter {k + 1} has duplicate points"
            )
    if len(cfg.decode_sets) != cfg.L:
        raise ConfigError(f"need one decode set per receiver (L = {cfg.L})")
    covered = set()
    for l, dset in enumerate(cfg.decode_sets):
        if len(dset) == 0:
            raise EmptyDecodeSetError(f"decode set of receiver {l + 1} is empty")
        if any(k < 0 or k >= cfg.K for k in dset):
            raise ConfigError(
                f"decode set of receiver {l + 1} references a transmitter "
                f"outside 1..{cfg.K}"
            )
        covered.update(dset)
    missing = sorted(set(range(cfg.K)) - covered)
    if missing:
        raise UncoveredTransmitterError(
            "no receiver decodes transmitter(s) "
            + ", ".join(str(k + 1) for k in missing)
        )


def network_from_dict(d: dict) -> NetworkConfig:
    """Build and validate a NetworkConfig from a parsed config mapping.

    Constellations may be given as built-in names or as explicit lists of
    [re, im] pairs; decode sets use 1-based transmitter indices.
    """
    cons = []
    for k, spec in enumerate(d["constellations"]):
        if isinstance(spec, str):
            cons.append(builtin_constellation(spec))
        else:
            pts = tuple(complex(re, im) for re, im in spec)
            cons.append(Constellation(pts, name=f"custom{k + 1}"))
    cfg = NetworkConfig(
        K=int(d["K"]),
        L=int(d["L"]),
        R=int(d["R"]),
        sigma_f=np.asarray(d["sigma_f"], dtype=float),
        sigma_g=np.asarray(d["sigma_g"], dtype=float),
        p_S=np.asarray(d["p_S"], dtype=float),
        p_R=np.asarray(d["p_R"], dtype=float),
        constellations=tuple(cons),
        decode_sets=tuple(tuple(int(k) - 1 for k in dset) for dset in d["decode_sets"]),
    )
    validate_config(cfg)
    return cfg


@dataclass(frozen=True)
class PowerPoint:
    """One transmit-power level P on the linear scale."""

    P: float

    def __post_init__(self):
        if not (self.P > 0 and np.isfinite(self.P)):
            raise NonPositiveParameterError("power level P must be positive")

    @classmethod
    def from_db(cls, p_db: float) -> "PowerPoint":
        return cls(10.0 ** (p_db / 10.0))

    @property
    def db(self) -> float:
        return 10.0 * np.log10(self.P)

    def source_powers(self, cfg: NetworkConfig) -> np.ndarray:
        return cfg.p_S * self.P

    def relay_powers(self, cfg: NetworkConfig) -> np.ndarray:
        return cfg.p_R * self.P


@dataclass(frozen=True)
class ChannelState:
    """One realization of all transmitter-relay (f) and relay-receiver (g) gains."""

    f: np.ndarray  # (K, R) complex
    g: np.ndarray  # (R, L) complex

    def __post_init__(self):
        object.__setattr__(self, "f", np.asarray(self.f, dtype=complex))
        object.__setattr__(self, "g", np.asarray(self.g, dtype=complex))
        if not (np.all(np.isfinite(self.f)) and np.all(np.isfinite(self.g))):
            raise ValueError("channel gains must be finite")


@dataclass(frozen=True)
class BeamVector:
    """Relay beamforming weights, one per relay, with |x_r| <= 1."""

    x: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=complex))
        if self.x.ndim != 1:
            raise ValueError("beamforming vector must be one-dimensional")
        if np.max(np.abs(self.x), initial=0.0) > 1.0 + BEAM_MAGNITUDE_TOL:
            raise ValueError("beamforming vector violates the per-relay power limit")

    @classmethod
    def relay_selection(cls, r: int, R: int) -> "BeamVector":
        x = np.zeros(R, dtype=complex)
        x[r] = 1.0
        return cls(x)

    @classmethod
    def silent(cls, R: int) -> "BeamVector":
        return cls(np.zeros(R, dtype=complex))


def super_alphabet(cfg: NetworkConfig, l: int) -> list:
    """Ordered super-symbol alphabet of receiver l.

    The alphabet is the cartesian product of the constellations indexed by
    the receiver's decode set, in ascending transmitter order, enumerated
    lexicographically by point index.  This ordering is part of the public
    contract (decoder tie-breaking depends on it).
    """
    if not 0 <= l < cfg.L:
        raise ValueError(f"receiver index {l} outside 0..{cfg.L - 1}")
    groups = [cfg.constellations[k].points for k in cfg.decode_sets[l]]
    return [tuple(combo) for combo in itertools.product(*groups)]


def full_alphabet(cfg: NetworkConfig) -> list:
    """All K-tuples of transmit symbols, ordered like super_alphabet."""
    return [tuple(combo) for combo in
            itertools.product(*[c.points for c in cfg.constellations])]
