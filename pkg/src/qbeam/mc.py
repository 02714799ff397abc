"""Monte Carlo engine: trials, power sweeps, rate estimates, slope fits.

Trials are organized in fixed-size chunks of channel states; every chunk's
random streams are keyed by (master seed, grid index, chunk index, purpose),
so results are bit-identical for any worker count and adding a scheme never
perturbs the channel, symbol or noise draws.  All compared schemes share
each trial's draws (common random numbers).  Stopping is evaluated at
checkpoint boundaries (a fixed number of chunks), which keeps the executed
trial set independent of scheduling.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _batch
from .model import ChannelState, NetworkConfig, PowerPoint
from .channel import draw_channel, draw_noise, draw_symbols, transmit
from .decode import detect_errors, individual_ml
from .quantize import (KIND_FLQ, KIND_GQ_EMPIRICAL, KIND_GQ_SELECTION,
                       KIND_VLQ, QuantizerSpec, apply_quantizer,
                       empirical_optimal_gq, relay_selection_codebook)

CHUNK_TRIALS = 8192
CHECKPOINT_CHUNKS = 8

TAG_CHANNEL = 0
TAG_SYMBOLS = 1
TAG_NOISE = 2
TAG_QUANTIZER = 3

WILSON_Z95 = 1.959963984540054


class ZeroTrialsError(ValueError):
    pass


class InsufficientPointsError(ValueError):
    pass


class ZeroErrorPointWarning(UserWarning):
    """A sweep point with zero observed errors was excluded from a fit."""


@dataclass(frozen=True)
class SchemeDef:
    """A quantization scheme to simulate; concrete parameters follow P."""

    kind: str
    lam_log2: int | None = None
    inner_trials: int | None = None
    label: str | None = None

    @property
    def name(self) -> str:
        if self.label:
            return self.label
        if self.kind == KIND_GQ_SELECTION:
            return "GQ"
        if self.kind == KIND_FLQ:
            return "fLQ"
        if self.kind == KIND_VLQ:
            return f"vLQ-2^{self.lam_log2}"
        if self.kind == KIND_GQ_EMPIRICAL:
            return "eGQ"
        return self.kind

    def spec(self, cfg: NetworkConfig, P: PowerPoint) -> QuantizerSpec:
        if self.kind == KIND_GQ_SELECTION:
            return QuantizerSpec.gq_selection()
        if self.kind == KIND_FLQ:
            return QuantizerSpec.flq(P.P, cfg.R)
        if self.kind == KIND_VLQ:
            return QuantizerSpec.vlq(2.0 ** self.lam_log2, P.P, cfg.K, cfg.R)
        if self.kind == KIND_GQ_EMPIRICAL:
            return QuantizerSpec.gq_empirical(self.inner_trials or 1000)
        raise ValueError(f"unknown scheme kind {self.kind!r}")


@dataclass(frozen=True)
class StoppingRule:
    """Stop a sweep point at max_trials channel states or once every scheme
    has target_network_errors network errors, whichever happens first."""

    max_trials: int
    target_network_errors: int | None = None

    def __post_init__(self):
        if self.max_trials < 1:
            raise ValueError("max_trials must be >= 1")


@dataclass(frozen=True)
class TrialOutcome:
    """Scalar-path result of one trial; all schemes share the same draws."""

    trial_index: int
    seed_key: tuple
    outcomes: dict            # scheme name -> DecodeOutcome
    feedback_bits: dict       # scheme name -> length-L tuple of ints


@dataclass(frozen=True)
class SchemeStats:
    """Aggregated counts and rate estimates for one scheme at one sweep point."""

    name: str
    n_states: int
    n_samples: int
    network_errors: int
    receiver_errors: np.ndarray
    bit_sums: np.ndarray
    bit_sq_sums: np.ndarray
    gq_disagrees: int

    @property
    def ner(self) -> float:
        return self.network_errors / self.n_samples

    def ner_interval(self) -> tuple:
        return estimate_rate(self.network_errors, self.n_samples)

    def ser(self, l: int) -> float:
        return self.receiver_errors[l] / self.n_samples

    def ser_interval(self, l: int) -> tuple:
        return estimate_rate(int(self.receiver_errors[l]), self.n_samples)

    def fb_bits_mean(self, l: int) -> float:
        return self.bit_sums[l] / self.n_states

    def fb_bits_interval(self, l: int) -> tuple:
        """Normal-approximation 95% interval for the mean feedback bits."""
        m = self.fb_bits_mean(l)
        var = max(self.bit_sq_sums[l] / self.n_states - m * m, 0.0)
        half = WILSON_Z95 * math.sqrt(var / self.n_states)
        return m, max(m - half, 0.0), m + half


@dataclass(frozen=True)
class SweepPoint:
    """All estimates at one power level."""

    p: float
    p_db: float
    n_states: int
    n_samples: int
    stats: dict  # scheme name -> SchemeStats


@dataclass(frozen=True)
class SlopeFit:
    """Least-squares diversity fit of log NER against log P."""

    window_db: tuple
    d1: float
    residual: float
    n_points: int
    d1_joint: float | None = None
    d2_joint: float | None = None


def estimate_rate(successes: int, trials: int) -> tuple:
    """Point estimate and Wilson 95% score interval for a Bernoulli rate."""
    if trials < 1:
        raise ZeroTrialsError("rate estimation needs at least one trial")
    z = WILSON_Z95
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2.0 * trials)) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / trials
                         + z * z / (4.0 * trials * trials)) / denom
    lo = 0.0 if successes == 0 else max(center - half, 0.0)
    hi = 1.0 if successes == trials else min(center + half, 1.0)
    return phat, lo, hi


def _trial_rng(master_seed: int, trial_index: int, tag: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence((master_seed, trial_index, tag))
    )


def run_trial(cfg: NetworkConfig, P: PowerPoint, schemes, master_seed: int,
              trial_index: int) -> TrialOutcome:
    """One channel state, one symbol tuple, one noise draw, every scheme.

    Deterministic given (master_seed, trial_index); schemes share the draws.
    """
    h = draw_channel(cfg, _trial_rng(master_seed, trial_index, TAG_CHANNEL))
    s = draw_symbols(cfg, _trial_rng(master_seed, trial_index, TAG_SYMBOLS))
    noise = draw_noise(cfg, _trial_rng(master_seed, trial_index, TAG_NOISE))
    rng_q = _trial_rng(master_seed, trial_index, TAG_QUANTIZER)

    outcomes = {}
    bits = {}
    for scheme in schemes:
        rec = apply_quantizer(scheme.spec(cfg, P), cfg, P, h, rng=rng_q)
        y = transmit(cfg, P, h, rec.beam, s, noise)
        decoded = [individual_ml(cfg, P, h, rec.beam, l, y[l])
                   for l in range(cfg.L)]
        outcomes[scheme.name] = detect_errors(cfg, s, decoded)
        bits[scheme.name] = tuple(int(b) for b in rec.bits_per_receiver)
    return TrialOutcome(trial_index, (master_seed, trial_index), outcomes, bits)


# ---------------------------------------------------------------------------
# chunked engine


def _chunk_rng(master_seed, p_index, chunk_index, tag):
    return np.random.default_rng(
        np.random.SeedSequence((master_seed, p_index, chunk_index, tag))
    )


def _run_chunk(args):
    (cfg, schemes, master_seed, n_noise, p_value, p_index,
     chunk_index, size) = args
    pre = _batch.build_precomp(cfg)
    f, g = _batch.draw_channels(
        cfg, _chunk_rng(master_seed, p_index, chunk_index, TAG_CHANNEL), size)
    s_idx, j_true = _batch.draw_symbol_indices(
        pre, _chunk_rng(master_seed, p_index, chunk_index, TAG_SYMBOLS),
        size, n_noise)
    eta0, eta1 = _batch.draw_noises(
        cfg, _chunk_rng(master_seed, p_index, chunk_index, TAG_NOISE),
        size, n_noise)

    rho, interf = _batch.relay_gain_batch(cfg, p_value, f)
    omega = _batch.local_nsnr_batch(pre, p_value, f, g, interf)
    omega_min = omega.min(axis=2)             # (B, R)
    gq_best = omega_min.max(axis=1)           # (B,)
    P = PowerPoint(p_value)

    results = []
    for scheme in schemes:
        spec = scheme.spec(cfg, P)
        bits = np.zeros((size, cfg.L), dtype=np.int64)
        if spec.kind == KIND_GQ_SELECTION:
            sel = np.argmax(omega_min, axis=1)
        elif spec.kind in (KIND_FLQ, KIND_VLQ):
            codes = _batch.codes_batch(omega, spec.xi, spec.n_bins)
            sel = _batch.select_max_min(codes)
            if spec.kind == KIND_FLQ:
                bits[:] = (spec.n_bins ** cfg.R - 1).bit_length()
            else:
                bits = _batch.variable_bits_batch(codes, spec.n_bins, cfg.R)
        elif spec.kind == KIND_GQ_EMPIRICAL:
            # validation path: per-state inner Monte Carlo, chunk-local stream
            rng_q = _chunk_rng(master_seed, p_index, chunk_index, TAG_QUANTIZER)
            codebook = relay_selection_codebook(cfg.R)
            sel = np.empty(size, dtype=np.int64)
            for b in range(size):
                beam = empirical_optimal_gq(
                    cfg, P, ChannelState(f[b], g[b]), codebook,
                    spec.inner_trials, rng_q)
                sel[b] = int(np.argmax(np.abs(beam.x)))
        else:
            raise ValueError(f"unknown quantizer kind {spec.kind!r}")

        y, means, sigma2 = _batch.selection_receive(
            pre, p_value, f, g, rho, sel, j_true, eta0, eta1)
        rec_err, net_err = _batch.decode_errors(pre, y, means, sigma2, j_true)
        agrees = omega_min[np.arange(size), sel] == gq_best
        results.append((
            int(net_err.sum()),
            rec_err.sum(axis=(0, 1)).astype(np.int64),
            bits.sum(axis=0),
            (bits * bits).sum(axis=0),
            int(size - agrees.sum()),
        ))
    return results


@dataclass
class _Tally:
    network_errors: int = 0
    receiver_errors: np.ndarray = None
    bit_sums: np.ndarray = None
    bit_sq_sums: np.ndarray = None
    gq_disagrees: int = 0

    @classmethod
    def zero(cls, L: int) -> "_Tally":
        z = lambda: np.zeros(L, dtype=np.int64)
        return cls(0, z(), z(), z(), 0)

    def add(self, chunk_result):
        net, recv, bits, bits_sq, dis = chunk_result
        self.network_errors += net
        self.receiver_errors += recv
        self.bit_sums += bits
        self.bit_sq_sums += bits_sq
        self.gq_disagrees += dis


def sweep(cfg: NetworkConfig, schemes, p_grid_db, stopping: StoppingRule,
          master_seed: int, n_noise: int = 1, workers: int = 1) -> list:
    """Estimate every scheme's error rates and feedback cost over a power grid."""
    if len(p_grid_db) == 0:
        raise ValueError("power grid is empty")
    if len(schemes) == 0:
        raise ValueError("need at least one scheme")
    names = [s.name for s in schemes]
    if len(set(names)) != len(names):
        raise ValueError("scheme names must be unique")

    executor = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        points = []
        for p_index, p_db in enumerate(p_grid_db):
            p_value = 10.0 ** (p_db / 10.0)
            tallies = [_Tally.zero(cfg.L) for _ in schemes]
            states = 0
            chunk_cursor = 0
            while states < stopping.max_trials:
                sizes = []
                remaining = stopping.max_trials - states
                while len(sizes) < CHECKPOINT_CHUNKS and remaining > 0:
                    sz = min(CHUNK_TRIALS, remaining)
                    sizes.append(sz)
                    remaining -= sz
                tasks = [
                    (cfg, tuple(schemes), master_seed, n_noise, p_value,
                     p_index, chunk_cursor + i, sz)
                    for i, sz in enumerate(sizes)
                ]
                if executor is not None:
                    chunk_results = list(executor.map(_run_chunk, tasks))
                else:
                    chunk_results = [_run_chunk(t) for t in tasks]
                for res in chunk_results:
                    for tally, scheme_res in zip(tallies, res):
                        tally.add(scheme_res)
                chunk_cursor += len(sizes)
                states += sum(sizes)
                if stopping.target_network_errors is not None and min(
                        t.network_errors for t in tallies
                ) >= stopping.target_network_errors:
                    break
            samples = states * n_noise
            stats = {
                scheme.name: SchemeStats(
                    name=scheme.name,
                    n_states=states,
                    n_samples=samples,
                    network_errors=t.network_errors,
                    receiver_errors=t.receiver_errors.copy(),
                    bit_sums=t.bit_sums.copy(),
                    bit_sq_sums=t.bit_sq_sums.copy(),
                    gq_disagrees=t.gq_disagrees,
                )
                for scheme, t in zip(schemes, tallies)
            }
            points.append(SweepPoint(p_value, float(p_db), states, samples, stats))
        return points
    finally:
        if executor is not None:
            executor.shutdown()


def measure_ld_rate(cfg: NetworkConfig, P: PowerPoint, scheme: SchemeDef,
                    trials: int, seed: int, workers: int = 1) -> tuple:
    """Fraction of channel states where a quantizer misses the max-min relay.

    Returns (rate, lo, hi): a direct empirical handle on the localization
    distortion probability.
    """
    point = sweep(cfg, [scheme], [P.db], StoppingRule(max_trials=trials),
                  master_seed=seed, workers=workers)[0]
    st = point.stats[scheme.name]
    return estimate_rate(st.gq_disagrees, st.n_states)


def fit_loglog(p_lin, ner, joint: bool = True):
    """Slope of ln(rate) on ln(P); optional joint (ln P, ln ln P) regression."""
    x = np.log(np.asarray(p_lin, dtype=float))
    y = np.log(np.asarray(ner, dtype=float))
    design = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = float(np.sqrt(np.mean((design @ coef - y) ** 2)))
    d1 = -float(coef[1])
    d1_joint = d2_joint = None
    if joint and np.all(x > 0):
        design2 = np.column_stack([np.ones_like(x), x, np.log(x)])
        coef2, *_ = np.linalg.lstsq(design2, y, rcond=None)
        d1_joint, d2_joint = -float(coef2[1]), -float(coef2[2])
    return d1, resid, d1_joint, d2_joint


def fit_diversity_slope(points, scheme: str, window_db) -> SlopeFit:
    """Fit the first-order diversity of one scheme over a dB window.

    Zero-error points are excluded with a ZeroErrorPointWarning; the joint
    two-regressor fit is reported but nearly collinear at desk scale.
    """
    lo, hi = window_db
    p_lin, rates = [], []
    for pt in points:
        if not lo <= pt.p_db <= hi:
            continue
        st = pt.stats[scheme]
        if st.network_errors == 0:
            warnings.warn(
                f"excluding zero-error point at {pt.p_db:g} dB from slope fit",
                ZeroErrorPointWarning,
            )
            continue
        p_lin.append(pt.p)
        rates.append(st.ner)
    if len(p_lin) < 3:
        raise InsufficientPointsError(
            f"slope fit needs >= 3 usable points in {lo:g}..{hi:g} dB, "
            f"got {len(p_lin)}"
        )
    d1, resid, d1j, d2j = fit_loglog(p_lin, rates)
    return SlopeFit((float(lo), float(hi)), d1, resid, len(p_lin), d1j, d2j)
