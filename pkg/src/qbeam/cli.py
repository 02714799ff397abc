"""Command-line front end: run sweeps, self-check the oracles, fit slopes.

Exit statuses: 0 success, 1 check failure, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import __version__, testing
from .model import (BeamVector, PowerPoint, full_alphabet, network_from_dict,
                    super_alphabet)
from .channel import complex_normal, effective_noise_var
from .metrics import (LocalNsnrMatrix, cner_union_bound, local_nsnr_matrix,
                      network_nsnr)
from .decode import individual_ml, joint_ml, receive_means, tuple_group_indices
from .quantize import (KIND_FLQ, KIND_GQ_EMPIRICAL, KIND_GQ_SELECTION,
                       KIND_VLQ, gq_select, lq_decode, scalar_quantize)
from .mc import SchemeDef, StoppingRule, fit_loglog, sweep

CSV_SCHEMA = "qbeam-csv/1"

_KIND_ALIASES = {
    "gq": KIND_GQ_SELECTION,
    "gq_selection": KIND_GQ_SELECTION,
    "flq": KIND_FLQ,
    "vlq": KIND_VLQ,
    "egq": KIND_GQ_EMPIRICAL,
    "gq_empirical": KIND_GQ_EMPIRICAL,
}


class CliError(Exception):
    """Usage or configuration problem; maps to exit status 2."""


@dataclass(frozen=True)
class RunManifest:
    """Everything needed to reproduce one run byte-for-byte."""

    config_path: str
    seed: int
    grid_db: tuple
    max_trials: int
    target_network_errors: int | None
    n_noise: int
    schemes: tuple
    version: str
    timestamp: str

    def header_lines(self) -> list:
        grid = f"{self.grid_db[0]:g}:{self.grid_db[-1]:g}:" + (
            f"{self.grid_db[1] - self.grid_db[0]:g}" if len(self.grid_db) > 1 else "0"
        )
        stop = f"max_trials={self.max_trials}"
        if self.target_network_errors is not None:
            stop += f" target_network_errors={self.target_network_errors}"
        return [
            f"# {CSV_SCHEMA}",
            f"# tool: qbeam {self.version}",
            f"# created: {self.timestamp}",
            f"# config: {self.config_path}",
            f"# seed: {self.seed}",
            f"# grid_db: {grid}",
            f"# stopping: {stop}",
            f"# n_noise: {self.n_noise}",
            f"# schemes: {','.join(self.schemes)}",
        ]


def parse_scheme_token(token: str) -> SchemeDef:
    """'gq', 'flq', 'vlq:<lambda_log2>' or 'egq:<inner_trials>'."""
    head, _, arg = token.strip().partition(":")
    kind = _KIND_ALIASES.get(head.lower())
    if kind is None:
        raise CliError(f"unknown scheme {token!r}; use gq, flq, vlq:<log2>, egq:<trials>")
    if kind == KIND_VLQ:
        if not arg:
            raise CliError("vlq scheme needs a lambda exponent, e.g. vlq:15")
        return SchemeDef(kind, lam_log2=int(arg))
    if kind == KIND_GQ_EMPIRICAL:
        return SchemeDef(kind, inner_trials=int(arg) if arg else 1000)
    return SchemeDef(kind)


def schemes_from_config(entries) -> list:
    out = []
    for entry in entries:
        kind = _KIND_ALIASES.get(str(entry.get("kind", "")).lower())
        if kind is None:
            raise CliError(f"unknown scheme kind in config: {entry.get('kind')!r}")
        if kind == KIND_VLQ and entry.get("lambda_log2") is None:
            raise CliError("vlq scheme entries need lambda_log2")
        out.append(SchemeDef(
            kind,
            lam_log2=entry.get("lambda_log2"),
            inner_trials=entry.get("inner_trials"),
            label=entry.get("label"),
        ))
    return out


def load_config_file(path: str) -> dict:
    p = Path(path)
    if not p.is_file():
        raise CliError(f"config file not found: {path}")
    with open(p, "rb") as fh:
        try:
            return tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise CliError(f"config file {path} is not valid TOML: {exc}") from exc


def build_grid(pmin: float, pmax: float, step: float) -> list:
    if step <= 0 or pmax < pmin:
        raise CliError("need pstep-db > 0 and pmax-db >= pmin-db")
    n = int(math.floor((pmax - pmin) / step + 1e-9)) + 1
    return [pmin + i * step for i in range(n)]


def _fmt(v: float) -> str:
    return f"{v:.10g}"


def csv_rows(points, scheme_names, L) -> list:
    header = ["scheme", "P_dB", "trials", "network_errors",
              "ner", "ner_lo", "ner_hi"]
    for l in range(L):
        header += [f"ser_{l + 1}", f"ser_{l + 1}_lo", f"ser_{l + 1}_hi",
                   f"fb_bits_{l + 1}"]
    rows = [header]
    for pt in points:
        for name in scheme_names:
            st = pt.stats[name]
            ner, lo, hi = st.ner_interval()
            row = [name, _fmt(pt.p_db), str(st.n_samples),
                   str(st.network_errors), _fmt(ner), _fmt(lo), _fmt(hi)]
            for l in range(L):
                s, s_lo, s_hi = st.ser_interval(l)
                row += [_fmt(s), _fmt(s_lo), _fmt(s_hi),
                        _fmt(st.fb_bits_mean(l))]
            rows.append(row)
    return rows


def write_run_csv(path, manifest: RunManifest, points, scheme_names, L) -> None:
    buf = io.StringIO()
    for line in manifest.header_lines():
        buf.write(line + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(csv_rows(points, scheme_names, L))
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def cmd_run(args) -> int:
    doc = load_config_file(args.config)
    if "network" not in doc:
        raise CliError(f"config file {args.config} has no [network] section")
    try:
        cfg = network_from_dict(doc["network"])
    except (KeyError, ValueError) as exc:
        raise CliError(f"invalid network config: {exc}") from exc

    sw = doc.get("sweep", {})
    pick = lambda flag, key, default: flag if flag is not None else sw.get(key, default)
    pmin = pick(args.pmin_db, "pmin_db", 0.0)
    pmax = pick(args.pmax_db, "pmax_db", 40.0)
    step = pick(args.pstep_db, "pstep_db", 2.5)
    max_trials = int(pick(args.trials, "max_trials", 100_000))
    target = pick(args.target_errors, "target_network_errors", 300)
    target = None if target in (None, 0) else int(target)
    n_noise = int(pick(args.n_noise, "n_noise", 1))
    seed = int(pick(args.seed, "seed", 0))

    if args.schemes:
        schemes = [parse_scheme_token(t) for t in args.schemes.split(",")]
    elif "schemes" in doc:
        schemes = schemes_from_config(doc["schemes"])
    else:
        schemes = [SchemeDef(KIND_GQ_SELECTION)]

    grid = build_grid(pmin, pmax, step)
    points = sweep(cfg, schemes, grid, StoppingRule(max_trials, target),
                   master_seed=seed, n_noise=n_noise, workers=args.threads)

    manifest = RunManifest(
        config_path=str(args.config), seed=seed, grid_db=tuple(grid),
        max_trials=max_trials, target_network_errors=target, n_noise=n_noise,
        schemes=tuple(s.name for s in schemes), version=__version__,
        timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )
    write_run_csv(args.out, manifest, points, [s.name for s in schemes], cfg.L)

    print(f"wrote {args.out}: {len(points)} power levels x {len(schemes)} schemes")
    for pt in points:
        parts = ", ".join(
            f"{name} {pt.stats[name].ner:.3g}" for name in pt.stats
        )
        print(f"  P = {pt.p_db:5.1f} dB  trials = {pt.n_states:>8}  NER: {parts}")
    return 0


# ---------------------------------------------------------------------------
# self-check: pinned walkthrough plus dual-route oracle comparisons


def _check_walkthrough() -> tuple:
    omega = testing.WALKTHROUGH_OMEGA
    xi, n = testing.WALKTHROUGH_XI, testing.WALKTHROUGH_BINS
    codes_rx1 = [scalar_quantize(v, xi, n) for v in omega[:, 0]]
    codes_rx2 = [scalar_quantize(v, xi, n) for v in omega[:, 1]]
    ok = codes_rx1 == [3, 1, 2] and codes_rx2 == [0, 1, 4]
    code_mat = np.column_stack([codes_rx1, codes_rx2])
    ok &= lq_decode(code_mat) == 2
    ok &= gq_select(LocalNsnrMatrix(omega)) == 2
    return ok, "walkthrough codes (3,1,2)/(0,1,4), decoder and max-min pick relay 3"


def _check_nsnr_equivalence(n_instances: int, seed: int) -> tuple:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_instances):
        cfg = testing.random_config(rng)
        P = PowerPoint(10.0 ** rng.uniform(0.0, 4.0))
        h = testing.random_state(cfg, rng)
        omega = local_nsnr_matrix(cfg, P, h).omega
        r = int(rng.integers(cfg.R))
        closed = omega[r].min()
        general = network_nsnr(cfg, P, h, BeamVector.relay_selection(r, cfg.R))
        worst = max(worst, abs(closed - general) / max(general, 1e-300))
    return worst <= 1e-10, f"closed-form vs general NSNR, worst rel err {worst:.3e}"


def _check_union_bound(n_instances: int, seed: int) -> tuple:
    rng = np.random.default_rng(seed)
    ok = True
    for _ in range(n_instances):
        cfg = testing.random_config(rng)
        P = PowerPoint(10.0 ** rng.uniform(0.0, 3.0))
        h = testing.random_state(cfg, rng)
        x = testing.random_beam(cfg, rng)
        b_sum, b_minq, b_exp = cner_union_bound(cfg, P, h, x)
        ok &= b_sum <= b_minq * (1 + 1e-12) and b_minq <= b_exp * (1 + 1e-12)
    return ok, "B_sum <= B_minQ <= B_exp on every instance"


def _check_decoders(n_instances: int, seed: int) -> tuple:
    rng = np.random.default_rng(seed)
    ok = True
    for _ in range(n_instances):
        cfg = testing.random_config(rng)
        P = PowerPoint(10.0 ** rng.uniform(0.0, 2.0))
        h = testing.random_state(cfg, rng)
        x = testing.random_beam(cfg, rng)
        l = int(rng.integers(cfg.L))
        y = complex(complex_normal(rng, ()) * 3.0)
        means = receive_means(cfg, P, h, x, l)
        sigma2 = effective_noise_var(cfg, P, h, x, l)
        tuples = full_alphabet(cfg)
        # exhaustive joint-likelihood oracle
        best = min(range(len(tuples)), key=lambda j: abs(y - means[j]) ** 2)
        ok &= joint_ml(cfg, P, h, x, l, y) == tuples[best]
        # brute-force marginal-posterior oracle
        groups = tuple_group_indices(cfg, l)
        alphabet = super_alphabet(cfg, l)
        post = [0.0] * len(alphabet)
        shift = min(abs(y - m) ** 2 for m in means)
        for j, m in enumerate(means):
            post[groups[j]] += math.exp(-(abs(y - m) ** 2 - shift) / sigma2)
        best_g = max(range(len(alphabet)), key=lambda g: post[g])
        ok &= individual_ml(cfg, P, h, x, l, y) == alphabet[best_g]
    return ok, "joint and individual ML match exhaustive oracles"


def cmd_selfcheck(args) -> int:
    checks = [
        _check_walkthrough(),
        _check_nsnr_equivalence(10_000, seed=101),
        _check_union_bound(10_000, seed=202),
        _check_decoders(500, seed=303),
    ]
    failed = 0
    for ok, desc in checks:
        print(f"[{'PASS' if ok else 'FAIL'}] {desc}")
        failed += 0 if ok else 1
    return 1 if failed else 0


def cmd_slope(args) -> int:
    path = Path(args.csv)
    if not path.is_file():
        raise CliError(f"CSV file not found: {args.csv}")
    lines = [ln for ln in path.read_text(encoding="utf-8").splitlines()
             if not ln.startswith("#")]
    reader = csv.DictReader(lines)
    rows = [r for r in reader]
    available = sorted({r["scheme"] for r in rows})
    if args.scheme not in available:
        raise CliError(
            f"scheme {args.scheme!r} not in CSV; available: {', '.join(available)}"
        )
    p_lin, rates, excluded = [], [], []
    for r in rows:
        if r["scheme"] != args.scheme:
            continue
        p_db = float(r["P_dB"])
        if not args.pmin_db <= p_db <= args.pmax_db:
            continue
        if int(r["network_errors"]) == 0:
            excluded.append(p_db)
            continue
        p_lin.append(10.0 ** (p_db / 10.0))
        rates.append(float(r["ner"]))
    if len(p_lin) < 3:
        print(f"error: slope fit needs >= 3 usable points, got {len(p_lin)}",
              file=sys.stderr)
        return 1
    d1, resid, d1j, d2j = fit_loglog(p_lin, rates)
    print(f"scheme {args.scheme}, window {args.pmin_db:g}..{args.pmax_db:g} dB, "
          f"{len(p_lin)} points")
    print(f"  d1 = {d1:.4f}   (rms residual {resid:.4f} in ln NER)")
    if d1j is not None:
        print(f"  joint fit: d1 = {d1j:.4f}, d2 = {d2j:.4f} "
              "(regressors nearly collinear; indicative only)")
    if excluded:
        print("  excluded zero-error points at dB: "
              + ", ".join(f"{p:g}" for p in excluded))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="qbeam",
        description="Quantized network beamforming Monte Carlo simulator",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a power sweep and write a CSV")
    run.add_argument("--config", required=True, help="TOML experiment file")
    run.add_argument("--pmin-db", type=float, default=None)
    run.add_argument("--pmax-db", type=float, default=None)
    run.add_argument("--pstep-db", type=float, default=None)
    run.add_argument("--trials", type=int, default=None,
                     help="max channel states per power level")
    run.add_argument("--target-errors", type=int, default=None,
                     help="stop a level once every scheme has this many "
                          "network errors (0 disables)")
    run.add_argument("--n-noise", type=int, default=None,
                     help="noise/symbol draws per channel state")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--threads", type=int, default=1,
                     help="worker processes (results identical for any count)")
    run.add_argument("--out", default="run.csv")
    run.add_argument("--schemes", default=None,
                     help="comma list, e.g. gq,flq,vlq:0,vlq:15")
    run.set_defaults(func=cmd_run)

    chk = sub.add_parser("selfcheck", help="run the embedded oracle suite")
    chk.set_defaults(func=cmd_selfcheck)

    slp = sub.add_parser("slope", help="fit a diversity slope from a run CSV")
    slp.add_argument("csv")
    slp.add_argument("--scheme", required=True)
    slp.add_argument("--pmin-db", type=float, default=-math.inf)
    slp.add_argument("--pmax-db", type=float, default=math.inf)
    slp.set_defaults(func=cmd_slope)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
