"""Panel rendering: error rates on a log axis, feedback rates linear.

Outputs are deterministic: fixed figure geometry, no timestamps, stable
ordering.  Zero-error points are censored observations and render as open
downward triangles at the interval's upper bound rather than vanishing
from the log axis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .reader import EmptySelection, RunTable, read_runs

FIGSIZE = (6.4, 4.4)
DPI = 150
# error bars thinner than this (in decades) hide behind the marker
MIN_BAR_DECADES = 0.05

_MARKERS = ("o", "s", "D", "^", "v", "p", "*", "X")
_COLORS = plt.rcParams["axes.prop_cycle"].by_key()["color"]


@dataclass(frozen=True)
class PlotSpec:
    """What to draw: inputs, panels, optional filters and guide slopes."""

    csv_paths: tuple
    panels: tuple = ("ner",)          # "ner", "ser:<l>" or "fb:<l>" (1-based l)
    out_dir: str = "."
    ref_slopes: tuple = ()            # d1 values for P^-d1 guide lines
    schemes: tuple | None = None      # subset filter; None = all
    styles: dict = field(default_factory=dict)  # scheme -> matplotlib kwargs


def _panel_columns(panel: str, table: RunTable) -> tuple:
    """(value, lo, hi, censored-flag) column names for one panel."""
    kind, _, arg = panel.partition(":")
    if kind == "ner":
        return "ner", "ner_lo", "ner_hi", True
    if kind in ("ser", "fb"):
        if not arg:
            raise ValueError(f"panel {panel!r} needs a receiver index, e.g. ser:1")
        l = int(arg)
        if not 1 <= l <= table.n_receivers:
            raise EmptySelection(
                f"panel {panel!r}: CSV has receivers 1..{table.n_receivers}")
        if kind == "ser":
            return f"ser_{l}", f"ser_{l}_lo", f"ser_{l}_hi", True
        return f"fb_bits_{l}", None, None, False
    raise ValueError(f"unknown panel {panel!r}; use ner, ser:<l> or fb:<l>")


def _style(scheme: str, index: int, overrides: dict) -> dict:
    style = {
        "color": _COLORS[index % len(_COLORS)],
        "marker": _MARKERS[index % len(_MARKERS)],
        "markersize": 5,
        "linewidth": 1.2,
    }
    style.update(overrides.get(scheme, {}))
    return style


def _draw_error_rate(ax, table, schemes, cols, styles):
    val, lo_col, hi_col, _ = cols
    anchor = None
    for i, scheme in enumerate(schemes):
        rows = table.scheme_rows(scheme)
        style = _style(scheme, i, styles)
        live = rows[val] > 0
        x, y = rows["P_dB"][live], rows[val][live]
        lo, hi = rows[lo_col][live], rows[hi_col][live]
        wide = np.log10(np.maximum(hi, 1e-300) / np.maximum(lo, 1e-300)) \
            >= MIN_BAR_DECADES
        yerr = np.where(wide, np.abs(np.stack([y - lo, hi - y])), 0.0)
        ax.errorbar(x, y, yerr=yerr, label=scheme, capsize=2, **style)
        if live.any():
            cand = (float(x[-1]), float(y[-1]))
            if anchor is None or cand[0] > anchor[0]:
                anchor = cand
        censored = ~live
        if censored.any():
            ax.plot(rows["P_dB"][censored], rows[hi_col][censored],
                    linestyle="none", marker="v", markerfacecolor="none",
                    color=style["color"])
    ax.set_yscale("log")
    ax.set_ylabel("error rate")
    return anchor


def _draw_guides(ax, anchor, ref_slopes):
    if anchor is None:
        return
    p0, y0 = anchor
    x = np.linspace(*ax.get_xlim(), 50)
    for d1 in ref_slopes:
        ax.plot(x, y0 * 10.0 ** (-d1 * (x - p0) / 10.0), linestyle="--",
                color="0.6", linewidth=1.0, zorder=0)
        ax.annotate(f"$P^{{-{d1:g}}}$", (x[-1], y0 * 10.0 **
                                         (-d1 * (x[-1] - p0) / 10.0)),
                    color="0.4", fontsize=8,
                    textcoords="offset points", xytext=(-14, 2))


def _draw_feedback(ax, table, schemes, cols, styles):
    val = cols[0]
    for i, scheme in enumerate(schemes):
        rows = table.scheme_rows(scheme)
        ax.plot(rows["P_dB"], rows[val], label=scheme,
                **_style(scheme, i, styles))
    ax.set_ylabel("feedback bits per channel state")
    ax.set_ylim(bottom=0)


def plot(spec: PlotSpec) -> list:
    """Render every requested panel; returns the written file paths."""
    table = read_runs(spec.csv_paths)
    schemes = list(spec.schemes) if spec.schemes else list(table.schemes)
    missing = [s for s in schemes if s not in table.schemes]
    if missing or not schemes:
        raise EmptySelection(
            f"schemes {missing} not in CSV; available: "
            + ", ".join(table.schemes))

    out_dir = Path(spec.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for panel in spec.panels:
        cols = _panel_columns(panel, table)
        fig, ax = plt.subplots(figsize=FIGSIZE)
        if cols[3]:
            anchor = _draw_error_rate(ax, table, schemes, cols, spec.styles)
            _draw_guides(ax, anchor, spec.ref_slopes)
        else:
            _draw_feedback(ax, table, schemes, cols, spec.styles)
        ax.set_xlabel("P (dB)")
        ax.grid(True, which="both", alpha=0.3)
        ax.legend(loc="best", fontsize=9)
        fig.tight_layout()
        name = panel.replace(":", "_") + ".png"
        path = out_dir / name
        fig.savefig(path, dpi=DPI)
        plt.close(fig)
        written.append(path)
    return written
