"""Parser for the qbeam-csv/1 run format.

Only the schema tag on the first line and the column header are trusted;
the rest of the '#' manifest block is ignored.  See the producer's
docs/csv-schema.md for the format.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

SUPPORTED_SCHEMA = "qbeam-csv/1"


class SchemaMismatch(ValueError):
    """The CSV does not carry the supported schema tag."""


class EmptySelection(ValueError):
    """A panel or scheme filter selected no data."""


@dataclass(frozen=True)
class RunTable:
    """All data rows of one or more runs, column-major."""

    schemes: tuple            # display names, in order of first appearance
    n_receivers: int
    rows: dict                # column name -> numpy array (object for scheme)

    def scheme_rows(self, scheme: str) -> dict:
        mask = self.rows["scheme"] == scheme
        if not mask.any():
            raise EmptySelection(
                f"scheme {scheme!r} has no rows; available: "
                + ", ".join(self.schemes)
            )
        order = np.argsort(self.rows["P_dB"][mask], kind="stable")
        return {k: v[mask][order] for k, v in self.rows.items()}


def _read_one(path) -> tuple:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip() != f"# {SUPPORTED_SCHEMA}":
        head = lines[0].strip() if lines else "<empty file>"
        raise SchemaMismatch(
            f"{path}: expected '# {SUPPORTED_SCHEMA}' on the first line, "
            f"found {head!r}"
        )
    data = [ln for ln in lines if not ln.startswith("#")]
    reader = csv.DictReader(data)
    records = list(reader)
    if reader.fieldnames is None or not records:
        raise EmptySelection(f"{path}: no data rows")
    return reader.fieldnames, records


def read_runs(paths) -> RunTable:
    """Load and concatenate one or more run CSVs."""
    fieldnames = None
    records = []
    for path in paths:
        fields, recs = _read_one(path)
        if fieldnames is None:
            fieldnames = fields
        elif fields != fieldnames:
            raise SchemaMismatch(f"{path}: column layout differs from the "
                                 "first input file")
        records.extend(recs)

    n_receivers = sum(1 for f in fieldnames if f.startswith("fb_bits_"))
    rows = {"scheme": np.array([r["scheme"] for r in records], dtype=object)}
    for field in fieldnames:
        if field == "scheme":
            continue
        caster = int if field in ("trials", "network_errors") else float
        rows[field] = np.array([caster(r[field]) for r in records])

    schemes = []
    for r in records:
        if r["scheme"] not in schemes:
            schemes.append(r["scheme"])
    return RunTable(tuple(schemes), n_receivers, rows)
