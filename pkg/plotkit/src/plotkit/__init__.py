"""Figures from qbeam run CSVs: error-rate and feedback-rate panels."""

__version__ = "0.1.0"

from .reader import EmptySelection, RunTable, SchemaMismatch, read_runs
from .panels import PlotSpec, plot
