"""Figure rendering for the data files written by the ``qfields`` CLI.

This package reads only the documented external interfaces — the field
table CSV, the verification report JSON and the flow-line CSV — and turns
them into static figures.  It never imports the producing package.
"""
from .io import (
    EmptyPlotError,
    FieldFrame,
    FieldTable,
    FlowTable,
    SchemaError,
    read_fields_csv,
    read_flow_csv,
    read_verification_json,
    uncertainty_series,
)
from .render import PLOT_KINDS, PlotJob, render, sign_matrix

__all__ = [
    "EmptyPlotError",
    "FieldFrame",
    "FieldTable",
    "FlowTable",
    "SchemaError",
    "read_fields_csv",
    "read_flow_csv",
    "read_verification_json",
    "uncertainty_series",
    "PLOT_KINDS",
    "PlotJob",
    "render",
    "sign_matrix",
]

__version__ = "0.1.0"
