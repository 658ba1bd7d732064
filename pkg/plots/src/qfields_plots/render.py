"""The five figure kinds rendered from the documented data files.

- ``field_profile``: selected field columns against x for one 1D snapshot;
- ``field_heatmap``: one column as x-t heatmap (1D tables, all snapshots)
  or as an x-y heatmap (2D tables, one snapshot);
- ``uncertainty_curve``: the per-axis variance product against time from a
  verification report, with the saturation bound as a reference line;
- ``sign_map``: the signs of the two kinetic-energy candidates along x;
- ``flowlines``: every seed's path, x against time in 1D, x-y in 2D.

Masked points are drawn as gaps — NaN breaks in line plots, bad-value
cells in heatmaps — never interpolated across.  Rendering is read-only and
deterministic: the same job written twice produces identical bytes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
from matplotlib.colors import BoundaryNorm, ListedColormap  # noqa: E402

from .io import (
    EmptyPlotError,
    FieldFrame,
    SchemaError,
    read_fields_csv,
    read_flow_csv,
    read_verification_json,
    uncertainty_series,
)

__all__ = ["PLOT_KINDS", "PlotJob", "render", "sign_matrix"]

PLOT_KINDS = (
    "field_profile",
    "field_heatmap",
    "uncertainty_curve",
    "sign_map",
    "flowlines",
)

_FIGSIZE = (6.4, 4.0)
_DPI = 150
# matplotlib stamps its own version into PNG metadata by default; pin the
# fields we control so re-renders are byte-identical.
_METADATA = {"Software": "qfields-plot"}


@dataclass(frozen=True)
class PlotJob:
    """One figure: input files, plot kind, options, output image path."""

    kind: str
    inputs: tuple[Path, ...]
    out: Path
    fields: tuple[str, ...] = ("K", "Ktilde")
    time: float | None = None
    title: str | None = None
    bound: float | None = 0.25  # uncertainty-product reference line

    def __post_init__(self):
        if self.kind not in PLOT_KINDS:
            raise ValueError(
                f"unknown plot kind {self.kind!r}; choose from {PLOT_KINDS}"
            )
        if not self.inputs:
            raise ValueError("at least one input file is required")
        object.__setattr__(self, "inputs", tuple(Path(p) for p in self.inputs))
        object.__setattr__(self, "out", Path(self.out))


_LABELS = {
    "w": "w", "K": "K", "Ktilde": "K̃", "Kw": "K_w", "Uw": "U_w",
    "U": "U", "E": "E", "omega": "ω",
}


def _label(name: str) -> str:
    return _LABELS.get(name, name)


def _check_fields(frame_names, wanted) -> None:
    missing = [n for n in wanted if n not in frame_names]
    if missing:
        raise SchemaError(
            f"field column(s) {missing} not in the table; available: "
            f"{sorted(frame_names)}"
        )


def _save(fig, job: PlotJob) -> Path:
    job.out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(job.out, dpi=_DPI, metadata=_METADATA)
    plt.close(fig)
    return job.out


def _profile(job: PlotJob) -> Path:
    table = read_fields_csv(job.inputs[0])
    if table.dim != 1:
        raise SchemaError("field_profile needs a 1D field table")
    frame = table.frame_at(job.time)
    if frame.masked.all():
        raise EmptyPlotError("every point of the snapshot is masked")
    _check_fields(frame.columns, job.fields)
    x = frame.coords[0]
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    for name in job.fields:
        y = np.where(frame.masked, np.nan, frame.columns[name])
        ax.plot(x, y, label=_label(name), linewidth=1.2)
    ax.axhline(0.0, color="0.6", linewidth=0.6)
    ax.set_xlabel("x")
    ax.legend(frameon=False)
    ax.set_title(job.title or f"t = {frame.time:g}")
    return _save(fig, job)


def _heatmap(job: PlotJob) -> Path:
    table = read_fields_csv(job.inputs[0])
    name = job.fields[0] if job.fields else "w"
    _check_fields(table.field_names, [name])
    cmap = plt.get_cmap("viridis").copy()
    cmap.set_bad("white")
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    if table.dim == 1:
        x = table.frames[0].coords[0]
        rows = [
            np.ma.masked_where(f.masked, f.columns[name]) for f in table.frames
        ]
        if all(r.mask.all() for r in rows):
            raise EmptyPlotError("every point of every snapshot is masked")
        mesh = ax.pcolormesh(
            x, table.times, np.ma.stack(rows), cmap=cmap, shading="nearest"
        )
        ax.set_xlabel("x")
        ax.set_ylabel("t")
    elif table.dim == 2:
        frame = table.frame_at(job.time)
        if frame.masked.all():
            raise EmptyPlotError("every point of the snapshot is masked")
        z = np.ma.masked_where(
            frame.masked.reshape(frame.shape), frame.grid_values(name)
        )
        xs = np.unique(frame.coords[0])
        ys = np.unique(frame.coords[1])
        mesh = ax.pcolormesh(ys, xs, z, cmap=cmap, shading="nearest")
        ax.set_xlabel("y")
        ax.set_ylabel("x")
        ax.set_aspect("equal")
    else:
        raise SchemaError("field_heatmap supports 1D and 2D tables only")
    fig.colorbar(mesh, ax=ax, label=_label(name))
    ax.set_title(job.title or _label(name))
    return _save(fig, job)


def _uncertainty(job: PlotJob) -> Path:
    report = read_verification_json(job.inputs[0])
    series = uncertainty_series(report)
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    for axis, rows in sorted(series.items()):
        ax.plot(rows[:, 0], rows[:, 3], marker=".", label=f"D_p{axis} D_{axis}")
    if job.bound is not None:
        ax.axhline(
            job.bound, color="0.4", linestyle="--", linewidth=0.8,
            label="saturation bound",
        )
    ax.set_xlabel("t")
    ax.set_ylabel("variance product")
    ax.legend(frameon=False)
    ax.set_title(job.title or "uncertainty product")
    return _save(fig, job)


def sign_matrix(frame: FieldFrame, names=("K", "Ktilde")) -> np.ma.MaskedArray:
    """Rows of +1/-1 for the sign of each named column, masked where the
    snapshot is masked.  Exact zeros count as +1."""
    _check_fields(frame.columns, names)
    rows = [
        np.ma.masked_where(
            frame.masked,
            np.where(np.nan_to_num(frame.columns[n]) < 0.0, -1.0, 1.0),
        )
        for n in names
    ]
    return np.ma.stack(rows)


def _sign_map(job: PlotJob) -> Path:
    table = read_fields_csv(job.inputs[0])
    if table.dim != 1:
        raise SchemaError("sign_map needs a 1D field table")
    frame = table.frame_at(job.time)
    if frame.masked.all():
        raise EmptyPlotError("every point of the snapshot is masked")
    signs = sign_matrix(frame, job.fields)
    x = frame.coords[0]
    cmap = ListedColormap(["#c0392b", "#2980b9"])  # negative, non-negative
    cmap.set_bad("white")
    norm = BoundaryNorm([-1.5, 0.0, 1.5], cmap.N)
    fig, ax = plt.subplots(figsize=(6.4, 2.2))
    ax.pcolormesh(x, np.arange(signs.shape[0]), signs, cmap=cmap, norm=norm,
                  shading="nearest")
    ax.set_yticks(range(len(job.fields)), [_label(n) for n in job.fields])
    ax.set_xlabel("x")
    ax.set_title(job.title or f"sign at t = {frame.time:g} (white = masked)")
    return _save(fig, job)


def _flowlines(job: PlotJob) -> Path:
    flow = read_flow_csv(job.inputs[0])
    drawn = 0
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    for s in range(flow.paths.shape[0]):
        flag = flow.flags[s]
        if flag == 2:  # seed started outside the mask: no path exists
            continue
        style = "--" if flag == 1 else "-"
        if flow.dim == 1:
            ax.plot(flow.times, flow.paths[s, :, 0], style, linewidth=0.9)
        else:
            ax.plot(flow.paths[s, :, 0], flow.paths[s, :, 1], style,
                    linewidth=0.9)
        drawn += 1
    if drawn == 0:
        raise EmptyPlotError("every seed is flagged bad; nothing to draw")
    if flow.dim == 1:
        ax.set_xlabel("t")
        ax.set_ylabel("x")
    else:
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        ax.set_aspect("equal")
    ax.set_title(job.title or f"{drawn} flow lines")
    return _save(fig, job)


_RENDERERS = {
    "field_profile": _profile,
    "field_heatmap": _heatmap,
    "uncertainty_curve": _uncertainty,
    "sign_map": _sign_map,
    "flowlines": _flowlines,
}


def render(job: PlotJob) -> Path:
    """Render one job and return the written image path."""
    return _RENDERERS[job.kind](job)
