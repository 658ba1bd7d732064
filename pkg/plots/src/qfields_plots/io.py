"""Readers for the three documented data-file schemas.

- field table CSV: header ``t,x[,y,z],w,px[...],pwx[...],Kw,Uw,U,K,Ktilde,
  E,omega[,Mz|Mx,My,Mz],p1x[...],p2x[...],masked``, one row per grid point
  per requested time, masked quotient fields written as ``nan``;
- verification JSON: ``{"checks": [{name, values, tolerance, passed,
  masked_fraction}, ...], "metadata": {...}}``;
- flow-line CSV: header ``time,seed_id,x[,y,z],flag``, rows grouped by
  seed and ordered by time within a seed.

Everything is validated up front so the renderers can assume well-formed
tables; a mismatch raises :class:`SchemaError` with the offending detail.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "SchemaError",
    "EmptyPlotError",
    "FieldFrame",
    "FieldTable",
    "FlowTable",
    "read_fields_csv",
    "read_verification_json",
    "read_flow_csv",
    "uncertainty_series",
]

AXIS_NAMES = ("x", "y", "z")


class SchemaError(ValueError):
    """An input file does not match its documented schema."""


class EmptyPlotError(ValueError):
    """The selected data contain no unmasked points to draw."""


def _expected_header(dim: int) -> list[str]:
    ax = list(AXIS_NAMES[:dim])
    cols = ["t", *ax, "w"]
    cols += [f"p{a}" for a in ax]
    cols += [f"pw{a}" for a in ax]
    cols += ["Kw", "Uw", "U", "K", "Ktilde", "E", "omega"]
    if dim == 2:
        cols += ["Mz"]
    elif dim == 3:
        cols += ["Mx", "My", "Mz"]
    cols += [f"p1{a}" for a in ax]
    cols += [f"p2{a}" for a in ax]
    cols += ["masked"]
    return cols


@dataclass(frozen=True)
class FieldFrame:
    """All field columns of one snapshot, as flat per-point arrays."""

    time: float
    dim: int
    coords: tuple[np.ndarray, ...]
    columns: dict[str, np.ndarray]
    masked: np.ndarray  # boolean, True where the quotient fields are absent

    @property
    def shape(self) -> tuple[int, ...]:
        """Grid shape recovered from the coordinate columns (row-major)."""
        return tuple(np.unique(c).size for c in self.coords)

    def grid_values(self, name: str) -> np.ndarray:
        """One column reshaped to the grid (2D/3D frames)."""
        return self.columns[name].reshape(self.shape)


@dataclass(frozen=True)
class FieldTable:
    """A parsed field CSV: one or more snapshots on a fixed grid."""

    path: Path
    dim: int
    times: np.ndarray
    frames: tuple[FieldFrame, ...]
    field_names: tuple[str, ...]

    def frame_at(self, time: float | None) -> FieldFrame:
        """Snapshot nearest the requested time (default: the first one)."""
        if time is None:
            return self.frames[0]
        idx = int(np.argmin(np.abs(self.times - time)))
        spacing = np.min(np.diff(self.times)) if len(self.times) > 1 else np.inf
        if abs(self.times[idx] - time) > min(0.5 * spacing, 1e-9 + 1e-9 * abs(time)):
            raise SchemaError(
                f"no snapshot at t={time}; available times: {self.times.tolist()}"
            )
        return self.frames[idx]


def _read_rows(path: Path):
    """Header plus float data rows of a CSV, with schema-flavored errors."""
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise SchemaError(f"{path}: empty file") from None
            try:
                data = np.array([[float(v) for v in row] for row in reader])
            except ValueError as exc:
                raise SchemaError(f"{path}: non-numeric cell ({exc})") from exc
    except UnicodeDecodeError as exc:
        raise SchemaError(f"{path}: not a text file ({exc})") from exc
    return header, data


def read_fields_csv(path: str | Path) -> FieldTable:
    path = Path(path)
    header, data = _read_rows(path)
    dim = 0
    while dim < 3 and len(header) > 1 + dim and header[1 + dim] == AXIS_NAMES[dim]:
        dim += 1
    expected = _expected_header(dim) if dim else None
    if not dim or header != expected:
        raise SchemaError(
            f"{path}: header {','.join(header)!r} does not match the "
            f"field table schema"
        )
    if data.ndim != 2 or data.shape[0] == 0 or data.shape[1] != len(header):
        raise SchemaError(f"{path}: no data rows or ragged rows")

    t_col = data[:, 0]
    times = np.unique(t_col)
    field_names = tuple(header[1 + dim : -1])  # w .. p2z, excluding t/axes/masked
    frames = []
    n_rows = None
    for t in times:
        rows = data[t_col == t]
        if n_rows is None:
            n_rows = rows.shape[0]
        elif rows.shape[0] != n_rows:
            raise SchemaError(
                f"{path}: snapshot t={t} has {rows.shape[0]} rows, other "
                f"snapshots have {n_rows}"
            )
        coords = tuple(rows[:, 1 + i] for i in range(dim))
        columns = {
            name: rows[:, 1 + dim + j] for j, name in enumerate(field_names)
        }
        masked = rows[:, -1] != 0.0
        shape = tuple(np.unique(c).size for c in coords)
        if int(np.prod(shape)) != rows.shape[0]:
            raise SchemaError(
                f"{path}: snapshot t={t} has {rows.shape[0]} rows, not a full "
                f"{shape} grid"
            )
        frames.append(
            FieldFrame(
                time=float(t), dim=dim, coords=coords, columns=columns,
                masked=masked,
            )
        )
    return FieldTable(
        path=path,
        dim=dim,
        times=times,
        frames=tuple(frames),
        field_names=field_names,
    )


def read_verification_json(path: str | Path) -> dict:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict) or "checks" not in doc:
        raise SchemaError(f"{path}: missing top-level 'checks' list")
    required = {"name", "values", "tolerance", "passed"}
    for c in doc["checks"]:
        if not isinstance(c, dict) or not required <= set(c):
            raise SchemaError(
                f"{path}: check entries need keys {sorted(required)}, got {c!r}"
            )
    return doc


def uncertainty_series(report: dict) -> dict[str, np.ndarray]:
    """Per-axis time series from ``uncertainty_product_<axis>_t<time>`` checks.

    Returns ``{axis: array of (time, variance, momentum variance, product)}``
    rows sorted by time.
    """
    rows: dict[str, list[tuple[float, ...]]] = {}
    for c in report["checks"]:
        name = c["name"]
        if not name.startswith("uncertainty_product_"):
            continue
        rest = name[len("uncertainty_product_"):]
        axis, sep, t_str = rest.partition("_t")
        if not sep:
            continue
        try:
            t = float(t_str)
        except ValueError:
            raise SchemaError(f"cannot parse time from check name {name!r}")
        vals = c["values"]
        if len(vals) != 3:
            raise SchemaError(
                f"check {name!r} should carry [variance, momentum variance, "
                f"product], got {vals!r}"
            )
        rows.setdefault(axis, []).append((t, *map(float, vals)))
    if not rows:
        raise EmptyPlotError(
            "the report contains no uncertainty_product checks; run the "
            "producing scenario with the 'uncertainty' suite enabled"
        )
    return {
        axis: np.array(sorted(entries)) for axis, entries in rows.items()
    }


@dataclass(frozen=True)
class FlowTable:
    """Parsed flow-line CSV: one path per seed at common times."""

    path: Path
    dim: int
    times: np.ndarray
    paths: np.ndarray  # (n_seeds, n_times, dim), unwrapped coordinates
    flags: np.ndarray  # per seed: 0 ok, 1 truncated, 2 bad seed


def read_flow_csv(path: str | Path) -> FlowTable:
    path = Path(path)
    header, data = _read_rows(path)
    dim = len(header) - 3
    if (
        dim not in (1, 2, 3)
        or header != ["time", "seed_id", *AXIS_NAMES[:dim], "flag"]
    ):
        raise SchemaError(
            f"{path}: header {','.join(header)!r} does not match the "
            f"flow-line schema"
        )
    if data.ndim != 2 or data.shape[0] == 0:
        raise SchemaError(f"{path}: no data rows")

    seed_ids = np.unique(data[:, 1]).astype(int)
    times = np.unique(data[:, 0])
    n_t = times.size
    paths = np.empty((seed_ids.size, n_t, dim))
    flags = np.empty(seed_ids.size, dtype=int)
    for s, sid in enumerate(seed_ids):
        rows = data[data[:, 1] == sid]
        if rows.shape[0] != n_t:
            raise SchemaError(
                f"{path}: seed {sid} has {rows.shape[0]} rows, expected {n_t}"
            )
        order = np.argsort(rows[:, 0])
        paths[s] = rows[order, 2 : 2 + dim]
        flags[s] = int(rows[0, -1])
    return FlowTable(path=path, dim=dim, times=times, paths=paths, flags=flags)
