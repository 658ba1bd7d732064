"""Flow lines of the velocity fields through a recorded evolution.

Positions follow dr/dt = v(r,t)/1 with v one of the three velocity fields
(center-of-mass p/m, or the pair (p -/+ p_w)/m), integrated by RK4.  The
grid-sampled velocities are interpolated with periodic cubic splines in
space and linearly in time between snapshots.  Output coordinates are
unwrapped (continuous across the periodic boundary) so crossing checks and
plots see smooth paths.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .evolve import Trajectory
from .fields import DEFAULT_MASK_EPSILON
from .grid import Grid
from .verify import Check, UnsupportedScenarioError

__all__ = [
    "FlowLineSet",
    "FLAG_OK",
    "FLAG_TRUNCATED",
    "FLAG_BAD_SEED",
    "integrate_flow_lines",
    "ensemble_equivariance",
    "sample_from_density",
    "ordering_preserved",
]

FLAG_OK = 0
FLAG_TRUNCATED = 1
FLAG_BAD_SEED = 2

FIELD_CHOICES = ("cm", "p1", "p2")
INTERPOLATION = "cubic-spline space, linear time"


@dataclass(frozen=True)
class FlowLineSet:
    """Per-seed paths sampled at the snapshot times.

    paths has shape (n_seeds, n_times, dim) in unwrapped coordinates;
    flags mark seeds that started outside the mask or whose path entered
    the masked region (truncated: the position is frozen from there on).
    """

    seeds: np.ndarray
    field_choice: str
    times: np.ndarray
    paths: np.ndarray
    flags: np.ndarray
    interpolation: str = INTERPOLATION


class _VelocitySampler:
    """Spline-filtered velocity and mask tables for every snapshot."""

    def __init__(self, traj: Trajectory, field_choice: str, mask_epsilon: float):
        if field_choice not in FIELD_CHOICES:
            raise ValueError(
                f"field_choice must be one of {FIELD_CHOICES}, got {field_choice!r}"
            )
        from .verify import _axis_deriv  # spectral axis derivative

        grid = traj.grid
        hbar, m = traj.params.hbar, traj.params.mass
        self.grid = grid
        self.vel = []  # [snapshot][axis] spline-filtered arrays
        self.mask = []
        for snap in traj.snapshots:
            pv = snap.psi.values
            w = np.abs(pv) ** 2
            mask = w > mask_epsilon * w.max()
            safe_w = np.where(mask, w, 1.0)
            comps = []
            for i in range(grid.dim):
                dpsi = _axis_deriv(grid, pv, i)
                p_i = hbar * np.imag(np.conj(pv) * dpsi) / safe_w
                if field_choice != "cm":
                    # chain rule: the FFT derivative of w itself aliases
                    dw = 2.0 * np.real(np.conj(pv) * dpsi)
                    pw_i = 0.5 * hbar * dw / safe_w
                    p_i = p_i - pw_i if field_choice == "p1" else p_i + pw_i
                v_i = np.where(mask, p_i / m, 0.0)
                comps.append(
                    ndimage.spline_filter(v_i, order=3, mode="grid-wrap")
                )
            self.vel.append(comps)
            self.mask.append(mask.astype(float))

    def _index_coords(self, pos: np.ndarray) -> np.ndarray:
        grid = self.grid
        cols = []
        for i in range(grid.dim):
            h = grid.spacing[i]
            n = grid.points_per_axis[i]
            cols.append(np.mod((pos[:, i] - grid.origin_per_axis[i]) / h, n))
        return np.array(cols)

    def velocity(self, k: int, lam: float, pos: np.ndarray) -> np.ndarray:
        """Velocity at unwrapped positions, blended between snapshots k, k+1."""
        coords = self._index_coords(pos)
        out = np.empty_like(pos)
        for i in range(self.grid.dim):
            a = ndimage.map_coordinates(
                self.vel[k][i], coords, order=3, mode="grid-wrap", prefilter=False
            )
            b = ndimage.map_coordinates(
                self.vel[k + 1][i], coords, order=3, mode="grid-wrap", prefilter=False
            )
            out[:, i] = (1.0 - lam) * a + lam * b
        return out

    def in_mask(self, k: int, pos: np.ndarray) -> np.ndarray:
        coords = self._index_coords(pos)
        val = ndimage.map_coordinates(
            self.mask[k], coords, order=1, mode="grid-wrap"
        )
        return val > 0.5


def _advance_interval(
    sampler: _VelocitySampler,
    k: int,
    dt: float,
    substeps: int,
    pos: np.ndarray,
    active: np.ndarray,
) -> None:
    """RK4 over one recording interval, in place; inactive seeds frozen."""
    h = dt / substeps
    for s in range(substeps):
        lam0 = s / substeps
        lam_h = (s + 0.5) / substeps
        lam1 = (s + 1.0) / substeps
        p0 = pos[active]
        if p0.size == 0:
            return
        k1 = sampler.velocity(k, lam0, p0)
        k2 = sampler.velocity(k, lam_h, p0 + 0.5 * h * k1)
        k3 = sampler.velocity(k, lam_h, p0 + 0.5 * h * k2)
        k4 = sampler.velocity(k, lam1, p0 + h * k3)
        pos[active] = p0 + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate_flow_lines(
    traj: Trajectory,
    seeds,
    field_choice: str = "cm",
    substeps: int = 4,
    mask_epsilon: float = DEFAULT_MASK_EPSILON,
) -> FlowLineSet:
    """Integrate one path per seed across all recorded snapshots."""
    if len(traj.snapshots) < 2:
        raise UnsupportedScenarioError("flow lines need at least 2 snapshots")
    grid = traj.grid
    seeds = np.atleast_2d(np.asarray(seeds, dtype=float))
    if seeds.shape[1] != grid.dim:
        raise ValueError(
            f"seeds must have {grid.dim} coordinates, got shape {seeds.shape}"
        )
    sampler = _VelocitySampler(traj, field_choice, mask_epsilon)
    n = seeds.shape[0]
    times = traj.times
    paths = np.empty((n, len(times), grid.dim))
    flags = np.full(n, FLAG_OK, dtype=int)

    pos = seeds.copy()
    ok0 = sampler.in_mask(0, pos)
    flags[~ok0] = FLAG_BAD_SEED
    active = ok0.copy()
    paths[:, 0, :] = pos
    dt = traj.record_dt
    for k in range(len(times) - 1):
        _advance_interval(sampler, k, dt, substeps, pos, active)
        left = active & ~sampler.in_mask(k + 1, pos)
        flags[left] = FLAG_TRUNCATED
        active &= ~left
        paths[:, k + 1, :] = pos
    return FlowLineSet(
        seeds=seeds,
        field_choice=field_choice,
        times=times.copy(),
        paths=paths,
        flags=flags,
    )


def sample_from_density(
    grid: Grid, w: np.ndarray, n: int, rng: np.random.Generator
) -> np.ndarray:
    """Draw positions from a gridded density: inverse CDF in 1D, rejection
    sampling in 2D/3D."""
    if grid.dim == 1:
        x = grid.axes[0]
        h = grid.spacing[0]
        cdf = np.cumsum(w.ravel()) * grid.cell_volume
        cdf = cdf / cdf[-1]
        u = rng.random(n)
        # cdf[i] is the mass up to the right edge of the cell centered at x[i]
        pos = np.interp(u, cdf, x + 0.5 * h)
        return pos.reshape(-1, 1)
    w_max = float(w.max())
    out = np.empty((0, grid.dim))
    lows = np.array(grid.origin_per_axis)
    spans = np.array(grid.extent_per_axis)
    while out.shape[0] < n:
        batch = max(4 * (n - out.shape[0]), 1024)
        cand = lows + spans * rng.random((batch, grid.dim))
        # density value at the nearest sample point (cells are centered on
        # the sample points)
        idx = tuple(
            np.mod(
                np.rint((cand[:, i] - lows[i]) / grid.spacing[i]).astype(int),
                grid.shape[i],
            )
            for i in range(grid.dim)
        )
        keep = rng.random(batch) * w_max < w[idx]
        out = np.vstack([out, cand[keep]])
    return out[:n]


def ensemble_equivariance(
    traj: Trajectory,
    n_seeds: int,
    rng: np.random.Generator,
    bins: int = 64,
    tolerance: float = 0.05,
    substeps: int = 2,
    mask_epsilon: float = DEFAULT_MASK_EPSILON,
) -> Check:
    """Advect an ensemble sampled from w(.,0) with the center-of-mass flow
    and compare its end-time histogram with w(.,T) by total variation."""
    if n_seeds < 10_000:
        raise UnsupportedScenarioError(
            f"equivariance needs >= 10000 seeds, got {n_seeds}"
        )
    grid = traj.grid
    w0 = np.abs(traj.snapshots[0].psi.values) ** 2
    wT = np.abs(traj.snapshots[-1].psi.values) ** 2

    pos = sample_from_density(grid, w0, n_seeds, rng)
    sampler = _VelocitySampler(traj, "cm", mask_epsilon)
    active = np.ones(n_seeds, dtype=bool)
    dt = traj.record_dt
    for k in range(len(traj.snapshots) - 1):
        _advance_interval(sampler, k, dt, substeps, pos, active)

    edges = [
        np.linspace(o, o + L, bins + 1)
        for o, L in zip(grid.origin_per_axis, grid.extent_per_axis)
    ]
    wrapped = np.column_stack(
        [
            np.mod(pos[:, i] - grid.origin_per_axis[i], grid.extent_per_axis[i])
            + grid.origin_per_axis[i]
            for i in range(grid.dim)
        ]
    )
    hist, _ = np.histogramdd(wrapped, bins=edges)
    hist = hist / hist.sum()
    target, _ = np.histogramdd(
        np.column_stack([m.ravel() for m in grid.meshes()]),
        bins=edges,
        weights=(wT * grid.cell_volume).ravel(),
    )
    target = target / target.sum()
    tv = 0.5 * float(np.abs(hist - target).sum())
    return Check(
        name="ensemble_equivariance_tv",
        values=[tv],
        tolerance=tolerance,
        passed=tv <= tolerance,
        masked_fraction=0.0,
    )


def ordering_preserved(flow: FlowLineSet) -> bool:
    """1D center-of-mass flow lines never cross: seed order is kept at every
    recorded time (unwrapped coordinates)."""
    if flow.paths.shape[2] != 1:
        raise UnsupportedScenarioError("ordering check applies to 1D flows only")
    good = flow.flags == FLAG_OK
    paths = flow.paths[good, :, 0]
    order = np.argsort(paths[:, 0], kind="stable")
    sorted_paths = paths[order]
    return bool(np.all(np.diff(sorted_paths, axis=0) >= -1e-12))
