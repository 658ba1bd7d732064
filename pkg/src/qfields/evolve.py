"""Split-step spectral time evolution under a time-independent potential.

One step applies the symmetric (Strang) factorization
exp(-i V dt / 2 hbar) . F^-1 exp(-i hbar |k|^2 dt / 2m) F . exp(-i V dt / 2 hbar),
which is unitary by construction and second-order accurate in dt.  Every
step is followed by a NaN/Inf guard: silent corruption of the downstream
field extraction is the worst failure mode, so blow-ups abort immediately.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as _fft

from .grid import ComplexField, Grid, ScalarField, integrate
from .params import PhysicalParams

__all__ = [
    "FreePotential",
    "HarmonicPotential",
    "BarrierPotential",
    "SampledPotential",
    "Potential",
    "EvolutionParams",
    "Snapshot",
    "Trajectory",
    "EvolutionError",
    "NumericalBlowupError",
    "apply_hamiltonian",
    "step",
    "evolve_record",
]


class EvolutionError(ValueError):
    """Incompatible grids or invalid evolution parameters."""


class NumericalBlowupError(RuntimeError):
    """NaN/Inf appeared during propagation."""


@dataclass(frozen=True)
class FreePotential:
    """V = 0 everywhere."""

    def on_grid(self, grid: Grid, params: PhysicalParams) -> ScalarField:
        return ScalarField(grid, np.zeros(grid.shape))


@dataclass(frozen=True)
class HarmonicPotential:
    """V = (1/2) m omega0^2 |r - center|^2."""

    omega0: float
    center: tuple[float, ...] | None = None

    def on_grid(self, grid: Grid, params: PhysicalParams) -> ScalarField:
        center = self.center if self.center is not None else (0.0,) * grid.dim
        r2 = sum((x - c) ** 2 for x, c in zip(grid.meshes(), center))
        return ScalarField(grid, 0.5 * params.mass * self.omega0**2 * r2)


@dataclass(frozen=True)
class BarrierPotential:
    """Rectangular barrier of the given height, slab along the first axis."""

    height: float
    width: float
    center: float

    def on_grid(self, grid: Grid, params: PhysicalParams) -> ScalarField:
        x = grid.meshes()[0]
        inside = np.abs(x - self.center) <= 0.5 * self.width
        return ScalarField(grid, np.where(inside, self.height, 0.0))


@dataclass(frozen=True)
class SampledPotential:
    """Arbitrary real potential given as samples on the grid."""

    values: ScalarField

    def on_grid(self, grid: Grid, params: PhysicalParams) -> ScalarField:
        if self.values.grid != grid:
            raise EvolutionError("sampled potential lives on a different grid")
        if not np.all(np.isfinite(self.values.values)):
            raise EvolutionError("sampled potential has non-finite values")
        return self.values


Potential = FreePotential | HarmonicPotential | BarrierPotential | SampledPotential


@dataclass(frozen=True)
class EvolutionParams:
    """Step size, step count and recording interval.

    Accuracy guidance (warned about, not enforced):
    dt * max|V| / hbar < 0.5 and dt * hbar k_max^2 / 2m < pi.
    """

    dt: float
    steps: int
    record_every: int = 1
    params: PhysicalParams = PhysicalParams()

    def __post_init__(self):
        if not (self.dt > 0):
            raise EvolutionError(f"dt must be positive, got {self.dt}")
        if self.steps < 1:
            raise EvolutionError(f"steps must be >= 1, got {self.steps}")
        if self.record_every < 1:
            raise EvolutionError(
                f"record_every must be >= 1, got {self.record_every}"
            )


@dataclass(frozen=True)
class Snapshot:
    time: float
    psi: ComplexField


@dataclass(frozen=True)
class Trajectory:
    """Uniformly recorded states of one evolution run."""

    snapshots: tuple[Snapshot, ...]
    potential: Potential
    params: PhysicalParams

    @property
    def grid(self) -> Grid:
        return self.snapshots[0].psi.grid

    @property
    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.snapshots])

    @property
    def record_dt(self) -> float:
        t = self.times
        return float(t[1] - t[0]) if len(t) > 1 else 0.0

    def subsample(self, every: int) -> "Trajectory":
        """Keep every ``every``-th snapshot (for residual convergence studies)."""
        return Trajectory(self.snapshots[::every], self.potential, self.params)


def apply_hamiltonian(
    psi: ComplexField, V: Potential, params: PhysicalParams
) -> ComplexField:
    """H psi = -(hbar^2/2m) laplacian(psi) + V psi, Laplacian spectral."""
    grid = psi.grid
    V_vals = V.on_grid(grid, params).values
    psi_hat = _fft.fftn(psi.values)
    kinetic = _fft.ifftn(-grid.k_squared * psi_hat) * (
        -params.hbar**2 / (2.0 * params.mass)
    )
    return ComplexField(grid, kinetic + V_vals * psi.values)


class _Propagator:
    """Cached split-step factors for a fixed grid, potential and dt."""

    def __init__(self, grid: Grid, V: Potential, dt: float, params: PhysicalParams):
        V_vals = V.on_grid(grid, params).values
        self.grid = grid
        self.half_potential = np.exp(-0.5j * dt * V_vals / params.hbar)
        self.kinetic = np.exp(
            -0.5j * params.hbar * grid.k_squared * dt / params.mass
        )
        vmax = float(np.max(np.abs(V_vals)))
        kmax2 = float(np.max(grid.k_squared))
        if dt * vmax / params.hbar >= 2.0 * np.pi:
            warnings.warn(
                f"dt*max|V|/hbar = {dt * vmax / params.hbar:.3g} >= 2*pi; "
                "the potential phase wraps within one step somewhere on the "
                "grid",
                stacklevel=3,
            )
        if dt * params.hbar * kmax2 / (2.0 * params.mass) >= np.pi:
            warnings.warn(
                "kinetic phase at the grid Nyquist mode exceeds pi per step",
                stacklevel=3,
            )

    def advance(self, values: np.ndarray) -> np.ndarray:
        out = values * self.half_potential
        out = _fft.fftn(out)
        out *= self.kinetic
        out = _fft.ifftn(out)
        out *= self.half_potential
        return out


def step(
    psi: ComplexField, V: Potential, dt: float, params: PhysicalParams
) -> ComplexField:
    """One Strang-splitting step; norm-preserving to round-off."""
    prop = _Propagator(psi.grid, V, dt, params)
    out = prop.advance(psi.values)
    if not np.all(np.isfinite(out)):
        raise NumericalBlowupError("non-finite wave function after step")
    return ComplexField(psi.grid, out)


def evolve_record(
    psi0: ComplexField, V: Potential, ev: EvolutionParams
) -> Trajectory:
    """Run ``ev.steps`` steps, recording t=0, every record_every-th state
    and the final state."""
    grid = psi0.grid
    if not np.all(np.isfinite(psi0.values)):
        raise NumericalBlowupError("non-finite initial wave function")
    prop = _Propagator(grid, V, ev.dt, ev.params)
    values = psi0.values.copy()
    snapshots = [Snapshot(0.0, ComplexField(grid, values.copy()))]
    for i in range(1, ev.steps + 1):
        values = prop.advance(values)
        if not np.all(np.isfinite(values)):
            norm_before = integrate(np.abs(snapshots[-1].psi.values) ** 2, grid)
            raise NumericalBlowupError(
                f"non-finite wave function at step {i} (t={i * ev.dt:.6g}); "
                f"last recorded norm was {norm_before:.6g}"
            )
        if i % ev.record_every == 0 or i == ev.steps:
            snapshots.append(Snapshot(i * ev.dt, ComplexField(grid, values.copy())))
    return Trajectory(tuple(snapshots), V, ev.params)
