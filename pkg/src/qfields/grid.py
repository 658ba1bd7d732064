"""Uniform periodic grids and spectral calculus.

All fields live on a uniform rectangular lattice with periodic boundaries
on every axis.  Derivatives are computed by FFT (multiplication by ik in
Fourier space), which is exact for band-limited data; quadrature is the
uniform-weight sum, which is spectrally accurate on periodic grids.
Domains must be chosen large enough that wave functions are negligible at
the edges when simulating "open" scenarios.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import fft as _fft

__all__ = [
    "Grid",
    "ScalarField",
    "VectorField",
    "ComplexField",
    "GridError",
    "make_grid",
    "gradient",
    "laplacian",
    "divergence",
    "integrate",
    "set_fft_workers",
]

MIN_POINTS = 8

_fft_workers = 1


def set_fft_workers(n: int | None) -> None:
    """Set the worker count passed to scipy.fft (None = scipy default)."""
    global _fft_workers
    if n is None:
        n = 1
    if n < 1:
        raise ValueError(f"worker count must be >= 1, got {n}")
    _fft_workers = int(n)


def _workers() -> int:
    env = os.environ.get("QFIELDS_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return _fft_workers


class GridError(ValueError):
    """Invalid grid construction or incompatible grid/field combination."""


@dataclass(frozen=True)
class Grid:
    """Uniform periodic lattice over 1-3 spatial dimensions.

    points_per_axis entries should preferably be powers of two (FFT speed);
    this is documented, not enforced.
    """

    dim: int
    points_per_axis: tuple[int, ...]
    extent_per_axis: tuple[float, ...]
    origin_per_axis: tuple[float, ...]

    @property
    def shape(self) -> tuple[int, ...]:
        return self.points_per_axis

    @property
    def size(self) -> int:
        return int(np.prod(self.points_per_axis))

    @cached_property
    def spacing(self) -> tuple[float, ...]:
        return tuple(
            L / n for L, n in zip(self.extent_per_axis, self.points_per_axis)
        )

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def volume(self) -> float:
        return float(np.prod(self.extent_per_axis))

    @cached_property
    def axes(self) -> tuple[np.ndarray, ...]:
        """Per-axis coordinate arrays, origin + h*[0..n-1]."""
        return tuple(
            o + h * np.arange(n)
            for o, h, n in zip(
                self.origin_per_axis, self.spacing, self.points_per_axis
            )
        )

    def meshes(self) -> list[np.ndarray]:
        """Full coordinate arrays of shape ``self.shape``, one per axis."""
        return list(np.meshgrid(*self.axes, indexing="ij"))

    @cached_property
    def wavenumbers(self) -> tuple[np.ndarray, ...]:
        """Per-axis angular wavenumbers in standard FFT (zero-centered) order."""
        return tuple(
            2.0 * np.pi * np.fft.fftfreq(n, d=h)
            for n, h in zip(self.points_per_axis, self.spacing)
        )

    @cached_property
    def deriv_wavenumbers(self) -> tuple[np.ndarray, ...]:
        """Wavenumbers for odd-order derivatives: Nyquist mode zeroed.

        Zeroing the Nyquist coefficient keeps real fields real after a
        single spectral differentiation.
        """
        out = []
        for n, k in zip(self.points_per_axis, self.wavenumbers):
            k = k.copy()
            if n % 2 == 0:
                k[n // 2] = 0.0
            out.append(k)
        return tuple(out)

    @cached_property
    def k_squared(self) -> np.ndarray:
        """|k|^2 on the full grid (for Laplacians and kinetic factors)."""
        ks = np.meshgrid(*self.wavenumbers, indexing="ij")
        return sum(k * k for k in ks)

    def _axis_k(self, axis: int, nyquist_zeroed: bool = True) -> np.ndarray:
        k = (self.deriv_wavenumbers if nyquist_zeroed else self.wavenumbers)[axis]
        shape = [1] * self.dim
        shape[axis] = self.points_per_axis[axis]
        return k.reshape(shape)


def make_grid(
    dim: int,
    points_per_axis,
    extent_per_axis,
    origin_per_axis=None,
) -> Grid:
    """Build a periodic grid, validating dimensions, extents and point counts."""
    if dim not in (1, 2, 3):
        raise GridError(f"dim must be 1, 2 or 3, got {dim}")
    points = tuple(int(n) for n in points_per_axis)
    extents = tuple(float(L) for L in extent_per_axis)
    if origin_per_axis is None:
        # default to a box centered on the coordinate origin
        origin_per_axis = [-0.5 * float(L) for L in extent_per_axis]
    origins = tuple(float(o) for o in origin_per_axis)
    if not (len(points) == len(extents) == len(origins) == dim):
        raise GridError(
            "per-axis lists must all have length dim="
            f"{dim}: got {len(points)}, {len(extents)}, {len(origins)}"
        )
    for n in points:
        if n < MIN_POINTS:
            raise GridError(f"need at least {MIN_POINTS} points per axis, got {n}")
    for L in extents:
        if not (L > 0) or not np.isfinite(L):
            raise GridError(f"axis extent must be positive and finite, got {L}")
    return Grid(dim, points, extents, origins)


def _check_values(grid: Grid, values: np.ndarray, complex_ok: bool) -> np.ndarray:
    values = np.asarray(values)
    if values.size != grid.size:
        raise GridError(
            f"value count {values.size} does not match grid size {grid.size}"
        )
    values = values.reshape(grid.shape)
    if np.iscomplexobj(values):
        if not complex_ok:
            raise GridError("expected real values, got complex")
        return values.astype(np.complex128, copy=False)
    return values.astype(np.float64, copy=False)


@dataclass(frozen=True)
class ScalarField:
    """Real-valued sampled function on a Grid.

    Masked field components of a FieldSet carry NaN sentinels at excluded
    points, so finiteness is asserted by the operators, not here.
    """

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _check_values(self.grid, self.values, False))


@dataclass(frozen=True)
class ComplexField:
    """Complex-valued sampled function on a Grid (wave functions)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = _check_values(self.grid, self.values, True)
        object.__setattr__(self, "values", vals.astype(np.complex128, copy=False))


@dataclass(frozen=True)
class VectorField:
    """Vector-valued sampled function: one real component array per axis."""

    grid: Grid
    components: tuple[np.ndarray, ...]

    def __post_init__(self):
        comps = tuple(self.components)
        if len(comps) != self.grid.dim:
            raise GridError(
                f"expected {self.grid.dim} components, got {len(comps)}"
            )
        comps = tuple(_check_values(self.grid, c, False) for c in comps)
        object.__setattr__(self, "components", comps)


def _require_finite(values: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(values)):
        raise GridError(f"{what} contains non-finite values")


def _spectral_axis_derivative(grid: Grid, values: np.ndarray, axis: int) -> np.ndarray:
    fhat = _fft.fft(values, axis=axis, workers=_workers())
    fhat *= 1j * grid._axis_k(axis)
    out = _fft.ifft(fhat, axis=axis, workers=_workers())
    if not np.iscomplexobj(values):
        return out.real.copy()
    return out


def gradient(f: ScalarField | ComplexField):
    """Spectral gradient.

    Returns a VectorField for real input, a list of ComplexField (one per
    axis) for complex input.  Exact for band-limited data.
    """
    _require_finite(f.values, "gradient input")
    grid = f.grid
    derivs = [
        _spectral_axis_derivative(grid, f.values, axis) for axis in range(grid.dim)
    ]
    if isinstance(f, ComplexField):
        return [ComplexField(grid, d) for d in derivs]
    return VectorField(grid, tuple(derivs))


def laplacian(f: ScalarField | ComplexField):
    """Spectral Laplacian: multiplication by -|k|^2 in Fourier space."""
    _require_finite(f.values, "laplacian input")
    grid = f.grid
    fhat = _fft.fftn(f.values, workers=_workers())
    fhat *= -grid.k_squared
    out = _fft.ifftn(fhat, workers=_workers())
    if isinstance(f, ComplexField):
        return ComplexField(grid, out)
    return ScalarField(grid, out.real)


def divergence(v: VectorField) -> ScalarField:
    """Spectral divergence: per-axis derivative of each component, summed."""
    grid = v.grid
    total = np.zeros(grid.shape)
    for axis, comp in enumerate(v.components):
        _require_finite(comp, "divergence input")
        total += _spectral_axis_derivative(grid, comp, axis)
    return ScalarField(grid, total)


def integrate(f: ScalarField | ComplexField | np.ndarray, grid: Grid | None = None):
    """Quadrature over the periodic box: sum of values times cell volume.

    Accepts a field or a raw array (raw arrays need the grid argument).
    Uniform weights are exact to spectral accuracy on periodic grids.
    """
    if isinstance(f, np.ndarray):
        if grid is None:
            raise GridError("integrating a raw array requires a grid")
        values = f
    else:
        values = f.values
        grid = f.grid
    _require_finite(values, "integrate input")
    # fixed summation order keeps results reproducible
    total = np.sum(values, dtype=values.dtype)
    if np.iscomplexobj(values):
        return complex(total * grid.cell_volume)
    return float(total * grid.cell_volume)


def masked_integrate(values: np.ndarray, mask: np.ndarray, grid: Grid) -> float:
    """Quadrature restricted to unmasked points; NaN outside the mask is ignored."""
    sel = np.where(mask, values, 0.0)
    return float(np.sum(sel) * grid.cell_volume)
