"""Observable fields extracted from a single wave-function snapshot.

Given psi on a periodic grid, this module computes the probability density
together with the momentum field, osmotic momentum, the quantum-potential
split, the two kinetic-energy candidates, the pointwise energy/frequency/
wave-vector fields, the angular-momentum field (2D/3D) and the pair of
momentum fields p1/p2.  Points where the density falls below a relative
threshold are masked: node-singular quotients are undefined there, so all
downstream norms and checks exclude them.

The phase itself is never reconstructed (it is multivalued at vortices);
only its derivatives enter, via Im(psi* grad psi)/w and via H psi.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import (
    ComplexField,
    Grid,
    ScalarField,
    VectorField,
    gradient,
    integrate,
    laplacian,
)
from .params import PhysicalParams

__all__ = [
    "FieldSet",
    "KoenigDecomposition",
    "FieldExtractionError",
    "extract_fields",
    "koenig_decompose",
    "potential_values",
]

DEFAULT_MASK_EPSILON = 1e-12
NORMALIZATION_TOL = 1e-6


class FieldExtractionError(ValueError):
    """Unnormalized input, empty mask, or incompatible grids."""


def potential_values(V, grid: Grid, params: PhysicalParams) -> np.ndarray:
    """Resolve a potential argument to a real array on the grid.

    Accepts None (free particle), a ScalarField, a raw array, or any object
    with an ``on_grid(grid, params)`` method (the evolve module's potential
    kinds).
    """
    if V is None:
        return np.zeros(grid.shape)
    if isinstance(V, ScalarField):
        if V.grid != grid:
            raise FieldExtractionError("potential lives on a different grid")
        return V.values
    if hasattr(V, "on_grid"):
        return potential_values(V.on_grid(grid, params), grid, params)
    arr = np.asarray(V, dtype=float)
    if arr.size != grid.size:
        raise FieldExtractionError("potential array does not match grid size")
    return arr.reshape(grid.shape)


@dataclass(frozen=True)
class FieldSet:
    """Complete bundle of observable fields for one snapshot.

    All derived fields carry NaN at masked points.  ``M`` is a VectorField
    in 3D, the scalar z-component in 2D, and None in 1D (a cross product
    does not exist in one dimension, so nothing is emitted rather than a
    fake zero field).
    """

    w: ScalarField
    p: VectorField
    p_w: VectorField
    K_w: ScalarField
    U_w: ScalarField
    U: ScalarField
    K: ScalarField
    K_tilde: ScalarField
    E: ScalarField
    omega: ScalarField
    k_wave: VectorField
    M: VectorField | ScalarField | None
    p1: VectorField
    p2: VectorField
    mask: np.ndarray
    params: PhysicalParams
    time: float = 0.0
    # Smooth quadrature helpers (None for closed-form field sets):
    # |d_i psi|^2 per axis, and laplacian(w) assembled by the chain rule.
    # The density-weighted integrands K w and U_w w have finite
    # removable-singularity limits at density nodes, expressible through
    # these arrays; integrals over the mask alone would drop that mass.
    grad_psi_sq: tuple[np.ndarray, ...] | None = None
    lap_w: np.ndarray | None = None

    @property
    def grid(self) -> Grid:
        return self.w.grid

    @property
    def masked_fraction(self) -> float:
        return 1.0 - float(np.count_nonzero(self.mask)) / self.mask.size


@dataclass(frozen=True)
class KoenigDecomposition:
    """Center-of-mass / relative split of the pointwise kinetic energy.

    The two constituents each carry mass mu = m/2; their velocities are
    V_cm -/+ V_rel, which reproduces the momentum sum and the kinetic
    energy split identically.
    """

    V_cm: VectorField
    V_rel: VectorField
    mu: float
    M_total: float


def _nanify(values: np.ndarray, mask: np.ndarray) -> np.ndarray:
    return np.where(mask, values, np.nan)


def extract_fields(
    psi: ComplexField,
    V,
    params: PhysicalParams,
    mask_epsilon: float = DEFAULT_MASK_EPSILON,
    time: float = 0.0,
) -> FieldSet:
    """Compute the full observable-field bundle from psi.

    psi must be normalized to 1 within 1e-6; mask_epsilon is the relative
    density threshold below which points are excluded.
    """
    if not (0.0 < mask_epsilon < 1.0):
        raise FieldExtractionError(
            f"mask_epsilon must lie in (0, 1), got {mask_epsilon}"
        )
    grid = psi.grid
    hbar, m = params.hbar, params.mass

    w = np.abs(psi.values) ** 2
    norm = integrate(w, grid)
    if abs(norm - 1.0) > NORMALIZATION_TOL:
        raise FieldExtractionError(
            f"psi is not normalized: integral of |psi|^2 = {norm!r}"
        )

    mask = w > mask_epsilon * w.max()
    if not mask.any():
        raise FieldExtractionError("every grid point is below the mask threshold")

    # one reciprocal per point, shared by every quotient field
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        inv_w = np.where(mask, 1.0 / w, np.nan)

    # Density derivatives via the chain rule on psi rather than by
    # differentiating w spectrally: w = |psi|^2 has twice psi's bandwidth,
    # so its own FFT derivative aliases; the error is then amplified by
    # 1/w near nodes.
    grad_psi = gradient(psi)
    lap_psi = laplacian(psi)
    grad_psi_sq = tuple(np.abs(g.values) ** 2 for g in grad_psi)
    grad_w_comps = tuple(
        2.0 * np.real(np.conj(psi.values) * g.values) for g in grad_psi
    )
    lap_w = 2.0 * np.real(np.conj(psi.values) * lap_psi.values) + 2.0 * sum(
        grad_psi_sq
    )

    p_comps = tuple(
        hbar * np.imag(np.conj(psi.values) * g.values) * inv_w for g in grad_psi
    )
    pw_comps = tuple(0.5 * hbar * gw * inv_w for gw in grad_w_comps)

    K_w = sum(c * c for c in pw_comps) / (2.0 * m)
    U_w = -(hbar**2 / (4.0 * m)) * lap_w * inv_w
    U = K_w + U_w
    p_sq = sum(c * c for c in p_comps)
    K = p_sq / (2.0 * m) + K_w
    K_tilde = K + U_w

    V_grid = potential_values(V, grid, params)
    H_psi = -(hbar**2 / (2.0 * m)) * lap_psi.values + V_grid * psi.values
    E = np.real(np.conj(psi.values) * H_psi) * inv_w
    omega = E / hbar
    k_comps = tuple(c / hbar for c in p_comps)

    M: VectorField | ScalarField | None
    if grid.dim == 1:
        M = None
    else:
        coords = grid.meshes()
        if grid.dim == 2:
            mz = coords[0] * p_comps[1] - coords[1] * p_comps[0]
            M = ScalarField(grid, _nanify(mz, mask))
        else:
            mx = coords[1] * p_comps[2] - coords[2] * p_comps[1]
            my = coords[2] * p_comps[0] - coords[0] * p_comps[2]
            mz = coords[0] * p_comps[1] - coords[1] * p_comps[0]
            M = VectorField(
                grid, tuple(_nanify(c, mask) for c in (mx, my, mz))
            )

    p1_comps = tuple(a - b for a, b in zip(p_comps, pw_comps))
    p2_comps = tuple(a + b for a, b in zip(p_comps, pw_comps))

    def vec(comps):
        return VectorField(grid, tuple(_nanify(c, mask) for c in comps))

    def sca(values):
        return ScalarField(grid, _nanify(values, mask))

    return FieldSet(
        w=ScalarField(grid, w),
        p=vec(p_comps),
        p_w=vec(pw_comps),
        K_w=sca(K_w),
        U_w=sca(U_w),
        U=sca(U),
        K=sca(K),
        K_tilde=sca(K_tilde),
        E=sca(E),
        omega=sca(omega),
        k_wave=vec(k_comps),
        M=M,
        p1=vec(p1_comps),
        p2=vec(p2_comps),
        mask=mask,
        params=params,
        time=time,
        grad_psi_sq=grad_psi_sq,
        lap_w=lap_w,
    )


def koenig_decompose(fs: FieldSet) -> KoenigDecomposition:
    """Split the two-momentum model into center-of-mass and relative motion.

    V_cm = p/m and V_rel = p_w/m; with constituent velocities
    v_{1,2} = V_cm -/+ V_rel the momentum sum and kinetic-energy split hold
    pointwise by construction.
    """
    m = fs.params.mass
    V_cm = VectorField(fs.grid, tuple(c / m for c in fs.p.components))
    V_rel = VectorField(fs.grid, tuple(c / m for c in fs.p_w.components))
    return KoenigDecomposition(V_cm=V_cm, V_rel=V_rel, mu=m / 2.0, M_total=m)
