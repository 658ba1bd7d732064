"""Analytic initial states with known closed-form observable fields.

These serve both as scenario inputs and as oracles: for every closed-form
kind the exact fields (momentum, osmotic momentum, quantum-potential split,
energy, ...) are available from hand-derived formulas, so the numerical
extraction can be checked against them.  Derivations are sketched in the
docstrings of the ``_analytic_*`` helpers.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import eval_hermite
from scipy.special import gammaln

from .fields import DEFAULT_MASK_EPSILON, FieldSet
from .grid import ComplexField, Grid, ScalarField, VectorField, integrate
from .params import PhysicalParams

__all__ = [
    "PhysicalParams",
    "PlaneWave",
    "Gaussian",
    "HOEigenstate",
    "Vortex2D",
    "Superposition",
    "StateSpec",
    "StateRealizationError",
    "UnsupportedStateError",
    "realize",
    "analytic_fields",
]


class StateRealizationError(ValueError):
    """State cannot be represented on the given grid."""


class UnsupportedStateError(ValueError):
    """No closed-form fields are available for this state kind."""


@dataclass(frozen=True)
class PlaneWave:
    """exp(i k.r)/sqrt(V).  k must hit an exact grid wavenumber
    (integer multiple of 2 pi / L per axis) so the oracle comparisons are
    free of spectral leakage."""

    wavevector: tuple[float, ...]
    params: PhysicalParams = PhysicalParams()


@dataclass(frozen=True)
class Gaussian:
    """Gaussian packet at t=0 with optional momentum boost, per-axis sigma."""

    center: tuple[float, ...]
    momentum: tuple[float, ...]
    sigma: tuple[float, ...]
    params: PhysicalParams = PhysicalParams()

    def __post_init__(self):
        if any(not (s > 0) for s in self.sigma):
            raise ValueError(f"sigma must be positive, got {self.sigma}")


@dataclass(frozen=True)
class HOEigenstate:
    """Harmonic-oscillator eigenstate, product of 1D Hermite functions."""

    numbers: tuple[int, ...]
    omega0: float
    params: PhysicalParams = PhysicalParams()

    def __post_init__(self):
        if any(n < 0 for n in self.numbers):
            raise ValueError(f"quantum numbers must be >= 0, got {self.numbers}")
        if not (self.omega0 > 0):
            raise ValueError(f"omega0 must be positive, got {self.omega0}")


@dataclass(frozen=True)
class Vortex2D:
    """2D state proportional to (x + i y) times a gaussian: one unit of
    phase winding around ``center``, angular-momentum field identically
    hbar away from the node."""

    center: tuple[float, float]
    sigma: float = 1.0
    params: PhysicalParams = PhysicalParams()

    def __post_init__(self):
        if not (self.sigma > 0):
            raise ValueError(f"sigma must be positive, got {self.sigma}")


@dataclass(frozen=True)
class Superposition:
    """Linear combination of other specs; normalized after summation."""

    terms: tuple[tuple[complex, "StateSpec"], ...]

    def __post_init__(self):
        if not self.terms or all(abs(c) == 0 for c, _ in self.terms):
            raise ValueError("superposition needs at least one nonzero coefficient")

    @property
    def params(self) -> PhysicalParams:
        return self.terms[0][1].params


StateSpec = PlaneWave | Gaussian | HOEigenstate | Vortex2D | Superposition


def _centered_coords(spec_center, grid: Grid) -> list[np.ndarray]:
    return [x - c for x, c in zip(grid.meshes(), spec_center)]


def _check_width(sigma: float, h: float, what: str) -> None:
    if sigma < h:
        raise StateRealizationError(
            f"{what} width {sigma} is below the grid spacing {h}"
        )
    if 2.0 * sigma / h < 8.0:
        warnings.warn(
            f"{what} width {sigma} is resolved by fewer than 8 points",
            stacklevel=3,
        )


def _require_dim(spec, grid: Grid, dim_len: int) -> None:
    if dim_len != grid.dim:
        raise StateRealizationError(
            f"{type(spec).__name__} has {dim_len} axis parameters "
            f"but the grid is {grid.dim}-dimensional"
        )


def _unnormalized(spec: StateSpec, grid: Grid) -> np.ndarray:
    if isinstance(spec, PlaneWave):
        _require_dim(spec, grid, len(spec.wavevector))
        for k, L in zip(spec.wavevector, grid.extent_per_axis):
            ratio = k * L / (2.0 * np.pi)
            if abs(ratio - round(ratio)) > 1e-9:
                raise StateRealizationError(
                    f"plane-wave component {k} is not a grid wavenumber "
                    f"(multiple of {2.0 * np.pi / L})"
                )
        phase = sum(k * x for k, x in zip(spec.wavevector, grid.meshes()))
        return np.exp(1j * phase)

    if isinstance(spec, Gaussian):
        _require_dim(spec, grid, len(spec.center))
        for s, h in zip(spec.sigma, grid.spacing):
            _check_width(s, h, "gaussian")
        xs = _centered_coords(spec.center, grid)
        expo = -sum(x * x / (4.0 * s * s) for x, s in zip(xs, spec.sigma))
        phase = sum(
            p0 * x for p0, x in zip(spec.momentum, grid.meshes())
        ) / spec.params.hbar
        return np.exp(expo + 1j * phase)

    if isinstance(spec, HOEigenstate):
        _require_dim(spec, grid, len(spec.numbers))
        ell = np.sqrt(spec.params.hbar / (spec.params.mass * spec.omega0))
        for h in grid.spacing:
            _check_width(ell, h, "oscillator")
        psi = np.ones(grid.shape)
        for n, x in zip(spec.numbers, grid.meshes()):
            xi = x / ell
            # log-normalized Hermite function, stable for moderate n
            lognorm = -0.5 * (n * np.log(2.0) + gammaln(n + 1)) - 0.25 * np.log(
                np.pi * ell * ell
            )
            psi = psi * (
                np.exp(lognorm - 0.5 * xi * xi) * eval_hermite(n, xi)
            )
        return psi.astype(complex)

    if isinstance(spec, Vortex2D):
        if grid.dim != 2:
            raise StateRealizationError("vortex2d requires a 2D grid")
        _check_width(spec.sigma, max(grid.spacing), "vortex")
        x, y = _centered_coords(spec.center, grid)
        rho2 = x * x + y * y
        return (x + 1j * y) * np.exp(-rho2 / (4.0 * spec.sigma**2))

    if isinstance(spec, Superposition):
        total = np.zeros(grid.shape, dtype=complex)
        for coeff, sub in spec.terms:
            child = _unnormalized(sub, grid)
            child /= np.sqrt(integrate(np.abs(child) ** 2, grid))
            total += coeff * child
        return total

    raise TypeError(f"unknown state spec {type(spec).__name__}")


def realize(spec: StateSpec, grid: Grid) -> ComplexField:
    """Sample the state on the grid, normalized so that |psi|^2 integrates to 1."""
    psi = _unnormalized(spec, grid)
    norm = integrate(np.abs(psi) ** 2, grid)
    if norm <= 0 or not np.isfinite(norm):
        raise StateRealizationError(f"state norm on this grid is {norm}")
    return ComplexField(grid, psi / np.sqrt(norm))


# ---------------------------------------------------------------------------
# closed-form fields


def _assemble_fieldset(
    grid: Grid,
    params: PhysicalParams,
    w: np.ndarray,
    p_comps: list[np.ndarray],
    pw_comps: list[np.ndarray],
    U_w: np.ndarray,
    V: np.ndarray,
    mask_epsilon: float,
) -> FieldSet:
    """Build a FieldSet from closed-form w, p, p_w, U_w and the potential.

    Everything else follows algebraically: K_w from p_w, the candidate
    kinetic fields, E = p^2/2m + U + V, the de Broglie/Planck companions,
    M = r x p, and the pair p1/p2 = p -/+ p_w.
    """
    m, hbar = params.mass, params.hbar
    mask = w > mask_epsilon * w.max()

    def nanify(a):
        return np.where(mask, a, np.nan)

    K_w = sum(c * c for c in pw_comps) / (2.0 * m)
    U = K_w + U_w
    p_sq = sum(c * c for c in p_comps)
    K = p_sq / (2.0 * m) + K_w
    K_tilde = K + U_w
    E = p_sq / (2.0 * m) + U + V

    M: VectorField | ScalarField | None
    if grid.dim == 1:
        M = None
    else:
        coords = grid.meshes()
        if grid.dim == 2:
            M = ScalarField(
                grid, nanify(coords[0] * p_comps[1] - coords[1] * p_comps[0])
            )
        else:
            M = VectorField(
                grid,
                (
                    nanify(coords[1] * p_comps[2] - coords[2] * p_comps[1]),
                    nanify(coords[2] * p_comps[0] - coords[0] * p_comps[2]),
                    nanify(coords[0] * p_comps[1] - coords[1] * p_comps[0]),
                ),
            )

    def vec(comps):
        return VectorField(grid, tuple(nanify(c) for c in comps))

    def sca(a):
        return ScalarField(grid, nanify(a))

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
        omega=sca(E / hbar),
        k_wave=vec([c / hbar for c in p_comps]),
        M=M,
        p1=vec([a - b for a, b in zip(p_comps, pw_comps)]),
        p2=vec([a + b for a, b in zip(p_comps, pw_comps)]),
        mask=mask,
        params=params,
        time=0.0,
    )


def analytic_fields(
    spec: StateSpec,
    grid: Grid,
    mask_epsilon: float = DEFAULT_MASK_EPSILON,
) -> FieldSet:
    """Exact observable fields for the closed-form state kinds.

    The energy field assumes each kind's natural potential: free space for
    plane waves, gaussians and the vortex; the generating harmonic well for
    HO eigenstates.  Raises UnsupportedStateError for superpositions.
    """
    params = spec.params
    m, hbar = params.mass, params.hbar
    zeros = np.zeros(grid.shape)

    if isinstance(spec, PlaneWave):
        # constant amplitude: the whole quantum-potential split vanishes
        _require_dim(spec, grid, len(spec.wavevector))
        w = np.full(grid.shape, 1.0 / grid.volume)
        p_comps = [np.full(grid.shape, hbar * k) for k in spec.wavevector]
        return _assemble_fieldset(
            grid, params, w, p_comps, [zeros] * grid.dim, zeros, zeros, mask_epsilon
        )

    if isinstance(spec, Gaussian):
        # w ~ exp(-sum (x-c)^2 / 2 sigma^2):
        #   p_w,i = -hbar (x_i - c_i) / 2 sigma_i^2
        #   U_w   = (hbar^2/4m) sum [1/sigma_i^2 - (x_i-c_i)^2/sigma_i^4]
        _require_dim(spec, grid, len(spec.center))
        xs = _centered_coords(spec.center, grid)
        sig = spec.sigma
        expo = -sum(x * x / (2.0 * s * s) for x, s in zip(xs, sig))
        w = np.exp(expo) / np.prod([np.sqrt(2.0 * np.pi) * s for s in sig])
        p_comps = [np.full(grid.shape, p0) for p0 in spec.momentum]
        pw_comps = [-hbar * x / (2.0 * s * s) for x, s in zip(xs, sig)]
        U_w = (hbar**2 / (4.0 * m)) * sum(
            1.0 / s**2 - x * x / s**4 for x, s in zip(xs, sig)
        )
        return _assemble_fieldset(
            grid, params, w, p_comps, pw_comps, U_w, zeros, mask_epsilon
        )

    if isinstance(spec, HOEigenstate):
        # real stationary state: p = 0, p_w,i = hbar psi_i'/psi_i, and from
        # the eigenvalue relation U = E_n - V, so U_w = E_n - V - K_w.
        _require_dim(spec, grid, len(spec.numbers))
        ell = np.sqrt(hbar / (m * spec.omega0))
        E_n = hbar * spec.omega0 * (sum(spec.numbers) + grid.dim / 2.0)
        w = np.abs(realize(spec, grid).values) ** 2
        pw_comps = []
        for n, x in zip(spec.numbers, grid.meshes()):
            xi = x / ell
            Hn = eval_hermite(n, xi)
            dHn = 2.0 * n * eval_hermite(n - 1, xi) if n > 0 else zeros
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(Hn != 0, dHn / np.where(Hn != 0, Hn, 1.0), np.inf)
            pw_comps.append(hbar / ell * (ratio - xi))
        K_w = sum(c * c for c in pw_comps) / (2.0 * m)
        V = 0.5 * m * spec.omega0**2 * sum(x * x for x in grid.meshes())
        U_w = E_n - V - K_w
        return _assemble_fieldset(
            grid, params, w, [zeros] * grid.dim, pw_comps, U_w, V, mask_epsilon
        )

    if isinstance(spec, Vortex2D):
        # w ~ rho^2 exp(-rho^2/2 sigma^2):
        #   p    = hbar (-y, x)/rho^2          (one unit of winding)
        #   p_w  = hbar (x, y)(1/rho^2 - 1/2 sigma^2)
        #   U_w  = -(hbar^2/4m)(4/rho^2 - 6/sigma^2 + rho^2/sigma^4)
        if grid.dim != 2:
            raise UnsupportedStateError("vortex2d fields require a 2D grid")
        s2 = spec.sigma**2
        x, y = _centered_coords(spec.center, grid)
        rho2 = x * x + y * y
        w_un = rho2 * np.exp(-rho2 / (2.0 * s2))
        w = w_un / (4.0 * np.pi * s2 * s2)
        with np.errstate(divide="ignore", invalid="ignore"):
            inv_rho2 = np.where(rho2 > 0, 1.0 / np.where(rho2 > 0, rho2, 1.0), np.inf)
        p_comps = [-hbar * y * inv_rho2, hbar * x * inv_rho2]
        factor = hbar * (inv_rho2 - 1.0 / (2.0 * s2))
        pw_comps = [x * factor, y * factor]
        U_w = -(hbar**2 / (4.0 * m)) * (
            4.0 * inv_rho2 - 6.0 / s2 + rho2 / (s2 * s2)
        )
        return _assemble_fieldset(
            grid, params, w, p_comps, pw_comps, U_w, zeros, mask_epsilon
        )

    raise UnsupportedStateError(
        f"no closed-form fields for {type(spec).__name__}"
    )
