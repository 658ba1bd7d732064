"""Quantitative checks of every identity, inequality and PDE the field
formalism asserts.

Each check produces an entry with an explicit tolerance, the measured
value(s) and the masked fraction it was evaluated over.  Residual norms of
the transport and continuity equations are density-weighted L2 norms over
the unmasked region: the quotient fields are undefined at nodes, and the
weighting keeps near-threshold round-off from dominating the norm.

Spatial derivatives of quotient fields (p, p_w, U_w) are assembled from
spectral derivatives of the smooth quantities psi and w, with the division
by w done only at the evaluation point.  Differentiating the quotients
directly would propagate tail garbage globally through the FFT.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy import fft as _fft

from .evolve import (
    FreePotential,
    HarmonicPotential,
    Potential,
    Trajectory,
)
from .fields import FieldSet, potential_values
from .grid import ComplexField, Grid, ScalarField, VectorField, gradient, laplacian
from .params import PhysicalParams

__all__ = [
    "Check",
    "VerificationReport",
    "UnsupportedScenarioError",
    "born_consistency",
    "quantum_potential_average",
    "koenig_identity_checks",
    "uncertainty_products",
    "continuity_residual",
    "transport_residual",
    "vector_identity_residual",
    "sign_checks",
    "random_band_limited_vector",
]

REL_TOL = 1e-8
ABS_FLOOR = 1e-12


class UnsupportedScenarioError(ValueError):
    """The requested check does not apply to this scenario."""


@dataclass
class Check:
    name: str
    values: list[float]
    tolerance: float
    passed: bool
    masked_fraction: float = 0.0


@dataclass
class VerificationReport:
    checks: list[Check] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def extend(self, entries) -> None:
        self.checks.extend(entries)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        def native(c: Check) -> dict:
            d = asdict(c)
            d["values"] = [float(v) for v in d["values"]]
            d["tolerance"] = float(d["tolerance"])
            d["passed"] = bool(d["passed"])
            d["masked_fraction"] = float(d["masked_fraction"])
            return d

        return {
            "checks": [native(c) for c in self.checks],
            "metadata": self.metadata,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False)


def _close(a: float, b: float, rel: float) -> bool:
    return abs(a - b) <= rel * max(abs(a), abs(b)) + ABS_FLOOR


def _field_integral(values: np.ndarray, fs: FieldSet) -> float:
    """integral of field*w over the unmasked region."""
    sel = np.where(fs.mask, values * fs.w.values, 0.0)
    return float(np.sum(sel) * fs.grid.cell_volume)


# ---------------------------------------------------------------------------
# spectral building blocks


def _axis_deriv(grid: Grid, values: np.ndarray, axis: int) -> np.ndarray:
    k = grid._axis_k(axis)
    out = _fft.ifft(1j * k * _fft.fft(values, axis=axis), axis=axis)
    return out if np.iscomplexobj(values) else out.real.copy()


def _mixed_deriv(grid: Grid, values: np.ndarray, i: int, j: int) -> np.ndarray:
    """d^2/dx_i dx_j by two successive spectral derivatives."""
    return _axis_deriv(grid, _axis_deriv(grid, values, i), j)


class _SnapshotDerivatives:
    """Pointwise derivatives of p, p_w and U_w for one snapshot, computed
    from spectral derivatives of psi and w only."""

    def __init__(self, psi: ComplexField, params: PhysicalParams):
        grid = psi.grid
        hbar = params.hbar
        self.grid = grid
        self.params = params
        pv = psi.values
        self.w = np.abs(pv) ** 2
        d = grid.dim

        g = [_axis_deriv(grid, pv, i) for i in range(d)]
        gij = [[_mixed_deriv(grid, pv, i, j) for j in range(d)] for i in range(d)]

        # momentum density s_i = w p_i and density gradient a_i, both smooth
        self.s = [hbar * np.imag(np.conj(pv) * g[i]) for i in range(d)]
        self.ds = [
            [hbar * np.imag(np.conj(g[j]) * g[i] + np.conj(pv) * gij[i][j]) for j in range(d)]
            for i in range(d)
        ]
        self.a = [2.0 * np.real(np.conj(pv) * g[i]) for i in range(d)]
        self.aij = [
            [
                2.0 * np.real(np.conj(g[i]) * g[j] + np.conj(pv) * gij[i][j])
                for j in range(d)
            ]
            for i in range(d)
        ]
        self.lap_w = sum(self.aij[i][i] for i in range(d))
        self.dlap_w = [_axis_deriv(grid, self.lap_w, i) for i in range(d)]

    def quotients(self, mask: np.ndarray):
        """p, p_w and their Jacobians, grad U_w; NaN outside the mask."""
        d = self.grid.dim
        hbar, m = self.params.hbar, self.params.mass
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            inv_w = np.where(mask, 1.0 / self.w, np.nan)
        p = [self.s[i] * inv_w for i in range(d)]
        pw = [0.5 * hbar * self.a[i] * inv_w for i in range(d)]
        dp = [
            [(self.ds[i][j] - p[i] * self.a[j]) * inv_w for j in range(d)]
            for i in range(d)
        ]
        dpw = [
            [
                0.5
                * hbar
                * (self.aij[i][j] - self.a[i] * self.a[j] * inv_w)
                * inv_w
                for j in range(d)
            ]
            for i in range(d)
        ]
        grad_Uw = [
            -(hbar**2 / (4.0 * m))
            * (self.dlap_w[i] - self.lap_w * self.a[i] * inv_w)
            * inv_w
            for i in range(d)
        ]
        return p, pw, dp, dpw, grad_Uw


def _weighted_l2(comps, w: np.ndarray, mask: np.ndarray, grid: Grid) -> float:
    """sqrt(integral of |v|^2 w) over the unmasked region."""
    total = np.zeros(grid.shape)
    for c in comps:
        total += np.where(mask, c * c, 0.0)
    return float(np.sqrt(np.sum(total * np.where(mask, w, 0.0)) * grid.cell_volume))


def _potential_gradient(V: Potential, grid: Grid, params: PhysicalParams):
    """grad V, analytic where the potential kind allows it."""
    if isinstance(V, FreePotential) or V is None:
        return [np.zeros(grid.shape) for _ in range(grid.dim)]
    if isinstance(V, HarmonicPotential):
        center = V.center if V.center is not None else (0.0,) * grid.dim
        return [
            params.mass * V.omega0**2 * (x - c)
            for x, c in zip(grid.meshes(), center)
        ]
    vals = potential_values(V, grid, params)
    return [_axis_deriv(grid, vals, i) for i in range(grid.dim)]


# ---------------------------------------------------------------------------
# Born-rule consistency


def _lap_w(fs: FieldSet) -> np.ndarray:
    if fs.lap_w is not None:
        return fs.lap_w
    return laplacian(ScalarField(fs.grid, fs.w.values)).values


def _kinetic_weighted(fs: FieldSet) -> float:
    """integral of K w, with the removable singularity at density nodes
    evaluated by its limit.

    K w = (|p|^2 + |p_w|^2) w / 2m equals (hbar^2/2m) |grad psi|^2
    pointwise, which stays finite and generally nonzero where w vanishes,
    so node grid points must contribute; dropping them loses an O(h) chunk
    of the integral in 1D.
    """
    grid = fs.grid
    hbar, m = fs.params.hbar, fs.params.mass
    masked_part = np.nan_to_num(fs.K.values) * fs.w.values
    if fs.grad_psi_sq is not None:
        node_part = (hbar**2 / (2.0 * m)) * sum(fs.grad_psi_sq)
    else:
        node_part = np.zeros(grid.shape)
    integrand = np.where(fs.mask, masked_part, node_part)
    return float(np.sum(integrand) * grid.cell_volume)


def _quantum_potential_weighted(fs: FieldSet) -> float:
    """integral of U_w w; at masked points the integrand equals the smooth
    expression -(hbar^2/4m) laplacian(w) exactly, so no mass is dropped."""
    grid = fs.grid
    hbar, m = fs.params.hbar, fs.params.mass
    smooth = -(hbar**2 / (4.0 * m)) * _lap_w(fs)
    integrand = np.where(
        fs.mask, np.nan_to_num(fs.U_w.values) * fs.w.values, smooth
    )
    return float(np.sum(integrand) * grid.cell_volume)


def born_consistency(
    psi: ComplexField,
    fs: FieldSet,
    V: Potential,
    params: PhysicalParams,
    rel_tol: float = REL_TOL,
) -> list[Check]:
    """Operator-form expectation values against field-average integrals.

    Covers momentum (per axis), kinetic energy in both operator forms
    against both candidate field averages, total energy, and angular
    momentum where the dimension admits it.
    """
    grid = psi.grid
    hbar, m = params.hbar, params.mass
    dV = grid.cell_volume
    pv = psi.values
    mf = fs.masked_fraction
    checks: list[Check] = []

    g = [_axis_deriv(grid, pv, i) for i in range(grid.dim)]
    axes = "xyz"

    for i in range(grid.dim):
        op = float(hbar * np.sum(np.imag(np.conj(pv) * g[i])) * dV)
        fld = _field_integral(fs.p.components[i], fs)
        checks.append(
            Check(
                name=f"born_momentum_{axes[i]}",
                values=[op, fld],
                tolerance=rel_tol,
                passed=_close(op, fld, rel_tol),
                masked_fraction=mf,
            )
        )

    lap_psi = laplacian(psi)
    k_op_tilde = float(
        np.sum(np.real(np.conj(pv) * (-(hbar**2) * lap_psi.values))) * dV / (2.0 * m)
    )
    k_op_grad = float(
        sum(np.sum(np.abs(hbar * gi) ** 2) for gi in g) * dV / (2.0 * m)
    )
    k_fld = _kinetic_weighted(fs)
    k_fld_tilde = k_fld + _quantum_potential_weighted(fs)
    vals = [k_op_tilde, k_op_grad, k_fld, k_fld_tilde]
    ok = all(_close(a, b, rel_tol) for a in vals for b in vals)
    checks.append(
        Check(
            name="born_kinetic_both_forms",
            values=vals,
            tolerance=rel_tol,
            passed=ok,
            masked_fraction=mf,
        )
    )

    V_vals = potential_values(V, grid, params)
    H_psi = -(hbar**2 / (2.0 * m)) * lap_psi.values + V_vals * pv
    e_op = float(np.sum(np.real(np.conj(pv) * H_psi)) * dV)
    e_fld = _field_integral(fs.E.values, fs)
    checks.append(
        Check(
            name="born_energy",
            values=[e_op, e_fld],
            tolerance=rel_tol,
            passed=_close(e_op, e_fld, rel_tol),
            masked_fraction=mf,
        )
    )

    if grid.dim >= 2:
        coords = grid.meshes()
        pairs = [("z", 0, 1)] if grid.dim == 2 else [
            ("x", 1, 2),
            ("y", 2, 0),
            ("z", 0, 1),
        ]
        for label, i, j in pairs:
            op = float(
                hbar
                * np.sum(
                    np.imag(np.conj(pv) * (coords[i] * g[j] - coords[j] * g[i]))
                )
                * dV
            )
            if grid.dim == 2:
                m_vals = fs.M.values
            else:
                m_vals = fs.M.components[{"x": 0, "y": 1, "z": 2}[label]]
            fld = _field_integral(np.nan_to_num(m_vals), fs)
            checks.append(
                Check(
                    name=f"born_angular_{label}",
                    values=[op, fld],
                    tolerance=rel_tol,
                    passed=_close(op, fld, rel_tol),
                    masked_fraction=mf,
                )
            )
    return checks


def quantum_potential_average(fs: FieldSet, abs_tol: float = 1e-10) -> Check:
    """The density average of the true quantum potential vanishes
    (integration by parts on the two kinetic-energy forms)."""
    val = _quantum_potential_weighted(fs)
    return Check(
        name="quantum_potential_average_zero",
        values=[val],
        tolerance=abs_tol,
        passed=abs(val) <= abs_tol,
        masked_fraction=fs.masked_fraction,
    )


def koenig_identity_checks(fs: FieldSet, tol: float = 1e-12) -> list[Check]:
    """Pointwise identities of the two-momentum model: the mean of p1 and
    p2 is p, and the mean of their kinetic energies is K.  Algebraic, so
    they must hold to round-off at every unmasked point."""
    grid = fs.grid
    m = fs.params.mass
    mask = fs.mask
    mean_err = 0.0
    for p1c, p2c, pc in zip(
        fs.p1.components, fs.p2.components, fs.p.components
    ):
        diff = np.abs(0.5 * (p1c + p2c) - pc)
        # round-off of the cancellation scales with the larger operand
        scale = np.maximum(1.0, np.maximum(np.abs(p1c), np.abs(p2c)))
        mean_err = max(mean_err, float(np.nanmax(np.where(mask, diff / scale, 0.0))))
    k_pair = (
        sum(c * c for c in fs.p1.components)
        + sum(c * c for c in fs.p2.components)
    ) / (4.0 * m)
    diff = np.abs(k_pair - fs.K.values)
    scale = np.maximum(1.0, np.maximum(np.abs(fs.K.values), k_pair))
    energy_err = float(np.nanmax(np.where(mask, diff / scale, 0.0)))
    mf = fs.masked_fraction
    return [
        Check(
            name="koenig_momentum_mean",
            values=[mean_err],
            tolerance=tol,
            passed=mean_err <= tol,
            masked_fraction=mf,
        ),
        Check(
            name="koenig_energy_mean",
            values=[energy_err],
            tolerance=tol,
            passed=energy_err <= tol,
            masked_fraction=mf,
        ),
    ]


# ---------------------------------------------------------------------------
# uncertainty products


def uncertainty_products(fs: FieldSet, rel_slack: float = 1e-8) -> list[Check]:
    """Per-axis product of the position variance and the osmotic-momentum
    variance; must not fall below hbar^2/4 (up to rel_slack)."""
    grid = fs.grid
    hbar = fs.params.hbar
    bound = 0.25 * hbar**2
    axes = "xyz"
    checks = []
    w = fs.w.values
    dV = grid.cell_volume
    coords = grid.meshes()
    for i in range(grid.dim):
        x = coords[i]
        x_mean = float(np.sum(x * w) * dV)
        d_x = float(np.sum((x - x_mean) ** 2 * w) * dV)
        # The integrand (p_w)^2 w has a finite nonzero limit at density
        # nodes (hbar^2 |d_i psi|^2 there), so dropping masked node points
        # would lose an O(h) chunk of the variance integral.
        masked_part = np.nan_to_num(fs.p_w.components[i]) ** 2 * w
        if fs.grad_psi_sq is not None:
            node_part = hbar**2 * fs.grad_psi_sq[i]
        else:
            a = _axis_deriv(grid, w, i)
            node_part = 0.5 * hbar**2 * _axis_deriv(grid, a, i)
        d_p = float(np.sum(np.where(fs.mask, masked_part, node_part)) * dV)
        product = d_x * d_p
        checks.append(
            Check(
                name=f"uncertainty_product_{axes[i]}",
                values=[d_x, d_p, product],
                tolerance=bound * (1.0 - rel_slack),
                passed=product >= bound * (1.0 - rel_slack),
                masked_fraction=fs.masked_fraction,
            )
        )
    return checks


# ---------------------------------------------------------------------------
# PDE residuals over recorded evolutions


def _interior_indices(n_snapshots: int) -> range:
    return range(1, n_snapshots - 1)


def continuity_residual(
    traj: Trajectory,
    fieldsets: list[FieldSet],
    tolerance: float = 1e-3,
) -> Check:
    """Residual of the probability transport equation
    dw/dt + (1/m) div(w p) = 0, with dw/dt a centered difference across
    recorded snapshots and the flux divergence computed spectrally from
    the smooth momentum density.

    The reported value is the worst density-weighted relative residual over
    the interior snapshots; the denominator is the larger of the two term
    norms with a density-scale floor (stationary states have both terms
    near zero).
    """
    if len(traj.snapshots) < 3:
        raise UnsupportedScenarioError("continuity residual needs >= 3 snapshots")
    grid = traj.grid
    m = traj.params.mass
    hbar = traj.params.hbar
    dt = traj.record_dt
    worst = 0.0
    worst_mf = 0.0
    for k in _interior_indices(len(traj.snapshots)):
        w_prev = np.abs(traj.snapshots[k - 1].psi.values) ** 2
        w_next = np.abs(traj.snapshots[k + 1].psi.values) ** 2
        dwdt = (w_next - w_prev) / (2.0 * dt)
        pv = traj.snapshots[k].psi.values
        flux = [
            hbar * np.imag(np.conj(pv) * _axis_deriv(grid, pv, i))
            for i in range(grid.dim)
        ]
        div = sum(_axis_deriv(grid, flux[i], i) for i in range(grid.dim)) / m
        fs = fieldsets[k]
        mask = fs.mask
        w_mid = fs.w.values
        resid = _weighted_l2([dwdt + div], w_mid, mask, grid)
        n1 = _weighted_l2([dwdt], w_mid, mask, grid)
        n2 = _weighted_l2([div], w_mid, mask, grid)
        floor = _weighted_l2([w_mid], w_mid, mask, grid)  # density per unit time
        rel = resid / max(n1, n2, floor)
        if rel > worst:
            worst = rel
            worst_mf = fs.masked_fraction
    return Check(
        name="continuity_residual",
        values=[float(worst)],
        tolerance=tolerance,
        passed=worst <= tolerance,
        masked_fraction=worst_mf,
    )


def transport_residual(
    traj: Trajectory,
    fieldsets: list[FieldSet],
    V: Potential | None = None,
    tolerance: float = 1e-2,
    kinetic_cross_tol: float = 1e-6,
) -> list[Check]:
    """Residual of the momentum transport equation
    dp/dt = -(1/m)(p.grad)p - (1/m)(p_w.grad)p_w - grad U_w - grad V,
    plus a cross-check that the two convective terms equal the gradient of
    the kinetic-energy field (the curl-free vector identity).
    """
    if len(traj.snapshots) < 3:
        raise UnsupportedScenarioError("transport residual needs >= 3 snapshots")
    if V is None:
        V = traj.potential
    grid = traj.grid
    m = traj.params.mass
    dt = traj.record_dt
    grad_V = _potential_gradient(V, grid, traj.params)

    worst = 0.0
    worst_cross = 0.0
    worst_mf = 0.0
    for k in _interior_indices(len(traj.snapshots)):
        fs_prev, fs_mid, fs_next = fieldsets[k - 1], fieldsets[k], fieldsets[k + 1]
        mask = fs_prev.mask & fs_mid.mask & fs_next.mask
        if not mask.any():
            raise UnsupportedScenarioError("no common unmasked points")
        derivs = _SnapshotDerivatives(traj.snapshots[k].psi, traj.params)
        p, pw, dp, dpw, grad_Uw = derivs.quotients(mask)
        d = grid.dim
        rhs = []
        grad_K = []
        for i in range(d):
            conv_p = sum(p[j] * dp[i][j] for j in range(d)) / m
            conv_pw = sum(pw[j] * dpw[i][j] for j in range(d)) / m
            rhs.append(-conv_p - conv_pw - grad_Uw[i] - grad_V[i])
            grad_K.append(
                sum(p[j] * dp[j][i] + pw[j] * dpw[j][i] for j in range(d)) / m
            )
        dpdt = [
            (
                np.nan_to_num(fs_next.p.components[i])
                - np.nan_to_num(fs_prev.p.components[i])
            )
            / (2.0 * dt)
            for i in range(d)
        ]
        w_mid = fs_mid.w.values
        resid = _weighted_l2(
            [dpdt[i] - rhs[i] for i in range(d)], w_mid, mask, grid
        )
        n1 = _weighted_l2(dpdt, w_mid, mask, grid)
        n2 = _weighted_l2(rhs, w_mid, mask, grid)
        k_fld = _field_integral(np.nan_to_num(fs_mid.K.values), fs_mid)
        floor = np.sqrt(2.0 * m * max(k_fld, 0.0)) + ABS_FLOOR  # momentum scale / unit time
        rel = resid / max(n1, n2, floor)
        cross = _weighted_l2(
            [
                sum(p[j] * dp[i][j] for j in range(d)) / m
                + sum(pw[j] * dpw[i][j] for j in range(d)) / m
                - grad_K[i]
                for i in range(d)
            ],
            w_mid,
            mask,
            grid,
        ) / max(_weighted_l2(grad_K, w_mid, mask, grid), floor)
        worst = max(worst, rel)
        worst_cross = max(worst_cross, cross)
        worst_mf = max(worst_mf, 1.0 - np.count_nonzero(mask) / mask.size)
    return [
        Check(
            name="transport_residual",
            values=[float(worst)],
            tolerance=tolerance,
            passed=worst <= tolerance,
            masked_fraction=worst_mf,
        ),
        Check(
            name="transport_kinetic_gradient_crosscheck",
            values=[float(worst_cross)],
            tolerance=kinetic_cross_tol,
            passed=worst_cross <= kinetic_cross_tol,
            masked_fraction=worst_mf,
        ),
    ]


# ---------------------------------------------------------------------------
# vector identity


def vector_identity_residual(
    v: VectorField, tolerance: float = 1e-8
) -> Check:
    """v x (curl v) = (1/2) grad(v^2) - (v.grad)v, both sides spectral.

    2D fields are embedded with a vanishing z-component.
    """
    grid = v.grid
    if grid.dim == 1:
        raise UnsupportedScenarioError("the vector identity needs dim >= 2")
    d = grid.dim
    comps = [np.asarray(c, dtype=float) for c in v.components]
    dvi = [[_axis_deriv(grid, comps[i], j) for j in range(d)] for i in range(d)]

    if d == 2:
        curl_z = dvi[1][0] - dvi[0][1]
        lhs = [comps[1] * curl_z, -comps[0] * curl_z]
    else:
        curl = [
            dvi[2][1] - dvi[1][2],
            dvi[0][2] - dvi[2][0],
            dvi[1][0] - dvi[0][1],
        ]
        lhs = [
            comps[1] * curl[2] - comps[2] * curl[1],
            comps[2] * curl[0] - comps[0] * curl[2],
            comps[0] * curl[1] - comps[1] * curl[0],
        ]

    v2 = sum(c * c for c in comps)
    rhs = [
        0.5 * _axis_deriv(grid, v2, i)
        - sum(comps[j] * dvi[i][j] for j in range(d))
        for i in range(d)
    ]
    num = np.sqrt(sum(np.sum((a - b) ** 2) for a, b in zip(lhs, rhs)))
    den = np.sqrt(sum(np.sum(b**2) for b in rhs)) + ABS_FLOOR
    rel = float(num / den) if den > 10 * ABS_FLOOR else float(num)
    return Check(
        name="vector_identity_residual",
        values=[rel],
        tolerance=tolerance,
        passed=rel <= tolerance,
        masked_fraction=0.0,
    )


def random_band_limited_vector(
    grid: Grid, rng: np.random.Generator, max_mode: int = 5
) -> VectorField:
    """Seeded random periodic vector field with spectral content confined
    to low modes (for property-testing the vector identity)."""
    comps = []
    for _ in range(grid.dim):
        # sum of low-mode plane cosines: real, smooth, exactly band-limited
        vals = np.zeros(grid.shape)
        for _mode in range(max_mode):
            ks = [
                int(rng.integers(-max_mode, max_mode + 1)) for _ in range(grid.dim)
            ]
            amp = rng.normal()
            phase = rng.uniform(0, 2 * np.pi)
            arg = sum(
                2.0 * np.pi * k * (x - o) / L
                for k, x, o, L in zip(
                    ks, grid.meshes(), grid.origin_per_axis, grid.extent_per_axis
                )
            )
            vals += amp * np.cos(arg + phase)
        comps.append(vals)
    return VectorField(grid, tuple(comps))


# ---------------------------------------------------------------------------
# sign structure in classically forbidden regions


def sign_checks(
    fs: FieldSet,
    V: Potential,
    E_scale: float,
    min_negative_fraction: float = 0.01,
) -> list[Check]:
    """K must stay non-negative everywhere while K-tilde goes negative on a
    non-trivial part of the classically forbidden region."""
    grid = fs.grid
    V_vals = potential_values(V, grid, fs.params)
    forbidden = V_vals > E_scale
    if not forbidden.any():
        raise UnsupportedScenarioError(
            "scenario has no classically forbidden region (V <= E_scale everywhere)"
        )
    k_min = float(np.nanmin(np.where(fs.mask, fs.K.values, np.nan)))
    checks = [
        Check(
            name="kinetic_field_nonnegative",
            values=[k_min],
            tolerance=1e-10 * E_scale,
            passed=k_min >= -1e-10 * E_scale,
            masked_fraction=fs.masked_fraction,
        )
    ]
    region = forbidden & fs.mask
    if not region.any():
        raise UnsupportedScenarioError("forbidden region is entirely masked")
    frac = float(np.count_nonzero(fs.K_tilde.values[region] < 0.0)) / float(
        np.count_nonzero(region)
    )
    checks.append(
        Check(
            name="ktilde_negative_in_barrier",
            values=[frac],
            tolerance=min_negative_fraction,
            passed=frac >= min_negative_fraction,
            masked_fraction=fs.masked_fraction,
        )
    )
    return checks
