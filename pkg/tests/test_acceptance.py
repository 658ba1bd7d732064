"""Acceptance gate: one criterion per test, one printed pass/fail line each.

Each criterion pins the tolerance it is accepted at; the expected numbers
come from closed-form oracles (gaussian moments, eigenstate energies, the
evanescent-tail profile, the free-packet spreading law) or from independent
assembly of both sides of an identity.
"""
import hashlib
import json

import numpy as np
import pytest

from qfields import (
    BarrierPotential,
    ComplexField,
    EvolutionParams,
    FreePotential,
    Gaussian,
    HarmonicPotential,
    HOEigenstate,
    PhysicalParams,
    Superposition,
    Vortex2D,
    evolve_record,
    extract_fields,
    integrate,
    make_grid,
    realize,
)
from qfields import cli
from qfields.trajectories import (
    ensemble_equivariance,
    integrate_flow_lines,
    ordering_preserved,
    sample_from_density,
)
from qfields.verify import (
    born_consistency,
    continuity_residual,
    koenig_identity_checks,
    quantum_potential_average,
    random_band_limited_vector,
    sign_checks,
    transport_residual,
    uncertainty_products,
    vector_identity_residual,
)

from support import record_criterion


@pytest.fixture(scope="module")
def fine_grid1d():
    return make_grid(1, [1024], [80.0], [-40.0])


@pytest.fixture(scope="module")
def corpus(fine_grid1d, grid2d, params, free_gaussian_traj, free_gaussian_fieldsets):
    """Labelled (psi, fieldset, potential) triples covering every state
    family: boosted gaussian, oscillator eigenstates n=0..3, a two-packet
    superposition, a vortex, and two evolved packets."""
    free = FreePotential()
    entries = []

    def add(label, spec, grid, V):
        psi = realize(spec, grid)
        entries.append((label, psi, extract_fields(psi, V, params), V))

    add(
        "gaussian_boosted",
        Gaussian((0.0,), (0.7,), (1.0,), params),
        fine_grid1d,
        free,
    )
    for n in range(4):
        add(
            f"ho_n{n}",
            HOEigenstate((n,), 1.0, params),
            fine_grid1d,
            HarmonicPotential(1.0),
        )
    add(
        "superposition",
        Superposition(
            (
                (1.0, Gaussian((-3.0,), (0.0,), (1.0,), params)),
                (0.6 + 0.8j, Gaussian((3.0,), (0.5,), (1.0,), params)),
            )
        ),
        fine_grid1d,
        free,
    )
    h2 = grid2d.spacing[0]
    add("vortex", Vortex2D((0.5 * h2, 0.5 * h2), 1.0, params), grid2d, free)

    # evolved packets: the shared free-spreading run and a coherent packet
    # swinging in a harmonic well
    entries.append(
        (
            "evolved_free",
            free_gaussian_traj.snapshots[-1].psi,
            free_gaussian_fieldsets[-1],
            free,
        )
    )
    g = make_grid(1, [512], [40.0], [-20.0])
    psi0 = realize(
        Gaussian((2.0,), (0.0,), (np.sqrt(0.5),), params), g
    )
    Vh = HarmonicPotential(1.0)
    ev = EvolutionParams(dt=1e-3, steps=1000, record_every=1000, params=params)
    traj = evolve_record(psi0, Vh, ev)
    snap = traj.snapshots[-1]
    entries.append(
        (
            "evolved_harmonic",
            snap.psi,
            extract_fields(snap.psi, Vh, params, time=snap.time),
            Vh,
        )
    )
    return entries


@pytest.fixture(scope="session")
def barrier_traj(params):
    """Packet with mean kinetic energy ~0.5 impinging on a barrier of twice
    that height: produces a genuine evanescent region inside the slab."""
    g = make_grid(1, [1024], [64.0], [-32.0])
    psi0 = realize(Gaussian((-8.0,), (1.0,), (2.0,), params), g)
    V = BarrierPotential(height=2.0, width=4.0, center=6.0)
    ev = EvolutionParams(dt=2e-3, steps=7000, record_every=500, params=params)
    return evolve_record(psi0, V, ev)


def test_criterion_01_uncertainty_saturation_and_bound(
    fine_grid1d, params, corpus
):
    worst_sat = 0.0
    for sigma in (0.5, 1.0, 2.0):
        psi = realize(Gaussian((0.0,), (0.0,), (sigma,), params), fine_grid1d)
        fs = extract_fields(psi, FreePotential(), params)
        product = uncertainty_products(fs)[0].values[2]
        worst_sat = max(worst_sat, abs(product / 0.25 - 1.0))
    bound_ok = True
    for label, _, fs, _ in corpus:
        for c in uncertainty_products(fs):
            bound_ok &= bool(c.passed)
    record_criterion(
        "criterion-01 gaussian saturation (rel 1e-6) and variance bound",
        worst_sat < 1e-6 and bound_ok,
        f"saturation dev {worst_sat:.3e}",
    )


def test_criterion_02_kinetic_average_equivalence(corpus, params):
    worst_rel = 0.0
    worst_uw = 0.0
    for label, psi, fs, V in corpus:
        checks = born_consistency(psi, fs, V, params)
        kin = next(c for c in checks if "kinetic" in c.name)
        k_fld, k_fld_tilde = kin.values[2], kin.values[3]
        k_op = kin.values[1]
        worst_rel = max(worst_rel, abs(k_fld - k_fld_tilde) / abs(k_op))
        worst_uw = max(worst_uw, abs(quantum_potential_average(fs).values[0]))
    record_criterion(
        "criterion-02 two kinetic field averages agree (rel 1e-8, "
        "quantum-potential mean < 1e-10)",
        worst_rel < 1e-8 and worst_uw < 1e-10,
        f"rel {worst_rel:.3e}, mean {worst_uw:.3e}",
    )


def test_criterion_03_born_consistency(corpus, params):
    all_ok = True
    mz = None
    for label, psi, fs, V in corpus:
        checks = born_consistency(psi, fs, V, params)
        all_ok &= all(c.passed for c in checks)
        if label == "vortex":
            mz = next(c for c in checks if "angular" in c.name).values[0]
    vortex_ok = mz is not None and abs(mz - 1.0) < 1e-8
    record_criterion(
        "criterion-03 expectation values match field averages (rel 1e-8), "
        "vortex angular momentum = hbar",
        all_ok and vortex_ok,
        f"vortex Mz {mz!r}",
    )


def test_criterion_04_energy_field_constancy(fine_grid1d, params):
    psi = realize(HOEigenstate((0,), 1.0, params), fine_grid1d)
    V = HarmonicPotential(1.0)
    fs = extract_fields(psi, V, params, mask_epsilon=1e-6)
    e_dev = float(np.max(np.abs(fs.E.values[fs.mask] - 0.5)))
    w_dev = float(np.max(np.abs(fs.omega.values[fs.mask] - 0.5)))
    x = fine_grid1d.axes[0]
    core = fs.mask & (np.abs(x) <= 3.0)
    kw_dev = float(np.max(np.abs(fs.K_w.values[core] - 0.5 * x[core] ** 2)))
    uw_dev = float(np.max(np.abs(fs.U_w.values[core] - (0.5 - x[core] ** 2))))
    record_criterion(
        "criterion-04 oscillator ground state: constant energy field "
        "(1e-6), closed-form split (1e-8)",
        e_dev < 1e-6 and w_dev < 1e-6 and kw_dev < 1e-8 and uw_dev < 1e-8,
        f"E dev {e_dev:.3e}, Kw dev {kw_dev:.3e}, Uw dev {uw_dev:.3e}",
    )


def test_criterion_05_pde_residuals_and_convergence(
    free_gaussian_traj, free_gaussian_fieldsets
):
    traj = free_gaussian_traj
    fss = free_gaussian_fieldsets
    residuals = {}
    for every in (4, 2, 1):  # recording intervals 2e-2, 1e-2, 5e-3
        sub = traj.subsample(every)
        sub_fs = fss[::every]
        cont = continuity_residual(sub, sub_fs).values[0]
        trans = transport_residual(sub, sub_fs, traj.potential)[0].values[0]
        residuals[every] = (cont, trans)
    cont_mid, trans_mid = residuals[2]
    orders = [
        float(np.log2(residuals[4][i] / residuals[2][i])) for i in (0, 1)
    ] + [float(np.log2(residuals[2][i] / residuals[1][i])) for i in (0, 1)]
    orders_ok = all(abs(o - 2.0) <= 0.4 for o in orders)
    record_criterion(
        "criterion-05 continuity/transport residuals (1e-3, 1e-2 at "
        "interval 1e-2) with order-2 convergence",
        cont_mid < 1e-3 and trans_mid < 1e-2 and orders_ok,
        f"cont {cont_mid:.3e}, trans {trans_mid:.3e}, "
        f"orders {[round(o, 2) for o in orders]}",
    )


def test_criterion_06_vector_identity(grid2d):
    rng = np.random.default_rng(2024)
    g3 = make_grid(3, [24, 24, 24], [2 * np.pi] * 3)
    worst = 0.0
    for trial in range(20):
        g = grid2d if trial % 2 == 0 else g3
        v = random_band_limited_vector(g, rng)
        worst = max(worst, vector_identity_residual(v).values[0])
    record_criterion(
        "criterion-06 curl identity on 20 random band-limited fields "
        "(rel L2 1e-8)",
        worst < 1e-8,
        f"worst residual {worst:.3e}",
    )


def test_criterion_07_sign_structure(barrier_traj, params):
    V = barrier_traj.potential
    ok_signs = True
    frac = 0.0
    for snap in barrier_traj.snapshots[1:]:
        fs = extract_fields(snap.psi, V, params, time=snap.time)
        checks = sign_checks(fs, V, E_scale=0.5)
        ok_signs &= all(c.passed for c in checks)
        frac = max(
            frac, next(c for c in checks if "ktilde" in c.name).values[0]
        )
    # evanescent closed form: psi = sqrt(kappa/2) sech(kappa x), where the
    # tail is exponential the kinetic candidates approach +/- hbar^2
    # kappa^2 / 2m
    g = make_grid(1, [1024], [60.0], [-30.0])
    x = g.axes[0]
    psi = ComplexField(g, np.sqrt(0.5) / np.cosh(x))
    fs = extract_fields(psi, FreePotential(), params)
    idx = int(np.argmin(np.abs(x - 10.0)))
    k_err = abs(fs.K.values[idx] - 0.5)
    kt_err = abs(fs.K_tilde.values[idx] + 0.5)
    record_criterion(
        "criterion-07 K >= 0 everywhere, K-tilde < 0 in the barrier "
        "(>= 1% of forbidden points), evanescent closed form to 1e-6",
        ok_signs and frac >= 0.01 and k_err < 1e-6 and kt_err < 1e-6,
        f"negative fraction {frac:.3f}, K err {k_err:.2e}, "
        f"Ktilde err {kt_err:.2e}",
    )


def test_criterion_08_free_packet_spreading(
    free_gaussian_traj, free_gaussian_fieldsets
):
    products = [
        uncertainty_products(fs)[0].values for fs in free_gaussian_fieldsets[::40]
    ]
    d_x_final = uncertainty_products(free_gaussian_fieldsets[-1])[0].values[0]
    # sigma^2 (1 + (hbar t / 2 m sigma^2)^2) at t=2 equals 2
    spread_ok = abs(d_x_final - 2.0) < 1e-3
    prods = [v[2] for v in products]
    monotone_ok = all(b >= a - 1e-9 for a, b in zip(prods, prods[1:]))
    record_criterion(
        "criterion-08 free-packet spreading law at t=2 (abs 1e-3) with "
        "non-decreasing uncertainty product",
        spread_ok and monotone_ok,
        f"D_x(2) = {d_x_final:.12f}",
    )


def test_criterion_09_pointwise_pair_identities(corpus, free_gaussian_fieldsets):
    worst = 0.0
    sets = [fs for _, _, fs, _ in corpus] + free_gaussian_fieldsets[::100]
    ok = True
    for fs in sets:
        for c in koenig_identity_checks(fs):
            ok &= bool(c.passed)
            worst = max(worst, c.values[0])
    record_criterion(
        "criterion-09 pair-momentum mean and kinetic split hold pointwise "
        "(1e-12)",
        ok,
        f"worst error {worst:.3e}",
    )


def test_criterion_10_ensemble_equivariance(free_gaussian_traj):
    traj = free_gaussian_traj.subsample(20)
    rng = np.random.default_rng(99)
    c = ensemble_equivariance(traj, 100_000, rng, bins=64, tolerance=0.05)
    seeds = [[x] for x in np.linspace(-2.0, 2.0, 17)]
    flow = integrate_flow_lines(traj, seeds)
    order_ok = ordering_preserved(flow)
    record_criterion(
        "criterion-10 advected ensemble reproduces the evolved density "
        "(TV < 0.05 at 64 bins) and 1D paths never cross",
        c.passed and order_ok,
        f"TV {c.values[0]:.4f}",
    )


def test_criterion_11_determinism(tmp_path):
    cfg = tmp_path / "scenario.cfg"
    cfg.write_text(
        (
            "[grid]\ndim = 1\npoints = 256\nextent = 40\norigin = -20\n"
            "[state]\nkind = gaussian\ncenter = 0\nmomentum = 0.5\nsigma = 1\n"
            "[potential]\nkind = free\n"
            "[evolution]\ndt = 0.005\nsteps = 200\nrecord_every = 40\n"
            "[extract]\ntimes = 0.0, 1.0\n"
            "[verify]\nsuite = born,eq9,koenig,uncertainty\n"
            "[flow]\nseeds = -1.0; 0.0; 1.0\nequivariance_seeds = 10000\n"
        )
    )
    digests = []
    manifests = []
    for run in ("a", "b"):
        out = tmp_path / run
        rc = cli.main(
            ["run", "--config", str(cfg), "--out", str(out), "--seed", "123"]
        )
        assert rc == 0
        digests.append(
            {
                name: hashlib.sha256((out / name).read_bytes()).hexdigest()
                for name in ("fields.csv", "verification.json", "flowlines.csv")
            }
        )
        m = json.loads((out / "manifest.json").read_text())
        m.pop("timestamp")
        m.pop("wall_time_s")
        manifests.append(m)
    record_criterion(
        "criterion-11 fixed-seed reruns produce byte-identical data files",
        digests[0] == digests[1] and manifests[0] == manifests[1],
        "3 data files compared by sha256",
    )
