"""Flow-line integration, ensemble transport and density sampling."""
import numpy as np
import pytest

from qfields import (
    EvolutionParams,
    FreePotential,
    Gaussian,
    HarmonicPotential,
    HOEigenstate,
    PlaneWave,
    evolve_record,
    make_grid,
    realize,
)
from qfields.trajectories import (
    FLAG_BAD_SEED,
    FLAG_OK,
    ensemble_equivariance,
    integrate_flow_lines,
    ordering_preserved,
    sample_from_density,
)
from qfields.verify import UnsupportedScenarioError


def test_plane_wave_flow_is_straight(grid1d, params):
    k0 = 2.0 * np.pi / 80.0 * 8
    psi = realize(PlaneWave((k0,), params), grid1d)
    ev = EvolutionParams(dt=0.01, steps=100, record_every=20, params=params)
    traj = evolve_record(psi, FreePotential(), ev)
    flow = integrate_flow_lines(traj, [[0.0], [1.0]])
    assert np.all(flow.flags == FLAG_OK)
    for s, x0 in enumerate((0.0, 1.0)):
        expected = x0 + k0 * flow.times
        assert np.max(np.abs(flow.paths[s, :, 0] - expected)) < 1e-10


def test_stationary_state_flow_is_static(params):
    g = make_grid(1, [256], [20.0], [-10.0])
    psi = realize(HOEigenstate((0,), 1.0, params), g)
    ev = EvolutionParams(dt=0.002, steps=250, record_every=50, params=params)
    traj = evolve_record(psi, HarmonicPotential(1.0), ev)
    flow = integrate_flow_lines(traj, [[0.5], [-1.0]])
    drift = np.max(np.abs(flow.paths - flow.paths[:, :1, :]))
    assert drift < 1e-6


def test_bad_seed_flagged(free_gaussian_traj):
    flow = integrate_flow_lines(free_gaussian_traj.subsample(100), [[0.0], [35.0]])
    assert flow.flags[0] == FLAG_OK
    assert flow.flags[1] == FLAG_BAD_SEED
    # a bad seed's path stays frozen at its starting point
    assert np.all(flow.paths[1, :, 0] == 35.0)


def test_substep_refinement_converged(free_gaussian_traj):
    traj = free_gaussian_traj.subsample(40)
    a = integrate_flow_lines(traj, [[1.0]], substeps=4)
    b = integrate_flow_lines(traj, [[1.0]], substeps=8)
    assert abs(a.paths[0, -1, 0] - b.paths[0, -1, 0]) < 1e-8


def test_osmotic_pair_flow_directions(free_gaussian_traj, params):
    """For a gaussian at rest the two momentum fields point along
    -/+ x/(2 sigma^2): seeds at +/-sigma drift outward under p2 and inward
    under p1 mirror-symmetrically."""
    traj = free_gaussian_traj.subsample(10)  # recording interval 0.05
    seeds = [[1.0], [-1.0]]
    p2 = integrate_flow_lines(traj, seeds, field_choice="p2")
    p1 = integrate_flow_lines(traj, seeds, field_choice="p1")
    dt = traj.times[1]
    # initial velocity of the p2 flow at x=+1 is +pw... p2 = p + p_w with
    # p = 0, p_w(x) = -x/2 at t=0, so expect v = -0.5 at x=1
    v_p2 = (p2.paths[0, 1, 0] - 1.0) / dt
    v_p1 = (p1.paths[0, 1, 0] - 1.0) / dt
    assert v_p2 == pytest.approx(-0.5, abs=0.02)
    assert v_p1 == pytest.approx(+0.5, abs=0.02)
    # mirror symmetry about the origin
    assert p1.paths[0, -1, 0] == pytest.approx(-p1.paths[1, -1, 0], abs=1e-9)


def test_invalid_field_choice(free_gaussian_traj):
    with pytest.raises(ValueError):
        integrate_flow_lines(free_gaussian_traj.subsample(200), [[0.0]], field_choice="x")


def test_ordering_preserved_1d(free_gaussian_traj):
    traj = free_gaussian_traj.subsample(20)
    seeds = [[x] for x in np.linspace(-2.5, 2.5, 21)]
    flow = integrate_flow_lines(traj, seeds)
    assert ordering_preserved(flow)


def test_ordering_check_rejects_2d(params):
    g = make_grid(2, [64, 64], [16.0, 16.0])
    psi = realize(Gaussian((0.0, 0.0), (0.0, 0.0), (1.0, 1.0), params), g)
    ev = EvolutionParams(dt=0.01, steps=10, record_every=5, params=params)
    traj = evolve_record(psi, FreePotential(), ev)
    flow = integrate_flow_lines(traj, [[0.0, 0.0]])
    with pytest.raises(UnsupportedScenarioError):
        ordering_preserved(flow)


def test_sample_from_density_1d(grid1d, params):
    psi = realize(Gaussian((0.0,), (0.0,), (1.0,), params), grid1d)
    w = np.abs(psi.values) ** 2
    rng = np.random.default_rng(3)
    pts = sample_from_density(grid1d, w, 50_000, rng)
    assert pts.shape == (50_000, 1)
    assert float(np.mean(pts)) == pytest.approx(0.0, abs=0.02)
    assert float(np.var(pts)) == pytest.approx(1.0, abs=0.03)


def test_sample_from_density_2d(params):
    g = make_grid(2, [64, 64], [16.0, 16.0])
    psi = realize(Gaussian((1.0, -1.0), (0.0, 0.0), (1.0, 1.0), params), g)
    w = np.abs(psi.values) ** 2
    rng = np.random.default_rng(4)
    pts = sample_from_density(g, w, 20_000, rng)
    assert pts.shape == (20_000, 2)
    assert float(np.mean(pts[:, 0])) == pytest.approx(1.0, abs=0.05)
    assert float(np.mean(pts[:, 1])) == pytest.approx(-1.0, abs=0.05)


def test_equivariance_needs_enough_seeds(free_gaussian_traj):
    rng = np.random.default_rng(0)
    with pytest.raises(UnsupportedScenarioError):
        ensemble_equivariance(free_gaussian_traj.subsample(200), 100, rng)


def test_equivariance_small_ensemble(free_gaussian_traj):
    """A modest ensemble already tracks the spreading density closely."""
    rng = np.random.default_rng(12)
    c = ensemble_equivariance(free_gaussian_traj.subsample(20), 20_000, rng)
    assert c.passed
    assert c.values[0] < 0.05
