"""Shared fixtures: grids, reference states and one reusable free-packet
evolution run that several test modules and the acceptance suite analyze."""
from __future__ import annotations

import pytest

from qfields import (
    EvolutionParams,
    FreePotential,
    Gaussian,
    PhysicalParams,
    evolve_record,
    extract_fields,
    make_grid,
    realize,
)
from support import ACCEPTANCE_RESULTS


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in ACCEPTANCE_RESULTS:
        line = f"{'PASS' if passed else 'FAIL'} {name}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def params():
    return PhysicalParams()


@pytest.fixture(scope="session")
def grid1d():
    return make_grid(1, [512], [80.0], [-40.0])


@pytest.fixture(scope="session")
def grid2d():
    return make_grid(2, [128, 128], [20.0, 20.0], [-10.0, -10.0])


@pytest.fixture(scope="session")
def free_gaussian_traj(grid1d, params):
    """Free gaussian at rest (sigma=1), run to t=2 recording every step at
    dt=5e-3 so residual-convergence studies can subsample the one run."""
    psi0 = realize(
        Gaussian(center=(0.0,), momentum=(0.0,), sigma=(1.0,), params=params),
        grid1d,
    )
    ev = EvolutionParams(dt=5e-3, steps=400, record_every=1, params=params)
    return evolve_record(psi0, FreePotential(), ev)


@pytest.fixture(scope="session")
def free_gaussian_fieldsets(free_gaussian_traj, params):
    V = free_gaussian_traj.potential
    return [
        extract_fields(s.psi, V, params, time=s.time)
        for s in free_gaussian_traj.snapshots
    ]
