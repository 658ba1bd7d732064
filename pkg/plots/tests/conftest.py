"""Shared fixtures: three scenario output directories produced by running
the ``qfields`` CLI as a subprocess, exactly as a user of the documented
file interfaces would."""
from __future__ import annotations

import subprocess
import sys
from pathlib import Path

import pytest

from plot_support import ACCEPTANCE_RESULTS


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria (plot component)")
    for name, passed, detail in ACCEPTANCE_RESULTS:
        line = f"{'PASS' if passed else 'FAIL'} {name}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)


GAUSSIAN_CFG = """\
[grid]
dim = 1
points = 256
extent = 40
origin = -20

[state]
kind = gaussian
center = 0
momentum = 0
sigma = 1

[potential]
kind = free

[evolution]
dt = 0.005
steps = 200
record_every = 20

[extract]
times = 0.0 1.0

[verify]
suite = uncertainty

[flow]
seeds = -2; -1; 0; 1; 2

[output]
seed = 42
"""

# slow packet (mean kinetic 0.53) against a higher barrier: almost total
# reflection, so the incident side develops deep interference nodes and the
# in-barrier evanescent tail drops below the mask threshold -> masked gaps
BARRIER_CFG = """\
[grid]
dim = 1
points = 512
extent = 64
origin = -32

[state]
kind = gaussian
center = -8
momentum = 1
sigma = 2

[potential]
kind = barrier
height = 2
width = 4
center = 6

[evolution]
dt = 0.004
steps = 3000
record_every = 750

[extract]
times = 12.0
mask_epsilon = 1e-6

[verify]
suite = signs
e_scale = 0.5

[flow]
enabled = false

[output]
seed = 7
"""

VORTEX_CFG = """\
[grid]
dim = 2
points = 128 128
extent = 20 20
origin = -10 -10

[state]
kind = vortex2d
center = 0.078125 0.078125
sigma = 1.5

[potential]
kind = free

[extract]
times = 0.0

[verify]
suite = born

[output]
seed = 3
"""


def _run_scenario(tmp_root: Path, name: str, cfg: str) -> Path:
    cfg_path = tmp_root / f"{name}.cfg"
    cfg_path.write_text(cfg)
    out_dir = tmp_root / name
    proc = subprocess.run(
        [sys.executable, "-m", "qfields.cli", "run",
         "--config", str(cfg_path), "--out", str(out_dir)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, f"{name} scenario failed:\n{proc.stderr}"
    return out_dir


@pytest.fixture(scope="session")
def scenario_root(tmp_path_factory):
    return tmp_path_factory.mktemp("scenarios")


@pytest.fixture(scope="session")
def gaussian_out(scenario_root):
    """Free spreading packet: fields at t=0 and 1, uncertainty checks at
    every recorded time, five flow lines."""
    return _run_scenario(scenario_root, "gaussian", GAUSSIAN_CFG)


@pytest.fixture(scope="session")
def barrier_out(scenario_root):
    """Barrier scattering at the moment of strongest interference."""
    return _run_scenario(scenario_root, "barrier", BARRIER_CFG)


@pytest.fixture(scope="session")
def vortex_out(scenario_root):
    """Static 2D vortex: one snapshot with a masked core."""
    return _run_scenario(scenario_root, "vortex", VORTEX_CFG)
