"""Command line front end: config parsing, output formats, exit codes."""
import csv
import hashlib
import json

import numpy as np
import pytest

from qfields import cli


BASE_CONFIG = """\
[grid]
dim = 1
points = 256
extent = 40
origin = -20

[params]
hbar = 1
mass = 1

[state]
kind = gaussian
center = 0
momentum = 0
sigma = 1

[potential]
kind = free

[evolution]
dt = 0.005
steps = 100
record_every = 20

[extract]
times = 0.0, 0.5

[verify]
suite = born,eq9,koenig

[flow]
enabled = true
seeds = -1.0; 0.0; 1.0

[output]
seed = 7
"""


@pytest.fixture
def config_path(tmp_path):
    p = tmp_path / "scenario.cfg"
    p.write_text(BASE_CONFIG)
    return p


def test_run_writes_all_outputs(config_path, tmp_path):
    out = tmp_path / "out"
    rc = cli.main(["run", "--config", str(config_path), "--out", str(out)])
    assert rc == 0
    for name in ("fields.csv", "verification.json", "flowlines.csv", "manifest.json"):
        assert (out / name).is_file()


def test_fields_csv_schema(config_path, tmp_path):
    out = tmp_path / "out"
    assert cli.main(["fields", "--config", str(config_path), "--out", str(out)]) == 0
    with open(out / "fields.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == [
        "t", "x", "w", "px", "pwx", "Kw", "Uw", "U", "K", "Ktilde",
        "E", "omega", "p1x", "p2x", "masked",
    ]
    body = rows[1:]
    assert len(body) == 2 * 256  # two requested times, full grid each
    times = sorted({float(r[0]) for r in body})
    assert times == pytest.approx([0.0, 0.5])
    # masked rows carry nan for every quotient field and the flag 1
    masked_rows = [r for r in body if r[-1] == "1"]
    assert masked_rows and all(r[3] == "nan" for r in masked_rows)
    clear = next(r for r in body if r[-1] == "0")
    assert np.isfinite([float(v) for v in clear[:-1]]).all()


def test_fields_csv_full_precision(config_path, tmp_path):
    """17 significant digits: values survive a text round trip exactly."""
    out = tmp_path / "out"
    cli.main(["fields", "--config", str(config_path), "--out", str(out)])
    data = np.genfromtxt(out / "fields.csv", delimiter=",", names=True)
    sel = data["masked"] == 0
    w = data["w"][data["t"] == 0.0][: 256]
    from qfields import FreePotential, Gaussian, PhysicalParams, extract_fields, make_grid, realize

    pp = PhysicalParams()
    g = make_grid(1, [256], [40.0], [-20.0])
    fs = extract_fields(
        realize(Gaussian((0.0,), (0.0,), (1.0,), pp), g), FreePotential(), pp
    )
    assert np.array_equal(w, fs.w.values)  # bit-exact, not merely close


def test_flow_csv_schema(config_path, tmp_path):
    out = tmp_path / "out"
    assert cli.main(["flow", "--config", str(config_path), "--out", str(out)]) == 0
    lines = (out / "flowlines.csv").read_text().splitlines()
    assert lines[0] == "time,seed_id,x,flag"
    assert len(lines) == 1 + 3 * 6  # 3 seeds, 6 recorded times


def test_manifest_hashes(config_path, tmp_path):
    out = tmp_path / "out"
    cli.main(["run", "--config", str(config_path), "--out", str(out)])
    manifest = json.loads((out / "manifest.json").read_text())
    for name, digest in manifest["files"].items():
        actual = hashlib.sha256((out / name).read_bytes()).hexdigest()
        assert actual == digest
    assert manifest["seed"] == 7
    cfg_digest = hashlib.sha256(config_path.read_bytes()).hexdigest()
    assert manifest["config_sha256"] == cfg_digest


def test_missing_config_is_config_error(tmp_path):
    rc = cli.main(["run", "--config", str(tmp_path / "nope.cfg"), "--out", str(tmp_path)])
    assert rc == cli.EXIT_CONFIG


def test_time_outside_span_is_config_error(tmp_path):
    cfg = BASE_CONFIG.replace("times = 0.0, 0.5", "times = 0.0, 9.0")
    p = tmp_path / "bad.cfg"
    p.write_text(cfg)
    assert cli.main(["run", "--config", str(p), "--out", str(tmp_path / "o")]) == cli.EXIT_CONFIG


def test_unknown_state_kind_is_config_error(tmp_path):
    p = tmp_path / "bad.cfg"
    p.write_text(BASE_CONFIG.replace("kind = gaussian", "kind = wavelet"))
    assert cli.main(["run", "--config", str(p), "--out", str(tmp_path / "o")]) == cli.EXIT_CONFIG


def test_unknown_suite_is_config_error(tmp_path):
    p = tmp_path / "bad.cfg"
    p.write_text(BASE_CONFIG.replace("suite = born,eq9,koenig", "suite = born,quux"))
    assert cli.main(["run", "--config", str(p), "--out", str(tmp_path / "o")]) == cli.EXIT_CONFIG


def test_failed_check_is_exit_one(tmp_path):
    """A coarse recording interval makes the continuity residual exceed its
    tolerance; the report must still be written."""
    cfg = BASE_CONFIG.replace("record_every = 20", "record_every = 50")
    cfg = cfg.replace("suite = born,eq9,koenig", "suite = continuity")
    cfg = cfg.replace("momentum = 0", "momentum = 2")
    p = tmp_path / "coarse.cfg"
    p.write_text(cfg)
    out = tmp_path / "o"
    rc = cli.main(["verify", "--config", str(p), "--out", str(out)])
    assert rc == cli.EXIT_CHECK_FAILED
    report = json.loads((out / "verification.json").read_text())
    assert any(not c["passed"] for c in report["checks"])


def test_numeric_blowup_is_exit_three(config_path, tmp_path, monkeypatch):
    from qfields.evolve import NumericalBlowupError

    def boom(*a, **k):
        raise NumericalBlowupError("injected")

    monkeypatch.setattr(cli, "evolve_record", boom)
    rc = cli.main(["run", "--config", str(config_path), "--out", str(tmp_path / "o")])
    assert rc == cli.EXIT_NUMERIC


def test_threads_env_override(config_path, tmp_path, monkeypatch):
    from qfields import grid as grid_mod

    seen = []
    monkeypatch.setattr(cli, "set_fft_workers", seen.append)
    monkeypatch.setenv("QFIELDS_THREADS", "2")
    cli.main(["fields", "--config", str(config_path), "--out", str(tmp_path / "o")])
    assert seen == [2]


def test_selftest_passes(capsys):
    assert cli.main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out


def test_superposition_config(tmp_path):
    cfg = BASE_CONFIG.replace(
        "kind = gaussian\ncenter = 0\nmomentum = 0\nsigma = 1",
        "kind = superposition\n"
        "term1 = 1 | gaussian | center=-4 | momentum=0 | sigma=1\n"
        "term2 = 0.6+0.8j | gaussian | center=4 | momentum=0 | sigma=1",
    )
    p = tmp_path / "sup.cfg"
    p.write_text(cfg)
    out = tmp_path / "o"
    assert cli.main(["run", "--config", str(p), "--out", str(out)]) == 0


def test_harmonic_scenario_verifies(tmp_path):
    cfg = BASE_CONFIG.replace("kind = free", "kind = harmonic\nomega0 = 1")
    cfg = cfg.replace(
        "kind = gaussian\ncenter = 0\nmomentum = 0\nsigma = 1",
        "kind = ho_eigenstate\nnumbers = 1\nomega0 = 1",
    )
    cfg = cfg.replace("suite = born,eq9,koenig", "suite = born,eq9,koenig,uncertainty")
    p = tmp_path / "ho.cfg"
    p.write_text(cfg)
    assert cli.main(["run", "--config", str(p), "--out", str(tmp_path / "o")]) == 0
