"""Scenario-driven command line front end.

A scenario is a flat INI-style config (sections of key = value pairs, see
README for the grammar).  ``qfields run`` executes the full pipeline and
writes field CSVs, a verification JSON report, flow-line CSVs and a run
manifest with content hashes.  Exit codes: 0 success, 1 verification
failures (report still written), 2 config/validation error, 3 numerical
blow-up.
"""
from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import os
import sys
import time as _time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .evolve import (
    BarrierPotential,
    EvolutionParams,
    FreePotential,
    HarmonicPotential,
    NumericalBlowupError,
    Potential,
    Snapshot,
    Trajectory,
    evolve_record,
)
from .fields import DEFAULT_MASK_EPSILON, FieldSet, extract_fields, potential_values
from .grid import Grid, make_grid, set_fft_workers
from .params import PhysicalParams
from .states import (
    Gaussian,
    HOEigenstate,
    PlaneWave,
    StateSpec,
    Superposition,
    Vortex2D,
    realize,
)
from .trajectories import ensemble_equivariance, integrate_flow_lines
from .verify import (
    UnsupportedScenarioError,
    VerificationReport,
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

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

ALL_SUITES = (
    "born",
    "eq9",
    "koenig",
    "uncertainty",
    "continuity",
    "transport",
    "identity",
    "signs",
)


class ConfigError(ValueError):
    """Invalid or inconsistent scenario configuration."""


@dataclass
class FlowConfig:
    seeds: np.ndarray
    field_choice: str = "cm"
    substeps: int = 4
    equivariance_seeds: int = 0


@dataclass
class Scenario:
    grid: Grid
    state: StateSpec
    potential: Potential
    params: PhysicalParams
    evolution: EvolutionParams | None
    mask_epsilon: float
    field_times: list[float]
    verify_suite: list[str]
    e_scale: float | None
    flow: FlowConfig | None
    out_dir: Path
    seed: int


# ---------------------------------------------------------------------------
# config parsing


def _floats(raw: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in raw.replace(",", " ").split())


def _ints(raw: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in raw.replace(",", " ").split())


def _parse_state(sec, params: PhysicalParams) -> StateSpec:
    kind = sec.get("kind", "").strip()
    if kind == "plane_wave":
        return PlaneWave(_floats(sec["wavevector"]), params)
    if kind == "gaussian":
        return Gaussian(
            center=_floats(sec["center"]),
            momentum=_floats(sec["momentum"]),
            sigma=_floats(sec["sigma"]),
            params=params,
        )
    if kind == "ho_eigenstate":
        return HOEigenstate(
            numbers=_ints(sec["numbers"]),
            omega0=float(sec["omega0"]),
            params=params,
        )
    if kind == "vortex2d":
        return Vortex2D(
            center=_floats(sec["center"]),
            sigma=float(sec.get("sigma", "1.0")),
            params=params,
        )
    if kind == "superposition":
        terms = []
        for key in sorted(k for k in sec if k.startswith("term")):
            parts = [p.strip() for p in sec[key].split("|")]
            if len(parts) < 2:
                raise ConfigError(f"bad superposition term {sec[key]!r}")
            coeff = complex(parts[0].replace(" ", ""))
            sub_kind = parts[1]
            sub_items = {}
            for p in parts[2:]:
                k, _, v = p.partition("=")
                sub_items[k.strip()] = v.strip()
            sub_items["kind"] = sub_kind
            terms.append((coeff, _parse_state(sub_items, params)))
        return Superposition(tuple(terms))
    raise ConfigError(f"unknown state kind {kind!r}")


def _parse_potential(sec) -> Potential:
    kind = sec.get("kind", "free").strip()
    if kind == "free":
        return FreePotential()
    if kind == "harmonic":
        center = _floats(sec["center"]) if "center" in sec else None
        return HarmonicPotential(omega0=float(sec["omega0"]), center=center)
    if kind == "barrier":
        return BarrierPotential(
            height=float(sec["height"]),
            width=float(sec["width"]),
            center=float(sec["center"]),
        )
    raise ConfigError(f"unknown potential kind {kind!r}")


def parse_scenario(
    config_path: str | Path,
    out_dir: str | Path | None = None,
    seed: int | None = None,
) -> Scenario:
    path = Path(config_path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc

    try:
        g = cp["grid"]
        dim = g.getint("dim")
        grid = make_grid(
            dim,
            _ints(g["points"]),
            _floats(g["extent"]),
            _floats(g["origin"]) if "origin" in g else None,
        )

        p = cp["params"] if "params" in cp else {}
        params = PhysicalParams(
            hbar=float(p.get("hbar", 1.0)), mass=float(p.get("mass", 1.0))
        )

        state = _parse_state(cp["state"], params)
        potential = _parse_potential(cp["potential"] if "potential" in cp else {})

        evolution = None
        if "evolution" in cp:
            e = cp["evolution"]
            evolution = EvolutionParams(
                dt=e.getfloat("dt"),
                steps=e.getint("steps"),
                record_every=e.getint("record_every", 1),
                params=params,
            )

        x = cp["extract"] if "extract" in cp else {}
        mask_epsilon = float(x.get("mask_epsilon", DEFAULT_MASK_EPSILON))
        field_times = list(_floats(x.get("times", "0.0")))

        v = cp["verify"] if "verify" in cp else {}
        raw_suite = v.get("suite", "born,eq9,koenig,uncertainty")
        verify_suite = [s.strip() for s in raw_suite.split(",") if s.strip()]
        for s in verify_suite:
            if s not in ALL_SUITES:
                raise ConfigError(
                    f"unknown verify suite {s!r}; choose from {ALL_SUITES}"
                )
        e_scale = float(v["e_scale"]) if "e_scale" in v else None

        flow = None
        if "flow" in cp and cp["flow"].getboolean("enabled", True):
            f = cp["flow"]
            if "seeds" in f:
                rows = [
                    _floats(chunk)
                    for chunk in f["seeds"].split(";")
                    if chunk.strip()
                ]
                seeds = np.array(rows)
            else:
                seeds = np.empty((0, dim))
            flow = FlowConfig(
                seeds=seeds,
                field_choice=f.get("field", "cm"),
                substeps=f.getint("substeps", 4),
                equivariance_seeds=f.getint("equivariance_seeds", 0),
            )

        o = cp["output"] if "output" in cp else {}
        scenario_out = Path(out_dir) if out_dir else Path(o.get("directory", "out"))
        scenario_seed = seed if seed is not None else int(o.get("seed", 0))
    except (KeyError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid config: {exc!r}") from exc

    t_end = evolution.dt * evolution.steps if evolution else 0.0
    for t in field_times:
        if t < -1e-12 or t > t_end + 1e-12:
            raise ConfigError(
                f"requested field time {t} lies outside the evolution span "
                f"[0, {t_end}]"
            )

    return Scenario(
        grid=grid,
        state=state,
        potential=potential,
        params=params,
        evolution=evolution,
        mask_epsilon=mask_epsilon,
        field_times=field_times,
        verify_suite=verify_suite,
        e_scale=e_scale,
        flow=flow,
        out_dir=scenario_out,
        seed=scenario_seed,
    )


# ---------------------------------------------------------------------------
# output writers


def _fmt(x: float) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    return f"{x:.17g}"


def _field_csv_header(dim: int) -> str:
    ax = ["x", "y", "z"][:dim]
    cols = ["t", *ax, "w"]
    cols += [f"p{a}" for a in ax]
    cols += [f"pw{a}" for a in ax]
    cols += ["Kw", "Uw", "U", "K", "Ktilde", "E", "omega"]
    if dim == 2:
        cols += ["Mz"]
    elif dim == 3:
        cols += ["Mx", "My", "Mz"]
    cols += [f"p1{a}" for a in ax]
    cols += [f"p2{a}" for a in ax]
    cols += ["masked"]
    return ",".join(cols)


def write_fields_csv(path: Path, fieldsets: list[FieldSet]) -> None:
    grid = fieldsets[0].grid
    dim = grid.dim
    lines = [_field_csv_header(dim)]
    coords = [m.ravel() for m in grid.meshes()]
    for fs in fieldsets:
        cols: list[np.ndarray] = [np.full(grid.size, fs.time)]
        cols += coords
        cols.append(fs.w.values.ravel())
        cols += [c.ravel() for c in fs.p.components]
        cols += [c.ravel() for c in fs.p_w.components]
        for sf in (fs.K_w, fs.U_w, fs.U, fs.K, fs.K_tilde, fs.E, fs.omega):
            cols.append(sf.values.ravel())
        if dim == 2:
            cols.append(fs.M.values.ravel())
        elif dim == 3:
            cols += [c.ravel() for c in fs.M.components]
        cols += [c.ravel() for c in fs.p1.components]
        cols += [c.ravel() for c in fs.p2.components]
        cols.append((~fs.mask).ravel())
        for row in zip(*cols):
            lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def write_flow_csv(path: Path, flow) -> None:
    dim = flow.paths.shape[2]
    ax = ["x", "y", "z"][:dim]
    lines = ["time,seed_id," + ",".join(ax) + ",flag"]
    for s in range(flow.paths.shape[0]):
        for ti, t in enumerate(flow.times):
            coords = ",".join(_fmt(v) for v in flow.paths[s, ti])
            lines.append(f"{_fmt(t)},{s},{coords},{flow.flags[s]}")
    path.write_text("\n".join(lines) + "\n")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


# ---------------------------------------------------------------------------
# pipeline


def _snapshot_index(traj: Trajectory, t: float) -> int:
    times = traj.times
    idx = int(np.argmin(np.abs(times - t)))
    dt = traj.record_dt if len(times) > 1 else 1.0
    if abs(times[idx] - t) > 0.5 * dt + 1e-12:
        raise ConfigError(
            f"requested time {t} is not near any recorded snapshot "
            f"(recording interval {dt})"
        )
    return idx


def run_scenario(
    config_path: str | Path,
    out_dir: str | Path | None = None,
    seed: int | None = None,
    threads: int | None = None,
    mode: str = "run",
) -> int:
    """Execute a scenario; returns the process exit code."""
    t_start = _time.perf_counter()
    try:
        sc = parse_scenario(config_path, out_dir=out_dir, seed=seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if threads is not None:
        set_fft_workers(threads)

    rng = np.random.default_rng(sc.seed)
    sc.out_dir.mkdir(parents=True, exist_ok=True)

    try:
        psi0 = realize(sc.state, sc.grid)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if sc.evolution is not None:
            traj = evolve_record(psi0, sc.potential, sc.evolution)
        else:
            traj = Trajectory(
                (Snapshot(0.0, psi0),), sc.potential, sc.params
            )
    except NumericalBlowupError as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    need_all = bool(
        {"continuity", "transport", "uncertainty"} & set(sc.verify_suite)
    )
    fieldsets: dict[int, FieldSet] = {}

    def fs_at(idx: int) -> FieldSet:
        if idx not in fieldsets:
            snap = traj.snapshots[idx]
            fieldsets[idx] = extract_fields(
                snap.psi,
                sc.potential,
                sc.params,
                mask_epsilon=sc.mask_epsilon,
                time=snap.time,
            )
        return fieldsets[idx]

    try:
        requested = [_snapshot_index(traj, t) for t in sc.field_times]
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    written: list[Path] = []
    report = VerificationReport(
        metadata={
            "config": str(config_path),
            "grid": {
                "dim": sc.grid.dim,
                "points": list(sc.grid.points_per_axis),
                "extent": list(sc.grid.extent_per_axis),
                "origin": list(sc.grid.origin_per_axis),
            },
            "state": type(sc.state).__name__,
            "potential": type(sc.potential).__name__,
            "hbar": sc.params.hbar,
            "mass": sc.params.mass,
            "mask_epsilon": sc.mask_epsilon,
            "seed": sc.seed,
        }
    )

    try:
        if mode in ("run", "fields"):
            sets = [fs_at(i) for i in requested]
            path = sc.out_dir / "fields.csv"
            write_fields_csv(path, sets)
            written.append(path)

        if mode in ("run", "verify"):
            for suite in sc.verify_suite:
                if suite == "born":
                    for i in requested:
                        fs = fs_at(i)
                        entries = born_consistency(
                            traj.snapshots[i].psi, fs, sc.potential, sc.params
                        )
                        for c in entries:
                            c.name = f"{c.name}_t{traj.snapshots[i].time:g}"
                        report.extend(entries)
                elif suite == "eq9":
                    for i in requested:
                        c = quantum_potential_average(fs_at(i))
                        c.name = f"{c.name}_t{traj.snapshots[i].time:g}"
                        report.checks.append(c)
                elif suite == "koenig":
                    for i in requested:
                        entries = koenig_identity_checks(fs_at(i))
                        for c in entries:
                            c.name = f"{c.name}_t{traj.snapshots[i].time:g}"
                        report.extend(entries)
                elif suite == "uncertainty":
                    for i in range(len(traj.snapshots)):
                        entries = uncertainty_products(fs_at(i))
                        for c in entries:
                            c.name = f"{c.name}_t{traj.snapshots[i].time:g}"
                        report.extend(entries)
                elif suite == "continuity":
                    all_fs = [fs_at(i) for i in range(len(traj.snapshots))]
                    report.checks.append(continuity_residual(traj, all_fs))
                elif suite == "transport":
                    all_fs = [fs_at(i) for i in range(len(traj.snapshots))]
                    report.extend(
                        transport_residual(traj, all_fs, sc.potential)
                    )
                elif suite == "identity":
                    if sc.grid.dim >= 2:
                        for trial in range(5):
                            v = random_band_limited_vector(sc.grid, rng)
                            c = vector_identity_residual(v)
                            c.name = f"{c.name}_{trial}"
                            report.checks.append(c)
                elif suite == "signs":
                    if sc.e_scale is None:
                        raise ConfigError(
                            "signs suite requires e_scale in [verify]"
                        )
                    idx = requested[-1] if requested else 0
                    report.extend(
                        sign_checks(fs_at(idx), sc.potential, sc.e_scale)
                    )
            path = sc.out_dir / "verification.json"
            path.write_text(report.to_json() + "\n")
            written.append(path)

        if mode in ("run", "flow") and sc.flow is not None:
            if sc.flow.seeds.size:
                flow = integrate_flow_lines(
                    traj,
                    sc.flow.seeds,
                    field_choice=sc.flow.field_choice,
                    substeps=sc.flow.substeps,
                    mask_epsilon=sc.mask_epsilon,
                )
                path = sc.out_dir / "flowlines.csv"
                write_flow_csv(path, flow)
                written.append(path)
            if sc.flow.equivariance_seeds > 0:
                c = ensemble_equivariance(
                    traj, sc.flow.equivariance_seeds, rng,
                    substeps=sc.flow.substeps,
                )
                report.checks.append(c)
                path = sc.out_dir / "verification.json"
                path.write_text(report.to_json() + "\n")
                if path not in written:
                    written.append(path)
    except NumericalBlowupError as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, UnsupportedScenarioError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    manifest = {
        "qfields_version": __version__,
        "config_sha256": hashlib.sha256(
            Path(config_path).read_bytes()
        ).hexdigest(),
        "seed": sc.seed,
        "threads": threads,
        "masked_fractions": {
            f"{traj.snapshots[i].time:.6g}": fs.masked_fraction
            for i, fs in sorted(fieldsets.items())
        },
        "files": {p.name: _sha256(p) for p in written},
        "wall_time_s": _time.perf_counter() - t_start,
        "timestamp": _time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    (sc.out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n"
    )

    n_fail = sum(1 for c in report.checks if not c.passed)
    for c in report.checks:
        status = "PASS" if c.passed else "FAIL"
        print(f"{status} {c.name}: {c.values} (tol {c.tolerance:g})")
    if n_fail:
        print(f"{n_fail} verification check(s) failed", file=sys.stderr)
        return EXIT_CHECK_FAILED
    return EXIT_OK


# ---------------------------------------------------------------------------
# selftest


def selftest() -> int:
    """Built-in oracle suite: quick closed-form checks without a config."""
    from .states import analytic_fields

    failures = []

    def check(name, ok):
        print(("PASS " if ok else "FAIL ") + name)
        if not ok:
            failures.append(name)

    grid = make_grid(1, [256], [40.0], [-20.0])
    params = PhysicalParams()

    spec = Gaussian(center=(0.0,), momentum=(0.0,), sigma=(1.0,), params=params)
    psi = realize(spec, grid)
    fs = extract_fields(psi, FreePotential(), params)
    # relative-eps 1e-6 keeps the far tail (where 1/w amplifies round-off)
    # out of the pointwise closed-form comparison; integrals below still use
    # the full default mask
    fs_point = extract_fields(psi, FreePotential(), params, mask_epsilon=1e-6)
    ref = analytic_fields(spec, grid)
    both = fs_point.mask & ref.mask
    err = np.nanmax(
        np.abs(
            np.where(both, fs_point.p_w.components[0] - ref.p_w.components[0], 0.0)
        )
    )
    check("gaussian osmotic momentum vs closed form", err < 1e-8)
    prod = uncertainty_products(fs)[0]
    check(
        "gaussian uncertainty saturation",
        abs(prod.values[2] - 0.25) < 1e-6,
    )

    ho = HOEigenstate(numbers=(0,), omega0=1.0, params=params)
    psi = realize(ho, grid)
    fs = extract_fields(psi, HarmonicPotential(1.0), params)
    e_vals = fs.E.values[fs.mask]
    check("oscillator ground-state energy field constant",
          np.max(np.abs(e_vals - 0.5)) < 1e-6)

    pw = PlaneWave((2.0 * 2.0 * np.pi / 40.0 * 6,), params)  # on-grid k
    psi = realize(pw, grid)
    fs = extract_fields(psi, FreePotential(), params)
    k0 = pw.wavevector[0]
    check(
        "plane-wave momentum field uniform",
        np.nanmax(np.abs(fs.p.components[0] - k0)) < 1e-8,
    )

    return EXIT_CHECK_FAILED if failures else EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="qfields",
        description="Observable-field extraction and verification for wave "
        "functions on periodic grids",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, desc in [
        ("run", "full pipeline: fields, verification, flow lines"),
        ("verify", "verification checks only"),
        ("fields", "single-snapshot field extraction only"),
        ("flow", "flow-line integration only"),
    ]:
        p = sub.add_parser(name, help=desc)
        p.add_argument("--config", required=True)
        p.add_argument("--out", default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=None)
    sub.add_parser("selftest", help="built-in oracle suite")

    args = parser.parse_args(argv)
    if args.command == "selftest":
        return selftest()
    env_threads = os.environ.get("QFIELDS_THREADS")
    threads = args.threads
    if env_threads:
        threads = int(env_threads)
    return run_scenario(
        args.config,
        out_dir=args.out,
        seed=args.seed,
        threads=threads,
        mode=args.command,
    )


if __name__ == "__main__":
    sys.exit(main())
