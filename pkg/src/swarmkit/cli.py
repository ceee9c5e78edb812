"""Batch front-end: JSON experiment configs, artifact writing, plotting files.

An experiment config is a JSON object whose ``kind`` selects the
workflow; the remaining blocks parameterize the objective, the solver,
the stopping/success rules, ensembles, grids, and sweeps.  Unknown keys
are rejected with their full field path, defaults are filled in at parse
time, and the normalized config round-trips through
:func:`serialize_config` unchanged.  ``run_experiment`` writes all
artifacts (benchmark CSV, density snapshots, plot-ready column files)
plus a ``manifest.json`` that echoes the normalized config, the master
seed, and package versions, which is enough to reproduce every data
artifact byte for byte (wall-clock fields excluded).
"""

from __future__ import annotations

import argparse
import json
import os
import platform
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .bench import (
    BenchRow,
    StopRule,
    SuccessRule,
    run_ensemble,
    with_coupling,
    write_bench_csv,
)
from .meanfield import (
    Axis,
    DensityField,
    MeanFieldParams,
    PhaseGrid,
    gaussian_density,
    histogram_density,
    l1_distance,
    marginal,
    run_with_snapshots,
    uniform_density,
    write_density_binary,
    write_density_csv,
)
from .objectives import ObjectiveSpec, make_objective
from .swarm import Mode, SolverParams, run_snapshots

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "parse_config",
    "serialize_config",
    "run_experiment",
    "emit_plot_columns",
    "main",
]

WORKERS_ENV = "SWARMKIT_WORKERS"

KINDS = ("particle_run", "particle_sweep", "meanfield_run", "inertia_comparison", "meanfield_vs_particle")
_PDE_KINDS = ("meanfield_run", "inertia_comparison", "meanfield_vs_particle")
_DENSITY_MODES = ("cbo", "cbo_local_best")
_MEMORY_MODES = ("sdpso_memory", "cbo_local_best", "discrete_pso")


class ConfigError(ValueError):
    """Invalid experiment config; the message carries the field path."""


_BLOCK_DEFAULTS = {
    "objective": {"name": None, "dim": None, "shift": 0.0, "offset": 0.0, "box": None, "xsy_seed": None},
    "solver": {
        "mode": "sdpso_no_memory",
        "m": 0.0,
        "lambda1": 0.0,
        "lambda2": 1.0,
        "sigma1": 0.0,
        "sigma2": 1.0,
        "alpha": 5.0e4,
        "beta": 3.0e3,
        "nu": 50.0,
        "dt": 0.01,
        "noise": "gaussian",
        "boundary": "none",
        "box": None,
        "pso_constraint": False,
        "xi": None,
    },
    "stop": {"delta_stall": 1.0e-4, "n_stall": 250, "max_iter": 10_000},
    "success": {"delta_err": 0.25},
    "init": {"box": [-3.0, 3.0], "velocity": "zero"},
    "run": {"n_particles": 100, "n_runs": 100, "seed": 42, "workers": None},
    "grid": {"x": [-3.0, 3.0, 90], "v": None, "y": None, "dt": 1.0e-3, "splitting": "lie"},
    "evolve": {"t_end": 1.0, "snapshot_times": None, "initial": {"kind": "uniform"}, "formats": ["csv", "columns"]},
    "sweep": {"functions": None, "n_particles": None, "xi": None, "m": None, "sigma2": None},
    "compare": {"m_values": [0.5, 0.1, 0.01], "times": [2.0]},
}


def _fail(path: str, message: str):
    raise ConfigError(f"{path} {message}")


def _number(value, path, minimum=None, exclusive_minimum=None, maximum=None) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(path, f"must be a number, got {value!r}")
    if minimum is not None and value < minimum:
        _fail(path, f"must be at least {minimum}, got {value}")
    if exclusive_minimum is not None and value <= exclusive_minimum:
        _fail(path, f"must be greater than {exclusive_minimum}, got {value}")
    if maximum is not None and value > maximum:
        _fail(path, f"must be at most {maximum}, got {value}")
    return value


def _integer(value, path, minimum=None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(path, f"must be an integer, got {value!r}")
    if minimum is not None and value < minimum:
        _fail(path, f"must be at least {minimum}, got {value}")
    return value


def _interval(value, path) -> list:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        _fail(path, f"must be a [lower, upper] pair, got {value!r}")
    lo = _number(value[0], f"{path}[0]")
    hi = _number(value[1], f"{path}[1]")
    if not lo < hi:
        _fail(path, f"must satisfy lower < upper, got {value!r}")
    return [lo, hi]


def _axis_triplet(value, path) -> list:
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        _fail(path, f"must be a [lower, upper, cells] triplet, got {value!r}")
    lo, hi = _interval(value[:2], path)
    n = _integer(value[2], f"{path}[2]", minimum=8)
    return [lo, hi, n]


def _choice(value, path, options) -> str:
    if value not in options:
        _fail(path, f"must be one of {sorted(options)}, got {value!r}")
    return value


def _merge_block(name: str, given: dict) -> dict:
    defaults = _BLOCK_DEFAULTS[name]
    if not isinstance(given, dict):
        _fail(name, f"must be an object, got {given!r}")
    for key in given:
        if key not in defaults:
            raise ConfigError(f"unknown key {name}.{key}")
    merged = dict(defaults)
    merged.update(given)
    return merged


def _validate_objective(block: dict, kind: str) -> dict:
    if block["name"] is None:
        _fail("objective.name", "is required")
    if block["dim"] is None:
        block["dim"] = 1 if kind in _PDE_KINDS else 20
    _integer(block["dim"], "objective.dim", minimum=1)
    if kind in _PDE_KINDS and block["dim"] != 1:
        _fail("objective.dim", f"must be 1 for {kind}, got {block['dim']}")
    _number(block["shift"], "objective.shift")
    _number(block["offset"], "objective.offset")
    if block["box"] is not None:
        block["box"] = _interval(block["box"], "objective.box")
    if block["xsy_seed"] is not None:
        _integer(block["xsy_seed"], "objective.xsy_seed", minimum=0)
    return block


def _validate_solver(block: dict) -> dict:
    _choice(block["mode"], "solver.mode", tuple(m.value for m in Mode))
    _number(block["m"], "solver.m", minimum=0.0, maximum=1.0)
    for key in ("lambda1", "lambda2", "sigma1", "sigma2", "alpha"):
        _number(block[key], f"solver.{key}", minimum=0.0)
    for key in ("beta", "nu", "dt"):
        _number(block[key], f"solver.{key}", exclusive_minimum=0.0)
    _choice(block["noise"], "solver.noise", ("gaussian", "uniform"))
    _choice(block["boundary"], "solver.boundary", ("none", "clamp"))
    if block["box"] is not None:
        block["box"] = _interval(block["box"], "solver.box")
    if not isinstance(block["pso_constraint"], bool):
        _fail("solver.pso_constraint", f"must be true or false, got {block['pso_constraint']!r}")
    if block["xi"] is not None:
        _number(block["xi"], "solver.xi", minimum=0.0, maximum=1.0)
        if block["mode"] not in _MEMORY_MODES:
            _fail("solver.xi", f"requires a mode with memory, got {block['mode']!r}")
    return block


def _validate_stop(block: dict) -> dict:
    _number(block["delta_stall"], "stop.delta_stall", exclusive_minimum=0.0)
    _integer(block["n_stall"], "stop.n_stall", minimum=1)
    _integer(block["max_iter"], "stop.max_iter", minimum=0)
    return block


def _validate_init(block: dict) -> dict:
    block["box"] = _interval(block["box"], "init.box")
    if block["velocity"] != "zero":
        block["velocity"] = _interval(block["velocity"], "init.velocity")
    return block


def _validate_run(block: dict) -> dict:
    _integer(block["n_particles"], "run.n_particles", minimum=1)
    _integer(block["n_runs"], "run.n_runs", minimum=1)
    _integer(block["seed"], "run.seed", minimum=0)
    if block["workers"] is not None:
        _integer(block["workers"], "run.workers", minimum=1)
    return block


def _validate_grid(block: dict, solver: dict) -> dict:
    block["x"] = _axis_triplet(block["x"], "grid.x")
    density = solver["mode"] in _DENSITY_MODES
    if block["v"] is None and not density:
        block["v"] = [-4.0, 4.0, 120]
    if block["v"] is not None:
        block["v"] = _axis_triplet(block["v"], "grid.v")
        if density:
            _fail("grid.v", f"must be omitted for density mode {solver['mode']!r}")
    memory = solver["mode"] in _MEMORY_MODES
    if block["y"] is None and memory:
        block["y"] = list(block["x"])
    if block["y"] is not None:
        block["y"] = _axis_triplet(block["y"], "grid.y")
        if not memory:
            _fail("grid.y", f"must be omitted for mode {solver['mode']!r} (no memory)")
    _number(block["dt"], "grid.dt", exclusive_minimum=0.0)
    _choice(block["splitting"], "grid.splitting", ("lie", "strang"))
    return block


def _validate_evolve(block: dict) -> dict:
    _number(block["t_end"], "evolve.t_end", minimum=0.0)
    if block["snapshot_times"] is None:
        block["snapshot_times"] = [block["t_end"]]
    if not isinstance(block["snapshot_times"], list) or not block["snapshot_times"]:
        _fail("evolve.snapshot_times", f"must be a nonempty list of times, got {block['snapshot_times']!r}")
    block["snapshot_times"] = sorted(
        _number(t, f"evolve.snapshot_times[{i}]", minimum=0.0) for i, t in enumerate(block["snapshot_times"])
    )
    if block["snapshot_times"][-1] > block["t_end"]:
        _fail("evolve.snapshot_times", "must not exceed evolve.t_end")
    initial = block["initial"]
    if initial == "uniform":
        initial = {"kind": "uniform"}
    if not isinstance(initial, dict) or "kind" not in initial:
        _fail("evolve.initial", f'must be "uniform" or an object with a "kind", got {initial!r}')
    _choice(initial["kind"], "evolve.initial.kind", ("uniform", "gaussian"))
    if initial["kind"] == "gaussian":
        for field in ("means", "widths"):
            if field not in initial or not isinstance(initial[field], dict):
                _fail(f"evolve.initial.{field}", "must map axis names to numbers")
            for axis, val in initial[field].items():
                _number(val, f"evolve.initial.{field}.{axis}")
        extra = set(initial) - {"kind", "means", "widths"}
    else:
        extra = set(initial) - {"kind"}
    if extra:
        raise ConfigError(f"unknown key evolve.initial.{sorted(extra)[0]}")
    block["initial"] = initial
    if not isinstance(block["formats"], list) or not block["formats"]:
        _fail("evolve.formats", f"must be a nonempty list, got {block['formats']!r}")
    for i, fmt in enumerate(block["formats"]):
        _choice(fmt, f"evolve.formats[{i}]", ("csv", "binary", "columns"))
    return block


def _validate_sweep(block: dict, objective: dict) -> dict:
    lists = {
        "functions": lambda v, p: _choice(v, p, ("Ackley", "Griewank", "Griewalk", "Rastrigin", "Salomon", "Schwefel", "XSYRandom")),
        "n_particles": lambda v, p: _integer(v, p, minimum=1),
        "xi": lambda v, p: _number(v, p, minimum=0.0, maximum=1.0),
        "m": lambda v, p: _number(v, p, minimum=0.0, maximum=1.0),
        "sigma2": lambda v, p: _number(v, p, minimum=0.0),
    }
    for key, check in lists.items():
        if block[key] is None:
            continue
        if not isinstance(block[key], list) or not block[key]:
            _fail(f"sweep.{key}", f"must be a nonempty list, got {block[key]!r}")
        for i, v in enumerate(block[key]):
            check(v, f"sweep.{key}[{i}]")
    if block["functions"] is None:
        block["functions"] = [objective["name"]]
    return block


def _validate_compare(block: dict) -> dict:
    for key in ("m_values", "times"):
        if not isinstance(block[key], list) or not block[key]:
            _fail(f"compare.{key}", f"must be a nonempty list, got {block[key]!r}")
    block["m_values"] = [_number(v, f"compare.m_values[{i}]", exclusive_minimum=0.0, maximum=1.0) for i, v in enumerate(block["m_values"])]
    block["times"] = [_number(v, f"compare.times[{i}]", exclusive_minimum=0.0) for i, v in enumerate(block["times"])]
    return block


@dataclass
class ExperimentConfig:
    """A validated experiment: the kind plus the normalized block dict."""

    kind: str
    data: dict

    def objective(self) -> ObjectiveSpec:
        blk = self.data["objective"]
        box = tuple(blk["box"]) if blk["box"] is not None else None
        return make_objective(blk["name"], blk["dim"], blk["shift"], blk["offset"], box, blk["xsy_seed"])

    def solver_params(self, **overrides) -> SolverParams:
        blk = dict(self.data["solver"])
        xi = blk.pop("xi")
        blk.update(overrides)
        if blk["box"] is not None:
            blk["box"] = tuple(blk["box"])
        params = SolverParams(**blk)
        if xi is not None:
            params = with_coupling(params, xi)
        return params

    def stop_rule(self) -> StopRule:
        return StopRule(**self.data["stop"])

    def success_rule(self, objective: ObjectiveSpec) -> SuccessRule:
        return SuccessRule(x_min=objective.minimizer, delta_err=self.data["success"]["delta_err"])

    def init_box(self) -> tuple:
        return tuple(self.data["init"]["box"])

    def init_velocity(self):
        vel = self.data["init"]["velocity"]
        return vel if vel == "zero" else tuple(vel)

    def phase_grid(self, x_only: bool = False, dt: Optional[float] = None) -> PhaseGrid:
        blk = self.data["grid"]

        def axis(trip):
            return Axis(trip[0], trip[1], trip[2]) if trip is not None else None

        if x_only:
            return PhaseGrid(x=axis(blk["x"]), dt=dt or blk["dt"], splitting=blk["splitting"])
        return PhaseGrid(x=axis(blk["x"]), v=axis(blk["v"]), y=axis(blk["y"]), dt=dt or blk["dt"], splitting=blk["splitting"])

    def mean_field_params(self, **solver_overrides) -> MeanFieldParams:
        return MeanFieldParams(self.solver_params(**solver_overrides), self.objective(), self.phase_grid())

    def initial_density(self, grid: PhaseGrid) -> DensityField:
        initial = self.data["evolve"]["initial"]
        if initial["kind"] == "uniform":
            return uniform_density(grid)
        return gaussian_density(grid, initial["means"], initial["widths"])


def parse_config(text: str) -> ExperimentConfig:
    """Validate a JSON experiment description and fill in the defaults."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    for key in raw:
        if key != "kind" and key not in _BLOCK_DEFAULTS:
            raise ConfigError(f"unknown key {key}")
    kind = raw.get("kind")
    if kind is None:
        raise ConfigError("kind is required")
    _choice(kind, "kind", KINDS)

    data = {name: _merge_block(name, raw.get(name, {})) for name in _BLOCK_DEFAULTS}
    data["objective"] = _validate_objective(data["objective"], kind)
    data["solver"] = _validate_solver(data["solver"])
    data["stop"] = _validate_stop(data["stop"])
    _number(data["success"]["delta_err"], "success.delta_err", exclusive_minimum=0.0)
    data["init"] = _validate_init(data["init"])
    data["run"] = _validate_run(data["run"])
    data["grid"] = _validate_grid(data["grid"], data["solver"])
    data["evolve"] = _validate_evolve(data["evolve"])
    data["sweep"] = _validate_sweep(data["sweep"], data["objective"])
    data["compare"] = _validate_compare(data["compare"])

    config = ExperimentConfig(kind, data)
    _check_buildable(config)
    return config


def _check_buildable(config: ExperimentConfig) -> None:
    """Construct the domain objects once so coupled-range violations
    surface at parse time with a block-level path."""
    try:
        objective = config.objective()
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"objective: {exc}") from exc
    try:
        config.solver_params()
    except ValueError as exc:
        raise ConfigError(f"solver: {exc}") from exc
    if config.kind == "inertia_comparison":
        if config.data["solver"]["mode"] != "sdpso_no_memory":
            raise ConfigError("solver.mode must be sdpso_no_memory for inertia_comparison")
        try:
            MeanFieldParams(config.solver_params(mode="cbo", m=0.0), objective, config.phase_grid(x_only=True))
        except ValueError as exc:
            raise ConfigError(f"grid: {exc}") from exc
    elif config.kind in _PDE_KINDS:
        try:
            params = config.mean_field_params()
        except ValueError as exc:
            raise ConfigError(f"grid: {exc}") from exc
        if config.kind == "meanfield_vs_particle" and params.grid.v is None:
            raise ConfigError("solver.mode must be a kinetic mode for meanfield_vs_particle")


def serialize_config(config: ExperimentConfig) -> str:
    """Canonical JSON for a parsed config; parses back to an equal config."""
    doc = {"kind": config.kind}
    doc.update(config.data)
    return json.dumps(doc, indent=2, sort_keys=True)


def _format_value(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(v)
    return format(float(v), ".17g")


def emit_plot_columns(obj, path, columns: Optional[Sequence[str]] = None) -> Path:
    """Write plot-ready whitespace-separated columns with comment headers.

    A 1D density becomes (coordinate, value) pairs, a 2D density
    (coordinate, coordinate, value) triplets in row-major order; fields
    with more axes must be marginalized first.  A sequence of benchmark
    rows becomes one line per row using the requested column names.
    Floats are written with 17 significant digits so re-ingesting the
    file reproduces the data exactly.
    """
    path = Path(path)
    lines = []
    if isinstance(obj, DensityField):
        names = obj.grid.axis_names
        if len(names) == 1:
            ax = obj.grid.axes[0]
            lines.append(f"# columns: {names[0]} f")
            lines.append(f"# time: {obj.time!r}")
            for c, v in zip(ax.centers, obj.values):
                lines.append(f"{_format_value(c)} {_format_value(v)}")
        elif len(names) == 2:
            a0, a1 = obj.grid.axes
            lines.append(f"# columns: {names[0]} {names[1]} f")
            lines.append(f"# time: {obj.time!r}")
            for i, c0 in enumerate(a0.centers):
                for j, c1 in enumerate(a1.centers):
                    lines.append(f"{_format_value(c0)} {_format_value(c1)} {_format_value(obj.values[i, j])}")
        else:
            raise ValueError("plot columns support one or two axes; marginalize the field first")
    else:
        rows = list(obj)
        if columns is None:
            raise ValueError("column names are required for table output")
        lines.append("# columns: " + " ".join(columns))
        for row in rows:
            lines.append(" ".join(_format_value(getattr(row, c)) for c in columns))
    path.write_text("\n".join(lines) + "\n")
    return path


def _resolve_workers(cli_value: Optional[int], config: ExperimentConfig) -> int:
    if cli_value is not None:
        return cli_value
    cfg = config.data["run"]["workers"]
    if cfg is not None:
        return cfg
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            value = int(env)
        except ValueError as exc:
            raise ConfigError(f"{WORKERS_ENV} must be an integer, got {env!r}") from exc
        if value < 1:
            raise ConfigError(f"{WORKERS_ENV} must be positive, got {value}")
        return value
    return 1


def _fname_time(t: float) -> str:
    return f"{t:g}".replace("-", "m")


def run_experiment(
    config: ExperimentConfig,
    out_dir,
    seed: Optional[int] = None,
    workers: Optional[int] = None,
) -> int:
    """Execute the config and write its artifacts under ``out_dir``."""
    t0 = time.perf_counter()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    master_seed = seed if seed is not None else config.data["run"]["seed"]
    n_workers = _resolve_workers(workers, config)
    handler = _KIND_HANDLERS[config.kind]
    artifacts, results = handler(config, out, master_seed, n_workers)
    manifest = {
        "kind": config.kind,
        "config": json.loads(serialize_config(config)),
        "master_seed": master_seed,
        "workers": n_workers,
        "artifacts": sorted(artifacts),
        "results": results,
        "versions": {
            "swarmkit": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
        "wall_seconds": time.perf_counter() - t0,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return 0


def _row_dict(row: BenchRow) -> dict:
    return {
        "function": row.function,
        "N": row.N,
        "xi": row.xi,
        "rate": row.rate,
        "error": None if np.isnan(row.error) else row.error,
        "n_iter": row.n_iter,
    }


def _handle_particle_run(config: ExperimentConfig, out: Path, master_seed: int, workers: int):
    stop = config.stop_rule()
    if stop.max_iter == 0:
        return [], {"note": "max_iter is 0; no runs executed"}
    objective = config.objective()
    params = config.solver_params()
    summary = run_ensemble(
        params,
        objective,
        config.data["run"]["n_runs"],
        master_seed,
        stop=stop,
        rule=config.success_rule(objective),
        n_particles=config.data["run"]["n_particles"],
        init_box=config.init_box(),
        init_velocity=config.init_velocity(),
        workers=workers,
    )
    row = BenchRow.from_summary(
        objective.name, params, config.data["run"]["n_particles"], summary, xi=config.data["solver"]["xi"]
    )
    write_bench_csv(out / "bench.csv", [row])
    return ["bench.csv"], {"rows": [_row_dict(row)]}


def _handle_particle_sweep(config: ExperimentConfig, out: Path, master_seed: int, workers: int):
    sweep = config.data["sweep"]
    base_obj = config.data["objective"]
    functions = sweep["functions"]
    n_particles_list = sweep["n_particles"] or [config.data["run"]["n_particles"]]
    xi_list = sweep["xi"] if sweep["xi"] is not None else [config.data["solver"]["xi"]]
    m_list = sweep["m"] or [config.data["solver"]["m"]]
    sigma2_list = sweep["sigma2"] or [config.data["solver"]["sigma2"]]

    cells = [
        (fn, n, xi, m, s2)
        for fn in functions
        for n in n_particles_list
        for xi in xi_list
        for m in m_list
        for s2 in sigma2_list
    ]
    seeds = np.random.SeedSequence(master_seed).spawn(len(cells))
    rows = []
    for (fn, n, xi, m, s2), cell_seed in zip(cells, seeds):
        objective = make_objective(
            fn, base_obj["dim"], base_obj["shift"], base_obj["offset"],
            tuple(base_obj["box"]) if base_obj["box"] else None, base_obj["xsy_seed"],
        )
        params = config.solver_params(m=m, sigma2=s2)
        if xi is not None:
            params = with_coupling(params, xi)
        summary = run_ensemble(
            params,
            objective,
            config.data["run"]["n_runs"],
            cell_seed,
            stop=config.stop_rule(),
            rule=config.success_rule(objective),
            n_particles=n,
            init_box=config.init_box(),
            init_velocity=config.init_velocity(),
            workers=workers,
        )
        rows.append(BenchRow.from_summary(objective.name, params, n, summary, xi=xi))
    write_bench_csv(out / "bench.csv", rows)
    return ["bench.csv"], {"rows": [_row_dict(r) for r in rows]}


def _write_snapshots(config: ExperimentConfig, out: Path, fields, prefix: str):
    formats = config.data["evolve"]["formats"]
    artifacts = []
    for field in fields:
        tag = _fname_time(field.time)
        if "csv" in formats:
            name = f"{prefix}_t{tag}.csv"
            write_density_csv(out / name, field)
            artifacts.append(name)
        if "binary" in formats:
            name = f"{prefix}_t{tag}.bin"
            write_density_binary(out / name, field)
            artifacts.append(name)
        if "columns" in formats:
            name = f"{prefix}_x_t{tag}.txt"
            emit_plot_columns(marginal(field, ("x",)), out / name)
            artifacts.append(name)
    return artifacts


def _handle_meanfield_run(config: ExperimentConfig, out: Path, master_seed: int, workers: int):
    params = config.mean_field_params()
    field = config.initial_density(params.grid)
    fields = run_with_snapshots(field, params, config.data["evolve"]["snapshot_times"])
    artifacts = _write_snapshots(config, out, fields, "density")
    results = {
        "times": [f.time for f in fields],
        "masses": [f.mass() for f in fields],
        "consensus": [params.consensus(f) for f in fields],
    }
    return artifacts, results


def _handle_inertia_comparison(config: ExperimentConfig, out: Path, master_seed: int, workers: int):
    compare = config.data["compare"]
    times = compare["times"]
    objective = config.objective()
    x_grid = config.phase_grid(x_only=True)

    cbo_params = MeanFieldParams(config.solver_params(mode="cbo", m=0.0), objective, x_grid)
    cbo_fields = run_with_snapshots(uniform_density(x_grid), cbo_params, times)
    artifacts = []
    for field in cbo_fields:
        name = f"cbo_t{_fname_time(field.time)}.txt"
        emit_plot_columns(field, out / name)
        artifacts.append(name)

    distances = {}
    seeds = np.random.SeedSequence(master_seed).spawn(len(compare["m_values"]))
    for m, m_seed in zip(compare["m_values"], seeds):
        params = config.solver_params(m=m)
        snaps = run_snapshots(
            params,
            objective,
            times,
            m_seed,
            config.data["run"]["n_particles"],
            init_box=config.init_box(),
            init_velocity=config.init_velocity(),
        )
        distances[str(m)] = {}
        for field in cbo_fields:
            hist = histogram_density(snaps[field.time], x_grid)
            name = f"particle_m{m:g}_t{_fname_time(field.time)}.txt"
            emit_plot_columns(hist, out / name)
            artifacts.append(name)
            distances[str(m)][str(field.time)] = l1_distance(hist, field)
    return artifacts, {"l1_distance": distances, "times": times}


def _handle_meanfield_vs_particle(config: ExperimentConfig, out: Path, master_seed: int, workers: int):
    params = config.mean_field_params()
    times = config.data["evolve"]["snapshot_times"]
    fields = run_with_snapshots(config.initial_density(params.grid), params, times)
    artifacts = _write_snapshots(config, out, fields, "pde")

    x_grid = config.phase_grid(x_only=True)
    snaps = run_snapshots(
        params.solver,
        params.objective,
        times,
        master_seed,
        config.data["run"]["n_particles"],
        init_box=config.init_box(),
        init_velocity=config.init_velocity(),
    )
    distances = {}
    for field in fields:
        hist = histogram_density(snaps[field.time], x_grid)
        name = f"particle_t{_fname_time(field.time)}.txt"
        emit_plot_columns(hist, out / name)
        artifacts.append(name)
        distances[str(field.time)] = l1_distance(hist, marginal(field, ("x",)))
    return artifacts, {"l1_distance": distances, "masses": [f.mass() for f in fields]}


_KIND_HANDLERS = {
    "particle_run": _handle_particle_run,
    "particle_sweep": _handle_particle_sweep,
    "meanfield_run": _handle_meanfield_run,
    "inertia_comparison": _handle_inertia_comparison,
    "meanfield_vs_particle": _handle_meanfield_vs_particle,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="swarmkit",
        description="Stochastic swarm and consensus optimization experiments from JSON configs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, blurb in (("run", "execute one experiment config"), ("sweep", "execute a parameter sweep config")):
        sp = sub.add_parser(name, help=blurb)
        sp.add_argument("config", type=Path, help="path to the JSON experiment config")
        sp.add_argument("--out", type=Path, default=None, help="artifact directory (default: <config stem>_out)")
        sp.add_argument("--seed", type=int, default=None, help="override the master seed")
        sp.add_argument("--workers", type=int, default=None, help=f"worker processes (default: config, then ${WORKERS_ENV})")
    args = parser.parse_args(argv)
    try:
        config = parse_config(Path(args.config).read_text())
        if args.command == "sweep" and config.kind != "particle_sweep":
            raise ConfigError(f"the sweep subcommand needs kind particle_sweep, got {config.kind!r}")
        if args.command == "run" and config.kind == "particle_sweep":
            raise ConfigError("kind particle_sweep is executed by the sweep subcommand")
        out_dir = args.out if args.out is not None else Path(f"{args.config.stem}_out")
        return run_experiment(config, out_dir, seed=args.seed, workers=args.workers)
    except Exception as exc:  # surface every module error as a diagnostic, not a traceback
        print(f"swarmkit: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
