"""Command-line harness: canned experiments with JSON reports.

Subcommands: constants, verify-bounds, linear-decay, lower-bounds,
simulate. Each reads a JSON config (a parameter dict, optionally with a
"sweep" list of parameter dicts and experiment-specific keys), writes its
artifacts under --out, and exits 0 iff every asserted check passed.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import bounds as bounds_mod
from . import lindecay as lin
from . import monitor as mon
from . import solver as sol
from .errors import OldroydError
from .model import ModelParams, derive_constants, validate

__all__ = ["main", "ExperimentConfig", "RunReport"]


def _fmt(x) -> str:
    return f"{float(x):.17g}"


def _jsonable(obj):
    if isinstance(obj, float):
        return float(_fmt(obj))
    if isinstance(obj, (np.floating, np.integer)):
        return _jsonable(obj.item())
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return _jsonable(dataclasses.asdict(obj))
    return obj


@dataclasses.dataclass
class ExperimentConfig:
    kind: str
    sweep: list          # list of ModelParams
    options: dict        # experiment-specific keys
    output_dir: Path
    seed: int = 0
    jobs: int = 1

    @classmethod
    def load(cls, kind: str, path: str, out: str | None,
             seed: int | None, jobs: int | None) -> "ExperimentConfig":
        with open(path) as fh:
            doc = json.load(fh)
        raw_sweep = doc.get("sweep", [doc])
        if not raw_sweep:
            raise OldroydError("config sweep is empty")
        sweep = [validate(ModelParams.from_dict(entry)) for entry in raw_sweep]
        if jobs is None:
            jobs = int(os.environ.get("TOOL_JOBS", "1"))
        out_dir = Path(out) if out else Path(doc.get("output_dir", "."))
        out_dir.mkdir(parents=True, exist_ok=True)
        return cls(kind=kind, sweep=sweep, options=doc, output_dir=out_dir,
                   seed=int(seed if seed is not None else doc.get("seed", 0)),
                   jobs=max(1, jobs))


@dataclasses.dataclass
class RunReport:
    kind: str
    config: dict
    checks: list = dataclasses.field(default_factory=list)
    exponents: list = dataclasses.field(default_factory=list)
    manifest: list = dataclasses.field(default_factory=list)
    timings: dict = dataclasses.field(default_factory=dict)

    def check(self, name: str, passed: bool, asserted: bool = True,
              **details) -> None:
        if any(c["name"] == name for c in self.checks):
            raise OldroydError(f"duplicate check name {name!r}")
        self.checks.append({"name": name, "passed": bool(passed),
                            "asserted": asserted,
                            "details": _jsonable(details)})

    @property
    def ok(self) -> bool:
        return all(c["passed"] for c in self.checks if c["asserted"])

    def write(self, out_dir: Path) -> Path:
        path = out_dir / "report.json"
        with open(path, "w") as fh:
            json.dump(_jsonable(dataclasses.asdict(self)), fh, indent=2)
            fh.write("\n")
        return path


def _map_sweep(cfg: ExperimentConfig, fn):
    if cfg.jobs > 1 and len(cfg.sweep) > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            return list(pool.map(fn, range(len(cfg.sweep)), cfg.sweep))
    return [fn(i, p) for i, p in enumerate(cfg.sweep)]


def cmd_constants(cfg: ExperimentConfig) -> RunReport:
    report = RunReport("constants", _jsonable(cfg.options))
    records = []
    for i, params in enumerate(cfg.sweep):
        consts = derive_constants(params)
        records.append({"params": params.to_dict(),
                        "constants": dataclasses.asdict(consts)})
        report.check(f"constants_finite_{i}",
                     all(math.isfinite(v) and v > 0
                         for v in dataclasses.asdict(consts).values()),
                     **dataclasses.asdict(consts))
    path = cfg.output_dir / "constants.json"
    with open(path, "w") as fh:
        json.dump(_jsonable(records), fh, indent=2)
        fh.write("\n")
    report.manifest.append(str(path))
    return report


def cmd_verify_bounds(cfg: ExperimentConfig) -> RunReport:
    report = RunReport("verify-bounds", _jsonable(cfg.options))
    grid = tuple(cfg.options.get("grid", (200, 200)))
    k_scale = float(cfg.options.get("k_scale", 1.0))
    c1_scale = float(cfg.options.get("c1_scale", 1.0))

    def one(i, params):
        t0 = time.perf_counter()
        ups = bounds_mod.verify_upper_bounds(params, grid, k_scale=k_scale)
        lows = bounds_mod.verify_lower_bounds(params, grid, c1_scale=c1_scale)
        disc = bounds_mod.verify_discriminant_window(params, grid[0])
        return ups + lows + [disc], time.perf_counter() - t0

    results = _map_sweep(cfg, one)
    records = []
    for i, (reps, wall) in enumerate(results):
        report.timings[f"entry_{i}"] = wall
        for rep in reps:
            report.check(f"{rep.bound_name}_{i}", rep.pass_,
                         worst_ratio=rep.worst_ratio,
                         worst_point=rep.worst_point)
            records.append(rep.to_dict())
    if cfg.options.get("grid_csv", False):
        for i, params in enumerate(cfg.sweep):
            path = cfg.output_dir / f"bounds_grid_{i}.csv"
            with open(path, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["bound", "r", "t", "ratio"])
                grids = bounds_mod.bound_ratio_grids(params, grid)
                for name, (rg, tg, ratios) in grids.items():
                    for a, r in enumerate(rg):
                        for c, t in enumerate(tg):
                            writer.writerow(
                                [name, _fmt(r), _fmt(t), _fmt(ratios[a, c])])
            report.manifest.append(str(path))
    path = cfg.output_dir / "bounds.json"
    with open(path, "w") as fh:
        json.dump(_jsonable(records), fh, indent=2)
        fh.write("\n")
    report.manifest.append(str(path))
    return report


def _default_times(options: dict) -> np.ndarray:
    window = options.get("window", (1e2, 1e4))
    count = int(options.get("time_count", 13))
    return np.geomspace(float(window[0]), float(window[1]), count)


def _initial_spec(options: dict) -> lin.InitialSpec:
    kwargs = {}
    for key in ("c0", "width", "tau_scale"):
        if key in options:
            kwargs[key] = float(options[key])
    if "which" in options:
        kwargs["which"] = options["which"]
    return lin.InitialSpec(**kwargs)


def cmd_linear_decay(cfg: ExperimentConfig) -> RunReport:
    report = RunReport("linear-decay", _jsonable(cfg.options))
    times = _default_times(cfg.options)
    init = _initial_spec(cfg.options)
    tol = float(cfg.options.get("fit_tolerance", 0.05))
    pair_tol = float(cfg.options.get("independence_tolerance", 0.02))

    def one(i, params):
        t0 = time.perf_counter()
        series = lin.decay_series(init, params, times)
        return series, time.perf_counter() - t0

    results = _map_sweep(cfg, one)
    slopes = {}
    for i, (series, wall) in enumerate(results):
        report.timings[f"entry_{i}"] = wall
        path = cfg.output_dir / f"decay_{i}.csv"
        lin.write_series_csv(series, path)
        report.manifest.append(str(path))
        for fieldname, orders in (("u", lin.U_ORDERS), ("tau", lin.TAU_ORDERS)):
            for k in orders:
                fit = lin.fit_exponent(series, fieldname, k,
                                       (times[0], times[-1]), tolerance=tol)
                slopes[(i, fieldname, k)] = fit.slope
                report.exponents.append({
                    "entry": i, "field": fieldname, "k": k,
                    "slope": fit.slope, "target": fit.target,
                    "stderr": fit.stderr})
                report.check(f"exponent_{fieldname}_k{k}_{i}", fit.pass_,
                             slope=fit.slope, target=fit.target)
    if cfg.options.get("independence", len(cfg.sweep) > 1):
        for fieldname, orders in (("u", lin.U_ORDERS), ("tau", lin.TAU_ORDERS)):
            for k in orders:
                vals = [slopes[(i, fieldname, k)]
                        for i in range(len(cfg.sweep))]
                spread = max(vals) - min(vals) if len(vals) > 1 else 0.0
                report.check(f"independence_{fieldname}_k{k}",
                             spread <= pair_tol, spread=spread, slopes=vals)
    return report


def cmd_lower_bounds(cfg: ExperimentConfig) -> RunReport:
    report = RunReport("lower-bounds", _jsonable(cfg.options))
    init = _initial_spec(cfg.options)
    window = cfg.options.get("window", (None, 1e4))
    count = int(cfg.options.get("time_count", 12))

    def one(i, params):
        t0 = time.perf_counter()
        t_lo = window[0]
        if t_lo is None:
            t_lo = derive_constants(params).t1_safe
        times = np.geomspace(float(t_lo), float(window[1]), count)
        res = lin.lower_rate_check(init, params, times)
        return res, time.perf_counter() - t0

    for i, (res, wall) in enumerate(_map_sweep(cfg, one)):
        report.timings[f"entry_{i}"] = wall
        for (fieldname, k), item in res.items():
            report.check(f"lower_{fieldname}_k{k}_{i}",
                         item["pass"] and item["stable"],
                         c=item["c"], stable=item["stable"])
    return report


def cmd_simulate(cfg: ExperimentConfig) -> RunReport:
    report = RunReport("simulate", _jsonable(cfg.options))
    doc = dict(cfg.options)
    doc.setdefault("seed", cfg.seed)
    run_cfg = sol.RunConfig.from_dict(doc)
    params = run_cfg.params
    grid = sol.SpectralGrid(run_cfg.n, run_cfg.box_scale)
    state0 = sol.make_initial_state(grid, params, run_cfg.delta, run_cfg.seed)
    records: list[mon.MonitorRecord] = []
    lin_dev = [0.0]
    check_linear = run_cfg.delta <= float(doc.get("linear_check_max_delta",
                                                  1e-5))

    def observer(state):
        records.append(mon.observe(state, params))
        if check_linear and state.time > 0.0:
            exact = sol.linear_flow(state0, state.time, params)
            num = math.sqrt(
                np.sum(np.abs(state.u_hat - exact.u_hat) ** 2)
                + np.sum(np.abs(state.tau_hat - exact.tau_hat) ** 2))
            den = math.sqrt(np.sum(np.abs(exact.u_hat) ** 2)
                            + np.sum(np.abs(exact.tau_hat) ** 2))
            lin_dev[0] = max(lin_dev[0], num / den)

    t0 = time.perf_counter()
    _, final = sol.run(run_cfg, observer=observer)
    report.timings["run"] = time.perf_counter() - t0

    csv_path = cfg.output_dir / "run.csv"
    with open(csv_path, "w") as fh:
        fh.write(mon.MonitorRecord.HEADER + "\n")
        for rec in records:
            fh.write(",".join(_fmt(v) for v in rec.row()) + "\n")
    state_path = cfg.output_dir / "state.bin"
    sol.dump_state(final, state_path)
    report.manifest += [str(csv_path), str(state_path)]

    h3_0 = math.sqrt(records[0].h3_total)
    sup_ratio = max(math.sqrt(r.h3_total) for r in records) / h3_0
    report.check("bounded", sup_ratio <= 1.05, sup_ratio=sup_ratio)
    e0 = records[0].energy_e
    n_steps = max(1, math.ceil(run_cfg.t_end / run_cfg.dt_max))
    dt = run_cfg.t_end / n_steps
    worst = 0.0
    for a, b in zip(records, records[1:]):
        steps = max(1, round((b.time - a.time) / dt))
        worst = max(worst, b.energy_e - a.energy_e - steps * 1e-8 * e0)
    report.check("energy_nonincreasing", worst <= 0.0, worst_excess=worst)
    min_slack = min(min(r.ineq_slack[name] for name in
                        ("transport_u", "transport_tau",
                         "rotation_stretching")) for r in records)
    report.check("inequality_slacks", min_slack >= 0.0, min_slack=min_slack)
    report.check("divergence_free", final.max_divergence() <= 1e-10,
                 max_divergence=final.max_divergence())
    if check_linear:
        report.check("linear_agreement", lin_dev[0] <= 1e-6,
                     max_rel_deviation=lin_dev[0])
    return report


_COMMANDS = {
    "constants": cmd_constants,
    "verify-bounds": cmd_verify_bounds,
    "linear-decay": cmd_linear_decay,
    "lower-bounds": cmd_lower_bounds,
    "simulate": cmd_simulate,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="oldroyd-lab",
        description="Numerical experiments for the diffusive Oldroyd-B "
                    "system")
    sub = parser.add_subparsers(dest="kind", required=True)
    for name in _COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", required=True)
        s.add_argument("--out", default=None)
        s.add_argument("--jobs", type=int, default=None)
        s.add_argument("--seed", type=int, default=None)
    args = parser.parse_args(argv)
    try:
        cfg = ExperimentConfig.load(args.kind, args.config, args.out,
                                    args.seed, args.jobs)
        report = _COMMANDS[args.kind](cfg)
    except OldroydError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    path = report.write(cfg.output_dir)
    for check in report.checks:
        tag = "PASS" if check["passed"] else (
            "FAIL" if check["asserted"] else "info")
        print(f"[{tag}] {check['name']}")
    print(f"report: {path}")
    return 0 if report.ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
