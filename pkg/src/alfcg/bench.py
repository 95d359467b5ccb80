"""Experiment harness: JSON config in, CSV traces, SVG plots and a summary out.

Usage::

    bench run configs/sample.json [--jobs N] [--seed-override S] [--quiet]
    bench validate configs/sample.json
    bench plot out/*.csv --out curves.svg

Exit codes: 0 success, 1 a run failed (other runs are still written),
2 invalid configuration.
"""
from __future__ import annotations

import argparse
import csv
import functools
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import fields
from pathlib import Path

import numpy as np

from .baselines import METHODS as BASELINE_METHODS, BaselineConfig, run_baseline
from .data_io import NORMALIZATIONS, generate_synthetic, load_mnist_idx, normalize
from .exceptions import AlfcgError, ConfigError
from .feasible_sets import make_feasible_set
from .objectives import OBJECTIVES, Dataset, make_objective
from .solver import SolverConfig, TraceRecord, run

CSV_COLUMNS = ("t", "grad_oracles", "lmo_calls", "F", "gap", "L_t", "alpha_t", "eta_t", "s_sq", "wall_ns")
ALFCG_METHODS = {"ALFCG-D": "D", "ALFCG-FS": "FS", "ALFCG-MVR1": "MVR1", "ALFCG-MVR2": "MVR2"}
ALL_METHODS = tuple(ALFCG_METHODS) + BASELINE_METHODS
CONSTRAINT_KINDS = ("nuclear", "lp", "l1")
_RUN_KEYS = {"T", "eval_every", "seed", "method", "variant"}


# -- config ---------------------------------------------------------------

def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def _is_num(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _method_entry(item):
    if isinstance(item, str):
        return item, {}
    if isinstance(item, dict):
        return item.get("id"), item.get("overrides", {})
    return None, None


def _check_data(data, diags):
    if not isinstance(data, dict):
        diags.append("data: must be an object")
        return
    source = data.get("source")
    if source == "synthetic":
        for key in ("N", "d", "c"):
            val = data.get(key)
            if val is None:
                diags.append(f"data.{key}: missing required field")
            elif not _is_int(val) or val < 1:
                diags.append(f"data.{key}: must be an integer >= 1")
        if not _is_int(data.get("seed", 0)):
            diags.append("data.seed: must be an integer")
    elif source == "mnist":
        for key in ("images_path", "labels_path"):
            if not isinstance(data.get(key), str):
                diags.append(f"data.{key}: missing required path")
        for key in ("take_N", "take_d"):
            val = data.get(key)
            if val is not None and (not _is_int(val) or val < 1):
                diags.append(f"data.{key}: must be an integer >= 1")
        if _is_int(data.get("take_d")) and data["take_d"] > 784:
            diags.append("data.take_d: must be <= 784 for MNIST")
    else:
        diags.append(f"data.source: must be 'synthetic' or 'mnist', got {source!r}")
    if data.get("normalize", "none") not in NORMALIZATIONS:
        diags.append(f"data.normalize: must be one of {NORMALIZATIONS}")


def _check_constraint(con, task, diags):
    if not isinstance(con, dict):
        diags.append("constraint: must be an object")
        return
    kind = con.get("kind")
    if kind not in CONSTRAINT_KINDS:
        diags.append(f"constraint.kind: must be one of {CONSTRAINT_KINDS}, got {kind!r}")
    if "radius" not in con:
        diags.append("constraint.radius: missing required field")
    elif not _is_num(con["radius"]) or con["radius"] <= 0:
        diags.append("constraint.radius: radius must be > 0")
    if kind == "lp":
        p = con.get("p")
        if p is None:
            diags.append("constraint.p: missing required field for an lp ball")
        elif not _is_num(p) or p <= 1:
            diags.append("constraint.p: p must be > 1")
    if kind == "nuclear" and task not in (None, "multinomial_logistic"):
        diags.append("constraint.kind: nuclear ball needs task 'multinomial_logistic'")


def _check_overrides(mid, overrides, idx, diags):
    if not isinstance(overrides, dict):
        diags.append(f"methods[{idx}].overrides: must be an object")
        return
    cls = SolverConfig if mid in ALFCG_METHODS else BaselineConfig
    allowed = {f.name for f in fields(cls)} - _RUN_KEYS | {"noise_sigma"}
    unknown = [key for key in overrides if key not in allowed]
    for key in unknown:
        diags.append(f"methods[{idx}].overrides.{key}: unknown parameter for {mid}")
    if unknown:
        return
    params = {k: v for k, v in overrides.items() if k != "noise_sigma"}
    try:
        if mid in ALFCG_METHODS:
            SolverConfig(variant=ALFCG_METHODS[mid], **params)
        else:
            BaselineConfig(method=mid, **params)
    except (ConfigError, TypeError) as exc:
        diags.append(f"methods[{idx}].overrides: {exc}")
    sigma = overrides.get("noise_sigma", 0.0)
    if not _is_num(sigma) or sigma < 0:
        diags.append(f"methods[{idx}].overrides.noise_sigma: must be >= 0")


def check_config(cfg) -> list[str]:
    """Diagnostics for an already-parsed config object (empty means runnable)."""
    diags: list[str] = []
    if not isinstance(cfg, dict):
        return ["<root>: config must be a JSON object"]
    if not isinstance(cfg.get("name"), str) or not cfg.get("name"):
        diags.append("name: missing or empty")
    task = cfg.get("task")
    if task not in OBJECTIVES:
        diags.append(f"task: must be one of {tuple(OBJECTIVES)}, got {task!r}")
        task = None
    _check_data(cfg.get("data"), diags)
    _check_constraint(cfg.get("constraint"), task, diags)
    noise = cfg.get("noise_sigma", 0.0)
    if not _is_num(noise) or noise < 0:
        diags.append("noise_sigma: must be >= 0")
    methods = cfg.get("methods")
    if not isinstance(methods, list) or not methods:
        diags.append("methods: need at least one method")
    else:
        for i, item in enumerate(methods):
            mid, overrides = _method_entry(item)
            if mid not in ALL_METHODS:
                diags.append(f"methods[{i}].id: unknown method {mid!r}")
                continue
            _check_overrides(mid, overrides, i, diags)
    if not _is_int(cfg.get("T")) or cfg["T"] < 0:
        diags.append("T: must be an integer >= 0")
    if not _is_int(cfg.get("eval_every", 10)) or cfg.get("eval_every", 10) < 1:
        diags.append("eval_every: must be an integer >= 1")
    seeds = cfg.get("seeds")
    if not isinstance(seeds, list) or not seeds or not all(_is_int(s) for s in seeds):
        diags.append("seeds: need a non-empty list of integers")
    elif len(set(seeds)) != len(seeds):
        diags.append("seeds: all seeds must be distinct")
    if "output_dir" in cfg and not isinstance(cfg["output_dir"], str):
        diags.append("output_dir: must be a string path")
    if not isinstance(cfg.get("record_wall_time", False), bool):
        diags.append("record_wall_time: must be true or false")
    return diags


def load_config(path) -> tuple[dict | None, list[str]]:
    text = Path(path).read_text()
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        return None, [f"line {exc.lineno}, column {exc.colno}: {exc.msg}"]
    return cfg, check_config(cfg)


def validate_config(path) -> list[str]:
    """Diagnostics for the config file at ``path``; raises OSError if unreadable."""
    return load_config(path)[1]


# -- running --------------------------------------------------------------

@functools.lru_cache(maxsize=4)
def _dataset(data_json: str) -> Dataset:
    data = json.loads(data_json)
    mode = data.get("normalize", "none")
    if data["source"] == "synthetic":
        ds = generate_synthetic(data["N"], data["d"], data["c"], data.get("seed", 0))
        if mode != "none":
            ds = Dataset(normalize(ds.features, mode), ds.labels, ds.classes, ds.name)
        return ds
    return load_mnist_idx(data["images_path"], data["labels_path"], data.get("take_N"),
                          data.get("take_d"), data.get("normalize", "scale_255"))


def build_problem(cfg: dict, noise_sigma: float | None = None):
    ds = _dataset(json.dumps(cfg["data"], sort_keys=True))
    sigma = cfg.get("noise_sigma", 0.0) if noise_sigma is None else noise_sigma
    obj = make_objective(cfg["task"], ds, sigma)
    con = cfg["constraint"]
    shape = obj.shape if hasattr(obj, "shape") else None
    fset = make_feasible_set(con["kind"], con["radius"], p=con.get("p"), shape=shape, dim=obj.dim)
    return obj, fset


def run_method(cfg: dict, method: str, overrides: dict, seed: int) -> list[TraceRecord]:
    overrides = dict(overrides)
    obj, fset = build_problem(cfg, overrides.pop("noise_sigma", None))
    common = dict(T=cfg["T"], eval_every=cfg.get("eval_every", 10), seed=seed)
    x0 = np.zeros(obj.dim)
    if method in ALFCG_METHODS:
        _, trace = run(SolverConfig(variant=ALFCG_METHODS[method], **common, **overrides), obj, fset, x0)
    else:
        _, trace = run_baseline(BaselineConfig(method=method, **common, **overrides), obj, fset, x0)
    return trace


def run_file_name(method: str, seed: int) -> str:
    return f"{method}__seed{seed}.csv"


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def trace_to_csv(trace, record_wall_time: bool = False) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in trace:
        row = [getattr(r, c) for c in CSV_COLUMNS]
        if not record_wall_time:
            row[-1] = None
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def read_trace_csv(path) -> list[dict]:
    """Rows of a trace CSV as dicts of floats (``None`` for empty fields)."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise AlfcgError(f"{path}: header does not match {','.join(CSV_COLUMNS)}")
        return [{k: (float(v) if v != "" else None) for k, v in row.items()} for row in reader]


def _worker(cfg, method, overrides, seed, out_dir):
    start = time.perf_counter()
    try:
        trace = run_method(cfg, method, overrides, seed)
    except (AlfcgError, ValueError, FloatingPointError) as exc:
        partial = getattr(exc, "trace", None) or []
        if partial:
            (out_dir / run_file_name(method, seed)).write_text(
                trace_to_csv(partial, cfg.get("record_wall_time", False)))
        return method, seed, None, f"{type(exc).__name__}: {exc}", time.perf_counter() - start
    (out_dir / run_file_name(method, seed)).write_text(
        trace_to_csv(trace, cfg.get("record_wall_time", False)))
    return method, seed, trace, None, time.perf_counter() - start


def merged_csv(traces_by_seed: dict[int, list[TraceRecord]]) -> str:
    seeds = sorted(traces_by_seed)
    rows: dict[int, dict] = {}
    for s in seeds:
        for r in traces_by_seed[s]:
            rows.setdefault(r.t, {})[s] = r
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["t"]
    for s in seeds:
        header += [f"grad_oracles_seed{s}", f"F_seed{s}", f"gap_seed{s}"]
    w.writerow(header + ["grad_oracles_mean", "F_mean", "gap_mean"])
    for t in sorted(rows):
        line = [str(t)]
        present = [rows[t][s] for s in seeds if s in rows[t]]
        for s in seeds:
            r = rows[t].get(s)
            line += [_fmt(r.grad_oracles), _fmt(r.F), _fmt(r.gap)] if r else ["", "", ""]
        line += [_fmt(np.mean([r.grad_oracles for r in present])),
                 _fmt(np.mean([r.F for r in present])),
                 _fmt(np.mean([r.gap for r in present]))]
        w.writerow(line)
    return buf.getvalue()


def _mean_curves(traces_by_seed):
    """Across-seed mean curves on the t values every seed recorded."""
    common = None
    for trace in traces_by_seed.values():
        ts = {r.t for r in trace}
        common = ts if common is None else common & ts
    ts = sorted(common or ())
    by_t = {s: {r.t: r for r in tr} for s, tr in traces_by_seed.items()}
    cols = {"t": np.array(ts, dtype=float)}
    for key in ("grad_oracles", "F", "gap"):
        cols[key] = np.array([np.mean([by_t[s][t].__dict__[key] for s in by_t]) for t in ts])
    return cols


def plot_curves(curves: dict[str, dict], out_path, title: str = "") -> None:
    """Write a self-contained SVG: gap (log) and F against iteration and oracle count."""
    import matplotlib
    from matplotlib.figure import Figure

    matplotlib.rcParams["svg.hashsalt"] = "alfcg"
    matplotlib.rcParams["svg.fonttype"] = "path"
    fig = Figure(figsize=(10, 7))
    axes = fig.subplots(2, 2)
    panels = [("t", "gap"), ("grad_oracles", "gap"), ("t", "F"), ("grad_oracles", "F")]
    labels = {"t": "iteration", "grad_oracles": "gradient oracle calls", "gap": "FW gap", "F": "F(x_t)"}
    for ax, (xk, yk) in zip(axes.ravel(), panels):
        for name, c in curves.items():
            y = np.asarray(c[yk], dtype=float)
            if yk == "gap":
                y = np.maximum(y, 1e-16)  # log axis
            ax.plot(c[xk], y, label=name)
        if yk == "gap":
            ax.set_yscale("log")
        ax.set_xlabel(labels[xk])
        ax.set_ylabel(labels[yk])
        ax.grid(True, alpha=0.3)
    axes[0, 0].legend(fontsize=7)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(out_path, format="svg", metadata={"Date": None})


def _summary(results, out):
    out.write(f"{'method':<18}{'min gap':>14}{'F at budget':>16}{'LMO calls':>11}{'wall s':>9}\n")
    for method, per_seed in results.items():
        traces = [tr for tr, _ in per_seed.values()]
        min_gap = np.mean([min(r.gap for r in tr) for tr in traces])
        final_F = np.mean([tr[-1].F for tr in traces])
        lmo = int(np.mean([tr[-1].lmo_calls for tr in traces]))
        wall = sum(w for _, w in per_seed.values())
        out.write(f"{method:<18}{min_gap:>14.4e}{final_F:>16.8g}{lmo:>11d}{wall:>9.2f}\n")


def run_experiment(cfg_path, jobs: int = 1, seed_override: int | None = None,
                   quiet: bool = False, out=None) -> int:
    """Run every (method, seed) pair of the config and write all outputs."""
    out = out or sys.stdout
    try:
        cfg, diags = load_config(cfg_path)
    except OSError as exc:
        print(f"error: cannot read {cfg_path}: {exc}", file=sys.stderr)
        return 2
    if diags:
        for d in diags:
            print(f"{cfg_path}: {d}", file=sys.stderr)
        return 2
    if seed_override is not None:
        cfg["seeds"] = [seed_override]
    out_root = cfg.get("output_dir") or os.environ.get("BENCH_OUTPUT_DIR") or "bench_output"
    out_dir = Path(out_root) / cfg["name"]
    out_dir.mkdir(parents=True, exist_ok=True)

    tasks = []
    for item in cfg["methods"]:
        mid, overrides = _method_entry(item)
        for seed in cfg["seeds"]:
            tasks.append((cfg, mid, overrides, seed, out_dir))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_worker, *zip(*tasks)))
    else:
        outcomes = [_worker(*task) for task in tasks]

    results: dict[str, dict[int, tuple]] = {}
    failed = False
    for method, seed, trace, err, wall in outcomes:
        if err is not None:
            failed = True
            print(f"run {method} seed {seed} failed: {err}", file=sys.stderr)
            continue
        results.setdefault(method, {})[seed] = (trace, wall)

    curves = {}
    for method, per_seed in results.items():
        traces = {s: tr for s, (tr, _) in per_seed.items()}
        (out_dir / f"{method}__merged.csv").write_text(merged_csv(traces))
        curves[method] = _mean_curves(traces)
    if curves:
        plot_curves(curves, out_dir / f"{cfg['name']}.svg", cfg["name"])
    if not quiet and results:
        _summary(results, out)
    return 1 if failed else 0


def plot_files(csv_paths, out_path) -> None:
    curves = {}
    for p in csv_paths:
        rows = read_trace_csv(p)
        curves[Path(p).stem] = {k: np.array([r[k] for r in rows], dtype=float)
                                for k in ("t", "grad_oracles", "F", "gap")}
    plot_curves(curves, out_path)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="bench", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("config")
    p_run.add_argument("--jobs", type=int, default=1)
    p_run.add_argument("--seed-override", type=int, default=None)
    p_run.add_argument("--quiet", action="store_true")
    p_val = sub.add_parser("validate", help="check a config without running it")
    p_val.add_argument("config")
    p_plot = sub.add_parser("plot", help="plot per-run trace CSVs into one SVG")
    p_plot.add_argument("csv", nargs="+")
    p_plot.add_argument("--out", required=True)
    args = parser.parse_args(argv)

    if args.command == "run":
        return run_experiment(args.config, jobs=max(1, args.jobs),
                              seed_override=args.seed_override, quiet=args.quiet)
    if args.command == "validate":
        try:
            diags = validate_config(args.config)
        except OSError as exc:
            print(f"error: cannot read {args.config}: {exc}", file=sys.stderr)
            return 2
        for d in diags:
            print(f"{args.config}: {d}")
        return 2 if diags else 0
    try:
        plot_files(args.csv, args.out)
    except (OSError, AlfcgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
