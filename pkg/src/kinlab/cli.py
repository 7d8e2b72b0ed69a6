"""Command-line harness: ``kinlab <subcommand> --config FILE --out DIR``.

Exit codes: 0 when every check passes, 1 when a check fails (or, with
--strict, when a warning is raised), 2 for usage and config errors.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import platform
import sys
import time
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np
import scipy
import yaml

from . import __version__
from .exponents import ExponentDomainError
from .experiments import RUNNERS
from .kernel import ResolutionError
from .solver import ConfigurationError
from .spectral import GridError

SUBCOMMANDS = (*RUNNERS, "report")

# -- config schemas ------------------------------------------------------------------

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_nonneg = {"type": "number", "minimum": 0}
_count = {"type": "integer", "minimum": 1}
_seed = {"type": "integer", "minimum": 0}
_length = {"anyOf": [_pos, {"type": "string", "pattern": r"^\s*([0-9.]+\s*\*?\s*)?pi\s*$"}]}
_rational = {"anyOf": [_num, {"type": "string", "pattern": r"^\s*(-?\d+(/\d+)?|inf)\s*$"}]}
_axis = {"type": "array", "items": [_length, _count], "minItems": 2, "maxItems": 2}


def _list(item, min_items=1):
    return {"type": "array", "items": item, "minItems": min_items}


def _table(**props):
    return {"type": "object", "properties": props, "required": sorted(props), "additionalProperties": False}


SCHEMAS = {
    "kernel": _table(
        seed=_seed,
        symbol=_table(points=_count, scale=_pos, tol=_pos, max_seconds=_pos),
        mass=_table(sigma=_pos, t=_pos, x=_axis, v=_axis, tol=_pos),
        self_similarity=_table(sigmas=_list(_length), points=_count, tol=_pos),
        scan=_table(sigma=_pos, d={"enum": [1, 2]}, alpha0=_nonneg, beta0=_nonneg, p0=_rational, q0=_rational,
                    t0=_pos, ratio={"type": "number", "exclusiveMinimum": 1}, count={"type": "integer", "minimum": 4},
                    x=_axis, v=_axis, tol=_pos, max_seconds=_pos),
        bounds=_table(sigmas=_list(_length), n=_count, spacing=_pos, max_seconds=_pos),
    ),
    "commutator": _table(
        seed=_seed, fields=_count, grid=_table(t=_axis, x=_axis, v=_axis), width=_pos, modes=_count,
        r=_num, s=_num, time_r=_num, u_amp=_num, tol=_pos, exact_tol=_pos, time_tol=_pos, time_u_tol=_pos,
        max_seconds=_pos,
    ),
    "averaging": _table(
        seed=_seed, seeds=_count, alpha=_list(_nonneg), beta=_list(_nonneg), k=_list(_nonneg), l=_list(_nonneg),
        p={"const": 2}, q={"const": 2}, sizes=_list(_count, 2), variant={"enum": ["i", "ii"]},
        refinement_factor=_pos, frontier_tol=_nonneg, max_seconds=_pos,
    ),
    "burgers": _table(
        seed=_seed, n=_count, length=_length, cfl={"type": "number", "exclusiveMinimum": 0, "maximum": 0.9},
        mass_tol=_pos, max_seconds=_pos,
        shock=_table(left=_num, right=_num, T=_pos, speed=_pos, tol=_pos),
        defect=_table(sizes=_list(_count, 2), T=_pos, nv=_count, positivity=_pos, mass_spread=_pos),
        regularity=_table(s0=_list(_pos), u_sup=_pos, T=_pos, t_slices=_count),
    ),
    "cauchy": _table(
        seed=_seed,
        delta=_table(cases=_list(_table(sigma=_pos, x=_axis, v=_axis, dt=_pos, steps=_count)), tol=_pos),
        msteps=_table(x=_axis, v=_axis, T=_pos, steps=_count, sigmas=_list(_pos), tol=_pos),
        duhamel=_table(sigma=_pos, x=_axis, v=_axis, T=_pos, dts=_list(_pos, 3), center=_num, nodes=_count,
                       ratio_tol=_pos),
        energy=_table(s=_list(_pos), levels={"type": "integer", "minimum": 2}, x=_axis, v=_axis, steps=_count,
                      T=_pos, R=_pos, stability=_pos, rescale=_pos),
    ),
    "exponents": _table(
        seed=_seed,
        reg0_i=_list(_table(alpha=_rational, beta=_rational, k=_rational, l=_rational, expect=_rational)),
        regp_equal=_list(_table(alpha=_rational, beta=_rational, k=_rational, p=_rational, q=_rational)),
        gg0_kappa=_table(sigmas=_list(_rational)),
        gkol_sup=_table(s0=_list(_rational), expect=_rational),
        burgers=_table(eps=_list(_rational), s0=_rational),
    ),
}


class UsageError(Exception):
    pass


def bundled_config(name: str) -> Path:
    return Path(str(resources.files("kinlab") / "configs" / f"{name}.yaml"))


def load_config(path, subcommand: str) -> dict:
    """Parse YAML and validate the single root table named after the subcommand."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise UsageError(f"config {path} is not valid YAML: {exc}") from exc
    if not isinstance(doc, dict) or list(doc) != [subcommand]:
        raise UsageError(f"config: expected a single root table '{subcommand}'")
    errors = sorted(jsonschema.Draft7Validator(SCHEMAS[subcommand]).iter_errors(doc[subcommand]),
                    key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        err = errors[0]
        where = ".".join([subcommand, *map(str, err.absolute_path)])
        raise UsageError(f"config field {where}: {err.message}")
    return doc[subcommand]


# -- output --------------------------------------------------------------------------


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if isinstance(x, float) and not np.isfinite(x):
        return str(x)
    if x is None or isinstance(x, (bool, int, float, str)):
        return x
    return str(x)


def write_json(path: Path, obj):
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_csv(path: Path, rows: list):
    keys = []
    for r in rows:
        keys += [k for k in r if k not in keys]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=keys, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: _jsonable(r.get(k, "")) for k in keys})


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(_jsonable(cfg), sort_keys=True).encode()).hexdigest()


def _claim(out: Path, subcommand: str):
    manifest = out / "manifest.json"
    if manifest.exists():
        owner = json.loads(manifest.read_text()).get("subcommand")
        if owner != subcommand:
            raise UsageError(f"{out} holds a '{owner}' run; choose another --out")
        manifest.unlink()  # the manifest is the commit marker, drop it until this run finishes
    out.mkdir(parents=True, exist_ok=True)


def run(subcommand: str, config=None, out=None, workers: int = 1, seed=None, strict: bool = False) -> int:
    cfg = load_config(config or bundled_config(subcommand), subcommand)
    if seed is not None:
        cfg["seed"] = int(seed)
    out = Path(out or Path("runs") / subcommand)
    _claim(out, subcommand)
    start = time.perf_counter()
    try:
        outcome = RUNNERS[subcommand](cfg, workers=max(1, int(workers)))
    except (GridError, ConfigurationError, ExponentDomainError, ResolutionError) as exc:
        raise UsageError(f"config rejected by {subcommand}: {exc}") from exc
    wall = time.perf_counter() - start

    tables = {}
    for name, rows in outcome.tables.items():
        write_csv(out / f"{name}.csv", rows)
        tables[name] = {"file": f"{name}.csv", "plot": outcome.plots.get(name)}
    arrays = {}
    for name, data in outcome.arrays.items():
        np.save(out / f"{name}.npy", np.asarray(data["w"]))
        arrays[name] = {"file": f"{name}.npy", "shape": list(np.shape(data["w"])), "dtype": "float64",
                        "times": [float(t) for t in data["t"]]}
    passed = all(c["pass"] for c in outcome.checks.values())
    ok = passed and not (strict and outcome.warnings)
    write_json(out / "summary.json", {"subcommand": subcommand, "pass": ok, "checks": outcome.checks,
                                      "warnings": outcome.warnings, "strict": strict})
    h = config_hash(cfg)
    write_json(out / "manifest.json", {
        "subcommand": subcommand,
        "run_id": hashlib.sha256(f"{subcommand}:{h}".encode()).hexdigest()[:16],
        "config_hash": h,
        "config": cfg,
        "seed": cfg["seed"],
        "grids": outcome.grids,
        "versions": {"kinlab": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                     "python": platform.python_version()},
        "workers": workers,
        "wall_seconds": round(wall, 3),
        "timings": outcome.timings,
        "criteria": {k: v["pass"] for k, v in outcome.checks.items()},
        "tables": tables,
        "arrays": arrays,
    })
    for name, c in outcome.checks.items():
        print(f"{subcommand}:{name}: {'PASS' if c['pass'] else 'FAIL'}")
    for w in outcome.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return 0 if ok else 1


# -- report --------------------------------------------------------------------------


def _read_run(path: Path) -> dict:
    manifest = path / "manifest.json"
    if not manifest.is_file():
        raise UsageError(f"{path} has no manifest.json")
    m = json.loads(manifest.read_text())
    summary_path = path / "summary.json"
    s = json.loads(summary_path.read_text()) if summary_path.is_file() else {"checks": {}, "warnings": []}
    return {"dir": path, "manifest": m, "summary": s}


def report(dirs, out=None, strict: bool = False) -> int:
    from .plotting import plot_table

    runs = {}
    for d in dirs:
        r = _read_run(Path(d))
        runs.setdefault(r["manifest"]["run_id"], r)  # merging the same run twice is a no-op
    rows = []
    for run_id, r in runs.items():
        sub = r["manifest"]["subcommand"]
        for name, c in r["summary"]["checks"].items():
            rows.append({"subcommand": sub, "criterion": name, "run": run_id, "pass": bool(c["pass"])})
    rows.sort(key=lambda r: (r["subcommand"], r["criterion"], r["run"]))
    warnings = sorted(w for r in runs.values() for w in r["summary"].get("warnings", []))
    failed = [f"{r['subcommand']}:{r['criterion']}" for r in rows if not r["pass"]]
    ok = not failed and not (strict and warnings)

    out = Path(out or "report")
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "report.json", {"pass": ok, "failed": failed, "criteria": rows, "warnings": warnings,
                                     "runs": sorted(runs)})
    width = max([len(f"{r['subcommand']}:{r['criterion']}") for r in rows] + [9])
    lines = [f"{'criterion':<{width}}  run               result", "-" * (width + 26)]
    lines += [f"{r['subcommand'] + ':' + r['criterion']:<{width}}  {r['run']}  {'PASS' if r['pass'] else 'FAIL'}" for r in rows]
    lines.append(f"overall: {'PASS' if ok else 'FAIL'}" + (f" ({', '.join(failed)})" if failed else ""))
    (out / "report.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print("\n".join(lines))

    plots = out / "plots"
    plots.mkdir(exist_ok=True)
    for run_id, r in sorted(runs.items()):
        sub = r["manifest"]["subcommand"]
        for name, meta in sorted(r["manifest"].get("tables", {}).items()):
            if not meta.get("plot"):
                continue
            with open(r["dir"] / meta["file"], newline="", encoding="utf-8") as fh:
                table = list(csv.DictReader(fh))
            plot_table(table, meta["plot"], plots / f"{sub}_{run_id[:8]}_{name}.png", title=f"{sub}: {name}")
    return 0 if ok else 1


# -- entry point ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kinlab", description="Kinetic transport verification harness")
    sub = parser.add_subparsers(dest="command", required=True, metavar="subcommand")
    for name in RUNNERS:
        p = sub.add_parser(name, help=f"run the {name} checks")
        p.add_argument("--config", help="YAML config (defaults to the bundled one)")
        p.add_argument("--out", help="output directory (default runs/<subcommand>)")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--strict", action="store_true", help="treat warnings as failures")
    p = sub.add_parser("report", help="merge run directories into one report")
    p.add_argument("runs", nargs="+")
    p.add_argument("--out", help="report directory (default report)")
    p.add_argument("--strict", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "report":
            return report(args.runs, args.out, args.strict)
        return run(args.command, args.config, args.out, args.workers, args.seed, args.strict)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
