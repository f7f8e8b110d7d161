"""Command-line driver: reproducible experiment runs with CSV/JSON artifacts.

Subcommands map one-to-one onto library pipelines. Config-driven commands
read a JSON document; command-line flags override config fields. Every CSV
artifact starts with a comment line recording the hash of the effective
config and the seed, and all numbers are written with 17 significant digits,
so identical inputs produce byte-identical files.

Exit codes: 0 success, 1 configuration error, 2 a checked bound was
violated, 3 numerical failure (singular solve, unsettled tail, tolerance
not reached, overflow).
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys

import numpy as np

from .acceptance import verify_all_rows
from .dichotomy import roughness_sweep
from .errors import (
    DimensionMismatch,
    DomainTooSmall,
    EigenFailure,
    NormKindMismatch,
    NotInvertible,
    OutOfInterval,
    Overflow,
    PreconditionViolated,
    SingularResolvent,
    TailNotSettled,
    ToleranceNotReached,
)
from .evofam import euler_polygon, family_from_spec, refine_to_tolerance
from .examples import Domain, GridSpec, build_heat_generator, build_translation_generator, verify_example_bounds
from .linop import NormKind, Operator, read_matrix, write_matrix
from .metrics import ANormEvaluator, MuGrid, yosida_distance
from .semigroup import GrowthBound, fit_growth_bound

CONFIG_ERRORS = (
    PreconditionViolated,
    OutOfInterval,
    DimensionMismatch,
    NormKindMismatch,
    DomainTooSmall,
    FileNotFoundError,
    json.JSONDecodeError,
    KeyError,
    ValueError,
)
NUMERICAL_ERRORS = (
    SingularResolvent,
    TailNotSettled,
    ToleranceNotReached,
    Overflow,
    EigenFailure,
    NotInvertible,
)


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _header(config: dict, seed: int) -> str:
    return f"# config_hash={_config_hash(config)} seed={seed}\n"


def _write_csv(path: str, header: str, columns, rows) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(header)
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_config(args) -> dict:
    with open(args.config) as fh:
        config = json.load(fh)
    for key in ("seed", "tol", "n_max", "level", "out"):
        value = getattr(args, key.replace("-", "_"), None)
        if value is not None:
            config[key] = value
    return config


def _operator_from_config(config: dict, norm_kind: NormKind) -> Operator:
    if "matrix_file" in config:
        return read_matrix(config["matrix_file"], norm_kind)
    return Operator(np.asarray(config["matrix"], dtype=float), norm_kind)


def _norm_kind(config: dict) -> NormKind:
    return NormKind.parse(config.get("norm", "2"))


def _growth_bound(config: dict, a: Operator) -> GrowthBound:
    if "m" in config and "omega0" in config:
        return GrowthBound(m=float(config["m"]), omega0=float(config["omega0"]))
    return fit_growth_bound(a)


def _t_grid(spec, default) -> np.ndarray:
    if spec is None:
        return default
    if isinstance(spec, dict):
        return np.linspace(float(spec["start"]), float(spec["stop"]), int(spec["count"]))
    return np.asarray([float(t) for t in spec])


def cmd_anorm(args) -> int:
    kind = NormKind.parse(args.norm)
    a = read_matrix(args.matrix_file, kind)
    c = read_matrix(args.perturb_file, kind)
    gb = GrowthBound(m=args.m, omega0=args.omega0)
    grid = MuGrid(args.min_offset, args.max_offset, args.points_per_decade)
    config = {
        "command": "anorm",
        "matrix_file": args.matrix_file,
        "perturb_file": args.perturb_file,
        "m": args.m,
        "omega0": args.omega0,
        "norm": args.norm,
        "grid": [args.min_offset, args.max_offset, args.points_per_decade],
    }
    evaluator = ANormEvaluator(a, gb, grid)
    samples = evaluator.sweep(c)
    result = evaluator.value(c)
    _write_csv(
        f"{args.out}_anorm.csv",
        _header(config, args.seed),
        ["mu", "scaled_norm"],
        ([_fmt(mu), _fmt(v)] for mu, v in samples),
    )
    _write_json(
        f"{args.out}_anorm.json",
        {
            "config_hash": _config_hash(config),
            "seed": args.seed,
            "value": result.value,
            "argmax_mu": None if math.isinf(result.argmax_mu) else result.argmax_mu,
            "tail_attained": math.isinf(result.argmax_mu),
            "m": result.m,
            "omega0": result.omega0,
            "skipped": result.skipped,
            "total": result.total,
        },
    )
    print(f"anorm value {result.value:.12g}")
    return 0


def cmd_ydist(args) -> int:
    kind = NormKind.parse(args.norm)
    a = read_matrix(args.matrix_file, kind)
    b = read_matrix(args.second_file, kind)
    config = {
        "command": "ydist",
        "matrix_file": args.matrix_file,
        "second_file": args.second_file,
        "norm": args.norm,
    }
    result = yosida_distance(a, b)
    _write_csv(
        f"{args.out}_ydist.csv",
        _header(config, args.seed),
        ["lambda", "scaled_difference"],
        ([_fmt(lam), _fmt(v)] for lam, v in result.samples),
    )
    _write_json(
        f"{args.out}_ydist.json",
        {
            "config_hash": _config_hash(config),
            "seed": args.seed,
            "value": result.value,
            "uncertainty": result.uncertainty,
        },
    )
    print(f"yosida distance {result.value:.12g} (spread {result.uncertainty:.3g})")
    return 0


def cmd_evolve(args) -> int:
    config = _load_config(args)
    kind = _norm_kind(config)
    a = _operator_from_config(config, kind)
    family = family_from_spec(config["family"], kind)
    level = int(config.get("level", 8))
    u = euler_polygon(a, family, level)
    t0, t1 = family.interval
    s = float(config.get("s", t0))
    ts = _t_grid(config.get("t_grid"), np.linspace(s, t1, 17))
    ops = u.evaluate_path(ts, s)
    dim = a.dim
    columns = ["t"] + [f"u_{i}_{j}" for i in range(dim) for j in range(dim)]
    rows = (
        [_fmt(t)] + [_fmt(v) for v in op.entries.reshape(-1)]
        for t, op in zip(ts, ops)
    )
    seed = int(config.get("seed", 0))
    out = config.get("out") or "run"
    _write_csv(f"{out}_evolve.csv", _header(config, seed), columns, rows)
    print(f"evolved level {level} at {len(ts)} samples")
    return 0


def cmd_converge(args) -> int:
    config = _load_config(args)
    kind = _norm_kind(config)
    a = _operator_from_config(config, kind)
    family = family_from_spec(config["family"], kind)
    gb = _growth_bound(config, a)
    tol = float(config.get("tol", 1e-4))
    n_max = int(config.get("n_max", 14))
    seed = int(config.get("seed", 0))
    rng = np.random.default_rng(seed)
    out = config.get("out") or "run"
    columns = ["level", "delta", "omega_n", "bound"]
    try:
        result = refine_to_tolerance(a, family, gb, tol, n_max=n_max, rng=rng)
    except ToleranceNotReached as exc:
        _write_csv(
            f"{out}_converge.csv",
            _header(config, seed),
            columns,
            ([str(n), _fmt(d), _fmt(w), _fmt(bd)] for n, d, w, bd in exc.levels),
        )
        print(f"tolerance {tol:g} not reached: best delta {exc.best_delta:.3e}", file=sys.stderr)
        return 3
    _write_csv(
        f"{out}_converge.csv",
        _header(config, seed),
        columns,
        ([str(n), _fmt(d), _fmt(w), _fmt(bd)] for n, d, w, bd in result.levels),
    )
    _write_json(
        f"{out}_converge.json",
        {
            "config_hash": _config_hash(config),
            "seed": seed,
            "n_final": result.approx.level,
            "achieved_delta": result.achieved_delta,
            "omega1": result.omega1,
        },
    )
    print(f"converged at level {result.approx.level} with delta {result.achieved_delta:.3e}")
    return 0


def cmd_dichotomy(args) -> int:
    config = _load_config(args)
    kind = _norm_kind(config)
    a = _operator_from_config(config, kind)
    shape = family_from_spec(config["family"], kind)
    eps_list = [float(e) for e in config.get("eps_list", [0.0, 0.01, 0.05])]
    t0, t1 = shape.interval
    ts = _t_grid(config.get("t_grid"), np.linspace(t0 + 1.0, t1, 5))
    gb = _growth_bound(config, a)
    seed = int(config.get("seed", 0))
    rng = np.random.default_rng(seed)
    results = roughness_sweep(a, shape, eps_list, t_samples=ts, gb=gb, n_max=int(config.get("n_max", 14)), rng=rng)
    rows = []
    summary = []
    for res in results:
        for row in res.rows:
            rows.append(
                [
                    _fmt(res.eps),
                    _fmt(row.t),
                    str(int(row.report.hyperbolic)),
                    _fmt(row.report.spectral_gap),
                    str(row.report.stable_rank),
                    _fmt(row.sup_diff),
                    _fmt(res.bound),
                ]
            )
        summary.append(
            {
                "eps": res.eps,
                "persisted": res.persisted,
                "gap_floor": res.gap_floor,
                "achieved_delta": res.achieved_delta,
                "refine_error": res.refine_error,
            }
        )
    out = config.get("out") or "run"
    _write_csv(
        f"{out}_dichotomy.csv",
        _header(config, seed),
        ["eps", "t", "hyperbolic", "spectral_gap", "stable_rank", "sup_diff", "bound_e4w1w1"],
        rows,
    )
    _write_json(
        f"{out}_dichotomy.json",
        {"config_hash": _config_hash(config), "seed": seed, "sweep": summary},
    )
    print(f"swept {len(eps_list)} eps values, {len(rows)} rows")
    return 0


def cmd_examples(args) -> int:
    points, length = args.grid
    which = args.which
    domain = Domain.HALF_LINE if which == "translation" else Domain.LINE
    g = GridSpec(length, points, domain)
    config = {
        "command": "examples",
        "which": which,
        "nmax": args.nmax,
        "grid": [points, length],
        "pipeline": not args.no_pipeline,
    }
    report = verify_example_bounds(which, g, n_max=args.nmax, pipeline=not args.no_pipeline)
    matrix_grid = g.coarsened(512)
    builder = build_translation_generator if which == "translation" else build_heat_generator
    write_matrix(f"{args.out}_generator.txt", builder(matrix_grid))
    _write_csv(
        f"{args.out}_sweep.csv",
        _header(config, args.seed),
        ["mu", "scaled_norm"],
        ([_fmt(mu), _fmt(v)] for mu, v in report.sweep),
    )
    _write_json(
        f"{args.out}_summary.json",
        {
            "config_hash": _config_hash(config),
            "seed": args.seed,
            "which": which,
            "grid_points": g.points,
            "matrix_points": matrix_grid.points,
            "fitted_k": report.fitted_k,
            "contraction_pass": report.contraction_pass,
            "no_growth_pass": report.no_growth_pass,
            "a1_pass": report.assumptions.a1_pass,
            "a2_pass": report.assumptions.a2_pass,
            "unresolved_spikes": list(report.multiplier.unresolved),
            "spike_mass": report.multiplier.mass,
            "pipeline_agreement": report.pipeline_agreement,
        },
    )
    ok = report.contraction_pass and report.no_growth_pass
    print(f"{which}: fitted K {report.fitted_k:.6g}, bounded sweep {report.no_growth_pass}")
    return 0 if ok else 2


def cmd_verify_all(args) -> int:
    rows = verify_all_rows(args.seed)
    config = {"command": "verify-all", "seed": args.seed}
    _write_csv(
        f"{args.out}_criteria.csv",
        _header(config, args.seed),
        ["index", "name", "passed", "detail"],
        ([str(r.index), r.name, str(int(r.passed)), r.detail] for r in rows),
    )
    for r in rows:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.index:>2}  {r.name:<26} {r.detail}")
    return 0 if all(r.passed for r in rows) else 2


def _grid_pair(text: str):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected N,L")
    return int(parts[0]), float(parts[1])


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nonauto",
        description="Evolution families, perturbation norms and dichotomy checks for u' = (A + B(t)) u.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("anorm", help="resolvent-weighted perturbation norm sweep")
    p.add_argument("--matrix-file", required=True)
    p.add_argument("--perturb-file", required=True)
    p.add_argument("--m", type=float, required=True)
    p.add_argument("--omega0", type=float, required=True)
    p.add_argument("--norm", default="2", choices=["1", "2", "inf"])
    p.add_argument("--min-offset", type=float, default=1e-3)
    p.add_argument("--max-offset", type=float, default=1e8)
    p.add_argument("--points-per-decade", type=int, default=20)
    p.add_argument("--out", default="run")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_anorm)

    p = sub.add_parser("ydist", help="Yosida distance of two matrices")
    p.add_argument("--matrix-file", required=True)
    p.add_argument("--second-file", required=True)
    p.add_argument("--norm", default="2", choices=["1", "2", "inf"])
    p.add_argument("--out", default="run")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_ydist)

    for name, fn, help_text in (
        ("evolve", cmd_evolve, "evaluate the polygon family at a fixed dyadic level"),
        ("converge", cmd_converge, "refine the dyadic level to a target increment"),
        ("dichotomy", cmd_dichotomy, "roughness sweep over perturbation sizes"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True)
        p.add_argument("--out", default=None)
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--n-max", dest="n_max", type=int, default=None)
        p.add_argument("--level", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.set_defaults(func=fn)

    p = sub.add_parser("examples", help="model-problem bound checks and artifacts")
    p.add_argument("--which", required=True, choices=["translation", "heat"])
    p.add_argument("--nmax", type=int, default=3)
    p.add_argument("--grid", type=_grid_pair, default=(2048, 8.0), help="N,L")
    p.add_argument("--no-pipeline", action="store_true")
    p.add_argument("--out", default="run")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_examples)

    p = sub.add_parser("verify-all", help="run every acceptance criterion and report a table")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out", default="verify")
    p.set_defaults(func=cmd_verify_all)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except CONFIG_ERRORS as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
