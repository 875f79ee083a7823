"""Command-line interface.

Subcommands: gen-ng, coreset, solve, verify, experiment, lowerbound,
sparsity.  Every JSON output embeds the effective configuration, so a result
can always be traced back to the seeds and flags that produced it.  Exit
codes: 0 success, 1 invalid input, 2 internal error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .conditioning import p_conditioned_basis
from .coreset import Coreset, build_coreset, sample_size, verify_coreset
from .errors import TheoremInapplicableError
from .experiments import (
    ExperimentConfig,
    build_experiment_instance,
    emit_report,
    generate_ng_matrix,
    generate_response,
    run_relative_error_experiment,
    run_sparsity_experiment,
)
from .linalg import RegressionInstance, augment
from .lowerbound import demonstrate_violation
from .objective import ObjectiveSpec
from .seeding import mix_seed
from .sensitivity import (
    lp_lp_sensitivity_bounds,
    ridge_leverage_scores,
    rlad_sensitivity_bounds,
    uniform_scores,
)
from .solvers import (
    solve_lasso,
    solve_lp_lp,
    solve_modified_lasso,
    solve_rlad,
    solve_ridge,
)
from .linalg import induced_norm_upper


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _check_epsilon(value: float) -> float:
    if not 0 < value < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {value}")
    return value


def _check_lambda(value: float) -> float:
    if value < 0:
        raise ValueError(f"lambda must be >= 0, got {value}")
    return value


def _write(doc: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(doc + "\n")
    else:
        print(doc)


def _dump(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2)


def _load_instance(path: str) -> RegressionInstance:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    for key in ("design", "response"):
        if key not in doc:
            raise ValueError(f"instance file {path} missing key {key!r}")
    return RegressionInstance(
        np.asarray(doc["design"], dtype=float),
        np.asarray(doc["response"], dtype=float),
    )


def _load_coreset(path: str) -> Coreset:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    doc = json.loads(text)
    if "coreset" in doc:  # provenance wrapper
        return Coreset.from_json(json.dumps(doc["coreset"]))
    return Coreset.from_json(text)


def _cmd_gen_ng(args) -> int:
    A = generate_ng_matrix(args.n, args.d, args.alpha, mix_seed(args.seed, 0x01))
    x_true = np.random.default_rng(mix_seed(args.seed, 0x02)).standard_normal(args.d)
    b = generate_response(A, x_true, args.noise_scale, mix_seed(args.seed, 0x03))
    payload = {
        "config": {
            "subcommand": "gen-ng",
            "n": args.n,
            "d": args.d,
            "alpha": args.alpha,
            "noise_scale": args.noise_scale,
            "seed": args.seed,
        },
        "n": args.n,
        "d": args.d,
        "design": A.tolist(),
        "response": b.tolist(),
        "x_true": x_true.tolist(),
    }
    _write(_dump(payload), args.out)
    return 0


def _scores_for_cli(args, instance: RegressionInstance):
    aprime = augment(instance)
    if args.scheme == "uniform":
        return uniform_scores(instance.n)
    if args.scheme == "leverage":
        return ridge_leverage_scores(aprime, 0.0)
    if args.scheme == "ridge-leverage":
        return ridge_leverage_scores(aprime, args.lam)
    if args.scheme == "rlad":
        basis = p_conditioned_basis(aprime, 1.0, mix_seed(args.seed, 0x0B))
        return rlad_sensitivity_bounds(basis, args.lam, aprime)
    if args.scheme == "lp-lp":
        basis = p_conditioned_basis(aprime, args.p, mix_seed(args.seed, 0x0B))
        return lp_lp_sensitivity_bounds(
            basis, args.lam, induced_norm_upper(aprime, args.p), instance.n
        )
    raise ValueError(f"unknown scheme {args.scheme!r}")


def _cmd_coreset(args) -> int:
    _check_lambda(args.lam)
    if args.size is None and args.epsilon is None:
        raise ValueError("give either --size or --epsilon")
    if args.epsilon is not None:
        _check_epsilon(args.epsilon)
    instance = _load_instance(args.instance)
    scores = _scores_for_cli(args, instance)
    if args.size is not None:
        r = args.size
    else:
        r = sample_size(
            scores.total, args.epsilon, args.delta, instance.d + 1, args.constant
        )
    p = 1.0 if args.scheme == "rlad" else args.p
    core = build_coreset(instance, scores, r, p, args.seed)
    payload = {
        "config": {
            "subcommand": "coreset",
            "instance": args.instance,
            "scheme": args.scheme,
            "lambda": args.lam,
            "size": args.size,
            "epsilon": args.epsilon,
            "delta": args.delta,
            "constant": args.constant,
            "p": p,
            "seed": args.seed,
        },
        "coreset": json.loads(core.to_json()),
    }
    _write(_dump(payload), args.out)
    return 0


def _cmd_solve(args) -> int:
    _check_lambda(args.lam)
    if (args.instance is None) == (args.coreset is None):
        raise ValueError("give exactly one of --instance or --coreset")
    if args.instance is not None:
        instance = _load_instance(args.instance)
    else:
        instance = _load_coreset(args.coreset).as_instance()
    if args.family == "ridge":
        result = solve_ridge(instance, args.lam)
    elif args.family == "lasso":
        result = solve_lasso(instance, args.lam, tol=args.tol, max_iter=args.max_iter)
    elif args.family == "modified_lasso":
        result = solve_modified_lasso(
            instance, args.lam, tol=args.tol, max_iter=args.max_iter
        )
    elif args.family == "rlad":
        result = solve_rlad(instance, args.lam, tol=args.tol, max_iter=args.max_iter)
    elif args.family == "lp_lp":
        result = solve_lp_lp(
            instance, args.p, args.lam, tol=args.tol, max_iter=args.max_iter
        )
    else:
        raise ValueError(f"unknown family {args.family!r}")
    payload = {
        "config": {
            "subcommand": "solve",
            "instance": args.instance,
            "coreset": args.coreset,
            "family": args.family,
            "lambda": args.lam,
            "p": args.p,
            "tol": args.tol,
            "max_iter": args.max_iter,
        },
        "solution": result.solution.tolist(),
        "objective_value": result.objective_value,
        "iterations": result.iterations,
        "converged": result.converged,
        "optimality_residual": result.optimality_residual,
    }
    _write(_dump(payload), args.out)
    return 0


def _cmd_verify(args) -> int:
    _check_lambda(args.lam)
    _check_epsilon(args.epsilon)
    if args.queries < 1:
        raise ValueError(f"--queries must be >= 1, got {args.queries}")
    instance = _load_instance(args.instance)
    core = _load_coreset(args.coreset)
    spec = ObjectiveSpec.for_family(args.family, args.lam, p=args.p)
    rng = np.random.default_rng(mix_seed(args.seed, 0x06))
    queries = list(rng.standard_normal((args.queries, instance.d)))
    report = verify_coreset(instance, core, spec, queries, args.epsilon)
    payload = {
        "config": {
            "subcommand": "verify",
            "instance": args.instance,
            "coreset": args.coreset,
            "family": args.family,
            "lambda": args.lam,
            "p": args.p,
            "epsilon": args.epsilon,
            "queries": args.queries,
            "seed": args.seed,
        },
        "max_relative_deviation": report.max_relative_deviation,
        "worst_query_index": report.worst_query_index,
        "queries_checked": report.queries_checked,
        "degenerate_queries": report.degenerate_queries,
        "epsilon": report.epsilon,
        "passed": report.passed,
    }
    _write(_dump(payload), args.out)
    return 0


def _experiment_config(args) -> ExperimentConfig:
    doc = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            doc = json.load(fh)
    overrides = {
        "n": args.n,
        "d": args.d,
        "master_seed": args.master_seed,
        "trials_per_cell": args.trials_per_cell,
        "objective_family": args.objective_family,
        "ng_alpha": args.ng_alpha,
        "noise_scale": args.noise_scale,
        "csv_path": args.csv_path,
        "target_column": args.target_column,
    }
    for key, value in overrides.items():
        if value is not None:
            doc[key] = value
    if args.lambda_grid is not None:
        doc["lambda_grid"] = [float(v) for v in args.lambda_grid.split(",")]
    if args.sample_sizes is not None:
        doc["sample_sizes"] = [int(v) for v in args.sample_sizes.split(",")]
    if args.schemes is not None:
        doc["schemes"] = args.schemes.split(",")
    doc.setdefault("sample_sizes", [50])
    return ExperimentConfig.from_dict(doc)


def _cmd_experiment(args) -> int:
    config = _experiment_config(args)
    table = run_relative_error_experiment(config, threads=args.threads)
    if args.format == "csv":
        _write(emit_report(table, "csv"), args.out)
    else:
        payload = {
            "config": config.to_dict(),
            "threads": args.threads,
            "table": json.loads(emit_report(table, "json")),
        }
        _write(_dump(payload), args.out)
    return 0


def _cmd_sparsity(args) -> int:
    config = _experiment_config(args)
    table = run_sparsity_experiment(config)
    if args.format == "csv":
        _write(emit_report(table, "csv"), args.out)
    else:
        payload = {
            "config": config.to_dict(),
            "table": json.loads(emit_report(table, "json")),
        }
        _write(_dump(payload), args.out)
    return 0


def _cmd_lowerbound(args) -> int:
    doc = {}
    if args.spec:
        with open(args.spec, encoding="utf-8") as fh:
            doc = json.load(fh)
    exponents = {
        "p": float(doc.get("p", 2.0)),
        "q": float(doc.get("q", 1.0)),
        "r": float(doc.get("r", 2.0)),
        "s": float(doc.get("s", 1.0)),
    }
    lam = _check_lambda(float(doc.get("lambda", 1.0)))
    epsilon = _check_epsilon(float(doc.get("epsilon", 0.1)))
    seed = int(doc.get("seed", 0))
    probes = int(doc.get("probes", 200))
    spec = ObjectiveSpec(**exponents, lam=lam, family="custom")
    if "instance" in doc:
        instance = _load_instance(doc["instance"])
        aprime = augment(instance)
    else:
        aprime = np.eye(2)  # canonical demonstration matrix
    if "coreset" in doc:
        core = _load_coreset(doc["coreset"])
    else:
        core = Coreset(
            rows=np.array([[1.0, 0.0]]),
            weights=np.array([1.0]),
            source_indices=np.array([0]),
            seed=0,
            scheme="identity",
            n_source=2,
        )
    try:
        witness = demonstrate_violation(
            aprime, core, spec, epsilon, seed=seed, probes=probes
        )
    except TheoremInapplicableError as exc:
        payload = {
            "config": {"subcommand": "lowerbound", **exponents, "lambda": lam,
                       "epsilon": epsilon, "seed": seed, "probes": probes},
            "status": "theorem-inapplicable",
            "detail": str(exc),
        }
        _write(_dump(payload), args.out)
        return 0
    payload = {
        "config": {"subcommand": "lowerbound", **exponents, "lambda": lam,
                   "epsilon": epsilon, "seed": seed, "probes": probes},
        "status": "violation" if witness is not None else "no-violation",
        "witness": json.loads(witness.to_json()) if witness is not None else None,
    }
    _write(_dump(payload), args.out)
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="regcoreset", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command")

    g = sub.add_parser("gen-ng", help="generate a nearly-degenerate instance")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--alpha", type=float, default=0.00065)
    g.add_argument("--noise-scale", type=float, default=1e-5)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default=None)
    g.set_defaults(func=_cmd_gen_ng)

    c = sub.add_parser("coreset", help="sample a coreset from an instance")
    c.add_argument("--instance", required=True)
    c.add_argument(
        "--scheme",
        required=True,
        choices=["uniform", "leverage", "ridge-leverage", "lp-lp", "rlad"],
    )
    c.add_argument("--lambda", dest="lam", type=float, default=0.0)
    c.add_argument("--size", type=int, default=None)
    c.add_argument("--epsilon", type=float, default=None)
    c.add_argument("--delta", type=float, default=0.1)
    c.add_argument("--constant", type=float, default=0.5)
    c.add_argument("--p", type=float, default=2.0)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out", default=None)
    c.set_defaults(func=_cmd_coreset)

    s = sub.add_parser("solve", help="solve an objective on an instance or coreset")
    s.add_argument("--instance", default=None)
    s.add_argument("--coreset", default=None)
    s.add_argument(
        "--family",
        required=True,
        choices=["ridge", "lasso", "modified_lasso", "rlad", "lp_lp"],
    )
    s.add_argument("--lambda", dest="lam", type=float, default=0.0)
    s.add_argument("--p", type=float, default=2.0)
    s.add_argument("--tol", type=float, default=1e-8)
    s.add_argument("--max-iter", type=int, default=20000)
    s.add_argument("--out", default=None)
    s.set_defaults(func=_cmd_solve)

    v = sub.add_parser("verify", help="check a coreset against its instance")
    v.add_argument("--instance", required=True)
    v.add_argument("--coreset", required=True)
    v.add_argument(
        "--family",
        default="ridge",
        choices=["ridge", "lasso", "modified_lasso", "rlad", "lp_lp"],
    )
    v.add_argument("--lambda", dest="lam", type=float, default=0.0)
    v.add_argument("--p", type=float, default=2.0)
    v.add_argument("--epsilon", type=float, required=True)
    v.add_argument("--queries", type=int, default=200)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out", default=None)
    v.set_defaults(func=_cmd_verify)

    for name, handler in (("experiment", _cmd_experiment), ("sparsity", _cmd_sparsity)):
        e = sub.add_parser(name, help=f"run the {name} protocol")
        e.add_argument("--config", default=None)
        e.add_argument("--n", type=int, default=None)
        e.add_argument("--d", type=int, default=None)
        e.add_argument("--master-seed", type=int, default=None)
        e.add_argument("--trials-per-cell", type=int, default=None)
        e.add_argument("--objective-family", default=None)
        e.add_argument("--ng-alpha", type=float, default=None)
        e.add_argument("--noise-scale", type=float, default=None)
        e.add_argument("--lambda-grid", default=None)
        e.add_argument("--sample-sizes", default=None)
        e.add_argument("--schemes", default=None)
        e.add_argument("--csv-path", default=None)
        e.add_argument("--target-column", default=None)
        e.add_argument("--threads", type=int, default=os.cpu_count() or 1)
        e.add_argument("--format", choices=["json", "csv"], default="json")
        e.add_argument("--out", default=None)
        e.set_defaults(func=handler)

    lb = sub.add_parser("lowerbound", help="emit a mismatched-exponent witness")
    lb.add_argument("--spec", default=None)
    lb.add_argument("--out", default=None)
    lb.set_defaults(func=_cmd_lowerbound)
    return parser


def dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(parser.format_usage(), file=sys.stderr, end="")
        return 1
    if getattr(args, "func", None) is None:
        print(parser.format_usage(), file=sys.stderr, end="")
        return 1
    try:
        return args.func(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))
