"""Command-line interface: ``holofisher {fit,sample,eval,check,profile}``.

Exit codes: 0 success, 1 failed check, 2 usage or parse error, 3 sample
mean too concentrated, 4 optimizer did not converge.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import platform
import sys
import time
import warnings

import numpy as np

from . import __version__, checks, engine, mle, oracle
from .errors import ConcentrationError
from .rotations import (as_rotations, fisher_sample, matrix_to_quaternion,
                        project_to_rotation, quaternion_to_matrix,
                        rotation_from_vector_pair, signed_svd, sufficient_stats)

SCHEMA = "holofisher/1"
FORMATS = {9: "matrix_csv", 4: "quaternion_csv", 6: "vector_pair_csv"}
QUATERNION_TOL = 1e-6

EXIT_CHECK_FAILED = 1
EXIT_PARSE = 2
EXIT_CONCENTRATION = 3
EXIT_NOT_CONVERGED = 4


class InputError(ValueError):
    pass


# ---------------------------------------------------------------- file formats

def parse_rows(text):
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            rows.append([float(v) for v in line.split(",")])
        except ValueError:
            raise InputError(f"line {lineno}: cannot parse {raw!r}") from None
    return rows


def read_dataset(text, fmt=None, project=False):
    """Parse a dataset into an ``(n, 3, 3)`` rotation array.

    ``fmt`` defaults to the format implied by the column count.
    """
    rows = parse_rows(text)
    if not rows:
        raise InputError("dataset is empty")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise InputError(f"rows have inconsistent widths {sorted(widths)}")
    width = widths.pop()
    fmt = fmt or FORMATS.get(width)
    expected = {v: k for k, v in FORMATS.items()}
    if fmt not in expected:
        raise InputError(f"cannot infer format from {width} columns")
    if width != expected[fmt]:
        raise InputError(f"{fmt} needs {expected[fmt]} columns, found {width}")
    data = np.array(rows)
    if fmt == "quaternion_csv":
        norms = np.linalg.norm(data, axis=1)
        bad = np.flatnonzero(np.abs(norms - 1.0) > QUATERNION_TOL)
        if bad.size:
            raise InputError(f"row {bad[0] + 1} is not a unit quaternion (norm {norms[bad[0]]:.8f})")
        return quaternion_to_matrix(data / norms[:, None])
    if fmt == "vector_pair_csv":
        try:
            return np.array([rotation_from_vector_pair(r[:3], r[3:]) for r in data])
        except ValueError as exc:
            raise InputError(str(exc)) from None
    mats = data.reshape(-1, 3, 3)
    if project:
        mats = np.array([project_to_rotation(m) for m in mats])
    try:
        return as_rotations(mats)
    except ValueError as exc:
        raise InputError(f"{exc}; use --project for rounded input") from None


def write_dataset(samples, fmt="matrix_csv", out=None):
    out = out or io.StringIO()
    out.write(f"# holofisher {fmt}\n")
    if fmt == "quaternion_csv":
        rows = matrix_to_quaternion(samples) if len(samples) else np.empty((0, 4))
        out.write("# w,x,y,z\n")
    else:
        rows = np.asarray(samples).reshape(-1, 9)
        out.write("# y11,y12,y13,y21,y22,y23,y31,y32,y33\n")
    for row in rows:
        out.write(",".join(repr(float(v)) for v in row) + "\n")
    return out


def _floats(text, count, what):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise InputError(f"{what}: expected {count} comma-separated numbers") from None
    if len(vals) != count:
        raise InputError(f"{what}: expected {count} values, got {len(vals)}")
    return np.array(vals)


# ---------------------------------------------------------------- documents

def _to_plain(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, dict):
        return {k: _to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_plain(v) for v in obj]
    return obj


def result_document(result, *, source, digest, config, wall_time):
    stats = result.stats
    return _to_plain({
        "schema": SCHEMA,
        "input": {"source": source, "sha256": digest, "n": stats.n},
        "config": config,
        "stats": {"mean": stats.mean(), "g": stats.g, "q": stats.q, "r": stats.r},
        "result": {
            "method": result.method,
            "x_hat": result.x_hat,
            "theta_hat": result.theta_hat,
            "loglik": result.loglik,
            "grad_norm": result.grad_norm,
            "iterations": result.iterations,
            "converged": result.converged,
            "warnings": list(result.warnings),
        },
        "versions": {"holofisher": __version__, "numpy": np.__version__,
                     "python": platform.python_version()},
        "wall_time_s": wall_time,
    })


def dump_document(doc):
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=True)


def load_document(text):
    doc = json.loads(text)
    if doc.get("schema") != SCHEMA:
        raise InputError(f"unsupported schema {doc.get('schema')!r}")
    return doc


# ---------------------------------------------------------------- commands

def _optim_config(args):
    if args.multistart:
        start = "multistart"
    elif args.start:
        start = _floats(args.start, 3, "--start")
    else:
        start = "auto"
    return mle.OptimConfig(method=args.method, gamma=args.gamma, delta=args.delta,
                           max_iter=args.max_iter, start=start)


def cmd_fit(args, stdout):
    if args.mean is not None:
        mean = _floats(args.mean, 9, "--mean").reshape(3, 3)
        stats = signed_svd(mean)
        source = "mean"
        digest = hashlib.sha256(args.mean.encode()).hexdigest()
    elif args.input:
        raw = open(args.input, "rb").read()
        samples = read_dataset(raw.decode(), args.format, args.project)
        stats = sufficient_stats(samples)
        source = args.input
        digest = hashlib.sha256(raw).hexdigest()
    else:
        raise InputError("fit needs an input file or --mean")
    cfg = _optim_config(args)
    started = time.perf_counter()
    result = mle.fit(stats, cfg, force_gauge=args.force_gauge)
    wall = time.perf_counter() - started
    config = {"method": cfg.method, "gamma": cfg.gamma, "delta": cfg.delta,
              "max_iter": cfg.iteration_limit,
              "start": cfg.start if isinstance(cfg.start, str) else list(cfg.start),
              "force_gauge": args.force_gauge, "seed": args.seed}
    text = dump_document(result_document(result, source=source, digest=digest,
                                         config=config, wall_time=wall))
    stdout.write(text + "\n")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    return 0 if result.converged else EXIT_NOT_CONVERGED


def cmd_sample(args, stdout):
    theta = _floats(args.theta, 9, "--theta").reshape(3, 3)
    if args.n < 0:
        raise InputError("-n must be non-negative")
    samples = fisher_sample(theta, args.seed, args.n)
    write_dataset(samples, args.format, stdout)
    return 0


def cmd_eval(args, stdout):
    x = _floats(args.x, 3, "--x")
    g = _floats(args.g, 3, "--g") if args.g else None
    if args.what in ("loglik", "grad") and g is None:
        raise InputError(f"--what {args.what} needs --g")
    if args.method == "hgm":
        if args.what == "C":
            values = engine.eval_C(x)
        else:
            state = engine.eval_logC(x)
            log_c, u = state.log_c, state.u
    else:
        if args.what == "C":
            values = oracle.C_quad(x)
        else:
            shift, scaled = oracle.C_quad_scaled(x)
            log_c, u = shift + float(np.log(scaled[0])), scaled[1:] / scaled[0]
    if args.what == "logC":
        values = [log_c, *u]
    elif args.what == "loglik":
        values = [float(x @ g) - log_c]
    elif args.what == "grad":
        values = g - u
    stdout.write(",".join(repr(float(v)) for v in values) + "\n")
    return 0


def cmd_check(args, stdout):
    if args.trials == 0:
        warnings.warn("--trials 0: nothing checked, reporting a vacuous pass")
    results = checks.run(args.suite, args.trials, args.seed)
    for r in results:
        stdout.write(r.line() + "\n")
    ok = all(r.passed for r in results)
    stdout.write(("all checks passed" if ok else "some checks FAILED") + "\n")
    return 0 if ok else EXIT_CHECK_FAILED


def cmd_profile(args, stdout):
    theta = _floats(args.theta, 9, "--theta").reshape(3, 3)
    if args.dataset:
        with open(args.dataset) as fh:
            samples = read_dataset(fh.read(), args.format, args.project)
    else:
        samples = fisher_sample(theta, args.seed, args.total)
    if args.sweep <= 0:
        raise InputError("--sweep must be positive")
    cfg = mle.OptimConfig(method=args.method)
    stdout.write("n,fd,lr\n")
    for n in range(args.sweep, len(samples) + 1, args.sweep):
        result = mle.fit(samples[:n], cfg)
        fd = float(np.linalg.norm(result.theta_hat - theta))
        lr = mle.likelihood_ratio(theta, result)
        stdout.write(f"{n},{fd!r},{lr!r}\n")
    return 0


# ---------------------------------------------------------------- entry point

def build_parser():
    parser = argparse.ArgumentParser(prog="holofisher",
                                     description="Fisher-model MLE on SO(3) by the holonomic gradient method")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def dataset_flags(p):
        p.add_argument("--format", choices=sorted(FORMATS.values()),
                       help="input format (default: inferred from column count)")
        p.add_argument("--project", action="store_true",
                       help="project matrix rows onto SO(3) instead of rejecting them")

    p = sub.add_parser("fit", help="maximum likelihood fit")
    p.add_argument("input", nargs="?", help="dataset file")
    p.add_argument("--mean", help="sample mean, 9 comma-separated values row-major")
    p.add_argument("--method", choices=mle.METHODS, default="newton")
    p.add_argument("--gamma", type=float, default=1e-2, help="HGA learning rate")
    p.add_argument("--delta", type=float, default=1e-8, help="gradient sup-norm stop threshold")
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--start", help="explicit start x1,x2,x3")
    p.add_argument("--multistart", action="store_true", help="start once in each of the 24 chambers")
    p.add_argument("--force-gauge", action="store_true", help="fit even when the mean is nearly a rotation")
    p.add_argument("--seed", type=int, default=0,
                   help="recorded in the result document; fitting itself is deterministic")
    p.add_argument("--out", help="also write the result document here")
    dataset_flags(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("sample", help="draw from the Fisher distribution")
    p.add_argument("--theta", required=True, help="parameter, 9 values row-major")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["matrix_csv", "quaternion_csv"], default="matrix_csv")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("eval", help="evaluate the normalizing constant and friends")
    p.add_argument("--x", required=True, help="x1,x2,x3")
    p.add_argument("--what", choices=["C", "logC", "loglik", "grad"], default="C")
    p.add_argument("--g", help="g1,g2,g3 (loglik, grad)")
    p.add_argument("--method", choices=["hgm", "quadrature"], default="hgm")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("check", help="run randomized numerical self-checks")
    p.add_argument("--suite", choices=[*checks.SUITES, "all"], default="all")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("profile", help="Frobenius distance and likelihood ratio vs sample size")
    p.add_argument("--theta", required=True, help="true parameter, 9 values row-major")
    p.add_argument("--dataset", help="sample file (default: draw --total samples from --theta)")
    p.add_argument("--total", type=int, default=10000)
    p.add_argument("--sweep", type=int, required=True, help="sample-size step")
    p.add_argument("--method", choices=mle.METHODS, default="newton")
    p.add_argument("--seed", type=int, default=0)
    dataset_flags(p)
    p.set_defaults(func=cmd_profile)
    return parser


VECTOR_OPTIONS = ("--mean", "--theta", "--x", "--g", "--start")


def _join_vector_args(argv):
    """Glue ``--theta -1,2,...`` into ``--theta=-1,2,...``.

    argparse would otherwise read a leading minus sign as a new option.
    """
    out = []
    i = 0
    while i < len(argv):
        arg = argv[i]
        if arg in VECTOR_OPTIONS and i + 1 < len(argv) and argv[i + 1].startswith("-") \
                and argv[i + 1][1:2] in set("0123456789."):
            out.append(f"{arg}={argv[i + 1]}")
            i += 2
            continue
        out.append(arg)
        i += 1
    return out


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"warning: {message}", file=sys.stderr)


def main(argv=None, stdout=None):
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(_join_vector_args(sys.argv[1:] if argv is None else argv))
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_PARSE
    previous = warnings.showwarning
    warnings.showwarning = _show_warning
    try:
        return args.func(args, stdout)
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ConcentrationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONCENTRATION
    finally:
        warnings.showwarning = previous


if __name__ == "__main__":
    sys.exit(main())
