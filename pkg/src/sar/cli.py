"""Command-line front end: ``sar <command> [--key value ...]``.

Exit codes: 0 no failures, 1 some check failed, 2 invalid configuration,
3 numerical error.
"""

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from . import certify, icl, instance, solver
from .gradients import gradcheck_sample
from .losses import LOSS_KINDS, parse_kind
from .parallel import pmap, worker_count
from .report import make_sink, summarize_records

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

COMMANDS = ("gen", "gradcheck", "certify-bounds", "certify-lipschitz", "icl", "solve", "all")


class ConfigError(ValueError):
    pass


def parse_range(text):
    """``"3"`` -> (3, 3); ``"2..5"`` -> (2, 5), inclusive."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            lo, hi = int(lo), int(hi)
        else:
            lo = hi = int(text)
    except ValueError:
        raise ConfigError(f"bad range {text!r}; expected an integer or a..b")
    if lo < 1 or hi < lo:
        raise ConfigError(f"range {text!r} is empty or non-positive")
    return lo, hi


def parse_kinds(text):
    if text.strip().lower() == "all":
        return LOSS_KINDS
    try:
        return tuple(parse_kind(t) for t in text.split(",") if t.strip())
    except ValueError as exc:
        raise ConfigError(str(exc))


def build_parser():
    p = argparse.ArgumentParser(prog="sar", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, n="2..5", d="2..4", samples=100):
        sp.add_argument("--n", default=n, help="block count or range a..b")
        sp.add_argument("--d", default=d, help="dimension or range a..b")
        sp.add_argument("--R", type=float, default=4.5, help="radius")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--samples", type=int, default=samples)
        sp.add_argument("--out", default=None, help="output path (stdout if omitted)")
        sp.add_argument("--format", default="jsonl", choices=("jsonl", "csv"))

    g = sub.add_parser("gen", help="write one random instance")
    g.add_argument("--n", default="3")
    g.add_argument("--d", default="2")
    g.add_argument("--R", type=float, default=4.5)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--mode", default=instance.SPHERE, choices=instance.B_MODES)
    g.add_argument("--out", default=None)

    gc = sub.add_parser("gradcheck", help="analytic vs finite-difference gradients")
    common(gc, n="1..5", d="1..5")
    gc.add_argument("--kinds", default="all")

    cb = sub.add_parser("certify-bounds", help="forward norm-bound suite")
    common(cb, d="2..5", samples=1000)

    cl = sub.add_parser("certify-lipschitz", help="Lipschitz constant suite")
    common(cl, samples=1000)
    cl.add_argument("--kinds", default="all")

    ic = sub.add_parser("icl", help="in-context shift identities and bounds")
    common(ic, samples=500)
    ic.add_argument("--variants", default="all")

    so = sub.add_parser("solve", help="projected gradient descent on one instance")
    so.add_argument("--n", default="3")
    so.add_argument("--d", default="2")
    so.add_argument("--R", type=float, default=4.5)
    so.add_argument("--seed", type=int, default=0)
    so.add_argument("--kind", default="NORMALIZED")
    so.add_argument("--step", default="theory", choices=("theory", "empirical", "fixed"))
    so.add_argument("--eta", type=float, default=None)
    so.add_argument("--iters", type=int, default=1000)
    so.add_argument("--grad-tol", type=float, default=1e-10)
    so.add_argument("--instance", default=None, help="instance file written by gen")
    so.add_argument("--out", default=None)
    so.add_argument("--format", default="csv", choices=("jsonl", "csv"))

    al = sub.add_parser("all", help="every suite; --out names a directory")
    common(al, samples=100)
    return p


def _open_out(path):
    if path is None:
        return sys.stdout, False
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    return open(path, "w", newline=""), True


def _emit(path, fmt, records):
    fh, close = _open_out(path)
    try:
        sink = make_sink(fh, fmt)
        for r in records:
            sink.write(r)
    finally:
        if close:
            fh.close()


def _finish(path, summary, started):
    summary.wallTime = time.perf_counter() - started
    text = json.dumps(summary.to_dict(), indent=2)
    if path is not None:
        with open(path + ".summary.json", "w") as fh:
            fh.write(text + "\n")
    brief = {k: v for k, v in summary.to_dict().items() if k != "failures"}
    print(json.dumps(brief), file=sys.stderr)
    for f in summary.failures[:5]:
        print("FAILED " + json.dumps(f), file=sys.stderr)
    return EXIT_OK if summary.failed == 0 else EXIT_FAIL


def _validate(args):
    if getattr(args, "samples", 1) < 1:
        raise ConfigError("--samples must be at least 1")
    if not args.R > 0 or not math.isfinite(args.R):
        raise ConfigError("--R must be positive")
    if args.R > instance.R_MAX:
        raise ConfigError(f"--R must not exceed {instance.R_MAX}")
    worker_count()


def run_gen(args):
    n, n_hi = parse_range(args.n)
    d, d_hi = parse_range(args.d)
    if n != n_hi or d != d_hi:
        raise ConfigError("gen takes single values for --n and --d")
    inst = instance.generate_instance(n, d, args.R, args.seed, args.mode)
    if args.out is None:
        sys.stdout.write(instance.format_instance(inst))
    else:
        instance.write_instance(inst, args.out)
    return EXIT_OK


def run_gradcheck(args, out=None):
    started = time.perf_counter()
    kinds = parse_kinds(args.kinds)
    nr, dr = parse_range(args.n), parse_range(args.d)
    per = pmap(lambda k: gradcheck_sample(args.seed, k, kinds, args.R, nr, dr),
               range(args.samples))
    records = [r for rs, _ in per for r in rs]
    _emit(out or args.out, args.format, records)
    s = summarize_records(records)
    s.maxGradRelErr = max(w for _, w in per)
    return _finish(out or args.out, s, started)


def run_bounds(args, out=None):
    started = time.perf_counter()
    recs = certify.certify_bounds(args.samples, args.seed, args.R,
                                  parse_range(args.n), parse_range(args.d))
    _emit(out or args.out, args.format, recs)
    return _finish(out or args.out, summarize_records(recs), started)


def run_lipschitz(args, out=None):
    started = time.perf_counter()
    kinds = parse_kinds(getattr(args, "kinds", "all"))
    recs = certify.certify_lipschitz(args.samples, args.seed, args.R,
                                     parse_range(args.n), parse_range(args.d), kinds)
    _emit(out or args.out, args.format, recs)
    return _finish(out or args.out, summarize_records(recs, certify.INFORMATIONAL), started)


def run_icl(args, out=None):
    started = time.perf_counter()
    raw = getattr(args, "variants", "all")
    if raw.strip().lower() == "all":
        variants = icl.VARIANTS
    else:
        variants = tuple(v.strip().upper() for v in raw.split(","))
        bad = [v for v in variants if v not in icl.VARIANTS]
        if bad:
            raise ConfigError(f"unknown variants {bad}")
    res = icl.certify_icl(args.samples, args.seed, args.R, variants,
                          parse_range(args.n), parse_range(args.d))
    _emit(out or args.out, args.format, res)
    return _finish(out or args.out, summarize_records(res), started)


_STEP = {"theory": solver.THEORY, "empirical": solver.EMPIRICAL, "fixed": solver.FIXED}


def run_solve(args, out=None):
    started = time.perf_counter()
    kind = parse_kinds(args.kind)
    if len(kind) != 1:
        raise ConfigError("solve takes exactly one --kind")
    if args.step == "fixed" and (args.eta is None or not args.eta > 0):
        raise ConfigError("--step fixed needs a positive --eta")
    if args.instance:
        inst = instance.read_instance(args.instance)
    else:
        n, _ = parse_range(args.n)
        d, _ = parse_range(args.d)
        inst = instance.generate_instance(n, d, args.R, args.seed)
    sysv = instance.vectorize(inst)
    rng = instance.stream(args.seed, 1)
    x0 = solver.random_start(sysv, rng)
    tr = solver.gd_minimize(sysv, kind[0], x0, maxIters=args.iters, gradTol=args.grad_tol,
                            stepMode=_STEP[args.step], eta=args.eta, rng=rng)
    rows = [{"iter": i, "loss": l, "gradNorm": g} for i, l, g in tr.rows()]
    _emit(out or args.out, args.format, rows)
    inc = int(np.sum(np.diff(tr.losses) > 0))
    print(json.dumps({"kind": tr.kind, "stepSize": tr.stepSize, "stopped": tr.stopped,
                      "iterations": len(tr.losses) - 1, "lossIncreases": inc,
                      "wallTime": time.perf_counter() - started}), file=sys.stderr)
    return EXIT_OK


def run_all(args):
    root = args.out or "sar-out"
    os.makedirs(root, exist_ok=True)
    codes = [
        run_gradcheck(_with(args, kinds="all"), os.path.join(root, "gradcheck.jsonl")),
        run_bounds(args, os.path.join(root, "bounds.jsonl")),
        run_lipschitz(_with(args, kinds="all"), os.path.join(root, "lipschitz.jsonl")),
        run_icl(_with(args, variants="all"), os.path.join(root, "icl.jsonl")),
    ]
    return max(codes)


def _with(args, **kw):
    ns = argparse.Namespace(**vars(args))
    for k, v in kw.items():
        setattr(ns, k, v)
    return ns


_RUNNERS = {
    "gen": run_gen,
    "gradcheck": run_gradcheck,
    "certify-bounds": run_bounds,
    "certify-lipschitz": run_lipschitz,
    "icl": run_icl,
    "solve": run_solve,
    "all": run_all,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else EXIT_OK
    try:
        _validate(args)
        return _RUNNERS[args.command](args)
    except (ArithmeticError, instance.SamplerError, icl.PreconditionError) as exc:
        detail = {"error": type(exc).__name__, "message": str(exc)}
        it = getattr(exc, "iterate", None)
        if it is not None:
            detail["iterate"] = [float(v) for v in it]
        print("sar: numerical error: " + json.dumps(detail), file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"sar: invalid configuration: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
