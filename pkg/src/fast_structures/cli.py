"""Command-line front end: validate, check, report, bench, run.

Exit status: 0 success, 1 a check failed, 2 usage or parameter error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import bilinear as bl
from . import dft_pointwise as dft
from . import harness
from . import io as vio
from . import ntt_pointwise as ntt
from . import parallel_fir as fir
from . import poly_modmul as pm
from .core import ComplexRing, IntegerRing, ModRing, OpCounter, is_power_of_two

log = logging.getLogger("fast_structures")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _sizes(text):
    """``8``, ``8,16,32`` or ``8:4096`` (all powers of two in the range)."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if ":" in part:
            lo, hi = (int(v) for v in part.split(":"))
            if not (is_power_of_two(lo) and is_power_of_two(hi)) or lo > hi:
                raise argparse.ArgumentTypeError(f"bad power-of-two range {part!r}")
            while lo <= hi:
                out.append(lo)
                lo *= 2
        else:
            out.append(int(part))
    return out


def _load_structure(spec):
    path = Path(spec)
    if path.suffix == ".json" or path.exists():
        try:
            return bl.BilinearAlgorithm.from_json(path.read_text())
        except OSError as exc:
            raise UsageError(f"cannot read {spec}: {exc}") from None
        except bl.InvalidAlgorithmError as exc:
            raise UsageError(str(exc)) from None
    try:
        return bl.builtin(spec)
    except (KeyError, ValueError) as exc:
        raise UsageError(f"unknown structure {spec!r}") from exc


def _emit(args, payload, text):
    if getattr(args, "no_timing", False):
        payload = _strip_timing(payload)
    blob = json.dumps(payload, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(blob + "\n")
    print(blob if args.json else text)


def _strip_timing(obj):
    if isinstance(obj, dict):
        return {k: _strip_timing(v) for k, v in obj.items() if not k.endswith("_s")}
    if isinstance(obj, list):
        return [_strip_timing(v) for v in obj]
    return obj


def _matrix_text(name, m):
    rows = "\n".join("  [" + " ".join(f"{int(v):>2d}" for v in row) + "]" for row in m)
    return f"{name} ({m.shape[0]}x{m.shape[1]}):\n{rows}"


# ---------------------------------------------------------------------------
# commands


def cmd_validate(args):
    alg = _load_structure(args.structure)
    ok = bl.validate(alg)
    payload = dict(alg.to_dict(), schema=harness.SCHEMA_VERSION, command="validate", valid=ok)
    text = "\n".join([
        f"structure {alg.name or args.structure}: L={alg.L} M={alg.M} K={alg.K}",
        _matrix_text("pre_h", alg.pre_h),
        _matrix_text("pre_x", alg.pre_x),
        _matrix_text("post", alg.post),
        "valid" if ok else "INVALID",
    ])
    _emit(args, payload, text)
    return EXIT_OK if ok else EXIT_FAIL


def _check_kwargs(args):
    d = args.domain
    if d == "conv":
        return dict(structure=args.structure or "karatsuba2", trials=args.trials, seed=args.seed,
                    exhaustive=args.exhaustive)
    if d == "fir":
        if args.exhaustive:
            raise UsageError("--exhaustive is not available for fir")
        return dict(L=args.L, N=args.N or 6, trials=args.trials, seed=args.seed,
                    samples=args.samples, structure=args.structure)
    if d == "polymod":
        return dict(n=args.n or 16, q=args.q or 257, trials=args.trials, seed=args.seed,
                    threshold=args.threshold, exhaustive=args.exhaustive)
    if d == "dft":
        if args.exhaustive:
            raise UsageError("--exhaustive is not available for dft")
        return dict(N=args.N or 8, parallel=args.parallel, trials=args.trials, seed=args.seed)
    return dict(n=args.n or 8, q=args.q or 17, trials=args.trials, seed=args.seed,
                exhaustive=args.exhaustive)


def cmd_check(args):
    out = harness.run_check(args.domain, **_check_kwargs(args))
    lines = []
    for row in out["trials"]:
        extra = " ".join(f"{k}={v}" for k, v in row.items() if k not in ("index", "pass"))
        lines.append(f"trial {row['index']:>5d}: {'pass' if row['pass'] else 'FAIL'} {extra}")
    lines.append(f"{out['domain']}: {out['passed']} passed, {out['failed']} failed "
                 f"({out['elapsed_s']:.3f} s)")
    _emit(args, out, "\n".join(lines))
    return EXIT_OK if out["ok"] else EXIT_FAIL


def cmd_report(args):
    d = args.domain
    if d == "conv":
        recs = harness.run_report("conv", structure=args.structure or "karatsuba2")
    elif d == "fir":
        recs = harness.run_report("fir", args.N_list or [6], parallel=args.parallel,
                                  structure=args.structure)
    elif d == "polymod":
        recs = harness.run_report("polymod", args.n_list or [16], q=args.q or 3329,
                                  threshold=args.threshold)
    elif d == "dft":
        recs = harness.run_report("dft", args.N_list or [8], parallel=args.parallel)
    else:
        recs = harness.run_report("ntt", args.n_list or [256], q=args.q or 3329)
    rows = [r.to_dict() for r in recs]
    payload = {"schema": harness.SCHEMA_VERSION, "command": "report", "domain": d, "records": rows}
    lines = [f"{'params':<40} {'mults':>8} {'formula':>8} {'direct':>8} {'adds':>8} "
             f"{'ref adds':>8}  checks"]
    for r in rows:
        params = ",".join(f"{k}={v}" for k, v in r["params"].items())
        checks = " ".join(f"{k}={'ok' if v else 'NO'}" for k, v in r["checks"].items())
        lines.append(f"{params:<40} {r['mults']:>8} {str(r.get('formula_mults', '-')):>8} "
                     f"{str(r['direct_mults'] if r['direct_mults'] is not None else '-'):>8} "
                     f"{r['adds']:>8} {str(r.get('formula_adds', '-')):>8}  {checks}")
        lines.extend(f"    note: {n}" for n in r["notes"])
    _emit(args, payload, "\n".join(lines))
    gates = [v for r in rows for k, v in r["checks"].items() if k != "adds_match_reference"]
    return EXIT_OK if all(gates) else EXIT_FAIL


def cmd_bench(args):
    size = args.n or args.N or {"conv": 4, "fir": 16, "polymod": 256, "ntt": 256, "dft": 1024}[
        args.domain]
    out = harness.run_bench(args.domain, size, repeats=args.repeats, q=args.q or 3329,
                            seed=args.seed if args.seed is not None else 0,
                            parallel=args.parallel)
    text = (f"{args.domain} size={size}: fast {out['fast_median_s'] * 1e3:.3f} ms, "
            f"direct {out['direct_median_s'] * 1e3:.3f} ms (median of {args.repeats})")
    _emit(args, out, text)
    return EXIT_OK


def cmd_run(args):
    """Apply one structure to operands read from files."""
    d = args.domain
    if not args.coeffs or not args.inp:
        raise UsageError("run needs --coeffs and --in")
    ctx = OpCounter()
    if d in ("conv", "fir"):
        ring = ModRing(args.q) if args.q else IntegerRing()
        h = vio.read_vector(args.coeffs, ring)
        x = vio.read_vector(args.inp, ring)
        if d == "conv":
            alg = _load_structure(args.structure or "karatsuba2")
            y = bl.apply_convolution(ctx, alg, h, x, ring)
        else:
            alg = harness.structure_for(args.parallel, args.structure)
            st = fir.derive_parallel_filter(alg, fir.FirFilter(h, ring))
            y = fir.run_stream(ctx, st, x)
    elif d == "dft":
        ring = ComplexRing()
        h = vio.read_vector(args.coeffs, ring)
        x = vio.read_vector(args.inp, ring)
        fn = {1: dft.pointwise_direct, 2: dft.pointwise_fast2, 4: dft.pointwise_fast4}
        y = fn[args.parallel](ctx, h, x)
    else:
        if not args.q:
            raise UsageError("--q is required")
        ring = ModRing(args.q)
        a = pm.NegacyclicElement(vio.read_vector(args.coeffs, ring), ring)
        b = pm.NegacyclicElement(vio.read_vector(args.inp, ring), ring)
        if d == "polymod":
            if args.threshold:
                y = pm.negacyclic_mul_recursive(ctx, a, b, args.threshold).coeffs
            else:
                y = pm.negacyclic_mul_fast2(ctx, a, b).coeffs
        else:
            plan = ntt.make_ntt_context(args.q, a.n)
            y = ntt.ntt_pointwise_fast2(ctx, plan, a, b).coeffs
    if args.out:
        vio.write_vector(args.out, np.asarray(y), ring)
    else:
        sys.stdout.write(vio.format_vector(np.asarray(y), "csv", ring))
    print(json.dumps({"mults": ctx.mults, "adds": ctx.adds}), file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="fast-structures", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--json", action="store_true", help="print JSON instead of text")
        sp.add_argument("--out", help="also write the JSON document to this file")
        sp.add_argument("--no-timing", action="store_true", help="drop wall-clock fields")

    sp = sub.add_parser("validate", help="check a bilinear structure")
    sp.add_argument("--structure", required=True, help="karatsuba2, iter:k or a JSON file")
    common(sp)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("check", help="seeded or exhaustive oracle-equivalence trials")
    sp.add_argument("--domain", required=True, choices=harness.DOMAINS)
    sp.add_argument("--structure")
    sp.add_argument("--L", type=int, default=2)
    sp.add_argument("--N", type=int)
    sp.add_argument("--n", type=int)
    sp.add_argument("--q", type=int)
    sp.add_argument("--parallel", type=int, default=2)
    sp.add_argument("--threshold", type=int)
    sp.add_argument("--samples", type=int, default=2048)
    sp.add_argument("--trials", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--exhaustive", action="store_true")
    common(sp)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("report", help="operation counts against closed forms")
    sp.add_argument("--domain", required=True, choices=harness.DOMAINS)
    sp.add_argument("--structure")
    sp.add_argument("--N", dest="N_list", type=_sizes)
    sp.add_argument("--n", dest="n_list", type=_sizes)
    sp.add_argument("--q", type=int)
    sp.add_argument("--parallel", type=int, default=2)
    sp.add_argument("--threshold", type=int)
    common(sp)
    sp.set_defaults(func=cmd_report)

    sp = sub.add_parser("bench", help="median wall time, fast vs direct")
    sp.add_argument("--domain", required=True)
    sp.add_argument("--N", type=int)
    sp.add_argument("--n", type=int)
    sp.add_argument("--q", type=int)
    sp.add_argument("--parallel", type=int, default=2)
    sp.add_argument("--repeats", type=int, default=10)
    sp.add_argument("--seed", type=int)
    common(sp)
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("run", help="apply a fast structure to vectors from files")
    sp.add_argument("--domain", required=True, choices=harness.DOMAINS)
    sp.add_argument("--coeffs", help="h (conv/fir/dft) or a (polymod/ntt)")
    sp.add_argument("--in", dest="inp", help="x (conv/fir/dft) or b (polymod/ntt)")
    sp.add_argument("--out")
    sp.add_argument("--structure")
    sp.add_argument("--q", type=int)
    sp.add_argument("--parallel", type=int, default=2)
    sp.add_argument("--threshold", type=int)
    sp.set_defaults(func=cmd_run)
    return p


def _setup_logging():
    level = os.environ.get("FAST_STRUCTURES_LOG")
    if level:
        logging.basicConfig(level=level.upper(), stream=sys.stderr,
                            format="%(levelname)s %(name)s: %(message)s")


def main(argv=None):
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    if args.command == "bench" and args.domain not in harness.DOMAINS:
        print(f"error: unknown domain {args.domain!r}", file=sys.stderr)
        return EXIT_USAGE
    log.debug("arguments: %s", vars(args))
    try:
        return args.func(args)
    except (UsageError, harness.ParameterError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
