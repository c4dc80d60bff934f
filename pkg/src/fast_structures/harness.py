"""Oracle-equivalence trials, count reports and timings behind the CLI.

Every function returns plain JSON-ready dicts. Wall-clock fields are named
``elapsed_s`` / ``*_s``; everything else is a pure function of the arguments.
"""

from __future__ import annotations

import itertools
import statistics
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import bilinear as bl
from . import dft_pointwise as dft
from . import ntt_pointwise as ntt
from . import parallel_fir as fir
from . import poly_modmul as pm
from .core import (
    ComplexRing, IntegerRing, ModRing, OpCounter, SeededRng, is_power_of_two, max_rel_error,
    random_vector,
)

SCHEMA_VERSION = 1
DOMAINS = ("conv", "fir", "polymod", "dft", "ntt")
DFT_TOL = 1e-9
EXHAUSTIVE_LIMIT = 2_000_000


class ParameterError(ValueError):
    pass


@dataclass
class ReportRecord:
    domain: str
    params: dict
    mults: int
    adds: int
    direct_mults: int | None = None
    formula_mults: int | None = None
    formula_adds: int | None = None
    checks: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    elapsed_s: float | None = None
    schema: int = SCHEMA_VERSION

    def to_dict(self):
        d = asdict(self)
        if self.formula_mults is None:
            d.pop("formula_mults")
        if self.formula_adds is None:
            d.pop("formula_adds")
        return d


def structure_for(L=None, name=None):
    if name:
        return bl.builtin(name)
    if L is None or L < 1 or not is_power_of_two(L):
        raise ParameterError(f"L must be a power of two, got {L}")
    if L == 1:
        return bl.schoolbook(1)
    return bl.karatsuba_iterated(L.bit_length() - 1)


def _need(cond, msg):
    if not cond:
        raise ParameterError(msg)


# ---------------------------------------------------------------------------
# oracle trials


def _trial_inputs(seed, trials, draw):
    """Yield ``(index, draw(rng))`` for each seeded trial."""
    _need(seed is not None, "randomized checks need an explicit --seed")
    _need(trials is not None and trials >= 1, "--trials must be >= 1")
    rng = SeededRng(seed)
    for i in range(trials):
        yield i, draw(rng)


def _conv_columns(ctx, ring, alg, H, X):
    """``alg`` applied to every row of H, X at once; returns a (rows, 2L-1) array."""
    hp = bl.apply_pre(ctx, ring, alg, [ring.array(H[:, i]) for i in range(alg.L)], "h")
    xp = bl.apply_pre(ctx, ring, alg, [ring.array(X[:, i]) for i in range(alg.L)], "x")
    w = [ring.mul(ctx, u, v) for u, v in zip(hp, xp)]
    return np.stack(bl.apply_post(ctx, ring, alg, w), axis=-1)


def _direct_columns(H, X):
    L = H.shape[1]
    out = np.zeros((len(H), 2 * L - 1), dtype=object)
    for i in range(L):
        for j in range(L):
            out[:, i + j] += H[:, i] * X[:, j]
    return out


def check_conv(structure="karatsuba2", trials=None, seed=None, exhaustive=False, grid=2):
    alg = bl.builtin(structure)
    _need(bl.validate(alg), f"{structure} is not a valid convolution algorithm")
    L = alg.L
    ring = IntegerRing()
    params = {"structure": structure, "L": L, "M": alg.M}
    if exhaustive:
        vals = range(-grid, grid + 1)
        _need(len(vals) ** (2 * L) <= EXHAUSTIVE_LIMIT, "exhaustive grid too large")
        G = np.array(list(itertools.product(vals, repeat=2 * L)), dtype=object)
        c = OpCounter()
        ok = np.all(_conv_columns(c, ring, alg, G[:, :L], G[:, L:]) == _direct_columns(
            G[:, :L], G[:, L:]), axis=-1)
        rows = [{"index": 0, "pairs": int(len(ok)), "pass": bool(ok.all()),
                 "mismatches": int((~ok).sum()), "mults": c.mults // len(ok)}]
        return _summary("conv", params, rows, True)
    rows = []
    for i, (h, x) in _trial_inputs(seed, trials,
                                   lambda r: (random_vector(r, ring, L), random_vector(r, ring, L))):
        c = OpCounter()
        got = bl.apply_convolution(c, alg, h, x, ring)
        ref = bl.direct_convolution(OpCounter(), h, x, ring)
        rows.append({"index": i, "pass": bool(np.array_equal(got, ref)), "mults": c.mults})
    return _summary("conv", params, rows, False)


def check_fir(L=2, N=6, trials=None, seed=None, samples=2048, structure=None):
    alg = structure_for(L, structure)
    _need(N >= 1, "N must be >= 1")
    ring = IntegerRing()
    _need(seed is not None, "randomized checks need an explicit --seed")
    _need(trials is not None and trials >= 1, "--trials must be >= 1")
    rng = SeededRng(seed)
    rows = []
    for i in range(trials):
        filt = fir.FirFilter(random_vector(rng, ring, N), ring)
        x = random_vector(rng, ring, samples)
        state = fir.derive_parallel_filter(alg, filt)
        c = OpCounter()
        y = fir.run_stream(c, state, x)
        ref = fir.serial_fir(OpCounter(), filt, x, n_out=len(y))
        blocks = len(y) // alg.L
        rows.append({"index": i, "pass": bool(np.array_equal(y, ref)),
                     "mults_per_block": c.mults // blocks if blocks else 0})
    padded = N + (-N % alg.L)
    return _summary("fir", {"L": alg.L, "N": N, "structure": alg.name, "samples": samples,
                            "expected_mults_per_block": alg.M * padded // alg.L}, rows, False)


def _batched_exhaustive(q, n):
    """All (a, b) pairs over Z_q^n as two (q^(2n), n) arrays."""
    grid = np.array(list(itertools.product(range(q), repeat=n)), dtype=np.int64)
    k = len(grid)
    return np.repeat(grid, k, axis=0), np.tile(grid, (k, 1))


def _seeded_batch(seed, trials, ring, n):
    """``trials`` operand pairs drawn in one go: all a rows, then all b rows."""
    _need(seed is not None, "randomized checks need an explicit --seed")
    _need(trials is not None and trials >= 1, "--trials must be >= 1")
    rng = SeededRng(seed)
    return random_vector(rng, ring, n, (trials,)), random_vector(rng, ring, n, (trials,))


def _rows_equal(got, ref):
    return np.all(got == ref, axis=-1)


def check_polymod(n=16, q=257, trials=None, seed=None, threshold=None, exhaustive=False):
    _need(is_power_of_two(n) and n >= 4, "n must be a power of two >= 4")
    try:
        ring = ModRing(q)
    except ValueError as exc:
        raise ParameterError(str(exc)) from None
    method = "fast2" if threshold is None else f"recursive:{threshold}"

    def fast(c, a, b):
        if threshold is None:
            return pm.negacyclic_mul_fast2(c, a, b)
        return pm.negacyclic_mul_recursive(c, a, b, threshold)

    params = {"n": n, "q": q, "method": method}
    if exhaustive:
        _need(q ** (2 * n) <= EXHAUSTIVE_LIMIT, "exhaustive space too large")
        A, B = _batched_exhaustive(q, n)
    else:
        A, B = _seeded_batch(seed, trials, ring, n)
    a, b = pm.NegacyclicElement(A, ring), pm.NegacyclicElement(B, ring)
    c = OpCounter()
    ok = _rows_equal(fast(c, a, b).coeffs, pm.negacyclic_mul_direct(OpCounter(), a, b).coeffs)
    if exhaustive:
        rows = [{"index": 0, "pairs": int(len(ok)), "pass": bool(ok.all()),
                 "mismatches": int((~ok).sum())}]
    else:
        per = c.mults // len(ok)
        rows = [{"index": i, "pass": bool(v), "mults": per} for i, v in enumerate(ok)]
    return _summary("polymod", params, rows, exhaustive)


def check_dft(N=8, parallel=2, trials=None, seed=None):
    fns = {1: dft.pointwise_direct, 2: dft.pointwise_fast2, 4: dft.pointwise_fast4}
    _need(parallel in fns, "--parallel must be 1, 2 or 4")
    _need(is_power_of_two(N) and N >= {1: 1, 2: 4, 4: 16}[parallel], f"invalid N={N}")
    H, X = _seeded_batch(seed, trials, ComplexRing(), N)
    c = OpCounter()
    Y = fns[parallel](c, H, X)
    ref = dft.circular_convolution(OpCounter(), H, X)
    rows = []
    for i in range(len(H)):
        err = max_rel_error(Y[i], ref[i])
        rows.append({"index": i, "pass": err <= DFT_TOL, "max_rel_error": float(f"{err:.3e}"),
                     "mults": c.mults // len(H), "non_fft_adds": dft.non_fft_adds(c) // len(H)})
    out = _summary("dft", {"N": N, "parallel": parallel, "tolerance": DFT_TOL}, rows, False)
    out["max_rel_error"] = max(r["max_rel_error"] for r in rows)
    return out


def check_ntt(n=8, q=17, trials=None, seed=None, exhaustive=False):
    try:
        plan = ntt.make_ntt_context(q, n)
    except ValueError as exc:
        raise ParameterError(str(exc)) from None
    ring = plan.ring
    params = {"n": n, "q": q, "psi": plan.psi}
    if exhaustive:
        _need(q ** (2 * n) <= EXHAUSTIVE_LIMIT, "exhaustive space too large")
        A, B = _batched_exhaustive(q, n)
    else:
        A, B = _seeded_batch(seed, trials, ring, n)
    a, b = pm.NegacyclicElement(A, ring), pm.NegacyclicElement(B, ring)
    ref = pm.negacyclic_mul_direct(OpCounter(), a, b).coeffs
    c1, c2 = OpCounter(), OpCounter()
    ok1 = _rows_equal(ntt.ntt_pointwise_direct(c1, plan, a, b).coeffs, ref)
    ok2 = _rows_equal(ntt.ntt_pointwise_fast2(c2, plan, a, b).coeffs, ref)
    if exhaustive:
        rows = [{"index": i, "method": name, "pairs": int(len(ok)), "pass": bool(ok.all()),
                 "mismatches": int((~ok).sum())}
                for i, (name, ok) in enumerate((("direct", ok1), ("fast2", ok2)))]
        return _summary("ntt", params, rows, True)
    k = len(ok1)
    p1 = c1.region(ntt.POINTWISE_SCOPE).mults // k
    p2 = c2.region(ntt.POINTWISE_SCOPE).mults // k
    rows = [{"index": i, "pass": bool(ok1[i] and ok2[i]),
             "pointwise_mults_direct": p1, "pointwise_mults_fast2": p2} for i in range(k)]
    return _summary("ntt", params, rows, False)


def _summary(domain, params, rows, exhaustive):
    passed = sum(1 for r in rows if r["pass"])
    return {
        "schema": SCHEMA_VERSION,
        "command": "check",
        "domain": domain,
        "params": params,
        "exhaustive": exhaustive,
        "trials": rows,
        "passed": passed,
        "failed": len(rows) - passed,
        "ok": passed == len(rows) and bool(rows),
    }


def run_check(domain, **kw):
    fn = {"conv": check_conv, "fir": check_fir, "polymod": check_polymod,
          "dft": check_dft, "ntt": check_ntt}.get(domain)
    _need(fn is not None, f"unknown domain {domain!r}")
    t0 = time.perf_counter()
    out = fn(**kw)
    out["elapsed_s"] = round(time.perf_counter() - t0, 6)
    return out


# ---------------------------------------------------------------------------
# operation-count reports
#
# Counts do not depend on the operand values; reports use fixed seed-0 inputs.


def _timed(fn):
    t0 = time.perf_counter()
    rec = fn()
    rec.elapsed_s = round(time.perf_counter() - t0, 6)
    return rec


def report_conv(structure="karatsuba2"):
    alg = bl.builtin(structure)
    ring = IntegerRing()
    rng = SeededRng(0)
    h, x = random_vector(rng, ring, alg.L), random_vector(rng, ring, alg.L)
    c, cd = OpCounter(), OpCounter()
    got = bl.apply_convolution(c, alg, h, x, ring)
    ref = bl.direct_convolution(cd, h, x, ring)
    rec = ReportRecord("conv", {"structure": structure, "L": alg.L, "M": alg.M},
                       c.mults, c.adds, direct_mults=cd.mults,
                       checks={"valid": bl.validate(alg), "oracle": bool(np.array_equal(got, ref))})
    if alg.L == 2 and alg.M == 3:
        rec.formula_mults = 3
    return rec


def report_fir(N=6, parallel=2, structure=None, blocks=64):
    alg = structure_for(parallel, structure)
    ring = IntegerRing()
    rng = SeededRng(0)
    filt = fir.FirFilter(random_vector(rng, ring, N), ring)
    x = random_vector(rng, ring, blocks * alg.L)
    st = fir.derive_parallel_filter(alg, filt)
    c = OpCounter()
    y = fir.run_stream(c, st, x)
    cs = OpCounter()
    ref = fir.serial_fir(cs, filt, x, n_out=len(y))
    cd = OpCounter()
    fir.direct_2parallel(cd, filt, x)
    padded = st.N
    rec = ReportRecord(
        "fir", {"N": N, "L": alg.L, "structure": alg.name, "per": "block"},
        c.mults // blocks, c.adds // blocks,
        direct_mults=cs.mults // blocks,
        checks={"oracle": bool(np.array_equal(y, ref)),
                "mults_per_block": c.mults // blocks == alg.M * padded // alg.L},
    )
    if alg.L == 2 and alg.M == 3:
        rec.formula_mults = 3 * padded // 2
    if alg.L == 2:
        two_blocks = len(x) // 2
        rec.notes.append(f"direct 2-parallel: {cd.mults // two_blocks} mults per 2-output block")
    return rec


def report_polymod(n=16, q=3329, threshold=None):
    ring = ModRing(q)
    rng = SeededRng(0)
    a = pm.NegacyclicElement(random_vector(rng, ring, n), ring)
    b = pm.NegacyclicElement(random_vector(rng, ring, n), ring)
    c, cd = OpCounter(), OpCounter()
    if threshold is None:
        got = pm.negacyclic_mul_fast2(c, a, b)
        expected = 3 * (n // 2) ** 2
    else:
        got = pm.negacyclic_mul_recursive(c, a, b, threshold)
        expected = pm.recursive_mult_count(n, threshold)
    ref = pm.negacyclic_mul_direct(cd, a, b)
    return ReportRecord("polymod", {"n": n, "q": q, "threshold": threshold}, c.mults, c.adds,
                        direct_mults=cd.mults,
                        checks={"oracle": got == ref, "count": c.mults == expected})


def report_dft(N=8, parallel=2):
    fns = {1: (dft.pointwise_direct, dft.direct_mults, None),
           2: (dft.pointwise_fast2, dft.fast2_mults, dft.fast2_adds),
           4: (dft.pointwise_fast4, dft.fast4_mults, dft.fast4_adds_reference)}
    _need(parallel in fns, "--parallel must be 1, 2 or 4")
    fn, fm, fa = fns[parallel]
    ring = ComplexRing()
    rng = SeededRng(0)
    h, x = random_vector(rng, ring, N), random_vector(rng, ring, N)
    c = OpCounter()
    y = fn(c, h, x)
    err = max_rel_error(y, dft.circular_convolution(OpCounter(), h, x))
    adds = dft.non_fft_adds(c)
    rec = ReportRecord("dft", {"N": N, "parallel": parallel, "adds": "outside FFT"}, c.mults, adds,
                       direct_mults=dft.direct_mults(N), formula_mults=fm(N),
                       formula_adds=fa(N) if fa else None)
    rec.checks = {"oracle": err <= DFT_TOL, "mults_match": c.mults == fm(N)}
    if parallel == 2:
        rec.checks["adds_match"] = adds == fa(N)
    if parallel == 4:
        # the 4-parallel structure itself is not given, so adds are informational
        rec.checks["adds_match_reference"] = adds == fa(N)
        if adds != fa(N):
            rec.notes.append(f"measured non-FFT adds {adds} differ from reference 27N/4 = {fa(N)}")
        else:
            rec.notes.append("non-FFT adds: pre 10N/4 + post 14N/4 + wraparound 3N/4 = 27N/4")
    return rec


def report_ntt(n=256, q=3329):
    plan = ntt.make_ntt_context(q, n)
    ring = plan.ring
    rng = SeededRng(0)
    a = pm.NegacyclicElement(random_vector(rng, ring, n), ring)
    b = pm.NegacyclicElement(random_vector(rng, ring, n), ring)
    ref = pm.negacyclic_mul_direct(OpCounter(), a, b)
    c1, c2 = OpCounter(), OpCounter()
    ok1 = ntt.ntt_pointwise_direct(c1, plan, a, b) == ref
    ok2 = ntt.ntt_pointwise_fast2(c2, plan, a, b) == ref
    p1 = c1.region(ntt.POINTWISE_SCOPE)
    p2 = c2.region(ntt.POINTWISE_SCOPE)
    m = n // 2
    rec = ReportRecord("ntt", {"n": n, "q": q, "stage": "pointwise"}, p2.mults, p2.adds,
                       direct_mults=p1.mults,
                       checks={"oracle_direct": ok1, "oracle_fast2": ok2,
                               "fast2_vector_products": p2.mults == 4 * m,
                               "direct_vector_products": p1.mults == 5 * m})
    rec.notes.append(f"totals incl. transforms: direct {c1.mults}, fast2 {c2.mults}")
    return rec


def run_report(domain, sizes=None, **kw):
    """One record per size; ``sizes`` is a list of N (dft, fir) or n (polymod, ntt)."""
    _need(domain in DOMAINS, f"unknown domain {domain!r}")
    if domain == "conv":
        return [_timed(lambda: report_conv(**kw))]
    fn = {"fir": (report_fir, "N"), "polymod": (report_polymod, "n"),
          "dft": (report_dft, "N"), "ntt": (report_ntt, "n")}[domain]
    return [_timed(lambda s=s: fn[0](**{fn[1]: s}, **kw)) for s in sizes]


# ---------------------------------------------------------------------------
# timings


def _median_time(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def run_bench(domain, size, repeats=10, q=3329, seed=0, parallel=2):
    _need(domain in DOMAINS, f"unknown domain {domain!r}")
    _need(repeats >= 1, "--repeats must be >= 1")
    rng = SeededRng(seed)
    if domain == "conv":
        k = max(1, size.bit_length() - 1)
        alg = bl.karatsuba_iterated(k)
        ring = IntegerRing()
        h, x = random_vector(rng, ring, alg.L), random_vector(rng, ring, alg.L)
        fast = lambda: bl.apply_convolution(OpCounter(), alg, h, x, ring)
        direct = lambda: bl.direct_convolution(OpCounter(), h, x, ring)
    elif domain == "fir":
        ring = IntegerRing()
        alg = structure_for(parallel)
        filt = fir.FirFilter(random_vector(rng, ring, size), ring)
        x = random_vector(rng, ring, 1024)
        fast = lambda: fir.run_stream(OpCounter(), fir.derive_parallel_filter(alg, filt), x)
        direct = lambda: fir.serial_fir(OpCounter(), filt, x, n_out=len(x))
    elif domain in ("polymod", "ntt"):
        ring = ModRing(q)
        a = pm.NegacyclicElement(random_vector(rng, ring, size), ring)
        b = pm.NegacyclicElement(random_vector(rng, ring, size), ring)
        direct = lambda: pm.negacyclic_mul_direct(OpCounter(), a, b)
        if domain == "polymod":
            fast = lambda: pm.negacyclic_mul_fast2(OpCounter(), a, b)
        else:
            plan = ntt.make_ntt_context(q, size)
            fast = lambda: ntt.ntt_pointwise_fast2(OpCounter(), plan, a, b)
    else:
        ring = ComplexRing()
        h, x = random_vector(rng, ring, size), random_vector(rng, ring, size)
        fast = lambda: dft.pointwise_fast2(OpCounter(), h, x)
        direct = lambda: dft.pointwise_direct(OpCounter(), h, x)
    return {
        "schema": SCHEMA_VERSION,
        "command": "bench",
        "domain": domain,
        "params": {"size": size, "repeats": repeats, "seed": seed},
        "fast_median_s": _median_time(fast, repeats),
        "direct_median_s": _median_time(direct, repeats),
    }
