import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fast_structures.bilinear import apply_pre, karatsuba2
from fast_structures.core import IntegerRing, ModRing, OpCounter, SeededRng, random_vector
from fast_structures.parallel_fir import FirFilter, derive_parallel_filter
from fast_structures.poly_modmul import (
    NegacyclicElement, negacyclic_mul_direct, negacyclic_mul_fast2, negacyclic_mul_recursive,
    negacyclic_shift, parallel_mul, recursive_mult_count, schoolbook,
)
from fast_structures.skeleton import fast_parallel


def oracle(a, b, q):
    n = len(a)
    out = [0] * n
    for i in range(n):
        for j in range(n):
            k, sign = (i + j) % n, -1 if i + j >= n else 1
            out[k] += sign * int(a[i]) * int(b[j])
    return [v % q for v in out]


def elem(v, q):
    return NegacyclicElement(np.asarray(v), ModRing(q))


def test_golden():
    # (1+2x+3x^2+4x^3)(1+x^3) = -1 - x - x^2 + 5x^3 mod x^4+1
    got = negacyclic_mul_direct(OpCounter(), elem([1, 2, 3, 4], 17), elem([1, 0, 0, 1], 17))
    assert got.coeffs.tolist() == [16, 16, 16, 5]


def test_x_squared():
    x = elem([0, 1], 17)
    assert negacyclic_mul_direct(OpCounter(), x, x).coeffs.tolist() == [16, 0]


@pytest.mark.parametrize("mul", [negacyclic_mul_direct, negacyclic_mul_fast2,
                                 lambda c, a, b: negacyclic_mul_recursive(c, a, b, 2)])
def test_identity(mul):
    r = ModRing(257)
    b = NegacyclicElement(random_vector(SeededRng(2), r, 16), r)
    assert mul(OpCounter(), NegacyclicElement.one(r, 16), b) == b


def test_fast2_exhaustive_small_values():
    q, vals = 5, (0, 1, 4)
    for t in itertools.product(vals, repeat=8):
        a, b = elem(t[:4], q), elem(t[4:], q)
        assert negacyclic_mul_fast2(OpCounter(), a, b).coeffs.tolist() == oracle(t[:4], t[4:], q)


def test_counts():
    r = ModRing(17)
    a = NegacyclicElement(random_vector(SeededRng(1), r, 8), r)
    c_fast, c_direct = OpCounter(), OpCounter()
    negacyclic_mul_fast2(c_fast, a, a)
    negacyclic_mul_direct(c_direct, a, a)
    assert (c_fast.mults, c_direct.mults) == (48, 64)
    r = ModRing(257)
    a = NegacyclicElement(random_vector(SeededRng(4), r, 16), r)
    c = OpCounter()
    negacyclic_mul_recursive(c, a, a, threshold=2)
    assert c.mults == 108 == recursive_mult_count(16, 2)


@pytest.mark.parametrize("n,t", [(4, 1), (8, 1), (16, 4), (64, 2), (64, 8), (256, 16)])
def test_recursive_count_formula(n, t):
    r = ModRing(3329)
    rng = SeededRng(n + t)
    a, b = (NegacyclicElement(random_vector(rng, r, n), r) for _ in range(2))
    c = OpCounter()
    got = negacyclic_mul_recursive(c, a, b, threshold=t)
    k = (n // t).bit_length() - 1
    assert c.mults == 3**k * (n // 2**k) ** 2
    assert got.coeffs.tolist() == oracle(a.coeffs, b.coeffs, 3329)


def test_threshold_n_is_direct():
    r = ModRing(257)
    rng = SeededRng(6)
    a, b = (NegacyclicElement(random_vector(rng, r, 16), r) for _ in range(2))
    c1, c2 = OpCounter(), OpCounter()
    assert negacyclic_mul_recursive(c1, a, b, threshold=16) == negacyclic_mul_direct(c2, a, b)
    assert c1.counts == c2.counts


def test_bad_inputs():
    with pytest.raises(ValueError):
        elem([1, 2, 3], 17)
    with pytest.raises(ValueError):
        negacyclic_mul_fast2(OpCounter(), elem([1, 2], 17), elem([1, 2], 17))
    with pytest.raises(ValueError):
        negacyclic_mul_direct(OpCounter(), elem([1, 2], 17), elem([1, 2, 3, 4], 17))
    with pytest.raises(ValueError):
        negacyclic_mul_direct(OpCounter(), elem([1, 2], 17), elem([1, 2], 19))


@pytest.mark.parametrize("m", [2, 4, 8, 64])
def test_shift_m_times_negates(m):
    r = ModRing(3329)
    v = NegacyclicElement(random_vector(SeededRng(m), r, m), r)
    w = v
    for _ in range(m):
        w = negacyclic_shift(w)
    assert w.coeffs.tolist() == [(-int(c)) % 3329 for c in v.coeffs]
    assert negacyclic_shift(v) == negacyclic_mul_direct(OpCounter(), NegacyclicElement.monomial(r, m, 1), v)


@pytest.mark.parametrize("n", [4, 8, 16, 64, 256])
@pytest.mark.parametrize("q", [5, 17, 257, 3329])
def test_oracle_equivalence_batched(n, q):
    r = ModRing(q)
    rng = SeededRng(1000 * n + q)
    a = NegacyclicElement(random_vector(rng, r, n, (200,)), r)
    b = NegacyclicElement(random_vector(rng, r, n, (200,)), r)
    want = [oracle(x, y, q) for x, y in zip(a.coeffs[:5], b.coeffs[:5])]
    direct = negacyclic_mul_direct(OpCounter(), a, b).coeffs
    assert direct[:5].tolist() == want
    assert np.array_equal(negacyclic_mul_fast2(OpCounter(), a, b).coeffs, direct)
    assert np.array_equal(negacyclic_mul_recursive(OpCounter(), a, b, 2).coeffs, direct)


@settings(max_examples=50)
@given(st.integers(0, 2**32), st.sampled_from([4, 8, 16]))
def test_ring_laws(seed, n):
    r = ModRing(257)
    rng = SeededRng(seed)
    a, b, c = (NegacyclicElement(random_vector(rng, r, n), r) for _ in range(3))
    ctx = OpCounter()
    ab = negacyclic_mul_fast2(ctx, a, b)
    assert ab == negacyclic_mul_fast2(ctx, b, a)
    bc = NegacyclicElement(r.add(ctx, b.coeffs, c.coeffs), r)
    lhs = negacyclic_mul_fast2(ctx, a, bc)
    rhs = r.add(ctx, ab.coeffs, negacyclic_mul_fast2(ctx, a, c).coeffs)
    assert np.array_equal(lhs.coeffs, rhs)


def test_integer_ring():
    z = IntegerRing()
    a = NegacyclicElement([1, -2, 3, 4], z)
    b = NegacyclicElement([0, 5, 0, -1], z)
    assert negacyclic_mul_fast2(OpCounter(), a, b) == negacyclic_mul_direct(OpCounter(), a, b)


def test_fir_structure_with_shift_reproduces_fast2():
    """The L=2 filter's dataflow with the delay swapped for the negacyclic shift."""
    r = ModRing(3329)
    rng = SeededRng(21)
    a = NegacyclicElement(random_vector(rng, r, 16), r)
    b = NegacyclicElement(random_vector(rng, r, 16), r)

    seen = []

    def record(u, v):
        p = schoolbook(OpCounter(), r, u, v)
        seen.append(p)
        return p

    parallel_mul(OpCounter(), r, karatsuba2(), a.coeffs, b.coeffs, record)

    # fixed-coefficient side pre-added exactly as the filter derives its subfilters
    subfilters = derive_parallel_filter(karatsuba2(), FirFilter(a.coeffs, r)).subfilters
    hc = [r.array(t) for t in subfilters]
    assert all(np.array_equal(x, y)
               for x, y in zip(hc, apply_pre(OpCounter(), r, karatsuba2(),
                                             [a.coeffs[0::2], a.coeffs[1::2]], "h")))
    res = fast_parallel(OpCounter(), r, karatsuba2(), None, [b.coeffs[0::2], b.coeffs[1::2]],
                        multiply=lambda u, v: schoolbook(OpCounter(), r, u, v),
                        wrap=lambda v: negacyclic_shift(v, r), h_combined=hc)
    assert len(res.products) == len(seen) == 3
    assert all(np.array_equal(x, y) for x, y in zip(res.products, seen))
    out = np.empty(16, dtype=r.dtype)
    out[0::2], out[1::2] = res.outputs
    assert out.tolist() == negacyclic_mul_fast2(OpCounter(), a, b).coeffs.tolist()
