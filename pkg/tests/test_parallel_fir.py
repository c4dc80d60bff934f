import numpy as np
import pytest
from hypothesis import given, strategies as st

from fast_structures.bilinear import karatsuba2, karatsuba_iterated, schoolbook
from fast_structures.core import IntegerRing, ModRing, OpCounter, SeededRng, random_vector
from fast_structures.parallel_fir import (
    FirFilter, derive_parallel_filter, direct_2parallel, interleave, parallel_filter,
    polyphase_decompose, run_block, run_stream, serial_fir,
)

Z = IntegerRing()


def oracle(h, x):
    return np.convolve(np.asarray(h, dtype=np.int64), np.asarray(x, dtype=np.int64)).tolist()


def test_polyphase_examples():
    dec = polyphase_decompose(list(range(6)), 2)
    assert [p.tolist() for p in dec.phases] == [[0, 2, 4], [1, 3, 5]]
    assert [p.tolist() for p in polyphase_decompose([3, 1, 4], 1).phases] == [[3, 1, 4]]
    dec = polyphase_decompose([10, 11, 12, 13, 14], 2)
    assert [p.tolist() for p in dec.phases] == [[10, 12, 14], [11, 13, 0]]
    assert dec.length == 5


@given(st.lists(st.integers(-100, 100), max_size=40), st.integers(1, 8))
def test_polyphase_round_trip(seq, L):
    back = interleave(polyphase_decompose(seq, L, Z).phases).tolist()
    assert back == seq + [0] * (len(back) - len(seq))
    assert len(back) % L == 0


def test_serial_fir_examples():
    f = FirFilter.of([1, 2])
    assert serial_fir(OpCounter(), f, [3, 4, 5]).tolist() == [3, 10, 13, 10]
    assert serial_fir(OpCounter(), FirFilter.of([1]), [7, -2, 5]).tolist() == [7, -2, 5]
    h = [4, -1, 3]
    assert serial_fir(OpCounter(), FirFilter.of(h), [1, 0, 0, 0, 0]).tolist() == h + [0] * 4


def test_direct_2parallel():
    rng = SeededRng(3)
    h = random_vector(rng, Z, 6)
    x = random_vector(rng, Z, 64)
    ctx = OpCounter()
    y = direct_2parallel(ctx, FirFilter(h, Z), x)
    assert y.tolist() == oracle(h, x)[:64]
    assert ctx.mults == 2 * 6 * (64 // 2)
    imp = direct_2parallel(OpCounter(), FirFilter(h, Z), [1] + [0] * 7)
    assert imp.tolist() == list(h) + [0, 0]


@pytest.mark.parametrize("alg,per_block", [(karatsuba2(), 3 * 8 // 2),
                                           (karatsuba_iterated(2), 9 * 8 // 4)])
def test_parallel_filter_whole_stream(alg, per_block):
    rng = SeededRng(11)
    h = random_vector(rng, Z, 8)
    x = random_vector(rng, Z, 256)
    ctx = OpCounter()
    y = parallel_filter(ctx, alg, FirFilter(h, Z), x)
    assert y.tolist() == oracle(h, x)[:256]
    assert ctx.mults == per_block * (256 // alg.L)


def test_parallel_filter_custom_wrap():
    # dropping the wraparound leaves only the in-block terms
    h, x = [1, 1], [1, 1, 1, 1]
    y = parallel_filter(OpCounter(), karatsuba2(), FirFilter.of(h), x, wrap=lambda u: 0 * u)
    assert y.tolist() == [1, 2, 1, 2]


def test_derive_structures():
    f = FirFilter.of([1, 2, 3, 4, 5, 6])
    st2 = derive_parallel_filter(karatsuba2(), f)
    assert (st2.L, len(st2.subfilters), st2.subfilter_len) == (2, 3, 3)
    assert st2.block_cost[0] == 3 * 6 // 2
    st4 = derive_parallel_filter(karatsuba_iterated(2), f)
    assert (st4.L, st4.N, len(st4.subfilters)) == (4, 8, 9)
    assert len(st4.delays) == 3
    st1 = derive_parallel_filter(schoolbook(1), f)
    x = list(range(-5, 15))
    assert run_stream(OpCounter(), st1, x).tolist() == oracle(f.coeffs, x)[:20]
    with pytest.raises(ValueError):
        derive_parallel_filter(karatsuba2(), f, L=4)


def test_run_block_impulse():
    st = derive_parallel_filter(karatsuba2(), FirFilter.of([5, 6, 7, 8]))
    ctx = OpCounter()
    assert run_block(ctx, st, [1, 0]) == [5, 6]
    assert run_block(ctx, st, [0, 0]) == [7, 8]
    assert run_block(ctx, st, [0, 0]) == [0, 0]
    assert ctx.mults == 3 * (3 * 4 // 2)


def test_run_block_wrong_size():
    st = derive_parallel_filter(karatsuba2(), FirFilter.of([1, 2]))
    with pytest.raises(ValueError):
        run_block(OpCounter(), st, [1, 2, 3])


def test_long_stream():
    rng = SeededRng(5)
    h = random_vector(rng, Z, 6)
    x = random_vector(rng, Z, 10_000)
    st = derive_parallel_filter(karatsuba2(), FirFilter(h, Z))
    ctx = OpCounter()
    y = run_stream(ctx, st, x)
    assert np.array_equal(y, serial_fir(OpCounter(), FirFilter(h, Z), x, 10_000))
    assert ctx.mults == (3 * 6 // 2) * 5000


def test_reset_and_modular():
    r = ModRing(257)
    rng = SeededRng(8)
    h = random_vector(rng, r, 5)
    x = random_vector(rng, r, 100)
    st = derive_parallel_filter(karatsuba_iterated(2), FirFilter(h, r))
    first = run_stream(OpCounter(), st, x)
    st.reset()
    again = run_stream(OpCounter(), st, x)
    ref = np.convolve(h.astype(np.int64), x.astype(np.int64))[:100] % 257
    assert first.tolist() == again.tolist() == ref.tolist()


@given(st.lists(st.integers(-50, 50), min_size=1, max_size=9),
       st.lists(st.integers(-50, 50), max_size=40), st.sampled_from([1, 2, 3]))
def test_stream_matches_oracle(h, x, k):
    alg = karatsuba_iterated(k)
    st_ = derive_parallel_filter(alg, FirFilter(h, Z))
    y = run_stream(OpCounter(), st_, x)
    assert len(y) == len(x) + (-len(x) % alg.L)
    assert y.tolist()[:len(x)] == (oracle(h, x)[:len(x)] if x else [])
