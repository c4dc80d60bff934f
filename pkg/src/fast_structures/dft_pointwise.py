"""Radix-2 FFT and fast pointwise multiplication in the DFT domain.

Counting convention: every butterfly multiplication counts, including W^0
and -j, one complex product being one count, so a size-M transform costs
(M/2) log2 M. Transforms run inside the ``"fft"`` counting scope so their
additions can be excluded from reported add totals. The 1/M normalisation of
the inverse is a fixed power-of-two scaling and is not counted.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .bilinear import karatsuba2, karatsuba_iterated
from .core import ComplexRing, is_power_of_two
from .skeleton import fast_parallel

FFT_SCOPE = "fft"
C = ComplexRing()


def _bit_reverse(M):
    bits = M.bit_length() - 1
    idx = np.arange(M)
    rev = np.zeros(M, dtype=np.int64)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return rev


def radix2_dit(ctx, ring, x, roots):
    """Iterative decimation-in-time transform along the last axis.

    ``roots[k]`` is ``W^k`` for ``k < M/2`` where W is a primitive M-th root
    of unity; output is in natural order. Each of the log2 M stages costs
    M/2 multiplications and M additions.
    """
    M = x.shape[-1]
    if not is_power_of_two(M):
        raise ValueError(f"transform size must be a power of two, got {M}")
    x = x[..., _bit_reverse(M)]
    size = 2
    while size <= M:
        half = size // 2
        tw = roots[:: M // size][:half]
        blocks = x.reshape(x.shape[:-1] + (M // size, size))
        even, odd = blocks[..., :half], blocks[..., half:]
        t = ring.mul(ctx, tw, odd)
        x = np.concatenate([ring.add(ctx, even, t), ring.sub(ctx, even, t)], axis=-1)
        x = x.reshape(x.shape[:-2] + (M,))
        size *= 2
    return x


@dataclass(frozen=True, eq=False)
class FftContext:
    """Twiddle tables for size M: ``forward[k] = exp(-2j*pi*k/M)``, k < M/2."""

    size: int
    forward: np.ndarray
    inverse: np.ndarray


@functools.lru_cache(maxsize=None)
def fft_context(M):
    if not is_power_of_two(M):
        raise ValueError(f"FFT size must be a power of two, got {M}")
    k = np.arange(max(M // 2, 1))
    fwd = np.exp(-2j * np.pi * k / M)
    fwd.setflags(write=False)
    inv = np.conj(fwd)
    inv.setflags(write=False)
    return FftContext(M, fwd, inv)


def fft(ctx, x):
    x = np.asarray(x, dtype=np.complex128)
    plan = fft_context(x.shape[-1])
    with ctx.scope(FFT_SCOPE):
        return radix2_dit(ctx, C, x, plan.forward)


def ifft(ctx, X):
    X = np.asarray(X, dtype=np.complex128)
    plan = fft_context(X.shape[-1])
    with ctx.scope(FFT_SCOPE):
        y = radix2_dit(ctx, C, X, plan.inverse)
    return y / plan.size


@functools.lru_cache(maxsize=None)
def wraparound_twiddle(M):
    """DFT of the length-M sequence {0, 1, 0, ..., 0}: ``exp(-2j*pi*k/M)``.

    Multiplying a size-M spectrum by this vector is a one-step cyclic delay of
    the underlying sequence.
    """
    t = np.exp(-2j * np.pi * np.arange(M) / M)
    t.setflags(write=False)
    return t


def non_fft_adds(ctx):
    return ctx.adds - ctx.region(FFT_SCOPE).adds


def circular_convolution(ctx, h, x):
    """``y[n] = sum_i h[i] x[(n - i) mod N]`` straight from the definition."""
    h = np.asarray(h, dtype=np.complex128)
    x = np.asarray(x, dtype=np.complex128)
    if h.shape[-1] != x.shape[-1]:
        raise ValueError("length mismatch")
    N = h.shape[-1]
    y = C.mul(ctx, h[..., 0:1], x)
    for i in range(1, N):
        y = C.add(ctx, y, C.mul(ctx, h[..., i:i + 1], np.roll(x, i, axis=-1)))
    return y


def _check_pair(h, x, minimum):
    h = np.asarray(h, dtype=np.complex128)
    x = np.asarray(x, dtype=np.complex128)
    if h.shape != x.shape:
        raise ValueError(f"size mismatch: {h.shape} vs {x.shape}")
    N = h.shape[-1]
    if not is_power_of_two(N) or N < minimum:
        raise ValueError(f"N must be a power of two >= {minimum}, got {N}")
    return h, x


def pointwise_direct(ctx, h, x):
    """``IFFT(FFT(h) * FFT(x))``: (3N/2) log2 N + N multiplications."""
    h, x = _check_pair(h, x, 1)
    Y = C.mul(ctx, fft(ctx, h), fft(ctx, x))
    return ifft(ctx, Y)


def parallel_spectra(ctx, alg, h, x):
    """Size-N/L spectra of the L output phases, computed by ``alg``.

    The phases of h and x are transformed separately; the top L-1 partial
    spectra are folded back through the wraparound twiddle of size N/L.
    """
    L = alg.L
    N = h.shape[-1]
    M = N // L
    hs = [fft(ctx, h[..., p::L]) for p in range(L)]
    xs = [fft(ctx, x[..., p::L]) for p in range(L)]
    T = wraparound_twiddle(M)
    res = fast_parallel(
        ctx, C, alg, hs, xs,
        multiply=lambda a, b: C.mul(ctx, a, b),
        wrap=lambda v: C.mul(ctx, T, v),
    )
    return res.outputs


def pointwise_parallel(ctx, alg, h, x):
    """Circular convolution via an L-parallel pointwise structure."""
    L = alg.L
    h, x = _check_pair(h, x, 2 * L if L > 1 else 1)
    if h.shape[-1] % L:
        raise ValueError(f"N must be a multiple of {L}")
    spectra = parallel_spectra(ctx, alg, h, x)
    phases = [ifft(ctx, Y) for Y in spectra]
    out = np.empty(h.shape, dtype=np.complex128)
    for p, ph in enumerate(phases):
        out[..., p::L] = ph
    return out


def pointwise_fast2(ctx, h, x):
    """Two-parallel fast pointwise multiplication (three spectrum products).

    (3N/2) log2 N + N/2 multiplications and 5N/2 additions outside the FFTs.
    """
    h, x = _check_pair(h, x, 4)
    return pointwise_parallel(ctx, karatsuba2(), h, x)


def pointwise_fast4(ctx, h, x):
    """Four-parallel form built on the iterated 4x4 algorithm (nine products).

    (3N/2) log2 N multiplications; additions outside the FFTs come to 27N/4
    with the nested pre/post stages.
    """
    h, x = _check_pair(h, x, 16)
    return pointwise_parallel(ctx, karatsuba_iterated(2), h, x)


# closed forms, log base 2


def _log2(N):
    return N.bit_length() - 1


def fft_mults(M):
    return (M // 2) * _log2(M)


def direct_mults(N):
    return 3 * N * _log2(N) // 2 + N


def fast2_mults(N):
    return 3 * N * _log2(N) // 2 + N // 2


def fast2_adds(N):
    return 5 * N // 2


def fast4_mults(N):
    return 3 * N * _log2(N) // 2


def fast4_adds_reference(N):
    return 27 * N // 4
