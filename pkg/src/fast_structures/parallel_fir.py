"""Polyphase decomposition and L-parallel FIR filters.

Three ways to run the same filter:

* :func:`serial_fir` -- one output per step, the reference;
* :func:`parallel_filter` / :func:`direct_2parallel` -- whole streams pushed
  through the shared skeleton with a one-block delay as the wrap element;
* :class:`ParallelFilterState` + :func:`run_block` -- block-synchronous
  streaming with explicit subfilter histories and delay registers.
"""

from __future__ import annotations

import functools
import operator
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .bilinear import BilinearAlgorithm, apply_post, apply_pre, infer_ring, schoolbook
from .core import OpCounter, Ring
from .skeleton import fast_parallel


@dataclass(frozen=True, eq=False)
class FirFilter:
    coeffs: np.ndarray
    ring: Ring

    def __post_init__(self):
        arr = self.ring.array(self.coeffs)
        if arr.ndim != 1 or len(arr) < 1:
            raise ValueError("a filter needs at least one tap")
        object.__setattr__(self, "coeffs", arr)

    @classmethod
    def of(cls, coeffs, ring=None):
        return cls(coeffs, ring or infer_ring(coeffs))

    @property
    def taps(self):
        return len(self.coeffs)

    def padded(self, L):
        """Copy zero-padded to a multiple of ``L`` taps (same transfer function)."""
        extra = -self.taps % L
        if not extra:
            return self
        return FirFilter(np.concatenate([self.coeffs, self.ring.zeros(extra)]), self.ring)


@dataclass
class PolyphaseDecomposition:
    phases: list
    L: int
    length: int

    def interleave(self):
        return interleave(self.phases)


def polyphase_decompose(seq, L, ring=None):
    """Phase ``p`` holds ``seq[p], seq[p+L], ...``; short phases are zero-padded."""
    if L < 1:
        raise ValueError("parallelism level must be >= 1")
    ring = ring or infer_ring(seq)
    arr = ring.array(seq)
    n = len(arr)
    width = -(-n // L)
    padded = np.concatenate([arr, ring.zeros(width * L - n)]) if width * L > n else arr
    return PolyphaseDecomposition([padded[p::L].copy() for p in range(L)], L, n)


def interleave(phases):
    L = len(phases)
    width = len(phases[0])
    out = np.empty(L * width, dtype=np.asarray(phases[0]).dtype)
    for p, ph in enumerate(phases):
        out[p::L] = ph
    return out


def _subfilter(ctx, ring, taps, u):
    """Causal FIR of stream ``u`` with ``taps``; ``len(taps)`` products per sample."""
    y = ring.mul(ctx, taps[0], u)
    for i in range(1, len(taps)):
        keep = max(len(u) - i, 0)
        shifted = np.concatenate([ring.zeros(len(u) - keep), u[:keep]])
        y = ring.add(ctx, y, ring.mul(ctx, taps[i], shifted))
    return y


def _delay(ring, u):
    """One-sample (one-block at the phase rate) delay, zero initial state."""
    if len(u) == 0:
        return u
    return np.concatenate([ring.zeros(1), u[:-1]])


def serial_fir(ctx, filt, x, n_out=None):
    """``y[n] = sum_i h[i] x[n-i]`` with ``x[n<0] = 0``.

    Returns ``n_out`` samples (default ``len(x) + taps - 1``, i.e. the input
    followed by enough zeros to flush the filter). Charges ``taps``
    multiplications per output sample.
    """
    ring = filt.ring
    x = ring.array(x)
    if n_out is None:
        n_out = len(x) + filt.taps - 1 if len(x) else 0
    if n_out == 0:
        return ring.zeros(0)
    u = np.concatenate([x[:n_out], ring.zeros(max(0, n_out - len(x)))])
    return _subfilter(ctx, ring, filt.coeffs, u)


def parallel_filter(ctx, alg, filt, x, wrap=None):
    """L-parallel filter of a whole stream, ``L = alg.L``.

    The stream is zero-padded to a multiple of L and that many outputs are
    returned. ``wrap`` defaults to the one-block delay.
    """
    L = alg.L
    ring = filt.ring
    fp = filt.padded(L)
    hphases = polyphase_decompose(fp.coeffs, L, ring).phases
    xdec = polyphase_decompose(x, L, ring)
    if xdec.length == 0:
        return ring.zeros(0)
    # fixed coefficients: combined once, not per sample
    hc = apply_pre(OpCounter("precompute"), ring, alg, hphases, "h")
    res = fast_parallel(
        ctx, ring, alg, None, xdec.phases,
        multiply=lambda taps, u: _subfilter(ctx, ring, taps, u),
        wrap=wrap or (lambda u: _delay(ring, u)),
        h_combined=hc,
    )
    return interleave(res.outputs)


def direct_2parallel(ctx, filt, x):
    """Two-parallel filter with four subfilters (2N products per block)."""
    return parallel_filter(ctx, schoolbook(2), filt, x)


# ---------------------------------------------------------------------------
# streaming form


@dataclass
class ParallelFilterState:
    structure: BilinearAlgorithm
    L: int
    N: int
    ring: Ring
    subfilters: list
    histories: list = field(default_factory=list)
    delays: list = field(default_factory=list)

    def __post_init__(self):
        if not self.histories:
            self.reset()

    def reset(self):
        zero = self.ring.zero
        self.histories = [deque([zero] * len(t), maxlen=len(t)) for t in self.subfilters]
        self.delays = [zero] * (self.L - 1)

    @property
    def subfilter_len(self):
        return self.N // self.L

    @functools.cached_property
    def block_cost(self):
        """(mults, adds) charged per block."""
        pre, post = self.structure.program("x"), self.structure.program("post")
        taps = self.subfilter_len
        mults = pre.mults + len(self.subfilters) * taps + post.mults
        adds = pre.adds + len(self.subfilters) * (taps - 1) + post.adds + self.L - 1
        return mults, adds


def derive_parallel_filter(alg, filt, L=None):
    """Build the fast L-parallel structure for ``filt`` from ``alg``.

    The taps are padded to a multiple of L, split into L phases and pre-added
    once into ``alg.M`` subfilters of ``N/L`` taps each.
    """
    L = alg.L if L is None else L
    if alg.L != L:
        raise ValueError(f"structure is {alg.L}-by-{alg.L}, cannot build a {L}-parallel filter")
    ring = filt.ring
    fp = filt.padded(L)
    hphases = polyphase_decompose(fp.coeffs, L, ring).phases
    hc = apply_pre(OpCounter("precompute"), ring, alg, hphases, "h")
    subfilters = [[ring.coerce(v) for v in t] for t in hc]
    return ParallelFilterState(alg, L, fp.taps, ring, subfilters)


def run_block(ctx, state, inputs):
    """Consume L input samples, emit the next L output samples.

    Each subfilter takes one new pre-added sample per block; the top L-1 of
    the 2L-1 block outputs are held for one block and added to the bottom
    L-1 of the next.
    """
    if len(inputs) != state.L:
        raise ValueError(f"block must hold {state.L} samples, got {len(inputs)}")
    return _block(ctx, state, [state.ring.coerce(v) for v in inputs])


def _block(ctx, state, xs):
    ring = state.ring
    alg = state.structure
    L = state.L
    xc = alg.program("x").raw(ring, xs)
    w = []
    for taps, hist, u in zip(state.subfilters, state.histories, xc):
        hist.appendleft(u)
        w.append(ring._reduce(sum(map(operator.mul, taps, hist))))
    s = alg.program("post").raw(ring, w)
    out = [ring._add(s[p], state.delays[p]) for p in range(L - 1)]
    out.append(s[L - 1])
    state.delays = s[L:]
    mults, adds = state.block_cost
    ctx.count_mul(mults)
    ctx.count_add(adds)
    return out


def run_stream(ctx, state, x):
    """Feed ``x`` (zero-padded to a multiple of L) block by block."""
    ring = state.ring
    x = [ring.coerce(v) for v in x]
    x += [ring.zero] * (-len(x) % state.L)
    out = []
    for b in range(0, len(x), state.L):
        out.extend(_block(ctx, state, x[b:b + state.L]))
    return ring.array(out)
