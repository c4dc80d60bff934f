"""Multiplication in R[x]/(x^n + 1).

The fast forms split each operand into even and odd coefficients, which live
in the half-size ring R[y]/(y^(n/2) + 1) with y = x^2, and run the parallel
filter dataflow on them. The filter's delay becomes multiplication by y: a
rotation by one place with the wrapped coefficient negated.

Coefficient arrays may carry leading batch axes; the last axis is the
coefficient axis and each batch entry is an independent product.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bilinear import karatsuba2
from .core import RingMismatchError, Ring, is_power_of_two
from .skeleton import fast_parallel


@dataclass(frozen=True, eq=False)
class NegacyclicElement:
    """An element of R[x]/(x^n + 1), coefficients in ascending degree order."""

    coeffs: np.ndarray
    ring: Ring

    def __post_init__(self):
        arr = self.coeffs
        if not (isinstance(arr, np.ndarray) and arr.dtype == self.ring.dtype):
            arr = self.ring.array(arr)
        elif hasattr(self.ring, "q"):
            arr = arr % self.ring.q
        if arr.ndim < 1 or not is_power_of_two(arr.shape[-1]) or arr.shape[-1] < 2:
            raise ValueError(f"length must be a power of two >= 2, got shape {arr.shape}")
        object.__setattr__(self, "coeffs", arr)

    @property
    def n(self):
        return self.coeffs.shape[-1]

    @classmethod
    def one(cls, ring, n):
        c = ring.zeros(n)
        c[0] = ring.one
        return cls(c, ring)

    @classmethod
    def monomial(cls, ring, n, k):
        """x^k (k may exceed n; wraps with a sign change)."""
        c = ring.zeros(n)
        c[k % n] = ring.one if (k // n) % 2 == 0 else ring._neg(ring.one)
        return cls(c, ring)

    def __eq__(self, other):
        if not isinstance(other, NegacyclicElement):
            return NotImplemented
        return (self.ring == other.ring and self.coeffs.shape == other.coeffs.shape
                and self.ring.equal(self.coeffs, other.coeffs))

    __hash__ = None

    def __repr__(self):
        return f"NegacyclicElement({self.coeffs.tolist()}, {self.ring})"


def _check(a, b):
    if a.ring != b.ring:
        raise RingMismatchError(f"cannot multiply over {a.ring} and {b.ring}")
    if a.n != b.n:
        raise ValueError(f"length mismatch: {a.n} vs {b.n}")


def rotate(ring, v, k):
    """``y^k * v`` in R[y]/(y^m + 1) for ``0 <= k < m`` (a signed permutation)."""
    if k == 0:
        return v
    m = v.shape[-1]
    return np.concatenate([ring._neg(v[..., m - k:]), v[..., :m - k]], axis=-1)


def negacyclic_shift(v, ring=None):
    """Multiply by the generator: ``[v0..v(m-1)] -> [-v(m-1), v0, ..., v(m-2)]``.

    Free of counted operations. Accepts an element or a raw array plus ring.
    """
    if isinstance(v, NegacyclicElement):
        return NegacyclicElement(rotate(v.ring, v.coeffs, 1), v.ring)
    return rotate(ring, v, 1)


def schoolbook(ctx, ring, a, b):
    """n*n products, one shifted copy of ``b`` per coefficient of ``a``."""
    n = a.shape[-1]
    acc = ring.mul(ctx, a[..., 0:1], b)
    for i in range(1, n):
        acc = ring.add(ctx, acc, ring.mul(ctx, a[..., i:i + 1], rotate(ring, b, i)))
    return acc


def _interleave(ring, parts):
    L = len(parts)
    shape = parts[0].shape[:-1] + (parts[0].shape[-1] * L,)
    out = np.empty(shape, dtype=parts[0].dtype)
    for p, part in enumerate(parts):
        out[..., p::L] = part
    return out


def parallel_mul(ctx, ring, alg, a, b, submul=None):
    """``a*b`` through an L-phase split, ``L = alg.L`` dividing n.

    Phases live in R[y]/(y^(n/L) + 1) with y = x^L; ``submul`` multiplies
    there (schoolbook by default).
    """
    L = alg.L
    n = a.shape[-1]
    if n % L or n // L < 1:
        raise ValueError(f"{L} phases do not divide length {n}")
    submul = submul or (lambda u, v: schoolbook(ctx, ring, u, v))
    res = fast_parallel(
        ctx, ring, alg,
        [a[..., p::L] for p in range(L)],
        [b[..., p::L] for p in range(L)],
        multiply=submul,
        wrap=lambda v: rotate(ring, v, 1),
    )
    return _interleave(ring, res.outputs)


def _recursive(ctx, ring, a, b, threshold):
    n = a.shape[-1]
    if n <= threshold or n < 2:
        return schoolbook(ctx, ring, a, b)
    return parallel_mul(ctx, ring, karatsuba2(), a, b,
                        lambda u, v: _recursive(ctx, ring, u, v, threshold))


def negacyclic_mul_direct(ctx, a, b):
    """Schoolbook product mod x^n + 1: n^2 multiplications."""
    _check(a, b)
    return NegacyclicElement(schoolbook(ctx, a.ring, a.coeffs, b.coeffs), a.ring)


def negacyclic_mul_fast2(ctx, a, b):
    """Two-parallel fast product: three half-size schoolbook products.

    ``p0 = a0 b0 + y a1 b1`` and ``p1 = (a0+a1)(b0+b1) - a0 b0 - a1 b1``,
    3 (n/2)^2 multiplications.
    """
    _check(a, b)
    if a.n < 4:
        raise ValueError("fast 2-parallel multiplication needs n >= 4")
    return NegacyclicElement(parallel_mul(ctx, a.ring, karatsuba2(), a.coeffs, b.coeffs), a.ring)


def negacyclic_mul_recursive(ctx, a, b, threshold=2):
    """Apply the two-way split until the size is at most ``threshold``.

    Uses ``3**k * (n / 2**k)**2`` multiplications with ``k = log2(n/threshold)``.
    """
    _check(a, b)
    if not is_power_of_two(threshold):
        raise ValueError(f"threshold must be a power of two >= 1, got {threshold}")
    return NegacyclicElement(_recursive(ctx, a.ring, a.coeffs, b.coeffs, threshold), a.ring)


def recursive_mult_count(n, threshold):
    k = max(0, (n // threshold).bit_length() - 1) if threshold < n else 0
    return 3**k * (n // 2**k) ** 2
