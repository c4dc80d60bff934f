"""Negacyclic NTTs over Z_q and pointwise modular multiplication.

The operands of ``a*r mod (x^n + 1)`` are split into even and odd halves,
each half transformed with an (n/2)-point negacyclic NTT. In the transform
domain, multiplication by NTT{0,1,0,...,0} plays the role of the parallel
filter's delay, so the fast two-parallel filter carries over unchanged.

The negacyclic transform is a cyclic radix-2 NTT (same butterfly code as the
FFT) applied to ``v[i] * psi**i``, where psi is a primitive n-th root of
unity; the inverse folds ``m**-1 * psi**-i`` into one table.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import sympy

from .bilinear import karatsuba2, schoolbook
from .core import ModRing, RingMismatchError, is_power_of_two
from .dft_pointwise import radix2_dit
from .poly_modmul import NegacyclicElement, _interleave
from .skeleton import fast_parallel

NTT_SCOPE = "ntt"
POINTWISE_SCOPE = "pointwise"


class NoSuitableRootError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class NttContext:
    q: int
    n: int
    psi: int
    ring: ModRing = field(repr=False)
    twist: np.ndarray = field(repr=False)
    untwist: np.ndarray = field(repr=False)
    roots: np.ndarray = field(repr=False)
    inv_roots: np.ndarray = field(repr=False)
    twiddle: np.ndarray = field(repr=False)

    @property
    def m(self):
        return self.n // 2

    @property
    def omega(self):
        return self.psi * self.psi % self.q

    @property
    def m_inv(self):
        return pow(self.m, -1, self.q)


def _order_is(x, order, q):
    # order is a power of two: x^(order/2) == -1 pins it exactly
    return pow(x, order // 2, q) == q - 1


def make_ntt_context(q, n):
    """Parameters for (n/2)-point negacyclic NTTs mod ``q``.

    Needs ``q`` prime with ``q = 1 (mod n)`` so that a primitive n-th root
    psi exists; the root orders are checked, not assumed.
    """
    if not is_power_of_two(n) or n < 4:
        raise ValueError(f"n must be a power of two >= 4, got {n}")
    if q < 3 or not sympy.isprime(q):
        raise ValueError(f"q must be an odd prime, got {q}")
    if (q - 1) % n:
        raise NoSuitableRootError(f"no suitable root: {q} is not 1 mod {n}")
    g = int(sympy.primitive_root(q))
    psi = pow(g, (q - 1) // n, q)
    m = n // 2
    omega = psi * psi % q
    if not (_order_is(psi, n, q) and pow(omega, m, q) == 1
            and (m == 1 or pow(omega, m // 2, q) != 1)):
        raise NoSuitableRootError(f"root order check failed for q={q}, n={n}")
    ring = ModRing(q)
    psi_inv = pow(psi, -1, q)
    omega_inv = pow(omega, -1, q)
    m_inv = pow(m, -1, q)
    twist = ring.array([pow(psi, i, q) for i in range(m)])
    untwist = ring.array([m_inv * pow(psi_inv, i, q) for i in range(m)])
    roots = ring.array([pow(omega, k, q) for k in range(max(m // 2, 1))])
    inv_roots = ring.array([pow(omega_inv, k, q) for k in range(max(m // 2, 1))])
    for arr in (twist, untwist, roots, inv_roots):
        arr.setflags(write=False)
    # NTT{0,1,0,...,0} = psi * omega^k = psi^(2k+1)
    twiddle = ring.array([pow(psi, 2 * k + 1, q) for k in range(m)])
    twiddle.setflags(write=False)
    return NttContext(q, n, psi, ring, twist, untwist, roots, inv_roots, twiddle)


def _check_len(plan, v):
    if v.shape[-1] != plan.m:
        raise ValueError(f"expected length {plan.m}, got {v.shape[-1]}")


def ntt_negacyclic(ctx, plan, v):
    """Forward m-point negacyclic NTT (natural order), last axis."""
    v = plan.ring.array(v) if not isinstance(v, np.ndarray) else v
    _check_len(plan, v)
    with ctx.scope(NTT_SCOPE):
        return radix2_dit(ctx, plan.ring, plan.ring.mul(ctx, plan.twist, v), plan.roots)


def intt_negacyclic(ctx, plan, V):
    V = plan.ring.array(V) if not isinstance(V, np.ndarray) else V
    _check_len(plan, V)
    with ctx.scope(NTT_SCOPE):
        return plan.ring.mul(ctx, plan.untwist, radix2_dit(ctx, plan.ring, V, plan.inv_roots))


def ntt_wraparound_twiddle(plan):
    """NTT of the length-m sequence {0, 1, 0, ..., 0}."""
    return plan.twiddle


def _check_pair(plan, a, r):
    if a.ring != r.ring:
        raise RingMismatchError(f"{a.ring} vs {r.ring}")
    if a.ring != plan.ring or a.n != plan.n or r.n != plan.n:
        raise ValueError(f"operands must be length {plan.n} over Z_{plan.q}")


def _pointwise(ctx, plan, alg, a, r):
    _check_pair(plan, a, r)
    ring = plan.ring
    A = [ntt_negacyclic(ctx, plan, a.coeffs[..., p::2]) for p in range(2)]
    R = [ntt_negacyclic(ctx, plan, r.coeffs[..., p::2]) for p in range(2)]
    with ctx.scope(POINTWISE_SCOPE):
        res = fast_parallel(
            ctx, ring, alg, A, R,
            multiply=lambda u, v: ring.mul(ctx, u, v),
            wrap=lambda v: ring.mul(ctx, plan.twiddle, v),
        )
    halves = [intt_negacyclic(ctx, plan, P) for P in res.outputs]
    return NegacyclicElement(_interleave(ring, halves), ring)


def ntt_pointwise_direct(ctx, plan, a, r):
    """Four spectrum products plus one twiddle product per half (5m)."""
    return _pointwise(ctx, plan, schoolbook(2), a, r)


def ntt_pointwise_fast2(ctx, plan, a, r):
    """Three spectrum products plus one twiddle product per half (4m).

    ``P0 = A0 R0 + T (A1 R1)``, ``P1 = (A0+A1)(R0+R1) - A0 R0 - A1 R1``.
    """
    return _pointwise(ctx, plan, karatsuba2(), a, r)
