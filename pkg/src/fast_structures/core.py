"""Scalar rings, operation counters and seeded random inputs.

Scalars are plain Python / numpy values; a ring object knows how to combine
them. Every combining method takes an :class:`OpCounter` and charges it for
the work done, one count per scalar operation (array arguments are charged
per element of the broadcast result).
"""

from __future__ import annotations

import contextlib
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

DEFAULT_ATOL = 1e-9
DEFAULT_RTOL = 1e-9
INT_RANGE = 256

RNG_ALGORITHM = "numpy.PCG64"


class RingMismatchError(ValueError):
    pass


# ---------------------------------------------------------------------------
# counting


@dataclass
class Counts:
    mults: int = 0
    adds: int = 0

    def __add__(self, other):
        return Counts(self.mults + other.mults, self.adds + other.adds)

    def __sub__(self, other):
        return Counts(self.mults - other.mults, self.adds - other.adds)


@dataclass
class OpCounter:
    """Multiplication/addition tally for one computation.

    Operations are attributed to the innermost open scope (see :meth:`scope`);
    ``regions`` maps each label to its exclusive counts, so the regions always
    sum to the totals. Not thread safe: use one counter per thread.
    """

    label: str = ""
    mults: int = 0
    adds: int = 0
    regions: dict = field(default_factory=dict)
    _stack: list = field(default_factory=list, repr=False)

    def _region(self):
        key = self._stack[-1] if self._stack else self.label
        r = self.regions.get(key)
        if r is None:
            r = self.regions[key] = Counts()
        return r

    def count_mul(self, k=1):
        self.mults += k
        self._region().mults += k

    def count_add(self, k=1):
        self.adds += k
        self._region().adds += k

    def reset(self):
        self.mults = 0
        self.adds = 0
        self.regions.clear()

    @property
    def counts(self):
        return Counts(self.mults, self.adds)

    def region(self, label):
        """Exclusive counts attributed to ``label`` so far."""
        r = self.regions.get(label, Counts())
        return Counts(r.mults, r.adds)

    @contextlib.contextmanager
    def scope(self, label):
        """Attribute operations inside the block to ``label``.

        Yields a :class:`Counts` that is filled in on exit with the inclusive
        delta of the block (nested scopes included).
        """
        delta = Counts()
        start = self.counts
        self._stack.append(label)
        try:
            yield delta
        finally:
            self._stack.pop()
            d = self.counts - start
            delta.mults, delta.adds = d.mults, d.adds


def counting_scope(ctx, label, body, *args, **kwargs):
    """Run ``body(*args, **kwargs)`` inside ``ctx.scope(label)``.

    Returns ``(result, counts)``.
    """
    with ctx.scope(label) as delta:
        result = body(*args, **kwargs)
    return result, delta


def _size(a, b=None):
    if b is None:
        return a.size if isinstance(a, np.ndarray) else 1
    a_arr = isinstance(a, np.ndarray)
    b_arr = isinstance(b, np.ndarray)
    if a_arr and b_arr:
        if a.shape == b.shape or b.size == 1:
            return a.size
        if a.size == 1:
            return b.size
        return int(np.prod(np.broadcast_shapes(a.shape, b.shape), dtype=np.int64))
    if a_arr:
        return a.size
    if b_arr:
        return b.size
    return 1


# ---------------------------------------------------------------------------
# rings


class Ring:
    """Base class: subclasses provide ``_mul``, ``_add``, ``_sub``, ``_neg``."""

    name = "ring"
    dtype = object
    exact = True

    def mul(self, ctx, a, b):
        ctx.count_mul(_size(a, b))
        return self._mul(a, b)

    def add(self, ctx, a, b):
        ctx.count_add(_size(a, b))
        return self._add(a, b)

    def sub(self, ctx, a, b):
        ctx.count_add(_size(a, b))
        return self._sub(a, b)

    def neg(self, ctx, a):
        # a sign flip is charged as one add (0 - a)
        ctx.count_add(_size(a))
        return self._neg(a)

    def scale(self, ctx, c, a):
        """Multiply by an integer constant; ±1 is free, anything else counts."""
        if c == 1:
            return a
        if c == -1:
            return self.neg(ctx, a)
        return self.mul(ctx, self.coerce(c), a)

    def dot(self, ctx, a, b):
        """Sum of products of two equal-length Python sequences."""
        n = len(a)
        if n == 0:
            return self.zero
        ctx.count_mul(n)
        ctx.count_add(n - 1)
        return self._reduce(sum(x * y for x, y in zip(a, b)))

    def _reduce(self, v):
        return v

    def _mul(self, a, b):
        return a * b

    def _add(self, a, b):
        return a + b

    def _sub(self, a, b):
        return a - b

    def _neg(self, a):
        return -a

    @property
    def zero(self):
        return self.coerce(0)

    @property
    def one(self):
        return self.coerce(1)

    def coerce(self, v):
        raise NotImplementedError

    def contains(self, v):
        raise NotImplementedError

    def array(self, values):
        """Convert a sequence (or nested sequence) to this ring's array form."""
        arr = np.asarray(values, dtype=self.dtype)
        if arr.dtype == object:
            flat = [self.coerce(v) for v in arr.ravel()]
            out = np.empty(arr.shape, dtype=object)
            out.ravel()[:] = flat if flat else []
            return out
        return self._array_reduce(arr)

    def _array_reduce(self, arr):
        return arr

    def zeros(self, shape):
        if self.dtype == object:
            out = np.empty(shape, dtype=object)
            out.fill(self.zero)
            return out
        return np.zeros(shape, dtype=self.dtype)

    def equal(self, a, b):
        return bool(np.array_equal(np.asarray(a), np.asarray(b)))


@dataclass(frozen=True)
class IntegerRing(Ring):
    """Exact integers (Python ``int``, arbitrary precision)."""

    name = "int"

    def coerce(self, v):
        if isinstance(v, (bool, np.bool_)) or not isinstance(v, (int, np.integer)):
            if isinstance(v, Fraction) and v.denominator == 1:
                return int(v)
            raise TypeError(f"{v!r} is not an integer")
        return int(v)

    def contains(self, v):
        return isinstance(v, (int, np.integer)) and not isinstance(v, (bool, np.bool_))

    def __str__(self):
        return "Z"


@dataclass(frozen=True)
class RationalRing(Ring):
    """Exact rationals (:class:`fractions.Fraction`)."""

    name = "rational"

    def coerce(self, v):
        if isinstance(v, (int, np.integer, Fraction)) and not isinstance(v, bool):
            return Fraction(int(v)) if not isinstance(v, Fraction) else v
        raise TypeError(f"{v!r} is not rational")

    def contains(self, v):
        return isinstance(v, (int, Fraction)) and not isinstance(v, bool)

    def __str__(self):
        return "Q"


@dataclass(frozen=True)
class ComplexRing(Ring):
    """IEEE double complex numbers; comparisons go through :func:`allclose`."""

    atol: float = DEFAULT_ATOL
    rtol: float = DEFAULT_RTOL

    name = "complex"
    dtype = np.complex128
    exact = False

    def coerce(self, v):
        if isinstance(v, (int, float, complex, np.number)) and not isinstance(v, bool):
            return complex(v)
        raise TypeError(f"{v!r} is not a complex number")

    def contains(self, v):
        return isinstance(v, (complex, np.complexfloating))

    def equal(self, a, b):
        return allclose(a, b, self.atol, self.rtol)

    def __str__(self):
        return "C"


@dataclass(frozen=True)
class ModRing(Ring):
    """Residues mod an odd prime ``q``, always kept in ``[0, q)``.

    Arrays use int64 while ``q*q`` fits in 63 bits, Python ints otherwise.
    """

    q: int

    name = "modq"

    def __post_init__(self):
        if self.q < 3 or self.q % 2 == 0:
            raise ValueError(f"modulus must be an odd prime >= 3, got {self.q}")

    @property
    def dtype(self):
        return np.int64 if (self.q - 1) ** 2 < 2**63 else object

    def coerce(self, v):
        if isinstance(v, (bool, np.bool_)) or not isinstance(v, (int, np.integer)):
            raise TypeError(f"{v!r} is not an integer residue")
        return int(v) % self.q

    def contains(self, v):
        return (isinstance(v, (int, np.integer)) and not isinstance(v, (bool, np.bool_))
                and 0 <= v < self.q)

    def _array_reduce(self, arr):
        return arr % self.q

    def _reduce(self, v):
        return v % self.q

    def _mul(self, a, b):
        return (a * b) % self.q

    def _add(self, a, b):
        return (a + b) % self.q

    def _sub(self, a, b):
        return (a - b) % self.q

    def _neg(self, a):
        return (-a) % self.q

    def inv(self, a):
        return pow(int(a), -1, self.q)

    def __str__(self):
        return f"Z_{self.q}"


ExactInt = IntegerRing
Rational = RationalRing
Complex = ComplexRing
ModQ = ModRing


def parse_ring(text):
    """``int``, ``rational``, ``complex`` or ``mod:<q>`` / an integer modulus."""
    t = text.strip().lower()
    if t in ("int", "z", "exactint"):
        return IntegerRing()
    if t in ("rational", "q", "fraction"):
        return RationalRing()
    if t in ("complex", "c"):
        return ComplexRing()
    if t.startswith("mod:"):
        t = t[4:]
    return ModRing(int(t))


# ---------------------------------------------------------------------------
# checked scalar API


@dataclass(frozen=True)
class Scalar:
    """A value tagged with its ring, for ring-checked arithmetic."""

    ring: Ring
    value: object

    @classmethod
    def of(cls, ring, value):
        return cls(ring, ring.coerce(value))


def _same_ring(a, b):
    if a.ring != b.ring:
        raise RingMismatchError(f"cannot combine {a.ring} and {b.ring}")
    return a.ring


def ring_mul(ctx, a, b):
    ring = _same_ring(a, b)
    return Scalar(ring, ring.mul(ctx, a.value, b.value))


def ring_add(ctx, a, b):
    ring = _same_ring(a, b)
    return Scalar(ring, ring.add(ctx, a.value, b.value))


def ring_sub(ctx, a, b):
    ring = _same_ring(a, b)
    return Scalar(ring, ring.sub(ctx, a.value, b.value))


# ---------------------------------------------------------------------------
# comparison


def allclose(a, b, atol=DEFAULT_ATOL, rtol=DEFAULT_RTOL):
    """Elementwise ``|a - b| <= atol + rtol*|b|``."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape != b.shape:
        return False
    return bool(np.all(np.abs(a - b) <= atol + rtol * np.abs(b)))


def max_rel_error(a, b):
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    scale = max(float(np.max(np.abs(b), initial=0.0)), 1e-300)
    return float(np.max(np.abs(a - b), initial=0.0)) / scale


# ---------------------------------------------------------------------------
# random inputs


@dataclass
class SeededRng:
    """numpy PCG64 stream; same seed gives the same draws on every platform."""

    seed: int
    algorithm: str = RNG_ALGORITHM
    generator: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        self.generator = np.random.Generator(np.random.PCG64(self.seed))


def random_vector(rng, ring, n, shape=None):
    """``n`` random ring elements (``shape`` prepends batch axes).

    ModRing: uniform in ``[0, q)``. IntegerRing: uniform in ``[-256, 256]``.
    RationalRing: ``k/d`` with ``k`` in ``[-256, 256]`` and ``d`` in ``[1, 16]``.
    ComplexRing: real and imaginary parts uniform in ``[-1, 1)``.
    """
    if n < 0:
        raise ValueError("length must be non-negative")
    g = rng.generator
    full = tuple(shape or ()) + (n,)
    if isinstance(ring, ModRing):
        if ring.dtype is object:
            if ring.q > 2**64:
                raise ValueError("random residues need q < 2**64")
            return g.integers(0, ring.q, size=full, dtype=np.uint64).astype(object)
        return g.integers(0, ring.q, size=full, dtype=np.int64)
    if isinstance(ring, IntegerRing):
        return ring.array(g.integers(-INT_RANGE, INT_RANGE + 1, size=full).astype(object))
    if isinstance(ring, RationalRing):
        num = g.integers(-INT_RANGE, INT_RANGE + 1, size=full)
        den = g.integers(1, 17, size=full)
        out = np.empty(full, dtype=object)
        out.ravel()[:] = [Fraction(int(a), int(b)) for a, b in zip(num.ravel(), den.ravel())]
        return out
    if isinstance(ring, ComplexRing):
        return g.uniform(-1, 1, size=full) + 1j * g.uniform(-1, 1, size=full)
    raise TypeError(f"unsupported ring {ring!r}")


def is_power_of_two(n):
    return isinstance(n, (int, np.integer)) and n >= 1 and (n & (n - 1)) == 0
