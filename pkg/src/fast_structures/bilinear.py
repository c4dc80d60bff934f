"""Bilinear fast-convolution algorithms.

An L-by-L linear convolution computed as ``post @ ((pre_h @ h) * (pre_x @ x))``
with M pointwise products. The 2x2 Karatsuba algorithm and its Kronecker
iterates are built in; every other fast structure in the package is driven by
one of these.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .core import ComplexRing, IntegerRing, RationalRing, Ring

# Q2 and P2 of the 2x2 fast convolution
KARATSUBA_POST = ((1, 0, 0), (-1, 1, -1), (0, 0, 1))
KARATSUBA_PRE = ((1, 0), (1, 1), (0, 1))


class InvalidAlgorithmError(ValueError):
    pass


def _frozen(m):
    a = np.array(m, dtype=np.int64)
    if a.ndim != 2:
        raise InvalidAlgorithmError(f"expected a matrix, got shape {a.shape}")
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class BilinearAlgorithm:
    """Matrix triple for an L-by-L convolution with M multiplications.

    ``factors`` is ``(outer, inner)`` for algorithms built by :func:`iterate`;
    it lets the pre/post stages run nested (cheaper in adds) while the dense
    matrices stay available for validation and serialization.
    """

    pre_h: np.ndarray
    pre_x: np.ndarray
    post: np.ndarray
    name: str = ""
    factors: tuple = ()

    def __post_init__(self):
        for attr in ("pre_h", "pre_x", "post"):
            object.__setattr__(self, attr, _frozen(getattr(self, attr)))
        object.__setattr__(self, "_programs", {})

    def program(self, stage):
        """Compiled straight-line form of ``"h"``, ``"x"`` (pre) or ``"post"``."""
        prog = self._programs.get(stage)
        if prog is None:
            prog = self._programs[stage] = StageProgram.trace(self, stage)
        return prog

    @property
    def input_len(self):
        return self.pre_h.shape[1]

    @property
    def mult_count(self):
        return self.pre_h.shape[0]

    @property
    def output_len(self):
        return self.post.shape[0]

    L = input_len
    M = mult_count
    K = output_len

    def __eq__(self, other):
        if not isinstance(other, BilinearAlgorithm):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, a), getattr(other, a)) for a in ("pre_h", "pre_x", "post")
        )

    __hash__ = None

    def to_dict(self):
        return {
            "name": self.name,
            "L": int(self.L),
            "M": int(self.M),
            "pre_h": self.pre_h.tolist(),
            "pre_x": self.pre_x.tolist(),
            "post": self.post.tolist(),
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d):
        try:
            alg = cls(d["pre_h"], d["pre_x"], d["post"], name=d.get("name", ""))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidAlgorithmError(f"malformed structure: {exc}") from exc
        for key, val in (("L", alg.L), ("M", alg.M)):
            if key in d and d[key] != val:
                raise InvalidAlgorithmError(f"{key}={d[key]} disagrees with matrices ({val})")
        if alg.pre_x.shape != alg.pre_h.shape or alg.post.shape[1] != alg.M:
            raise InvalidAlgorithmError("matrix shapes are inconsistent")
        return alg

    @classmethod
    def from_json(cls, text):
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidAlgorithmError(f"bad JSON: {exc}") from exc
        if not isinstance(d, dict):
            raise InvalidAlgorithmError("structure JSON must be an object")
        return cls.from_dict(d)


def karatsuba2():
    """The 2x2 fast convolution: 3 products instead of 4."""
    return BilinearAlgorithm(KARATSUBA_PRE, KARATSUBA_PRE, KARATSUBA_POST, name="karatsuba2")


def schoolbook(L):
    """Direct L-by-L convolution as a bilinear algorithm (M = L*L).

    Product ``i*L + j`` is ``h[i]*x[j]``; this is the baseline the fast
    structures are measured against.
    """
    if L < 1:
        raise ValueError("L must be positive")
    pre_h = np.zeros((L * L, L), dtype=np.int64)
    pre_x = np.zeros((L * L, L), dtype=np.int64)
    post = np.zeros((2 * L - 1, L * L), dtype=np.int64)
    for i in range(L):
        for j in range(L):
            m = i * L + j
            pre_h[m, i] = pre_x[m, j] = post[i + j, m] = 1
    return BilinearAlgorithm(pre_h, pre_x, post, name=f"schoolbook{L}")


def iterate(outer, inner):
    """Nest ``inner`` inside ``outer``: L and M multiply.

    Pre-matrices are Kronecker products (outer index major). The post matrix
    is the Kronecker product followed by overlap-add of the outer block
    outputs at stride ``inner.L``.
    """
    for alg in (outer, inner):
        if not validate(alg):
            raise InvalidAlgorithmError(f"cannot iterate invalid algorithm {alg.name or alg!r}")
    L = outer.L * inner.L
    kron_post = np.kron(outer.post, inner.post)
    overlap = np.zeros((2 * L - 1, outer.K * inner.K), dtype=np.int64)
    for ko in range(outer.K):
        for ki in range(inner.K):
            overlap[ko * inner.L + ki, ko * inner.K + ki] = 1
    return BilinearAlgorithm(
        np.kron(outer.pre_h, inner.pre_h),
        np.kron(outer.pre_x, inner.pre_x),
        overlap @ kron_post,
        name=f"{outer.name}*{inner.name}" if outer.name and inner.name else "",
        factors=(outer, inner),
    )


def karatsuba_iterated(k):
    """k-fold iterate of :func:`karatsuba2` (L = 2**k, M = 3**k)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    alg = karatsuba2()
    for _ in range(k - 1):
        alg = iterate(alg, karatsuba2())
    if k > 1:
        object.__setattr__(alg, "name", f"iter:{k}")
    return alg


def builtin(name):
    """Look up ``karatsuba2``, ``iter:k`` or ``schoolbook:L``."""
    name = name.strip()
    if name in ("karatsuba2", "k2", "iter:1"):
        return karatsuba2()
    if name.startswith("iter:"):
        return karatsuba_iterated(int(name[5:]))
    if name.startswith("schoolbook:"):
        return schoolbook(int(name[11:]))
    raise KeyError(f"unknown structure {name!r}")


def validate(alg):
    """True iff ``alg`` computes linear convolution, checked on every (k, i, j)."""
    try:
        L, M, K = alg.L, alg.M, alg.K
        if alg.pre_x.shape != (M, L) or alg.post.shape[1] != M or K != 2 * L - 1:
            return False
        post = alg.post.astype(object)
        ph = alg.pre_h.astype(object)
        px = alg.pre_x.astype(object)
        for k in range(K):
            for i in range(L):
                for j in range(L):
                    total = sum(post[k, m] * ph[m, i] * px[m, j] for m in range(M))
                    if total != (1 if i + j == k else 0):
                        return False
        return True
    except (AttributeError, IndexError, ValueError):
        return False


# ---------------------------------------------------------------------------
# applying the stages to arbitrary ring elements (scalars or arrays)


def _zero_like(ring, p):
    if isinstance(p, np.ndarray):
        return ring.zeros(p.shape)
    return ring.zero


def apply_matrix(ctx, ring, mat, parts):
    """``mat @ parts`` using only adds/subtracts for ±1 entries.

    Each row starts from a positive term where possible so no negation is
    needed; entries with magnitude above one cost a counted multiplication.
    """
    out = []
    for row in mat:
        terms = [(int(c), p) for c, p in zip(row, parts) if c != 0]
        if not terms:
            out.append(_zero_like(ring, parts[0]))
            continue
        terms.sort(key=lambda t: t[0] < 0)
        c, p = terms[0]
        acc = ring.scale(ctx, c, p)
        for c, p in terms[1:]:
            if c > 0:
                acc = ring.add(ctx, acc, ring.scale(ctx, c, p))
            else:
                acc = ring.sub(ctx, acc, ring.scale(ctx, -c, p))
        out.append(acc)
    return out


def _pre_nested(ctx, ring, alg, parts, side):
    if alg.factors:
        outer, inner = alg.factors
        Li, Mi = inner.L, inner.M
        stage = [_pre_nested(ctx, ring, inner, parts[g * Li:(g + 1) * Li], side)
                 for g in range(outer.L)]
        res = [None] * alg.M
        for mi in range(Mi):
            col = _pre_nested(ctx, ring, outer, [stage[g][mi] for g in range(outer.L)], side)
            for mo, v in enumerate(col):
                res[mo * Mi + mi] = v
        return res
    mat = alg.pre_h if side == "h" else alg.pre_x
    return apply_matrix(ctx, ring, mat, parts)


def _post_nested(ctx, ring, alg, w):
    if not alg.factors:
        return apply_matrix(ctx, ring, alg.post, w)
    outer, inner = alg.factors
    Mi, Ki, Li = inner.M, inner.K, inner.L
    stage = [_post_nested(ctx, ring, inner, w[mo * Mi:(mo + 1) * Mi]) for mo in range(outer.M)]
    blocks = [[None] * Ki for _ in range(outer.K)]
    for ki in range(Ki):
        col = _post_nested(ctx, ring, outer, [stage[mo][ki] for mo in range(outer.M)])
        for ko, v in enumerate(col):
            blocks[ko][ki] = v
    s = [None] * alg.K
    for ko in range(outer.K):
        for ki in range(Ki):
            idx = ko * Li + ki
            v = blocks[ko][ki]
            s[idx] = v if s[idx] is None else ring.add(ctx, s[idx], v)
    return s


class _Recorder:
    """Stands in for a ring while tracing: elements are register numbers."""

    def __init__(self, n_inputs):
        self.n = n_inputs
        self.instrs = []

    def _emit(self, *instr):
        self.instrs.append(instr)
        return self.n + len(self.instrs) - 1

    @property
    def zero(self):
        return self._emit("zero")

    def add(self, ctx, a, b):
        return self._emit("+", a, b)

    def sub(self, ctx, a, b):
        return self._emit("-", a, b)

    def neg(self, ctx, a):
        return self._emit("neg", a)

    def scale(self, ctx, c, a):
        if c == 1:
            return a
        if c == -1:
            return self.neg(ctx, a)
        return self._emit("*", c, a)


@dataclass(frozen=True)
class StageProgram:
    """A pre- or post-addition stage as straight-line code.

    Runs on scalars or equal-shape arrays; charges ``adds``/``mults`` per
    element and reduces the outputs into the ring once at the end.
    """

    n_inputs: int
    instrs: tuple
    outputs: tuple
    adds: int
    mults: int
    fn: object = None

    @classmethod
    def trace(cls, alg, stage):
        n_in = alg.M if stage == "post" else alg.L
        rec = _Recorder(n_in)
        regs = list(range(n_in))
        if stage == "post":
            outs = _post_nested(None, rec, alg, regs)
        else:
            outs = _pre_nested(None, rec, alg, regs, stage)
        adds = sum(1 for i in rec.instrs if i[0] in "+-" or i[0] == "neg")
        mults = sum(1 for i in rec.instrs if i[0] == "*")
        lines = [f"def stage({', '.join(f'r{i}' for i in range(n_in))}):"]
        for k, ins in enumerate(rec.instrs):
            dst = f"r{n_in + k}"
            if ins[0] in "+-":
                lines.append(f"    {dst} = r{ins[1]} {ins[0]} r{ins[2]}")
            elif ins[0] == "neg":
                lines.append(f"    {dst} = -r{ins[1]}")
            elif ins[0] == "*":
                lines.append(f"    {dst} = {int(ins[1])} * r{ins[2]}")
            else:
                lines.append(f"    {dst} = r0 * 0")
        lines.append(f"    return ({''.join(f'r{o}, ' for o in outs)})")
        ns = {}
        exec(compile("\n".join(lines), f"<{alg.name or 'bilinear'}:{stage}>", "exec"), ns)
        return cls(n_in, tuple(rec.instrs), tuple(outs), adds, mults, ns["stage"])

    def raw(self, ring, parts):
        """Evaluate without counting; outputs reduced into ``ring``."""
        outs = self.fn(*parts)
        reduce = ring._reduce
        return [reduce(o) if i >= self.n_inputs else o for i, o in zip(self.outputs, outs)]

    def run(self, ctx, ring, parts):
        if len(parts) != self.n_inputs:
            raise ValueError(f"expected {self.n_inputs} inputs, got {len(parts)}")
        size = parts[0].size if isinstance(parts[0], np.ndarray) else 1
        if self.adds:
            ctx.count_add(self.adds * size)
        if self.mults:
            ctx.count_mul(self.mults * size)
        return self.raw(ring, parts)


def apply_pre(ctx, ring, alg, parts, side="x"):
    """Pre-addition stage on L elements, returning M elements."""
    if len(parts) != alg.L:
        raise ValueError(f"expected {alg.L} inputs, got {len(parts)}")
    return alg.program("h" if side == "h" else "x").run(ctx, ring, list(parts))


def apply_post(ctx, ring, alg, w):
    """Post-addition stage: M products to the 2L-1 convolution outputs."""
    if len(w) != alg.M:
        raise ValueError(f"expected {alg.M} products, got {len(w)}")
    return alg.program("post").run(ctx, ring, list(w))


def infer_ring(*seqs):
    """Pick Integer, Rational or Complex from the element types."""
    kinds = set()
    for seq in seqs:
        arr = np.asarray(seq)
        if arr.dtype.kind in "iu":
            kinds.add("int")
        elif arr.dtype.kind in "fc":
            kinds.add("complex")
        else:
            for v in arr.ravel():
                if isinstance(v, bool):
                    raise TypeError("booleans are not ring elements")
                if isinstance(v, (int, np.integer)):
                    kinds.add("int")
                elif isinstance(v, (float, complex, np.floating, np.complexfloating)):
                    kinds.add("complex")
                else:
                    kinds.add("rational")
    if "complex" in kinds:
        return ComplexRing()
    if "rational" in kinds:
        return RationalRing()
    return IntegerRing()


def _as_elements(ring, seq):
    return list(ring.array(seq)) if len(seq) else []


def apply_convolution(ctx, alg, h, x, ring: Ring | None = None):
    """Linear convolution of two length-L vectors through ``alg``.

    Exactly ``alg.M`` multiplications are charged when the matrices only
    hold -1/0/1.
    """
    if len(h) != alg.L or len(x) != alg.L:
        raise ValueError(f"inputs must have length {alg.L}, got {len(h)} and {len(x)}")
    ring = ring or infer_ring(h, x)
    hp = apply_pre(ctx, ring, alg, _as_elements(ring, h), "h")
    xp = apply_pre(ctx, ring, alg, _as_elements(ring, x), "x")
    w = [ring.mul(ctx, a, b) for a, b in zip(hp, xp)]
    return ring.array(apply_post(ctx, ring, alg, w))


def direct_convolution(ctx, h, x, ring: Ring | None = None):
    """Linear convolution from the definition; ``len(h)*len(x)`` products."""
    ring = ring or infer_ring(h, x)
    h = _as_elements(ring, h)
    x = _as_elements(ring, x)
    if not h or not x:
        return ring.array([])
    out = [None] * (len(h) + len(x) - 1)
    for i, hi in enumerate(h):
        for j, xj in enumerate(x):
            p = ring.mul(ctx, hi, xj)
            out[i + j] = p if out[i + j] is None else ring.add(ctx, out[i + j], p)
    return ring.array(out)
