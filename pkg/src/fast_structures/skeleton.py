"""The common dataflow behind every fast structure in the package.

Split both operands into L parts, pre-add them, take M products, post-add
into 2L-1 partial results and fold the top L-1 partials back onto the bottom
ones through a *wrap* element. What the parts are, how two of them multiply
and what the wrap element does is the only thing that changes between
domains:

=============  ===================  ==========================================
domain         parts                wrap element
=============  ===================  ==========================================
convolution    scalars              none (keep all 2L-1 outputs)
parallel FIR   polyphase streams    one-block delay
negacyclic     half-size polys      multiplication by x^2 (negacyclic shift)
DFT domain     half-size spectra    multiplication by DFT{0,1,0,...,0}
NTT domain     half-size spectra    multiplication by NTT{0,1,0,...,0}
=============  ===================  ==========================================
"""

from __future__ import annotations

from typing import Callable, NamedTuple

from .bilinear import apply_post, apply_pre


class SkeletonResult(NamedTuple):
    products: list
    partials: list
    outputs: list


def wraparound(ctx, ring, partials, L, wrap):
    """``out[p] = partials[p] + wrap(partials[p + L])`` for ``p < L - 1``."""
    out = list(partials[:L])
    for p in range(L - 1):
        out[p] = ring.add(ctx, out[p], wrap(partials[p + L]))
    return out


def fast_parallel(ctx, ring, alg, h_parts, x_parts, multiply: Callable, wrap: Callable | None,
                  h_combined=None):
    """Run ``alg`` over part lists and fold with ``wrap``.

    ``h_combined`` skips the h-side pre-additions (fixed coefficients that
    were combined ahead of time). With ``wrap=None`` the outputs are the raw
    2L-1 partials.
    """
    hc = h_combined if h_combined is not None else apply_pre(ctx, ring, alg, h_parts, "h")
    xc = apply_pre(ctx, ring, alg, x_parts, "x")
    products = [multiply(a, b) for a, b in zip(hc, xc)]
    partials = apply_post(ctx, ring, alg, products)
    if wrap is None:
        return SkeletonResult(products, partials, partials)
    return SkeletonResult(products, partials, wraparound(ctx, ring, partials, alg.L, wrap))
