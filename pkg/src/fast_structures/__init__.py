"""One bilinear fast-multiplication kernel, five equivalent fast structures.

Fast convolution, fast parallel FIR filters, fast negacyclic polynomial
multiplication and fast pointwise multiplication in the DFT and NTT domains,
each checked against a direct oracle and instrumented with operation counts.
"""

from .bilinear import (
    BilinearAlgorithm, apply_convolution, direct_convolution, iterate, karatsuba2,
    karatsuba_iterated, schoolbook, validate,
)
from .core import (
    ComplexRing, IntegerRing, ModRing, OpCounter, RationalRing, SeededRng, allclose,
    counting_scope, random_vector,
)

__version__ = "0.1.0"

__all__ = [
    "BilinearAlgorithm", "ComplexRing", "IntegerRing", "ModRing", "OpCounter", "RationalRing",
    "SeededRng", "allclose", "apply_convolution", "counting_scope", "direct_convolution",
    "iterate", "karatsuba2", "karatsuba_iterated", "random_vector", "schoolbook", "validate",
]
