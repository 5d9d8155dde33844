"""Extremal projectors for sl(n) on truncated universal Verma modules.

Exact symbolic construction of extremal and relative extremal
projectors, verification of their factorization identities, and a
constructive solver for the non-commutative relative factors.
"""

from ._kernel import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"
__all__ = ["KERNEL_BACKEND", "__version__"]
