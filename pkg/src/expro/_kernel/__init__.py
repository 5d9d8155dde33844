"""Polynomial kernel with optional compiled backend.

`expro._kernel` re-exports the kernel functions, preferring the Cython
extension when it imported successfully and the environment variable
EXPRO_PURE_PYTHON is not set.  Both backends implement identical
semantics on int-coefficient exponent-dict polynomials; the test suite
runs the shared contract against each available backend.
"""

import os

from . import poly_py

_impl = poly_py
if not os.environ.get("EXPRO_PURE_PYTHON"):
    try:
        from . import _poly_cy

        _impl = _poly_cy
    except ImportError:
        _impl = poly_py

BACKEND = _impl.BACKEND

p_zero = _impl.p_zero
p_const = _impl.p_const
p_var = _impl.p_var
p_is_const = _impl.p_is_const
p_add = _impl.p_add
p_sub = _impl.p_sub
p_neg = _impl.p_neg
p_mul = _impl.p_mul
p_mul_int = _impl.p_mul_int
p_pow = _impl.p_pow
p_content = _impl.p_content
grlex_key = _impl.grlex_key
p_lead = _impl.p_lead
p_try_div = _impl.p_try_div
p_eval = _impl.p_eval
p_eval_int = _impl.p_eval_int
p_shift_int = _impl.p_shift_int
p_project_modp = _impl.p_project_modp
u_gcd_modp = _impl.u_gcd_modp


def available_backends():
    """Names of kernel backends importable in this environment."""
    names = ["python"]
    try:
        from . import _poly_cy  # noqa: F401

        names.append("cython")
    except ImportError:
        pass
    return names
