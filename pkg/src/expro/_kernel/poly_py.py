"""Pure-Python polynomial kernel.

A polynomial in x_1..x_n with integer coefficients is a dict mapping
exponent tuples (length n) to nonzero ints.  The empty dict is zero.
Rational coefficients are handled one level up (expro.ratfield) by an
integer-polynomial pair plus a Fraction scale, so every function here
works on plain int dicts; this keeps the hot loops allocation-light and
lets the compiled twin (_poly_cy) replace them one for one.

Monomial order is graded lexicographic: compare (total degree, exps).
"""

from fractions import Fraction
from math import gcd

BACKEND = "python"


def p_zero():
    return {}


def p_const(nvars, c):
    if c == 0:
        return {}
    return {(0,) * nvars: c}


def p_var(nvars, i):
    exps = [0] * nvars
    exps[i] = 1
    return {tuple(exps): 1}


def p_is_const(a):
    if not a:
        return True
    if len(a) > 1:
        return False
    (exps,) = a.keys()
    return not any(exps)


def p_add(a, b):
    if not a:
        return dict(b)
    if not b:
        return dict(a)
    out = dict(a)
    for exps, c in b.items():
        s = out.get(exps, 0) + c
        if s:
            out[exps] = s
        else:
            del out[exps]
    return out


def p_sub(a, b):
    if not b:
        return dict(a)
    out = dict(a)
    for exps, c in b.items():
        s = out.get(exps, 0) - c
        if s:
            out[exps] = s
        else:
            del out[exps]
    return out


def p_neg(a):
    return {exps: -c for exps, c in a.items()}


def p_mul_int(a, c):
    if c == 0:
        return {}
    if c == 1:
        return dict(a)
    return {exps: co * c for exps, co in a.items()}


def p_mul(a, b):
    if not a or not b:
        return {}
    if len(b) > len(a):
        a, b = b, a
    out = {}
    for eb, cb in b.items():
        for ea, ca in a.items():
            key = tuple(map(sum, zip(ea, eb)))
            s = out.get(key, 0) + ca * cb
            if s:
                out[key] = s
            elif key in out:
                del out[key]
    return out


def p_pow(a, k):
    if k == 0:
        if not a:
            raise ValueError("0^0 in polynomial power")
        nvars = len(next(iter(a)))
        return p_const(nvars, 1)
    out = a
    for _ in range(k - 1):
        out = p_mul(out, a)
    return out


def p_content(a):
    """gcd of the coefficients, 0 for the zero polynomial."""
    g = 0
    for c in a.values():
        g = gcd(g, c)
        if g == 1:
            return 1
    return g


def grlex_key(exps):
    return (sum(exps), exps)


def p_lead(a):
    """(exps, coeff) of the graded-lex leading term; None for zero."""
    if not a:
        return None
    exps = max(a, key=grlex_key)
    return exps, a[exps]


def p_try_div(a, b):
    """Exact quotient a/b over the integers, or None.

    b must be nonzero.  If b is primitive this decides divisibility
    over Q as well (Gauss).
    """
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    if not a:
        return {}
    lb, cb = p_lead(b)
    rem = dict(a)
    quo = {}
    while rem:
        la, ca = p_lead(rem)
        qe = tuple(x - y for x, y in zip(la, lb))
        if any(e < 0 for e in qe):
            return None
        qc, r = divmod(ca, cb)
        if r:
            return None
        quo[qe] = qc
        for eb, coef in b.items():
            key = tuple(map(sum, zip(eb, qe)))
            s = rem.get(key, 0) - coef * qc
            if s:
                rem[key] = s
            elif key in rem:
                del rem[key]
    return quo


def p_eval(a, point):
    """Exact value at a point (ints or Fractions)."""
    total = Fraction(0)
    for exps, c in a.items():
        v = Fraction(c)
        for x, e in zip(point, exps):
            if e:
                v *= Fraction(x) ** e
        total += v
    return total


def p_eval_int(a, point):
    """Value at an integer point, as an int."""
    total = 0
    for exps, c in a.items():
        v = c
        for x, e in zip(point, exps):
            if e:
                v *= x**e
        total += v
    return total


def p_shift_int(a, nu):
    """Substitute x_i -> x_i + nu_i for an integer vector nu."""
    if not a or not any(nu):
        return dict(a)
    shifted_vars = [i for i, s in enumerate(nu) if s]
    nvars = len(nu)
    out = {}
    for exps, c in a.items():
        # expand prod_i (x_i + nu_i)^{e_i} term by term
        parts = [(tuple(0 if i in shifted_vars else e for i, e in enumerate(exps)), c)]
        for i in shifted_vars:
            e = exps[i]
            if e == 0:
                continue
            row = _binom_row(e)
            new_parts = []
            for base_exps, base_c in parts:
                powers = 1
                for j in range(e, -1, -1):
                    ne = list(base_exps)
                    ne[i] += j
                    new_parts.append((tuple(ne), base_c * row[j] * powers))
                    powers *= nu[i]
                # j runs e..0, nu power runs 0..e
            parts = new_parts
        for exps2, c2 in parts:
            s = out.get(exps2, 0) + c2
            if s:
                out[exps2] = s
            elif exps2 in out:
                del out[exps2]
        _ = nvars
    return out


_BINOM_CACHE = {}


def _binom_row(n):
    row = _BINOM_CACHE.get(n)
    if row is None:
        row = [1]
        for k in range(n):
            row.append(row[-1] * (n - k) // (k + 1))
        _BINOM_CACHE[n] = row
    return row


def p_project_modp(a, var, vals, p):
    """Dense coefficient list of a(x_var) after substituting vals mod p.

    vals is a full-length tuple; entry `var` is ignored.  Returns a list
    c[0..d] with coefficients in F_p (possibly all zero).
    """
    deg = 0
    for exps in a:
        if exps[var] > deg:
            deg = exps[var]
    out = [0] * (deg + 1)
    for exps, c in a.items():
        v = c % p
        for i, e in enumerate(exps):
            if e and i != var:
                v = (v * pow(vals[i] % p, e, p)) % p
        out[exps[var]] = (out[exps[var]] + v) % p
    while out and out[-1] == 0:
        out.pop()
    return out


def u_gcd_modp(u, v, p):
    """Monic gcd of dense univariate coefficient lists over F_p."""
    u = [c % p for c in u]
    v = [c % p for c in v]
    while v and not v[-1]:
        v.pop()
    while u and not u[-1]:
        u.pop()
    while v:
        # u mod v
        inv = pow(v[-1], p - 2, p)
        while len(u) >= len(v):
            c = (u[-1] * inv) % p
            shift = len(u) - len(v)
            for i, vc in enumerate(v):
                u[i + shift] = (u[i + shift] - c * vc) % p
            while u and not u[-1]:
                u.pop()
            if not u:
                break
        u, v = v, u
    if not u:
        return []
    inv = pow(u[-1], p - 2, p)
    return [(c * inv) % p for c in u]
