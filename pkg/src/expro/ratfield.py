"""The coefficient field Frac U(h).

Elements are exact rational functions in x_1..x_n over Q, stored as

    value = scale * num / den

with `num`, `den` primitive integer polynomials (content 1, positive
graded-lex leading coefficient) satisfying gcd(num, den) = 1, and
`scale` a Fraction carrying sign and rational content.  Zero is stored
uniquely as 0 * 0/1.  The representation is canonical, so structural
equality is field equality.

Reduction strategy: monomial content and trial division catch nearly
every cancellation arising here (denominators are built from explicit
linear factors).  A sound mod-p projection certificate detects coprime
pairs cheaply; only genuinely entangled pairs reach the subresultant
fallback.
"""

from __future__ import annotations

import random
from fractions import Fraction

from . import _kernel as K
from .errors import ParseError, PoleAtPointError, ZeroDivisorError

_CERT_PRIME = 2147483647
_CERT_TRIES = 6


def _normalize_sign_content(p):
    """Return (primitive positive-lc polynomial, extracted content) for p != {}."""
    c = K.p_content(p)
    _, lead = K.p_lead(p)
    if lead < 0:
        c = -c
    if c != 1:
        p = {e: v // c for e, v in p.items()}
    return p, c


def _gcd_vars(p):
    """Indices of variables occurring in p."""
    out = set()
    for exps in p:
        for i, e in enumerate(exps):
            if e:
                out.add(i)
    return out


def _max_deg(p, var):
    return max((exps[var] for exps in p), default=0)


def _coprime_certificate(a, b, var, rng):
    """True if gcd(a, b) provably has degree 0 in x_var.

    Projects both polynomials to univariate in x_var modulo a large
    prime at random points.  Sound: if the projected degree of `a`
    equals deg_var(a) (so the leading coefficient survived) and the
    univariate gcd is constant, the true gcd has degree 0 in x_var.
    """
    da = _max_deg(a, var)
    nvars = len(next(iter(a)))
    for _ in range(_CERT_TRIES):
        vals = tuple(rng.randrange(_CERT_PRIME) for _ in range(nvars))
        ua = K.p_project_modp(a, var, vals, _CERT_PRIME)
        if len(ua) - 1 != da:
            continue
        ub = K.p_project_modp(b, var, vals, _CERT_PRIME)
        if not ub:
            continue
        g = K.u_gcd_modp(ua, ub, _CERT_PRIME)
        if len(g) == 1:
            return True
        return False
    return False


def _as_univar(p, var):
    """Split p into {deg in x_var: coefficient poly with x_var zeroed}."""
    out = {}
    for exps, c in p.items():
        d = exps[var]
        key = exps[:var] + (0,) + exps[var + 1 :]
        coeff = out.setdefault(d, {})
        coeff[key] = c
    return out


def _from_univar(u, var):
    out = {}
    for d, coeff in u.items():
        for exps, c in coeff.items():
            key = exps[:var] + (d,) + exps[var + 1 :]
            out[key] = c
    return out


def _u_deg(u):
    return max(u) if u else -1


def _u_content(u):
    """gcd of the polynomial coefficients of a univariate layout."""
    polys = list(u.values())
    g = polys[0]
    for p in polys[1:]:
        g = poly_gcd(g, p)
        if K.p_is_const(g):
            nvars = len(next(iter(g)))
            return K.p_const(nvars, 1)
    return g


def _u_scale(u, poly):
    return {d: K.p_mul(c, poly) for d, c in u.items()}


def _u_divide_exact(u, poly):
    out = {}
    for d, c in u.items():
        q = K.p_try_div(c, poly)
        if q is None:
            raise ArithmeticError("inexact content division in PRS")
        if q:
            out[d] = q
    return out


def _pseudo_rem(A, B, var):
    """Pseudo-remainder of univariate layouts A, B in x_var."""
    dB = _u_deg(B)
    lb = B[dB]
    R = dict(A)
    while _u_deg(R) >= dB:
        dR = _u_deg(R)
        lr = R[dR]
        # R := lb * R - lr * x^(dR-dB) * B
        R = _u_scale(R, lb)
        shift = dR - dB
        for d, c in B.items():
            key = d + shift
            cur = R.get(key, K.p_zero())
            newc = K.p_sub(cur, K.p_mul(lr, c))
            if newc:
                R[key] = newc
            elif key in R:
                del R[key]
    return R


def _prs_gcd(a, b, var):
    """Primitive PRS gcd with main variable x_var (both args nonzero)."""
    A = _as_univar(a, var)
    B = _as_univar(b, var)
    if _u_deg(A) < _u_deg(B):
        A, B = B, A
    ca = _u_content(A)
    cb = _u_content(B)
    cont = poly_gcd(ca, cb)
    A = _u_divide_exact(A, ca)
    B = _u_divide_exact(B, cb)
    while True:
        dB = _u_deg(B)
        if dB < 0:
            g = _from_univar(A, var)
            break
        if dB == 0:
            nvars = len(next(iter(a)))
            g = K.p_const(nvars, 1)
            break
        R = _pseudo_rem(A, B, var)
        if not R:
            g = _from_univar(B, var)
            break
        R = _u_divide_exact(R, _u_content(R))
        A, B = B, R
    g, _ = _normalize_sign_content(g)
    return K.p_mul(cont, g)


def poly_gcd(a, b):
    """gcd of integer polynomials, primitive with positive leading coeff.

    Assumes both inputs are primitive; the result is then the gcd up to
    sign over Q as well.
    """
    if not a:
        return dict(b)
    if not b:
        return dict(a)
    if a == b:
        return dict(a)
    nvars = len(next(iter(a)))
    if K.p_is_const(a) or K.p_is_const(b):
        return K.p_const(nvars, 1)
    if K.p_try_div(a, b) is not None:
        return dict(b)
    if K.p_try_div(b, a) is not None:
        return dict(a)
    common = _gcd_vars(a) & _gcd_vars(b)
    if not common:
        return K.p_const(nvars, 1)
    rng = random.Random(0xC0FFEE ^ (len(a) * 1009 + len(b)))
    hard = [v for v in sorted(common) if not _coprime_certificate(a, b, v, rng)]
    if not hard:
        return K.p_const(nvars, 1)
    # a single PRS pass in any entangled variable yields the full gcd
    return _prs_gcd(a, b, hard[0])


class RatFunc:
    """Exact rational function in x_1..x_n; immutable and canonical."""

    __slots__ = ("nvars", "num", "den", "scale")

    def __init__(self, nvars, num, den, scale, _reduced=False):
        self.nvars = nvars
        if not num or scale == 0:
            self.num = {}
            self.den = K.p_const(nvars, 1)
            self.scale = Fraction(0)
            return
        if not den:
            raise ZeroDivisorError("zero denominator")
        num, cn = _normalize_sign_content(num)
        den, cd = _normalize_sign_content(den)
        scale = scale * Fraction(cn, cd)
        if not _reduced and not K.p_is_const(den):
            g = poly_gcd(num, den)
            if not K.p_is_const(g):
                num = K.p_try_div(num, g)
                den = K.p_try_div(den, g)
                num, cn = _normalize_sign_content(num)
                den, cd = _normalize_sign_content(den)
                scale = scale * Fraction(cn, cd)
        self.num = num
        self.den = den
        self.scale = scale

    # -- constructors ------------------------------------------------

    @staticmethod
    def zero(nvars):
        return RatFunc(nvars, {}, K.p_const(nvars, 1), Fraction(0), _reduced=True)

    @staticmethod
    def one(nvars):
        return RatFunc.constant(nvars, 1)

    @staticmethod
    def constant(nvars, q):
        q = Fraction(q)
        return RatFunc(nvars, K.p_const(nvars, 1), K.p_const(nvars, 1), q, _reduced=True)

    @staticmethod
    def var(nvars, i):
        """x_{i+1} for 0-based i."""
        if not 0 <= i < nvars:
            raise IndexError("variable index out of range")
        return RatFunc(nvars, K.p_var(nvars, i), K.p_const(nvars, 1), Fraction(1), _reduced=True)

    @staticmethod
    def from_linear(nvars, coeffs, const=0):
        """Polynomial sum(coeffs[i] * x_{i+1}) + const with rational data."""
        terms = {}
        dens = [Fraction(c).denominator for c in coeffs] + [Fraction(const).denominator]
        L = 1
        for d in dens:
            L = L * d // _int_gcd(L, d)
        for i, c in enumerate(coeffs):
            c = Fraction(c) * L
            if c:
                e = [0] * nvars
                e[i] = 1
                terms[tuple(e)] = int(c)
        c0 = Fraction(const) * L
        if c0:
            terms[(0,) * nvars] = int(c0)
        return RatFunc(nvars, terms, K.p_const(nvars, 1), Fraction(1, L), _reduced=True)

    # -- predicates --------------------------------------------------

    def is_zero(self):
        return not self.num

    def is_one(self):
        return (
            self.scale == 1
            and K.p_is_const(self.num)
            and K.p_is_const(self.den)
            and bool(self.num)
        )

    def is_polynomial(self):
        return K.p_is_const(self.den)

    def is_constant(self):
        return K.p_is_const(self.num) and K.p_is_const(self.den)

    def as_fraction(self):
        """Value as a Fraction; only valid for constants."""
        if self.is_zero():
            return Fraction(0)
        if not self.is_constant():
            raise ValueError("not a constant")
        return self.scale

    # -- arithmetic --------------------------------------------------

    def _check(self, other):
        if self.nvars != other.nvars:
            raise ValueError("mixed variable counts")

    def __add__(self, other):
        if not isinstance(other, RatFunc):
            return NotImplemented
        self._check(other)
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        s1, s2 = self.scale, other.scale
        q = s1.denominator * s2.denominator
        a = s1.numerator * s2.denominator
        b = s2.numerator * s1.denominator
        if self.den == other.den:
            num = K.p_add(K.p_mul_int(self.num, a), K.p_mul_int(other.num, b))
            return RatFunc(self.nvars, num, self.den, Fraction(1, q))
        num = K.p_add(
            K.p_mul_int(K.p_mul(self.num, other.den), a),
            K.p_mul_int(K.p_mul(other.num, self.den), b),
        )
        den = K.p_mul(self.den, other.den)
        return RatFunc(self.nvars, num, den, Fraction(1, q))

    def __neg__(self):
        if self.is_zero():
            return self
        return RatFunc(self.nvars, self.num, self.den, -self.scale, _reduced=True)

    def __sub__(self, other):
        if not isinstance(other, RatFunc):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, RatFunc):
            return NotImplemented
        self._check(other)
        if self.is_zero() or other.is_zero():
            return RatFunc.zero(self.nvars)
        n1, d1 = self.num, self.den
        n2, d2 = other.num, other.den
        # cross-cancel so the product needs no further gcd
        if not K.p_is_const(n1) and not K.p_is_const(d2):
            g = poly_gcd(n1, d2)
            if not K.p_is_const(g):
                n1 = K.p_try_div(n1, g)
                d2 = K.p_try_div(d2, g)
        if not K.p_is_const(n2) and not K.p_is_const(d1):
            g = poly_gcd(n2, d1)
            if not K.p_is_const(g):
                n2 = K.p_try_div(n2, g)
                d1 = K.p_try_div(d1, g)
        return RatFunc(
            self.nvars,
            K.p_mul(n1, n2),
            K.p_mul(d1, d2),
            self.scale * other.scale,
            _reduced=True,
        )

    def inverse(self):
        if self.is_zero():
            raise ZeroDivisorError("inverse of zero")
        return RatFunc(self.nvars, self.den, self.num, 1 / self.scale, _reduced=True)

    def __truediv__(self, other):
        if not isinstance(other, RatFunc):
            return NotImplemented
        return self * other.inverse()

    def __eq__(self, other):
        if not isinstance(other, RatFunc):
            return NotImplemented
        return (
            self.nvars == other.nvars
            and self.scale == other.scale
            and self.num == other.num
            and self.den == other.den
        )

    __hash__ = None

    def __repr__(self):
        return f"RatFunc({self.to_string()!r})"

    def __str__(self):
        return self.to_string()

    # -- actions -----------------------------------------------------

    def shift(self, nu):
        """h^nu: substitute x_i -> x_i + nu_i."""
        if self.is_zero() or not any(nu):
            return self
        if all(Fraction(v).denominator == 1 for v in nu):
            inu = tuple(int(v) for v in nu)
            return RatFunc(
                self.nvars,
                K.p_shift_int(self.num, inu),
                K.p_shift_int(self.den, inu),
                self.scale,
                _reduced=True,
            )
        num, cn = _shift_frac(self.num, nu)
        den, cd = _shift_frac(self.den, nu)
        return RatFunc(self.nvars, num, den, self.scale * cn / cd, _reduced=True)

    def weyl(self, perm):
        """w.h with (w h)(mu) = h(w^{-1} mu); perm is 0-based one-line."""
        if self.is_zero():
            return self
        return RatFunc(
            self.nvars,
            _apply_perm(self.num, perm),
            _apply_perm(self.den, perm),
            self.scale,
            _reduced=True,
        )

    def dot(self, perm, rho):
        """Affine dot action: conjugate the Weyl action by the rho shift."""
        neg = tuple(-r for r in rho)
        return self.shift(neg).weyl(perm).shift(rho)

    def eval(self, point):
        """Exact value at a rational point; raises on a pole."""
        if self.is_zero():
            return Fraction(0)
        d = K.p_eval(self.den, point)
        if d == 0:
            raise PoleAtPointError(f"denominator vanishes at {point}")
        return self.scale * K.p_eval(self.num, point) / d

    def eval_or_none(self, point):
        try:
            return self.eval(point)
        except PoleAtPointError:
            return None

    def den_vanishes_at(self, point):
        if self.is_zero():
            return False
        return K.p_eval(self.den, point) == 0

    def monic_parts(self):
        """(numerator, denominator) with monic denominator, as coefficient maps."""
        lead = K.p_lead(self.den)
        dl = lead[1] if lead else 1
        num = {e: self.scale * c / dl for e, c in self.num.items()}
        den = {e: Fraction(c, dl) for e, c in self.den.items()}
        return num, den

    def to_string(self):
        if self.is_zero():
            return "0"
        num_s = _poly_str(self.num, self.scale)
        if self.is_polynomial():
            return num_s
        den_s = _poly_str(self.den, Fraction(1))
        return f"({den_s})^-1 * ({num_s})"


def _int_gcd(a, b):
    while b:
        a, b = b, a % b
    return abs(a)


def _apply_perm(p, perm):
    out = {}
    for exps, c in p.items():
        ne = [0] * len(exps)
        for i, e in enumerate(exps):
            ne[perm[i]] = e
        out[tuple(ne)] = c
    return out


def _shift_frac(p, nu):
    """Fraction-vector shift of an int polynomial: (int poly, content)."""
    acc = {}
    nvars = len(nu)
    nu = [Fraction(v) for v in nu]
    for exps, c in p.items():
        parts = [(tuple(0 for _ in range(nvars)), Fraction(c))]
        for i in range(nvars):
            e = exps[i]
            if e == 0:
                continue
            if nu[i] == 0:
                parts = [(b[:i] + (b[i] + e,) + b[i + 1 :], v) for b, v in parts]
                continue
            new_parts = []
            row = _binom_row(e)
            for base, v in parts:
                power = Fraction(1)
                for j in range(e, -1, -1):
                    nb = list(base)
                    nb[i] += j
                    new_parts.append((tuple(nb), v * row[j] * power))
                    power *= nu[i]
            parts = new_parts
        for e2, v in parts:
            acc[e2] = acc.get(e2, Fraction(0)) + v
    acc = {e: v for e, v in acc.items() if v}
    if not acc:
        return {}, Fraction(1)
    L = 1
    for v in acc.values():
        d = v.denominator
        L = L * d // _int_gcd(L, d)
    ip = {e: int(v * L) for e, v in acc.items()}
    return ip, Fraction(1, L)


def _binom_row(n):
    row = [1]
    for k in range(n):
        row.append(row[-1] * (n - k) // (k + 1))
    return row


# -- printing and parsing -------------------------------------------


def _poly_str(p, scale):
    items = sorted(p.items(), key=lambda kv: K.grlex_key(kv[0]), reverse=True)
    pieces = []
    for exps, c in items:
        coeff = Fraction(c) * scale
        mono = "*".join(
            f"x{i + 1}^{e}" if e > 1 else f"x{i + 1}" for i, e in enumerate(exps) if e
        )
        mag = abs(coeff)
        if mono:
            body = mono if mag == 1 else f"{_frac_str(mag)}*{mono}"
        else:
            body = _frac_str(mag)
        if not pieces:
            pieces.append(body if coeff > 0 else f"-{body}")
        else:
            pieces.append(f"+ {body}" if coeff > 0 else f"- {body}")
    return " ".join(pieces)


def _frac_str(q):
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _tokenize(text):
    out = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "()+-*/^":
            out.append(ch)
            i += 1
        elif ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            out.append(text[i:j])
            i = j
        elif ch == "x":
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            if j == i + 1:
                raise ParseError(f"bad variable at {i}")
            out.append(text[i:j])
            i = j
        else:
            raise ParseError(f"unexpected character {ch!r}")
    return out


class _Parser:
    """Recursive-descent parser for sums/products/powers of rationals and x_i."""

    def __init__(self, tokens, nvars):
        self.toks = tokens
        self.pos = 0
        self.nvars = nvars

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def take(self, expect=None):
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input")
        if expect is not None and tok != expect:
            raise ParseError(f"expected {expect!r}, got {tok!r}")
        self.pos += 1
        return tok

    def parse(self):
        v = self.expr()
        if self.peek() is not None:
            raise ParseError(f"trailing input at token {self.pos}")
        return v

    def expr(self):
        sign = 1
        while self.peek() in ("+", "-"):
            if self.take() == "-":
                sign = -sign
        v = self.term()
        if sign < 0:
            v = -v
        while self.peek() in ("+", "-"):
            op = self.take()
            t = self.term()
            v = v + t if op == "+" else v - t
        return v

    def term(self):
        v = self.factor()
        while self.peek() in ("*", "/"):
            op = self.take()
            f = self.factor()
            v = v * f if op == "*" else v / f
        return v

    def factor(self):
        if self.peek() == "-":
            self.take()
            return -self.factor()
        base = self.atom()
        if self.peek() == "^":
            self.take()
            neg = False
            if self.peek() == "-":
                self.take()
                neg = True
            e = int(self.take())
            out = RatFunc.one(self.nvars)
            for _ in range(e):
                out = out * base
            if neg:
                out = out.inverse()
            return out
        return base

    def atom(self):
        tok = self.peek()
        if tok == "(":
            self.take()
            v = self.expr()
            self.take(")")
            return v
        tok = self.take()
        if tok.startswith("x"):
            i = int(tok[1:]) - 1
            if not 0 <= i < self.nvars:
                raise ParseError(f"variable {tok} out of range for n={self.nvars}")
            return RatFunc.var(self.nvars, i)
        if tok.isdigit():
            return RatFunc.constant(self.nvars, int(tok))
        raise ParseError(f"unexpected token {tok!r}")


def parse_ratfunc(text, nvars):
    """Parse the canonical string form (and ordinary expressions) back."""
    return _Parser(_tokenize(text), nvars).parse()


def ratfunc_to_json(h):
    return h.to_string()


def is_dot_invariant(h, perms, rho):
    """True iff dot(w, h) == h for every generator permutation."""
    return all(h.dot(w, rho) == h for w in perms)


def sample_point(nvars, rng, bound=10**6):
    return tuple(rng.randint(-bound, bound) for _ in range(nvars))
