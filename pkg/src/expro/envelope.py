"""Finite elements of F(g): normal-ordered F^I h E^J sums over Frac U(h).

Multiplication is recursive commutator rewriting against the reference
root order, with memoized monomial products per rank.  Root vectors are
fixed as E_ij = e_ij, F_ij = e_ji, H_ij = e_ii - e_jj, so the gl_n
structure constants [e_ab, e_cd] = d_bc e_ad - d_da e_cb drive every
bracket.  Cartan coefficients pass F and E factors by the shift rule

    h F^I = F^I h^(-|I|),     h E^J = E^J h^(+|J|).

The memo tables grow monotonically and hold pure-function values, so
concurrent readers always observe deterministic contents.
"""

from __future__ import annotations

from functools import lru_cache

from .errors import NotWeightZeroError, ParseError
from .ratfield import RatFunc, _Parser
from .rootsys import root_datum


class PbwContext:
    """Per-rank bracket tables and memoized monomial products."""

    def __init__(self, n):
        self.n = n
        self.datum = root_datum(n)
        self.m = self.datum.m
        self.zero_mi = (0,) * self.m
        self.f_append_memo = {}
        self.e_append_memo = {}
        self.f_merge_memo = {}
        self.e_merge_memo = {}
        self.ef_gen_memo = {}
        self.ef_core_memo = {}
        self.star_memo = {}
        self._wt = {}

    # multi-index helpers ---------------------------------------------

    def mi_weight(self, mi):
        w = self._wt.get(mi)
        if w is None:
            w = self.datum.mi_weight(mi)
            self._wt[mi] = w
        return w

    def mi_bump(self, mi, k, delta=1):
        lst = list(mi)
        lst[k] += delta
        return tuple(lst)

    def unit_symbol(self, p, q):
        """Classify the matrix unit e_pq (p != q) as an E or F generator."""
        if p < q:
            return ("E", self.datum.root_index[(p, q)])
        return ("F", self.datum.root_index[(q, p)])

    def gen_unit(self, kind, k):
        i, j = self.datum.positive_roots[k]
        return (i, j) if kind == "E" else (j, i)

    def bracket(self, x, y):
        """[x, y] for generator symbols; list of ('H', root) or (sym, coeff)."""
        a, b = self.gen_unit(*x)
        c, d = self.gen_unit(*y)
        if b == c and d == a:
            root = (a, b) if a < b else (b, a)
            sign = 1 if a < b else -1
            # [e_ab, e_ba] = e_aa - e_bb = sign * H_root
            return [("H", root, sign)]
        out = []
        if b == c:
            out.append((self.unit_symbol(a, d), 1))
        if d == a:
            out.append((self.unit_symbol(c, b), -1))
        return out

    def h_root_poly(self, root, const=0):
        """H_root + const as a RatFunc polynomial."""
        i, j = root
        coeffs = [0] * self.n
        coeffs[i - 1] = 1
        coeffs[j - 1] = -1
        return RatFunc.from_linear(self.n, coeffs, const)

    # normal ordering inside U(n-) and U(n+) ---------------------------

    def f_append(self, mi, r):
        """F^mi * F_r as {mi': int}."""
        key = (mi, r)
        got = self.f_append_memo.get(key)
        if got is not None:
            return got
        s = max((k for k, e in enumerate(mi) if e), default=-1)
        if s <= r:
            out = {self.mi_bump(mi, r): 1}
        else:
            head = self.mi_bump(mi, s, -1)
            out = {}
            for mi2, c in self.f_append(head, r).items():
                for mi3, c2 in self.f_append(mi2, s).items():
                    out[mi3] = out.get(mi3, 0) + c * c2
            for item in self.bracket(("F", s), ("F", r)):
                kind_k, coeff = item
                assert kind_k[0] == "F", "n- is not closed?"
                for mi3, c2 in self.f_append(head, kind_k[1]).items():
                    out[mi3] = out.get(mi3, 0) + coeff * c2
            out = {k: v for k, v in out.items() if v}
        self.f_append_memo[key] = out
        return out

    def e_append(self, mi, r):
        """E^mi * E_r as {mi': int}."""
        key = (mi, r)
        got = self.e_append_memo.get(key)
        if got is not None:
            return got
        s = max((k for k, e in enumerate(mi) if e), default=-1)
        if s <= r:
            out = {self.mi_bump(mi, r): 1}
        else:
            head = self.mi_bump(mi, s, -1)
            out = {}
            for mi2, c in self.e_append(head, r).items():
                for mi3, c2 in self.e_append(mi2, s).items():
                    out[mi3] = out.get(mi3, 0) + c * c2
            for item in self.bracket(("E", s), ("E", r)):
                kind_k, coeff = item
                assert kind_k[0] == "E", "n+ is not closed?"
                for mi3, c2 in self.e_append(head, kind_k[1]).items():
                    out[mi3] = out.get(mi3, 0) + coeff * c2
            out = {k: v for k, v in out.items() if v}
        self.e_append_memo[key] = out
        return out

    def f_merge(self, a, b):
        """F^a * F^b as {mi: int}."""
        key = (a, b)
        got = self.f_merge_memo.get(key)
        if got is not None:
            return got
        t = next((k for k, e in enumerate(b) if e), None)
        if t is None:
            out = {a: 1}
        else:
            rest = self.mi_bump(b, t, -1)
            out = {}
            for mi2, c in self.f_append(a, t).items():
                for mi3, c2 in self.f_merge(mi2, rest).items():
                    out[mi3] = out.get(mi3, 0) + c * c2
            out = {k: v for k, v in out.items() if v}
        self.f_merge_memo[key] = out
        return out

    def e_merge(self, a, b):
        key = (a, b)
        got = self.e_merge_memo.get(key)
        if got is not None:
            return got
        t = next((k for k, e in enumerate(b) if e), None)
        if t is None:
            out = {a: 1}
        else:
            rest = self.mi_bump(b, t, -1)
            out = {}
            for mi2, c in self.e_append(a, t).items():
                for mi3, c2 in self.e_merge(mi2, rest).items():
                    out[mi3] = out.get(mi3, 0) + c * c2
            out = {k: v for k, v in out.items() if v}
        self.e_merge_memo[key] = out
        return out

    # the E-past-F interchange -----------------------------------------

    def ef_gen(self, J, r):
        """E^J * F_r as {(I', J'): polynomial RatFunc}."""
        key = (J, r)
        got = self.ef_gen_memo.get(key)
        if got is not None:
            return got
        out = {}
        s = max((k for k, e in enumerate(J) if e), default=-1)
        if s < 0:
            e_r = self.mi_bump(self.zero_mi, r)
            out[(e_r, self.zero_mi)] = RatFunc.one(self.n)
        else:
            head = self.mi_bump(J, s, -1)
            # E^J F_r = E^head (F_r E_s + [E_s, F_r])
            for (I2, J2), h in self.ef_gen(head, r).items():
                for J3, c in self.e_append(J2, s).items():
                    _acc(out, (I2, J3), h if c == 1 else h * RatFunc.constant(self.n, c))
            for item in self.bracket(("E", s), ("F", r)):
                if item[0] == "H":
                    _, root, sign = item
                    wt = self.mi_weight(head)
                    i, j = root
                    const = -(wt[i - 1] - wt[j - 1])
                    poly = self.h_root_poly(root, const)
                    if sign < 0:
                        poly = -poly
                    _acc(out, (self.zero_mi, head), poly)
                else:
                    sym, coeff = item
                    cc = RatFunc.constant(self.n, coeff)
                    if sym[0] == "E":
                        for J3, c in self.e_append(head, sym[1]).items():
                            _acc(out, (self.zero_mi, J3), cc * RatFunc.constant(self.n, c))
                    else:
                        for (I3, J3), h in self.ef_gen(head, sym[1]).items():
                            _acc(out, (I3, J3), cc * h)
        out = {k: v for k, v in out.items() if not v.is_zero()}
        self.ef_gen_memo[key] = out
        return out

    def ef_core(self, J, I):
        """E^J * F^I as {(I', J'): polynomial RatFunc}."""
        key = (J, I)
        got = self.ef_core_memo.get(key)
        if got is not None:
            return got
        t = next((k for k, e in enumerate(I) if e), None)
        if t is None:
            out = {(self.zero_mi, J): RatFunc.one(self.n)}
        elif not any(J):
            out = {(I, self.zero_mi): RatFunc.one(self.n)}
        else:
            rest = self.mi_bump(I, t, -1)
            out = {}
            for (K, L), h in self.ef_gen(J, t).items():
                for (K2, L2), h2 in self.ef_core(L, rest).items():
                    wk2 = self.mi_weight(K2)
                    coeff = h.shift(tuple(-x for x in wk2)) * h2
                    if coeff.is_zero():
                        continue
                    for K3, c in self.f_merge(K, K2).items():
                        _acc(out, (K3, L2), coeff * RatFunc.constant(self.n, c) if c != 1 else coeff)
            out = {k: v for k, v in out.items() if not v.is_zero()}
        self.ef_core_memo[key] = out
        return out


def _acc(store, key, val):
    cur = store.get(key)
    if cur is None:
        store[key] = val
    else:
        s = cur + val
        if s.is_zero():
            del store[key]
        else:
            store[key] = s


@lru_cache(maxsize=None)
def pbw_context(n):
    return PbwContext(n)


class PbwElement:
    """Normal-ordered element sum F^I h_{IJ} E^J; immutable."""

    __slots__ = ("n", "terms")

    def __init__(self, n, terms=None):
        self.n = n
        self.terms = dict(terms or {})

    # constructors ------------------------------------------------------

    @staticmethod
    def zero(n):
        return PbwElement(n)

    @staticmethod
    def one(n):
        ctx = pbw_context(n)
        return PbwElement(n, {(ctx.zero_mi, ctx.zero_mi): RatFunc.one(n)})

    @staticmethod
    def cartan(n, h):
        ctx = pbw_context(n)
        if h.is_zero():
            return PbwElement(n)
        return PbwElement(n, {(ctx.zero_mi, ctx.zero_mi): h})

    @staticmethod
    def generator(n, kind, root):
        ctx = pbw_context(n)
        k = ctx.datum.root_index[root]
        mi = ctx.mi_bump(ctx.zero_mi, k)
        if kind == "E":
            return PbwElement(n, {(ctx.zero_mi, mi): RatFunc.one(n)})
        if kind == "F":
            return PbwElement(n, {(mi, ctx.zero_mi): RatFunc.one(n)})
        raise ValueError(f"bad generator kind {kind!r}")

    @staticmethod
    def cartan_h(n, root):
        """H_root as an element."""
        return PbwElement.cartan(n, pbw_context(n).h_root_poly(root))

    # basic structure -----------------------------------------------------

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, PbwElement):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    __hash__ = None

    def term_weight(self, key):
        I, J = key
        ctx = pbw_context(self.n)
        wi = ctx.mi_weight(I)
        wj = ctx.mi_weight(J)
        return tuple(b - a for a, b in zip(wi, wj))

    def ad_weights(self):
        return sorted({self.term_weight(k) for k in self.terms})

    def __add__(self, other):
        if not isinstance(other, PbwElement):
            return NotImplemented
        out = dict(self.terms)
        for k, v in other.terms.items():
            _acc(out, k, v)
        return PbwElement(self.n, out)

    def __neg__(self):
        return PbwElement(self.n, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def lmul_h(self, h):
        """Left multiplication by a Cartan coefficient."""
        ctx = pbw_context(self.n)
        out = {}
        for (I, J), v in self.terms.items():
            wi = ctx.mi_weight(I)
            hv = h.shift(tuple(-x for x in wi)) * v
            if not hv.is_zero():
                out[(I, J)] = hv
        return PbwElement(self.n, out)

    def rmul_h(self, h):
        ctx = pbw_context(self.n)
        out = {}
        for (I, J), v in self.terms.items():
            wj = ctx.mi_weight(J)
            hv = v * h.shift(tuple(-x for x in wj))
            if not hv.is_zero():
                out[(I, J)] = hv
        return PbwElement(self.n, out)

    def scale(self, q):
        c = RatFunc.constant(self.n, q)
        return PbwElement(self.n, {k: v * c for k, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, PbwElement):
            return NotImplemented
        return multiply(self, other)

    def star(self):
        return star(self)

    def hc_project(self):
        return hc_project(self)

    def __repr__(self):
        return f"PbwElement({self.to_string()!r})"

    def to_string(self):
        return pbw_to_string(self)


def multiply(a, b):
    """Normal-ordered product of two PbwElements."""
    if a.n != b.n:
        raise ValueError("mixed ranks")
    ctx = pbw_context(a.n)
    out = {}
    for (I1, J1), h1 in a.terms.items():
        for (I2, J2), h2 in b.terms.items():
            core = ctx.ef_core(J1, I2)
            for (K, L), p in core.items():
                wk = ctx.mi_weight(K)
                wl = ctx.mi_weight(L)
                coeff = h1.shift(tuple(-x for x in wk)) * p * h2.shift(tuple(-x for x in wl))
                if coeff.is_zero():
                    continue
                for I3, cf in ctx.f_merge(I1, K).items():
                    for J3, ce in ctx.e_merge(L, J2).items():
                        c = cf * ce
                        v = coeff if c == 1 else coeff * RatFunc.constant(a.n, c)
                        _acc(out, (I3, J3), v)
    return PbwElement(a.n, out)


def _star_half(ctx, kind, mi):
    """star of a one-sided monomial: star(E^mi) for kind 'E', star(F^mi) for 'F'.

    (x y)* = y* x*, so the factors come out in reversed root order.
    """
    key = ("half", kind, mi)
    got = ctx.star_memo.get(key)
    if got is not None:
        return got
    result = PbwElement.one(ctx.n)
    for k in range(ctx.m - 1, -1, -1):
        for _ in range(mi[k]):
            result = multiply(result, _star_gen(ctx, kind, k))
    ctx.star_memo[key] = result
    return result


def _star_gen(ctx, kind, k):
    """star of a single root vector, derived from simple generators."""
    key = (kind, k)
    got = ctx.star_memo.get(key)
    if got is not None:
        return got
    n = ctx.n
    i, j = ctx.datum.positive_roots[k]
    if j == i + 1:
        out = PbwElement.generator(n, "F" if kind == "E" else "E", (i, j))
    else:
        # E_ij = [E_ik, E_kj] and F_ij = [F_kj, F_ik]; the anti-automorphism
        # reverses each bracket.
        kmid = i + 1
        a = ctx.datum.root_index[(i, kmid)]
        b = ctx.datum.root_index[(kmid, j)]
        if kind == "E":
            x = _star_gen(ctx, "E", b)
            y = _star_gen(ctx, "E", a)
            out = multiply(x, y) - multiply(y, x)
        else:
            x = _star_gen(ctx, "F", a)
            y = _star_gen(ctx, "F", b)
            out = multiply(x, y) - multiply(y, x)
    ctx.star_memo[key] = out
    return out


def star(a):
    """The Hermitian anti-involution: E_a <-> F_a on simple roots, id on h.

    star(F^I h E^J) = star(E^J) h star(F^I); signs on non-simple root
    vectors fall out of the structure constants.
    """
    ctx = pbw_context(a.n)
    out = PbwElement.zero(a.n)
    for (I, J), h in a.terms.items():
        left = _star_half(ctx, "E", J)
        right = _star_half(ctx, "F", I)
        out = out + multiply(left.rmul_h(h), right)
    return out


def hc_project(a):
    """Pure-Cartan coefficient of a weight-zero element."""
    ctx = pbw_context(a.n)
    zero = (0,) * a.n
    for key in a.terms:
        if a.term_weight(key) != zero:
            raise NotWeightZeroError("element has nonzero ad-weight terms")
    return a.terms.get((ctx.zero_mi, ctx.zero_mi), RatFunc.zero(a.n))


class CentralElement:
    """A central element together with its cached Harish-Chandra image."""

    __slots__ = ("expression", "hc_image")

    def __init__(self, expression, hc_image=None):
        self.expression = expression
        self.hc_image = hc_image if hc_image is not None else _hc_of_central(expression)


def _hc_of_central(expr):
    ctx = pbw_context(expr.n)
    return expr.terms.get((ctx.zero_mi, ctx.zero_mi), RatFunc.zero(expr.n))


def casimir_omega2(n):
    """Omega_2 = sum_{a,b} e_ab e_ba, normal ordered, with its HC image."""
    datum = root_datum(n)
    total = PbwElement.zero(n)
    for a in range(1, n + 1):
        coeffs = [0] * n
        coeffs[a - 1] = 1
        xa = RatFunc.from_linear(n, coeffs)
        total = total + PbwElement.cartan(n, xa * xa)
    for root in datum.positive_roots:
        e = PbwElement.generator(n, "E", root)
        f = PbwElement.generator(n, "F", root)
        total = total + multiply(e, f) + multiply(f, e)
    return CentralElement(total)


# -- text form --------------------------------------------------------


def pbw_to_string(elem):
    if not elem.terms:
        return "0"
    ctx = pbw_context(elem.n)
    roots = ctx.datum.positive_roots
    parts = []
    for (I, J) in sorted(elem.terms, key=lambda k: (ctx.mi_weight(k[0]), ctx.mi_weight(k[1]), k)):
        h = elem.terms[(I, J)]
        factors = []
        for k, e in enumerate(I):
            if e:
                i, j = roots[k]
                factors.append(f"F{i}{j}" + (f"^{e}" if e > 1 else ""))
        if not h.is_one() or (not any(I) and not any(J)):
            factors.append(f"({h.to_string()})")
        for k, e in enumerate(J):
            if e:
                i, j = roots[k]
                factors.append(f"E{i}{j}" + (f"^{e}" if e > 1 else ""))
        parts.append(" * ".join(factors))
    return " + ".join(parts)


def _tokenize_pbw(text):
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
        elif ch in "EF" and i + 2 < n and text[i + 1].isdigit() and text[i + 2].isdigit():
            out.append(text[i : i + 3])
            i += 3
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


class _PbwParser(_Parser):
    """Parser over the PBW algebra; scalars embed as Cartan elements."""

    def atom(self):
        tok = self.peek()
        if tok == "(":
            self.take()
            v = self.expr()
            self.take(")")
            return v
        tok = self.take()
        if tok and tok[0] in "EF" and len(tok) == 3:
            i, j = int(tok[1]), int(tok[2])
            if not 1 <= i < j <= self.nvars:
                raise ParseError(f"bad root in {tok}")
            return PbwElement.generator(self.nvars, tok[0], (i, j))
        if tok.startswith("x"):
            i = int(tok[1:]) - 1
            if not 0 <= i < self.nvars:
                raise ParseError(f"variable {tok} out of range")
            return PbwElement.cartan(self.nvars, RatFunc.var(self.nvars, i))
        if tok.isdigit():
            return PbwElement.cartan(self.nvars, RatFunc.constant(self.nvars, int(tok)))
        raise ParseError(f"unexpected token {tok!r}")

    def factor(self):
        if self.peek() == "-":
            self.take()
            return self.factor().scale(-1)
        base = self.atom()
        if self.peek() == "^":
            self.take()
            neg = False
            if self.peek() == "-":
                self.take()
                neg = True
            e = int(self.take())
            if neg:
                h = _as_cartan(base)
                h = h.inverse()
                out = PbwElement.cartan(self.nvars, h)
                base = out
                e = e - 1
                for _ in range(e):
                    base = multiply(base, out)
                return base
            out = PbwElement.one(self.nvars)
            for _ in range(e):
                out = multiply(out, base)
            return out
        return base

    def term(self):
        v = self.factor()
        while self.peek() in ("*", "/"):
            op = self.take()
            f = self.factor()
            if op == "*":
                v = multiply(v, f)
            else:
                v = multiply(v, PbwElement.cartan(self.nvars, _as_cartan(f).inverse()))
        return v

    def expr(self):
        sign = 1
        while self.peek() in ("+", "-"):
            if self.take() == "-":
                sign = -sign
        v = self.term()
        if sign < 0:
            v = v.scale(-1)
        while self.peek() in ("+", "-"):
            op = self.take()
            t = self.term()
            v = v + t if op == "+" else v - t
        return v


def _as_cartan(elem):
    ctx = pbw_context(elem.n)
    key = (ctx.zero_mi, ctx.zero_mi)
    if set(elem.terms) - {key}:
        raise ParseError("inverse of a non-Cartan element")
    return elem.terms.get(key, RatFunc.zero(elem.n))


def parse_pbw(text, n):
    return _PbwParser(_tokenize_pbw(text), n).parse()
