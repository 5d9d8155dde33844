"""Truncated universal Verma modules and their copy decompositions.

Vectors carry right coefficients: v = sum_I F^I . c_I with c_I in
Frac U(h) acting through the right h-action, so every weight operator
is a plain matrix over the coefficient field on the monomial basis.
Truncation is by height of the weight; a left action that would push a
nonzero term past the window raises instead of dropping it.
"""

from __future__ import annotations

from functools import lru_cache

from .envelope import PbwElement, pbw_context, star
from .errors import DecompositionError, TruncationOverflowError
from .ratfield import RatFunc
from .rootsys import SubalgebraSpec, root_datum


class TruncatedVerma:
    """Monomial bases of M(g) by weight, up to a height cutoff."""

    def __init__(self, n, depth):
        if depth < 0:
            raise ValueError("depth must be nonnegative")
        self.n = n
        self.depth = depth
        self.datum = root_datum(n)
        self.ctx = pbw_context(n)
        self._basis = {}
        self._index = {}

    def weights(self, max_height=None):
        """Window weights nu (eps coordinates), graded-lex, height 0 first."""
        bound = self.depth if max_height is None else max_height
        return _window_weights(self.n, bound)

    def basis(self, nu):
        """Multi-indices I with |I| = nu, lexicographically ascending."""
        got = self._basis.get(nu)
        if got is None:
            got = _partitions(self.n, nu)
            self._basis[nu] = got
            self._index[nu] = {mi: i for i, mi in enumerate(got)}
        return got

    def basis_index(self, nu):
        self.basis(nu)
        return self._index[nu]

    def dim(self, nu):
        return len(self.basis(nu))

    def mi_height(self, mi):
        return self.datum.mi_height(mi)

    def __repr__(self):
        return f"TruncatedVerma(n={self.n}, depth={self.depth})"


@lru_cache(maxsize=None)
def _window_weights(n, bound):
    """Nonnegative simple-root combinations of height <= bound."""
    datum = root_datum(n)
    simples = [datum.root_vector(r) for r in datum.simple_roots]
    out = []

    def rec(idx, vec, height):
        if idx == len(simples):
            out.append(tuple(vec))
            return
        step = simples[idx]
        cur = list(vec)
        h = height
        while h <= bound:
            rec(idx + 1, cur, h)
            cur = [a + b for a, b in zip(cur, step)]
            h += 1

    rec(0, [0] * n, 0)
    out.sort(key=lambda w: (datum.weight_height(w), w))
    return tuple(out)


@lru_cache(maxsize=None)
def _partition_cache(n):
    return {}


def _partitions(n, nu):
    """All multi-indices over the positive roots with weight nu."""
    cache = _partition_cache(n)
    got = cache.get(nu)
    if got is not None:
        return got
    datum = root_datum(n)
    roots = datum.positive_roots
    rho = datum.rho
    found = []

    def rho_pair(vec):
        return sum(r * v for r, v in zip(rho, vec))

    def rec(vec, k, acc):
        if not any(vec):
            found.append(tuple(acc) + (0,) * (len(roots) - k))
            return
        if k == len(roots) or rho_pair(vec) < 0:
            return
        i, j = roots[k]
        cap = rho_pair(vec) // (j - i)
        t = list(vec)
        for e in range(cap + 1):
            rec(tuple(t), k + 1, acc + [e])
            t[i - 1] -= 1
            t[j - 1] += 1

    rec(tuple(int(c) for c in nu), 0, [])
    found.sort()
    cache[nu] = found
    return found


class VermaVector:
    """Weight-graded element of M(g): map multi-index -> right coefficient."""

    __slots__ = ("n", "coeffs")

    def __init__(self, n, coeffs=None):
        self.n = n
        self.coeffs = {k: v for k, v in (coeffs or {}).items() if not v.is_zero()}

    @staticmethod
    def zero(n):
        return VermaVector(n)

    @staticmethod
    def basis_vector(n, mi):
        return VermaVector(n, {mi: RatFunc.one(n)})

    @staticmethod
    def highest(n):
        return VermaVector(n, {(0,) * root_datum(n).m: RatFunc.one(n)})

    def is_zero(self):
        return not self.coeffs

    def __add__(self, other):
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            s = out.get(k)
            if s is None:
                out[k] = v
            else:
                s = s + v
                if s.is_zero():
                    del out[k]
                else:
                    out[k] = s
        return VermaVector(self.n, out)

    def __sub__(self, other):
        return self + other.rmul(RatFunc.constant(self.n, -1))

    def rmul(self, h):
        """Right multiplication by a coefficient."""
        if h.is_zero():
            return VermaVector(self.n)
        return VermaVector(self.n, {k: v * h for k, v in self.coeffs.items()})

    def weights(self):
        ctx = pbw_context(self.n)
        return sorted({ctx.mi_weight(mi) for mi in self.coeffs})

    def homogeneous_weight(self):
        ws = self.weights()
        if len(ws) != 1:
            raise ValueError("vector is not weight homogeneous")
        return ws[0]

    def coordinates(self, M, nu):
        """Coefficient list over the monomial basis at weight nu."""
        basis = M.basis(nu)
        ctx = pbw_context(self.n)
        out = [RatFunc.zero(self.n)] * len(basis)
        index = M.basis_index(nu)
        for mi, c in self.coeffs.items():
            if ctx.mi_weight(mi) == nu:
                out[index[mi]] = c
        return out

    def __eq__(self, other):
        if not isinstance(other, VermaVector):
            return NotImplemented
        return self.n == other.n and self.coeffs == other.coeffs

    __hash__ = None

    def __repr__(self):
        return f"VermaVector({self.to_string()!r})"

    def to_string(self):
        if not self.coeffs:
            return "0"
        roots = root_datum(self.n).positive_roots
        parts = []
        for mi in sorted(self.coeffs):
            factors = []
            for k, e in enumerate(mi):
                if e:
                    i, j = roots[k]
                    factors.append(f"F{i}{j}" + (f"^{e}" if e > 1 else ""))
            mono = "*".join(factors) if factors else "1"
            parts.append(f"{mono}*({self.coeffs[mi].to_string()})")
        return " + ".join(parts)


def apply(elem, vec, M):
    """Left action of a PbwElement, reduced mod F(g) n+.

    Terms whose result weight exceeds the truncation height raise
    TruncationOverflowError rather than being dropped.
    """
    n = M.n
    ctx = M.ctx
    out = {}
    for (I1, J1), h in elem.terms.items():
        hI1 = ctx.datum.mi_height(I1)
        for I2, c2 in vec.coeffs.items():
            core = ctx.ef_core(J1, I2)
            for (K, L), p in core.items():
                if any(L):
                    continue
                coeff = h.shift(tuple(-x for x in ctx.mi_weight(K))) * p
                if coeff.is_zero():
                    continue
                if hI1 + ctx.datum.mi_height(K) > M.depth:
                    raise TruncationOverflowError(
                        f"term of height {hI1 + ctx.datum.mi_height(K)} exceeds depth {M.depth}"
                    )
                coeff = coeff * c2
                for I3, cf in ctx.f_merge(I1, K).items():
                    v = coeff if cf == 1 else coeff * RatFunc.constant(n, cf)
                    cur = out.get(I3)
                    if cur is None:
                        out[I3] = v
                    else:
                        s = cur + v
                        if s.is_zero():
                            del out[I3]
                        else:
                            out[I3] = s
    return VermaVector(n, out)


def f_multiply(mi, vec, M):
    """Left multiplication by the monomial F^mi (no reduction needed)."""
    ctx = M.ctx
    out = {}
    for I2, c in vec.coeffs.items():
        for I3, cf in ctx.f_merge(mi, I2).items():
            v = c if cf == 1 else c * RatFunc.constant(M.n, cf)
            cur = out.get(I3)
            if cur is None:
                out[I3] = v
            else:
                s = cur + v
                if s.is_zero():
                    del out[I3]
                else:
                    out[I3] = s
    return VermaVector(M.n, out)


# -- Shapovalov form ---------------------------------------------------


@lru_cache(maxsize=None)
def _pair_cache(n):
    return {}


def _basis_pairing(M, I, J):
    """<F^I, F^J> = pure-Cartan coefficient of star(F^I) F^J . 1."""
    cache = _pair_cache(M.n)
    key = (I, J)
    got = cache.get(key)
    if got is None:
        ctx = M.ctx
        star_elem = star(PbwElement(M.n, {(I, ctx.zero_mi): RatFunc.one(M.n)}))
        image = apply(star_elem, VermaVector.basis_vector(M.n, J), M)
        got = image.coeffs.get(ctx.zero_mi, RatFunc.zero(M.n))
        cache[key] = got
    return got


def shapovalov(u, v, M):
    """Right-bilinear Frac U(h)-valued form; zero across distinct weights."""
    ctx = M.ctx
    total = RatFunc.zero(M.n)
    by_weight = {}
    for mi, c in v.coeffs.items():
        by_weight.setdefault(ctx.mi_weight(mi), []).append((mi, c))
    for mi, c in u.coeffs.items():
        batch = by_weight.get(ctx.mi_weight(mi))
        if not batch:
            continue
        for mj, c2 in batch:
            pairing = _basis_pairing(M, mi, mj)
            if not pairing.is_zero():
                total = total + c * c2 * pairing
    return total


def gram_matrix(M, nu):
    basis = M.basis(nu)
    return [[_basis_pairing(M, a, b) for b in basis] for a in basis]


# -- copy decompositions ----------------------------------------------


class CopyDecomposition:
    """M(g) split into m-copies, refined into l-copies (l inside m).

    Columns are labelled by triples (I, k, K): I runs over I(g, m)
    (support off Delta(m+)), k over Delta(m+) \\ Delta(l+), K over
    Delta(l+).  The column vector is F^K . w_{I,k} where the refined
    highest weight vector is w_{I,k} = P(l)(F^k . hwv_I) and
    hwv_I = P(m)(F^I).  With l = h this is the plain m-copy basis
    {F^k_m . hwv_I}.
    """

    def __init__(self, M, m_spec, l_spec, proj_m, proj_l):
        self.M = M
        self.m_spec = m_spec
        self.l_spec = l_spec
        datum = M.datum
        roots = datum.positive_roots
        m_roots = set(m_spec.positive_roots())
        l_roots = set(l_spec.positive_roots())
        if not m_roots >= l_roots:
            raise DecompositionError("l must sit inside m")
        self.outer_slots = [i for i, r in enumerate(roots) if r not in m_roots]
        self.mid_slots = [i for i, r in enumerate(roots) if r in m_roots and r not in l_roots]
        self.inner_slots = [i for i, r in enumerate(roots) if r in l_roots]
        self._proj_m = proj_m
        self._proj_l = proj_l
        self._hwv = {}
        self._gen = {}
        self._cols = {}
        self._matrix = {}
        self._solver = {}

    def hwv(self, I):
        """P(m)(F^I), the I-th m-copy highest weight vector."""
        got = self._hwv.get(I)
        if got is None:
            if not any(I):
                got = VermaVector.highest(self.M.n)
            else:
                got = self._proj_m.apply_to_vector(VermaVector.basis_vector(self.M.n, I))
            if got.is_zero():
                raise DecompositionError(f"P(m) kills F^{I}")
            self._hwv[I] = got
        return got

    def generator(self, I, k):
        """w_{I,k} = P(l)(F^k hwv_I): generators are built on demand."""
        got = self._gen.get((I, k))
        if got is None:
            if any(k):
                w = f_multiply(k, self.hwv(I), self.M)
                if self._proj_l is not None:
                    w = self._proj_l.apply_to_vector(w)
            else:
                # hwv_I is killed by m+ (hence by l+): P(l) fixes it
                w = self.hwv(I)
            if w.is_zero():
                raise DecompositionError(f"refined generator ({I}, {k}) vanished")
            self._gen[(I, k)] = w
            got = w
        return got

    def generator_labels(self, max_height=None):
        """All (I, k) pairs within the window, combinatorially."""
        M = self.M
        bound = M.depth if max_height is None else max_height
        out = []
        for I in _supported_indices(M, self.outer_slots, bound):
            hI = M.datum.mi_height(I)
            for k in _supported_indices(M, self.mid_slots, bound - hI):
                out.append((I, k))
        return out

    def outer_weights(self, max_height=None):
        """Weights of the m-copy highest weight vectors in the window."""
        M = self.M
        bound = M.depth if max_height is None else max_height
        datum = M.datum
        return sorted(
            {datum.mi_weight(I) for I in _supported_indices(M, self.outer_slots, bound)},
            key=lambda w: (datum.weight_height(w), w),
        )

    def columns(self, nu):
        """Ordered triples (I, k, K) of weight nu (no vectors forced)."""
        got = self._cols.get(nu)
        if got is None:
            M = self.M
            datum = M.datum
            height = datum.weight_height(nu)
            out = []
            for I in _supported_indices(M, self.outer_slots, height):
                hI = datum.mi_height(I)
                wI = datum.mi_weight(I)
                for k in _supported_indices(M, self.mid_slots, height - hI):
                    gen_wt = tuple(a + b for a, b in zip(wI, datum.mi_weight(k)))
                    rem = tuple(a - b for a, b in zip(nu, gen_wt))
                    for K in _partitions_supported(M.n, rem, self.inner_slots):
                        out.append((I, k, K))
            out.sort()
            got = tuple(out)
            self._cols[nu] = got
        return got

    def column_vector(self, triple):
        I, k, K = triple
        w = self.generator(I, k)
        if any(K):
            w = f_multiply(K, w, self.M)
        return w

    def change_of_basis(self, nu):
        """Matrix from triple coordinates to monomial coordinates."""
        got = self._matrix.get(nu)
        if got is None:
            cols = self.columns(nu)
            dim = self.M.dim(nu)
            if len(cols) != dim:
                raise DecompositionError(
                    f"count mismatch at {nu}: {len(cols)} columns vs dim {dim}"
                )
            mat = [[RatFunc.zero(self.M.n)] * dim for _ in range(dim)]
            for j, triple in enumerate(cols):
                coords = self.column_vector(triple).coordinates(self.M, nu)
                for i in range(dim):
                    mat[i][j] = coords[i]
            got = mat
            self._matrix[nu] = got
        return got

    def solver(self, nu):
        """LU-style solver for the change of basis at nu (cached)."""
        got = self._solver.get(nu)
        if got is None:
            from .linalg import Solver

            got = Solver(self.change_of_basis(nu))
            if got.singular:
                raise DecompositionError(f"change of basis singular at {nu}")
            self._solver[nu] = got
        return got

    def expand(self, vec):
        """Coordinates of a vector in the refined basis: triple -> coeff."""
        out = {}
        ctx = self.M.ctx
        by_weight = {}
        for mi, c in vec.coeffs.items():
            by_weight.setdefault(ctx.mi_weight(mi), {})[mi] = c
        for nu, chunk in by_weight.items():
            coords = VermaVector(self.M.n, chunk).coordinates(self.M, nu)
            sol = self.solver(nu).solve(coords)
            for triple, val in zip(self.columns(nu), sol):
                if not val.is_zero():
                    out[triple] = val
        return out


def _supported_indices(M, slots, max_height):
    """Multi-indices supported on the given root slots, height-bounded."""
    datum = M.datum
    roots = datum.positive_roots
    m = datum.m
    out = []

    def rec(pos, acc, height):
        if pos == len(slots):
            out.append(tuple(acc))
            return
        slot = slots[pos]
        h = roots[slot][1] - roots[slot][0]
        e = 0
        while height + e * h <= max_height:
            cur = list(acc)
            cur[slot] = e
            rec(pos + 1, cur, height + e * h)
            e += 1

    if max_height < 0:
        return []
    rec(0, [0] * m, 0)
    out.sort()
    return out


def _partitions_supported(n, nu, slots):
    """Multi-indices of weight nu supported on the given slots."""
    if any(c % 1 for c in nu):
        return []
    allp = _partitions(n, tuple(int(c) for c in nu))
    slotset = set(slots)
    return [
        mi for mi in allp if all(e == 0 or i in slotset for i, e in enumerate(mi))
    ]


def copy_decomposition(m_spec, M, projector_of_m, l_spec=None, projector_of_l=None):
    """Decomposition of M(g) into m-copies, optionally refined by l."""
    if l_spec is None:
        l_spec = SubalgebraSpec.cartan()
    return CopyDecomposition(M, m_spec, l_spec, projector_of_m, projector_of_l)


def hwv_expansion(vec, dec):
    """Coordinates of vec in the decomposition basis, keyed (I, k, K)."""
    return dec.expand(vec)
