"""Weight operators and every projector construction.

All infinite objects of the theory act here as block matrices on the
truncated universal Verma module, one square block per weight.  That
realization is faithful for every identity checked at a given depth:
the homomorphism onto right-h-linear endomorphisms is injective, and
truncation only limits which blocks are compared.
"""

from __future__ import annotations

import json
import random
from fractions import Fraction

from . import linalg
from .envelope import PbwElement, pbw_context
from .errors import (
    DegenerateCenterError,
    DegenerateFormError,
    InvalidOrderError,
    InvalidTError,
    NotCentralError,
    PoleAtPointError,
)
from .ratfield import RatFunc, is_dot_invariant, sample_point
from .rootsys import in_z_plus, is_normal_order, root_datum
from .verma import (
    VermaVector,
    apply,
    copy_decomposition,
    gram_matrix,
)

GENERIC_BOUND = 10**6
GENERIC_TRIALS = 3


class WeightOperator:
    """Block-diagonal-by-weight matrix over Frac U(h) on monomial bases."""

    __slots__ = ("M", "weights", "blocks", "factor_denominators")

    def __init__(self, M, weights, blocks, factor_denominators=None):
        self.M = M
        self.weights = tuple(weights)
        self.blocks = blocks
        self.factor_denominators = factor_denominators or []

    @property
    def n(self):
        return self.M.n

    @property
    def depth(self):
        return self.M.depth

    def block(self, nu):
        return self.blocks[nu]

    def apply_to_vector(self, vec):
        ctx = pbw_context(self.n)
        by_weight = {}
        for mi, c in vec.coeffs.items():
            by_weight.setdefault(ctx.mi_weight(mi), {})[mi] = c
        out = VermaVector.zero(self.n)
        for nu, chunk in by_weight.items():
            if nu not in self.blocks:
                raise ValueError(f"vector weight {nu} outside operator window")
            coords = VermaVector(self.n, chunk).coordinates(self.M, nu)
            image = linalg.rf_mat_vec(self.blocks[nu], coords, self.n)
            basis = self.M.basis(nu)
            add = {mi: v for mi, v in zip(basis, image) if not v.is_zero()}
            out = out + VermaVector(self.n, add)
        return out

    def restrict(self, weights):
        return WeightOperator(
            self.M, weights, {nu: self.blocks[nu] for nu in weights}, self.factor_denominators
        )

    def entry_denominators(self):
        """Distinct block-entry denominators (as RatFuncs den/1)."""
        seen = []
        keys = set()
        for nu in self.weights:
            for row in self.blocks[nu]:
                for h in row:
                    if h.is_zero() or h.is_polynomial():
                        continue
                    key = tuple(sorted(h.den.items()))
                    if key not in keys:
                        keys.add(key)
                        seen.append((nu, h))
        return seen

    def to_json(self):
        payload = {"schema": "expro.operator/1", "n": self.n, "depth": self.depth, "blocks": []}
        for nu in self.weights:
            basis = self.M.basis(nu)
            payload["blocks"].append(
                {
                    "weight": [str(c) for c in nu],
                    "basis": [_mono_str(self.n, mi) for mi in basis],
                    "matrix": [[h.to_string() for h in row] for row in self.blocks[nu]],
                }
            )
        return payload


def _mono_str(n, mi):
    roots = root_datum(n).positive_roots
    parts = []
    for k, e in enumerate(mi):
        if e:
            i, j = roots[k]
            parts.append(f"F{i}{j}" + (f"^{e}" if e > 1 else ""))
    return "*".join(parts) if parts else "1"


def window(M, max_height=None):
    return M.weights(max_height)


def identity_operator(M, weights=None):
    weights = M.weights() if weights is None else tuple(weights)
    blocks = {nu: linalg.rf_identity(M.dim(nu), M.n) for nu in weights}
    return WeightOperator(M, weights, blocks)


def compose(ops):
    """ops[0] after ops[1] after ...: matrices multiply left to right."""
    if not ops:
        raise ValueError("empty composition")
    first = ops[0]
    for other in ops[1:]:
        if other.weights != first.weights or other.M is not first.M:
            raise ValueError("operators live on different windows")
    blocks = {}
    for nu in first.weights:
        mat = ops[0].blocks[nu]
        for other in ops[1:]:
            mat = linalg.rf_mat_mul(mat, other.blocks[nu], first.n)
        blocks[nu] = mat
    dens = [d for op in ops for d in op.factor_denominators]
    return WeightOperator(first.M, first.weights, blocks, dens)


def operator_of_element(elem, M, weights=None):
    """Matrix realization of a weight-zero PbwElement."""
    weights = M.weights() if weights is None else tuple(weights)
    zero = (0,) * M.n
    for key in elem.terms:
        if elem.term_weight(key) != zero:
            raise ValueError("operator_of_element needs an ad-weight-zero element")
    blocks = {}
    for nu in weights:
        basis = M.basis(nu)
        dim = len(basis)
        mat = linalg.rf_zeros(dim, dim, M.n)
        index = M.basis_index(nu)
        for j, mi in enumerate(basis):
            image = apply(elem, VermaVector.basis_vector(M.n, mi), M)
            for mi2, c in image.coeffs.items():
                mat[index[mi2]][j] = c
        blocks[nu] = mat
    return WeightOperator(M, weights, blocks)


# -- AST factors -------------------------------------------------------


def qt_element(root, t, n, kmax):
    """Q_t(a_root) truncated: sum_k (-1)^k/k! F^k E^k prod (H+t+i)^{-1}.

    Stored in middle-coefficient form, so the k-th coefficient is the
    (-k alpha)-shift of the right-side product.
    """
    ctx = pbw_context(n)
    k_idx = ctx.datum.root_index[root]
    terms = {}
    fact = 1
    for k in range(kmax + 1):
        if k:
            fact *= k
        coeff = RatFunc.constant(n, Fraction((-1) ** k, fact))
        for i in range(1, k + 1):
            # (H + t + i) shifted by -k*alpha: alpha(H_alpha) = 2
            coeff = coeff * ctx.h_root_poly(root, Fraction(t) + i - 2 * k).inverse()
        mi = tuple(k if idx == k_idx else 0 for idx in range(ctx.m))
        terms[(mi, mi)] = coeff
    return PbwElement(n, terms)


def qt_factor(root, t, M, weights=None):
    """The AST factor Q_t(a_root) as a weight operator."""
    weights = M.weights() if weights is None else tuple(weights)
    datum = M.datum
    kmax = M.depth // datum.root_height(root)
    elem = qt_element(root, t, M.n, kmax)
    op = operator_of_element(elem, M, weights)
    # element-level denominators, right-coefficient convention
    ctx = pbw_context(M.n)
    dens = []
    for i in range(1, kmax + 1):
        dens.append(ctx.h_root_poly(root, Fraction(t) + i))
    op.factor_denominators = [("qt", root, t, dens)]
    return op


def ast_product(order, tau, M, weights=None):
    """Ordered product of AST factors at parameters tau(H_alpha).

    tau is a weight tuple; for tau = rho this is the extremal projector.
    """
    if not is_normal_order(list(order), M.n):
        raise InvalidOrderError(f"{order} is not a normal order")
    weights = M.weights() if weights is None else tuple(weights)
    datum = M.datum
    ops = [qt_factor(root, datum.pairing(tau, root), M, weights) for root in order]
    return compose(ops)


def extremal_projector(M, weights=None):
    """P(g) via the AST factorization along the reference normal order."""
    datum = M.datum
    return ast_product(datum.positive_roots, datum.rho, M, weights)


def subalgebra_projector(spec, M, weights=None):
    """P(l_spec): extremal projector of the subalgebra, acting on M(g).

    Works for standard and non-standard specs alike; blocks commute, and
    inside each block the parameters are the block-local rho values.
    """
    weights = M.weights() if weights is None else tuple(weights)
    if spec.is_cartan():
        return identity_operator(M, weights)
    ops = [
        qt_factor(root, spec.local_rho_value(root), M, weights)
        for root in spec.normal_order()
    ]
    return compose(ops)


# -- direct construction of the relative projector ---------------------


def direct_projector(l_spec, M, weights=None):
    """P(g, l) as the projection onto monomials supported on Delta(l+)
    along sum_beta F_beta M, solved exactly per weight.

    Requires a standard l (every block consecutive); the kernel and
    image descriptions are monomial only in that case.
    """
    if not l_spec.is_standard():
        raise ValueError(f"direct projector needs a standard subalgebra, got {l_spec.label()}")
    weights = M.weights() if weights is None else tuple(weights)
    datum = M.datum
    ctx = M.ctx
    l_slots = {datum.root_index[r] for r in l_spec.positive_roots()}
    u_roots = l_spec.complement_roots(datum)
    blocks = {}
    for nu in weights:
        basis = M.basis(nu)
        dim = len(basis)
        index = M.basis_index(nu)
        image_cols = []
        for pos, mi in enumerate(basis):
            if all(e == 0 or k in l_slots for k, e in enumerate(mi)):
                col = [Fraction(0)] * dim
                col[pos] = Fraction(1)
                image_cols.append((pos, col))
        kernel_cols = []
        for beta in u_roots:
            bvec = datum.root_vector(beta)
            source = tuple(a - b for a, b in zip(nu, bvec))
            if datum.weight_height(source) < 0 or not M.basis(source):
                continue
            slot = datum.root_index[beta]
            e_beta = tuple(1 if k == slot else 0 for k in range(datum.m))
            for mi in M.basis(source):
                col = [Fraction(0)] * dim
                for mi2, c in ctx.f_merge(e_beta, mi).items():
                    col[index[mi2]] += c
                kernel_cols.append(col)
        combined = [c for _, c in image_cols] + kernel_cols
        rank, profile = linalg.frac_rank_profile(combined)
        if rank != dim:
            raise DegenerateFormError(f"image + kernel do not fill weight {nu}")
        n_img = len(image_cols)
        basis_mat = [[combined[idx][r] for idx in profile] for r in range(dim)]
        inv = linalg.frac_mat_inverse(basis_mat)
        target = [
            [combined[idx][r] if idx < n_img else Fraction(0) for idx in profile]
            for r in range(dim)
        ]
        # P B = [image | 0], so P = [image | 0] B^{-1}
        proj = [
            [sum(target[r][k] * inv[k][c] for k in range(dim)) for c in range(dim)]
            for r in range(dim)
        ]
        blocks[nu] = [[RatFunc.constant(M.n, q) for q in row] for row in proj]
    return WeightOperator(M, weights, blocks)


# -- decomposition-based operators -------------------------------------


def _dec_diagonal(dec, weights, scalar_fn):
    """Operator acting on each refined column by a scalar: C diag C^{-1}."""
    M = dec.M
    blocks = {}
    for nu in weights:
        cols = dec.columns(nu)
        C = dec.change_of_basis(nu)
        inv = dec.solver(nu).inverse
        dim = len(cols)
        scaled = [[None] * dim for _ in range(dim)]
        scalars = [scalar_fn(triple, nu) for triple in cols]
        for i in range(dim):
            row = C[i]
            srow = scaled[i]
            for j in range(dim):
                srow[j] = row[j] * scalars[j]
        blocks[nu] = linalg.rf_mat_mul(scaled, inv, M.n)
    return WeightOperator(M, weights, blocks)


def component_projector(m_spec, I0, dec, weights):
    """P(g, m, F^{I0}): projection onto the I0-th m-copy."""
    zero = RatFunc.zero(dec.M.n)
    one = RatFunc.one(dec.M.n)
    _ = m_spec

    def sel(triple, nu):
        return one if triple[0] == I0 else zero

    return _dec_diagonal(dec, weights, sel)


def subcopy_projector(dec, k0, weights):
    """Projection onto the k0-labelled l-subcopies across all m-copies.

    For the pair (m, l) this realizes P(m, l, F^{k0}) inside F(g).
    """
    zero = RatFunc.zero(dec.M.n)
    one = RatFunc.one(dec.M.n)

    def sel(triple, nu):
        return one if triple[1] == k0 else zero

    return _dec_diagonal(dec, weights, sel)


def relative_projector(big_spec, small_spec, M, weights=None):
    """P(l_big, l_small) as an operator on M(g): the k = 0 subcopy
    projection of the (big, small)-refined decomposition."""
    weights = M.weights() if weights is None else tuple(weights)
    proj_m = subalgebra_projector(big_spec, M, weights)
    proj_l = subalgebra_projector(small_spec, M, weights)
    dec = copy_decomposition(big_spec, M, proj_m, small_spec, proj_l)
    k0 = (0,) * M.datum.m
    return subcopy_projector(dec, k0, weights)


def induce_operator(q_map, dec, weights):
    """sum_k q_k P[k]: coefficients act by left multiplication, realized
    per weight as right multiplication by the (-nu)-shift."""
    M = dec.M
    zero = RatFunc.zero(M.n)
    cache = {}

    def sel(triple, nu):
        q = q_map.get(triple[1])
        if q is None or q.is_zero():
            return zero
        key = (triple[1], nu)
        got = cache.get(key)
        if got is None:
            got = q.shift(tuple(-x for x in nu))
            cache[key] = got
        return got

    return _dec_diagonal(dec, weights, sel)


# -- central elements --------------------------------------------------


def central_action(p, M, weights=None, extra=None):
    """Action of a central element with HC image p, optionally with an
    extra Cartan coefficient (acting shifted per weight)."""
    weights = M.weights() if weights is None else tuple(weights)
    datum = M.datum
    gens = [_simple_perm(M.n, k) for k in range(1, M.n)]
    if not is_dot_invariant(p, gens, datum.rho):
        raise NotCentralError("p is not invariant under the dot action")
    blocks = {}
    for nu in weights:
        scalar = p
        if extra is not None:
            scalar = scalar * extra.shift(tuple(-x for x in nu))
        dim = M.dim(nu)
        mat = linalg.rf_zeros(dim, dim, M.n)
        for i in range(dim):
            mat[i][i] = scalar
        blocks[nu] = mat
    return WeightOperator(M, weights, blocks)


def _simple_perm(n, k):
    p = list(range(n))
    p[k - 1], p[k] = p[k], p[k - 1]
    return tuple(p)


def zhelobenko_product(p, M, weights=None):
    """Truncated infinite commutative factorization of P(g) from a
    central element with HC image p."""
    weights = M.weights() if weights is None else tuple(weights)
    if p.is_constant():
        raise DegenerateCenterError("central element must be non-constant")
    nus = [nu for nu in weights if any(nu)]
    blocks = {}
    dens = []
    for mu in weights:
        neg_mu = tuple(-x for x in mu)
        p_mu = p.shift(neg_mu)
        scalar = RatFunc.one(M.n)
        for nu in nus:
            shift_vec = tuple(a - b for a, b in zip(nu, mu))
            p_nu_mu = p.shift(shift_vec)
            den = p_mu - p_nu_mu
            if den.is_zero():
                raise DegenerateCenterError(f"vanishing denominator at nu={nu}")
            scalar = scalar * (p - p_nu_mu) / den
        dim = M.dim(mu)
        mat = linalg.rf_zeros(dim, dim, M.n)
        for i in range(dim):
            mat[i][i] = scalar
        blocks[mu] = mat
    for nu in nus:
        dens.append(p - p.shift(nu))
    op = WeightOperator(M, weights, blocks)
    op.factor_denominators = [("zhelobenko", dens)]
    return op


def relative_casimir_product(p, l_spec, dec_l, M, weights=None):
    """Truncated product over W(l)-orbits of u+ weights; the Z(l)
    denominators act per l-copy through their HC images."""
    weights = M.weights() if weights is None else tuple(weights)
    if p.is_constant():
        raise DegenerateCenterError("central element must be non-constant")
    datum = M.datum
    wl = l_spec.weyl_elements(M.n)
    copy_weights = [w for w in dec_l.outer_weights() if any(w)]
    orbits = []
    seen = set()
    for wvec in copy_weights:
        if wvec in seen:
            continue
        orbit = sorted({_perm_apply(w, wvec) for w in wl})
        seen |= set(orbit)
        orbits.append(orbit)
    op = identity_operator(M, weights)
    scalar_cache = {}

    def orbit_scalar(orbit, jwt):
        key = (tuple(orbit), jwt)
        got = scalar_cache.get(key)
        if got is not None:
            return got
        neg = tuple(-x for x in jwt)
        p_j = p.shift(neg)
        scalar = RatFunc.one(M.n)
        for nu in orbit:
            delta = tuple(a - b for a, b in zip(nu, jwt))
            p_nu_j = p.shift(delta)
            den = p_j - p_nu_j
            if den.is_zero():
                raise DegenerateCenterError(f"vanishing denominator at nu={nu}")
            scalar = scalar * (p - p_nu_j) / den
        scalar_cache[key] = scalar
        return scalar

    for orbit in orbits:
        def sel(triple, nu, orbit=orbit):
            jwt = datum.mi_weight(triple[0])
            return orbit_scalar(orbit, jwt)

        factor = _dec_diagonal(dec_l, weights, sel)
        op = compose([op, factor])
    return op


def _perm_apply(p, vec):
    out = [0] * len(vec)
    for i, x in enumerate(vec):
        out[p[i]] = x
    return tuple(out)


# -- Theorem 4(1) -------------------------------------------------------


def _coset_reps_values(T, n):
    """Distinct rearrangements of T (one per W(g)/W(g)^T coset)."""
    from itertools import permutations

    return sorted({perm for perm in permutations(tuple(Fraction(x) for x in T))})


def _linear_poly(n, coeffs, const):
    return RatFunc.from_linear(n, list(coeffs), const)


def p_T_polynomial(T, n):
    """p_T(t) = prod over cosets of (t - w.T) as coefficient list in t."""
    datum = root_datum(n)
    rho = datum.rho
    rhoT = sum(r * Fraction(x) for r, x in zip(rho, T))
    coeffs = [RatFunc.one(n)]
    for tau in _coset_reps_values(T, n):
        rho_tau = sum(r * x for r, x in zip(rho, tau))
        wt_poly = _linear_poly(n, tau, rho_tau - rhoT)
        # multiply (t - wt_poly) into the t-polynomial
        nxt = [RatFunc.zero(n) for _ in range(len(coeffs) + 1)]
        for d, c in enumerate(coeffs):
            nxt[d + 1] = nxt[d + 1] + c
            nxt[d] = nxt[d] - c * wt_poly
        coeffs = nxt
    return coeffs


def thm41_product(T, l_spec, dec_l, M, weights=None):
    """The explicit relative factorization from a center direction T.

    Factors are indexed by the values c = nu(T); numerators are central
    polynomials in T, denominators Z(l)-elements acting per l-copy.
    """
    weights = M.weights() if weights is None else tuple(weights)
    datum = M.datum
    if not in_z_plus(T, l_spec, M.n):
        raise InvalidTError(f"{T} is not in z+({l_spec.label()})")
    T = tuple(Fraction(x) for x in T)
    rho = datum.rho
    rhoT = sum(r * x for r, x in zip(rho, T))
    reps = _coset_reps_values(T, M.n)
    rep_polys = []
    for tau in reps:
        rho_tau = sum(r * x for r, x in zip(rho, tau))
        rep_polys.append((tau, _linear_poly(M.n, tau, rho_tau - rhoT)))
    T_poly = _linear_poly(M.n, T, 0)

    def pair(wt, vec):
        return sum(Fraction(a) * b for a, b in zip(wt, vec))

    copy_data = [w for w in dec_l.outer_weights() if any(w)]
    values = sorted({pair(jwt, T) for jwt in copy_data})
    op = identity_operator(M, weights)
    formula_dens = []
    scalar_cache = {}

    def factor_scalar(c, jwt):
        key = (c, jwt)
        got = scalar_cache.get(key)
        if got is not None:
            return got
        jT = pair(jwt, T)
        num = RatFunc.one(M.n)
        den = RatFunc.one(M.n)
        cc = RatFunc.constant(M.n, c)
        for tau, wpoly in rep_polys:
            num = num * (T_poly + cc - RatFunc.constant(M.n, jT) - wpoly)
            jwT = pair(jwt, tau)
            den = den * (T_poly + cc - wpoly + RatFunc.constant(M.n, jwT - jT))
        got = num / den
        scalar_cache[key] = got
        return got

    for c in values:
        formula_den = RatFunc.one(M.n)
        cc = RatFunc.constant(M.n, c)
        for tau, wpoly in rep_polys:
            formula_den = formula_den * (T_poly + cc - wpoly)
        formula_dens.append((c, formula_den))

        def sel(triple, nu, c=c):
            jwt = datum.mi_weight(triple[0])
            if not any(jwt):
                return RatFunc.one(M.n)
            return factor_scalar(c, jwt)

        factor = _dec_diagonal(dec_l, weights, sel)
        op = compose([op, factor])
    op.factor_denominators = [("thm41", formula_dens)]
    return op


# -- denominator lattices -----------------------------------------------


class DenominatorLattice:
    """Explicit truncation of a formal denominator product.

    Every emitted factor is stored with its affine-linear constituents,
    so divisibility testing is repeated exact division by linears.
    """

    def __init__(self, kind, entries, n):
        self.kind = kind
        self.entries = entries  # list of (label, product RatFunc, [linear RatFunc])
        self.n = n

    def linears(self):
        out = []
        for _label, _prod, parts in self.entries:
            out.extend(parts)
        return out

    def reduce_poly(self, den_dict):
        """Divide out lattice linears; return the residual int polynomial."""
        from . import _kernel as K

        residual = dict(den_dict)
        changed = True
        while changed and not K.p_is_const(residual):
            changed = False
            for lin in self.linears():
                q = K.p_try_div(residual, lin.num)
                while q is not None:
                    residual = q
                    changed = True
                    if K.p_is_const(residual):
                        break
                    q = K.p_try_div(residual, lin.num)
        return residual

    def divides(self, h):
        """True iff every pole of h lies on the lattice."""
        from . import _kernel as K

        if h.is_zero() or h.is_polynomial():
            return True
        return K.p_is_const(self.reduce_poly(h.den))

    def to_json(self):
        return {
            "schema": "expro.lattice/1",
            "kind": self.kind,
            "factors": [
                {"label": label, "product": prod.to_string(), "linears": [x.to_string() for x in parts]}
                for label, prod, parts in self.entries
            ],
        }


def denominator_lattice_absolute(n, bound):
    """D(g): factors H_alpha + rho(H_alpha) + i for i = 1..bound."""
    ctx = pbw_context(n)
    datum = root_datum(n)
    entries = []
    for root in datum.positive_roots:
        for i in range(1, bound + 1):
            lin = ctx.h_root_poly(root, datum.rho_value(root) + i)
            entries.append((f"({root[0]}{root[1]}, {i})", lin, [lin]))
    return DenominatorLattice("absolute", entries, n)


def denominator_lattice_relative(l_spec, n, bound):
    """D(g, l): W(l)-symmetrized products over Delta(u+)-orbits, on the
    HC_l-image side (shift by rho)."""
    ctx = pbw_context(n)
    datum = root_datum(n)
    wl = l_spec.weyl_elements(n)
    u_roots = l_spec.complement_roots(datum)
    orbits = []
    seen = set()
    for root in u_roots:
        if root in seen:
            continue
        vec = datum.root_vector(root)
        orbit_vecs = sorted({_perm_apply(w, vec) for w in wl})
        orbit = []
        for v in orbit_vecs:
            i = v.index(1) + 1
            j = v.index(-1) + 1
            orbit.append((i, j))
        seen |= set(orbit)
        orbits.append(sorted(orbit))
    entries = []
    for orbit in orbits:
        for i in range(1, bound + 1):
            parts = [ctx.h_root_poly(r, datum.rho_value(r) + i) for r in orbit]
            prod = parts[0]
            for x in parts[1:]:
                prod = prod * x
            label = "{" + ",".join(f"{r[0]}{r[1]}" for r in orbit) + "}" + f", {i}"
            entries.append((label, prod, parts))
    return DenominatorLattice(f"relative({l_spec.label()})", entries, n)


def denominator_lattice_relative_T(l_spec, T, n, bound):
    """D(g, l, T): factors per value c of Delta(U+(u+)) evaluated at T."""
    datum = root_datum(n)
    if not in_z_plus(T, l_spec, n):
        raise InvalidTError(f"{T} is not in z+({l_spec.label()})")
    T = tuple(Fraction(x) for x in T)
    rho = datum.rho
    rhoT = sum(r * x for r, x in zip(rho, T))
    u_values = sorted({datum.pairing(T, r) for r in l_spec.complement_roots(datum)})
    values = set()
    frontier = {Fraction(0)}
    for _ in range(bound):
        frontier = {c + v for c in frontier for v in u_values}
        values |= frontier
    values = sorted(values)[:bound]
    T_poly = _linear_poly(n, T, 0)
    entries = []
    for c in values:
        parts = []
        cc = RatFunc.constant(n, c)
        for tau in _coset_reps_values(T, n):
            rho_tau = sum(r * x for r, x in zip(rho, tau))
            wpoly = _linear_poly(n, tau, rho_tau - rhoT)
            lin = T_poly + cc - wpoly
            if not lin.is_constant():
                parts.append(lin)
        prod = RatFunc.one(n)
        for x in parts:
            prod = prod * x
        entries.append((f"c={c}", prod, parts))
    return DenominatorLattice(f"relative_T({l_spec.label()})", entries, n)


# -- comparison and adjoint ---------------------------------------------


class Verdict:
    def __init__(self, equal, mode, witness=None, detail=None):
        self.equal = equal
        self.mode = mode
        self.witness = witness
        self.detail = detail

    def __bool__(self):
        return self.equal

    def to_json(self):
        return {
            "equal": self.equal,
            "mode": self.mode,
            "witness": self.witness,
            "detail": self.detail,
        }

    def __repr__(self):
        return f"Verdict(equal={self.equal}, mode={self.mode!r}, witness={self.witness})"


def op_equal(a, b, mode="symbolic", seed=0, trials=GENERIC_TRIALS):
    """Compare two weight operators blockwise.

    Symbolic mode uses canonical-form equality.  Generic mode certifies
    by exact evaluation at `trials` random integer points that avoid all
    denominators (Schwartz-Zippel error bound deg/bound per trial).
    """
    if a.weights != b.weights:
        raise ValueError("windows differ")
    if mode == "symbolic":
        for nu in a.weights:
            A, B = a.blocks[nu], b.blocks[nu]
            for i in range(len(A)):
                for j in range(len(A)):
                    if A[i][j] != B[i][j]:
                        return Verdict(
                            False,
                            mode,
                            witness={
                                "weight": list(nu),
                                "basis_entry": [i, j],
                                "lhs": A[i][j].to_string(),
                                "rhs": B[i][j].to_string(),
                            },
                        )
        return Verdict(True, mode)
    if mode != "generic":
        raise ValueError(f"unknown mode {mode!r}")
    rng = random.Random(seed)
    done = 0
    attempts = 0
    while done < trials:
        attempts += 1
        if attempts > 60 * trials:
            raise PoleSamplingError("could not sample pole-free points")
        point = sample_point(a.n, rng, GENERIC_BOUND)
        try:
            for nu in a.weights:
                A, B = a.blocks[nu], b.blocks[nu]
                for i in range(len(A)):
                    for j in range(len(A)):
                        va = A[i][j].eval(point)
                        vb = B[i][j].eval(point)
                        if va != vb:
                            return Verdict(
                                False,
                                mode,
                                witness={
                                    "weight": list(nu),
                                    "basis_entry": [i, j],
                                    "point": list(point),
                                    "lhs": str(va),
                                    "rhs": str(vb),
                                },
                            )
        except PoleAtPointError:
            continue
        done += 1
    return Verdict(True, mode, detail={"trials": trials, "seed": seed})


class PoleSamplingError(RuntimeError):
    pass


def shapovalov_adjoint(a, M):
    """A* with <A* u, v> = <u, A v>: per block G^{-1} A^T G."""
    blocks = {}
    for nu in a.weights:
        G = gram_matrix(M, nu)
        Ginv = linalg.rf_mat_inverse(G, M.n)
        if Ginv is None:
            raise DegenerateFormError(f"singular Gram block at {nu}")
        At = linalg.rf_transpose(a.blocks[nu])
        blocks[nu] = linalg.rf_mat_mul(linalg.rf_mat_mul(Ginv, At, M.n), G, M.n)
    return WeightOperator(a.M, a.weights, blocks)


def operator_to_json_str(op):
    return json.dumps(op.to_json(), indent=2, sort_keys=True)


# -- element-level products (for denominator divisibility) --------------


def ast_product_element(order, tau, n, fheight_bound):
    """The AST product as an actual PbwElement, exact on bounded heights.

    Factors are truncated far enough that every normal-ordered term with
    F-part and E-part heights <= fheight_bound carries its exact
    coefficient.  Terms whose F-prefix already exceeds the bound can
    never re-enter (later factors only extend the prefix), so they are
    pruned during the left-to-right multiplication; E-side pruning uses
    the total F-height still available in the remaining factors.
    """
    from .envelope import multiply

    datum = root_datum(n)
    ctx = pbw_context(n)
    factors = []
    for root in order:
        h = datum.root_height(root)
        kmax = (2 * fheight_bound) // h + 1
        factors.append((root, qt_element(root, datum.pairing(tau, root), n, kmax)))
    remaining_f = [0] * (len(factors) + 1)
    for idx in range(len(factors) - 1, -1, -1):
        root, elem = factors[idx]
        maxf = max(ctx.datum.mi_height(I) for (I, _J) in elem.terms)
        remaining_f[idx] = remaining_f[idx + 1] + maxf
    product = PbwElement.one(n)
    for idx, (_root, elem) in enumerate(factors):
        product = multiply(product, elem)
        e_bound = fheight_bound + remaining_f[idx + 1]
        kept = {}
        for (I, J), h in product.terms.items():
            if ctx.datum.mi_height(I) > fheight_bound:
                continue
            if ctx.datum.mi_height(J) > e_bound:
                continue
            kept[(I, J)] = h
        product = PbwElement(n, kept)
    kept = {}
    for (I, J), h in product.terms.items():
        if ctx.datum.mi_height(I) <= fheight_bound and ctx.datum.mi_height(J) <= fheight_bound:
            kept[(I, J)] = h
    return PbwElement(n, kept)


def element_right_denominators(elem):
    """Denominators of the coefficients in right-coefficient convention.

    Stored coefficients sit between F^I and E^J; the paper's convention
    puts them to the right of E^J, a shift by +|J|.
    """
    ctx = pbw_context(elem.n)
    out = []
    seen = set()
    for (I, J), h in elem.terms.items():
        right = h.shift(ctx.mi_weight(J))
        if right.is_polynomial():
            continue
        key = tuple(sorted(right.den.items()))
        if key not in seen:
            seen.add(key)
            out.append(((I, J), right))
    return out
