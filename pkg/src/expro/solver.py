"""Constructive solver for relative factors Q(m, l).

Problems arrive in reduced form: both sides are extremal projectors of
standard block unions (compositions allowed) and the target defaults to
the full extremal projector.  At each admissible-cone weight the right
side has a one-dimensional image over Frac U(h); expanding its generator
in the (m, l)-refined copy basis turns the factor equation into a
triangular chain of 1x1 pivot solves for the coefficients q_k.  Pivots
and coefficients are exact rational functions in every mode; random
points only enter the final operator comparison.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction

from . import linalg
from .envelope import PbwElement, pbw_context
from .projector import (
    compose,
    denominator_lattice_relative,
    direct_projector,
    induce_operator,
    op_equal,
    qt_factor,
    relative_projector,
    subalgebra_projector,
)
from .ratfield import RatFunc
from .rootsys import SubalgebraSpec, root_datum
from .verma import TruncatedVerma, VermaVector, apply, copy_decomposition, f_multiply


@dataclass(frozen=True)
class Factor:
    """A named operator factor in a factorization problem."""

    kind: str  # "ext" | "qt" | "rel"
    spec: SubalgebraSpec = None
    sub: SubalgebraSpec = None
    root: tuple = None
    t: Fraction = None

    @staticmethod
    def ext(spec):
        return Factor("ext", spec=spec)

    @staticmethod
    def qt(root, t=None):
        if t is None:
            t = root[1] - root[0]
        return Factor("qt", root=root, t=Fraction(t))

    @staticmethod
    def rel(spec, sub):
        return Factor("rel", spec=spec, sub=sub)

    @staticmethod
    def parse(text):
        text = text.strip()
        if text.startswith("P_"):
            return Factor.ext(SubalgebraSpec.parse(text[2:]))
        if text.startswith("Qt_"):
            body = text[3:]
            if "@" in body:
                rt, t = body.split("@")
                return Factor.qt((int(rt[0]), int(rt[1])), Fraction(t))
            return Factor.qt((int(body[0]), int(body[1])))
        raise ValueError(f"bad factor descriptor {text!r}")

    def name(self):
        if self.kind == "ext":
            return f"P_{self.spec.label()}"
        if self.kind == "qt":
            return f"Qt_{self.root[0]}{self.root[1]}@{self.t}"
        return f"P_{self.spec.label()}^{self.sub.label()}"

    def build(self, M, weights):
        if self.kind == "ext":
            return subalgebra_projector(self.spec, M, weights)
        if self.kind == "qt":
            return qt_factor(self.root, self.t, M, weights)
        if self.kind == "rel":
            return relative_projector(self.spec, self.sub, M, weights)
        raise ValueError(f"bad factor kind {self.kind}")

    def image_support_roots(self, datum):
        """Roots spanning the weights of the factor's image, or None."""
        if self.kind == "ext":
            return tuple(self.spec.complement_roots(datum))
        return None


@dataclass
class FactorizationProblem:
    n: int
    l_spec: SubalgebraSpec
    m_spec: SubalgebraSpec
    left: tuple
    right: tuple
    depth: int
    mode: str = "symbolic"
    seed: int = 0
    trials: int = 3
    target: object = None  # WeightOperator or None for P(g)

    def expansion_l(self):
        return self.m_spec.intersect(self.l_spec)

    @staticmethod
    def from_config(text):
        cfg = parse_config(text)
        return problem_from_config(cfg)


def parse_config(text):
    cfg = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"bad config line {line!r}")
        key, val = line.split("=", 1)
        cfg[key.strip()] = val.strip()
    return cfg


def problem_from_config(cfg):
    n = int(cfg["n"])
    depth = int(cfg["depth"])
    l_spec = SubalgebraSpec.parse(cfg.get("l", "h"))
    m_spec = SubalgebraSpec.parse(cfg["m"])
    left = tuple(Factor.parse(tok) for tok in cfg["left"].split("|") if tok.strip())
    right = tuple(Factor.parse(tok) for tok in cfg["right"].split("|") if tok.strip())
    return FactorizationProblem(
        n=n,
        l_spec=l_spec,
        m_spec=m_spec,
        left=left,
        right=right,
        depth=depth,
        mode=cfg.get("mode", "symbolic" if n <= 3 else "generic"),
        seed=int(cfg.get("seed", 0)),
        trials=int(cfg.get("trials", 3)),
    )


@dataclass
class FactorizationResult:
    status: str  # "unique" | "ambiguous" | "obstructed"
    q: dict = field(default_factory=dict)
    solved_operator: object = None
    diagnostics: dict = field(default_factory=dict)
    ambiguity: dict = None
    obstruction: dict = None

    def q_by_weight_label(self, n):
        datum = root_datum(n)
        out = {}
        for mi, val in sorted(self.q.items()):
            label = _mi_label(datum, mi)
            out[label] = val.to_string()
        return out

    def to_json(self, n):
        payload = {
            "schema": "expro.solve/1",
            "status": self.status,
            "q": self.q_by_weight_label(n),
            "diagnostics": self.diagnostics,
        }
        if self.ambiguity is not None:
            payload["ambiguity"] = self.ambiguity
        if self.obstruction is not None:
            payload["obstruction"] = self.obstruction
        return payload


def _mi_label(datum, mi):
    parts = []
    for k, e in enumerate(mi):
        if e:
            i, j = datum.positive_roots[k]
            parts.append(f"F{i}{j}" + (f"^{e}" if e > 1 else ""))
    return "*".join(parts) if parts else "1"


# -- cone machinery ------------------------------------------------------


def _span_membership(nu, roots, datum):
    """nu in Span_N(roots)?  Small exact search with the rho cap."""
    rho = datum.rho

    def rec(vec, k):
        if not any(vec):
            return True
        if k == len(roots):
            return False
        rp = sum(r * v for r, v in zip(rho, vec))
        if rp < 0:
            return False
        i, j = roots[k]
        cap = rp // (j - i)
        t = list(vec)
        for _ in range(cap + 1):
            if rec(tuple(t), k + 1):
                return True
            t[i - 1] -= 1
            t[j - 1] += 1
        return False

    return rec(tuple(int(c) for c in nu), 0)


def admissible_cone(problem, M=None):
    """Window weights surviving both sides' image supports."""
    M = M or TruncatedVerma(problem.n, problem.depth)
    datum = M.datum
    supports = []
    for factor in problem.left + problem.right:
        roots = factor.image_support_roots(datum)
        if roots is not None:
            supports.append(roots)
    out = []
    for nu in M.weights():
        if all(_span_membership(nu, roots, datum) for roots in supports):
            out.append(nu)
    return out


def _cone_roots(problem, datum):
    """Delta(m+) \\ Delta(expansion_l+): the k-support of the middle."""
    e_l = problem.expansion_l()
    l_roots = set(e_l.positive_roots())
    return [r for r in problem.m_spec.positive_roots() if r not in l_roots]


# -- solver ---------------------------------------------------------------


class _Session:
    """Shared operators for one problem instance."""

    def __init__(self, problem, weights=None):
        self.problem = problem
        self.M = TruncatedVerma(problem.n, problem.depth)
        self.weights = self.M.weights() if weights is None else tuple(weights)
        self.left_op = compose([f.build(self.M, self.weights) for f in problem.left])
        self.right_op = compose([f.build(self.M, self.weights) for f in problem.right])
        self.target = problem.target
        if self.target is None:
            self.target = direct_projector(SubalgebraSpec.cartan(), self.M, self.weights)
        self.e_l = problem.expansion_l()
        self.datum = self.M.datum
        self.ctx = pbw_context(problem.n)
        self._dec = None
        self._lam_cache = {}

    @property
    def dec(self):
        if self._dec is None:
            proj_m = subalgebra_projector(self.problem.m_spec, self.M, self.weights)
            proj_l = (
                None
                if self.e_l.is_cartan()
                else subalgebra_projector(self.e_l, self.M, self.weights)
            )
            self._dec = copy_decomposition(
                self.problem.m_spec, self.M, proj_m, self.e_l, proj_l
            )
        return self._dec

    def left_image(self, I, k):
        got = self._lam_cache.get((I, k))
        if got is None:
            got = self.left_op.apply_to_vector(self.dec.generator(I, k))
            self._lam_cache[(I, k)] = got
        return got


def right_image_generator(session, nu):
    """(preimage monomial, generator vector) for the right side at nu.

    Raises _Ambiguous when the projected weight space is not
    one-dimensional over the coefficient field.
    """
    M = session.M
    block = session.right_op.blocks[nu]
    basis = M.basis(nu)
    dim = len(basis)
    cols = [[block[i][j] for i in range(dim)] for j in range(dim)]
    rank = _image_rank(session, cols)
    if rank > 1:
        raise _Ambiguous(nu, rank, _witnesses(session, nu, cols))
    if rank == 0:
        return None
    j = next(
        j for j in range(dim) if any(not cols[j][i].is_zero() for i in range(dim))
    )
    vec = VermaVector(
        M.n, {basis[i]: cols[j][i] for i in range(dim) if not cols[j][i].is_zero()}
    )
    return basis[j], vec


def _image_rank(session, cols):
    problem = session.problem
    if problem.mode == "symbolic":
        rank, _ = linalg.rf_rank_profile(cols, problem.n)
        return rank
    rng = random.Random(problem.seed ^ 0x5EED)
    best = 0
    for _ in range(20):
        point = tuple(rng.randint(-(10**6), 10**6) for _ in range(problem.n))
        try:
            fcols = [[h.eval(point) for h in col] for col in cols]
        except Exception:
            continue
        rank, _ = linalg.frac_rank_profile(fcols)
        best = max(best, rank)
        return best
    raise RuntimeError("could not evaluate rank at a generic point")


def _witnesses(session, nu, cols):
    """Independent-image monomials, preferring cone-supported ones."""
    M = session.M
    basis = M.basis(nu)
    cone_slots = {M.datum.root_index[r] for r in _cone_roots(session.problem, M.datum)}
    cone_cols = [
        j
        for j, mi in enumerate(basis)
        if all(e == 0 or k in cone_slots for k, e in enumerate(mi))
    ]
    ordering = cone_cols + [j for j in range(len(basis)) if j not in cone_cols]
    if session.problem.mode == "symbolic":
        _, profile = linalg.rf_rank_profile([cols[j] for j in ordering], session.problem.n)
    else:
        rng = random.Random(session.problem.seed ^ 0xBEEF)
        profile = []
        for _ in range(20):
            point = tuple(rng.randint(-(10**6), 10**6) for _ in range(session.problem.n))
            try:
                fcols = [[h.eval(point) for h in cols[j]] for j in ordering]
            except Exception:
                continue
            _, profile = linalg.frac_rank_profile(fcols)
            break
    return [_mi_label(session.datum, basis[ordering[j]]) for j in profile]


class _Ambiguous(Exception):
    def __init__(self, nu, dim, witnesses):
        self.nu = nu
        self.dim = dim
        self.witnesses = witnesses


def solve(problem):
    """Steps 1-7: triangular solve for the middle factor's coefficients."""
    session = _Session(problem)
    M = session.M
    datum = session.datum
    cone = admissible_cone(problem, M)
    cone_roots = _cone_roots(problem, datum)
    cone_slots = [datum.root_index[r] for r in cone_roots]
    zero_mi = (0,) * datum.m
    q = {zero_mi: RatFunc.one(problem.n)}
    pivots = {}
    try:
        for nu in cone:
            if not any(nu):
                continue
            ks = _cone_indices(datum, cone_slots, nu)
            if not ks:
                continue
            if len(ks) > 1:
                raise _Ambiguous(nu, len(ks), [_mi_label(datum, k) for k in ks])
            k_new = ks[0]
            gen = right_image_generator(session, nu)
            if gen is None:
                continue
            u_pre, g_vec = gen
            _check_left_rank(session, nu)
            coords = session.dec.expand(g_vec)
            t_ref = session.left_op.apply_to_vector(VermaVector.basis_vector(M.n, u_pre))
            if t_ref.is_zero():
                raise _Obstructed(nu, "left image vanished on the reference monomial")
            known = RatFunc.zero(problem.n)
            pivot = RatFunc.zero(problem.n)
            neg_nu = tuple(-x for x in nu)
            for (I, k, K), c in coords.items():
                if any(K):
                    raise _Obstructed(nu, "generator not a highest weight vector")
                lam = _proportionality(session, session.left_image(I, k), t_ref, nu)
                contrib = c * lam
                if k == k_new:
                    pivot = pivot + contrib
                else:
                    qk = q.get(k)
                    if qk is None:
                        raise _Obstructed(nu, f"unsolved lower coefficient {k}")
                    known = known + qk.shift(neg_nu) * contrib
            target_scalar = _target_scalar(session, nu, u_pre, t_ref)
            if pivot.is_zero():
                raise _Obstructed(nu, "vanishing pivot")
            pivots[nu] = pivot
            q_shifted = (target_scalar - known) / pivot
            q[k_new] = q_shifted.shift(nu)
    except _Ambiguous as amb:
        return FactorizationResult(
            status="ambiguous",
            q=_strip_full(q, zero_mi),
            diagnostics=_diagnostics(session, q, pivots),
            ambiguity={
                "weight": list(amb.nu),
                "dimension": amb.dim,
                "witnesses": amb.witnesses,
            },
        )
    except _Obstructed as obs:
        return FactorizationResult(
            status="obstructed",
            q=_strip_full(q, zero_mi),
            diagnostics=_diagnostics(session, q, pivots),
            obstruction={"weight": list(obs.nu), "reason": obs.reason},
        )
    solved = induce_operator(q, session.dec, session.weights)
    result = FactorizationResult(
        status="unique",
        q=_strip_full(q, zero_mi),
        solved_operator=solved,
        diagnostics=_diagnostics(session, q, pivots),
    )
    recon = op_equal(
        compose([session.left_op, solved, session.right_op]),
        session.target,
        mode=problem.mode,
        seed=problem.seed,
        trials=problem.trials,
    )
    result.diagnostics["reconstruction"] = recon.to_json()
    return result


class _Obstructed(Exception):
    def __init__(self, nu, reason):
        self.nu = nu
        self.reason = reason


def _strip_full(q, zero_mi):
    """Keep q keyed by full multi-indices; the zero index is q_0."""
    return dict(q)


def _cone_indices(datum, cone_slots, nu):
    """Multi-indices supported on the cone roots with weight nu."""
    out = []

    def rec(pos, remaining, acc):
        if not any(remaining):
            mi = [0] * datum.m
            for slot, e in acc:
                mi[slot] = e
            out.append(tuple(mi))
            return
        if pos == len(cone_slots):
            return
        rho = datum.rho
        rp = sum(r * v for r, v in zip(rho, remaining))
        if rp < 0:
            return
        slot = cone_slots[pos]
        i, j = datum.positive_roots[slot]
        cap = rp // (j - i)
        t = list(remaining)
        for e in range(cap + 1):
            rec(pos + 1, tuple(t), acc + [(slot, e)])
            t[i - 1] -= 1
            t[j - 1] += 1

    rec(0, tuple(int(c) for c in nu), [])
    return out


def _check_left_rank(session, nu):
    M = session.M
    block = session.left_op.blocks[nu]
    dim = M.dim(nu)
    cols = [[block[i][j] for i in range(dim)] for j in range(dim)]
    rank = _image_rank(session, cols)
    if rank > 1:
        raise _Ambiguous(nu, rank, _witnesses(session, nu, cols))


def _proportionality(session, vec, ref, nu):
    """Exact scalar lam with vec = ref * lam; errors if not proportional."""
    n = session.problem.n
    if vec.is_zero():
        return RatFunc.zero(n)
    coords_v = vec.coordinates(session.M, nu)
    coords_r = ref.coordinates(session.M, nu)
    lam = None
    for a, b in zip(coords_v, coords_r):
        if not b.is_zero():
            lam = a / b
            break
    if lam is None:
        raise _Obstructed(nu, "reference vector vanished")
    for a, b in zip(coords_v, coords_r):
        if a != b * lam:
            raise _Obstructed(nu, "left images not proportional")
    return lam


def _target_scalar(session, nu, u_pre, t_ref):
    """tau with target(u_pre) = t_ref * tau (0 for the extremal target)."""
    tv = session.target.apply_to_vector(VermaVector.basis_vector(session.M.n, u_pre))
    if tv.is_zero():
        return RatFunc.zero(session.problem.n)
    return _proportionality(session, tv, t_ref, nu)


def _diagnostics(session, q, pivots):
    problem = session.problem
    datum = session.datum
    nonzero = [(mi, val) for mi, val in q.items() if not val.is_zero()]
    sparsity = max((datum.mi_height(mi) for mi, _ in nonzero), default=0)
    m_indices = sorted(session.problem.m_spec.indices())
    membership = {}
    for mi, val in nonzero:
        membership[_mi_label(datum, mi)] = _in_m_ss_field(val, m_indices, problem.n)
    return {
        "pivots": {str(nu): p.to_string() for nu, p in pivots.items()},
        "sparsity_max_height": sparsity,
        "nonzero_q": [_mi_label(datum, mi) for mi, _ in sorted(nonzero)],
        "m_ss_membership": membership,
    }


def _in_m_ss_field(h, m_indices, n):
    """True iff h depends only on x_i (i in m) through their differences."""
    used = set()
    for exps in list(h.num) + list(h.den):
        for i, e in enumerate(exps):
            if e:
                used.add(i + 1)
    if not used <= set(m_indices):
        return False
    probe = tuple(1 if i + 1 in m_indices else 0 for i in range(n))
    return h.shift(probe) == h


# -- verification and reports --------------------------------------------


def verify_factorization(ops, target, mode="symbolic", seed=0, trials=3):
    """op_equal of a composed factor list against the target."""
    return op_equal(compose(list(ops)), target, mode=mode, seed=seed, trials=trials)


def root_partition_report(l_spec, middle_specs, n):
    """Section-5.3 property (i): the non-l roots split across the factors."""
    datum = root_datum(n)
    l_roots = set(l_spec.positive_roots())
    total = set(datum.positive_roots) - l_roots
    pieces = []
    for spec in middle_specs:
        pieces.append(set(spec.positive_roots()) - l_roots)
    union = set()
    disjoint = True
    for piece in pieces:
        if union & piece:
            disjoint = False
        union |= piece
    return {
        "covers": union == total,
        "disjoint": disjoint,
        "holds": disjoint and union == total,
        "pieces": [sorted(f"{i}{j}" for (i, j) in p) for p in pieces],
    }


def analyze_ambiguity(problem):
    """First cone weight with a multi-dimensional side image."""
    session = _Session(problem)
    M = session.M
    cone = admissible_cone(problem, M)
    for nu in cone:
        if not any(nu):
            continue
        for side in ("right", "left"):
            op = session.right_op if side == "right" else session.left_op
            block = op.blocks[nu]
            dim = M.dim(nu)
            cols = [[block[i][j] for i in range(dim)] for j in range(dim)]
            rank = _image_rank(session, cols)
            if rank > 1:
                return {
                    "ambiguous": True,
                    "side": side,
                    "weight": list(nu),
                    "dimension": rank,
                    "witnesses": _witnesses(session, nu, cols),
                }
    return {"ambiguous": False, "cone_weights_scanned": len(cone)}


def conjecture_report(result, problem, bound=6):
    """Denominator evidence for the minimal-denominator conjecture.

    Coefficients are compared in the element frame: the left-multiplying
    coefficient of the k-component is the (+|k|)-shift of the stored
    right-frame q_k, and operator entries at weight -nu shift by +nu.
    Nothing is asserted; extras are flagged.
    """
    datum = root_datum(problem.n)
    lattice = _q_denominator_lattice(problem, bound)
    from . import _kernel as K

    q_report = {}
    extras = []
    for mi, val in sorted(result.q.items()):
        if val.is_zero():
            continue
        shifted = val.shift(datum.mi_weight(mi))
        label = _mi_label(datum, mi)
        if shifted.is_polynomial():
            q_report[label] = {"denominator": "1", "in_lattice": True}
            continue
        residual = lattice.reduce_poly(shifted.den)
        ok = K.p_is_const(residual)
        q_report[label] = {
            "denominator": RatFunc(problem.n, shifted.den, K.p_const(problem.n, 1), Fraction(1)).to_string(),
            "in_lattice": ok,
        }
        if not ok:
            extras.append(label)
    entry_report = {"checked": 0, "clean": 0}
    op = result.solved_operator
    if op is not None:
        for nu, h in op.entry_denominators():
            entry_report["checked"] += 1
            shifted = h.shift(nu)
            if shifted.is_polynomial() or K.p_is_const(lattice.reduce_poly(shifted.den)):
                entry_report["clean"] += 1
            else:
                extras.append(f"operator entry at {nu}")
    return {
        "lattice": lattice.to_json(),
        "q_denominators": q_report,
        "operator_entries": entry_report,
        "extra_factors": extras,
        "sparsity": result.diagnostics.get("nonzero_q"),
    }


def _q_denominator_lattice(problem, bound):
    """D(m, l) on the HC_l-image side, truncated."""
    e_l = problem.expansion_l()
    datum = root_datum(problem.n)
    from .envelope import pbw_context as _ctx
    from .projector import DenominatorLattice, _perm_apply

    ctx = _ctx(problem.n)
    wl = e_l.weyl_elements(problem.n)
    l_roots = set(e_l.positive_roots())
    mid_roots = [r for r in problem.m_spec.positive_roots() if r not in l_roots]
    orbits = []
    seen = set()
    for root in mid_roots:
        if root in seen:
            continue
        vec = datum.root_vector(root)
        orbit_vecs = sorted({_perm_apply(w, vec) for w in wl})
        orbit = []
        for v in orbit_vecs:
            orbit.append((v.index(1) + 1, v.index(-1) + 1))
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
    return DenominatorLattice(
        f"qdenom({problem.m_spec.label()};{e_l.label()})", entries, problem.n
    )


def result_to_json_str(result, n):
    return json.dumps(result.to_json(n), indent=2, sort_keys=True)


_ = (PbwElement, apply, f_multiply, denominator_lattice_relative)
