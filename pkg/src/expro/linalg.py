"""Exact dense linear algebra over the coefficient field and over Q.

Matrices are lists of row lists.  Blocks here are small (weight-space
dimensions), so Gauss-Jordan with first-nonzero pivoting is plenty; the
point is exactness, not asymptotics.
"""

from __future__ import annotations

from fractions import Fraction

from .ratfield import RatFunc


def rf_identity(dim, nvars):
    one = RatFunc.one(nvars)
    zero = RatFunc.zero(nvars)
    return [[one if i == j else zero for j in range(dim)] for i in range(dim)]


def rf_zeros(rows, cols, nvars):
    zero = RatFunc.zero(nvars)
    return [[zero] * cols for _ in range(rows)]


def rf_mat_mul(a, b, nvars):
    rows = len(a)
    inner = len(b)
    cols = len(b[0]) if inner else 0
    zero = RatFunc.zero(nvars)
    out = [[zero] * cols for _ in range(rows)]
    for i in range(rows):
        arow = a[i]
        orow = out[i]
        for k in range(inner):
            aik = arow[k]
            if aik.is_zero():
                continue
            brow = b[k]
            for j in range(cols):
                bkj = brow[j]
                if not bkj.is_zero():
                    orow[j] = orow[j] + aik * bkj
    return out


def rf_mat_vec(a, v, nvars):
    zero = RatFunc.zero(nvars)
    out = []
    for row in a:
        acc = zero
        for x, y in zip(row, v):
            if not x.is_zero() and not y.is_zero():
                acc = acc + x * y
        out.append(acc)
    return out


def rf_transpose(a):
    return [list(col) for col in zip(*a)]


def rf_mat_inverse(a, nvars):
    """Gauss-Jordan inverse, or None when singular."""
    dim = len(a)
    if dim == 0:
        return []
    work = [list(row) + irow for row, irow in zip(a, rf_identity(dim, nvars))]
    for col in range(dim):
        piv = None
        for r in range(col, dim):
            if not work[r][col].is_zero():
                piv = r
                break
        if piv is None:
            return None
        work[col], work[piv] = work[piv], work[col]
        inv = work[col][col].inverse()
        work[col] = [x * inv for x in work[col]]
        for r in range(dim):
            if r == col:
                continue
            factor = work[r][col]
            if factor.is_zero():
                continue
            work[r] = [x - factor * y for x, y in zip(work[r], work[col])]
    return [row[dim:] for row in work]


class Solver:
    """Cached inverse of a square matrix over the coefficient field."""

    def __init__(self, mat):
        self.dim = len(mat)
        self.nvars = mat[0][0].nvars if self.dim else 0
        self.inverse = rf_mat_inverse(mat, self.nvars)
        self.singular = self.inverse is None and self.dim > 0

    def solve(self, vec):
        if self.singular:
            raise ZeroDivisionError("singular system")
        return rf_mat_vec(self.inverse, vec, self.nvars)


# -- rational (Fraction) variants -------------------------------------


def frac_mat_inverse(a):
    dim = len(a)
    if dim == 0:
        return []
    work = [
        [Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(dim)]
        for i, row in enumerate(a)
    ]
    for col in range(dim):
        piv = None
        for r in range(col, dim):
            if work[r][col]:
                piv = r
                break
        if piv is None:
            return None
        work[col], work[piv] = work[piv], work[col]
        inv = 1 / work[col][col]
        work[col] = [x * inv for x in work[col]]
        for r in range(dim):
            if r == col:
                continue
            factor = work[r][col]
            if factor:
                work[r] = [x - factor * y for x, y in zip(work[r], work[col])]
    return [row[dim:] for row in work]


def frac_rank_profile(columns):
    """(rank, independent column indices) for a list of Fraction columns."""
    rows = len(columns[0]) if columns else 0
    basis = []
    profile = []
    for idx, col in enumerate(columns):
        vec = [Fraction(x) for x in col]
        for pivot_row, bvec in basis:
            c = vec[pivot_row]
            if c:
                vec = [x - c * y for x, y in zip(vec, bvec)]
        pivot_row = next((i for i in range(rows) if vec[i]), None)
        if pivot_row is None:
            continue
        inv = 1 / vec[pivot_row]
        vec = [x * inv for x in vec]
        basis.append((pivot_row, vec))
        profile.append(idx)
    return len(basis), profile


def rf_rank_profile(columns, nvars):
    """(rank, independent column indices) over the rational-function field."""
    rows = len(columns[0]) if columns else 0
    basis = []
    profile = []
    for idx, col in enumerate(columns):
        vec = list(col)
        for pivot_row, bvec in basis:
            c = vec[pivot_row]
            if not c.is_zero():
                vec = [x - c * y for x, y in zip(vec, bvec)]
        pivot_row = next((i for i in range(rows) if not vec[i].is_zero()), None)
        if pivot_row is None:
            continue
        inv = vec[pivot_row].inverse()
        vec = [x * inv for x in vec]
        basis.append((pivot_row, vec))
        profile.append(idx)
    return len(basis), profile
