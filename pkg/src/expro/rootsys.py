"""Type-A root systems, Weyl group combinatorics, and subalgebra specs.

Conventions, fixed once for the whole package:

* gl_n coordinates.  A weight is a length-n tuple of exact rationals in
  the epsilon basis; no quotient by the center is taken.
* Positive roots are index pairs (i, j) with 1 <= i < j <= n, listed in
  lexicographic order.  That order is itself a normal order and serves
  as the PBW reference order.
* rho = (n-1, n-2, ..., 0).  It differs from the half-sum of positive
  roots by a multiple of (1,..,1), which pairs to zero with every H_ij
  and is permutation-invariant, so all pairings and dot actions agree
  with the usual normalization while staying integral.
* Permutations are 0-based one-line tuples: w[i] is the image of slot i,
  and a permuted vector satisfies (w v)[w[i]] = v[i].

A multi-index is a tuple of exponents aligned with the positive-root
list of the ambient RootDatum.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import InvalidOrderError, InvalidRankError, NotCentralError, NotReducedError

Root = tuple  # (i, j), 1-based, i < j
Weight = tuple  # length-n coordinate tuple
MultiIndex = tuple  # exponents over the positive-root list


class RootDatum:
    """Positive roots, rho, and index tables for sl_n in gl_n coordinates."""

    def __init__(self, n):
        if n < 2:
            raise InvalidRankError(f"rank must be >= 2, got {n}")
        self.n = n
        self.positive_roots = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
        self.simple_roots = [(i, i + 1) for i in range(1, n)]
        self.rho = tuple(n - 1 - i for i in range(n))
        self.m = len(self.positive_roots)
        self.root_index = {r: k for k, r in enumerate(self.positive_roots)}
        self._root_vec = {r: self.root_vector(r) for r in self.positive_roots}

    def root_vector(self, root):
        i, j = root
        v = [0] * self.n
        v[i - 1] = 1
        v[j - 1] = -1
        return tuple(v)

    def root_height(self, root):
        return root[1] - root[0]

    def pairing(self, mu, root):
        """mu(H_root) = mu_i - mu_j."""
        i, j = root
        return mu[i - 1] - mu[j - 1]

    def rho_value(self, root):
        return root[1] - root[0]

    def mi_weight(self, index):
        v = [0] * self.n
        for k, e in enumerate(index):
            if e:
                i, j = self.positive_roots[k]
                v[i - 1] += e
                v[j - 1] -= e
        return tuple(v)

    def mi_height(self, index):
        return sum(e * self.root_height(self.positive_roots[k]) for k, e in enumerate(index))

    def weight_height(self, nu):
        """Height of a nonneg root combination given in epsilon coordinates."""
        total = 0
        acc = 0
        for c in nu[:-1]:
            acc += c
            total += acc
        return total

    def zero_index(self):
        return (0,) * self.m

    def __repr__(self):
        return f"RootDatum(n={self.n})"


@lru_cache(maxsize=None)
def root_datum(n):
    return RootDatum(n)


def positive_roots(n):
    return list(root_datum(n).positive_roots)


# -- permutations ----------------------------------------------------


def perm_identity(n):
    return tuple(range(n))


def perm_compose(p, q):
    """(p o q)(i) = p(q(i))."""
    return tuple(p[q[i]] for i in range(len(p)))


def perm_inverse(p):
    inv = [0] * len(p)
    for i, v in enumerate(p):
        inv[v] = i
    return tuple(inv)


def perm_apply(p, vec):
    """(p v)[p[i]] = v[i]."""
    out = [0] * len(vec)
    for i, x in enumerate(vec):
        out[p[i]] = x
    return tuple(out)


def simple_reflection(n, k):
    """s_k swapping slots k-1 and k (1-based k < n)."""
    p = list(range(n))
    p[k - 1], p[k] = p[k], p[k - 1]
    return tuple(p)


def transposition(n, i, j):
    """Reflection in the root (i, j), 1-based."""
    p = list(range(n))
    p[i - 1], p[j - 1] = p[j - 1], p[i - 1]
    return tuple(p)


def longest_element(n):
    return tuple(reversed(range(n)))


def inversions(p):
    n = len(p)
    return sum(1 for i in range(n) for j in range(i + 1, n) if p[i] > p[j])


# -- reduced words and normal orders ---------------------------------


def reduced_words_of_w0(n):
    """All reduced expressions for the longest element of S_n.

    Words are tuples of simple indices (1-based); the word (a_1,..,a_m)
    denotes s_{a_1} o ... o s_{a_m} with the rightmost factor applied
    first.
    """
    if n < 2:
        raise InvalidRankError(f"rank must be >= 2, got {n}")
    ident = perm_identity(n)
    memo = {}

    def words(w):
        if w == ident:
            return [()]
        got = memo.get(w)
        if got is not None:
            return got
        out = []
        winv = perm_inverse(w)
        for k in range(1, n):
            # left descent: s_k w shorter iff value k-1 sits after value k
            if winv[k - 1] > winv[k]:
                sw = perm_compose(simple_reflection(n, k), w)
                out.extend((k,) + rest for rest in words(sw))
        memo[w] = out
        return out

    return words(longest_element(n))


def word_permutation(word, n):
    p = perm_identity(n)
    for a in word:
        p = perm_compose(p, simple_reflection(n, a))
    return p


def normal_order_from_word(word, n):
    """Normal order of the positive roots attached to a reduced word."""
    datum = root_datum(n)
    if len(word) != datum.m or word_permutation(word, n) != longest_element(n):
        raise NotReducedError(f"{word} is not a reduced word for w0 in S_{n}")
    order = []
    prefix = perm_identity(n)
    for a in word:
        vec = perm_apply(prefix, datum.root_vector((a, a + 1)))
        i = vec.index(1) + 1
        j = vec.index(-1) + 1
        order.append((i, j))
        prefix = perm_compose(prefix, simple_reflection(n, a))
    return order


def is_normal_order(order, n):
    """Whenever alpha_r + alpha_s is a root, it must sit strictly between."""
    datum = root_datum(n)
    if sorted(order) != datum.positive_roots:
        raise InvalidOrderError("not a permutation of the positive roots")
    pos = {r: k for k, r in enumerate(order)}
    for (i, j) in datum.positive_roots:
        for k in range(i + 1, j):
            r, s, t = pos[(i, k)], pos[(k, j)], pos[(i, j)]
            if not (min(r, s) < t < max(r, s)):
                return False
    return True


def word_from_normal_order(order, n):
    """Reduced word recovering the given normal order (round trip)."""
    if not is_normal_order(order, n):
        raise InvalidOrderError(f"{order} is not a normal order")
    datum = root_datum(n)
    word = []
    prefix = perm_identity(n)
    for root in order:
        vec = perm_apply(perm_inverse(prefix), datum.root_vector(root))
        try:
            i = vec.index(1) + 1
        except ValueError:
            raise InvalidOrderError(f"{order} is not a normal order")
        if i >= n or vec[i] != -1:
            raise InvalidOrderError(f"{order} is not a normal order")
        word.append(i)
        prefix = perm_compose(prefix, simple_reflection(n, i))
    return word


def dot_action(w, mu, n):
    """w . mu = w(mu + rho) - rho."""
    rho = root_datum(n).rho
    shifted = tuple(Fraction(m) + r for m, r in zip(mu, rho))
    moved = perm_apply(w, shifted)
    return tuple(v - r for v, r in zip(moved, rho))


# -- subalgebra specifications ---------------------------------------


@dataclass(frozen=True)
class SubalgebraSpec:
    """Reductive subalgebra h + a_{blocks}: disjoint sorted index blocks.

    The Cartan h is always included; blocks record the semisimple part.
    A spec is standard iff every block is a consecutive range.
    """

    blocks: tuple

    def __post_init__(self):
        seen = set()
        for b in self.blocks:
            if list(b) != sorted(b) or len(set(b)) != len(b) or len(b) < 2:
                raise ValueError(f"bad block {b}")
            if seen & set(b):
                raise ValueError("blocks overlap")
            seen |= set(b)

    @staticmethod
    def make(*blocks):
        return SubalgebraSpec(tuple(tuple(b) for b in blocks))

    @staticmethod
    def cartan():
        return SubalgebraSpec(())

    @staticmethod
    def parse(text):
        """Parse "12,45" style block lists; "h" is the Cartan."""
        text = text.strip()
        if text in ("h", ""):
            return SubalgebraSpec.cartan()
        blocks = []
        for part in text.split(","):
            part = part.strip()
            if not part.isdigit():
                raise ValueError(f"bad subalgebra spec {text!r}")
            blocks.append(tuple(int(c) for c in part))
        return SubalgebraSpec.make(*blocks)

    def label(self):
        return ",".join("".join(str(i) for i in b) for b in self.blocks) if self.blocks else "h"

    def is_cartan(self):
        return not self.blocks

    def is_standard(self):
        return all(b[-1] - b[0] + 1 == len(b) for b in self.blocks)

    def indices(self):
        out = set()
        for b in self.blocks:
            out |= set(b)
        return out

    def positive_roots(self):
        out = []
        for b in self.blocks:
            for a in range(len(b)):
                for c in range(a + 1, len(b)):
                    out.append((b[a], b[c]))
        return sorted(out)

    def contains_root(self, root):
        i, j = root
        return any(i in b and j in b for b in self.blocks)

    def contains(self, other):
        mine = set(self.positive_roots())
        return all(r in mine for r in other.positive_roots())

    def intersect(self, other):
        blocks = []
        for b1 in self.blocks:
            for b2 in other.blocks:
                common = tuple(sorted(set(b1) & set(b2)))
                if len(common) >= 2:
                    blocks.append(common)
        return SubalgebraSpec(tuple(sorted(blocks)))

    def local_rho_value(self, root):
        """Position difference of the root's endpoints inside its block."""
        i, j = root
        for b in self.blocks:
            if i in b and j in b:
                return b.index(j) - b.index(i)
        raise ValueError(f"root {root} not in {self}")

    def normal_order(self):
        """Blockwise lexicographic-by-position order; a normal order."""
        out = []
        for b in self.blocks:
            for a in range(len(b)):
                for c in range(a + 1, len(b)):
                    out.append((b[a], b[c]))
        return out

    def weyl_generators(self, n):
        """Transpositions of adjacent block positions, as permutations."""
        gens = []
        for b in self.blocks:
            for a in range(len(b) - 1):
                gens.append(transposition(n, b[a], b[a + 1]))
        return gens

    def weyl_elements(self, n):
        """All elements of W(l) as permutations (blocks are small here)."""
        elems = {perm_identity(n)}
        gens = self.weyl_generators(n)
        frontier = list(elems)
        while frontier:
            nxt = []
            for w in frontier:
                for g in gens:
                    c = perm_compose(g, w)
                    if c not in elems:
                        elems.add(c)
                        nxt.append(c)
            frontier = nxt
        return sorted(elems)

    def complement_roots(self, datum):
        """Delta(u+): positive roots of g outside the subalgebra."""
        return [r for r in datum.positive_roots if not self.contains_root(r)]


def in_z_plus(T, spec, n):
    """T in z+(l): central for l and strictly positive on Delta(u+).

    Rational T only; the complex case never arises in the checks here.
    """
    datum = root_datum(n)
    for root in spec.positive_roots():
        if datum.pairing(T, root) != 0:
            raise NotCentralError(f"{T} is not central for {spec.label()}")
    return all(datum.pairing(T, root) > 0 for root in spec.complement_roots(datum))


def kostant_partition_count(nu, n):
    """Number of ways to write nu as an N-combination of positive roots.

    Independent counting oracle.  Exponents are capped through the rho
    pairing, which is strictly positive on every positive root, so the
    recursion terminates and misses nothing.
    """
    datum = root_datum(n)
    roots = datum.positive_roots
    rho = datum.rho

    def rho_pair(vec):
        return sum(r * v for r, v in zip(rho, vec))

    def rec(vec, k):
        if not any(vec):
            return 1
        if k == len(roots) or rho_pair(vec) < 0:
            return 0
        i, j = roots[k]
        cap = rho_pair(vec) // (j - i)
        total = 0
        t = list(vec)
        for _ in range(cap + 1):
            total += rec(tuple(t), k + 1)
            t[i - 1] -= 1
            t[j - 1] += 1
        return total

    return rec(tuple(int(c) for c in nu), 0)


# -- serialization ----------------------------------------------------


def root_str(root):
    return f"a{root[0]}{root[1]}"


def parse_root(text):
    if not text.startswith("a") or len(text) != 3:
        raise ValueError(f"bad root {text!r}")
    return (int(text[1]), int(text[2]))


def weight_str(mu):
    return ",".join(str(Fraction(c)) for c in mu)


def parse_weight(text):
    return tuple(Fraction(part) for part in text.split(","))


def word_str(word):
    return " ".join(f"s{a}" for a in word)


def parse_word(text):
    out = []
    for tok in text.split():
        if not tok.startswith("s"):
            raise ValueError(f"bad word token {tok!r}")
        out.append(int(tok[1:]))
    return tuple(out)
