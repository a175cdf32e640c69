"""Integral lattices given by Gram matrices.

The symplectic tensor lattice ``L = Z^2 (x) Z^2g`` uses the fixed basis order

    e(x)e'_1 .. e(x)e'_g, e(x)f'_1 .. e(x)f'_g, f(x)e'_1 .. f(x)e'_g, f(x)f'_1 .. f(x)f'_g

so that its Gram matrix is ``kron(J_2, J_2g)``.  Every other module indexes
tensor vectors in this order.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from itertools import product
from math import gcd, lcm
from typing import List, Optional, Sequence, Tuple

from . import _exact


class DegenerateLatticeError(ValueError):
    """Raised when a Gram matrix has determinant zero."""


class DiscriminantTooLargeError(ValueError):
    pass


MAX_COSET_DISCRIMINANT = 4096


@dataclass(frozen=True)
class SymplecticForm:
    """The standard form ``J_2g = [[0, I], [-I, 0]]``."""

    g: int

    @property
    def size(self) -> int:
        return 2 * self.g

    @property
    def matrix(self) -> Tuple[Tuple[int, ...], ...]:
        return tuple(tuple(symplectic_matrix(self.g)[i]) for i in range(2 * self.g))

    def pairing(self, u, v):
        g = self.g
        return sum(u[k] * v[g + k] - u[g + k] * v[k] for k in range(g))


def symplectic_matrix(g: int) -> List[List[int]]:
    n = 2 * g
    j = [[0] * n for _ in range(n)]
    for k in range(g):
        j[k][g + k] = 1
        j[g + k][k] = -1
    return j


J2 = ((0, 1), (-1, 0))
J2_INV = ((0, -1), (1, 0))


@dataclass(frozen=True)
class DiscriminantGroup:
    invariant_factors: Tuple[int, ...]

    def __post_init__(self):
        fs = self.invariant_factors
        if any(f <= 1 for f in fs):
            raise ValueError("invariant factors must exceed 1")
        if any(fs[i + 1] % fs[i] for i in range(len(fs) - 1)):
            raise ValueError("invariant factors must form a divisibility chain")

    @property
    def order(self) -> int:
        return reduce(lambda a, b: a * b, self.invariant_factors, 1)

    def is_trivial(self) -> bool:
        return not self.invariant_factors

    def __str__(self) -> str:
        if not self.invariant_factors:
            return "(Z/1)^0 (trivial)"
        groups = []
        for f in self.invariant_factors:
            if groups and groups[-1][0] == f:
                groups[-1][1] += 1
            else:
                groups.append([f, 1])
        return " x ".join(f"(Z/{f})^{k}" for f, k in groups)


@dataclass(frozen=True)
class GramLattice:
    """A nondegenerate integral lattice ``Z^n`` with symmetric Gram matrix."""

    gram: Tuple[Tuple[int, ...], ...]
    basis_labels: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        gram = tuple(tuple(int(x) for x in row) for row in self.gram)
        n = len(gram)
        if n == 0 or any(len(r) != n for r in gram):
            raise ValueError("Gram matrix must be square and nonempty")
        if any(gram[i][j] != gram[j][i] for i in range(n) for j in range(i)):
            raise ValueError("Gram matrix must be symmetric")
        object.__setattr__(self, "gram", gram)
        labels = tuple(self.basis_labels) or tuple(f"b{i}" for i in range(n))
        if len(labels) != n:
            raise ValueError("need one label per basis vector")
        object.__setattr__(self, "basis_labels", labels)
        if _exact.det(gram) == 0:
            raise DegenerateLatticeError("Gram matrix is degenerate")

    @property
    def rank(self) -> int:
        return len(self.gram)

    @property
    def det(self) -> int:
        return int(_exact.det(self.gram))

    @property
    def is_even(self) -> bool:
        return all(self.gram[i][i] % 2 == 0 for i in range(self.rank))

    def pair(self, u, v):
        return _exact.bilinear(u, self.gram, v)

    def norm(self, v):
        return self.pair(v, v)

    def dual_gram(self) -> List[List[Fraction]]:
        return _exact.inverse(self.gram)

    # -- serialization -------------------------------------------------
    def to_dict(self) -> dict:
        return {"gram": [list(r) for r in self.gram],
                "labels": list(self.basis_labels),
                "rank": self.rank}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False)

    @classmethod
    def from_dict(cls, doc: dict) -> "GramLattice":
        try:
            gram = doc["gram"]
        except (KeyError, TypeError) as exc:
            raise ValueError("lattice document needs a 'gram' entry") from exc
        rank = doc.get("rank", len(gram))
        if rank != len(gram):
            raise ValueError(f"rank {rank} does not match Gram size {len(gram)}")
        return cls(gram=gram, basis_labels=tuple(doc.get("labels", ())))

    @classmethod
    def from_json(cls, text: str) -> "GramLattice":
        return cls.from_dict(json.loads(text))


def tensor_labels(g: int) -> Tuple[str, ...]:
    left = ("e", "f")
    right = [f"e'{k}" for k in range(1, g + 1)] + [f"f'{k}" for k in range(1, g + 1)]
    return tuple(f"{a}⊗{b}" for a in left for b in right)


def tensor_symplectic(g: int) -> GramLattice:
    """Gram matrix of ``gamma(v1 (x) v1', v2 (x) v2') = w(v1, v2) w'(v1', v2')``."""
    if g < 1:
        raise ValueError("g must be positive")
    j2g = symplectic_matrix(g)
    n = 2 * g
    gram = [[J2[a][b] * j2g[i][j] for b in range(2) for j in range(n)]
            for a in range(2) for i in range(n)]
    return GramLattice(gram, tensor_labels(g))


def hyperbolic_plane() -> GramLattice:
    return GramLattice(((0, 1), (1, 0)))


def e8_lattice() -> GramLattice:
    """Cartan matrix of E8 (Bourbaki numbering)."""
    edges = [(0, 2), (1, 3), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7)]
    gram = [[2 if i == j else 0 for j in range(8)] for i in range(8)]
    for i, j in edges:
        gram[i][j] = gram[j][i] = -1
    return GramLattice(gram)


def rescale(lat: GramLattice, n: int) -> GramLattice:
    """``L(N)``: the Gram matrix multiplied by ``N``."""
    if n < 1:
        raise ValueError("scale must be a positive integer")
    return GramLattice([[n * x for x in row] for row in lat.gram], lat.basis_labels)


def signature(lat: GramLattice) -> Tuple[int, int]:
    """Inertia of the Gram matrix via exact symmetric (congruence) reduction."""
    a = [[Fraction(x) for x in row] for row in lat.gram]
    pos = neg = 0
    n = len(a)
    active = list(range(n))
    while active:
        piv = next((i for i in active if a[i][i] != 0), None)
        if piv is None:
            pair = next(((i, j) for i in active for j in active if i < j and a[i][j] != 0), None)
            if pair is None:
                raise DegenerateLatticeError("Gram matrix is degenerate")
            i, j = pair
            # congruence x_i <- x_i + x_j makes the (i, i) entry 2 a_ij != 0
            for k in range(n):
                a[i][k] += a[j][k]
            for k in range(n):
                a[k][i] += a[k][j]
            piv = i
        d = a[piv][piv]
        if d > 0:
            pos += 1
        else:
            neg += 1
        active.remove(piv)
        for i in active:
            f = a[i][piv] / d
            if f:
                for k in active:
                    a[i][k] -= f * a[piv][k]
        for i in active:
            a[i][piv] = a[piv][i] = Fraction(0)
    return pos, neg


def discriminant_group(lat: GramLattice) -> DiscriminantGroup:
    factors = [abs(f) for f in _exact.invariant_factors(lat.gram)]
    if 0 in factors:
        raise DegenerateLatticeError("Gram matrix is degenerate")
    return DiscriminantGroup(tuple(f for f in factors if f > 1))


def lattice_level(lat: GramLattice) -> int:
    """Least ``N`` with ``N (x, x)`` even for every ``x`` in the dual lattice."""
    inv = lat.dual_gram()
    n = lat.rank
    dens = [inv[i][j].denominator for i in range(n) for j in range(i + 1, n)]
    dens += [(inv[i][i] / 2).denominator for i in range(n)]
    return reduce(lcm, dens, 1)


def in_dual(lat: GramLattice, coset: Sequence) -> bool:
    """True when ``coset`` (coordinates in the lattice basis) lies in ``L^dual``."""
    v = [Fraction(x) for x in coset]
    return all(x.denominator == 1 for x in _exact.matvec(lat.gram, v))


def reduce_mod_lattice(v: Sequence) -> Tuple[Fraction, ...]:
    return tuple(Fraction(x) - (Fraction(x).numerator // Fraction(x).denominator) for x in v)


def coset_representatives(lat: GramLattice,
                          max_discriminant: int = MAX_COSET_DISCRIMINANT) -> List[Tuple[Fraction, ...]]:
    """One vector of ``L^dual`` per class of ``L^dual / L``.

    Coordinates are in the lattice basis, reduced to ``[0, 1)``.  The list is
    sorted, so the zero coset comes first.
    """
    order = abs(lat.det)
    if order > max_discriminant:
        raise DiscriminantTooLargeError(f"|disc| = {order} exceeds bound {max_discriminant}")
    d, p, _ = _exact.smith_normal_form(lat.gram)
    p_inv = _exact.int_inverse(p)
    inv = lat.dual_gram()
    n = lat.rank
    diag = [d[i][i] for i in range(n)]
    reps = set()
    for ks in product(*(range(x) for x in diag)):
        c = _exact.matvec(p_inv, ks)
        reps.add(reduce_mod_lattice(_exact.matvec(inv, c)))
    return sorted(reps)
