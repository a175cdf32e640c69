"""Integer 2g x 2 matrices ``B`` with ``B^T J_2g B = d J_2`` and their tensor vectors.

Conventions
-----------
* ``B`` has columns ``a = (a_1..a_2g)`` and ``b = (b_1..b_2g)``.
* The homology matrix is ``B_h = B J_2`` and the level datum is ``B_h mod N``.
* ``(gamma, delta)`` in ``SL_2(Z) x Sp_2g(Z)`` acts by ``B -> delta @ B @ gamma``.
* Tensor vectors use the basis order of :mod:`nlbench.lattice`.
"""
from __future__ import annotations

import heapq
import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import _exact
from .lattice import J2, J2_INV, symplectic_matrix, tensor_symplectic

Word = Tuple[Tuple[str, str], ...]


@dataclass(frozen=True)
class IsogenyMatrix:
    g: int
    entries: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        rows = tuple((int(r[0]), int(r[1])) for r in self.entries)
        if len(rows) != 2 * self.g:
            raise ValueError(f"expected {2 * self.g} rows, got {len(rows)}")
        object.__setattr__(self, "entries", rows)

    @classmethod
    def from_columns(cls, a: Sequence[int], b: Sequence[int]) -> "IsogenyMatrix":
        if len(a) != len(b) or len(a) % 2:
            raise ValueError("columns must have equal even length")
        return cls(len(a) // 2, tuple(zip(a, b)))

    @classmethod
    def from_rows(cls, rows) -> "IsogenyMatrix":
        rows = [tuple(r) for r in rows]
        if len(rows) % 2 or any(len(r) != 2 for r in rows):
            raise ValueError("B must be a 2g x 2 matrix")
        return cls(len(rows) // 2, tuple(rows))

    @property
    def a(self) -> Tuple[int, ...]:
        return tuple(r[0] for r in self.entries)

    @property
    def b(self) -> Tuple[int, ...]:
        return tuple(r[1] for r in self.entries)

    @property
    def degree(self) -> int:
        return degree(self)

    def height(self) -> int:
        return max(abs(x) for r in self.entries for x in r)

    def tolist(self) -> List[List[int]]:
        return [list(r) for r in self.entries]

    def flat(self) -> Tuple[int, ...]:
        return tuple(x for r in self.entries for x in r)


@dataclass(frozen=True)
class LevelDatum:
    N: int
    b: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be positive")
        object.__setattr__(self, "b", tuple((x % self.N, y % self.N) for x, y in self.b))

    @property
    def g(self) -> int:
        return len(self.b) // 2

    def is_symplectic(self, d: int) -> bool:
        """Check ``b^T J_2g b = d J_2 (mod N)``.

        Which condition the level datum must satisfy is not settled (the
        alternative is ``b^T J b = J``), so this is exposed but not enforced.
        """
        return (_pair_cols(self.b, self.g) - d) % self.N == 0


@dataclass(frozen=True)
class TensorVector:
    coords: Tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.coords) % 4:
            raise ValueError("tensor vectors have length 4g")

    @property
    def g(self) -> int:
        return len(self.coords) // 4


def _pair_cols(rows, g) -> int:
    return sum(rows[k][0] * rows[g + k][1] - rows[g + k][0] * rows[k][1] for k in range(g))


def degree(B: IsogenyMatrix) -> int:
    """The (1, 2) entry of ``B^T J_2g B``."""
    return _pair_cols(B.entries, B.g)


def gram_form(B: IsogenyMatrix) -> List[List[int]]:
    """``B^T J_2g B`` as a full 2 x 2 matrix (always antisymmetric)."""
    bt = _exact.transpose(B.entries)
    return _exact.matmul(_exact.matmul(bt, symplectic_matrix(B.g)), B.entries)


def to_homology(B: IsogenyMatrix) -> List[List[int]]:
    return _exact.matmul(B.entries, J2)


def from_homology(bh) -> IsogenyMatrix:
    return IsogenyMatrix.from_rows(_exact.matmul(_exact.as_int_matrix(bh), J2_INV))


def tensor_vector(B: IsogenyMatrix) -> TensorVector:
    """``sum_k b_{g+k} e(x)e'_k - b_k e(x)f'_k - a_{g+k} f(x)e'_k + a_k f(x)f'_k``."""
    g, a, b = B.g, B.a, B.b
    coords = ([b[g + k] for k in range(g)] + [-b[k] for k in range(g)]
              + [-a[g + k] for k in range(g)] + [a[k] for k in range(g)])
    return TensorVector(tuple(Fraction(x) for x in coords))


def matrix_of_vector(v: TensorVector) -> IsogenyMatrix:
    g = v.g
    c = v.coords
    if any(Fraction(x).denominator != 1 for x in c):
        raise ValueError("tensor vector is not integral")
    c = [int(x) for x in c]
    b_hi, b_lo_neg, a_hi_neg, a_lo = c[:g], c[g:2 * g], c[2 * g:3 * g], c[3 * g:]
    a = a_lo + [-x for x in a_hi_neg]
    b = [-x for x in b_lo_neg] + b_hi
    return IsogenyMatrix.from_columns(a, b)


def tensor_norm(v: TensorVector):
    lat = tensor_symplectic(v.g)
    return lat.norm(v.coords)


def congruence_class(B: IsogenyMatrix, N: int) -> LevelDatum:
    if N < 1:
        raise ValueError("N must be positive")
    return LevelDatum(N, tuple(tuple(r) for r in to_homology(B)))


def congruence_check(B: IsogenyMatrix, datum: LevelDatum) -> bool:
    return congruence_class(B, datum.N).b == datum.b


# ----------------------------------------------------------------------
# enumeration


def enumerate_matrices(g: int, d: int, height_bound: int,
                       datum: Optional[LevelDatum] = None) -> List[IsogenyMatrix]:
    """All ``B`` with entries in ``[-h, h]`` and degree ``d``.

    Ordered lexicographically by ``(a_1, .., a_2g, b_1, .., b_2g)``.
    """
    if height_bound < 1:
        raise ValueError("height_bound must be >= 1")
    if d < 1:
        raise ValueError("degree must be positive")
    n = 2 * g
    vals = np.arange(-height_bound, height_bound + 1, dtype=np.int64)
    cols = np.array(list(itertools.product(vals, repeat=n)), dtype=np.int64)
    pairing = cols @ np.array(symplectic_matrix(g), dtype=np.int64) @ cols.T
    ia, ib = np.nonzero(pairing == d)
    out = []
    for i, j in zip(ia.tolist(), ib.tolist()):
        B = IsogenyMatrix.from_columns(cols[i].tolist(), cols[j].tolist())
        if datum is not None and not congruence_check(B, datum):
            continue
        out.append(B)
    return out


# ----------------------------------------------------------------------
# generators and the action graph


def _elem(n, i, j, k=1):
    m = _exact.identity(n)
    m[i][j] += k
    return m


def sp_generators(g: int, N: int = 1) -> Dict[str, List[List[int]]]:
    """Elementary generators of ``Sp_2g(Z)`` (N = 1) or their N-th powers.

    For ``N > 1`` the set is the N-th powers of the unipotent generators; it
    lies in the principal congruence subgroup but is not claimed to generate it.
    """
    n = 2 * g
    gens = {}
    pairs = [(i, i) for i in range(g)] + [(i, j) for i in range(g) for j in range(i + 1, g)]
    for s in (N, -N):
        tag = f"{s:+d}"
        for i, j in pairs:
            up = _exact.identity(n)
            lo = _exact.identity(n)
            up[i][g + j] += s
            lo[g + i][j] += s
            if i != j:
                up[j][g + i] += s
                lo[g + j][i] += s
            gens[f"U{i}{j}{tag}"] = up
            gens[f"L{i}{j}{tag}"] = lo
        for i in range(g):
            for j in range(g):
                if i != j:
                    m = _exact.identity(n)
                    m[i][j] += s
                    m[g + j][g + i] -= s
                    gens[f"A{i}{j}{tag}"] = m
    if N == 1:
        jm = symplectic_matrix(g)
        gens["J"] = jm
        gens["J'"] = [[-x for x in r] for r in jm]
    return gens


def sl2_generators(N: int = 1) -> Dict[str, List[List[int]]]:
    if N == 1:
        return {"S": [[0, -1], [1, 0]], "S'": [[0, 1], [-1, 0]],
                "T": [[1, 1], [0, 1]], "T'": [[1, -1], [0, 1]]}
    gens = {}
    for s in (N, -N):
        tag = f"{s:+d}"
        gens[f"T{tag}"] = [[1, s], [0, 1]]
        gens[f"V{tag}"] = [[1, 0], [s, 1]]
        # T V^s T^-1
        gens[f"W{tag}"] = [[1 + s, -s], [s, 1 - s]]
    return gens


def is_symplectic(m, g: int) -> bool:
    j = symplectic_matrix(g)
    return _exact.matmul(_exact.matmul(_exact.transpose(m), j), m) == j


class ActionGraph:
    """Moves ``B -> G B`` (left, symplectic) and ``B -> B H`` (right, SL_2)."""

    def __init__(self, g: int, N: int = 1):
        self.g = g
        self.N = N
        self.left = sp_generators(g, N)
        self.right = sl2_generators(N)
        self.moves: List[Tuple[str, str]] = ([("L", k) for k in self.left]
                                             + [("R", k) for k in self.right])
        self._inverse = {}
        for side, table in (("L", self.left), ("R", self.right)):
            for k, m in table.items():
                inv = _exact.int_inverse(m)
                match = next(k2 for k2, m2 in table.items() if m2 == inv)
                self._inverse[(side, k)] = (side, match)
        n = 2 * g
        # sparse forms for fast application to flattened states
        self._lsparse = {k: [[(j, m[i][j]) for j in range(n) if m[i][j]] for i in range(n)]
                         for k, m in self.left.items()}

    def inverse(self, move):
        return self._inverse[move]

    def apply(self, state: Tuple[int, ...], move) -> Tuple[int, ...]:
        side, name = move
        n = 2 * self.g
        if side == "L":
            sp = self._lsparse[name]
            out = []
            for row in sp:
                out.append(sum(c * state[2 * j] for j, c in row))
                out.append(sum(c * state[2 * j + 1] for j, c in row))
            return tuple(out)
        (p, q), (r, s) = self.right[name]
        out = []
        for i in range(n):
            x, y = state[2 * i], state[2 * i + 1]
            out.append(x * p + y * r)
            out.append(x * q + y * s)
        return tuple(out)

    def apply_word(self, state, word: Iterable) -> Tuple[int, ...]:
        for mv in word:
            state = self.apply(state, mv)
        return state

    def word_matrices(self, word) -> Tuple[List[List[int]], List[List[int]]]:
        """``(gamma, delta)`` with ``delta B gamma`` equal to applying ``word``."""
        delta = _exact.identity(2 * self.g)
        gamma = _exact.identity(2)
        for side, name in word:
            if side == "L":
                delta = _exact.matmul(self.left[name], delta)
            else:
                gamma = _exact.matmul(gamma, self.right[name])
        return gamma, delta


# ----------------------------------------------------------------------
# normal form


class OutsideCandidateForm(ValueError):
    """``B`` cannot be moved to ``(d1 e_1 | d2 e_{g+1})``.

    Happens exactly when the symplectic form restricted to the saturation of
    the column span is ``m J_2`` with ``m > 1``; the Smith invariants of ``B``
    are then ``(s1, s2)`` with ``s1 s2 m = d``.
    """

    def __init__(self, B, s1, s2, m):
        self.B, self.s1, self.s2, self.m = B, s1, s2, m
        super().__init__(f"saturation carries form {m} J_2 (Smith invariants {s1}, {s2})")


@dataclass(frozen=True)
class Reduction:
    d1: int
    d2: int
    representative: IsogenyMatrix
    gamma: Tuple[Tuple[int, int], ...]
    delta: Tuple[Tuple[int, ...], ...]


def smith_invariants(B: IsogenyMatrix) -> Tuple[int, int]:
    """Smith invariants ``(s1, s2)`` of ``B`` from gcds of entries and 2x2 minors."""
    s1 = 0
    for r in B.entries:
        s1 = gcd(gcd(s1, r[0]), r[1])
    minors = 0
    rows = B.entries
    for i in range(len(rows)):
        for j in range(i + 1, len(rows)):
            minors = gcd(minors, rows[i][0] * rows[j][1] - rows[j][0] * rows[i][1])
    return s1, (minors // s1 if s1 else 0)


def saturation_multiplier(B: IsogenyMatrix) -> int:
    """``m`` with the form on the saturated column span equal to ``m J_2``."""
    s1, s2 = smith_invariants(B)
    d = degree(B)
    if d == 0:
        return 0
    return abs(d) // (s1 * s2)


def canonical_representative(g: int, d1: int, d2: int) -> IsogenyMatrix:
    a = [0] * (2 * g)
    b = [0] * (2 * g)
    a[0] = d1
    b[g] = d2
    return IsogenyMatrix.from_columns(a, b)


def _smith_2col(rows):
    """Smith form of an n x 2 integer matrix, tracking ``P^-1`` and ``Q``.

    Returns ``(s1, s2, Pinv, Q)`` with ``rows = Pinv @ diag @ Q^-1``.
    """
    m = [list(r) for r in rows]
    n = len(m)
    pinv = _exact.identity(n)
    q = _exact.identity(2)
    for t in range(2):
        while True:
            cand = [(abs(m[i][j]), i, j) for i in range(t, n) for j in range(t, 2) if m[i][j]]
            if not cand:
                break
            _, i, j = min(cand)
            if i != t:
                m[t], m[i] = m[i], m[t]
                for row in pinv:
                    row[t], row[i] = row[i], row[t]
            if j != t:
                for row in m:
                    row[t], row[j] = row[j], row[t]
                for row in q:
                    row[t], row[j] = row[j], row[t]
            piv = m[t][t]
            clean = True
            for i in range(t + 1, n):
                k = m[i][t] // piv
                if k:
                    # row_i -= k row_t  <=>  Pinv col_t += k col_i
                    m[i] = [x - k * y for x, y in zip(m[i], m[t])]
                    for row in pinv:
                        row[t] += k * row[i]
                if m[i][t]:
                    clean = False
            if t == 0:
                k = m[0][1] // piv
                if k:
                    for row in m:
                        row[1] -= k * row[0]
                    for row in q:
                        row[1] -= k * row[0]
                if m[0][1]:
                    clean = False
            if not clean:
                continue
            if t == 0:
                bad = next((i for i in range(1, n) if m[i][1] % piv), None)
                if bad is not None:
                    m[0] = [x + y for x, y in zip(m[0], m[bad])]
                    for row in pinv:
                        row[bad] -= row[0]
                    continue
            break
        if m[t][t] < 0:
            m[t] = [-x for x in m[t]]
            for row in pinv:
                row[t] = -row[t]
    return m[0][0], m[1][1], pinv, q


def _omega(u, v, g):
    return sum(u[k] * v[g + k] - u[g + k] * v[k] for k in range(g))


def complete_symplectic_basis(e_vecs, f_vecs, g: int) -> List[List[int]]:
    """Extend symplectic pairs ``(e_i, f_i)`` to a basis of ``Z^2g``.

    Returns the matrix ``S`` whose columns are the new basis in the order
    ``e_1..e_g, f_1..f_g``; ``S^T J S = J``.
    """
    es = [list(v) for v in e_vecs]
    fs = [list(v) for v in f_vecs]
    n = 2 * g

    def project(x):
        for e, f in zip(es, fs):
            a, b = _omega(x, f, g), _omega(x, e, g)
            x = [xi - a * ei + b * fi for xi, ei, fi in zip(x, e, f)]
        return x

    span = [project([int(i == j) for j in range(n)]) for i in range(n)]
    while len(es) < g:
        basis = _exact.hermite_rows(span)
        w = basis[0]
        coeffs = [_omega(w, h, g) for h in basis]
        # combination of basis vectors pairing to 1 with w
        acc, lam = 0, [0] * len(coeffs)
        for idx, c in enumerate(coeffs):
            if c == 0:
                continue
            gg, x, y = _exact.ext_gcd(acc, c)
            lam = [x * l for l in lam]
            lam[idx] += y
            acc = gg
        if acc != 1:
            raise ValueError("complement is not unimodular")
        f = [sum(l * h[k] for l, h in zip(lam, basis)) for k in range(n)]
        es.append(w)
        fs.append(f)
        span = [project(h) for h in basis]
    cols = es + fs
    return [[cols[c][r] for c in range(n)] for r in range(n)]


def symplectic_inverse(S, g: int) -> List[List[int]]:
    """``S^-1 = -J S^T J`` for symplectic ``S``."""
    j = symplectic_matrix(g)
    return [[-x for x in row] for row in _exact.matmul(_exact.matmul(j, _exact.transpose(S)), j)]


def symplectic_reduce(B: IsogenyMatrix) -> Reduction:
    """Move ``B`` to ``(d1 e_1 | d2 e_{g+1})`` with ``d1 | d2``, ``d1 d2 = d``.

    Constructive: Smith form of ``B`` gives a basis ``(q1, q2)`` of the
    saturated column span with ``B = (q1 | q2) diag(s1, s2) V``; when
    ``w(q1, q2) = 1`` the pair extends to a symplectic basis ``S`` and
    ``delta = S^-1``, ``gamma = V^-1``.  Raises :class:`OutsideCandidateForm`
    when ``w(q1, q2) > 1``.
    """
    d = degree(B)
    if d <= 0:
        raise ValueError(f"degree must be positive, got {d}")
    g = B.g
    s1, s2, pinv, q = _smith_2col(B.entries)
    q1 = [row[0] for row in pinv]
    q2 = [row[1] for row in pinv]
    # B = (q1|q2) diag(s1, s2) Q^-1
    if q[0][0] * q[1][1] - q[0][1] * q[1][0] == -1:
        q2 = [-x for x in q2]
        q = [[q[0][0], -q[0][1]], [q[1][0], -q[1][1]]]
    m = _omega(q1, q2, g)
    if m != 1:
        raise OutsideCandidateForm(B, s1, s2, m)
    S = complete_symplectic_basis([q1], [q2], g)
    delta = symplectic_inverse(S, g)
    gamma = q
    rep = canonical_representative(g, s1, s2)
    check = _exact.matmul(_exact.matmul(delta, B.entries), gamma)
    if [tuple(r) for r in check] != list(rep.entries):
        raise AssertionError("internal reduction error")
    return Reduction(s1, s2, rep, tuple(map(tuple, gamma)), tuple(map(tuple, delta)))


# ----------------------------------------------------------------------
# search oracle


class WordSearch:
    """Best-first search in the action graph with a shared solved-state cache.

    ``find(B, target)`` returns a word carrying ``B`` to ``target``.  States
    already connected to the target are remembered, so a batch of calls
    against the same target gets progressively cheaper.
    """

    def __init__(self, graph: ActionGraph, ball_radius: int = 2, max_nodes: int = 20000):
        self.graph = graph
        self.ball_radius = ball_radius
        self.max_nodes = max_nodes
        self._solved: Dict[Tuple[int, ...], Dict[Tuple[int, ...], Word]] = {}

    def _ball(self, target):
        if target in self._solved:
            return self._solved[target]
        solved = {target: ()}
        frontier = [target]
        for _ in range(self.ball_radius):
            nxt = []
            for s in frontier:
                tail = solved[s]
                for mv in self.graph.moves:
                    t = self.graph.apply(s, mv)
                    if t not in solved:
                        solved[t] = (self.graph.inverse(mv),) + tail
                        nxt.append(t)
            frontier = nxt
        self._solved[target] = solved
        return solved

    def find(self, B: IsogenyMatrix, target: IsogenyMatrix) -> Optional[Word]:
        solved = self._ball(target.flat())
        start = B.flat()
        if start in solved:
            return solved[start]
        cap = 4 * max(B.height(), target.height()) + 4
        parent = {start: None}
        heap = [(sum(x * x for x in start), 0, start)]
        counter = 0
        while heap and counter < self.max_nodes:
            _, _, s = heapq.heappop(heap)
            for mv in self.graph.moves:
                t = self.graph.apply(s, mv)
                if t in parent:
                    continue
                parent[t] = (s, mv)
                if t in solved:
                    path = []
                    u = t
                    while parent[u] is not None:
                        prev, m = parent[u]
                        path.append((prev, m))
                        u = prev
                    path.reverse()
                    word = tuple(m for _, m in path) + solved[t]
                    tail = solved[t]
                    for prev, m in reversed(path):
                        tail = (m,) + tail
                        solved.setdefault(prev, tail)
                    return word
                if max(abs(x) for x in t) <= cap:
                    counter += 1
                    heapq.heappush(heap, (sum(x * x for x in t), counter, t))
        return None


# ----------------------------------------------------------------------
# orbit census


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, i):
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i, j) -> bool:
        ri, rj = self.find(i), self.find(j)
        if ri == rj:
            return False
        if rj < ri:
            ri, rj = rj, ri
        self.parent[rj] = ri
        return True


@dataclass
class CensusClass:
    rep: IsogenyMatrix
    size: int
    congruence_class: LevelDatum


@dataclass
class CensusReport:
    g: int
    d: int
    N: int
    height_bound: int
    bfs_depth: int
    classes: List[CensusClass]
    merges: List[Tuple[int, int, Word]]
    members: List[IsogenyMatrix]

    def to_dict(self) -> dict:
        return {"g": self.g, "d": self.d, "N": self.N,
                "height_bound": self.height_bound, "bfs_depth": self.bfs_depth,
                "classes": [{"rep": c.rep.tolist(), "size": c.size,
                             "congruence_class": [list(r) for r in c.congruence_class.b]}
                            for c in self.classes]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def verify_merges(self, graph: ActionGraph) -> bool:
        return all(graph.apply_word(self.members[i].flat(), w) == self.members[j].flat()
                   for i, j, w in self.merges)


def _move_matrices(graph: ActionGraph) -> np.ndarray:
    """Each move as a linear map on flattened states (row-major ``B``)."""
    n = 2 * graph.g
    size = 2 * n
    mats = []
    for side, name in graph.moves:
        m = np.zeros((size, size), dtype=np.int64)
        if side == "L":
            gm = graph.left[name]
            for i in range(n):
                for j in range(n):
                    for c in range(2):
                        m[2 * i + c, 2 * j + c] = gm[i][j]
        else:
            hm = graph.right[name]
            for i in range(n):
                for c in range(2):
                    for c2 in range(2):
                        m[2 * i + c, 2 * i + c2] = hm[c2][c]
        mats.append(m)
    return np.stack(mats)


def orbit_census(g: int, d: int, N: int = 1, height_bound: int = 3, bfs_depth: int = 6,
                 excursion: int = 1) -> CensusReport:
    """Classes of enumerated matrices merged by level-N moves.

    Two window matrices are merged when a path of at most ``bfs_depth`` moves
    joins them; interior states may leave the window but keep entries within
    ``height_bound + excursion``.  The class count is an upper bound for the
    number of orbits meeting the window.  The search is layer-synchronous from
    all window matrices at once.
    """
    members = enumerate_matrices(g, d, height_bound)
    graph = ActionGraph(g, N)
    moves = graph.moves
    inv_move = np.array([moves.index(graph.inverse(mv)) for mv in moves])
    fmats = _move_matrices(graph).astype(np.float64)
    cap = height_bound + excursion
    base = 2 * cap + 1
    width = 4 * g
    weights = base ** np.arange(width, dtype=np.int64)

    def keys_of(arr):
        return (arr + cap) @ weights

    n = len(members)
    uf = _UnionFind(n)
    merges: List[Tuple[int, int, Word]] = []
    if n == 0:
        return CensusReport(g, d, N, height_bound, bfs_depth, [], merges, members)

    states = np.array([B.flat() for B in members], dtype=np.int64).reshape(n, width)
    root = np.arange(n, dtype=np.int64)
    dist = np.zeros(n, dtype=np.int64)
    parent = np.full(n, -1, dtype=np.int64)
    pmove = np.full(n, -1, dtype=np.int64)
    vkeys = keys_of(states)
    order = np.argsort(vkeys)
    sorted_keys, sorted_ids = vkeys[order], order

    def word_from_root(node):
        w = []
        while parent[node] >= 0:
            w.append(moves[pmove[node]])
            node = parent[node]
        return tuple(reversed(w))

    def components():
        comp = np.array(uf.parent, dtype=np.int64)
        while True:
            nxt = comp[comp]
            if np.array_equal(nxt, comp):
                return comp
            comp = nxt

    def process(src, mv, dst, chunk=32768):
        """Candidate merges along ``src --mv--> dst`` (node ids)."""
        comp = components()
        keep = comp[root[src]] != comp[root[dst]]
        src, mv, dst = src[keep], mv[keep], dst[keep]
        if src.size == 0:
            return
        a, b = comp[root[src]], comp[root[dst]]
        _, first = np.unique(np.minimum(a, b) * n + np.maximum(a, b), return_index=True)
        first = np.sort(first)
        for lo in range(0, first.size, chunk):
            idx = first[lo:lo + chunk]
            if lo:
                comp = components()
                idx = idx[comp[root[src[idx]]] != comp[root[dst[idx]]]]
            for k in idx.tolist():
                s, m, t = int(src[k]), int(mv[k]), int(dst[k])
                ra, rb = int(root[s]), int(root[t])
                if not uf.union(ra, rb):
                    continue
                back = tuple(moves[inv_move[moves.index(x)]] for x in reversed(word_from_root(t)))
                merges.append((ra, rb, word_from_root(s) + (moves[m],) + back))

    frontier = np.arange(n, dtype=np.int64)
    for layer in range(1, bfs_depth + 1):
        if frontier.size == 0:
            break
        src_all, mv_all, st_all = [], [], []
        # float matmul is exact here (entries stay far below 2**53) and much faster
        cur = states[frontier].astype(np.float64)
        for mi in range(len(moves)):
            out = (cur @ fmats[mi].T).astype(np.int64)
            ok = np.abs(out).max(axis=1) <= cap
            src_all.append(frontier[ok])
            mv_all.append(np.full(int(ok.sum()), mi, dtype=np.int64))
            st_all.append(out[ok])
        src = np.concatenate(src_all)
        mvs = np.concatenate(mv_all)
        new_states = np.concatenate(st_all)
        keys = keys_of(new_states)
        pos = np.searchsorted(sorted_keys, keys)
        pos_c = np.minimum(pos, len(sorted_keys) - 1)
        found = sorted_keys[pos_c] == keys
        hit = sorted_ids[pos_c[found]]
        okd = dist[src[found]] + 1 + dist[hit] <= bfs_depth
        process(src[found][okd], mvs[found][okd], hit[okd])
        fresh = ~found
        if layer == bfs_depth or not fresh.any():
            frontier = np.empty(0, dtype=np.int64)
            continue
        fk = keys[fresh]
        uk, first, inverse = np.unique(fk, return_index=True, return_inverse=True)
        start = len(root)
        new_ids = start + np.arange(len(uk), dtype=np.int64)
        fsrc, fmv = src[fresh], mvs[fresh]
        states = np.concatenate([states, new_states[fresh][first]])
        root = np.concatenate([root, root[fsrc[first]]])
        dist = np.concatenate([dist, np.full(len(uk), layer, dtype=np.int64)])
        parent = np.concatenate([parent, fsrc[first]])
        pmove = np.concatenate([pmove, fmv[first]])
        if 2 * layer <= bfs_depth:
            # two roots reaching the same fresh state in this layer
            tgt = new_ids[inverse.ravel()]
            process(fsrc, fmv, tgt)
        allk = np.concatenate([sorted_keys, uk])
        allid = np.concatenate([sorted_ids, new_ids])
        o = np.argsort(allk, kind="stable")
        sorted_keys, sorted_ids = allk[o], allid[o]
        frontier = new_ids
    groups: Dict[int, List[int]] = {}
    for i in range(n):
        groups.setdefault(uf.find(i), []).append(i)
    classes = [CensusClass(members[min(ix)], len(ix), congruence_class(members[min(ix)], N))
               for ix in groups.values()]
    classes.sort(key=lambda c: c.rep.flat())
    return CensusReport(g, d, N, height_bound, bfs_depth, classes, merges, members)
