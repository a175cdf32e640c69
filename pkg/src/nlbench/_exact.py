"""Exact integer / rational matrix helpers.

Matrices are plain nested lists (or tuples) of ``int`` or ``Fraction``.
Everything here is small-rank arithmetic; no attempt is made at asymptotic
efficiency.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import List, Sequence, Tuple

Matrix = List[List[int]]


def as_int_matrix(rows) -> Matrix:
    out = [[int(x) for x in row] for row in rows]
    if out and any(len(r) != len(out[0]) for r in out):
        raise ValueError("ragged matrix")
    return out


def identity(n: int) -> Matrix:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def transpose(a):
    return [list(col) for col in zip(*a)] if a else []


def matmul(a, b):
    bt = list(zip(*b))
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def matvec(a, v):
    return [sum(x * y for x, y in zip(row, v)) for row in a]


def bilinear(u, gram, v):
    return sum(u[i] * sum(gram[i][j] * v[j] for j in range(len(v))) for i in range(len(u)))


def det(a) -> Fraction:
    """Determinant by fraction Gaussian elimination."""
    n = len(a)
    m = [[Fraction(x) for x in row] for row in a]
    result = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            result = -result
        result *= m[col][col]
        for r in range(col + 1, n):
            f = m[r][col] / m[col][col]
            if f:
                for c in range(col, n):
                    m[r][c] -= f * m[col][c]
    return result


def inverse(a) -> List[List[Fraction]]:
    """Exact inverse over the rationals (Gauss-Jordan)."""
    n = len(a)
    m = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(a)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        m[col], m[piv] = m[piv], m[col]
        p = m[col][col]
        m[col] = [x / p for x in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [row[n:] for row in m]


def int_inverse(a) -> Matrix:
    """Inverse of a unimodular integer matrix, checked to be integral."""
    inv = inverse(a)
    if any(x.denominator != 1 for row in inv for x in row):
        raise ValueError("matrix is not unimodular")
    return [[int(x) for x in row] for row in inv]


def ext_gcd(a: int, b: int) -> Tuple[int, int, int]:
    """Return (g, x, y) with a*x + b*y = g = gcd(a, b) >= 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a - (a // b) * b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def content(v: Sequence[int]) -> int:
    g = 0
    for x in v:
        g = gcd(g, int(x))
    return g


def smith_normal_form(a) -> Tuple[Matrix, Matrix, Matrix]:
    """Smith normal form ``D = P @ A @ Q`` with unimodular ``P`` and ``Q``.

    Elementary row/column reduction; at each stage the pivot is the entry of
    least absolute value in the remaining block.  Diagonal entries are
    non-negative and satisfy ``D[i][i] | D[i+1][i+1]``.
    """
    m = as_int_matrix(a)
    rows = len(m)
    cols = len(m[0]) if rows else 0
    p = identity(rows)
    q = identity(cols)

    def swap_rows(i, j):
        m[i], m[j] = m[j], m[i]
        p[i], p[j] = p[j], p[i]

    def swap_cols(i, j):
        for row in m:
            row[i], row[j] = row[j], row[i]
        for row in q:
            row[i], row[j] = row[j], row[i]

    def add_row(src, dst, k):  # row_dst += k * row_src
        m[dst] = [x + k * y for x, y in zip(m[dst], m[src])]
        p[dst] = [x + k * y for x, y in zip(p[dst], p[src])]

    def add_col(src, dst, k):
        for row in m:
            row[dst] += k * row[src]
        for row in q:
            row[dst] += k * row[src]

    for t in range(min(rows, cols)):
        while True:
            block = [(abs(m[i][j]), i, j) for i in range(t, rows) for j in range(t, cols) if m[i][j]]
            if not block:
                break
            _, i, j = min(block)
            swap_rows(t, i)
            swap_cols(t, j)
            piv = m[t][t]
            done = True
            for i in range(t + 1, rows):
                if m[i][t]:
                    add_row(t, i, -(m[i][t] // piv))
                    if m[i][t]:
                        done = False
            for j in range(t + 1, cols):
                if m[t][j]:
                    add_col(t, j, -(m[t][j] // piv))
                    if m[t][j]:
                        done = False
            if not done:
                continue
            # pivot must divide the rest of the block
            bad = next(((i, j) for i in range(t + 1, rows) for j in range(t + 1, cols)
                        if m[i][j] % piv), None)
            if bad is None:
                break
            add_row(bad[0], t, 1)
        if m[t][t] < 0:
            m[t] = [-x for x in m[t]]
            p[t] = [-x for x in p[t]]
    return m, p, q


def invariant_factors(a) -> List[int]:
    d, _, _ = smith_normal_form(a)
    return [d[i][i] for i in range(min(len(d), len(d[0]) if d else 0))]


def hermite_rows(vectors: Sequence[Sequence[int]]) -> Matrix:
    """Row-echelon integer basis of the Z-span of ``vectors`` (nonzero rows only)."""
    m = [list(map(int, v)) for v in vectors]
    if not m:
        return []
    n = len(m[0])
    basis = []
    col = 0
    while m and col < n:
        nz = [r for r in m if r[col]]
        if not nz:
            col += 1
            continue
        while len(nz) > 1:
            nz.sort(key=lambda r: abs(r[col]))
            piv = nz[0]
            nxt = []
            for r in nz[1:]:
                k = r[col] // piv[col]
                r2 = [x - k * y for x, y in zip(r, piv)]
                if r2[col]:
                    nxt.append(r2)
                else:
                    m.append(r2)
            m = [r for r in m if r[col] == 0] + [piv] + nxt
            nz = [piv] + nxt
        piv = nz[0]
        if piv[col] < 0:
            piv = [-x for x in piv]
        basis.append(piv)
        m = [r for r in m if r[col] == 0 and any(r)]
        col += 1
    return basis
