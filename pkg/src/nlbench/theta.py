"""Lattice-point enumeration and theta series of positive definite lattices.

Enumeration is Fincke-Pohst with level-wise numpy expansion: writing
``Q(x) = sum_i q_i (x_i + sum_{j>i} mu_ij x_j)^2`` (Cholesky, float), the
coordinates are fixed from last to first and every candidate interval is
widened slightly; survivors are then rechecked in exact integer arithmetic.

Tail bounds.  In any shell ``Q(x) <= R`` the coordinate ``x_i`` lies in an
interval of length ``2 sqrt(R / q_i)`` once the later coordinates are fixed,
so ``#{Q <= R} <= prod_i (1 + 2 sqrt(R / q_i))``.  With ``q_i`` shrunk by the
safety factor 0.9 this gives

    sum_{Q(x) > T} exp(-pi v Q(x)) <= sum_{k >= 0} N(T + k + 1) exp(-pi v (T + k)).
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import lcm
from typing import Dict, List, Sequence, Tuple

import numpy as np

from . import _exact
from .lattice import GramLattice, in_dual, lattice_level

SAFETY = 0.9
TAIL_TARGET = 1e-13
MAX_VECTORS = 5_000_000


class NotPositiveDefinite(ValueError):
    pass


class EnumerationBudgetExceeded(RuntimeError):
    pass


# ----------------------------------------------------------------------
# core enumerator


@dataclass(frozen=True)
class _Form:
    """``Q(x) = x^T A x / s`` on ``c + Z^r`` with integer ``A`` and ``s > 0``."""

    A: Tuple[Tuple[int, ...], ...]
    s: int

    @property
    def rank(self) -> int:
        return len(self.A)

    @cached_property
    def _pivots(self):
        a = np.array(self.A, dtype=float) / self.s
        try:
            R = np.linalg.cholesky(a).T
        except np.linalg.LinAlgError as exc:
            raise NotPositiveDefinite("Gram matrix is not positive definite") from exc
        q = np.diag(R) ** 2
        mu = R / np.diag(R)[:, None]
        return q, mu

    def cholesky(self):
        return self._pivots

    def count_bound(self, radius: float) -> float:
        q, _ = self._pivots
        return float(np.prod(1 + 2 * np.sqrt(max(radius, 0.0) / (SAFETY * q))))


def _check_positive(A) -> None:
    n = len(A)
    for k in range(1, n + 1):
        if _exact.det([row[:k] for row in A[:k]]) <= 0:
            raise NotPositiveDefinite("Gram matrix is not positive definite")


def _coset_vector(coset, rank) -> Tuple[Fraction, ...]:
    if coset is None:
        return tuple(Fraction(0) for _ in range(rank))
    c = tuple(Fraction(x) for x in coset)
    if len(c) != rank:
        raise ValueError(f"coset has length {len(c)}, lattice rank is {rank}")
    return c


def _enumerate(form: _Form, coset: Sequence[Fraction], bound: Fraction,
               max_vectors: int = MAX_VECTORS) -> Tuple[np.ndarray, np.ndarray, int]:
    """All ``x`` in ``coset + Z^r`` with ``Q(x) <= bound``.

    Returns ``(X, num, D)`` where ``X = D x`` (int64 rows) and the exact value
    is ``Q(x) = num / (D^2 s)``.
    """
    r = form.rank
    D = 1
    for c in coset:
        D = lcm(D, c.denominator)
    q, mu = form.cholesky()
    cf = np.array([float(c) for c in coset])
    bnd = float(bound) * (1 + 1e-9) + 1e-9
    xs = np.zeros((1, r))
    ps = np.zeros(1)
    for i in range(r - 1, -1, -1):
        center = -(xs[:, i + 1:] @ mu[i, i + 1:]) if i + 1 < r else np.zeros(len(xs))
        width = np.sqrt(np.maximum(bnd - ps, 0.0) / q[i])
        lo = np.ceil(center - width - cf[i]).astype(np.int64)
        hi = np.floor(center + width - cf[i]).astype(np.int64)
        counts = np.maximum(hi - lo + 1, 0)
        total = int(counts.sum())
        if total > max_vectors * 4:
            raise EnumerationBudgetExceeded(f"{total} partial vectors exceed budget")
        rows = np.repeat(np.arange(len(xs)), counts)
        starts = np.repeat(np.cumsum(counts) - counts, counts)
        n = np.repeat(lo, counts) + (np.arange(total) - starts)
        xs = xs[rows]
        xs[:, i] = n + cf[i]
        ps = ps[rows] + q[i] * (xs[:, i] - center[rows]) ** 2
    if len(xs) > max_vectors:
        raise EnumerationBudgetExceeded(f"{len(xs)} vectors exceed budget {max_vectors}")
    # exact recheck
    X = np.rint(xs * D).astype(np.int64)
    A = np.array(form.A, dtype=np.int64)
    num = np.einsum("ij,jk,ik->i", X, A, X)
    limit = bound * D * D * form.s
    keep = num * limit.denominator <= limit.numerator
    return X[keep], num[keep], D


def _tail_bound(form: _Form, T: float, v: float) -> float:
    total = 0.0
    k = 0
    while True:
        term = form.count_bound(T + k + 1) * math.exp(-math.pi * v * (T + k))
        total += term
        if term < 1e-300 or (k > 5 and term < 1e-12 * total):
            return total
        k += 1
        if k > 100000:
            return math.inf


def _truncation_radius(form: _Form, v: float, target: float) -> float:
    T = 1.0
    while _tail_bound(form, T, v) >= target:
        T *= 1.25
        if T > 1e6:
            raise EnumerationBudgetExceeded("tail bound not achievable")
    return T


# ----------------------------------------------------------------------
# public API


@dataclass(frozen=True)
class ShortVectorList:
    coset: Tuple[Fraction, ...]
    maxnorm: Fraction
    by_norm: Dict[Fraction, List[Tuple[Fraction, ...]]]

    def __len__(self) -> int:
        return sum(len(v) for v in self.by_norm.values())

    def count(self, norm) -> int:
        return len(self.by_norm.get(Fraction(norm), []))

    def vectors(self) -> List[Tuple[Fraction, ...]]:
        return [v for n in sorted(self.by_norm) for v in self.by_norm[n]]


def _form_of(lat: GramLattice) -> _Form:
    _check_positive(lat.gram)
    return _Form(lat.gram, 1)


def short_vectors(lat: GramLattice, coset=None, maxnorm=2,
                  max_vectors: int = MAX_VECTORS) -> ShortVectorList:
    """Every ``x`` in ``coset + L`` with ``(x, x) <= maxnorm``, grouped by norm."""
    form = _form_of(lat)
    c = _coset_vector(coset, lat.rank)
    bound = Fraction(maxnorm)
    X, num, D = _enumerate(form, c, bound, max_vectors)
    by_norm: Dict[Fraction, List[Tuple[Fraction, ...]]] = {}
    order = np.lexsort(X.T[::-1])
    for idx in order:
        key = Fraction(int(num[idx]), D * D)
        by_norm.setdefault(key, []).append(tuple(Fraction(int(x), D) for x in X[idx]))
    return ShortVectorList(c, bound, dict(sorted(by_norm.items())))


@dataclass
class QSeries:
    """``sum_n coeffs[n] q^(n / denom)`` truncated below exponent ``prec``."""

    denom: int
    coeffs: Dict[int, int]
    prec: Fraction = field(default=Fraction(0))

    def __post_init__(self):
        if self.denom < 1:
            raise ValueError("denom must be positive")
        self.prec = Fraction(self.prec)
        self.coeffs = {int(k): int(v) for k, v in sorted(self.coeffs.items()) if v}
        bad = [k for k in self.coeffs if Fraction(k, self.denom) >= self.prec]
        if bad:
            raise ValueError("stored exponent not below prec")

    def coefficient(self, exponent) -> int:
        e = Fraction(exponent) * self.denom
        if e.denominator != 1:
            return 0
        return self.coeffs.get(int(e), 0)

    def items(self) -> List[Tuple[Fraction, int]]:
        return [(Fraction(n, self.denom), c) for n, c in sorted(self.coeffs.items())]

    def leading(self, k: int) -> List[int]:
        """Coefficients of ``q^0, q^(1/denom), ..`` up to ``k`` terms (zeros kept)."""
        return [self.coeffs.get(n, 0) for n in range(k)]

    def with_denom(self, denom: int) -> "QSeries":
        if denom % self.denom:
            raise ValueError("new denominator must be a multiple")
        f = denom // self.denom
        return QSeries(denom, {n * f: c for n, c in self.coeffs.items()}, self.prec)

    def scale_exponents(self, factor) -> "QSeries":
        factor = Fraction(factor)
        items = [(e * factor, c) for e, c in self.items()]
        den = 1
        for e, _ in items:
            den = lcm(den, e.denominator)
        den = lcm(den, (Fraction(1, self.denom) * factor).denominator)
        return QSeries(den, {int(e * den): c for e, c in items}, self.prec * factor)

    def __add__(self, other: "QSeries") -> "QSeries":
        den = lcm(self.denom, other.denom)
        a, b = self.with_denom(den), other.with_denom(den)
        prec = min(self.prec, other.prec)
        out: Dict[int, int] = {}
        for series in (a, b):
            for n, c in series.coeffs.items():
                if Fraction(n, den) < prec:
                    out[n] = out.get(n, 0) + c
        return QSeries(den, out, prec)

    def evaluate(self, tau: complex) -> complex:
        return sum(c * np.exp(2j * np.pi * tau * float(e)) for e, c in self.items())

    def to_dict(self) -> dict:
        return {"denom": self.denom, "prec": str(self.prec),
                "coeffs": {str(n): c for n, c in self.coeffs.items()}}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, doc: dict) -> "QSeries":
        return cls(int(doc["denom"]), {int(k): int(v) for k, v in doc["coeffs"].items()},
                   Fraction(doc["prec"]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["exponent", "coefficient"])
        for e, c in self.items():
            w.writerow([str(e), c])
        return buf.getvalue()


def theta_coset(lat: GramLattice, coset=None, prec=3,
                max_vectors: int = MAX_VECTORS) -> QSeries:
    """``sum_{x in coset + L} q^((x, x) / 2)`` for exponents below ``prec``.

    Exponents are stored as numerators over the lattice level.
    """
    form = _form_of(lat)
    c = _coset_vector(coset, lat.rank)
    if not in_dual(lat, c):
        raise ValueError("coset must lie in the dual lattice")
    prec = Fraction(prec)
    if prec <= 0:
        raise ValueError("prec must be positive")
    level = lattice_level(lat)
    X, num, D = _enumerate(form, c, 2 * prec, max_vectors)
    coeffs: Dict[int, int] = {}
    for value, count in zip(*np.unique(num, return_counts=True)):
        e = Fraction(int(value), 2 * D * D)
        if e >= prec:
            continue
        n = e * level
        if n.denominator != 1:
            raise AssertionError("exponent outside (1/level)Z")
        coeffs[int(n)] = coeffs.get(int(n), 0) + int(count)
    return QSeries(level, coeffs, prec)


def theta_dual(lat: GramLattice, prec=3, max_vectors: int = MAX_VECTORS) -> QSeries:
    """Theta series of ``L^dual`` computed on the integral rescaling ``det(G) G^-1``."""
    det = lat.det
    if det <= 0:
        raise NotPositiveDefinite("Gram matrix is not positive definite")
    adj = [[int(x * det) for x in row] for row in lat.dual_gram()]
    scaled = GramLattice(adj)
    series = theta_coset(scaled, None, Fraction(prec) * det, max_vectors)
    return series.scale_exponents(Fraction(1, det))


def theta_numeric(lat: GramLattice, coset, tau: complex,
                  tail_target: float = TAIL_TARGET, max_vectors: int = MAX_VECTORS) -> complex:
    """``sum_{x in coset + L} exp(pi i tau (x, x))`` with certified truncation."""
    tau = complex(tau)
    if tau.imag <= 0:
        raise ValueError("tau must lie in the upper half plane")
    form = _form_of(lat)
    c = _coset_vector(coset, lat.rank)
    value, _ = _gaussian_sum(form, c, tau, tail_target, max_vectors)
    return value


def _gaussian_sum(form: _Form, coset, tau: complex, tail_target: float, max_vectors: int):
    T = _truncation_radius(form, tau.imag, tail_target)
    X, num, D = _enumerate(form, coset, Fraction(T).limit_denominator(1000) + 1, max_vectors)
    norms = num.astype(float) / (D * D * form.s)
    return complex(np.exp(1j * np.pi * tau * norms).sum()), _tail_bound(form, T, tau.imag)


def poisson_check(lat: GramLattice, t: float, tail_target: float = TAIL_TARGET) -> float:
    """``|sum_L e^(-pi t Q) - det^(-1/2) t^(-r/2) sum_{L^dual} e^(-pi Q^dual / t)|``."""
    if t <= 0:
        raise ValueError("t must be positive")
    form = _form_of(lat)
    det = lat.det
    adj = tuple(tuple(int(x * det) for x in row) for row in lat.dual_gram())
    dual = _Form(adj, det)
    zero = _coset_vector(None, lat.rank)
    lhs, _ = _gaussian_sum(form, zero, 1j * t, tail_target, MAX_VECTORS)
    rhs, _ = _gaussian_sum(dual, zero, 1j / t, tail_target, MAX_VECTORS)
    rhs *= det ** -0.5 * t ** (-lat.rank / 2)
    return abs(lhs.real - rhs.real)


def box_scan(lat: GramLattice, coset, maxnorm, radius: int) -> Dict[Fraction, int]:
    """Naive oracle: scan ``coset + [-radius, radius]^r`` and count norms <= maxnorm."""
    import itertools

    c = _coset_vector(coset, lat.rank)
    out: Dict[Fraction, int] = {}
    for n in itertools.product(range(-radius, radius + 1), repeat=lat.rank):
        x = [ci + ni for ci, ni in zip(c, n)]
        v = lat.norm(x)
        if v <= maxnorm:
            out[v] = out.get(v, 0) + 1
    return dict(sorted(out.items()))


def box_radius(lat: GramLattice, coset, maxnorm) -> int:
    """Coordinate bound ``|x_i| <= sqrt(maxnorm (G^-1)_ii)`` for the box oracle."""
    inv = lat.dual_gram()
    c = _coset_vector(coset, lat.rank)
    r = max(math.sqrt(float(maxnorm) * float(inv[i][i])) for i in range(lat.rank))
    return int(math.floor(r + max(abs(float(x)) for x in c))) + 1
