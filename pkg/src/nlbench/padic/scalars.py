"""Exact scalars in Q(mu_{p^infinity}) and p-adic helpers for rationals."""
from __future__ import annotations

import cmath
import math
from fractions import Fraction
from typing import Dict, Iterable, Tuple, Union

Number = Union[int, Fraction]


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def valuation(x: Number, p: int) -> Union[int, float]:
    """``ord_p(x)``; ``math.inf`` for zero."""
    x = Fraction(x)
    if x == 0:
        return math.inf
    v = 0
    num, den = x.numerator, x.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def abs_p(x: Number, p: int) -> Fraction:
    v = valuation(x, p)
    return Fraction(0) if v == math.inf else Fraction(p) ** (-v)


def ord_p_int(n: int, p: int) -> int:
    v = valuation(n, p)
    if v == math.inf:
        raise ValueError("ord_p of zero")
    return int(v)


def reduce_mod(x: Number, p: int, k: int) -> Fraction:
    """Canonical representative of ``x + p^k Z_p``.

    The result is ``t / p^m`` with ``0 <= t < p^(k+m)``, i.e. it has a
    p-power denominator and lies in ``[0, p^k)``.
    """
    x = Fraction(x)
    v = valuation(x, p)
    if v >= k:
        return Fraction(0)
    m = max(0, -int(v))
    y = x * p ** m                       # p-integral
    num, den = y.numerator, y.denominator
    mod = p ** (k + m)
    t = num * pow(den, -1, mod) % mod
    return Fraction(t, p ** m)


def frac_p(x: Number, p: int) -> Fraction:
    """p-adic fractional part ``{x}_p`` in ``[0, 1)``."""
    return reduce_mod(x, p, 0)


def _level(r: Fraction, p: int) -> int:
    d = r.denominator
    k = 0
    while d % p == 0:
        d //= p
        k += 1
    if d != 1:
        raise ValueError(f"{r} does not have a {p}-power denominator")
    return k


class CyclotomicScalar:
    """``sum_r c_r e^(2 pi i r)`` over ``r`` in ``Q/Z`` with p-power denominators.

    Stored in normal form: the coordinates in the power basis of the smallest
    ``Q(zeta_{p^K})`` containing the value, so equality is dictionary equality.
    """

    __slots__ = ("p", "_terms")

    def __init__(self, p: int, terms: Dict[Fraction, Number] = None):
        self.p = p
        raw: Dict[Fraction, Fraction] = {}
        for r, c in (terms or {}).items():
            r = Fraction(r) % 1
            raw[r] = raw.get(r, Fraction(0)) + Fraction(c)
        self._terms = _normalize(raw, p)

    @classmethod
    def rational(cls, p: int, c: Number) -> "CyclotomicScalar":
        return cls(p, {Fraction(0): c})

    @property
    def terms(self) -> Dict[Fraction, Fraction]:
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_rational(self) -> bool:
        return all(r == 0 for r in self._terms)

    def to_rational(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("scalar is not rational")
        return self._terms.get(Fraction(0), Fraction(0))

    def __complex__(self) -> complex:
        return sum((float(c) * cmath.exp(2j * math.pi * float(r)) for r, c in self._terms.items()), 0j)

    def _coerce(self, other) -> "CyclotomicScalar":
        if isinstance(other, CyclotomicScalar):
            if other.p != self.p:
                raise ValueError("scalars for different primes")
            return other
        if isinstance(other, (int, Fraction)):
            return CyclotomicScalar.rational(self.p, other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        t = dict(self._terms)
        for r, c in o._terms.items():
            t[r] = t.get(r, Fraction(0)) + c
        return CyclotomicScalar(self.p, t)

    __radd__ = __add__

    def __neg__(self):
        return CyclotomicScalar(self.p, {r: -c for r, c in self._terms.items()})

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        t: Dict[Fraction, Fraction] = {}
        for r1, c1 in self._terms.items():
            for r2, c2 in o._terms.items():
                r = (r1 + r2) % 1
                t[r] = t.get(r, Fraction(0)) + c1 * c2
        return CyclotomicScalar(self.p, t)

    __rmul__ = __mul__

    def __eq__(self, other):
        o = self._coerce(other) if isinstance(other, (CyclotomicScalar, int, Fraction)) else NotImplemented
        if o is NotImplemented:
            return NotImplemented
        return self.p == o.p and self._terms == o._terms

    def __hash__(self):
        return hash((self.p, tuple(sorted(self._terms.items()))))

    def __repr__(self):
        if not self._terms:
            return "0"
        parts = []
        for r, c in sorted(self._terms.items()):
            parts.append(str(c) if r == 0 else f"{c}*psi({r})")
        return " + ".join(parts)


def _normalize(raw: Dict[Fraction, Fraction], p: int) -> Dict[Fraction, Fraction]:
    raw = {r: c for r, c in raw.items() if c}
    if not raw:
        return {}
    K = max(_level(r, p) for r in raw)
    while K > 0:
        M = p ** K
        phi = (p - 1) * p ** (K - 1)
        step = p ** (K - 1)
        coeffs: Dict[int, Fraction] = {}
        for r, c in raw.items():
            j = int(r * M)
            coeffs[j] = coeffs.get(j, Fraction(0)) + c
        # zeta^j = -sum_{i=0}^{p-2} zeta^(j - phi + i step) for j >= phi
        high = sorted(j for j in coeffs if j >= phi)
        while high:
            j = high.pop()
            c = coeffs.pop(j)
            if not c:
                continue
            for i in range(p - 1):
                jj = j - phi + i * step
                coeffs[jj] = coeffs.get(jj, Fraction(0)) - c
                if jj >= phi and jj not in high:
                    high.append(jj)
                    high.sort()
        coeffs = {j: c for j, c in coeffs.items() if c}
        raw = {Fraction(j, M): c for j, c in coeffs.items()}
        if all(j % p == 0 for j in coeffs):
            K -= 1
            continue
        break
    return dict(sorted(raw.items()))


def psi(x: Number, p: int) -> CyclotomicScalar:
    """The standard character of ``Q_p``: ``psi_p(x) = e^(-2 pi i {x}_p)``.

    The sign makes the product of all local characters with the real one
    ``e^(2 pi i x)`` trivial on ``Q``.
    """
    return CyclotomicScalar(p, {(-frac_p(x, p)) % 1: 1})
