"""Schwartz functions on Q_p^n as finite combinations of coset boxes.

Additive Haar measure gives ``Z_p`` volume 1, so a box of depths
``(k_1, .., k_n)`` has volume ``p^-(k_1 + .. + k_n)``; this measure is
self-dual for ``psi_p``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Sequence, Tuple

from .scalars import CyclotomicScalar, Number, psi, reduce_mod, valuation


@dataclass(frozen=True)
class PadicBox:
    """Product of cosets ``c_i + p^(k_i) Z_p`` with canonical centers."""

    p: int
    centers: Tuple[Fraction, ...]
    depths: Tuple[int, ...]

    def __post_init__(self):
        if len(self.centers) != len(self.depths):
            raise ValueError("centers and depths differ in length")
        depths = tuple(int(k) for k in self.depths)
        centers = tuple(reduce_mod(c, self.p, k) for c, k in zip(self.centers, depths))
        object.__setattr__(self, "depths", depths)
        object.__setattr__(self, "centers", centers)

    @classmethod
    def lattice(cls, p: int, depths: Sequence[int]) -> "PadicBox":
        return cls(p, tuple(Fraction(0) for _ in depths), tuple(depths))

    @property
    def dim(self) -> int:
        return len(self.depths)

    def volume(self) -> Fraction:
        return Fraction(self.p) ** (-sum(self.depths))

    def contains(self, x: Sequence[Number]) -> bool:
        if len(x) != self.dim:
            raise ValueError("point has wrong dimension")
        return all(valuation(Fraction(xi) - c, self.p) >= k
                   for xi, c, k in zip(x, self.centers, self.depths))

    def refine(self, depths: Sequence[int]) -> List["PadicBox"]:
        """Split into sub-boxes of the given (deeper or equal) depths."""
        ranges = []
        for c, k, k2 in zip(self.centers, self.depths, depths):
            if k2 < k:
                raise ValueError("refinement depth is shallower than the box")
            ranges.append([c + j * Fraction(self.p) ** k for j in range(self.p ** (k2 - k))])
        return [PadicBox(self.p, tuple(cs), tuple(depths)) for cs in itertools.product(*ranges)]

    def intersect(self, other: "PadicBox"):
        centers, depths = [], []
        for c1, k1, c2, k2 in zip(self.centers, self.depths, other.centers, other.depths):
            if k1 < k2:
                c1, k1, c2, k2 = c2, k2, c1, k1
            if valuation(c1 - c2, self.p) < k2:
                return None
            centers.append(c1)
            depths.append(k1)
        return PadicBox(self.p, tuple(centers), tuple(depths))


class SchwartzFunction:
    """``sum_j s_j 1_{B_j}`` with cyclotomic coefficients ``s_j``."""

    def __init__(self, p: int, dim: int, terms: Iterable[Tuple[CyclotomicScalar, PadicBox]] = ()):
        self.p = p
        self.dim = dim
        clean = []
        for s, box in terms:
            if not isinstance(s, CyclotomicScalar):
                s = CyclotomicScalar.rational(p, s)
            if box.p != p or box.dim != dim:
                raise ValueError("box does not match the function's prime or dimension")
            if not s.is_zero():
                clean.append((s, box))
        self.terms: Tuple[Tuple[CyclotomicScalar, PadicBox], ...] = tuple(clean)

    @classmethod
    def indicator(cls, box: PadicBox) -> "SchwartzFunction":
        return cls(box.p, box.dim, [(CyclotomicScalar.rational(box.p, 1), box)])

    @classmethod
    def zero(cls, p: int, dim: int) -> "SchwartzFunction":
        return cls(p, dim)

    def __call__(self, x: Sequence[Number]) -> CyclotomicScalar:
        total = CyclotomicScalar(self.p)
        for s, box in self.terms:
            if box.contains(x):
                total = total + s
        return total

    def integral(self) -> CyclotomicScalar:
        total = CyclotomicScalar(self.p)
        for s, box in self.terms:
            total = total + s * box.volume()
        return total

    def __add__(self, other: "SchwartzFunction") -> "SchwartzFunction":
        self._check(other)
        return SchwartzFunction(self.p, self.dim, self.terms + other.terms)

    def __neg__(self):
        return SchwartzFunction(self.p, self.dim, [(-s, b) for s, b in self.terms])

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "SchwartzFunction":
        return SchwartzFunction(self.p, self.dim, [(s * c, b) for s, b in self.terms])

    def __rmul__(self, c):
        return self.scale(c)

    def _check(self, other):
        if self.p != other.p or self.dim != other.dim:
            raise ValueError("functions live on different spaces")

    def max_depths(self) -> Tuple[int, ...]:
        if not self.terms:
            return tuple(0 for _ in range(self.dim))
        return tuple(max(b.depths[i] for _, b in self.terms) for i in range(self.dim))

    def normalized(self, depths: Sequence[int] = None) -> Dict[PadicBox, CyclotomicScalar]:
        """Disjoint form: refine every box to common depths and merge."""
        depths = tuple(depths) if depths is not None else self.max_depths()
        out: Dict[PadicBox, CyclotomicScalar] = {}
        for s, box in self.terms:
            for sub in box.refine(depths):
                out[sub] = out[sub] + s if sub in out else s
        return {b: s for b, s in sorted(out.items(), key=lambda kv: (kv[0].centers, kv[0].depths))
                if not s.is_zero()}

    def equals(self, other: "SchwartzFunction") -> bool:
        self._check(other)
        depths = tuple(max(a, b) for a, b in zip(self.max_depths(), other.max_depths()))
        return not (self - other).normalized(depths)

    def __eq__(self, other):
        if not isinstance(other, SchwartzFunction):
            return NotImplemented
        return self.p == other.p and self.dim == other.dim and self.equals(other)

    __hash__ = None

    def reflect(self) -> "SchwartzFunction":
        """``x -> phi(-x)``."""
        return SchwartzFunction(self.p, self.dim, [
            (s, PadicBox(self.p, tuple(-c for c in b.centers), b.depths)) for s, b in self.terms])

    def __repr__(self):
        return f"SchwartzFunction(p={self.p}, dim={self.dim}, terms={len(self.terms)})"


class MalformedPolarization(ValueError):
    pass


@dataclass(frozen=True)
class Polarization:
    """Which input coordinates are Fourier transformed, and where everything lands.

    ``pairs`` holds ``(src, dst, sign)``: the source coordinate ``z`` is
    integrated against ``psi(sign * z * y)`` with ``y`` the output coordinate
    ``dst``.  ``passthrough`` holds ``(src, dst)`` for untouched coordinates.
    """

    dim_in: int
    dim_out: int
    pairs: Tuple[Tuple[int, int, int], ...]
    passthrough: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self):
        srcs = [a for a, _, _ in self.pairs] + [a for a, _ in self.passthrough]
        dsts = [b for _, b, _ in self.pairs] + [b for _, b in self.passthrough]
        if sorted(srcs) != list(range(self.dim_in)):
            raise MalformedPolarization("every input coordinate must be used exactly once")
        if sorted(dsts) != list(range(self.dim_out)):
            raise MalformedPolarization("every output coordinate must be hit exactly once")
        if any(s not in (1, -1) for _, _, s in self.pairs):
            raise MalformedPolarization("pairing signs must be +1 or -1")

    @classmethod
    def full(cls, dim: int, sign: int = 1) -> "Polarization":
        return cls(dim, dim, tuple((i, i, sign) for i in range(dim)))

    def inverse(self) -> "Polarization":
        """The transform that undoes this one up to reflection in the paired coordinates."""
        return Polarization(self.dim_out, self.dim_in,
                            tuple((b, a, s) for a, b, s in self.pairs),
                            tuple((b, a) for a, b in self.passthrough))


def _transform_1d(p: int, a: Fraction, k: int, sign: int):
    """Fourier transform of ``1_{a + p^k Z_p}``: ``p^-k psi(sign a y) 1_{p^-k Z_p}(y)``.

    Returned as ``[(scalar, center, depth)]`` with ``psi`` constant on each piece.
    """
    depth = -k if a == 0 else max(-k, -int(valuation(a, p)))
    vol = Fraction(p) ** (-k)
    out = []
    base = Fraction(p) ** (-k)
    for j in range(p ** (depth + k)):
        y0 = j * base
        out.append((psi(sign * a * y0, p) * vol, y0, depth))
    return out


def fourier_transform(phi: SchwartzFunction, pol: Polarization) -> SchwartzFunction:
    if pol.dim_in != phi.dim:
        raise MalformedPolarization("polarization does not match the function's dimension")
    p = phi.p
    terms = []
    for s, box in phi.terms:
        factors: List[List[Tuple[CyclotomicScalar, int, Fraction, int]]] = []
        for src, dst, sign in pol.pairs:
            factors.append([(sc, dst, c, k) for sc, c, k in
                            _transform_1d(p, box.centers[src], box.depths[src], sign)])
        for src, dst in pol.passthrough:
            factors.append([(CyclotomicScalar.rational(p, 1), dst, box.centers[src], box.depths[src])])
        for combo in itertools.product(*factors):
            coef = s
            centers = [Fraction(0)] * pol.dim_out
            depths = [0] * pol.dim_out
            for sc, dst, c, k in combo:
                coef = coef * sc
                centers[dst] = c
                depths[dst] = k
            terms.append((coef, PadicBox(p, tuple(centers), tuple(depths))))
    return SchwartzFunction(p, pol.dim_out, terms)


def pullback_monomial(phi: SchwartzFunction, perm: Sequence[int], diag: Sequence[Number]) -> SchwartzFunction:
    """``x -> phi(g^-1 x)`` for ``(g x)_i = diag[i] * x[perm[i]]``.

    The support of each box ``B`` becomes ``g B``, again a box.
    """
    p = phi.p
    if sorted(perm) != list(range(phi.dim)) or len(diag) != phi.dim:
        raise ValueError("g must be a monomial matrix of the right size")
    if any(Fraction(d) == 0 for d in diag):
        raise ValueError("g is not invertible")
    terms = []
    for s, box in phi.terms:
        centers = tuple(Fraction(diag[i]) * box.centers[perm[i]] for i in range(phi.dim))
        depths = tuple(box.depths[perm[i]] + int(valuation(diag[i], p)) for i in range(phi.dim))
        terms.append((s, PadicBox(p, centers, depths)))
    return SchwartzFunction(p, phi.dim, terms)


def weil_scaling(phi: SchwartzFunction, nu: Number, m: int, n: int,
                 perm: Sequence[int] = None, diag: Sequence[Number] = None) -> SchwartzFunction:
    """``phi -> |nu|^(-mn/2) phi o g^-1`` with ``dim V = 2m`` and ``dim W = 2n``.

    ``g`` is monomial (``perm``, ``diag``); the identity when omitted.
    """
    p = phi.p
    perm = list(range(phi.dim)) if perm is None else list(perm)
    diag = [1] * phi.dim if diag is None else list(diag)
    v = valuation(nu, p)
    if v == math.inf:
        raise ValueError("similitude factor must be nonzero")
    power = Fraction(int(v) * m * n, 2)       # |nu|^(-mn/2) = p^(v mn / 2)
    if power.denominator != 1:
        raise ValueError("normalizing factor is irrational for this similitude")
    return pullback_monomial(phi, perm, diag).scale(Fraction(p) ** int(power))
