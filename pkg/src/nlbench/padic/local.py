"""Local computations at a prime p dividing the level.

Conventions: ``V = M_2`` with coordinates ``(x, y, z, w)`` for
``[[x, y], [z, w]]``; the Fourier transform in the ``(x, y)`` block pairs
``x`` with ``w_1`` and ``y`` with ``z_1`` through ``psi(x w_1 - y z_1)``, and the
output coordinates are ``(z_1, w_1, z_2, w_2)``.  Normalized induction at
``s``: ``f(b g) = |a / d|^(s + 1/2) f(g)`` for ``b = [[a, *], [0, d]]``.
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import sympy

from .scalars import CyclotomicScalar, Number, abs_p, is_prime, ord_p_int, valuation
from .schwartz import PadicBox, Polarization, SchwartzFunction, fourier_transform

Mat2 = Tuple[Tuple[Fraction, Fraction], Tuple[Fraction, Fraction]]

M2_FOURIER = Polarization(4, 4, ((0, 1, 1), (1, 0, -1)), ((2, 2), (3, 3)))


def mat2(m) -> Mat2:
    (a, b), (c, d) = m
    return ((Fraction(a), Fraction(b)), (Fraction(c), Fraction(d)))


def det2(m: Mat2) -> Fraction:
    return m[0][0] * m[1][1] - m[0][1] * m[1][0]


def mul2(m: Mat2, n: Mat2) -> Mat2:
    return tuple(tuple(sum(m[i][k] * n[k][j] for k in range(2)) for j in range(2)) for i in range(2))


def inv2(m: Mat2) -> Mat2:
    d = det2(m)
    if d == 0:
        raise ValueError("matrix is not invertible")
    (a, b), (c, e) = m
    return ((e / d, -b / d), (-c / d, a / d))


def lower(x: Number) -> Mat2:
    return mat2([[1, 0], [x, 1]])


def upper(x: Number) -> Mat2:
    return mat2([[1, x], [0, 1]])


W_ELEMENT = mat2([[0, 1], [-1, 0]])


def _check_level(p: int, N: int) -> int:
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if N < 1:
        raise ValueError("N must be positive")
    return ord_p_int(N, p)


def phi_np(p: int, N: int) -> SchwartzFunction:
    """Indicator of ``[[Z_p, Z_p], [N Z_p, Z_p]]`` in ``M_2(Q_p)``."""
    v = _check_level(p, N)
    return SchwartzFunction.indicator(PadicBox.lattice(p, (0, 0, v, 0)))


def phi_np_hat(p: int, N: int) -> SchwartzFunction:
    return fourier_transform(phi_np(p, N), M2_FOURIER)


# ----------------------------------------------------------------------
# Siegel-Weil section


def _line_volume(p: int, conds: Sequence[Tuple[Fraction, Fraction, int]]) -> Optional[Fraction]:
    """Volume of ``{x in Q_p : alpha x in c + p^k Z_p for each (alpha, c, k)}``.

    ``None`` signals an unbounded set.
    """
    center, depth = None, None
    for alpha, c, k in conds:
        if alpha == 0:
            if valuation(c, p) < k:       # 0 not in the coset
                return Fraction(0)
            continue
        c2, k2 = c / alpha, k - int(valuation(alpha, p))
        if center is None:
            center, depth = c2, k2
            continue
        if k2 > depth:
            center, depth, c2, k2 = c2, k2, center, depth
        if valuation(center - c2, p) < k2:
            return Fraction(0)
    if center is None:
        return None
    return Fraction(p) ** (-depth)


def siegel_weil_section(phi: SchwartzFunction, g) -> CyclotomicScalar:
    """``|det g|^-1 int phi(g^-1 [[x, y], [0, 0]]) dx dy``."""
    if phi.dim != 4:
        raise ValueError("expects a function on M_2")
    p = phi.p
    g = mat2(g)
    gi = inv2(g)
    alpha, beta = gi[0][0], gi[1][0]
    total = CyclotomicScalar(p)
    for s, box in phi.terms:
        c, k = box.centers, box.depths
        vx = _line_volume(p, [(alpha, c[0], k[0]), (beta, c[2], k[2])])
        vy = _line_volume(p, [(alpha, c[1], k[1]), (beta, c[3], k[3])])
        if vx is None or vy is None:
            raise ValueError("integral diverges")
        total = total + s * (vx * vy)
    return total * (1 / abs_p(det2(g), p))


# ----------------------------------------------------------------------
# the section phi^0 and the Iwasawa decomposition


def iwasawa(g, p: int) -> Tuple[Mat2, Mat2]:
    """``g = b k`` with ``b`` upper triangular and ``k`` in ``GL_2(Z_p)``."""
    g = mat2(g)
    (a, b), (c, d) = g
    if det2(g) == 0:
        raise ValueError("matrix is not invertible")
    if d != 0 and valuation(c, p) >= valuation(d, p):
        k = lower(c / d)
    else:
        k = mat2([[0, -1], [1, d / c]])
    bmat = mul2(g, inv2(k))
    assert bmat[1][0] == 0
    return bmat, k


def in_gl2_zp(k, p: int) -> bool:
    k = mat2(k)
    return all(valuation(x, p) >= 0 for row in k for x in row) and valuation(det2(k), p) == 0


def in_k0(k, p: int, v: int) -> bool:
    k = mat2(k)
    return in_gl2_zp(k, p) and valuation(k[1][0], p) >= v


def in_k1(k, p: int, v: int) -> bool:
    k = mat2(k)
    return in_k0(k, p, v) and valuation(k[1][1] - 1, p) >= v


def in_b_k1(k, p: int, v: int) -> bool:
    """``k`` in ``B(Z_p) K_1(p^v)``: lower-left in ``p^v Z_p`` and lower-right a unit."""
    k = mat2(k)
    if not in_gl2_zp(k, p):
        raise ValueError("expects an element of GL_2(Z_p)")
    if v == 0:
        return True
    return valuation(k[1][0], p) >= v and valuation(k[1][1], p) == 0


@dataclass(frozen=True)
class InducedSectionPhi0:
    """The ``K_1(N)_p``-invariant section supported on ``B K_1(N)_p`` with value 1 at 1."""

    p: int
    N: int
    s: Fraction = Fraction(1, 2)

    @property
    def v(self) -> int:
        return _check_level(self.p, self.N)

    def __call__(self, g):
        bmat, k = iwasawa(g, self.p)
        if not in_b_k1(k, self.p, self.v):
            return Fraction(0)
        # delta_B(b) = |a / d|; k's contribution is 1
        ratio_val = valuation(bmat[0][0], self.p) - valuation(bmat[1][1], self.p)
        exponent = -ratio_val * (self.s + Fraction(1, 2))
        if Fraction(exponent).denominator != 1:
            return sympy.Integer(self.p) ** sympy.Rational(exponent.numerator, exponent.denominator)
        return Fraction(self.p) ** int(exponent)


@dataclass
class ProbeRecord:
    g: Mat2
    lhs: CyclotomicScalar
    rhs: Fraction
    kind: str

    @property
    def ok(self) -> bool:
        return self.lhs == CyclotomicScalar.rational(self.lhs.p, self.rhs)


@dataclass
class SWReport:
    p: int
    N: int
    probes: List[ProbeRecord] = field(default_factory=list)
    invariance_ok: bool = True

    @property
    def passed(self) -> bool:
        return self.invariance_ok and all(r.ok for r in self.probes)

    def lines(self) -> List[str]:
        out = []
        for r in self.probes:
            out.append(f"{r.kind} g={[[str(x) for x in row] for row in r.g]} lhs={r.lhs} "
                       f"rhs={r.rhs} {'ok' if r.ok else 'FAIL'}")
        out.append(f"K1 right-invariance: {'ok' if self.invariance_ok else 'FAIL'}")
        return out


def random_k1(p: int, v: int, rng: random.Random, size: int = 50) -> Mat2:
    mod = p ** v
    while True:
        a, b = rng.randint(-size, size), rng.randint(-size, size)
        c = mod * rng.randint(-size, size)
        d = 1 + mod * rng.randint(-size, size)
        if (a * d - b * c) % p:
            return mat2([[a, b], [c, d]])


def random_borel(p: int, rng: random.Random) -> Mat2:
    def unit():
        while True:
            u = Fraction(rng.choice([1, -1]) * rng.randint(1, 40), rng.randint(1, 40))
            if valuation(u, p) == 0:
                return u
    a = unit() * Fraction(p) ** rng.randint(-3, 3)
    d = unit() * Fraction(p) ** rng.randint(-3, 3)
    n = Fraction(rng.randint(-50, 50), p ** rng.randint(0, 3))
    return mat2([[a, n], [0, d]])


def sw_combination(p: int, N: int) -> SchwartzFunction:
    """``phi_{N,p} - p^-1 phi_{N/p,p}``."""
    if N % p:
        raise ValueError(f"{p} does not divide N = {N}")
    return phi_np(p, N) - phi_np(p, N // p).scale(Fraction(1, p))


def verify_sw_identity(p: int, N: int, seed: int = 0, n_random: int = 20) -> SWReport:
    """Compare both sides of the local Siegel-Weil identity on probes."""
    v = _check_level(p, N)
    if v == 0:
        raise ValueError(f"{p} does not divide N = {N}")
    rng = random.Random(seed)
    phi = sw_combination(p, N)
    phi0 = InducedSectionPhi0(p, N)
    factor = 1 - Fraction(1, p)
    report = SWReport(p, N)
    coset_probes = [lower(Fraction(p) ** i) for i in range(v + 3)]
    for g in coset_probes:
        report.probes.append(ProbeRecord(g, siegel_weil_section(phi, g), factor * phi0(g), "coset"))
    for _ in range(n_random):
        g = mul2(random_borel(p, rng), rng.choice(coset_probes))
        g = mul2(g, random_k1(p, v, rng))
        report.probes.append(ProbeRecord(g, siegel_weil_section(phi, g), factor * phi0(g), "translate"))
    for g in coset_probes:
        base = siegel_weil_section(phi, g)
        for _ in range(n_random):
            if siegel_weil_section(phi, mul2(g, random_k1(p, v, rng))) != base:
                report.invariance_ok = False
    return report


# ----------------------------------------------------------------------
# intertwining integral


@dataclass(frozen=True)
class IntertwiningValue:
    closed_form: Fraction
    shell_sum: Fraction
    tail: Fraction
    boundary: Fraction
    n_max: int

    @property
    def agrees(self) -> bool:
        return self.closed_form == self.boundary + self.shell_sum + self.tail


def intertwining_value(p: int, N: int, n_max: Optional[int] = None) -> IntertwiningValue:
    """``M_p(phi^0)(1) = int_{Q_p} phi^0(w n(y)) dy`` two ways.

    Closed form: ``sum_{n >= v} p^(-n-1) (p-1) = p^-v``.  Shell route: the
    ``Z_p`` part equals ``phi^0(w)`` by ``K_1`` invariance; each piece
    ``p^-n (u + p Z_p)`` (volume ``p^(n-1)``) is evaluated through the
    Iwasawa decomposition; shells beyond ``n_max`` contribute ``p^(-n_max-1)``.
    """
    v = _check_level(p, N)
    if v == 0:
        raise ValueError(f"{p} does not divide N = {N}")
    n_max = max(v, 1) + 5 if n_max is None else n_max
    if n_max < v:
        raise ValueError("n_max must reach the level")
    phi0 = InducedSectionPhi0(p, N)
    boundary = Fraction(phi0(W_ELEMENT))
    shells = Fraction(0)
    for n in range(1, n_max + 1):
        vol = Fraction(p) ** (n - 1)
        for u in range(1, p):
            y = Fraction(u, p ** n)
            shells += vol * Fraction(phi0(mul2(W_ELEMENT, upper(y))))
    tail = Fraction(1, p ** (n_max + 1))
    # geometric series sum_{n >= v} (p - 1) p^(-n-1)
    closed = Fraction(p - 1, p ** (v + 1)) / (1 - Fraction(1, p))
    return IntertwiningValue(closed, shells, tail, boundary, n_max)


# ----------------------------------------------------------------------
# Whittaker newforms and zeta factors


ALPHA = sympy.Symbol("alpha")


@dataclass(frozen=True)
class WhittakerNewform:
    p: int
    conductor: int
    alpha: object = ALPHA

    def __post_init__(self):
        if self.conductor < 1:
            raise ValueError("conductor must be at least 1")
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")


def whittaker_value(W: WhittakerNewform, t: Number):
    """``W(diag(t, 1))``: 0, 1 or ``p^(-m/2) alpha^m`` by ``m = ord_p t``."""
    t = Fraction(t)
    if t == 0:
        raise ValueError("t must be nonzero")
    m = valuation(t, W.p)
    if m < 0:
        return sympy.Integer(0)
    if m == 0:
        return sympy.Integer(1)
    return sympy.Integer(W.p) ** sympy.Rational(-m, 2) * sympy.sympify(W.alpha) ** m


@dataclass(frozen=True)
class ZetaFactor:
    p: int
    alpha1: object
    alpha2: object
    expr: object

    @property
    def numerator(self):
        return sympy.fraction(sympy.together(self.expr))[0]

    def is_nonvanishing(self) -> bool:
        num = sympy.simplify(self.numerator)
        return num.is_number and num != 0

    def verdict(self) -> str:
        return "nonzero" if self.is_nonvanishing() else "unknown"

    def evaluate(self, a1: complex, a2: complex) -> complex:
        if abs(a1 * a2) >= self.p ** 2:
            raise ValueError("outside the domain of convergence |alpha1 alpha2| < p^2")
        return complex(self.expr.subs({self.alpha1: a1, self.alpha2: a2}).evalf(30))

    def truncated(self, a1: complex, a2: complex, m_max: int = 40) -> complex:
        r = a1 * a2 / self.p ** 2
        return sum(r ** m for m in range(m_max + 1))


def zeta_factor(W1: WhittakerNewform, W2: WhittakerNewform) -> ZetaFactor:
    """``int_{Q_p^x} W1(diag(t,1)) W2(diag(t,1)) |t| d^x t`` with ``vol(Z_p^x) = 1``.

    Only ``t`` with ``ord_p t = m >= 0`` contribute, each shell with weight
    ``p^-m``; the sum is ``1 / (1 - alpha1 alpha2 p^-2)``.
    """
    if W1.p != W2.p:
        raise ValueError("newforms at different primes")
    p = W1.p
    a1 = sympy.sympify(W1.alpha)
    a2 = sympy.sympify(W2.alpha)
    if a1 == a2 and a1.is_Symbol:
        a1, a2 = sympy.Symbol("alpha1"), sympy.Symbol("alpha2")
    expr = 1 / (1 - a1 * a2 * sympy.Integer(p) ** -2)
    if (a1 * a2 - p ** 2).is_zero:
        raise ZeroDivisionError("pole: alpha1 alpha2 = p^2")
    return ZetaFactor(p, a1, a2, expr)


def zeta_partial_sum(W1: WhittakerNewform, W2: WhittakerNewform, m_max: int):
    """Symbolic truncation of the torus integral through the Whittaker table."""
    p = W1.p
    z = zeta_factor(W1, W2)
    w1 = WhittakerNewform(p, W1.conductor, z.alpha1)
    w2 = WhittakerNewform(p, W2.conductor, z.alpha2)
    total = sympy.Integer(0)
    for m in range(m_max + 1):
        t = Fraction(p) ** m
        total += whittaker_value(w1, t) * whittaker_value(w2, t) * sympy.Rational(1, p ** m)
    return sympy.expand(total)


# ----------------------------------------------------------------------
# K_1 volume


def k1_index(p: int, v: int) -> Fraction:
    """``[GL_2(Z_p) : K_1(p^v)] = p^(2v) (1 - p^-2)`` for ``v >= 1``."""
    if v == 0:
        return Fraction(1)
    return Fraction(p) ** (2 * v) * (1 - Fraction(1, p * p))


def k1_volume(p: int, v: int) -> Fraction:
    """Volume of ``K_1(p^v)`` when ``GL_2(Z_p)`` has volume 1 (a derived quantity)."""
    return 1 / k1_index(p, v)


def k1_index_bruteforce(p: int, v: int) -> Fraction:
    """``|SL_2(Z/p^v)| / |{[[1, b], [0, 1]]}|``, counted directly."""
    if v == 0:
        return Fraction(1)
    n = p ** v
    sl2 = sum(1 for a, b, c, d in itertools.product(range(n), repeat=4) if (a * d - b * c) % n == 1)
    return Fraction(sl2, n)


# ----------------------------------------------------------------------
# support of the geometric translate


X0 = (Fraction(1), Fraction(0), Fraction(0), Fraction(-1))  # (z1, w1, z2, w2)


def translate_probe_point(h) -> Tuple[Fraction, ...]:
    """Coordinates of ``h^-1 x0`` where ``h`` acts on the ``<e1, e2>`` factor."""
    hi = inv2(mat2(h))
    rows = [[X0[0], X0[1]], [X0[2], X0[3]]]
    out = [[sum(hi[i][k] * rows[k][j] for k in range(2)) for j in range(2)] for i in range(2)]
    return (out[0][0], out[0][1], out[1][0], out[1][1])


@dataclass
class SupportReport:
    p: int
    N: int
    probes: List[Tuple[Mat2, bool, bool, bool]]   # (h, in support, in K0, in K1)

    @property
    def matches_k0(self) -> bool:
        return all(s == k0 for _, s, k0, _ in self.probes)

    @property
    def matches_k1(self) -> bool:
        return all(s == k1 for _, s, _, k1 in self.probes)

    @property
    def verdict(self) -> str:
        if self.matches_k0 and not self.matches_k1:
            return "K0"
        if self.matches_k1 and not self.matches_k0:
            return "K1"
        if self.matches_k0:
            return "K0=K1 on probes"
        return "neither"

    def discrepancies(self, which: str = "K1") -> List[Mat2]:
        idx = 3 if which == "K1" else 2
        return [rec[0] for rec in self.probes if rec[1] != rec[idx]]


def weil_translate_support(p: int, N: int):
    """Predicate ``h -> [omega(h, 1) phi_hat(x0) != 0]`` on ``SL_2(Q_p)``."""
    fhat = phi_np_hat(p, N)

    def member(h) -> bool:
        h = mat2(h)
        if det2(h) != 1:
            raise ValueError("h must lie in SL_2")
        return not fhat(translate_probe_point(h)).is_zero()

    return member


def support_probes(p: int, N: int, seed: int = 0, n_random: int = 30) -> List[Mat2]:
    v = _check_level(p, N)
    rng = random.Random(seed)
    mod = p ** v
    probes = [mat2([[1, 0], [0, 1]]), upper(1), upper(Fraction(1, p))]
    probes += [lower(Fraction(p) ** j) for j in range(v + 2)]
    for u in range(2, 2 + 2 * p):
        if u % p:
            probes.append(mat2([[u, 0], [0, Fraction(1, u)]]))
            probes.append(mat2([[Fraction(1, u), 0], [0, u]]))
    probes.append(mat2([[Fraction(1, p), 0], [0, p]]))
    probes.append(mat2([[p, 0], [0, Fraction(1, p)]]))
    probes.append(W_ELEMENT)
    while len(probes) < 2 * v + 20 + n_random:
        a, b = rng.randint(-30, 30), rng.randint(-30, 30)
        if math.gcd(a, b) != 1:
            continue
        # complete (a, b) as a top row; multiply the lower-left by a power of p sometimes
        _, x, y = _ext_gcd(a, b)
        c, d = -y, x
        m = mat2([[a, b], [c, d]])
        m = mul2(m, lower(mod * rng.randint(-3, 3) if rng.random() < 0.5 else rng.randint(-3, 3)))
        probes.append(m)
    return probes


def _ext_gcd(a, b):
    if b == 0:
        return (abs(a), 1 if a >= 0 else -1, 0)
    g, x, y = _ext_gcd(b, a % b)
    return g, y, x - (a // b) * y


def support_of_weil_translate(p: int, N: int, seed: int = 0, n_random: int = 30) -> SupportReport:
    """Evaluate the translate on probes and compare with ``K_0(N)_p`` and ``K_1(N)_p``."""
    v = _check_level(p, N)
    member = weil_translate_support(p, N)
    recs = []
    for h in support_probes(p, N, seed, n_random):
        recs.append((h, member(h), in_k0(h, p, v), in_k1(h, p, v)))
    return SupportReport(p, N, recs)
