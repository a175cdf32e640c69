import cmath
import math
import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, strategies as st

from nlbench.padic import local
from nlbench.padic.scalars import (CyclotomicScalar, abs_p, frac_p, psi, reduce_mod,
                                   valuation)
from nlbench.padic.schwartz import (MalformedPolarization, PadicBox, Polarization,
                                    SchwartzFunction, fourier_transform, pullback_monomial,
                                    weil_scaling)

primes = st.sampled_from([2, 3, 5])
small_rationals = st.builds(lambda n, k, p: Fraction(n, p ** k),
                            st.integers(-200, 200), st.integers(0, 3), primes)


@st.composite
def p_and_rationals(draw, count=2):
    p = draw(primes)
    xs = [Fraction(draw(st.integers(-300, 300)), p ** draw(st.integers(0, 3)))
          * draw(st.sampled_from([1, 7, Fraction(1, 11)])) for _ in range(count)]
    return p, xs


@st.composite
def schwartz_functions(draw, dim=None, max_depth=2):
    p = draw(st.sampled_from([2, 3]))
    dim = dim or draw(st.integers(1, 2))
    terms = []
    for _ in range(draw(st.integers(1, 3))):
        depths = tuple(draw(st.integers(-1, max_depth)) for _ in range(dim))
        centers = tuple(Fraction(draw(st.integers(-8, 8)), p ** draw(st.integers(0, max_depth)))
                        for _ in range(dim))
        terms.append((Fraction(draw(st.integers(-3, 3))), PadicBox(p, centers, depths)))
    return SchwartzFunction(p, dim, terms)


# -- scalars -------------------------------------------------------------

def test_valuation_examples():
    assert valuation(Fraction(18, 5), 3) == 2
    assert valuation(Fraction(5, 18), 3) == -2
    assert valuation(0, 3) == math.inf
    assert abs_p(Fraction(1, 4), 2) == 4
    assert reduce_mod(Fraction(1, 3), 2, 2) == 3   # 3 * 3 = 1 mod 4
    assert frac_p(Fraction(7, 4), 2) == Fraction(3, 4)


@given(p_and_rationals())
def test_psi_is_additive_character(data):
    p, (x, y) = data
    assert psi(x + y, p) == psi(x, p) * psi(y, p)
    assert psi(x, p) * psi(-x, p) == CyclotomicScalar.rational(p, 1)


@given(primes, st.integers(-50, 50))
def test_psi_trivial_on_integers(p, n):
    assert psi(n, p) == CyclotomicScalar.rational(p, 1)


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_roots_of_unity_sum_to_zero(p):
    for k in (1, 2):
        total = CyclotomicScalar(p)
        for j in range(p ** k):
            total = total + psi(Fraction(j, p ** k), p)
        assert total.is_zero()


@given(p_and_rationals(count=1))
def test_psi_sign_makes_global_product_trivial(data):
    p, (x,) = data
    x = Fraction(x.numerator % 97, p ** valuation(x.denominator, p)) if x else x
    # for x with p-power denominator the real character is e^(2 pi i x)
    assert abs(complex(psi(x, p)) * cmath.exp(2j * math.pi * float(x)) - 1) < 1e-12


@given(p_and_rationals())
def test_scalar_arithmetic_matches_complex(data):
    p, (x, y) = data
    a = psi(x, p) * Fraction(3, 2) + psi(y, p)
    b = psi(y, p) - psi(x, p)
    assert abs(complex(a * b) - complex(a) * complex(b)) < 1e-9
    assert abs(complex(a + b) - complex(a) - complex(b)) < 1e-9


# -- Schwartz functions ---------------------------------------------------

def test_box_membership_and_volume():
    box = PadicBox(3, (Fraction(1, 3), Fraction(2)), (1, 0))
    assert box.volume() == Fraction(1, 3)
    assert box.contains((Fraction(1, 3) + 3, 5))
    assert not box.contains((Fraction(1, 3) + 1, 5))
    assert len(box.refine((2, 1))) == 9


def test_fourier_of_lattices():
    p = 3
    one = SchwartzFunction.indicator(PadicBox.lattice(p, (0,)))
    assert fourier_transform(one, Polarization.full(1)) == one
    deep = SchwartzFunction.indicator(PadicBox.lattice(p, (2,)))
    want = SchwartzFunction.indicator(PadicBox.lattice(p, (-2,))).scale(Fraction(1, 9))
    assert fourier_transform(deep, Polarization.full(1)) == want


@given(schwartz_functions(max_depth=1))
def test_fourier_inversion(phi):
    pol = Polarization.full(phi.dim)
    twice = fourier_transform(fourier_transform(phi, pol), pol)
    assert twice == phi.reflect()
    back = fourier_transform(fourier_transform(phi, pol), Polarization.full(phi.dim, -1))
    assert back == phi


@given(schwartz_functions())
def test_transform_at_zero_is_integral(phi):
    pol = Polarization.full(phi.dim)
    hat = fourier_transform(phi, pol)
    zero = tuple(Fraction(0) for _ in range(phi.dim))
    assert hat(zero) == phi.integral()
    assert hat.integral() == phi(zero)


@given(schwartz_functions(dim=2), st.sampled_from([(0, 1), (1, 0)]),
       st.tuples(st.sampled_from([1, 2, 3, Fraction(1, 3), Fraction(2, 9)]),
                 st.sampled_from([1, 5, Fraction(1, 2), 6])))
def test_pullback_scales_integral(phi, perm, diag):
    moved = pullback_monomial(phi, perm, diag)
    det = diag[0] * diag[1]
    assert moved.integral() == phi.integral() * abs_p(det, phi.p)
    x = (Fraction(1), Fraction(1, phi.p))
    pre = [None, None]
    for i in range(2):
        pre[perm[i]] = x[i] / Fraction(diag[i])
    assert moved(x) == phi(tuple(pre))


def test_weil_scaling_examples():
    p = 3
    phi = SchwartzFunction.indicator(PadicBox.lattice(p, (0, 0)))
    # unit similitude, identity g: unchanged
    assert weil_scaling(phi, 2, 1, 1) == phi
    # nu = p^2 with mn = 1 gives the factor |nu|^(-1/2) = p
    assert weil_scaling(phi, 9, 1, 1) == phi.scale(3)
    # g = diag(p, 1) moves the support to p Z_p x Z_p
    got = weil_scaling(phi, 1, 1, 1, diag=(3, 1))
    assert got == SchwartzFunction.indicator(PadicBox.lattice(p, (1, 0)))
    with pytest.raises(ValueError):
        weil_scaling(phi, 3, 1, 1)


def test_malformed_polarization():
    with pytest.raises(MalformedPolarization):
        Polarization(2, 2, ((0, 0, 1),))
    with pytest.raises(MalformedPolarization):
        Polarization(2, 2, ((0, 0, 2), (1, 1, 1)))
    with pytest.raises(MalformedPolarization):
        fourier_transform(SchwartzFunction.zero(2, 3), Polarization.full(2))


# -- local computations ---------------------------------------------------

GRID = [(p, p ** v) for p in (2, 3, 5, 7) for v in (1, 2, 3)]


@pytest.mark.parametrize("p,N", GRID)
def test_sw_identity(p, N):
    rep = local.verify_sw_identity(p, N, n_random=10)
    assert rep.passed
    v = local.ord_p_int(N, p)
    coset = [r for r in rep.probes if r.kind == "coset"]
    assert [r.lhs.to_rational() for r in coset] == \
        [0 if i < v else 1 - Fraction(1, p) for i in range(v + 3)]


def test_sw_needs_p_dividing_level():
    with pytest.raises(ValueError):
        local.verify_sw_identity(5, 6)
    with pytest.raises(ValueError):
        local.verify_sw_identity(4, 8)


@pytest.mark.parametrize("p,N", GRID)
def test_intertwining(p, N):
    iv = local.intertwining_value(p, N)
    assert iv.agrees and iv.closed_form == Fraction(1, N)


def test_intertwining_cli_example():
    assert local.intertwining_value(5, 5).closed_form == Fraction(1, 5)


@given(primes, st.integers(-30, 30), st.integers(-30, 30), st.integers(-30, 30),
       st.integers(-30, 30), st.integers(0, 3))
def test_iwasawa(p, a, b, c, d, k):
    g = local.mat2([[a, b], [Fraction(c, p ** k), d]])
    if local.det2(g) == 0:
        return
    bm, km = local.iwasawa(g, p)
    assert bm[1][0] == 0
    assert local.in_gl2_zp(km, p)
    assert local.mul2(bm, km) == g


@pytest.mark.parametrize("p,v", [(2, 1), (2, 2), (3, 1), (3, 2), (5, 1)])
def test_k1_index(p, v):
    assert local.k1_index(p, v) == local.k1_index_bruteforce(p, v)
    assert local.k1_volume(p, v) * local.k1_index(p, v) == 1


def test_phi0_values():
    phi0 = local.InducedSectionPhi0(3, 9)
    assert phi0(((1, 0), (0, 1))) == 1
    assert phi0(local.lower(3)) == 0
    assert phi0(local.lower(9)) == 1
    # left B-equivariance: |a/d|^(s + 1/2) with s = 1/2
    assert phi0(((3, 0), (0, 1))) == Fraction(1, 3)


def test_whittaker_table():
    a = local.ALPHA
    for p in (2, 3, 5):
        W = local.WhittakerNewform(p, 1)
        assert local.whittaker_value(W, Fraction(1, p)) == 0
        assert local.whittaker_value(W, 7 if p != 7 else 11) == 1
        assert sympy.simplify(local.whittaker_value(W, p * p) - a ** 2 / p) == 0
    with pytest.raises(ValueError):
        local.whittaker_value(local.WhittakerNewform(3, 1), 0)


@pytest.mark.parametrize("p", [2, 3, 5, 7])
@pytest.mark.parametrize("m", [0, 3, 10])
def test_zeta_partial_sums(p, m):
    W = local.WhittakerNewform(p, 1)
    z = local.zeta_factor(W, W)
    r = z.alpha1 * z.alpha2 / p ** 2
    partial = local.zeta_partial_sum(W, W, m)
    assert sympy.simplify(z.expr - partial - r ** (m + 1) / (1 - r)) == 0
    assert z.verdict() == "nonzero"


def test_zeta_domain():
    z = local.zeta_factor(local.WhittakerNewform(3, 1), local.WhittakerNewform(3, 1))
    with pytest.raises(ValueError):
        z.evaluate(3, 3)
    assert abs(z.evaluate(1, 1) - 1 / (1 - 1 / 9)) < 1e-15
    with pytest.raises(ZeroDivisionError):
        local.zeta_factor(local.WhittakerNewform(2, 1, 2), local.WhittakerNewform(2, 1, 2))


@pytest.mark.parametrize("p,N", [(2, 4), (3, 3), (3, 9), (5, 5)])
def test_support_matches_k0(p, N):
    rep = local.support_of_weil_translate(p, N)
    assert rep.verdict == "K0"
    assert rep.discrepancies("K0") == []
    assert rep.discrepancies("K1")          # K1 alone would miss part of the support


def test_support_rejects_non_sl2():
    member = local.weil_translate_support(3, 3)
    with pytest.raises(ValueError):
        member(((2, 0), (0, 1)))
