import random

import pytest
from hypothesis import given, strategies as st

from nlbench import star
from nlbench.padic.scalars import is_prime


def genus_by_floor_formula(p):
    # classical closed form for prime level
    if p in (2, 3):
        return 0
    base = (p + 1) // 12
    return base - 1 if p % 12 == 1 else base


def naive_star(N):
    table = [r.N0 for r in star.builtin_table()]
    if any(N % n0 == 0 for n0 in table):
        return True
    return any(N % q == 0 and is_prime(q) and (q == 11 or q >= 17) for q in range(2, N + 1))


def test_table_shape():
    table = star.builtin_table()
    assert len(table) == 12
    assert sorted(r.N0 for r in table) == [13, 14, 15, 16, 18, 20, 21, 24, 25, 27, 35, 49]
    with pytest.raises(ValueError):
        star.NewformRecord(1, "a", "b", "c")


def test_genus_zero_primes():
    small = [p for p in range(2, 200) if is_prime(p) and star.genus_x0(p) == 0]
    assert small == [2, 3, 5, 7, 13]


def test_genus_matches_floor_formula():
    for p in range(2, 2000):
        if is_prime(p):
            assert star.genus_x0(p) == genus_by_floor_formula(p)
    assert [star.genus_x0(p) for p in (11, 23, 37, 47)] == [1, 2, 2, 4]
    with pytest.raises(ValueError):
        star.genus_x0(12)


def test_small_levels():
    assert star.negative_set() == list(range(1, 11)) + [12]
    v = star.satisfies_star(11)
    assert (v.satisfied, v.witness, v.rule) == (True, 11, "prime")
    assert star.satisfies_star(26).witness == 13
    assert star.satisfies_star(17 * 49).line() == "N=833 satisfied witness=49 rule=table"
    assert star.satisfies_star(12).line() == "N=12 not satisfied"


def test_agrees_with_naive_check():
    for N in range(1, 3000):
        assert star.satisfies_star(N).satisfied == naive_star(N), N


def test_range_checks():
    assert star.verify_theorem_range(1000) == []
    assert star.verify_theorem_range(20000, workers=2) == []
    with pytest.raises(ValueError):
        star.verify_theorem_range(12)


def test_spf_sieve():
    spf = star.smallest_prime_factors(1000)
    for n in range(2, 1001):
        q = next(d for d in range(2, n + 1) if n % d == 0)
        assert spf[n] == q


def test_multiplicativity_on_random_pairs():
    rng = random.Random(7)
    spf = star.smallest_prime_factors(10 ** 6)
    for _ in range(10 ** 4):
        N = rng.randint(1, 2000)
        k = rng.randint(1, 400)
        if star.satisfies_star(N, spf).satisfied:
            assert star.satisfies_star(N * k, spf).satisfied


@given(st.integers(1, 10 ** 6))
def test_witness_validity(N):
    v = star.satisfies_star(N)
    assert star.validate_witness(v)
    if v.satisfied:
        assert N % v.witness == 0


def test_validate_rejects_bad_witness():
    bad = star.StarVerdict(22, True, 13, "prime")
    assert not star.validate_witness(bad)
    assert not star.validate_witness(star.StarVerdict(26, True, 13, "prime"))
