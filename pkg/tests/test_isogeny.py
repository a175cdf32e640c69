import itertools

import pytest
from hypothesis import assume, given, strategies as st
from sympy import Matrix
from sympy.matrices.normalforms import smith_normal_form as sympy_snf

from nlbench import _exact, isogeny, lattice
from nlbench.isogeny import (ActionGraph, IsogenyMatrix, LevelDatum, OutsideCandidateForm,
                             WordSearch, congruence_check, congruence_class, degree,
                             enumerate_matrices, matrix_of_vector, orbit_census,
                             saturation_multiplier, smith_invariants, symplectic_reduce,
                             tensor_vector)


def matrices(g=None, bound=6):
    gs = st.just(g) if g else st.integers(1, 3)
    return gs.flatmap(lambda g: st.lists(
        st.tuples(st.integers(-bound, bound), st.integers(-bound, bound)),
        min_size=2 * g, max_size=2 * g)).map(IsogenyMatrix.from_rows)


def words(graph, max_len=8):
    return st.lists(st.sampled_from(graph.moves), max_size=max_len)


G2 = ActionGraph(2, 1)


def test_example_norm_and_vector():
    B = IsogenyMatrix.from_columns([1, 0], [0, 1])
    assert degree(B) == 1
    v = tensor_vector(B)
    assert [int(x) for x in v.coords] == [1, 0, 0, 1]
    assert isogeny.tensor_norm(v) == 2


@given(matrices())
def test_norm_is_twice_degree(B):
    assert isogeny.tensor_norm(tensor_vector(B)) == 2 * degree(B)


@given(matrices())
def test_vector_round_trip(B):
    assert matrix_of_vector(tensor_vector(B)) == B


@given(matrices())
def test_gram_form_is_degree_times_j2(B):
    d = degree(B)
    assert isogeny.gram_form(B) == [[0, d], [-d, 0]]


@given(matrices(), st.integers(1, 12))
def test_congruence_class_reduces_homology(B, N):
    datum = congruence_class(B, N)
    bh = isogeny.to_homology(B)
    assert datum.b == tuple((x % N, y % N) for x, y in bh)
    assert congruence_check(B, datum)
    assert isogeny.from_homology(bh) == B


def test_level_datum_condition():
    B = IsogenyMatrix.from_columns([1, 0], [0, 3])
    assert congruence_class(B, 5).is_symplectic(3)
    assert not congruence_class(B, 5).is_symplectic(2)
    with pytest.raises(ValueError):
        LevelDatum(0, ((0, 0), (0, 0)))


@pytest.mark.parametrize("d,h", [(1, 2), (2, 2), (3, 3), (4, 2)])
def test_enumeration_matches_brute_force_g1(d, h):
    rng = range(-h, h + 1)
    want = [(a1, a2, b1, b2) for a1, a2, b1, b2 in itertools.product(rng, repeat=4)
            if a1 * b2 - a2 * b1 == d]
    got = [B.a + B.b for B in enumerate_matrices(1, d, h)]
    assert got == want


def test_enumeration_with_datum_filters():
    datum = congruence_class(IsogenyMatrix.from_columns([1, 1], [0, 2]), 3)
    got = enumerate_matrices(1, 2, 3, datum)
    assert got and all(congruence_check(B, datum) for B in got)
    assert len(got) < len(enumerate_matrices(1, 2, 3))


@pytest.mark.parametrize("g", [1, 2, 3])
@pytest.mark.parametrize("N", [1, 2, 3])
def test_generators_are_symplectic_and_closed_under_inverse(g, N):
    graph = ActionGraph(g, N)
    for m in graph.left.values():
        assert isogeny.is_symplectic(m, g)
        if N > 1:
            assert all((m[i][j] - (i == j)) % N == 0 for i in range(2 * g) for j in range(2 * g))
    for m in graph.right.values():
        assert _exact.det(m) == 1
    for mv in graph.moves:
        assert graph.inverse(graph.inverse(mv)) == mv


@given(matrices(g=2), words(G2))
def test_word_matrices_match_application(B, word):
    gamma, delta = G2.word_matrices(word)
    want = _exact.matmul(_exact.matmul(delta, B.entries), gamma)
    assert G2.apply_word(B.flat(), word) == tuple(x for r in want for x in r)
    inverse = tuple(G2.inverse(mv) for mv in reversed(word))
    assert G2.apply_word(G2.apply_word(B.flat(), word), inverse) == B.flat()


@given(matrices(g=2), words(G2))
def test_orbit_invariants(B, word):
    C = IsogenyMatrix.from_rows(zip(*[iter(G2.apply_word(B.flat(), word))] * 2))
    assert degree(C) == degree(B)
    assert smith_invariants(C) == smith_invariants(B)
    assert saturation_multiplier(C) == saturation_multiplier(B)


@given(matrices())
def test_smith_invariants_match_sympy(B):
    assume(any(any(r) for r in B.entries))
    d = sympy_snf(Matrix(B.tolist()))
    want = sorted((abs(int(d[i, i])) for i in range(2)), key=lambda x: (x == 0, x))
    s1, s2 = smith_invariants(B)
    assert [s1, s2] == want


@given(matrices())
def test_reduce_when_multiplier_is_one(B):
    d = degree(B)
    assume(d > 0)
    if saturation_multiplier(B) != 1:
        with pytest.raises(OutsideCandidateForm):
            symplectic_reduce(B)
        return
    red = symplectic_reduce(B)
    assert red.d2 % red.d1 == 0 and red.d1 * red.d2 == d
    assert isogeny.is_symplectic([list(r) for r in red.delta], B.g)
    assert _exact.det(red.gamma) == 1
    moved = _exact.matmul(_exact.matmul(red.delta, B.entries), red.gamma)
    assert [tuple(r) for r in moved] == list(red.representative.entries)
    assert (red.d1, red.d2) == smith_invariants(B)


def test_multiplier_counterexample():
    # (e1 | e2 + 2 e3): primitive columns, degree 2, yet the saturated span
    # carries the form 2 J_2, which no move changes
    B = IsogenyMatrix.from_columns([1, 0, 0, 0], [0, 1, 2, 0])
    assert degree(B) == 2
    assert smith_invariants(B) == (1, 1)
    assert saturation_multiplier(B) == 2
    target = isogeny.canonical_representative(2, 1, 2)
    assert saturation_multiplier(target) == 1
    with pytest.raises(OutsideCandidateForm) as info:
        symplectic_reduce(B)
    assert (info.value.s1, info.value.s2, info.value.m) == (1, 1, 2)


def test_reduce_rejects_nonpositive_degree():
    with pytest.raises(ValueError):
        symplectic_reduce(IsogenyMatrix.from_columns([0, 1], [1, 0]))


def test_word_search_certifies_reductions():
    search = WordSearch(G2)
    done = 0
    for B in enumerate_matrices(2, 2, 1):
        if saturation_multiplier(B) != 1:
            continue
        red = symplectic_reduce(B)
        word = search.find(B, red.representative)
        assert word is not None
        assert G2.apply_word(B.flat(), word) == red.representative.flat()
        done += 1
    assert done > 0


def test_complete_symplectic_basis():
    S = isogeny.complete_symplectic_basis([[1, 0, 0, 0]], [[0, 1, 1, 0]], 2)
    assert isogeny.is_symplectic(S, 2)
    assert _exact.matmul(isogeny.symplectic_inverse(S, 2), S) == _exact.identity(4)


def test_census_small_g1():
    rep = orbit_census(1, 2, 1, 3, 3)
    assert len(rep.members) == 156 and len(rep.classes) == 1
    assert rep.verify_merges(ActionGraph(1, 1))
    assert sum(c.size for c in rep.classes) == len(rep.members)


def test_census_level_structure_is_constant_on_classes():
    N = 2
    rep = orbit_census(1, 3, N, 3, 4)
    assert rep.verify_merges(ActionGraph(1, N))
    for i, j, _ in rep.merges:
        assert congruence_class(rep.members[i], N) == congruence_class(rep.members[j], N)
    assert len({c.congruence_class for c in rep.classes}) <= len(rep.classes)


def test_census_monotone_in_depth():
    counts = [len(orbit_census(1, 3, 2, 2, k).classes) for k in range(0, 5)]
    assert all(a >= b for a, b in zip(counts, counts[1:]))
    assert counts[0] == len(enumerate_matrices(1, 3, 2))


def test_census_g2_matches_invariants():
    # classes of the d = 2 window: (s1, s2, m) in {(1, 2, 1), (1, 1, 2)}
    rep = orbit_census(2, 2, 1, 2, 4)
    assert len(rep.classes) == 2
    kinds = {(smith_invariants(c.rep), saturation_multiplier(c.rep)) for c in rep.classes}
    assert kinds == {((1, 2), 1), ((1, 1), 2)}
    doc = rep.to_dict()
    assert set(doc) == {"g", "d", "N", "height_bound", "bfs_depth", "classes"}
