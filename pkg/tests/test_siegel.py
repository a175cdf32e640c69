import numpy as np
import pytest
from hypothesis import given, strategies as st

from nlbench import isogeny, siegel
from nlbench.isogeny import IsogenyMatrix
from nlbench.siegel import NotInUpperHalfSpace, SiegelPair

seeds = st.integers(0, 2 ** 32 - 1)


def random_matrix(g, rng, bound=8):
    return IsogenyMatrix.from_rows(rng.integers(-bound, bound + 1, size=(2 * g, 2)).tolist())


@given(seeds, st.integers(1, 3))
def test_transporters_send_base_point(seed, g):
    rng = np.random.default_rng(seed)
    pair = siegel.random_siegel_pair(g, rng)
    M = siegel.transporter_sl2(pair.tau)
    Mp = siegel.transporter_sp(pair.tau_prime)
    assert abs(np.linalg.det(M) - 1) < 1e-12
    assert abs(siegel.apply_sl2(M) - pair.tau) < 1e-12
    assert siegel.symplectic_defect(Mp) < 1e-10
    assert np.max(np.abs(siegel.apply_sp(Mp) - pair.tau_prime)) < 1e-10


@pytest.mark.parametrize("g", [1, 2, 3])
def test_standard_planes(g):
    N0, P0 = siegel.n0_p0_bases(g)
    G = siegel.tensor_gram(g)
    assert N0.is_negative_definite()
    assert np.all(np.linalg.eigvalsh(P0 @ G @ P0.T) > 0)
    assert np.max(np.abs(N0.basis @ G @ P0.T)) == 0
    assert np.linalg.matrix_rank(np.vstack([N0.basis, P0])) == 4 * g


@given(seeds, st.integers(1, 2))
def test_plane_routes_agree_and_are_negative(seed, g):
    rng = np.random.default_rng(seed)
    pair = siegel.random_siegel_pair(g, rng)
    a, b = siegel.phi_plane(pair), siegel.phi_plane_expanded(pair)
    assert np.max(np.abs(a.basis - b.basis)) < 1e-10
    assert a.is_negative_definite()
    N0, _ = siegel.n0_p0_bases(g)
    # the transporter is an isometry, so the Gram matrix is carried over
    assert np.max(np.abs(a.gram() - N0.gram())) < 1e-9


@given(seeds, st.integers(1, 2))
def test_plane_independent_of_transporter_choice(seed, g):
    rng = np.random.default_rng(seed)
    pair = siegel.random_siegel_pair(g, rng)
    M = siegel.transporter_sl2(pair.tau)
    Mp = siegel.transporter_sp(pair.tau_prime)
    k = siegel.sl2_stabilizer(rng.uniform(0, 2 * np.pi))
    K = siegel.sp_stabilizer(siegel.random_unitary(g, rng))
    assert abs(siegel.apply_sl2(k) - 1j) < 1e-12
    assert np.max(np.abs(siegel.apply_sp(K) - 1j * np.eye(g))) < 1e-12
    other = siegel.plane_from_transporters(M @ k, Mp @ K)
    assert siegel.projection_residual(siegel.phi_plane(pair), other) < 1e-9


@given(seeds, st.integers(1, 2))
def test_period_routes_agree(seed, g):
    rng = np.random.default_rng(seed)
    pair = siegel.random_siegel_pair(g, rng)
    B = random_matrix(g, rng)
    a = siegel.normalized_period(B, pair)
    b = siegel.normalized_period_expanded(B, pair)
    assert np.max(np.abs(a - b)) < 1e-9 * (1 + np.max(np.abs(a)))


@given(seeds, st.integers(1, 2))
def test_identities_hold_on_random_data(seed, g):
    rng = np.random.default_rng(seed)
    pair = siegel.random_siegel_pair(g, rng)
    rep = siegel.orthogonality_identities(random_matrix(g, rng), pair)
    assert rep.rel_residual < 1e-8
    assert rep.consistent


@pytest.mark.parametrize("k", [1, 2, -3])
def test_vanishing_period_for_multiplication(k):
    tau = complex(-0.2, 0.8)
    B = isogeny.from_homology([[k, 0], [0, k]])
    rep = siegel.orthogonality_identities(B, SiegelPair(tau, [[tau]]))
    assert rep.period_vanishes and rep.orthogonal
    assert np.max(np.abs(rep.beta)) < 1e-9


def test_vanishing_period_for_product_embedding():
    tau, t2 = complex(0.1, 1.3), complex(0.4, 0.9)
    B = isogeny.from_homology([[1, 0], [0, 0], [0, 1], [0, 0]])
    pair = SiegelPair(tau, [[tau, 0], [0, t2]])
    rep = siegel.orthogonality_identities(B, pair)
    assert rep.period_vanishes and rep.orthogonal
    moved = SiegelPair(tau, [[tau, 0.3], [0.3, t2]])
    rep2 = siegel.orthogonality_identities(B, moved)
    assert not rep2.period_vanishes and not rep2.orthogonal


def test_domain_errors():
    with pytest.raises(NotInUpperHalfSpace):
        SiegelPair(complex(0, -1), [[1j]])
    with pytest.raises(NotInUpperHalfSpace):
        SiegelPair(1j, [[1j, 0], [0, -1j]])
    with pytest.raises(ValueError):
        SiegelPair(1j, [[1j, 1], [0, 1j]])
    with pytest.raises(ValueError):
        siegel.period_vector(random_matrix(2, np.random.default_rng(0)), SiegelPair(1j, [[1j]]))


def test_pair_round_trip():
    pair = siegel.random_siegel_pair(2, np.random.default_rng(3))
    back = SiegelPair.from_dict(pair.to_dict())
    assert back.tau == pair.tau
    assert np.array_equal(back.tau_prime, pair.tau_prime)
