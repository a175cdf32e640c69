"""Floating-point geometry of H x H_g and the plane phi(tau, tau').

Fractional-linear convention: ``M = [[w, x], [y, z]]`` sends ``i`` to
``(w i + x) / (y i + z)`` and ``M' = [[W, X], [Y, Z]]`` sends ``i Id`` to
``(i W + X)(i Y + Z)^-1``.  ``W, X`` act on the ``e'`` basis vectors and
``Y, Z`` on the ``f'`` basis vectors.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .isogeny import IsogenyMatrix, tensor_vector
from .lattice import tensor_symplectic

ABS_TOL = 1e-9
REL_TOL = 1e-8


class NotInUpperHalfSpace(ValueError):
    pass


def _as_complex_matrix(tau_prime) -> np.ndarray:
    m = np.atleast_2d(np.asarray(tau_prime, dtype=complex))
    if m.shape[0] != m.shape[1]:
        raise ValueError("tau' must be square")
    return m


@dataclass(frozen=True)
class SiegelPair:
    tau: complex
    tau_prime: np.ndarray

    def __init__(self, tau, tau_prime, tol: float = ABS_TOL):
        tau = complex(tau)
        tp = _as_complex_matrix(tau_prime)
        if tau.imag <= 0:
            raise NotInUpperHalfSpace(f"Im(tau) = {tau.imag} is not positive")
        if np.max(np.abs(tp - tp.T)) > tol * max(1.0, np.max(np.abs(tp))):
            raise ValueError("tau' is not symmetric")
        tp = (tp + tp.T) / 2
        try:
            np.linalg.cholesky(tp.imag)
        except np.linalg.LinAlgError as exc:
            raise NotInUpperHalfSpace("Im(tau') is not positive definite") from exc
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "tau_prime", tp)

    @property
    def g(self) -> int:
        return self.tau_prime.shape[0]

    def to_dict(self) -> dict:
        return {"tau": {"re": self.tau.real, "im": self.tau.imag},
                "tau_prime": {"re": self.tau_prime.real.tolist(),
                              "im": self.tau_prime.imag.tolist()}}

    @classmethod
    def from_dict(cls, doc: dict) -> "SiegelPair":
        t = doc["tau"]
        tp = doc["tau_prime"]
        return cls(complex(t["re"], t["im"]),
                   np.asarray(tp["re"], dtype=float) + 1j * np.asarray(tp["im"], dtype=float))


def augmented(tau_or_matrix) -> np.ndarray:
    """``(tau; Id)`` stacked: 2 x 1 for a scalar, 2g x g for a matrix."""
    m = _as_complex_matrix(tau_or_matrix)
    return np.vstack([m, np.eye(m.shape[0])])


def random_siegel_pair(g: int, rng: np.random.Generator) -> SiegelPair:
    tau = complex(rng.uniform(-1, 1), rng.uniform(0.3, 2.0))
    x = rng.uniform(-1, 1, (g, g))
    a = rng.normal(size=(g, g))
    y = a @ a.T + 0.3 * np.eye(g)
    return SiegelPair(tau, (x + x.T) / 2 + 1j * y)


def period_vector(B: IsogenyMatrix, pair: SiegelPair) -> np.ndarray:
    """``(B tau~)^T tau~'`` as a complex g-vector."""
    if B.g != pair.g:
        raise ValueError(f"B has g = {B.g} but tau' has g = {pair.g}")
    bm = np.array(B.tolist(), dtype=float)
    return ((bm @ augmented(pair.tau)).T @ augmented(pair.tau_prime)).ravel()


def apply_sl2(M, tau: complex = 1j) -> complex:
    (w, x), (y, z) = np.asarray(M, dtype=float)
    return (w * tau + x) / (y * tau + z)


def apply_sp(Mp, tau_prime=None) -> np.ndarray:
    """``M'`` applied to ``tau'`` (default ``i Id``)."""
    Mp = np.asarray(Mp, dtype=float)
    g = Mp.shape[0] // 2
    t = 1j * np.eye(g) if tau_prime is None else _as_complex_matrix(tau_prime)
    W, X, Y, Z = Mp[:g, :g], Mp[:g, g:], Mp[g:, :g], Mp[g:, g:]
    return (W @ t + X) @ np.linalg.inv(Y @ t + Z)


def transporter_sl2(tau: complex) -> np.ndarray:
    tau = complex(tau)
    if tau.imag <= 0:
        raise NotInUpperHalfSpace(f"Im(tau) = {tau.imag} is not positive")
    r = np.sqrt(tau.imag)
    return np.array([[r, tau.real / r], [0.0, 1.0 / r]])


def _sym_sqrt(y: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(y)
    if vals.min() <= 0:
        raise NotInUpperHalfSpace("Im(tau') is not positive definite")
    return (vecs * np.sqrt(vals)) @ vecs.T


def transporter_sp(tau_prime) -> np.ndarray:
    tp = _as_complex_matrix(tau_prime)
    g = tp.shape[0]
    a = _sym_sqrt((tp.imag + tp.imag.T) / 2)
    a_inv = np.linalg.inv(a)
    u = (tp.real + tp.real.T) / 2
    out = np.zeros((2 * g, 2 * g))
    out[:g, :g] = a
    out[:g, g:] = u @ a_inv
    out[g:, g:] = a_inv
    return out


def symplectic_defect(Mp) -> float:
    Mp = np.asarray(Mp, dtype=float)
    g = Mp.shape[0] // 2
    J = np.block([[np.zeros((g, g)), np.eye(g)], [-np.eye(g), np.zeros((g, g))]])
    return float(np.max(np.abs(Mp.T @ J @ Mp - J)))


@dataclass(frozen=True)
class NegativePlane:
    basis: np.ndarray  # rows are the 2g spanning vectors, coordinates in the tensor basis

    def gram(self) -> np.ndarray:
        G = tensor_gram(self.basis.shape[1] // 4)
        return self.basis @ G @ self.basis.T

    def is_negative_definite(self, tol: float = ABS_TOL) -> bool:
        return bool(np.linalg.eigvalsh(self.gram()).max() < -tol)


def tensor_gram(g: int) -> np.ndarray:
    return np.array(tensor_symplectic(g).gram, dtype=float)


def n0_p0_bases(g: int) -> Tuple[NegativePlane, np.ndarray]:
    """Integral bases of the standard negative plane ``N0`` and its complement ``P0``."""
    n = 4 * g

    def vec(*terms):
        v = np.zeros(n)
        for coef, idx in terms:
            v[idx] += coef
        return v

    ee = lambda k: k              # e (x) e'_k
    ef = lambda k: g + k          # e (x) f'_k
    fe = lambda k: 2 * g + k      # f (x) e'_k
    ff = lambda k: 3 * g + k      # f (x) f'_k
    neg = [vec((1, ee(k)), (-1, ff(k))) for k in range(g)] + \
          [vec((1, ef(k)), (1, fe(k))) for k in range(g)]
    pos = [vec((1, ee(k)), (1, ff(k))) for k in range(g)] + \
          [vec((1, ef(k)), (-1, fe(k))) for k in range(g)]
    return NegativePlane(np.array(neg)), np.array(pos)


def phi_plane(pair: SiegelPair) -> NegativePlane:
    """Rows ``r_1..r_g, s_1..s_g`` spanning ``(M (x) M')(N0)``."""
    M = transporter_sl2(pair.tau)
    Mp = transporter_sp(pair.tau_prime)
    return plane_from_transporters(M, Mp)


def plane_from_transporters(M, Mp) -> NegativePlane:
    M = np.asarray(M, dtype=float)
    Mp = np.asarray(Mp, dtype=float)
    g = Mp.shape[0] // 2
    rs = [np.kron(M[:, 0], Mp[:, j]) - np.kron(M[:, 1], Mp[:, g + j]) for j in range(g)]
    ss = [np.kron(M[:, 0], Mp[:, g + j]) + np.kron(M[:, 1], Mp[:, j]) for j in range(g)]
    return NegativePlane(np.array(rs + ss))


def phi_plane_expanded(pair: SiegelPair) -> NegativePlane:
    """Same spanning vectors, written out entry by entry (independent route)."""
    M = transporter_sl2(pair.tau)
    Mp = transporter_sp(pair.tau_prime)
    (w, x), (y, z) = M
    g = pair.g
    W, X, Y, Z = Mp[:g, :g], Mp[:g, g:], Mp[g:, :g], Mp[g:, g:]
    rows = []
    for j in range(g):
        r = np.zeros(4 * g)
        for k in range(g):
            r[k] = -(x * X[k, j] - w * W[k, j])
            r[g + k] = -(x * Z[k, j] - w * Y[k, j])
            r[2 * g + k] = -(z * X[k, j] - y * W[k, j])
            r[3 * g + k] = -(z * Z[k, j] - y * Y[k, j])
        rows.append(r)
    for j in range(g):
        s = np.zeros(4 * g)
        for k in range(g):
            s[k] = w * X[k, j] + x * W[k, j]
            s[g + k] = w * Z[k, j] + x * Y[k, j]
            s[2 * g + k] = y * X[k, j] + z * W[k, j]
            s[3 * g + k] = y * Z[k, j] + z * Y[k, j]
        rows.append(s)
    return NegativePlane(np.array(rows))


def projection_residual(p1: NegativePlane, p2: NegativePlane) -> float:
    """Distance between the spans of two bases (Euclidean orthogonal projectors)."""
    q1, _ = np.linalg.qr(p1.basis.T)
    q2, _ = np.linalg.qr(p2.basis.T)
    return float(np.max(np.abs(q1 @ q1.T - q2 @ q2.T)))


def normalized_period(B: IsogenyMatrix, pair: SiegelPair) -> np.ndarray:
    """``beta = (y i + z) (B tau~)^T tau~' (i Y + Z)`` with ``M, M'`` the transporters."""
    M = transporter_sl2(pair.tau)
    Mp = transporter_sp(pair.tau_prime)
    g = pair.g
    y, z = M[1]
    Y, Z = Mp[g:, :g], Mp[g:, g:]
    return (y * 1j + z) * (period_vector(B, pair) @ (1j * Y + Z))


def normalized_period_expanded(B: IsogenyMatrix, pair: SiegelPair) -> np.ndarray:
    """``beta_j`` summed term by term from the transporter entries."""
    M = transporter_sl2(pair.tau)
    Mp = transporter_sp(pair.tau_prime)
    (w, x), (y, z) = M
    g = pair.g
    W, X, Y, Z = Mp[:g, :g], Mp[:g, g:], Mp[g:, :g], Mp[g:, g:]
    a, b = B.a, B.b
    out = np.zeros(g, dtype=complex)
    for j in range(g):
        for k in range(g):
            out[j] += (a[k] * (w * 1j + x) + b[k] * (y * 1j + z)) * (1j * W[k, j] + X[k, j])
            out[j] += (a[g + k] * (w * 1j + x) + b[g + k] * (y * 1j + z)) * (1j * Y[k, j] + Z[k, j])
    return out


@dataclass(frozen=True)
class IdentityReport:
    beta: np.ndarray
    pair_real: np.ndarray    # gamma(B_phi, -r_j)
    pair_imag: np.ndarray    # gamma(B_phi, s_j)
    abs_residual: float
    rel_residual: float
    period_vanishes: bool
    orthogonal: bool

    @property
    def consistent(self) -> bool:
        return self.period_vanishes == self.orthogonal

    def to_dict(self) -> dict:
        return {"beta_re": self.beta.real.tolist(), "beta_im": self.beta.imag.tolist(),
                "abs_residual": self.abs_residual, "rel_residual": self.rel_residual,
                "period_vanishes": self.period_vanishes, "orthogonal": self.orthogonal}


def orthogonality_identities(B: IsogenyMatrix, pair: SiegelPair,
                             tol_abs: float = ABS_TOL,
                             plane: Optional[NegativePlane] = None) -> IdentityReport:
    g = pair.g
    plane = plane if plane is not None else phi_plane(pair)
    v = np.array([float(c) for c in tensor_vector(B).coords])
    G = tensor_gram(g)
    pairings = plane.basis @ G @ v
    re_side = -pairings[:g]
    im_side = pairings[g:]
    beta = normalized_period(B, pair)
    diff = np.maximum(np.abs(re_side - beta.real), np.abs(im_side - beta.imag))
    abs_res = float(diff.max())
    rel_res = float((diff / (1.0 + np.abs(beta))).max())
    scale = 1.0 + float(np.max(np.abs(v)))
    return IdentityReport(
        beta=beta, pair_real=re_side, pair_imag=im_side,
        abs_residual=abs_res, rel_residual=rel_res,
        period_vanishes=bool(np.max(np.abs(period_vector(B, pair))) < tol_abs * scale),
        orthogonal=bool(np.max(np.abs(pairings)) < tol_abs * scale),
    )


def sl2_stabilizer(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, s], [-s, c]])


def sp_stabilizer(unitary: np.ndarray) -> np.ndarray:
    """Embed ``P + iQ`` in U(g) as ``[[P, Q], [-Q, P]]``, which fixes ``i Id``."""
    P, Q = unitary.real, unitary.imag
    return np.block([[P, Q], [-Q, P]])


def random_unitary(g: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=(g, g)) + 1j * rng.normal(size=(g, g))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))
