"""Which levels N have a divisor N0 carrying a weight-4 / weight-2 newform pair.

A level qualifies through a divisor from a fixed table of small levels, or
through a prime divisor q whose modular curve X_0(q) has positive genus
(exactly q = 11 or q >= 17).
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence

import numpy as np

from .padic.scalars import is_prime

GENUS_ZERO_PRIMES = (2, 3, 5, 7, 13)


@dataclass(frozen=True)
class NewformRecord:
    N0: int
    f1_label: str
    f2_label: str
    nebentype_label: str

    def __post_init__(self):
        if self.N0 <= 1:
            raise ValueError("N0 must exceed 1")
        if not (self.f1_label and self.f2_label and self.nebentype_label):
            raise ValueError("labels must be nonempty")


_TABLE = (
    NewformRecord(16, "16.4.e.a", "16.2.e.a", "16.e"),
    NewformRecord(27, "27.4.a.a", "27.2.a.a", "triv"),
    NewformRecord(25, "25.4.d.a", "25.2.d.a", "25.d"),
    NewformRecord(49, "49.4.a.a", "49.2.a.a", "triv"),
    NewformRecord(13, "13.4.e.a", "13.2.e.a", "13.e"),
    NewformRecord(24, "24.4.a.a", "24.2.a.a", "triv"),
    NewformRecord(18, "18.4.c.a", "18.2.c.a", "18.c"),
    NewformRecord(20, "20.4.a.a", "20.2.a.a", "triv"),
    NewformRecord(14, "14.4.a.a", "14.2.a.a", "triv"),
    NewformRecord(15, "15.4.a.a", "15.2.a.a", "triv"),
    NewformRecord(21, "21.4.a.a", "21.2.a.a", "triv"),
    NewformRecord(35, "35.4.a.a", "35.2.a.a", "triv"),
)


def builtin_table() -> List[NewformRecord]:
    """The 12 levels with a known newform pair, in table order."""
    return list(_TABLE)


def _legendre(a: int, p: int) -> int:
    r = pow(a % p, (p - 1) // 2, p)
    return -1 if r == p - 1 else r


def genus_x0(p: int) -> int:
    """Genus of X_0(p): ``1 + mu/12 - nu2/4 - nu3/3 - cusps/2`` with ``mu = p + 1``."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    nu2 = 1 if p == 2 else 1 + _legendre(-1, p)
    nu3 = 1 if p == 3 else (0 if p == 2 else 1 + _legendre(-3, p))
    g = 1 + Fraction(p + 1, 12) - Fraction(nu2, 4) - Fraction(nu3, 3) - 1
    if g.denominator != 1 or g < 0:
        raise AssertionError(f"non-integral genus {g} for p = {p}")
    return int(g)


def prime_rule(q: int) -> bool:
    """``q = 11`` or ``q >= 17``, checked against the genus of X_0(q)."""
    rule = q == 11 or q >= 17
    if rule != (genus_x0(q) >= 1 and q not in GENUS_ZERO_PRIMES):
        raise AssertionError(f"prime rule and genus disagree at {q}")
    return rule


@dataclass(frozen=True)
class StarVerdict:
    N: int
    satisfied: bool
    witness: Optional[int] = None
    rule: Optional[str] = None   # "table" or "prime"

    def line(self) -> str:
        if not self.satisfied:
            return f"N={self.N} not satisfied"
        return f"N={self.N} satisfied witness={self.witness} rule={self.rule}"


def smallest_prime_factors(n_max: int) -> np.ndarray:
    spf = np.zeros(n_max + 1, dtype=np.int64)
    for i in range(2, n_max + 1):
        if spf[i] == 0:
            spf[i::i][spf[i::i] == 0] = i
    return spf


def _prime_factors(N: int, spf: Optional[np.ndarray]) -> List[int]:
    out = []
    if spf is not None and N < len(spf):
        while N > 1:
            q = int(spf[N])
            out.append(q)
            while N % q == 0:
                N //= q
        return out
    q = 2
    while q * q <= N:
        if N % q == 0:
            out.append(q)
            while N % q == 0:
                N //= q
        q += 1
    if N > 1:
        out.append(N)
    return out


_TABLE_ASC = sorted(r.N0 for r in _TABLE)


def satisfies_star(N: int, spf: Optional[np.ndarray] = None) -> StarVerdict:
    """First witness: table levels in ascending order, then the smallest qualifying prime."""
    if N < 1:
        raise ValueError("N must be positive")
    for n0 in _TABLE_ASC:
        if N % n0 == 0:
            return StarVerdict(N, True, n0, "table")
    for q in _prime_factors(N, spf):
        if q not in GENUS_ZERO_PRIMES and prime_rule(q):
            return StarVerdict(N, True, q, "prime")
    return StarVerdict(N, False)


def validate_witness(v: StarVerdict) -> bool:
    if not v.satisfied:
        return True
    if v.N % v.witness:
        return False
    if v.rule == "table":
        return v.witness in _TABLE_ASC
    return is_prime(v.witness) and genus_x0(v.witness) >= 1


def _check_block(args) -> List[int]:
    lo, hi = args
    spf = smallest_prime_factors(hi)
    return [N for N in range(lo, hi + 1)
            if (N == 11 or N >= 13) and not satisfies_star(N, spf).satisfied]


EXPECTED_NEGATIVES = tuple(list(range(1, 11)) + [12])


def negative_set(limit: int = 12) -> List[int]:
    return [N for N in range(1, limit + 1) if not satisfies_star(N).satisfied]


def verify_theorem_range(N_max: int, workers: int = 1) -> List[int]:
    """Levels in ``{11} u [13, N_max]`` failing the condition (empty when all pass).

    Raises ``AssertionError`` if the small negative set differs from
    ``{1, .., 10, 12}``.
    """
    if N_max < 13:
        raise ValueError("N_max must be at least 13")
    if tuple(negative_set()) != EXPECTED_NEGATIVES:
        raise AssertionError(f"negative set {negative_set()} differs from {EXPECTED_NEGATIVES}")
    if workers <= 1:
        return _check_block((11, N_max))
    step = -(-(N_max - 10) // workers)
    blocks = [(lo, min(lo + step - 1, N_max)) for lo in range(11, N_max + 1, step)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return [n for part in pool.map(_check_block, blocks) for n in part]
