"""
Exact integer arithmetic: interval sieving, primality, factor counting.

Coordinates of the constructed points are products of a handful of primes
and reach ~B^4, so they are carried as :class:`FactoredInt` and never
factored from scratch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

import numpy as np

from .errors import EmptyRangeError, UndefinedInputError

SEGMENT_SIZE = 1 << 20

# Deterministic Miller-Rabin witnesses; correct for every n < 3.3e24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def small_primes(n: int) -> np.ndarray:
    """Primes <= n by a plain Eratosthenes sieve."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.nonzero(flags)[0].astype(np.int64)


def _sieve_segment(lo: int, hi: int, base: np.ndarray) -> np.ndarray:
    flags = np.ones(hi - lo + 1, dtype=bool)
    for p in base:
        p = int(p)
        if p * p > hi:
            break
        start = max(p * p, ((lo + p - 1) // p) * p)
        flags[start - lo :: p] = False
    if lo <= 1:
        flags[: 2 - lo] = False
    return np.nonzero(flags)[0] + lo


def primes_in(lo: int, hi: int) -> list[int]:
    """Sorted primes p with lo <= p <= hi.

    Memory is proportional to ``min(hi - lo, SEGMENT_SIZE)`` plus the base
    primes up to sqrt(hi), so windows near 1e9 are cheap.
    """
    if lo > hi:
        raise EmptyRangeError(f"empty range: lo={lo} > hi={hi}")
    lo = max(int(lo), 1)
    hi = int(hi)
    if hi < 2:
        return []
    base = small_primes(math.isqrt(hi))
    out: list[int] = []
    for seg_lo in range(lo, hi + 1, SEGMENT_SIZE):
        seg_hi = min(seg_lo + SEGMENT_SIZE - 1, hi)
        out.extend(_sieve_segment(seg_lo, seg_hi, base).tolist())
    return out


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin (exact for all 64-bit inputs and well beyond)."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def factorize(n: int) -> dict[int, int]:
    """Trial-division factorization of |n|; meant for small coefficients and tests."""
    n = abs(int(n))
    if n == 0:
        raise UndefinedInputError("cannot factor 0")
    out: dict[int, int] = {}
    for p in (2, 3):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    f, step = 5, 2
    while f * f <= n:
        while n % f == 0:
            out[f] = out.get(f, 0) + 1
            n //= f
        f += step
        step = 6 - step
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


@dataclass(frozen=True)
class FactoredInt:
    """An integer together with its prime factorization.

    ``factors`` is a tuple of ``(prime, multiplicity)`` pairs sorted by prime.
    The invariants (value = sign * prod p^m, distinct primes, sign 0 iff the
    value is 0) are checked on construction.
    """

    sign: int
    factors: tuple[tuple[int, int], ...]
    value: int

    def __post_init__(self) -> None:
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"bad sign {self.sign}")
        if self.sign == 0:
            if self.factors or self.value != 0:
                raise ValueError("zero must have no factors")
            return
        primes = [p for p, _ in self.factors]
        if len(set(primes)) != len(primes) or primes != sorted(primes):
            raise ValueError(f"factors must be distinct and sorted: {self.factors}")
        prod = 1
        for p, m in self.factors:
            if m <= 0 or not is_prime(p):
                raise ValueError(f"bad factor {p}^{m}")
            prod *= p**m
        if self.sign * prod != self.value:
            raise ValueError(f"value {self.value} != sign * prod of factors")

    @classmethod
    def from_factors(cls, sign: int, factors: dict[int, int]) -> FactoredInt:
        items = tuple(sorted((p, m) for p, m in factors.items() if m))
        value = sign
        for p, m in items:
            value *= p**m
        return cls(sign, items, value)

    @classmethod
    def from_int(cls, n: int) -> FactoredInt:
        if n == 0:
            return cls(0, (), 0)
        return cls.from_factors(1 if n > 0 else -1, factorize(n))

    @classmethod
    def prime(cls, p: int, sign: int = 1) -> FactoredInt:
        return cls.from_factors(sign, {p: 1})

    def as_dict(self) -> dict[int, int]:
        return dict(self.factors)

    def __mul__(self, other: FactoredInt | int) -> FactoredInt:
        if isinstance(other, int):
            other = FactoredInt.from_int(other)
        if self.sign == 0 or other.sign == 0:
            return FactoredInt(0, (), 0)
        merged = self.as_dict()
        for p, m in other.factors:
            merged[p] = merged.get(p, 0) + m
        return FactoredInt.from_factors(self.sign * other.sign, merged)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> FactoredInt:
        if k < 0:
            raise ValueError("negative exponent")
        if k == 0:
            return FactoredInt(1, (), 1)
        return FactoredInt.from_factors(self.sign**k, {p: m * k for p, m in self.factors})

    def __int__(self) -> int:
        return self.value


def product(items: Iterable[FactoredInt]) -> FactoredInt:
    acc = FactoredInt(1, (), 1)
    for it in items:
        acc = acc * it
    return acc


def _as_factored(n: FactoredInt | int) -> FactoredInt:
    return n if isinstance(n, FactoredInt) else FactoredInt.from_int(n)


def big_omega(n: FactoredInt | int) -> int:
    """Number of prime factors counted with multiplicity."""
    n = _as_factored(n)
    if n.sign == 0:
        raise UndefinedInputError("big_omega(0) is undefined")
    return sum(m for _, m in n.factors)


def omega_distinct_odd(n: FactoredInt | int) -> int:
    """Number of distinct odd primes dividing n."""
    n = _as_factored(n)
    if n.sign == 0:
        raise UndefinedInputError("omega_distinct_odd(0) is undefined")
    return sum(1 for p, _ in n.factors if p != 2)


def mobius(q: int) -> int:
    if q < 1:
        raise UndefinedInputError(f"mobius needs q >= 1, got {q}")
    f = factorize(q) if q > 1 else {}
    if any(m > 1 for m in f.values()):
        return 0
    return -1 if len(f) % 2 else 1


def euler_phi(q: int) -> int:
    if q < 1:
        raise UndefinedInputError(f"euler_phi needs q >= 1, got {q}")
    out = q
    for p in (factorize(q) if q > 1 else {}):
        out -= out // p
    return out


@lru_cache(maxsize=8)
def mobius_phi_table(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Arrays mu[0..n], phi[0..n] from a linear sieve (index 0 unused)."""
    mu = np.ones(n + 1, dtype=np.int64)
    phi = np.arange(n + 1, dtype=np.int64)
    mu[0] = 0
    for p in small_primes(n):
        p = int(p)
        mu[p::p] *= -1
        mu[p * p :: p * p] = 0
        phi[p::p] -= phi[p::p] // p
    mu.setflags(write=False)
    phi.setflags(write=False)
    return mu, phi


def ramanujan_sum(q: int, n: int) -> int:
    """c_q(n) = sum over units a mod q of e(an/q), via sum_{d | (q,n)} mu(q/d) d."""
    g = math.gcd(q, n)
    total = 0
    for d in range(1, math.isqrt(g) + 1):
        if g % d == 0:
            total += mobius(q // d) * d
            e = g // d
            if e != d:
                total += mobius(q // e) * e
    return total


def gcd4(x: Iterable[int]) -> int:
    x = [int(v) for v in x]
    if len(x) != 4:
        raise ValueError("gcd4 expects four integers")
    if not any(x):
        raise UndefinedInputError("gcd of the zero vector is undefined")
    return math.gcd(*x)
