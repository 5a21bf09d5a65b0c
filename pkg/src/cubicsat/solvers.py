"""
Prime solutions of the four constraint shapes inside product intervals.

    F1: 2 b1 t1 + b2 t2^2 + b3 t3 t4 = 0        t1 ~ B^(2/3), t2..t4 ~ B^(1/3)
    F2: b1 t1 + b2 t2 + b3 t3 = 0, one coefficient doubled (``two_slot``)
    F3: b1 t1 + b2 t2 + b3 t3 + b4 t4 = 0
    F4: b1 t1 + 2 b4 t4 - b5 t5 = 0,  b2 t2 + b3 t3 + 2 b4 t4 = 0

Each solver loops over all but one slot per equation and solves for the rest,
so the cost is the product of the free-slot prime counts. ``brute_force`` is
the naive full-box loop used as an oracle.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Sequence

from .arith import is_prime, primes_in
from .errors import InconsistentTargetError

KINDS = ("F1", "F2", "F3", "F4")
DEFAULT_DELTA = 0.1
GAMMA_REL_TOL = 1e-6
_SNAP = 1e-12

Solution = tuple[int, ...]


def worker_count() -> int:
    env = os.environ.get("CUBICSAT_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass(frozen=True)
class ConstraintFamily:
    kind: str
    betas: tuple[int, ...]
    alpha: Fraction = Fraction(1, 3)
    two_slot: int = 0

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown family {self.kind!r}")
        n = {"F1": 3, "F2": 3, "F3": 4, "F4": 5}[self.kind]
        if len(self.betas) != n:
            raise ValueError(f"{self.kind} needs {n} betas, got {len(self.betas)}")
        if any(b not in (-1, 1) for b in self.betas):
            raise ValueError(f"betas must be +-1: {self.betas}")
        if self.kind == "F2" and self.two_slot not in (0, 1, 2):
            raise ValueError("two_slot must be 0, 1 or 2")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")

    @property
    def arity(self) -> int:
        return {"F1": 4, "F2": 3, "F3": 4, "F4": 5}[self.kind]

    @property
    def coefficients(self) -> tuple[int, ...]:
        """Signed coefficient row of the linear shapes (F2, F3)."""
        if self.kind == "F2":
            return tuple(b * (2 if j == self.two_slot else 1) for j, b in enumerate(self.betas))
        if self.kind == "F3":
            return self.betas
        raise ValueError(f"{self.kind} has no single coefficient row")

    def matrix(self) -> list[list[int]]:
        if self.kind in ("F2", "F3"):
            return [list(self.coefficients)]
        if self.kind == "F4":
            b1, b2, b3, b4, b5 = self.betas
            return [[b1, 0, 0, 2 * b4, -b5], [0, b2, b3, 2 * b4, 0]]
        raise ValueError("F1 is not linear")

    def exponents(self) -> tuple[Fraction, ...]:
        third = Fraction(1, 3)
        if self.kind == "F1":
            return (Fraction(2, 3), third, third, third)
        if self.kind == "F2":
            return (self.alpha,) * 3
        return (third,) * self.arity

    def sqrt_slots(self) -> tuple[int, ...]:
        return (1, 2, 3) if self.kind == "F1" else ()

    def residuals(self, t: Sequence) -> tuple:
        """Value(s) of the defining relation(s); works on ints and floats."""
        if self.kind == "F1":
            b1, b2, b3 = self.betas
            return (2 * b1 * t[0] + b2 * t[1] ** 2 + b3 * t[2] * t[3],)
        if self.kind == "F4":
            return tuple(sum(a * x for a, x in zip(row, t)) for row in self.matrix())
        return (sum(a * x for a, x in zip(self.coefficients, t)),)

    def relative_residuals(self, t: Sequence[float]) -> tuple[float, ...]:
        if self.kind == "F1":
            b1, b2, b3 = self.betas
            terms = [(2 * b1 * t[0], b2 * t[1] ** 2, b3 * t[2] * t[3])]
        else:
            terms = [[a * x for a, x in zip(row, t)] for row in self.matrix()]
        return tuple(abs(sum(ts)) / max(sum(abs(v) for v in ts), 1e-300) for ts in terms)


def root_scale(B: int, e: Fraction) -> float:
    """B**e, exact when it is an integer (avoids 99.99999999999997 for 1e6**(1/3))."""
    e = Fraction(e)
    approx = float(B) ** float(e)
    n = round(approx)
    if n > 0 and n**e.denominator == B**e.numerator:
        return float(n)
    return approx


@dataclass(frozen=True)
class IntervalFamily:
    """Closed intervals I_j = [g_j (1-d) B^e_j, g_j (1+d) B^e_j].

    Slots in ``sqrt_slots`` use sqrt(1 -+ d) instead of (1 -+ d).
    """

    gammas: tuple[float, ...]
    exponents: tuple[Fraction, ...]
    B: int
    delta: float = DEFAULT_DELTA
    sqrt_slots: tuple[int, ...] = ()
    _primes: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self) -> None:
        if len(self.gammas) != len(self.exponents):
            raise ValueError("gammas and exponents differ in length")
        if any(g <= 0 for g in self.gammas):
            raise ValueError(f"gammas must be positive: {self.gammas}")
        if not 0 <= self.delta < 1:
            raise ValueError(f"delta must lie in [0, 1), got {self.delta}")
        if self.B < 1:
            raise ValueError("B must be a positive integer")

    def __len__(self) -> int:
        return len(self.gammas)

    def bounds(self, j: int) -> tuple[float, float]:
        lo_f, hi_f = 1 - self.delta, 1 + self.delta
        if j in self.sqrt_slots:
            lo_f, hi_f = math.sqrt(lo_f), math.sqrt(hi_f)
        base = self.gammas[j] * root_scale(self.B, self.exponents[j])
        return base * lo_f, base * hi_f

    def int_bounds(self, j: int) -> tuple[int, int]:
        lo, hi = self.bounds(j)
        return math.ceil(lo - _SNAP * abs(lo)), math.floor(hi + _SNAP * abs(hi))

    def contains(self, j: int, n: int) -> bool:
        lo, hi = self.int_bounds(j)
        return lo <= n <= hi

    def integers(self, j: int) -> range:
        lo, hi = self.int_bounds(j)
        return range(max(lo, 0), hi + 1)

    def primes(self, j: int) -> list[int]:
        if j not in self._primes:
            lo, hi = self.int_bounds(j)
            lo = max(lo, 1)
            self._primes[j] = primes_in(lo, hi) if lo <= hi else []
        return self._primes[j]

    def subset(self, slots: Sequence[int]) -> IntervalFamily:
        return IntervalFamily(
            gammas=tuple(self.gammas[s] for s in slots),
            exponents=tuple(self.exponents[s] for s in slots),
            B=self.B,
            delta=self.delta,
            sqrt_slots=tuple(i for i, s in enumerate(slots) if s in self.sqrt_slots),
        )


def family_intervals(fam: ConstraintFamily, gammas: Sequence[float], B: int, delta: float = DEFAULT_DELTA) -> IntervalFamily:
    return IntervalFamily(tuple(float(g) for g in gammas), fam.exponents(), B, delta, fam.sqrt_slots())


def check_gammas(fam: ConstraintFamily, gammas: Sequence[float], tol: float = GAMMA_REL_TOL) -> None:
    rel = fam.relative_residuals(gammas)
    if max(rel) > tol:
        raise InconsistentTargetError(
            f"gammas {tuple(gammas)} violate the {fam.kind} relation (relative residual {max(rel):.3g})"
        )


def _prime_in(ivals: IntervalFamily, j: int, v: int) -> bool:
    return v > 0 and ivals.contains(j, v) and is_prime(v)


def _outer(ivals: IntervalFamily, j: int, outer: tuple[int, int] | None) -> list[int]:
    ps = ivals.primes(j)
    if outer is None:
        return ps
    return [p for p in ps if outer[0] <= p <= outer[1]]


def _solve_linear(fam: ConstraintFamily, ivals: IntervalFamily, outer) -> list[Solution]:
    coeffs = fam.coefficients
    n = len(coeffs)
    # solve for the last slot with a unit coefficient; the rest are looped over
    solved = max(j for j in range(n) if abs(coeffs[j]) == 1)
    free = [j for j in range(n) if j != solved]
    lists = [_outer(ivals, free[0], outer)] + [ivals.primes(j) for j in free[1:]]
    c = coeffs[solved]
    out = []
    for combo in itertools.product(*lists):
        rest = sum(coeffs[j] * p for j, p in zip(free, combo))
        v = -rest * c  # c = +-1
        if _prime_in(ivals, solved, v):
            t = [0] * n
            for j, p in zip(free, combo):
                t[j] = p
            t[solved] = v
            out.append(tuple(t))
    out.sort()
    return out


def solve_F2(fam: ConstraintFamily, ivals: IntervalFamily, outer: tuple[int, int] | None = None) -> list[Solution]:
    """All prime triples in I1 x I2 x I3 on the F2 line, sorted."""
    _require(fam, ivals, "F2")
    return _solve_linear(fam, ivals, outer)


def solve_F3(fam: ConstraintFamily, ivals: IntervalFamily, outer: tuple[int, int] | None = None) -> list[Solution]:
    _require(fam, ivals, "F3")
    return _solve_linear(fam, ivals, outer)


def solve_F4(fam: ConstraintFamily, ivals: IntervalFamily, outer: tuple[int, int] | None = None) -> list[Solution]:
    """Both F4 relations: (t2, t3) -> t4 from the second row, then t1 -> t5 from the first."""
    _require(fam, ivals, "F4")
    b1, b2, b3, b4, b5 = fam.betas
    p1s = ivals.primes(0)
    out = []
    for p2 in _outer(ivals, 1, outer):
        for p3 in ivals.primes(2):
            s = b2 * p2 + b3 * p3
            if s % 2:
                continue
            p4 = -s // 2 * b4
            if not _prime_in(ivals, 3, p4):
                continue
            for p1 in p1s:
                p5 = (b1 * p1 + 2 * b4 * p4) * b5
                if _prime_in(ivals, 4, p5):
                    out.append((p1, p2, p3, p4, p5))
    out.sort()
    return out


def solve_F1(fam: ConstraintFamily, ivals: IntervalFamily, outer: tuple[int, int] | None = None) -> list[Solution]:
    """Loop over (t2, t3, t4) and read t1 off 2 b1 t1 = -(b2 t2^2 + b3 t3 t4)."""
    _require(fam, ivals, "F1")
    b1, b2, b3 = fam.betas
    p3s, p4s = ivals.primes(2), ivals.primes(3)
    out = []
    for p2 in _outer(ivals, 1, outer):
        sq = b2 * p2 * p2
        for p3 in p3s:
            for p4 in p4s:
                s = sq + b3 * p3 * p4
                if s % 2:
                    continue
                p1 = -s // 2 * b1
                if _prime_in(ivals, 0, p1):
                    out.append((p1, p2, p3, p4))
    out.sort()
    return out


_SOLVERS: dict[str, Callable] = {"F1": solve_F1, "F2": solve_F2, "F3": solve_F3, "F4": solve_F4}
_OUTER_SLOT = {"F1": 1, "F2": 0, "F3": 0, "F4": 1}


def _require(fam: ConstraintFamily, ivals: IntervalFamily, kind: str) -> None:
    if fam.kind != kind:
        raise ValueError(f"expected an {kind} family, got {fam.kind}")
    if len(ivals) != fam.arity:
        raise ValueError(f"{kind} needs {fam.arity} intervals, got {len(ivals)}")
    check_gammas(fam, ivals.gammas)


def _solve_chunk(args) -> list[Solution]:
    fam, ivals, outer = args
    return _SOLVERS[fam.kind](fam, ivals, outer)


def outer_slot(fam: ConstraintFamily) -> int:
    if fam.kind == "F2":
        coeffs = fam.coefficients
        solved = max(j for j in range(3) if abs(coeffs[j]) == 1)
        return min(j for j in range(3) if j != solved)
    return _OUTER_SLOT[fam.kind]


def partition_outer(fam: ConstraintFamily, ivals: IntervalFamily, parts: int) -> list[tuple[int, int]]:
    """Split the outermost loop's prime list into ``parts`` contiguous ranges."""
    ps = ivals.primes(outer_slot(fam))
    if not ps:
        return []
    parts = max(1, min(parts, len(ps)))
    size = math.ceil(len(ps) / parts)
    return [(ps[i], ps[min(i + size, len(ps)) - 1]) for i in range(0, len(ps), size)]


def solve(fam: ConstraintFamily, ivals: IntervalFamily, workers: int = 1) -> list[Solution]:
    """Dispatch to the family solver; ``workers > 1`` splits the outer loop over processes.

    The merged output is sorted, so it does not depend on the worker count.
    """
    if workers <= 1:
        return _SOLVERS[fam.kind](fam, ivals)
    chunks = partition_outer(fam, ivals, workers)
    if len(chunks) <= 1:
        return _SOLVERS[fam.kind](fam, ivals)
    with ProcessPoolExecutor(max_workers=workers) as ex:
        parts = list(ex.map(_solve_chunk, [(fam, ivals, c) for c in chunks]))
    return sorted(itertools.chain.from_iterable(parts))


def brute_force(fam: ConstraintFamily, ivals: IntervalFamily) -> list[Solution]:
    """Naive oracle: every prime tuple in the box, kept when all residuals vanish."""
    lists = [ivals.primes(j) for j in range(fam.arity)]
    return sorted(t for t in itertools.product(*lists) if not any(fam.residuals(t)))


def weighted_count(solutions: Sequence[Solution], weight: str = "log") -> float:
    """Sum of prod(log p) over solutions (``log``) or their number (``unit``)."""
    if weight == "unit":
        return float(len(solutions))
    if weight != "log":
        raise ValueError(f"weight must be 'log' or 'unit', got {weight!r}")
    return math.fsum(math.prod(math.log(p) for p in sol) for sol in solutions)
