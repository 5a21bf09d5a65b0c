"""
Limit objects of the circle-method and linear-equations-in-primes counts.

* ``A_of_q`` and ``singular_series``: the singular series of
  2 b1 p1 + b2 p2^2 + b3 p3 p4 = 0 as a sum over q and as an Euler product.
* ``count_J`` / ``verify_r1_asymptotic``: the integer solution count J(B) and the
  comparison R1(B) ~ J(B) * S on actual prime solutions.
* ``local_density`` / ``archimedean_factor``: the p-adic and archimedean
  factors in the asymptotic for prime solutions of a linear system.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .arith import euler_phi, is_prime, mobius, mobius_phi_table, ramanujan_sum, small_primes
from .solvers import ConstraintFamily, IntervalFamily, check_gammas, solve, solve_F1, weighted_count

DEFAULT_P0 = 10**5
MAX_DENSITY_PRIME = 97


# ---------------------------------------------------------------------------
# singular series
# ---------------------------------------------------------------------------


def A_of_q(q: int, beta1: int = 1, beta2: int = 1) -> Fraction:
    """Exact value of the q-th singular-series term.

    The h1-sum is the Ramanujan sum c_q(2 b1 a), which for a unit a equals
    c_q(2); swapping the a- and h2-sums turns the rest into sum_h2 c_q(b2 h2^2).
    Everything is integer arithmetic, so the result is an exact rational.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    mu = mobius(q)
    if mu == 0:
        return Fraction(0)
    phi = euler_phi(q)
    c_lin = ramanujan_sum(q, 2 * beta1)
    c_quad = sum(ramanujan_sum(q, beta2 * h * h) for h in range(1, q + 1) if math.gcd(h, q) == 1)
    return Fraction(mu * c_lin * c_quad, phi**3)


def A_of_q_closed(q: int) -> Fraction:
    """mu(q)^2 c_q(2) / phi(q)^2 with c_q(2) = mu(q) or mu(q/2)."""
    mu = mobius(q)
    if mu == 0:
        return Fraction(0)
    c = mu if q % 2 else mobius(q // 2)
    return Fraction(c, euler_phi(q) ** 2)


def A_of_q_numeric(q: int, beta1: int = 1, beta2: int = 1) -> complex:
    """Direct complex evaluation of the triple sum (cross-check only)."""
    mu = mobius(q)
    units = np.array([h for h in range(1, q + 1) if math.gcd(h, q) == 1], dtype=np.int64)
    total = 0j
    for a in units:
        s1 = np.exp(2j * np.pi * ((2 * beta1 * a * units) % q) / q).sum()
        s2 = np.exp(2j * np.pi * ((beta2 * a * units * units) % q) / q).sum()
        total += s1 * s2
    return mu * total / euler_phi(q) ** 3


@dataclass(frozen=True)
class SeriesValue:
    P: int
    S_product: float
    S_partial_sum: float

    @property
    def diff(self) -> float:
        return self.S_partial_sum - self.S_product

    def as_dict(self) -> dict:
        return {"P": self.P, "S_product": self.S_product, "S_partial_sum": self.S_partial_sum, "diff": self.diff}


def euler_product(P: int) -> float:
    """2 * prod_{2 < p <= P} (1 - 1/(p-1)^2)."""
    if P < 2:
        raise ValueError("P must be >= 2")
    ps = small_primes(P)
    ps = ps[ps > 2].astype(np.float64)
    return float(2.0 * np.prod(1.0 - 1.0 / (ps - 1.0) ** 2))


def partial_sum(P: int) -> float:
    """sum_{q <= P} A(q), summed in ascending q."""
    mu, phi = mobius_phi_table(P)
    q = np.arange(P + 1)
    c = np.where(q % 2 == 1, mu, mu[q // 2])
    terms = np.zeros(P + 1)
    terms[1:] = (mu[1:] ** 2 * c[1:]) / phi[1:].astype(np.float64) ** 2
    return math.fsum(terms[1:].tolist())


@lru_cache(maxsize=32)
def singular_series(P: int = DEFAULT_P0) -> SeriesValue:
    return SeriesValue(P, euler_product(P), partial_sum(P))


# ---------------------------------------------------------------------------
# J(B) and the R1 ~ J * S comparison
# ---------------------------------------------------------------------------


def count_J(fam: ConstraintFamily, ivals: IntervalFamily) -> int:
    """Integer solutions of 2 b1 m1 + b2 m2^2 + b3 m3 m4 = 0 with m_j in I_j."""
    if fam.kind != "F1":
        raise ValueError("count_J needs an F1 family")
    b1, b2, b3 = fam.betas
    lo1, hi1 = ivals.int_bounds(0)
    m3s = np.arange(ivals.int_bounds(2)[0], ivals.int_bounds(2)[1] + 1, dtype=np.int64)
    m4s = np.arange(ivals.int_bounds(3)[0], ivals.int_bounds(3)[1] + 1, dtype=np.int64)
    if len(m3s) == 0 or len(m4s) == 0 or lo1 > hi1:
        return 0
    cross = np.multiply.outer(m3s, m4s).ravel() * b3
    total = 0
    for m2 in ivals.integers(1):
        s = cross + b2 * m2 * m2
        even = s[s % 2 == 0]
        m1 = -(even // 2) * b1
        total += int(np.count_nonzero((m1 >= lo1) & (m1 <= hi1)))
    return total


@dataclass(frozen=True)
class R1Record:
    B: int
    R1: float
    J: int
    S: float
    ratio: float | None
    solutions: int

    @property
    def undefined(self) -> bool:
        return self.ratio is None

    def as_dict(self) -> dict:
        return {"B": self.B, "R1": self.R1, "J": self.J, "S": self.S, "ratio": self.ratio,
                "solutions": self.solutions, "undefined": self.undefined}


CANONICAL_F1 = {"gammas": (1.0, 1.0, 1.0, 1.0), "betas": (-1, 1, 1), "delta": 0.1}


def verify_r1_asymptotic(
    B: int,
    gammas: Sequence[float] = CANONICAL_F1["gammas"],
    betas: Sequence[int] = CANONICAL_F1["betas"],
    delta: float = CANONICAL_F1["delta"],
    P0: int = DEFAULT_P0,
) -> R1Record:
    """R1 (log-weighted prime solutions) against J(B) times the singular series."""
    fam = ConstraintFamily("F1", tuple(betas))
    check_gammas(fam, gammas)
    ivals = IntervalFamily(tuple(float(g) for g in gammas), fam.exponents(), B, delta, fam.sqrt_slots())
    sols = solve_F1(fam, ivals)
    R1 = weighted_count(sols, "log")
    J = count_J(fam, ivals)
    S = singular_series(P0).S_product
    ratio = R1 / (J * S) if J else None
    return R1Record(B, R1, J, S, ratio, len(sols))


# ---------------------------------------------------------------------------
# linear systems: local and archimedean factors
# ---------------------------------------------------------------------------


def _rank_mod(A: Sequence[Sequence[int]], p: int | None) -> int:
    """Rank over F_p, or over Q when p is None."""
    rows = [[Fraction(v) if p is None else v % p for v in r] for r in A]
    rank, ncols = 0, len(rows[0]) if rows else 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = 1 / rows[rank][c] if p is None else pow(rows[rank][c], -1, p)
        rows[rank] = [(v * inv) if p is None else (v * inv) % p for v in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [(a - f * b) if p is None else (a - f * b) % p for a, b in zip(rows[i], rows[rank])]
        rank += 1
    return rank


def _row_space_has_short_vector(A: Sequence[Sequence[int]]) -> bool:
    """True when some nonzero rational combination of rows has <= 2 nonzero entries.

    Such a vector vanishes on >= t-2 coordinates; it exists iff the rows
    restricted to some set of t-2 columns have rank < s.
    """
    s, t = len(A), len(A[0])
    if t - 2 < s:
        return True
    for cols in itertools.combinations(range(t), t - 2):
        sub = [[row[c] for c in cols] for row in A]
        if _rank_mod(sub, None) < s:
            return True
    return False


@dataclass(frozen=True)
class LinearSystem:
    """A x = b with an optional box K (one closed real interval per coordinate)."""

    matrix: tuple[tuple[int, ...], ...]
    offset: tuple[int, ...]
    box: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self) -> None:
        s = len(self.matrix)
        if s == 0 or len(self.offset) != s:
            raise ValueError("matrix/offset shape mismatch")
        t = len(self.matrix[0])
        if any(len(r) != t for r in self.matrix) or not s <= t <= 5:
            raise ValueError("need an s x t matrix with s <= t <= 5")
        if self.box is not None and len(self.box) != t:
            raise ValueError("box must have one interval per column")

    @property
    def s(self) -> int:
        return len(self.matrix)

    @property
    def t(self) -> int:
        return len(self.matrix[0])

    def is_nondegenerate(self) -> bool:
        return _rank_mod(self.matrix, None) == self.s and not _row_space_has_short_vector(self.matrix)

    @classmethod
    def from_family(cls, fam: ConstraintFamily, ivals: IntervalFamily | None = None) -> LinearSystem:
        A = tuple(tuple(r) for r in fam.matrix())
        box = None
        if ivals is not None:
            box = tuple(ivals.bounds(j) for j in range(len(ivals)))
        return cls(A, (0,) * len(A), box)


@dataclass(frozen=True)
class LocalDensity:
    p: int
    value: float
    count: int  # unit solutions mod p (or lattice classes mod p on the fallback path)
    method: str  # "residue" or "lattice"
    flagged: bool = False


def _pivots_mod(A, p) -> list[int] | None:
    """Columns of an s x s submatrix invertible mod p (first found), or None."""
    s, t = len(A), len(A[0])
    for cols in itertools.combinations(range(t), s):
        if _rank_mod([[r[c] for c in cols] for r in A], p) == s:
            return list(cols)
    return None


def _inverse_mod(M: list[list[int]], p: int) -> list[list[int]]:
    n = len(M)
    aug = [[v % p for v in row] + [int(i == j) for j in range(n)] for i, row in enumerate(M)]
    for c in range(n):
        piv = next(i for i in range(c, n) if aug[i][c] % p)
        aug[c], aug[piv] = aug[piv], aug[c]
        inv = pow(aug[c][c], -1, p)
        aug[c] = [(v * inv) % p for v in aug[c]]
        for i in range(n):
            if i != c and aug[i][c]:
                f = aug[i][c]
                aug[i] = [(a - f * b) % p for a, b in zip(aug[i], aug[c])]
    return [row[n:] for row in aug]


def unit_solutions_mod_p(sys: LinearSystem, p: int) -> int:
    """#{x in (Z/p)^* ^t : A x = b mod p}, enumerating the t - s free unit coordinates.

    Requires A to have full rank mod p.
    """
    A, b = [list(r) for r in sys.matrix], list(sys.offset)
    piv = _pivots_mod(A, p)
    if piv is None:
        raise ValueError(f"matrix is not of full rank mod {p}")
    free = [c for c in range(sys.t) if c not in piv]
    Minv = np.array(_inverse_mod([[r[c] for c in piv] for r in A], p), dtype=np.int64)
    units = np.arange(1, p, dtype=np.int64)
    if free:
        grids = np.meshgrid(*([units] * len(free)), indexing="ij")
        X = np.stack([g.ravel() for g in grids], axis=1)  # (n, t-s)
        F = np.array([[r[c] for c in free] for r in A], dtype=np.int64)  # (s, t-s)
        rhs = (np.array(b, dtype=np.int64)[None, :] - X @ F.T) % p
    else:
        rhs = (np.array(b, dtype=np.int64) % p)[None, :]
    P = (rhs @ Minv.T) % p
    return int(np.count_nonzero(np.all(P != 0, axis=1)))


def unit_solutions_closed_form(sys: LinearSystem, p: int) -> int:
    """Same count by orthogonality of additive characters.

    N = p^-s sum_y e(-b.y/p) prod_i S((A^T y)_i), with S(0) = p-1 and S(c) = -1
    otherwise. The product depends only on the line through y, and summing the
    phase over the line gives p-1 or -1, so the whole sum is an integer.
    """
    A, b = sys.matrix, sys.offset
    s, t = sys.s, sys.t
    total = (p - 1) ** t
    for y in itertools.product(range(p), repeat=s):
        first = next((v for v in y if v), 0)
        if first != 1:
            continue  # one representative per line through the origin
        w = 1
        for i in range(t):
            c = sum(A[r][i] * y[r] for r in range(s)) % p
            w *= (p - 1) if c == 0 else -1
        phase = (p - 1) if sum(bi * yi for bi, yi in zip(b, y)) % p == 0 else -1
        total += w * phase
    if total % p**s:
        raise ArithmeticError("closed-form count is not an integer")
    return total // p**s


def _integer_kernel(A: Sequence[Sequence[int]]) -> tuple[list[list[int]], list[list[int]], int]:
    """Unimodular column reduction A U = [H | 0].

    Returns (U, H, rank): the trailing t - rank columns of U span the integer kernel.
    """
    s, t = len(A), len(A[0])
    M = [list(r) for r in A]
    U = [[int(i == j) for j in range(t)] for i in range(t)]

    def colop(dst, src, f):
        for r in range(s):
            M[r][dst] -= f * M[r][src]
        for r in range(t):
            U[r][dst] -= f * U[r][src]

    def swap(a, c):
        for r in range(s):
            M[r][a], M[r][c] = M[r][c], M[r][a]
        for r in range(t):
            U[r][a], U[r][c] = U[r][c], U[r][a]

    rank = 0
    for r in range(s):
        if rank >= t:
            break
        while True:
            nz = [c for c in range(rank, t) if M[r][c]]
            if not nz:
                break
            c0 = min(nz, key=lambda c: abs(M[r][c]))
            swap(rank, c0)
            done = True
            for c in range(rank + 1, t):
                if M[r][c]:
                    colop(c, rank, M[r][c] // M[r][rank])
                    if M[r][c]:
                        done = False
            if done:
                break
        if M[r][rank]:
            rank += 1
    H = [row[:rank] for row in M]
    return U, H, rank


def lattice_density(sys: LinearSystem, p: int) -> LocalDensity:
    """Density via the integer solution lattice x = x0 + K z, z mod p.

    Exact for any A (no rank condition mod p); used as the fallback path and
    as an independent check of the residue formula.
    """
    U, H, rank = _integer_kernel(sys.matrix)
    if rank != sys.s:
        raise ValueError("matrix does not have full rank over Q")
    # H is lower-echelon (s x s); solve H y = b over the integers
    y = []
    for r in range(sys.s):
        acc = sys.offset[r] - sum(H[r][c] * y[c] for c in range(len(y)))
        if acc % H[r][r]:
            raise ValueError("b is not in A Z^t")
        y.append(acc // H[r][r])
    x0 = [sum(U[i][c] * y[c] for c in range(sys.s)) for i in range(sys.t)]
    K = [[U[i][c] for c in range(sys.s, sys.t)] for i in range(sys.t)]
    d = sys.t - sys.s
    hits = 0
    for z in itertools.product(range(p), repeat=d):
        if all((x0[i] + sum(K[i][c] * z[c] for c in range(d))) % p for i in range(sys.t)):
            hits += 1
    value = (p / (p - 1)) ** sys.t * hits / p**d
    return LocalDensity(p, value, hits, "lattice", flagged=False)


def local_density(sys: LinearSystem, p: int) -> LocalDensity:
    """alpha_p = (p/(p-1))^t N_p / p^(t-s), N_p = unit solutions of A x = b mod p.

    When A is not of full rank mod p the residue formula does not apply; the
    lattice computation is used instead and the result is flagged.
    """
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if p > MAX_DENSITY_PRIME:
        raise ValueError(f"brute-force densities are capped at p <= {MAX_DENSITY_PRIME}")
    if _rank_mod(sys.matrix, p) < sys.s:
        ld = lattice_density(sys, p)
        return LocalDensity(p, ld.value, ld.count, "lattice", flagged=True)
    n = unit_solutions_mod_p(sys, p)
    value = (p / (p - 1)) ** sys.t * n / p ** (sys.t - sys.s)
    return LocalDensity(p, value, n, "residue")


def archimedean_factor(sys: LinearSystem) -> int:
    """#{x in Z^t cap K : A x = b, x_i >= 0}, looping over the t - s free coordinates."""
    if sys.box is None or any(not (math.isfinite(lo) and math.isfinite(hi)) for lo, hi in sys.box):
        raise ValueError("archimedean factor needs a bounded box")
    ranges = []
    for lo, hi in sys.box:
        a, b = max(math.ceil(lo - 1e-12 * abs(lo)), 0), math.floor(hi + 1e-12 * abs(hi))
        if a > b:
            return 0
        ranges.append((a, b))
    A = [list(map(Fraction, r)) for r in sys.matrix]
    piv = None
    for cols in itertools.combinations(range(sys.t), sys.s):
        if _rank_mod([[r[c] for c in cols] for r in sys.matrix], None) == sys.s:
            piv = list(cols)
            break
    if piv is None:
        raise ValueError("matrix does not have full rank")
    free = [c for c in range(sys.t) if c not in piv]
    Minv = _inverse_q([[A[r][c] for c in piv] for r in range(sys.s)])
    count = 0
    for z in itertools.product(*(range(ranges[c][0], ranges[c][1] + 1) for c in free)):
        rhs = [sys.offset[r] - sum(A[r][c] * v for c, v in zip(free, z)) for r in range(sys.s)]
        xs = [sum(Minv[i][r] * rhs[r] for r in range(sys.s)) for i in range(sys.s)]
        if all(x.denominator == 1 and ranges[c][0] <= x <= ranges[c][1] for x, c in zip(xs, piv)):
            count += 1
    return count


def _inverse_q(M: list[list[Fraction]]) -> list[list[Fraction]]:
    n = len(M)
    aug = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(M)]
    for c in range(n):
        piv = next(i for i in range(c, n) if aug[i][c] != 0)
        aug[c], aug[piv] = aug[piv], aug[c]
        inv = 1 / aug[c][c]
        aug[c] = [v * inv for v in aug[c]]
        for i in range(n):
            if i != c and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[c])]
    return [row[n:] for row in aug]


@dataclass
class LinearPrimeCount:
    """Direct prime count R against alpha_inf * prod_{p <= P} alpha_p."""

    kind: str
    B: int
    R: float
    solutions: int
    alpha_inf: int
    alpha_prod: float
    densities: dict[int, float] = field(default_factory=dict)

    @property
    def predicted(self) -> float:
        return self.alpha_inf * self.alpha_prod

    @property
    def ratio(self) -> float | None:
        return self.R / self.predicted if self.predicted else None


def linear_prime_count(fam: ConstraintFamily, ivals: IntervalFamily, P: int = MAX_DENSITY_PRIME) -> LinearPrimeCount:
    """R2/R3/R4 by enumeration next to the local-global prediction."""
    sols = solve(fam, ivals)
    sys = LinearSystem.from_family(fam, ivals)
    dens = {int(p): local_density(sys, int(p)).value for p in small_primes(P)}
    return LinearPrimeCount(
        kind=fam.kind,
        B=ivals.B,
        R=weighted_count(sols, "log"),
        solutions=len(sols),
        alpha_inf=archimedean_factor(sys),
        alpha_prod=math.prod(dens.values()),
        densities=dens,
    )
