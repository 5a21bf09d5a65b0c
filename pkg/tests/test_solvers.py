import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cubicsat.errors import InconsistentTargetError
from cubicsat.solvers import (
    ConstraintFamily,
    IntervalFamily,
    brute_force,
    family_intervals,
    partition_outer,
    root_scale,
    solve,
    solve_F1,
    solve_F2,
    solve_F3,
    solve_F4,
    weighted_count,
)

SOLVERS = {"F1": solve_F1, "F2": solve_F2, "F3": solve_F3, "F4": solve_F4}


def plain_primes(lo, hi):
    lo = max(lo, 2)
    return [n for n in range(lo, hi + 1) if all(n % d for d in range(2, math.isqrt(n) + 1))]


def oracle(fam, ivals):
    """Full-box loop with its own primality test, independent of the sieve."""
    lists = [plain_primes(*ivals.int_bounds(j)) for j in range(fam.arity)]
    out = set()
    for t in itertools.product(*lists):
        if fam.kind == "F1":
            b1, b2, b3 = fam.betas
            ok = 2 * b1 * t[0] + b2 * t[1] ** 2 + b3 * t[2] * t[3] == 0
        else:
            ok = all(sum(a * x for a, x in zip(row, t)) == 0 for row in fam.matrix())
        if ok:
            out.add(t)
    return out


# ---- examples ----------------------------------------------------------------


def test_f2_example_contains_5_3_7():
    fam = ConstraintFamily("F2", (1, -1, -1))
    ivals = family_intervals(fam, (0.5, 0.3, 0.7), 1000, 0.3)
    assert (5, 3, 7) in solve_F2(fam, ivals)


def test_f2_empty_interval():
    fam = ConstraintFamily("F2", (1, -1, -1))
    # I_2 = [24, 26] at B = 1000 holds no prime
    ivals = family_intervals(fam, (2.55, 2.5, 2.6), 1000, 0.04)
    assert ivals.primes(1) == []
    assert solve_F2(fam, ivals) == []


def test_f3_example_contains_worked_quadruple():
    fam = ConstraintFamily("F3", (1, 1, 1, -1))
    ivals = family_intervals(fam, (0.3, 0.5, 1.1, 1.9), 1000, 0.2)
    assert (3, 5, 11, 19) in solve_F3(fam, ivals)


def test_f3_empty_interval():
    fam = ConstraintFamily("F3", (1, 1, 1, -1))
    ivals = family_intervals(fam, (0.9, 0.25, 0.25, 1.4), 1000, 0.02)
    assert ivals.primes(1) == []
    assert solve_F3(fam, ivals) == []


def test_f4_only_exact_solutions():
    fam = ConstraintFamily("F4", (1, 1, 1, -1, -1))
    ivals = family_intervals(fam, (1, 1, 1, 1, 1), 10**6, 0.3)
    sols = solve_F4(fam, ivals)
    assert sols
    for t in sols:
        assert fam.residuals(t) == (0, 0)
    # solver contract is equation-only: repeated primes may appear
    assert any(len(set(t)) < 5 for t in sols)


def test_f1_excludes_composite_p1():
    fam = ConstraintFamily("F1", (-1, 1, 1))
    assert 2 * 22 == 3**2 + 5 * 7 and 2 * 32 == 3**2 + 5 * 11
    ivals = family_intervals(fam, (1, 1, 1, 1), 10**5, 0.9)
    sols = solve_F1(fam, ivals)
    assert not any(t[1:] in ((3, 5, 7), (3, 5, 11)) for t in sols)
    assert all(2 * t[0] == t[1] ** 2 + t[2] * t[3] for t in sols)


def test_weighted_count_examples():
    assert weighted_count([]) == 0
    assert weighted_count([(5, 3, 7)], "log") == pytest.approx(math.log(5) * math.log(3) * math.log(7))
    assert weighted_count([(5, 3, 7)] * 4, "unit") == 4
    with pytest.raises(ValueError):
        weighted_count([], "bogus")


def test_inconsistent_gammas():
    fam = ConstraintFamily("F3", (1, 1, 1, -1))
    with pytest.raises(InconsistentTargetError):
        solve_F3(fam, family_intervals(fam, (1, 1, 1, 1), 10**4))


def test_family_validation():
    with pytest.raises(ValueError):
        ConstraintFamily("F5", (1, 1, 1))
    with pytest.raises(ValueError):
        ConstraintFamily("F2", (1, 1))
    with pytest.raises(ValueError):
        ConstraintFamily("F2", (1, 1, 2))
    with pytest.raises(ValueError):
        ConstraintFamily("F2", (1, 1, 1), alpha=Fraction(1))


def test_root_scale_exact():
    assert root_scale(10**6, Fraction(1, 3)) == 100.0
    assert root_scale(10**6, Fraction(2, 3)) == 10000.0
    assert root_scale(2**21, Fraction(1, 7)) == 8.0


def test_sqrt_slot_bounds():
    fam = ConstraintFamily("F1", (-1, 1, 1))
    ivals = family_intervals(fam, (1, 1, 1, 1), 10**6, 0.21)
    assert ivals.bounds(0) == pytest.approx((7900.0, 12100.0))
    lo, hi = ivals.bounds(1)
    assert lo == pytest.approx(math.sqrt(0.79) * 100) and hi == pytest.approx(110.0)


# ---- oracle equivalence --------------------------------------------------------

DESK_CASES = [
    ("F2", (1, -1, -1), (1, 1, 1), 10**4, 0.4, 0),
    ("F2", (1, 1, -1), (1, 1, 1), 10**4, 0.4, 2),
    ("F2", (-1, 1, 1), (3, 1, 1), 10**4, 0.4, 1),
    ("F3", (1, 1, -1, -1), (1, 1, 1, 1), 10**4, 0.4, 0),
    ("F3", (-1, 1, 1, 1), (1.9, 0.3, 0.5, 1.1), 10**4, 0.4, 0),
    ("F4", (1, 1, 1, -1, -1), (1, 1, 1, 1, 1), 10**4, 0.4, 0),
    ("F4", (1, -1, 1, 1, 1), (1, 3, 1, 1, 3), 10**4, 0.4, 0),
    ("F1", (-1, 1, 1), (1, 1, 1, 1), 10**5, 0.3, 0),
    ("F1", (1, -1, 1), (1, 2, 1, 2), 10**5, 0.3, 0),
]


@pytest.mark.parametrize("kind,betas,gammas,B,delta,two", DESK_CASES)
def test_solver_matches_oracle(kind, betas, gammas, B, delta, two):
    fam = ConstraintFamily(kind, betas, two_slot=two)
    ivals = family_intervals(fam, gammas, B, delta)
    got = SOLVERS[kind](fam, ivals)
    assert got == sorted(got)
    assert len(set(got)) == len(got)
    assert set(got) == oracle(fam, ivals)
    assert got == brute_force(fam, ivals)


def f2_gammas(b, two, g_free):
    """Gammas satisfying the F2 relation: solve for the last unit-coefficient slot."""
    coeffs = [bj * (2 if j == two else 1) for j, bj in enumerate(b)]
    solved = max(j for j in range(3) if abs(coeffs[j]) == 1)
    free = [j for j in range(3) if j != solved]
    g = [0.0] * 3
    for j, v in zip(free, g_free):
        g[j] = v
    g[solved] = -sum(coeffs[j] * g[j] for j in free) / coeffs[solved]
    return g if g[solved] > 0.05 else None


signs = st.sampled_from((-1, 1))


@given(
    b=st.tuples(signs, signs, signs),
    two=st.integers(0, 2),
    g=st.tuples(st.floats(0.2, 2.0), st.floats(0.2, 2.0)),
    B=st.integers(10**3, 10**6),
    delta=st.floats(0.05, 0.5),
)
@settings(max_examples=60, deadline=None)
def test_f2_random_oracle(b, two, g, B, delta):
    gammas = f2_gammas(b, two, g)
    if gammas is None:
        return
    fam = ConstraintFamily("F2", b, two_slot=two)
    ivals = family_intervals(fam, gammas, B, delta)
    assert set(solve_F2(fam, ivals)) == oracle(fam, ivals)


@given(
    b=st.tuples(signs, signs, signs),
    g=st.tuples(st.floats(0.3, 2.0), st.floats(0.3, 2.0), st.floats(0.3, 2.0)),
    B=st.integers(10**3, 3 * 10**5),
    delta=st.floats(0.05, 0.4),
)
@settings(max_examples=40, deadline=None)
def test_f1_random_oracle(b, g, B, delta):
    g2, g3, g4 = g
    g1 = -(b[1] * g2**2 + b[2] * g3 * g4) / (2 * b[0])
    if g1 <= 0.05:
        return
    fam = ConstraintFamily("F1", b)
    ivals = family_intervals(fam, (g1, g2, g3, g4), B, delta)
    assert set(solve_F1(fam, ivals)) == oracle(fam, ivals)


# ---- partition determinism -------------------------------------------------


@pytest.mark.parametrize("kind,betas,gammas,B,delta,two", DESK_CASES)
@pytest.mark.parametrize("parts", [1, 2, 3, 7])
def test_partition_merge_is_identical(kind, betas, gammas, B, delta, two, parts):
    fam = ConstraintFamily(kind, betas, two_slot=two)
    ivals = family_intervals(fam, gammas, B * 100, delta)
    whole = SOLVERS[kind](fam, ivals)
    chunks = partition_outer(fam, ivals, parts)
    merged = sorted(itertools.chain.from_iterable(SOLVERS[kind](fam, ivals, c) for c in chunks))
    assert merged == whole


def test_process_pool_matches_serial():
    fam = ConstraintFamily("F3", (1, 1, -1, -1))
    ivals = family_intervals(fam, (1, 1, 1, 1), 10**7, 0.3)
    assert solve(fam, ivals, workers=3) == solve(fam, ivals, workers=1)


# ---- scaling sanity ---------------------------------------------------------


def test_f2_count_scaling():
    fam = ConstraintFamily("F2", (1, -1, -1))
    ratios = []
    for B in (10**9, 2 * 10**9, 4 * 10**9):
        n = len(solve_F2(fam, family_intervals(fam, (1, 1, 1), B, 0.2)))
        ratios.append(n * math.log(B) ** 3 / B ** (2 / 3))
    med = sorted(ratios)[1]
    assert all(med / 4 <= r <= med * 4 for r in ratios)


def test_interval_family_validation():
    with pytest.raises(ValueError):
        IntervalFamily((1.0,), (Fraction(1, 3), Fraction(1, 3)), 100)
    with pytest.raises(ValueError):
        IntervalFamily((-1.0,), (Fraction(1, 3),), 100)
    with pytest.raises(ValueError):
        IntervalFamily((1.0,), (Fraction(1, 3),), 100, delta=1.0)
