"""Acceptance criteria 1-8, one test each.

Every test prints a single ``[criterion N] PASS|FAIL ...`` line; the lines are
also collected into the pytest terminal summary. Run on its own with

    pytest tests/test_acceptance.py -v -s
"""

import itertools
import json
import math
import random
import time
from pathlib import Path

import numpy as np
import pytest

from cubicsat.arith import big_omega, product, small_primes
from cubicsat.circle import (
    A_of_q,
    LinearSystem,
    euler_product,
    local_density,
    partial_sum,
    singular_series,
    unit_solutions_closed_form,
    verify_r1_asymptotic,
)
from cubicsat.harness import enumerate_points, reference_curve, verify_table1
from cubicsat.solvers import ConstraintFamily, family_intervals, solve_F1, solve_F2, solve_F3, solve_F4
from cubicsat.surfaces import (
    SURFACE_IDS,
    PrimeAssignment,
    eval_form,
    get_surface,
    parametrize,
    point_values,
    random_assignment,
)
from cubicsat.targets import derive_generic

FIXTURES = json.loads((Path(__file__).parent / "fixtures" / "desk_points.json").read_text())
RESULTS: list[str] = []


def report(n, ok, detail):
    line = f"[criterion {n}] {'PASS' if ok else 'FAIL'} {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


# 1 ------------------------------------------------------------------------


def test_criterion_1_table1_exactness():
    t0 = time.perf_counter()
    res = verify_table1(seed=0, n=500)
    elapsed = time.perf_counter() - t0
    bad = [sid for sid, r in res.items() if not r.passed]
    ok = not bad and len(res) == 8 and all(r.checked == 500 for r in res.values()) and elapsed < 30
    report(1, ok, f"verify-table1: 8 x 500 assignments, failures={bad or 'none'}, {elapsed:.1f}s (< 30s)")


# 2 ------------------------------------------------------------------------


def test_criterion_2_worked_point():
    a = PrimeAssignment("X1", (1, 1, 1, 1), (19, 3, 5, 11))
    coords = parametrize(a)
    x = tuple(c.value for c in coords)
    ok = x == (165, 1083, 1805, 3971) and eval_form("X1", x) == 0 and big_omega(product(coords)) == 12
    report(2, ok, f"X1 worked point -> {x}, form={eval_form('X1', x)}, Omega={big_omega(product(coords))}")


# 3 ------------------------------------------------------------------------


def test_criterion_3_singular_series():
    singular_series.cache_clear()
    t0 = time.perf_counter()
    diff = abs(partial_sum(2000) - euler_product(2000))
    s = singular_series(10**5).S_product
    elapsed = time.perf_counter() - t0
    exact = A_of_q(2) == 1 and A_of_q(3) == -0.25
    ok = diff <= 1e-3 and exact and abs(s - 1.32032) <= 1e-3 and elapsed < 5
    report(3, ok, f"|sum - product| at P=2000 = {diff:.3g}, A(2)={A_of_q(2)}, A(3)={A_of_q(3)}, "
                  f"S(1e5)={s:.8f}, {elapsed:.2f}s (< 5s)")


# 4 ------------------------------------------------------------------------


def test_criterion_4_r1_desk_check():
    t0 = time.perf_counter()
    recs = {B: verify_r1_asymptotic(B) for B in (10**5, 10**6, 10**7)}
    elapsed = time.perf_counter() - t0
    ratios = {B: r.ratio for B, r in recs.items()}
    main = ratios[10**6]
    ok_main = main is not None and 0.5 <= main <= 1.5
    ok_all = all(v is not None and 0.4 <= v <= 1.6 for v in ratios.values())
    shown = ", ".join(
        f"B={B:.0e}: ratio={'undef' if r.ratio is None else f'{r.ratio:.3f}'} (J={r.J}, sols={r.solutions})"
        for B, r in recs.items()
    )
    report(4, ok_main and ok_all and elapsed < 300, f"{shown}; {elapsed:.1f}s")


# 5 ------------------------------------------------------------------------


def _is_prime_plain(n):
    return n > 1 and all(n % d for d in range(2, math.isqrt(n) + 1))


def _naive(fam, ivals):
    lists = [[n for n in range(max(lo, 2), hi + 1) if _is_prime_plain(n)]
             for lo, hi in (ivals.int_bounds(j) for j in range(fam.arity))]
    out = set()
    for t in itertools.product(*lists):
        if fam.kind == "F1":
            b1, b2, b3 = fam.betas
            if 2 * b1 * t[0] + b2 * t[1] ** 2 + b3 * t[2] * t[3] == 0:
                out.add(t)
        elif all(sum(a * x for a, x in zip(row, t)) == 0 for row in fam.matrix()):
            out.add(t)
    return out


ORACLE_CASES = [
    (solve_F2, ConstraintFamily("F2", (1, -1, -1)), (1, 1, 1), 10**4, 0.4),
    (solve_F2, ConstraintFamily("F2", (1, 1, -1), two_slot=2), (1, 1, 1), 10**4, 0.4),
    (solve_F3, ConstraintFamily("F3", (1, 1, -1, -1)), (1, 1, 1, 1), 10**4, 0.4),
    (solve_F3, ConstraintFamily("F3", (-1, 1, 1, 1)), (1.9, 0.3, 0.5, 1.1), 10**4, 0.4),
    (solve_F4, ConstraintFamily("F4", (1, 1, 1, -1, -1)), (1, 1, 1, 1, 1), 10**4, 0.4),
    (solve_F1, ConstraintFamily("F1", (-1, 1, 1)), (1, 1, 1, 1), 10**5, 0.3),
]


def test_criterion_5_solver_oracle():
    t0 = time.perf_counter()
    mismatches, sizes = [], []
    for solver, fam, gammas, B, delta in ORACLE_CASES:
        ivals = family_intervals(fam, gammas, B, delta)
        got = solver(fam, ivals)
        want = _naive(fam, ivals)
        sizes.append(len(want))
        if set(got) != want or len(got) != len(want):
            mismatches.append((fam.kind, fam.betas))
    elapsed = time.perf_counter() - t0
    report(5, not mismatches and elapsed < 60,
           f"{len(ORACLE_CASES)} cases, solution counts {sizes}, mismatches={mismatches or 'none'}, {elapsed:.1f}s (< 60s)")


# 6 ------------------------------------------------------------------------

DENSITY_SYSTEMS = {
    "F2": LinearSystem(((2, -1, -1),), (0,)),
    "F3": LinearSystem(((-1, 1, 1, 1),), (0,)),
    "F4": LinearSystem(((1, 0, 0, -2, 1), (0, 1, 1, -2, 0)), (0, 0)),
}


def _alpha_by_cases(sys, p):
    """Average of prod Lambda_p(x_i) over all x mod p (p^t cases) with A x = 0."""
    sols = hits = 0
    for x in itertools.product(range(p), repeat=sys.t):
        if all(sum(a * v for a, v in zip(row, x)) % p == 0 for row in sys.matrix):
            sols += 1
            hits += all(x)
    return (p / (p - 1)) ** sys.t * hits / sols


def _exhaustive_units(sys, p):
    """Count unit vectors mod p with A x = b, looping over every unit tuple."""
    A = np.array(sys.matrix, dtype=np.int64)
    b = np.array(sys.offset, dtype=np.int64) % p
    units = np.arange(1, p, dtype=np.int64)
    rest = np.stack([g.ravel() for g in np.meshgrid(*([units] * (sys.t - 1)), indexing="ij")], axis=1)
    total = 0
    for first in units:
        X = np.concatenate([np.full((len(rest), 1), first), rest], axis=1)
        total += int(np.count_nonzero(np.all((X @ A.T) % p == b, axis=1)))
    return total


def test_criterion_6_local_densities():
    t0 = time.perf_counter()
    a2_f3 = _alpha_by_cases(LinearSystem(((1, 1, 1, 1),), (0,)), 2)  # 16 cases
    a2_f2 = _alpha_by_cases(LinearSystem(((2, 1, 1),), (0,)), 2)  # 8 cases
    lib_ok = (local_density(LinearSystem(((1, 1, 1, 1),), (0,)), 2).value == 2.0
              and local_density(LinearSystem(((2, 1, 1),), (0,)), 2).value == 2.0)
    worst = 0.0
    bound_fail = []
    for name, sys in DENSITY_SYSTEMS.items():
        for p in (int(q) for q in small_primes(97) if q >= 11):
            dev = abs(local_density(sys, p).value - 1)
            worst = max(worst, dev * p)
            if dev > 10 / p:
                bound_fail.append((name, p))
    count_fail = []
    for name, sys in DENSITY_SYSTEMS.items():
        for p in (int(q) for q in small_primes(31)):
            if unit_solutions_closed_form(sys, p) != _exhaustive_units(sys, p):
                count_fail.append((name, p))
    elapsed = time.perf_counter() - t0
    ok = a2_f3 == 2 and a2_f2 == 2 and lib_ok and not bound_fail and not count_fail and elapsed < 30
    report(6, ok, f"alpha_2(F3)={a2_f3:g}, alpha_2(F2)={a2_f2:g}, max p*|alpha_p-1| over 11<=p<=97 = {worst:.3f} "
                  f"(<= 10), closed-form mismatches={count_fail or 'none'}, {elapsed:.1f}s (< 30s)")


# 7 ------------------------------------------------------------------------


def test_criterion_7_desk_positivity():
    eps = 0.3
    lines, ok = [], True
    w = FIXTURES["X1_worked"]
    m = enumerate_points("X1", w["xi"], eps, w["B_star"], 12, keep_points=True)
    worked_ok = tuple(w["point"]) in m.points
    ok &= worked_ok
    lines.append(f"X1 worked B*={w['B_star']}: M={m.count}")
    for sid in SURFACE_IDS:
        v = FIXTURES[sid]
        r = get_surface(sid).r_bound
        m_star = enumerate_points(sid, v["xi"], eps, v["B_star"], r).count
        norms = [enumerate_points(sid, v["xi"], eps, B, r).count / reference_curve(sid, B) for B in v["B_grid"]]
        med = sorted(norms)[1]
        spread_ok = med > 0 and all(med / 4 <= n <= 4 * med for n in norms)
        ok &= m_star >= 1 and spread_ok
        lines.append(f"{sid} M(B*)={m_star} grid {' '.join(f'{n:.3f}' for n in norms)}")
    report(7, ok, "; ".join(lines))


# 8 ------------------------------------------------------------------------


def test_criterion_8_round_trip():
    t0 = time.perf_counter()
    B = 10**9
    worst, beta_fail = 0.0, []
    for sid in SURFACE_IDS:
        spec = get_surface(sid)
        rng = random.Random(f"acceptance:{sid}")
        for _ in range(100):
            a = random_assignment(sid, rng)
            xi = [v / B for v in point_values(a)]
            d = derive_generic(sid, xi)
            if d.betas != a.betas:
                beta_fail.append((sid, a.betas))
            for g, p, e in zip(d.gammas, a.primes, spec.exponents):
                want = p / B ** float(e)
                worst = max(worst, abs(g - want) / want)
    elapsed = time.perf_counter() - t0
    ok = not beta_fail and worst <= 1e-6 and elapsed < 10
    report(8, ok, f"800 assignments, beta mismatches={len(beta_fail)}, max rel gamma error={worst:.2e} "
                  f"(<= 1e-6), {elapsed:.1f}s (< 10s)")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v", "-s"]))
