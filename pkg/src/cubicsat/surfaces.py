"""
The eight singular cubic surfaces X1..X8 and their almost-prime constructions.

Each surface carries its defining cubic form (monomial list), the
saturation bound, and a torsor specialization: every coordinate of the
constructed point is a signed monomial ``coeff * prod(beta_s) * prod(p_j^m_j)``
in k distinct odd primes, subject to one (two for X2) polynomial relations.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .arith import FactoredInt, big_omega, gcd4, is_prime, omega_distinct_odd, primes_in, product
from .errors import DistinctnessError, InvalidAssignmentError

Exponents = tuple[int, ...]


@dataclass(frozen=True)
class SignedMonomial:
    """``coeff * prod(betas[i] for i in signs) * prod(p_j ** powers[j])``."""

    coeff: int
    signs: tuple[int, ...]
    powers: Exponents

    def sign_of(self, betas) -> int:
        s = 1
        for i in self.signs:
            s *= betas[i]
        return s

    def value(self, betas, primes) -> int:
        v = self.coeff * self.sign_of(betas)
        for p, m in zip(primes, self.powers):
            if m:
                v *= p**m
        return v

    def real_value(self, betas, reals) -> float:
        v = float(self.coeff * self.sign_of(betas))
        for g, m in zip(reals, self.powers):
            if m:
                v *= g**m
        return v

    def factored(self, betas, primes) -> FactoredInt:
        parts = [FactoredInt.from_int(self.coeff * self.sign_of(betas))]
        parts += [FactoredInt.prime(p) ** m for p, m in zip(primes, self.powers) if m]
        return product(parts)


@dataclass(frozen=True)
class SurfaceSpec:
    id: str
    singularity: str
    equation: str
    form: tuple[tuple[int, tuple[int, int, int, int]], ...]
    r_bound: int
    rtilde_bound: int
    family: str
    exponents: tuple[Fraction, ...]
    coordinate_maps: tuple[SignedMonomial, SignedMonomial, SignedMonomial, SignedMonomial]
    # constraint equations, each a sum of signed monomials equal to 0
    constraints: tuple[tuple[SignedMonomial, ...], ...]
    # (equation index, slot) pairs: slot solved linearly from that equation, in order
    solve_plan: tuple[tuple[int, int], ...]
    # embedding into the solver family: family slot t_i <- prime slot family_slots[i]
    family_slots: tuple[int, ...]
    # family beta i = const * prod(surface betas[j] for j in idx)
    family_betas: tuple[tuple[int, tuple[int, ...]], ...]
    # prime slots outside every constraint; enumerated over their whole interval
    free_slots: tuple[int, ...] = ()
    # slots using sqrt(1 +- delta) endpoints (the 1/3-slots of an F1 family)
    sqrt_slots: tuple[int, ...] = ()
    two_slot: int = 0
    display: str = ""

    @property
    def k(self) -> int:
        return len(self.exponents)

    def family_beta_values(self, betas) -> tuple[int, ...]:
        out = []
        for const, idx in self.family_betas:
            s = const
            for j in idx:
                s *= betas[j]
            out.append(s)
        return tuple(out)

    def omega_tally(self) -> tuple[int, ...]:
        """Per-coordinate prime-factor count of a constructed point."""
        return tuple(
            big_omega(mon.coeff) + sum(mon.powers) for mon in self.coordinate_maps
        )


def _m(coeff: int, signs: tuple[int, ...], powers: Exponents) -> SignedMonomial:
    return SignedMonomial(coeff, signs, powers)


_THIRD = Fraction(1, 3)
_TWO_THIRDS = Fraction(2, 3)
_SEVENTH = Fraction(1, 7)

# x0 (x1 + x2 + x3)^2 expanded
_D4_HEAD = (
    (1, (1, 2, 0, 0)),
    (1, (1, 0, 2, 0)),
    (1, (1, 0, 0, 2)),
    (2, (1, 1, 1, 0)),
    (2, (1, 1, 0, 1)),
    (2, (1, 0, 1, 1)),
)

# beta_1 p_1 + beta_2 p_2 + 2 beta_3 p_3 = 0, shared by X3, X4, X5
_F2_SLOT3 = (
    (
        _m(1, (0,), (1, 0, 0, 0)),
        _m(1, (1,), (0, 1, 0, 0)),
        _m(2, (2,), (0, 0, 1, 0)),
    ),
)
_IDENTITY3 = ((1, (0,)), (1, (1,)), (1, (2,)))

SURFACES: dict[str, SurfaceSpec] = {
    "X1": SurfaceSpec(
        id="X1",
        singularity="D4, first isomorphy class",
        equation="x0*(x1+x2+x3)^2 - x1*x2*x3 = 0",
        form=_D4_HEAD + ((-1, (0, 1, 1, 1)),),
        r_bound=12,
        rtilde_bound=4,
        family="F3",
        exponents=(_THIRD,) * 4,
        coordinate_maps=(
            _m(1, (1, 2, 3), (0, 1, 1, 1)),
            _m(1, (1,), (2, 1, 0, 0)),
            _m(1, (2,), (2, 0, 1, 0)),
            _m(1, (3,), (2, 0, 0, 1)),
        ),
        constraints=(
            (
                _m(1, (1,), (0, 1, 0, 0)),
                _m(1, (2,), (0, 0, 1, 0)),
                _m(1, (3,), (0, 0, 0, 1)),
                _m(-1, (0,), (1, 0, 0, 0)),
            ),
        ),
        solve_plan=((0, 0),),
        family_slots=(0, 1, 2, 3),
        family_betas=((-1, (0,)), (1, (1,)), (1, (2,)), (1, (3,))),
        display="(b2 b3 b4 p2 p3 p4, b2 p1^2 p2, b3 p1^2 p3, b4 p1^2 p4)",
    ),
    "X2": SurfaceSpec(
        id="X2",
        singularity="D4, second isomorphy class",
        equation="x0*(x1+x2+x3)^2 + x1*x2*(x1+x2) = 0",
        form=_D4_HEAD + ((1, (0, 2, 1, 0)), (1, (0, 1, 2, 0))),
        r_bound=13,
        rtilde_bound=5,
        family="F4",
        exponents=(_THIRD,) * 5,
        coordinate_maps=(
            _m(2, (1, 2, 3), (0, 1, 1, 1, 0)),
            _m(1, (1,), (2, 1, 0, 0, 0)),
            _m(1, (2,), (2, 0, 1, 0, 0)),
            _m(1, (4,), (2, 0, 0, 0, 1)),
        ),
        constraints=(
            (
                _m(1, (0,), (1, 0, 0, 0, 0)),
                _m(2, (3,), (0, 0, 0, 1, 0)),
                _m(-1, (4,), (0, 0, 0, 0, 1)),
            ),
            (
                _m(1, (1,), (0, 1, 0, 0, 0)),
                _m(1, (2,), (0, 0, 1, 0, 0)),
                _m(2, (3,), (0, 0, 0, 1, 0)),
            ),
        ),
        solve_plan=((1, 3), (0, 4)),
        family_slots=(0, 1, 2, 3, 4),
        family_betas=((1, (0,)), (1, (1,)), (1, (2,)), (1, (3,)), (1, (4,))),
        display="(2 b2 b3 b4 p2 p3 p4, b2 p1^2 p2, b3 p1^2 p3, p1^2 (b1 p1 + 2 b4 p4))",
    ),
    "X3": SurfaceSpec(
        id="X3",
        singularity="A3+2A1",
        equation="x3^2*(x1+x2) + x0*x1*x2 = 0",
        form=((1, (0, 1, 0, 2)), (1, (0, 0, 1, 2)), (1, (1, 1, 1, 0))),
        r_bound=14,
        rtilde_bound=4,
        family="F2",
        exponents=(_THIRD,) * 4,
        coordinate_maps=(
            _m(1, (0,), (1, 0, 0, 2)),
            _m(2, (2,), (0, 2, 1, 0)),
            _m(2, (0, 1, 2), (1, 1, 1, 0)),
            _m(1, (0, 1, 3), (1, 1, 0, 1)),
        ),
        constraints=_F2_SLOT3,
        solve_plan=((0, 2),),
        family_slots=(0, 1, 2),
        family_betas=_IDENTITY3,
        free_slots=(3,),
        two_slot=2,
        display="(b1 p1 p4^2, 2 b3 p2^2 p3, 2 b1 b2 b3 p1 p2 p3, b1 b2 b4 p1 p2 p4)",
    ),
    "X4": SurfaceSpec(
        id="X4",
        singularity="2A2+A1",
        equation="x3^2*(x1+x3) + x0*x1*x2 = 0",
        form=((1, (0, 1, 0, 2)), (1, (0, 0, 0, 3)), (1, (1, 1, 1, 0))),
        r_bound=13,
        rtilde_bound=4,
        family="F2",
        exponents=(_THIRD,) * 4,
        coordinate_maps=(
            _m(1, (0,), (1, 2, 0, 0)),
            _m(1, (3,), (2, 0, 0, 1)),
            _m(2, (2,), (0, 0, 1, 2)),
            _m(1, (0, 1, 3), (1, 1, 0, 1)),
        ),
        constraints=_F2_SLOT3,
        solve_plan=((0, 2),),
        family_slots=(0, 1, 2),
        family_betas=_IDENTITY3,
        free_slots=(3,),
        two_slot=2,
        display="(b1 p1 p2^2, b4 p1^2 p4, 2 b3 p3 p4^2, b1 b2 b4 p1 p2 p4)",
    ),
    "X5": SurfaceSpec(
        id="X5",
        singularity="A4+A1",
        equation="x2*x3^2 + x1^2*x3 + x0*x1*x2 = 0",
        form=((1, (0, 0, 1, 2)), (1, (0, 2, 0, 1)), (1, (1, 1, 1, 0))),
        r_bound=13,
        rtilde_bound=4,
        family="F2",
        exponents=(_THIRD,) * 4,
        coordinate_maps=(
            _m(2, (0, 1, 2), (1, 1, 1, 0)),
            _m(1, (0,), (1, 0, 0, 2)),
            _m(1, (3,), (0, 0, 0, 3)),
            _m(1, (0, 1, 3), (1, 1, 0, 1)),
        ),
        constraints=_F2_SLOT3,
        solve_plan=((0, 2),),
        family_slots=(0, 1, 2),
        family_betas=_IDENTITY3,
        free_slots=(3,),
        two_slot=2,
        display="(2 b1 b2 b3 p1 p2 p3, b1 p1 p4^2, b4 p4^3, b1 b2 b4 p1 p2 p4)",
    ),
    "X6": SurfaceSpec(
        id="X6",
        singularity="D5",
        equation="x3*x0^2 + x0*x2^2 + x1^2*x2 = 0",
        form=((1, (2, 0, 0, 1)), (1, (1, 0, 2, 0)), (1, (0, 2, 1, 0))),
        r_bound=12,
        rtilde_bound=4,
        family="F1",
        exponents=(_THIRD, _THIRD, _THIRD, _TWO_THIRDS),
        coordinate_maps=(
            _m(1, (0,), (3, 0, 0, 0)),
            _m(1, (2,), (2, 0, 1, 0)),
            _m(1, (1,), (2, 1, 0, 0)),
            _m(2, (1, 3), (0, 1, 0, 1)),
        ),
        constraints=(
            (
                _m(2, (3,), (0, 0, 0, 1)),
                _m(1, (0, 1), (1, 1, 0, 0)),
                _m(1, (), (0, 0, 2, 0)),
            ),
        ),
        solve_plan=((0, 3),),
        family_slots=(3, 2, 0, 1),
        family_betas=((1, (3,)), (1, ()), (1, (0, 1))),
        sqrt_slots=(2, 0, 1),
        display="(b1 p1^3, b3 p1^2 p3, b2 p1^2 p2, 2 b2 b4 p2 p4)",
    ),
    "X7": SurfaceSpec(
        id="X7",
        singularity="A5+A1",
        equation="x1^3 + x2*x3^2 + x0*x1*x2 = 0",
        form=((1, (0, 3, 0, 0)), (1, (0, 0, 1, 2)), (1, (1, 1, 1, 0))),
        r_bound=12,
        rtilde_bound=4,
        family="F1",
        exponents=(_TWO_THIRDS, _THIRD, _THIRD, _THIRD),
        coordinate_maps=(
            _m(2, (0, 3), (1, 0, 0, 1)),
            _m(2, (0, 1), (1, 1, 0, 0)),
            _m(1, (1,), (0, 3, 0, 0)),
            _m(2, (0, 2), (1, 0, 1, 0)),
        ),
        constraints=(
            (
                _m(2, (0,), (1, 0, 0, 0)),
                _m(1, (), (0, 0, 2, 0)),
                _m(1, (1, 3), (0, 1, 0, 1)),
            ),
        ),
        solve_plan=((0, 0),),
        family_slots=(0, 2, 1, 3),
        family_betas=((1, (0,)), (1, ()), (1, (1, 3))),
        sqrt_slots=(2, 1, 3),
        display="(2 b1 b4 p1 p4, 2 b1 b2 p1 p2, b2 p2^3, 2 b1 b3 p1 p3)",
    ),
    "X8": SurfaceSpec(
        id="X8",
        singularity="E6",
        equation="x1*x2^2 + x2*x0^2 + x3^3 = 0",
        form=((1, (0, 1, 2, 0)), (1, (2, 0, 1, 0)), (1, (0, 0, 0, 3))),
        r_bound=29,
        rtilde_bound=4,
        family="F2",
        exponents=(_SEVENTH,) * 4,
        coordinate_maps=(
            _m(1, (3,), (2, 2, 0, 3)),
            _m(2, (2,), (0, 0, 1, 6)),
            _m(1, (0,), (3, 4, 0, 0)),
            _m(1, (1,), (2, 3, 0, 2)),
        ),
        constraints=(
            (
                _m(2, (2,), (0, 0, 1, 0)),
                _m(1, (0,), (1, 0, 0, 0)),
                _m(1, (1,), (0, 1, 0, 0)),
            ),
        ),
        solve_plan=((0, 2),),
        family_slots=(0, 1, 2),
        family_betas=_IDENTITY3,
        free_slots=(3,),
        two_slot=2,
        display="(b4 p1^2 p2^2 p4^3, 2 b3 p3 p4^6, b1 p1^3 p2^4, b2 p1^2 p2^3 p4^2)",
    ),
}

SURFACE_IDS = tuple(SURFACES)


def get_surface(sid: str | SurfaceSpec) -> SurfaceSpec:
    if isinstance(sid, SurfaceSpec):
        return sid
    key = sid.upper()
    if key not in SURFACES:
        raise KeyError(f"unknown surface {sid!r}; expected one of {', '.join(SURFACE_IDS)}")
    return SURFACES[key]


@dataclass(frozen=True)
class PrimeAssignment:
    surface: str
    betas: tuple[int, ...]
    primes: tuple[int, ...]

    def __post_init__(self) -> None:
        spec = get_surface(self.surface)
        if len(self.betas) != spec.k or len(self.primes) != spec.k:
            raise ValueError(f"{spec.id} needs {spec.k} betas and {spec.k} primes")
        if any(b not in (-1, 1) for b in self.betas):
            raise ValueError(f"betas must be +-1: {self.betas}")


def eval_form(sid: str | SurfaceSpec, x) -> int:
    """Exact value of the defining cubic at x (works for floats too)."""
    spec = get_surface(sid)
    total = 0
    for c, e in spec.form:
        term = c
        for xi, ei in zip(x, e):
            if ei:
                term = term * xi**ei
        total = total + term
    return total


def constraint_residuals(a: PrimeAssignment) -> tuple[int, ...]:
    spec = get_surface(a.surface)
    return tuple(sum(t.value(a.betas, a.primes) for t in eq) for eq in spec.constraints)


def constraint_residual(a: PrimeAssignment) -> int | tuple[int, ...]:
    """Constraint value at (beta, p); a 2-tuple for X2, an int otherwise."""
    res = constraint_residuals(a)
    return res if len(res) > 1 else res[0]


def check_assignment(a: PrimeAssignment) -> None:
    if any(p <= 2 or p % 2 == 0 for p in a.primes):
        raise InvalidAssignmentError(f"primes must be odd: {a.primes}")
    if len(set(a.primes)) != len(a.primes):
        raise DistinctnessError(f"repeated prime in {a.primes}")
    if any(constraint_residuals(a)):
        raise InvalidAssignmentError(
            f"{a.surface}: constraint residual {constraint_residual(a)} != 0"
        )


def parametrize(a: PrimeAssignment, check: bool = True) -> tuple[FactoredInt, ...]:
    """Integral point on the surface built from a valid assignment."""
    if check:
        check_assignment(a)
    spec = get_surface(a.surface)
    return tuple(mon.factored(a.betas, a.primes) for mon in spec.coordinate_maps)


def point_values(a: PrimeAssignment) -> tuple[int, int, int, int]:
    """Plain integer coordinates (no factor bookkeeping, no validation)."""
    spec = get_surface(a.surface)
    return tuple(mon.value(a.betas, a.primes) for mon in spec.coordinate_maps)


def solve_slot(spec: SurfaceSpec, eq_index: int, slot: int, betas, primes) -> tuple[int, int] | None:
    """Solve equation ``eq_index`` for (beta_slot, p_slot); None when not integral.

    ``primes[slot]`` and ``betas[slot]`` are ignored.
    """
    rest = 0
    lead = None
    for t in spec.constraints[eq_index]:
        if t.powers[slot]:
            lead = t
            continue
        rest += t.value(betas, primes)
    if lead is None or lead.powers[slot] != 1:
        raise ValueError(f"slot {slot} does not enter equation {eq_index} linearly")
    others = [i for i in lead.signs if i != slot]
    c = lead.coeff
    for i in others:
        c *= betas[i]
    for j, m in enumerate(lead.powers):
        if j != slot and m:
            c *= primes[j] ** m
    # c * beta_slot * p_slot = -rest
    if rest % c:
        return None
    v = -rest // c
    if v == 0:
        return None
    return (1 if v > 0 else -1), abs(v)


def random_assignment(
    sid: str | SurfaceSpec,
    rng: random.Random,
    pool: list[int] | None = None,
    max_tries: int = 100_000,
) -> PrimeAssignment:
    """Draw a valid assignment: random signs and primes, solved slots filled in."""
    spec = get_surface(sid)
    pool = pool or _default_pool()
    solved = {slot for _, slot in spec.solve_plan}
    for _ in range(max_tries):
        betas = [rng.choice((-1, 1)) for _ in range(spec.k)]
        primes = [rng.choice(pool) if j not in solved else 0 for j in range(spec.k)]
        ok = True
        for eq, slot in spec.solve_plan:
            sol = solve_slot(spec, eq, slot, betas, primes)
            if sol is None or sol[1] == 2 or not is_prime(sol[1]):
                ok = False
                break
            betas[slot], primes[slot] = sol
        if not ok or len(set(primes)) != spec.k:
            continue
        return PrimeAssignment(spec.id, tuple(betas), tuple(primes))
    raise RuntimeError(f"no valid assignment for {spec.id} after {max_tries} draws")


_POOL: list[int] = []


def _default_pool() -> list[int]:
    if not _POOL:
        _POOL.extend(primes_in(3, 10_000))
    return _POOL


@dataclass(frozen=True)
class PointCheck:
    form_value: int
    gcd: int
    omega: int
    odd_distinct: int
    tally: tuple[int, ...]


def check_point(a: PrimeAssignment) -> PointCheck:
    coords = parametrize(a)
    values = [c.value for c in coords]
    prod = product(coords)
    return PointCheck(
        form_value=eval_form(a.surface, values),
        gcd=gcd4(values),
        omega=big_omega(prod),
        odd_distinct=omega_distinct_odd(prod),
        tally=tuple(big_omega(c) for c in coords),
    )
