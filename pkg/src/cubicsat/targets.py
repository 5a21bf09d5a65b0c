"""
From a real point xi on a surface to interval data for the prime solvers.

Every coordinate of a constructed point is ``+-c * prod p_j^m_j`` and scales
like B when p_j ~ gamma_j B^e_j, so matching |x_i| / B = |xi_i| is a linear
system in log(gamma_j). Four of the surfaces give a square system; for X2
(five primes) the remaining direction is fixed by the F4 relations. Signs
come from the coordinate signs of xi, plus the constraint for betas that do
not show up in any coordinate sign.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import NotInUError
from .solvers import ConstraintFamily, IntervalFamily
from .surfaces import SurfaceSpec, eval_form, get_surface

ON_SURFACE_TOL = 1e-9
RELATION_TOL = 1e-8
MAX_DELTA = 0.95


class SmallBWarning(UserWarning):
    """Some interval holds no prime at this B; counts will be zero."""


@dataclass(frozen=True)
class TargetDerivation:
    surface: str
    gammas: tuple[float, ...]
    betas: tuple[int, ...]
    exponents: tuple[Fraction, ...]
    family_kind: str

    @property
    def spec(self) -> SurfaceSpec:
        return get_surface(self.surface)

    def family(self) -> ConstraintFamily:
        spec = self.spec
        return ConstraintFamily(
            kind=spec.family,
            betas=spec.family_beta_values(self.betas),
            alpha=self.exponents[spec.family_slots[0]],
            two_slot=spec.two_slot,
        )

    def family_gammas(self) -> tuple[float, ...]:
        return tuple(self.gammas[s] for s in self.spec.family_slots)

    def relation_residuals(self) -> tuple[float, ...]:
        return _relative_residuals(self.spec, self.betas, self.gammas)

    def scaled_point(self) -> tuple[float, ...]:
        """x / B at p_j = gamma_j B^e_j; B cancels since every coordinate has degree one in B."""
        return tuple(m.real_value(self.betas, self.gammas) for m in self.spec.coordinate_maps)

    def as_dict(self) -> dict:
        return {
            "surface": self.surface,
            "family": self.family_kind,
            "gammas": list(self.gammas),
            "betas": list(self.betas),
            "exponents": [str(e) for e in self.exponents],
            "family_betas": list(self.family().betas),
        }


def _relative_residuals(spec: SurfaceSpec, betas, gammas) -> tuple[float, ...]:
    out = []
    for eq in spec.constraints:
        terms = [t.real_value(betas, gammas) for t in eq]
        out.append(abs(math.fsum(terms)) / max(math.fsum(abs(v) for v in terms), 1e-300))
    return tuple(out)


def _sgn(v: float) -> int:
    return 1 if v > 0 else -1


def check_target(sid: str | SurfaceSpec, xi: Sequence[float]) -> SurfaceSpec:
    """On-surface check plus nonvanishing of every coordinate."""
    spec = get_surface(sid)
    if len(xi) != 4:
        raise NotInUError("xi must have four coordinates")
    scale = max(abs(v) for v in xi)
    if scale == 0:
        raise NotInUError("xi is the zero vector")
    if abs(eval_form(spec, [float(v) for v in xi])) > ON_SURFACE_TOL * scale**3:
        raise NotInUError(f"xi={tuple(xi)} is not on {spec.id}")
    if any(v == 0 for v in xi):
        raise NotInUError(f"xi={tuple(xi)} has a zero coordinate; no almost-prime point is near it on this chart")
    return spec


def derive_X2(xi: Sequence[float]) -> TargetDerivation:
    """The explicit X2 formulas: gamma_1 = |cbrt(xi1+xi2+xi3)| and so on."""
    spec = get_surface("X2")
    x0, x1, x2, x3 = (float(v) for v in xi)
    s = x1 + x2 + x3
    if x1 * x2 == 0 or s == 0:
        raise NotInUError("X2 needs xi1*xi2 != 0 and xi1+xi2+xi3 != 0")
    check_target(spec, xi)
    c = float(np.cbrt(s))
    c2 = float(np.cbrt(s * s))
    c4 = float(np.cbrt(s**4))
    gammas = (
        abs(c),
        abs(x1 / c2),
        abs(x2 / c2),
        abs(x0 * c4 / (2 * x1 * x2)),
        abs(x3 / c2),
    )
    betas = (_sgn(c), _sgn(x1), _sgn(x2), _sgn(x0 / (x1 * x2)), _sgn(x3))
    return TargetDerivation("X2", gammas, betas, spec.exponents, spec.family)


def _sign_patterns(spec: SurfaceSpec, xi) -> list[tuple[int, ...]]:
    target = [_sgn(v) for v in xi]
    out = []
    for betas in itertools.product((-1, 1), repeat=spec.k):
        if all(m.sign_of(betas) == s for m, s in zip(spec.coordinate_maps, target)):
            out.append(betas)
    return out


def derive_generic(sid: str | SurfaceSpec, xi: Sequence[float], tol: float = RELATION_TOL) -> TargetDerivation:
    """Invert the coordinate maps: solve for log(gamma) and pick the consistent signs."""
    spec = check_target(sid, xi)
    M = np.array([m.powers for m in spec.coordinate_maps], dtype=float)
    rhs = np.array([math.log(abs(float(v)) / m.coeff) for v, m in zip(xi, spec.coordinate_maps)])
    sol, _, rank, _ = np.linalg.lstsq(M, rhs, rcond=None)
    if np.max(np.abs(M @ sol - rhs)) > 1e-9 * max(1.0, float(np.max(np.abs(rhs)))):
        raise NotInUError("exponent system is inconsistent for this xi")
    null_dim = spec.k - rank
    if null_dim > 1:
        raise NotImplementedError("more than one free scaling direction")
    null = np.linalg.svd(M)[2][-1] if null_dim == 1 else None

    found: list[tuple[tuple[int, ...], tuple[float, ...]]] = []
    for betas in _sign_patterns(spec, xi):
        if null is None:
            candidates = [tuple(float(v) for v in np.exp(sol))]
        else:
            candidates = _roots_along(spec, betas, sol, null)
        for gammas in candidates:
            if max(_relative_residuals(spec, betas, gammas)) > tol:
                continue
            # X2: both relations vanish at the same root
            if any(b == betas and np.allclose(g, gammas, rtol=1e-7, atol=0) for b, g in found):
                continue
            found.append((betas, gammas))
    if not found:
        raise NotInUError(f"no sign pattern of {spec.id} reaches xi={tuple(xi)}")
    if len(found) > 1:
        raise NotInUError(f"xi={tuple(xi)} is reached by {len(found)} sign patterns; ambiguous")
    betas, gammas = found[0]
    return TargetDerivation(spec.id, gammas, betas, spec.exponents, spec.family)


def _roots_along(spec: SurfaceSpec, betas, base: np.ndarray, null: np.ndarray) -> list[tuple[float, ...]]:
    """Points on the line log(gamma) = base + t * null where a relation vanishes."""

    def gammas_at(t: float) -> tuple[float, ...]:
        return tuple(float(v) for v in np.exp(base + t * null))

    out = []
    for eq in spec.constraints:
        def f(t: float, eq=eq) -> float:
            g = gammas_at(t)
            terms = [m.real_value(betas, g) for m in eq]
            return math.fsum(terms) / math.fsum(abs(v) for v in terms)

        ts = np.linspace(-30.0, 30.0, 1201)
        vals = [f(t) for t in ts]
        for a, b, fa, fb in zip(ts[:-1], ts[1:], vals[:-1], vals[1:]):
            if fa == 0:
                out.append(gammas_at(a))
            elif fa * fb < 0:
                out.append(gammas_at(brentq(f, a, b, xtol=1e-15, rtol=1e-15)))
    return out


def make_intervals(d: TargetDerivation, B: int, delta: float, warn: bool = True) -> IntervalFamily:
    """Intervals I_j around gamma_j B^e_j for every prime slot of the surface."""
    spec = d.spec
    ivals = IntervalFamily(d.gammas, d.exponents, B, delta, spec.sqrt_slots)
    if warn:
        empty = [j for j in range(spec.k) if not ivals.primes(j)]
        if empty:
            warnings.warn(
                f"{spec.id} at B={B}, delta={delta:g}: no primes in slot(s) {[j + 1 for j in empty]}",
                SmallBWarning,
                stacklevel=2,
            )
    return ivals


def box_deviation(d: TargetDerivation, xi: Sequence[float], delta: float) -> float:
    """max_i sup over the real interval box of |x_i/B - xi_i|.

    Each coordinate is monotone in every p_j, so the extremes sit at the
    all-low and all-high corners.
    """
    spec = d.spec
    lo_f, hi_f = 1 - delta, 1 + delta
    worst = 0.0
    for i, mon in enumerate(spec.coordinate_maps):
        lo = hi = float(mon.coeff * mon.sign_of(d.betas))
        for j, m in enumerate(mon.powers):
            if not m:
                continue
            a, b = (math.sqrt(lo_f), math.sqrt(hi_f)) if j in spec.sqrt_slots else (lo_f, hi_f)
            lo *= (d.gammas[j] * a) ** m
            hi *= (d.gammas[j] * b) ** m
        worst = max(worst, abs(lo - xi[i]), abs(hi - xi[i]))
    return worst


def shrink_delta(d: TargetDerivation, xi: Sequence[float], epsilon: float, iters: int = 60) -> float:
    """Largest delta (by bisection, capped at MAX_DELTA) whose interval box maps into the eps-box."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if box_deviation(d, xi, MAX_DELTA) < epsilon:
        return MAX_DELTA
    lo, hi = 0.0, MAX_DELTA
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if box_deviation(d, xi, mid) < epsilon:
            lo = mid
        else:
            hi = mid
    if lo == 0.0:
        raise NotInUError(f"no delta > 0 keeps the box within eps={epsilon} of xi; is xi scaled to O(1)?")
    return lo
