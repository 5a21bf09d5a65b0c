"""
Experiments: counting almost-prime points near a target, B-grids, and the
saturation-bound exactness sweep.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import logging
import math
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

from .arith import big_omega, gcd4, product
from .errors import ConfigError, InvalidAssignmentError
from .solvers import solve
from .surfaces import (
    SURFACE_IDS,
    PrimeAssignment,
    check_point,
    eval_form,
    get_surface,
    parametrize,
    random_assignment,
)
from .targets import derive_generic, make_intervals, shrink_delta

log = logging.getLogger(__name__)


def log_exponent(sid: str) -> int:
    return 5 if get_surface(sid).id == "X2" else 4


def reference_curve(sid: str, B: int) -> float:
    """B (log B)^-k, or B^(3/7) (log B)^-4 for X8."""
    L = math.log(B)
    head = B ** (3 / 7) if get_surface(sid).id == "X8" else float(B)
    return head / L ** log_exponent(sid)


@dataclass
class CountResult:
    count: int
    delta: float
    candidates: int
    points: list[tuple[int, int, int, int]] | None = None


def enumerate_points(
    surface: str,
    xi: Sequence[float],
    epsilon: float,
    B: int,
    r: int,
    delta: float | None = None,
    workers: int = 1,
    keep_points: bool = False,
) -> CountResult:
    """Constructed points x with |x/B - xi| < eps, gcd 1 and Omega(x0 x1 x2 x3) <= r."""
    if r < 1:
        raise ValueError("r must be >= 1")
    spec = get_surface(surface)
    d = derive_generic(spec, xi)
    if delta is None:
        delta = shrink_delta(d, xi, epsilon)
    ivals = make_intervals(d, B, delta, warn=False)
    fam = d.family()
    sols = solve(fam, ivals.subset(spec.family_slots), workers=workers)
    free_lists = [ivals.primes(j) for j in spec.free_slots]

    seen: set[tuple[int, int, int, int]] = set()
    candidates = 0
    for sol in sols:
        for extra in itertools.product(*free_lists):
            primes = [0] * spec.k
            for slot, p in zip(spec.family_slots, sol):
                primes[slot] = p
            for slot, p in zip(spec.free_slots, extra):
                primes[slot] = p
            candidates += 1
            a = PrimeAssignment(spec.id, d.betas, tuple(primes))
            try:
                coords = parametrize(a)
            except InvalidAssignmentError:
                continue  # repeated prime, or 2 in a slot
            x = tuple(c.value for c in coords)
            if gcd4(x) != 1 or big_omega(product(coords)) > r:
                continue
            if any(abs(xv / B - t) >= epsilon for xv, t in zip(x, xi)):
                continue
            seen.add(x)
    pts = sorted(seen) if keep_points else None
    return CountResult(len(seen), delta, candidates, pts)


def count_M(surface: str, xi: Sequence[float], epsilon: float, B: int, r: int, delta: float | None = None, workers: int = 1) -> int:
    return enumerate_points(surface, xi, epsilon, B, r, delta, workers).count


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------


@dataclass
class GridConfig:
    surface: str
    xi: tuple[float, ...]
    epsilon: float
    B_grid: tuple[int, ...]
    r: int | None = None
    seed: int = 0
    output: str | None = None
    format: str = "csv"
    delta: float | None = None
    timing: bool = True

    def resolved_r(self) -> int:
        return self.r if self.r is not None else get_surface(self.surface).r_bound


_KEYS = {"surface", "xi", "epsilon", "r", "B_grid", "seed", "output", "format", "delta", "timing"}
_REQUIRED = {"surface", "xi", "epsilon", "B_grid"}


def _parse_int(text: str) -> int:
    text = text.strip().replace("_", "")
    if "e" in text.lower() or "." in text:
        v = float(text)
        if v != int(v):
            raise ValueError(f"{text} is not an integer")
        return int(v)
    return int(text)


def parse_config(text: str) -> GridConfig:
    """Flat ``key = value`` manifest, ``#`` comments, one experiment per file."""
    raw: dict[str, tuple[str, int]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"unknown key (expected one of {sorted(_KEYS)})", line=lineno, field=key)
        if key in raw:
            raise ConfigError("duplicate key", line=lineno, field=key)
        raw[key] = (value, lineno)
    missing = _REQUIRED - raw.keys()
    if missing:
        raise ConfigError(f"missing required key(s): {', '.join(sorted(missing))}")

    def conv(key, fn):
        value, lineno = raw[key]
        try:
            return fn(value)
        except (ValueError, KeyError) as exc:
            raise ConfigError(str(exc), line=lineno, field=key) from None

    def surface(v):
        return get_surface(v).id

    def floats(v):
        return tuple(float(s) for s in v.split(","))

    def ints(v):
        out = tuple(_parse_int(s) for s in v.split(","))
        if list(out) != sorted(set(out)) or out[0] < 2:
            raise ValueError("B_grid must be strictly ascending integers >= 2")
        return out

    def fmt(v):
        if v not in ("csv", "json"):
            raise ValueError("format must be csv or json")
        return v

    def boolean(v):
        if v.lower() in ("1", "true", "yes"):
            return True
        if v.lower() in ("0", "false", "no"):
            return False
        raise ValueError(f"not a boolean: {v}")

    cfg = GridConfig(
        surface=conv("surface", surface),
        xi=conv("xi", floats),
        epsilon=conv("epsilon", float),
        B_grid=conv("B_grid", ints),
    )
    if len(cfg.xi) != 4:
        raise ConfigError("xi needs four comma-separated reals", line=raw["xi"][1], field="xi")
    if cfg.epsilon <= 0:
        raise ConfigError("epsilon must be positive", line=raw["epsilon"][1], field="epsilon")
    if "r" in raw:
        cfg.r = conv("r", _parse_int)
    if "seed" in raw:
        cfg.seed = conv("seed", _parse_int)
    if "output" in raw:
        cfg.output = raw["output"][0]
    if "format" in raw:
        cfg.format = conv("format", fmt)
    if "delta" in raw:
        cfg.delta = conv("delta", float)
    if "timing" in raw:
        cfg.timing = conv("timing", boolean)
    return cfg


def load_config(path: str | Path) -> GridConfig:
    return parse_config(Path(path).read_text())


@dataclass
class GridRow:
    B: int
    M: int
    reference: float
    normalized: float
    elapsed_ms: int | None = None


@dataclass
class CountReport:
    rows: list[GridRow]
    meta: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        timed = bool(self.meta.get("timing", True))
        cols = ["B", "M", "reference", "normalized"] + (["elapsed_ms"] if timed else [])
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for row in self.rows:
            vals = [row.B, row.M, repr(row.reference), repr(row.normalized)]
            if timed:
                vals.append(row.elapsed_ms)
            w.writerow(vals)
        return buf.getvalue()

    def to_json(self) -> str:
        rows = [asdict(r) for r in self.rows]
        if not self.meta.get("timing", True):
            for r in rows:
                r.pop("elapsed_ms")
        return json.dumps({"meta": self.meta, "rows": rows}, indent=2, sort_keys=True) + "\n"

    def render(self, fmt: str) -> str:
        return self.to_json() if fmt == "json" else self.to_csv()


def _grid_row(args) -> tuple[GridRow, float]:
    cfg, B = args
    t0 = time.perf_counter()
    res = enumerate_points(cfg.surface, cfg.xi, cfg.epsilon, B, cfg.resolved_r(), cfg.delta)
    ms = int(round((time.perf_counter() - t0) * 1000))
    ref = reference_curve(cfg.surface, B)
    return GridRow(B, res.count, ref, res.count / ref, ms if cfg.timing else None), res.delta


def run_grid(cfg: GridConfig, workers: int = 1) -> CountReport:
    """count_M for every B in the grid; reports M / reference, asserts nothing."""
    spec = get_surface(cfg.surface)
    jobs = [(cfg, B) for B in cfg.B_grid]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as ex:
            results = list(ex.map(_grid_row, jobs))
    else:
        results = [_grid_row(j) for j in jobs]
    rows = [r for r, _ in results]
    zero_at_max = rows[-1].M == 0
    if zero_at_max:
        log.warning("%s: M = 0 at the largest B = %d", spec.id, rows[-1].B)
    meta = {
        "surface": spec.id,
        "xi": list(cfg.xi),
        "epsilon": cfg.epsilon,
        "r": cfg.resolved_r(),
        "delta_policy": "auto" if cfg.delta is None else "fixed",
        "delta": results[0][1],
        "family": spec.family,
        "log_exponent": log_exponent(spec.id),
        "seed": cfg.seed,
        "timing": cfg.timing,
        "zero_at_max_B": zero_at_max,
    }
    return CountReport(rows, meta)


def write_report(report: CountReport, path: str | Path, fmt: str) -> None:
    Path(path).write_text(report.render(fmt))


# ---------------------------------------------------------------------------
# saturation-bound sweep
# ---------------------------------------------------------------------------


@dataclass
class SaturationCheck:
    surface: str
    r_bound: int
    checked: int
    passed: bool
    counterexample: dict | None = None


def verify_table1(seed: int = 0, n: int = 500, surfaces: Sequence[str] = SURFACE_IDS) -> dict[str, SaturationCheck]:
    """Seeded random assignments per surface: form 0, gcd 1, Omega = r_i, odd primes <= r~."""
    out = {}
    for sid in surfaces:
        spec = get_surface(sid)
        rng = random.Random(f"{seed}:{spec.id}")
        bad = None
        for _ in range(n):
            a = random_assignment(spec, rng)
            chk = check_point(a)
            values = [c.value for c in parametrize(a)]
            problems = []
            if chk.form_value != 0 or eval_form(spec, values) != 0:
                problems.append("form")
            if chk.gcd != 1:
                problems.append("gcd")
            if chk.omega != spec.r_bound:
                problems.append("omega")
            if chk.odd_distinct > spec.rtilde_bound:
                problems.append("odd_primes")
            if problems:
                bad = {"betas": list(a.betas), "primes": list(a.primes), "point": values, "failed": problems}
                break
        out[spec.id] = SaturationCheck(spec.id, spec.r_bound, n, bad is None, bad)
    return out
