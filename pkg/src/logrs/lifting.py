"""Path lifting through the chart F: segments, rays, and monodromy of fibers.

A lift follows F(gamma(s)) = z(s) for a base path z(s) by predictor-corrector
continuation.  Values of F are carried along incrementally, so each Newton
correction only integrates F' over a short chord.

Obstructions can only sit over singular values (critical values and
asymptotic values of the chart).  Before a lift reaches such a value it stops
a short distance ``delta`` short and decides between three outcomes: the lift
is about to hit a critical point (finite order), it is running off to
infinity inside an asymptotic sector (infinite order), or it passes a regular
preimage and carries on.
"""

from __future__ import annotations

import cmath
import math
import warnings
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    BudgetExceeded,
    FiberEnumerationIncomplete,
    NoGenericPoint,
    StepCollapse,
)
from .numerics import SingularValue

FULL = "Full"
TERMINATED = "Terminated"

RESIDUAL_RTOL = 1e-12
APPROACH_DELTA = 1e-6
TREND_STEPS = 10
SHEET_MATCH_RTOL = 1e-6
GENERIC_MARGIN = 0.05


@dataclass(frozen=True)
class RamPoint:
    """A ramification point: projection, order (int >= 2 or math.inf)."""

    projection: complex
    order: float
    edge_cycle: tuple = ()
    preimage: complex | None = None
    order_is_lower_bound: bool = False

    @property
    def is_finite(self) -> bool:
        return not math.isinf(self.order)


@dataclass(frozen=True)
class FiberPoint:
    location: complex
    sheet_tag: int = 0
    value: complex | None = None


@dataclass
class LiftResult:
    kind: str
    rho: float
    terminal: RamPoint | None = None
    trace: list = field(default_factory=list)
    end_value: complex | None = None
    flags: tuple = ()

    @property
    def endpoint(self) -> complex:
        return self.trace[-1]


@dataclass
class MonodromyTable:
    """Counterclockwise loop action on the enumerated sheets.

    ``perms[k]`` maps sheet tags to sheet tags for the loop around
    ``critical_values[k]``; ``inverse[k]`` is the clockwise loop.  A sheet
    whose image left the window is absent from the map.
    """

    z0: complex
    critical_values: list
    perms: list
    inverse: list
    sheets: dict
    depth: dict
    base: int = 0
    complete: bool = True
    loop_radii: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# generic base values


def _line_distance(z, a, b) -> float:
    d = b - a
    return abs(((z - a) * d.conjugate()).imag) / abs(d)


def genericity_gap(z0: complex, crits: Sequence[complex]) -> float:
    """Distance from z0 to the nearest singular value or line through two of them."""
    crits = [complex(c) for c in crits]
    gap = min((abs(z0 - c) for c in crits), default=math.inf)
    for i in range(len(crits)):
        for j in range(i + 1, len(crits)):
            if crits[i] != crits[j]:
                gap = min(gap, _line_distance(z0, crits[i], crits[j]))
    return gap


def _config_scale(crits) -> float:
    crits = [complex(c) for c in crits]
    diam = max((abs(a - b) for a in crits for b in crits), default=0.0)
    return max(1.0, diam)


def choose_generic_basevalue(crits: Sequence[complex], seed: int = 0,
                             margin: float | None = None, max_draws: int = 10_000) -> complex:
    """Seeded rejection sampling of z0 off every line through two values."""
    crits = [complex(c) for c in crits]
    if not crits:
        raise ValueError("need at least one singular value")
    scale = _config_scale(crits)
    margin = GENERIC_MARGIN * scale if margin is None else margin
    center = complex(np.mean(crits))
    rng = np.random.default_rng(seed)
    for _ in range(max_draws):
        x, y = rng.uniform(-scale, scale, size=2)
        z0 = center + complex(x, y)
        if genericity_gap(z0, crits) >= margin:
            return complex(round(z0.real, 12), round(z0.imag, 12))
    raise NoGenericPoint(f"no generic base value found in {max_draws} draws")


# ---------------------------------------------------------------------------
# continuation


def _cauchy_coefficient(f, zc: complex, order: int, radius: float) -> complex:
    """Taylor coefficient of degree ``order`` of F at zc (F^(order)(zc)/order!)."""
    m = order - 1
    theta = 2 * np.pi * np.arange(64) / 64
    pts = zc + radius * np.exp(1j * theta)
    vals = f.fprime(pts)
    # coefficient of (z - zc)^m in F' divided by (m + 1)
    coef = np.mean(vals * np.exp(-1j * m * theta)) / radius ** m
    return complex(coef) / order


def _track(f, w: complex, Fw: complex, zfun: Callable, s0: float, s1: float,
           trace: list, h0: float | None = None) -> tuple[complex, complex]:
    """Continue F(w(s)) = zfun(s) from s0 to s1; returns (w, F(w))."""
    span = s1 - s0
    if span <= 0:
        return w, Fw
    s = s0
    h = h0 if h0 is not None else 1e-2 * span
    hmin = 1e-13 * max(1.0, abs(span))
    while s < s1:
        h = min(h, s1 - s)
        d1 = complex(f.fprime(w))
        if d1 == 0 or not np.isfinite(d1):
            raise StepCollapse(f"F' vanished at {w}")
        ld = abs(complex(f.log_derivative(w)))
        zs = zfun(s)
        speed = abs(zfun(min(s1, s + 1e-7 * max(1.0, span))) - zs) / (1e-7 * max(1.0, span)) or 1.0
        if ld > 0:
            h = min(h, 0.2 * abs(d1) / (ld * speed))
        accepted = False
        while not accepted:
            if h < hmin:
                raise StepCollapse(f"step collapsed to {h:.2e} near w={w}; re-choose z0")
            s_new = min(s1, s + h)
            target = zfun(s_new)
            tol = RESIDUAL_RTOL * (1 + abs(target))
            wn = w + (target - Fw) / d1
            prev = math.inf
            for _ in range(12):
                Fn = Fw + f.increment(w, wn)
                r = Fn - target
                if abs(r) <= tol:
                    accepted = True
                    break
                dn = complex(f.fprime(wn))
                if dn == 0:
                    break
                step = r / dn
                if abs(step) > 0.5 * prev and prev < math.inf:
                    break
                if abs(step) <= 1e-15 * (1 + abs(wn)):
                    accepted = True
                    wn -= step
                    Fn = Fw + f.increment(w, wn)
                    break
                prev = abs(step)
                wn -= step
            if not accepted:
                h *= 0.5
        w, Fw, s = wn, Fn, s_new
        trace.append(w)
        h *= 2.0
    return w, Fw


def _segment(a: complex, u: complex):
    return lambda s: a + s * u


def _growth(f, w: complex) -> float | None:
    P = getattr(f, "P", None)
    if P is None or getattr(f, "d1", 0) == 0:
        return None
    return float(P(w).real)


def _events(f, a: complex, b: complex, singular) -> list:
    L = abs(b - a)
    u = (b - a) / L
    out = []
    for sv in singular:
        rel = (sv.value - a) * u.conjugate()
        if abs(rel.imag) <= 1e-9 * (1 + L) and 0 < rel.real <= L * (1 + 1e-12):
            out.append((min(rel.real, L), sv))
    out.sort(key=lambda e: e[0])
    return out


def _critical_hit(f, w: complex, sv: SingularValue, delta: float, critical_pts) -> RamPoint | None:
    for zc, order in sv.critical:
        others = [abs(zc - z) for z, _ in critical_pts if z != zc]
        radius = 0.25 * min(others) if others else 0.5
        radius = min(radius, 1.0 + abs(zc))
        a = abs(_cauchy_coefficient(f, zc, order, radius))
        if a == 0:
            continue
        ball = 3.0 * (delta / a) ** (1.0 / order)
        if abs(w - zc) <= ball:
            return RamPoint(sv.value, order, preimage=zc)
    return None


def lift_segment(f, start: FiberPoint, a: complex, b: complex,
                 singular: Sequence[SingularValue] | None = None) -> LiftResult:
    """Lift the base segment [a, b] starting at ``start`` (with F(start) = a)."""
    a, b = complex(a), complex(b)
    L = abs(b - a)
    w = complex(start.location)
    Fw = a if start.value is None else complex(start.value)
    trace = [w]
    if L == 0:
        return LiftResult(FULL, 0.0, None, trace, Fw)
    u = (b - a) / L
    zfun = _segment(a, u)
    singular = f.singular_values() if singular is None else singular
    crit_pts = f.critical_points()
    s = 0.0
    for t_c, sv in _events(f, a, b, singular):
        delta = min(APPROACH_DELTA * max(1.0, L), 0.5 * (t_c - s))
        w, Fw = _track(f, w, Fw, zfun, s, t_c - delta, trace)
        s = t_c - delta
        hit = _critical_hit(f, w, sv, delta, crit_pts)
        if hit is not None:
            trace.append(hit.preimage)
            return LiftResult(TERMINATED, t_c, hit, trace, sv.value)
        if sv.sectors:
            growth = [_growth(f, w)]
            for j in range(1, TREND_STEPS + 1):
                s_j = t_c - delta * 2.0 ** (-j)
                w, Fw = _track(f, w, Fw, zfun, s, s_j, trace)
                s = s_j
                growth.append(_growth(f, w))
            if None not in growth:
                drops = np.diff(growth)
                if np.all(drops < 0) and -np.sum(drops) >= 0.5 * TREND_STEPS * math.log(2):
                    ram = RamPoint(sv.value, math.inf)
                    return LiftResult(TERMINATED, t_c, ram, trace, Fw, flags=("re-P-trend",))
    w, Fw = _track(f, w, Fw, zfun, s, L, trace)
    return LiftResult(FULL, L, None, trace, Fw)


def ray_classify(f, start: FiberPoint, theta: float, budget: float = 1e6,
                 singular: Sequence[SingularValue] | None = None) -> LiftResult:
    """Lift the ray F(start) + t e^{i theta} until it terminates or clears every singular value."""
    a = complex(start.value) if start.value is not None else complex(f.value(start.location))
    singular = f.singular_values() if singular is None else singular
    u = cmath.exp(1j * theta)
    ts = [t for t, _ in _events(f, a, a + budget * u, singular)]
    reach = (max(ts) if ts else 0.0) + 1.0
    if reach > budget:
        raise BudgetExceeded(f"ray needs length {reach} > budget {budget}")
    res = lift_segment(f, FiberPoint(start.location, start.sheet_tag, a), a, a + reach * u, singular)
    if res.kind == FULL:
        res.rho = math.inf
    return res


# ---------------------------------------------------------------------------
# fibers and monodromy


def anchor_points(zb: complex) -> list[complex]:
    """z_b followed by a fixed ring of fallbacks, tried in order."""
    return [zb] + [zb + r * cmath.exp(1j * (0.3 + k * 2 * math.pi / 7))
                   for r in (0.25, 0.5, 1.0) for k in range(7)]


def base_fiber_point(f, z0: complex, singular: Sequence[SingularValue] | None = None) -> FiberPoint:
    """The fiber point over z0 reached from the base point of the chart.

    The straight value path F(anchor) -> z0 is lifted from an anchor near
    z_b; anchors that are critical or whose value path grazes a singular
    value are skipped.
    """
    z0 = complex(z0)
    singular = f.singular_values() if singular is None else singular
    scale = _config_scale([sv.value for sv in singular] + [z0])
    margin = 1e-3 * scale
    for anchor in anchor_points(f.base_point):
        if abs(f.fprime(anchor)) < 1e-8:
            continue
        va = f.value(anchor)
        ok = True
        for sv in singular:
            seg = z0 - va
            if seg == 0:
                break
            t = ((sv.value - va) * seg.conjugate()).real / abs(seg) ** 2
            t = min(1.0, max(0.0, t))
            if abs(va + t * seg - sv.value) < margin:
                ok = False
                break
        if not ok:
            continue
        trace = [anchor]
        L = abs(z0 - va)
        if L == 0:
            return FiberPoint(anchor, 0, z0)
        w, _ = _track(f, anchor, va, _segment(va, (z0 - va) / L), 0.0, L, trace)
        return FiberPoint(w, 0, z0)
    raise StepCollapse("no usable anchor for the base fiber point")


def _loop_radii(z0: complex, values: list) -> list:
    radii = []
    for k, c in enumerate(values):
        near = [abs(c - d) for j, d in enumerate(values) if j != k] + [abs(c - z0)]
        radii.append(0.5 * min(near))
    return radii


def lift_loop(f, w: complex, z0: complex, c: complex, r: float, direction: int = 1,
              cache: dict | None = None) -> complex:
    """Lift the standard loop around c (out, circle, back) from the fiber point w."""
    L = abs(c - z0)
    u = (c - z0) / L
    key = (w, c)
    trace: list = []
    if cache is not None and key in cache:
        p, Fp = cache[key]
    else:
        p, Fp = _track(f, w, z0, _segment(z0, u), 0.0, L - r, trace)
        if cache is not None:
            cache[key] = (p, Fp)
    phi0 = cmath.phase(z0 - c)
    circle = lambda s: c + r * cmath.exp(1j * (phi0 + direction * s))
    q, Fq = _track(f, p, Fp, circle, 0.0, 2 * math.pi, trace, h0=2 * math.pi / 64)
    back = c + r * cmath.exp(1j * phi0)
    end, _ = _track(f, q, Fq, _segment(back, -u), 0.0, L - r, trace)
    return end


def _match(sheets: dict, w: complex) -> int | None:
    for tag, loc in sheets.items():
        if abs(loc - w) <= SHEET_MATCH_RTOL * (1 + abs(loc)):
            return tag
    return None


def monodromy(f, z0: complex, window: int, singular: Sequence[SingularValue] | None = None,
              base: FiberPoint | None = None) -> MonodromyTable:
    """Loop action of each singular value on the sheets within ``window`` loop-steps of the base sheet."""
    z0 = complex(z0)
    singular = f.singular_values() if singular is None else singular
    values = [sv.value for sv in singular]
    radii = _loop_radii(z0, values)
    base = base_fiber_point(f, z0, singular) if base is None else base
    sheets = {0: complex(base.location)}
    depth = {0: 0}
    perms = [dict() for _ in values]
    inverse = [dict() for _ in values]
    queue = deque([0])
    complete = True
    cache: dict = {}
    while queue:
        v = queue.popleft()
        for k, c in enumerate(values):
            for direction, table in ((1, perms[k]), (-1, inverse[k])):
                end = lift_loop(f, sheets[v], z0, c, radii[k], direction, cache)
                tag = _match(sheets, end)
                if tag is None:
                    if depth[v] + 1 > window:
                        complete = False
                        continue
                    tag = len(sheets)
                    sheets[tag] = complex(end)
                    depth[tag] = depth[v] + 1
                    queue.append(tag)
                table[v] = tag
    if not complete:
        warnings.warn(
            f"fiber enumeration stopped at window {window}; more sheets exist",
            FiberEnumerationIncomplete,
            stacklevel=2,
        )
    return MonodromyTable(z0, values, perms, inverse, sheets, depth, 0, complete, radii)
