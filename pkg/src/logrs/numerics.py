"""Complex polynomials, root finding, and evaluation of F(z) = c0 + int Q e^P.

Two chart types are provided.  ``PQForm`` is the entire function
F(z) = c0 + int_{z_b}^{z} Q(t) e^{P(t)} dt and ``ApproximantForm`` is the
polynomial F_n with F_n' = Q (1 + P/n)^n, kept in factored form because the
expanded monomial coefficients of F_n are useless for evaluation far from 0.
Both expose the same small interface used by the lifting code:
``value``, ``fprime``, ``log_derivative``, ``increment``, ``critical_points``
and ``singular_values``.
"""

from __future__ import annotations

import cmath
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import numpy.polynomial.polynomial as npoly

from .errors import DegreeZero, IllConditioned, OverflowGuard, QuadratureFailure

EPS = np.finfo(float).eps
QUAD_TOL = 1e-10
PANEL_BUDGET = 10_000
COMPENSATED_PANELS = 1_000
CLUSTER_RTOL = 1e-6


def default_tol() -> float:
    """Absolute quadrature tolerance; LOGRS_TOL overrides the default 1e-10."""
    raw = os.environ.get("LOGRS_TOL")
    if raw:
        try:
            val = float(raw)
        except ValueError:
            return QUAD_TOL
        if val > 0:
            return val
    return QUAD_TOL


# ---------------------------------------------------------------------------
# polynomials


class CPoly:
    """Complex polynomial with coefficients in ascending degree."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        c = np.atleast_1d(np.asarray(coeffs, dtype=complex)).ravel().copy()
        if c.size == 0:
            c = np.zeros(1, dtype=complex)
        nz = np.nonzero(c)[0]
        c = c[: nz[-1] + 1] if nz.size else c[:1] * 0
        c.setflags(write=False)
        self.coeffs = c

    @classmethod
    def from_roots(cls, roots, lead=1.0) -> "CPoly":
        roots = list(roots)
        if not roots:
            return cls([lead])
        return cls(lead * npoly.polyfromroots(np.asarray(roots, dtype=complex)))

    @classmethod
    def x(cls) -> "CPoly":
        return cls([0, 1])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def lead(self) -> complex:
        return complex(self.coeffs[-1])

    def is_zero(self) -> bool:
        return self.degree == 0 and self.coeffs[0] == 0

    def __call__(self, z):
        c = self.coeffs
        if np.ndim(z) == 0:
            z = complex(z)
            acc = 0j
            for a in c[::-1]:
                acc = acc * z + a
            return acc
        z = np.asarray(z, dtype=complex)
        acc = np.zeros_like(z)
        for a in c[::-1]:
            acc = acc * z + a
        return acc

    def deriv(self, m: int = 1) -> "CPoly":
        if self.degree < m:
            return CPoly([0])
        return CPoly(npoly.polyder(self.coeffs, m))

    def integ(self, at=0.0, value=0.0) -> "CPoly":
        """Antiderivative G with G(at) = value."""
        g = CPoly(npoly.polyint(self.coeffs))
        return g + (complex(value) - g(complex(at)))

    def taylor_shift(self, c: complex) -> "CPoly":
        """Coefficients of p(z + c)."""
        b = list(self.coeffs)
        n = len(b)
        for i in range(n - 1):
            for j in range(n - 2, i - 1, -1):
                b[j] += c * b[j + 1]
        return CPoly(b)

    def _coerce(self, other) -> "CPoly":
        return other if isinstance(other, CPoly) else CPoly([other])

    def __add__(self, other):
        return CPoly(npoly.polyadd(self.coeffs, self._coerce(other).coeffs))

    __radd__ = __add__

    def __neg__(self):
        return CPoly(-self.coeffs)

    def __sub__(self, other):
        return CPoly(npoly.polysub(self.coeffs, self._coerce(other).coeffs))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, CPoly):
            return CPoly(npoly.polymul(self.coeffs, other.coeffs))
        return CPoly(self.coeffs * complex(other))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return CPoly(self.coeffs / complex(scalar))

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        result, base = CPoly([1]), self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if not isinstance(other, CPoly):
            return NotImplemented
        return self.coeffs.shape == other.coeffs.shape and bool(np.all(self.coeffs == other.coeffs))

    def __hash__(self):
        return hash(tuple(self.coeffs))

    def allclose(self, other: "CPoly", rtol=1e-10, atol=1e-12) -> bool:
        n = max(len(self.coeffs), len(other.coeffs))
        a = np.zeros(n, complex)
        b = np.zeros(n, complex)
        a[: len(self.coeffs)] = self.coeffs
        b[: len(other.coeffs)] = other.coeffs
        return bool(np.allclose(a, b, rtol=rtol, atol=atol))

    def __repr__(self):
        return f"CPoly({[complex(c) for c in self.coeffs]})"


# ---------------------------------------------------------------------------
# roots


@dataclass(frozen=True)
class RootList:
    entries: tuple  # ((location, multiplicity), ...)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    @property
    def locations(self) -> list[complex]:
        return [z for z, _ in self.entries]

    @property
    def total_multiplicity(self) -> int:
        return sum(m for _, m in self.entries)


def _aberth(a: np.ndarray, maxiter: int = 600) -> np.ndarray:
    d = len(a) - 1
    a = a / a[-1]
    da = npoly.polyder(a)
    # Fujiwara bound; the Cauchy radius 1 + max|a_i| is astronomically loose
    # for expanded powers such as (1 + z/n)^n
    k = np.arange(1, d + 1)
    radius = 2.0 * float(np.max(np.abs(a[d - k]) ** (1.0 / k)))
    radius = max(radius, 1e-300)
    z = radius * np.exp(1j * (2 * np.pi * np.arange(d) / d + 0.4))
    stalled = 0
    for _ in range(maxiter):
        pz = npoly.polyval(z, a)
        dpz = npoly.polyval(z, da)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            ratio = np.where(pz == 0, 0, pz / np.where(dpz == 0, EPS, dpz))
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, np.inf)
            s = np.sum(1.0 / diff, axis=1)
            w = ratio / (1.0 - ratio * s)
        w = np.where(np.isfinite(w), w, 0)
        z = z - w
        small = np.abs(w) <= 4 * EPS * (1 + np.abs(z))
        if np.all(small):
            break
        # multiple roots converge linearly and then wander at rounding level
        stalled = stalled + 1 if np.max(np.abs(w)) < 1e-9 * (1 + radius) else 0
        if stalled > 60:
            break
    return z


def _taylor_abs(p: CPoly, c: complex) -> np.ndarray:
    """|p^(j)(c) / j!| for j = 0..deg p."""
    out = np.empty(p.degree + 1)
    coeffs = np.asarray(p.coeffs)
    fact = 1.0
    for j in range(p.degree + 1):
        if j:
            coeffs = npoly.polyder(coeffs)
            fact *= j
        out[j] = abs(npoly.polyval(c, coeffs)) / fact
    return out


def _cluster_ok(p: CPoly, members) -> bool:
    """Can ``members`` be a rounding-smeared multiple root of p?

    The k roots with centroid c and spread s qualify when s <= 1e-6 (1+|c|),
    or when the Taylor terms of p at c below degree k are at rounding
    level on the disc of radius s while the degree-k term is not.
    """
    c = complex(np.mean(members))
    k = len(members)
    s = max(abs(m - c) for m in members)
    if s <= CLUSTER_RTOL * (1 + abs(c)):
        return True
    b = _taylor_abs(p, c)
    if k >= len(b) or b[k] == 0:
        return False
    powers = max(1.0, abs(c)) ** np.arange(p.degree + 1)
    noise = 8 * EPS * (p.degree + 1) * float(np.sum(np.abs(p.coeffs) * powers))
    rho = 10.0 * (noise / b[k]) ** (1.0 / k)
    if s > rho:
        return False
    lower = max(b[j] * s ** j for j in range(k))
    return lower <= 1e3 * noise


def _clusters(p: CPoly, raw: np.ndarray) -> list[list[complex]]:
    free = [complex(z) for z in raw]
    out = []
    while free:
        seed = free[0]
        order = sorted(range(len(free)), key=lambda i: abs(free[i] - seed))
        dist = [abs(free[i] - seed) for i in order]
        chosen = 1
        for k in range(len(free), 1, -1):
            # only cut at a visible gap in the distance profile
            if k < len(free) and dist[k] <= 2 * dist[k - 1]:
                continue
            if _cluster_ok(p, [free[i] for i in order[:k]]):
                chosen = k
                break
        group = [free[i] for i in order[:chosen]]
        out.append(group)
        taken = set(order[:chosen])
        free = [z for i, z in enumerate(free) if i not in taken]
    return out


def _polish(p: CPoly, c: complex, k: int, radius: float) -> complex:
    q = p.deriv(k - 1)
    dq = q.deriv()
    z = c
    for _ in range(8):
        d = dq(z)
        if d == 0:
            break
        step = q(z) / d
        z = z - step
        if abs(step) <= 4 * EPS * (1 + abs(z)):
            break
    if not np.isfinite(z) or abs(z - c) > max(radius, 1e-12 * (1 + abs(c))):
        return c
    return complex(z)


def poly_roots(p: CPoly) -> RootList:
    """All roots of ``p`` with multiplicities.

    Simultaneous Aberth iteration, then grouping of nearby computed roots
    into a multiple root when the Taylor coefficients at the group centre
    are consistent with one (rounding smear of a k-fold root grows like
    eps^(1/k)).  Reliable for modest multiplicities; expanded high powers
    such as (1 + z/32)^32 are beyond double precision.
    """
    if p.degree < 1:
        raise DegreeZero("polynomial is constant")
    if p.degree == 1:
        z = -p.coeffs[0] / p.coeffs[1]
        return RootList(((complex(z), 1),))
    raw = _aberth(np.asarray(p.coeffs))
    clusters = _clusters(p, raw)

    def spread(members):
        c = complex(np.mean(members))
        return c, max(abs(m - c) for m in members)

    entries = []
    scale = 1.0 + float(np.max(np.abs(p.coeffs)))
    for cl in clusters:
        c, s = spread(cl)
        k = len(cl)
        z = _polish(p, c, k, max(s, 1e-9 * (1 + abs(c))))
        resid = abs(p(z))
        bound = 1e-9 * scale * float(np.float64(max(1.0, abs(z))) ** p.degree)
        if not resid <= bound:
            raise IllConditioned(f"root {z} has residual {resid:.3e} > {bound:.3e}")
        entries.append((z, k))
    entries.sort(key=lambda e: (round(e[0].real, 9), round(e[0].imag, 9)))
    return RootList(tuple(entries))


# ---------------------------------------------------------------------------
# adaptive Gauss-Kronrod quadrature along polylines

_XK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0,
])
_WK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
GK_NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
GK_WEIGHTS = np.concatenate([_WK[:-1], _WK[::-1]])
_G_WEIGHTS = np.zeros(15)
_G_WEIGHTS[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])


def integrate_segment(func, a: complex, b: complex, tol: float, budget: int = PANEL_BUDGET,
                      initial_panels: int = 1) -> tuple[complex, int]:
    """Adaptive G7/K15 integral of ``func`` along the straight segment [a, b].

    ``func`` is vectorised over complex arrays.  Panels are refined in
    batches until every panel meets its share of ``tol`` (or sits at the
    rounding floor).  Returns the integral and the number of panels used.
    """
    if a == b:
        return 0j, 0
    dz = b - a
    todo = np.linspace(0.0, 1.0, max(1, initial_panels) + 1)
    lo, hi = todo[:-1], todo[1:]
    accepted = []
    used = 0
    while lo.size:
        used += lo.size
        if used > budget:
            raise QuadratureFailure(
                f"panel budget {budget} exhausted on [{a}, {b}]; integrand too oscillatory"
            )
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        t = mid[:, None] + half[:, None] * GK_NODES[None, :]
        with np.errstate(over="ignore", invalid="ignore"):
            vals = func(a + t * dz) * dz
        if not np.all(np.isfinite(vals)):
            raise QuadratureFailure(f"integrand overflow on [{a}, {b}]")
        k = (vals @ GK_WEIGHTS) * half
        g = (vals @ _G_WEIGHTS) * half
        err = np.abs(k - g)
        floor = 50 * EPS * (np.abs(vals) @ GK_WEIGHTS) * half
        ok = (err <= tol * 2 * half) | (err <= floor) | (half < 1e-15)
        accepted.extend(k[ok].tolist())
        bad_lo, bad_mid, bad_hi = lo[~ok], mid[~ok], hi[~ok]
        lo = np.concatenate([bad_lo, bad_mid])
        hi = np.concatenate([bad_mid, bad_hi])
    if len(accepted) > COMPENSATED_PANELS:
        total = complex(math.fsum(v.real for v in accepted), math.fsum(v.imag for v in accepted))
    else:
        total = complex(sum(accepted))
    return total, used


def integrate_polyline(func, points: Sequence[complex], tol: float | None = None,
                       budget: int = PANEL_BUDGET) -> complex:
    tol = default_tol() if tol is None else tol
    pts = [complex(p) for p in points]
    total_len = sum(abs(pts[i + 1] - pts[i]) for i in range(len(pts) - 1)) or 1.0
    parts = []
    remaining = budget
    for a, b in zip(pts[:-1], pts[1:]):
        share = tol * abs(b - a) / total_len
        val, used = integrate_segment(func, a, b, share, remaining,
                                      initial_panels=max(1, int(math.ceil(abs(b - a)))))
        remaining -= used
        parts.append(val)
    return complex(math.fsum(v.real for v in parts), math.fsum(v.imag for v in parts))


# ---------------------------------------------------------------------------
# charts


@dataclass(frozen=True)
class SingularValue:
    """A critical or asymptotic value together with what sits over it."""

    value: complex
    critical: tuple = ()  # ((preimage, order), ...), order = local degree
    sectors: tuple = ()  # asymptotic directions theta over this value

    @property
    def is_asymptotic(self) -> bool:
        return bool(self.sectors)


def _snap(z: complex) -> complex:
    """Zero out a real or imaginary part that is pure rounding residue."""
    floor = 1e-20 * (1 + abs(z))
    return complex(0.0 if abs(z.real) < floor else z.real, 0.0 if abs(z.imag) < floor else z.imag)


def _group_values(items, key_tol=1e-9):
    """Merge (value, kind, payload) triples whose values agree to key_tol."""
    groups: list[list] = []
    for value, kind, payload in items:
        for g in groups:
            if abs(g[0] - value) <= key_tol * (1 + abs(value)):
                g[1 if kind == "crit" else 2].append(payload)
                break
        else:
            groups.append([value, [payload] if kind == "crit" else [], [payload] if kind == "asym" else []])
    out = [SingularValue(_snap(complex(v)), tuple(c), tuple(s)) for v, c, s in groups]
    out.sort(key=lambda sv: (round(sv.value.real, 9), round(sv.value.imag, 9)))
    return out


class _Chart:
    base_point: complex
    base_value: complex

    def fprime(self, z):
        raise NotImplementedError

    def log_derivative(self, z):
        raise NotImplementedError

    def critical_points(self) -> list[tuple[complex, int]]:
        """Zeros of F' as (location, multiplicity)."""
        raise NotImplementedError

    def asymptotic_sectors(self) -> list[float]:
        return []

    def increment(self, a: complex, b: complex, tol: float = 1e-13) -> complex:
        """int_a^b F'(t) dt along the straight segment."""
        val, _ = integrate_segment(self.fprime, complex(a), complex(b), tol)
        return val

    def value(self, z, path: Sequence[complex] | None = None, tol: float | None = None) -> complex:
        pts = [self.base_point, complex(z)] if path is None else [complex(p) for p in path]
        if abs(pts[0] - self.base_point) > 1e-12 * (1 + abs(self.base_point)) or abs(pts[-1] - complex(z)) > 1e-12 * (1 + abs(z)):
            raise ValueError("path must run from the base point to z")
        return self.base_value + integrate_polyline(self.fprime, pts, tol)

    __call__ = value

    def derivatives(self, z) -> tuple[complex, complex]:
        z = complex(z)
        return complex(self.fprime(z)), complex(self._fsecond(z))

    def _fsecond(self, z):
        raise NotImplementedError

    def asymptotic_value(self, theta: float, radius: float | None = None,
                         tol: float | None = None) -> tuple[complex, float, float]:
        raise ValueError("this chart has no asymptotic values")

    def singular_values(self, tol: float | None = None) -> list[SingularValue]:
        items = []
        for z, m in self.critical_points():
            items.append((self.value(z, tol=tol), "crit", (z, m + 1)))
        for theta in self.asymptotic_sectors():
            val, _, _ = self.asymptotic_value(theta, tol=tol)
            items.append((val, "asym", theta))
        return _group_values(items)

    def scale(self) -> float:
        svs = [abs(sv.value) for sv in self.singular_values()]
        return 1.0 + max(svs + [abs(self.base_value)])


@dataclass(frozen=True, eq=False)
class PQForm(_Chart):
    """F(z) = base_value + int_{base_point}^{z} Q(t) e^{P(t)} dt."""

    P: CPoly
    Q: CPoly
    base_point: complex = 0j
    base_value: complex = 0j
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.P, CPoly):
            object.__setattr__(self, "P", CPoly(self.P))
        if not isinstance(self.Q, CPoly):
            object.__setattr__(self, "Q", CPoly(self.Q))
        if self.Q.is_zero():
            raise ValueError("Q must not be identically zero")
        object.__setattr__(self, "base_point", complex(self.base_point))
        object.__setattr__(self, "base_value", complex(self.base_value))

    @property
    def d1(self) -> int:
        return self.P.degree

    @property
    def d2(self) -> int:
        return self.Q.degree

    def _poly_antiderivative(self) -> CPoly:
        if "anti" not in self._cache:
            self._cache["anti"] = self.Q.integ(self.base_point, 0) * cmath.exp(self.P.coeffs[0])
        return self._cache["anti"]

    def fprime(self, z):
        return self.Q(z) * np.exp(self.P(z))

    def log_derivative(self, z):
        return self.Q.deriv()(z) / self.Q(z) + self.P.deriv()(z)

    def _fsecond(self, z):
        return (self.Q.deriv()(z) + self.Q(z) * self.P.deriv()(z)) * np.exp(self.P(z))

    def derivatives(self, z) -> tuple[complex, complex]:
        z = complex(z)
        e = cmath.exp(self.P(z))
        return self.Q(z) * e, (self.Q.deriv()(z) + self.Q(z) * self.P.deriv()(z)) * e

    def increment(self, a, b, tol=1e-13):
        if self.P.degree == 0:
            g = self._poly_antiderivative()
            return g(complex(b)) - g(complex(a))
        return super().increment(a, b, tol)

    def value(self, z, path=None, tol=None):
        if self.P.degree == 0:
            if path is not None:
                pts = [complex(p) for p in path]
                if abs(pts[0] - self.base_point) > 1e-12 * (1 + abs(self.base_point)) or abs(pts[-1] - complex(z)) > 1e-12 * (1 + abs(z)):
                    raise ValueError("path must run from the base point to z")
            return self.base_value + self._poly_antiderivative()(complex(z))
        return super().value(z, path, tol)

    __call__ = value

    def critical_points(self):
        if "crit" not in self._cache:
            self._cache["crit"] = [] if self.Q.degree == 0 else list(poly_roots(self.Q))
        return self._cache["crit"]

    def asymptotic_sectors(self) -> list[float]:
        d = self.P.degree
        if d < 1:
            return []
        a = self.P.lead
        out = []
        for j in range(d):
            th = (math.pi - cmath.phase(a) + 2 * math.pi * j) / d
            out.append(math.atan2(math.sin(th), math.cos(th)))
        return sorted(out)

    def ray_radius(self, theta: float, target: float = -40.0) -> float:
        """Smallest doubling radius with Re P < target along the sector ray."""
        u = cmath.exp(1j * theta)
        r = max(1.0, 2 * abs(self.base_point))
        for _ in range(60):
            if self.P(r * u).real < target:
                # stay inside the decaying regime for the whole tail
                if self.P(2 * r * u).real < self.P(r * u).real:
                    return r
            r *= 1.5
        raise OverflowError("no decaying radius found")

    def asymptotic_value(self, theta, radius=None, tol=None):
        """Limit of F along the ray at angle theta; returns (value, tail bound, radius)."""
        r = self.ray_radius(theta) if radius is None else float(radius)
        end = r * cmath.exp(1j * theta)
        path = [self.base_point, 0j, end] if self.base_point != 0 else [0j, end]
        val = self.value(end, path=path, tol=tol)
        dp = self.P.deriv()(end)
        tail = abs(self.Q(end) * cmath.exp(self.P(end)) / dp) if dp != 0 else math.inf
        return val, tail, r

    def singular_values(self, tol=None):
        key = ("sv", tol)
        if key not in self._cache:
            self._cache[key] = super().singular_values(tol)
        return self._cache[key]


def pq_eval(f: _Chart, z: complex, path: Sequence[complex] | None = None,
            tol: float | None = None) -> complex:
    """c0 + int Q e^P along ``path`` (default: the straight segment from z_b)."""
    return f.value(z, path=path, tol=tol)


def pq_derivatives(f: _Chart, z: complex) -> tuple[complex, complex]:
    """(F'(z), F''(z)) = (Q e^P, (Q' + Q P') e^P)."""
    return f.derivatives(z)


def approximant(f: PQForm, n: int) -> CPoly:
    """Polynomial F_n with F_n' = Q (1 + P/n)^n and F_n(z_b) = c0."""
    if n < 1:
        raise ValueError("n must be >= 1")
    inner = CPoly([1]) + f.P / n
    with np.errstate(over="ignore", invalid="ignore"):
        deriv = f.Q * inner ** n
    c = deriv.coeffs
    if not np.all(np.isfinite(c)) or (c.size and np.max(np.abs(c)) > 1e300):
        raise OverflowGuard(f"coefficients overflow for n={n}, deg P={f.P.degree}")
    return deriv.integ(f.base_point, f.base_value)


class ApproximantForm(_Chart):
    """F_n kept as Q (1+P/n)^n so that F_n' evaluates stably everywhere."""

    def __init__(self, f: PQForm, n: int):
        if n < 1:
            raise ValueError("n must be >= 1")
        self.parent = f
        self.n = int(n)
        self.P = f.P
        self.Q = f.Q
        self.base_point = f.base_point
        self.base_value = f.base_value
        self._crit = None
        self._sv = {}

    @property
    def d1(self) -> int:
        return 0

    @property
    def d2(self) -> int:
        return self.Q.degree + self.n * self.P.degree

    def fprime(self, z):
        return self.Q(z) * (1 + self.P(z) / self.n) ** self.n

    def log_derivative(self, z):
        return self.Q.deriv()(z) / self.Q(z) + self.P.deriv()(z) / (1 + self.P(z) / self.n)

    def _fsecond(self, z):
        base = 1 + self.P(z) / self.n
        return (self.Q.deriv()(z) * base + self.Q(z) * self.P.deriv()(z)) * base ** (self.n - 1)

    def derivatives(self, z):
        z = complex(z)
        return complex(self.fprime(z)), complex(self._fsecond(z))

    def critical_points(self):
        if self._crit is None:
            pts: list[list] = []

            def add(z, m):
                for p in pts:
                    if abs(p[0] - z) <= 1e-9 * (1 + abs(z)):
                        p[1] += m
                        return
                pts.append([z, m])

            if self.Q.degree > 0:
                for z, m in poly_roots(self.Q):
                    add(z, m)
            if self.P.degree > 0:
                for z, m in poly_roots(self.P + self.n):
                    add(z, m * self.n)
            self._crit = [(complex(z), int(m)) for z, m in pts]
        return self._crit

    def singular_values(self, tol=None):
        if tol not in self._sv:
            self._sv[tol] = super().singular_values(tol)
        return self._sv[tol]

    def as_cpoly(self) -> CPoly:
        return approximant(self.parent, self.n)


def pqform_from_polynomial(F: CPoly, base_point: complex = 0j) -> PQForm:
    """The PQ-form with P = 0 and Q = F' reproducing the polynomial F."""
    if F.degree < 1:
        raise DegreeZero("constant polynomial has no chart")
    return PQForm(CPoly([0]), F.deriv(), base_point, F(complex(base_point)))


def as_complex(x) -> complex:
    if isinstance(x, (list, tuple)) and len(x) == 2:
        return complex(float(x[0]), float(x[1]))
    return complex(x)


def poly_from_values(values: Iterable) -> CPoly:
    return CPoly([as_complex(v) for v in values])
