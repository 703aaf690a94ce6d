"""PQ-forms and ramification data in both directions.

Forward: the logarithmic derivative F''/F' = Q'/Q + P' and the positions
of the finite and infinite order ramification points.  Backward: fit the
Q-roots and P-coefficients to prescribed positions.  And the polynomial
approximants F_n' = Q (1 + P/n)^n whose skeletons converge to that of F.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import NoConvergence, SingularJacobian, TailNotConverged
from .lifting import FiberEnumerationIncomplete, anchor_points, genericity_gap, _config_scale
from .numerics import ApproximantForm, CPoly, PQForm, _snap, poly_roots
from .skeleton import ball_embed, finite_completion, pi1_rank, skeleton_build

TAIL_TOL = 1e-8
FIT_TOL = 1e-8
FIT_QUAD_TOL = 1e-12
MAX_ITER = 200
LAMBDA_MIN, LAMBDA_MAX = 1e-8, 1e2


@dataclass
class NonlinearityData:
    poles: list
    poly_part: CPoly
    degree_at_infinity: int


@dataclass
class RamData:
    finite: list  # [(critical value, order)]
    infinite: list  # [asymptotic value]
    d1: int = 0
    d2: int = 0
    tails: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "finite": [{"pos": [z.real, z.imag], "order": int(m)} for z, m in self.finite],
            "infinite": [[z.real, z.imag] for z in self.infinite],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RamData":
        finite = []
        for i, item in enumerate(data.get("finite", [])):
            if "pos" not in item or "order" not in item:
                raise KeyError(f"finite[{i}]")
            order = int(item["order"])
            if order < 2:
                raise ValueError(f"finite[{i}].order")
            finite.append((complex(*item["pos"]), order))
        infinite = [complex(*z) for z in data.get("infinite", [])]
        return cls(finite, infinite, len(infinite), sum(m - 1 for _, m in finite))


@dataclass
class FitResult:
    f: PQForm
    residual: float
    iterations: int
    converged: bool
    history: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# forward direction


def nonlinearity(f: PQForm, points: int = 256) -> NonlinearityData:
    """Poles and residues of Q'/Q by contour integrals, and the polynomial part P'."""
    poles = []
    if f.Q.degree > 0:
        roots = [z for z, _ in poly_roots(f.Q)]
        dQ = f.Q.deriv()
        theta = 2 * np.pi * np.arange(points) / points
        for z in roots:
            others = [abs(z - w) for w in roots if w != z]
            r = 0.4 * min(others) if others else 0.5 * (1 + abs(z))
            ring = z + r * np.exp(1j * theta)
            # (1/2 pi i) \oint Q'/Q dz with dz = i (ring - z) dtheta
            res = np.mean(dQ(ring) / f.Q(ring) * (ring - z))
            poles.append((complex(z), float(res.real)))
    dP = f.P.deriv()
    return NonlinearityData(poles, dP, f.P.degree - 1)


def ram_data(f: PQForm, integration_radius: float | None = None,
             tol: float | None = None) -> RamData:
    """Critical values with orders, and asymptotic values along the d1 sectors."""
    finite = []
    for z, m in f.critical_points():
        finite.append((complex(f.value(z, tol=tol)), m + 1))
    infinite, tails = [], []
    for theta in f.asymptotic_sectors():
        val, tail, _ = f.asymptotic_value(theta, radius=integration_radius, tol=tol)
        if not tail <= TAIL_TOL:
            raise TailNotConverged(f"tail bound {tail:.2e} at theta={theta:.4f}; increase the radius")
        infinite.append(_snap(complex(val)))
        tails.append(tail)
    return RamData(finite, infinite, f.P.degree, f.Q.degree, tails)


# ---------------------------------------------------------------------------
# inverse problem


class _Model:
    """Gauge-fixed PQ-forms: Q = lam prod (t - z_i)^k_i, P(0) = 0, F(0) = p, F'(0) = kappa."""

    def __init__(self, mults: Sequence[int], d1: int, p: complex, kappa: complex):
        self.mults = list(mults)
        self.d1 = d1
        self.p = complex(p)
        self.kappa = complex(kappa)
        self.sector_ref: list[float] | None = None

    @property
    def size(self) -> int:
        return len(self.mults) + self.d1

    def build(self, x: np.ndarray) -> PQForm:
        c = x[0::2] + 1j * x[1::2]
        roots, pc = c[:len(self.mults)], c[len(self.mults):]
        Q = CPoly([1])
        denom = 1 + 0j
        for z, k in zip(roots, self.mults):
            Q = Q * CPoly([-z, 1]) ** k
            denom *= (-z) ** k
        if abs(denom) < 1e-14:
            raise SingularJacobian("a Q-root reached the gauge point 0")
        P = CPoly([0] + list(pc)) if self.d1 else CPoly([0])
        return PQForm(P, Q * (self.kappa / denom), 0j, self.p)

    def roots(self, x):
        c = x[0::2] + 1j * x[1::2]
        return c[:len(self.mults)]

    def sectors(self, f: PQForm) -> list[float]:
        d = self.d1
        if d == 0:
            return []
        base = (math.pi - cmath.phase(f.P.lead)) / d
        cand = [base + 2 * math.pi * j / d for j in range(d)]
        if self.sector_ref is None:
            return cand
        out = []
        for ref in self.sector_ref:
            # the sector nearest (mod 2 pi) to the reference direction
            best = min(cand, key=lambda t: abs(cmath.phase(cmath.exp(1j * (t - ref)))))
            out.append(ref + cmath.phase(cmath.exp(1j * (best - ref))))
        return out

    def positions(self, x: np.ndarray) -> np.ndarray:
        f = self.build(x)
        vals = [f.value(z, tol=FIT_QUAD_TOL) for z in self.roots(x)]
        for th in self.sectors(f):
            v, _, _ = f.asymptotic_value(th, tol=FIT_QUAD_TOL)
            vals.append(v)
        return np.array(vals, dtype=complex)


def _pack(values) -> np.ndarray:
    values = np.asarray(values, dtype=complex)
    out = np.empty(2 * values.size)
    out[0::2], out[1::2] = values.real, values.imag
    return out


def _init_vector(init: PQForm, target: RamData) -> tuple[np.ndarray, list]:
    crit = init.critical_points() if init.Q.degree else []
    mults = [m for _, m in crit]
    want = sorted(m - 1 for _, m in target.finite)
    if sorted(mults) != want:
        raise ValueError(f"init Q-root multiplicities {sorted(mults)} do not match target {want}")
    if init.P.degree != target.d1 or len(target.infinite) != target.d1:
        raise ValueError(f"init has deg P = {init.P.degree}, target needs {target.d1}")
    coeffs = [z for z, _ in crit] + list(init.P.coeffs[1:init.P.degree + 1])
    return _pack(coeffs), mults


def _assignment(achieved: np.ndarray, model: _Model, target: RamData) -> np.ndarray:
    """Target value for each achieved slot, by minimal total distance."""
    nf = len(model.mults)
    out = np.empty(model.size, dtype=complex)
    tf = [(z, m - 1) for z, m in target.finite]
    for k in set(model.mults):
        slots = [i for i, m in enumerate(model.mults) if m == k]
        cands = [z for z, m in tf if m == k]
        cost = np.abs(achieved[slots][:, None] - np.array(cands)[None, :])
        r, c = linear_sum_assignment(cost)
        for i, j in zip(r, c):
            out[slots[i]] = cands[j]
    if model.d1:
        cands = np.array(target.infinite)
        cost = np.abs(achieved[nf:][:, None] - cands[None, :])
        r, c = linear_sum_assignment(cost)
        for i, j in zip(r, c):
            out[nf + i] = cands[j]
    return out


def fit_pq(target: RamData, init: PQForm, normalization: tuple | None = None,
           max_iter: int = MAX_ITER, tol: float = FIT_TOL) -> FitResult:
    """Levenberg-Marquardt on Q-roots and P-coefficients to hit target positions.

    ``normalization`` = (F(0), F'(0)) fixes the affine gauge; by default it is
    read off ``init``.
    """
    if normalization is None:
        normalization = (init.value(0j), complex(init.fprime(0j)))
    p, kappa = (complex(v) for v in normalization)
    if kappa == 0:
        raise ValueError("F'(0) must be nonzero")
    x, mults = _init_vector(init, target)
    model = _Model(mults, target.d1, p, kappa)
    if model.size == 0:
        f = model.build(x)
        return FitResult(f, 0.0, 0, True)
    model.sector_ref = model.sectors(model.build(x))
    achieved = model.positions(x)
    goal = _assignment(achieved, model, target)

    def residual(x):
        return _pack(model.positions(x) - goal)

    r = residual(x)
    lam = 1e-3
    history = [float(np.max(np.abs(r[0::2] + 1j * r[1::2])))]
    best = (history[0], x.copy())
    it = 0
    while it < max_iter:
        err = float(np.max(np.abs(r[0::2] + 1j * r[1::2])))
        if err <= tol:
            return FitResult(model.build(x), err, it, True, history)
        it += 1
        J = np.empty((r.size, x.size))
        for i in range(x.size):
            step = 1e-6 * max(1.0, abs(x[i]))
            xp, xm = x.copy(), x.copy()
            xp[i] += step
            xm[i] -= step
            J[:, i] = (residual(xp) - residual(xm)) / (2 * step)
        sv = np.linalg.svd(J, compute_uv=False)
        if sv[-1] <= 1e-12 * sv[0]:
            raise SingularJacobian(f"Jacobian rank deficient (cond {sv[0] / max(sv[-1], 1e-300):.2e}); perturb init")
        JtJ = J.T @ J
        g = J.T @ r
        improved = False
        while not improved:
            A = JtJ + lam * np.diag(np.diag(JtJ) + 1e-12)
            dx = -np.linalg.solve(A, g)
            try:
                r_new = residual(x + dx)
                ok = np.all(np.isfinite(r_new)) and np.linalg.norm(r_new) < np.linalg.norm(r)
            except (ArithmeticError, ValueError, SingularJacobian, OverflowError):
                ok = False
            if ok:
                x, r = x + dx, r_new
                lam = max(lam / 10, LAMBDA_MIN)
                improved = True
            elif lam >= LAMBDA_MAX:
                break
            else:
                lam = min(lam * 10, LAMBDA_MAX)
        err = float(np.max(np.abs(r[0::2] + 1j * r[1::2])))
        history.append(err)
        if err < best[0]:
            best = (err, x.copy())
        if not improved:
            break
    err = float(np.max(np.abs(r[0::2] + 1j * r[1::2])))
    if err <= tol:
        return FitResult(model.build(x), err, it, True, history)
    fit = FitResult(model.build(best[1]), best[0], it, False, history)
    raise NoConvergence(f"no convergence after {it} iterations; best residual {best[0]:.3e}", fit)


def gauge(f: PQForm) -> tuple[complex, complex]:
    """(F(0), F'(0)), the normalization that pins down the affine reparametrization."""
    return complex(f.value(0j)), complex(f.fprime(0j))


# ---------------------------------------------------------------------------
# approximants


def p_scale(P: CPoly) -> float:
    """Size of n at which the roots of P = -n have left the unit scale."""
    if P.degree < 1:
        return 1.0
    return abs(P.lead) * 10.0 ** (P.degree - 1)


def census(f: PQForm, n: int) -> dict:
    """Critical points of F_n: the roots of Q, and the roots of P + n with multiplicity times n."""
    q_roots = [(z, m) for z, m in poly_roots(f.Q)] if f.Q.degree else []
    p_roots = [(z, m * n) for z, m in poly_roots(f.P + n)] if f.P.degree else []
    count = sum(m for _, m in q_roots) + sum(m for _, m in p_roots)
    return {
        "n": n,
        "q_roots": q_roots,
        "p_roots": p_roots,
        "critical_count": count,
        "expected_count": f.Q.degree + n * f.P.degree,
        "min_p_root_modulus": min((abs(z) for z, _ in p_roots), default=math.inf),
    }


def aligned_basevalue(charts: Sequence, seed: int = 0, max_draws: int = 10_000) -> complex:
    """A base value generic for every chart, whose anchor path keeps clear of all their singular values.

    The anchor path is the value segment from F(z_b) to z0; keeping it away from
    every chart's singular values makes the base sheets of F and of F_n correspond.
    """
    values = [[sv.value for sv in c.singular_values()] for c in charts]
    flat = [v for vs in values for v in vs]
    scale = _config_scale(flat)
    # first anchor that is regular for every chart, as in base_fiber_point
    anchor = next((a for a in anchor_points(charts[0].base_point)
                   if all(abs(c.fprime(a)) >= 1e-8 for c in charts)), charts[0].base_point)
    start = complex(charts[0].value(anchor))
    center = complex(np.mean(flat)) if flat else start
    rng = np.random.default_rng(seed)
    margin = 0.05 * scale
    for attempt in range(max_draws):
        if attempt and attempt % 2000 == 0:
            margin *= 0.5
        x, y = rng.uniform(-scale, scale, size=2)
        z0 = center + complex(x, y)
        if any(genericity_gap(z0, vs) < margin for vs in values if vs):
            continue
        seg = z0 - start
        clear = True
        for v in flat:
            t = min(1.0, max(0.0, ((v - start) * seg.conjugate()).real / abs(seg) ** 2)) if seg else 0.0
            if abs(start + t * seg - v) < margin:
                clear = False
                break
        if clear:
            return complex(round(z0.real, 12), round(z0.imag, 12))
    raise ValueError("no aligned base value found")


def convergence_report(f: PQForm, ns: Sequence[int], radius: int, z0: complex | None = None,
                       seed: int = 0, full_skeleton_cap: int = 64) -> list[dict]:
    """Census, completed-skeleton rank and ball embeddings for each approximant F_n."""
    approx = [ApproximantForm(f, n) for n in ns]
    if z0 is None:
        z0 = aligned_basevalue([f] + approx, seed=seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", FiberEnumerationIncomplete)
        g = skeleton_build(f, z0, radius)
    rows = []
    for n, fn in zip(ns, approx):
        row = census(f, n)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", FiberEnumerationIncomplete)
            gn = skeleton_build(fn, z0, radius)
            sheets = fn.d2 + 1
            rank = None
            if sheets <= full_skeleton_cap:
                full = skeleton_build(fn, z0, sheets)
                rank = pi1_rank(finite_completion(full))
        row["pi1_rank_completed"] = rank
        row["embeds"] = {r: ball_embed(g, gn, r) for r in range(1, radius + 1)}
        row["z0"] = complex(z0)
        rows.append(row)
    return rows
