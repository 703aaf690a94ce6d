"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run standalone with ``python3 tests/test_acceptance.py`` or through pytest
(the lines are collected into the terminal summary).
"""

import math
import time
import warnings

import networkx as nx
import numpy as np
import pytest

from logrs.errors import FiberEnumerationIncomplete
from logrs.geometry import SurfacePoint, kn_cells, level_set_counts, parabolicity, ramification_count
from logrs.lifting import FiberPoint, choose_generic_basevalue, lift_segment
from logrs.numerics import CPoly, PQForm, pqform_from_polynomial
from logrs.skeleton import (
    ball_embed,
    finite_completion,
    pi1_rank,
    ram_cycles,
    skeleton_build,
    truncate,
)
from logrs.uniformize import census, convergence_report, fit_pq, gauge, nonlinearity, p_scale, ram_data

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # standalone run
    ACCEPTANCE_LINES = []

SQRT_PI_2 = 0.8862269254527580


def _report(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def _expo():
    return PQForm(CPoly([0, 1]), CPoly([1]), 0, 1)


def _gauss():
    return PQForm(CPoly([0, 0, -1]), CPoly([1]), 0, 0)


# ---------------------------------------------------------------------------
# 1, 2: cycle structure and retraction for z^d


def test_criterion_1_cycle_structure():
    details = []
    ok = True
    for d in range(2, 7):
        f = pqform_from_polynomial(CPoly([0] * d + [1]))
        t0 = time.perf_counter()
        g = skeleton_build(f, None, d, seed=d)
        elapsed = time.perf_counter() - t0
        rams = ram_cycles(g)
        feet0 = [r for r in rams if abs(r.projection) < 1e-12]
        good = (len(g.vertices) == d and len(rams) == 1 and len(feet0) == 1
                and feet0[0].order == d and len(feet0[0].edge_cycle) == d and elapsed < 1.0)
        ok &= good
        details.append(f"d={d}:{len(g.vertices)}v/order {feet0[0].order if feet0 else None}/{elapsed:.2f}s")
    _report(1, ok, ", ".join(details))


def test_criterion_2_retraction_rank():
    ok = True
    ranks = []
    for d in range(2, 7):
        f = pqform_from_polynomial(CPoly([0] * d + [1]))
        g = skeleton_build(f, None, d, seed=d)
        r, rc = pi1_rank(g), pi1_rank(finite_completion(g))
        ranks.append(f"d={d}:({r},{rc})")
        ok &= (r == 1 and rc == 0)
    _report(2, ok, "(rank, completed rank) " + " ".join(ranks))


# ---------------------------------------------------------------------------
# 3: lift-based monodromy versus dense root tracking


def _random_polynomial(rng):
    while True:
        d = int(rng.integers(2, 6))
        coeffs = rng.normal(size=d + 1) + 1j * rng.normal(size=d + 1)
        coeffs[-1] = 1.0 + 0j
        crit = np.roots(np.polyder(coeffs[::-1]))
        if len(crit) > 1 and min(abs(a - b) for i, a in enumerate(crit) for b in crit[i + 1:]) < 1e-3:
            continue
        values = np.polyval(coeffs[::-1], crit)
        if len(values) > 1 and min(abs(a - b) for i, a in enumerate(values) for b in values[i + 1:]) < 0.3:
            continue
        return coeffs, list(values)


def _oracle_monodromy(coeffs, z0, values, samples=1000):
    """Track all roots of F(w) = z along each loop by nearest-root matching."""
    hi_first = np.array(coeffs[::-1], dtype=complex)

    def fiber(z):
        c = hi_first.copy()
        c[-1] -= z
        return np.roots(c)

    sheets = fiber(z0)
    perms = []
    for k, c in enumerate(values):
        near = [abs(c - v) for j, v in enumerate(values) if j != k] + [abs(c - z0)]
        r = 0.5 * min(near)
        u = (c - z0) / abs(c - z0)
        p = c - r * u
        phi0 = np.angle(z0 - c)
        s = np.linspace(0, 1, samples)
        path = np.concatenate([
            z0 + s * (p - z0),
            c + r * np.exp(1j * (phi0 + 2 * np.pi * s)),
            p + s * (z0 - p),
        ])
        cur = sheets.copy()
        for z in path[1:]:
            roots = fiber(z)
            nxt = np.empty_like(cur)
            free = list(range(len(roots)))
            for i in np.argsort([np.min(np.abs(roots - w)) for w in cur]):
                j = min(free, key=lambda j: abs(roots[j] - cur[i]))
                free.remove(j)
                nxt[i] = roots[j]
            cur = nxt
        perms.append([int(np.argmin(np.abs(sheets - w))) for w in cur])
    return sheets, perms


def _labelled_digraph(edges):
    G = nx.MultiDiGraph()
    for u, v, foot in edges:
        G.add_edge(u, v, foot=foot)
    return G


def test_criterion_3_monodromy_oracle():
    rng = np.random.default_rng(20240301)
    matched = 0
    total = 20
    for case in range(total):
        coeffs, values = _random_polynomial(rng)
        f = pqform_from_polynomial(CPoly(coeffs))
        z0 = choose_generic_basevalue(values, seed=case)
        g = skeleton_build(f, z0, len(coeffs), seed=case)
        sheets, perms = _oracle_monodromy(coeffs, z0, values)
        # identify lift-based vertices with oracle sheets by location
        ident = {v: int(np.argmin(np.abs(sheets - g.locations[v]))) for v in g.vertices}
        feet = sorted(values, key=lambda z: (z.real, z.imag))
        foot_id = lambda z: min(range(len(feet)), key=lambda i: abs(feet[i] - z))
        lifted = sorted((ident[e.u], ident[e.v], foot_id(e.foot)) if e.u_side == "+" else
                        (ident[e.v], ident[e.u], foot_id(e.foot)) for e in g.edges)
        oracle = sorted((i, p[i], foot_id(c)) for c, p in zip(values, perms) for i in range(len(p)) if p[i] != i)
        iso = nx.is_isomorphic(_labelled_digraph(lifted), _labelled_digraph(oracle),
                               edge_match=lambda a, b: sorted(x["foot"] for x in a.values())
                               == sorted(x["foot"] for x in b.values()))
        if lifted == oracle and iso and len(set(ident.values())) == len(sheets):
            matched += 1
    _report(3, matched == total, f"{matched}/{total} random polynomials match the root-tracking oracle")


# ---------------------------------------------------------------------------
# 4: nonlinearity formula


def test_criterion_4_nonlinearity():
    rng = np.random.default_rng(4)
    ok_res = ok_poly = 0
    for _ in range(20):
        while True:
            k = int(rng.integers(1, 4))
            roots = rng.normal(size=k) + 1j * rng.normal(size=k)
            if k == 1 or min(abs(a - b) for i, a in enumerate(roots) for b in roots[i + 1:]) > 0.3:
                break
        mults = [1] * k
        while sum(mults) < 3 and rng.random() < 0.5:
            mults[int(rng.integers(0, k))] += 1
        Q = CPoly([1])
        for z, m in zip(roots, mults):
            Q = Q * CPoly([-z, 1]) ** m
        Q = Q * complex(rng.normal(), rng.normal())
        dP = int(rng.integers(0, 4))
        P = CPoly(rng.normal(size=dP + 1) + 1j * rng.normal(size=dP + 1))
        nl = nonlinearity(PQForm(P, Q))
        got = sorted(nl.poles, key=lambda p: (p[0].real, p[0].imag))
        want = sorted(zip(roots, mults), key=lambda p: (p[0].real, p[0].imag))
        if len(got) == len(want) and all(abs(r - m) <= 1e-8 and abs(z - w) < 1e-6
                                         for (z, r), (w, m) in zip(got, want)):
            ok_res += 1
        oracle = [i * P.coeffs[i] for i in range(1, len(P.coeffs))] or [0]
        if np.allclose(nl.poly_part.coeffs, oracle, rtol=0, atol=1e-10) or (
                dP == 0 and np.all(np.abs(nl.poly_part.coeffs) <= 1e-10)):
            ok_poly += 1
    _report(4, ok_res == 20 and ok_poly == 20, f"residues {ok_res}/20, poly_part {ok_poly}/20")


# ---------------------------------------------------------------------------
# 5: approximant structure


def test_criterion_5_approximant_census():
    ok = True
    notes = []
    for name, f in (("exp", _expo()), ("gauss", _gauss())):
        for n in (2, 4, 8, 16):
            c = census(f, n)
            ok &= c["critical_count"] == f.Q.degree + n * f.P.degree
        top = int(16 * p_scale(f.P))
        ns = sorted({2, 4, 8, 16, top // 4, top // 2, top})
        mods = [census(f, n)["min_p_root_modulus"] for n in ns]
        ok &= all(b >= a - 1e-12 for a, b in zip(mods, mods[1:])) and mods[-1] > 10
        notes.append(f"{name}: min|P=-n root| at n={top} is {mods[-1]:.3f}")
    _report(5, ok, "census identity exact for n in {2,4,8,16}; " + "; ".join(notes))


# ---------------------------------------------------------------------------
# 6: truncations of e^z


def test_criterion_6_truncation():
    g = skeleton_build(_expo(), 0.5 + 0.5j, 6)
    ranks_ok = True
    table = {}
    for n in range(1, 6):
        t = truncate(g, n)
        ranks_ok &= pi1_rank(finite_completion(t)) == 0
        for r in (1, 2, 3):
            table[(n, r)] = ball_embed(t, g, r)
    thresholds = {}
    for r in (1, 2, 3):
        n0 = None
        for n in range(5, 0, -1):
            if table[(n, r)]:
                n0 = n
            else:
                break
        thresholds[r] = n0
    ok = ranks_ok and all(v is not None for v in thresholds.values())
    _report(6, ok, f"completed ranks all 0: {ranks_ok}; n0(r) = {thresholds}")


# ---------------------------------------------------------------------------
# 7: Caratheodory stabilization of approximant skeletons


def test_criterion_7_stabilization():
    ok = True
    notes = []
    for name, f in (("exp", _expo()), ("gauss", _gauss())):
        rows = convergence_report(f, [4, 8, 16, 24, 32], 2)
        flags = {row["n"]: row["embeds"][2] for row in rows}
        ok &= all(flags[n] for n in flags if n >= 16)
        notes.append(f"{name}: {flags}")
    _report(7, ok, "ball_embed at r=2 " + "; ".join(notes))


# ---------------------------------------------------------------------------
# 8: parabolicity


def test_criterion_8_parabolicity():
    fixtures = {
        "z^2": pqform_from_polynomial(CPoly([0, 0, 1])),
        "z^3": pqform_from_polynomial(CPoly([0, 0, 0, 1])),
        "z^3-3z": pqform_from_polynomial(CPoly([0, -3, 0, 1])),
        "exp": _expo(),
        "gauss": _gauss(),
        "(t-1)^2(t+2)e^{t^2}": PQForm(CPoly([0, 0, 1]), CPoly([2, -3, 0, 1])),
    }
    verdicts = {k: parabolicity(ramification_count(f)).verdict for k, f in fixtures.items()}
    g = skeleton_build(fixtures["z^2"], 0.8 + 0.35j, 2)
    cells = kn_cells(g, (-2, 2, -2, 2), 4 / 199)
    w0 = SurfacePoint(g.base, g.z0)
    counts = level_set_counts(cells, w0, np.linspace(0.05, 2 * math.pi - 0.05, 64))
    nmax = max(counts.values())
    ok = all(v == "Parabolic" for v in verdicts.values()) and nmax <= 3 and cells.points.shape == (200, 200)
    _report(8, ok, f"verdicts all Parabolic: {set(verdicts.values())}; max n(theta) on 200x200 mesh = {nmax}")


# ---------------------------------------------------------------------------
# 9: KN cells for F' = (z - 1)(z + 1)


def _chord_hits_ray(a, b, c, d):
    cross = lambda u, v: (u.conjugate() * v).imag
    e = b - a
    den = cross(e, d)
    if abs(den) < 1e-15:
        return False
    t = cross(c - a, d) / den
    s = cross(c - a, e) / den
    return 0 <= t <= 1 and s >= 0


def test_criterion_9_kn_cells():
    f = pqform_from_polynomial(CPoly([0, -1, 0, 1 / 3]))
    g = skeleton_build(f, 0.1 + 0.5j, 2)
    h = 0.04
    cells = kn_cells(g, (-2, 2, -2, 2), h)
    rams = cells.rams
    principal = [v for v in g.vertices if all(v in {x for e in r.edge_cycle for x in (e.u, e.v)} for r in rams)]
    star = principal[0]
    si = cells.stars.index(star)
    N = cells.points.size
    flat = cells.points.ravel()
    feet = [r.projection for r in rams]
    slits = [(c, (c - g.z0) / abs(c - g.z0)) for c in feet]
    worst_bisector = 0.0
    worst_oracle = 0.0
    for node in np.flatnonzero(cells.boundary[si * N:(si + 1) * N]):
        z = complex(flat[node])
        worst_bisector = max(worst_bisector, abs(z.real))
        dists = []
        for c in feet:
            blocked = any(_chord_hits_ray(z, c, cc, d) for cc, d in slits if cc != c)
            dists.append(abs(z - c) if not blocked else math.inf)
        if all(math.isfinite(x) for x in dists):
            worst_oracle = max(worst_oracle, abs(dists[0] - dists[1]))
    # mesh distances against the straight-chord oracle on the principal star
    err = 0.0
    for node in range(0, N, 97):
        z = complex(flat[node])
        for k, c in enumerate(feet):
            if not any(_chord_hits_ray(z, c, cc, d) for cc, d in slits if cc != c):
                err = max(err, abs(cells.distances[k, si * N + node] - abs(z - c)))
    ok = len(principal) == 1 and worst_bisector <= 2 * h and worst_oracle <= 4 * h and err <= 1e-9
    _report(9, ok, f"max |Re z| on cell boundary = {worst_bisector:.4f} (2h = {2 * h}); "
                   f"oracle distance gap {worst_oracle:.4f}; mesh vs oracle {err:.1e}")


# ---------------------------------------------------------------------------
# 10: inverse problem round trip


def _random_target(rng):
    while True:
        dp = int(rng.integers(0, 3))
        dq = int(rng.integers(0, 3))
        if dp + dq == 0:
            continue
        roots = rng.uniform(-1, 1, dq) + 1j * rng.uniform(-1, 1, dq)
        if dq and min(abs(roots)) < 0.3:
            continue
        if dq == 2 and abs(roots[0] - roots[1]) < 0.5:
            continue
        pc = rng.uniform(-1, 1, dp) + 1j * rng.uniform(-1, 1, dp)
        if dp and abs(pc[-1]) < 0.3:
            continue
        lam = complex(rng.uniform(0.5, 1.5), rng.uniform(-0.5, 0.5))
        Q = CPoly.from_roots(roots, lam) if dq else CPoly([lam])
        return PQForm(CPoly([0] + list(pc)), Q, 0, complex(rng.uniform(-1, 1), rng.uniform(-1, 1)))


def _perturbed(f, rng):
    crit = [z for z, _ in f.critical_points()] if f.Q.degree else []
    roots = [z * (1 + 0.1 * np.exp(2j * np.pi * rng.random())) for z in crit]
    pc = [a * (1 + 0.1 * np.exp(2j * np.pi * rng.random())) for a in f.P.coeffs[1:]]
    Q = CPoly.from_roots(roots, f.Q.lead) if roots else f.Q
    return PQForm(CPoly([0] + pc), Q, 0, f.base_value)


def test_criterion_10_inverse_round_trip():
    rng = np.random.default_rng(10)
    wins = 0
    notes = []
    slow = False
    for case in range(10):
        f = _random_target(rng)
        target = ram_data(f)
        init = _perturbed(f, rng)
        t0 = time.perf_counter()
        try:
            res = fit_pq(target, init, gauge(f))
            back = ram_data(res.f)
            err = max([abs(a[0] - b[0]) for a, b in zip(sorted(back.finite, key=lambda x: (x[0].real, x[0].imag)),
                                                            sorted(target.finite, key=lambda x: (x[0].real, x[0].imag)))]
                      + [min(abs(a - b) for b in target.infinite) for a in back.infinite] + [0.0])
            good = res.converged and err <= 1e-6
            note = f"#{case}:{'ok' if good else 'miss'}({err:.0e})"
        except Exception as exc:  # local-basin failures are recorded, not fatal per case
            good = False
            note = f"#{case}:{type(exc).__name__}"
        elapsed = time.perf_counter() - t0
        slow |= elapsed >= 30
        wins += good
        notes.append(note)
    _report(10, wins >= 8 and not slow, f"{wins}/10 recovered to 1e-6 ({' '.join(notes)})")


# ---------------------------------------------------------------------------
# 11: lift metrology


def test_criterion_11_metrology():
    f = pqform_from_polynomial(CPoly([0, 0, 1]))
    res = lift_segment(f, FiberPoint(1 + 0j, 0, 1 + 0j), 1, 0)
    rd = ram_data(_gauss())
    vals = sorted(v.real for v in rd.infinite)
    err_rho = abs(res.rho - 1)
    err_asym = max(abs(vals[0] + SQRT_PI_2), abs(vals[1] - SQRT_PI_2), *(abs(v.imag) for v in rd.infinite))
    ok = res.kind == "Terminated" and err_rho <= 1e-9 and err_asym <= 1e-8
    _report(11, ok, f"|rho - 1| = {err_rho:.1e}; asymptotic values error {err_asym:.1e}")


if __name__ == "__main__":
    warnings.simplefilter("ignore", FiberEnumerationIncomplete)
    failures = 0
    for name, fn in sorted(globals().items(), key=lambda kv: int(kv[0].split("_")[2]) if kv[0].startswith("test_criterion_") else 0):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failures += 1
    raise SystemExit(1 if failures else 0)
