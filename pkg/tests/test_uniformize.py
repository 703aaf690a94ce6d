import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from logrs.errors import NoConvergence, TailNotConverged
from logrs.numerics import CPoly, PQForm, pqform_from_polynomial
from logrs.uniformize import (
    RamData,
    census,
    convergence_report,
    fit_pq,
    gauge,
    nonlinearity,
    ram_data,
)

HALF_SQRT_PI = math.sqrt(math.pi) / 2


def test_nonlinearity_examples(square, expo):
    nl = nonlinearity(square)
    [(z, res)] = nl.poles
    assert abs(z) < 1e-12 and res == pytest.approx(1.0, abs=1e-10)
    assert nl.poly_part.is_zero()
    nl = nonlinearity(expo)
    assert nl.poles == [] and nl.degree_at_infinity == 0
    assert nl.poly_part.allclose(CPoly([1]))
    f = PQForm(CPoly([0, 0, 1]), CPoly.from_roots([1, 1, -2]))
    nl = nonlinearity(f)
    got = sorted((round(z.real, 8), round(r, 8)) for z, r in nl.poles)
    assert got == [(-2.0, 1.0), (1.0, 2.0)]
    assert nl.poly_part.allclose(CPoly([0, 2]))


@settings(max_examples=15)
@given(st.lists(st.tuples(st.floats(-2, 2), st.floats(-2, 2), st.integers(1, 3)), min_size=1, max_size=3))
def test_residues_are_integers(draws):
    roots = [complex(x, y) for x, y, _ in draws]
    if any(abs(a - b) < 0.3 for i, a in enumerate(roots) for b in roots[i + 1:]):
        return
    Q = CPoly.from_roots([z for (x, y, m), z in zip(draws, roots) for _ in range(m)])
    nl = nonlinearity(PQForm(CPoly([0]), Q))
    for z, r in nl.poles:
        assert abs(r - round(r)) < 1e-8 and round(r) >= 1


def test_ram_data_examples(square, expo, gauss):
    rd = ram_data(square)
    assert rd.finite == [(0j, 2)] and rd.infinite == []
    rd = ram_data(expo)
    assert rd.finite == [] and len(rd.infinite) == 1 and abs(rd.infinite[0]) < 1e-12
    rd = ram_data(gauss)
    got = sorted(z.real for z in rd.infinite)
    assert got == [pytest.approx(-HALF_SQRT_PI, abs=1e-10), pytest.approx(HALF_SQRT_PI, abs=1e-10)]
    assert rd.d1 == 2 and rd.d2 == 0


def test_tail_not_converged(gauss):
    with pytest.raises(TailNotConverged):
        ram_data(gauss, integration_radius=1.5)


def test_ramdata_json_round_trip(gauss):
    rd = ram_data(gauss)
    back = RamData.from_dict(rd.to_dict())
    assert back.infinite == rd.infinite and back.d1 == 2
    with pytest.raises(KeyError):
        RamData.from_dict({"finite": [{"pos": [0, 0]}]})
    with pytest.raises(ValueError):
        RamData.from_dict({"finite": [{"pos": [0, 0], "order": 1}]})


def test_fit_square():
    target = RamData([(0j, 2)], [], 0, 1)
    init = PQForm(CPoly([0]), CPoly([0.1, 2]))
    res = fit_pq(target, init, normalization=(1, 2))
    assert res.converged and res.residual <= 1e-8
    # F = (z + 1)^2 has F(0) = 1, F'(0) = 2 and one critical value 0
    for z in (0.5, -1j, 2 + 1j):
        assert abs(res.f.value(z) - (z + 1) ** 2) < 1e-8


def test_fit_exp(expo):
    target = ram_data(expo)
    init = PQForm(CPoly([0.05, 1.1]), CPoly([1]), 0, 1)
    res = fit_pq(target, init, normalization=gauge(expo))
    assert res.converged
    assert res.f.P.allclose(CPoly([0, 1]), atol=1e-6)


def test_fit_gauss(gauss):
    target = ram_data(gauss)
    init = PQForm(CPoly([0, 0, -0.9]), CPoly([1]))
    res = fit_pq(target, init, normalization=gauge(gauss))
    assert res.converged
    achieved = ram_data(res.f)
    got = sorted(z.real for z in achieved.infinite)
    assert got == [pytest.approx(-HALF_SQRT_PI, abs=1e-6), pytest.approx(HALF_SQRT_PI, abs=1e-6)]
    assert res.f.P.allclose(CPoly([0, 0, -1]), atol=1e-6)


def test_fit_no_convergence(gauss):
    target = ram_data(gauss)
    init = PQForm(CPoly([0, 0, -0.5]), CPoly([1]))
    with pytest.raises(NoConvergence) as info:
        fit_pq(target, init, normalization=gauge(gauss), max_iter=1)
    assert info.value.best.residual > 1e-8 and not info.value.best.converged


def test_census_identity(expo, gauss):
    for f in (expo, gauss, PQForm(CPoly([0, 1, 0.5]), CPoly([1, 1]))):
        for n in (4, 9, 20):
            c = census(f, n)
            assert c["critical_count"] == c["expected_count"] == f.Q.degree + n * f.P.degree
    assert census(expo, 16)["p_roots"] == [(pytest.approx(-16), 16)]
    mins = [census(gauss, n)["min_p_root_modulus"] for n in (10, 40, 160)]
    assert mins == sorted(mins) and mins[-1] > 12


def test_convergence_report_exp(expo):
    rows = convergence_report(expo, [4, 8, 16], 2)
    for row in rows:
        [(z, m)] = row["p_roots"]
        assert m == row["n"] and abs(z + row["n"]) < 1e-9
        assert row["pi1_rank_completed"] == 0
    assert all(row["embeds"][2] for row in rows if row["n"] >= 8)


def test_convergence_report_trivial(cube):
    rows = convergence_report(cube, [2, 5], 2)
    for row in rows:
        assert row["p_roots"] == [] and all(row["embeds"].values())


@settings(max_examples=4, deadline=None)
@given(st.integers(0, 10_000))
def test_gauge_fixed_round_trip(seed):
    rng = np.random.default_rng(seed)
    lead = 0.3 + 0.7 * rng.uniform()
    phase = np.exp(2j * np.pi * rng.uniform())
    P = CPoly([0, 0.3 * (rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1)), lead * phase])
    q = 0.6 * np.exp(2j * np.pi * rng.uniform())
    Q = CPoly.from_roots([q, -q])
    f = PQForm(P, Q)
    target = ram_data(f)
    jitter = 0.02 * (rng.uniform(-1, 1, 3) + 1j * rng.uniform(-1, 1, 3))
    init = PQForm(CPoly(P.coeffs + np.r_[0, jitter[:2]]), CPoly.from_roots([q + jitter[2], -q]))
    res = fit_pq(target, init, normalization=gauge(f))
    back = ram_data(res.f)
    for a, b in zip(sorted(back.finite, key=lambda t: (t[0].real, t[0].imag)),
                    sorted(target.finite, key=lambda t: (t[0].real, t[0].imag))):
        assert abs(a[0] - b[0]) <= 1e-6 and a[1] == b[1]
    for z in target.infinite:
        assert min(abs(z - w) for w in back.infinite) <= 1e-6
