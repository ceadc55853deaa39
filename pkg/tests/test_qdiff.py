import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from av2 import catalog, family, qdiff, thurston
from av2.errors import InvalidParameter, OmittedValue, PoleProximity
from av2.family import Av2Params
from av2.quadrature import QuadOpts
from av2.sphere import INF

Q0 = qdiff.QuadDiff([0, 1, -1], [1])
TAN = Av2Params(math.sqrt(2), 1 + 0.5j)
EXP = Av2Params(1, 1.3 + 2j)


def random_qd(rng, m=5, spread=2.0):
    while True:
        poles = [0j, 1 + 0j] + [complex(*rng.uniform(-spread, spread, 2)) for _ in range(m - 3)]
        if min(abs(a - b) for i, a in enumerate(poles) for b in poles[i + 1 :]) > 0.2:
            break
    numer = [complex(*rng.normal(size=2)) for _ in range(m - 3)]
    return qdiff.QuadDiff(poles, numer)


def test_validation():
    with pytest.raises(InvalidParameter):
        qdiff.QuadDiff([0, 1], [1])
    with pytest.raises(InvalidParameter):
        qdiff.QuadDiff([0, 1, 1], [1])
    with pytest.raises(InvalidParameter):
        qdiff.QuadDiff([0, 1, 2], [1, 1])
    with pytest.raises(InvalidParameter):
        qdiff.QuadDiff([0, 1, complex("inf")], [1])
    qdiff.QuadDiff([0, 1, 2, 3], [1, 1])


def test_eval_examples():
    assert qdiff.eval_qd(Q0, 2) == pytest.approx(1 / 6, abs=1e-16)
    with pytest.raises(PoleProximity):
        qdiff.eval_qd(Q0, 1e-13)


def test_leading_coefficient_at_infinity():
    qd = qdiff.QuadDiff([0, 1, -1, 2j], [0.5, -2 + 1j])
    for r in (1e4, 1e6):
        z = r * cmath.exp(0.7j)
        assert abs(qdiff.eval_qd(qd, z) * z**3 - (-2 + 1j)) < 20 / r


def test_residues_against_contour_integral():
    rng = np.random.default_rng(30)
    qd = random_qd(rng, m=6)
    n = 256
    for p, res in zip(qd.poles, qdiff.residues(qd)):
        rad = 1e-2
        t = np.exp(2j * np.pi * np.arange(n) / n)
        vals = [qdiff.eval_qd(qd, p + rad * w) * rad * w for w in t]
        assert abs(np.mean(vals) - res) < 1e-10 * max(1, abs(res))
        assert qdiff.residue(qd, p) == res
    # residues of an integrable differential sum to zero
    assert abs(sum(qdiff.residues(qd))) < 1e-12


def test_json_round_trip():
    qd = qdiff.QuadDiff([0, 1, 2 + 1j, -3j], [1 - 1j, 0.5])
    assert qdiff.QuadDiff.from_json(qd.to_json()) == qd
    with pytest.raises(ValueError):
        qdiff.QuadDiff.from_json({**qd.to_json(), "m": 5})


@pytest.mark.parametrize("m", [4, 5, 6, 7])
def test_basis_dimension(m):
    pts = [0j, 1 + 0j] + [complex(2 + k, 1) for k in range(m - 3)] + [INF]
    B = qdiff.basis(pts)
    assert len(B) == m - 3
    assert all(qd.m == m for qd in B)
    with pytest.raises(InvalidParameter):
        qdiff.basis(pts[:-1])


def test_basis_from_configuration():
    rep = thurston.solve(catalog.lambda_chain(1, 2, -1))
    assert len(qdiff.basis(rep.config)) == 2


# ---------------------------------------------------------------------------
# norms


@pytest.fixture(scope="module")
def q0_norm():
    return qdiff.l1_result(Q0)


def test_norm_finite_and_stable(q0_norm):
    assert 0 < q0_norm.value < math.inf
    fine = qdiff.l1_norm(Q0, QuadOpts().refined(0.5))
    assert abs(fine - q0_norm.value) < 1e-2 * fine


def test_norm_against_independent_polar_oracle():
    # scipy's adaptive quadrature on polar coordinates centred at each pole
    # of phi = 1/(z^3 - z): split the plane into radial sectors by distance
    from scipy import integrate

    def f(r, t):
        z = r * cmath.exp(1j * t)
        return abs(1 / (z**3 - z)) * r

    # poles of |phi| sit on r = 1 at t = 0 and t = pi; put every singular
    # line on a cell edge so QUADPACK only sees endpoint singularities
    total = 0.0
    for lo, hi in ((0, 1), (1, 2), (2, np.inf)):
        for k in range(4):
            val, _ = integrate.dblquad(
                f, k * np.pi / 2, (k + 1) * np.pi / 2, lo, hi, epsabs=1e-9, epsrel=1e-8
            )
            total += val
    assert qdiff.l1_norm(Q0, QuadOpts(rtol=1e-4)) == pytest.approx(total, rel=1e-3)


@settings(max_examples=10, deadline=None)
@given(st.complex_numbers(min_magnitude=0.1, max_magnitude=10, allow_nan=False, allow_infinity=False))
def test_norm_homogeneous(c):
    assert qdiff.l1_norm(Q0.scaled(c)) == pytest.approx(abs(c) * qdiff.l1_norm(Q0), rel=1e-10)


def test_norm_grows_as_poles_merge():
    norms = [qdiff.l1_norm(qdiff.QuadDiff([0, 1, 1 + s], [1])) for s in (1e-1, 1e-2, 1e-3)]
    assert norms[0] < norms[1] < norms[2] < math.inf


# ---------------------------------------------------------------------------
# push-forward


def probe_points(rng, n):
    return [complex(*rng.normal(size=2)) * 1.5 for _ in range(n)]


@pytest.mark.parametrize("g", [TAN, EXP], ids=["tan", "exp"])
def test_k_doubling_within_tail_bound(g):
    rng = np.random.default_rng(31)
    qd = random_qd(rng)
    for z in probe_points(rng, 20):
        a = qdiff.pushforward_eval(g, qd, z, K=32)
        b = qdiff.pushforward_eval(g, qd, z, K=64)
        bound = qdiff.pushforward_tail_bound(g, qd, z, K=32)
        assert abs(a - b) < 4 * bound


def test_tail_bound_inf_when_k_small():
    assert qdiff.pushforward_tail_bound(EXP, Q0, 0.4 + 0.2j, K=0) == math.inf


def test_exponential_derivative_path():
    rng = np.random.default_rng(32)
    qd = random_qd(rng)
    for z in probe_points(rng, 20):
        direct = sum(qdiff.eval_qd(qd, family.inverse(EXP, z, k)) for k in range(-16, 17))
        closed = direct / (EXP.beta * z) ** 2
        assert abs(qdiff.pushforward_eval(EXP, qd, z, K=16) - closed) <= 1e-12 * max(1, abs(closed))


@pytest.mark.parametrize("g", [TAN, EXP], ids=["tan", "exp"])
def test_linearity(g):
    rng = np.random.default_rng(33)
    a, b = random_qd(rng), random_qd(rng)
    b = qdiff.QuadDiff(a.poles, b.numerator)
    for z in probe_points(rng, 10):
        lhs = qdiff.pushforward_eval(g, a + b, z)
        rhs = qdiff.pushforward_eval(g, a, z) + qdiff.pushforward_eval(g, b, z)
        assert abs(lhs - rhs) <= 1e-10 * max(1, abs(lhs))


@pytest.mark.parametrize("g", [TAN, EXP], ids=["tan", "exp"])
def test_truncated_sum_approaches_closed_form(g):
    rng = np.random.default_rng(34)
    qd = random_qd(rng)
    for z in probe_points(rng, 10):
        exact = qdiff.pushforward_exact(g, qd, z)
        trunc = qdiff.pushforward_eval(g, qd, z, K=256)
        assert abs(trunc - exact) <= qdiff.pushforward_tail_bound(g, qd, z, K=256) + 1e-12 * abs(exact)


def test_array_matches_scalar():
    rng = np.random.default_rng(35)
    qd = random_qd(rng)
    zs = np.array(probe_points(rng, 50))
    for g in (TAN, EXP):
        arr = qdiff.pushforward_array(g, qd, zs, K=40)
        ref = np.array([qdiff.pushforward_eval(g, qd, z, K=40) for z in zs])
        assert np.max(np.abs(arr - ref) / np.maximum(1, np.abs(ref))) < 1e-12


def test_pushforward_at_omitted_value():
    with pytest.raises(OmittedValue):
        qdiff.pushforward_eval(TAN, Q0, 0j)
    with pytest.raises(OmittedValue):
        qdiff.pushforward_eval(TAN, Q0, TAN.lam)


def test_image_singularities():
    pts = [0j, 1 + 0j, 0.5j]
    sing = qdiff.image_singularities(TAN, pts)
    assert sing[0] == 0 and sing[1] == pytest.approx(TAN.lam)
    assert any(abs(s - 1) < 1e-12 for s in sing)
    assert len(qdiff.image_singularities(EXP, pts)) == 4  # 0 plus three images


# ---------------------------------------------------------------------------
# contraction


@pytest.fixture(scope="module")
def solved_ratios():
    out = {}
    for P in catalog.realizable():
        rep = thurston.solve(P)
        out[P.name] = (rep, [qdiff.transfer_report(rep.params, qd) for qd in qdiff.basis(rep.config)])
    return out


def test_strict_contraction_on_solved(solved_ratios):
    for name, (_, reports) in solved_ratios.items():
        for r in reports:
            assert 0 <= r.ratio < 1, name


def test_weak_contraction_on_random_configs():
    rng = np.random.default_rng(36)
    eps = QuadOpts().rtol
    for _ in range(6):
        g = family.sample_params(rng)
        qd = random_qd(rng, m=int(rng.integers(4, 6)))
        assert qdiff.contraction_ratio(g, qd) <= 1 + 2 * eps


def test_ratio_stable_under_k_and_refinement(solved_ratios):
    rep, reports = solved_ratios["exp_fixed_tail_1_0"]
    qd = qdiff.basis(rep.config)[0]
    base = reports[0].ratio
    assert abs(qdiff.contraction_ratio(rep.params, qd, K=128) - base) < 1e-2
    assert abs(qdiff.contraction_ratio(rep.params, qd, quad_opts=QuadOpts().refined(0.5)) - base) < 1e-2


def test_report_json(solved_ratios):
    _, reports = solved_ratios["pole_lambda_1_-1"]
    d = reports[0].to_json()
    assert set(d) == {"ratio", "norm", "pushforward_norm", "K", "cells"}
    assert d["ratio"] == pytest.approx(d["pushforward_norm"] / d["norm"])
