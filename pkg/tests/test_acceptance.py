"""The eleven acceptance criteria, at their stated tolerances.

Each test carries a ``criterion`` marker; conftest prints one PASS/FAIL
line per criterion at the end of the run, with the measured numbers.
"""

from __future__ import annotations

import cmath
import json
import math

import numpy as np
import pytest

from av2 import catalog, family, qdiff, thurston
from av2.cli import main
from av2.errors import NoConvergence
from av2.family import TWO_PI_I, Av2Params
from av2.quadrature import QuadOpts
from av2.sphere import INF, sph_dist
from av2.thurston import MarkedConfiguration

N_RANDOM = 1000


def criterion(n, title):
    return pytest.mark.criterion(n, title)


def random_probe(rng, p):
    """z in the disk |z| < 2, at least 1e-2 from the nearest pole."""
    while True:
        r = 2.0 * math.sqrt(rng.uniform())
        z = cmath.rect(r, rng.uniform(-math.pi, math.pi))
        if family.pole_distance(p, z) > 1e-2:
            return z


@pytest.fixture(scope="module")
def random_runs():
    """Ten seeded random-start solves per realizable portrait."""
    return {
        P.name: [thurston.solve(P, init="random", seed=s) for s in range(10)] for P in catalog.realizable()
    }


@criterion(1, "Schwarzian identity, max |S(g) + beta^2/2| < 1e-5 over 1000 random maps")
def test_c1_schwarzian(record_property):
    rng = np.random.default_rng(1001)
    worst = 0.0
    for _ in range(N_RANDOM):
        p = family.sample_params(rng)
        worst = max(worst, family.schwarzian_residual(p, random_probe(rng, p)))
    record_property("detail", f"max residual {worst:.2e}")
    assert worst < 1e-5


@criterion(2, "normalization g(0) = 1 to 1e-12 for 1000 random maps")
def test_c2_normalization(record_property):
    rng = np.random.default_rng(1002)
    worst = max(abs(family.eval(family.sample_params(rng), 0j) - 1) for _ in range(N_RANDOM))
    record_property("detail", f"max |g(0) - 1| {worst:.2e}")
    assert worst < 1e-12


@criterion(3, "inverse-branch round trip to 1e-10, branch spacing 2 pi i / beta")
def test_c3_inverse_round_trip(record_property):
    rng = np.random.default_rng(1003)
    trip = spacing = 0.0
    for _ in range(N_RANDOM):
        p = family.sample_params(rng)
        w = complex(*rng.normal(size=2)) * 2
        k = int(rng.integers(-5, 6))
        z = family.inverse(p, w, k)
        trip = max(trip, abs(family.eval(p, z) - w))
        step = TWO_PI_I / p.beta
        spacing = max(spacing, abs(family.inverse(p, w, k + 1) - z - step) / abs(step))
    record_property("detail", f"max round-trip error {trip:.2e}, max relative spacing error {spacing:.2e}")
    assert trip < 1e-10
    assert spacing < 1e-12


@criterion(4, "3-point portraits solve to beta = 2 pi i eta (1e-10) in <= 2 steps")
@pytest.mark.parametrize("eta", [1, 2, 3])
def test_c4_exponential_fixed_point(eta, record_property):
    rep = thurston.solve(catalog.three_point(eta))
    err = abs(rep.params.beta - eta * TWO_PI_I)
    record_property("detail", f"eta={eta}: {rep.n_steps} step(s), |beta - 2 pi i eta| = {err:.1e}")
    assert rep.converged and rep.n_steps <= 2
    assert rep.params.alpha == 1
    assert err < 1e-10


def _oracle_roots(P, params, n_seeds=20):
    roots = []
    for seed in range(n_seeds):
        rng = np.random.default_rng(seed)

        def jitter(v):
            return v * (1 + 0.05 * complex(*rng.uniform(-1, 1, 2)))

        alpha = params.alpha if P.is_exponential else jitter(params.alpha)
        try:
            roots.append(thurston.newton_oracle(P, Av2Params(alpha, jitter(params.beta))))
        except NoConvergence:
            pass
    return roots


@criterion(5, "solve and newton_oracle agree to 1e-7 on >= 5 portraits; orbits realize them to 1e-8")
def test_c5_oracle_equivalence(solved_catalog, record_property):
    agreed = 0
    worst_gap = worst_orbit = 0.0
    for P, rep in solved_catalog.values():
        assert P.m in (4, 5)
        if not rep.converged:
            continue
        worst_orbit = max(worst_orbit, thurston.combinatorial_residual(P, rep.params, rep.config))
        roots = _oracle_roots(P, rep.params)
        if not roots:
            continue
        agreed += 1
        for r in roots:
            worst_gap = max(worst_gap, abs(r.alpha**2 - rep.params.alpha**2), abs(r.beta - rep.params.beta))
    record_property(
        "detail",
        f"{agreed} portraits with both converged; max (alpha^2, beta) gap {worst_gap:.1e}; "
        f"max orbit residual {worst_orbit:.1e}",
    )
    assert agreed >= 5
    assert worst_gap < 1e-7
    assert worst_orbit < 1e-8


@criterion(6, "winding number constant (residual < 1e-6) in every trace; beta dc = 2 pi i eta at fixed points (1e-8)")
def test_c6_eta_invariance(solved_catalog, random_runs, record_property):
    traces = [(P, rep) for P, rep in solved_catalog.values()]
    traces += [(P, r) for P, _ in solved_catalog.values() for r in random_runs[P.name]]
    traces += [(catalog.collapsing(), thurston.solve(catalog.collapsing()))]
    worst_res = worst_fix = 0.0
    for P, rep in traces:
        etas = {s.diagnostics.eta for s in rep.trace[1:]}
        assert etas == {P.eta}, P.name
        worst_res = max(worst_res, max(s.diagnostics.eta_residual for s in rep.trace[1:]))
        if rep.converged:
            a, b = P.winding_pair()
            worst_fix = max(worst_fix, abs(rep.params.beta * (rep.config[b] - rep.config[a]) - TWO_PI_I * P.eta))
    record_property(
        "detail", f"{len(traces)} traces; max step residual {worst_res:.1e}; max fixed-point gap {worst_fix:.1e}"
    )
    assert worst_res < 1e-6
    assert worst_fix < 1e-8


def _perturb(P, config, rng, size=1e-3):
    pos = dict(config.positions)
    for x in P.free_labels:
        z = pos[x]
        # chordal size of a small step dz is |dz| / (1 + |z|^2)
        pos[x] = z + size * (1 + abs(z) ** 2) * cmath.exp(1j * rng.uniform(0, 2 * math.pi))
    return MarkedConfiguration(pos)


def _dist(P, a, b):
    return max(sph_dist(a[x], b[x]) for x in P.labels)


@criterion(7, "one pullback step shrinks 20 random 1e-3 perturbations; 10 random starts agree to 1e-7")
def test_c7_local_contraction(solved_catalog, record_property):
    failures = []
    for name, (P, rep) in solved_catalog.items():
        rng = np.random.default_rng(1007)
        worst, n_bad = 0.0, 0
        for _ in range(20):
            start = _perturb(P, rep.config, rng)
            _, nxt = thurston.pullback_step(start, P)
            q = _dist(P, nxt, rep.config) / _dist(P, start, rep.config)
            worst = max(worst, q)
            n_bad += q >= 1
        record_property("detail", f"{name}: worst one-step ratio {worst:.3f}, {n_bad}/20 not shrunk")
        if n_bad:
            failures.append(name)
    assert not failures, f"one-step contraction fails on {failures}"


@criterion(7, "one pullback step shrinks 20 random 1e-3 perturbations; 10 random starts agree to 1e-7")
def test_c7_uniqueness(solved_catalog, random_runs, record_property):
    worst = 0.0
    for name, (_, rep) in solved_catalog.items():
        runs = random_runs[name]
        assert all(r.converged for r in runs), name
        for r in runs:
            worst = max(worst, abs(r.params.alpha**2 - rep.params.alpha**2), abs(r.params.beta - rep.params.beta))
    record_property("detail", f"uniqueness: max gap over 10 random starts {worst:.1e}")
    assert worst < 1e-7


@criterion(8, "|beta_n| |dc_n| = 2 pi |eta| to 1e-6 from step 1 on every converging trace")
def test_c8_compactness(solved_catalog, random_runs, record_property):
    worst, n = 0.0, 0
    for name, (P, rep) in solved_catalog.items():
        for r in [rep] + random_runs[name]:
            if not r.converged:
                continue
            n += 1
            for s in r.trace[1:]:
                d = s.diagnostics
                worst = max(worst, abs(d.beta_abs * d.delta_c - 2 * math.pi * abs(P.eta)))
                lower = 2 * math.pi * abs(P.eta) / thurston.diameter(s.config)
                assert d.beta_abs >= lower * (1 - 1e-12)
    record_property("detail", f"{n} traces; max deviation {worst:.1e}")
    assert worst < 1e-6


@criterion(9, "transfer ratio <= 1 + 2 eps always, < 1 - delta on solved configs, stable to 1e-2")
def test_c9_transfer_contraction(solved_catalog, record_property):
    eps = QuadOpts().rtol
    worst_ratio, min_delta, worst_k, worst_mesh = 0.0, 1.0, 0.0, 0.0
    for name, (_, rep) in solved_catalog.items():
        for i, qd in enumerate(qdiff.basis(rep.config)):
            base = qdiff.contraction_ratio(rep.params, qd)
            k2 = qdiff.contraction_ratio(rep.params, qd, K=128)
            fine = qdiff.contraction_ratio(rep.params, qd, quad_opts=QuadOpts().refined(0.5))
            worst_ratio = max(worst_ratio, base)
            min_delta = min(min_delta, 1 - base)
            worst_k = max(worst_k, abs(k2 - base))
            worst_mesh = max(worst_mesh, abs(fine - base))
            record_property("detail", f"{name}[{i}]: ratio {base:.4f}, delta {1 - base:.4f}")
    record_property(
        "detail",
        f"max ratio {worst_ratio:.4f}; min delta {min_delta:.4f}; "
        f"K-doubling change {worst_k:.1e}; refinement change {worst_mesh:.1e}",
    )
    assert worst_ratio <= 1 + 2 * eps
    assert min_delta > 0
    assert worst_k < 1e-2 and worst_mesh < 1e-2


@criterion(10, "sg_bound(2 pi^2, 4) = e^-2; systole_upper on {0, eps, 1, inf} = 2 pi^2 / log(1/eps) to 1e-9")
def test_c10_geometry_bounds(record_property):
    b = thurston.sg_bound(2 * math.pi**2, 4)
    assert b == pytest.approx(math.exp(-2), rel=1e-14)
    worst = 0.0
    for eps in (1e-2, 1e-4, 1e-6, 1e-9):
        cfg = MarkedConfiguration({"0": 0j, "e": eps + 0j, "1": 1 + 0j, "inf": INF})
        got = thurston.geometry_monitor(cfg).systole_upper
        worst = max(worst, abs(got - 2 * math.pi**2 / math.log(1 / eps)))
    record_property("detail", f"sg_bound {b:.6f}; max systole gap {worst:.1e}")
    assert worst < 1e-9


def _cli_outputs(tmp, tag, threads):
    """Run every subcommand once; the bytes of everything it produced."""
    from pathlib import Path

    root = Path(__file__).resolve().parents[1] / "portraits"
    out = {}
    sol = tmp / f"sol{tag}.json"
    trace = tmp / f"trace{tag}.csv"
    code = main(
        ["solve", str(root / "lambda_chain_1_2_-1.json"), "--init", "random", "--seed", "7",
         "--trace-out", str(trace), "--solution-out", str(sol)]
    )
    assert code == 0
    out["trace"] = trace.read_bytes()
    out["jsonl"] = trace.with_suffix(".jsonl").read_bytes()
    out["solution"] = sol.read_bytes()
    spec = tmp / "spec.json"
    spec.write_text(json.dumps(
        {"alpha": [0.8, 0.3], "center": [0, 4], "width": 8, "height": 8, "resolution": [48, 40], "max_iter": 100}
    ))
    ppm = tmp / f"r{tag}.ppm"
    assert main(["render", str(spec), str(ppm), "--threads", str(threads)]) == 0
    out["ppm"] = ppm.read_bytes()
    return out


@criterion(11, "identical inputs, seeds and threads give byte-identical outputs")
def test_c11_determinism(tmp_path, capsys, record_property):
    a = _cli_outputs(tmp_path, "a", 4)
    b = _cli_outputs(tmp_path, "b", 4)
    c = _cli_outputs(tmp_path, "c", 1)
    capsys.readouterr()
    for argv in (
        ["check", "--alpha", "0.8,0.3", "--beta", "2,1", "--samples", "300", "--seed", "11"],
        ["transfer", str(tmp_path / "sola.json")],
        ["orbit", "--alpha", "0.8,0.3", "--beta", "2,1"],
    ):
        assert main(argv) == 0
        first = capsys.readouterr().out
        assert main(argv) == 0
        assert capsys.readouterr().out == first, argv[0]
    assert a == b
    assert a["ppm"] == c["ppm"]
    record_property("detail", f"{len(a)} files and 3 reports compared; render also matched across 1 and 4 threads")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
