"""Marked-point Thurston iteration for the two-asymptotic-value family.

A point of Teichmueller space is represented only by the positions of the
marked points; the rest of its isotopy data lives in the portrait's branch
indices. One pullback step fits the map g_n whose asymptotic value and
value at 1 sit where the current configuration says, then pulls every free
marked point back through its assigned inverse branch.
"""

from __future__ import annotations

import cmath
import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import family
from .errors import (
    Av2Error,
    DegenerateParameter,
    InconsistentConfiguration,
    InvalidAsymptoticValue,
    NoConvergence,
)
from .family import TWO_PI_I, Av2Params
from .portraits import OrbitPortrait, check_portrait
from .sphere import (
    INF,
    SpherePoint,
    as_point,
    mobius_apply,
    mobius_from_alpha,
    mobius_inverse,
    point_from_json,
    point_to_json,
    principal_log,
    sph_dist,
)


@dataclass(frozen=True)
class MarkedConfiguration:
    positions: Mapping[str, SpherePoint]

    def __post_init__(self):
        object.__setattr__(self, "positions", {k: as_point(v) for k, v in self.positions.items()})

    def __getitem__(self, label) -> SpherePoint:
        return self.positions[label]

    def finite(self) -> list:
        return [z for z in self.positions.values() if z is not INF]

    def to_json(self) -> dict:
        return {k: point_to_json(v) for k, v in self.positions.items()}

    @classmethod
    def from_json(cls, obj) -> "MarkedConfiguration":
        return cls({str(k): point_from_json(v) for k, v in obj.items()})


def min_separation(points) -> float:
    pts = list(points)
    best = math.inf
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            best = min(best, sph_dist(pts[i], pts[j]))
    return best


def check_config(config: MarkedConfiguration, portrait: OrbitPortrait) -> None:
    """Raise if ``config`` is not a valid configuration for ``portrait``."""
    pos = config.positions
    if set(pos) != set(portrait.labels):
        raise InconsistentConfiguration("configuration labels do not match the portrait")
    if pos[portrait.zero] != 0 or pos[portrait.one] != 1 or pos[portrait.inf] is not INF:
        raise InconsistentConfiguration("0, 1 and infinity must be pinned")
    if not portrait.is_exponential and pos[portrait.lam] in (0, 1, INF):
        raise InvalidAsymptoticValue("lambda position must avoid 0, 1, infinity")
    if min_separation(pos.values()) <= 0:
        raise InconsistentConfiguration("marked points collide")


def auto_config(portrait: OrbitPortrait) -> MarkedConfiguration:
    """Free labels on the radius-2 circle at the m-th roots of unity."""
    m = portrait.m
    pos = {portrait.zero: 0j, portrait.one: 1 + 0j, portrait.inf: INF}
    for j, x in enumerate(portrait.free_labels, start=1):
        pos[x] = 2 * complex(math.cos(2 * math.pi * j / m), math.sin(2 * math.pi * j / m))
    return MarkedConfiguration(pos)


def random_config(portrait: OrbitPortrait, rng: np.random.Generator, r_min=0.5, r_max=3.0) -> MarkedConfiguration:
    """Free labels at random points of the annulus r_min < |z| < r_max."""
    pos = {portrait.zero: 0j, portrait.one: 1 + 0j, portrait.inf: INF}
    for x in portrait.free_labels:
        while True:
            r = rng.uniform(r_min, r_max)
            t = rng.uniform(0, 2 * math.pi)
            z = complex(r * math.cos(t), r * math.sin(t))
            if min(sph_dist(z, w) for w in pos.values()) > 0.05:
                break
        pos[x] = z
    return MarkedConfiguration(pos)


def pullback_step(
    config: MarkedConfiguration, portrait: OrbitPortrait
) -> tuple[Av2Params, MarkedConfiguration]:
    """One step of the iteration: fit g_n to ``config``, pull back."""
    P = portrait
    pos = config.positions
    u = pos[P.successor[P.one]]
    if P.is_exponential:
        alpha = 1 + 0j
    else:
        alpha = family.alpha_from_lambda(pos[P.lam])
        u = mobius_apply(mobius_inverse(mobius_from_alpha(alpha)), u)
    if u is INF or u == 0:
        raise family.OmittedValue("image of 1 sits on an omitted value")
    beta = principal_log(u) + TWO_PI_I * P.branch_index[P.one]
    if abs(beta) < 1e-14:
        raise DegenerateParameter("beta vanished")
    params = Av2Params(alpha, beta)
    nxt = {P.zero: 0j, P.one: 1 + 0j, P.inf: INF}
    for x in P.free_labels:
        nxt[x] = family.inverse(params, pos[P.successor[x]], P.branch_index[x])
    return params, MarkedConfiguration(nxt)


# ---------------------------------------------------------------------------
# geometry and compactness monitors


@dataclass(frozen=True)
class GeometryReport:
    min_sep: float
    systole_upper: float


def geometry_monitor(config: MarkedConfiguration) -> GeometryReport:
    """Minimum chordal separation, and the shortest core-curve length over
    round annuli that split the marked set into two parts of >= 2 points.

    The hyperbolic length of an annulus core, pi / mod(A), bounds the
    shortest non-peripheral geodesic of the punctured sphere from above.
    """
    pts = list(config.positions.values())
    m = len(pts)
    finite = [z for z in pts if z is not INF]
    best = math.inf
    for c in finite:
        d = sorted(abs(z - c) for z in finite)
        for i in range(len(d) - 1):
            inside = i + 1
            if inside < 2 or m - inside < 2:
                continue
            r, R = d[i], d[i + 1]
            if r > 0 and R > r:
                # pi / mod with mod = log(R/r) / (2 pi)
                best = min(best, 2 * math.pi**2 / math.log(R / r))
    return GeometryReport(min_separation(pts), best)


def sg_bound(a: float, m: int) -> float:
    """Lower bound b(a, m) on marked-point separation when every simple
    closed geodesic is longer than ``a``: b = M0^-2, M0 = exp(2 pi^2 (m-3)/a).
    """
    if a <= 0:
        raise ValueError("a must be positive")
    if m < 3:
        raise ValueError("need at least 3 marked points")
    if m == 3:
        return 1.0
    return math.exp(-4 * math.pi**2 * (m - 3) / a)


@dataclass(frozen=True)
class BetaBounds:
    lower: float
    upper: float


def beta_bounds(eta: int, min_orbit_sep: float, diameter: float | None = None) -> BetaBounds:
    """|beta| = 2 pi |eta| / |c_k2 - c_k1|, sandwiched by the separation
    bound (upper) and the configuration diameter (lower)."""
    if eta == 0:
        raise ValueError("eta must be nonzero")
    if not min_orbit_sep > 0:
        raise DegenerateParameter("winding pair separation is zero")
    s = 2 * math.pi * abs(eta)
    lower = s / diameter if diameter else 0.0
    return BetaBounds(lower, s / min_orbit_sep)


def diameter(config: MarkedConfiguration) -> float:
    f = config.finite()
    return max(abs(a - b) for a in f for b in f)


# ---------------------------------------------------------------------------
# solver


@dataclass(frozen=True)
class Diagnostics:
    eta: int | None
    eta_residual: float
    min_sep: float
    max_disp: float
    beta_abs: float
    systole_upper: float
    delta_c: float


@dataclass(frozen=True)
class IterationState:
    step: int
    config: MarkedConfiguration
    fitted: Av2Params | None
    diagnostics: Diagnostics


CONVERGED = "converged"
DEGENERATE = "degenerate"
MAX_ITERATIONS = "max_iterations"


@dataclass
class SolveReport:
    outcome: str
    n_steps: int
    params: Av2Params | None = None
    config: MarkedConfiguration | None = None
    reason: str = ""
    trace: list = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.outcome == CONVERGED


def _diagnose(portrait, config, prev, params) -> Diagnostics:
    geo = geometry_monitor(config)
    a, b = portrait.winding_pair()
    za, zb = config[a], config[b]
    delta_c = abs(zb - za)
    if params is None:
        return Diagnostics(None, math.nan, geo.min_sep, math.nan, math.nan, geo.systole_upper, delta_c)
    t = params.beta * (zb - za) / TWO_PI_I
    eta = round(t.real)
    disp = max(sph_dist(config[x], prev[x]) for x in portrait.labels)
    return Diagnostics(int(eta), abs(t - eta), geo.min_sep, disp, abs(params.beta), geo.systole_upper, delta_c)


def solve(
    portrait: OrbitPortrait,
    init="auto",
    tol: float = 1e-11,
    max_iter: int = 500,
    eps_degenerate: float = 1e-6,
    collapse_steps: int = 3,
    blowup_factor: float = 1e3,
    seed: int | None = None,
) -> SolveReport:
    """Iterate :func:`pullback_step` to a fixed point.

    ``init`` is a configuration, ``"auto"``, or ``"random"`` (uses ``seed``).
    Converged once no marked point moves more than ``tol`` (chordal) in one
    step. Declares degeneracy when the minimum separation stays below
    ``eps_degenerate`` for ``collapse_steps`` steps, when |beta| exceeds
    ``blowup_factor`` times the compactness bound at that separation, or
    when a step lands on a forbidden value.
    """
    check_portrait(portrait)
    if isinstance(init, MarkedConfiguration):
        config = init
    elif init == "auto":
        config = auto_config(portrait)
    elif init == "random":
        config = random_config(portrait, np.random.default_rng(seed))
    else:
        raise ValueError(f"unknown init {init!r}")
    check_config(config, portrait)

    beta_cap = blowup_factor * beta_bounds(portrait.eta, eps_degenerate).upper
    trace = [IterationState(0, config, None, _diagnose(portrait, config, None, None))]
    low_sep = 0
    for n in range(1, max_iter + 1):
        try:
            params, nxt = pullback_step(config, portrait)
        except (Av2Error, OverflowError, ZeroDivisionError) as exc:
            return SolveReport(DEGENERATE, n - 1, reason=f"{type(exc).__name__}: {exc}", trace=trace)
        diag = _diagnose(portrait, nxt, config, params)
        trace.append(IterationState(n, nxt, params, diag))
        config = nxt
        if diag.beta_abs > beta_cap:
            return SolveReport(DEGENERATE, n, params, config, "beta blowup", trace)
        low_sep = low_sep + 1 if diag.min_sep < eps_degenerate else 0
        if low_sep >= collapse_steps:
            return SolveReport(DEGENERATE, n, params, config, "geometry collapse", trace)
        if diag.max_disp < tol:
            if diag.min_sep < eps_degenerate:
                return SolveReport(DEGENERATE, n, params, config, "geometry collapse", trace)
            return SolveReport(CONVERGED, n, params, config, trace=trace)
    return SolveReport(MAX_ITERATIONS, max_iter, params, config, "iteration limit", trace)


# ---------------------------------------------------------------------------
# trace output

TRACE_COLUMNS = (
    "n", "alpha_re", "alpha_im", "beta_re", "beta_im",
    "eta", "eta_residual", "min_sep", "max_disp", "systole_upper",
)


def _num(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return repr(float(x)) if not isinstance(x, int) else str(x)


def trace_csv(trace) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for s in trace:
        d = s.diagnostics
        a = s.fitted.alpha if s.fitted else None
        b = s.fitted.beta if s.fitted else None
        w.writerow([
            s.step,
            _num(a.real if a is not None else None), _num(a.imag if a is not None else None),
            _num(b.real if b is not None else None), _num(b.imag if b is not None else None),
            "" if d.eta is None else d.eta,
            _num(d.eta_residual), _num(d.min_sep), _num(d.max_disp), _num(d.systole_upper),
        ])
    return buf.getvalue()


def trace_jsonl(trace) -> str:
    return "".join(json.dumps({"n": s.step, "config": s.config.to_json()}) + "\n" for s in trace)


# ---------------------------------------------------------------------------
# independent check: Newton on the forward-orbit equations


def forward_positions(portrait: OrbitPortrait, params: Av2Params):
    """Positions reached by iterating g forward from 0 and lambda, plus the
    closure residuals of the edges that land on an already placed label."""
    P = portrait
    pos = {P.zero: 0j, P.inf: INF}
    residuals = []
    starts = [P.zero] if P.is_exponential else [P.zero, P.lam]
    if not P.is_exponential:
        pos[P.lam] = params.lam
    for s in starts:
        x = s
        while True:
            y = P.successor[x]
            if y == P.inf:
                # pole condition: 1/g(z) = 0
                u = cmath.exp(params.beta * pos[x])
                m = params.mobius
                residuals.append((m.c * u + m.d) / (m.a * u))
                break
            gz = family.eval(params, pos[x])
            if gz is INF:
                raise OverflowError("orbit hit a pole")
            if y in pos:
                residuals.append(gz - pos[y])
                break
            pos[y] = gz
            x = y
    return pos, residuals


def branch_mismatch(portrait: OrbitPortrait, params: Av2Params, positions) -> float:
    """Largest chordal gap between each marked point and the inverse branch
    its label prescribes."""
    worst = 0.0
    for x in portrait.labels:
        if x in (portrait.zero, portrait.inf):
            continue
        z = family.inverse(params, positions[portrait.successor[x]], portrait.branch_index[x])
        worst = max(worst, sph_dist(z, positions[x]))
    return worst


def branch_cut_margin(portrait: OrbitPortrait, params: Av2Params, positions) -> float:
    """Smallest angular distance of M^{-1}(pos succ x) from the negative
    real axis. Near zero the principal-log labeling cannot tell branch k
    from its neighbour, so the branch data of such a root is ambiguous."""
    margin = math.pi
    for x in portrait.labels:
        if x in (portrait.zero, portrait.inf):
            continue
        w = positions[portrait.successor[x]]
        u = w if params.is_exponential else mobius_apply(params.mobius_inv, w)
        if u is INF or u == 0:
            continue
        margin = min(margin, math.pi - abs(cmath.phase(u)))
    return margin


def combinatorial_residual(portrait: OrbitPortrait, params: Av2Params, config: MarkedConfiguration) -> float:
    """max over labels x of d(g(pos x), pos succ(x))."""
    worst = 0.0
    for x, y in portrait.successor.items():
        worst = max(worst, sph_dist(family.eval(params, config[x]), config[y]))
    return worst


def _collision_factor(pos, alpha=None) -> complex:
    """Product of pairwise differences of the finite orbit points.

    Dividing the residuals by it deflates the spurious roots where orbit
    points coincide, e.g. a period-l closure satisfied by a fixed point.
    """
    f = [z for z in pos.values() if z is not INF]
    out = 1 + 0j
    if alpha is not None:
        out *= alpha * alpha - 1  # lambda running into infinity
    for i in range(len(f)):
        for j in range(i + 1, len(f)):
            out *= f[i] - f[j]
    return out


def newton_oracle(
    portrait: OrbitPortrait,
    guess: Av2Params,
    max_iter: int = 80,
    tol: float = 1e-12,
    match_tol: float = 1e-9,
    deflate: bool = True,
    cut_tol: float = 1e-6,
) -> Av2Params:
    """Solve the forward-orbit equations for (alpha, beta) by damped Newton.

    Unknowns are beta alone when lambda = inf, else (alpha, beta). The
    Jacobian is a forward difference. The root is accepted only if its
    orbit realizes the portrait: distinct points, each reached through the
    branch its label prescribes.
    """
    P = check_portrait(portrait)
    exp_case = P.is_exponential

    def unpack(x):
        return Av2Params(1.0, x[0]) if exp_case else Av2Params(x[0], x[1])

    def residual(x):
        try:
            p = unpack(x)
            if p.is_exponential != exp_case:
                return None
            pos, res = forward_positions(P, p)
            r = np.array(res, dtype=complex)
            if deflate:
                with np.errstate(divide="ignore", invalid="ignore"):
                    r = r / _collision_factor(pos, None if exp_case else p.alpha)
        except (Av2Error, OverflowError, ZeroDivisionError, ValueError):
            return None
        return r if np.all(np.isfinite(r)) else None

    x = np.array([guess.beta] if exp_case else [guess.alpha, guess.beta], dtype=complex)
    F = residual(x)
    if F is None:
        raise NoConvergence("residual undefined at the initial guess")
    nF = np.linalg.norm(F)
    for _ in range(max_iter):
        if nF < tol:
            break
        J = np.empty((len(F), len(x)), dtype=complex)
        for j in range(len(x)):
            h = 1e-7 * (1 + abs(x[j]))
            xh = x.copy()
            xh[j] += h
            Fh = residual(xh)
            if Fh is None:
                raise NoConvergence("residual undefined next to the iterate")
            J[:, j] = (Fh - F) / h
        try:
            dx = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError as exc:
            raise NoConvergence("singular Jacobian") from exc
        t = 1.0
        while t > 1e-8:
            xn = x + t * dx
            Fn = residual(xn)
            if Fn is not None and np.linalg.norm(Fn) < (1 - 1e-4 * t) * nF:
                break
            t *= 0.5
        else:
            if nF < 1e-9:
                break  # stalled at round-off level
            raise NoConvergence(f"line search failed at |F| = {nF:.3e}")
        step = np.max(np.abs(xn - x))
        x, F, nF = xn, Fn, np.linalg.norm(Fn)
        if step < 1e-15 * (1 + np.max(np.abs(x))):
            break
    else:
        if nF >= tol:
            raise NoConvergence(f"no convergence in {max_iter} iterations (|F| = {nF:.3e})")
    if nF > 1e-9:
        raise NoConvergence(f"stalled at |F| = {nF:.3e}")

    p = unpack(x)
    pos, _ = forward_positions(P, p)
    if min_separation(pos.values()) < 1e-6:
        raise NoConvergence("root has colliding marked points")
    gap = branch_mismatch(P, p, pos)
    if gap > match_tol:
        raise NoConvergence(f"root realizes different branch data (gap {gap:.3e})")
    if branch_cut_margin(P, p, pos) < cut_tol:
        raise NoConvergence("root sits on the branch cut; its branch data is ambiguous")
    return p
