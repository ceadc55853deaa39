"""The two-asymptotic-value family g(z) = M_alpha(exp(beta z)).

M_alpha(u) = alpha u / ((alpha - 1/alpha) u + 1/alpha) fixes 0 and 1, so
every member satisfies g(0) = 1 and omits 0 and lambda = M_alpha(inf).
alpha**2 == 1 is the entire (exponential) sub-case, evaluated in closed form.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import cached_property

from .errors import (
    EssentialSingularity,
    InvalidAsymptoticValue,
    InvalidParameter,
    OmittedValue,
    PoleProximity,
)
from .sphere import (
    INF,
    MobiusMap,
    SpherePoint,
    as_point,
    canonical_sqrt,
    mobius_apply,
    mobius_from_alpha,
    mobius_inverse,
    point_from_json,
    point_to_json,
    principal_log,
    sph_dist,
)

TWO_PI_I = 2j * math.pi
EXP_TOL = 1e-12
# targets this close (chordally) to an asymptotic value count as omitted
OMIT_TOL = 1e-14


@dataclass(frozen=True)
class Av2Params:
    alpha: complex
    beta: complex

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "beta", complex(self.beta))
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                raise InvalidParameter(f"{name} must be finite")
            if v == 0:
                raise InvalidParameter(f"{name} must be nonzero")

    @property
    def is_exponential(self) -> bool:
        return abs(self.alpha * self.alpha - 1) < EXP_TOL

    @cached_property
    def mobius(self) -> MobiusMap:
        if self.is_exponential:
            return MobiusMap.identity()
        return mobius_from_alpha(self.alpha)

    @cached_property
    def mobius_inv(self) -> MobiusMap:
        return mobius_inverse(self.mobius)

    @property
    def lam(self) -> SpherePoint:
        """The second asymptotic value."""
        if self.is_exponential:
            return INF
        a2 = self.alpha * self.alpha
        return a2 / (a2 - 1)

    def to_json(self) -> dict:
        return {"alpha": point_to_json(self.alpha), "beta": point_to_json(self.beta)}

    @classmethod
    def from_json(cls, obj) -> "Av2Params":
        extra = set(obj) - {"alpha", "beta"}
        if extra:
            raise ValueError(f"unknown parameter fields: {sorted(extra)}")
        a, b = point_from_json(obj["alpha"]), point_from_json(obj["beta"])
        if a is INF or b is INF:
            raise InvalidParameter("alpha and beta must be finite")
        return cls(a, b)


def eval(p: Av2Params, z: SpherePoint) -> SpherePoint:  # noqa: A001
    """g_{alpha,beta}(z). Infinity is an essential singularity."""
    if z is INF:
        raise EssentialSingularity("g is not defined at infinity")
    t = p.beta * z
    m = p.mobius
    if t.real > 700 and not p.is_exponential:
        return as_point(m.a / (m.c + m.d * cmath.exp(-t)))
    u = cmath.exp(t)
    if p.is_exponential:
        return u
    den = m.c * u + m.d
    if den == 0:
        return INF
    return as_point(m.a * u / den)


def deriv(p: Av2Params, z: complex) -> complex:
    """g'(z) = beta u / (c u + d)^2 with u = exp(beta z) (det M = 1)."""
    if z is INF:
        raise EssentialSingularity("g is not defined at infinity")
    u = cmath.exp(p.beta * z)
    if p.is_exponential:
        return p.beta * u
    m = p.mobius
    den = m.c * u + m.d
    if den == 0:
        raise PoleProximity("derivative requested at a pole")
    return p.beta * u / (den * den)


def asymptotic_values(p: Av2Params) -> tuple[SpherePoint, SpherePoint]:
    return 0j, p.lam


def alpha_from_lambda(lam: SpherePoint) -> complex:
    """alpha with alpha^2 = lam / (lam - 1); lam = inf gives alpha = 1."""
    if lam is INF:
        return 1 + 0j
    lam = complex(lam)
    if lam == 0 or lam == 1:
        raise InvalidAsymptoticValue(f"second asymptotic value may not be {lam}")
    return canonical_sqrt(lam / (lam - 1))


def inverse(p: Av2Params, w: SpherePoint, k: int) -> complex:
    """The k-th preimage (Log(M^{-1}(w)) + 2 pi i k) / beta.

    Log is the principal branch. Omitted values have no preimage; infinity
    has preimages (the poles) exactly when lambda is finite.
    """
    if sph_dist(w, 0j) < OMIT_TOL or sph_dist(w, p.lam) < OMIT_TOL:
        raise OmittedValue(f"{w!r} is an omitted value of g")
    if p.is_exponential:
        u = w
    else:
        u = mobius_apply(p.mobius_inv, w)
    if u is INF or u == 0:
        raise OmittedValue(f"{w!r} is an omitted value of g")
    return (principal_log(u) + TWO_PI_I * k) / p.beta


def poles_near(p: Av2Params, z: complex, count: int = 1) -> list[complex]:
    """The ``count`` poles of g closest to ``z`` on its lattice line (empty
    in the exponential case)."""
    if p.is_exponential:
        return []
    base = principal_log(1 - p.lam) / p.beta
    step = TWO_PI_I / p.beta
    # poles are base + k*step; nearest k by projection
    t = ((z - base) / step).real
    k0 = math.floor(t)
    ks = sorted(range(k0 - count, k0 + count + 2), key=lambda k: abs(base + k * step - z))
    return [base + k * step for k in ks[:count]]


def pole_distance(p: Av2Params, z: complex) -> float:
    near = poles_near(p, z)
    return abs(near[0] - z) if near else math.inf


def _cauchy_derivatives(f, z: complex, r: float, n_points: int = 24):
    """Derivatives 1..3 of a holomorphic f from samples on a circle.

    Trapezoidal Cauchy formula, the circular analogue of a central finite
    difference; aliasing error is (r/rho)^n_points for singularity distance
    rho.
    """
    vals = [f(z + r * cmath.exp(TWO_PI_I * j / n_points)) for j in range(n_points)]
    out = []
    for n in (1, 2, 3):
        acc = 0j
        for j, v in enumerate(vals):
            acc += v * cmath.exp(-TWO_PI_I * j * n / n_points)
        out.append(math.factorial(n) * acc / (n_points * r**n))
    return out


def schwarzian_numeric(p: Av2Params, z: complex) -> complex:
    """S(g)(z) = g'''/g' - 3/2 (g''/g')^2 from sampled values of g only."""
    rho = pole_distance(p, z)
    if rho < 1e-3:
        raise PoleProximity(f"probe {z} is within {rho:.2e} of a pole")
    r = min(0.5 / abs(p.beta), rho / 4)
    d1, d2, d3 = _cauchy_derivatives(lambda x: eval(p, x), z, r)
    return d3 / d1 - 1.5 * (d2 / d1) ** 2


def schwarzian_residual(p: Av2Params, z: complex) -> float:
    """|S_numeric(g)(z) + beta^2 / 2|."""
    return abs(schwarzian_numeric(p, z) + p.beta * p.beta / 2)


def sample_params(rng, exp_fraction: float = 0.2) -> Av2Params:
    """A random map: |alpha| log-uniform in [0.3, 3], |beta| log-uniform in
    [0.3, 6], uniform arguments; about ``exp_fraction`` of draws are
    exponential (alpha = 1)."""

    def polar(lo, hi):
        r = math.exp(rng.uniform(math.log(lo), math.log(hi)))
        return cmath.rect(r, rng.uniform(-math.pi, math.pi))

    alpha = 1 + 0j if rng.uniform() < exp_fraction else polar(0.3, 3.0)
    beta = polar(0.3, 6.0)
    if abs(alpha * alpha - 1) < 1e-6 and alpha != 1:
        alpha = 1 + 0j  # keep clear of the exponential threshold
    return Av2Params(alpha, beta)
