"""Integrable quadratic differentials and the transfer operator of g.

A quadratic differential phi(z) dz^2 with simple poles at the finite
marked points p_1..p_{m-1} (and at worst a simple pole at infinity) is
stored as a numerator polynomial over the full pole product:

    phi(z) = (q_0 + q_1 z + ... + q_{m-4} z^{m-4}) / prod_i (z - p_i).

The transfer operator pushes phi forward through g:

    (L phi)(z) = sum over g(w) = z of phi(w) / g'(w)^2.

All preimages of z share u = M^{-1}(z) = e^{beta w}, hence the same
g'(w), so the sum is phi summed over the lattice (Log u + 2 pi i k)/beta
divided by one squared derivative.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import family, kernels
from .errors import InvalidParameter, PoleProximity
from .family import Av2Params
from .quadrature import QuadOpts, QuadResult, integrate_abs
from .sphere import INF, point_from_json, point_to_json, principal_log, sph_dist

POLE_TOL = 1e-12


@dataclass(frozen=True)
class QuadDiff:
    poles: tuple
    numerator: tuple

    def __post_init__(self):
        poles = tuple(complex(p) for p in self.poles)
        numer = tuple(complex(q) for q in self.numerator)
        for p in poles:
            if not (math.isfinite(p.real) and math.isfinite(p.imag)):
                raise InvalidParameter("poles must be finite (infinity is implicit)")
        if len(poles) < 3:
            raise InvalidParameter(f"need at least 3 finite poles (m >= 4), got {len(poles)}")
        if len(set(poles)) != len(poles):
            raise InvalidParameter("poles must be distinct")
        if not numer:
            raise InvalidParameter("numerator needs at least one coefficient")
        if len(numer) > len(poles) - 2:
            raise InvalidParameter(
                f"numerator degree {len(numer) - 1} exceeds m - 4 = {len(poles) - 3}; phi would not be integrable"
            )
        object.__setattr__(self, "poles", poles)
        object.__setattr__(self, "numerator", numer)

    @property
    def m(self) -> int:
        """Number of marked points, infinity included."""
        return len(self.poles) + 1

    def __add__(self, other: "QuadDiff") -> "QuadDiff":
        if other.poles != self.poles:
            raise ValueError("can only add differentials with the same poles")
        n = max(len(self.numerator), len(other.numerator))
        a = list(self.numerator) + [0j] * (n - len(self.numerator))
        b = list(other.numerator) + [0j] * (n - len(other.numerator))
        return QuadDiff(self.poles, [x + y for x, y in zip(a, b)])

    def scaled(self, c: complex) -> "QuadDiff":
        return QuadDiff(self.poles, [c * q for q in self.numerator])

    def to_json(self) -> dict:
        return {
            "poles": [point_to_json(p) for p in self.poles],
            "numerator": [point_to_json(q) for q in self.numerator],
        }

    @classmethod
    def from_json(cls, obj) -> "QuadDiff":
        extra = set(obj) - {"poles", "numerator"}
        if extra:
            raise ValueError(f"unknown quadratic differential fields: {sorted(extra)}")
        poles = [point_from_json(p) for p in obj["poles"]]
        if any(p is INF for p in poles):
            raise InvalidParameter("list finite poles only; infinity is implicit")
        return cls(poles, [point_from_json(q) for q in obj["numerator"]])

    def arrays(self):
        return np.asarray(self.poles, dtype=np.complex128), np.asarray(self.numerator, dtype=np.complex128)


def eval_qd(qd: QuadDiff, z: complex) -> complex:
    z = complex(z)
    num = 0j
    for q in reversed(qd.numerator):
        num = num * z + q
    den = 1 + 0j
    for p in qd.poles:
        if abs(z - p) < POLE_TOL:
            raise PoleProximity(f"{z} is within {POLE_TOL:g} of the pole {p}")
        den *= z - p
    return num / den


def residues(qd: QuadDiff) -> list[complex]:
    """numerator(p_i) / prod_{j != i} (p_i - p_j) for every pole."""
    out = []
    for i, p in enumerate(qd.poles):
        num = 0j
        for q in reversed(qd.numerator):
            num = num * p + q
        den = 1 + 0j
        for j, pj in enumerate(qd.poles):
            if j != i:
                den *= p - pj
        out.append(num / den)
    return out


def residue(qd: QuadDiff, pole: complex) -> complex:
    pole = complex(pole)
    for p, r in zip(qd.poles, residues(qd)):
        if p == pole:
            return r
    raise ValueError(f"{pole} is not a pole of this differential")


def basis(config_points: Sequence) -> list[QuadDiff]:
    """The m-3 monomial-numerator differentials with poles at the finite
    points of a marked configuration (infinity must be one of the points).

    ``config_points`` may be a MarkedConfiguration or a list of points.
    """
    pts = list(config_points.positions.values()) if hasattr(config_points, "positions") else list(config_points)
    if not any(p is INF for p in pts):
        raise InvalidParameter("the configuration must contain infinity")
    finite = [complex(p) for p in pts if p is not INF]
    m = len(finite) + 1
    if m < 4:
        raise InvalidParameter("no integrable differentials on fewer than 4 points")
    return [QuadDiff(finite, [0j] * j + [1 + 0j]) for j in range(m - 3)]


def l1_result(qd: QuadDiff, quad_opts: QuadOpts | None = None) -> QuadResult:
    poles, numer = qd.arrays()
    return integrate_abs(lambda z: np.abs(kernels.qd_eval(z, poles, numer)), qd.poles, quad_opts)


def l1_norm(qd: QuadDiff, quad_opts: QuadOpts | None = None) -> float:
    """Integral of |phi| dx dy over the plane."""
    return l1_result(qd, quad_opts).value


# ---------------------------------------------------------------------------
# transfer operator


def _preimage_data(g: Av2Params, z: complex):
    """(Log u, g'(w)) shared by all preimages w of z."""
    w0 = family.inverse(g, z, 0)  # raises OmittedValue
    u = z if g.is_exponential else g.mobius_inv(z)
    return principal_log(u), family.deriv(g, w0)


def pushforward_eval(g: Av2Params, qd: QuadDiff, z: complex, K: int = 64) -> complex:
    """sum_{k=-K..K} phi(w_k) / g'(w_k)^2 with w_k = inverse(g, z, k)."""
    if K < 0:
        raise ValueError("K must be non-negative")
    _, gp = _preimage_data(g, z)
    acc = 0j
    # smallest terms first
    for k in range(K, 0, -1):
        acc += eval_qd(qd, family.inverse(g, z, k)) + eval_qd(qd, family.inverse(g, z, -k))
    acc += eval_qd(qd, family.inverse(g, z, 0))
    return acc / (gp * gp)


def pushforward_tail_bound(g: Av2Params, qd: QuadDiff, z: complex, K: int = 64) -> float:
    """Rigorous bound on the terms |k| > K dropped by :func:`pushforward_eval`.

    For |w| >= R0 = max(1, 2 max|p_i|), |phi(w)| <= A |w|^-3 with
    A = 2^{m-1} sum |q_j|, and |w_k| >= (2 pi |k| - |Log u|) / |beta|.
    Summing the k^-3 tail against its integral gives the bound. Returns inf
    when K is too small for the estimate to apply.
    """
    L, gp = _preimage_data(g, z)
    R0 = max(1.0, 2.0 * max(abs(p) for p in qd.poles))
    A = 2.0 ** (qd.m - 1) * sum(abs(q) for q in qd.numerator)
    gap = 2 * math.pi * K - abs(L)
    b = abs(g.beta)
    if gap <= 0 or gap / b < R0:
        return math.inf
    return 2 * A * b**3 / (4 * math.pi * gap * gap) / abs(gp) ** 2


def pushforward_exact(g: Av2Params, qd: QuadDiff, z: complex) -> complex:
    """The untruncated sum in closed form.

    With phi = sum_i r_i / (w - p_i) (partial fractions), the lattice sum of
    1/(w_k - p_i) is (beta/2) coth((Log u - beta p_i)/2) under symmetric
    summation. The residues sum to zero, so this reduces to
    beta sum_i r_i / (u e^{-beta p_i} - 1).
    """
    L, gp = _preimage_data(g, z)
    acc = 0j
    for p, r in zip(qd.poles, residues(qd)):
        acc += r / (cmath.exp(L - g.beta * p) - 1)
    return g.beta * acc / (gp * gp)


def _mobius_coeffs(g: Av2Params):
    m = g.mobius
    return m.a, m.b, m.c, m.d


def pushforward_array(g: Av2Params, qd: QuadDiff, z, K: int = 64) -> np.ndarray:
    """Vectorized :func:`pushforward_eval` through the kernel backend."""
    poles, numer = qd.arrays()
    a, b, c, d = _mobius_coeffs(g)
    z = np.ascontiguousarray(z, dtype=np.complex128)
    return kernels.pushforward(z, a, b, c, d, g.beta, g.is_exponential, poles, numer, int(K))


def image_singularities(g: Av2Params, points: Sequence[complex], tol: float = 1e-9) -> list[complex]:
    """Finite points where the push-forward of a differential with poles at
    ``points`` can be singular: the images g(p) and the asymptotic values."""
    cand = [0j]
    if not g.is_exponential:
        cand.append(complex(g.lam))
    for p in points:
        w = family.eval(g, p)
        if w is not INF and sph_dist(w, INF) > tol:
            cand.append(complex(w))
    out: list[complex] = []
    for c in cand:
        if all(sph_dist(c, o) > tol for o in out):
            out.append(c)
    return out


@dataclass(frozen=True)
class TransferReport:
    ratio: float
    norm_in: float
    norm_out: float
    K: int
    cells_in: int
    cells_out: int

    def to_json(self) -> dict:
        return {
            "ratio": self.ratio,
            "norm": self.norm_in,
            "pushforward_norm": self.norm_out,
            "K": self.K,
            "cells": [self.cells_in, self.cells_out],
        }


def transfer_report(
    g: Av2Params,
    qd: QuadDiff,
    K: int = 64,
    quad_opts: QuadOpts | None = None,
    singular: Sequence[complex] | None = None,
) -> TransferReport:
    sing = list(singular) if singular is not None else image_singularities(g, qd.poles)
    den = l1_result(qd, quad_opts)
    # the ratio needs absolute accuracy relative to ||qd||; without the
    # floor a push-forward that (nearly) vanishes would never converge
    rtol = (quad_opts or QuadOpts()).rtol
    num = integrate_abs(
        lambda z: np.abs(pushforward_array(g, qd, z, K)), sing, quad_opts, atol=0.25 * rtol * den.value
    )
    return TransferReport(num.value / den.value, den.value, num.value, K, den.n_cells, num.n_cells)


def contraction_ratio(
    g: Av2Params,
    qd: QuadDiff,
    K: int = 64,
    quad_opts: QuadOpts | None = None,
    singular: Sequence[complex] | None = None,
) -> float:
    """||L qd|| / ||qd||, both norms by the same sphere quadrature.

    The singular set of L qd defaults to :func:`image_singularities`.
    """
    return transfer_report(g, qd, K, quad_opts, singular).ratio


__all__ = [
    "QuadDiff",
    "QuadOpts",
    "basis",
    "contraction_ratio",
    "eval_qd",
    "image_singularities",
    "l1_norm",
    "l1_result",
    "pushforward_array",
    "pushforward_eval",
    "pushforward_exact",
    "pushforward_tail_bound",
    "residue",
    "residues",
    "transfer_report",
]
