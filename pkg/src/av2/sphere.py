"""Riemann-sphere arithmetic: points, the chordal metric, Moebius maps.

A sphere point is either a Python ``complex`` or the singleton :data:`INF`.
Infinity is a tagged value, never a large float, so every operation here is
total on the sphere.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Union


class _Infinity:
    """The point at infinity. Use the module constant :data:`INF`."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()

SpherePoint = Union[complex, _Infinity]


def is_inf(z) -> bool:
    return z is INF


def as_point(z) -> SpherePoint:
    """Coerce ``z`` to a sphere point, rejecting NaN."""
    if z is INF:
        return INF
    z = complex(z)
    if math.isnan(z.real) or math.isnan(z.imag):
        raise ValueError("sphere points may not be NaN")
    if math.isinf(z.real) or math.isinf(z.imag):
        return INF
    return z


def sph_dist(z: SpherePoint, w: SpherePoint) -> float:
    """Chordal distance |z-w| / (sqrt(1+|z|^2) sqrt(1+|w|^2)), in [0, 1].

    At infinity the two-point formula is replaced by its limit
    1/sqrt(1+|z|^2).
    """
    if z is INF and w is INF:
        return 0.0
    if z is INF:
        return 1.0 / math.hypot(1.0, abs(w))
    if w is INF:
        return 1.0 / math.hypot(1.0, abs(z))
    return abs(z - w) / (math.hypot(1.0, abs(z)) * math.hypot(1.0, abs(w)))


def canonical_sqrt(z: complex) -> complex:
    """Square root with Re >= 0, ties (Re == 0) broken by Im >= 0."""
    s = cmath.sqrt(complex(z))
    if s.real < 0 or (s.real == 0 and s.imag < 0):
        s = -s
    return s + 0.0  # drop negative zeros


def principal_log(z: complex) -> complex:
    """Principal logarithm with imaginary part in (-pi, pi]."""
    w = cmath.log(z)
    if w.imag <= -math.pi:
        w = complex(w.real, math.pi)
    return w


def _canonical_sign(coeffs):
    for c in coeffs:
        if c != 0:
            if c.real < 0 or (c.real == 0 and c.imag < 0):
                return -1
            return 1
    return 1


@dataclass(frozen=True)
class MobiusMap:
    """z -> (a z + b) / (c z + d) with ad - bc = 1.

    Construct through :meth:`normalized` unless the coefficients are already
    determinant-normalized. The overall sign is fixed so that the first
    nonzero coefficient has positive real part (or zero real part and
    positive imaginary part); M and -M are the same map, so this only makes
    the representation deterministic.
    """

    a: complex
    b: complex
    c: complex
    d: complex

    @classmethod
    def normalized(cls, a, b, c, d) -> "MobiusMap":
        a, b, c, d = complex(a), complex(b), complex(c), complex(d)
        det = a * d - b * c
        if det == 0:
            raise ValueError("singular Moebius matrix")
        s = canonical_sqrt(det)
        a, b, c, d = a / s, b / s, c / s, d / s
        if _canonical_sign((a, b, c, d)) < 0:
            a, b, c, d = -a, -b, -c, -d
        return cls(a, b, c, d)

    @classmethod
    def identity(cls) -> "MobiusMap":
        return cls(1 + 0j, 0j, 0j, 1 + 0j)

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    def __call__(self, z: SpherePoint) -> SpherePoint:
        return mobius_apply(self, z)

    def __matmul__(self, other: "MobiusMap") -> "MobiusMap":
        return mobius_compose(self, other)


def mobius_apply(m: MobiusMap, z: SpherePoint) -> SpherePoint:
    if z is INF:
        if m.c == 0:
            return INF
        return m.a / m.c
    num = m.a * z + m.b
    den = m.c * z + m.d
    if den == 0:
        return INF
    return as_point(num / den)


def mobius_inverse(m: MobiusMap) -> MobiusMap:
    # the adjugate of a determinant-1 matrix is its inverse
    return MobiusMap.normalized(m.d, -m.b, -m.c, m.a)


def mobius_compose(m1: MobiusMap, m2: MobiusMap) -> MobiusMap:
    """The map z -> m1(m2(z))."""
    return MobiusMap.normalized(
        m1.a * m2.a + m1.b * m2.c,
        m1.a * m2.b + m1.b * m2.d,
        m1.c * m2.a + m1.d * m2.c,
        m1.c * m2.b + m1.d * m2.d,
    )


def mobius_from_alpha(alpha: complex) -> MobiusMap:
    """The normalizing map z -> alpha z / ((alpha - 1/alpha) z + 1/alpha).

    It fixes 0 and 1 and sends infinity to alpha^2 / (alpha^2 - 1).
    """
    alpha = complex(alpha)
    if alpha == 0:
        raise ValueError("alpha must be nonzero")
    # already has determinant alpha * (1/alpha) = 1
    return MobiusMap.normalized(alpha, 0, alpha - 1 / alpha, 1 / alpha)


def point_to_json(z: SpherePoint):
    if z is INF:
        return "inf"
    z = complex(z)
    return [z.real, z.imag]


def point_from_json(obj) -> SpherePoint:
    if isinstance(obj, str):
        if obj.strip().lower() == "inf":
            return INF
        raise ValueError(f"unrecognised sphere point {obj!r}")
    if isinstance(obj, (int, float)):
        return as_point(complex(obj))
    if isinstance(obj, (list, tuple)) and len(obj) == 2:
        return as_point(complex(float(obj[0]), float(obj[1])))
    raise ValueError(f"unrecognised sphere point {obj!r}")
