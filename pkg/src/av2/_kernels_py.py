"""Pure numpy versions of the hot loops; the reference for the compiled core.

All functions take and return contiguous complex128 / float64 arrays. The
Moebius coefficients passed in are those of M (not its inverse).
"""

from __future__ import annotations

import cmath
import math

import numpy as np

def qd_eval(z, poles, numer):
    """phi(z) = (sum q_j z^j) / prod (z - p_i) at every z."""
    z = np.asarray(z, dtype=np.complex128)
    num = np.zeros_like(z)
    for q in numer[::-1]:
        num = num * z + q
    den = np.ones_like(z)
    for p in poles:
        den = den * (z - p)
    return num / den


def _principal_log(u):
    w = np.log(u)
    # numpy already returns Im in (-pi, pi]; -pi appears only for -x - 0j
    return np.where(w.imag <= -np.pi, w.real + 1j * np.pi, w)


def pushforward(z, a, b, c, d, beta, exponential, poles, numer, K):
    """Truncated transfer operator sum at every z.

    u = M^{-1}(z) is shared by all preimages w_k = (Log u + 2 pi i k)/beta,
    and so is g'(w_k) = beta u / (c u + d)^2. Terms are added from |k| = K
    down to 0 in +-k pairs.
    """
    z = np.asarray(z, dtype=np.complex128)
    if exponential:
        u = z
        gp = beta * u
    else:
        # M^{-1} = [[d, -b], [-c, a]]; det 1 gives c u + d = 1 / (a - c z)
        u = (d * z - b) / (a - c * z)
        gp = beta * (d * z - b) * (a - c * z)
    L = _principal_log(u)
    acc = np.zeros_like(z)
    step = 2j * np.pi / beta
    base = L / beta
    for k in range(K, 0, -1):
        acc += qd_eval(base + k * step, poles, numer) + qd_eval(base - k * step, poles, numer)
    acc += qd_eval(base, poles, numer)
    return acc / (gp * gp)


def escape_classify(betas, a, c, d, lam, exponential, max_iter, escape_radius, tol, max_period):
    """Classify, for each beta, the orbit of 1 and (lambda finite) of g(lambda).

    Returns int32 arrays (kind, count, lam_kind): kind 0 undecided,
    1 escaped (including landing on a pole), 2 cycle; count is the escape
    step or the period. lam_kind is 0 when lambda is infinite.
    """
    betas = np.asarray(betas, dtype=np.complex128)
    n = betas.shape[0]
    kind = np.zeros(n, dtype=np.int32)
    count = np.zeros(n, dtype=np.int32)
    lam_kind = np.zeros(n, dtype=np.int32)
    for i in range(n):
        beta = complex(betas[i])
        kind[i], count[i] = classify_orbit(beta, a, c, d, exponential, 1 + 0j, max_iter, escape_radius, tol, max_period)
        if not exponential:
            z0 = _g(beta, a, c, d, exponential, complex(lam))
            if z0 is None or not abs(z0) <= escape_radius:
                lam_kind[i] = 1
            else:
                lam_kind[i], _ = classify_orbit(beta, a, c, d, exponential, z0, max_iter, escape_radius, tol, max_period)
    return kind, count, lam_kind


def _g(beta, a, c, d, exponential, z):
    """g(z), or None for infinity / overflow. Mirrors family.eval."""
    t = beta * z
    if not exponential and t.real > 700:
        den = c + d * cmath.exp(-t)
        return None if den == 0 else a / den
    try:
        u = cmath.exp(t)
    except OverflowError:
        return None
    if exponential:
        return u
    den = c * u + d
    if den == 0:
        return None
    w = a * u / den
    return None if math.isinf(w.real) or math.isinf(w.imag) else w


def _chordal(z, w):
    return abs(z - w) / (math.hypot(1.0, abs(z)) * math.hypot(1.0, abs(w)))


def classify_orbit(beta, a, c, d, exponential, z0, max_iter, escape_radius, tol, max_period):
    """(kind, count) for the orbit of z0, with the cycle rule of
    portraits.forward_orbit restricted to periods <= max_period."""
    pts = [z0]
    for step in range(1, max_iter + 1):
        z = _g(beta, a, c, d, exponential, pts[-1])
        if z is None or (not exponential and 1.0 / math.hypot(1.0, abs(z)) < tol):
            return 1, step
        if abs(z) > escape_radius:
            return 1, step
        pts.append(z)
        nn = len(pts) - 1
        for l in range(1, min(nn // 2, max_period) + 1):
            i = nn - 2 * l
            for t in range(l + 1):
                if _chordal(pts[i + t], pts[i + l + t]) >= tol:
                    break
            else:
                return 2, l
        if len(pts) > 2 * max_period + 1:
            pts.pop(0)
    return 0, 0
