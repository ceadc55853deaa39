# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops. Same signatures and semantics as av2._kernels_py."""

import numpy as np

from libc.math cimport atan2, cos, exp, hypot, isfinite, log, sin, M_PI

cdef double complex _cexp(double complex t) noexcept nogil:
    cdef double r = exp(t.real)
    return r * cos(t.imag) + 1j * (r * sin(t.imag))


cdef double complex _plog(double complex u) noexcept nogil:
    cdef double th = atan2(u.imag, u.real)
    if th <= -M_PI:
        th = M_PI
    return log(hypot(u.real, u.imag)) + 1j * th


cdef double complex _qd(double complex z, const double complex[:] poles,
                        const double complex[:] numer) noexcept nogil:
    cdef double complex num = 0
    cdef double complex den = 1
    cdef Py_ssize_t j
    for j in range(numer.shape[0] - 1, -1, -1):
        num = num * z + numer[j]
    for j in range(poles.shape[0]):
        den = den * (z - poles[j])
    return num / den


def qd_eval(z, poles, numer):
    cdef const double complex[:] zv = np.ascontiguousarray(z, dtype=np.complex128).ravel()
    cdef const double complex[:] pv = np.ascontiguousarray(poles, dtype=np.complex128)
    cdef const double complex[:] qv = np.ascontiguousarray(numer, dtype=np.complex128)
    out = np.empty(zv.shape[0], dtype=np.complex128)
    cdef double complex[:] ov = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(zv.shape[0]):
            ov[i] = _qd(zv[i], pv, qv)
    return out.reshape(np.shape(z))


def pushforward(z, a, b, c, d, beta, exponential, poles, numer, K):
    cdef const double complex[:] zv = np.ascontiguousarray(z, dtype=np.complex128).ravel()
    cdef const double complex[:] pv = np.ascontiguousarray(poles, dtype=np.complex128)
    cdef const double complex[:] qv = np.ascontiguousarray(numer, dtype=np.complex128)
    cdef double complex A = a, B = b, C = c, D = d, bt = beta
    cdef bint ex = bool(exponential)
    cdef int KK = K
    out = np.empty(zv.shape[0], dtype=np.complex128)
    cdef double complex[:] ov = out
    cdef Py_ssize_t i
    cdef int k
    cdef double complex zi, u, gp, base, step, acc
    step = 2j * M_PI / bt
    with nogil:
        for i in range(zv.shape[0]):
            zi = zv[i]
            if ex:
                u = zi
                gp = bt * u
            else:
                u = (D * zi - B) / (A - C * zi)
                gp = bt * (D * zi - B) * (A - C * zi)
            base = _plog(u) / bt
            acc = 0
            for k in range(KK, 0, -1):
                acc = acc + (_qd(base + k * step, pv, qv) + _qd(base - k * step, pv, qv))
            acc = acc + _qd(base, pv, qv)
            ov[i] = acc / (gp * gp)
    return out.reshape(np.shape(z))


cdef inline double _chordal(double complex z, double complex w) noexcept nogil:
    cdef double complex e = z - w
    return hypot(e.real, e.imag) / (hypot(1.0, hypot(z.real, z.imag)) * hypot(1.0, hypot(w.real, w.imag)))


cdef bint _g(double complex beta, double complex a, double complex c, double complex d, bint ex,
             double complex z, double complex* out) noexcept nogil:
    """g(z) into out; False for infinity or overflow (mirrors family.eval)."""
    cdef double complex t = beta * z
    cdef double complex u, den, w
    if not ex and t.real > 700:
        den = c + d * _cexp(-t)
        if den == 0:
            return False
        out[0] = a / den
        return True
    u = _cexp(t)
    if not (isfinite(u.real) and isfinite(u.imag)):
        return False
    if ex:
        out[0] = u
        return True
    den = c * u + d
    if den == 0:
        return False
    w = a * u / den
    if not (isfinite(w.real) and isfinite(w.imag)):
        return False
    out[0] = w
    return True


cdef enum:
    MAXWIN = 257

cdef int _classify(double complex beta, double complex a, double complex c, double complex d, bint ex,
                   double complex z0, int max_iter, double escape_radius, double tol, int max_period,
                   int* count) noexcept nogil:
    cdef double complex buf[MAXWIN]
    cdef int n = 1, step, l, i, t, top, j
    cdef double complex z
    cdef bint ok
    buf[0] = z0
    for step in range(1, max_iter + 1):
        if not _g(beta, a, c, d, ex, buf[n - 1], &z):
            count[0] = step
            return 1
        if not ex and 1.0 / hypot(1.0, hypot(z.real, z.imag)) < tol:
            count[0] = step
            return 1
        if hypot(z.real, z.imag) > escape_radius:
            count[0] = step
            return 1
        if n == 2 * max_period + 2:
            for j in range(n - 1):
                buf[j] = buf[j + 1]
            n -= 1
        buf[n] = z
        n += 1
        top = (n - 1) // 2
        if top > max_period:
            top = max_period
        for l in range(1, top + 1):
            i = n - 1 - 2 * l
            ok = True
            for t in range(l + 1):
                if _chordal(buf[i + t], buf[i + l + t]) >= tol:
                    ok = False
                    break
            if ok:
                count[0] = l
                return 2
    count[0] = 0
    return 0


def classify_orbit(beta, a, c, d, exponential, z0, max_iter, escape_radius, tol, max_period):
    if 2 * max_period + 2 > MAXWIN:
        raise ValueError("max_period too large for the compiled kernel")
    cdef int cnt = 0
    cdef int kind = _classify(beta, a, c, d, bool(exponential), z0, max_iter, escape_radius, tol, max_period, &cnt)
    return kind, cnt


def escape_classify(betas, a, c, d, lam, exponential, max_iter, escape_radius, tol, max_period):
    if 2 * max_period + 2 > MAXWIN:
        raise ValueError("max_period too large for the compiled kernel")
    cdef const double complex[:] bv = np.ascontiguousarray(betas, dtype=np.complex128).ravel()
    cdef Py_ssize_t n = bv.shape[0], i
    kind = np.zeros(n, dtype=np.int32)
    count = np.zeros(n, dtype=np.int32)
    lam_kind = np.zeros(n, dtype=np.int32)
    cdef int[:] kv = kind
    cdef int[:] cv = count
    cdef int[:] lv = lam_kind
    cdef double complex A = a, C = c, D = d, LAM = lam
    cdef bint ex = bool(exponential)
    cdef int mi = max_iter, mp = max_period, cnt, dummy
    cdef double R = escape_radius, tl = tol
    cdef double complex z0
    with nogil:
        for i in range(n):
            kv[i] = _classify(bv[i], A, C, D, ex, 1.0, mi, R, tl, mp, &cnt)
            cv[i] = cnt
            if not ex:
                if not _g(bv[i], A, C, D, ex, LAM, &z0) or not (hypot(z0.real, z0.imag) <= R):
                    lv[i] = 1
                else:
                    lv[i] = _classify(bv[i], A, C, D, ex, z0, mi, R, tl, mp, &dummy)
    return kind, count, lam_kind
