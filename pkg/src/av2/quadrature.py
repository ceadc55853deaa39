"""Cubature of |f| over the sphere for f with simple poles.

The integrand is split by a smooth partition of unity: a bump of radius
rho_i around each finite singular point, a bump at infinity, and the
bounded remainder.

* Each pole piece is integrated in graded polar coordinates
  r = rho s^2 around the pole. The |z - p|^{-1} singularity cancels against
  the area element, so the integrand is smooth in (s, theta).
* The infinity piece uses the chart w = 1/z, again in graded polar form.
* The remainder has compact support in a square and is bounded.

All pieces are rectangles in their own coordinates. They are refined
together by a global adaptive tensor Gauss rule: cells carrying the
largest error estimates are split into four until the summed estimate
falls below the target. This is followed by one uniform halving as a
self-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import QuadratureFailure


@dataclass(frozen=True)
class QuadOpts:
    rtol: float = 1e-2
    max_cells: int = 200_000
    max_rounds: int = 60
    order: int = 6

    def __post_init__(self):
        if not self.rtol > 0:
            raise ValueError("rtol must be positive")
        if self.order < 2:
            raise ValueError("order must be at least 2")

    def refined(self, factor: float = 0.5) -> "QuadOpts":
        return QuadOpts(self.rtol * factor, self.max_cells * 4, self.max_rounds, self.order)


def _gauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _smoothstep(x):
    """C-infinity step: 0 for x <= 0, 1 for x >= 1."""
    x = np.clip(x, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
        b = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1.0 - x, 1.0)), 0.0)
    return a / (a + b)


def bump(t):
    """1 on t <= 1/2, 0 on t >= 1, smooth in between."""
    return 1.0 - _smoothstep(2.0 * np.asarray(t) - 1.0)


@dataclass(frozen=True)
class Partition:
    """Bump centres and radii plus the inner radius R of the infinity bump."""

    centers: np.ndarray
    radii: np.ndarray
    R: float

    @classmethod
    def around(cls, points: Sequence[complex]) -> "Partition":
        pts = np.asarray(list(points), dtype=np.complex128)
        if pts.size == 0:
            raise ValueError("need at least one finite singular point")
        R = 4.0 * max(1.0, float(np.max(np.abs(pts))))
        radii = np.empty(pts.size)
        for i, p in enumerate(pts):
            others = np.delete(pts, i)
            gap = float(np.min(np.abs(others - p))) if others.size else math.inf
            if gap == 0:
                raise ValueError("singular points must be distinct")
            radii[i] = min(0.5 * gap, 0.25 * R)
        return cls(pts, radii, R)

    def inner_weight(self, z):
        """Sum of the pole bumps at z."""
        acc = np.zeros(np.shape(z))
        for p, rho in zip(self.centers, self.radii):
            acc += bump(np.abs(z - p) / rho)
        return acc

    def infinity_weight(self, z):
        """0 on |z| <= R/2, 1 on |z| >= R."""
        return _smoothstep((np.abs(z) - 0.5 * self.R) / (0.5 * self.R))


def _pieces(absf: Callable, part: Partition):
    """(integrand(x, y), x-range, y-range) for every partition piece.

    ``absf`` maps a complex array to |f| (a float array).
    """
    pieces = []
    for p, rho in zip(part.centers, part.radii):

        def pole_piece(s, th, p=p, rho=rho):
            r = rho * s * s
            z = p + r * np.exp(1j * th)
            # r dr dtheta with dr = 2 rho s ds
            return bump(s * s) * absf(z) * (2.0 * rho * rho * s**3)

        pieces.append((pole_piece, (0.0, 1.0), (0.0, 2 * math.pi)))

    R = part.R

    def remainder(x, y):
        z = x + 1j * y
        wgt = 1.0 - part.inner_weight(z) - part.infinity_weight(z)
        out = np.zeros(z.shape)
        live = wgt > 0
        if np.any(live):
            out[live] = wgt[live] * absf(z[live])
        return out

    pieces.append((remainder, (-R, R), (-R, R)))

    rw = 2.0 / R

    def infinity_piece(s, th):
        r = rw * s * s
        w = r * np.exp(1j * th)
        z = 1.0 / w
        # |f(1/w)| |w|^-4 r dr dtheta, dr = 2 rw s ds
        return part.infinity_weight(z) * absf(z) * r**-3 * (2.0 * rw * s)

    pieces.append((infinity_piece, (0.0, 1.0), (0.0, 2 * math.pi)))
    return pieces


class _Cells:
    """Axis-aligned cells of all pieces, stored column-wise."""

    def __init__(self, piece, x0, x1, y0, y1):
        self.piece = np.asarray(piece, dtype=np.int64)
        self.x0, self.x1 = np.asarray(x0, float), np.asarray(x1, float)
        self.y0, self.y1 = np.asarray(y0, float), np.asarray(y1, float)

    def __len__(self):
        return self.piece.size

    def take(self, idx):
        return _Cells(self.piece[idx], self.x0[idx], self.x1[idx], self.y0[idx], self.y1[idx])

    def split(self):
        xm = 0.5 * (self.x0 + self.x1)
        ym = 0.5 * (self.y0 + self.y1)
        pc = np.repeat(self.piece, 4)
        x0 = np.stack([self.x0, xm, self.x0, xm], 1).ravel()
        x1 = np.stack([xm, self.x1, xm, self.x1], 1).ravel()
        y0 = np.stack([self.y0, self.y0, ym, ym], 1).ravel()
        y1 = np.stack([ym, ym, self.y1, self.y1], 1).ravel()
        return _Cells(pc, x0, x1, y0, y1)

    @staticmethod
    def concat(parts):
        parts = [c for c in parts if len(c)]
        if not parts:
            return _Cells([], [], [], [], [])
        return _Cells(
            np.concatenate([c.piece for c in parts]),
            np.concatenate([c.x0 for c in parts]),
            np.concatenate([c.x1 for c in parts]),
            np.concatenate([c.y0 for c in parts]),
            np.concatenate([c.y1 for c in parts]),
        )


def _rule(pieces, cells: _Cells, nodes, weights):
    """Tensor Gauss value of every cell."""
    out = np.zeros(len(cells))
    n = nodes.size
    W = np.outer(weights, weights).ravel()
    for k, (f, _, _) in enumerate(pieces):
        idx = np.nonzero(cells.piece == k)[0]
        if idx.size == 0:
            continue
        x0, x1 = cells.x0[idx, None], cells.x1[idx, None]
        y0, y1 = cells.y0[idx, None], cells.y1[idx, None]
        X = x0 + (x1 - x0) * np.repeat(nodes, n)[None, :]
        Y = y0 + (y1 - y0) * np.tile(nodes, n)[None, :]
        vals = f(X.ravel(), Y.ravel()).reshape(X.shape)
        out[idx] = (vals @ W) * ((x1 - x0) * (y1 - y0))[:, 0]
    return out


def _initial_cells(pieces, part: Partition):
    cells = []
    for k, (_, (a, b), (c, d)) in enumerate(pieces):
        if k == len(part.centers):  # remainder square
            nx = ny = 8
        else:
            nx, ny = 2, 8
        xs = np.linspace(a, b, nx + 1)
        ys = np.linspace(c, d, ny + 1)
        X0, Y0 = np.meshgrid(xs[:-1], ys[:-1], indexing="ij")
        X1, Y1 = np.meshgrid(xs[1:], ys[1:], indexing="ij")
        cells.append(_Cells(np.full(X0.size, k), X0.ravel(), X1.ravel(), Y0.ravel(), Y1.ravel()))
    return _Cells.concat(cells)


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float
    n_cells: int
    coarse: float  # value on the adaptive mesh before the final uniform halving


def integrate_abs(
    absf: Callable, singular: Sequence[complex], opts: QuadOpts | None = None, atol: float = 0.0
) -> QuadResult:
    """Integral over the sphere of |f| dA (area measure dx dy).

    ``absf(z)`` must return |f(z)| for a complex array; ``singular`` lists
    the finite points where f may have simple poles. f must decay like
    |z|^-3 or faster at infinity. The error target is
    max(rtol |I|, atol).
    """
    opts = opts or QuadOpts()
    part = Partition.around(singular)
    pieces = _pieces(absf, part)
    hi_n, hi_w = _gauss(opts.order)
    lo_n, lo_w = _gauss(opts.order - 2)

    def evaluate(c):
        hi = _rule(pieces, c, hi_n, hi_w)
        lo = _rule(pieces, c, lo_n, lo_w)
        if not (np.all(np.isfinite(hi)) and np.all(np.isfinite(lo))):
            raise QuadratureFailure("integrand is not finite on the mesh")
        return hi, np.abs(hi - lo)

    cells = _initial_cells(pieces, part)
    val, err = evaluate(cells)
    target = 0.125 * opts.rtol
    floor = 0.125 * atol
    for _ in range(opts.max_rounds):
        total = _pairwise_sum(val)
        goal = max(target * abs(total), floor)
        if float(err.sum()) <= goal:
            check = _pairwise_sum(_rule(pieces, cells.split(), hi_n, hi_w))
            if abs(check - total) <= max(0.5 * opts.rtol * abs(check), atol):
                return QuadResult(check, abs(check - total), len(cells), total)
            target *= 0.25
            floor *= 0.25
            continue
        excess = float(err.sum()) - 0.5 * goal
        order = np.argsort(-err, kind="stable")
        n_split = int(np.searchsorted(np.cumsum(err[order]), 0.5 * excess)) + 1
        n_split = min(n_split, len(cells))
        split = np.sort(order[:n_split])
        keep = np.sort(order[n_split:])
        children = cells.take(split).split()
        c_val, c_err = evaluate(children)
        cells = _Cells.concat([cells.take(keep), children])
        val = np.concatenate([val[keep], c_val])
        err = np.concatenate([err[keep], c_err])
        if len(cells) > opts.max_cells:
            raise QuadratureFailure(f"mesh exceeded {opts.max_cells} cells before reaching rtol {opts.rtol}")
    raise QuadratureFailure(f"no convergence after {opts.max_rounds} refinement rounds")


def _pairwise_sum(x) -> float:
    # numpy's sum is pairwise for contiguous float arrays, so the result
    # depends only on the order of cells, which is deterministic
    return float(np.sum(np.ascontiguousarray(x, dtype=np.float64)))
