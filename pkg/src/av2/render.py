"""Escape-time pictures of the beta-plane for fixed alpha.

Each pixel is one map g_{alpha, beta}. The orbit of 1 = g(0) is classified
as escaping, cycling (period <= 16) or undecided. When lambda is finite,
the orbit of g(lambda) is classified as well, and pixels where it escapes
are drawn at half brightness.
"""

from __future__ import annotations

import math
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .family import Av2Params
from .sphere import INF, point_from_json, point_to_json

MAX_PERIOD = 16
CYCLE_TOL = 1e-9

UNDECIDED, ESCAPED, CYCLE = 0, 1, 2

# one colour per period 1..16
PALETTE = np.array(
    [
        (230, 25, 75),
        (60, 180, 75),
        (255, 225, 25),
        (0, 130, 200),
        (245, 130, 48),
        (145, 30, 180),
        (70, 240, 240),
        (240, 50, 230),
        (210, 245, 60),
        (250, 190, 212),
        (0, 128, 128),
        (220, 190, 255),
        (170, 110, 40),
        (255, 250, 200),
        (128, 0, 0),
        (170, 255, 195),
    ],
    dtype=np.uint8,
)

SPEC_FIELDS = {"alpha", "center", "width", "height", "resolution", "max_iter", "escape_radius"}


@dataclass(frozen=True)
class RenderSpec:
    alpha: complex
    center: complex
    width: float
    height: float
    nx: int
    ny: int
    max_iter: int = 200
    escape_radius: float = 1e10

    def __post_init__(self):
        Av2Params(self.alpha, 1.0)  # alpha must be a valid parameter
        if self.nx < 1 or self.ny < 1:
            raise ValueError("resolution must be at least 1x1")
        if not (self.width > 0 and self.height > 0):
            raise ValueError("width and height must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")
        if not self.escape_radius > 0:
            raise ValueError("escape_radius must be positive")

    @classmethod
    def from_json(cls, obj: dict) -> "RenderSpec":
        extra = set(obj) - SPEC_FIELDS
        if extra:
            raise ValueError(f"unknown render spec fields: {sorted(extra)}")
        missing = {"alpha", "center", "width", "height", "resolution"} - set(obj)
        if missing:
            raise ValueError(f"missing render spec fields: {sorted(missing)}")
        res = obj["resolution"]
        nx, ny = (res, res) if isinstance(res, int) else (int(res[0]), int(res[1]))
        alpha, center = point_from_json(obj["alpha"]), point_from_json(obj["center"])
        if alpha is INF or center is INF:
            raise ValueError("alpha and center must be finite")
        return cls(
            alpha=alpha,
            center=center,
            width=float(obj["width"]),
            height=float(obj["height"]),
            nx=nx,
            ny=ny,
            max_iter=int(obj.get("max_iter", 200)),
            escape_radius=float(obj.get("escape_radius", 1e10)),
        )

    def to_json(self) -> dict:
        return {
            "alpha": point_to_json(self.alpha),
            "center": point_to_json(self.center),
            "width": self.width,
            "height": self.height,
            "resolution": [self.nx, self.ny],
            "max_iter": self.max_iter,
            "escape_radius": self.escape_radius,
        }

    def row_betas(self, row: int) -> np.ndarray:
        """Pixel-centre betas of one row; row 0 is the top (largest Im)."""
        x = self.center.real + self.width * ((np.arange(self.nx) + 0.5) / self.nx - 0.5)
        y = self.center.imag + self.height * (0.5 - (row + 0.5) / self.ny)
        return x + 1j * y


def _row(spec: RenderSpec, row: int):
    m = Av2Params(spec.alpha, 1.0)
    mob = m.mobius
    lam = 0j if m.is_exponential else complex(m.lam)
    return kernels.escape_classify(
        spec.row_betas(row),
        mob.a,
        mob.c,
        mob.d,
        lam,
        m.is_exponential,
        spec.max_iter,
        spec.escape_radius,
        CYCLE_TOL,
        MAX_PERIOD,
    )


def classify(spec: RenderSpec, threads: int = 1):
    """(kind, count, lam_kind) arrays of shape (ny, nx)."""
    threads = max(1, int(threads))
    if threads == 1:
        rows = [_row(spec, r) for r in range(spec.ny)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            # map keeps row order, so the result does not depend on scheduling
            rows = list(ex.map(lambda r: _row(spec, r), range(spec.ny)))
    kind = np.stack([r[0] for r in rows])
    count = np.stack([r[1] for r in rows])
    lam_kind = np.stack([r[2] for r in rows])
    return kind, count, lam_kind


def colorize(kind, count, lam_kind, max_iter: int) -> np.ndarray:
    img = np.zeros(kind.shape + (3,), dtype=np.uint8)
    esc = kind == ESCAPED
    # fast escape is bright
    scale = np.log1p(np.clip(count, 0, max_iter)) / math.log1p(max_iter)
    grey = np.round(255 * (1.0 - scale)).astype(np.uint8)
    img[esc] = grey[esc][:, None]
    cyc = kind == CYCLE
    img[cyc] = PALETTE[(count[cyc] - 1) % len(PALETTE)]
    img[lam_kind == ESCAPED] //= 2
    return img


def ppm_bytes(img: np.ndarray) -> bytes:
    h, w, _ = img.shape
    return f"P6\n{w} {h}\n255\n".encode("ascii") + np.ascontiguousarray(img, dtype=np.uint8).tobytes()


def render(spec: RenderSpec, threads: int = 1) -> bytes:
    kind, count, lam_kind = classify(spec, threads)
    return ppm_bytes(colorize(kind, count, lam_kind, spec.max_iter))


def write_atomic(path: str, data: bytes) -> None:
    """Write to a temporary file in the target directory, then rename."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=d)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
