"""Orbit portraits (combinatorial input) and forward-orbit numerics.

A portrait names the points of the post-singular set, records how the map
permutes them, and fixes for every label the inverse branch through which
it is pulled back. Branch indices refer to the principal-log labeling of
:func:`av2.family.inverse`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from . import family
from .errors import InconsistentConfiguration, PortraitError
from .family import TWO_PI_I, Av2Params
from .sphere import INF, SpherePoint, as_point, sph_dist, point_to_json

PORTRAIT_FIELDS = frozenset(
    {"labels", "successor", "branch_index", "zero", "one", "inf", "lambda", "preperiod", "period"}
)


@dataclass(frozen=True)
class OrbitPortrait:
    labels: tuple
    successor: Mapping[str, str]
    branch_index: Mapping[str, int]
    zero: str
    one: str
    inf: str
    lam: str
    preperiod: int
    period: int
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "successor", dict(self.successor))
        object.__setattr__(self, "branch_index", {k: int(v) for k, v in self.branch_index.items()})

    @property
    def m(self) -> int:
        return len(self.labels)

    @property
    def is_exponential(self) -> bool:
        """lambda sits at infinity, so the maps are exp(beta z)."""
        return self.lam == self.inf

    @property
    def forced(self) -> frozenset:
        return frozenset({self.zero, self.one, self.inf})

    @property
    def free_labels(self) -> list:
        """Labels whose positions move during the iteration, in label order."""
        return [x for x in self.labels if x not in self.forced]

    def zero_orbit(self) -> list:
        """c_0, c_1, ..., c_{k2} as labels (c_{k2+1} = c_{k1+1})."""
        orbit = [self.zero]
        for _ in range(self.preperiod + self.period):
            orbit.append(self.successor[orbit[-1]])
        return orbit

    def winding_pair(self) -> tuple:
        """Labels of c_{k1} and c_{k2}, the two points with image c_{k1+1}."""
        orbit = self.zero_orbit()
        return orbit[self.preperiod], orbit[self.preperiod + self.period]

    def effective_branch(self, label) -> int:
        return 0 if label == self.zero else self.branch_index[label]

    @property
    def eta(self) -> int:
        """Winding number forced by the branch data.

        beta times each of c_{k1}, c_{k2} equals the same logarithm plus
        2 pi i times its branch index, so their difference is 2 pi i eta.
        """
        a, b = self.winding_pair()
        return self.effective_branch(b) - self.effective_branch(a)

    def to_json(self) -> dict:
        return {
            "labels": list(self.labels),
            "successor": dict(self.successor),
            "branch_index": dict(self.branch_index),
            "zero": self.zero,
            "one": self.one,
            "inf": self.inf,
            "lambda": self.lam,
            "preperiod": self.preperiod,
            "period": self.period,
        }

    @classmethod
    def from_json(cls, obj, name: str = "") -> "OrbitPortrait":
        if not isinstance(obj, dict):
            raise PortraitError([Violation("schema", None, "portrait must be a JSON object")])
        unknown = set(obj) - PORTRAIT_FIELDS
        missing = PORTRAIT_FIELDS - set(obj)
        problems = [Violation("schema", None, f"unknown field {f!r}") for f in sorted(unknown)]
        problems += [Violation("schema", None, f"missing field {f!r}") for f in sorted(missing)]
        if problems:
            raise PortraitError(problems)
        try:
            return cls(
                labels=[str(x) for x in obj["labels"]],
                successor={str(k): str(v) for k, v in obj["successor"].items()},
                branch_index={str(k): int(v) for k, v in obj["branch_index"].items()},
                zero=str(obj["zero"]),
                one=str(obj["one"]),
                inf=str(obj["inf"]),
                lam=str(obj["lambda"]),
                preperiod=int(obj["preperiod"]),
                period=int(obj["period"]),
                name=name,
            )
        except (TypeError, ValueError, AttributeError) as exc:
            raise PortraitError([Violation("schema", None, str(exc))]) from exc


@dataclass(frozen=True)
class Violation:
    rule: str
    label: str | None
    detail: str = ""

    def __str__(self):
        where = f" [{self.label}]" if self.label is not None else ""
        tail = f": {self.detail}" if self.detail else ""
        return f"{self.rule}{where}{tail}"


def _follow(succ, start, stop=None):
    """Walk successors from ``start``. Returns (path, first repeat index or
    None, terminal label or None)."""
    path = [start]
    seen = {start: 0}
    while True:
        x = path[-1]
        if x == stop or x not in succ:
            return path, None, x
        y = succ[x]
        if y in seen:
            return path, seen[y], None
        seen[y] = len(path)
        path.append(y)


def validate(portrait: OrbitPortrait) -> list[Violation]:
    """Every broken portrait rule, empty when the portrait is well formed."""
    P = portrait
    out: list[Violation] = []
    labels = list(P.labels)
    label_set = set(labels)
    if len(label_set) != len(labels):
        seen = set()
        for x in labels:
            if x in seen:
                out.append(Violation("duplicate label", x))
            seen.add(x)
    if len(label_set) < 3:
        out.append(Violation("too few labels", None, f"m = {len(label_set)} < 3"))
    for role, x in (("zero", P.zero), ("one", P.one), ("inf", P.inf), ("lambda", P.lam)):
        if x not in label_set:
            out.append(Violation("unknown label", x, f"{role} label not among labels"))
    if len({P.zero, P.one, P.inf}) < 3:
        out.append(Violation("distinguished labels coincide", None, "zero, one, inf must differ"))
    if P.lam in (P.zero, P.one):
        out.append(Violation("distinguished labels coincide", P.lam, "lambda may not be 0 or 1"))
    for k, v in P.successor.items():
        if k not in label_set:
            out.append(Violation("unknown label", k, "successor key"))
        if v not in label_set:
            out.append(Violation("unknown label", v, f"successor of {k}"))
    for k in P.branch_index:
        if k not in label_set:
            out.append(Violation("unknown label", k, "branch index key"))
    if out:
        return out

    succ = P.successor
    if succ.get(P.zero) != P.one:
        out.append(Violation("zero must map to one", P.zero))
    if P.inf in succ:
        out.append(Violation("infinity has no successor", P.inf))
    for x in labels:
        if x == P.inf:
            continue
        if x not in succ:
            if x == P.lam:
                out.append(Violation("lambda orbit unspecified", x))
            else:
                out.append(Violation("missing successor", x))
        if x == P.zero:
            if x in P.branch_index:
                out.append(Violation("unexpected branch index", x, "zero is pinned at 0"))
        elif x not in P.branch_index:
            out.append(Violation("missing branch index", x))
    if P.inf in P.branch_index:
        out.append(Violation("unexpected branch index", P.inf, "infinity is pinned"))

    omitted = {P.zero} if P.is_exponential else {P.zero, P.lam}
    for k, v in succ.items():
        if v in omitted:
            out.append(Violation("omitted value has preimage", k, f"maps to asymptotic value {v}"))

    # orbit of 0
    path, rep, term = _follow(succ, P.zero, stop=P.inf)
    if rep is None:
        if term == P.inf:
            out.append(Violation("zero orbit reaches infinity", P.inf))
    else:
        cycle = path[rep:]
        for a in omitted:
            if a in cycle:
                out.append(Violation("asymptotic value periodic", a, f"cycle {cycle}"))
        if rep >= 1:
            k1, l = rep - 1, len(cycle)
            if (k1, l) != (P.preperiod, P.period):
                out.append(
                    Violation(
                        "preperiod/period mismatch",
                        None,
                        f"declared ({P.preperiod}, {P.period}), orbit gives ({k1}, {l})",
                    )
                )
    reach = set(path)

    if not P.is_exponential:
        lpath, lrep, _ = _follow(succ, P.lam, stop=P.inf)
        if lrep == 0:
            out.append(Violation("asymptotic value periodic", P.lam, f"cycle {lpath}"))
        reach |= set(lpath)
    reach.add(P.inf)
    for x in labels:
        if x not in reach:
            out.append(Violation("not post-singular", x, "not on the orbit of an asymptotic value"))

    # two labels pulled back through the same branch of the same point collide
    slots: dict = {(P.one, 0): P.zero}
    for x in labels:
        if x in (P.zero, P.inf) or x not in succ or x not in P.branch_index:
            continue
        key = (succ[x], P.branch_index[x])
        if key in slots:
            out.append(
                Violation("branch collision", x, f"same preimage slot as {slots[key]} ({key[0]}, {key[1]})")
            )
        else:
            slots[key] = x
    if succ.get(P.one) == P.one and P.branch_index.get(P.one) == 0:
        out.append(Violation("degenerate beta", P.one, "1 -> 1 through branch 0 forces beta = 0"))
    return out


def check_portrait(portrait: OrbitPortrait) -> OrbitPortrait:
    """Return ``portrait`` or raise :class:`PortraitError`."""
    problems = validate(portrait)
    if problems:
        raise PortraitError(problems)
    return portrait


# ---------------------------------------------------------------------------
# forward orbits


PREPERIODIC = "preperiodic"
TERMINATED = "terminated_at_infinity"
ESCAPED = "escaped"
UNDECIDED = "undecided"

ESCAPE_RADIUS = 1e10


@dataclass(frozen=True)
class OrbitResult:
    points: list
    status: str
    k: int | None = None
    l: int | None = None
    residual: float = 0.0

    def to_json(self) -> dict:
        out = {"status": self.status, "points": [point_to_json(z) for z in self.points]}
        if self.status == PREPERIODIC:
            out["k"] = self.k
            out["l"] = self.l
        out["residual"] = self.residual
        return out


def _find_cycle(pts, tol, max_period=None):
    """Cycle confirmed at the newest point: smallest l with
    pts[i+t] ~ pts[i+l+t] for t = 0..l, where i = n - 2l."""
    n = len(pts) - 1
    top = n // 2 if max_period is None else min(n // 2, max_period)
    for l in range(1, top + 1):
        i = n - 2 * l
        worst = 0.0
        for t in range(l + 1):
            d = sph_dist(pts[i + t], pts[i + l + t])
            if d >= tol:
                break
            worst = max(worst, d)
        else:
            return i, l, worst
    return None


def forward_orbit(
    p: Av2Params,
    start: SpherePoint,
    n_max: int = 200,
    tol: float = 1e-9,
    max_period: int | None = None,
    escape_radius: float = ESCAPE_RADIUS,
) -> OrbitResult:
    """Iterate g from ``start`` and classify the orbit.

    A cycle (k, l) is declared once points k..k+2l agree with their l-shift
    within ``tol`` (one extra period of confirmation), trying l up to
    ``max_period``. For maps with a finite second asymptotic value, landing
    within ``tol`` of infinity counts as hitting a pole.
    """
    start = as_point(start)
    if start is INF:
        raise ValueError("orbit start must be finite")
    pts = [start]
    meromorphic = not p.is_exponential
    for _ in range(n_max):
        try:
            z = family.eval(p, pts[-1])
        except OverflowError:
            return OrbitResult(pts, ESCAPED)
        if z is INF or (meromorphic and sph_dist(z, INF) < tol):
            return OrbitResult(pts + [INF], TERMINATED)
        if abs(z) > escape_radius:
            return OrbitResult(pts + [z], ESCAPED)
        pts.append(z)
        hit = _find_cycle(pts, tol, max_period)
        if hit is not None:
            k, l, worst = hit
            return OrbitResult(pts[: k + l], PREPERIODIC, k, l, worst)
    return OrbitResult(pts, UNDECIDED)


def winding_number(beta: complex, z_k1: complex, z_k2: complex, tol: float = 1e-6) -> tuple[int, float]:
    """eta = beta (z_k2 - z_k1) / (2 pi i), rounded, with its distance from
    the nearest integer."""
    if z_k1 == z_k2:
        raise InconsistentConfiguration("winding pair points coincide")
    t = complex(beta) * (complex(z_k2) - complex(z_k1)) / TWO_PI_I
    eta = round(t.real)
    residual = abs(t - eta)
    if residual >= tol:
        raise InconsistentConfiguration(f"winding integral {t} is not an integer (residual {residual:.3e})")
    return int(eta), residual
