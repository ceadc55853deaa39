"""Hand-built orbit portraits used by the tests, the CLI samples and the
acceptance sweep.

Label conventions: "0", "1" and "inf" are the pinned points, "lam" the
second asymptotic value when it is finite, and c2, c3, d, ... the other
orbit points.
"""

from __future__ import annotations

from .portraits import OrbitPortrait


def three_point(eta: int = 1) -> OrbitPortrait:
    """0 -> 1 -> 1 with lambda = inf; the fixed point is exp(2 pi i eta z)."""
    return OrbitPortrait(
        labels=["0", "1", "inf"],
        successor={"0": "1", "1": "1"},
        branch_index={"1": eta},
        zero="0", one="1", inf="inf", lam="inf",
        preperiod=0, period=1,
        name=f"three_point_eta{eta}",
    )


def exp_fixed_tail(k_one: int, k_c: int) -> OrbitPortrait:
    """exp(beta z): 0 -> 1 -> c2 -> c2."""
    return OrbitPortrait(
        labels=["0", "1", "c2", "inf"],
        successor={"0": "1", "1": "c2", "c2": "c2"},
        branch_index={"1": k_one, "c2": k_c},
        zero="0", one="1", inf="inf", lam="inf",
        preperiod=1, period=1,
        name=f"exp_fixed_tail_{k_one}_{k_c}",
    )


def exp_two_cycle(k_one: int, k_a: int, k_b: int) -> OrbitPortrait:
    """exp(beta z): 0 -> 1 -> c2 -> c3 -> c2."""
    return OrbitPortrait(
        labels=["0", "1", "c2", "c3", "inf"],
        successor={"0": "1", "1": "c2", "c2": "c3", "c3": "c2"},
        branch_index={"1": k_one, "c2": k_a, "c3": k_b},
        zero="0", one="1", inf="inf", lam="inf",
        preperiod=1, period=2,
        name=f"exp_two_cycle_{k_one}_{k_a}_{k_b}",
    )


def pole_lambda(k_one: int, k_lam: int) -> OrbitPortrait:
    """0 -> 1 -> 1 and lambda -> inf (lambda is a pole)."""
    return OrbitPortrait(
        labels=["0", "1", "lam", "inf"],
        successor={"0": "1", "1": "1", "lam": "inf"},
        branch_index={"1": k_one, "lam": k_lam},
        zero="0", one="1", inf="inf", lam="lam",
        preperiod=0, period=1,
        name=f"pole_lambda_{k_one}_{k_lam}",
    )


def fixed_lambda(k_one: int, k_lam: int) -> OrbitPortrait:
    """0 -> 1 -> 1 and lambda -> 1."""
    return OrbitPortrait(
        labels=["0", "1", "lam", "inf"],
        successor={"0": "1", "1": "1", "lam": "1"},
        branch_index={"1": k_one, "lam": k_lam},
        zero="0", one="1", inf="inf", lam="lam",
        preperiod=0, period=1,
        name=f"fixed_lambda_{k_one}_{k_lam}",
    )


def tail_pole_lambda(k_one: int, k_c: int, k_lam: int) -> OrbitPortrait:
    """0 -> 1 -> c2 -> c2 and lambda -> inf."""
    return OrbitPortrait(
        labels=["0", "1", "c2", "lam", "inf"],
        successor={"0": "1", "1": "c2", "c2": "c2", "lam": "inf"},
        branch_index={"1": k_one, "c2": k_c, "lam": k_lam},
        zero="0", one="1", inf="inf", lam="lam",
        preperiod=1, period=1,
        name=f"tail_pole_lambda_{k_one}_{k_c}_{k_lam}",
    )


def lambda_chain(k_one: int, k_lam: int, k_d: int) -> OrbitPortrait:
    """0 -> 1 -> 1 and lambda -> d -> 1."""
    return OrbitPortrait(
        labels=["0", "1", "lam", "d", "inf"],
        successor={"0": "1", "1": "1", "lam": "d", "d": "1"},
        branch_index={"1": k_one, "lam": k_lam, "d": k_d},
        zero="0", one="1", inf="inf", lam="lam",
        preperiod=0, period=1,
        name=f"lambda_chain_{k_one}_{k_lam}_{k_d}",
    )


def realizable() -> list[OrbitPortrait]:
    """4- and 5-point portraits for which the iteration converges."""
    return [
        exp_fixed_tail(0, 1),
        exp_fixed_tail(1, 0),
        pole_lambda(1, -1),
        fixed_lambda(1, 2),
        exp_two_cycle(-1, 0, 1),
        tail_pole_lambda(0, 1, 1),
        lambda_chain(1, 2, -1),
    ]


def collapsing() -> OrbitPortrait:
    """lambda -> inf through branch 0: the iteration drags lambda onto 0."""
    return pole_lambda(1, 0)
