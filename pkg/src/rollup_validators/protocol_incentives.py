"""Protocol-paid rewards for posting a check result with probability P.

A validator that checks pays C and, when asked to post (probability P),
pays c and receives p. One that does not check loses its stake L when
asked to post. Checking must beat shirking (IC) and participating must
beat staying out and earning r L elsewhere (IR).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Optional


class InfeasibleScheme(ValueError):
    pass


@dataclass(frozen=True)
class RewardScheme:
    p: float
    c: float
    C: float
    L: float = 0.0
    r: float = 0.0
    n: int = 1
    P: Optional[float] = None

    def __post_init__(self):
        if self.c < 0 or self.C <= 0 or self.L < 0 or self.r < 0 or self.n < 1:
            raise ValueError("need c >= 0, C > 0, L >= 0, r >= 0, n >= 1")
        if self.P is not None and not 0 <= self.P <= 1:
            raise ValueError("P must be a probability")


@dataclass(frozen=True)
class Threshold:
    value: float
    infeasible: bool  # above 1: no audit rate is high enough


@dataclass(frozen=True)
class SchemeAnalysis:
    pi_l: Threshold
    pi_r: Threshold
    binding: str
    min_P: float
    expected_budget: float
    budget_lower_bound: float


@dataclass(frozen=True)
class StakeChoice:
    L: float
    rejected_root: Optional[float]
    note: str = ""


def ic_threshold(scheme: RewardScheme) -> Threshold:
    """Smallest posting probability at which checking beats not checking."""
    denom = scheme.p - scheme.c + scheme.L
    if denom <= 0:
        raise InfeasibleScheme(f"p - c + L must be positive, got {denom!r}")
    v = scheme.C / denom
    return Threshold(v, v > 1)


def ir_threshold(scheme: RewardScheme) -> Threshold:
    """Smallest posting probability at which staking beats staying out."""
    denom = scheme.p - scheme.c
    if denom <= 0:
        raise InfeasibleScheme(f"p > c required, got p={scheme.p!r}, c={scheme.c!r}")
    v = (scheme.C + scheme.r * scheme.L) / denom
    return Threshold(v, v > 1)


def optimal_stake(scheme: RewardScheme) -> StakeChoice:
    """Stake minimising max(IC, IR) threshold: always L = 0.

    Equating the two thresholds gives L = (rc - rp - C)/r, negative
    whenever p > c, so the minimum sits at the boundary.
    """
    if scheme.p <= scheme.c:
        raise InfeasibleScheme("p > c required")
    if scheme.r == 0:
        return StakeChoice(0.0, None, "r = 0: IR threshold does not depend on L")
    root = (scheme.r * scheme.c - scheme.r * scheme.p - scheme.C) / scheme.r
    return StakeChoice(0.0, root, "equalising root is negative")


def analyze(scheme: RewardScheme) -> SchemeAnalysis:
    ic, ir = ic_threshold(scheme), ir_threshold(scheme)
    binding = "IC" if ic.value >= ir.value else "IR"
    min_P = max(ic.value, ir.value)
    P = scheme.P if scheme.P is not None else min_P
    return SchemeAnalysis(
        pi_l=ic,
        pi_r=ir,
        binding=binding,
        min_P=min_P,
        expected_budget=scheme.n * P * scheme.p,
        budget_lower_bound=scheme.n * scheme.C * scheme.p / (scheme.p - scheme.c + scheme.L),
    )


def checking_margin(scheme: RewardScheme, P: float) -> float:
    """Expected payoff of checking minus that of not checking at rate P."""
    return -scheme.C + P * (scheme.p - scheme.c) + P * scheme.L


def budget_curve(scheme: RewardScheme, p_values: Iterable[float]) -> list:
    """Rows (p, pi_l, pi_r, min_P, budget_per_validator) with L = 0.

    The per-validator budget p C / (p - c) falls towards C as p grows and
    blows up as p approaches c from above.
    """
    rows = []
    for p in p_values:
        s = replace(scheme, p=float(p), L=0.0)
        if s.p <= s.c:
            raise InfeasibleScheme(f"p={p!r} must exceed c={s.c!r}")
        ic, ir = ic_threshold(s), ir_threshold(s)
        min_P = max(ic.value, ir.value)
        rows.append((s.p, ic.value, ir.value, min_P, min_P * s.p))
    return rows


BUDGET_HEADER = ("p", "pi_l", "pi_r", "min_P", "budget_per_validator")
