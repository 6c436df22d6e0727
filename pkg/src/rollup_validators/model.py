"""Domain types, parameter validation and the exact payoff oracle.

Everything the solvers produce is checked against :func:`payoff` and
:func:`expected_utility`, which enumerate outcomes directly instead of
using any of the closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

PROSE = "prose"
EQ_LITERAL = "eq_literal"
REWARD_RULES = (PROSE, EQ_LITERAL)


class ParameterError(ValueError):
    """Base class for invalid game parameters."""


class DominantStrategy(ParameterError):
    pass


class NonPositive(ParameterError):
    pass


class BadCounts(ParameterError):
    pass


class BadSlash(ParameterError):
    pass


@dataclass(frozen=True)
class CoreParams:
    """Primitives of the attention game.

    C is the cost of checking, L the checker's stake (lost if a false claim
    goes through), R the asserter's deposit (paid to whoever catches a false
    claim) and U what the asserter gains from an unchallenged false claim.
    """

    C: float
    L: float
    R: float
    U: float


@dataclass(frozen=True)
class ExtendedParams:
    core: CoreParams
    n: int = 1
    m: int = 0
    t: int = 0
    s_w: float = 0.0
    f: float = 0.0
    r: float = 0.0
    burn: float = 0.0

    @classmethod
    def of(cls, C, L, R, U, **kwargs) -> "ExtendedParams":
        return cls(CoreParams(C, L, R, U), **kwargs)

    @property
    def reward(self) -> float:
        """Deposit actually paid out to catchers after burning."""
        return self.core.R * (1.0 - self.burn)


@dataclass(frozen=True)
class MixedProfile:
    """Symmetric mixed strategy profile.

    ``alpha_bar`` and ``beta_bar`` hold 1 - alpha and 1 - beta. Solvers fill
    them from the same expression that produced the probability so that
    values like 1e-12 survive when alpha is within rounding of 1.
    """

    pi: float
    alpha: float
    beta: Optional[float] = None
    beta_corner: bool = False
    alpha_bar: Optional[float] = None
    beta_bar: Optional[float] = None

    def __post_init__(self):
        for name in ("pi", "alpha", "beta"):
            v = getattr(self, name)
            if v is not None and not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v!r} is not a probability")
        if self.alpha_bar is None:
            object.__setattr__(self, "alpha_bar", 1.0 - self.alpha)
        if self.beta is not None and self.beta_bar is None:
            object.__setattr__(self, "beta_bar", 1.0 - self.beta)

    def as_dict(self) -> dict:
        return {
            "pi": self.pi,
            "alpha": self.alpha,
            "beta": self.beta,
            "beta_corner": self.beta_corner,
        }


@dataclass(frozen=True)
class Outcome:
    claim_false: bool
    checkers: frozenset = field(default_factory=frozenset)
    silent_checkers: frozenset = field(default_factory=frozenset)


@dataclass(frozen=True)
class PayoffVector:
    asserter: float
    active: tuple
    silent: tuple


def validate(params):
    """Return ``params`` unchanged if every invariant holds, else raise.

    Accepts either :class:`CoreParams` or :class:`ExtendedParams`.
    """
    if isinstance(params, ExtendedParams):
        core = params.core
    else:
        core = params
    C, L, R, U = core.C, core.L, core.R, core.U
    for name, v in (("C", C), ("L", L), ("R", R), ("U", U)):
        if not math.isfinite(v):
            raise NonPositive(f"{name} must be finite, got {v!r}")
    if C <= 0:
        raise NonPositive(f"C > 0 required, got C={C!r}")
    if U <= 0:
        raise NonPositive(f"U > 0 required, got U={U!r}")
    if L < 0 or R < 0:
        raise NonPositive(f"L >= 0 and R >= 0 required, got L={L!r}, R={R!r}")
    if not C < R + L:
        raise DominantStrategy(
            f"Assumption 1: C < R+L violated (C={C!r}, R+L={R + L!r})"
        )
    if isinstance(params, ExtendedParams):
        if params.n < 1 or params.m < 0 or params.t < 0:
            raise BadCounts(
                f"counts must satisfy n >= 1, m >= 0, t >= 0 "
                f"(n={params.n}, m={params.m}, t={params.t})"
            )
        if params.t > params.n:
            raise BadCounts(f"t <= n required (t={params.t}, n={params.n})")
        if not 0 <= params.s_w <= L:
            raise BadSlash(f"0 <= s_w <= L required (s_w={params.s_w!r}, L={L!r})")
        if params.f < 0 or params.r < 0:
            raise ParameterError(
                f"f >= 0 and r >= 0 required (f={params.f!r}, r={params.r!r})"
            )
        if not 0 <= params.burn < 1:
            raise ParameterError(f"0 <= burn < 1 required (burn={params.burn!r})")
    return params


def _check_rule(rule):
    if rule not in REWARD_RULES:
        raise ValueError(f"unknown silent reward rule {rule!r}")


def payoff(params: ExtendedParams, outcome: Outcome, rule: str = EQ_LITERAL) -> PayoffVector:
    """Payoff of every player for one realised round.

    A false claim is caught when anybody posts. Active checkers split the
    (post-burn) deposit; when no active validator posts, every active
    validator forfeits its stake L, regardless of whether a silent
    validator caught the claim. Silent checkers split R + nL only when the
    rule's trigger fires: ``prose`` pays them when no active validator
    checked, ``eq_literal`` when at least one did.
    """
    _check_rule(rule)
    n, m = params.n, params.m
    C, L, R, U = params.core.C, params.core.L, params.core.R, params.core.U
    checkers, silent = outcome.checkers, outcome.silent_checkers
    if any(not 0 <= i < n for i in checkers) or any(not 0 <= j < m for j in silent):
        raise ValueError("outcome references validators outside the population")
    k, j = len(checkers), len(silent)

    if not outcome.claim_false:
        active = tuple(-C if i in checkers else 0.0 for i in range(n))
        quiet = tuple(-C if i in silent else 0.0 for i in range(m))
        return PayoffVector(0.0, active, quiet)

    reward = params.reward
    if k:
        share = reward / k
        active = tuple(share - C if i in checkers else -params.s_w for i in range(n))
    else:
        active = (-L,) * n

    triggered = (k == 0) if rule == PROSE else (k > 0)
    bounty = (reward + n * L) / j if (j and triggered) else 0.0
    quiet = tuple(bounty - C if i in silent else 0.0 for i in range(m))

    asserter = -R if (k or j) else U
    return PayoffVector(asserter, active, quiet)


def binom_pmf(n: int, k: int, p: float, p_bar: float) -> float:
    # p_bar passed separately so that tiny 1 - p keeps its precision
    return math.comb(n, k) * p**k * p_bar ** (n - k)


ASSERTER_ACTIONS = ("false", "true")
VALIDATOR_ACTIONS = ("check", "dont")


def expected_utility(
    params: ExtendedParams,
    profile: MixedProfile,
    role: str,
    action: str,
    rule: str = EQ_LITERAL,
) -> float:
    """Exact expected payoff of a focal player fixing ``action``.

    Every other player mixes according to ``profile``. The expectation is
    an explicit sum over (claim, number of other active checkers, number
    of other silent checkers) weighted by binomial probabilities.
    """
    _check_rule(rule)
    n, m = params.n, params.m
    if m and profile.beta is None:
        raise ValueError("profile needs beta when m > 0")
    beta = profile.beta if m else 0.0
    beta_bar = profile.beta_bar if m else 1.0

    if role == "asserter":
        if action not in ASSERTER_ACTIONS:
            raise ValueError(f"asserter action must be one of {ASSERTER_ACTIONS}")
        claims = [(action == "false", 1.0)]
        n_other, m_other = n, m
    elif role in ("active", "silent"):
        if action not in VALIDATOR_ACTIONS:
            raise ValueError(f"{role} action must be one of {VALIDATOR_ACTIONS}")
        if role == "silent" and m == 0:
            raise ValueError("no silent validators in this game")
        claims = [(True, profile.pi), (False, 1.0 - profile.pi)]
        n_other = n - 1 if role == "active" else n
        m_other = m - 1 if role == "silent" else m
    else:
        raise ValueError(f"unknown role {role!r}")

    focal_checks = action == "check"
    total = 0.0
    for claim_false, w_claim in claims:
        if w_claim == 0.0:
            continue
        for k in range(n_other + 1):
            w_k = binom_pmf(n_other, k, profile.alpha, profile.alpha_bar)
            if w_k == 0.0:
                continue
            for j in range(m_other + 1):
                w_j = binom_pmf(m_other, j, beta, beta_bar)
                if w_j == 0.0:
                    continue
                # focal player sits at index 0 of its population
                if role == "active":
                    checkers = set(range(1, k + 1))
                    if focal_checks:
                        checkers.add(0)
                    silent = set(range(j))
                elif role == "silent":
                    checkers = set(range(k))
                    silent = set(range(1, j + 1))
                    if focal_checks:
                        silent.add(0)
                else:
                    checkers, silent = set(range(k)), set(range(j))
                pv = payoff(
                    params,
                    Outcome(claim_false, frozenset(checkers), frozenset(silent)),
                    rule,
                )
                if role == "asserter":
                    value = pv.asserter
                elif role == "active":
                    value = pv.active[0]
                else:
                    value = pv.silent[0]
                total += w_claim * w_k * w_j * value
    return total
