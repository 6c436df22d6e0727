"""Totally mixed equilibria of the attention games.

Closed forms cover the two-player game, n active validators, and the
worked one-active/two-silent case. Games with silent validators in general
are solved numerically on a one-dimensional reduction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .model import (
    EQ_LITERAL,
    PROSE,
    REWARD_RULES,
    CoreParams,
    ExtendedParams,
    MixedProfile,
    validate,
)


class NoTotallyMixedEquilibrium(ArithmeticError):
    """No interior (or documented corner) solution exists.

    ``boundary`` carries the profile the game settles on instead when one is
    known, e.g. silent validators that never check.
    """

    def __init__(self, message, boundary=None):
        super().__init__(message)
        self.boundary = boundary


class NoConvergence(ArithmeticError):
    pass


ANY_CATCH = "any_catch"
PRINTED = "printed"


@dataclass(frozen=True)
class SolveOptions:
    tolerance: float = 1e-12
    max_iterations: int = 200
    silent_reward_rule: str = EQ_LITERAL
    # "auto" uses the printed worked-example equations for n=1, m=2
    # under eq_literal and the general conditions otherwise
    system: str = "auto"
    asserter_form: str = ANY_CATCH

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.silent_reward_rule not in REWARD_RULES:
            raise ValueError(f"unknown silent reward rule {self.silent_reward_rule!r}")
        if self.system not in ("auto", "general", "worked_example"):
            raise ValueError(f"unknown system {self.system!r}")
        if self.asserter_form not in (ANY_CATCH, PRINTED):
            raise ValueError(f"unknown asserter form {self.asserter_form!r}")


def modbinom(n: int, x: float, y: float) -> float:
    """sum_{k=0}^{n} C(n,k) x^k y^(n-k) / (k+1) in closed form.

    Equal to ((x+y)^(n+1) - y^(n+1)) / ((n+1) x). When x+y and y share a
    sign the difference of powers is expanded as a geometric sum so that
    small x does not cancel.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if x == 0:
        raise ValueError("x must be non-zero")
    a = x + y
    if (a >= 0 and y >= 0) or (a <= 0 and y <= 0):
        # a^(n+1) - y^(n+1) = (a - y) * sum_i a^i y^(n-i), and a - y = x
        return math.fsum(a**i * y ** (n - i) for i in range(n + 1)) / (n + 1)
    return (a ** (n + 1) - y ** (n + 1)) / ((n + 1) * x)


def mean_share(n: int, p: float, p_bar: float) -> float:
    """E[1/(K+1)] for K ~ Binomial(n, p); 1 at p = 0."""
    if p == 0:
        return 1.0
    return modbinom(n, p, p_bar)


def solve_two_player(core: CoreParams) -> MixedProfile:
    validate(core)
    C, L, R, U = core.C, core.L, core.R, core.U
    return MixedProfile(
        pi=C / (R + L), alpha=U / (R + U), alpha_bar=R / (R + U)
    )


def _miss_prob(R, U):
    """Probability all validators miss a false claim: R/(R+U)."""
    return R / (R + U)


def _alpha_n(n, R, U):
    rho = _miss_prob(R, U)
    if rho == 0.0:
        return 1.0, 0.0
    e = math.log(rho) / n
    return -math.expm1(e), math.exp(e)


def _active_denominator(params: ExtendedParams, alpha: float, alpha_bar: float) -> float:
    """C / pi implied by the active validator's indifference condition."""
    n, L, s_w = params.n, params.core.L, params.s_w
    reward = params.reward * mean_share(n - 1, alpha, alpha_bar)
    nobody_else = alpha_bar ** (n - 1)
    return reward + (1.0 - nobody_else) * s_w + nobody_else * L


def solve_n_player(params: ExtendedParams) -> MixedProfile:
    """Symmetric mixed equilibrium with n active and no silent validators."""
    validate(params)
    if params.m:
        raise ValueError("solve_n_player needs m = 0; use solve_silent_general")
    core = params.core
    alpha, alpha_bar = _alpha_n(params.n, core.R, core.U)
    pi = core.C / _active_denominator(params, alpha, alpha_bar)
    if pi > 1:
        raise NoTotallyMixedEquilibrium(f"implied pi = {pi!r} exceeds 1")
    return MixedProfile(pi=pi, alpha=alpha, alpha_bar=alpha_bar)


def worked_example_raw_beta(core: CoreParams) -> float:
    """Unclamped silent checking probability for one active, two silent."""
    L, R, U = core.L, core.R, core.U
    alpha_bar = L / (R + 2 * L)
    both = 1.0 - alpha_bar**2  # 2 alpha - alpha^2
    return U / (both * (R + U))


def solve_silent_closed_form(core: CoreParams) -> MixedProfile:
    """Printed solution of the one-active, two-silent example.

    When the formula for beta exceeds 1 the silent validators always check:
    beta is pinned at 1 and ``beta_corner`` is set.
    """
    validate(core)
    C, L, R = core.C, core.L, core.R
    alpha = (R + L) / (R + 2 * L)
    beta = worked_example_raw_beta(core)
    corner = beta > 1.0
    if corner:
        beta = 1.0
    return MixedProfile(
        pi=C / (R + L),
        alpha=alpha,
        beta=beta,
        beta_corner=corner,
        alpha_bar=L / (R + 2 * L),
    )


class _System:
    """One-dimensional reduction of the three indifference conditions.

    The asserter's condition ties beta to alpha, and the active validator's
    condition fixes pi given alpha. What remains is the silent validator's
    gap as a function of alpha on [alpha_lo, alpha_hi]. Every point is
    carried as a pair (alpha, 1 - alpha) so that both ends keep full
    relative precision.
    """

    allows_corner: bool
    lo: tuple  # (alpha, alpha_bar) at the low end of the feasible range
    hi: tuple

    def __init__(self, params: ExtendedParams):
        self.params = params
        self.C = params.core.C
        R, U = params.core.R, params.core.U
        self.rho = R / (R + U)
        self.log_rho = math.log(self.rho)

    def beta_of(self, alpha, alpha_bar):  # -> (beta, beta_bar)
        raise NotImplementedError

    def pi_of(self, alpha, alpha_bar):
        raise NotImplementedError

    def gain(self, alpha, alpha_bar, beta, beta_bar):
        """Expected bounty of a checking silent validator given a false claim."""
        raise NotImplementedError

    def gap(self, alpha, alpha_bar):
        beta, beta_bar = self.beta_of(alpha, alpha_bar)
        pi = self.pi_of(alpha, alpha_bar)
        return pi * self.gain(alpha, alpha_bar, beta, beta_bar) - self.C

    def profile(self, alpha, alpha_bar, corner=False):
        beta, beta_bar = self.beta_of(alpha, alpha_bar)
        return MixedProfile(pi=self.pi_of(alpha, alpha_bar), alpha=alpha, beta=beta,
                            beta_corner=corner, alpha_bar=alpha_bar, beta_bar=beta_bar)


def _power_pair(log_value, exponent):
    """(1 - v, v) for v = exp(log_value * exponent), capped at v = 1."""
    e = min(log_value * exponent, 0.0)
    return -math.expm1(e), math.exp(e)


class _GeneralSystem(_System):
    def __init__(self, params, rule, asserter_form):
        super().__init__(params)
        self.rule = rule
        self.asserter_form = asserter_form
        n = params.n
        self.bounty = params.reward + n * params.core.L
        top = _power_pair(self.log_rho, 1.0 / n)  # alpha at which beta = 0 (any-catch) or 1 (printed)
        if asserter_form == ANY_CATCH:
            # (1-alpha)^n (1-beta)^m = R/(R+U): beta falls as alpha rises
            self.lo, self.hi = (0.0, 1.0), top
            self.allows_corner = False
        else:
            # (1-(1-alpha)^n)(1-(1-beta)^m) = U/(R+U): beta = 1 at the low end
            self.lo, self.hi = top, (1.0, 0.0)
            self.allows_corner = True

    def beta_of(self, alpha, alpha_bar):
        n, m = self.params.n, self.params.m
        if self.asserter_form == ANY_CATCH:
            if alpha_bar == 0.0:
                return 0.0, 1.0
            return _power_pair(self.log_rho - n * math.log(alpha_bar), 1.0 / m)
        a_miss = alpha_bar**n
        # (1-beta)^m = (rho - a_miss) / (1 - a_miss)
        num = max(self.rho - a_miss, 0.0)
        if num == 0.0:
            return 1.0, 0.0
        den = -math.expm1(n * math.log(alpha_bar)) if alpha_bar > 0 else 1.0
        return _power_pair(math.log(num) - math.log(den), 1.0 / m)

    def alpha_of(self, beta, beta_bar):
        """Inverse of :meth:`beta_of` (any-catch form only)."""
        n, m = self.params.n, self.params.m
        if beta_bar == 0.0:
            return 1.0, 0.0
        return _power_pair(self.log_rho - m * math.log(beta_bar), 1.0 / n)

    def pi_of(self, alpha, alpha_bar):
        return self.C / _active_denominator(self.params, alpha, alpha_bar)

    def _trigger(self, alpha, alpha_bar):
        n = self.params.n
        if self.rule == PROSE:
            return alpha_bar**n
        return -math.expm1(n * math.log(alpha_bar)) if alpha_bar > 0 else 1.0

    def gain(self, alpha, alpha_bar, beta, beta_bar):
        share = mean_share(self.params.m - 1, beta, beta_bar)
        return self._trigger(alpha, alpha_bar) * self.bounty * share

    def beta_from_silent(self, alpha, alpha_bar):
        """Beta making the silent validator indifferent at this alpha, or None."""
        # mean_share is decreasing in beta, from 1 at beta=0 to 1/m at beta=1
        m = self.params.m
        pi = self.pi_of(alpha, alpha_bar)
        trigger = self._trigger(alpha, alpha_bar)
        if trigger == 0.0:
            return None
        need = self.C / (pi * trigger * self.bounty)
        if not 1.0 / m < need < 1.0:
            return None
        return brentq(lambda b: mean_share(m - 1, b, 1.0 - b) - need, 0.0, 1.0, xtol=1e-16)


class _WorkedExampleSystem(_System):
    """The printed specialised equations for one active and two silent:

        C = pi alpha (R + 2L),  C = pi (R + L),
        (2 alpha - alpha^2) beta R = (1 - (2 alpha - alpha^2) beta) U.
    """

    allows_corner = True

    def __init__(self, params):
        super().__init__(params)
        # beta = 1 where 1 - (1-alpha)^2 = U/(R+U)
        self.lo, self.hi = _power_pair(self.log_rho, 0.5), (1.0, 0.0)

    def beta_of(self, alpha, alpha_bar):
        both = alpha * (1.0 + alpha_bar)  # 2 alpha - alpha^2
        beta_bar = max(self.rho - alpha_bar**2, 0.0) / both
        return min((1.0 - self.rho) / both, 1.0), beta_bar

    def pi_of(self, alpha, alpha_bar):
        return self.C / (self.params.reward + self.params.core.L)

    def gain(self, alpha, alpha_bar, beta, beta_bar):
        return alpha * (self.params.reward + 2 * self.params.core.L)


def _fixed_point(system, opts):
    """Damped iteration on beta; returns (alpha, alpha_bar) or None when it stalls."""
    if not isinstance(system, _GeneralSystem) or system.asserter_form != ANY_CATCH:
        return None
    beta_max = system.beta_of(*system.lo)[0]
    beta = 0.5 * beta_max
    damping = 0.5
    for _ in range(opts.max_iterations):
        alpha, alpha_bar = system.alpha_of(beta, 1.0 - beta)
        target = system.beta_from_silent(alpha, alpha_bar)
        if target is None:
            return None
        beta_next = min(max((1 - damping) * beta + damping * target, 0.0), beta_max)
        done = abs(beta_next - beta) <= opts.tolerance * max(beta, 1e-300)
        beta = beta_next
        if done:
            break
    else:
        return None
    if not 0.0 < beta < beta_max:
        return None
    point = system.alpha_of(beta, 1.0 - beta)
    if abs(system.gap(*point)) > opts.tolerance * system.C:
        return None
    return point


def _pair_grid(system, points):
    """Grid over the feasible alpha range, dense near both ends in log scale.

    Points with alpha <= 1/2 are stored by alpha, the rest by 1 - alpha.
    """
    (a_lo, ab_lo), (a_hi, ab_hi) = system.lo, system.hi
    pairs = set()
    if a_lo <= 0.5:
        top = min(a_hi, 0.5)
        xs = list(np.linspace(a_lo, top, points))
        xs += list(np.geomspace(max(a_lo, 1e-30), top, points))
        pairs.update((float(x), 1.0 - float(x)) for x in xs)
    if a_hi > 0.5:
        top = min(ab_lo, 0.5)
        ys = list(np.linspace(ab_hi, top, points))
        ys += list(np.geomspace(max(ab_hi, 1e-300), top, points))
        pairs.update((1.0 - float(y), float(y)) for y in ys)
    pairs.update((system.lo, system.hi))
    grid = sorted(p for p in pairs if a_lo <= p[0] <= a_hi)
    return grid


def _solve_between(system, left, right, opts):
    """Root of the gap between two grid pairs with a sign change."""
    kw = dict(xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=opts.max_iterations)
    if right[0] <= 0.5:
        a = brentq(lambda x: system.gap(x, 1.0 - x), left[0], right[0], **kw)
        return a, 1.0 - a
    if left[0] >= 0.5:
        ab = brentq(lambda y: system.gap(1.0 - y, y), right[1], left[1], **kw)
        return 1.0 - ab, ab
    mid = (0.5, 0.5)
    g_mid = system.gap(*mid)
    if g_mid == 0.0:
        return mid
    if (system.gap(*left) < 0) != (g_mid < 0):
        return _solve_between(system, left, mid, opts)
    return _solve_between(system, mid, right, opts)


def _bracket(system, points=48):
    grid = _pair_grid(system, points)
    gaps = [system.gap(*p) for p in grid]
    for i, g in enumerate(gaps):
        if g == 0.0:
            return grid[i], grid[i], gaps
        if i and (gaps[i - 1] < 0) != (g < 0):
            return grid[i - 1], grid[i], gaps
    return None, None, gaps


def _corner_beta_one(system, opts):
    """beta = 1: keep the active and silent conditions, solve for alpha."""
    if isinstance(system, _WorkedExampleSystem):
        # silent gap is linear in alpha with pi fixed
        p = system.params
        alpha = (p.reward + p.core.L) / (p.reward + 2 * p.core.L)
        return alpha, p.core.L / (p.reward + 2 * p.core.L)

    # parametrise by alpha_bar to keep precision near alpha = 1
    def gap(alpha_bar):
        alpha = 1.0 - alpha_bar
        pi = system.pi_of(alpha, alpha_bar)
        return pi * system.gain(alpha, alpha_bar, 1.0, 0.0) - system.C

    g_lo, g_hi = gap(0.0), gap(1.0)
    if (g_lo < 0) == (g_hi < 0):
        return None
    alpha_bar = brentq(gap, 0.0, 1.0, xtol=1e-300, rtol=4 * np.finfo(float).eps,
                       maxiter=opts.max_iterations)
    return 1.0 - alpha_bar, alpha_bar


def _never_checks(params, system, why):
    boundary = None
    if isinstance(system, _GeneralSystem) and system.asserter_form == ANY_CATCH:
        a, a_bar = system.hi  # beta = 0 there
        pi = system.pi_of(a, a_bar)
        if pi <= 1:
            boundary = MixedProfile(pi=pi, alpha=a, beta=0.0, alpha_bar=a_bar, beta_bar=1.0)
    return NoTotallyMixedEquilibrium(
        f"silent validators never check in equilibrium: {why}", boundary
    )


def solve_silent_general(params: ExtendedParams, opts: SolveOptions = SolveOptions()) -> MixedProfile:
    """Equilibrium (alpha, beta, pi) with n active and m silent validators.

    pi is eliminated through the active validator's condition and beta
    through the asserter's, leaving the silent validator's gap as a
    function of alpha alone. A damped fixed-point iteration is tried first;
    if it stalls the gap is bracketed on a grid and solved with a bracketing
    root finder. If the silent validators strictly gain from checking over
    the whole range, beta is pinned at 1 (when the system admits that
    corner) and the remaining two conditions fix alpha and pi.
    """
    validate(params)
    if params.m == 0:
        return solve_n_player(params)
    if params.core.R == 0:
        raise NoTotallyMixedEquilibrium("R = 0: a false claim costs nothing when caught")
    worked = opts.system == "worked_example" or (
        opts.system == "auto"
        and params.n == 1
        and params.m == 2
        and opts.silent_reward_rule == EQ_LITERAL
    )
    if worked:
        if (params.n, params.m) != (1, 2):
            raise ValueError("the worked-example system needs n=1, m=2")
        system = _WorkedExampleSystem(params)
    else:
        system = _GeneralSystem(params, opts.silent_reward_rule, opts.asserter_form)

    point = _fixed_point(system, opts)
    if point is None:
        left, right, gaps = _bracket(system)
        if left is not None:
            point = left if left == right else _solve_between(system, left, right, opts)
        elif all(g < 0 for g in gaps):
            raise _never_checks(params, system, "checking never pays for them")
        elif system.allows_corner:
            found = _corner_beta_one(system, opts)
            if found is None:
                raise NoTotallyMixedEquilibrium("no alpha supports the beta = 1 corner")
            alpha, alpha_bar = found
            pi = system.pi_of(alpha, alpha_bar)
            if pi > 1:
                raise NoTotallyMixedEquilibrium(f"implied pi = {pi!r} exceeds 1")
            return MixedProfile(pi=pi, alpha=alpha, beta=1.0, beta_corner=True,
                                alpha_bar=alpha_bar, beta_bar=0.0)
        else:
            raise NoTotallyMixedEquilibrium(
                "silent validators gain from checking at every feasible beta"
            )

    profile = system.profile(*point)
    residual = system.gap(*point)
    if abs(residual) > max(opts.tolerance, 1e-9) * system.C:
        raise NoConvergence(f"silent residual {residual!r} above tolerance")
    if profile.pi > 1:
        raise NoTotallyMixedEquilibrium(f"implied pi = {profile.pi!r} exceeds 1")
    if profile.beta <= 0.0:
        raise _never_checks(params, system, "indifference only at beta = 0")
    return profile


def printed_asserter_residual(params: ExtendedParams, profile: MixedProfile) -> float:
    """LHS - RHS of the printed general asserter condition for silent games."""
    n, m = params.n, params.m
    R, U = params.core.R, params.core.U
    a_miss = profile.alpha_bar**n
    b_miss = profile.beta_bar**m
    return (1 - a_miss) * (1 - b_miss) * R - (a_miss + b_miss - a_miss * b_miss) * U


def worked_example_residuals(core: CoreParams, profile: MixedProfile) -> dict:
    """Residuals of the three printed one-active/two-silent equations."""
    C, L, R, U = core.C, core.L, core.R, core.U
    a, b, pi = profile.alpha, profile.beta, profile.pi
    both = 1.0 - profile.alpha_bar**2
    return {
        "silent": pi * a * (R + 2 * L) - C,
        "active": pi * (R + L) - C,
        "asserter": both * b * R - (1 - both * b) * U,
    }
