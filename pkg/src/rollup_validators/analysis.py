"""Security metrics, comparative statics and stake optimisation."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterable, Optional

import numpy as np

from .equilibrium import solve_n_player, solve_two_player
from .model import CoreParams, ExtendedParams, MixedProfile, ParameterError, validate

CSV_HEADER = ("variable", "value", "alpha", "pi", "catch_prob", "failure_prob", "expected_loss")


@dataclass(frozen=True)
class FailureReport:
    profile: MixedProfile
    catch_prob: float
    failure_prob: float
    expected_loss: float
    params_echo: ExtendedParams


@dataclass(frozen=True)
class OptimizationResult:
    best_R: float
    best_L: float
    objective_value: float
    objective_kind: str
    trace: Optional[list] = None


def failure_probability(core: CoreParams) -> float:
    """Probability a false claim is made and nobody checks: CR/((R+L)(R+U))."""
    validate(core)
    C, L, R, U = core.C, core.L, core.R, core.U
    return C * R / ((R + L) * (R + U))


def expected_loss(core: CoreParams) -> float:
    """F * U. Increases in U towards CR/(R+L)."""
    return failure_probability(core) * core.U


def optimal_R(U: float, L: float) -> float:
    """Deposit at which the two-player failure probability peaks.

    F rises in R below sqrt(UL) and falls above it, so this is the value
    of R to stay away from.
    """
    if U < 0 or L < 0:
        raise ValueError("U and L must be non-negative")
    return math.sqrt(U * L)


def social_cost(params: ExtendedParams, R: float, L: float) -> float:
    """M = f U pi + U pi (1 - alpha) + alpha C + r (L + R) at the two-player equilibrium."""
    core = CoreParams(params.core.C, L, R, params.core.U)
    prof = solve_two_player(core)
    U, C = core.U, core.C
    return (
        params.f * U * prof.pi
        + U * prof.pi * prof.alpha_bar
        + prof.alpha * C
        + params.r * (L + R)
    )


def _axis(lo, hi, points):
    if hi < lo:
        raise ValueError("empty bound")
    if hi == lo:
        return np.array([lo])
    if lo > 0:
        return np.geomspace(lo, hi, points)
    # zero lower bound: keep 0 and log-space the rest down to hi * 1e-9
    return np.concatenate(([0.0], np.geomspace(hi * 1e-9, hi, points - 1)))


def _golden(func, lo, hi, iters=100):
    """Golden-section search on [lo, hi]; returns (x, fx) including the endpoints."""
    inv = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c, d = b - inv * (b - a), a + inv * (b - a)
    fc, fd = func(c), func(d)
    for _ in range(iters):
        if b - a <= 1e-15 * max(abs(a), abs(b), 1e-300):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv * (b - a)
            fc = func(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv * (b - a)
            fd = func(d)
    candidates = [(lo, func(lo)), (hi, func(hi)), (c, fc), (d, fd)]
    return min(candidates, key=lambda t: t[1])


def minimize_social_cost(
    params: ExtendedParams,
    R_bounds: tuple,
    L_bounds: tuple,
    grid: int = 64,
    passes: int = 3,
    keep_trace: bool = False,
) -> OptimizationResult:
    """Minimise the social cost over a box of (R, L).

    A ``grid`` x ``grid`` log-spaced scan picks the starting cell, then
    ``passes`` rounds of coordinate-wise golden-section search refine it.
    Points violating C < R + L count as infinitely costly.
    """
    C = params.core.C
    (R_lo, R_hi), (L_lo, L_hi) = R_bounds, L_bounds
    if min(R_lo, L_lo) < 0 or R_hi < R_lo or L_hi < L_lo:
        raise ValueError("bounds must be non-negative and ordered")
    if not R_hi + L_hi > C:
        raise ParameterError("empty feasible region: need R + L > C somewhere in the box")
    trace = [] if keep_trace else None

    def cost(R, L):
        if not R + L > C:
            return math.inf
        v = social_cost(params, R, L)
        if trace is not None:
            trace.append((R, L, v))
        return v

    best = (math.inf, None, None)
    for R in _axis(R_lo, R_hi, grid):
        for L in _axis(L_lo, L_hi, grid):
            v = cost(float(R), float(L))
            if v < best[0]:
                best = (v, float(R), float(L))
    value, R, L = best
    for _ in range(passes):
        R_new, v = _golden(lambda x: cost(x, L), R_lo, R_hi)
        if v < value:
            value, R = v, R_new
        L_new, v = _golden(lambda y: cost(R, y), L_lo, L_hi)
        if v < value:
            value, L = v, L_new
    return OptimizationResult(R, L, value, "social_cost_M", trace)


def failure_report(params: ExtendedParams, profile: MixedProfile = None) -> FailureReport:
    """Failure metrics with t of the n validators offline.

    The equilibrium is the one for the full population; the offline
    validators simply never check.
    """
    validate(params)
    if params.m:
        raise ValueError("failure_report covers active validators only (m = 0)")
    if profile is None:
        profile = solve_n_player(replace(params, t=0))
    live = params.n - params.t
    miss = profile.alpha_bar**live
    failure = profile.pi * miss
    return FailureReport(
        profile=profile,
        catch_prob=1.0 - miss,
        failure_prob=failure,
        expected_loss=failure * params.core.U,
        params_echo=params,
    )


def offline_robustness(params: ExtendedParams) -> FailureReport:
    if params.t >= params.n:
        raise ValueError(f"t < n required (t={params.t}, n={params.n})")
    return failure_report(params)


SWEEP_VARIABLES = ("C", "L", "R", "U", "n")


def _with(params, variable, value):
    if variable == "n":
        return replace(params, n=int(value))
    core = replace(params.core, **{variable: float(value)})
    return replace(params, core=core)


def sweep(
    params: ExtendedParams,
    variable: str,
    values: Iterable,
    workers: int = 1,
) -> list:
    """FailureReport for each value of one parameter, in input order."""
    if variable not in SWEEP_VARIABLES:
        raise ValueError(f"variable must be one of {SWEEP_VARIABLES}")
    points = [_with(params, variable, v) for v in values]
    for i, p in enumerate(points):
        try:
            validate(p)
        except ParameterError as exc:
            raise ParameterError(f"sweep point {i} ({variable}={getattr(p.core, variable, p.n)}): {exc}") from exc
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(failure_report, points))
    return [failure_report(p) for p in points]


def sweep_rows(variable: str, reports: list) -> list:
    rows = []
    for rep in reports:
        p = rep.params_echo
        value = p.n if variable == "n" else getattr(p.core, variable)
        rows.append((variable, value, rep.profile.alpha, rep.profile.pi,
                     rep.catch_prob, rep.failure_prob, rep.expected_loss))
    return rows


def to_csv(rows, header=CSV_HEADER) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()
