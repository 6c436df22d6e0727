"""Monte Carlo rounds and brute-force checks of the analytic solvers.

Trials are drawn in fixed-size blocks. Block ``b`` gets its own generator
seeded from ``(seed, b)`` through numpy's SeedSequence hash, so results do
not depend on how blocks are spread across workers. Each block only counts
how often every pure outcome occurs; payoffs come from
:func:`rollup_validators.model.payoff` evaluated once per distinct outcome.

Failure events at realistic parameters (around 5e-9) are far too rare to
estimate this way; use inflated parameters here and the exact oracle for
realistic-scale values.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from .model import (
    EQ_LITERAL,
    ExtendedParams,
    MixedProfile,
    Outcome,
    expected_utility,
    payoff,
    validate,
)

BLOCK = 1 << 16
MAX_PLAYERS = 20


@dataclass(frozen=True)
class SimConfig:
    trials: int
    seed: int
    strategies: MixedProfile
    params: ExtendedParams
    rule: str = EQ_LITERAL
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.params.n + self.params.m > MAX_PLAYERS:
            raise ValueError(f"at most {MAX_PLAYERS} validators can be simulated")
        if self.params.m and self.strategies.beta is None:
            raise ValueError("strategies need beta when m > 0")


@dataclass
class SimReport:
    trials: int
    seed: int
    empirical_pi: float
    empirical_alpha: float
    empirical_beta: Optional[float]
    empirical_failure_rate: float
    mean_payoffs: dict
    confidence_halfwidths: dict
    params: dict = field(default_factory=dict)
    version: str = __version__

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


@dataclass(frozen=True)
class DeviationWitness:
    profile: tuple  # (claim_false, active checks..., silent checks...)
    deviator: tuple  # ("asserter", 0) / ("active", i) / ("silent", j)
    deviation: str
    gain: float


def _block_rng(seed, block):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, block])))


def _draw_block(config, block, size):
    """Sampled bits of one block: claim, active checks, silent checks."""
    rng = _block_rng(config.seed, block)
    prof, n, m = config.strategies, config.params.n, config.params.m
    claim = rng.random(size) < prof.pi
    active = rng.random((size, n)) < prof.alpha
    silent = rng.random((size, m)) < (prof.beta or 0.0) if m else np.zeros((size, 0), bool)
    return claim, active, silent


def _encode(claim, active, silent):
    n, m = active.shape[1], silent.shape[1]
    code = claim.astype(np.int64)
    for i in range(n):
        code |= active[:, i].astype(np.int64) << (1 + i)
    for j in range(m):
        code |= silent[:, j].astype(np.int64) << (1 + n + j)
    return code


def _decode(code, n, m):
    claim = bool(code & 1)
    checkers = frozenset(i for i in range(n) if code >> (1 + i) & 1)
    silent = frozenset(j for j in range(m) if code >> (1 + n + j) & 1)
    return Outcome(claim, checkers, silent)


def _count_block(config, block):
    size = min(BLOCK, config.trials - block * BLOCK)
    claim, active, silent = _draw_block(config, block, size)
    n, m = config.params.n, config.params.m
    return np.bincount(_encode(claim, active, silent), minlength=1 << (1 + n + m))


def outcome_counts(config: SimConfig) -> np.ndarray:
    """How many trials produced each pure outcome, indexed by bit code."""
    validate(config.params)
    blocks = range(math.ceil(config.trials / BLOCK))
    if config.workers > 1:
        with ThreadPoolExecutor(config.workers) as pool:
            parts = list(pool.map(lambda b: _count_block(config, b), blocks))
    else:
        parts = [_count_block(config, b) for b in blocks]
    return np.sum(parts, axis=0)


def _halfwidth(p, trials):
    return 3.0 * math.sqrt(max(p * (1 - p), 0.0) / trials)


def run(config: SimConfig) -> SimReport:
    params = config.params
    n, m, N = params.n, params.m, config.trials
    counts = outcome_counts(config)

    false_claims = active_checks = silent_checks = failures = 0
    s1 = {"asserter": 0.0, "active": np.zeros(n), "silent": np.zeros(m)}
    s2 = {"asserter": 0.0, "active": np.zeros(n), "silent": np.zeros(m)}
    for code in np.flatnonzero(counts):
        cnt = int(counts[code])
        out = _decode(int(code), n, m)
        false_claims += cnt * out.claim_false
        active_checks += cnt * len(out.checkers)
        silent_checks += cnt * len(out.silent_checkers)
        if out.claim_false and not out.checkers and not out.silent_checkers:
            failures += cnt
        pv = payoff(params, out, config.rule)
        a, s = np.asarray(pv.active), np.asarray(pv.silent)
        s1["asserter"] += cnt * pv.asserter
        s2["asserter"] += cnt * pv.asserter**2
        s1["active"] += cnt * a
        s2["active"] += cnt * a**2
        s1["silent"] += cnt * s
        s2["silent"] += cnt * s**2

    means = {k: s1[k] / N for k in s1}
    var = {k: np.maximum(s2[k] / N - np.asarray(means[k]) ** 2, 0.0) for k in s1}
    emp_pi = false_claims / N
    emp_alpha = active_checks / (N * n)
    emp_beta = silent_checks / (N * m) if m else None
    emp_fail = failures / N
    half = {
        "pi": _halfwidth(emp_pi, N),
        "alpha": _halfwidth(emp_alpha, N * n),
        "failure_rate": _halfwidth(emp_fail, N),
        "payoff_asserter": float(3 * math.sqrt(var["asserter"] / N)),
        "payoff_active": [float(v) for v in 3 * np.sqrt(var["active"] / N)],
        "payoff_silent": [float(v) for v in 3 * np.sqrt(var["silent"] / N)],
    }
    if m:
        half["beta"] = _halfwidth(emp_beta, N * m)
    return SimReport(
        trials=N,
        seed=config.seed,
        empirical_pi=emp_pi,
        empirical_alpha=emp_alpha,
        empirical_beta=emp_beta,
        empirical_failure_rate=emp_fail,
        mean_payoffs={
            "asserter": float(means["asserter"]),
            "active": [float(v) for v in means["active"]],
            "silent": [float(v) for v in means["silent"]],
        },
        confidence_halfwidths=half,
        params={
            **asdict(params),
            "strategies": config.strategies.as_dict(),
            "rule": config.rule,
        },
    )


def dump_trials(config: SimConfig, path, limit: int = 100_000) -> None:
    """Write one CSV row per trial; meant for small runs only."""
    if config.trials > limit:
        raise ValueError(f"per-trial dump limited to {limit} trials")
    n, m = config.params.n, config.params.m
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["trial", "claim_false"] + [f"active_{i}" for i in range(n)]
                   + [f"silent_{j}" for j in range(m)] + ["asserter_payoff"])
        for block in range(math.ceil(config.trials / BLOCK)):
            size = min(BLOCK, config.trials - block * BLOCK)
            claim, active, silent = _draw_block(config, block, size)
            for t in range(size):
                out = Outcome(bool(claim[t]),
                              frozenset(np.flatnonzero(active[t]).tolist()),
                              frozenset(np.flatnonzero(silent[t]).tolist()))
                pv = payoff(config.params, out, config.rule)
                w.writerow([block * BLOCK + t, int(claim[t])]
                           + active[t].astype(int).tolist()
                           + silent[t].astype(int).tolist() + [pv.asserter])


def _flip(profile, who, idx):
    claim, active, silent = profile
    if who == "asserter":
        return (not claim, active, silent)
    if who == "active":
        active = active[:idx] + (not active[idx],) + active[idx + 1:]
    else:
        silent = silent[:idx] + (not silent[idx],) + silent[idx + 1:]
    return (claim, active, silent)


def _pure_payoff(params, profile, rule):
    claim, active, silent = profile
    out = Outcome(claim,
                  frozenset(i for i, c in enumerate(active) if c),
                  frozenset(j for j, c in enumerate(silent) if c))
    return payoff(params, out, rule)


def _value(pv, who, idx):
    if who == "asserter":
        return pv.asserter
    return (pv.active if who == "active" else pv.silent)[idx]


def find_pure_deviations(params: ExtendedParams, rule: str = EQ_LITERAL) -> list:
    """One strictly profitable unilateral deviation per pure profile.

    Profiles with no profitable deviation (pure equilibria) are simply
    absent, so a result shorter than the number of profiles flags one.
    Deviators are tried asserter first, then active, then silent.
    """
    validate(params)
    n, m = params.n, params.m
    if 1 + n + m > MAX_PLAYERS:
        raise ValueError(f"population too large to enumerate (n + m + 1 > {MAX_PLAYERS})")
    players = [("asserter", 0)] + [("active", i) for i in range(n)] + [("silent", j) for j in range(m)]
    witnesses = []
    for bits in itertools.product((True, False), repeat=1 + n + m):
        profile = (bits[0], bits[1:1 + n], bits[1 + n:])
        base = _pure_payoff(params, profile, rule)
        for who, idx in players:
            alt = _flip(profile, who, idx)
            gain = _value(_pure_payoff(params, alt, rule), who, idx) - _value(base, who, idx)
            if gain > 0:
                if who == "asserter":
                    move = "true" if profile[0] else "false"
                else:
                    now = profile[1][idx] if who == "active" else profile[2][idx]
                    move = "dont" if now else "check"
                witnesses.append(DeviationWitness(profile, (who, idx), move, gain))
                break
    return witnesses


def pure_profile_count(params: ExtendedParams) -> int:
    return 2 ** (1 + params.n + params.m)


def indifference_residuals(params: ExtendedParams, profile: MixedProfile, rule: str = EQ_LITERAL) -> dict:
    """Gap between each role's two actions under ``profile``.

    Zero for every role exactly when the profile is a totally mixed
    equilibrium of the payoff oracle.
    """
    def gap(role, a, b):
        return expected_utility(params, profile, role, a, rule) - expected_utility(params, profile, role, b, rule)

    out = {
        "asserter": gap("asserter", "false", "true"),
        "active": gap("active", "check", "dont"),
    }
    if params.m:
        out["silent"] = gap("silent", "check", "dont")
    return out
