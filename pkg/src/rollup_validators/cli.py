"""Command-line front end.

Parameters come from flags and, optionally, a ``key=value`` config file
(``--config``); flags win. Every JSON output echoes the effective
parameters and the package version. Exit codes: 0 success, 2 invalid
input, 1 anything else.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import asdict

import numpy as np

from . import __version__
from . import analysis, attention, equilibrium, protocol_incentives, simulate
from .model import EQ_LITERAL, CoreParams, ExtendedParams, MixedProfile, ParameterError, validate

FORMAT_ENV = "ROLLUP_VALIDATORS_FORMAT"
FORMATS = ("table", "json", "csv")


# key -> type for every parameter a config file may set
PARAM_TYPES = {
    "C": float, "L": float, "R": float, "U": float,
    "n": int, "m": int, "t": int, "s_w": float, "f": float, "r": float, "burn": float,
    "rule": str, "system": str,
    "trials": int, "seed": int, "workers": int, "pi": float, "alpha": float, "beta": float,
    "p": float, "c": float, "P": float, "p_max": float, "p_num": int,
    "variable": str, "start": float, "stop": float, "num": int, "log": bool,
    "R_min": float, "R_max": float, "L_min": float, "L_max": float,
    "validators": int, "lazy": str, "T_bits": int, "group": str, "rounds": int,
}


class UsageError(Exception):
    pass


def _bool(text):
    if text.lower() in ("1", "true", "yes", "on"):
        return True
    if text.lower() in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def read_config(path) -> dict:
    """Parse ``key=value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in PARAM_TYPES:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
            conv = PARAM_TYPES[key]
            try:
                out[key] = _bool(value) if conv is bool else conv(float(value)) if conv is int else conv(value)
            except ValueError as exc:
                raise UsageError(f"{path}:{lineno}: bad value for {key}: {exc}") from None
    return out


def _add(p, *names, **defaults):
    for name in names:
        conv = PARAM_TYPES[name]
        flags = sorted({f"--{name}", f"--{name.replace('_', '-')}"}, key=len, reverse=True)
        if conv is bool:
            p.add_argument(*flags, dest=name, action="store_const", const=True, default=None)
        else:
            p.add_argument(*flags, dest=name, type=conv, default=None,
                           help=f"default: {defaults.get(name, 'required')}")
    p.set_defaults(_defaults=defaults)


def _common(p):
    p.add_argument("--config", help="key=value parameter file")
    p.add_argument("--format", choices=FORMATS, default=None,
                   help=f"output format (default from ${FORMAT_ENV} or table)")
    p.add_argument("--output", "-o", help="write output to this path instead of stdout")


CORE = ("C", "L", "R", "U")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rollup-validators",
        description="Equilibria, security metrics and reward design for rollup validator attention games.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve2", help="two-player equilibrium; result keys: pi, alpha, failure_prob")
    _add(p, *CORE)
    p = sub.add_parser("solven", help="n active validators; result keys: pi, alpha, catch_prob, failure_prob")
    _add(p, *CORE, "n", "s_w", "burn", n=1, s_w=0.0, burn=0.0)
    p = sub.add_parser("silent", help="n active + m silent validators; result keys: pi, alpha, beta, beta_corner")
    _add(p, *CORE, "n", "m", "s_w", "rule", "system", n=1, m=2, s_w=0.0, rule=EQ_LITERAL, system="auto")

    p = sub.add_parser("analyze", help="failure | expected-loss | optimal-R | sweep | offline")
    p.add_argument("what", choices=("failure", "expected-loss", "optimal-R", "sweep", "offline"))
    _add(p, *CORE, "n", "t", "s_w", "variable", "start", "stop", "num", "log",
         n=1, t=0, s_w=0.0, num=20, log=False)

    p = sub.add_parser("optimize-m", help="minimise the social cost M over (R, L); result keys: best_R, best_L, objective_value")
    _add(p, "C", "U", "f", "r", "R_min", "R_max", "L_min", "L_max", f=0.01, r=0.0001)

    p = sub.add_parser("simulate", help="Monte Carlo rounds; strategies default to the analytic equilibrium")
    _add(p, *CORE, "n", "m", "s_w", "rule", "trials", "seed", "workers", "pi", "alpha", "beta",
         n=1, m=0, s_w=0.0, rule=EQ_LITERAL, trials=100_000, seed=0, workers=1)
    p.add_argument("--dump-trials", help="per-trial CSV (small runs only)")

    p = sub.add_parser("protocol", help="audit thresholds and budget; p sweep needs --p-max")
    _add(p, "C", "p", "c", "L", "r", "n", "P", "p_max", "p_num", L=0.0, r=0.0, n=1, p_num=20)

    p = sub.add_parser("attention-demo", help="one attention-challenge round with honest and lazy validators")
    _add(p, "validators", "lazy", "T_bits", "seed", "group", "rounds",
         validators=4, lazy="", T_bits=255, seed=0, group="test", rounds=1)

    p = sub.add_parser("table1", help="alpha and pi for n = 1..12 at the example parameters")
    _add(p, *CORE, "s_w", C=1.0, L=1e5, R=1e6, U=1e9, s_w=0.0)

    for action in sub.choices.values():
        _common(action)
    return parser


def effective_config(args, parser_defaults) -> dict:
    cfg = dict(parser_defaults)
    if args.config:
        cfg.update(read_config(args.config))
    for key in PARAM_TYPES:
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    return cfg


def _need(cfg, *keys):
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise UsageError("missing required parameter(s): " + ", ".join("--" + k for k in missing))


def _params(cfg, **extra):
    if all(cfg.get(k) is not None for k in ("C", "L", "R")):
        # report the dominant-strategy case even before U is known
        validate(CoreParams(cfg["C"], cfg["L"], cfg["R"], cfg.get("U") or 1.0))
    _need(cfg, *CORE)
    kw = {k: cfg[k] for k in ("n", "m", "t", "s_w", "f", "r", "burn") if cfg.get(k) is not None}
    kw.update(extra)
    return ExtendedParams.of(cfg["C"], cfg["L"], cfg["R"], cfg["U"], **kw)


def _profile_dict(prof: MixedProfile) -> dict:
    d = prof.as_dict()
    if d["beta"] is None:
        del d["beta"], d["beta_corner"]
    return d


# each command returns (result, table_rows, csv_header)

def cmd_solve2(cfg):
    params = _params(cfg)
    prof = equilibrium.solve_two_player(params.core)
    res = {**_profile_dict(prof), "failure_prob": analysis.failure_probability(params.core)}
    return res, list(res.items()), ("key", "value")


def cmd_solven(cfg):
    params = _params(cfg)
    rep = analysis.failure_report(params)
    res = {**_profile_dict(rep.profile), "catch_prob": rep.catch_prob,
           "failure_prob": rep.failure_prob, "expected_loss": rep.expected_loss}
    return res, list(res.items()), ("key", "value")


def cmd_silent(cfg):
    params = _params(cfg)
    opts = equilibrium.SolveOptions(silent_reward_rule=cfg["rule"], system=cfg["system"])
    prof = equilibrium.solve_silent_general(params, opts)
    res = _profile_dict(prof)
    return res, list(res.items()), ("key", "value")


def cmd_analyze(cfg, what):
    if what == "optimal-R":
        _need(cfg, "U", "L")
        v = analysis.optimal_R(cfg["U"], cfg["L"])
        return {"optimal_R": v}, [("optimal_R", v)], ("key", "value")
    params = _params(cfg)
    if what == "failure":
        v = analysis.failure_probability(params.core)
        return {"failure_prob": v}, [("failure_prob", v)], ("key", "value")
    if what == "expected-loss":
        v = analysis.expected_loss(params.core)
        limit = params.core.C * params.core.R / (params.core.R + params.core.L)
        res = {"expected_loss": v, "limit_U_to_infinity": limit}
        return res, list(res.items()), ("key", "value")
    if what == "offline":
        rep = analysis.offline_robustness(params)
        res = {**_profile_dict(rep.profile), "catch_prob": rep.catch_prob,
               "failure_prob": rep.failure_prob, "expected_loss": rep.expected_loss}
        return res, list(res.items()), ("key", "value")
    _need(cfg, "variable", "start", "stop")
    var = cfg["variable"]
    if var == "n":
        values = list(range(int(cfg["start"]), int(cfg["stop"]) + 1))
    elif cfg.get("log"):
        values = np.geomspace(cfg["start"], cfg["stop"], cfg["num"]).tolist()
    else:
        values = np.linspace(cfg["start"], cfg["stop"], cfg["num"]).tolist()
    rows = analysis.sweep_rows(var, analysis.sweep(params, var, values))
    res = [dict(zip(analysis.CSV_HEADER, row)) for row in rows]
    return res, rows, analysis.CSV_HEADER


def cmd_optimize(cfg):
    _need(cfg, "C", "U", "R_min", "R_max", "L_min", "L_max")
    params = ExtendedParams.of(cfg["C"], max(cfg["L_max"], 0.0), max(cfg["R_max"], 0.0), cfg["U"],
                               f=cfg["f"], r=cfg["r"])
    out = analysis.minimize_social_cost(params, (cfg["R_min"], cfg["R_max"]), (cfg["L_min"], cfg["L_max"]))
    res = {"best_R": out.best_R, "best_L": out.best_L, "objective_value": out.objective_value,
           "objective_kind": out.objective_kind}
    return res, list(res.items()), ("key", "value")


def cmd_simulate(cfg, dump=None):
    params = _params(cfg)
    validate(params)
    given = [cfg.get(k) for k in ("pi", "alpha", "beta")]
    if given[0] is not None and given[1] is not None:
        prof = MixedProfile(pi=given[0], alpha=given[1], beta=given[2] if params.m else None)
    elif params.m:
        prof = equilibrium.solve_silent_general(params, equilibrium.SolveOptions(silent_reward_rule=cfg["rule"]))
    else:
        prof = equilibrium.solve_n_player(params)
    config = simulate.SimConfig(cfg["trials"], cfg["seed"], prof, params, cfg["rule"], cfg["workers"])
    rep = simulate.run(config)
    if dump:
        simulate.dump_trials(config, dump)
    res = asdict(rep)
    rows = [("empirical_pi", rep.empirical_pi), ("empirical_alpha", rep.empirical_alpha),
            ("empirical_failure_rate", rep.empirical_failure_rate),
            ("mean_payoff_asserter", rep.mean_payoffs["asserter"])]
    if rep.empirical_beta is not None:
        rows.insert(2, ("empirical_beta", rep.empirical_beta))
    return res, rows, ("key", "value")


def cmd_protocol(cfg):
    _need(cfg, "C", "p", "c")
    scheme = protocol_incentives.RewardScheme(p=cfg["p"], c=cfg["c"], C=cfg["C"], L=cfg["L"],
                                              r=cfg["r"], n=cfg["n"], P=cfg.get("P"))
    a = protocol_incentives.analyze(scheme)
    stake = protocol_incentives.optimal_stake(scheme)
    res = {
        "pi_l": a.pi_l.value, "pi_l_infeasible": a.pi_l.infeasible,
        "pi_r": a.pi_r.value, "pi_r_infeasible": a.pi_r.infeasible,
        "binding": a.binding, "min_P": a.min_P,
        "expected_budget": a.expected_budget, "budget_per_validator": a.expected_budget / scheme.n,
        "budget_lower_bound": a.budget_lower_bound,
        "optimal_L": stake.L, "rejected_root": stake.rejected_root,
    }
    if cfg.get("p_max") is not None:
        if not cfg["p_max"] > scheme.c:
            raise UsageError("--p-max must exceed c")
        lo = scheme.p if scheme.p > scheme.c else scheme.c * 1.0001 + 1e-12
        ps = np.geomspace(lo, cfg["p_max"], cfg["p_num"]).tolist()
        curve = protocol_incentives.budget_curve(scheme, ps)
        res["budget_curve"] = [dict(zip(protocol_incentives.BUDGET_HEADER, row)) for row in curve]
        return res, curve, protocol_incentives.BUDGET_HEADER
    return res, list(res.items()), ("key", "value")


def cmd_attention(cfg):
    groups = {"test": attention.TEST_GROUP, "modp2048": attention.DEFAULT_GROUP}
    if cfg["group"] not in groups:
        raise UsageError(f"--group must be one of {sorted(groups)}")
    group = groups[cfg["group"]]
    lazy = {int(s) for s in str(cfg["lazy"]).split(",") if s.strip()}
    count = cfg["validators"]
    specs = [
        attention.ValidatorSpec(i, attention.keygen(group, seed=cfg["seed"] * 1000 + i),
                                attention.LAZY if i in lazy else attention.HONEST, 100)
        for i in range(count)
    ]
    T = 1 << cfg["T_bits"]
    rounds, seized = [], {}
    for rnd in range(cfg["rounds"]):
        x = f"round-{rnd}".encode()
        fx = hashlib.sha256(x).digest()  # stand-in state root
        tr = attention.run_protocol_round(group, x, fx, specs, T, window=rnd,
                                          seed=cfg["seed"] * 7919 + rnd)
        for v in tr["verdicts"]:
            seized[v.accused] = seized.get(v.accused, 0) + v.seized
        rounds.append(tr["messages"])
    res = {"group": group.name, "T": format(T, "x"), "rounds": rounds,
           "seized_by_validator": {str(k): v for k, v in sorted(seized.items())}}
    rows = [(i, "lazy" if i in lazy else "honest", seized.get(i, 0)) for i in range(count)]
    return res, rows, ("validator", "behaviour", "seized")


def table1_rows(cfg) -> list:
    rows = []
    for n in range(1, 13):
        params = _params(cfg, n=n)
        prof = equilibrium.solve_n_player(params)
        rows.append((n, prof.alpha, prof.pi))
    return rows


def cmd_table1(cfg):
    rows = table1_rows(cfg)
    res = [{"n": n, "alpha": a, "pi": p} for n, a, p in rows]
    return res, rows, ("n", "alpha", "pi")


def _fmt(v, digits=6):
    if isinstance(v, bool) or v is None:
        return str(v)
    if isinstance(v, float):
        return f"{v:.{digits}g}"
    return str(v)


def render(command, result, rows, header, fmt, cfg) -> str:
    if fmt == "json":
        payload = {"command": command, "version": __version__, "params": cfg, "result": result}
        return json.dumps(payload, sort_keys=True, default=str) + "\n"
    if fmt == "csv":
        return analysis.to_csv(rows, header)
    if command == "table1":
        lines = [f"{'n':>3}  {'alpha':>6}  {'pi':>8}"]
        lines += [f"{n:>3}  {a:6.3f}  {p:8.1e}" for n, a, p in rows]
        return "\n".join(lines) + "\n"
    widths = [max(len(str(h)), *(len(_fmt(r[i])) for r in rows)) if rows else len(str(h))
              for i, h in enumerate(header)]
    lines = ["  ".join(str(h).ljust(w) for h, w in zip(header, widths))]
    lines += ["  ".join(_fmt(v).ljust(w) for v, w in zip(r, widths)) for r in rows]
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    fmt = args.format or os.environ.get(FORMAT_ENV, "table")
    try:
        if fmt not in FORMATS:
            raise UsageError(f"unknown output format {fmt!r}")
        cfg = effective_config(args, getattr(args, "_defaults", {}))
        cmd = args.command
        if cmd == "solve2":
            out = cmd_solve2(cfg)
        elif cmd == "solven":
            out = cmd_solven(cfg)
        elif cmd == "silent":
            out = cmd_silent(cfg)
        elif cmd == "analyze":
            out = cmd_analyze(cfg, args.what)
        elif cmd == "optimize-m":
            out = cmd_optimize(cfg)
        elif cmd == "simulate":
            out = cmd_simulate(cfg, args.dump_trials)
        elif cmd == "protocol":
            out = cmd_protocol(cfg)
        elif cmd == "attention-demo":
            out = cmd_attention(cfg)
        else:
            out = cmd_table1(cfg)
        text = render(cmd, *out, fmt, cfg)
    except (UsageError, ParameterError, protocol_incentives.InfeasibleScheme,
            equilibrium.NoTotallyMixedEquilibrium) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
