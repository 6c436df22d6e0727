import math
from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest

from conftest import random_core, random_params, random_solvable
from rollup_validators.equilibrium import (
    PRINTED,
    NoTotallyMixedEquilibrium,
    SolveOptions,
    modbinom,
    printed_asserter_residual,
    solve_n_player,
    solve_silent_closed_form,
    solve_silent_general,
    solve_two_player,
    worked_example_raw_beta,
    worked_example_residuals,
)
from rollup_validators.model import PROSE, CoreParams, DominantStrategy, ExtendedParams
from rollup_validators.simulate import indifference_residuals

TABLE_ALPHA = [0.999, 0.968, 0.900, 0.822, 0.748, 0.683, 0.627, 0.578, 0.535, 0.498, 0.466, 0.437]
TABLE_PI = [9.1e-7, 1.9e-6, 2.7e-6, 3.3e-6, 3.7e-6, 4.1e-6, 4.4e-6, 4.6e-6, 4.8e-6, 5e-6, 5.1e-6, 5.3e-6]


def exact_binomial_sum(n, x, y):
    """Brute-force oracle in exact rational arithmetic."""
    x, y = Fraction(x), Fraction(y)
    return sum(Fraction(math.comb(n, k)) * x**k * y ** (n - k) / (k + 1) for k in range(n + 1))


class TestTwoPlayer:
    def test_example_values(self, example):
        prof = solve_two_player(example)
        assert prof.pi == pytest.approx(9.0909e-7, rel=1e-4)
        assert round(prof.alpha, 3) == 0.999

    def test_symmetric(self):
        prof = solve_two_player(CoreParams(1, 1, 1, 1))
        assert (prof.pi, prof.alpha) == (0.5, 0.5)

    def test_hand_values(self):
        prof = solve_two_player(CoreParams(2, 5, 10, 100))
        assert prof.pi == pytest.approx(2 / 15, rel=1e-15)
        assert prof.alpha == pytest.approx(100 / 110, rel=1e-15)

    def test_validation_propagates(self):
        with pytest.raises(DominantStrategy):
            solve_two_player(CoreParams(3, 1, 1, 1))


class TestNPlayer:
    @pytest.mark.parametrize("n", [5, 12])
    def test_table_columns(self, example, n):
        prof = solve_n_player(ExtendedParams(example, n=n))
        # printed alphas are truncated to 3 decimals
        assert math.floor(prof.alpha * 1000) / 1000 == TABLE_ALPHA[n - 1]
        assert prof.pi == pytest.approx(TABLE_PI[n - 1], rel=0.05)

    def test_n1_reduces_to_two_player(self, example):
        a = solve_n_player(ExtendedParams(example, n=1))
        b = solve_two_player(example)
        assert a.pi == pytest.approx(b.pi, rel=1e-15)
        assert a.alpha == pytest.approx(b.alpha, rel=1e-15)
        assert a.alpha_bar == pytest.approx(b.alpha_bar, rel=1e-13)

    def test_rejects_silent(self, example):
        with pytest.raises(ValueError):
            solve_n_player(ExtendedParams(example, n=2, m=1))

    def test_pi_above_one_reported(self):
        # huge cost relative to the rewards at stake still under C < R + L
        with pytest.raises(NoTotallyMixedEquilibrium):
            solve_n_player(ExtendedParams.of(5.0, 0.0, 6.0, 1e6, n=12))

    def test_residuals_vanish(self, rng):
        for _ in range(50):
            params = random_solvable(rng)
            prof = solve_n_player(params)
            res = indifference_residuals(params, prof)
            assert abs(res["active"]) < 1e-9 * params.core.R
            assert abs(res["asserter"]) < 1e-9 * params.core.R

    def test_catch_probability_independent_of_n(self, rng):
        for _ in range(20):
            core = random_solvable(rng, worst=lambda p: replace(p, n=29, s_w=0.0)).core
            target = core.U / (core.R + core.U)
            for n in range(1, 30):
                prof = solve_n_player(ExtendedParams(core, n=n))
                assert 1 - prof.alpha_bar**n == pytest.approx(target, rel=1e-12)

    def test_pi_increasing_in_n(self, rng):
        for _ in range(50):
            params = random_solvable(rng, worst=lambda p: replace(p, n=50))
            pis = [solve_n_player(replace(params, n=n)).pi for n in range(1, 51)]
            assert all(b > a - 1e-15 * abs(a) for a, b in zip(pis, pis[1:]))

    def test_pi_decreasing_in_slash_and_stake(self, rng):
        for _ in range(30):
            params = random_solvable(rng, worst=lambda p: replace(p, s_w=0.0, n=max(p.n, 2)))
            params = replace(params, n=max(params.n, 2))
            L = params.core.L
            by_sw = [solve_n_player(replace(params, s_w=s)).pi for s in np.linspace(0, L, 9)]
            assert all(b < a for a, b in zip(by_sw, by_sw[1:]))
            by_L = [solve_n_player(replace(params, core=replace(params.core, L=v), s_w=0.0)).pi
                    for v in np.geomspace(L, 100 * L, 9)]
            assert all(b < a for a, b in zip(by_L, by_L[1:]))


class TestModbinom:
    def test_single_term(self):
        assert modbinom(0, 1.0, 0.0) == 1.0

    def test_small_case(self):
        assert modbinom(1, 1.0, 1.0) == 1.5
        assert exact_binomial_sum(1, 1, 1) == Fraction(3, 2)

    def test_table_alpha(self, example):
        prof = solve_n_player(ExtendedParams(example, n=12))
        exact = exact_binomial_sum(11, prof.alpha, prof.alpha_bar)
        got = modbinom(11, prof.alpha, prof.alpha_bar)
        assert abs(Fraction(got) - exact) / exact < Fraction(1, 10**12)

    def test_matches_printed_closed_form(self):
        # away from cancellation the printed quotient and the expansion agree
        for n, x, y in [(3, 0.7, 0.2), (10, 1.5, 0.5), (6, 2.0, -0.5)]:
            direct = ((x + y) ** (n + 1) - y ** (n + 1)) / ((n + 1) * x)
            assert modbinom(n, x, y) == pytest.approx(direct, rel=1e-13)

    def test_zero_x_rejected(self):
        with pytest.raises(ValueError):
            modbinom(3, 0.0, 1.0)


class TestSilentClosedForm:
    def test_example_corner(self, example):
        prof = solve_silent_closed_form(example)
        assert prof.alpha == pytest.approx(1.1e6 / 1.2e6, rel=1e-15)
        assert worked_example_raw_beta(example) == pytest.approx(1.006, abs=5e-4)
        assert prof.beta == 1.0 and prof.beta_corner

    def test_zero_stake(self):
        core = CoreParams(1.0, 0.0, 10.0, 40.0)
        prof = solve_silent_closed_form(core)
        assert prof.alpha == 1.0
        assert prof.beta == pytest.approx(40 / 50, rel=1e-15)
        assert prof.pi == pytest.approx(0.1, rel=1e-15)

    def test_unit_hand_values(self):
        prof = solve_silent_closed_form(CoreParams(1, 1, 1, 1))
        assert prof.alpha == pytest.approx(2 / 3, rel=1e-15)
        assert prof.beta == pytest.approx(9 / 16, rel=1e-15)
        assert prof.pi == 0.5 and not prof.beta_corner

    def test_satisfies_printed_equations(self, rng):
        for _ in range(50):
            core = random_core(rng)
            prof = solve_silent_closed_form(core)
            res = worked_example_residuals(core, prof)
            assert abs(res["active"]) < 1e-12 * core.C
            assert abs(res["silent"]) < 1e-12 * core.C
            if not prof.beta_corner:
                assert abs(res["asserter"]) < 1e-9 * core.U


class TestSilentGeneral:
    def test_matches_closed_form(self, rng):
        for _ in range(50):
            core = random_core(rng)
            a = solve_silent_general(ExtendedParams(core, n=1, m=2))
            b = solve_silent_closed_form(core)
            assert a.beta_corner == b.beta_corner
            for name in ("pi", "alpha", "beta"):
                assert abs(getattr(a, name) - getattr(b, name)) < 1e-8

    def test_interior_unit_case(self):
        prof = solve_silent_general(ExtendedParams.of(1, 1, 1, 1, n=1, m=2))
        assert (prof.alpha, prof.beta, prof.pi) == pytest.approx((2 / 3, 9 / 16, 0.5), abs=1e-12)

    def test_no_silent_delegates(self, example):
        a = solve_silent_general(ExtendedParams(example, n=4))
        assert a == solve_n_player(ExtendedParams(example, n=4))

    @pytest.mark.parametrize("rule", [PROSE, "eq_literal"])
    def test_single_silent_never_checks(self, example, rule):
        with pytest.raises(NoTotallyMixedEquilibrium, match="never check") as info:
            solve_silent_general(ExtendedParams(example, n=1, m=1), SolveOptions(silent_reward_rule=rule))
        assert info.value.boundary.beta == 0.0

    @pytest.mark.parametrize("rule", [PROSE, "eq_literal"])
    def test_general_solution_is_oracle_equilibrium(self, rng, rule):
        solved = 0
        for _ in range(80):
            params = random_params(rng, n_max=6, m=int(rng.integers(1, 4)))
            if params.n == 1 and params.m == 2:
                continue
            try:
                prof = solve_silent_general(params, SolveOptions(silent_reward_rule=rule))
            except NoTotallyMixedEquilibrium:
                continue
            solved += 1
            res = indifference_residuals(params, prof, rule)
            scale = params.core.R
            assert abs(res["active"]) < 1e-9 * scale
            assert abs(res["asserter"]) < 1e-9 * scale
            assert abs(res["silent"]) < 1e-9 * scale
        assert solved >= 10

    def test_example_params_two_active_one_silent(self, example):
        params = ExtendedParams(example, n=2, m=1)
        prof = solve_silent_general(params)
        assert 0 < prof.beta < 1
        res = indifference_residuals(params, prof)
        assert max(abs(v) for v in res.values()) < 1e-9 * example.R

    def test_printed_asserter_form(self, example):
        params = ExtendedParams(example, n=3, m=2)
        opts = SolveOptions(asserter_form=PRINTED, system="general")
        prof = solve_silent_general(params, opts)
        if prof.beta_corner:
            assert prof.beta == 1.0
        else:
            assert abs(printed_asserter_residual(params, prof)) < 1e-6 * example.R

    def test_worked_system_needs_its_shape(self, example):
        with pytest.raises(ValueError):
            solve_silent_general(ExtendedParams(example, n=2, m=2), SolveOptions(system="worked_example"))

    @pytest.mark.xfail(strict=True, reason=(
        "the printed one-active/two-silent equations are not the indifference "
        "conditions of any payoff table: the asserter equation is quadratic in "
        "the single active validator's alpha"))
    def test_closed_form_zeroes_oracle_residuals(self):
        params = ExtendedParams.of(1, 1, 1, 1, n=1, m=2)
        prof = solve_silent_closed_form(params.core)
        res = indifference_residuals(params, prof)
        assert max(abs(v) for v in res.values()) < 1e-9

    def test_options_validated(self):
        with pytest.raises(ValueError):
            SolveOptions(tolerance=0)
        with pytest.raises(ValueError):
            SolveOptions(max_iterations=0)
        with pytest.raises(ValueError):
            SolveOptions(silent_reward_rule="whatever")
