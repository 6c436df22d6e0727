# %% [markdown]
# # Checking the equilibrium by simulation
#
# At inflated parameters the events are common enough to sample. Realistic
# scale failure rates (around 1e-9) are far too rare for this; there the
# exact formulas are the reference.

# %%
from rollup_validators.equilibrium import solve_n_player
from rollup_validators.model import ExtendedParams
from rollup_validators.simulate import SimConfig, find_pure_deviations, run

params = ExtendedParams.of(C=1.0, L=2.0, R=3.0, U=10.0, n=3)
prof = solve_n_player(params)
rep = run(SimConfig(trials=1_000_000, seed=7, strategies=prof, params=params, workers=4))
print(f"pi:      analytic {prof.pi:.5f}  sampled {rep.empirical_pi:.5f} +/- {rep.confidence_halfwidths['pi']:.5f}")
print(f"alpha:   analytic {prof.alpha:.5f}  sampled {rep.empirical_alpha:.5f}")
print(f"failure: analytic {prof.pi * prof.alpha_bar**3:.5f}  sampled {rep.empirical_failure_rate:.5f}")
print("mean asserter payoff (should be near 0):", rep.mean_payoffs["asserter"])

# %% [markdown]
# No pure profile is stable: each has a player who gains by switching.

# %%
for w in find_pure_deviations(ExtendedParams.of(1.0, 2.0, 3.0, 10.0)):
    print(w)
