# %% [markdown]
# # One asserter, one validator
#
# The asserter makes a false claim with probability pi and the validator
# checks with probability alpha. Each mixes so that the other is
# indifferent, which gives simple closed forms.

# %%
from rollup_validators.analysis import expected_loss, failure_probability, optimal_R
from rollup_validators.equilibrium import solve_two_player
from rollup_validators.model import CoreParams

core = CoreParams(C=1.0, L=1e5, R=1e6, U=1e9)  # check cost, stake, deposit, value at risk
prof = solve_two_player(core)
print(f"pi    = {prof.pi:.4g}   (C / (R + L))")
print(f"alpha = {prof.alpha:.6f} (U / (R + U))")

# %% [markdown]
# A failure needs a false claim *and* a miss. Even with a billion at stake
# that happens about once in a billion rounds.

# %%
print(f"failure probability = {failure_probability(core):.4g}")
print(f"expected loss       = {expected_loss(core):.4g}")

# %% [markdown]
# Raising the deposit is not monotone: failures peak at R = sqrt(U L).

# %%
peak = optimal_R(core.U, core.L)
for R in (peak / 100, peak / 10, peak, peak * 10, peak * 100):
    F = failure_probability(CoreParams(core.C, core.L, R, core.U))
    print(f"R = {R:10.4g}   F = {F:.4g}")
