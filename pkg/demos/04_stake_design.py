# %% [markdown]
# # Choosing the deposit and the stake
#
# The social cost adds the expected theft, a fraction f of value lost
# when a false claim is made, the checking cost and the interest r on
# the locked funds. We minimise it over (R, L).

# %%
from rollup_validators.analysis import minimize_social_cost, social_cost
from rollup_validators.model import ExtendedParams

params = ExtendedParams.of(1.0, 1e5, 1e6, 1e9, f=0.01, r=1e-4)
print("cost at the example (R, L):", social_cost(params, 1e6, 1e5))

res = minimize_social_cost(params, (1.0, 1e9), (0.0, 1e8))
print(f"best R = {res.best_R:.4g}, best L = {res.best_L:.4g}, cost = {res.objective_value:.4g}")
