# %% [markdown]
# # Paying validators to post
#
# Instead of relying on fraud alone, the protocol asks each validator to
# post its check result with probability P and pays p for it. Checking
# has to beat shirking (IC) and staking has to beat staying out (IR).

# %%
import numpy as np

from rollup_validators.protocol_incentives import RewardScheme, analyze, budget_curve, optimal_stake

scheme = RewardScheme(p=10.0, c=0.1, C=1.0, L=0.0, r=0.05, n=100)
res = analyze(scheme)
print(f"IC threshold {res.pi_l.value:.5f}, IR threshold {res.pi_r.value:.5f}, binding: {res.binding}")
print(f"expected budget per round for 100 validators: {res.expected_budget:.4g}")
print(optimal_stake(scheme))

# %% [markdown]
# A larger reward lowers the audit rate needed, and the budget per
# validator falls towards the checking cost C.

# %%
for p, _, _, min_P, budget in budget_curve(scheme, np.geomspace(0.2, 1e6, 8)):
    print(f"p = {p:10.4g}  min P = {min_P:.3e}  budget/validator = {budget:.6f}")
