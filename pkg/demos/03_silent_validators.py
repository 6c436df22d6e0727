# %% [markdown]
# # Unstaked ("silent") validators
#
# Silent validators put nothing at risk and are paid only when they
# catch a false claim. With one active and two silent validators at the
# example parameters, the silent ones would like to check more than
# always, so they sit at the corner beta = 1.

# %%
from rollup_validators.equilibrium import (
    NoTotallyMixedEquilibrium,
    SolveOptions,
    solve_silent_closed_form,
    solve_silent_general,
    worked_example_raw_beta,
)
from rollup_validators.model import CoreParams, ExtendedParams

core = CoreParams(1.0, 1e5, 1e6, 1e9)
print("raw beta from the closed form:", worked_example_raw_beta(core))
print(solve_silent_closed_form(core))

# %% [markdown]
# A single silent validator never checks: its expected reward never
# covers the cost.

# %%
try:
    solve_silent_general(ExtendedParams(core, n=1, m=1))
except NoTotallyMixedEquilibrium as exc:
    print("m = 1:", exc)
    print("boundary profile:", exc.boundary)

# %% [markdown]
# Other mixes of active and silent validators are solved numerically.

# %%
for n, m in [(2, 1), (3, 2), (2, 3)]:
    params = ExtendedParams(CoreParams(1, 5, 10, 200), n=n, m=m)
    try:
        p = solve_silent_general(params, SolveOptions(silent_reward_rule="prose"))
        print(f"n={n} m={m}: pi={p.pi:.4f} alpha={p.alpha:.4f} beta={p.beta:.4f}")
    except NoTotallyMixedEquilibrium as exc:
        print(f"n={n} m={m}: {exc}")
