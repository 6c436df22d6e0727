# %% [markdown]
# # Adding validators does not add security
#
# With n staked validators each checks less often. The chance that every
# one of them misses a false claim stays at R/(R+U), and the asserter
# cheats more often as n grows.

# %%
from rollup_validators.analysis import failure_report
from rollup_validators.model import ExtendedParams

print(" n   alpha      pi         all miss   failure")
for n in range(1, 13):
    rep = failure_report(ExtendedParams.of(1.0, 1e5, 1e6, 1e9, n=n))
    p = rep.profile
    print(f"{n:2d}  {p.alpha:.4f}  {p.pi:.3e}  {1 - rep.catch_prob:.3e}  {rep.failure_prob:.3e}")

# %% [markdown]
# Validators that go offline only make things worse: the remaining ones
# keep their equilibrium rate.

# %%
for t in range(0, 4):
    rep = failure_report(ExtendedParams.of(1.0, 1e5, 1e6, 1e9, n=4, t=t))
    print(f"{t} offline: failure probability {rep.failure_prob:.3e}")
