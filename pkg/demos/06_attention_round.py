# %% [markdown]
# # An attention challenge
#
# The asserter publishes g^r and a commitment to f(x). Each validator
# must respond exactly when H(g^{rk}, f(x)) falls below T, which it can
# only know after computing f(x). A lazy validator is caught whenever a
# response was due.

# %%
import hashlib

from rollup_validators.attention import HONEST, LAZY, TEST_GROUP, ValidatorSpec, keygen, run_protocol_round

group = TEST_GROUP  # small group: fast, for demonstration only
validators = [ValidatorSpec(i, keygen(group, seed=i), LAZY if i == 2 else HONEST, stake=100)
              for i in range(4)]
x = b"block 17"
fx = hashlib.sha256(x).digest()

for rnd in range(5):
    out = run_protocol_round(group, x, fx, validators, T=1 << 255, window=rnd, seed=rnd)
    responders = [i for i, r in out["records"].items() if r.responded]
    print(f"round {rnd}: responders {responders}")
    for v in out["verdicts"]:
        print(f"   validator {v.accused} slashed {v.seized}: {v.to_asserter} to asserter, {v.burned} burned")
