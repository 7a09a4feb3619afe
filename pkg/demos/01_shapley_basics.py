"""
Shapley values from a contribution table
========================================

A contribution table holds one value v(S) per coalition S, indexed by bitmask
(feature j is bit j-1). Aggregation turns it into phi_0 and phi_1..phi_M.
"""

import numpy as np

from condshap import Coalition, ContributionTable, aggregate, enumerate_coalitions

# %%
# Coalitions for three features, in ascending mask order.
for S in enumerate_coalitions(3):
    print(f"mask {S.mask:03b} -> {S}")

# %%
# Feature 2 never changes the value, so it gets nothing; feature 1 gets it all.
e = aggregate(ContributionTable([0.0, 1.0, 0.0, 1.0], M=2))
print("dummy game:", e.phi0, e.phi)

# %%
# An additive game pays each feature its own term.
a = np.array([0.5, -1.0, 2.0])
values = [sum(a[j] for j in S.indices) for S in enumerate_coalitions(3)]
print("additive game:", aggregate(ContributionTable(values, 3)).phi)

# %%
# Efficiency: phi_0 plus the Shapley values recovers the grand coalition value.
rng = np.random.default_rng(0)
v = rng.normal(size=2**5)
e = aggregate(ContributionTable(v, 5))
print(f"phi0 + sum(phi) = {e.total:.12f}, v(grand) = {v[-1]:.12f}")
print("grand coalition:", Coalition.grand(5))
