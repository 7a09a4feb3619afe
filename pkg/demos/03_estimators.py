"""
Monte Carlo and regression estimators side by side
==================================================

Fit the model on simulated training data, then explain one test observation
with every estimator family and compare with the exact truth.
"""

import numpy as np

from condshap import (
    EmpiricalSampler,
    GaussianSampler,
    IndependenceSampler,
    MonteCarloEstimator,
    exact_shapley,
    explain_observation,
    fit_basis_model,
    fit_separate,
    fit_surrogate,
    reference_setup,
    sample_dataset,
)

params, coef = reference_setup()
train = sample_dataset(params, coef, 1000, seed=5)
test = sample_dataset(params, coef, 5, seed=5, role="test")
f = fit_basis_model(train)
print(f"model R^2 on training data: {f.r2:.3f}")

x = test.features[0]
truth = exact_shapley(x, params, f)
print(f"f(x*) = {f.predict(x):.3f}, truth phi0 = {truth.phi0:.3f}")
print(f"{'truth':<16}", np.round(truth.phi, 3))

# %%
# Monte Carlo estimators integrate f over sampled completions.
estimators = {
    "independence": MonteCarloEstimator(f, IndependenceSampler(train), K=500, seed=1, train=train),
    "empirical": MonteCarloEstimator(f, EmpiricalSampler(train), K=500, seed=1, train=train),
    "gaussian": MonteCarloEstimator(f, GaussianSampler.from_data(train), K=500, seed=1, train=train),
}

# %%
# Regression estimators learn v(S) from f's outputs: one fit per coalition, or
# one surrogate fit that takes the coalition mask as input.
estimators["separate_poly"] = fit_separate(train, f, family="poly")
estimators["surrogate_poly"] = fit_surrogate(train, f, coalitions_per_row=16, rng=1)

for name, est in estimators.items():
    e = explain_observation(f, est, x)
    err = np.abs(e.phi - truth.phi).mean()
    print(f"{name:<16}", np.round(e.phi, 3), f" MAE {err:.3f}")
