"""
Conditional contribution functions under a Gaussian law
=======================================================

For correlated features, v(S) = E[f(x) | x_S = x_S*] depends on how the
unobserved features move with the observed ones. The Gaussian sampler draws
them from the exact conditional law; the independence sampler ignores the
correlation. For a linear model the truth is available in closed form.
"""

import numpy as np

from condshap import (
    Coalition,
    GaussianSampler,
    IndependenceSampler,
    LinearModel,
    MonteCarloEstimator,
    exact_shapley,
    explain_observation,
    gaussian_condition,
    reference_setup,
    sample_dataset,
)

params, coef = reference_setup()  # 8 features, Sigma[j,l] = 0.5^|j-l|
train = sample_dataset(params, coef, 1000, seed=1)

# %%
# Observing x1 = 2 pulls the mean of its neighbours towards it.
S = Coalition.from_features([1], 8)
cond = gaussian_condition(params, S, np.r_[2.0, np.zeros(7)])
print("conditional mean of x2..x8:", np.round(cond.cond_mean, 3))

# %%
# A model that only uses x1 still credits x2 under conditioning, because x2
# carries information about x1.
f = LinearModel(np.r_[1.0, np.zeros(7)])
x = np.r_[0.0, 2.0, np.zeros(6)]
truth = exact_shapley(x, params, f)
print("closed form:      ", np.round(truth.phi, 3))

for name, sampler in [("gaussian", GaussianSampler(params)),
                      ("independence", IndependenceSampler(train))]:
    est = MonteCarloEstimator(f, sampler, K=2000, seed=3, train=train)
    e = explain_observation(f, est, x)
    print(f"{name:<18}", np.round(e.phi, 3), "+/-", np.round(e.phi_se.max(), 3))
