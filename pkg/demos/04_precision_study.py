"""
Precision study at reduced scale
================================

Run the whole benchmark on fewer test points and smaller Monte Carlo budgets,
then look at which observations are hard to explain. The full-size version is
``condshap run --config config.yaml`` after ``condshap init-config``.
"""

import tempfile

import numpy as np

from condshap import ExperimentConfig, run_experiment

config = ExperimentConfig(n_test=60, permutation_shuffles=2000)
for spec in config.estimators:
    if "K" in spec.options:
        spec.options["K"] = 200

out = tempfile.mkdtemp(prefix="condshap-demo-")
result = run_experiment(config, out_dir=out)
rep = result.report

# %%
# Methods ordered by overall MAE.
for m in rep.ordered_methods():
    print(f"{m:<16} MAE {rep.overall_mae[m]:.3f}   "
          f"rho(MAE, distance) {rep.corr_mae_distance[m]:+.2f}   "
          f"rho(MAE, |f - phi0|) {rep.corr_mae_pred_gap[m]:+.2f}")

# %%
# Observations far from the training centre are hard for every method.
far = np.argsort(rep.distance)[-5:]
print("\nfive furthest observations (MAE columns: " + ", ".join(rep.methods) + "):")
for i in far:
    maes = " ".join(f"{rep.per_instance_mae[m][i]:.2f}" for m in rep.methods)
    print(f"  id {rep.obs_ids[i]:>3}  distance {rep.distance[i]:.2f}  MAE {maes}")

print(f"\nartifacts (CSV, JSON, SVG) in {out}")
