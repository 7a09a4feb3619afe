"""Error metrics and the per-instance precision analysis."""

import csv
import itertools
import json
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import AlignmentError, ParameterError, ShapeError
from .rng import as_generator

SCHEMA_VERSION = 1
RELATIVE_MAE_FLOOR = 0.1


def mae(true_phi, est_phi):
    """Per-instance mean absolute error over features, and its mean over rows."""
    t = np.atleast_2d(np.asarray(true_phi, dtype=float))
    e = np.atleast_2d(np.asarray(est_phi, dtype=float))
    if t.shape != e.shape:
        raise ShapeError(f"shape mismatch: {t.shape} vs {e.shape}")
    per = np.abs(t - e).mean(axis=1)
    return float(per.mean()), per


def distance_to_center(train_features, test_features):
    """Euclidean distance of each test row to the training feature mean."""
    X = np.asarray(train_features, dtype=float)
    T = np.atleast_2d(np.asarray(test_features, dtype=float))
    if X.shape[1] != T.shape[1]:
        raise ShapeError(f"train has {X.shape[1]} features, test has {T.shape[1]}")
    return np.linalg.norm(T - X.mean(axis=0), axis=1)


def mahalanobis_to_center(train_features, test_features):
    X = np.asarray(train_features, dtype=float)
    T = np.atleast_2d(np.asarray(test_features, dtype=float))
    if X.shape[1] != T.shape[1]:
        raise ShapeError(f"train has {X.shape[1]} features, test has {T.shape[1]}")
    cov = np.atleast_2d(np.cov(X, rowvar=False))
    diff = T - X.mean(axis=0)
    return np.sqrt(np.einsum("ij,ij->i", diff, np.linalg.solve(cov, diff.T).T))


def spearman(a, b):
    """Pearson correlation of mid-ranks; ``nan`` when either input is constant."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ShapeError(f"spearman needs equal-length vectors, got {a.shape} and {b.shape}")
    if a.size < 3:
        raise ShapeError("spearman needs at least 3 values")
    ra = stats.rankdata(a) - (a.size + 1) / 2
    rb = stats.rankdata(b) - (b.size + 1) / 2
    denom = np.sqrt((ra @ ra) * (rb @ rb))
    if denom == 0:
        return float("nan")
    return float(np.clip((ra @ rb) / denom, -1.0, 1.0))


def spearman_permutation_pvalue(a, b, n_perm=10_000, rng=0):
    """One-sided p-value for positive rank correlation by shuffling ``b``.

    Uses ``(1 + #{perm >= observed}) / (1 + n_perm)``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    rng = as_generator(rng)
    ra = stats.rankdata(a) - (a.size + 1) / 2
    rb = stats.rankdata(b) - (b.size + 1) / 2
    denom = np.sqrt((ra @ ra) * (rb @ rb))
    if denom == 0:
        return float("nan")
    observed = (ra @ rb) / denom
    hits = 0
    batch = 1000
    for start in range(0, n_perm, batch):
        n = min(batch, n_perm - start)
        perms = rng.permuted(np.tile(rb, (n, 1)), axis=1)
        hits += int(np.sum(perms @ ra / denom >= observed - 1e-12))
    return (1 + hits) / (1 + n_perm)


def tukey_outliers(values):
    """Indices with ``value > Q3 + 1.5 IQR`` (linear-interpolation quartiles)."""
    v = np.asarray(values, dtype=float)
    if v.size < 4:
        raise ShapeError("need at least 4 values for quartiles")
    q1, q3 = np.percentile(v, [25, 75], method="linear")
    return np.flatnonzero(v > q3 + 1.5 * (q3 - q1))


def rank_agreement(true_phi_row, est_phi_row, k):
    """Overlap of the top-``k`` features by absolute value, as a fraction of ``k``."""
    t = np.abs(np.asarray(true_phi_row, dtype=float))
    e = np.abs(np.asarray(est_phi_row, dtype=float))
    if t.shape != e.shape:
        raise ShapeError(f"shape mismatch: {t.shape} vs {e.shape}")
    if not 1 <= k <= t.size:
        raise ParameterError(f"k must lie in 1..{t.size}, got {k}")
    # stable sort on -|phi| breaks ties by lower feature index
    top_t = set(np.argsort(-t, kind="stable")[:k])
    top_e = set(np.argsort(-e, kind="stable")[:k])
    return len(top_t & top_e) / k


@dataclass
class EvaluationReport:
    methods: list
    obs_ids: np.ndarray
    overall_mae: dict
    per_instance_mae: dict
    distance: np.ndarray
    mahalanobis: np.ndarray
    prediction: np.ndarray
    phi0: float
    abs_pred_minus_phi0: np.ndarray
    corr_mae_distance: dict
    corr_mae_pred_gap: dict
    corr_methods: dict
    outliers: dict
    rank_agreement: dict
    top_k: int
    relative_mae: dict = field(default_factory=dict)

    def ordered_methods(self):
        """Methods sorted by overall MAE (ties by name)."""
        return sorted(self.methods, key=lambda m: (self.overall_mae[m], m))

    def summary(self):
        def num(x):
            x = float(x)
            return None if np.isnan(x) else x

        return {
            "schema_version": SCHEMA_VERSION,
            "n_test": int(self.obs_ids.size),
            "phi0": num(self.phi0),
            "methods_by_mae": self.ordered_methods(),
            "overall_mae": {m: num(self.overall_mae[m]) for m in self.methods},
            "spearman_mae_distance": {m: num(self.corr_mae_distance[m]) for m in self.methods},
            "spearman_mae_pred_gap": {m: num(self.corr_mae_pred_gap[m]) for m in self.methods},
            "spearman_methods": {f"{a}|{b}": num(c) for (a, b), c in self.corr_methods.items()},
            "outliers": {m: [int(self.obs_ids[i]) for i in self.outliers[m]] for m in self.methods},
            f"mean_top{self.top_k}_rank_agreement": {
                m: num(self.rank_agreement[m].mean()) for m in self.methods
            },
            "mean_relative_mae_diagnostic": {
                m: num(self.relative_mae[m].mean()) for m in self.methods
            },
        }

    def per_instance_header(self):
        cols = ["id", "distance", "mahalanobis_distance", "prediction", "abs_pred_minus_phi0"]
        cols += [f"mae_{m}" for m in self.methods]
        cols += [f"outlier_{m}" for m in self.methods]
        cols += [f"relmae_diag_{m}" for m in self.methods]
        return cols

    def write_per_instance_csv(self, path):
        out = {m: set(int(i) for i in self.outliers[m]) for m in self.methods}
        with open(path, "w", newline="") as fh:
            fh.write(f"# condshap per-instance schema v{SCHEMA_VERSION}: "
                     + ",".join(self.per_instance_header()) + "\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.per_instance_header())
            for i, oid in enumerate(self.obs_ids):
                row = [str(int(oid)), repr(float(self.distance[i])),
                       repr(float(self.mahalanobis[i])), repr(float(self.prediction[i])),
                       repr(float(self.abs_pred_minus_phi0[i]))]
                row += [repr(float(self.per_instance_mae[m][i])) for m in self.methods]
                row += [str(int(i in out[m])) for m in self.methods]
                row += [repr(float(self.relative_mae[m][i])) for m in self.methods]
                w.writerow(row)

    def write_summary_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.summary(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _phi_matrix(explanations):
    return np.vstack([e.phi for e in explanations])


def build_report(truth, estimates, train_features, test_features, predictions, top_k=3,
                 relative_floor=RELATIVE_MAE_FLOOR):
    """Assemble every metric for ``estimates`` (``{method: [Explanation]}``)
    against ``truth`` (``[Explanation]``)."""
    ids = np.array([e.obs_id for e in truth])
    for m, exps in estimates.items():
        if [e.obs_id for e in exps] != ids.tolist():
            raise AlignmentError(f"method {m!r} covers different observations than the truth")
    T = np.atleast_2d(np.asarray(test_features, dtype=float))
    if T.shape[0] != ids.size:
        raise AlignmentError(f"{T.shape[0]} test rows for {ids.size} explanations")
    methods = list(estimates)
    true_phi = _phi_matrix(truth)
    phi0 = float(np.mean([e.phi0 for e in truth]))
    pred = np.asarray(predictions, dtype=float)
    gap = np.abs(pred - phi0)
    dist = distance_to_center(train_features, T)
    maha = mahalanobis_to_center(train_features, T)

    overall, per, rel, outl, rank = {}, {}, {}, {}, {}
    for m in methods:
        est_phi = _phi_matrix(estimates[m])
        overall[m], per[m] = mae(true_phi, est_phi)
        rel[m] = per[m] / np.maximum(gap, relative_floor)
        outl[m] = tukey_outliers(per[m]) if per[m].size >= 4 else np.array([], dtype=int)
        k = min(top_k, true_phi.shape[1])
        rank[m] = np.array([rank_agreement(t, e, k) for t, e in zip(true_phi, est_phi)])

    def corr(a, b):
        return spearman(a, b) if len(a) >= 3 else float("nan")

    return EvaluationReport(
        methods=methods,
        obs_ids=ids,
        overall_mae=overall,
        per_instance_mae=per,
        distance=dist,
        mahalanobis=maha,
        prediction=pred,
        phi0=phi0,
        abs_pred_minus_phi0=gap,
        corr_mae_distance={m: corr(per[m], dist) for m in methods},
        corr_mae_pred_gap={m: corr(per[m], gap) for m in methods},
        corr_methods={(a, b): corr(per[a], per[b]) for a, b in itertools.combinations(methods, 2)},
        outliers=outl,
        rank_agreement=rank,
        top_k=min(top_k, true_phi.shape[1]),
        relative_mae=rel,
    )
