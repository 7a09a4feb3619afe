"""Exact Shapley aggregation over complete contribution tables."""

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .coalition import Coalition, coalition_sizes, mask_matrix, shapley_weight
from .errors import (
    CondShapError,
    EstimationError,
    InputError,
    MissingCoalitionError,
    ShapeError,
)
from .mc_estimators import GaussianSampler, MonteCarloEstimator, _conditioning_parts

DEFAULT_K_TRUTH = 50_000


@dataclass(frozen=True, eq=False)
class ContributionTable:
    """``values[mask]`` is the estimate of ``v(S)``; ``variances`` optionally
    holds the Monte Carlo variance of each entry."""

    values: np.ndarray
    M: int
    estimator: str = ""
    obs_id: int = 0
    variances: np.ndarray = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (1 << self.M,):
            raise ShapeError(f"table needs {1 << self.M} entries, got shape {v.shape}")
        missing = np.flatnonzero(np.isnan(v))
        if missing.size:
            raise MissingCoalitionError(missing.tolist())
        if not np.isfinite(v).all():
            raise InputError("contribution table has infinite entries")
        object.__setattr__(self, "values", v)
        if self.variances is not None:
            object.__setattr__(self, "variances", np.asarray(self.variances, dtype=float))

    @classmethod
    def from_mapping(cls, mapping, M, **kw):
        """Build from ``{mask or Coalition: value}``; every mask must be present."""
        values = np.full(1 << M, np.nan)
        for key, val in mapping.items():
            values[key.mask if isinstance(key, Coalition) else int(key)] = val
        return cls(values, M, **kw)


@dataclass(eq=False)
class Explanation:
    phi0: float
    phi: np.ndarray
    obs_id: int = 0
    estimator: str = ""
    phi_se: np.ndarray = None
    phi0_se: float = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def M(self):
        return self.phi.size

    @property
    def total(self):
        return self.phi0 + float(self.phi.sum())

    def to_dict(self):
        d = {
            "id": int(self.obs_id),
            "estimator": self.estimator,
            "phi0": float(self.phi0),
            "phi": [float(p) for p in self.phi],
        }
        if self.phi_se is not None:
            d["phi_se"] = [float(s) for s in self.phi_se]
        if self.diagnostics:
            d["diagnostics"] = self.diagnostics
        return d


@lru_cache(maxsize=None)
def _weight_matrix(M):
    """``(M, 2**M)`` matrix turning a table into Shapley values."""
    bits = mask_matrix(M)
    sizes = coalition_sizes(M)
    w_by_size = np.array([shapley_weight(s, M) for s in range(M)] + [0.0])
    W = np.where(
        bits.T,
        w_by_size[np.maximum(sizes - 1, 0)][None, :],
        -w_by_size[sizes][None, :],
    )
    W.setflags(write=False)
    return W


@lru_cache(maxsize=None)
def _marginal_pairs(M):
    """Per feature j: masks without j, the same masks with j, and their weights."""
    masks = np.arange(2**M)
    sizes = coalition_sizes(M)
    w_by_size = np.array([shapley_weight(s, M) for s in range(M)])
    without = np.stack([masks[(masks >> j) & 1 == 0] for j in range(M)])
    with_j = without | (1 << np.arange(M))[:, None]
    weights = w_by_size[sizes[without]]
    for a in (without, with_j, weights):
        a.setflags(write=False)
    return without, with_j, weights


def aggregate_values(values, M):
    """Shapley values for one table ``(2**M,)`` or many ``(N, 2**M)``.

    Marginal differences are formed before weighting, so constant and dummy
    games give exact zeros.
    """
    values = np.asarray(values, dtype=float)
    without, with_j, weights = _marginal_pairs(M)
    return ((values[..., with_j] - values[..., without]) * weights).sum(axis=-1)


def aggregate_variances(variances, M):
    """Variance of each Shapley value when table entries are independent."""
    return np.asarray(variances) @ (_weight_matrix(M) ** 2).T


def aggregate(table, M=None):
    """``phi_j = sum_{S not containing j} w(|S|) (v(S+j) - v(S))`` and ``phi0 = v(empty)``."""
    M = table.M if M is None else M
    if M != table.M:
        raise ShapeError(f"table built for M={table.M}, asked to aggregate with M={M}")
    phi = aggregate_values(table.values, M)
    phi_se = phi0_se = None
    if table.variances is not None:
        phi_se = np.sqrt(np.maximum(aggregate_variances(table.variances, M), 0.0))
        phi0_se = float(np.sqrt(max(table.variances[0], 0.0)))
    return Explanation(float(table.values[0]), phi, table.obs_id, table.estimator,
                       phi_se, phi0_se)


def explain_observation(f, estimator, x_star, obs_id=0):
    """Fill a full table with ``estimator`` and aggregate it.

    The grand coalition is pinned to ``f(x_star)``; the empty coalition to the
    estimator's ``v_empty`` when it defines one.
    """
    x_star = np.asarray(x_star, dtype=float)
    try:
        values, variances, diag = estimator.contributions(x_star, obs_id)
    except CondShapError as exc:
        raise EstimationError(obs_id, getattr(exc, "mask", None), exc) from exc
    values = np.array(values, dtype=float)
    values[-1] = f.predict(x_star)
    if getattr(estimator, "v_empty", None) is not None:
        values[0] = estimator.v_empty
    if variances is not None:
        variances = np.array(variances, dtype=float)
        variances[-1] = 0.0
        if getattr(estimator, "v_empty", None) is not None:
            variances[0] = 0.0
    table = ContributionTable(values, estimator.M, getattr(estimator, "name", ""),
                              obs_id, variances)
    exp = aggregate(table)
    exp.diagnostics = dict(diag or {})
    return exp


def explain_many(f, estimator, X, obs_ids=None, threads=1):
    """Explanations for every row of ``X`` in input order.

    Regression estimators are evaluated coalition-by-coalition over all rows
    at once; Monte Carlo estimators row-by-row, optionally on a thread pool.
    Results do not depend on ``threads``.
    """
    X = np.asarray(X, dtype=float)
    ids = list(range(X.shape[0])) if obs_ids is None else [int(i) for i in obs_ids]
    name = getattr(estimator, "name", "")
    if hasattr(estimator, "contribution_matrix"):
        try:
            table = estimator.contribution_matrix(X)
        except CondShapError as exc:
            raise EstimationError(None, getattr(exc, "mask", None), exc) from exc
        table[:, -1] = f.predict_batch(X)
        phi = aggregate_values(table, estimator.M)
        return [Explanation(float(table[i, 0]), phi[i], ids[i], name) for i in range(len(ids))]

    def one(i):
        return explain_observation(f, estimator, X[i], ids[i])

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, range(len(ids))))
    return [one(i) for i in range(len(ids))]


def true_shapley(x_star, params, f, K_truth=DEFAULT_K_TRUTH, seed=0, obs_id=0):
    """Monte Carlo truth from the known Gaussian law with antithetic pairs.

    Every coalition, the empty one included, is estimated from ``K_truth``
    draws of the exact conditional; ``phi_se`` reports the standard errors.
    """
    sampler = GaussianSampler(params, antithetic=True)
    est = MonteCarloEstimator(f, sampler, K_truth, seed, name="truth", empty="sample")
    return explain_observation(f, est, x_star, obs_id)


class ExactGaussianTruth:
    """Closed-form truth for models exposing ``gaussian_expectation``.

    ``v(S)`` is the model's expectation under the exact conditional law with
    the observed coordinates fixed (zero variance), so no sampling is
    involved and the reported standard errors are zero.
    """

    name = "truth"

    def __init__(self, params, f):
        if not getattr(f, "has_gaussian_expectation", False):
            raise InputError("model has no closed-form Gaussian expectation")
        self.params = params
        self.f = f
        self.M = params.M
        n_masks = 1 << self.M
        self._A = {}
        covs = np.zeros((n_masks, self.M, self.M))
        for mask in range(n_masks - 1):
            S = Coalition(mask, self.M)
            A, cond = _conditioning_parts(params, S)
            u = S.complement_indices
            covs[mask][np.ix_(u, u)] = cond
            self._A[mask] = A
        self._covs = covs

    def conditional_means(self, x_star):
        x_star = np.asarray(x_star, dtype=float)
        mu = self.params.mean
        means = np.tile(x_star, (1 << self.M, 1))
        for mask, A in self._A.items():
            S = Coalition(mask, self.M)
            o, u = S.indices, S.complement_indices
            means[mask, u] = mu[u] + A @ (x_star[o] - mu[o])
        return means

    def contributions(self, x_star, obs_id=0):
        values = self.f.gaussian_expectation(self.conditional_means(x_star), self._covs)
        return values, np.zeros_like(values), {}

    def explain(self, x_star, obs_id=0):
        return explain_observation(self.f, self, x_star, obs_id)


def exact_shapley(x_star, params, f, obs_id=0):
    return ExactGaussianTruth(params, f).explain(x_star, obs_id)


def explanations_to_rows(explanations):
    M = explanations[0].M if explanations else 0
    header = ["id", "estimator", "phi0"] + [f"phi{j}" for j in range(1, M + 1)]
    rows = [[str(e.obs_id), e.estimator, repr(float(e.phi0))] + [repr(float(p)) for p in e.phi]
            for e in explanations]
    return header, rows


def write_explanations_csv(explanations, path):
    header, rows = explanations_to_rows(explanations)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def read_explanations_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    out = []
    for r in rows[1:]:
        out.append(Explanation(float(r[2]), np.array([float(v) for v in r[3:]]),
                               int(r[0]), r[1]))
    return out


def write_explanations_json(explanations, path):
    with open(path, "w") as fh:
        json.dump([e.to_dict() for e in explanations], fh, indent=2, sort_keys=True)
        fh.write("\n")


__all__ = [
    "ContributionTable",
    "ExactGaussianTruth",
    "Explanation",
    "aggregate",
    "aggregate_values",
    "aggregate_variances",
    "exact_shapley",
    "explain_many",
    "explain_observation",
    "true_shapley",
]
