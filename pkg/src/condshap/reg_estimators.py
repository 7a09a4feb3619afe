"""Regression estimation of the contribution function.

``v(S)`` is the minimizer of the conditional squared error, so a regression
of ``f(x)`` on ``x_S`` estimates it. Either one regression is fitted per
coalition (separate) or a single one on mask-augmented inputs (surrogate).
"""

import functools
import itertools

import numpy as np
from scipy.spatial import cKDTree

from .coalition import Coalition
from .errors import ConsistencyError, DataError, FitError, ParameterError, ShapeError
from .rng import as_generator
from .ridge import ridge_solve

DEFAULT_FAMILY = "poly"


def poly_features(Z, degree=2):
    """All monomials of ``Z`` up to ``degree`` (constant first), then ``cos z``."""
    n, d = Z.shape
    cols = [np.ones(n)]
    for deg in range(1, degree + 1):
        for combo in itertools.combinations_with_replacement(range(d), deg):
            cols.append(np.prod(Z[:, combo], axis=1))
    return np.column_stack(cols + [np.cos(Z)])


def linear_features(Z):
    return np.column_stack([np.ones(Z.shape[0]), Z])


class RidgeRegressor:
    """Ridge on a fixed feature map; the intercept column is not penalized."""

    def __init__(self, features, lam):
        self.features = features
        self.lam = float(lam)
        self.coef = None

    def fit(self, Z, y):
        B = self.features(Z)
        pen = np.ones(B.shape[1])
        pen[0] = 0.0
        lam = self.lam if self.lam > 0 else 1e-12
        self.coef = ridge_solve(B, y, lam, pen)
        return self

    def predict(self, Z):
        return self.features(Z) @ self.coef


class KNNRegressor:
    """k-nearest-neighbour mean, inverse-distance weighted or uniform."""

    def __init__(self, k=25, weights="distance"):
        if weights not in ("distance", "uniform"):
            raise ParameterError(f"unknown kNN weighting {weights!r}")
        self.k = int(k)
        self.weights = weights

    def fit(self, Z, y):
        self.tree = cKDTree(Z)
        self.y = np.asarray(y, dtype=float)
        self.k_eff = min(self.k, self.y.size)
        return self

    def predict(self, Z):
        d, idx = self.tree.query(Z, k=self.k_eff)
        d = d.reshape(Z.shape[0], self.k_eff)
        idx = idx.reshape(Z.shape[0], self.k_eff)
        yy = self.y[idx]
        if self.weights == "uniform":
            return yy.mean(axis=1)
        exact = d <= 1e-12
        w = np.where(exact.any(axis=1, keepdims=True), exact.astype(float), 1.0 / np.maximum(d, 1e-12))
        return (w * yy).sum(axis=1) / w.sum(axis=1)


def make_regressor(family=DEFAULT_FAMILY, lam=1e-4, k=25, weights="distance", degree=2):
    """``"poly"``: ridge on monomials up to ``degree`` plus cosines;
    ``"linear"``: ridge on ``[1, z]``; ``"knn"``: k-nearest neighbours."""
    if family == "poly":
        if degree < 1:
            raise ParameterError(f"degree must be >= 1, got {degree}")
        return RidgeRegressor(functools.partial(poly_features, degree=int(degree)), lam)
    if family == "linear":
        return RidgeRegressor(linear_features, lam)
    if family == "knn":
        return KNNRegressor(k, weights)
    raise ParameterError(f"unknown regression family {family!r}")


def _targets(train, f):
    if train.n == 0:
        raise DataError("training set is empty")
    return f.predict_batch(train.features)


class _RegressionEstimator:
    """Shared query logic: empty coalition gives the training mean of ``f``,
    the grand coalition gives ``f(x_star)``."""

    def estimate_v(self, S, x_star, obs_id=0):
        return estimate_v_reg(self, S, x_star)

    def contributions(self, x_star, obs_id=0):
        x_star = np.asarray(x_star, dtype=float)
        return self.contribution_matrix(x_star[None, :])[0], None, {}

    def contribution_matrix(self, X):
        """``(N, 2**M)`` table of estimates for every row of ``X``."""
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.M:
            raise ShapeError(f"expected (N, {self.M}) rows, got {X.shape}")
        n_masks = 1 << self.M
        out = np.empty((X.shape[0], n_masks))
        out[:, 0] = self.v_empty
        out[:, -1] = self.model.predict_batch(X)
        for mask in range(1, n_masks - 1):
            out[:, mask] = self._predict_masked(Coalition(mask, self.M), X)
        return out


class SeparateRegressions(_RegressionEstimator):
    def __init__(self, model, regressions, v_empty, family, hyper, M):
        self.model = model
        self.regressions = regressions
        self.v_empty = v_empty
        self.family = family
        self.hyper = hyper
        self.M = M

    def _predict_masked(self, S, X):
        g = self.regressions.get(S.mask)
        if g is None:
            raise ConsistencyError(f"no regression fitted for coalition {S!r}")
        return g.predict(X[:, S.indices])


def fit_separate(train, f, family=DEFAULT_FAMILY, **hyper):
    """One regression of ``f(x)`` on ``x_S`` per coalition ``0 < |S| < M``."""
    y = _targets(train, f)
    M = train.M
    regressions = {}
    for mask in range(1, (1 << M) - 1):
        S = Coalition(mask, M)
        try:
            regressions[mask] = make_regressor(family, **hyper).fit(train.features[:, S.indices], y)
        except Exception as exc:
            raise FitError(f"fit failed for coalition {S!r}: {exc}", mask=mask) from exc
    return SeparateRegressions(f, regressions, float(y.mean()), family, hyper, M)


def surrogate_inputs(X, bits):
    """Mask-augmented inputs: unobserved values zeroed, then the mask bits."""
    bits = np.broadcast_to(bits, X.shape)
    return np.hstack([np.where(bits, X, 0.0), bits.astype(float)])


class SurrogateRegression(_RegressionEstimator):
    def __init__(self, model, regression, v_empty, family, hyper, M, coalitions_per_row):
        self.model = model
        self.regression = regression
        self.v_empty = v_empty
        self.family = family
        self.hyper = hyper
        self.M = M
        self.coalitions_per_row = coalitions_per_row

    @property
    def input_dim(self):
        return 2 * self.M

    def _predict_masked(self, S, X):
        return self.regression.predict(surrogate_inputs(X, S.bits))


def fit_surrogate(train, f, coalitions_per_row=16, family=DEFAULT_FAMILY, rng=0, **hyper):
    """Single regression over ``(masked x, mask bits)`` inputs.

    Each training row is paired with ``coalitions_per_row`` coalitions drawn
    uniformly from the non-trivial ones.
    """
    if coalitions_per_row < 1:
        raise ParameterError(f"coalitions_per_row must be >= 1, got {coalitions_per_row}")
    y = _targets(train, f)
    M = train.M
    if M < 2:
        raise ParameterError("a surrogate needs at least two features")
    rng = as_generator(rng)
    masks = rng.integers(1, (1 << M) - 1, size=(train.n, coalitions_per_row))
    bits = (masks[..., None] >> np.arange(M)) & 1 == 1
    X = np.repeat(train.features, coalitions_per_row, axis=0)
    Z = surrogate_inputs(X, bits.reshape(-1, M))
    try:
        reg = make_regressor(family, **hyper).fit(Z, np.repeat(y, coalitions_per_row))
    except Exception as exc:
        raise FitError(f"surrogate fit failed: {exc}") from exc
    return SurrogateRegression(f, reg, float(y.mean()), family, hyper, M, coalitions_per_row)


def estimate_v_reg(model, S, x_star):
    """Regression estimate of ``v(S)`` at ``x_star``."""
    x_star = np.asarray(x_star, dtype=float)
    if S.M != model.M or x_star.shape != (model.M,):
        raise ShapeError(f"coalition/x_star do not match a model fitted with M={model.M}")
    if S.is_empty():
        return model.v_empty
    if S.is_grand():
        return model.model.predict(x_star)
    return float(model._predict_masked(S, x_star[None, :])[0])
