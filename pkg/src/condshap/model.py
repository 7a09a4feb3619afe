"""Predictive models to be explained.

Every model offers ``predict`` for one feature vector and ``predict_batch``
for a matrix of rows. Models whose form is a fixed basis expansion also
offer ``gaussian_expectation``, the exact mean of the prediction when the
input is multivariate normal (possibly degenerate). The truth oracle uses
it to compute conditional Shapley values without Monte Carlo error.
"""

import json

import numpy as np

from .errors import InputError, ShapeError
from .ridge import ridge_solve
from .simdata import REFERENCE_PAIRS


class PredictiveModel:
    """Base class; subclasses implement ``_predict_rows``."""

    M = None

    def predict(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim != 1:
            raise ShapeError(f"predict expects one feature vector, got shape {x.shape}")
        return float(self.predict_batch(x[None, :])[0])

    def predict_batch(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or (self.M is not None and X.shape[1] != self.M):
            raise ShapeError(f"expected an (N, {self.M}) matrix, got {X.shape}")
        if not np.isfinite(X).all():
            raise InputError("non-finite value in model input")
        return self._predict_rows(X)

    def _predict_rows(self, X):
        raise NotImplementedError

    @property
    def has_gaussian_expectation(self):
        return hasattr(self, "gaussian_expectation")


class ConstantModel(PredictiveModel):
    def __init__(self, value, M=None):
        self.value = float(value)
        self.M = M

    def _predict_rows(self, X):
        return np.full(X.shape[0], self.value)

    def gaussian_expectation(self, means, covs):
        return np.full(np.asarray(means).shape[0], self.value)


class LinearModel(PredictiveModel):
    """``f(x) = intercept + beta @ x``."""

    def __init__(self, beta, intercept=0.0):
        self.beta = np.asarray(beta, dtype=float)
        self.intercept = float(intercept)
        self.M = self.beta.size

    def _predict_rows(self, X):
        return self.intercept + (X * self.beta).sum(axis=1)

    def gaussian_expectation(self, means, covs):
        return self.intercept + np.asarray(means) @ self.beta


class FunctionModel(PredictiveModel):
    """Wrap a vectorized callable mapping ``(N, M)`` rows to ``(N,)``."""

    def __init__(self, fn, M):
        self.fn = fn
        self.M = M

    def _predict_rows(self, X):
        return np.asarray(self.fn(X), dtype=float).reshape(X.shape[0])


class Basis:
    """Intercept, ``cos(x_j)`` for every feature, and for every pair ``(j, k)``
    the monomials ``x_j x_k``, ``x_j x_k^2`` and ``x_k x_j^2``."""

    def __init__(self, M, pairs=REFERENCE_PAIRS):
        self.M = int(M)
        self.pairs = tuple((int(a), int(b)) for a, b in pairs)
        for a, b in self.pairs:
            if not (1 <= a <= self.M and 1 <= b <= self.M) or a == b:
                raise ShapeError(f"bad interaction pair ({a}, {b}) for M={self.M}")

    @property
    def size(self):
        return 1 + self.M + 3 * len(self.pairs)

    @property
    def term_names(self):
        names = ["1"] + [f"cos(x{j})" for j in range(1, self.M + 1)]
        for a, b in self.pairs:
            names += [f"x{a}*x{b}", f"x{a}*x{b}^2", f"x{b}*x{a}^2"]
        return names

    def expand(self, X):
        X = np.asarray(X, dtype=float)
        cols = [np.ones(X.shape[0]), *np.cos(X).T]
        for a, b in self.pairs:
            xa, xb = X[:, a - 1], X[:, b - 1]
            cols += [xa * xb, xa * xb**2, xb * xa**2]
        return np.column_stack(cols)

    def gaussian_expand(self, means, covs):
        """Expected basis rows under ``N(means[c], covs[c])`` for each ``c``.

        Uses ``E cos X = cos(m) exp(-v/2)``, ``E[X_a X_b] = m_a m_b + C_ab`` and
        ``E[X_a X_b^2] = m_a m_b^2 + m_a C_bb + 2 m_b C_ab``.
        """
        m = np.asarray(means, dtype=float)
        C = np.asarray(covs, dtype=float)
        var = np.diagonal(C, axis1=1, axis2=2)
        cols = [np.ones(m.shape[0]), *(np.cos(m) * np.exp(-0.5 * var)).T]
        for a, b in self.pairs:
            i, k = a - 1, b - 1
            ma, mb = m[:, i], m[:, k]
            caa, cbb, cab = C[:, i, i], C[:, k, k], C[:, i, k]
            cols += [
                ma * mb + cab,
                ma * mb**2 + ma * cbb + 2 * mb * cab,
                mb * ma**2 + mb * caa + 2 * ma * cab,
            ]
        return np.column_stack(cols)


class BasisModel(PredictiveModel):
    """Linear model on a :class:`Basis` expansion."""

    def __init__(self, basis, coef, lam=0.0, r2=None):
        self.basis = basis
        self.coef = np.asarray(coef, dtype=float)
        if self.coef.size != basis.size:
            raise ShapeError(f"{self.coef.size} coefficients for {basis.size} basis terms")
        self.lam = float(lam)
        self.r2 = r2
        self.M = basis.M

    def _predict_rows(self, X):
        # row-wise reduction keeps each row's result independent of batch size
        return (self.basis.expand(X) * self.coef).sum(axis=1)

    def gaussian_expectation(self, means, covs):
        return self.basis.gaussian_expand(means, covs) @ self.coef

    def to_dict(self):
        return {
            "kind": "basis",
            "M": self.M,
            "pairs": [list(p) for p in self.basis.pairs],
            "terms": self.basis.term_names,
            "coefficients": [float(c) for c in self.coef],
            "lambda": self.lam,
            "train_r2": self.r2,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d):
        basis = Basis(d["M"], [tuple(p) for p in d["pairs"]])
        if list(d["terms"]) != basis.term_names:
            raise ShapeError("serialized term list does not match the basis")
        return cls(basis, d["coefficients"], d.get("lambda", 0.0), d.get("train_r2"))


def fit_basis_model(train, pairs=REFERENCE_PAIRS, lam=1e-6):
    """Ridge fit of the response on the basis expansion of the features."""
    basis = Basis(train.M, pairs)
    B = basis.expand(train.features)
    y = train.response
    coef = ridge_solve(B, y, lam)
    resid = y - B @ coef
    sst = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(resid @ resid) / sst if sst > 0 else 1.0
    return BasisModel(basis, coef, lam, r2)


def analytic_model(coef):
    """The noiseless data-generating mean as a :class:`BasisModel`."""
    basis = Basis(coef.M, coef.pairs)
    c = [coef.beta[0], *coef.beta[1:]]
    for g in coef.gamma:
        c += [g, g, g]
    return BasisModel(basis, c)
