"""Synthetic tabular data: AR(1)-correlated Gaussian features and a
cosine-plus-interaction response."""

import csv
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import DataError, NotSPDError, ParameterError, ShapeError
from .rng import purpose_id, substream

REFERENCE_BETA = (1.0, 0.2, -0.8, 1.0, 0.5, -0.8, 0.6, -0.7, -0.6)
REFERENCE_GAMMA = (0.8, -1.0)
REFERENCE_PAIRS = ((1, 2), (3, 4))
REFERENCE_RHO = 0.5
REFERENCE_M = 8


@dataclass(frozen=True, eq=False)
class GaussianParams:
    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        cov = np.asarray(self.covariance, dtype=float)
        if mean.ndim != 1 or cov.shape != (mean.size, mean.size):
            raise ShapeError(f"mean {mean.shape} and covariance {cov.shape} disagree")
        if not np.allclose(cov, cov.T, atol=1e-12, rtol=0):
            raise NotSPDError("covariance is not symmetric")
        try:
            chol = linalg.cholesky(cov, lower=True)
        except linalg.LinAlgError as exc:
            raise NotSPDError(f"covariance is not positive definite: {exc}") from exc
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)
        object.__setattr__(self, "_chol", chol)

    @property
    def M(self):
        return self.mean.size

    @property
    def cholesky(self):
        return self._chol

    @classmethod
    def estimate(cls, features, jitter=1e-8):
        """Sample mean and covariance with ``jitter`` added to the diagonal."""
        X = np.asarray(features, dtype=float)
        if X.ndim != 2 or X.shape[0] < 2:
            raise DataError("need at least two rows to estimate a covariance")
        cov = np.cov(X, rowvar=False).reshape(X.shape[1], X.shape[1])
        cov = 0.5 * (cov + cov.T) + jitter * np.eye(X.shape[1])
        return cls(X.mean(axis=0), cov)


@dataclass(frozen=True, eq=False)
class Dataset:
    features: np.ndarray
    response: np.ndarray
    role: str = "train"

    def __post_init__(self):
        X = np.asarray(self.features, dtype=float)
        y = np.asarray(self.response, dtype=float)
        if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
            raise ShapeError(f"features {X.shape} and response {y.shape} disagree")
        if self.role not in ("train", "test"):
            raise ParameterError(f"role must be 'train' or 'test', got {self.role!r}")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "response", y)

    @property
    def n(self):
        return self.features.shape[0]

    @property
    def M(self):
        return self.features.shape[1]

    def __len__(self):
        return self.n


@dataclass(frozen=True)
class ResponseCoefficients:
    """``beta[0]`` is the intercept, ``beta[j]`` multiplies ``cos(x_j)``;
    ``gamma[p]`` scales the interaction of the p-th feature pair."""

    beta: tuple
    gamma: tuple
    noise_sd: float = 1.0
    pairs: tuple = REFERENCE_PAIRS

    def __post_init__(self):
        beta = tuple(float(b) for b in self.beta)
        gamma = tuple(float(g) for g in self.gamma)
        pairs = tuple((int(a), int(b)) for a, b in self.pairs)
        M = len(beta) - 1
        if M < 1:
            raise ShapeError("beta needs an intercept and at least one slope")
        if len(gamma) != len(pairs):
            raise ShapeError(f"{len(gamma)} gamma values for {len(pairs)} pairs")
        for a, b in pairs:
            if not (1 <= a <= M and 1 <= b <= M) or a == b:
                raise ParameterError(f"bad interaction pair ({a}, {b}) for M={M}")
        if not self.noise_sd > 0:
            raise ParameterError(f"noise_sd must be positive, got {self.noise_sd}")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "noise_sd", float(self.noise_sd))

    @property
    def M(self):
        return len(self.beta) - 1

    @classmethod
    def reference(cls, noise_sd=1.0):
        return cls(REFERENCE_BETA, REFERENCE_GAMMA, noise_sd, REFERENCE_PAIRS)


def make_ar_covariance(M, rho):
    """``Sigma[j, l] = rho ** |j - l|``."""
    if not abs(rho) < 1:
        raise ParameterError(f"|rho| must be < 1, got {rho}")
    if M < 1:
        raise ParameterError(f"M must be positive, got {M}")
    idx = np.arange(M)
    return float(rho) ** np.abs(idx[:, None] - idx[None, :])


def interaction_g(xj, xk):
    """``xj*xk + xj*xk**2 + xk*xj**2``; broadcasts over arrays."""
    return xj * xk + xj * xk**2 + xk * xj**2


def response_mean(x, coef):
    """Noiseless response for one feature vector or a matrix of rows."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != coef.M:
        raise ShapeError(f"x has {x.shape[-1]} features, coefficients expect {coef.M}")
    beta = np.asarray(coef.beta)
    out = beta[0] + np.cos(x) @ beta[1:]
    for g, (a, b) in zip(coef.gamma, coef.pairs):
        out = out + g * interaction_g(x[..., a - 1], x[..., b - 1])
    return out


def sample_dataset(params, coef, n, seed, role="train"):
    """Draw ``n`` rows ``x ~ N(mean, cov)`` and ``y = response_mean(x) + noise``.

    Features are ``mean + Z @ L.T`` with ``L`` the lower Cholesky factor and
    ``Z`` standard normals, drawn before the noise from the Philox stream
    keyed by ``(seed, role)``.
    """
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    if params.M != coef.M:
        raise ShapeError(f"params have M={params.M}, coefficients M={coef.M}")
    rng = substream(seed, purpose_id("dataset:" + role))
    z = rng.standard_normal((n, params.M))
    X = params.mean + z @ params.cholesky.T
    y = response_mean(X, coef) + coef.noise_sd * rng.standard_normal(n)
    return Dataset(X, y, role)


def reference_setup(M=REFERENCE_M, rho=REFERENCE_RHO, noise_sd=1.0):
    """Zero-mean AR(1) Gaussian parameters and the reference response coefficients."""
    params = GaussianParams(np.zeros(M), make_ar_covariance(M, rho))
    return params, ResponseCoefficients.reference(noise_sd)


def write_dataset_csv(dataset, path):
    """Header ``x1..xM,y``; floats written with ``repr`` so reads round-trip."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x{j + 1}" for j in range(dataset.M)] + ["y"])
        for row, yi in zip(dataset.features, dataset.response):
            w.writerow([repr(float(v)) for v in row] + [repr(float(yi))])


def read_dataset_csv(path, role="train"):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path} is empty")
    header = rows[0]
    M = len(header) - 1
    expected = [f"x{j + 1}" for j in range(M)] + ["y"]
    if header != expected:
        raise DataError(f"unexpected header {header}")
    data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float)
    if data.size == 0:
        data = data.reshape(0, M + 1)
    return Dataset(data[:, :M], data[:, M], role)
