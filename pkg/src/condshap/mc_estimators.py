"""Monte Carlo estimation of the contribution function.

A sampler draws completions ``x_Sbar`` of the unobserved features given the
observed ``x_S = x_star_S``; ``v(S)`` is then estimated by averaging the
model over the merged vectors.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .coalition import Coalition, mask_matrix, masked_merge
from .errors import ConditioningError, DataError, ParameterError, ShapeError
from .rng import as_generator, purpose_id, substream
from .simdata import GaussianParams

DEFAULT_K = 1000
# rows per model call when filling a whole contribution table
_CHUNK_ROWS = 400_000


class EmpiricalFallbackWarning(UserWarning):
    """All kernel weights underflowed; the nearest training row was used."""


@dataclass(frozen=True, eq=False)
class ConditionalGaussian:
    cond_mean: np.ndarray
    cond_cov: np.ndarray


def _psd_factor(C, tol=1e-10):
    """Lower factor ``L`` with ``L @ L.T ~= C`` for a PSD matrix."""
    if C.size == 0:
        return C.copy()
    try:
        return linalg.cholesky(C, lower=True)
    except linalg.LinAlgError:
        w, V = linalg.eigh(0.5 * (C + C.T))
        if w.min() < -tol * max(1.0, w.max()):
            raise
        return V * np.sqrt(np.clip(w, 0.0, None))


def _conditioning_parts(params, S):
    """``A = Sigma_{Sbar,S} Sigma_{S,S}^{-1}`` and the conditional covariance."""
    o, u = S.indices, S.complement_indices
    cov = params.covariance
    if o.size == 0:
        return np.zeros((u.size, 0)), cov.copy()
    try:
        cf = linalg.cho_factor(cov[np.ix_(o, o)], lower=True)
    except linalg.LinAlgError as exc:
        raise ConditioningError(
            f"observed covariance block is singular for coalition {S!r}", mask=S.mask
        ) from exc
    cross = cov[np.ix_(u, o)]
    A = linalg.cho_solve(cf, cross.T).T
    cond = cov[np.ix_(u, u)] - A @ cross.T
    return A, 0.5 * (cond + cond.T)


def gaussian_condition(params, S, x_star):
    """Exact law of ``x_Sbar`` given ``x_S = x_star_S`` under ``N(mean, cov)``."""
    x_star = np.asarray(x_star, dtype=float)
    if x_star.shape != (params.M,) or S.M != params.M:
        raise ShapeError(f"x_star {x_star.shape} / coalition M={S.M} vs params M={params.M}")
    if S.is_grand():
        raise ParameterError("nothing to condition: coalition contains every feature")
    A, cond = _conditioning_parts(params, S)
    o, u = S.indices, S.complement_indices
    mean = params.mean[u] + A @ (x_star[o] - params.mean[o])
    return ConditionalGaussian(mean, cond)


def _check_K(K):
    if K < 1:
        raise ParameterError(f"K must be >= 1, got {K}")


class IndependenceSampler:
    """Completions are unobserved coordinates of uniformly drawn training rows."""

    name = "independence"

    def __init__(self, train):
        if train.n == 0:
            raise DataError("training set is empty")
        self.X = train.features
        self.M = train.M

    def sample(self, S, x_star, K, rng):
        _check_K(K)
        rng = as_generator(rng)
        rows = rng.integers(0, self.X.shape[0], size=K)
        return self.X[np.ix_(rows, S.complement_indices)]


class EmpiricalSampler:
    """Kernel-weighted resampling of training rows.

    Row ``i`` gets weight ``exp(-d_i^2 / (2 h^2))`` with ``d_i`` the Mahalanobis
    distance between its observed coordinates and ``x_star_S`` (training
    covariance of ``x_S``) and ``h = bandwidth_scale * sqrt(|S|)`` unless a
    fixed ``bandwidth`` is given.
    """

    name = "empirical"

    def __init__(self, train, bandwidth=None, bandwidth_scale=0.1):
        if train.n == 0:
            raise DataError("training set is empty")
        if bandwidth is not None and not bandwidth > 0:
            raise ParameterError(f"bandwidth must be positive, got {bandwidth}")
        self.X = train.features
        self.M = train.M
        self.bandwidth = bandwidth
        self.bandwidth_scale = float(bandwidth_scale)
        cov = np.atleast_2d(np.cov(self.X, rowvar=False)) if train.n > 1 else np.eye(self.M)
        self._cov = cov
        self._factors = {}
        self._independent = IndependenceSampler(train)

    def _factor(self, S):
        L = self._factors.get(S.mask)
        if L is None:
            o = S.indices
            block = self._cov[np.ix_(o, o)]
            try:
                L = linalg.cholesky(block, lower=True)
            except linalg.LinAlgError:
                L = linalg.cholesky(block + 1e-8 * np.eye(o.size), lower=True)
            self._factors[S.mask] = L
        return L

    def h(self, S):
        if self.bandwidth is not None:
            return self.bandwidth
        return self.bandwidth_scale * np.sqrt(S.size)

    def kernel_weights(self, S, x_star):
        """Normalized row weights and whether the nearest-row fallback fired."""
        o = S.indices
        diff = self.X[:, o] - np.asarray(x_star, dtype=float)[o]
        z = linalg.solve_triangular(self._factor(S), diff.T, lower=True)
        d2 = np.einsum("ij,ij->j", z, z)
        w = np.exp(-d2 / (2.0 * self.h(S) ** 2))
        total = w.sum()
        if total > 0 and np.isfinite(total):
            return w / total, False
        w = np.zeros_like(d2)
        w[np.argmin(d2)] = 1.0
        return w, True

    def sample_with_diagnostics(self, S, x_star, K, rng):
        _check_K(K)
        if S.is_empty():
            return self._independent.sample(S, x_star, K, rng), False
        rng = as_generator(rng)
        w, fallback = self.kernel_weights(S, x_star)
        rows = rng.choice(self.X.shape[0], size=K, replace=True, p=w)
        return self.X[np.ix_(rows, S.complement_indices)], fallback

    def sample(self, S, x_star, K, rng):
        out, fallback = self.sample_with_diagnostics(S, x_star, K, rng)
        if fallback:
            warnings.warn(
                f"all kernel weights vanished for coalition {S!r}; using nearest row",
                EmpiricalFallbackWarning,
                stacklevel=2,
            )
        return out


class GaussianSampler:
    """Draws from the exact Gaussian conditional of ``params``.

    With ``antithetic=True`` the standard normals come in ``(z, -z)`` pairs.
    """

    name = "gaussian"

    def __init__(self, params, antithetic=False):
        self.params = params
        self.M = params.M
        self.antithetic = bool(antithetic)
        self._parts = {}

    @classmethod
    def from_data(cls, train, jitter=1e-8, antithetic=False):
        return cls(GaussianParams.estimate(train.features, jitter), antithetic)

    def _cached(self, S):
        parts = self._parts.get(S.mask)
        if parts is None:
            A, cond = _conditioning_parts(self.params, S)
            parts = (A, _psd_factor(cond))
            self._parts[S.mask] = parts
        return parts

    def conditional_mean(self, S, x_star):
        A, _ = self._cached(S)
        o, u = S.indices, S.complement_indices
        return self.params.mean[u] + A @ (np.asarray(x_star, dtype=float)[o] - self.params.mean[o])

    def _normals(self, rng, K, d):
        if not self.antithetic:
            return rng.standard_normal((K, d))
        half = rng.standard_normal(((K + 1) // 2, d))
        return np.concatenate([half, -half])[:K]

    def sample(self, S, x_star, K, rng):
        _check_K(K)
        rng = as_generator(rng)
        _, L = self._cached(S)
        z = self._normals(rng, K, S.M - S.size)
        return self.conditional_mean(S, x_star) + z @ L.T


def _draw(sampler, S, x_star, K, rng):
    if hasattr(sampler, "sample_with_diagnostics"):
        return sampler.sample_with_diagnostics(S, x_star, K, rng)
    return sampler.sample(S, x_star, K, rng), False


def _mean_and_var(values, antithetic):
    """Monte Carlo mean of ``values`` along the last axis and its variance."""
    K = values.shape[-1]
    mean = values.mean(axis=-1)
    if antithetic and K >= 4 and K % 2 == 0:
        h = K // 2
        pairs = 0.5 * (values[..., :h] + values[..., h:])
        var = pairs.var(axis=-1, ddof=1) / h
    elif K > 1:
        var = values.var(axis=-1, ddof=1) / K
    else:
        var = np.full(mean.shape, np.nan)
    return mean, var


def estimate_v_mc(f, sampler, S, x_star, K, rng):
    """``(1/K) sum_k f(x_star_S, x_Sbar^(k))``; exactly ``f(x_star)`` for the
    grand coalition."""
    _check_K(K)
    x_star = np.asarray(x_star, dtype=float)
    if S.is_grand():
        return f.predict(x_star)
    completions, _ = _draw(sampler, S, x_star, K, rng)
    background = np.zeros((K, S.M))
    background[:, S.complement_indices] = completions
    return float(f.predict_batch(masked_merge(x_star, background, S)).mean())


class MonteCarloEstimator:
    """Fills contribution tables by Monte Carlo with one Philox substream per
    ``(estimator, observation, coalition)``.

    ``empty`` selects ``v(empty set)``: ``"train_mean"`` uses the mean of the
    model over the training rows (requires ``train``), ``"sample"`` draws
    unconditionally from the sampler like every other coalition.
    """

    def __init__(self, model, sampler, K=DEFAULT_K, seed=0, name=None,
                 train=None, empty="train_mean"):
        _check_K(K)
        self.model = model
        self.sampler = sampler
        self.K = int(K)
        self.seed = int(seed)
        self.name = name or sampler.name
        self.M = sampler.M
        self.empty = empty
        self.antithetic = bool(getattr(sampler, "antithetic", False))
        if empty == "train_mean":
            if train is None:
                raise ParameterError("empty='train_mean' needs the training data")
            self.v_empty = float(model.predict_batch(train.features).mean())
        elif empty == "sample":
            self.v_empty = None
        else:
            raise ParameterError(f"unknown empty-coalition rule {empty!r}")
        self._purpose = purpose_id("mc:" + self.name)

    def rng_for(self, obs_id, mask):
        return substream(self.seed, self._purpose, obs_id, mask)

    def estimate_v(self, S, x_star, obs_id=0):
        if S.is_empty() and self.v_empty is not None:
            return self.v_empty
        return estimate_v_mc(self.model, self.sampler, S, x_star, self.K,
                             self.rng_for(obs_id, S.mask))

    def contributions(self, x_star, obs_id=0):
        """Values, Monte Carlo variances and fallback count over all masks."""
        x_star = np.asarray(x_star, dtype=float)
        M = self.M
        n_masks = 1 << M
        values = np.zeros(n_masks)
        var = np.zeros(n_masks)
        values[-1] = self.model.predict(x_star)
        first = 1 if self.v_empty is not None else 0
        if self.v_empty is not None:
            values[0] = self.v_empty
        bits = mask_matrix(M)
        masks = list(range(first, n_masks - 1))
        per_chunk = max(1, _CHUNK_ROWS // self.K)
        fallbacks = 0
        for start in range(0, len(masks), per_chunk):
            chunk = masks[start:start + per_chunk]
            rows = np.empty((len(chunk), self.K, M))
            for r, mask in enumerate(chunk):
                S = Coalition(mask, M)
                comp, fb = _draw(self.sampler, S, x_star, self.K, self.rng_for(obs_id, mask))
                fallbacks += int(fb)
                rows[r] = np.where(bits[mask], x_star, 0.0)
                rows[r][:, ~bits[mask]] = comp
            preds = self.model.predict_batch(rows.reshape(-1, M)).reshape(len(chunk), self.K)
            values[chunk], var[chunk] = _mean_and_var(preds, self.antithetic)
        return values, var, {"fallbacks": fallbacks}


__all__ = [
    "ConditionalGaussian",
    "EmpiricalFallbackWarning",
    "EmpiricalSampler",
    "GaussianSampler",
    "IndependenceSampler",
    "MonteCarloEstimator",
    "estimate_v_mc",
    "gaussian_condition",
]
