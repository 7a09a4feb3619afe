"""Coalitions of features as bitmasks.

Feature ``j`` (1-based, as in the usual Shapley notation) is bit ``j - 1``
of the mask, so array column ``c`` corresponds to bit ``c``.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import CapacityError, ParameterError, ShapeError

MAX_FEATURES = 20


@dataclass(frozen=True, order=True)
class Coalition:
    """A subset of ``{1..M}`` stored as an ``M``-bit mask."""

    mask: int
    M: int

    def __post_init__(self):
        if self.M < 1:
            raise ParameterError(f"M must be positive, got {self.M}")
        if self.mask < 0 or self.mask >> self.M:
            raise ParameterError(f"mask {self.mask} has bits above position {self.M}")

    @classmethod
    def from_features(cls, features, M):
        """Build from 1-based feature indices."""
        mask = 0
        for j in features:
            if not 1 <= j <= M:
                raise ParameterError(f"feature index {j} outside 1..{M}")
            mask |= 1 << (j - 1)
        return cls(mask, M)

    @classmethod
    def grand(cls, M):
        return cls((1 << M) - 1, M)

    @property
    def size(self):
        return bin(self.mask).count("1")

    @property
    def features(self):
        """Sorted 1-based feature indices in the coalition."""
        return tuple(j + 1 for j in range(self.M) if self.mask >> j & 1)

    @property
    def indices(self):
        """0-based column indices of observed features."""
        return np.flatnonzero(self.bits)

    @property
    def complement_indices(self):
        """0-based column indices of unobserved features."""
        return np.flatnonzero(~self.bits)

    @property
    def bits(self):
        return (self.mask >> np.arange(self.M)) & 1 == 1

    def complement(self):
        return Coalition(((1 << self.M) - 1) ^ self.mask, self.M)

    def with_feature(self, j):
        return Coalition(self.mask | 1 << (j - 1), self.M)

    def __contains__(self, j):
        return bool(self.mask >> (j - 1) & 1)

    def __len__(self):
        return self.size

    def is_empty(self):
        return self.mask == 0

    def is_grand(self):
        return self.mask == (1 << self.M) - 1

    def __repr__(self):
        return "{" + ",".join(str(j) for j in self.features) + "}"


def _check_M(M):
    if not 1 <= M <= MAX_FEATURES:
        raise CapacityError(
            f"exact enumeration supports 1 <= M <= {MAX_FEATURES}, got M={M}"
        )


def enumerate_coalitions(M):
    """All ``2**M`` coalitions in ascending mask order (empty set first)."""
    _check_M(M)
    return [Coalition(mask, M) for mask in range(1 << M)]


@lru_cache(maxsize=None)
def _mask_matrix(M):
    masks = np.arange(1 << M)[:, None]
    bits = (masks >> np.arange(M)) & 1 == 1
    bits.setflags(write=False)
    return bits


def mask_matrix(M):
    """Boolean ``(2**M, M)`` array; row ``mask`` holds that coalition's bits."""
    _check_M(M)
    return _mask_matrix(M)


def coalition_sizes(M):
    return mask_matrix(M).sum(axis=1)


def shapley_weight(s, M):
    """Shapley kernel ``s! (M-s-1)! / M!`` for a coalition of size ``s``.

    Evaluated as a running product of ratios, never forming factorials.
    """
    if M < 1:
        raise ParameterError(f"M must be positive, got {M}")
    if not 0 <= s <= M - 1:
        raise ParameterError(f"coalition size must lie in 0..{M - 1}, got {s}")
    w = 1.0 / M
    for i in range(1, s + 1):
        w *= i / (M - i)
    return w


def masked_merge(foreground, background, S):
    """Take coordinates in ``S`` from ``foreground`` and the rest from ``background``.

    ``background`` may be a single vector or a ``(K, M)`` matrix of rows.
    """
    fg = np.asarray(foreground, dtype=float)
    bg = np.asarray(background, dtype=float)
    if fg.ndim != 1 or bg.shape[-1] != fg.shape[0] or fg.shape[0] != S.M:
        raise ShapeError(
            f"cannot merge foreground {fg.shape} with background {bg.shape} for M={S.M}"
        )
    return np.where(S.bits, fg, bg)
