"""Ridge least squares via Cholesky of the regularized normal equations."""

import numpy as np
from scipy import linalg

from .errors import SingularSystemError


def ridge_solve(B, y, lam, penalty=None):
    """Minimize ``||y - B c||^2 + lam * sum(penalty * c**2)``.

    ``penalty`` is a per-column 0/1 vector (default all ones). Falls back to
    a pivoted least-squares factorization when Cholesky fails.
    """
    B = np.asarray(B, dtype=float)
    y = np.asarray(y, dtype=float)
    p = B.shape[1]
    pen = np.ones(p) if penalty is None else np.asarray(penalty, dtype=float)
    if lam == 0 and np.linalg.matrix_rank(B) < p:
        raise SingularSystemError(
            f"design matrix {B.shape} is rank deficient and no ridge penalty was given"
        )
    A = B.T @ B
    A[np.diag_indices(p)] += lam * pen
    rhs = B.T @ y
    try:
        return linalg.cho_solve(linalg.cho_factor(A, lower=True), rhs)
    except linalg.LinAlgError:
        aug = np.vstack([B, np.diag(np.sqrt(lam * pen))])
        rhs_aug = np.concatenate([y, np.zeros((p,) + y.shape[1:])])
        coef, _, rank, _ = linalg.lstsq(aug, rhs_aug, lapack_driver="gelsy")
        if rank < p:
            raise SingularSystemError(f"normal equations singular (rank {rank} < {p})")
        return coef
