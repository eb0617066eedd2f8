"""Matrix sign operators: exact (via SVD), Newton-Schulz, entrywise, diagonal.

``msign_exact(Z)`` is the nearest matrix with orthonormal rows or columns in
Frobenius norm, computed as left @ right.T from the compact SVD.  Components
with sigma below the rank cutoff contribute zero, which extends the operator
continuously to rank-deficient input (msign(0) = 0).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError
from .linalg import check_matrix, svd

# Off-diagonal magnitude above which dsign refuses its input.
_DIAGONAL_TOL = 1e-14


@dataclass(frozen=True)
class NewtonSchulzConfig:
    """Parameters of the cubic Newton-Schulz iteration.

    The cubic map 1.5*X - 0.5*X @ X.T @ X contracts every singular value in
    (0, sqrt(3)) toward 1; Frobenius pre-normalization puts the seed inside
    that basin.
    """

    max_iters: int = 64
    orth_tol: float = 1e-8
    coefficients: tuple[float, float] = (1.5, -0.5)

    def __post_init__(self):
        if self.max_iters < 1:
            raise PreconditionError("max_iters must be >= 1")
        if self.orth_tol <= 0:
            raise PreconditionError("orth_tol must be positive")


@dataclass(frozen=True)
class NewtonSchulzResult:
    matrix: np.ndarray
    iterations: int
    residual: float
    converged: bool


def msign_exact(z) -> np.ndarray:
    """Exact matrix sign U_Z @ V_Z.T from the compact SVD of Z."""
    z = check_matrix(z, "msign input")
    f = svd(z)
    if f.rank == 0:
        return np.zeros_like(z)
    return f.left @ f.right.T


def msign_newton_schulz(z, config: NewtonSchulzConfig | None = None) -> NewtonSchulzResult:
    """Approximate matrix sign via the cubic Newton-Schulz iteration.

    The iteration is seeded at Z / ||Z||_F and stopped once the small-side
    Gram matrix is within ``orth_tol`` of the identity in Frobenius norm.
    Accuracy is only guaranteed in the documented regime
    sigma_min/sigma_max >= 1e-3; outside it the result is returned with
    ``converged=False`` instead of raising, so long experiments can log the
    event and continue.
    """
    z = check_matrix(z, "msign input")
    if config is None:
        config = NewtonSchulzConfig()
    norm = np.linalg.norm(z)
    if norm == 0.0:
        raise PreconditionError("msign_newton_schulz: input is the zero matrix")
    a, b = config.coefficients
    d, k = z.shape
    x = z / norm
    m = min(d, k)
    residual = np.inf
    for it in range(1, config.max_iters + 1):
        if d >= k:
            gram = x.T @ x
            x = a * x + b * (x @ gram)
            gram = x.T @ x
        else:
            gram = x @ x.T
            x = a * x + b * (gram @ x)
            gram = x @ x.T
        residual = float(np.linalg.norm(gram - np.eye(m)))
        if residual <= config.orth_tol:
            return NewtonSchulzResult(matrix=x, iterations=it, residual=residual, converged=True)
    return NewtonSchulzResult(
        matrix=x, iterations=config.max_iters, residual=residual, converged=False
    )


def sign_entrywise(z) -> np.ndarray:
    """Entrywise sign with sign(0) = 0."""
    z = check_matrix(z, "sign input")
    return np.sign(z)


def dsign(d) -> np.ndarray:
    """Sign of a diagonal matrix, applied to the diagonal only.

    Inputs with any off-diagonal entry above 1e-14 in magnitude are rejected:
    this operator is only meaningful on (numerically) diagonal matrices.
    """
    d = check_matrix(d, "dsign input")
    n, m = d.shape
    if n != m:
        raise PreconditionError(f"dsign needs a square diagonal matrix, got {n}x{m}")
    off = d - np.diag(np.diag(d))
    max_off = float(np.max(np.abs(off))) if off.size else 0.0
    if max_off > _DIAGONAL_TOL:
        raise PreconditionError(
            f"dsign input has off-diagonal entries up to {max_off:.3e} (> {_DIAGONAL_TOL})"
        )
    return np.diag(np.sign(np.diag(d)))
