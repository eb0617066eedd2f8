"""The two case-study objectives: symmetric matrix factorization and the
in-context-learning quadratic for linear transformers.

Matrix factorization seeks U with U @ U.T equal to a rank-r PSD target;
the ICL problem seeks the inverse of an empirical covariance S through the
quadratic 0.5 * tr((S@Q - I) @ S @ (S@Q - I).T).  Instance generators place
eigenvalues log-uniformly between the extremes so a requested condition
number exercises the whole spectrum, not just its endpoints.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError
from .linalg import check_matrix, spectral_norm
from .rng import RandomStream


@dataclass(frozen=True)
class MfInstance:
    """Rank-r PSD factorization target M = V diag(lam) V.T in d dimensions.

    ``k`` is the search rank of the factor U (k >= r allows
    over-parameterization).
    """

    d: int
    r: int
    k: int
    eigenvalues: np.ndarray  # (r,), descending, positive
    eigenvectors: np.ndarray  # (d, r), orthonormal columns
    target: np.ndarray  # (d, d) cached V diag(lam) V.T

    @property
    def kappa(self) -> float:
        return float(self.eigenvalues[0] / self.eigenvalues[-1])

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[0])

    def iterate_shape(self) -> tuple[int, int]:
        return (self.d, self.k)

    def loss_grad(self, u):
        return mf_loss_grad(self, u)

    def spectral_error(self, u) -> float:
        return mf_spectral_error(self, u)


@dataclass(frozen=True)
class IclInstance:
    """Symmetric positive-definite covariance S with cached eigensystem.

    ``samples`` (when present) is an N x d array whose empirical covariance
    equals S exactly; it feeds the Monte-Carlo loss oracle.
    """

    d: int
    covariance: np.ndarray  # S, (d, d)
    eigenvalues: np.ndarray  # (d,), descending, positive
    eigenvectors: np.ndarray  # (d, d)
    inverse: np.ndarray  # S^-1 via the eigensystem
    samples: np.ndarray | None = None

    @property
    def kappa_s(self) -> float:
        return float(self.eigenvalues[0] / self.eigenvalues[-1])

    @property
    def kappa_eff(self) -> float:
        return self.kappa_s**3

    @property
    def sigma_min(self) -> float:
        return float(self.eigenvalues[-1])

    def iterate_shape(self) -> tuple[int, int]:
        return (self.d, self.d)

    def loss_grad(self, q):
        return icl_loss_grad(self, q)

    def spectral_error(self, q) -> float:
        return icl_spectral_error(self, q)


@dataclass(frozen=True)
class ErrorReport:
    loss: float
    spectral_error: float
    grad_sigma_min: float


def _log_uniform_spectrum(top: float, bottom: float, n: int) -> np.ndarray:
    """n values log-uniformly spaced from top down to bottom, endpoints exact."""
    if n == 1:
        return np.array([top])
    expo = np.arange(n) / (n - 1)
    vals = top * (bottom / top) ** expo
    vals[0], vals[-1] = top, bottom
    return vals


def make_mf_instance(
    stream: RandomStream, d: int, r: int, k: int, kappa: float, lambda_max: float = 1.0
) -> MfInstance:
    """Random factorization instance at a prescribed condition number.

    Eigenvalues run log-uniformly from lambda_max down to lambda_max/kappa;
    the eigenbasis is Haar-distributed.
    """
    if not (1 <= r <= min(d, k)):
        raise PreconditionError(f"need 1 <= r <= min(d, k), got d={d}, r={r}, k={k}")
    if kappa < 1.0:
        raise PreconditionError(f"kappa must be >= 1, got {kappa}")
    if lambda_max <= 0.0:
        raise PreconditionError("lambda_max must be positive")
    if r == 1 and kappa != 1.0:
        raise PreconditionError("a rank-1 spectrum cannot realize kappa > 1")
    lam = (
        np.full(r, lambda_max)
        if kappa == 1.0
        else _log_uniform_spectrum(lambda_max, lambda_max / kappa, r)
    )
    v = stream.haar_orthonormal(d, r)
    target = (v * lam) @ v.T
    return MfInstance(d=d, r=r, k=k, eigenvalues=lam, eigenvectors=v, target=target)


def mf_loss_grad(inst: MfInstance, u):
    """Loss 0.25 * ||U U^T - M||_F^2 and its gradient (U U^T - M) U."""
    u = check_matrix(u, "factor U")
    if u.shape != (inst.d, inst.k):
        raise PreconditionError(f"U must be {inst.d}x{inst.k}, got {u.shape}")
    delta = u @ u.T - inst.target
    loss = 0.25 * float(np.sum(delta * delta))
    return loss, delta @ u


def mf_spectral_error(inst: MfInstance, u) -> float:
    """Spectral-norm recovery error ||U U^T - M||."""
    u = check_matrix(u, "factor U")
    if u.shape != (inst.d, inst.k):
        raise PreconditionError(f"U must be {inst.d}x{inst.k}, got {u.shape}")
    return spectral_norm(u @ u.T - inst.target)


def make_icl_instance(
    stream: RandomStream,
    d: int,
    kappa_s: float,
    sigma_min: float = 1.0,
    with_samples: bool = True,
) -> IclInstance:
    """Random SPD covariance with eigenvalues from kappa_s*sigma_min down to
    sigma_min (log-uniform) and a Haar eigenbasis.

    With ``with_samples``, builds N = d vectors x_i = sqrt(d) * S^(1/2) q_i
    for an orthonormal basis {q_i}, so the empirical covariance
    (1/N) sum x_i x_i^T equals S exactly rather than approximately.
    """
    if kappa_s < 1.0:
        raise PreconditionError(f"kappa_s must be >= 1, got {kappa_s}")
    if sigma_min <= 0.0:
        raise PreconditionError("sigma_min must be positive")
    if d == 1 and kappa_s != 1.0:
        raise PreconditionError("a 1-dimensional spectrum cannot realize kappa_s > 1")
    lam = (
        np.full(d, sigma_min)
        if kappa_s == 1.0
        else _log_uniform_spectrum(kappa_s * sigma_min, sigma_min, d)
    )
    v = stream.haar_orthonormal(d, d)
    cov = (v * lam) @ v.T
    inv = (v / lam) @ v.T
    samples = None
    if with_samples:
        sqrt_cov = (v * np.sqrt(lam)) @ v.T
        basis = stream.haar_orthonormal(d, d)
        samples = (np.sqrt(d) * (sqrt_cov @ basis)).T  # row i is x_i
    return IclInstance(
        d=d, covariance=cov, eigenvalues=lam, eigenvectors=v, inverse=inv, samples=samples
    )


def icl_loss_grad(inst: IclInstance, q):
    """Loss 0.5 * tr((SQ - I) S (SQ - I)^T) and gradient S (SQ - I) S."""
    q = check_matrix(q, "parameter Q")
    if q.shape != (inst.d, inst.d):
        raise PreconditionError(f"Q must be {inst.d}x{inst.d}, got {q.shape}")
    s = inst.covariance
    resid = s @ q - np.eye(inst.d)
    loss = 0.5 * float(np.trace(resid @ s @ resid.T))
    grad = s @ resid @ s
    return loss, grad


def icl_spectral_error(inst: IclInstance, q) -> float:
    """Spectral-norm distance to the minimizer, ||Q - S^-1||."""
    q = check_matrix(q, "parameter Q")
    if q.shape != (inst.d, inst.d):
        raise PreconditionError(f"Q must be {inst.d}x{inst.d}, got {q.shape}")
    return spectral_norm(q - inst.inverse)


def icl_monte_carlo_loss(
    inst: IclInstance, q, stream: RandomStream, n_tasks: int
) -> tuple[float, float]:
    """Monte-Carlo estimate of the ICL prediction risk, with standard error.

    Each task draws w ~ N(0, I) and a query x_q uniform over the sample set,
    predicts w^T S Q x_q against the true label w^T x_q, and averages the
    squared halves.  The closed-form loss is the exact expectation of this
    estimator, so the pair (estimate, standard_error) is an independent
    check on ``icl_loss_grad``.
    """
    q = check_matrix(q, "parameter Q")
    if inst.samples is None:
        raise PreconditionError("instance carries no sample set")
    if n_tasks < 100:
        raise PreconditionError(f"need n_tasks >= 100, got {n_tasks}")
    n_samples = inst.samples.shape[0]
    w = stream.gaussian_matrix(n_tasks, inst.d)
    idx = np.floor(stream.uniforms(n_tasks, 0.0, float(n_samples))).astype(np.intp)
    queries = inst.samples[idx]  # (n_tasks, d)
    # prediction error w^T (S Q - I) x_q, one dot product per task
    mapped = queries @ (inst.covariance @ q - np.eye(inst.d)).T
    vals = 0.5 * np.einsum("ij,ij->i", w, mapped) ** 2
    estimate = float(np.mean(vals))
    stderr = float(np.std(vals, ddof=1) / np.sqrt(n_tasks))
    return estimate, stderr


def evaluate(inst, x, with_grad_sigma_min: bool = True) -> ErrorReport:
    """Loss, spectral error, and gradient sigma_min at a point."""
    loss, grad = inst.loss_grad(x)
    err = inst.spectral_error(x)
    gsm = -1.0
    if with_grad_sigma_min:
        svals = np.linalg.svd(grad, compute_uv=False)
        gsm = float(svals[-1]) if svals.size else 0.0
    return ErrorReport(loss=loss, spectral_error=err, grad_sigma_min=gsm)
