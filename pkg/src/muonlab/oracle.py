"""Decoupled spectral dynamics and inequality checkers.

With an eigen-aligned initialization, the full matrix Muon iteration reduces
exactly to independent scalar recursions, one per eigenvalue:

    factorization:  u_{t+1} = u_t - eta_t * sign((u_t^2 - lam) u_t)
    covariance:     th_{t+1} = th_t - eta_t * sign(lam * th_t - 1)

This module evolves those recursions directly, reconstructs the matrix
iterates they imply, and measures how far a full matrix trajectory drifts
from them.  It also bundles checkers for the per-step error bounds the scalar
dynamics satisfy, plus the randomized sweeps used by verification suites.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError
from .linalg import spectral_norm
from .problems import IclInstance, MfInstance
from .rng import RandomStream


@dataclass(frozen=True)
class ScalarTrace:
    """One scalar recursion: values (length T+1), the etas that drove it
    (length T), and the parameters needed to check its bounds."""

    values: np.ndarray
    etas: np.ndarray
    lambda_star: float
    rho: float
    lambda_max: float | None = None  # factorization traces
    lambda_min: float | None = None  # covariance traces

    def __post_init__(self):
        if self.values.shape[0] != self.etas.shape[0] + 1:
            raise PreconditionError("trace needs len(values) == len(etas) + 1")


# The lemma inequalities are exact-arithmetic statements; the recursion and
# the bounds are both evaluated in float64, so a correct implementation can
# cross a bound by a few ulps.  Violations are classified at this absolute
# resolution (values are O(1)-scale); genuine bound violations are O(eta),
# many orders larger.
FLOAT_SLACK = 1e-12


@dataclass(frozen=True)
class BoundsCheck:
    passed: bool
    worst_margin: float  # min over steps of (bound - |deviation|)
    hypothesis_ok: bool


def scalar_muon_trajectory(
    u0: float,
    lambda_star: float,
    lambda_max: float,
    rho: float,
    T: int,
    c_eta: float | None = None,
    stream: RandomStream | None = None,
    per_step_c: bool = False,
) -> ScalarTrace:
    """Scalar factorization recursion with eta_t = C * sqrt(lambda_max) * rho^t.

    C is either fixed (``c_eta``, or one U[1,2] draw from ``stream``) or
    redrawn from U[1,2] every step (``per_step_c``, which per the varying-
    prefactor analysis needs rho >= 2/3).
    """
    if u0 == 0.0:
        raise PreconditionError("u0 must be nonzero")
    if not 0.0 <= lambda_star <= lambda_max:
        raise PreconditionError("need 0 <= lambda_star <= lambda_max")
    lo_rho = 2.0 / 3.0 if per_step_c else 0.5
    if not lo_rho <= rho < 1.0:
        raise PreconditionError(f"rho must lie in [{lo_rho}, 1), got {rho}")
    base = np.sqrt(lambda_max)
    if not per_step_c and c_eta is None:
        c_eta = stream.uniform(1.0, 2.0) if stream is not None else 1.0
    values = np.empty(T + 1)
    etas = np.empty(T)
    u = float(u0)
    values[0] = u
    for t in range(T):
        c = stream.uniform(1.0, 2.0) if per_step_c else c_eta
        eta = c * base * rho**t
        u = u - eta * float(np.sign((u * u - lambda_star) * u))
        etas[t] = eta
        values[t + 1] = u
    return ScalarTrace(values=values, etas=etas, lambda_star=lambda_star, rho=rho, lambda_max=lambda_max)


def check_scalar_mf_bounds(trace: ScalarTrace) -> BoundsCheck:
    """Fixed-prefactor bounds: ||u_{t+1}| - sqrt(lam)| <= eta_t and
    |u_{t+1}^2 - lam| <= 8 * lambda_max * rho^t for every t."""
    if trace.lambda_max is None:
        raise PreconditionError("not a factorization trace")
    root = np.sqrt(trace.lambda_star)
    hypothesis_ok = abs(trace.values[0]) <= trace.etas[0] and trace.values[0] != 0.0
    worst = np.inf
    for t, eta in enumerate(trace.etas):
        u_next = trace.values[t + 1]
        m1 = eta - abs(abs(u_next) - root)
        m2 = 8.0 * trace.lambda_max * trace.rho**t - abs(u_next * u_next - trace.lambda_star)
        worst = min(worst, m1, m2)
    return BoundsCheck(passed=bool(worst >= -FLOAT_SLACK), worst_margin=float(worst), hypothesis_ok=bool(hypothesis_ok))


def check_scalar_mf_bounds_varying(trace: ScalarTrace) -> BoundsCheck:
    """Per-step-prefactor bounds (rho >= 2/3):
    ||u_t| - sqrt(lam)| <= (2/(1-rho)) * sqrt(lambda_max) * rho^t and
    |u_t^2 - lam| <= (4/(1-rho)^2 + 4/(1-rho)) * lambda_max * rho^t."""
    if trace.lambda_max is None:
        raise PreconditionError("not a factorization trace")
    rho = trace.rho
    if rho < 2.0 / 3.0:
        raise PreconditionError("varying-prefactor bounds need rho >= 2/3")
    root = np.sqrt(trace.lambda_star)
    c1 = 2.0 / (1.0 - rho) * np.sqrt(trace.lambda_max)
    c2 = (4.0 / (1.0 - rho) ** 2 + 4.0 / (1.0 - rho)) * trace.lambda_max
    hypothesis_ok = abs(trace.values[0]) <= trace.etas[0] and trace.values[0] != 0.0
    worst = np.inf
    for t, u in enumerate(trace.values):
        m1 = c1 * rho**t - abs(abs(u) - root)
        m2 = c2 * rho**t - abs(u * u - trace.lambda_star)
        worst = min(worst, m1, m2)
    return BoundsCheck(passed=bool(worst >= -FLOAT_SLACK), worst_margin=float(worst), hypothesis_ok=bool(hypothesis_ok))


def scalar_icl_trajectory(
    lambda_star: float, lambda_min: float, rho: float, c_eta: float, T: int
) -> ScalarTrace:
    """Scalar covariance recursion from th_0 = 0 with
    eta_t = (C / lambda_min) * rho^t."""
    if not 0.0 < lambda_min <= lambda_star:
        raise PreconditionError("need 0 < lambda_min <= lambda_star")
    if not 0.5 <= rho < 1.0:
        raise PreconditionError(f"rho must lie in [1/2, 1), got {rho}")
    if c_eta < 1.0:
        raise PreconditionError("c_eta must be >= 1")
    values = np.empty(T + 1)
    etas = np.empty(T)
    th = 0.0
    values[0] = th
    for t in range(T):
        eta = c_eta / lambda_min * rho**t
        th = th - eta * float(np.sign(lambda_star * th - 1.0))
        etas[t] = eta
        values[t + 1] = th
    return ScalarTrace(values=values, etas=etas, lambda_star=lambda_star, rho=rho, lambda_min=lambda_min)


def check_scalar_icl_bounds(trace: ScalarTrace) -> BoundsCheck:
    """Covariance-trace bound: |th_{t+1} - 1/lam| <= eta_t for every t."""
    if trace.lambda_min is None:
        raise PreconditionError("not a covariance trace")
    target = 1.0 / trace.lambda_star
    hypothesis_ok = trace.values[0] == 0.0
    worst = np.inf
    for t, eta in enumerate(trace.etas):
        worst = min(worst, eta - abs(trace.values[t + 1] - target))
    return BoundsCheck(passed=bool(worst >= -FLOAT_SLACK), worst_margin=float(worst), hypothesis_ok=bool(hypothesis_ok))


@dataclass(frozen=True)
class AlignedInit:
    """Eigen-aligned factor initialization U_0 = V diag(sigma0) R^T.

    ``basis_left`` extends the instance's eigenvectors to k orthonormal
    columns; ``lambdas`` pads the spectrum with zeros past the true rank, so
    every diagonal mode has an eigenvalue to chase.
    """

    matrix: np.ndarray  # (d, k)
    basis_left: np.ndarray  # (d, k), first r columns are the true eigenvectors
    basis_right: np.ndarray  # (k, k) orthogonal
    sigma0: np.ndarray  # (k,)
    lambdas: np.ndarray  # (k,), zeros past rank r


def aligned_mf_init(inst: MfInstance, sigma0, stream: RandomStream) -> AlignedInit:
    """Construct an exactly aligned initialization for a factorization
    instance (requires k <= d so the eigenbasis can be extended).

    ``sigma0`` holds the r initial mode values; modes past the target rank
    start at zero and stay there, which is what keeps the full matrix
    trajectory and the diagonal oracle in exact agreement.  (A nonzero start
    on a zero-eigenvalue mode decays like sigma^3 and its sign drops below
    float noise while eta is still large, so that form cannot be tracked to
    high accuracy by any finite-precision run.)
    """
    sigma0 = np.asarray(sigma0, dtype=np.float64)
    if sigma0.shape != (inst.r,):
        raise PreconditionError(f"sigma0 must have shape ({inst.r},)")
    sigma0 = np.concatenate([sigma0, np.zeros(inst.k - inst.r)])
    if inst.k > inst.d:
        raise PreconditionError("aligned init needs k <= d")
    v = inst.eigenvectors
    if inst.k > inst.r:
        extra = stream.gaussian_matrix(inst.d, inst.k - inst.r)
        # two projection passes keep the completion orthogonal to V to ~1e-15
        extra -= v @ (v.T @ extra)
        extra -= v @ (v.T @ extra)
        q, _ = np.linalg.qr(extra, mode="reduced")
        v = np.hstack([v, q])
    r_basis = stream.haar_orthonormal(inst.k, inst.k)
    lambdas = np.concatenate([inst.eigenvalues, np.zeros(inst.k - inst.r)])
    u0 = (v * sigma0) @ r_basis.T
    return AlignedInit(matrix=u0, basis_left=v, basis_right=r_basis, sigma0=sigma0, lambdas=lambdas)


@dataclass(frozen=True)
class DiagonalTrajectory:
    """Diagonal-mode trajectory: sigmas[t] holds the k mode values at step t,
    and matrix_at(t) rebuilds the implied matrix iterate."""

    sigmas: np.ndarray  # (T+1, k)
    basis_left: np.ndarray
    basis_right: np.ndarray
    lambdas: np.ndarray
    etas: np.ndarray

    def matrix_at(self, t: int) -> np.ndarray:
        return (self.basis_left * self.sigmas[t]) @ self.basis_right.T

    def __len__(self) -> int:
        return self.sigmas.shape[0]


def decoupled_mf_trajectory(init: AlignedInit, etas) -> DiagonalTrajectory:
    """Evolve the k independent factorization modes from an aligned init."""
    etas = np.asarray(etas, dtype=np.float64)
    T = etas.shape[0]
    k = init.sigma0.shape[0]
    sigmas = np.empty((T + 1, k))
    sigmas[0] = init.sigma0
    s = init.sigma0.copy()
    for t in range(T):
        s = s - etas[t] * np.sign((s * s - init.lambdas) * s)
        sigmas[t + 1] = s
    return DiagonalTrajectory(
        sigmas=sigmas,
        basis_left=init.basis_left,
        basis_right=init.basis_right,
        lambdas=init.lambdas,
        etas=etas,
    )


def decoupled_icl_trajectory(inst: IclInstance, etas) -> DiagonalTrajectory:
    """Evolve the d independent covariance modes from Q_0 = 0."""
    etas = np.asarray(etas, dtype=np.float64)
    T = etas.shape[0]
    lam = inst.eigenvalues
    thetas = np.empty((T + 1, inst.d))
    thetas[0] = 0.0
    th = np.zeros(inst.d)
    for t in range(T):
        th = th - etas[t] * np.sign(lam * th - 1.0)
        thetas[t + 1] = th
    return DiagonalTrajectory(
        sigmas=thetas,
        basis_left=inst.eigenvectors,
        basis_right=inst.eigenvectors,
        lambdas=lam,
        etas=etas,
    )


def oracle_vs_full_divergence(oracle: DiagonalTrajectory, iterates) -> float:
    """Max over steps of the spectral-norm gap between a full matrix
    trajectory and the oracle's reconstruction.  Both sides must come from
    the same initialization and the same eta draws."""
    if len(iterates) != len(oracle):
        raise PreconditionError(
            f"trajectory lengths disagree: {len(iterates)} vs {len(oracle)}"
        )
    gap = 0.0
    for t, x in enumerate(iterates):
        gap = max(gap, spectral_norm(x - oracle.matrix_at(t)))
    return gap


# ---------------------------------------------------------------------------
# Randomized sweeps over the scalar lemmas (shared by tests and `verify`).
# ---------------------------------------------------------------------------


def sweep_mf_bounds(n_traces: int, seed: int, rho: float = 0.5, T: int = 45) -> float:
    """Worst margin of the fixed-prefactor factorization bounds over random
    (lambda, C, u0) draws; nonnegative means zero violations.

    T is capped so the geometric bound stays above the float64 rounding
    floor of the recursion itself.
    """
    stream = RandomStream(seed, 0)
    worst = np.inf
    for _ in range(n_traces):
        lambda_max = stream.uniform(0.5, 2.0)
        lambda_star = stream.uniform(0.0, lambda_max)
        c = stream.uniform(1.0, 2.0)
        eta0 = c * np.sqrt(lambda_max)
        u0 = stream.uniform(-eta0, eta0)
        if u0 == 0.0:
            u0 = eta0 / 2.0
        trace = scalar_muon_trajectory(u0, lambda_star, lambda_max, rho, T, c_eta=c)
        worst = min(worst, check_scalar_mf_bounds(trace).worst_margin)
    return float(worst)


def sweep_mf_bounds_varying(
    n_traces: int, seed: int, rho_range: tuple[float, float] = (2.0 / 3.0, 0.95), T: int = 100
) -> float:
    """Worst margin of the per-step-prefactor bounds over random draws."""
    stream = RandomStream(seed, 0)
    worst = np.inf
    for _ in range(n_traces):
        rho = stream.uniform(*rho_range)
        lambda_max = stream.uniform(0.5, 2.0)
        lambda_star = stream.uniform(0.0, lambda_max)
        eta0_min = np.sqrt(lambda_max)
        u0 = stream.uniform(-eta0_min, eta0_min)
        if u0 == 0.0:
            u0 = eta0_min / 2.0
        trace = scalar_muon_trajectory(
            u0, lambda_star, lambda_max, rho, T, stream=stream, per_step_c=True
        )
        worst = min(worst, check_scalar_mf_bounds_varying(trace).worst_margin)
    return float(worst)


def sweep_icl_bounds(n_traces: int, seed: int, rho: float = 0.5, T: int = 45) -> float:
    """Worst margin of the covariance-trace bound over random draws."""
    stream = RandomStream(seed, 0)
    worst = np.inf
    for _ in range(n_traces):
        lambda_min = stream.uniform(0.1, 2.0)
        lambda_star = lambda_min * stream.uniform(1.0, 100.0)
        c = stream.uniform(1.0, 2.0)
        trace = scalar_icl_trajectory(lambda_star, lambda_min, rho, c, T)
        worst = min(worst, check_scalar_icl_bounds(trace).worst_margin)
    return float(worst)


def sweep_never_zero(n_traces: int, steps: int, seed: int, rho: float = 0.5) -> bool:
    """Empirical check that randomly seeded scalar recursions never hit
    exactly zero: True when no iterate equals 0.0 across all traces."""
    stream = RandomStream(seed, 0)
    lambda_max = 1.0
    c = stream.uniforms(n_traces, 1.0, 2.0)
    lam = stream.uniforms(n_traces, 0.0, lambda_max)
    eta0 = c * np.sqrt(lambda_max)
    u = stream.uniforms(n_traces, -1.0, 1.0) * eta0
    u[u == 0.0] = eta0[u == 0.0] / 2.0
    if np.any(u == 0.0):
        return False
    for t in range(steps):
        eta = c * np.sqrt(lambda_max) * rho**t
        u = u - eta * np.sign((u * u - lam) * u)
        if np.any(u == 0.0):
            return False
    return True
