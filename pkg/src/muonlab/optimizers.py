"""Optimizer steps and learning-rate schedules.

Muon replaces the gradient by its matrix sign (all nonzero singular values
snapped to 1), so each step moves a fixed spectral distance eta_t; linear
convergence therefore needs geometrically decaying learning rates.  GD,
SignGD, and ScaledGD are the comparison baselines.  ``run_trajectory`` drives
any of them over a problem instance and logs one record per iterate.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import NumericalDivergenceError, PreconditionError, RankDeficiencyError
from .linalg import check_matrix, symmetric_eig
from .msign import NewtonSchulzConfig, msign_exact, msign_newton_schulz, sign_entrywise
from .rng import RandomStream

ALGORITHMS = ("muon", "gd", "signgd", "scaledgd")

# Above this dimension the per-step sigma_min(grad) SVD is skipped and the
# record carries -1.0, keeping large sweeps inside their runtime budget.
SIGMA_MIN_DIM_CAP = 64


class ExponentialSchedule:
    """eta_t = C * base_scale * rho^t with prefactor C in [1, 2].

    ``prefactor_mode`` is "fixed" (C sampled once, on the first call) or
    "per_iteration" (a fresh C every call).  Passing ``fixed_prefactor`` pins
    C without consuming randomness, for deterministic runs.
    """

    def __init__(
        self,
        rho: float,
        base_scale: float,
        prefactor_mode: str = "fixed",
        prefactor_range: tuple[float, float] = (1.0, 2.0),
        fixed_prefactor: float | None = None,
    ):
        if not 0.5 <= rho < 1.0:
            raise PreconditionError(f"rho must lie in [1/2, 1), got {rho}")
        if base_scale <= 0.0:
            raise PreconditionError("base_scale must be positive")
        if prefactor_mode not in ("fixed", "per_iteration"):
            raise PreconditionError(f"unknown prefactor_mode {prefactor_mode!r}")
        self.rho = rho
        self.base_scale = base_scale
        self.prefactor_mode = prefactor_mode
        self.prefactor_range = prefactor_range
        self._prefactor = fixed_prefactor

    def eta(self, t: int, current_loss: float | None = None, stream: RandomStream | None = None) -> float:
        lo, hi = self.prefactor_range
        if self.prefactor_mode == "per_iteration":
            c = stream.uniform(lo, hi) if stream is not None else 1.0
        else:
            if self._prefactor is None:
                self._prefactor = stream.uniform(lo, hi) if stream is not None else 1.0
            c = self._prefactor
        return c * self.base_scale * self.rho**t


class PlateauSchedule:
    """Constant eta, cut by ``decay_factor`` after ``patience`` consecutive
    non-improving losses.

    The first call records a baseline loss; each later call either improves
    the best seen (resetting the stall counter) or increments it, decaying
    eta and resetting once the counter reaches ``patience``.  eta never
    increases.
    """

    def __init__(self, initial_eta: float, decay_factor: float = 0.3, patience: int = 50):
        if initial_eta <= 0.0:
            raise PreconditionError("initial_eta must be positive")
        if not 0.0 < decay_factor < 1.0:
            raise PreconditionError("decay_factor must lie in (0, 1)")
        if patience < 1:
            raise PreconditionError("patience must be >= 1")
        self.initial_eta = initial_eta
        self.decay_factor = decay_factor
        self.patience = patience
        self._eta = initial_eta
        self._best_loss: float | None = None
        self._stall = 0

    def eta(self, t: int, current_loss: float, stream: RandomStream | None = None) -> float:
        if not np.isfinite(current_loss):
            raise PreconditionError("plateau schedule needs a finite loss")
        if self._best_loss is None:
            self._best_loss = current_loss
        elif current_loss < self._best_loss:
            self._best_loss = current_loss
            self._stall = 0
        else:
            self._stall += 1
            if self._stall >= self.patience:
                self._eta *= self.decay_factor
                self._stall = 0
        return self._eta


class ConstantSchedule:
    """Fixed learning rate (the classical GD baseline choice).

    Zero is allowed: a zero-rate GD run is the degenerate constant
    trajectory.  Muon itself still rejects eta = 0 at the step level.
    """

    def __init__(self, eta: float):
        if eta < 0.0:
            raise PreconditionError("eta must be nonnegative")
        self._eta = eta

    def eta(self, t: int, current_loss: float | None = None, stream: RandomStream | None = None) -> float:
        return self._eta


class SequenceSchedule:
    """Fixed, precomputed eta sequence (used to share draws across runs)."""

    def __init__(self, etas):
        self.etas = [float(e) for e in etas]
        if any(e <= 0 for e in self.etas):
            raise PreconditionError("etas must be positive")

    def eta(self, t: int, current_loss: float | None = None, stream: RandomStream | None = None) -> float:
        if t < len(self.etas):
            return self.etas[t]
        return self.etas[-1]


def materialize_etas(sched, T: int, stream: RandomStream | None = None) -> list[float]:
    """Realize T learning rates from a loss-free schedule (exponential or
    sequence), consuming any prefactor draws from ``stream``."""
    return [sched.eta(t, None, stream) for t in range(T)]


@dataclass(frozen=True)
class MuonState:
    """Momentum buffer B and mixing coefficient mu; mu = 0 recovers
    simplified Muon exactly (the buffer is bypassed, not multiplied)."""

    buffer: np.ndarray
    mu: float = 0.0

    @classmethod
    def zeros(cls, shape: tuple[int, int], mu: float = 0.0) -> "MuonState":
        if not 0.0 <= mu < 1.0:
            raise PreconditionError(f"mu must lie in [0, 1), got {mu}")
        return cls(buffer=np.zeros(shape), mu=mu)


@dataclass(frozen=True)
class OptimizerConfig:
    algorithm: str
    mu: float = 0.0
    msign_backend: str = "exact"  # "exact" | "newton_schulz"
    ns_config: NewtonSchulzConfig = field(default_factory=NewtonSchulzConfig)

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise PreconditionError(f"unknown algorithm {self.algorithm!r}")
        if self.msign_backend not in ("exact", "newton_schulz"):
            raise PreconditionError(f"unknown msign backend {self.msign_backend!r}")


@dataclass(frozen=True)
class TrajectoryRecord:
    """One logged iterate: metrics at time t plus the eta used to leave it."""

    t: int
    eta: float
    loss: float
    spectral_error: float
    grad_sigma_min: float
    msign_converged: bool = True


@dataclass
class Trajectory:
    records: list[TrajectoryRecord]
    final: np.ndarray
    iterates: list[np.ndarray] | None = None


def _apply_msign(b: np.ndarray, backend: str, ns_config: NewtonSchulzConfig):
    if backend == "exact":
        return msign_exact(b), True
    result = msign_newton_schulz(b, ns_config)
    return result.matrix, result.converged


def muon_step(
    x,
    grad,
    state: MuonState,
    eta: float,
    backend: str = "exact",
    ns_config: NewtonSchulzConfig | None = None,
):
    """One Muon update: B' = grad + mu*B, X' = X - eta * msign(B').

    Returns (x_next, state_next, msign_converged).  A zero momentum buffer
    update leaves X unchanged (msign(0) = 0) rather than raising.
    """
    x = check_matrix(x, "iterate")
    grad = check_matrix(grad, "gradient")
    if x.shape != grad.shape or x.shape != state.buffer.shape:
        raise PreconditionError("iterate/gradient/buffer shapes disagree")
    if eta <= 0.0:
        raise PreconditionError("eta must be positive")
    if ns_config is None:
        ns_config = NewtonSchulzConfig()
    # mu == 0 takes the gradient verbatim so simplified Muon is bitwise exact.
    b = grad if state.mu == 0.0 else grad + state.mu * state.buffer
    if not np.any(b):
        return x.copy(), replace(state, buffer=b.copy()), True
    direction, converged = _apply_msign(b, backend, ns_config)
    return x - eta * direction, replace(state, buffer=b.copy()), converged


def gd_step(x, grad, eta: float) -> np.ndarray:
    """Plain gradient step X - eta * grad."""
    x = check_matrix(x, "iterate")
    grad = check_matrix(grad, "gradient")
    if x.shape != grad.shape:
        raise PreconditionError("iterate/gradient shapes disagree")
    return x - eta * grad


def signgd_step(x, grad, eta: float) -> np.ndarray:
    """Entrywise-sign step X - eta * sign(grad); zero entries stay put."""
    x = check_matrix(x, "iterate")
    grad = check_matrix(grad, "gradient")
    if x.shape != grad.shape:
        raise PreconditionError("iterate/gradient shapes disagree")
    return x - eta * sign_entrywise(grad)


def scaledgd_step(u, grad, eta: float) -> np.ndarray:
    """Right-preconditioned step U - eta * grad @ (U^T U)^-1.

    The Gram inverse goes through the eigendecomposition; a numerically
    singular Gram matrix raises rather than being silently regularized.
    """
    u = check_matrix(u, "iterate")
    grad = check_matrix(grad, "gradient")
    if u.shape != grad.shape:
        raise PreconditionError("iterate/gradient shapes disagree")
    gram = u.T @ u
    factors = symmetric_eig(gram)
    lam = factors.eigenvalues
    if lam[0] <= 0.0 or lam[-1] <= (1e-12) ** 2 * lam[0]:
        raise RankDeficiencyError("scaledgd: U^T U is numerically singular")
    gram_inv = (factors.eigenvectors / lam) @ factors.eigenvectors.T
    return u - eta * grad @ gram_inv


def run_trajectory(
    inst,
    algo: OptimizerConfig,
    sched,
    init,
    T: int,
    stream: RandomStream | None = None,
    keep_iterates: bool = False,
    stop_below: float | None = None,
) -> Trajectory:
    """Iterate the chosen optimizer T times from ``init``, logging a record
    per iterate (T+1 records when no early stop fires; the final record's eta
    is the schedule value that a further step would have used).

    sigma_min of the gradient is logged through an SVD for instances with
    d <= SIGMA_MIN_DIM_CAP and recorded as -1.0 above that.  A non-finite
    loss aborts with ``NumericalDivergenceError`` carrying the records so
    far.  ``stop_below`` ends the run once the spectral error reaches it.
    """
    if T < 1:
        raise PreconditionError("T must be >= 1")
    x = check_matrix(init, "init").copy()
    if x.shape != inst.iterate_shape():
        raise PreconditionError(
            f"init must have shape {inst.iterate_shape()}, got {x.shape}"
        )
    state = MuonState.zeros(x.shape, mu=algo.mu)
    with_gsm = inst.d <= SIGMA_MIN_DIM_CAP
    records: list[TrajectoryRecord] = []
    iterates: list[np.ndarray] | None = [x.copy()] if keep_iterates else None
    for t in range(T + 1):
        loss, grad = inst.loss_grad(x)
        if not np.isfinite(loss):
            raise NumericalDivergenceError(
                f"non-finite loss at iteration {t}", iteration=t, records=records
            )
        err = inst.spectral_error(x)
        if with_gsm:
            svals = np.linalg.svd(grad, compute_uv=False)
            gsm = float(svals[-1]) if svals.size else 0.0
        else:
            gsm = -1.0
        eta = float(sched.eta(t, loss, stream))
        if t == T or (stop_below is not None and err <= stop_below):
            records.append(TrajectoryRecord(t, eta, loss, err, gsm, True))
            break
        converged_flag = True
        if algo.algorithm == "muon":
            x, state, converged_flag = muon_step(
                x, grad, state, eta, backend=algo.msign_backend, ns_config=algo.ns_config
            )
        elif algo.algorithm == "gd":
            x = gd_step(x, grad, eta)
        elif algo.algorithm == "signgd":
            x = signgd_step(x, grad, eta)
        else:
            x = scaledgd_step(x, grad, eta)
        records.append(TrajectoryRecord(t, eta, loss, err, gsm, converged_flag))
        if keep_iterates:
            iterates.append(x.copy())
    return Trajectory(records=records, final=x, iterates=iterates)
