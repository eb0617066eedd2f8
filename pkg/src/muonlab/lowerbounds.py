"""Adversarial instances on which SignGD provably needs Omega(kappa) steps.

All three constructions funnel through one mechanism: a 2x2 quadratic whose
Hessian H = 0.5 * [[k+1, k-1], [k-1, k+1]] has eigenvalues (kappa, 1) in the
rotated basis R = (1/sqrt2) * [[1, -1], [1, 1]].  In that basis each SignGD
step moves exactly one coordinate by sqrt(2)*eta_t, and a backward-built
initialization pins the second coordinate at kappa*eps until the learning
rate decays below 4*eps - forcing at least (kappa-1)/4 iterations to reach
accuracy eps.  The matrix-factorization and covariance-inverse hard instances
embed this quadratic through invariant 2x2 slices with equal diagonals and
equal off-diagonals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError, TieEventError
from .optimizers import OptimizerConfig, SequenceSchedule, run_trajectory
from .problems import IclInstance, MfInstance

SQRT2 = math.sqrt(2.0)

# R^T H R = diag(kappa, 1); columns are the Hessian eigenvectors.
ROTATION = np.array([[1.0, -1.0], [1.0, 1.0]]) / SQRT2


@dataclass(frozen=True)
class HardQuadratic:
    kappa: float
    hessian: np.ndarray  # H, 2x2
    rotation: np.ndarray  # R, 2x2


def build_hard_quadratic(kappa: float) -> HardQuadratic:
    """The ill-conditioned 2x2 quadratic with eigenvalues (kappa, 1)."""
    if kappa < 1.0:
        raise PreconditionError(f"kappa must be >= 1, got {kappa}")
    h = 0.5 * np.array([[kappa + 1.0, kappa - 1.0], [kappa - 1.0, kappa + 1.0]])
    diag = ROTATION.T @ h @ ROTATION
    if abs(diag[0, 0] - kappa) > 1e-12 * max(kappa, 1.0) or abs(diag[1, 1] - 1.0) > 1e-12:
        raise PreconditionError("hard quadratic eigen-identity failed at construction")
    return HardQuadratic(kappa=float(kappa), hessian=h, rotation=ROTATION.copy())


@dataclass(frozen=True)
class AdversarialInit:
    """Backward-constructed SignGD initialization.

    ``x0`` lives in the halved rotated coordinates (x = ztilde / sqrt2);
    its first component is chosen so the forward recursion
    x_{1,t+1} = eta_t - x_{1,t} stays inside [2*eps, eta_t - 2*eps] for all
    t <= barrier_steps, while x_2 starts (and stays) at kappa*eps.
    """

    z0: np.ndarray  # original coordinates
    x0: np.ndarray  # pre-rotation coordinates
    barrier_steps: int  # T0: last step with eta_t >= 4*eps
    epsilon: float
    x1_chain: np.ndarray  # |x_1| values along the barrier, t = 0..T0


def _check_etas(etas) -> np.ndarray:
    etas = np.asarray(etas, dtype=np.float64)
    if etas.ndim != 1 or etas.size == 0:
        raise PreconditionError("etas must be a nonempty 1-D sequence")
    if np.any(etas <= 0.0) or np.any(np.diff(etas) > 0.0):
        raise PreconditionError("etas must be positive and non-increasing")
    return etas


def adversarial_quadratic_init(kappa: float, epsilon: float, etas, T: int) -> AdversarialInit:
    """The learning-rate-barrier initialization for the hard quadratic.

    Picks the midpoint of the admissible interval at the barrier horizon and
    recurses backward; the construction is re-verified forward before being
    returned.
    """
    etas = _check_etas(etas)
    if kappa < 1.0:
        raise PreconditionError(f"kappa must be >= 1, got {kappa}")
    if not 0.0 < epsilon <= etas[0] / kappa:
        raise PreconditionError(
            f"need 0 < epsilon <= eta_0/kappa = {etas[0] / kappa:.3e}, got {epsilon}"
        )
    horizon = min(T, etas.size - 1)
    above = np.nonzero(etas[: horizon + 1] >= 4.0 * epsilon)[0]
    if above.size == 0:
        raise PreconditionError("empty barrier set: eta_0 < 4*epsilon")
    t0 = int(above[-1])
    chain = np.empty(t0 + 1)
    chain[t0] = etas[t0] / 2.0
    for t in range(t0 - 1, -1, -1):
        chain[t] = etas[t] - chain[t + 1]
    lo = 2.0 * epsilon
    for t in range(t0 + 1):
        if not lo <= chain[t] <= etas[t] - lo:
            raise PreconditionError(
                f"barrier chain left [2eps, eta_t - 2eps] at t={t}: {chain[t]:.6e}"
            )
    x0 = np.array([chain[0], kappa * epsilon])
    ztilde0 = SQRT2 * x0
    z0 = ROTATION @ ztilde0
    return AdversarialInit(z0=z0, x0=x0, barrier_steps=t0, epsilon=epsilon, x1_chain=chain)


@dataclass(frozen=True)
class QuadraticRun:
    iterates: np.ndarray  # (T+1, 2) in original coordinates
    rotated: np.ndarray  # (T+1, 2) rotated coordinates
    first_hit: float  # smallest t with ||z_t|| <= epsilon, or inf


def signgd_quadratic_run(
    hq: HardQuadratic, init: AdversarialInit, etas, T: int
) -> QuadraticRun:
    """Run z_{t+1} = z_t - eta_t * sign(H z_t) for T steps.

    Each step is checked against the switching law: exactly one rotated
    coordinate moves, by +/- sqrt(2)*eta_t.  An exact tie
    |kappa * ztilde_1| == |ztilde_2| (where the sign pattern is undefined)
    raises ``TieEventError``; the constructed initializations avoid ties, so
    one occurring means the implementation is broken.
    """
    etas = _check_etas(etas)
    if etas.size < T:
        raise PreconditionError(f"need at least T={T} etas, got {etas.size}")
    z = init.z0.astype(np.float64).copy()
    zs = np.empty((T + 1, 2))
    zt = np.empty((T + 1, 2))
    zs[0] = z
    zt[0] = hq.rotation.T @ z
    first_hit = 0 if np.linalg.norm(z) <= init.epsilon else math.inf
    for t in range(T):
        ztil = hq.rotation.T @ z
        if np.any(z) and abs(hq.kappa * ztil[0]) == abs(ztil[1]):
            raise TieEventError(f"switching tie at t={t}: ztilde={ztil}")
        z = z - etas[t] * np.sign(hq.hessian @ z)
        zs[t + 1] = z
        ztil_next = hq.rotation.T @ z
        delta = ztil_next - zt[t]
        # the moved coordinate shifts by sqrt(2)*eta; the frozen one only by
        # rounding noise proportional to ||z||, so split on half a step
        moved = np.abs(delta) > 0.5 * SQRT2 * etas[t]
        size_tol = 1e-9 * etas[t] + 1e-13 * float(np.linalg.norm(zs[t]))
        if np.any(z != zs[t]) and (
            moved.sum() != 1 or abs(np.abs(delta).max() - SQRT2 * etas[t]) > size_tol
        ):
            raise TieEventError(f"switching law violated at t={t}: delta={delta}")
        zt[t + 1] = ztil_next
        if math.isinf(first_hit) and np.linalg.norm(z) <= init.epsilon:
            first_hit = t + 1
    return QuadraticRun(iterates=zs, rotated=zt, first_hit=first_hit)


@dataclass(frozen=True)
class HardMfInstance:
    """2x2 factorization target H with an adversarial in-slice start U_0."""

    instance: MfInstance
    u_star: np.ndarray
    u0: np.ndarray
    epsilon: float  # loss target of the lower bound
    epsilon_q: float  # quadratic-level target (4/3)*sqrt(epsilon)
    quad_init: AdversarialInit
    r0: float


def build_hard_mf_instance(
    kappa: float, etas, r0: float = 1.0 / 16.0, epsilon: float | None = None
) -> HardMfInstance:
    """Factorization lower-bound instance (target H, U* = H^(1/2)).

    The initialization is built from the quadratic barrier chain run at
    level eps_q = (4/3)*sqrt(eps) with step sizes sqrt(2)*eta_t, mapped into
    eigenvalue offsets of the invariant slice.  The hypotheses eta_0 <= r0,
    eps <= 9*r0^2/(4096*kappa^2) and ||U_0 - U*||_F <= r0 are all enforced.
    """
    etas = _check_etas(etas)
    if kappa < 2.0:
        raise PreconditionError(f"hard factorization instance needs kappa >= 2, got {kappa}")
    if not 0.0 < r0 <= 1.0 / 16.0:
        raise PreconditionError(f"r0 must lie in (0, 1/16], got {r0}")
    if etas[0] > r0:
        raise PreconditionError(f"need eta_0 <= r0, got eta_0={etas[0]}")
    eps_max = 9.0 * r0**2 / (4096.0 * kappa**2)
    if epsilon is None:
        epsilon = eps_max
    if not 0.0 < epsilon <= eps_max:
        raise PreconditionError(f"need 0 < epsilon <= {eps_max:.3e}, got {epsilon}")
    eps_q = (4.0 / 3.0) * math.sqrt(epsilon)
    quad = adversarial_quadratic_init(kappa, eps_q, SQRT2 * etas, T=etas.size - 1)
    delta0 = SQRT2 * quad.x0  # eigenvalue offsets (delta_1, delta_2)
    lam1 = math.sqrt(kappa) + delta0[0]
    lam2 = 1.0 + delta0[1]
    a0, b0 = (lam1 + lam2) / 2.0, (lam1 - lam2) / 2.0
    u0 = np.array([[a0, b0], [b0, a0]])
    hq = build_hard_quadratic(kappa)
    u_star = ROTATION @ np.diag([math.sqrt(kappa), 1.0]) @ ROTATION.T
    if np.linalg.norm(u0 - u_star) > r0:
        raise PreconditionError(
            "constructed U_0 leaves the r0-ball around U*; lower eta_0 relative to r0"
        )
    inst = MfInstance(
        d=2,
        r=2,
        k=2,
        eigenvalues=np.array([kappa, 1.0]),
        eigenvectors=ROTATION.copy(),
        target=hq.hessian,
    )
    return HardMfInstance(
        instance=inst,
        u_star=u_star,
        u0=u0,
        epsilon=float(epsilon),
        epsilon_q=eps_q,
        quad_init=quad,
        r0=r0,
    )


@dataclass(frozen=True)
class HardIclInstance:
    """d = 2 covariance S = R diag(kappa^(1/3), 1) R^T with adversarial Q_0."""

    instance: IclInstance
    q_star: np.ndarray
    q0: np.ndarray
    epsilon: float  # Frobenius target ||Q - Q*||_F
    quad_init: AdversarialInit


def build_hard_icl_instance(kappa: float, etas, epsilon: float | None = None) -> HardIclInstance:
    """Covariance lower-bound instance with kappa(S)^3 = kappa.

    Error coordinates z = (a - a*, b - b*) of the invariant slice follow the
    hard-quadratic SignGD recursion exactly, and
    ||Q - Q*||_F = sqrt(2) * ||z||_2 bridges the two metrics.
    """
    etas = _check_etas(etas)
    if kappa < 2.0:
        raise PreconditionError(f"hard covariance instance needs kappa >= 2, got {kappa}")
    eps_max = SQRT2 * etas[0] / kappa
    if epsilon is None:
        epsilon = eps_max
    if not 0.0 < epsilon <= eps_max:
        raise PreconditionError(f"need 0 < epsilon <= {eps_max:.3e}, got {epsilon}")
    quad = adversarial_quadratic_init(kappa, epsilon / SQRT2, etas, T=etas.size - 1)
    sigma1 = kappa ** (1.0 / 3.0)
    lam = np.array([sigma1, 1.0])
    cov = (ROTATION * lam) @ ROTATION.T
    inv = (ROTATION / lam) @ ROTATION.T
    inst = IclInstance(
        d=2, covariance=cov, eigenvalues=lam, eigenvectors=ROTATION.copy(), inverse=inv
    )
    a_star = (1.0 / sigma1 + 1.0) / 2.0
    b_star = (1.0 / sigma1 - 1.0) / 2.0
    a0, b0 = a_star + quad.z0[0], b_star + quad.z0[1]
    q0 = np.array([[a0, b0], [b0, a0]])
    return HardIclInstance(
        instance=inst, q_star=inv, q0=q0, epsilon=float(epsilon), quad_init=quad
    )


@dataclass(frozen=True)
class HardRunResult:
    first_hit: float
    metric: np.ndarray  # per-step lower-bound metric (loss or Frobenius error)
    slice_deviation: float  # max departure from equal-diag/equal-offdiag form
    bridge_deviation: float | None = None  # covariance runs only


def _slice_deviation(mats) -> float:
    dev = 0.0
    for m in mats:
        dev = max(dev, abs(m[0, 0] - m[1, 1]), abs(m[0, 1] - m[1, 0]))
    return dev


def run_hard_mf(hard: HardMfInstance, etas, T: int) -> HardRunResult:
    """SignGD on the hard factorization instance; first hit of loss <= eps."""
    traj = run_trajectory(
        hard.instance,
        OptimizerConfig("signgd"),
        SequenceSchedule(etas),
        hard.u0,
        T,
        keep_iterates=True,
    )
    losses = np.array([rec.loss for rec in traj.records])
    return HardRunResult(
        first_hit=first_hit_time(losses, hard.epsilon),
        metric=losses,
        slice_deviation=_slice_deviation(traj.iterates),
    )


def run_hard_icl(hard: HardIclInstance, etas, T: int) -> HardRunResult:
    """SignGD on the hard covariance instance; first hit of
    ||Q_t - Q*||_F <= eps, plus the sqrt(2)-norm-bridge deviation."""
    traj = run_trajectory(
        hard.instance,
        OptimizerConfig("signgd"),
        SequenceSchedule(etas),
        hard.q0,
        T,
        keep_iterates=True,
    )
    a_star = (hard.q_star[0, 0] + hard.q_star[1, 1]) / 2.0
    b_star = (hard.q_star[0, 1] + hard.q_star[1, 0]) / 2.0
    frob = np.empty(len(traj.iterates))
    bridge = 0.0
    for t, q in enumerate(traj.iterates):
        frob[t] = np.linalg.norm(q - hard.q_star)
        z = np.array([(q[0, 0] + q[1, 1]) / 2.0 - a_star, (q[0, 1] + q[1, 0]) / 2.0 - b_star])
        bridge = max(bridge, abs(frob[t] - SQRT2 * np.linalg.norm(z)))
    return HardRunResult(
        first_hit=first_hit_time(frob, hard.epsilon),
        metric=frob,
        slice_deviation=_slice_deviation(traj.iterates),
        bridge_deviation=bridge,
    )


def first_hit_time(values, epsilon: float) -> float:
    """Smallest index t with values[t] <= epsilon, or math.inf if none."""
    if epsilon <= 0.0:
        raise PreconditionError("epsilon must be positive")
    for t, v in enumerate(values):
        if v <= epsilon:
            return t
    return math.inf
