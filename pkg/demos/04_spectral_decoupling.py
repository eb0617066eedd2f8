"""The spectral-decoupling identity, checked to machine precision.

With an eigen-aligned start (or from Q_0 = 0 on the covariance problem),
simplified Muon's d x k matrix iteration collapses exactly into independent
scalar recursions, one per eigenvalue:

    u <- u - eta * sign((u^2 - lambda) u)        (factorization)
    theta <- theta - eta * sign(lambda*theta - 1)  (covariance inverse)

This script runs the full matrix trajectory and the scalar oracle side by
side on shared learning-rate draws and prints the largest per-step gap, plus
the per-step error bounds the scalar dynamics obey.
"""

import numpy as np

import muonlab as ml
from muonlab.optimizers import (
    ExponentialSchedule,
    OptimizerConfig,
    SequenceSchedule,
    materialize_etas,
    run_trajectory,
)
from muonlab.oracle import (
    aligned_mf_init,
    decoupled_icl_trajectory,
    decoupled_mf_trajectory,
    oracle_vs_full_divergence,
)

master = ml.RandomStream(404)
D, R, T = 20, 4, 100

print("=== factorization: full Muon vs diagonal oracle ===")
for i, k in enumerate((R, R + 3, D)):
    inst = ml.make_mf_instance(master.derive(i), D, R, k, kappa=125.0)
    stream = master.derive(100 + i)
    etas = materialize_etas(ExponentialSchedule(0.5, 1.0), T + 1, stream)
    init = aligned_mf_init(inst, stream.uniforms(R, 0.05, 0.95) * etas[0], stream)
    full = run_trajectory(
        inst, OptimizerConfig("muon"), SequenceSchedule(etas), init.matrix, T,
        keep_iterates=True,
    )
    oracle = decoupled_mf_trajectory(init, etas[:T])
    gap = oracle_vs_full_divergence(oracle, full.iterates)
    print(f"  search rank k={k:>2}: max per-step spectral gap = {gap:.3e}")

print("\n=== covariance inverse: full Muon vs diagonal oracle ===")
inst = ml.make_icl_instance(master.derive(300), D, 625.0 ** (1.0 / 3.0), sigma_min=1.0)
etas = materialize_etas(ExponentialSchedule(0.5, 1.0), T, master.derive(301))
full = run_trajectory(
    inst, OptimizerConfig("muon"), SequenceSchedule(etas), np.zeros((D, D)), T,
    keep_iterates=True,
)
oracle = decoupled_icl_trajectory(inst, etas)
print(f"  d={D}: max per-step spectral gap = {oracle_vs_full_divergence(oracle, full.iterates):.3e}")

print("\n=== scalar error bounds along one mode ===")
trace = ml.scalar_muon_trajectory(0.3, 0.8, 1.0, 0.5, 12, c_eta=1.4)
check = ml.check_scalar_mf_bounds(trace)
print(f"  u_t      : {np.array2string(trace.values[:8], precision=4)}")
print(f"  per-step bound check passed={check.passed}, tightest margin={check.worst_margin:.3e}")

print("""
The gaps sit at the float64 noise floor: the decoupling is an identity, not
an approximation.  Every matrix-level question about simplified Muon on
these problems reduces to the one-dimensional zigzag above, which contracts
toward sqrt(lambda) at the schedule's geometric rate regardless of lambda -
that is the condition-number-free mechanism.
""")
