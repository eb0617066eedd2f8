"""Config-driven experiment runner: condition-number sweeps, rank sweeps,
lower-bound runs, preconditioner visualization, and verification suites.

Configs are flat ``key = value`` text files (``#`` comments, comma-separated
lists).  Every run is a pure function of (seed, config): per-cell random
streams are derived from the master seed by a fixed enumeration, floats are
written in shortest round-trip form, and files use LF endings, so reruns are
byte-identical.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, fields

import numpy as np

from .errors import ConfigError, NumericalDivergenceError, PreconditionError
from .linalg import symmetric_eig
from .lowerbounds import (
    adversarial_quadratic_init,
    build_hard_icl_instance,
    build_hard_mf_instance,
    build_hard_quadratic,
    first_hit_time,
    run_hard_icl,
    run_hard_mf,
    signgd_quadratic_run,
)
from .msign import msign_exact, msign_newton_schulz
from .optimizers import (
    ALGORITHMS,
    ExponentialSchedule,
    OptimizerConfig,
    PlateauSchedule,
    SequenceSchedule,
    TrajectoryRecord,
    materialize_etas,
    run_trajectory,
)
from .oracle import (
    FLOAT_SLACK,
    aligned_mf_init,
    decoupled_icl_trajectory,
    decoupled_mf_trajectory,
    oracle_vs_full_divergence,
    sweep_icl_bounds,
    sweep_mf_bounds,
    sweep_mf_bounds_varying,
    sweep_never_zero,
)
from .problems import (
    icl_loss_grad,
    icl_monte_carlo_loss,
    make_icl_instance,
    make_mf_instance,
    mf_loss_grad,
)
from .rng import RandomStream
from .svgplot import emit_svg_heatmap, emit_svg_plot

KINDS = ("mf_sweep", "icl_sweep", "rank_sweep", "lower_bound", "precond_viz", "verify")
FAMILIES = ("quadratic", "mf", "icl")
SUITES = ("msign", "oracle", "lemmas", "lowerbounds", "gradients", "montecarlo", "all")
CSV_HEADER = "t,eta,loss,spectral_error,grad_sigma_min"


@dataclass
class ExperimentConfig:
    """Validated experiment description; every field has a documented default."""

    kind: str = "mf_sweep"
    d: int = 100
    r: int = 2
    k: int = 2
    kappa: tuple[float, ...] = (1.0, 5.0, 25.0, 125.0, 625.0)
    ranks: tuple[int, ...] = (2, 3, 100)
    algorithms: tuple[str, ...] = ("muon", "signgd", "gd")
    schedule: str = "plateau"
    rho: float = 0.5
    prefactor: str = "fixed"
    eta0: float | None = None  # None -> per-algorithm default
    alpha: float = 0.1
    T: int = 5000
    epsilon: float = 1e-12  # early-stop threshold on spectral error
    epsilons: tuple[float, ...] = (1e-6, 1e-10)  # summary first-hit levels
    seed: int = 42
    replicates: int = 1
    out: str = "results"
    family: str = "quadratic"
    lb_rho: float = 0.98
    lb_eta0: float | None = None
    r0: float = 1.0 / 16.0
    steps: tuple[int, ...] = (0, 500, 1000)
    suite: str = "all"


def _parse_scalar(key: str, raw: str, kind: type, line_no: int):
    try:
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"line {line_no}: cannot parse {key} = {raw!r}") from None


_LIST_KEYS = {
    "kappa": float,
    "ranks": int,
    "algorithms": str,
    "epsilons": float,
    "steps": int,
}
_OPTIONAL_FLOAT_KEYS = ("eta0", "lb_eta0")


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a flat key = value config.

    Unknown keys, unparsable values, and out-of-range values raise
    ``ConfigError`` naming the key and line.  An empty file yields all
    defaults.
    """
    cfg = ExperimentConfig()
    known = {f.name: f.type for f in fields(ExperimentConfig)}
    for line_no, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {line_no}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in body.split("=", 1))
        if key not in known:
            raise ConfigError(f"line {line_no}: unknown key {key!r}")
        if key in _LIST_KEYS:
            items = [s.strip() for s in raw.split(",") if s.strip()]
            if not items:
                raise ConfigError(f"line {line_no}: empty list for {key!r}")
            value = tuple(_parse_scalar(key, s, _LIST_KEYS[key], line_no) for s in items)
        elif key in _OPTIONAL_FLOAT_KEYS:
            value = _parse_scalar(key, raw, float, line_no)
        else:
            current = getattr(cfg, key)
            value = _parse_scalar(key, raw, type(current), line_no)
        setattr(cfg, key, value)
    _validate(cfg)
    return cfg


def _require(ok: bool, message: str):
    if not ok:
        raise ConfigError(message)


def _validate(cfg: ExperimentConfig):
    _require(cfg.kind in KINDS, f"kind must be one of {KINDS}, got {cfg.kind!r}")
    _require(cfg.d >= 1 and cfg.k >= 1 and cfg.r >= 1, "d, r, k must be positive")
    _require(cfg.r <= min(cfg.d, cfg.k), f"need r <= min(d, k), got r={cfg.r}, d={cfg.d}, k={cfg.k}")
    _require(all(x >= 1.0 for x in cfg.kappa), "kappa values must be >= 1")
    _require(all(k >= cfg.r for k in cfg.ranks), "ranks must be >= r")
    _require(
        all(a in ALGORITHMS for a in cfg.algorithms),
        f"algorithms must be among {ALGORITHMS}, got {cfg.algorithms}",
    )
    _require(cfg.schedule in ("plateau", "exponential"), f"unknown schedule {cfg.schedule!r}")
    _require(0.5 <= cfg.rho < 1.0, f"rho must lie in [1/2, 1), got {cfg.rho}")
    _require(0.5 <= cfg.lb_rho < 1.0, f"lb_rho must lie in [1/2, 1), got {cfg.lb_rho}")
    _require(cfg.prefactor in ("fixed", "per_iteration"), f"unknown prefactor {cfg.prefactor!r}")
    _require(cfg.eta0 is None or cfg.eta0 > 0, "eta0 must be positive")
    _require(cfg.lb_eta0 is None or cfg.lb_eta0 > 0, "lb_eta0 must be positive")
    _require(cfg.alpha > 0, "alpha must be positive")
    _require(cfg.T >= 1, "T must be >= 1")
    _require(cfg.epsilon > 0, "epsilon must be positive")
    _require(all(e > 0 for e in cfg.epsilons), "epsilons must be positive")
    _require(cfg.seed >= 0, "seed must be nonnegative")
    _require(cfg.replicates >= 1, "replicates must be >= 1")
    _require(cfg.family in FAMILIES, f"family must be one of {FAMILIES}, got {cfg.family!r}")
    _require(0 < cfg.r0 <= 1.0 / 16.0, "r0 must lie in (0, 1/16]")
    _require(all(s >= 0 for s in cfg.steps), "steps must be nonnegative")
    _require(cfg.suite in SUITES, f"suite must be one of {SUITES}, got {cfg.suite!r}")


# ---------------------------------------------------------------------------
# CSV I/O
# ---------------------------------------------------------------------------


def format_float(x: float) -> str:
    """Shortest round-trip decimal form of a float."""
    return repr(float(x))


def record_to_csv_row(rec: TrajectoryRecord) -> str:
    return ",".join(
        [
            str(rec.t),
            format_float(rec.eta),
            format_float(rec.loss),
            format_float(rec.spectral_error),
            format_float(rec.grad_sigma_min),
        ]
    )


def parse_records_csv(text: str) -> list[TrajectoryRecord]:
    lines = text.strip().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise PreconditionError(f"bad CSV header: {lines[:1]}")
    out = []
    for line in lines[1:]:
        t, eta, loss, err, gsm = line.split(",")
        out.append(
            TrajectoryRecord(
                t=int(t),
                eta=float(eta),
                loss=float(loss),
                spectral_error=float(err),
                grad_sigma_min=float(gsm),
            )
        )
    return out


def write_records_csv(path: str, records, diagnostic_t: int | None = None):
    """Write trajectory records; a diagnostic NaN row marks an aborted run."""
    with open(path, "w", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for rec in records:
            fh.write(record_to_csv_row(rec) + "\n")
        if diagnostic_t is not None:
            fh.write(f"{diagnostic_t},nan,nan,nan,nan\n")


# ---------------------------------------------------------------------------
# Sweep runner
# ---------------------------------------------------------------------------


def scaled_orthonormal_init(stream: RandomStream, d: int, k: int, alpha: float) -> np.ndarray:
    """alpha times a Haar orthonormal d x k matrix: orthonormal columns for
    k <= d, orthonormal rows for k > d."""
    if k <= d:
        return alpha * stream.haar_orthonormal(d, k)
    return alpha * stream.haar_orthonormal(k, d).T


def default_eta0(algorithm: str, inst) -> float:
    """Per-algorithm initial learning rate when the config leaves eta0 unset.

    Muon moves a fixed spectral distance per step, so it starts at the
    natural problem scale; GD starts at the classical inverse-curvature
    scale; SignGD moves every entry by eta, so it starts a decade lower.
    """
    if hasattr(inst, "lambda_max"):  # factorization
        lam = inst.lambda_max
        return {
            "muon": math.sqrt(lam),
            "gd": 0.25 / lam,
            "signgd": 0.1 * math.sqrt(lam),
            "scaledgd": 0.25,
        }[algorithm]
    lam_max = float(inst.eigenvalues[0])
    sig = inst.sigma_min
    return {
        "muon": 1.0 / sig,
        "gd": 1.0 / lam_max**3,
        "signgd": 0.1 / sig,
        "scaledgd": 0.25,
    }[algorithm]


def _make_schedule(cfg: ExperimentConfig, algorithm: str, inst):
    eta0 = cfg.eta0 if cfg.eta0 is not None else default_eta0(algorithm, inst)
    if cfg.schedule == "plateau":
        return PlateauSchedule(initial_eta=eta0)
    return ExponentialSchedule(rho=cfg.rho, base_scale=eta0, prefactor_mode=cfg.prefactor)


@dataclass
class RunOutput:
    csv_paths: list[str]
    summary_path: str | None
    metadata_path: str | None
    summary_rows: list[dict] = field(default_factory=list)
    figure_paths: list[str] = field(default_factory=list)


def _write_metadata(cfg: ExperimentConfig, out_dir: str) -> str:
    path = os.path.join(out_dir, "run_metadata.txt")
    with open(path, "w", newline="\n") as fh:
        for f in fields(cfg):
            value = getattr(cfg, f.name)
            if isinstance(value, tuple):
                value = ",".join(str(v) for v in value)
            fh.write(f"{f.name} = {value}\n")
        fh.write("# early stop: trajectory ends once spectral_error <= epsilon\n")
    return path


def _sweep_points(cfg: ExperimentConfig):
    """(label, kappa, k) triples for the requested sweep; k is the iterate's
    column count (d for the square covariance problem)."""
    if cfg.kind == "rank_sweep":
        kappa = cfg.kappa[0]
        return [(f"kappa{kappa:g}_k{k}", kappa, k) for k in cfg.ranks]
    k = cfg.d if cfg.kind == "icl_sweep" else cfg.k
    return [(f"kappa{kappa:g}_k{k}", kappa, k) for kappa in cfg.kappa]


def run_experiment(cfg: ExperimentConfig, out_dir: str | None = None) -> RunOutput:
    """Execute a sweep config: one CSV per (algorithm, point, replicate),
    plus a first-hit summary CSV and a resolved-config metadata file."""
    if cfg.kind == "verify":
        report = verify(cfg.suite)
        return RunOutput(csv_paths=[], summary_path=None, metadata_path=None,
                         summary_rows=[{"passed": report.passed}])
    out_dir = out_dir or cfg.out
    os.makedirs(out_dir, exist_ok=True)
    if cfg.kind == "lower_bound":
        return _run_lower_bound(cfg, out_dir)
    if cfg.kind == "precond_viz":
        report = preconditioner_report(
            d=cfg.d, r=cfg.r, k=cfg.k, alpha=cfg.alpha, steps=cfg.steps,
            seed=cfg.seed, out_dir=out_dir,
        )
        meta = _write_metadata(cfg, out_dir)
        return RunOutput(
            csv_paths=list(report.heatmap_paths),
            summary_path=report.difference_path,
            metadata_path=meta,
            summary_rows=[
                {"t": t, "normalized_difference": diff}
                for t, diff in zip(report.steps, report.normalized_differences)
            ],
        )

    master = RandomStream(cfg.seed)
    points = _sweep_points(cfg)
    csv_paths: list[str] = []
    summary_rows: list[dict] = []
    curves: dict[str, dict[str, tuple]] = {a: {} for a in cfg.algorithms}
    cell_index = 0
    for p_idx, (label, kappa, k) in enumerate(points):
        inst_stream = master.derive(10_000 + p_idx)
        if cfg.kind == "icl_sweep":
            inst = make_icl_instance(inst_stream, cfg.d, kappa ** (1.0 / 3.0), sigma_min=1.0)
        else:
            inst = make_mf_instance(inst_stream, cfg.d, cfg.r, k, kappa, lambda_max=1.0)
        for rep in range(cfg.replicates):
            init_stream = master.derive(20_000 + p_idx * 1_000 + rep)
            if cfg.kind == "icl_sweep":
                init = np.zeros((cfg.d, cfg.d))
            else:
                init = scaled_orthonormal_init(init_stream, cfg.d, k, cfg.alpha)
            for algorithm in cfg.algorithms:
                traj_stream = master.derive(30_000 + cell_index)
                cell_index += 1
                sched = _make_schedule(cfg, algorithm, inst)
                path = os.path.join(out_dir, f"{cfg.kind}_{algorithm}_{label}_rep{rep}.csv")
                diagnostic_t = None
                try:
                    traj = run_trajectory(
                        inst,
                        OptimizerConfig(algorithm),
                        sched,
                        init,
                        cfg.T,
                        stream=traj_stream,
                        stop_below=cfg.epsilon,
                    )
                    records = traj.records
                except NumericalDivergenceError as exc:
                    records = exc.records
                    diagnostic_t = exc.iteration
                write_records_csv(path, records, diagnostic_t=diagnostic_t)
                csv_paths.append(path)
                errors = [rec.spectral_error for rec in records]
                if rep == 0 and records:
                    curves[algorithm][label] = ([rec.t for rec in records], errors)
                for eps in cfg.epsilons:
                    summary_rows.append(
                        {
                            "algorithm": algorithm,
                            "kappa": kappa,
                            "k": k,
                            "replicate": rep,
                            "epsilon": eps,
                            "first_hit": first_hit_time(errors, eps),
                            "final_error": errors[-1] if errors else float("nan"),
                            "iterations": len(records) - 1,
                        }
                    )
    summary_path = os.path.join(out_dir, "summary.csv")
    with open(summary_path, "w", newline="\n") as fh:
        fh.write("algorithm,kappa,k,replicate,epsilon,first_hit,final_error,iterations\n")
        for row in summary_rows:
            fh.write(
                f"{row['algorithm']},{format_float(row['kappa'])},{row['k']},"
                f"{row['replicate']},{format_float(row['epsilon'])},"
                f"{format_float(row['first_hit'])},{format_float(row['final_error'])},"
                f"{row['iterations']}\n"
            )
    figure_paths: list[str] = []
    for algorithm, series in curves.items():
        if series:
            fig_path = os.path.join(out_dir, f"{cfg.kind}_{algorithm}.svg")
            emit_svg_plot(
                series,
                title=f"{algorithm} ({cfg.kind})",
                xlabel="iteration",
                ylabel="spectral error",
                path=fig_path,
            )
            figure_paths.append(fig_path)
    meta = _write_metadata(cfg, out_dir)
    return RunOutput(
        csv_paths=csv_paths, summary_path=summary_path, metadata_path=meta,
        summary_rows=summary_rows, figure_paths=figure_paths,
    )


def _run_lower_bound(cfg: ExperimentConfig, out_dir: str) -> RunOutput:
    csv_paths: list[str] = []
    summary_rows: list[dict] = []
    for kappa in cfg.kappa:
        T = cfg.T
        if cfg.family == "mf":
            eta0 = cfg.lb_eta0 if cfg.lb_eta0 is not None else cfg.r0 / 4.0
        else:
            eta0 = cfg.lb_eta0 if cfg.lb_eta0 is not None else 1.0
        etas = eta0 * cfg.lb_rho ** np.arange(T + 1)
        if cfg.family == "quadratic":
            hq = build_hard_quadratic(kappa)
            init = adversarial_quadratic_init(kappa, etas[0] / kappa, etas, T)
            run = signgd_quadratic_run(hq, init, etas, T)
            metric = np.linalg.norm(run.iterates, axis=1)
            hit, eps = run.first_hit, init.epsilon
        elif cfg.family == "mf":
            hard = build_hard_mf_instance(kappa, etas, r0=cfg.r0)
            res = run_hard_mf(hard, etas, T)
            metric, hit, eps = res.metric, res.first_hit, hard.epsilon
        else:
            hard = build_hard_icl_instance(kappa, etas)
            res = run_hard_icl(hard, etas, T)
            metric, hit, eps = res.metric, res.first_hit, hard.epsilon
        path = os.path.join(out_dir, f"lower_bound_{cfg.family}_kappa{kappa:g}.csv")
        with open(path, "w", newline="\n") as fh:
            fh.write("t,metric\n")
            for t, v in enumerate(metric):
                fh.write(f"{t},{format_float(v)}\n")
        csv_paths.append(path)
        bound = (kappa - 1.0) / 4.0
        summary_rows.append(
            {
                "family": cfg.family,
                "kappa": kappa,
                "epsilon": eps,
                "first_hit": hit,
                "bound": bound,
                "satisfied": hit >= bound,
            }
        )
    summary_path = os.path.join(out_dir, "lower_bound_summary.csv")
    with open(summary_path, "w", newline="\n") as fh:
        fh.write("family,kappa,epsilon,first_hit,bound,satisfied\n")
        for row in summary_rows:
            fh.write(
                f"{row['family']},{format_float(row['kappa'])},{format_float(row['epsilon'])},"
                f"{format_float(row['first_hit'])},{format_float(row['bound'])},"
                f"{int(row['satisfied'])}\n"
            )
    meta = _write_metadata(cfg, out_dir)
    return RunOutput(
        csv_paths=csv_paths, summary_path=summary_path, metadata_path=meta,
        summary_rows=summary_rows,
    )


# ---------------------------------------------------------------------------
# Preconditioner comparison (Muon vs ScaledGD blocks along a Muon run)
# ---------------------------------------------------------------------------


@dataclass
class PreconditionerReport:
    """k x k preconditioner blocks along a Muon trajectory.

    ``muon_blocks`` holds (grad^T grad)^(1/2), ``scaledgd_blocks`` holds
    U^T U; ``normalized_differences`` is the Frobenius distance between the
    trace-normalized blocks (reported, not asserted: the proportionality
    between the two preconditioners is a heuristic, not a theorem).
    """

    steps: tuple[int, ...]
    muon_blocks: list[np.ndarray]
    scaledgd_blocks: list[np.ndarray]
    normalized_differences: list[float]
    heatmap_paths: list[str] = field(default_factory=list)
    difference_path: str | None = None


def psd_sqrt(a: np.ndarray) -> np.ndarray:
    """Symmetric PSD square root via the eigendecomposition; eigenvalues
    rounded up to zero at the -1e-10 * lambda_max level, harder negativity
    raises."""
    f = symmetric_eig(a)
    lam = f.eigenvalues
    floor = -1e-10 * max(lam[0], 0.0)
    if lam[-1] < floor:
        raise PreconditionError(f"matrix is not PSD: min eigenvalue {lam[-1]:.3e}")
    return (f.eigenvectors * np.sqrt(np.clip(lam, 0.0, None))) @ f.eigenvectors.T


def preconditioner_report(
    d: int = 10,
    r: int = 5,
    k: int = 5,
    alpha: float = 1e-10,
    steps: tuple[int, ...] = (0, 500, 1000),
    seed: int = 42,
    kappa: float = 5.0,
    T: int | None = None,
    out_dir: str | None = None,
) -> PreconditionerReport:
    """Run exact-msign Muon on a small factorization task and compare its
    implicit preconditioner block with ScaledGD's at the requested steps."""
    master = RandomStream(seed)
    inst = make_mf_instance(master.derive(1), d, r, k, kappa, lambda_max=1.0)
    init = scaled_orthonormal_init(master.derive(2), d, k, alpha)
    if T is None:
        T = max(steps)
    sched = PlateauSchedule(initial_eta=math.sqrt(inst.lambda_max))
    traj = run_trajectory(
        inst, OptimizerConfig("muon"), sched, init, T, stream=master.derive(3),
        keep_iterates=True,
    ) if T > 0 else None
    iterates = traj.iterates if traj is not None else [init]
    muon_blocks, sgd_blocks, diffs = [], [], []
    for s in steps:
        if s >= len(iterates):
            raise PreconditionError(f"step {s} beyond trajectory length {len(iterates)}")
        u = iterates[s]
        _, grad = mf_loss_grad(inst, u)
        p_muon = psd_sqrt(grad.T @ grad)
        p_sgd = u.T @ u
        muon_blocks.append(p_muon)
        sgd_blocks.append(p_sgd)
        tm, ts = np.trace(p_muon), np.trace(p_sgd)
        if tm > 0 and ts > 0:
            diffs.append(float(np.linalg.norm(p_muon / tm - p_sgd / ts)))
        else:
            diffs.append(float("nan"))
    heatmaps: list[str] = []
    diff_path = None
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        for s, pm, ps in zip(steps, muon_blocks, sgd_blocks):
            pa = os.path.join(out_dir, f"precond_muon_t{s}.svg")
            pb = os.path.join(out_dir, f"precond_scaledgd_t{s}.svg")
            emit_svg_heatmap(pm, title=f"Muon preconditioner block, t={s}", path=pa)
            emit_svg_heatmap(ps, title=f"ScaledGD preconditioner block, t={s}", path=pb)
            heatmaps.extend([pa, pb])
        diff_path = os.path.join(out_dir, "precond_differences.csv")
        with open(diff_path, "w", newline="\n") as fh:
            fh.write("t,normalized_difference\n")
            for s, v in zip(steps, diffs):
                fh.write(f"{s},{format_float(v)}\n")
    return PreconditionerReport(
        steps=tuple(steps),
        muon_blocks=muon_blocks,
        scaledgd_blocks=sgd_blocks,
        normalized_differences=diffs,
        heatmap_paths=heatmaps,
        difference_path=diff_path,
    )


def kronecker_identity_gap(d: int = 4, k: int = 2, seed: int = 7) -> float:
    """Max deviation of blockwise preconditioning from the explicit
    I-kron-P product applied to the row-major vectorized gradient."""
    stream = RandomStream(seed)
    g = stream.gaussian_matrix(d, k)
    p = psd_sqrt(g.T @ g)
    full = np.kron(np.eye(d), p)
    via_kron = full @ g.reshape(-1)
    via_block = (g @ p).reshape(-1)
    return float(np.max(np.abs(via_kron - via_block)))


# ---------------------------------------------------------------------------
# Verification suites
# ---------------------------------------------------------------------------


@dataclass
class VerifyReport:
    lines: list[str]
    passed: bool


def finite_difference_gradient(loss_fn, x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Entrywise central differences of a scalar loss; the independent
    oracle for analytic gradients."""
    g = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    while not it.finished:
        idx = it.multi_index
        xp, xm = x.copy(), x.copy()
        xp[idx] += h
        xm[idx] -= h
        g[idx] = (loss_fn(xp) - loss_fn(xm)) / (2.0 * h)
        it.iternext()
    return g


def _suite_msign(seed: int = 2024):
    stream = RandomStream(seed)
    worst = 0.0
    for _ in range(200):
        d = 2 + int(stream.uniform(0, 31))
        k = 1 + int(stream.uniform(0, min(d, 16)))
        z = stream.gaussian_matrix(d, k)
        m = msign_exact(z)
        gram = m.T @ m if d >= k else m @ m.T
        worst = max(worst, float(np.linalg.norm(gram - np.eye(min(d, k)))))
        worst = max(worst, float(np.linalg.norm(msign_exact(m) - m, 2)))
        c = stream.uniform(0.001, 1000.0)
        worst = max(worst, float(np.linalg.norm(msign_exact(c * z) - m, 2)))
    if worst > 1e-10:
        return False, f"exact msign property residual {worst:.3e} > 1e-10"
    ns_worst = 0.0
    for i in range(100):
        d = 4 + int(stream.uniform(0, 29))
        k = 2 + int(stream.uniform(0, min(d, 16) - 1))
        u = stream.haar_orthonormal(d, k)
        v = stream.haar_orthonormal(k, k)
        svals = stream.uniforms(k, 1e-3, 1.0)
        svals[0] = 1.0
        z = (u * svals) @ v.T
        res = msign_newton_schulz(z)
        ns_worst = max(ns_worst, float(np.linalg.norm(res.matrix - msign_exact(z), 2)))
    if ns_worst > 1e-6:
        return False, f"Newton-Schulz vs exact gap {ns_worst:.3e} > 1e-6"
    return True, f"exact residual {worst:.3e}, Newton-Schulz gap {ns_worst:.3e}"


def _suite_oracle(seed: int = 2024):
    master = RandomStream(seed)
    worst = 0.0
    r = 4
    for i, k in enumerate((r, r + 3, 20)):
        inst = make_mf_instance(master.derive(100 + i), 20, r, k, kappa=25.0)
        stream = master.derive(200 + i)
        # one eta realization drives both the full run and the oracle
        etas = materialize_etas(ExponentialSchedule(rho=0.5, base_scale=1.0), 101, stream)
        sigma0 = stream.uniforms(r, 0.05, 0.95) * etas[0]
        init = aligned_mf_init(inst, sigma0, stream)
        full = run_trajectory(
            inst, OptimizerConfig("muon"), SequenceSchedule(etas), init.matrix, 100,
            keep_iterates=True,
        )
        worst = max(worst, oracle_vs_full_divergence(decoupled_mf_trajectory(init, etas[:100]), full.iterates))
    icl = make_icl_instance(master.derive(300), 20, 625.0 ** (1.0 / 3.0), sigma_min=1.0)
    stream = master.derive(301)
    etas = materialize_etas(ExponentialSchedule(rho=0.5, base_scale=1.0), 100, stream)
    full = run_trajectory(
        icl, OptimizerConfig("muon"), SequenceSchedule(etas), np.zeros((20, 20)), 100,
        keep_iterates=True,
    )
    worst = max(worst, oracle_vs_full_divergence(decoupled_icl_trajectory(icl, etas), full.iterates))
    ok = worst <= 1e-10
    return ok, f"decoupling gap {worst:.3e} (tolerance 1e-10)"


def _suite_lemmas(seed: int = 2024):
    margins = {
        "mf": sweep_mf_bounds(1000, seed),
        "icl": sweep_icl_bounds(1000, seed + 1),
        "varying": sweep_mf_bounds_varying(1000, seed + 2),
    }
    never_zero = sweep_never_zero(10_000, 200, seed + 3)
    ok = all(m >= -FLOAT_SLACK for m in margins.values()) and never_zero
    detail = ", ".join(f"{k} margin {v:.3e}" for k, v in margins.items())
    return ok, detail + f", never-zero {never_zero}"


def _suite_lowerbounds():
    lines = []
    ok = True
    for kappa in (21.0, 101.0, 401.0):
        T = 600
        etas = 0.98 ** np.arange(T + 1)
        hq = build_hard_quadratic(kappa)
        init = adversarial_quadratic_init(kappa, 1.0 / kappa, etas, T)
        run = signgd_quadratic_run(hq, init, etas, T)
        bound = (kappa - 1.0) / 4.0
        ok = ok and run.first_hit >= bound
        lines.append(f"quadratic kappa={kappa:g} hit={run.first_hit} bound={bound:g}")
    etas = (1.0 / 64.0) * 0.98 ** np.arange(601)
    hard_mf = build_hard_mf_instance(41.0, etas)
    res_mf = run_hard_mf(hard_mf, etas, 600)
    ok = ok and res_mf.first_hit >= 10.0 and res_mf.slice_deviation <= 1e-14
    lines.append(f"mf kappa=41 hit={res_mf.first_hit} slice_dev={res_mf.slice_deviation:.2e}")
    etas = 0.98 ** np.arange(601)
    hard_icl = build_hard_icl_instance(101.0, etas)
    res_icl = run_hard_icl(hard_icl, etas, 600)
    ok = ok and res_icl.first_hit >= 25.0 and res_icl.slice_deviation <= 1e-14
    lines.append(f"icl kappa=101 hit={res_icl.first_hit} slice_dev={res_icl.slice_deviation:.2e}")
    return ok, "; ".join(lines)


def _suite_gradients(seed: int = 2024):
    master = RandomStream(seed)
    worst = 0.0
    for i in range(50):
        inst = make_mf_instance(master.derive(i), d=6, r=2, k=3, kappa=10.0)
        u = master.derive(1000 + i).gaussian_matrix(6, 3)
        _, grad = mf_loss_grad(inst, u)
        fd = finite_difference_gradient(lambda x: mf_loss_grad(inst, x)[0], u)
        worst = max(worst, float(np.linalg.norm(fd - grad) / max(1.0, np.linalg.norm(grad))))
    for i in range(50):
        inst = make_icl_instance(master.derive(5000 + i), d=5, kappa_s=3.0)
        q = master.derive(6000 + i).gaussian_matrix(5, 5)
        _, grad = icl_loss_grad(inst, q)
        fd = finite_difference_gradient(lambda x: icl_loss_grad(inst, x)[0], q)
        worst = max(worst, float(np.linalg.norm(fd - grad) / max(1.0, np.linalg.norm(grad))))
    ok = worst <= 1e-6
    return ok, f"max relative finite-difference error {worst:.3e}"


def _suite_montecarlo(seed: int = 2024):
    master = RandomStream(seed)
    inst = make_icl_instance(master.derive(1), d=6, kappa_s=2.0)
    worst_sigmas = 0.0
    for i in range(10):
        q = master.derive(100 + i).gaussian_matrix(6, 6) * 0.5
        closed, _ = icl_loss_grad(inst, q)
        est, se = icl_monte_carlo_loss(inst, q, master.derive(200 + i), 100_000)
        if se == 0.0:
            if est != closed:
                return False, "zero-variance estimate disagrees with closed form"
            continue
        worst_sigmas = max(worst_sigmas, abs(est - closed) / se)
    ok = worst_sigmas <= 5.0
    return ok, f"max |estimate - closed|/SE = {worst_sigmas:.2f} (limit 5)"


def verify(suite: str) -> VerifyReport:
    """Run a named verification suite; returns machine-readable result lines
    (``SUITE <name> PASS|FAIL <detail>``) and the overall outcome."""
    if suite not in SUITES:
        raise PreconditionError(f"unknown suite {suite!r}; options: {SUITES}")
    runners = {
        "msign": _suite_msign,
        "oracle": _suite_oracle,
        "lemmas": _suite_lemmas,
        "lowerbounds": _suite_lowerbounds,
        "gradients": _suite_gradients,
        "montecarlo": _suite_montecarlo,
    }
    names = list(runners) if suite == "all" else [suite]
    lines, passed = [], True
    for name in names:
        try:
            ok, detail = runners[name]()
        except Exception as exc:  # a crashed suite is a failed suite
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        passed = passed and ok
        lines.append(f"SUITE {name} {'PASS' if ok else 'FAIL'} {detail}")
    return VerifyReport(lines=lines, passed=passed)
