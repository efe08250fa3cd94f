"""Experiment runner: sampling, projection, operators, spectra, reports.

A run is fully determined by its configuration and seeds; all CSV outputs
use fixed float formatting so identical configurations reproduce identical
bytes. Wall-clock times never enter the CSVs (they live in the JSON run log,
which is excluded from the determinism guarantee).
"""

import json
import os
import time
import warnings
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import zoo
from .density import kde_density
from .dm import DmConfig, default_neighbor_count, dm_spectrum
from .rbf import KernelModel, build_system
from .scalar_ops import (build_grad_matrices, laplace_beltrami_nonsymmetric,
                         laplace_beltrami_symmetric)
from .spectral import (SpectralResult, align_eigenvectors_ols,
                       solve_nonsymmetric, solve_symmetric,
                       write_alignment_csv, write_spectrum_csv)
from .tangent import first_order_svd, second_order_svd, default_neighbor_count \
    as tangent_default_K
from .vector_ops import (VectorField, bochner, build_vector_ops,
                         covariant_derivative, hodge, lichnerowicz)

MEMORY_ENV_VAR = "MANIFOLD_RBF_MEM_GIB"
DEFAULT_MEMORY_GIB = 2.0

METHODS = ("NRBF", "SRBF", "DM")
OPERATORS = ("LB", "Bochner", "Hodge", "Lich", "Covariant")
PROJECTIONS = ("Analytic", "FirstOrder", "SecondOrder")
DENSITIES = ("Analytic", "KDE", "Uniform")


@dataclass
class ExperimentConfig:
    manifold: zoo.ManifoldSpec
    N_list: list
    method: str = "NRBF"
    operator: str = "LB"
    projection: str = "Analytic"
    kernel: KernelModel = dc_field(
        default_factory=lambda: KernelModel("gaussian", 1.0))
    density: str = "Uniform"
    modes: int = 16
    seeds: list = dc_field(default_factory=lambda: [0])
    N_p: int = None
    K: int = None                  # tangent-estimation neighbors
    dm_K: int = None
    dm_epsilon: float = None
    sample_mode: str = "random_intrinsic"
    compare_count: int = 12        # modes entering the convergence error
    truth_count: int = 40          # truth entries to compute where applicable

    def validate(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.operator not in OPERATORS:
            raise ValueError(f"operator must be one of {OPERATORS}")
        if self.projection not in PROJECTIONS:
            raise ValueError(f"projection must be one of {PROJECTIONS}")
        if self.density not in DENSITIES:
            raise ValueError(f"density must be one of {DENSITIES}")
        if self.method == "DM" and self.operator != "LB":
            raise ValueError("the diffusion-maps baseline only estimates the "
                             "scalar Laplacian (operator=LB)")
        if self.operator == "Covariant" and self.manifold.kind != "ellipse":
            raise ValueError("the covariant-derivative check runs on the "
                             "ellipse demo manifold")
        if self.operator in ("Bochner", "Hodge", "Lich") and \
                self.manifold.kind not in ("sphere", "ellipse"):
            raise ValueError("vector operators run where vector truth or the "
                             "1D demo is available (sphere or ellipse)")
        if self.N_p is not None and self.N_p < max(self.N_list):
            raise ValueError("N_p must be at least the operator cloud size")

    def to_dict(self):
        return {
            "manifold": self.manifold.to_dict(),
            "N_list": list(self.N_list),
            "method": self.method,
            "operator": self.operator,
            "projection": self.projection,
            "kernel": self.kernel.to_dict(),
            "density": self.density,
            "modes": self.modes,
            "seeds": list(self.seeds),
            "N_p": self.N_p,
            "K": self.K,
            "dm_K": self.dm_K,
            "dm_epsilon": self.dm_epsilon,
            "sample_mode": self.sample_mode,
            "compare_count": self.compare_count,
            "truth_count": self.truth_count,
        }

    @staticmethod
    def from_dict(cfg):
        cfg = dict(cfg)
        cfg["manifold"] = zoo.ManifoldSpec.from_dict(cfg["manifold"])
        if "kernel" in cfg:
            cfg["kernel"] = KernelModel.from_dict(cfg["kernel"])
        return ExperimentConfig(**cfg)


def memory_cap_bytes():
    gib = float(os.environ.get(MEMORY_ENV_VAR, DEFAULT_MEMORY_GIB))
    return gib * 2 ** 30


def estimate_run_bytes(config, N):
    """Rough peak for the dense pipeline; used only for the refusal guard."""
    n = config.manifold.n
    if config.method == "DM":
        return 5 * 8 * N * N
    if config.operator in ("LB", "Covariant"):
        return max(n + 4, 9) * 8 * N * N
    dim = n * N
    return 7 * 8 * dim * dim


def check_memory(config, N):
    need = estimate_run_bytes(config, N)
    cap = memory_cap_bytes()
    if need > cap:
        raise RuntimeError(
            f"refusing run at N={N}: estimated {need / 2**30:.2f} GiB dense "
            f"working set exceeds the {cap / 2**30:.2f} GiB cap "
            f"(raise {MEMORY_ENV_VAR} to override)")


@dataclass
class RunRecord:
    N: int
    seed: int
    result: SpectralResult
    mode_errors: np.ndarray = None     # paired eigenvalue errors
    vec_errors: np.ndarray = None      # aligned eigenvector errors
    field_error: float = None          # covariant-derivative demo
    truth_vals: np.ndarray = None
    aligned_est_vals: np.ndarray = None
    rank_L: int = 0
    wall_time: float = 0.0


@dataclass
class Report:
    config: ExperimentConfig
    runs: list
    convergence: list                  # rows (N, mean_error)
    slope: float = None
    metadata: dict = dc_field(default_factory=dict)

    def write(self, out_dir, prefix="run"):
        os.makedirs(out_dir, exist_ok=True)
        echo = self.config.to_dict()
        for rec in self.runs:
            tag = f"{prefix}_N{rec.N}_seed{rec.seed}"
            if rec.result is not None:
                write_spectrum_csv(
                    os.path.join(out_dir, f"{tag}_spectrum.csv"),
                    rec.result, config_echo=echo)
            if rec.vec_errors is not None and rec.mode_errors is not None:
                truth_vals = rec.truth_vals
                write_alignment_csv(
                    os.path.join(out_dir, f"{tag}_alignment.csv"),
                    truth_vals, rec.aligned_est_vals, rec.vec_errors,
                    config_echo=echo)
        if self.convergence:
            rows = np.array(self.convergence, dtype=float)
            header = ("schema=convergence-v1\n"
                      "config=" + json.dumps(echo, sort_keys=True) + "\n"
                      + (f"fitted_slope={self.slope:.17g}\n"
                         if self.slope is not None else "")
                      + "N,mean_error")
            np.savetxt(os.path.join(out_dir, f"{prefix}_convergence.csv"),
                       rows, fmt=["%d", "%.17g"], delimiter=",",
                       header=header)
        log = os.path.join(out_dir, f"{prefix}_runlog.jsonl")
        with open(log, "w") as fh:
            for rec in self.runs:
                fh.write(json.dumps({
                    "N": rec.N, "seed": rec.seed,
                    "rank_L": rec.rank_L,
                    "wall_time": rec.wall_time,
                    "config": echo}, sort_keys=True) + "\n")
        with open(os.path.join(out_dir, f"{prefix}_report.json"), "w") as fh:
            json.dump({"config": echo, "slope": self.slope,
                       "convergence": self.convergence,
                       "metadata": self.metadata}, fh, sort_keys=True,
                      indent=2)


def subset_cloud(cloud, N):
    if N == cloud.N:
        return cloud
    return zoo.PointCloud(points=cloud.points[:N],
                          intrinsic=None if cloud.intrinsic is None
                          else cloud.intrinsic[:N],
                          spec=cloud.spec, seed=cloud.seed, mode=cloud.mode)


def build_projection(config, cloud_full, N):
    op_cloud = subset_cloud(cloud_full, N)
    if config.projection == "Analytic":
        return op_cloud, zoo.analytic_projection(op_cloud)
    K = config.K or tangent_default_K(config.manifold.d)
    query = np.arange(N) if cloud_full.N > N else None
    if config.projection == "FirstOrder":
        proj = first_order_svd(cloud_full, K, query_idx=query)
    else:
        proj = second_order_svd(cloud_full, K, query_idx=query)
    return op_cloud, proj


def build_density(config, op_cloud):
    if config.density == "Analytic":
        if op_cloud.mode == "random_area":
            # volume-uniform draws have constant density 1/vol(M)
            return np.full(op_cloud.N,
                           1.0 / zoo.volume(config.manifold))
        return zoo.sampling_density(config.manifold, op_cloud)
    if config.density == "KDE":
        return kde_density(op_cloud).q
    return np.ones(op_cloud.N)


def truth_basis_matrix(truth, points, count):
    """Stack the leading truth eigenfunctions as columns (scalar N x count,
    vector nN x count with coordinate-stacked rows)."""
    basis = truth.evaluate_basis(points, count)
    if truth.kind == "vector":
        return np.stack([VectorField.from_samples(b).vec for b in basis],
                        axis=1)
    return basis


def alignment_gate(result, truth, points, count, cap=0.5, window=None):
    """Select the nontrivial modes whose eigenvectors lie in the span of the
    truth eigenbasis.

    Rank truncation scatters spurious modes through the vector spectra
    (degraded copies of unresolved high-degree blocks land between the
    genuine ones), so magnitude ordering alone cannot identify the leading
    modes. The genuine modes fit the truth basis with near-zero OLS residual
    while the spurious ones sit near 1; the gap is wide, so the cap is not
    delicate. Returns (kept_indices, residuals_over_window).
    """
    nontrivial_idx = np.flatnonzero(~result.trivial)
    if window is None:
        window = max(4 * count, 120)
    nontrivial_idx = nontrivial_idx[:window]
    F = truth_basis_matrix(truth, points, count)
    gram_inv = np.linalg.pinv(F.T @ F)
    resid = np.empty(len(nontrivial_idx))
    for j, i in enumerate(nontrivial_idx):
        vec = result.vectors[:, i]
        parts = np.column_stack([vec.real, vec.imag]) \
            if np.iscomplexobj(vec) else vec[:, None]
        beta = gram_inv @ (F.T @ parts)
        resid[j] = np.linalg.norm(F @ beta - parts) / np.linalg.norm(parts)
    kept = nontrivial_idx[resid <= cap]
    return kept, resid


def paired_mode_errors(result, truth, count, candidates=None):
    """Eigenvalue errors with kernel-aware pairing.

    Truth zero modes are matched against the estimate's near-zero modes:
    a sub-threshold nontrivial estimate consumes the slot when present
    (threshold: half the first nonzero truth value); otherwise the slot is
    taken by an exact truncation zero. Remaining estimates pair positionally.
    `candidates` restricts the usable modes to a precomputed index list
    (see alignment_gate). Returns (errors, est_indices) where index -1 marks
    a slot satisfied by a truncation zero.
    """
    truth_vals = truth.expanded(count) if hasattr(truth, "expanded") \
        else np.asarray(truth, dtype=float)[:count]
    nontrivial_idx = np.flatnonzero(~result.trivial) \
        if candidates is None else np.asarray(candidates, dtype=int)
    est = np.abs(result.values[nontrivial_idx])
    first_nonzero = next((v for v in truth_vals if v > 1e-12), 1.0)
    matched = np.empty(len(truth_vals))
    indices = np.full(len(truth_vals), -1, dtype=int)
    i = 0
    for slot, t in enumerate(truth_vals):
        if t < 1e-12:
            if i < len(est) and est[i] < 0.5 * first_nonzero:
                matched[slot] = est[i]
                indices[slot] = nontrivial_idx[i]
                i += 1
            else:
                matched[slot] = 0.0
        else:
            if i >= len(est):
                raise ValueError(
                    f"spectrum provides only {len(est)} usable modes, "
                    f"comparison needs more (slot {slot})")
            matched[slot] = est[i]
            indices[slot] = nontrivial_idx[i]
            i += 1
    errors = np.abs(matched - truth_vals) / np.maximum(truth_vals, 1.0)
    return errors, indices


def _truth_for(config):
    spec = config.manifold
    if config.operator == "LB":
        if spec.kind in ("sphere", "flat_torus", "torus", "general_torus"):
            count = 4 if spec.kind == "sphere" else config.truth_count
            return zoo.scalar_eigen_truth(spec, count)
        return None
    if config.operator in ("Bochner", "Hodge", "Lich") and \
            spec.kind == "sphere":
        name = {"Bochner": "Bochner", "Hodge": "Hodge",
                "Lich": "Lichnerowicz"}[config.operator]
        return zoo.vector_eigen_truth(spec, name)
    return None


def _solve_scalar(config, op_cloud, proj, q):
    # request the full spectrum: rank truncation leaves a large trivial
    # cluster at zero, and the usable modes sit above it
    system = build_system(op_cloud, config.kernel)
    ops = build_grad_matrices(system, proj, keep_ambient=False)
    rank_L = system.rank_L
    N = op_cloud.N
    if config.method == "NRBF":
        L = laplace_beltrami_nonsymmetric(ops)
        del ops, system
        res = solve_nonsymmetric(L, N, pinv_tol=config.kernel.pinv_tol)
    else:
        pair = laplace_beltrami_symmetric(ops, q)
        del ops, system
        res = solve_symmetric(pair, N, pinv_tol=config.kernel.pinv_tol)
    return res, rank_L


def _solve_vector(config, op_cloud, proj, q):
    system = build_system(op_cloud, config.kernel)
    ops = build_grad_matrices(system, proj, keep_ambient=False)
    rank_L = system.rank_L
    vops = build_vector_ops(ops, proj)
    build = {"Bochner": bochner, "Hodge": hodge, "Lich": lichnerowicz}[
        config.operator]
    if config.method == "NRBF":
        L = build("nonsymmetric", vops)
        res = solve_nonsymmetric(L, L.shape[0],
                                 pinv_tol=config.kernel.pinv_tol)
    else:
        pair = build("symmetric", vops, q)
        dim = pair.range_basis.shape[1] if pair.range_basis is not None \
            else pair.A.shape[0]
        res = solve_symmetric(pair, dim, pinv_tol=config.kernel.pinv_tol)
    return res, rank_L


def ellipse_test_field(cloud):
    """The 1D demo field u = sin(theta) d/dtheta in ambient components."""
    th = cloud.intrinsic[:, 0]
    a = cloud.spec.a
    tau = np.column_stack([-np.sin(th), a * np.cos(th)])
    return VectorField.from_samples(np.sin(th)[:, None] * tau), th, tau


def ellipse_covariant_truth(cloud):
    """Ambient samples of the covariant derivative of the demo field
    along itself: (u u' + Gamma u^2) d/dtheta with u = sin(theta)."""
    th = cloud.intrinsic[:, 0]
    a = cloud.spec.a
    g = np.sin(th) ** 2 + a * a * np.cos(th) ** 2
    gamma = np.sin(2.0 * th) * (1.0 - a * a) / (2.0 * g)
    coef = np.sin(th) * np.cos(th) + gamma * np.sin(th) ** 2
    tau = np.column_stack([-np.sin(th), a * np.cos(th)])
    return coef[:, None] * tau


def _run_covariant(config, op_cloud, proj):
    system = build_system(op_cloud, config.kernel)
    ops = build_grad_matrices(system, proj, keep_ambient=True)
    vops = build_vector_ops(ops, proj)
    U, _th, _tau = ellipse_test_field(op_cloud)
    est = covariant_derivative(vops, system, U, U).as_samples()
    truth = ellipse_covariant_truth(op_cloud)
    err = float(np.max(np.abs(est[:, 0] - truth[:, 0])))
    return err, system.rank_L


def run_experiment(config):
    """Execute the configured study over every (N, seed) pair."""
    config.validate()
    truth = _truth_for(config)
    runs = []
    for N in config.N_list:
        check_memory(config, N)
        for seed in config.seeds:
            t0 = time.perf_counter()
            sample_N = config.N_p or N
            cloud_full = zoo.sample_manifold(config.manifold, sample_N, seed,
                                             mode=config.sample_mode)
            op_cloud, proj = build_projection(config, cloud_full, N)
            rec = RunRecord(N=N, seed=seed, result=None)
            if config.operator == "Covariant":
                rec.field_error, rec.rank_L = _run_covariant(
                    config, op_cloud, proj)
            elif config.method == "DM":
                dm_cfg = DmConfig(
                    K_neighbors=config.dm_K or default_neighbor_count(N),
                    epsilon=config.dm_epsilon)
                lam, vec, all_lam = dm_spectrum(op_cloud, dm_cfg,
                                                min(N, config.modes + 8))
                cutoff = 10.0 * config.kernel.pinv_tol * float(
                    np.max(np.abs(all_lam)))
                rec.result = SpectralResult(
                    values=lam, vectors=vec, ordering="by_real_ascending",
                    rank_L=int(np.sum(np.abs(all_lam) >= cutoff)),
                    all_values=all_lam,
                    trivial=np.abs(lam) < cutoff, trivial_cutoff=cutoff)
                rec.rank_L = rec.result.rank_L
            else:
                q = build_density(config, op_cloud)
                if config.operator == "LB":
                    rec.result, rec.rank_L = _solve_scalar(
                        config, op_cloud, proj, q)
                else:
                    rec.result, rec.rank_L = _solve_vector(
                        config, op_cloud, proj, q)
                if config.method == "NRBF" and np.any(
                        rec.result.values.real < -rec.result.trivial_cutoff):
                    warnings.warn(
                        "non-symmetric spectrum has leading modes in the "
                        "left half plane; treat them as pollution",
                        RuntimeWarning)
            if truth is not None and rec.result is not None:
                count = min(config.compare_count,
                            sum(m for _v, m in truth.values))
                candidates = None
                if truth.kind == "vector" and truth.evaluators is not None \
                        and rec.result.vectors is not None:
                    candidates, _resid = alignment_gate(
                        rec.result, truth, op_cloud.points, count)
                rec.mode_errors, idx = paired_mode_errors(
                    rec.result, truth, count, candidates=candidates)
                rec.truth_vals = truth.expanded(count)
                rec.aligned_est_vals = np.where(
                    idx >= 0, np.abs(rec.result.values[idx]), 0.0)
                if truth.evaluators is not None:
                    valid = idx >= 0
                    F = truth_basis_matrix(truth, op_cloud.points, count)
                    est_vecs = rec.result.vectors[:, idx[valid]]
                    rep = align_eigenvectors_ols(F[:, valid], est_vecs)
                    rec.vec_errors = np.full(count, np.nan)
                    rec.vec_errors[valid] = rep.per_mode_error
            rec.wall_time = time.perf_counter() - t0
            runs.append(rec)

    convergence = []
    for N in config.N_list:
        errs = [np.mean(r.mode_errors) for r in runs
                if r.N == N and r.mode_errors is not None]
        ferrs = [r.field_error for r in runs
                 if r.N == N and r.field_error is not None]
        if errs:
            convergence.append((N, float(np.mean(errs))))
        elif ferrs:
            convergence.append((N, float(np.mean(ferrs))))
    slope = None
    if len(convergence) >= 3 and all(e > 0 for _n, e in convergence):
        slope = fit_convergence_slope(convergence)
    meta = {"vector_error_metric":
            "relative discrete L2 after OLS alignment",
            "resolved_config": config.to_dict()}
    return Report(config=config, runs=runs, convergence=convergence,
                  slope=slope, metadata=meta)


def fit_convergence_slope(table):
    """Least-squares slope of log(error) against log(N)."""
    table = list(table)
    if len(table) < 3:
        raise ValueError("slope fit needs at least three (N, error) pairs")
    N = np.array([row[0] for row in table], dtype=float)
    err = np.array([row[1] for row in table], dtype=float)
    if np.any(err <= 0):
        raise ValueError("errors must be positive for a log-log fit")
    return float(np.polyfit(np.log(N), np.log(err), 1)[0])
