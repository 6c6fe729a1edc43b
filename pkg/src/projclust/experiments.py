"""Desk-scale experiment harness emitting CSV rows.

Each experiment is a pure function of its parameters and a master seed:
every cell (parameter combination x repetition) gets its own random
streams, derived from the master seed and the cell index, so reruns are
byte-identical and repetitions may be evaluated in parallel without
changing the output.  Each row carries the master seed and repetition
index, plus the matching theoretical-bound column so downstream plots
need no recomputation.

Set PROJCLUST_THREADS to evaluate independent cells with a thread pool;
row order stays fixed by cell index.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import bounds as bnd
from .clusterer import ClusterConfig, classify_values, clustering_error, scan_directions
from .datagen import (
    make_rank_spec,
    make_spherical_spec,
    sample_dataset,
    sample_nongaussian_dataset,
)
from .errors import DomainError
from .mathkit import RngStream, q_function, q_inverse
from .projection import projected_mixture

_DATA_STREAM_BASE = 1_000_000
_SEED_STREAM_BASE = 2_000_000
_GAMMA_CHUNK = 5_000

# Scans below consume the full budget themselves, so the config target is
# inert; any valid value works.
_FULL_SCAN_TARGET = 0.25


def _worker_count() -> int:
    try:
        return max(1, int(os.environ.get("PROJCLUST_THREADS", "1")))
    except ValueError:
        return 1


def _parallel_map(fn, items):
    workers = _worker_count()
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _cell_streams(seed: int, cell: int) -> tuple[RngStream, int]:
    """Data stream and derived scan seed for one experiment cell."""
    data_stream = RngStream(seed, _DATA_STREAM_BASE + cell)
    scan_seed = RngStream(seed, _SEED_STREAM_BASE + cell).derive_seed()
    return data_stream, scan_seed


def _realized_error(scan, labels) -> float:
    """Clustering error of the scanned boundary on the sampled points."""
    if scan.thresholds is None:
        return 0.5
    predicted = classify_values(scan.values, scan.thresholds, scan.orientation)
    return clustering_error(predicted, labels)


def _population_error(spec, scan) -> float:
    """Exact error of the scanned boundary under the generating mixture.

    The scan projects onto unit directions, matching the normalisation of
    :func:`projected_mixture`, so the thresholds apply directly to the
    exact projected component parameters.
    """
    if scan.thresholds is None:
        return 0.5
    mix = projected_mixture(spec, scan.direction)
    ts = scan.thresholds
    comps = ((mix.mu1, mix.sigma1, mix.w, 0), (mix.mu2, mix.sigma2, 1.0 - mix.w, 1))
    err = 0.0
    for mu, sigma, weight, label in comps:
        if ts.size == 1:
            mass_upper = q_function((ts[0] - mu) / sigma)
            wrong = mass_upper if scan.orientation != label else 1.0 - mass_upper
        else:
            inside = q_function((ts[0] - mu) / sigma) - q_function((ts[1] - mu) / sigma)
            wrong = inside if scan.orientation != label else 1.0 - inside
        err += weight * wrong
    return min(err, 1.0 - err)


def _scan_errors(data, cfg):
    """Realized and estimated error for every direction in the budget."""
    rows = []
    for scan in scan_directions(data, cfg):
        rows.append((scan.index, _realized_error(scan, data.labels),
                     scan.estimated_error))
    return rows


def _count_until(data, cfg, target: float, spec) -> tuple[int, bool]:
    """Directions scanned until both the true (population) and the
    estimated error drop below the target."""
    for scan in scan_directions(data, cfg):
        if (
            scan.estimated_error < target
            and _population_error(spec, scan) < target
        ):
            return scan.index, True
    return cfg.budget, False


def write_csv(path: str, fieldnames, rows) -> str:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(fieldnames))
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    return path


# ---------------------------------------------------------------------------
# gamma-cdf: empirical distribution of the projected separation
# ---------------------------------------------------------------------------

GAMMA_CDF_FIELDS = (
    "seed", "rep", "p", "c", "directions",
    "gamma", "cdf_empirical", "prob_exceed_empirical", "prob_exceed_bound",
)


def gamma_cdf(p: int = 1000, c: float = 1.0, directions: int = 100_000,
              seed: int = 0, grid_points: int = 120) -> list[dict]:
    """Empirical CDF of the 1-D separation under random directions.

    Directions are simulated exactly (the separation of a spherical pair
    along a direction A is c*sqrt(p)*|A_1|/||A||), so no dataset is
    needed.  The bound column is the spherical direction-probability
    lower bound on P(separation >= gamma) with tau optimised per row.
    """
    gammas = sample_gamma_values(p, c, directions, seed)
    hi = float(np.quantile(gammas, 0.999))
    grid = np.linspace(0.0, max(hi, 1.5 * c), grid_points)
    sorted_g = np.sort(gammas)
    rows = []
    for g in grid:
        cdf = float(np.searchsorted(sorted_g, g, side="right")) / directions
        if g == 0.0:
            bound_val = 1.0
        else:
            _, report = bnd.optimize_tau(
                lambda t: bnd.spherical_direction_prob(g, c, p, t)
            )
            bound_val = report.value
        rows.append({
            "seed": seed, "rep": 0, "p": p, "c": c, "directions": directions,
            "gamma": g, "cdf_empirical": cdf,
            "prob_exceed_empirical": 1.0 - cdf,
            "prob_exceed_bound": bound_val,
        })
    return rows


def sample_gamma_values(p: int, c: float, directions: int, seed: int,
                        stream_base: int = 0) -> np.ndarray:
    """Projected separations of a spherical c-separated pair over many
    random directions, computed in chunks with per-chunk streams."""
    if p < 1 or directions < 1:
        raise DomainError("p and directions must be >= 1")
    out = np.empty(directions)
    done = 0
    chunk_index = 0
    scale = c * math.sqrt(p)
    while done < directions:
        todo = min(_GAMMA_CHUNK, directions - done)
        gen = RngStream(seed, stream_base + chunk_index).generator()
        a = gen.standard_normal((todo, p))
        out[done: done + todo] = scale * np.abs(a[:, 0]) / np.linalg.norm(a, axis=1)
        done += todo
        chunk_index += 1
    return out


# ---------------------------------------------------------------------------
# acc-vs-sep: best true error at a fixed projection budget
# ---------------------------------------------------------------------------

ACC_VS_SEP_FIELDS = (
    "seed", "rep", "p", "c", "n", "budget",
    "min_true_error", "true_error_at_best_estimate",
    "bound_q_1d", "bound_q_hd",
)


def acc_vs_sep(p_list=(3, 100), c_list=(0.5, 1.0, 1.5, 2.0), n: int = 10_000,
               budget: int = 50, repeats: int = 10, seed: int = 0,
               learner: str = "mom", shape: str = "gaussian") -> list[dict]:
    """Minimum true clustering error over a fixed number of directions,
    next to the 1-D bound Q(c) and the high-dimensional bound
    Q(c*sqrt(p)/2)."""
    cells = [
        (ci, p, c, rep)
        for ci, (p, c, rep) in enumerate(
            (p, c, rep) for p in p_list for c in c_list for rep in range(repeats)
        )
    ]

    def run(cell):
        ci, p, c, rep = cell
        data_stream, scan_seed = _cell_streams(seed, ci)
        spec = make_spherical_spec(p, c)
        if shape == "gaussian":
            data = sample_dataset(spec, n, data_stream)
        else:
            data = sample_nongaussian_dataset(spec, shape, n, data_stream)
        cfg = ClusterConfig(
            target_error=_FULL_SCAN_TARGET, budget=budget, learner=learner,
            seed=scan_seed,
        )
        errors = _scan_errors(data, cfg)
        min_true = min(e for _, e, _ in errors)
        best_est = min(errors, key=lambda row: (row[2], row[0]))
        return {
            "seed": seed, "rep": rep, "p": p, "c": c, "n": n, "budget": budget,
            "min_true_error": min_true,
            "true_error_at_best_estimate": best_est[1],
            "bound_q_1d": q_function(c),
            "bound_q_hd": q_function(0.5 * c * math.sqrt(p)),
        }

    return _parallel_map(run, cells)


# ---------------------------------------------------------------------------
# proj-vs-sep: directions needed to hit a prescribed error
# ---------------------------------------------------------------------------

PROJ_VS_SEP_FIELDS = (
    "seed", "rep", "p", "c", "n", "target_error",
    "projections", "achieved", "bound_projections",
)


def proj_vs_sep(p: int = 100, c_list=(0.6, 0.8, 1.0, 1.5), n: int = 10_000,
                target_error: float = 0.2, repeats: int = 30, seed: int = 0,
                max_budget: int = 500, learner: str = "mom") -> list[dict]:
    """Directions scanned until both the true and the estimated error of
    some projection drop below the target, next to the finite-p inverse
    probability bound."""
    gamma = q_inverse(target_error)
    bound_cache = {
        c: bnd.expected_projections_spherical(gamma, c, p).value for c in c_list
    }
    cells = [
        (ci, c, rep)
        for ci, (c, rep) in enumerate(
            (c, rep) for c in c_list for rep in range(repeats)
        )
    ]

    def run(cell):
        ci, c, rep = cell
        data_stream, scan_seed = _cell_streams(seed, ci)
        spec = make_spherical_spec(p, c)
        data = sample_dataset(spec, n, data_stream)
        cfg = ClusterConfig(
            target_error=target_error, budget=max_budget, learner=learner,
            seed=scan_seed,
        )
        count, achieved = _count_until(data, cfg, target_error, spec)
        return {
            "seed": seed, "rep": rep, "p": p, "c": c, "n": n,
            "target_error": target_error,
            "projections": count, "achieved": int(achieved),
            "bound_projections": bound_cache[c],
        }

    return _parallel_map(run, cells)


# ---------------------------------------------------------------------------
# err-vs-proj: error as the budget grows
# ---------------------------------------------------------------------------

ERR_VS_PROJ_FIELDS = (
    "seed", "rep", "p", "c", "n", "m",
    "best_true_error", "true_error_at_best_estimate",
    "bound_q_1d", "bound_q_hd",
)


def err_vs_proj(p: int = 100, c: float = 2.0, n: int = 10_000, budget: int = 50,
                repeats: int = 10, seed: int = 0,
                learner: str = "mom") -> list[dict]:
    """Prefix-minimum true error after m = 1..budget directions, plus the
    true error of the best-estimate direction seen so far."""
    def run(cell):
        ci, rep = cell
        data_stream, scan_seed = _cell_streams(seed, ci)
        data = sample_dataset(make_spherical_spec(p, c), n, data_stream)
        cfg = ClusterConfig(
            target_error=_FULL_SCAN_TARGET, budget=budget, learner=learner,
            seed=scan_seed,
        )
        rows = []
        best_true = math.inf
        best_est = math.inf
        true_at_best_est = 0.5
        for index, true_err, est_err in _scan_errors(data, cfg):
            best_true = min(best_true, true_err)
            if est_err < best_est:
                best_est = est_err
                true_at_best_est = true_err
            rows.append({
                "seed": seed, "rep": rep, "p": p, "c": c, "n": n, "m": index,
                "best_true_error": best_true,
                "true_error_at_best_estimate": true_at_best_est,
                "bound_q_1d": q_function(c),
                "bound_q_hd": q_function(0.5 * c * math.sqrt(p)),
            })
        return rows

    cells = [(ci, rep) for ci, rep in enumerate(range(repeats))]
    return [row for rows in _parallel_map(run, cells) for row in rows]


# ---------------------------------------------------------------------------
# rank-acc / rank-proj: rank-controlled covariances
# ---------------------------------------------------------------------------

RANK_ACC_FIELDS = (
    "seed", "rep", "p", "c", "zeta", "r", "n", "budget", "min_true_error",
    "bound_q_1d",
)


def rank_acc(p: int = 200, c: float = 0.5, zeta_list=(0.035, 0.1, 0.335),
             n: int = 5000, budget: int = 50, repeats: int = 10, seed: int = 0,
             learner: str = "mom") -> list[dict]:
    """Best true error at a fixed budget as the covariance rank varies."""
    specs = {
        zeta: make_rank_spec(p, c, zeta, RngStream(seed, 42))
        for zeta in zeta_list
    }
    cells = [
        (ci, zeta, rep)
        for ci, (zeta, rep) in enumerate(
            (z, rep) for z in zeta_list for rep in range(repeats)
        )
    ]

    def run(cell):
        ci, zeta, rep = cell
        spec, rank = specs[zeta]
        data_stream, scan_seed = _cell_streams(seed, ci)
        data = sample_dataset(spec, n, data_stream)
        cfg = ClusterConfig(
            target_error=_FULL_SCAN_TARGET, budget=budget, learner=learner,
            seed=scan_seed,
        )
        errors = _scan_errors(data, cfg)
        return {
            "seed": seed, "rep": rep, "p": p, "c": c, "zeta": zeta, "r": rank,
            "n": n, "budget": budget,
            "min_true_error": min(e for _, e, _ in errors),
            "bound_q_1d": q_function(c),
        }

    return _parallel_map(run, cells)


RANK_PROJ_FIELDS = (
    "seed", "rep", "p", "c", "zeta", "r", "n", "target_error",
    "projections", "achieved", "bound_projections",
)


def rank_proj(p: int = 200, c: float = 0.5, zeta_list=(0.035, 0.1, 0.335),
              n: int = 5000, target_error: float = 0.04, repeats: int = 20,
              seed: int = 0, max_budget: int = 2000, tau1: float = 0.2,
              tau2: float = 0.5, learner: str = "mom") -> list[dict]:
    """Directions needed for a prescribed error as the rank varies, next
    to the rank-mode inverse probability bound at the given (tau1, tau2).
    An infinite bound means the concentration terms swallow the main term
    at this scale."""
    gamma = q_inverse(target_error)
    specs = {}
    for zeta in zeta_list:
        spec, rank = make_rank_spec(p, c, zeta, RngStream(seed, 42))
        bound = bnd.expected_projections_nonspherical(
            spec, gamma, mode="rank", tau1=tau1, tau2=tau2
        )
        specs[zeta] = (spec, rank, bound.value)
    cells = [
        (ci, zeta, rep)
        for ci, (zeta, rep) in enumerate(
            (z, rep) for z in zeta_list for rep in range(repeats)
        )
    ]

    def run(cell):
        ci, zeta, rep = cell
        spec, rank, bound_value = specs[zeta]
        data_stream, scan_seed = _cell_streams(seed, ci)
        data = sample_dataset(spec, n, data_stream)
        cfg = ClusterConfig(
            target_error=target_error, budget=max_budget, learner=learner,
            seed=scan_seed,
        )
        count, achieved = _count_until(data, cfg, target_error, spec)
        return {
            "seed": seed, "rep": rep, "p": p, "c": c, "zeta": zeta, "r": rank,
            "n": n, "target_error": target_error,
            "projections": count, "achieved": int(achieved),
            "bound_projections": bound_value,
        }

    return _parallel_map(run, cells)


EXPERIMENTS = {
    "gamma-cdf": (gamma_cdf, GAMMA_CDF_FIELDS),
    "acc-vs-sep": (acc_vs_sep, ACC_VS_SEP_FIELDS),
    "proj-vs-sep": (proj_vs_sep, PROJ_VS_SEP_FIELDS),
    "err-vs-proj": (err_vs_proj, ERR_VS_PROJ_FIELDS),
    "rank-acc": (rank_acc, RANK_ACC_FIELDS),
    "rank-proj": (rank_proj, RANK_PROJ_FIELDS),
}
