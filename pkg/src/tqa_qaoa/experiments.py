"""Measurement procedures: TQA time scans, initialization windows, landscapes.

Per-graph routines take a :class:`~tqa_qaoa.graphs.CostDiagonal`; the
``ensemble_*`` drivers fan them out over a list of graphs and aggregate by
arithmetic mean of the per-graph curves. Random initializations draw from
the stream ``default_rng([seed, graph_index, init_index])`` so results do
not depend on task scheduling.
"""
from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .exceptions import DegenerateError, InfeasibleError
from .graphs import CostDiagonal, Graph, build_cost_diagonal
from .optimizer import OptimizationRecord, OptimizerConfig, optimize_qaoa
from .protocols import (
    SymmetryDomain,
    angle_distance,
    canonicalize,
    random_angles,
    tqa_angles,
)
from .simulator import approximation_ratio, qaoa_energy

logger = logging.getLogger(__name__)

#: cap on random initializations per graph (2^p grows too fast beyond p ~ 12)
N_RANDOM_CAP = 4096
WINDOW_TOLERANCE = 0.01


def default_dt_grid() -> np.ndarray:
    """Time steps 0.05, 0.10, ..., 2.00."""
    return np.round(0.05 * np.arange(1, 41), 12)


def _check_grid(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float).reshape(-1)
    if grid.size == 0:
        raise InfeasibleError("time-step grid is empty")
    if np.any(grid <= 0):
        raise InfeasibleError("time steps must be positive")
    if np.any(np.diff(grid) <= 0):
        raise InfeasibleError("time-step grid must be strictly ascending")
    return grid


def init_rng(seed: int, graph_index: int, init_index: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(graph_index), int(init_index)])


def pool_map(fn: Callable, tasks: Sequence, threads: Optional[int] = None) -> list:
    """Ordered map over ``tasks``; uses worker processes when ``threads > 1``."""
    threads = threads or os.cpu_count() or 1
    if threads <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * threads))))


# -- TQA time scans ----------------------------------------------------------


@dataclass
class TimeScan:
    p: int
    dt_grid: np.ndarray
    ratios: np.ndarray

    def __post_init__(self):
        self.dt_grid = _check_grid(self.dt_grid)
        self.ratios = np.asarray(self.ratios, dtype=float)
        if self.ratios.shape != self.dt_grid.shape:
            raise InfeasibleError("ratios and dt_grid must have equal length")

    @property
    def times(self) -> np.ndarray:
        return self.p * self.dt_grid


def tqa_time_scan(d: CostDiagonal, p: int, grid=None) -> TimeScan:
    """Approximation ratio of the bare (unoptimized) TQA circuit per time step."""
    grid = _check_grid(default_dt_grid() if grid is None else grid)
    ratios = [approximation_ratio(qaoa_energy(d, tqa_angles(p, dt)), d) for dt in grid]
    return TimeScan(p, grid, np.array(ratios))


def extract_t_star(scan: TimeScan) -> float:
    """Total time at the grid maximum of the ratio; the smaller time wins ties.

    A scan of three or more points that is flat everywhere has no maximum
    and raises :class:`DegenerateError`; a two-point tie is an ordinary tie.
    """
    r = scan.ratios
    if r.size > 2 and np.all(r == r[0]):
        raise DegenerateError("all ratios in the scan are equal; T* is undefined")
    return float(scan.times[int(np.argmax(r))])


def fit_optimal_step(points: Sequence[Tuple[float, float]]) -> Tuple[float, float, float]:
    """Least-squares line ``T* = slope * p + intercept``.

    Returns ``(slope, intercept, residual)`` where the residual is the sum of
    squared deviations from the fitted line.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if np.unique(pts[:, 0]).size < 2:
        raise InfeasibleError("need at least two distinct depths to fit the optimal time step")
    design = np.column_stack([pts[:, 0], np.ones(len(pts))])
    coef, *_ = np.linalg.lstsq(design, pts[:, 1], rcond=None)
    resid = float(np.sum((design @ coef - pts[:, 1]) ** 2))
    return float(coef[0]), float(coef[1]), resid


# -- QAOA launched from TQA ---------------------------------------------------


@dataclass
class TqaWindow:
    t_min: float
    t_max: float
    t_d: float
    r_best: float

    @property
    def contains_t_d(self) -> bool:
        return self.t_min <= self.t_d <= self.t_max


def extract_window(times, one_minus_r, distances, tolerance: float = WINDOW_TOLERANCE) -> TqaWindow:
    """Initialization-time window from a scan of optimized results.

    ``[t_min, t_max]`` is the maximal contiguous run of grid points around
    the scan minimum of ``1 - r`` whose value stays within ``1 + tolerance``
    times that minimum. ``t_d`` is the grid argmin of ``distances``.
    """
    times = np.asarray(times, dtype=float)
    omr = np.asarray(one_minus_r, dtype=float)
    dist = np.asarray(distances, dtype=float)
    if not times.size or times.shape != omr.shape or times.shape != dist.shape:
        raise InfeasibleError("times, 1-r and distances must be non-empty and of equal length")
    best = int(np.argmin(omr))
    ok = omr <= (1.0 + tolerance) * omr[best]
    lo = best
    while lo > 0 and ok[lo - 1]:
        lo -= 1
    hi = best
    while hi < len(ok) - 1 and ok[hi + 1]:
        hi += 1
    window = TqaWindow(
        t_min=float(times[lo]),
        t_max=float(times[hi]),
        t_d=float(times[int(np.argmin(dist))]),
        r_best=float(1.0 - omr[best]),
    )
    if not window.contains_t_d:
        logger.info("T*_d = %.4g lies outside [%.4g, %.4g]", window.t_d, window.t_min, window.t_max)
    return window


def qaoa_from_tqa_scan(d: CostDiagonal, p: int, grid=None, cfg: OptimizerConfig = OptimizerConfig(),
                       domain: Optional[SymmetryDomain] = None):
    """Optimize from the TQA angles at every grid time step.

    Returns ``(records, distances, window)``: one optimization record per
    grid point, the folded distance from each initialization to its
    converged angles, and the window extracted from them.
    """
    grid = _check_grid(default_dt_grid() if grid is None else grid)
    domain = domain or SymmetryDomain()
    records, dists = [], []
    for dt in grid:
        init = tqa_angles(p, dt, domain)
        rec = optimize_qaoa(d, init, cfg)
        records.append(rec)
        dists.append(angle_distance(init, rec.final_angles, domain))
    omr = np.array([r.one_minus_r for r in records])
    window = extract_window(p * grid, omr, dists)
    return records, np.array(dists), window


# -- landscape sampling --------------------------------------------------------


@dataclass
class LandscapeSample:
    """Local minima reached from random starts, measured against the best one.

    ``points[i] = (d_i, dr_i)`` for ``records[i]``; ``tqa_record`` and
    ``tqa_point`` are filled when a TQA-initialized run was requested.
    ``global_estimate`` is the best of all runs, the TQA one included, so
    every ``dr`` is non-negative.
    """

    records: List[OptimizationRecord]
    global_estimate: OptimizationRecord
    points: np.ndarray
    tqa_record: Optional[OptimizationRecord] = None
    tqa_point: Optional[Tuple[float, float]] = None


def _measure(rec: OptimizationRecord, best: OptimizationRecord, domain: SymmetryDomain):
    a = canonicalize(rec.final_angles, domain)
    b = canonicalize(best.final_angles, domain)
    return angle_distance(a, b, domain), best.final_ratio - rec.final_ratio


def random_records(d: CostDiagonal, p: int, n_inits: int, domain: SymmetryDomain,
                   cfg: OptimizerConfig, seed: int = 0, graph_index: int = 0) -> List[OptimizationRecord]:
    return [
        optimize_qaoa(d, random_angles(p, domain, init_rng(seed, graph_index, i)), cfg)
        for i in range(n_inits)
    ]


def landscape_sample(d: CostDiagonal, p: int, n_inits: int, domain: Optional[SymmetryDomain] = None,
                     cfg: OptimizerConfig = OptimizerConfig(), seed: int = 0, graph_index: int = 0,
                     tqa_dt: Optional[float] = None) -> LandscapeSample:
    if n_inits < 1:
        raise InfeasibleError("need at least one initialization")
    domain = domain or SymmetryDomain()
    records = random_records(d, p, n_inits, domain, cfg, seed, graph_index)
    tqa = optimize_qaoa(d, tqa_angles(p, tqa_dt, domain), cfg) if tqa_dt is not None else None
    # min keeps the first of equal values, so a tie goes to the random record
    best = min(records + ([tqa] if tqa is not None else []), key=lambda r: r.one_minus_r)
    points = np.array([_measure(r, best, domain) for r in records])
    sample = LandscapeSample(records, best, points)
    if tqa is not None:
        sample.tqa_record = tqa
        sample.tqa_point = _measure(tqa, best, domain)
    return sample


def compare_random_vs_tqa(d: CostDiagonal, p: int, dt: float, n_random: Optional[int] = None,
                          domain: Optional[SymmetryDomain] = None, cfg: OptimizerConfig = OptimizerConfig(),
                          seed: int = 0, graph_index: int = 0) -> Tuple[float, float]:
    """Best ratio over ``n_random`` random starts versus one TQA-initialized run."""
    if n_random is None:
        n_random = min(2 ** p, N_RANDOM_CAP)
    if n_random < 1:
        raise InfeasibleError("n_random must be >= 1")
    domain = domain or SymmetryDomain()
    rand = random_records(d, p, n_random, domain, cfg, seed, graph_index)
    tqa = optimize_qaoa(d, tqa_angles(p, dt, domain), cfg)
    return max(r.final_ratio for r in rand), tqa.final_ratio


@dataclass
class ParameterPattern:
    mean_gamma: np.ndarray
    sd_gamma: np.ndarray
    mean_beta: np.ndarray
    sd_beta: np.ndarray
    tqa_gamma: np.ndarray
    tqa_beta: np.ndarray
    records: List[OptimizationRecord] = field(default_factory=list, repr=False)


def parameter_pattern(diagonals: Sequence[CostDiagonal], p: int, dt: float,
                      cfg: OptimizerConfig = OptimizerConfig(),
                      domains: Optional[Sequence[SymmetryDomain]] = None) -> ParameterPattern:
    """Per-layer mean and spread of converged angles started from TQA."""
    if not diagonals:
        raise InfeasibleError("need at least one graph")
    domains = domains or [SymmetryDomain()] * len(diagonals)
    ref = tqa_angles(p, dt)
    records, gammas, betas = [], [], []
    for d, dom in zip(diagonals, domains):
        rec = optimize_qaoa(d, tqa_angles(p, dt, dom), cfg)
        final = canonicalize(rec.final_angles, dom)
        records.append(rec)
        gammas.append(final.gamma)
        betas.append(final.beta)
    gammas, betas = np.array(gammas), np.array(betas)
    return ParameterPattern(
        gammas.mean(axis=0), gammas.std(axis=0), betas.mean(axis=0), betas.std(axis=0),
        ref.gamma.copy(), ref.beta.copy(), records,
    )


# -- ensemble drivers ------------------------------------------------------------


@dataclass
class EnsembleTimeScan:
    """TQA scans of many graphs at several depths.

    ``ratios[g, k, j]`` is graph ``g`` at depth ``p_values[k]`` and time step
    ``dt_grid[j]``. ``t_star[k]`` comes from the ensemble-mean curve.
    """

    p_values: np.ndarray
    dt_grid: np.ndarray
    ratios: np.ndarray
    t_star: np.ndarray
    slope: float
    intercept: float
    residual: float

    @property
    def mean_ratios(self) -> np.ndarray:
        return self.ratios.mean(axis=0)


def _scan_task(args):
    graph, p_values, grid = args
    d = build_cost_diagonal(graph)
    return [tqa_time_scan(d, p, grid).ratios for p in p_values]


def ensemble_time_scan(graphs: Sequence[Graph], p_values: Sequence[int], grid=None,
                       threads: Optional[int] = None) -> EnsembleTimeScan:
    grid = _check_grid(default_dt_grid() if grid is None else grid)
    p_values = np.asarray(p_values, dtype=int)
    ratios = np.array(pool_map(_scan_task, [(g, p_values, grid) for g in graphs], threads))
    mean = ratios.mean(axis=0)
    t_star = np.array([extract_t_star(TimeScan(int(p), grid, mean[k])) for k, p in enumerate(p_values)])
    if np.unique(p_values).size >= 2:
        slope, intercept, resid = fit_optimal_step(list(zip(p_values, t_star)))
    else:
        # a single depth determines the step directly
        slope, intercept, resid = float(t_star[0] / p_values[0]), 0.0, 0.0
    return EnsembleTimeScan(p_values, grid, ratios, t_star, slope, intercept, resid)


def estimate_time_step(graphs: Sequence[Graph], p_values: Sequence[int], grid=None,
                       threads: Optional[int] = None) -> float:
    """Optimal TQA step: slope of the ensemble T* against depth."""
    return ensemble_time_scan(graphs, p_values, grid, threads).slope


@dataclass
class EnsembleWindowScan:
    """Optimized-from-TQA scans of many graphs at one depth.

    ``window`` is extracted from the ensemble-mean curves; ``graph_windows``
    holds the per-graph windows.
    """

    p: int
    dt_grid: np.ndarray
    one_minus_r: np.ndarray
    distances: np.ndarray
    tqa_one_minus_r: np.ndarray
    window: TqaWindow
    graph_windows: List[TqaWindow]
    statuses: np.ndarray

    @property
    def times(self) -> np.ndarray:
        return self.p * self.dt_grid


def _window_task(args):
    graph, p, grid, cfg = args
    d = build_cost_diagonal(graph)
    records, dists, window = qaoa_from_tqa_scan(d, p, grid, cfg, SymmetryDomain.for_graph(graph))
    bare = [1.0 - approximation_ratio(qaoa_energy(d, r.init_angles), d) for r in records]
    return (np.array([r.one_minus_r for r in records]), dists, np.array(bare), window,
            [r.status.value for r in records])


def ensemble_window_scan(graphs: Sequence[Graph], p: int, grid=None, cfg: OptimizerConfig = OptimizerConfig(),
                         threads: Optional[int] = None) -> EnsembleWindowScan:
    grid = _check_grid(default_dt_grid() if grid is None else grid)
    out = pool_map(_window_task, [(g, p, grid, cfg) for g in graphs], threads)
    omr = np.array([o[0] for o in out])
    dist = np.array([o[1] for o in out])
    bare = np.array([o[2] for o in out])
    window = extract_window(p * grid, omr.mean(axis=0), dist.mean(axis=0))
    return EnsembleWindowScan(p, grid, omr, dist, bare, window, [o[3] for o in out],
                              np.array([o[4] for o in out]))


def _landscape_task(args):
    index, graph, p, n_inits, k, cfg, seed, tqa_dt = args
    d = build_cost_diagonal(graph)
    return landscape_sample(d, p, n_inits, SymmetryDomain.for_graph(graph, k), cfg, seed, index, tqa_dt)


def ensemble_landscape(graphs: Sequence[Graph], p: int, n_inits: int, tqa_dt: Optional[float] = None,
                       cfg: OptimizerConfig = OptimizerConfig(), seed: int = 0, k: int = 1,
                       threads: Optional[int] = None) -> List[LandscapeSample]:
    tasks = [(i, g, p, n_inits, k, cfg, seed, tqa_dt) for i, g in enumerate(graphs)]
    return pool_map(_landscape_task, tasks, threads)


def _compare_task(args):
    index, graph, p, dt, n_random, cfg, seed = args
    d = build_cost_diagonal(graph)
    return compare_random_vs_tqa(d, p, dt, n_random, SymmetryDomain.for_graph(graph), cfg, seed, index)


def ensemble_compare(graphs: Sequence[Graph], p: int, dt: float, n_random: Optional[int] = None,
                     cfg: OptimizerConfig = OptimizerConfig(), seed: int = 0,
                     threads: Optional[int] = None) -> np.ndarray:
    """Array of shape ``(n_graphs, 2)`` holding ``(r_best_random, r_tqa)`` per graph."""
    tasks = [(i, g, p, dt, n_random, cfg, seed) for i, g in enumerate(graphs)]
    return np.array(pool_map(_compare_task, tasks, threads))


def ensemble_pattern(graphs: Sequence[Graph], p: int, dt: float,
                     cfg: OptimizerConfig = OptimizerConfig()) -> ParameterPattern:
    diags = [build_cost_diagonal(g) for g in graphs]
    return parameter_pattern(diags, p, dt, cfg, [SymmetryDomain.for_graph(g) for g in graphs])
