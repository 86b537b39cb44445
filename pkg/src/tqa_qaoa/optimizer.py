"""Dense BFGS with a strong-Wolfe line search, and its QAOA wrapper.

The objective handed to :func:`minimize` is a callable returning the pair
``(value, gradient)`` at a point.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from .exceptions import InfeasibleError, NonFiniteError, NotDescentError
from .graphs import CostDiagonal
from .simulator import AngleSchedule, approximation_ratio, energy_and_gradient

logger = logging.getLogger(__name__)

Objective = Callable[[np.ndarray], Tuple[float, np.ndarray]]

#: below this value of s.y the inverse-Hessian update is skipped
CURVATURE_EPS = 1e-12


class Status(str, enum.Enum):
    CONVERGED = "Converged"
    MAX_ITERS = "MaxIters"
    LINE_SEARCH_FAILED = "LineSearchFailed"


@dataclass(frozen=True)
class OptimizerConfig:
    """Stopping rules and line-search constants.

    ``max_iters=None`` means 200 iterations per parameter, i.e. ``400 p``
    for the ``2p`` QAOA angles.
    """

    grad_tol: float = 1e-5
    max_iters: Optional[int] = None
    wolfe_c1: float = 1e-4
    wolfe_c2: float = 0.9
    max_linesearch_steps: int = 40

    def __post_init__(self):
        if not 0 < self.wolfe_c1 < self.wolfe_c2 < 1:
            raise InfeasibleError(f"need 0 < c1 < c2 < 1, got c1={self.wolfe_c1}, c2={self.wolfe_c2}")
        if not self.grad_tol > 0:
            raise InfeasibleError(f"grad_tol must be positive, got {self.grad_tol}")
        if self.max_iters is not None and self.max_iters < 0:
            raise InfeasibleError(f"max_iters must be non-negative, got {self.max_iters}")
        if self.max_linesearch_steps < 1:
            raise InfeasibleError("max_linesearch_steps must be >= 1")

    def iteration_budget(self, dim: int) -> int:
        return self.max_iters if self.max_iters is not None else 200 * dim


@dataclass
class LineSearchResult:
    step: Optional[float]
    value: float
    grad: np.ndarray
    nfev: int

    @property
    def failed(self) -> bool:
        return self.step is None


def _cubic_min(a, fa, ga, b, fb, gb):
    """Minimizer of the cubic matching value and slope at ``a`` and ``b``, or None."""
    d1 = ga + gb - 3.0 * (fa - fb) / (a - b)
    rad = d1 * d1 - ga * gb
    if rad < 0:
        return None
    d2 = math.copysign(math.sqrt(rad), b - a)
    denom = gb - ga + 2.0 * d2
    if denom == 0:
        return None
    t = b - (b - a) * (gb + d2 - d1) / denom
    return t if math.isfinite(t) else None


def wolfe_line_search(objective: Objective, x, direction, cfg: OptimizerConfig = OptimizerConfig(),
                      f0=None, g0=None, step0: float = 1.0) -> LineSearchResult:
    """Find a step satisfying the strong Wolfe conditions along ``direction``.

    Bracketing phase doubles the trial step until the conditions hold or a
    bracket is found; the zoom phase shrinks the bracket with safeguarded
    cubic interpolation. On failure ``step`` is None and the value and
    gradient refer to the starting point.

    Raises
    ------
    NotDescentError
        If the directional derivative at ``x`` is not negative.
    """
    x = np.asarray(x, dtype=float)
    direction = np.asarray(direction, dtype=float)
    nfev = 0
    if f0 is None or g0 is None:
        f0, g0 = objective(x)
        nfev += 1
    dphi0 = float(np.dot(g0, direction))
    if not dphi0 < 0:
        raise NotDescentError(f"directional derivative {dphi0} is not negative")
    c1, c2 = cfg.wolfe_c1, cfg.wolfe_c2

    def phi(a):
        nonlocal nfev
        nfev += 1
        f, g = objective(x + a * direction)
        f = float(f)
        if not math.isfinite(f):
            f = math.inf
        return f, g, float(np.dot(g, direction)) if math.isfinite(f) else math.inf

    def armijo(a, f):
        return f <= f0 + c1 * a * dphi0

    def curvature(dphi):
        return abs(dphi) <= -c2 * dphi0

    def zoom(lo, f_lo, d_lo, hi, f_hi, d_hi):
        while nfev < budget:
            width = hi - lo
            if abs(width) <= 1e-14 * max(1.0, abs(lo)):
                break
            trial = None
            if math.isfinite(f_hi) and math.isfinite(d_hi):
                trial = _cubic_min(lo, f_lo, d_lo, hi, f_hi, d_hi)
            # keep the trial away from the bracket ends
            if trial is None or not (min(lo, hi) + 0.1 * abs(width) <= trial <= max(lo, hi) - 0.1 * abs(width)):
                trial = lo + 0.5 * width
            f, g, d = phi(trial)
            if not armijo(trial, f) or f >= f_lo:
                hi, f_hi, d_hi = trial, f, d
            else:
                if curvature(d):
                    return LineSearchResult(trial, f, g, nfev)
                if d * (hi - lo) >= 0:
                    hi, f_hi, d_hi = lo, f_lo, d_lo
                lo, f_lo, d_lo = trial, f, d
        return None

    budget = nfev + cfg.max_linesearch_steps
    a_prev, f_prev, d_prev = 0.0, float(f0), dphi0
    a = float(step0)
    first = True
    while nfev < budget:
        f, g, d = phi(a)
        if not armijo(a, f) or (not first and f >= f_prev):
            res = zoom(a_prev, f_prev, d_prev, a, f, d)
            break
        if curvature(d):
            return LineSearchResult(a, f, g, nfev)
        if d >= 0:
            res = zoom(a, f, d, a_prev, f_prev, d_prev)
            break
        a_prev, f_prev, d_prev = a, f, d
        a *= 2.0
        first = False
    else:
        res = None
    if res is not None:
        return res
    return LineSearchResult(None, float(f0), np.asarray(g0), nfev)


@dataclass
class BFGSResult:
    x: np.ndarray
    fun: float
    grad: np.ndarray
    nit: int
    nfev: int
    status: Status
    skipped_updates: int = 0
    history: List[float] = field(default_factory=list)

    @property
    def grad_norm(self) -> float:
        return float(np.linalg.norm(self.grad))


def minimize(objective: Objective, x0, cfg: OptimizerConfig = OptimizerConfig()) -> BFGSResult:
    """Minimize a smooth function with BFGS on a dense inverse Hessian.

    Stops when the Euclidean gradient norm drops to ``cfg.grad_tol``, when
    the iteration budget is spent, or when the line search cannot find an
    acceptable step. ``history`` holds the objective value at every
    accepted iterate, starting with ``x0``.
    """
    x = np.array(x0, dtype=float)
    if not np.all(np.isfinite(x)):
        raise NonFiniteError("initial point contains NaN or Inf")
    f, g = objective(x)
    f = float(f)
    g = np.asarray(g, dtype=float)
    if not (math.isfinite(f) and np.all(np.isfinite(g))):
        raise NonFiniteError(f"objective is not finite at the initial point (f={f})")
    nfev = 1
    dim = x.size
    eye = np.eye(dim)
    h_inv = eye.copy()
    budget = cfg.iteration_budget(dim)
    skipped = 0
    history = [f]
    status = Status.MAX_ITERS
    nit = 0
    while True:
        if np.linalg.norm(g) <= cfg.grad_tol:
            status = Status.CONVERGED
            break
        if nit >= budget:
            status = Status.MAX_ITERS
            break
        direction = -h_inv @ g
        slope = float(g @ direction)
        if not slope < 0:
            # lost positive definiteness numerically; restart from steepest descent
            h_inv = eye.copy()
            direction = -g
            slope = float(g @ direction)
        # the quasi-Newton step itself is always tried first
        ls = wolfe_line_search(objective, x, direction, cfg, f, g, 1.0)
        nfev += ls.nfev
        if ls.failed:
            status = Status.LINE_SEARCH_FAILED
            break
        s = ls.step * direction
        x_new = x + s
        g_new = np.asarray(ls.grad, dtype=float)
        y = g_new - g
        sy = float(s @ y)
        if sy > CURVATURE_EPS:
            rho = 1.0 / sy
            hy = h_inv @ y
            h_inv = (h_inv - rho * (np.outer(s, hy) + np.outer(hy, s))
                     + (rho * rho * float(y @ hy) + rho) * np.outer(s, s))
        else:
            skipped += 1
            logger.debug("skipping BFGS update at iteration %d: s.y = %g", nit, sy)
        x, f, g = x_new, ls.value, g_new
        history.append(f)
        nit += 1
    return BFGSResult(x, f, g, nit, nfev, status, skipped, history)


@dataclass
class OptimizationRecord:
    init_angles: AngleSchedule
    final_angles: AngleSchedule
    final_energy: float
    final_ratio: float
    iterations: int
    grad_norm: float
    status: Status
    nfev: int = 0

    @property
    def one_minus_r(self) -> float:
        return 1.0 - self.final_ratio


def qaoa_objective(d: CostDiagonal, domain=None) -> Objective:
    """``x -> (1 - r, gradient)`` for the flattened angle vector ``x``."""
    if d.c_min == 0.0:
        raise InfeasibleError("graph has no edges; the approximation ratio is undefined")

    def fun(x):
        energy, grad = energy_and_gradient(d, AngleSchedule.from_vector(x, domain))
        return 1.0 - energy / d.c_min, -grad / d.c_min

    return fun


def optimize_qaoa(d: CostDiagonal, init: AngleSchedule, cfg: OptimizerConfig = OptimizerConfig()) -> OptimizationRecord:
    res = minimize(qaoa_objective(d, init.domain), init.to_vector(), cfg)
    final = AngleSchedule.from_vector(res.x, init.domain)
    energy = d.c_min * (1.0 - res.fun)
    return OptimizationRecord(
        init_angles=init,
        final_angles=final,
        final_energy=energy,
        final_ratio=approximation_ratio(energy, d),
        iterations=res.nit,
        grad_norm=res.grad_norm,
        status=res.status,
        nfev=res.nfev,
    )
