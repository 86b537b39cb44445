"""scikit-learn style front end.

:class:`QAOAMaxCut` fits QAOA angles to one graph and predicts a vertex
partition, in the manner of a clustering estimator whose samples are the
vertices. :class:`TQATimeStep` fits the optimal TQA time step to an
ensemble of graphs.
"""
from __future__ import annotations

from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils import check_random_state
from sklearn.utils.validation import check_is_fitted

from .experiments import N_RANDOM_CAP, ensemble_time_scan, init_rng
from .graphs import bits_to_spins, build_cost_diagonal
from .optimizer import OptimizerConfig, optimize_qaoa
from .protocols import SymmetryDomain, canonicalize, random_angles, tqa_angles
from .simulator import approximation_ratio, most_likely_states, prepare_qaoa_state, qaoa_energy
from .validation import check_angles, check_depth, check_graph


class QAOAMaxCut(ClusterMixin, BaseEstimator):
    """Depth-``p`` QAOA for MaxCut, optimized with BFGS.

    Parameters
    ----------
    p : int, default=1
        Number of QAOA layers.
    init : {"tqa", "random"} or array-like, default="tqa"
        ``"tqa"`` starts from the Trotterized annealing angles with step
        ``time_step``. ``"random"`` runs ``n_random`` optimizations from
        random angles in the symmetry domain and keeps the best. An array
        of ``2p`` angles ``(gamma.., beta..)`` is used as the start as is.
    time_step : float, default=0.75
        TQA time step.
    n_random : int, optional
        Number of random starts; defaults to ``2**p`` (capped at 4096).
    k : int, default=1
        Width multiplier of the random gamma interval for weighted graphs.
    grad_tol : float, default=1e-5
    max_iter : int, optional
        BFGS iteration budget; ``None`` means ``400 p``.
    random_state : int, RandomState instance or None

    Attributes
    ----------
    angles_ : AngleSchedule
        Optimized angles, reduced to the symmetry domain.
    energy_ : float
        ``<H_C>`` at ``angles_``.
    ratio_ : float
        Approximation ratio ``energy_ / C_min``.
    labels_ : ndarray of shape (n_vertices,)
        Partition (0/1) read off the most probable basis state.
    records_ : list of OptimizationRecord
        One record per optimization run.
    n_iter_ : int
        BFGS iterations of the kept run.
    """

    def __init__(self, p=1, init="tqa", time_step=0.75, n_random=None, k=1,
                 grad_tol=1e-5, max_iter=None, random_state=None):
        self.p = p
        self.init = init
        self.time_step = time_step
        self.n_random = n_random
        self.k = k
        self.grad_tol = grad_tol
        self.max_iter = max_iter
        self.random_state = random_state

    def _initial_schedules(self, domain):
        p = check_depth(self.p)
        if isinstance(self.init, str):
            if self.init == "tqa":
                return [tqa_angles(p, self.time_step, domain)]
            if self.init == "random":
                n = self.n_random if self.n_random is not None else min(2 ** p, N_RANDOM_CAP)
                if n < 1:
                    raise ValueError(f"n_random must be >= 1, got {n}")
                seed = check_random_state(self.random_state).randint(2 ** 31 - 1)
                return [random_angles(p, domain, init_rng(seed, 0, i)) for i in range(n)]
            raise ValueError(f"init must be 'tqa', 'random' or an array of angles, got {self.init!r}")
        a = check_angles(self.init, p)
        return [type(a)(a.gamma, a.beta, domain)]

    def fit(self, X, y=None):
        """Optimize the angles for graph ``X``."""
        graph = check_graph(X)
        diag = build_cost_diagonal(graph)
        domain = SymmetryDomain.for_graph(graph, self.k)
        cfg = OptimizerConfig(grad_tol=self.grad_tol, max_iters=self.max_iter)
        records = [optimize_qaoa(diag, init, cfg) for init in self._initial_schedules(domain)]
        best = min(records, key=lambda r: r.one_minus_r)
        self.graph_ = graph
        self.cost_diagonal_ = diag
        self.records_ = records
        self.angles_ = canonicalize(best.final_angles, domain)
        self.energy_ = best.final_energy
        self.ratio_ = best.final_ratio
        self.n_iter_ = best.iterations
        self.labels_ = self._labels(diag)
        return self

    def _labels(self, diag):
        state = most_likely_states(prepare_qaoa_state(diag, self.angles_))[0]
        return (bits_to_spins(int(state), diag.n) < 0).astype(int)

    def predict(self, X=None):
        """Vertex partition for ``X`` using the fitted angles (the fitted graph if omitted)."""
        check_is_fitted(self, "angles_")
        if X is None:
            return self.labels_
        return self._labels(build_cost_diagonal(check_graph(X)))

    def score(self, X=None, y=None):
        """Approximation ratio of the fitted angles on ``X``."""
        check_is_fitted(self, "angles_")
        diag = self.cost_diagonal_ if X is None else build_cost_diagonal(check_graph(X))
        return approximation_ratio(qaoa_energy(diag, self.angles_), diag)


class TQATimeStep(BaseEstimator):
    """Optimal TQA time step of a graph ensemble.

    For each depth in ``p_values`` the bare TQA circuit is scanned over
    ``dt_grid``; the time ``T*`` maximizing the ensemble-mean approximation
    ratio is fitted linearly against ``p`` and the slope is the step.

    Attributes
    ----------
    time_step_ : float
    intercept_ : float
    residual_ : float
    t_star_ : ndarray
        ``T*`` per depth.
    scan_ : EnsembleTimeScan
    """

    def __init__(self, p_values=(5, 10, 15, 20), dt_grid=None, n_jobs=1):
        self.p_values = p_values
        self.dt_grid = dt_grid
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        graphs = [check_graph(g) for g in X]
        if not graphs:
            raise ValueError("need at least one graph")
        p_values = [check_depth(p) for p in self.p_values]
        scan = ensemble_time_scan(graphs, p_values, self.dt_grid, self.n_jobs)
        self.scan_ = scan
        self.time_step_ = scan.slope
        self.intercept_ = scan.intercept
        self.residual_ = scan.residual
        self.t_star_ = scan.t_star
        return self

    def angles(self, p):
        """TQA initialization at depth ``p`` with the fitted step."""
        check_is_fitted(self, "time_step_")
        return tqa_angles(check_depth(p), self.time_step_)
