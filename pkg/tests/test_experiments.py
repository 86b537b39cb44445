import logging

import numpy as np
import pytest

from tqa_qaoa.exceptions import DegenerateError, InfeasibleError
from tqa_qaoa.experiments import (
    TimeScan,
    compare_random_vs_tqa,
    default_dt_grid,
    ensemble_compare,
    ensemble_landscape,
    ensemble_time_scan,
    ensemble_window_scan,
    extract_t_star,
    extract_window,
    fit_optimal_step,
    landscape_sample,
    parameter_pattern,
    qaoa_from_tqa_scan,
    random_records,
    tqa_time_scan,
)
from tqa_qaoa.graphs import build_cost_diagonal, generate_graph, generate_regular3
from tqa_qaoa.optimizer import OptimizerConfig, optimize_qaoa
from tqa_qaoa.protocols import SymmetryDomain, random_angles, tqa_angles
from tqa_qaoa.simulator import approximation_ratio, qaoa_energy

UNW = SymmetryDomain()


@pytest.fixture(scope="module")
def reg3_8():
    return build_cost_diagonal(generate_regular3(8, seed=3))


def test_default_grid():
    g = default_dt_grid()
    assert g[0] == 0.05 and g[-1] == 2.0 and g.size == 40
    assert np.all(np.diff(g) > 0)


def test_small_time_step_gives_small_ratio(reg3_8):
    scan = tqa_time_scan(reg3_8, 5, [0.01])
    assert 0 <= scan.ratios[0] < 0.05


def test_scan_rises_then_drops():
    d = build_cost_diagonal(generate_regular3(12, seed=0))
    scan = tqa_time_scan(d, 10)
    k = int(np.argmax(scan.ratios))
    assert 0 < k < scan.ratios.size - 1
    assert np.all(np.diff(scan.ratios[: k + 1]) > -1e-3)
    # sharp decline past the maximum
    assert scan.ratios[-1] < scan.ratios[k] - 0.2


def test_time_scan_validation(reg3_8):
    with pytest.raises(InfeasibleError):
        tqa_time_scan(reg3_8, 3, [])
    with pytest.raises(InfeasibleError):
        tqa_time_scan(reg3_8, 3, [0.5, 0.4])
    with pytest.raises(InfeasibleError):
        tqa_time_scan(reg3_8, 3, [0.0, 0.4])


def test_extract_t_star_examples():
    assert extract_t_star(TimeScan(1, [1, 2, 3], [0.1, 0.5, 0.3])) == 2
    assert extract_t_star(TimeScan(1, [1, 2], [0.5, 0.5])) == 1
    with pytest.raises(DegenerateError):
        extract_t_star(TimeScan(1, [1, 2, 3], [0.4, 0.4, 0.4]))


def test_fit_optimal_step():
    slope, icpt, res = fit_optimal_step([(5, 3.75), (10, 7.5), (15, 11.25)])
    assert slope == pytest.approx(0.75)
    assert icpt == pytest.approx(0.0, abs=1e-12)
    assert res == pytest.approx(0.0, abs=1e-20)
    with pytest.raises(InfeasibleError):
        fit_optimal_step([(5, 3.0), (5, 4.0)])


def test_extract_window_contiguous():
    times = np.arange(1.0, 8.0)
    omr = np.array([0.5, 0.100, 0.1005, 0.1000, 0.3, 0.1001, 0.4])
    dist = np.array([5, 4, 3, 1, 2, 3, 4.0])
    w = extract_window(times, omr, dist)
    # the qualifying point at t=6 is cut off by t=5
    assert (w.t_min, w.t_max, w.t_d) == (2.0, 4.0, 4.0)
    assert w.r_best == pytest.approx(0.9)
    assert w.contains_t_d


def test_extract_window_logs_outside(caplog):
    with caplog.at_level(logging.INFO, logger="tqa_qaoa"):
        w = extract_window([1.0, 2.0, 3.0], [0.1, 0.5, 0.5], [1.0, 1.0, 0.0])
    assert not w.contains_t_d
    assert "outside" in caplog.text


def test_qaoa_from_tqa_scan_never_worse(reg3_8):
    grid = np.arange(0.1, 1.6, 0.25)
    records, dists, window = qaoa_from_tqa_scan(reg3_8, 3, grid)
    assert len(records) == grid.size == dists.size
    for rec, dt in zip(records, grid):
        bare = 1 - approximation_ratio(qaoa_energy(reg3_8, tqa_angles(3, dt)), reg3_8)
        assert rec.one_minus_r <= bare + 1e-9
    assert np.all(dists >= 0)
    assert window.t_min <= window.t_max


def test_landscape_single_init(reg3_8):
    s = landscape_sample(reg3_8, 2, 1, UNW)
    np.testing.assert_array_equal(s.points, [[0.0, 0.0]])


def test_landscape_invariants(reg3_8):
    s = landscape_sample(reg3_8, 3, 12, UNW, seed=1, tqa_dt=0.75)
    assert np.all(s.points[:, 1] >= -1e-12)
    assert np.all(s.points[:, 0] >= 0)
    assert s.tqa_point[1] >= -1e-12
    best = [i for i, r in enumerate(s.records) if r is s.global_estimate]
    for i in best:
        assert tuple(s.points[i]) == (0.0, 0.0)
    assert s.global_estimate.one_minus_r == min([r.one_minus_r for r in s.records] + [s.tqa_record.one_minus_r])


def test_landscape_reproducible(reg3_8):
    a = landscape_sample(reg3_8, 2, 4, UNW, seed=5, graph_index=2)
    b = landscape_sample(reg3_8, 2, 4, UNW, seed=5, graph_index=2)
    np.testing.assert_array_equal(a.points, b.points)
    with pytest.raises(InfeasibleError):
        landscape_sample(reg3_8, 2, 0, UNW)


def test_best_random_non_decreasing(reg3_8):
    recs = random_records(reg3_8, 3, 16, UNW, OptimizerConfig(), seed=2)
    best = np.maximum.accumulate([r.final_ratio for r in recs])
    for n in (1, 4, 9, 16):
        r_best, _ = compare_random_vs_tqa(reg3_8, 3, 0.75, n, UNW, seed=2)
        assert r_best == best[n - 1]


def test_compare_default_n_random(reg3_8):
    r_best, r_tqa = compare_random_vs_tqa(reg3_8, 2, 0.75)
    assert 0 < r_best <= 1 and 0 < r_tqa <= 1


def test_pattern_without_iterations_is_tqa():
    diags = [build_cost_diagonal(generate_regular3(6, seed=s)) for s in range(3)]
    pat = parameter_pattern(diags, 4, 0.01, OptimizerConfig(max_iters=0))
    np.testing.assert_array_equal(pat.mean_gamma, pat.tqa_gamma)
    np.testing.assert_array_equal(pat.mean_beta, pat.tqa_beta)
    assert np.all(pat.sd_gamma == 0) and np.all(pat.sd_beta == 0)


def test_pattern_shape_follows_tqa():
    diags = [build_cost_diagonal(generate_regular3(8, seed=s)) for s in range(6)]
    pat = parameter_pattern(diags, 6, 0.75)
    # converged gamma grows and beta shrinks across the layers
    assert pat.mean_gamma[-1] > pat.mean_gamma[0]
    assert pat.mean_beta[-1] < pat.mean_beta[0]
    assert np.mean(np.abs(pat.mean_gamma - pat.tqa_gamma)) < 0.2
    assert np.mean(np.abs(pat.mean_beta - pat.tqa_beta)) < 0.2


def test_p1_cut_fraction_at_least_069():
    # the p = 1 guarantee concerns the cut size, (|E| - <H_C>) / (|E| - C_min)
    for i in range(10):
        g = generate_regular3(10, seed=[11, i])
        d = build_cost_diagonal(g)
        rec = optimize_qaoa(d, tqa_angles(1, 0.75))
        cut = (g.m - rec.final_energy) / (g.m - d.c_min)
        assert cut >= 0.69


def test_time_step_roughly_size_independent():
    steps = []
    for n in (6, 8, 10, 12):
        graphs = [generate_regular3(n, seed=[3, i]) for i in range(10)]
        steps.append(ensemble_time_scan(graphs, [5, 10, 15]).slope)
    assert max(steps) - min(steps) <= 0.2


def test_erdos_renyi_tqa_at_least_best_random():
    graphs = [generate_graph("er", 8, seed=[4, i]) for i in range(6)]
    res = ensemble_compare(graphs, 3, 0.5, seed=4, threads=1)
    assert np.mean(res[:, 1] - res[:, 0]) >= -1e-9


def test_ensemble_results_independent_of_threads():
    graphs = [generate_regular3(6, seed=[1, i]) for i in range(3)]
    a = ensemble_landscape(graphs, 2, 3, 0.75, seed=9, threads=1)
    b = ensemble_landscape(graphs, 2, 3, 0.75, seed=9, threads=2)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x.points, y.points)
        assert x.tqa_point == y.tqa_point
    w1 = ensemble_window_scan(graphs, 2, [0.25, 0.5, 0.75], threads=1)
    w2 = ensemble_window_scan(graphs, 2, [0.25, 0.5, 0.75], threads=2)
    np.testing.assert_array_equal(w1.one_minus_r, w2.one_minus_r)
    s1 = ensemble_time_scan(graphs, [2, 3], [0.5, 1.0], threads=1)
    s2 = ensemble_time_scan(graphs, [2, 3], [0.5, 1.0], threads=2)
    np.testing.assert_array_equal(s1.ratios, s2.ratios)


def test_weighted_random_uses_wider_interval():
    d = SymmetryDomain("weighted", 3)
    a = random_angles(50, d, np.random.default_rng(0))
    assert np.max(np.abs(a.gamma)) > np.pi
