import math

import numpy as np
import pytest

import adaptsc


def test_multi_index_sets():
    s = adaptsc.MultiIndexSet(2, [[1, 1], [2, 1]])
    assert s.is_admissible()
    assert sorted(s.reduced_margin().members()) == [[1, 2], [3, 1]]
    assert len(adaptsc.MultiIndexSet.total_degree(3, 2)) == 10
    assert sum(adaptsc.combination_coefficients(adaptsc.MultiIndexSet.total_degree(3, 3)).values()) == 1


def test_cc_points_are_nested():
    coarse = adaptsc.cc_points(3)
    fine = adaptsc.cc_points(4)
    assert len(coarse) == adaptsc.rule_size(3) == 5
    assert set(coarse) <= set(fine)
    expected = [-math.cos(math.pi * k / 4) for k in range(5)]
    assert np.allclose(coarse, expected, atol=1e-15)


def test_dorfler_examples():
    ind = {(2, 1): 0.5, (1, 2): 0.3, (3, 1): 0.2}
    assert adaptsc.dorfler_mark(ind, 0.5) == [[2, 1]]
    assert adaptsc.dorfler_mark(ind, 0.1) == [[2, 1], [1, 2], [3, 1]]
    with pytest.raises(ValueError):
        adaptsc.dorfler_mark({}, 0.5)


def test_ode_statistics_and_steps():
    p = adaptsc.ComplexOdeProblem()
    assert adaptsc.exact_mean(p, 10.0) == pytest.approx(math.exp(-1.0) * math.sin(10.0) / 10.0)
    assert adaptsc.exact_stddev(p, math.pi) == pytest.approx(math.exp(-0.1 * math.pi))
    study = adaptsc.timestepping_study(p, 0.0, "tr", 0.1, 1000.0)
    assert study["step_count"] == 10000
    ab2 = adaptsc.timestepping_study(p, 1.0, "tr_ab2", 1e-7, 1000.0)
    assert 1500 <= ab2["step_count"] <= 6000


def test_adaptive_run_on_the_scalar_ode():
    cfg = adaptsc.AdaptiveConfig()
    cfg.tolerance = 1e-5
    cfg.final_time = 5.0
    cfg.report_times = [5.0]
    r = adaptsc.run_adaptive(adaptsc.ode_problem(), cfg)
    assert r.final_time == pytest.approx(5.0)
    assert len(r.refinements) > 0
    assert r.final_set.is_admissible()
    for rep in r.reports:
        assert rep["interpolation"] <= rep["tolerance"]
    mean = r.snapshot_mean(0)
    exact = adaptsc.exact_mean(adaptsc.ComplexOdeProblem(), 5.0)
    assert abs(mean[0] - exact) < 10 * r.report_estimates[0]["total"]


def test_y_independent_fem_problem_does_not_refine():
    cfg = adaptsc.AdaptiveConfig()
    cfg.final_time = 1.0
    problem = adaptsc.fem_problem(grid=2, sigma=0.0)
    assert problem.parameter_dim == 4
    r = adaptsc.run_adaptive(problem, cfg)
    assert r.refinements == []
    assert len(r.final_set) == 1


def test_invalid_config_is_reported():
    cfg = adaptsc.AdaptiveConfig()
    cfg.theta = 1.5
    assert any("theta" in v for v in cfg.violations())
    with pytest.raises(ValueError):
        adaptsc.run_adaptive(adaptsc.ode_problem(), cfg)
