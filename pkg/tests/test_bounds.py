import numpy as np
import pytest

from oldroyd_lab import (
    GridTooCoarse,
    ModelParams,
    derive_constants,
    verify_discriminant_window,
    verify_lower_bounds,
    verify_upper_bounds,
)


def test_upper_bounds_pass(params):
    reports = verify_upper_bounds(params, (200, 200))
    names = {rep.bound_name for rep in reports}
    assert names == {"upper_g1", "upper_g2", "upper_g3",
                     "upper_usigma_entries"}
    for rep in reports:
        assert rep.pass_, rep.bound_name
        assert rep.worst_ratio <= 1.0


def test_lower_bounds_pass(params):
    reports = verify_lower_bounds(params, (200, 200))
    by_name = {rep.bound_name: rep for rep in reports}
    assert set(by_name) == {"lower_g1", "lower_g3", "refined_g2"}
    assert by_name["lower_g1"].worst_ratio >= 1.0
    assert by_name["lower_g3"].worst_ratio >= 1.0
    assert by_name["refined_g2"].worst_ratio <= 1.0
    assert all(rep.pass_ for rep in reports)


def test_discriminant_window(params):
    rep = verify_discriminant_window(params, 200)
    assert rep.pass_
    assert rep.worst_ratio <= 1.0


def test_discriminant_min_unit_couplings():
    # At alpha=kappa=beta=1 the discriminant on (0, R] never drops
    # below beta^2/2 = 0.5.
    p = ModelParams(0.0, 0.5, 1.0, 1.0, 1.0)
    from oldroyd_lab.symbols import discriminant

    c = derive_constants(p)
    r = np.geomspace(1e-6, c.R, 500)
    assert float(np.min(discriminant(r, p))) >= 0.5


def test_upper_falsification(params):
    # Shrinking K by 100x must break at least one upper report.
    reports = verify_upper_bounds(params, (100, 100), k_scale=0.01)
    assert any(not rep.pass_ for rep in reports)
    failing = next(rep for rep in reports if not rep.pass_)
    r, t = failing.worst_point
    assert r > 0.0 and t >= 0.0


def test_lower_falsification(params):
    # Inflating c1 by 100x must break a lower report.
    reports = verify_lower_bounds(params, (100, 100), c1_scale=100.0)
    assert any(not rep.pass_ for rep in reports
               if rep.bound_name.startswith("lower_"))


def test_grid_too_coarse(params):
    with pytest.raises(GridTooCoarse):
        verify_upper_bounds(params, (8, 8))
    with pytest.raises(GridTooCoarse):
        verify_lower_bounds(params, (200, 8))


def test_reports_reproducible(params):
    a = verify_upper_bounds(params, (64, 64))
    b = verify_upper_bounds(params, (64, 64))
    for x, y in zip(a, b):
        assert x.worst_ratio == y.worst_ratio
        assert x.worst_point == y.worst_point


def test_monotone_refinement(params):
    # Refining the grid can only push the upper-check supremum up.
    # A failing (artificially shrunk-K) check must keep failing when the
    # grid is doubled, and the observed supremum is stable under
    # refinement up to sampling jitter.
    coarse = verify_upper_bounds(params, (50, 50), k_scale=0.01)
    fine = verify_upper_bounds(params, (100, 100), k_scale=0.01)
    for c, f in zip(coarse, fine):
        if not c.pass_:
            assert not f.pass_
        assert f.observed_sup >= c.observed_sup * (1.0 - 1e-2)


def test_t1_probe_recorded(params):
    # Using the shorter onset t1 instead of t1_safe is an empirical
    # probe: record the outcome, assert only that it runs.
    c = derive_constants(params)
    reports = verify_lower_bounds(params, (64, 64), onset=c.t1)
    assert {rep.bound_name for rep in reports} == {"lower_g1", "lower_g3",
                                                   "refined_g2"}


def test_report_serialization(params):
    rep = verify_discriminant_window(params, 64)
    doc = rep.to_dict()
    assert doc["pass"] is True
    assert doc["bound_name"] == "discriminant_window"
    assert isinstance(doc["worst_point"], (list, tuple))
