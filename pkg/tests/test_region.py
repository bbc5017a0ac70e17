import math

import numpy as np
import pytest

from dursma.region import (RatePoint, RegionCurve, alpha_grid, best_point, deterministic_region,
                           ergodic_region, f_q, fill_factor, fill_factors, noma_corners,
                           single_user_rates, ts_noma_region)
from dursma.sysmodel import ChannelSample, make_config

FIG2 = make_config(10, 30, 30, 10, 75)
SAMPLE = ChannelSample(1.36, 0.725, 2.082, 1.013)


def test_rate_point_validation():
    with pytest.raises(ValueError):
        RatePoint(-1.0, 0.0)
    with pytest.raises(ValueError):
        RatePoint(math.nan, 0.0)


def test_alpha_grid():
    np.testing.assert_array_equal(alpha_grid(3), [0.0, 0.5, 1.0])
    np.testing.assert_array_equal(alpha_grid([1.0, 0.0, 0.5, 0.5]), [0.0, 0.5, 1.0])
    for bad in (1, [0.0, 0.5], [0.0, 1.5, 1.0]):
        with pytest.raises(ValueError):
            alpha_grid(bad)


def test_f_q():
    assert f_q(0, 2.0, 3.0) == 2.0 and f_q(1, 2.0, 3.0) == 5.0 and f_q(2, 2.0, 3.0) == 6.0
    with pytest.raises(ValueError):
        f_q(3, 1.0, 1.0)


def test_square_region_ff_is_one():
    # rectangle [0,1]x[0,1]: corner reaches the single-user pair
    curve = ts_noma_region(RatePoint(1.0, 1.0), RatePoint(1.0, 1.0), 1.0, 1.0)
    assert fill_factors(curve) == {0: 1.0, 1: 1.0, 2: 1.0}


def test_triangle_region_known_values():
    # time sharing between (1, 0) and (0, 1)
    curve = RegionCurve([RatePoint(0.0, 1.0), RatePoint(1.0, 0.0)], 1.0, 1.0, polyline=True)
    ff = fill_factors(curve)
    np.testing.assert_allclose([ff[0], ff[1], ff[2]], [0.5, 0.5, 0.25])
    v, pt = fill_factor(curve, 2)
    np.testing.assert_allclose([pt.r_a, pt.r_b], [0.5, 0.5])


def test_fixed_channel_region_properties():
    du = deterministic_region(FIG2, SAMPLE)
    b_first, a_first = noma_corners(du)
    ts = ts_noma_region(b_first, a_first, du.denominator_a, du.denominator_b)
    ff_du, ff_ts = fill_factors(du), fill_factors(ts)
    for q in (0, 1, 2):
        assert 0.0 <= ff_ts[q] <= ff_du[q] <= 1.0
    for mode in ("i", "j"):
        forced = deterministic_region(FIG2, SAMPLE, mode=mode)
        for q in (0, 1, 2):
            assert fill_factor(forced, q)[0] <= ff_du[q] + 1e-12
    a, b = single_user_rates(FIG2, SAMPLE)
    assert (a, b) == (du.denominator_a, du.denominator_b)
    # rate pairs never beat the single-user rates
    arr = du.as_array()
    assert np.all(arr[:, 0] <= a + 1e-12) and np.all(arr[:, 1] <= b + 1e-12)


def test_ff2_argmax_differs_from_sum_rate_maximiser():
    du = deterministic_region(FIG2, SAMPLE)
    _, p2 = fill_factor(du, 2)
    _, p1 = fill_factor(du, 1)
    assert (p2.r_a, p2.r_b) != (p1.r_a, p1.r_b)


def test_grid_refinement_is_monotone():
    coarse = fill_factors(deterministic_region(FIG2, SAMPLE, alphas=1001))
    fine = fill_factors(deterministic_region(FIG2, SAMPLE, alphas=2001))
    for q in (0, 1, 2):
        assert fine[q] >= coarse[q] - 1e-3


def test_golden_refinement_never_worse_than_grid():
    du = deterministic_region(FIG2, SAMPLE, alphas=21)
    for q in (0, 1, 2):
        vals = [f_q(q, p.r_a, p.r_b) for p in du.points]
        assert best_point(du, q)[0] >= max(vals)


def test_noma_corners_need_endpoints():
    du = deterministic_region(FIG2, SAMPLE, alphas=[0.0, 0.4, 1.0])
    b_first, a_first = noma_corners(du)
    assert b_first == du.points[0] and a_first == du.points[-1]
    with pytest.raises(ValueError):
        noma_corners(RegionCurve([RatePoint(1.0, 1.0)], 1.0, 1.0))


def test_ergodic_region_small():
    cfg = make_config(10, 30, 30, 10, 75)
    curve = ergodic_region(cfg, alphas=11, samples=20_000, seed=1)
    ff = fill_factors(curve)
    assert all(0 < v <= 1 for v in ff.values())
    b_first, a_first = noma_corners(curve)
    ts = ts_noma_region(b_first, a_first, curve.denominator_a, curve.denominator_b)
    assert fill_factor(ts, 2)[0] <= ff[2]


def test_zero_denominator():
    curve = RegionCurve([RatePoint(0.0, 0.0)], 0.0, 1.0)
    with pytest.raises(ZeroDivisionError):
        fill_factor(curve, 2)
