import math

import numpy as np
import pytest

from dursma import mc
from dursma.er_analytic import p1, p2
from dursma.op_analytic import PRODUCTS_A, outage_context, product_terms
from dursma.sinr import rsma_from_snrs
from dursma.sysmodel import make_config

FIG3 = (5, 15, 17, 8)
FIG5 = (5, 20, 15, 10)
FIG6 = (5, 25, 30, 20)


def test_draw_gains_is_counter_based():
    whole = mc.draw_gains(7, 0, 1000)
    part = mc.draw_gains(7, 600, 400)
    np.testing.assert_array_equal(whole[600:], part)
    assert whole.shape == (1000, 4) and np.all(whole > 0)
    assert not np.array_equal(whole, mc.draw_gains(8, 0, 1000))
    with pytest.raises(ValueError):
        mc.draw_gains(-1, 0, 10)


def test_draw_gains_are_unit_exponentials():
    g = mc.draw_gains(1, 0, 10**6)
    np.testing.assert_allclose(g.mean(axis=0), 1.0, atol=0.004)
    np.testing.assert_allclose((g > 1).mean(axis=0), math.exp(-1), atol=4 * math.sqrt(0.25e-6))


def test_worker_count_does_not_change_results():
    cfg = make_config(*FIG3, 70, alpha=0.4)
    reps = [mc.mc_ergodic(cfg, 300_000, seed=3, workers=w) for w in (1, 3, 8)]
    assert reps[0] == reps[1] == reps[2]
    o = [mc.mc_outage(cfg.with_(rate_a=1.5, rate_b=1.5), 300_000, seed=3, workers=w) for w in (1, 8)]
    assert o[0] == o[1]


def test_thread_env(monkeypatch):
    monkeypatch.setenv(mc.THREADS_ENV, "3")
    assert mc.default_workers() == 3
    for bad in ("0", "x", "-2"):
        monkeypatch.setenv(mc.THREADS_ENV, bad)
        with pytest.raises(ValueError):
            mc.default_workers()


def test_estimate_and_proportion():
    e = mc.proportion(30, 100)
    assert e.mean == 0.3
    np.testing.assert_allclose(e.std_error, math.sqrt(30 * 70 / (100 * 99) / 100))
    assert mc.Estimate(1.0, 0.0, 5).z_score(1.0) == 0.0
    assert mc.Estimate(1.0, 0.0, 5).z_score(0.0) == math.inf
    assert mc.Estimate(1.0, 0.5, 5).z_score(0.0) == 2.0
    with pytest.raises(ValueError):
        mc.mc_ergodic(make_config(*FIG3, 70), 0)


def test_ergodic_report_consistency_and_dominance():
    cfg = make_config(*FIG3, 80, alpha=0.5)
    n = 200_000
    rep = mc.mc_ergodic(cfg, n, seed=1)
    assert rep.er_sum.mean == rep.er_user_a.mean + rep.er_user_b.mean
    for mode in ("i", "j"):
        a, b = mc.mc_ergodic_region_point(cfg, n, seed=1, mode=mode)
        assert a.mean + b.mean <= rep.er_sum.mean
        assert a.mean <= rep.er_user_a.mean and b.mean <= rep.er_user_b.mean


def test_region_point_matches_region_sweep():
    cfg = make_config(*FIG3, 75)
    alphas = [0.0, 0.3, 1.0]
    ra, rb, sa, sb = mc.mc_ergodic_region(cfg, alphas, 100_000, seed=2)
    for k, a in enumerate(alphas):
        ea, eb = mc.mc_ergodic_region_point(cfg.with_(alpha=a), 100_000, seed=2)
        np.testing.assert_allclose([ra[k], rb[k], sa[k], sb[k]],
                                   [ea.mean, eb.mean, ea.std_error, eb.std_error], rtol=1e-12)


def test_symmetric_p1_half():
    cfg = make_config(10, 10, 10, 10, 70)
    rep = mc.mc_ergodic(cfg, 10**6, seed=4)
    assert abs(rep.empirical_p1.mean - 0.5) < 4 * rep.empirical_p1.std_error
    assert abs(rep.empirical_p2.mean - 0.5) < 4 * rep.empirical_p2.std_error


def test_selection_probabilities_match_analytic():
    cfg = make_config(*FIG3, 70)
    rep = mc.mc_ergodic(cfg, 10**6, seed=6)
    for est, ref in ((rep.empirical_p1, p1(cfg.gains)), (rep.empirical_p2, p2(cfg.gains))):
        se = math.sqrt(ref * (1 - ref) / est.samples)
        assert abs(est.mean - ref) < 3 * se


def test_std_error_scaling():
    cfg = make_config(*FIG3, 70)
    small = mc.mc_ergodic(cfg, 10**4, seed=1).er_user_a.std_error
    big = mc.mc_ergodic(cfg, 10**6, seed=1).er_user_a.std_error
    assert 0.08 <= big / small <= 0.12


def test_state_codes_follow_sinrs():
    cfg = make_config(*FIG5, 70, alpha=0.3, rate_a=1.5, rate_b=1.5)
    th = cfg.thresholds
    g = mc.draw_gains(0, 0, 5000)
    xa, xb = cfg.gains.l_ia * cfg.snr_a * g[:, 0], cfg.gains.l_ib * cfg.snr_b * g[:, 1]
    codes = mc.rrh_codes(xa, xb, cfg.alpha, th)
    t = rsma_from_snrs(xa, xb, cfg.alpha)
    np.testing.assert_array_equal((codes & 4) > 0, t.gamma_1a > th.theta_11)
    np.testing.assert_array_equal((codes & 8) > 0, t.gamma_b < th.theta_2)
    np.testing.assert_array_equal((codes & 16) > 0, t.gamma_2a < th.theta_12)
    np.testing.assert_array_equal((codes & 1) > 0, xa / (xb + 1) < th.theta_1)


def test_outage_products_disjoint_and_sum_to_union():
    cfg = make_config(*FIG5, 70, alpha=0.3, rate_a=1.5, rate_b=1.5)
    rep = mc.mc_outage(cfg, 10**6, seed=9)
    assert rep.disjointness_violations == 0
    assert len(rep.per_term_freq_a) == 16 and len(rep.per_term_freq_b) == 7
    np.testing.assert_allclose(sum(e.mean for e in rep.per_term_freq_a), rep.op_a.mean, rtol=1e-12)
    np.testing.assert_allclose(sum(e.mean for e in rep.per_term_freq_b), rep.op_b.mean, rtol=1e-12)
    assert rep.op_b.mean >= rep.op_a.mean
    # each product matches its analytic counterpart
    pa, pb = product_terms(outage_context(cfg))
    for ref, est in zip(pa + pb, rep.per_term_freq_a + rep.per_term_freq_b):
        se = max(est.std_error, math.sqrt(ref * (1 - ref) / est.samples))
        assert abs(est.mean - ref) <= 4 * se + 1e-12


def test_outage_vanishes_at_high_snr():
    cfg = make_config(*FIG6, 110, alpha=0.95, beta=0.1, rate_a=1.0, rate_b=1.0)
    assert mc.mc_outage(cfg, 10**6, seed=1).op_a.mean < 1e-4


def test_g_term_limits():
    # theta_1 -> 0: G10 reduces to user b failing interference-free
    cfg = make_config(*FIG5, 70, alpha=0.3, rate_a=1e-9, rate_b=1.5)
    n = 10**6
    g10 = mc.mc_g_term(10, "i", cfg, n, seed=2)
    g = mc.draw_gains(2, 0, n)
    xa, xb = cfg.gains.l_ia * cfg.snr_a * g[:, 0], cfg.gains.l_ib * cfg.snr_b * g[:, 1]
    direct = np.mean(xb < cfg.thresholds.theta_2)
    assert g10.mean == direct
    # theta_11 unreachable: G1 approaches the NOMA joint failure at one RRH
    big = make_config(*FIG5, 70, alpha=0.3, beta=1.0, rate_a=20.0, rate_b=1.5)
    g1 = mc.mc_g_term(1, "j", big, n, seed=2)
    xa, xb = big.gains.l_ja * big.snr_a * g[:, 2], big.gains.l_jb * big.snr_b * g[:, 3]
    th = big.thresholds
    joint = np.mean((xa / (xb + 1) < th.theta_1) & (xb / (xa + 1) < th.theta_2))
    assert abs(g1.mean - joint) < 1e-3
    with pytest.raises(ValueError):
        mc.mc_g_term(12, "i", cfg, 10, seed=0)
    with pytest.raises(ValueError):
        mc.mc_g_term(1, "k", cfg, 10, seed=0)


def test_per_rrh_rates_match_closed_forms():
    from dursma import er_analytic as E
    cfg = make_config(*FIG3, 70, alpha=0.5)
    rates = mc.mc_per_rrh_rates(cfg, 10**6, seed=1)
    fns = {"x1a": E.er_x1a, "x2a": E.er_x2a, "b": E.er_b}
    for (msg, k), est in rates.items():
        assert abs(est.z_score(fns[msg](cfg, k))) < 4


def test_products_cover_the_printed_list():
    assert PRODUCTS_A[0] == (1, 1) and PRODUCTS_A[-1] == (9, 8)
