import math

import numpy as np
import pytest
from scipy import integrate as sci_integrate
from scipy import special

from dursma import er_analytic as E
from dursma.sysmodel import LinkGains, make_config, sample_channel

GEOMS = {"fig3": (5, 15, 17, 8), "fig5": (5, 20, 15, 10), "sym": (10, 10, 10, 10)}
GRID = [(g, s, a) for g in GEOMS for s in (60, 75, 90) for a in (0.2, 0.5, 0.8)]


def cfg_of(geom, snr, alpha):
    return make_config(*GEOMS[geom], snr, alpha=alpha)


@pytest.mark.parametrize("geom, snr, alpha", GRID)
@pytest.mark.parametrize("k", ["i", "j"])
def test_closed_forms_match_own_quadrature(geom, snr, alpha, k):
    cfg = cfg_of(geom, snr, alpha)
    np.testing.assert_allclose(E.er_x1a(cfg, k), E.er_x1a_quadrature(cfg, k), rtol=1e-6)
    np.testing.assert_allclose(E.er_x2a(cfg, k), E.er_x2a_quadrature(cfg, k), rtol=1e-6)
    np.testing.assert_allclose(E.er_b(cfg, k), E.er_b_quadrature(cfg, k), rtol=1e-6)


@pytest.mark.parametrize("geom, snr, alpha", GRID[::4])
def test_closed_forms_match_scipy_quad(geom, snr, alpha):
    cfg = cfg_of(geom, snr, alpha)
    xa, xb = cfg.mean_snrs("i")
    u = 1 - alpha

    def f1(x):
        d = (alpha - x * u) * xa
        return d * math.exp(-x / d) / ((d + x * xb) * (1 + x)) if d > 0 else 0.0

    ref = sci_integrate.quad(f1, 0, alpha / u, epsabs=0, epsrel=1e-11, limit=500)[0] / math.log(2)
    np.testing.assert_allclose(E.er_x1a(cfg, "i"), ref, rtol=1e-6)
    ref_b = xb * sci_integrate.quad(lambda x: math.exp(-x / xb) / ((xb + u * xa * x) * (1 + x)),
                                    0, np.inf, epsabs=0, epsrel=1e-11, limit=500)[0] / math.log(2)
    np.testing.assert_allclose(E.er_b(cfg, "i"), ref_b, rtol=1e-6)


def test_degenerate_branches_match_quadrature():
    cfg = make_config(10, 10, 10, 10, 70, alpha=0.4)
    # Xa = Xb: double pole in x_1a
    np.testing.assert_allclose(E.er_x1a(cfg, "i"), E.er_x1a_quadrature(cfg, "i"), rtol=1e-6)
    # u Xa = Xb: coincident interference level in x_b
    cfg_b = cfg.with_(snr_b=cfg.snr_a * 0.6)
    np.testing.assert_allclose(E.er_b(cfg_b, "i"), E.er_b_quadrature(cfg_b, "i"), rtol=1e-6)
    np.testing.assert_allclose(E.er_x1a(cfg_b, "i"), E.er_x1a_quadrature(cfg_b, "i"), rtol=1e-6)
    # nearly degenerate stays continuous
    near = cfg.with_(snr_b=cfg.snr_a * (1 + 1e-7))
    np.testing.assert_allclose(E.er_x1a(near, "i"), E.er_x1a(cfg, "i"), rtol=1e-5)


def test_alpha_endpoints():
    cfg = cfg_of("fig3", 70, 0.0)
    assert E.er_x1a(cfg, "i") == 0.0
    one = cfg.with_(alpha=1.0)
    assert E.er_x2a(one, "i") == 0.0
    xa, xb = one.mean_snrs("i")
    np.testing.assert_allclose(E.er_b(one, "i"), -math.exp(1 / xb) * special.expi(-1 / xb) / math.log(2),
                               rtol=1e-12)
    np.testing.assert_allclose(E.er_x1a(one, "i"), E.er_x1a_quadrature(one, "i"), rtol=1e-6)


def test_er_x2a_unit_a():
    v = E.e1_scaled(1.0) / math.log(2)
    np.testing.assert_allclose(v, math.e * special.exp1(1.0) / math.log(2), rtol=1e-13)
    assert abs(v - 0.86036) < 5e-5
    a_vals = [1e3, 1e6]
    ratios = [E.e1_scaled(1 / a) / math.log(2) / math.log2(a) for a in a_vals]
    assert ratios[0] < ratios[1] < 1.0 + 1e-12
    assert abs(ratios[1] - 1) < 0.05


def test_p1_symmetric_and_limits():
    g = LinkGains(2.0, 3.0, 4.0, 6.0)  # l_ia l_jb = l_ja l_ib
    assert E.p1(g) == 0.5
    prev = 1.0
    for scale in (1.0, 10.0, 1e3, 1e6):
        v = E.p1(LinkGains(1.0, scale, 1.0, 1.0))
        assert 0 <= v <= 1 and v < prev
        prev = v
    assert prev < 1e-4


def test_p1_continuous_at_ratio_one():
    lo = E.p1(LinkGains(1.0, 1 - 1e-7, 1.0, 1.0))
    hi = E.p1(LinkGains(1.0, 1 + 1e-7, 1.0, 1.0))
    assert abs(lo - hi) < 1e-5
    # Taylor branch agrees with the closed form just outside it
    for e in (9e-4, 1.1e-3):
        r = 1 + e
        closed = (1 - r + r * math.log(r)) / (r - 1) ** 2
        np.testing.assert_allclose(E.p1(LinkGains(1.0, r, 1.0, 1.0)), closed, rtol=1e-9)


def test_p2_examples():
    assert E.p2(LinkGains(1.0, 1.0, 1.0, 1.0)) == 0.5
    assert E.p2(LinkGains(3.0, 1.0, 1.0, 1.0)) == 0.75


@pytest.mark.parametrize("geom", ["fig3", "fig5"])
def test_selection_probabilities_vs_direct_mc(geom):
    cfg = cfg_of(geom, 70, 0.5)
    g = cfg.gains
    n = 10**6
    s = sample_channel(np.random.default_rng(2024), n)
    r = g.l_ja * g.l_ib / (g.l_ia * g.l_jb)
    e1 = np.mean(s.g_ia * s.g_jb > r * s.g_ja * s.g_ib)
    e2 = np.mean(s.g_ia > (g.l_ja / g.l_ia) * s.g_ja)
    for est, ref in ((e1, E.p1(g)), (e2, E.p2(g))):
        assert abs(est - ref) < 3 * math.sqrt(ref * (1 - ref) / n)


def test_breakdown_composition_and_symmetry():
    cfg = cfg_of("fig3", 80, 0.5)
    b = E.er_breakdown(cfg)
    np.testing.assert_allclose(b.er_user_a, b.p1 * b.er_x1a_i + (1 - b.p1) * b.er_x1a_j
                               + b.p2 * b.er_x2a_i + (1 - b.p2) * b.er_x2a_j, rtol=1e-15)
    np.testing.assert_allclose(b.er_user_b, (1 - b.p1) * b.er_b_i + b.p1 * b.er_b_j, rtol=1e-15)
    assert b.er_sum == b.er_user_a + b.er_user_b
    s = E.er_breakdown(cfg_of("sym", 80, 0.5))
    assert s.er_x1a_i == s.er_x1a_j and s.p1 == 0.5 and s.p2 == 0.5


def test_alpha_sweep_direction():
    # more power on the first-decoded stream moves rate from user a to user b
    alphas = np.linspace(0.0, 1.0, 21)
    ea = [E.er_breakdown(cfg_of("fig3", 80, a)).er_user_a for a in alphas]
    eb = [E.er_breakdown(cfg_of("fig3", 80, a)).er_user_b for a in alphas]
    assert np.all(np.diff(ea) < 0)
    assert np.all(np.diff(eb) > 0)


def test_sum_nondecreasing_in_snr():
    base = cfg_of("fig3", 60, 0.5)
    for which in ("snr_a", "snr_b"):
        vals = [E.er_breakdown(base.with_(**{which: 10 ** (d / 10)})).er_sum for d in range(50, 95, 5)]
        assert np.all(np.diff(vals) >= -1e-12)


def test_sinr_cdfs():
    cfg = cfg_of("fig3", 70, 0.6)
    c = E.sinr_cdfs(cfg, "i")
    assert c.gamma_2a(0.0) == 0.0
    xs = np.logspace(-3, 5, 50)
    assert np.all(np.diff(c.gamma_2a(xs)) >= 0)
    assert c.gamma_1a(0.6 / 0.4) == 1.0
    n = 10**6
    s = sample_channel(np.random.default_rng(9), n)
    from dursma.sinr import rsma_sinrs
    t = rsma_sinrs(cfg, s, "i")
    eps = math.sqrt(math.log(2 / 0.01) / (2 * n))
    for fn, sample in ((c.gamma_1a, t.gamma_1a), (c.gamma_b, t.gamma_b), (c.gamma_2a, t.gamma_2a)):
        qs = np.quantile(sample, np.linspace(0.1, 0.9, 9))
        emp = np.array([np.mean(sample <= q) for q in qs])
        assert np.max(np.abs(fn(qs) - emp)) < eps


def test_alpha_out_of_range():
    with pytest.raises(ValueError):
        E._check_alpha(1.5)
