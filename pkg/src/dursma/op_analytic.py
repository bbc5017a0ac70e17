"""Closed-form outage probabilities with feedback-selected NOMA/RSMA decoding.

Per RRH k the single-RRH events G1..G11 are written in terms of
t = |h_kb|^2; conditioned on t every SINR event is an interval for
g_a = |h_ka|^2 whose endpoints are affine in t:

    U1(t)  = theta_1 (Xb t + 1) / Xa              gamma_a^ab < theta_1   <=>  g_a < U1
    L1(t)  = (Xb t - theta_2) / (theta_2 Xa)      gamma_b^ba < theta_2   <=>  g_a > L1
    R11(t) = theta_11 (Xb t + 1) / (Xa c)         gamma_1a  > theta_11   <=>  g_a > R11
    Rb(t)  = (Xb t - theta_2) / (theta_2 u Xa)    gamma_b   < theta_2    <=>  g_a > Rb
    R2     = theta_12 / (u Xa)                    gamma_2a  < theta_12   <=>  g_a < R2

with u = 1 - alpha and c = alpha - theta_11 u. The helpers f1..f9 are the
crossing abscissae of these lines, F1..F3 decide which of two lines is
steeper, and Phi1..Phi4 are the tail integrals
int_z^inf exp(-t) exp(-line(t)) dt for R11, Rb, L1 and U1 respectively.

Each G term is a sum of named subterms (G11, G12, G21, ...), one per pair of
binding lower/upper lines. :func:`g_term` assembles them from the helpers;
the published case tables are kept verbatim behind ``as_printed=True`` for
auditing. :func:`g_term_direct` integrates the same events with an
independent breakpoint sweep and serves as an exact cross-check.
"""

import math
from dataclasses import dataclass

from .sysmodel import thresholds

CLAMP_EPS = 1e-9

# Products entering the outage of user a and of user b.
PRODUCTS_A = (
    (1, 1), (2, 2), (2, 3), (3, 2), (4, 4), (4, 5), (5, 4), (4, 6),
    (4, 7), (5, 6), (6, 4), (6, 5), (7, 4), (8, 8), (8, 9), (9, 8),
)
PRODUCTS_B = ((1, 1), (2, 2), (2, 3), (3, 2), (10, 10), (10, 11), (11, 10))


class DegenerateDenominator(ZeroDivisionError):
    """A helper function was evaluated where its denominator vanishes."""

    def __init__(self, helper, detail=""):
        self.helper = helper
        super().__init__("degenerate denominator in %s %s" % (helper, detail))


@dataclass(frozen=True)
class OutageContext:
    cfg: object
    thresholds: object

    @property
    def alpha(self):
        return self.cfg.alpha

    def links(self, rrh):
        return self.cfg.gains.rrh(rrh)


def outage_context(cfg):
    if not (cfg.rate_a > 0 and cfg.rate_b > 0):
        raise ValueError("outage analysis needs positive target rates")
    return OutageContext(cfg, thresholds(cfg.rate_a, cfg.rate_b, cfg.beta))


def _div(num, den, helper):
    if den == 0.0:
        raise DegenerateDenominator(helper)
    return num / den


def helper_F(idx, ctx):
    """Sign indicators F1, F2, F3."""
    a = ctx.alpha
    th = ctx.thresholds
    if idx == 1:
        return -(a - th.theta_11 * (1.0 - a) * (1.0 + th.theta_2))
    if idx == 2:
        return -(a - th.theta_11 * (1.0 - a + th.theta_2))
    if idx == 3:
        return 1.0 - th.theta_1 * th.theta_2 * (1.0 - a)
    raise ValueError("helper_F index must be 1..3, got %r" % (idx,))


def helper_f(idx, x, ctx):
    """Crossing points f1..f9 evaluated at the user-b link gain ``x``."""
    a = ctx.alpha
    u = 1.0 - a
    th = ctx.thresholds
    t11, t12, t2, t1 = th.theta_11, th.theta_12, th.theta_2, th.theta_1
    xg = x * ctx.cfg.snr_b
    name = "f%d" % idx
    if idx == 1:
        return _div(t2 * a, xg * (a - t11 * u * (1.0 + t2)), name)
    if idx == 2:
        return _div(a * t12 - t11 * u * (t12 + 1.0), xg * t11 * u, name)
    if idx == 3:
        return _div(t2 * (t12 + 1.0), xg, name)
    if idx == 4:
        return _div(t2 * (1.0 + t1 * u), xg * (1.0 - t1 * t2 * u), name)
    if idx == 5:
        return _div(t12 - t1 * u, xg * t1 * u, name)
    if idx == 6:
        return _div(t2 * a * (1.0 + t11), xg * (a - t11 * (u + t2)), name)
    if idx == 7:
        return _div(t12 * (a - t11 * u) - t11 * u, xg * t11 * u, name)
    if idx == 8:
        return _div(t2 * (t12 + u), xg * u, name)
    if idx == 9:
        return _div(t2 * (t1 + 1.0), xg * (1.0 - t1 * t2), name)
    raise ValueError("helper_f index must be 1..9, got %r" % (idx,))


def phi(idx, x, y, z, ctx):
    """Tail integrals Phi1..Phi4 with user-a gain x, user-b gain y, lower limit z."""
    a = ctx.alpha
    u = 1.0 - a
    th = ctx.thresholds
    ga = ctx.cfg.snr_a
    gb = ctx.cfg.snr_b
    name = "Phi%d" % idx
    if idx == 1:
        k = x * ga * (a - th.theta_11 * u)
        den = k + gb * y * th.theta_11
        e = -_div(th.theta_11 * y * gb * z + th.theta_11, k, name) - z
        return _div(k, den, name) * math.exp(e)
    if idx in (2, 3):
        k = x * th.theta_2 * ga * (u if idx == 2 else 1.0)
        e = -_div(y * gb * z - th.theta_2, k, name) - z
        return _div(k, k + gb * y, name) * math.exp(e)
    if idx == 4:
        k = x * ga
        e = -(th.theta_1 * y * gb * z + th.theta_1) / k - z
        return _div(k, k + gb * y * th.theta_1, name) * math.exp(e)
    raise ValueError("phi index must be 1..4, got %r" % (idx,))


class _Rrh:
    """Table helpers bound to one RRH; f values are computed lazily."""

    def __init__(self, rrh, ctx):
        self.ctx = ctx
        self.la, self.lb = ctx.links(rrh)
        th = ctx.thresholds
        a = ctx.alpha
        u = 1.0 - a
        self.a, self.u = a, u
        self.t11, self.t12, self.t2, self.t1 = th.theta_11, th.theta_12, th.theta_2, th.theta_1
        self.xa = self.la * ctx.cfg.snr_a
        self.xb = self.lb * ctx.cfg.snr_b
        self.z0 = self.t2 / self.xb
        self.e0 = math.exp(-self.z0)
        self.F1 = helper_F(1, ctx)
        self.F2 = helper_F(2, ctx)
        self.F3 = helper_F(3, ctx)
        c = a - self.t11 * u
        self.c = c
        # x_1a decodable while x_a fails a-first: rotated ratio and slope test
        self.split_ok = a > self.t11 * u
        self.case_a = self.split_ok and (self.t11 - self.t1 * c < 0.0)
        self.case_b = (a < self.t11 * u) or (self.t11 - self.t1 * c > 0.0)
        self.s12 = 1.0 - self.t1 * self.t2
        self._f = {}

    def f(self, idx):
        if idx not in self._f:
            self._f[idx] = helper_f(idx, self.lb, self.ctx)
        return self._f[idx]

    def P(self, idx, z):
        return phi(idx, self.la, self.lb, z, self.ctx)

    def r2c(self):
        return math.exp(-_div(self.t12, self.u * self.xa, "R2"))


def _rows_g1(r):
    f = r.f
    P = r.P
    return [
        ("G11.1", lambda: r.case_a and r.F2 > 0 and f(6) > r.z0,
         lambda: 1 + P(1, f(6)) - P(1, 0) - r.e0 - P(3, f(6)) + P(3, r.z0)),
        ("G11.2", lambda: r.case_a and r.F2 < 0,
         lambda: 1 - P(1, 0) - r.e0 + P(3, r.z0)),
        ("G12.1", lambda: r.case_b and r.s12 > 0 and f(9) > r.z0,
         lambda: 1 + P(4, f(9)) - P(4, 0) - r.e0 - P(3, f(9)) + P(3, r.z0)),
        ("G12.2", lambda: r.case_b and r.s12 < 0,
         lambda: 1 - P(4, 0) - r.e0 + P(3, r.z0)),
    ]


def _rows_g2(r):
    f = r.f
    P = r.P
    slope = lambda: r.t11 - r.t1 * r.c < 0
    return [
        ("G21.1", lambda: r.F1 < 0 and slope() and r.split_ok,
         lambda: P(4, f(1)) - P(4, 0) - P(1, f(1)) + P(1, 0)),
        ("G21.2", lambda: r.F1 > 0 and slope() and r.split_ok,
         lambda: P(1, 0) - P(4, 0)),
        ("G22.1", lambda: r.F1 < 0 and r.F3 > 0 and r.split_ok and f(4) > f(1),
         lambda: P(4, f(4)) - P(4, f(1)) - P(1, f(4)) + P(1, f(1))),
        ("G22.2", lambda: r.F1 < 0 and r.F3 < 0 and r.split_ok,
         lambda: P(2, f(1)) - P(4, f(1))),
    ]


def _rows_g3(r):
    f = r.f
    P = r.P
    return [
        ("G31.1", lambda: r.F1 > 0 and r.case_a,
         lambda: 1 - P(1, 0) - r.e0 + P(2, r.z0)),
        ("G31.2", lambda: r.F1 < 0 and r.case_a,
         lambda: 1 + P(1, f(1)) - P(1, 0) - r.e0 - P(2, f(1)) + P(2, r.z0)),
        ("G32.1", lambda: r.F3 < 0 and r.case_b,
         lambda: 1 - P(4, 0) - r.e0 + P(2, r.z0)),
        ("G32.2", lambda: r.F3 > 0 and r.case_b,
         lambda: 1 + P(4, f(4)) - P(4, 0) - r.e0 - P(2, f(4)) + P(2, r.z0)),
    ]


def _rows_g4(r):
    f = r.f
    P = r.P
    slope = lambda: r.t11 - r.t1 * r.c < 0

    def strip(lo_idx, hi_idx, t0, t1):
        # int_{t0}^{t1} e^-t (e^{-lower} - e^{-upper}) for Phi-type bounds
        return P(hi_idx, t1) - P(hi_idx, t0) - P(lo_idx, t1) + P(lo_idx, t0)

    def r2strip(lo_idx, t0, t1):
        # upper bound R2 (constant), lower bound Phi lo_idx
        return r.r2c() * (math.exp(-t1) - math.exp(-t0)) - (P(lo_idx, t1) - P(lo_idx, t0))

    return [
        ("G41.1", lambda: r.F2 > 0 and r.F3 > 0 and slope() and f(5) > f(4),
         lambda: P(4, f(5)) - P(4, f(4)) + P(1, f(4)) - P(1, f(5))),
        ("G41.2", lambda: r.F2 < 0 and r.F3 > 0 and slope() and min(f(5), f(6)) > f(4),
         lambda: strip(1, 4, f(4), min(f(5), f(6)))),
        ("G42.1", lambda: r.F2 > 0 and r.F1 < 0 and r.F3 < 0 and f(3) > f(1),
         lambda: P(2, f(3)) - P(2, f(1)) - P(1, f(3)) + P(1, f(1))),
        ("G42.2", lambda: r.F2 > 0 and r.F1 < 0 and r.F3 > 0 and min(f(3), f(4)) > f(1),
         lambda: P(2, min(f(3), f(4))) - P(2, f(1)) - P(1, min(f(3), f(4))) + P(1, f(1))),
        ("G42.3", lambda: r.F2 < 0 and r.F1 < 0 and r.F3 < 0 and min(f(3), f(6)) > f(1),
         lambda: P(2, min(f(3), f(6))) - P(2, f(1)) - P(1, min(f(3), f(6))) + P(1, f(1))),
        ("G42.4", lambda: r.F2 < 0 and r.F1 < 0 and r.F3 > 0 and min(f(3), f(4), f(6)) > f(1),
         lambda: P(2, min(f(3), f(4), f(6))) - P(2, f(1))
         - P(1, min(f(3), f(4), f(6))) + P(1, f(1))),
        ("G43.1", lambda: r.F2 > 0 and r.F3 > 0 and f(7) > max(f(4), f(5)),
         lambda: r2strip(1, max(f(4), f(5)), f(7))),
        ("G43.2", lambda: r.F2 < 0 and r.F3 > 0 and min(f(6), f(7)) > max(f(4), f(5)),
         lambda: r2strip(1, max(f(4), f(5)), min(f(6), f(7)))),
        ("G44.1", lambda: r.F2 > 0 and r.F3 < 0 and f(7) > f(3),
         lambda: r2strip(1, f(3), f(7))),
        ("G44.2", lambda: r.F2 > 0 and r.F3 > 0 and min(f(4), f(7)) > f(3),
         lambda: r2strip(1, f(3), min(f(4), f(7)))),
        ("G44.3", lambda: r.F2 < 0 and r.F3 < 0 and min(f(6), f(7)) > f(3),
         lambda: r2strip(2, f(3), min(f(6), f(7)))),
        ("G44.4", lambda: r.F2 < 0 and r.F3 > 0 and min(f(4), f(6), f(7)) > f(3),
         lambda: r2strip(1, f(3), min(f(4), f(6), f(7)))),
        ("G45.1", lambda: r.F2 < 0 and r.F3 > 0 and r.s12 < 0 and f(5) > max(f(4), f(6)),
         lambda: P(4, f(5)) - P(4, max(f(4), f(6))) - P(3, f(5)) + P(3, max(f(4), f(6)))),
        ("G45.2", lambda: r.F2 < 0 and r.F3 > 0 and r.s12 > 0
         and min(f(5), f(9)) > max(f(4), f(6)),
         lambda: P(4, min(f(5), f(9))) - P(4, max(f(4), f(6)))
         - P(3, min(f(5), f(9))) + P(3, max(f(4), f(6)))),
        ("G46.1", lambda: r.F2 < 0 and r.F3 < 0 and f(3) > f(6),
         lambda: P(2, f(3)) - P(2, f(6)) - P(3, f(3)) + P(3, f(6))),
        ("G46.2", lambda: r.F2 < 0 and r.F3 > 0 and min(f(3), f(4)) > f(6),
         lambda: P(2, min(f(3), f(4))) - P(2, f(6)) - P(3, min(f(3), f(4))) + P(3, f(6))),
        ("G47", lambda: r.F2 < 0 and r.F3 > 0 and f(8) > max(f(4), f(5), f(6)),
         lambda: r2strip(4, max(f(4), f(5), f(6)), f(8))),
        ("G48.1", lambda: r.F2 < 0 and r.F3 < 0 and f(8) > max(f(3), f(6)),
         lambda: r2strip(2, max(f(3), f(6)), f(8))),
        ("G48.2", lambda: r.F2 < 0 and r.F3 > 0 and min(f(4), f(8)) > max(f(3), f(6)),
         lambda: r2strip(2, max(f(3), f(6)), min(f(4), f(8)))),
    ]


def _rows_g5(r):
    f = r.f
    P = r.P
    slope = lambda: r.t11 - r.t1 * r.c < 0
    ok = lambda: r.split_ok

    def r2strip(lo_idx, t0, t1):
        return r.r2c() * (math.exp(-t1) - math.exp(-t0)) - (P(lo_idx, t1) - P(lo_idx, t0))

    return [
        ("G51.1", lambda: ok() and r.F1 < 0 and slope() and min(f(1), f(5)) > 0,
         lambda: P(4, min(f(1), f(5))) - P(4, 0) + P(1, 0) - P(1, min(f(1), f(5)))),
        ("G51.2", lambda: ok() and r.F1 > 0 and slope() and f(5) > 0,
         lambda: P(4, f(5)) - P(4, 0) + P(1, 0) - P(1, f(5))),
        ("G52.1", lambda: ok() and r.F1 < 0 and r.s12 < 0 and f(5) > f(1),
         lambda: P(4, f(5)) - P(4, f(1)) + P(1, f(1)) - P(1, f(5))),
        ("G52.2", lambda: ok() and r.F1 < 0 and r.s12 < 0 and min(f(4), f(5)) > f(1),
         lambda: P(4, min(f(4), f(5))) - P(4, f(1)) + P(1, f(1)) - P(1, min(f(4), f(5)))),
        ("G53.1", lambda: ok() and r.F1 < 0 and min(f(1), f(7)) > f(5),
         lambda: r2strip(2, f(5), min(f(1), f(7)))),
        ("G53.2", lambda: ok() and r.F1 > 0 and f(7) > f(5),
         lambda: r2strip(2, f(5), f(7))),
        ("G54", lambda: ok() and r.F1 < 0 and f(3) > max(f(1), f(5)),
         lambda: r2strip(2, max(f(1), f(5)), f(3))),
    ]


def _rows_g6(r):
    f = r.f
    P = r.P

    def r2strip(lo_idx, t0, t1):
        return r.r2c() * (math.exp(-t1) - math.exp(-t0)) - (P(lo_idx, t1) - P(lo_idx, t0))

    A = lambda: r.case_a
    B = lambda: r.case_b
    return [
        ("G61", lambda: A() and r.F1 < 0 and min(f(6), f(7)) > f(1),
         lambda: P(1, min(f(6), f(7))) - P(1, f(1)) + P(3, f(1)) - P(3, min(f(6), f(7)))),
        ("G62", lambda: A() and r.F1 < 0 and f(8) > max(f(1), f(7)),
         lambda: r2strip(3, max(f(1), f(7)), f(8))),
        ("G63.1", lambda: A() and r.F1 < 0 and min(f(1), f(4)) > r.z0,
         lambda: P(2, min(f(1), f(4))) - P(2, r.z0) + P(3, r.z0) - P(3, min(f(1), f(4)))),
        ("G63.2", lambda: A() and r.F1 > 0 and f(4) > r.z0,
         lambda: P(2, f(4)) - P(2, r.z0) + P(3, r.z0) - P(3, f(4))),
        ("G64.1", lambda: A() and r.F1 < 0 and min(f(1), f(8)) > f(3),
         lambda: r2strip(3, f(3), min(f(1), f(8)))),
        ("G64.2", lambda: A() and r.F1 > 0 and f(8) > f(3),
         lambda: r2strip(3, f(3), f(8))),
        ("G65.1", lambda: B() and r.F3 > 0 and r.s12 > 0 and min(f(5), f(9)) > f(4),
         lambda: P(4, min(f(5), f(9))) - P(4, f(4)) + P(3, f(4)) - P(3, min(f(5), f(9)))),
        ("G65.2", lambda: B() and r.F3 > 0 and r.s12 < 0 and f(5) > f(4),
         lambda: P(4, f(5)) - P(4, f(4)) + P(3, f(4)) - P(3, f(5))),
        ("G66", lambda: B() and r.F3 > 0 and f(8) > max(f(4), f(5)),
         lambda: r2strip(3, max(f(4), f(5)), f(8))),
        ("G67.1", lambda: B() and r.F3 > 0 and min(f(3), f(4)) > r.z0,
         lambda: P(2, min(f(3), f(4))) - P(4, r.z0) + P(3, r.z0) - P(3, min(f(3), f(4)))),
        ("G67.2", lambda: B() and r.F3 < 0 and f(3) > r.z0,
         lambda: P(2, f(3)) - P(4, r.z0) + P(3, r.z0) - P(3, f(3))),
        ("G68.1", lambda: B() and r.F3 > 0 and min(f(4), f(8)) > f(3),
         lambda: r2strip(3, f(3), min(f(4), f(8)))),
        ("G68.2", lambda: B() and r.F3 < 0 and f(8) > f(3),
         lambda: r2strip(3, f(3), f(8))),
    ]


def _rows_g7(r):
    f = r.f
    P = r.P
    A = lambda: r.case_a
    B = lambda: r.case_b
    e0 = r.e0

    def r2part(t0, t1):
        return r.r2c() * (math.exp(-t1) - math.exp(-t0))

    return [
        ("G71.1", lambda: A() and r.F1 > 0 and f(7) > 0,
         lambda: 1 - e0 + P(1, f(7)) + P(1, 0) - P(2, f(7)) + P(2, r.z0)),
        ("G71.2", lambda: A() and r.F1 < 0 and min(f(1), f(7)) > 0,
         lambda: 1 - e0 + P(1, min(f(1), f(7))) + P(1, 0)
         - P(2, min(f(1), f(7))) + P(2, r.z0)),
        ("G72", lambda: A() and f(3) > max(f(7), 0),
         lambda: 1 - e0 + r2part(max(f(7), 0), f(3)) - P(2, f(3)) + P(2, max(f(7), 0))),
        ("G73.1", lambda: B() and r.F3 > 0 and min(f(4), f(5)) > 0,
         lambda: 1 - e0 + P(4, min(f(4), f(5))) + P(4, 0)
         - P(2, min(f(4), f(5))) + P(2, 0)),
        ("G73.2", lambda: B() and r.F3 < 0 and f(5) > 0,
         lambda: 1 - e0 + P(4, f(5)) + P(4, 0) - P(2, f(5)) + P(2, 0)),
        ("G74", lambda: B() and f(3) > max(f(5), r.z0),
         lambda: 1 - e0 + r2part(max(f(5), r.z0), f(3))
         - P(2, f(3)) + P(2, max(f(5), r.z0))),
    ]


_PRINTED_ROWS = {1: _rows_g1, 2: _rows_g2, 3: _rows_g3, 4: _rows_g4,
                 5: _rows_g5, 6: _rows_g6, 7: _rows_g7}


def _g8(r):
    xa, xb, t1, t2 = r.xa, r.xb, r.t1, r.t2
    k = xb / (xb + xa * t2)
    return k * math.exp(-t2 / xb) - k * math.exp(-t2 * (1 + t1) / xb - t1 / xa)


def _g9(r):
    xa, xb, t1, t2 = r.xa, r.xb, r.t1, r.t2
    k = xa * t2 / (xa * t2 + xb)
    return (1 - math.exp(-t1 / xa) * (1 - math.exp(-t2 * (t1 + 1) / xb)) - math.exp(-t2 / xb)
            - (k * math.exp(-t1 * t2 / (xa * t2) - t2 * (t1 + 1) / xb) - k * math.exp(-t2 / xb)))


def _g10(r):
    return r.P(4, 0) - r.P(4, r.z0)


def _g11(r):
    return 1 - r.e0 - r.P(4, 0) + r.P(4, r.z0)


_CLOSED = {8: _g8, 9: _g9, 10: _g10, 11: _g11}


# Subterm decomposition. Each subterm is a list of pieces (lower, upper,
# extra) over which g_a lies between the named lines; ``extra`` holds
# additional (A, B) orderings A < B that split a pair between subterms.
# "Z" is the zero line g_a > 0.
_EVENT_LINES = {
    1: (("Z", "L1"), ("U1", "R11")),
    2: (("Z", "L1", "R11", "Rb"), ("U1",)),
    3: (("Z", "L1", "Rb"), ("U1", "R11")),
    4: (("Z", "L1", "R11"), ("U1", "Rb", "R2")),
    5: (("Z", "L1", "R11", "Rb"), ("U1", "R2")),
    6: (("Z", "L1"), ("U1", "R11", "Rb", "R2")),
    7: (("Z", "L1", "Rb"), ("U1", "R11", "R2")),
}
_SUBTERMS = {
    1: (("G11", (("Z", "R11", ()), ("L1", "R11", ()))),
        ("G12", (("Z", "U1", ()), ("L1", "U1", ())))),
    2: (("G21", (("R11", "U1", ()),)),
        ("G22", (("Rb", "U1", ()),))),
    3: (("G31", (("Z", "R11", ()), ("Rb", "R11", ()))),
        ("G32", (("Z", "U1", ()), ("Rb", "U1", ())))),
    4: (("G41", (("R11", "U1", ()),)),
        ("G42", (("R11", "Rb", ()),)),
        ("G43", (("R11", "R2", (("U1", "Rb"),)),)),
        ("G44", (("R11", "R2", (("Rb", "U1"),)),)),
        ("G45", (("L1", "U1", ()),)),
        ("G46", (("L1", "Rb", ()),)),
        ("G47", (("L1", "R2", (("U1", "Rb"),)),)),
        ("G48", (("L1", "R2", (("Rb", "U1"),)),))),
    5: (("G51", (("R11", "U1", ()),)),
        ("G52", (("Rb", "U1", ()),)),
        ("G53", (("R11", "R2", ()),)),
        ("G54", (("Rb", "R2", ()),))),
    6: (("G61", (("L1", "R11", ()),)),
        ("G62", (("L1", "R2", (("R11", "Rb"), ("R11", "U1"))),)),
        ("G63", (("L1", "Rb", (("R11", "U1"),)),)),
        ("G64", (("L1", "R2", (("Rb", "R11"), ("R11", "U1"))),)),
        ("G65", (("L1", "U1", ()),)),
        ("G66", (("L1", "R2", (("U1", "Rb"), ("U1", "R11"))),)),
        ("G67", (("L1", "Rb", (("U1", "R11"),)),)),
        ("G68", (("L1", "R2", (("Rb", "U1"), ("U1", "R11"))),))),
    7: (("G71", (("Z", "R11", ()), ("Rb", "R11", ()))),
        ("G72", (("Z", "R2", (("R11", "U1"),)), ("Rb", "R2", (("R11", "U1"),)))),
        ("G73", (("Z", "U1", ()), ("Rb", "U1", ()))),
        ("G74", (("Z", "R2", (("U1", "R11"),)), ("Rb", "R2", (("U1", "R11"),))))),
}
# Crossing abscissa of two sloped lines, by helper index (0 marks z0).
_CROSS = {
    frozenset(("R11", "Rb")): 1, frozenset(("Rb", "R2")): 3, frozenset(("U1", "Rb")): 4,
    frozenset(("U1", "R2")): 5, frozenset(("L1", "R11")): 6, frozenset(("R11", "R2")): 7,
    frozenset(("L1", "R2")): 8, frozenset(("L1", "U1")): 9, frozenset(("Rb", "L1")): 0,
    frozenset(("Z", "Rb")): 0, frozenset(("Z", "L1")): 0,
}
def _slope_sign(r, a, b):
    """Sign of slope(a) - slope(b), read off the helper F signs."""
    if a == b:
        return 0.0
    # R11 is flat too when theta_11 = 0 (it then coincides with Z)
    flat = ("R2", "Z", "R11") if r.t11 == 0.0 else ("R2", "Z")
    if a in flat or b in flat:
        return 0.0 if a in flat and b in flat else (-1.0 if a in flat else 1.0)
    signs = {
        ("R11", "Rb"): helper_sign(r.F1),
        ("R11", "L1"): helper_sign(r.F2),
        ("U1", "Rb"): -helper_sign(r.F3),
        ("U1", "L1"): -helper_sign(r.s12),
        ("Rb", "L1"): 1.0,
        ("R11", "U1"): 0.0,
    }
    if (a, b) in signs:
        return signs[(a, b)]
    return -signs[(b, a)]


def helper_sign(v):
    return 1.0 if v > 0 else (-1.0 if v < 0 else 0.0)


def _intercept(r, name):
    """Value of the named line at t = 0."""
    if name == "Z":
        return 0.0
    if name == "U1":
        return r.t1 / r.xa
    if name == "L1":
        return -1.0 / r.xa
    if name == "R11":
        return r.t11 / (r.xa * r.c)
    if name == "Rb":
        return -1.0 / (r.u * r.xa)
    return r.t12 / (r.u * r.xa)


def _halfline(r, a, b):
    """Interval of t >= 0 on which line a < line b, as (lo, hi) or None if empty."""
    sign = _slope_sign(r, a, b)
    if sign == 0:
        # parallel (or proportional) lines: the order never changes
        if {a, b} == {"R11", "U1"}:
            below = r.t11 < r.t1 * r.c if a == "R11" else r.t1 * r.c < r.t11
        elif (a, b) == ("Z", "R11") and r.t11 == 0.0:
            # coincident lines: let R11 bind as a lower; Z-to-R11 strips are empty
            below = True
        else:
            below = _intercept(r, a) < _intercept(r, b)
        return (0.0, math.inf) if below else None
    idx = _CROSS.get(frozenset((a, b)))
    if idx is None:
        # a flat line against one with a positive intercept: fixed order
        below = _intercept(r, a) < _intercept(r, b)
        return (0.0, math.inf) if below else None
    f = r.z0 if idx == 0 else r.f(idx)
    if sign > 0:
        return 0.0, f
    return f, math.inf


def _strip(r, name, t0, t1):
    """int_{t0}^{t1} exp(-t) exp(-line(t)) dt for the named line."""
    def ex(t):
        return 0.0 if math.isinf(t) else math.exp(-t)
    if name == "Z":
        return ex(t0) - ex(t1)
    if name == "R2":
        return r.r2c() * (ex(t0) - ex(t1))
    idx = {"R11": 1, "Rb": 2, "L1": 3, "U1": 4}[name]
    tail = 0.0 if math.isinf(t1) else r.P(idx, t1)
    return r.P(idx, t0) - tail


def _piece(r, lowers, uppers, lo, hi, extra):
    cons = [(lo, hi)]
    cons += [(other, lo) for other in lowers if other != lo]
    cons += [(hi, other) for other in uppers if other != hi]
    cons += list(extra)
    t0, t1 = 0.0, math.inf
    present = lowers + uppers
    for a, b in cons:
        if a not in present or b not in present:
            # a dropped line (R11 when c <= 0) sits above every other line
            if a not in present:
                return 0.0
            continue
        span = _halfline(r, a, b)
        if span is None:
            return 0.0
        t0 = max(t0, span[0])
        t1 = min(t1, span[1])
        if not t0 < t1:
            return 0.0
    return _strip(r, lo, t0, t1) - _strip(r, hi, t0, t1)


def _subterm_values(idx, r):
    if r.u == 0.0:
        raise DegenerateDenominator("Rb", "(alpha = 1)")
    lowers, uppers = _EVENT_LINES[idx]
    if r.c <= 0.0:
        # gamma_1a > theta_11 is impossible and gamma_1a < theta_11 always holds
        if "R11" in lowers:
            return [(name, 0.0) for name, _ in _SUBTERMS[idx]]
        uppers = tuple(v for v in uppers if v != "R11")
    out = []
    for name, pieces in _SUBTERMS[idx]:
        total = 0.0
        for lo, hi, extra in pieces:
            if lo in lowers and hi in uppers:
                total += _piece(r, lowers, uppers, lo, hi, extra)
        out.append((name, total))
    return out


def g_subterms(idx, rrh, ctx, as_printed=False):
    """Subterms of G_idx at RRH ``rrh`` as a list of (label, value).

    With ``as_printed`` the rows are evaluated exactly as they appear in the
    published case tables (kept for auditing); otherwise each subterm is
    assembled from its bounding-line pair, gated by the slope signs F1..F3
    and the crossing points f1..f9.
    """
    r = _Rrh(rrh, ctx)
    if idx in _CLOSED:
        return [("G%d" % idx, _CLOSED[idx](r))]
    if idx not in _PRINTED_ROWS:
        raise ValueError("G-term index must be 1..11, got %r" % (idx,))
    if not as_printed:
        return _subterm_values(idx, r)
    out = []
    for name, cond, expr in _PRINTED_ROWS[idx](r):
        if cond():
            out.append((name, expr()))
    return out


def g_term(idx, rrh, ctx, as_printed=False):
    """Probability of the single-RRH event G_idx at RRH ``rrh``.

    Sums the condition-gated subterms; a row contributes only when every
    one of its conditions holds (strict inequalities, equality counts as
    false).
    """
    total = math.fsum(v for _, v in g_subterms(idx, rrh, ctx, as_printed))
    if not -CLAMP_EPS <= total <= 1 + CLAMP_EPS:
        raise ArithmeticError("G%d at RRH %s evaluated to %r outside [0, 1]" % (idx, rrh, total))
    return min(1.0, max(0.0, total))


def g_table(ctx, as_printed=False):
    """All eleven G terms for both RRHs: {rrh: {idx: value}}."""
    return {k: {idx: g_term(idx, k, ctx, as_printed) for idx in range(1, 12)} for k in ("i", "j")}


def _compose(table, products):
    return math.fsum(table["i"][p] * table["j"][q] for p, q in products)


def outage_a(ctx):
    """Outage probability of the splitting user a (16-product composition)."""
    return min(1.0, _compose(g_table(ctx), PRODUCTS_A))


def outage_b(ctx):
    """Outage probability of user b (7-product composition)."""
    return min(1.0, _compose(g_table(ctx), PRODUCTS_B))


def product_terms(ctx):
    """Per-product analytic values for both compositions."""
    t = g_table(ctx)
    return ([t["i"][p] * t["j"][q] for p, q in PRODUCTS_A],
            [t["i"][p] * t["j"][q] for p, q in PRODUCTS_B])


def noma_event_h(rrh, ctx):
    """Pr(gamma_a^ab < theta_1, gamma_b^ba < theta_2) at one RRH.

    This is G1 with no power split: at alpha = 0 the x_1a stream carries no
    power and its threshold test drops out.
    """
    return g_term(1, rrh, outage_context(ctx.cfg.with_(alpha=0.0)))


def outage_noma_baseline(ctx):
    """Outage of (a, b) when only NOMA decoding is available.

    Each RRH decodes in either order and shares decoded messages over the
    feedback link. User a fails iff both RRHs fail it a-first and, in
    addition, either b is decoded first nowhere or a fails interference-free
    at both; symmetrically for b. Returns (op_a, op_b).
    """
    h = noma_event_h("i", ctx) * noma_event_h("j", ctx)
    t = {k: {idx: g_term(idx, k, ctx) for idx in (8, 9, 10, 11)} for k in ("i", "j")}
    pa = h + _compose(t, ((8, 8), (8, 9), (9, 8)))
    pb = h + _compose(t, ((10, 10), (10, 11), (11, 10)))
    return min(1.0, pa), min(1.0, pb)


# ---------------------------------------------------------------------------
# Direct piecewise integration of the same events


def event_lines(idx, rrh, ctx):
    """Describe G_idx at one RRH as affine bounds on g_a over t = g_b.

    Returns (lowers, uppers, t_lo, t_hi) where each bound is (slope, intercept)
    and the event is max(lowers) < g_a < min(uppers), t_lo < t < t_hi, or None
    when the event is empty.
    """
    r = _Rrh(rrh, ctx)
    xa, xb, u = r.xa, r.xb, r.u
    t1, t2, t11, t12 = r.t1, r.t2, r.t11, r.t12
    lowers = [(0.0, 0.0)]
    uppers = []
    t_lo, t_hi = 0.0, math.inf

    u1 = (t1 * xb / xa, t1 / xa)
    l1 = (xb / (t2 * xa), -1.0 / xa)

    def add(kind):
        nonlocal t_lo, t_hi
        if kind == "a_ab<":
            uppers.append(u1)
        elif kind == "a_ab>":
            lowers.append(u1)
        elif kind == "b_ba<":
            lowers.append(l1)
        elif kind == "b_ba>":
            uppers.append(l1)
        elif kind == "a_ba<":
            uppers.append((0.0, t1 / xa))
        elif kind == "b_ab<":
            t_hi = min(t_hi, t2 / xb)
        elif kind in ("1a<", "1a>"):
            if r.c > 0:
                line = (t11 * xb / (xa * r.c), t11 / (xa * r.c))
                (uppers if kind == "1a<" else lowers).append(line)
            elif kind == "1a>":
                return False
        elif kind in ("b<", "b>"):
            if u > 0:
                line = (xb / (t2 * u * xa), -1.0 / (u * xa))
                (lowers if kind == "b<" else uppers).append(line)
            elif kind == "b<":
                t_hi = min(t_hi, t2 / xb)
            else:
                t_lo = max(t_lo, t2 / xb)
        elif kind == "2a<":
            if u > 0:
                uppers.append((0.0, t12 / (u * xa)))
        else:
            raise ValueError(kind)
        return True

    base = ["a_ab<", "b_ba<"]
    events = {
        1: base + ["1a<"],
        2: base + ["1a>", "b<"],
        3: base + ["1a<", "b<"],
        4: base + ["1a>", "b>", "2a<"],
        5: base + ["1a>", "b<", "2a<"],
        6: base + ["1a<", "b>", "2a<"],
        7: base + ["1a<", "b<", "2a<"],
        8: ["a_ba<", "b_ba>"],
        9: ["a_ba<", "b_ba<"],
        10: ["a_ab>", "b_ab<"],
        11: ["a_ab<", "b_ab<"],
        "H": base,
    }
    if idx not in events:
        raise ValueError("unknown event %r" % (idx,))
    for kind in events[idx]:
        if not add(kind):
            return None
    return lowers, uppers, t_lo, t_hi


def _exp_strip(slope, icpt, t0, t1):
    # int_{t0}^{t1} exp(-t) exp(-(slope t + icpt)) dt
    k = 1.0 + slope
    head = math.exp(-icpt - k * t0)
    if math.isinf(t1):
        return head / k
    return head * -math.expm1(-k * (t1 - t0)) / k


def g_term_direct(idx, rrh, ctx):
    """Exact probability of G_idx by piecewise integration over t = |h_kb|^2."""
    desc = event_lines(idx, rrh, ctx)
    if desc is None:
        return 0.0
    lowers, uppers, t_lo, t_hi = desc
    if t_hi <= t_lo:
        return 0.0
    lines = lowers + uppers
    cuts = {t_lo, t_hi}
    for n, (s1, c1) in enumerate(lines):
        for s2, c2 in lines[n + 1:]:
            if s1 != s2:
                t = (c2 - c1) / (s1 - s2)
                if t_lo < t < t_hi:
                    cuts.add(t)
    cuts = sorted(cuts)
    total = []
    for t0, t1 in zip(cuts[:-1], cuts[1:]):
        mid = t0 + 1.0 if math.isinf(t1) else 0.5 * (t0 + t1)
        lo = max(lowers, key=lambda ln: ln[0] * mid + ln[1])
        if uppers:
            hi = min(uppers, key=lambda ln: ln[0] * mid + ln[1])
            if hi[0] * mid + hi[1] <= lo[0] * mid + lo[1]:
                continue
            total.append(_exp_strip(lo[0], lo[1], t0, t1) - _exp_strip(hi[0], hi[1], t0, t1))
        else:
            total.append(_exp_strip(lo[0], lo[1], t0, t1))
    return min(1.0, max(0.0, math.fsum(total)))
