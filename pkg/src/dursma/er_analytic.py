"""Closed-form ergodic rates under Rayleigh fading, with quadrature references.

Per-RRH terms use the average received SNRs Xa = l_ka * snr_a and
Xb = l_kb * snr_b. Every closed form reduces to sums of
exp(x) E1(x) = int_0^inf exp(-x t) / (1 + t) dt, evaluated with
:func:`dursma.specfun.e1_scaled`.
"""

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .specfun import e1_scaled, integrate

LN2 = math.log(2.0)
# Relative distance below which two partial-fraction poles are merged.
DEGENERATE_RTOL = 1e-9


@dataclass(frozen=True)
class ErBreakdown:
    er_x1a_i: float
    er_x1a_j: float
    er_x2a_i: float
    er_x2a_j: float
    er_b_i: float
    er_b_j: float
    p1: float
    p2: float
    er_user_a: float
    er_user_b: float
    er_sum: float


class SinrCdfs(NamedTuple):
    gamma_1a: Callable
    gamma_b: Callable
    gamma_2a: Callable


def _check_alpha(alpha):
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1], got %r" % alpha)


def _close(p, q):
    return abs(p - q) <= DEGENERATE_RTOL * max(abs(p), abs(q))


def p1_ratio(gains):
    """r = l_ja l_ib / (l_ia l_jb), the link-gain ratio governing P1."""
    return gains.l_ja * gains.l_ib / (gains.l_ia * gains.l_jb)


def p1(gains):
    """Probability that RRH i offers the larger high-SNR SINR for x_1a.

    The event is |h_ia|^2 |h_jb|^2 > r |h_ja|^2 |h_ib|^2 with
    r = l_ja l_ib / (l_ia l_jb), whose probability is
    (1 - r + r ln r) / (1 - r)^2.
    """
    r = p1_ratio(gains)
    e = r - 1.0
    if abs(e) < 1e-3:
        # Taylor series around r = 1; the closed form loses digits there.
        return 0.5 - e / 6.0 + e**2 / 12.0 - e**3 / 20.0 + e**4 / 30.0 - e**5 / 42.0
    return (1.0 - r + r * math.log(r)) / (e * e)


def p2(gains):
    """Probability that RRH i offers the larger SINR for x_2a: l_ia / (l_ia + l_ja)."""
    return gains.l_ia / (gains.l_ia + gains.l_ja)


def _pole_sum(poles, s):
    """int_0^inf exp(-s y) / prod_m (y + p_m) dy for simple or pairwise-double poles."""
    poles = sorted(poles)
    merged = []
    for p in poles:
        if merged and _close(merged[-1][0], p):
            merged[-1][1] += 1
        else:
            merged.append([p, 1])
    if all(m == 1 for _, m in merged):
        total = 0.0
        for idx, (p, _) in enumerate(merged):
            c = 1.0
            for jdx, (q, _) in enumerate(merged):
                if jdx != idx:
                    c /= q - p
            total += c * e1_scaled(s * p)
        return total
    if len(merged) == 1 and merged[0][1] == 2:
        p = merged[0][0]
        return 1.0 / p - s * e1_scaled(s * p)
    if len(merged) == 2 and sorted(m for _, m in merged) == [1, 2]:
        p = next(v for v, m in merged if m == 2)
        q = next(v for v, m in merged if m == 1)
        a = -1.0 / (p - q) ** 2
        b = 1.0 / (q - p)
        c = 1.0 / (p - q) ** 2
        return a * e1_scaled(s * p) + b * (1.0 / p - s * e1_scaled(s * p)) + c * e1_scaled(s * q)
    raise ValueError("unsupported pole multiplicity %r" % merged)


def er_x1a(cfg, rrh):
    """Ergodic rate of x_1a at RRH ``rrh`` (bps/Hz).

    With Xa, Xb the average received SNRs and u = 1 - alpha,
    the rate equals (alpha Xa / ln 2) int_0^inf exp(-y / Xa) /
    ((1 + y)(1 + u y)(Xa + Xb y)) dy, which is expanded in partial fractions.
    Coincident poles (Xa = Xb or u Xa = Xb) use the double-pole form.
    """
    alpha = cfg.alpha
    _check_alpha(alpha)
    if alpha == 0.0:
        return 0.0
    xa, xb = cfg.mean_snrs(rrh)
    u = 1.0 - alpha
    s = 1.0 / xa
    if u == 0.0:
        return xa / (LN2 * xb) * _pole_sum([1.0, xa / xb], s)
    return alpha * xa / (LN2 * u * xb) * _pole_sum([1.0, 1.0 / u, xa / xb], s)


def er_x2a(cfg, rrh):
    """Ergodic rate of x_2a: exp(1/A) E1(1/A) / ln 2 with A = (1 - alpha) Xa."""
    _check_alpha(cfg.alpha)
    xa, _ = cfg.mean_snrs(rrh)
    a = (1.0 - cfg.alpha) * xa
    if a == 0.0:
        return 0.0
    return e1_scaled(1.0 / a) / LN2


def er_b(cfg, rrh):
    """Ergodic rate of x_b with residual x_2a interference D = (1 - alpha) Xa.

    Equals Xb / (ln 2 (Xb - D)) [e^{1/Xb} E1(1/Xb) - e^{1/D} E1(1/D)], with the
    limits D = 0 (interference-free) and D = Xb handled separately.
    """
    _check_alpha(cfg.alpha)
    xa, xb = cfg.mean_snrs(rrh)
    d = (1.0 - cfg.alpha) * xa
    if d == 0.0:
        return e1_scaled(1.0 / xb) / LN2
    if _close(d, xb):
        return (1.0 - e1_scaled(1.0 / xb) / xb) / LN2
    return xb / (LN2 * (xb - d)) * (e1_scaled(1.0 / xb) - e1_scaled(1.0 / d))


def er_breakdown(cfg):
    """Compose the six per-RRH ergodic rates with the selection probabilities.

    User a: P1 C1a_i + (1 - P1) C1a_j + P2 C2a_i + (1 - P2) C2a_j.
    User b: (1 - P1) Cb_i + P1 Cb_j.
    """
    q1 = p1(cfg.gains)
    q2 = p2(cfg.gains)
    c1i, c1j = er_x1a(cfg, "i"), er_x1a(cfg, "j")
    c2i, c2j = er_x2a(cfg, "i"), er_x2a(cfg, "j")
    cbi, cbj = er_b(cfg, "i"), er_b(cfg, "j")
    ea = q1 * c1i + (1.0 - q1) * c1j + q2 * c2i + (1.0 - q2) * c2j
    eb = (1.0 - q1) * cbi + q1 * cbj
    return ErBreakdown(c1i, c1j, c2i, c2j, cbi, cbj, q1, q2, ea, eb, ea + eb)


def sinr_cdfs(cfg, rrh):
    """CDF evaluators of gamma_1a, gamma_b and gamma_2a at RRH ``rrh``."""
    alpha = cfg.alpha
    xa, xb = cfg.mean_snrs(rrh)
    u = 1.0 - alpha

    def cdf_1a(x):
        x = np.asarray(x, dtype=float)
        d = (alpha - x * u) * xa
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            ccdf = d * np.exp(-x / d) / (d + x * xb)
        out = np.where(d > 0, 1.0 - ccdf, 1.0)
        out = np.where(x <= 0, 0.0, out)
        return float(out) if out.ndim == 0 else out

    def cdf_b(x):
        x = np.asarray(x, dtype=float)
        out = 1.0 - xb * np.exp(-x / xb) / (u * xa * x + xb)
        out = np.where(x <= 0, 0.0, out)
        return float(out) if out.ndim == 0 else out

    def cdf_2a(x):
        x = np.asarray(x, dtype=float)
        if u * xa == 0.0:
            out = np.where(x < 0, 0.0, 1.0)
        else:
            out = np.where(x <= 0, 0.0, -np.expm1(-x / (u * xa)))
        return float(out) if out.ndim == 0 else out

    return SinrCdfs(cdf_1a, cdf_b, cdf_2a)


def er_x1a_quadrature(cfg, rrh, tol=1e-13):
    """(1/ln 2) int_0^{alpha/(1-alpha)} (1 - F_1a(x)) / (1 + x) dx by quadrature."""
    alpha = cfg.alpha
    if alpha == 0.0:
        return 0.0
    xa, xb = cfg.mean_snrs(rrh)
    u = 1.0 - alpha

    def f(x):
        d = (alpha - x * u) * xa
        if d <= 0.0:
            return 0.0
        return d * math.exp(-x / d) / ((d + x * xb) * (1.0 + x))

    # The integrand vanishes beyond alpha/(1-alpha); integrating over the
    # half-line keeps the adaptive rule from missing a narrow support.
    return integrate(f, 0.0, math.inf, tol=tol, rel_tol=1e-11,
                     scale=min(1.0, alpha * xa)).value / LN2


def er_x2a_quadrature(cfg, rrh, tol=1e-13):
    """(1/ln 2) int_0^inf exp(-x/A) / (1 + x) dx by quadrature."""
    xa, _ = cfg.mean_snrs(rrh)
    a = (1.0 - cfg.alpha) * xa
    if a == 0.0:
        return 0.0
    res = integrate(lambda x: math.exp(-x / a) / (1.0 + x), 0.0, math.inf,
                    tol=tol, rel_tol=1e-11, scale=a)
    return res.value / LN2


def er_b_quadrature(cfg, rrh, tol=1e-13):
    """(Xb/ln 2) int_0^inf exp(-x/Xb) / ((Xb + D x)(1 + x)) dx by quadrature."""
    xa, xb = cfg.mean_snrs(rrh)
    d = (1.0 - cfg.alpha) * xa

    def f(x):
        return math.exp(-x / xb) / ((xb + d * x) * (1.0 + x))

    res = integrate(f, 0.0, math.inf, tol=tol / xb, rel_tol=1e-11, scale=xb)
    return xb * res.value / LN2
