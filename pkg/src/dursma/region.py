"""Achievable rate regions and fill factors.

A region is stored through its Pareto boundary; every rate pair dominated by
a boundary point is achievable (free disposal), so the largest
square/rectangle fitting the region has a boundary point as its corner.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .mc import mc_ergodic_region, mc_ergodic_region_point, run_chunks
from .sinr import rsma_from_snrs
from .sysmodel import RRHS

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
DEFAULT_GRID = 2001


@dataclass(frozen=True)
class RatePoint:
    r_a: float
    r_b: float

    def __post_init__(self):
        for v in (self.r_a, self.r_b):
            if not (math.isfinite(v) and v >= 0.0):
                raise ValueError("rates must be finite and nonnegative, got %r" % (v,))


@dataclass
class RegionCurve:
    """Boundary of a rate region.

    Parameters
    ----------
    points : list of RatePoint
        Boundary points, ordered along the curve.
    denominator_a, denominator_b : float
        Single-user best-RRH rates used to normalise fill factors.
    alphas : ndarray, optional
        Power-split values generating ``points`` (None for polylines).
    scheme : str
        Label used in reports.
    polyline : bool
        If True, straight segments between consecutive points belong to the
        boundary (time sharing); otherwise only the sampled points do.
    evaluate : callable, optional
        alpha -> RatePoint, used to refine fill-factor maxima between grid
        points.
    """

    points: list
    denominator_a: float
    denominator_b: float
    alphas: Optional[np.ndarray] = None
    scheme: str = ""
    polyline: bool = False
    evaluate: Optional[Callable] = field(default=None, repr=False)

    def as_array(self):
        return np.array([[p.r_a, p.r_b] for p in self.points], dtype=float)


def alpha_grid(spec=DEFAULT_GRID):
    """Return a sorted alpha grid covering [0, 1] from a count or a sequence."""
    if np.isscalar(spec):
        n = int(spec)
        if n < 2:
            raise ValueError("alpha grid needs at least 2 points")
        return np.linspace(0.0, 1.0, n)
    grid = np.unique(np.asarray(spec, dtype=float))
    if grid.size < 2 or grid[0] != 0.0 or grid[-1] != 1.0:
        raise ValueError("alpha grid must contain 0 and 1")
    if np.any((grid < 0) | (grid > 1)):
        raise ValueError("alpha grid must lie in [0, 1]")
    return grid


def _sample_snrs(cfg, sample):
    out = []
    for k in RRHS:
        la, lb = cfg.gains.rrh(k)
        ga, gb = sample.rrh(k)
        out.append((la * cfg.snr_a * float(ga), lb * cfg.snr_b * float(gb)))
    return out


def _rates(snrs, alpha, mode):
    (xa_i, xb_i), (xa_j, xb_j) = snrs
    ti = rsma_from_snrs(xa_i, xb_i, alpha)
    tj = rsma_from_snrs(xa_j, xb_j, alpha)
    if mode == "max":
        g1 = np.maximum(ti.gamma_1a, tj.gamma_1a)
        gb = np.maximum(ti.gamma_b, tj.gamma_b)
        g2 = np.maximum(ti.gamma_2a, tj.gamma_2a)
    elif mode in RRHS:
        g1, gb, g2 = ti if mode == "i" else tj
    else:
        raise ValueError("mode must be 'max', 'i' or 'j', got %r" % (mode,))
    return np.log2(1.0 + g1) + np.log2(1.0 + g2), np.log2(1.0 + gb)


def single_user_rates(cfg, sample):
    """(A, B): log2(1 + max_k X_k) for each user alone, on a fixed channel."""
    (xa_i, xb_i), (xa_j, xb_j) = _sample_snrs(cfg, sample)
    return math.log2(1.0 + max(xa_i, xa_j)), math.log2(1.0 + max(xb_i, xb_j))


def deterministic_region(cfg, sample, alphas=DEFAULT_GRID, mode="max"):
    """DU-RSMA boundary on a fixed channel realisation.

    For each alpha every message (x_1a, x_b, x_2a) is decoded at the RRH
    offering it the larger SINR; ``mode`` 'i' or 'j' forces one RRH instead.
    """
    grid = alpha_grid(alphas)
    snrs = _sample_snrs(cfg, sample)
    ra, rb = _rates(snrs, grid, mode)
    den_a, den_b = single_user_rates(cfg, sample)

    def evaluate(alpha):
        a, b = _rates(snrs, float(alpha), mode)
        return RatePoint(float(a), float(b))

    pts = [RatePoint(float(a), float(b)) for a, b in zip(ra, rb)]
    label = "DU-RSMA" if mode == "max" else "RRH-%s" % mode
    return RegionCurve(pts, den_a, den_b, grid, label, False, evaluate)


def ts_noma_region(corner_b_first, corner_a_first, denominator_a, denominator_b, scheme="DU-NOMA-TS"):
    """Time-sharing NOMA boundary through the two decoding-order corners.

    ``corner_a_first`` is (R_a, R_b) when user a is decoded first (b then sees
    no interference) and ``corner_b_first`` the reverse. The boundary runs
    from the r_b axis to the a-first corner, along the chord to the b-first
    corner and down to the r_a axis.
    """
    pts = [
        RatePoint(0.0, corner_a_first.r_b),
        corner_a_first,
        corner_b_first,
        RatePoint(corner_b_first.r_a, 0.0),
    ]
    return RegionCurve(pts, denominator_a, denominator_b, None, scheme, True, None)


def noma_corners(curve):
    """(b-first, a-first) corners: the alpha = 0 and alpha = 1 ends of a DU-RSMA curve."""
    if curve.alphas is None or curve.alphas[0] != 0.0 or curve.alphas[-1] != 1.0:
        raise ValueError("curve must be sampled at alpha = 0 and alpha = 1")
    return curve.points[0], curve.points[-1]


def ergodic_region(cfg, alphas=101, samples=10**6, seed=0, mode="max", workers=None, refine=True):
    """Ergodic DU-RSMA boundary from Monte Carlo means on shared samples.

    The denominators are the MC means of log2(1 + max_k X_k) per user on the
    same samples.
    """
    grid = alpha_grid(alphas)
    ra, rb, _, _ = mc_ergodic_region(cfg, grid, samples, seed, mode, workers)
    den_a, den_b = ergodic_single_user_rates(cfg, samples, seed, workers)
    pts = [RatePoint(float(a), float(b)) for a, b in zip(ra, rb)]

    def evaluate(alpha):
        ea, eb = mc_ergodic_region_point(cfg.with_(alpha=float(alpha)), samples, seed, mode, workers)
        return RatePoint(ea.mean, eb.mean)

    label = "DU-RSMA" if mode == "max" else "RRH-%s" % mode
    return RegionCurve(pts, den_a, den_b, grid, label, False, evaluate if refine else None)


def ergodic_single_user_rates(cfg, samples, seed=0, workers=None):
    """MC means of log2(1 + max_k Xa_k) and log2(1 + max_k Xb_k)."""
    la_i, lb_i = cfg.gains.rrh("i")
    la_j, lb_j = cfg.gains.rrh("j")

    def chunk(g, start):
        ra = np.log2(1.0 + np.maximum(la_i * cfg.snr_a * g[:, 0], la_j * cfg.snr_a * g[:, 2]))
        rb = np.log2(1.0 + np.maximum(lb_i * cfg.snr_b * g[:, 1], lb_j * cfg.snr_b * g[:, 3]))
        return float(ra.sum()), float(rb.sum())

    parts = run_chunks(chunk, samples, seed, workers)
    return (math.fsum(p[0] for p in parts) / samples,
            math.fsum(p[1] for p in parts) / samples)


def f_q(q, x, y):
    if q == 0:
        return min(x, y)
    if q == 1:
        return x + y
    if q == 2:
        return x * y
    raise ValueError("q must be 0, 1 or 2, got %r" % (q,))


def _segment_best(q, p0, p1):
    """Maximise f_q over the segment p0 -> p1; returns (value, RatePoint)."""
    cands = [0.0, 1.0]
    da = p1.r_a - p0.r_a
    db = p1.r_b - p0.r_b
    if q == 0 and da != db:
        # crossing of r_a = r_b
        cands.append((p0.r_b - p0.r_a) / (da - db))
    elif q == 2 and da * db != 0.0:
        # vertex of (a0 + t da)(b0 + t db)
        cands.append(-(p0.r_a * db + p0.r_b * da) / (2.0 * da * db))
    best = None
    for t in cands:
        if 0.0 <= t <= 1.0:
            pt = RatePoint(max(0.0, p0.r_a + t * da), max(0.0, p0.r_b + t * db))
            v = f_q(q, pt.r_a, pt.r_b)
            if best is None or v > best[0]:
                best = (v, pt)
    return best


def _golden_max(fn, lo, hi, tol=1e-10, max_iter=200):
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = fn(x1), fn(x2)
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = fn(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = fn(x1)
    return (x1, f1) if f1 >= f2 else (x2, f2)


def best_point(curve, q):
    """Boundary point maximising f_q, as (f_q value, RatePoint)."""
    if not curve.points:
        raise ValueError("empty region curve")
    if curve.polyline:
        best = None
        for p0, p1 in zip(curve.points[:-1], curve.points[1:]):
            cand = _segment_best(q, p0, p1)
            if best is None or cand[0] > best[0]:
                best = cand
        if len(curve.points) == 1:
            p = curve.points[0]
            best = (f_q(q, p.r_a, p.r_b), p)
        return best
    vals = [f_q(q, p.r_a, p.r_b) for p in curve.points]
    k = int(np.argmax(vals))
    best = (vals[k], curve.points[k])
    if curve.evaluate is not None and curve.alphas is not None and len(curve.alphas) > 1:
        lo = curve.alphas[max(k - 1, 0)]
        hi = curve.alphas[min(k + 1, len(curve.alphas) - 1)]
        cache = {}

        def fn(alpha):
            p = curve.evaluate(alpha)
            cache[alpha] = p
            return f_q(q, p.r_a, p.r_b)

        alpha, v = _golden_max(fn, lo, hi)
        if v > best[0]:
            best = (v, cache[alpha])
    return best


def fill_factor(curve, q):
    """FF_q: best f_q on the region over f_q of the single-user rates.

    Returns (value, argmax RatePoint).
    """
    den = f_q(q, curve.denominator_a, curve.denominator_b)
    if not den > 0:
        raise ZeroDivisionError("fill factor needs positive single-user rates")
    v, pt = best_point(curve, q)
    return v / den, pt


def fill_factors(curve):
    """{q: FF_q} for q = 0, 1, 2."""
    return {q: fill_factor(curve, q)[0] for q in (0, 1, 2)}
