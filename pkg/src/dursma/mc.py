"""Monte Carlo oracle for ergodic rates, selection probabilities and outage events.

Random numbers are counter based: sample number s of a run with seed ``seed``
takes its four exponentials (g_ia, g_ib, g_ja, g_jb) from Philox block s
under key ``seed``. Samples are processed in fixed-size chunks whose partial
statistics are reduced in chunk order, so the worker count never changes a
result.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .op_analytic import PRODUCTS_A, PRODUCTS_B
from .sinr import rsma_from_snrs
from .sysmodel import RRHS

CHUNK = 1 << 16
THREADS_ENV = "DU_RSMA_THREADS"
_U53 = 2.0 ** -53


@dataclass(frozen=True)
class Estimate:
    mean: float
    std_error: float
    samples: int

    def z_score(self, reference):
        """(mean - reference) / std_error; 0 when both agree exactly."""
        diff = self.mean - reference
        if self.std_error == 0.0:
            return 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
        return diff / self.std_error


@dataclass(frozen=True)
class McErgodicReport:
    er_user_a: Estimate
    er_user_b: Estimate
    er_sum: Estimate
    empirical_p1: Estimate
    empirical_p2: Estimate


@dataclass(frozen=True)
class McOutageReport:
    op_a: Estimate
    op_b: Estimate
    per_term_freq_a: tuple
    per_term_freq_b: tuple
    g_freq: dict
    disjointness_violations: int
    noma_op_a: Estimate
    noma_op_b: Estimate


def default_workers():
    """Worker count from DU_RSMA_THREADS, else the CPU count."""
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            n = int(env)
        except ValueError:
            n = 0
        if n < 1:
            raise ValueError("%s must be a positive integer, got %r" % (THREADS_ENV, env))
        return n
    return os.cpu_count() or 1


def draw_gains(seed, start, n):
    """Exp(1) gains for samples start .. start+n-1 as an (n, 4) array.

    Columns are g_ia, g_ib, g_ja, g_jb. Each Philox counter value yields the
    four 64-bit words of one sample.
    """
    if seed < 0:
        raise ValueError("seed must be nonnegative")
    bitgen = np.random.Philox(key=seed, counter=start)
    words = bitgen.random_raw(4 * n).reshape(n, 4)
    u = (words >> np.uint64(11)).astype(np.float64) * _U53
    return -np.log1p(-u)


def _chunks(samples):
    if samples < 1:
        raise ValueError("samples must be at least 1")
    return [(s, min(CHUNK, samples - s)) for s in range(0, samples, CHUNK)]


def run_chunks(fn, samples, seed, workers=None):
    """Apply fn(gains, start) to every chunk; results are returned in chunk order."""
    spans = _chunks(samples)
    workers = default_workers() if workers is None else workers

    def task(span):
        start, n = span
        return fn(draw_gains(seed, start, n), start)

    if workers <= 1 or len(spans) == 1:
        return [task(s) for s in spans]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(task, spans))


def proportion(count, n):
    """Bernoulli estimate with the ddof=1 sample standard error."""
    count = int(count)
    n = int(n)
    p = count / n
    if n < 2:
        return Estimate(p, 0.0, n)
    var = count * (n - count) / (n * (n - 1.0))
    return Estimate(p, math.sqrt(var / n), n)


class _Moments:
    """Running count/mean/M2, merged in a fixed order."""

    def __init__(self, n=0, mean=0.0, m2=0.0):
        self.n, self.mean, self.m2 = n, mean, m2

    @classmethod
    def of(cls, x):
        x = np.asarray(x, dtype=float)
        mu = float(x.mean())
        return cls(x.size, mu, float(((x - mu) ** 2).sum()))

    def merge(self, other):
        if other.n == 0:
            return self
        if self.n == 0:
            return _Moments(other.n, other.mean, other.m2)
        n = self.n + other.n
        delta = other.mean - self.mean
        mean = self.mean + delta * other.n / n
        m2 = self.m2 + other.m2 + delta * delta * self.n * other.n / n
        return _Moments(n, mean, m2)

    def estimate(self):
        if self.n < 2:
            return Estimate(self.mean, 0.0, self.n)
        return Estimate(self.mean, math.sqrt(self.m2 / (self.n - 1) / self.n), self.n)


def _reduce_moments(parts):
    out = _Moments()
    for p in parts:
        out = out.merge(p)
    return out


def _snrs(cfg, g):
    la_i, lb_i = cfg.gains.rrh("i")
    la_j, lb_j = cfg.gains.rrh("j")
    return (la_i * cfg.snr_a * g[:, 0], lb_i * cfg.snr_b * g[:, 1],
            la_j * cfg.snr_a * g[:, 2], lb_j * cfg.snr_b * g[:, 3])


def _p1_events(cfg, g):
    """High-SNR comparison events: RRH i preferred for x_1a, and for x_2a."""
    r = cfg.gains.l_ja * cfg.gains.l_ib / (cfg.gains.l_ia * cfg.gains.l_jb)
    e1 = g[:, 0] * g[:, 3] > r * g[:, 2] * g[:, 1]
    e2 = cfg.gains.l_ia * g[:, 0] > cfg.gains.l_ja * g[:, 2]
    return e1, e2


def _pair_rates(xa_i, xb_i, xa_j, xb_j, alpha, mode):
    ti = rsma_from_snrs(xa_i, xb_i, alpha)
    tj = rsma_from_snrs(xa_j, xb_j, alpha)
    if mode == "max":
        g1 = np.maximum(ti.gamma_1a, tj.gamma_1a)
        gb = np.maximum(ti.gamma_b, tj.gamma_b)
        g2 = np.maximum(ti.gamma_2a, tj.gamma_2a)
    elif mode in RRHS:
        t = ti if mode == "i" else tj
        g1, gb, g2 = t.gamma_1a, t.gamma_b, t.gamma_2a
    else:
        raise ValueError("mode must be 'max', 'i' or 'j', got %r" % (mode,))
    ra = np.log2(1.0 + g1) + np.log2(1.0 + g2)
    rb = np.log2(1.0 + gb)
    return ra, rb


def mc_ergodic(cfg, samples, seed=0, workers=None):
    """Ergodic rates with per-message best-RRH selection on exact SINRs.

    User a gets log2(1 + max_k gamma_1a,k) + log2(1 + max_k gamma_2a,k) and
    user b gets log2(1 + max_k gamma_b,k). The high-SNR comparison events
    behind P1 and P2 are tallied on the same samples.
    """
    def chunk(g, start):
        xs = _snrs(cfg, g)
        ra, rb = _pair_rates(*xs, cfg.alpha, "max")
        e1, e2 = _p1_events(cfg, g)
        return (_Moments.of(ra), _Moments.of(rb), _Moments.of(ra + rb),
                int(e1.sum()), int(e2.sum()))

    parts = run_chunks(chunk, samples, seed, workers)
    ea = _reduce_moments(p[0] for p in parts).estimate()
    eb = _reduce_moments(p[1] for p in parts).estimate()
    es = _reduce_moments(p[2] for p in parts).estimate()
    # keep the reported sum exactly consistent with its parts
    es = Estimate(ea.mean + eb.mean, es.std_error, es.samples)
    p1 = proportion(sum(p[3] for p in parts), samples)
    p2 = proportion(sum(p[4] for p in parts), samples)
    return McErgodicReport(ea, eb, es, p1, p2)


def mc_ergodic_region_point(cfg, samples, seed=0, mode="max", workers=None):
    """(er_a, er_b) Estimates at cfg.alpha; mode 'i' or 'j' forces one RRH."""
    def chunk(g, start):
        ra, rb = _pair_rates(*_snrs(cfg, g), cfg.alpha, mode)
        return _Moments.of(ra), _Moments.of(rb)

    parts = run_chunks(chunk, samples, seed, workers)
    return (_reduce_moments(p[0] for p in parts).estimate(),
            _reduce_moments(p[1] for p in parts).estimate())


def mc_ergodic_region(cfg, alphas, samples, seed=0, mode="max", workers=None):
    """Mean ergodic pairs for many alphas on shared samples.

    Returns (er_a, er_b, se_a, se_b) arrays aligned with ``alphas``.
    """
    alphas = np.asarray(alphas, dtype=float)

    def chunk(g, start):
        xs = _snrs(cfg, g)
        out = []
        for a in alphas:
            ra, rb = _pair_rates(*xs, a, mode)
            out.append((_Moments.of(ra), _Moments.of(rb)))
        return out

    parts = run_chunks(chunk, samples, seed, workers)
    ests = []
    for k in range(alphas.size):
        ma = _reduce_moments(p[k][0] for p in parts).estimate()
        mb = _reduce_moments(p[k][1] for p in parts).estimate()
        ests.append((ma.mean, mb.mean, ma.std_error, mb.std_error))
    arr = np.array(ests, dtype=float).reshape(-1, 4)
    return arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3]


# ---------------------------------------------------------------------------
# Outage events

# Bits of the per-RRH state code.
_BIT_U = 1    # gamma_a^ab < theta_1
_BIT_L = 2    # gamma_b^ba < theta_2
_BIT_1A = 4   # gamma_1a > theta_11
_BIT_B = 8    # gamma_b < theta_2
_BIT_2A = 16  # gamma_2a < theta_12
_BIT_A = 32   # gamma_a^ba < theta_1
_BIT_BAB = 64  # gamma_b^ab < theta_2
_NCODES = 128


def _event_from_code(idx, code):
    u = bool(code & _BIT_U)
    lo = bool(code & _BIT_L)
    s1 = bool(code & _BIT_1A)
    sb = bool(code & _BIT_B)
    s2 = bool(code & _BIT_2A)
    na = bool(code & _BIT_A)
    nb = bool(code & _BIT_BAB)
    both = u and lo
    table = {
        1: both and not s1,
        2: both and s1 and sb,
        3: both and not s1 and sb,
        4: both and s1 and not sb and s2,
        5: both and s1 and sb and s2,
        6: both and not s1 and not sb and s2,
        7: both and not s1 and sb and s2,
        8: na and not lo,
        9: na and lo,
        10: not u and nb,
        11: u and nb,
    }
    return table[idx]


# EVENT_MASK[idx][code] is True when the per-RRH state ``code`` lies in G_idx.
EVENT_MASK = {idx: np.array([_event_from_code(idx, c) for c in range(_NCODES)])
              for idx in range(1, 12)}


def rrh_codes(xa, xb, alpha, th):
    """Per-sample state code of one RRH from its received SNRs."""
    a_ab = xa / (xb + 1.0)
    b_ba = xb / (xa + 1.0)
    g1a, gb, g2a = rsma_from_snrs(xa, xb, alpha)
    code = (a_ab < th.theta_1).astype(np.int64) * _BIT_U
    code += (b_ba < th.theta_2) * _BIT_L
    code += (g1a > th.theta_11) * _BIT_1A
    code += (gb < th.theta_2) * _BIT_B
    code += (g2a < th.theta_12) * _BIT_2A
    code += (xa < th.theta_1) * _BIT_A
    code += (xb < th.theta_2) * _BIT_BAB
    return code


def joint_histogram(cfg, samples, seed=0, workers=None):
    """Counts of the joint (RRH i, RRH j) state codes as a 128 x 128 array."""
    th = cfg.thresholds

    def chunk(g, start):
        xa_i, xb_i, xa_j, xb_j = _snrs(cfg, g)
        ci = rrh_codes(xa_i, xb_i, cfg.alpha, th)
        cj = rrh_codes(xa_j, xb_j, cfg.alpha, th)
        return np.bincount(ci * _NCODES + cj, minlength=_NCODES * _NCODES)

    total = np.zeros(_NCODES * _NCODES, dtype=np.int64)
    for part in run_chunks(chunk, samples, seed, workers):
        total += part
    return total.reshape(_NCODES, _NCODES)


def _product_mask(p, q):
    return np.outer(EVENT_MASK[p], EVENT_MASK[q])


def _noma_masks():
    u = np.array([bool(c & _BIT_U) for c in range(_NCODES)])
    lo = np.array([bool(c & _BIT_L) for c in range(_NCODES)])
    na = np.array([bool(c & _BIT_A) for c in range(_NCODES)])
    nb = np.array([bool(c & _BIT_BAB) for c in range(_NCODES)])
    uu = np.outer(u, u)
    ll = np.outer(lo, lo)
    # a fails a-first at both RRHs and b-first decoding never frees it
    mask_a = uu & (ll | np.outer(na, na))
    mask_b = ll & (uu | np.outer(nb, nb))
    return mask_a, mask_b


def outage_report_from_histogram(hist):
    n = int(hist.sum())
    fa = []
    cover_a = np.zeros(hist.shape, dtype=np.int64)
    for p, q in PRODUCTS_A:
        m = _product_mask(p, q)
        fa.append(proportion(hist[m].sum(), n))
        cover_a += m
    fb = []
    cover_b = np.zeros(hist.shape, dtype=np.int64)
    for p, q in PRODUCTS_B:
        m = _product_mask(p, q)
        fb.append(proportion(hist[m].sum(), n))
        cover_b += m
    violations = int(hist[cover_a > 1].sum() + hist[cover_b > 1].sum())
    g_freq = {}
    for idx in range(1, 12):
        g_freq[("i", idx)] = proportion(hist[EVENT_MASK[idx], :].sum(), n)
        g_freq[("j", idx)] = proportion(hist[:, EVENT_MASK[idx]].sum(), n)
    mask_a, mask_b = _noma_masks()
    return McOutageReport(
        op_a=proportion(hist[cover_a > 0].sum(), n),
        op_b=proportion(hist[cover_b > 0].sum(), n),
        per_term_freq_a=tuple(fa),
        per_term_freq_b=tuple(fb),
        g_freq=g_freq,
        disjointness_violations=violations,
        noma_op_a=proportion(hist[mask_a].sum(), n),
        noma_op_b=proportion(hist[mask_b].sum(), n),
    )


def mc_outage(cfg, samples, seed=0, workers=None):
    """Outage of both users from the per-RRH event algebra.

    op_a fires when any of the 16 products G_p^i G_q^j of user a holds, op_b
    when any of the 7 products of user b holds. Samples on which more than
    one product of the same user fires are counted as disjointness
    violations. The NOMA-only baseline is evaluated on the same samples.
    """
    if not (cfg.rate_a > 0 and cfg.rate_b > 0):
        raise ValueError("outage simulation needs positive target rates")
    return outage_report_from_histogram(joint_histogram(cfg, samples, seed, workers))


def mc_g_term(idx, rrh, cfg, samples, seed=0, workers=None):
    """Empirical frequency of the single-RRH event G_idx at RRH ``rrh``."""
    if idx not in EVENT_MASK:
        raise ValueError("G-term index must be 1..11, got %r" % (idx,))
    if rrh not in RRHS:
        raise ValueError("rrh must be 'i' or 'j', got %r" % (rrh,))
    hist = joint_histogram(cfg, samples, seed, workers)
    counts = hist.sum(axis=1) if rrh == "i" else hist.sum(axis=0)
    return proportion(counts[EVENT_MASK[idx]].sum(), samples)


def mc_per_rrh_rates(cfg, samples, seed=0, workers=None):
    """Unconditional per-RRH ergodic rates of x_1a, x_2a and x_b.

    Returns {(message, rrh): Estimate} with message in {'x1a', 'x2a', 'b'};
    these are the exact counterparts of the per-RRH closed forms.
    """
    def chunk(g, start):
        xa_i, xb_i, xa_j, xb_j = _snrs(cfg, g)
        out = []
        for xa, xb in ((xa_i, xb_i), (xa_j, xb_j)):
            t = rsma_from_snrs(xa, xb, cfg.alpha)
            out.extend(_Moments.of(np.log2(1.0 + v)) for v in (t.gamma_1a, t.gamma_2a, t.gamma_b))
        return out

    parts = run_chunks(chunk, samples, seed, workers)
    keys = [(m, k) for k in RRHS for m in ("x1a", "x2a", "b")]
    return {key: _reduce_moments(p[n] for p in parts).estimate() for n, key in enumerate(keys)}
