"""Configuration, geometry, decoding thresholds and Rayleigh channel sampling."""

import math
from dataclasses import dataclass, replace

import numpy as np

RRHS = ("i", "j")


@dataclass(frozen=True)
class Geometry:
    d_ia: float
    d_ib: float
    d_ja: float
    d_jb: float
    c: float = 1e-3
    n: float = 2.5

    def __post_init__(self):
        for name in ("d_ia", "d_ib", "d_ja", "d_jb"):
            if not getattr(self, name) > 0:
                raise ValueError("%s must be positive" % name)
        if not self.c > 0:
            raise ValueError("path-loss constant c must be positive")
        if self.n < 0:
            raise ValueError("path-loss exponent n must be nonnegative")


@dataclass(frozen=True)
class LinkGains:
    l_ia: float
    l_ib: float
    l_ja: float
    l_jb: float

    def __post_init__(self):
        for name in ("l_ia", "l_ib", "l_ja", "l_jb"):
            if not getattr(self, name) > 0:
                raise ValueError("link gain %s must be positive" % name)

    def rrh(self, k):
        """Return (l_ka, l_kb) for RRH k in {'i', 'j'}."""
        if k == "i":
            return self.l_ia, self.l_ib
        if k == "j":
            return self.l_ja, self.l_jb
        raise ValueError("rrh must be 'i' or 'j', got %r" % (k,))


@dataclass(frozen=True)
class ThresholdSet:
    theta_11: float
    theta_12: float
    theta_2: float
    theta_1: float


@dataclass(frozen=True)
class SystemConfig:
    gains: LinkGains
    snr_a: float
    snr_b: float
    alpha: float = 0.5
    beta: float = 0.5
    rate_a: float = 1.0
    rate_b: float = 1.0

    def __post_init__(self):
        for name in ("snr_a", "snr_b", "alpha", "beta", "rate_a", "rate_b"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1], got %r" % self.alpha)
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must lie in [0, 1], got %r" % self.beta)
        if not (self.snr_a > 0 and self.snr_b > 0):
            raise ValueError("transmit SNRs must be positive")

    @property
    def thresholds(self):
        return thresholds(self.rate_a, self.rate_b, self.beta)

    def mean_snrs(self, k):
        """Average received SNRs (l_ka * snr_a, l_kb * snr_b) at RRH k."""
        la, lb = self.gains.rrh(k)
        return la * self.snr_a, lb * self.snr_b

    def with_(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True)
class ChannelSample:
    """Squared fading magnitudes |h_km|^2; fields may be scalars or arrays."""

    g_ia: object
    g_ib: object
    g_ja: object
    g_jb: object

    def rrh(self, k):
        if k == "i":
            return self.g_ia, self.g_ib
        if k == "j":
            return self.g_ja, self.g_jb
        raise ValueError("rrh must be 'i' or 'j', got %r" % (k,))


def db_to_linear(db):
    if np.ndim(db):
        return 10.0 ** (np.asarray(db, dtype=float) / 10.0)
    return 10.0 ** (float(db) / 10.0)


def path_loss(d, c=1e-3, n=2.5):
    """Linear path-loss factor c * d**(-n)."""
    if not d > 0:
        raise ValueError("distance must be positive, got %r" % (d,))
    if not c > 0:
        raise ValueError("path-loss constant must be positive, got %r" % (c,))
    return c * float(d) ** (-n)


def link_gains(geom):
    return LinkGains(
        path_loss(geom.d_ia, geom.c, geom.n),
        path_loss(geom.d_ib, geom.c, geom.n),
        path_loss(geom.d_ja, geom.c, geom.n),
        path_loss(geom.d_jb, geom.c, geom.n),
    )


def thresholds(rate_a, rate_b, beta):
    """Linear SINR thresholds for the split and unsplit messages.

    Returns theta_11 = 2^(beta Ra) - 1, theta_12 = 2^((1-beta) Ra) - 1,
    theta_2 = 2^Rb - 1 and theta_1 = 2^Ra - 1.
    """
    if not (rate_a > 0 and rate_b > 0):
        raise ValueError("target rates must be positive")
    if not 0.0 <= beta <= 1.0:
        raise ValueError("beta must lie in [0, 1], got %r" % beta)
    ln2 = math.log(2.0)
    return ThresholdSet(
        theta_11=math.expm1(beta * rate_a * ln2),
        theta_12=math.expm1((1.0 - beta) * rate_a * ln2),
        theta_2=math.expm1(rate_b * ln2),
        theta_1=math.expm1(rate_a * ln2),
    )


def make_config(d_ia, d_ib, d_ja, d_jb, snr_db, c=1e-3, n=2.5, snr_b_db=None, **kw):
    """Build a SystemConfig from distances and a transmit SNR in dB."""
    gains = link_gains(Geometry(d_ia, d_ib, d_ja, d_jb, c, n))
    snr_a = db_to_linear(snr_db)
    snr_b = snr_a if snr_b_db is None else db_to_linear(snr_b_db)
    return SystemConfig(gains, snr_a, snr_b, **kw)


def sample_channel(rng, size=None):
    """Draw |h_ia|^2, |h_ib|^2, |h_ja|^2, |h_jb|^2 as i.i.d. Exp(1).

    Uses inverse-CDF sampling -ln(1 - u) so that draws are monotone in the
    underlying uniforms.
    """
    u = rng.random((4,) if size is None else (4, size))
    g = -np.log1p(-u)
    if size is None:
        g = [float(v) for v in g]
    return ChannelSample(g[0], g[1], g[2], g[3])
