"""SINR algebra of the two-user, two-RRH uplink.

Notation: Xa = l_ka * snr_a * |h_ka|^2 and Xb = l_kb * snr_b * |h_kb|^2 are the
instantaneous received SNRs of users a and b at RRH k. User a splits its
message into x_1a (power fraction alpha) and x_2a; the RRH decodes
x_1a, then x_b, then x_2a with successive interference cancellation.
"""

import enum
from typing import NamedTuple

import numpy as np


class Order(enum.Enum):
    B_FIRST = "ba"
    A_FIRST = "ab"


class RsmaSinrTriple(NamedTuple):
    gamma_1a: object
    gamma_b: object
    gamma_2a: object


class NomaSinrPair(NamedTuple):
    gamma_a: object
    gamma_b: object
    order: Order


def received_snrs(cfg, sample, rrh):
    la, lb = cfg.gains.rrh(rrh)
    ga, gb = sample.rrh(rrh)
    return la * cfg.snr_a * np.asarray(ga, dtype=float), lb * cfg.snr_b * np.asarray(gb, dtype=float)


def rsma_from_snrs(xa, xb, alpha):
    """SIC-chain SINRs for received SNRs xa, xb (scalars or arrays)."""
    rest = (1.0 - alpha) * xa
    g1 = alpha * xa / (rest + xb + 1.0)
    gb = xb / (rest + 1.0)
    return RsmaSinrTriple(g1, gb, rest)


def noma_from_snrs(xa, xb, order):
    if order is Order.B_FIRST:
        return NomaSinrPair(xa, xb / (xa + 1.0), order)
    return NomaSinrPair(xa / (xb + 1.0), xb, order)


def _scalar(v):
    return float(v) if np.ndim(v) == 0 else v


def rsma_sinrs(cfg, sample, rrh):
    """Exact (gamma_1a, gamma_b, gamma_2a) at RRH ``rrh`` with unit noise."""
    xa, xb = received_snrs(cfg, sample, rrh)
    return RsmaSinrTriple(*map(_scalar, rsma_from_snrs(xa, xb, cfg.alpha)))


def noma_sinrs(cfg, sample, rrh, order):
    """NOMA SINR pair for decoding order ``order`` at RRH ``rrh``."""
    xa, xb = received_snrs(cfg, sample, rrh)
    ga, gb, _ = noma_from_snrs(xa, xb, order)
    return NomaSinrPair(_scalar(ga), _scalar(gb), order)


def high_snr_sinrs(cfg, sample, rrh):
    """Interference-limited SINRs with the noise term dropped.

    Raises ZeroDivisionError when gamma_b is undefined (alpha == 1 or a zero
    user-a channel).
    """
    xa, xb = received_snrs(cfg, sample, rrh)
    alpha = cfg.alpha
    rest = (1.0 - alpha) * xa
    if np.any(rest == 0):
        raise ZeroDivisionError("high-SNR gamma_b needs alpha < 1 and a nonzero user-a channel")
    g1 = alpha * xa / (rest + xb)
    return RsmaSinrTriple(_scalar(g1), _scalar(xb / rest), _scalar(rest))


def single_user_sinrs(cfg, sample):
    """Best-RRH interference-free SNRs (max_k Xa_k, max_k Xb_k)."""
    xa_i, xb_i = received_snrs(cfg, sample, "i")
    xa_j, xb_j = received_snrs(cfg, sample, "j")
    return _scalar(np.maximum(xa_i, xa_j)), _scalar(np.maximum(xb_i, xb_j))
