"""Distributed uplink rate-splitting multiple access (DU-RSMA) with two RRHs.

Closed-form ergodic rates and outage probabilities, a deterministic Monte
Carlo oracle, rate regions with fill factors, and a CSV experiment runner.
"""

from .er_analytic import ErBreakdown, er_b, er_breakdown, er_x1a, er_x2a, p1, p2
from .mc import Estimate, mc_ergodic, mc_g_term, mc_outage
from .op_analytic import (DegenerateDenominator, g_term, outage_a, outage_b,
                          outage_context, outage_noma_baseline)
from .region import RatePoint, RegionCurve, deterministic_region, ergodic_region, fill_factor
from .sinr import noma_sinrs, rsma_sinrs
from .sysmodel import ChannelSample, LinkGains, SystemConfig, make_config, sample_channel, thresholds

__version__ = "0.1.0"
