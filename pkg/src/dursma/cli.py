"""Command-line experiment runner: config parsing, sweeps and CSV output.

Usage::

    python3 -m dursma <subcommand> [--preset NAME | --config FILE] [--set key=value ...]

Subcommands are ``ergodic-sweep``, ``outage-sweep``, ``region``,
``fill-factor`` and ``validate``. Every output starts with the fully resolved
configuration as ``# key=value`` lines, which parse back to the same
configuration.
"""

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass, field

from . import er_analytic, op_analytic
from .mc import joint_histogram, mc_ergodic, mc_per_rrh_rates, outage_report_from_histogram, proportion
from .region import (deterministic_region, ergodic_region, fill_factor, noma_corners,
                     ts_noma_region)
from .sysmodel import ChannelSample, make_config

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VALIDATION = 3
Z_LIMIT = 4.0


class ConfigError(ValueError):
    """Malformed configuration; the message names the key and the source line."""

    def __init__(self, message, key=None, where=None):
        self.key = key
        self.where = where
        prefix = "%s: " % where if where else ""
        super().__init__(prefix + message)


# ---------------------------------------------------------------------------
# Config keys


def _num(text):
    v = float(text)
    if not math.isfinite(v):
        raise ValueError("not a finite number")
    return v


def _int(text):
    v = _num(text)
    if v != int(v):
        raise ValueError("not an integer")
    return int(v)


def _list(text):
    vals = [_num(t) for t in text.split(",") if t.strip()]
    if not vals:
        raise ValueError("empty list")
    return tuple(vals)


def _positive(v):
    return v > 0 if not isinstance(v, tuple) else all(x > 0 for x in v)


def _unit(v):
    return 0 <= v <= 1 if not isinstance(v, tuple) else all(0 <= x <= 1 for x in v)


# key -> (parser, range check, range text, default)
_KEYS = {
    "d_ia": (_num, _positive, "> 0", 10.0),
    "d_ib": (_num, _positive, "> 0", 30.0),
    "d_ja": (_num, _positive, "> 0", 30.0),
    "d_jb": (_num, _positive, "> 0", 10.0),
    "pathloss_c": (_num, _positive, "> 0", 1e-3),
    "pathloss_n": (_num, lambda v: v >= 0, ">= 0", 2.5),
    "snr_a_db": (_num, lambda v: True, "", 75.0),
    "snr_b_db": (_num, lambda v: True, "", 75.0),
    "alpha": (_num, _unit, "in [0, 1]", 0.5),
    "beta": (_num, _unit, "in [0, 1]", 0.5),
    "rate_a": (_num, _positive, "> 0", 1.0),
    "rate_b": (_num, _positive, "> 0", 1.0),
    "samples": (_int, lambda v: v >= 1, ">= 1", 10**6),
    "seed": (_int, lambda v: 0 <= v < 2**64, "in [0, 2^64)", 0),
    "alpha_grid": (_int, lambda v: v >= 2, ">= 2", 2001),
    # sweep axes and an optional fixed channel; unset unless given
    "snr_grid": (_list, lambda v: True, "", None),
    "alpha_sweep": (_list, _unit, "in [0, 1]", None),
    "rate_sweep": (_list, _positive, "> 0", None),
    "g_ia": (_num, _positive, "> 0", None),
    "g_ib": (_num, _positive, "> 0", None),
    "g_ja": (_num, _positive, "> 0", None),
    "g_jb": (_num, _positive, "> 0", None),
}
_ALIASES = {"snr_db": ("snr_a_db", "snr_b_db")}
_FIXED_CHANNEL = ("g_ia", "g_ib", "g_ja", "g_jb")


def _fmt(v):
    if isinstance(v, tuple):
        return ",".join(_fmt(x) for x in v)
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


@dataclass
class RunConfig:
    """Resolved key/value configuration."""

    values: dict = field(default_factory=lambda: {k: spec[3] for k, spec in _KEYS.items()})

    def __getitem__(self, key):
        return self.values[key]

    def set(self, key, text, where=None):
        key = key.strip()
        targets = _ALIASES.get(key, (key,))
        if targets[0] not in _KEYS:
            raise ConfigError("unknown key %r" % key, key, where)
        parse, check, rng, _ = _KEYS[targets[0]]
        try:
            v = parse(text.strip())
        except ValueError as exc:
            raise ConfigError("key %r: cannot parse %r (%s)" % (key, text.strip(), exc), key, where) from None
        if not check(v):
            raise ConfigError("key %r: value %s out of range (must be %s)" % (key, text.strip(), rng), key, where)
        for t in targets:
            self.values[t] = v

    def echo(self):
        """Resolved configuration as '# key=value' lines (unset optional keys omitted)."""
        return "".join("# %s=%s\n" % (k, _fmt(v)) for k, v in self.values.items() if v is not None)

    def system(self, snr_db=None, **overrides):
        """SystemConfig at the configured SNR, or at ``snr_db`` keeping the a/b offset."""
        v = self.values
        sa = v["snr_a_db"] if snr_db is None else snr_db
        sb = sa + (v["snr_b_db"] - v["snr_a_db"])
        kw = dict(alpha=v["alpha"], beta=v["beta"], rate_a=v["rate_a"], rate_b=v["rate_b"])
        kw.update(overrides)
        try:
            return make_config(v["d_ia"], v["d_ib"], v["d_ja"], v["d_jb"], sa,
                               v["pathloss_c"], v["pathloss_n"], snr_b_db=sb, **kw)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def fixed_channel(self):
        gs = [self.values[k] for k in _FIXED_CHANNEL]
        if all(g is None for g in gs):
            return None
        if any(g is None for g in gs):
            missing = [k for k, g in zip(_FIXED_CHANNEL, gs) if g is None]
            raise ConfigError("fixed channel needs all of g_ia, g_ib, g_ja, g_jb; missing %s"
                              % ", ".join(missing), missing[0])
        return ChannelSample(*gs)

    def snr_points(self):
        return self.values["snr_grid"] or (self.values["snr_a_db"],)


def parse_config(text, base=None, source="config"):
    """Parse flat ``key=value`` text on top of ``base`` (defaults if None).

    '#' starts a comment; later keys override earlier ones. ``snr_db`` sets
    both ``snr_a_db`` and ``snr_b_db``.
    """
    cfg = RunConfig(dict(base.values)) if base is not None else RunConfig()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = "%s line %d" % (source, lineno)
        if "=" not in line:
            raise ConfigError("expected key=value, got %r" % line, None, where)
        key, value = line.split("=", 1)
        cfg.set(key, value, where)
    return cfg


_GRID_50_90 = ",".join(str(s) for s in range(50, 95, 5))

PRESETS = {
    "fig2": """
        d_ia=10
        d_ib=30
        d_ja=30
        d_jb=10
        snr_db=75
        g_ia=1.36
        g_ib=0.725
        g_ja=2.082
        g_jb=1.013
        alpha_grid=2001
    """,
    "fig3": """
        d_ia=5
        d_ib=15
        d_ja=17
        d_jb=8
        alpha=0.5
        snr_db=75
        snr_grid=%s
        samples=1000000
    """ % _GRID_50_90,
    "fig4": """
        d_ia=10
        d_ib=30
        d_ja=30
        d_jb=10
        snr_db=75
        alpha_grid=101
        samples=1000000
    """,
    "fig5": """
        d_ia=5
        d_ib=20
        d_ja=15
        d_jb=10
        rate_a=1.5
        rate_b=1.5
        beta=0.5
        alpha=0.5
        snr_db=70
        snr_grid=70,80
        alpha_sweep=0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9
        samples=10000000
    """,
    "fig6": """
        d_ia=5
        d_ib=25
        d_ja=30
        d_jb=20
        alpha=0.95
        beta=0.1
        rate_a=2
        rate_b=2
        rate_sweep=1,2
        snr_db=70
        snr_grid=%s
        samples=10000000
    """ % _GRID_50_90,
}


def config_from_header(text):
    """Re-parse the '# key=value' header that starts every output file."""
    lines = []
    for line in text.splitlines():
        if not line.startswith("# "):
            break
        key = line[2:].split("=", 1)[0]
        if key in _KEYS:
            lines.append(line[2:])
    return parse_config("\n".join(lines), source="header")


def preset(name):
    if name not in PRESETS:
        raise ConfigError("unknown preset %r (choose from %s)" % (name, ", ".join(sorted(PRESETS))), "preset")
    return parse_config(PRESETS[name], source="preset %s" % name)


# ---------------------------------------------------------------------------
# CSV helpers


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    return _fmt(v)


def _table(columns, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Subcommands

ERGODIC_COLUMNS = ("snr_db", "er_a_analytic", "er_b_analytic", "er_sum_analytic",
                   "er_a_mc", "er_b_mc", "er_sum_mc", "se_a", "se_b")
OUTAGE_TAIL = ("op_a_analytic", "op_b_analytic", "op_a_mc", "op_b_mc", "se_a", "se_b",
               "scheme", "rate_a", "rate_b")
REGION_COLUMNS = ("alpha", "r_a", "r_b", "scheme")
VALIDATE_COLUMNS = ("case", "term", "analytic", "mc", "se", "z", "pass")


def cmd_ergodic_sweep(rc, workers=None):
    rows = []
    for snr in rc.snr_points():
        cfg = rc.system(snr)
        an = er_analytic.er_breakdown(cfg)
        mc = mc_ergodic(cfg, rc["samples"], rc["seed"], workers)
        rows.append((snr, an.er_user_a, an.er_user_b, an.er_sum,
                     mc.er_user_a.mean, mc.er_user_b.mean, mc.er_sum.mean,
                     mc.er_user_a.std_error, mc.er_user_b.std_error))
    return _table(ERGODIC_COLUMNS, rows)


def _analytic_outage(cfg):
    """(op_a, op_b, noma_a, noma_b); NaN where the closed form is degenerate."""
    try:
        ctx = op_analytic.outage_context(cfg)
        na, nb = op_analytic.outage_noma_baseline(ctx)
        return op_analytic.outage_a(ctx), op_analytic.outage_b(ctx), na, nb
    except op_analytic.DegenerateDenominator:
        return (math.nan,) * 4


def cmd_outage_sweep(rc, workers=None):
    by_alpha = rc["alpha_sweep"] is not None
    sweep = rc["alpha_sweep"] if by_alpha else rc.snr_points()
    outer = rc.snr_points() if by_alpha else (rc["alpha"],)
    rates = rc["rate_sweep"] or (None,)
    columns = (("alpha",) if by_alpha else ("snr_db",)) + OUTAGE_TAIL + (("snr_db",) if by_alpha else ("alpha",))
    rows = []
    for rate in rates:
        over = {} if rate is None else {"rate_a": rate, "rate_b": rate}
        for fixed in outer:
            for x in sweep:
                snr, alpha = (fixed, x) if by_alpha else (x, fixed)
                cfg = rc.system(snr, alpha=alpha, **over)
                pa, pb, na, nb = _analytic_outage(cfg)
                rep = outage_report_from_histogram(joint_histogram(cfg, rc["samples"], rc["seed"], workers))
                for scheme, a, b, ea, eb in (("DU-RSMA", pa, pb, rep.op_a, rep.op_b),
                                             ("DU-NOMA", na, nb, rep.noma_op_a, rep.noma_op_b)):
                    rows.append((x, a, b, ea.mean, eb.mean, ea.std_error, eb.std_error,
                                 scheme, cfg.rate_a, cfg.rate_b, fixed))
    return _table(columns, rows)


def _region_curves(rc, workers=None):
    """DU-RSMA, forced-RRH and time-sharing NOMA curves for the configured case."""
    cfg = rc.system()
    sample = rc.fixed_channel()
    curves = []
    for mode in ("max", "i", "j"):
        if sample is not None:
            curves.append(deterministic_region(cfg, sample, rc["alpha_grid"], mode))
        else:
            curves.append(ergodic_region(cfg, rc["alpha_grid"], rc["samples"], rc["seed"], mode, workers))
    du = curves[0]
    b_first, a_first = noma_corners(du)
    curves.append(ts_noma_region(b_first, a_first, du.denominator_a, du.denominator_b))
    return curves


def _ff_rows(curves):
    rows = []
    for c in curves:
        for q in (0, 1, 2):
            v, pt = fill_factor(c, q)
            rows.append((c.scheme, q, v, pt.r_a, pt.r_b))
    return rows


def cmd_region(rc, workers=None):
    curves = _region_curves(rc, workers)
    rows = []
    for c in curves:
        alphas = c.alphas if c.alphas is not None else [None] * len(c.points)
        for a, p in zip(alphas, c.points):
            rows.append((None if a is None else float(a), p.r_a, p.r_b, c.scheme))
    out = _table(REGION_COLUMNS, rows)
    du = curves[0]
    out += "# single_user_rates A=%s B=%s\n" % (_fmt(du.denominator_a), _fmt(du.denominator_b))
    for scheme, q, v, ra, rb in _ff_rows(curves):
        out += "# FF%d %s=%s at r_a=%s r_b=%s\n" % (q, scheme, _fmt(v), _fmt(ra), _fmt(rb))
    return out


def cmd_fill_factor(rc, workers=None):
    return _table(("scheme", "q", "ff", "r_a", "r_b"), _ff_rows(_region_curves(rc, workers)))


# validation cases: (name, kind, config text)
_VALIDATE_SMALL = (
    ("er_fig3_70dB", "er", PRESETS["fig3"] + "snr_db=70\n"),
    ("op_fig5_a0.3_70dB", "op", PRESETS["fig5"] + "alpha=0.3\nsnr_db=70\n"),
    ("op_fig6_R2_70dB", "op", PRESETS["fig6"] + "snr_db=70\n"),
)


def _validate_full():
    cases = []
    for s in (60, 70, 80, 90):
        cases.append(("er_fig3_%ddB" % s, "er", PRESETS["fig3"] + "snr_db=%d\n" % s))
    for s in (70, 80):
        for k in range(1, 10):
            cases.append(("op_fig5_a0.%d_%ddB" % (k, s), "op", PRESETS["fig5"] + "alpha=0.%d\nsnr_db=%d\n" % (k, s)))
    for r in (1, 2):
        for s in range(50, 95, 5):
            cases.append(("op_fig6_R%d_%ddB" % (r, s), "op",
                          PRESETS["fig6"] + "rate_a=%d\nrate_b=%d\nsnr_db=%d\n" % (r, r, s)))
    return tuple(cases)


GRID_SAMPLES = {"small": 10**6, "full": 10**7}


def _binomial_se(p, n):
    return math.sqrt(max(p * (1.0 - p), 0.0) / n)


def _check(case, term, analytic, est, proportion_se=True):
    """One report row; the SE of a proportion is the larger binomial SE at either estimate."""
    se = est.std_error
    if proportion_se and math.isfinite(analytic):
        se = max(se, _binomial_se(analytic, est.samples))
    diff = est.mean - analytic
    if not math.isfinite(diff):
        z = math.nan
    elif se == 0.0:
        z = 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
    else:
        z = diff / se
    ok = math.isfinite(z) and abs(z) <= Z_LIMIT
    return (case, term, analytic, est.mean, se, z, "yes" if ok else "no"), ok


def _validate_er(name, cfg, samples, seed, workers):
    fns = {"x1a": er_analytic.er_x1a, "x2a": er_analytic.er_x2a, "b": er_analytic.er_b}
    rows = []
    for (msg, k), est in mc_per_rrh_rates(cfg, samples, seed, workers).items():
        rows.append(_check(name, "er_%s_%s" % (msg, k), fns[msg](cfg, k), est, False))
    rep = mc_ergodic(cfg, samples, seed, workers)
    rows.append(_check(name, "p1", er_analytic.p1(cfg.gains), rep.empirical_p1))
    rows.append(_check(name, "p2", er_analytic.p2(cfg.gains), rep.empirical_p2))
    return rows


def _validate_op(name, cfg, samples, seed, workers):
    rows = []
    rep = outage_report_from_histogram(joint_histogram(cfg, samples, seed, workers))
    try:
        ctx = op_analytic.outage_context(cfg)
        table = op_analytic.g_table(ctx)
        for k in ("i", "j"):
            for idx in range(1, 12):
                rows.append(_check(name, "G%d_%s" % (idx, k), table[k][idx], rep.g_freq[(k, idx)]))
        na, nb = op_analytic.outage_noma_baseline(ctx)
        pairs = (("op_a", op_analytic.outage_a(ctx), rep.op_a),
                 ("op_b", op_analytic.outage_b(ctx), rep.op_b),
                 ("noma_op_a", na, rep.noma_op_a),
                 ("noma_op_b", nb, rep.noma_op_b))
    except op_analytic.DegenerateDenominator as exc:
        nan = proportion(0, samples)
        return [((name, "degenerate_%s" % exc.helper, math.nan, nan.mean, math.nan, math.nan, "no"), False)]
    for term, an, est in pairs:
        rows.append(_check(name, term, an, est))
    v = rep.disjointness_violations
    rows.append(((name, "disjointness_violations", 0, v, 0.0, 0.0 if v == 0 else math.inf,
                  "yes" if v == 0 else "no"), v == 0))
    return rows


def cmd_validate(rc, grid="small", samples=None, workers=None, custom=False):
    """Analytic vs MC report; returns (csv text, all passed)."""
    if custom:
        cases = (("custom_er", "er", rc), ("custom_op", "op", rc))
        n = rc["samples"]
    else:
        if grid not in GRID_SAMPLES:
            raise ConfigError("validate grid must be 'small' or 'full', got %r" % grid, "grid")
        raw = _VALIDATE_SMALL if grid == "small" else _validate_full()
        cases = tuple((name, kind, parse_config(text, source=name)) for name, kind, text in raw)
        n = samples or GRID_SAMPLES[grid]
    results = []
    for name, kind, case_rc in cases:
        cfg = case_rc.system()
        fn = _validate_er if kind == "er" else _validate_op
        results.extend(fn(name, cfg, n, case_rc["seed"], workers))
    ok = all(r[1] for r in results)
    text = _table(VALIDATE_COLUMNS, [r[0] for r in results])
    text += "# samples=%d checks=%d failed=%d\n" % (n, len(results), sum(not r[1] for r in results))
    return text, ok


# ---------------------------------------------------------------------------
# Entry point

SUBCOMMANDS = ("ergodic-sweep", "outage-sweep", "region", "fill-factor", "validate")


def build_parser():
    p = argparse.ArgumentParser(prog="dursma", description="DU-RSMA experiment runner.")
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", help="key=value configuration file")
    p.add_argument("--preset", help="named configuration: %s" % ", ".join(sorted(PRESETS)))
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override one key (repeatable)")
    p.add_argument("--out", help="output CSV path (default: stdout)")
    p.add_argument("--samples", help="Monte Carlo sample count")
    p.add_argument("--seed", help="random seed")
    p.add_argument("--grid", help="validate: 'small' or 'full'; region/fill-factor: alpha grid size")
    p.add_argument("--rates", help="outage-sweep: comma-separated target rates (R_a = R_b)")
    return p


def resolve(args):
    """Build the RunConfig from preset, config file and overrides, in that order."""
    rc = preset(args.preset) if args.preset else RunConfig()
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError("cannot read config file: %s" % exc, None, args.config) from None
        rc = parse_config(text, rc, source=args.config)
    for item in args.overrides:
        if "=" not in item:
            raise ConfigError("expected key=value, got %r" % item, None, "--set")
        key, value = item.split("=", 1)
        rc.set(key, value, "--set %s" % item)
    for key, flag in (("samples", args.samples), ("seed", args.seed), ("rate_sweep", args.rates)):
        if flag is not None:
            rc.set(key, flag, "--%s" % key.split("_")[0])
    if args.grid is not None and args.subcommand in ("region", "fill-factor"):
        rc.set("alpha_grid", args.grid, "--grid")
    return rc


def run(argv=None):
    """Run one subcommand; returns the process exit code."""
    args = build_parser().parse_args(argv)
    try:
        rc = resolve(args)
        rc.fixed_channel()
        custom = bool(args.preset or args.config or args.overrides)
        if args.subcommand == "validate":
            samples = int(_num(args.samples)) if args.samples else None
            body, ok = cmd_validate(rc, args.grid or "small", samples, custom=custom)
        else:
            fn = {"ergodic-sweep": cmd_ergodic_sweep, "outage-sweep": cmd_outage_sweep,
                  "region": cmd_region, "fill-factor": cmd_fill_factor}[args.subcommand]
            body, ok = fn(rc), True
    except ConfigError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        # e.g. a malformed DU_RSMA_THREADS value
        print("config error: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG
    header = "# subcommand=%s\n" % args.subcommand
    if args.subcommand == "validate" and not custom:
        header += "# grid=%s\n" % (args.grid or "small")
    else:
        header += rc.echo()
    text = header + body
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if not ok:
        print("validation failed: some analytic/MC pairs differ by more than %g SE" % Z_LIMIT, file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def main():
    sys.exit(run())
