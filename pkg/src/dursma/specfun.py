"""Exponential integrals, modified Bessel functions K0/K1 and adaptive quadrature.

All routines are scalar and self-contained so they can serve as independent
references for the closed-form expressions elsewhere in the package.
"""

import heapq
import math
from dataclasses import dataclass

EULER_GAMMA = 0.57721566490153286061
_EPS = 2.0 ** -53

# Crossover between the power series and the continued fraction for E1.
E1_SWITCH = 1.0
# Crossover between the power series and the asymptotic series for Ei(x > 0).
EI_ASYMPTOTIC = 40.0
EI_OVERFLOW = 709.78


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_error_estimate: float
    evaluations: int


def _e1_series(x):
    # E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
    total = 0.0
    term = 1.0
    k = 1
    while True:
        term *= -x / k
        add = term / k
        total += add
        if abs(add) <= _EPS * abs(total) * 0.25:
            break
        k += 1
        if k > 500:
            break
    return -EULER_GAMMA - math.log(x) - total


def _e1_cf_scaled(x):
    # Modified Lentz evaluation of exp(x) E1(x) for x > 1.
    tiny = 1e-300
    b = x + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 1000):
        a = -float(i * i)
        b += 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) <= _EPS:
            return h
    raise QuadratureError("continued fraction for E1 did not converge")


def expint_e1(x):
    """Exponential integral E1(x) = int_x^inf e^-t / t dt for x > 0."""
    x = float(x)
    if x <= 0.0:
        raise ValueError("expint_e1 requires x > 0, got %r" % x)
    if x <= E1_SWITCH:
        return _e1_series(x)
    return math.exp(-x) * _e1_cf_scaled(x)


def e1_scaled(x):
    """Return exp(x) * E1(x) for x > 0 without overflow or underflow.

    This is the kernel of every ergodic-rate closed form:
    int_0^inf exp(-s y) / (y + p) dy = e1_scaled(s p).
    """
    x = float(x)
    if x <= 0.0:
        raise ValueError("e1_scaled requires x > 0, got %r" % x)
    if x <= E1_SWITCH:
        return math.exp(x) * _e1_series(x)
    return _e1_cf_scaled(x)


def _ei_series(x):
    # Ei(x) = gamma + ln|x| + sum_{k>=1} x^k / (k k!)
    total = 0.0
    term = 1.0
    k = 1
    while True:
        term *= x / k
        add = term / k
        total += add
        if abs(add) <= _EPS * abs(total) * 0.25:
            break
        k += 1
        if k > 1000:
            break
    return EULER_GAMMA + math.log(abs(x)) + total


def _ei_asymptotic(x):
    total = 1.0
    term = 1.0
    k = 1
    while True:
        new = term * k / x
        if new >= term:
            break
        term = new
        total += term
        if term < _EPS * total * 0.25:
            break
        k += 1
    return math.exp(x) / x * total


def expint_ei(x):
    """Principal-value exponential integral Ei(x).

    Parameters
    ----------
    x : float
        Nonzero real argument.

    Returns
    -------
    float
        Ei(x). For x < 0 this equals -E1(-x).

    Raises
    ------
    ValueError
        At x == 0 where Ei diverges.
    OverflowError
        For x beyond the double-precision range of exp(x).
    """
    x = float(x)
    if x == 0.0:
        raise ValueError("expint_ei is undefined at x = 0")
    if x < 0.0:
        return -expint_e1(-x)
    if x > EI_OVERFLOW:
        raise OverflowError("expint_ei(%r) overflows double precision" % x)
    if x <= EI_ASYMPTOTIC:
        return _ei_series(x)
    return _ei_asymptotic(x)


def _k01_series(x):
    # Power series around 0 for K0 and K1 (valid for moderate x).
    y = 0.25 * x * x
    lg = math.log(0.5 * x)
    # K0 = -(ln(x/2) + gamma) I0 + sum y^k/(k!)^2 H_k
    term = 1.0
    harmonic = 0.0
    i0 = 1.0
    s0 = 0.0
    k = 0
    while True:
        k += 1
        term *= y / (k * k)
        harmonic += 1.0 / k
        i0 += term
        s0 += term * harmonic
        if term * (1.0 + harmonic) < _EPS * 1e-3 * i0:
            break
    k0 = -(lg + EULER_GAMMA) * i0 + s0
    # K1 = 1/x + I1 ln(x/2) - (x/4) sum y^k/(k!(k+1)!) (psi(k+1) + psi(k+2))
    term = 1.0
    psi1 = -EULER_GAMMA
    psi2 = 1.0 - EULER_GAMMA
    i1 = 1.0
    s1 = psi1 + psi2
    k = 0
    while True:
        k += 1
        term *= y / (k * (k + 1))
        psi1 += 1.0 / k
        psi2 += 1.0 / (k + 1)
        i1 += term
        s1 += term * (psi1 + psi2)
        if term * (abs(psi1) + abs(psi2) + 1.0) < _EPS * 1e-3:
            break
    i1 *= 0.5 * x
    k1 = 1.0 / x + i1 * lg - 0.25 * x * s1
    return k0, k1


def _k01_steed(x):
    # Steed's continued fraction (Temme's CF2) for order 0 and its successor.
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = delh = d
    q1, q2 = 0.0, 1.0
    a1 = 0.25
    q = c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, 100000):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1 = q2
        q2 = qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < _EPS:
            break
    else:
        raise QuadratureError("Steed continued fraction for K0 did not converge")
    k0 = math.sqrt(math.pi / (2.0 * x)) * math.exp(-x) / s
    k1 = k0 * (x + 0.5 - a1 * h) / x
    return k0, k1


def _k01(x):
    x = float(x)
    if not x > 0.0:
        raise ValueError("modified Bessel K requires x > 0, got %r" % x)
    if x <= 2.0:
        return _k01_series(x)
    return _k01_steed(x)


def bessel_k0(x):
    """Modified Bessel function of the second kind, order 0, for x > 0."""
    return _k01(x)[0]


def bessel_k1(x):
    """Modified Bessel function of the second kind, order 1, for x > 0."""
    return _k01(x)[1]


# 15-point Kronrod nodes/weights and the embedded 7-point Gauss weights.
_XGK = (
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
)
_WGK = (
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
)
_WG = (
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
)


def _gk15(f, a, b):
    center = 0.5 * (a + b)
    half = 0.5 * (b - a)
    fc = f(center)
    kron = fc * _WGK[7]
    gauss = fc * _WG[3]
    for j in range(7):
        dx = half * _XGK[j]
        fsum = f(center - dx) + f(center + dx)
        kron += _WGK[j] * fsum
        if j % 2 == 1:
            gauss += _WG[j // 2] * fsum
    kron *= half
    gauss *= half
    return kron, abs(kron - gauss)


def integrate(f, a, b, tol=1e-12, rel_tol=1e-10, max_intervals=4000, scale=1.0):
    """Adaptive Gauss-Kronrod (7/15) quadrature.

    Parameters
    ----------
    f : callable
        Scalar integrand, finite on the open interval.
    a, b : float
        Limits; either may be infinite. Infinite ranges are mapped onto
        [0, 1) with x = a + scale * t / (1 - t).
    tol, rel_tol : float
        Absolute and relative targets for the summed error estimate.
    max_intervals : int
        Subdivision budget; exceeding it raises QuadratureError.
    scale : float
        Length scale of the map for semi-infinite ranges.

    Returns
    -------
    QuadratureResult
    """
    a = float(a)
    b = float(b)
    if a == b:
        return QuadratureResult(0.0, 0.0, 0)
    if a > b:
        res = integrate(f, b, a, tol, rel_tol, max_intervals, scale)
        return QuadratureResult(-res.value, res.abs_error_estimate, res.evaluations)
    if math.isinf(a) and math.isinf(b):
        left = integrate(f, -math.inf, 0.0, tol / 2, rel_tol, max_intervals, scale)
        right = integrate(f, 0.0, math.inf, tol / 2, rel_tol, max_intervals, scale)
        return QuadratureResult(
            left.value + right.value,
            left.abs_error_estimate + right.abs_error_estimate,
            left.evaluations + right.evaluations,
        )
    if math.isinf(b):
        def g(t):
            return f(a + scale * t / (1.0 - t)) * scale / (1.0 - t) ** 2
        lo, hi = 0.0, 1.0
    elif math.isinf(a):
        def g(t):
            return f(b - scale * t / (1.0 - t)) * scale / (1.0 - t) ** 2
        lo, hi = 0.0, 1.0
    else:
        g = f
        lo, hi = a, b

    value, err = _gk15(g, lo, hi)
    evals = 15
    heap = [(-err, lo, hi, value)]
    total, total_err = value, err
    while total_err > max(tol, rel_tol * abs(total)):
        if len(heap) >= max_intervals:
            raise QuadratureError(
                "quadrature did not converge: estimate %.3e after %d intervals"
                % (total_err, len(heap))
            )
        neg_err, x0, x1, v = heapq.heappop(heap)
        mid = 0.5 * (x0 + x1)
        if mid <= x0 or mid >= x1:
            raise QuadratureError("interval collapsed before tolerance was met")
        v0, e0 = _gk15(g, x0, mid)
        v1, e1 = _gk15(g, mid, x1)
        evals += 30
        heapq.heappush(heap, (-e0, x0, mid, v0))
        heapq.heappush(heap, (-e1, mid, x1, v1))
        # resum to avoid drift from repeated subtraction
        total = math.fsum(item[3] for item in heap)
        total_err = math.fsum(-item[0] for item in heap)
    return QuadratureResult(total, total_err, evals)
