"""Integer-order Bessel functions of the first kind.

Miller's downward recurrence normalised with ``J0 + 2 sum J_2k = 1`` covers the
moderate arguments met in parametric driving; tiny arguments use the power
series directly.
"""

import math

import numpy as np

SERIES_LIMIT = 1e-3


def _start_order(nmax, x):
    # start well above both the requested order and the turning point |x|
    return 2 * ((max(nmax, int(abs(x))) + 20 + int(math.sqrt(40 * (max(nmax, abs(x)) + 1)))) // 2)


def _miller(nmax, x):
    """``[J_0(x), ..., J_nmax(x)]`` for scalar ``x != 0``."""
    top = _start_order(nmax, x)
    out = np.zeros(top + 2)
    out[top] = 1e-300
    for k in range(top, 0, -1):
        out[k - 1] = (2 * k / x) * out[k] - out[k + 1]
        if abs(out[k - 1]) > 1e250:
            out[k - 1:] *= 1e-250
    norm = out[0] + 2 * np.sum(out[2:top + 1:2])
    return out[: nmax + 1] / norm


def series(n, x, terms=40):
    """Power series ``sum_k (-1)^k (x/2)^(2k+n) / (k! (k+n)!)`` for ``n >= 0``."""
    x = float(x)
    total = 0.0
    term = (x / 2) ** n / math.factorial(n)
    for k in range(terms):
        total += term
        term *= -((x / 2) ** 2) / ((k + 1) * (k + 1 + n))
    return total


def bessel_table(nmax, x):
    """``J_0..J_nmax`` at scalar ``x``; negative ``x`` via parity."""
    x = float(x)
    if nmax < 0:
        raise ValueError("nmax must be non-negative")
    if x == 0.0:
        out = np.zeros(nmax + 1)
        out[0] = 1.0
        return out
    if abs(x) < SERIES_LIMIT:
        return np.array([series(n, x) for n in range(nmax + 1)])
    vals = _miller(nmax, abs(x))
    if x < 0:
        vals = vals * (-1.0) ** np.arange(nmax + 1)
    return vals


def jn(n, x):
    """``J_n(x)`` for integer ``n`` (any sign) and scalar or array ``x``."""
    n = int(n)
    sign = (-1) ** n if n < 0 else 1
    m = abs(n)
    xs = np.asarray(x, dtype=float)
    flat = np.array([bessel_table(m, v)[m] for v in xs.ravel()]).reshape(xs.shape)
    res = sign * flat
    return float(res) if res.ndim == 0 else res


def jn_prime(n, x):
    """Derivative via ``J_n' = (J_{n-1} - J_{n+1}) / 2``."""
    return 0.5 * (jn(n - 1, x) - jn(n + 1, x))


def tail_bound(x, cutoff):
    """``sum_{|m| > cutoff} |J_m(x)|`` (both signs of ``m``)."""
    vals = bessel_table(cutoff + 60, x)
    return float(2 * np.sum(np.abs(vals[cutoff + 1:])))


J1_PEAK_ARG = 1.8411837813406593
J1_PEAK = 0.5818652242815963


def j1_inverse(value):
    """``x`` in ``[0, J1_PEAK_ARG]`` with ``J_1(x) = value`` (monotone branch)."""
    from scipy.optimize import brentq

    if not 0 <= value <= J1_PEAK:
        raise ValueError(f"J1 value {value} outside [0, {J1_PEAK}]")
    if value == 0:
        return 0.0
    if value >= J1_PEAK:
        return J1_PEAK_ARG
    return brentq(lambda z: jn(1, z) - value, 0.0, J1_PEAK_ARG, xtol=1e-15, rtol=1e-15)
