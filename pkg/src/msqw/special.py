"""Scalar special functions: erf/erfc, their inverses, and Bessel J_k sequences."""
from __future__ import annotations

import math

import numpy as np

EULER_GAMMA = 0.57721566490153286061

_TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)


def _erf_series(x: float) -> float:
    # erf(x) = 2/sqrt(pi) exp(-x^2) sum_k 2^k x^(2k+1) / (2k+1)!!, all terms positive
    term = x
    total = x
    x2 = 2.0 * x * x
    k = 0
    while abs(term) > 1e-17 * abs(total):
        k += 1
        term *= x2 / (2 * k + 1)
        total += term
    return _TWO_OVER_SQRT_PI * math.exp(-x * x) * total


def _erfc_cf(x: float) -> float:
    # Continued fraction for x > 0, evaluated by modified Lentz:
    # erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    tiny = 1e-300
    f = x
    C = x
    D = 0.0
    for k in range(1, 500):
        a = 0.5 * k
        D = x + a * D
        D = tiny if D == 0.0 else D
        C = x + a / C
        C = tiny if C == 0.0 else C
        D = 1.0 / D
        delta = C * D
        f *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return math.exp(-x * x) / (math.sqrt(math.pi) * f)


_SPLIT = 2.5


def erf(x: float) -> float:
    if x < 0:
        return -erf(-x)
    if x < _SPLIT:
        return _erf_series(x)
    return 1.0 - _erfc_cf(x)


def erfc(x: float) -> float:
    if x < 0:
        return 2.0 - erfc(-x)
    if x < _SPLIT:
        return 1.0 - _erf_series(x)
    return _erfc_cf(x)


def _erfinv_guess(x: float) -> float:
    # M. Giles, "Approximating the erfinv function" (GPU Gems), single-precision branch
    w = -math.log((1.0 - x) * (1.0 + x))
    if w < 5.0:
        w -= 2.5
        p = 2.81022636e-08
        for c in (3.43273939e-07, -3.5233877e-06, -4.39150654e-06, 0.00021858087,
                  -0.00125372503, -0.00417768164, 0.246640727, 1.50140941):
            p = c + p * w
    else:
        w = math.sqrt(w) - 3.0
        p = -0.000200214257
        for c in (0.000100950558, 0.00134934322, -0.00367342844, 0.00573950773,
                  -0.0076224613, 0.00943887047, 1.00167406, 2.83297682):
            p = c + p * w
    return p * x


def erfcinv(q: float) -> float:
    """Inverse of erfc on (0, 2). Accepts small ``q`` without cancellation."""
    if not 0.0 < q < 2.0:
        if q == 0.0:
            return math.inf
        if q == 2.0:
            return -math.inf
        raise ValueError("erfcinv argument must lie in (0, 2)")
    if q > 1.0:
        return -erfcinv(2.0 - q)
    x = 1.0 - q
    if q < 1e-300:
        y = math.sqrt(-math.log(q))
    elif x < 1.0:
        y = _erfinv_guess(x)
    else:
        # 1 - q rounds to 1; start from the leading asymptotic term
        y = math.sqrt(-math.log(q * math.sqrt(math.pi)))
    return _newton_erf(y, x, q)


def _newton_erf(y: float, x: float, q: float) -> float:
    # Solve erf(y) = x (equivalently erfc(y) = q). In the tail the log residual
    # keeps Newton well-scaled.
    for _ in range(50):
        if y < 1.0:
            step = (erf(y) - x) / (_TWO_OVER_SQRT_PI * math.exp(-y * y))
        else:
            tail = erfc(y)
            step = -math.log(tail / q) * tail / (_TWO_OVER_SQRT_PI * math.exp(-y * y))
        y -= step
        if abs(step) <= 1e-15 * max(1.0, abs(y)):
            break
    return y


def erfinv(x: float) -> float:
    if not -1.0 <= x <= 1.0:
        raise ValueError("erfinv argument must lie in [-1, 1]")
    if x == 0.0:
        return 0.0
    if x < 0:
        return -erfinv(-x)
    if x < 0.5:
        return _newton_erf(_erfinv_guess(x), x, 1.0 - x)
    return erfcinv(1.0 - x)


def normal_upper_quantile(q: float, sigma: float = 1.0) -> float:
    """``x`` with ``P(X > x) = q`` for ``X ~ Normal(0, sigma^2)``."""
    return sigma * math.sqrt(2.0) * erfcinv(2.0 * q)


def bessel_j_sequence(x: float, kmax: int) -> np.ndarray:
    """``[J_0(x), ..., J_kmax(x)]`` for ``x >= 0`` by Miller's downward recurrence.

    Normalised with ``J_0 + 2 sum_k J_2k = 1``.
    """
    if x < 0:
        raise ValueError("bessel_j_sequence needs x >= 0")
    out = np.zeros(kmax + 1)
    if x == 0.0:
        out[0] = 1.0
        return out
    start = int(max(kmax, x) + 30 + 10 * math.sqrt(max(kmax, x)))
    start += start & 1
    vals = np.zeros(start + 2)
    vals[start] = 1e-300
    for k in range(start, 0, -1):
        vals[k - 1] = (2.0 * k / x) * vals[k] - vals[k + 1]
        if abs(vals[k - 1]) > 1e250:
            vals[k - 1:] *= 1e-250
    norm = vals[0] + 2.0 * vals[2:start + 1:2].sum()
    out[:] = vals[: kmax + 1] / norm
    return out
