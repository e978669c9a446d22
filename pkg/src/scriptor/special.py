"""F and Student-t survival functions on top of the regularized
incomplete beta function.

The incomplete beta is evaluated with the standard continued-fraction
expansion (modified Lentz iteration), switching to the symmetry-transformed
tail when x is past the distribution bulk so the fraction converges fast.
Absolute error is well below 1e-10 over the degree-of-freedom ranges this
package uses.
"""

from __future__ import annotations

import math

_FPMIN = 1e-300  # smallest representable scale for Lentz renormalization
_EPS = 1e-16
_MAX_ITER = 500


def _beta_cf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER + 1):
        m2 = 2 * m
        # even step
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        # odd step
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(
        f"incomplete beta continued fraction did not converge for a={a}, b={b}, x={x}"
    )


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and 0 <= x <= 1."""
    if not (math.isfinite(a) and math.isfinite(b) and math.isfinite(x)):
        raise ValueError(f"non-finite argument: a={a}, b={b}, x={x}")
    if a <= 0 or b <= 0:
        raise ValueError(f"shape parameters must be positive: a={a}, b={b}")
    if x < 0.0 or x > 1.0:
        raise ValueError(f"x must be in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def _check_df(df: float, name: str) -> float:
    if not math.isfinite(df) or df <= 0:
        raise ValueError(f"{name} must be a positive finite number, got {df}")
    return float(df)


def f_sf(f_value: float, df_num: float, df_den: float) -> float:
    """Survival function P(F > f) of the F distribution."""
    if not math.isfinite(f_value):
        raise ValueError(f"F statistic must be finite, got {f_value}")
    if f_value < 0:
        raise ValueError(f"F statistic must be non-negative, got {f_value}")
    d1 = _check_df(df_num, "df_num")
    d2 = _check_df(df_den, "df_den")
    if f_value == 0.0:
        return 1.0
    x = d2 / (d2 + d1 * f_value)
    return regularized_incomplete_beta(d2 / 2.0, d1 / 2.0, x)


def t_sf(t_value: float, df: float) -> float:
    """Survival function P(T > t) of Student's t distribution."""
    if not math.isfinite(t_value):
        raise ValueError(f"t statistic must be finite, got {t_value}")
    nu = _check_df(df, "df")
    if t_value == 0.0:
        return 0.5
    x = nu / (nu + t_value * t_value)
    tail = 0.5 * regularized_incomplete_beta(nu / 2.0, 0.5, x)
    return tail if t_value > 0 else 1.0 - tail
