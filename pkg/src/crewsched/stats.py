"""Two-tailed t-tests for disruption comparisons.

The paired test serves schedule comparisons measured on the same trials; the
Welch test serves comparisons against methods whose trials can drop out
independently (unequal variances, unpaired samples). The t tail probability
is computed through the regularized incomplete beta function, evaluated with
the standard continued-fraction expansion.
"""

from __future__ import annotations

import math
from collections.abc import Sequence

from .errors import DegenerateSamplesError

_MAX_CF_ITER = 300
_CF_EPS = 3e-15
_TINY = 1e-300


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_CF_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def betainc_regularized(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if not 0.0 <= x <= 1.0:
        raise ValueError("x outside [0, 1]")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_bt = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    bt = math.exp(ln_bt)
    if x < (a + 1.0) / (a + b + 2.0):
        return bt * _betacf(a, b, x) / a
    return 1.0 - bt * _betacf(b, a, 1.0 - x) / b


def t_two_tailed_p(t: float, df: float) -> float:
    """P(|T_df| >= |t|) for Student's t."""
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    if math.isinf(t):
        return 0.0
    x = df / (df + t * t)
    return betainc_regularized(df / 2.0, 0.5, x)


def _mean(xs: Sequence[float]) -> float:
    return sum(xs) / len(xs)


def _sample_var(xs: Sequence[float]) -> float:
    m = _mean(xs)
    return sum((x - m) ** 2 for x in xs) / (len(xs) - 1)


def paired_t_test(a: Sequence[float], b: Sequence[float]) -> float:
    """Two-tailed dependent t-test for paired samples."""
    if len(a) != len(b):
        raise DegenerateSamplesError("paired samples must have equal length")
    n = len(a)
    if n < 2:
        raise DegenerateSamplesError("need at least two pairs")
    diffs = [x - y for x, y in zip(a, b)]
    var = _sample_var(diffs)
    if var == 0.0:
        raise DegenerateSamplesError("all paired differences are equal; t undefined")
    t = _mean(diffs) / math.sqrt(var / n)
    return t_two_tailed_p(t, n - 1)


def welch_t_test(a: Sequence[float], b: Sequence[float]) -> float:
    """Two-tailed Welch t-test for independent samples with unequal variances,
    using the Welch-Satterthwaite degrees of freedom."""
    n1, n2 = len(a), len(b)
    if n1 < 2 or n2 < 2:
        raise DegenerateSamplesError("need at least two observations per sample")
    v1, v2 = _sample_var(a), _sample_var(b)
    se2 = v1 / n1 + v2 / n2
    if se2 == 0.0:
        if _mean(a) == _mean(b):
            raise DegenerateSamplesError("both samples constant and equal; t undefined")
        return 0.0
    t = (_mean(a) - _mean(b)) / math.sqrt(se2)
    df = se2 * se2 / ((v1 / n1) ** 2 / (n1 - 1) + (v2 / n2) ** 2 / (n2 - 1))
    return t_two_tailed_p(t, df)
