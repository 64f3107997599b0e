"""Series with known singular structure, for calibrating approximants.

Compositions are carried out in exact rationals, so truncation is exact:
the first ``n_terms`` coefficients are the true ones.  Asking for a finite
``precision`` rounds them to that many significant digits afterwards, which
is how a real-valued series reaches the approximant fitter in practice; the
apparent singularity structure near a confluent point depends on it.
"""
from __future__ import annotations

from fractions import Fraction
from math import factorial

import mpmath

from ..oracle.perms import catalan

NAMES = ("log-test", "catalan", "geometric", "power")


def series_mul(a, b, n):
    return [sum(a[i] * b[k - i] for i in range(k + 1)) for k in range(n)]


def series_inv(a, n):
    if a[0] == 0:
        raise ZeroDivisionError("series with zero constant term has no inverse")
    inv = [Fraction(1) / a[0]]
    for k in range(1, n):
        s = sum(a[i] * inv[k - i] for i in range(1, min(k, len(a) - 1) + 1))
        inv.append(-s * inv[0])
    return inv


def log_test(n_terms: int) -> list:
    """F(x) = -x^3 (1-x)^2 (1 + e^x) / log^3(1-x), coefficients f_0..f_{n-1}.

    With -log(1-x) = x L(x), L = sum x^k/(k+1), this is (1-x)^2 (1+e^x) / L^3,
    a power series with a (1-x)^2 / log^3 singularity at x = 1.
    """
    n = n_terms
    L = [Fraction(1, k + 1) for k in range(n)]
    Linv = series_inv(L, n)
    Linv3 = series_mul(series_mul(Linv, Linv, n), Linv, n)
    one_minus_sq = [Fraction(1), Fraction(-2), Fraction(1)] + [Fraction(0)] * max(0, n - 3)
    one_plus_exp = [Fraction(2)] + [Fraction(1, factorial(k)) for k in range(1, n)]
    return series_mul(series_mul(one_minus_sq[:n], one_plus_exp, n), Linv3, n)


def power_series(mu, theta, n_terms: int) -> list:
    """(1 - mu t)^(-theta) for rational mu, theta: binomial coefficients times mu^n."""
    mu, theta = Fraction(mu), Fraction(theta)
    out, c = [], Fraction(1)
    for k in range(n_terms):
        out.append(c * mu**k)
        c = c * (theta + k) / (k + 1)
    return out


def make_test_series(name: str, n_terms: int, precision: int | None = None, *,
                     mu=2, theta=Fraction(1, 2)) -> list:
    """Coefficients f_0..f_{n_terms-1} of a named test series.

    Exact (int or Fraction) when ``precision`` is None, else mpf values
    rounded to ``precision`` significant digits.
    """
    if name == "log-test":
        out = log_test(n_terms)
    elif name == "catalan":
        out = [catalan(k) for k in range(n_terms)]
    elif name == "geometric":
        out = [mu**k if isinstance(mu, int) else Fraction(mu) ** k for k in range(n_terms)]
    elif name == "power":
        out = power_series(mu, theta, n_terms)
    else:
        raise ValueError(f"unknown test series {name!r}; choose from {NAMES}")
    if precision is None:
        return out
    with mpmath.workdps(precision):
        return [+mpmath.mpf(Fraction(c).numerator) / Fraction(c).denominator for c in out]
