"""Rigorous lower bounds on the growth constant and conjecture checks.

Two bounds: the root bound w_n^(1/n), valid by supermultiplicativity of
direct sums, and the bound from sum-indecomposable permutations, where
W = W~/(1 - W~) and the radius of W is at most the t_c with W~_N(t_c) = 1.
Both are rigorous only when computed from exact certified coefficients.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import asdict, dataclass
from fractions import Fraction
from math import comb

import mpmath

from .errors import InvariantViolation, StackSortError
from .series import CoefficientSeries

log = logging.getLogger(__name__)

BONA_THRESHOLD = Fraction(256, 27)
TOLERANCE = 1e-12


@dataclass
class BoundReport:
    method: str                 # "root" or "indecomposable"
    N_used: int
    bound_value: object         # mpf
    t_c: object = None          # mpf, indecomposable only
    certified: bool = False

    def to_dict(self) -> dict:
        d = asdict(self)
        d["bound_value"] = mpmath.nstr(self.bound_value, 20)
        d["t_c"] = None if self.t_c is None else mpmath.nstr(self.t_c, 20)
        return d


def _as_series(series) -> CoefficientSeries:
    if isinstance(series, CoefficientSeries):
        return series
    return CoefficientSeries("w", list(series), "exact-uncertified")


def _certified(s: CoefficientSeries, what: str) -> bool:
    if s.provenance == "exact-certified":
        return True
    msg = f"{what} computed from {s.provenance} coefficients; reported uncertified"
    if s.provenance == "approximate":
        warnings.warn(msg, stacklevel=3)
    log.warning(msg)
    return False


def root_bound(series, n: int | None = None, precision: int = 50) -> BoundReport:
    """w_n^(1/n), a lower bound on the growth constant."""
    s = _as_series(series)
    n = s.N if n is None else n
    if not 1 <= n <= s.N:
        raise ValueError(f"n={n} outside 1..{s.N}")
    with mpmath.workdps(precision):
        w = mpmath.mpf(s[n])
        if w <= 0:
            raise InvariantViolation(f"w_{n} = {s[n]} is not positive")
        val = mpmath.exp(mpmath.log(w) / n)
    return BoundReport("root", n, val, None, _certified(s, "root bound"))


def indecomposable_series(series, check_nonnegative: bool = True) -> CoefficientSeries:
    """Coefficients of W/(1+W), the sum-indecomposable part of W.

    Exact integer division when the input is exact.  On counting series a
    negative coefficient can only come from a bug and raises.
    """
    s = _as_series(series)
    w = s.coeffs
    out = []
    # W~ (1 + W) = W
    for n in range(1, len(w) + 1):
        v = w[n - 1] - sum(out[k - 1] * w[n - k - 1] for k in range(1, n))
        if check_nonnegative and v < 0:
            raise InvariantViolation(f"negative indecomposable count at n={n}: {v}")
        out.append(v)
    return CoefficientSeries(f"{s.name}-indecomposable", out, s.provenance)


def recompose(indec) -> list:
    """W = W~/(1 - W~), the inverse of :func:`indecomposable_series`."""
    wt = indec.coeffs if isinstance(indec, CoefficientSeries) else list(indec)
    out = []
    for n in range(1, len(wt) + 1):
        out.append(wt[n - 1] + sum(wt[k - 1] * out[n - k - 1] for k in range(1, n)))
    return out


def _poly(coeffs, t):
    """sum_{n>=1} c_n t^n by Horner."""
    acc = mpmath.mpf(0)
    for c in reversed(coeffs):
        acc = (acc + c) * t
    return acc


def indecomposable_bound(series, bracket=(0, 0.2), tol: float = TOLERANCE,
                         precision: int = 50, indecomposable=None) -> BoundReport:
    """1/t_c with sum_{n<=N} w~_n t_c^n = 1, by bisection.

    The bracket's upper end is doubled (up to 1) when the partial sum is
    still below 1 there, which only happens for very short series.
    """
    s = _as_series(series)
    wt = indecomposable or indecomposable_series(s)
    with mpmath.workdps(precision):
        c = [mpmath.mpf(v) for v in wt.coeffs]
        lo, hi = mpmath.mpf(bracket[0]), mpmath.mpf(bracket[1])
        while _poly(c, hi) < 1:
            if hi >= 1:
                raise StackSortError(
                    f"partial sum of the indecomposable series stays below 1 on (0, {hi}]")
            hi = min(2 * hi, mpmath.mpf(1))
        if _poly(c, hi) == 1:
            lo = hi
        while hi - lo > tol:
            mid = (lo + hi) / 2
            if _poly(c, mid) < 1:
                lo = mid
            else:
                hi = mid
        t_c = (lo + hi) / 2 if hi != lo else hi
        return BoundReport("indecomposable", s.N, 1 / t_c, t_c,
                           _certified(s, "indecomposable bound"))


@dataclass
class BonaReport:
    binomial_holds: bool
    first_violation: int | None
    log_convex: bool
    first_non_log_convex: int | None
    lower_bound: object = None
    refuted: bool | None = None     # None when no certified bound was supplied
    certified: bool = False

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lower_bound"] = None if self.lower_bound is None else mpmath.nstr(self.lower_bound, 20)
        return d


def bona_checks(series, lower_bound: BoundReport | None = None) -> BonaReport:
    """Binomial bound w_n <= C(4n, n), log-convexity, and the growth-rate refutation.

    A certified lower bound above 256/27 refutes the conjectured bound, whose
    growth rate is 4^4/3^3.  Log-convexity means w_{n+1}/w_n increases, checked
    as w_n^2 < w_{n-1} w_{n+1} for n >= 2.
    """
    s = _as_series(series)
    w = s.coeffs
    first_bad = next((n for n in range(1, s.N + 1) if w[n - 1] > comb(4 * n, n)), None)
    first_nlc = next((n for n in range(2, s.N)
                      if not w[n - 1] ** 2 < w[n - 2] * w[n]), None)
    rep = BonaReport(first_bad is None, first_bad, first_nlc is None, first_nlc,
                     certified=s.provenance == "exact-certified")
    if lower_bound is not None:
        rep.lower_bound = lower_bound.bound_value
        if lower_bound.certified:
            with mpmath.workdps(50):
                rep.refuted = bool(lower_bound.bound_value >
                                   mpmath.mpf(BONA_THRESHOLD.numerator) / BONA_THRESHOLD.denominator)
    return rep


def bounds_report(series, precision: int = 50) -> dict:
    """Root and indecomposable bounds plus the conjecture checks, as plain data."""
    s = _as_series(series)
    rb = root_bound(s, precision=precision)
    ib = indecomposable_bound(s, precision=precision)
    bona = bona_checks(s, ib)
    return {"root": rb.to_dict(), "indecomposable": ib.to_dict(), "bona": bona.to_dict()}
