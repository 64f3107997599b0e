"""Series extension: every approximant predicts further coefficients.

Reading sum_k Q_k (tD)^k F = P at t^n gives the forward recurrence

    f_n = (p_n - sum_k sum_{m>=1} q_{k,m} (n-m)^k f_{n-m}) / sum_k q_{k,0} n^k

Each member runs it from the exact prefix; the ensemble mean (after MAD
outlier rejection) is the prediction and the spread its error bar.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import mpmath

from ..errors import EnsembleError
from ..series import CoefficientSeries
from .ensemble import MAD_CUT, mad_filter

log = logging.getLogger(__name__)


@dataclass
class ExtensionResult:
    start: int                      # index of the first predicted coefficient
    coefficients: list              # mpf, for n = start, start+1, ...
    stddev: list
    declared_digits: list
    members_used: list = field(default_factory=list)
    discarded: dict = field(default_factory=dict)   # label -> reason
    stopped_at: int | None = None   # first n that missed the digit threshold

    @property
    def end(self) -> int:
        return self.start + len(self.coefficients) - 1

    def value(self, n: int):
        return self.coefficients[n - self.start]

    def to_series(self, exact, name: str = "extended") -> CoefficientSeries:
        """Exact prefix plus predictions as one approximate series.

        ``exact`` holds f_1, f_2, ... (the constant term is not stored).
        """
        n_exact = self.start - 1
        coeffs = list(exact[:n_exact]) + list(self.coefficients)
        sd = [mpmath.mpf(0)] * n_exact + list(self.stddev)
        return CoefficientSeries(name, coeffs, "approximate", sd)


def _member_predictions(approx, known, target_n):
    """f_K..f_target from one approximant, or the n where the pivot vanishes."""
    K = len(known)
    q = [[mpmath.mpf(c.numerator) / c.denominator for c in poly] for poly in approx.q_polys]
    p = [mpmath.mpf(c.numerator) / c.denominator for c in approx.p_poly]
    f = [mpmath.mpf(v) for v in known]
    for n in range(K, target_n + 1):
        lead = approx.leading_factor(n)
        if lead == 0:
            return None, n
        acc = p[n] if n < len(p) else mpmath.mpf(0)
        for k, poly in enumerate(q):
            for m in range(1, min(len(poly), n + 1)):
                c = poly[m]
                if c:
                    acc -= c * (n - m) ** k * f[n - m]
        f.append(acc / (mpmath.mpf(lead.numerator) / lead.denominator))
    return f[K:], None


def extend_series(known, approximants, target_n: int, digit_threshold: float = 0,
                  precision: int = 60, mad_cut: float = MAD_CUT) -> ExtensionResult:
    """Predict f_K..f_target_n, K = len(known), from an ensemble of approximants.

    ``known`` is the exact prefix f_0..f_{K-1}.  Members whose recurrence
    pivot vanishes at some needed n are discarded and logged.  Output stops
    before the first n whose declared digits, -log10(std/|mean|), fall below
    ``digit_threshold``.
    """
    K = len(known)
    res = ExtensionResult(K, [], [], [])
    with mpmath.workdps(precision):
        preds, labels = [], []
        for ap in approximants:
            label = ap.spec.label()
            vals, bad_n = _member_predictions(ap, known, target_n)
            if vals is None:
                res.discarded[label] = f"leading factor vanishes at n={bad_n}"
                log.info("discarding %s: leading factor vanishes at n=%d", label, bad_n)
                continue
            preds.append(vals)
            labels.append(label)
        if not preds:
            raise EnsembleError("no ensemble member survived for extension")
        res.members_used = labels
        cap = mpmath.mpf(precision - 5)
        for i, n in enumerate(range(K, target_n + 1)):
            col = [v[i] for v in preds]
            keep = mad_filter(col, mad_cut)
            col = [v for v, k in zip(col, keep) if k]
            mean = mpmath.fsum(col) / len(col)
            std = (mpmath.sqrt(mpmath.fsum((v - mean) ** 2 for v in col) / (len(col) - 1))
                   if len(col) > 1 else mpmath.mpf(0))
            if mean == 0:
                digits = mpmath.mpf(0) if std else cap
            else:
                digits = cap if std == 0 else min(cap, -mpmath.log10(std / abs(mean)))
            if digits < digit_threshold:
                res.stopped_at = n
                break
            res.coefficients.append(mean)
            res.stddev.append(std)
            res.declared_digits.append(digits)
    return res
