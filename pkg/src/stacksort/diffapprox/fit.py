"""Exact fitting of inhomogeneous differential approximants.

An approximant of order M is a set of polynomials Q_0..Q_M, P with

    sum_k Q_k(t) (t d/dt)^k F(t) = P(t) + O(t^K),

matched coefficientwise.  With Q_k = sum_m q_{k,m} t^m the coefficient of
t^n is  sum_{k,m} q_{k,m} (n-m)^k f_{n-m} - p_n,  linear in the unknowns.
The system is solved over the integers (fraction-free, via FLINT), so the
returned approximant annihilates the prefix exactly.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm

import flint
import mpmath

from ..errors import NullspaceError


@dataclass(frozen=True)
class ApproximantSpec:
    degrees: tuple      # deg Q_0, ..., deg Q_M
    deg_P: int

    @property
    def order(self) -> int:
        return len(self.degrees) - 1

    @property
    def unknowns(self) -> int:
        return sum(d + 1 for d in self.degrees) + self.deg_P + 1

    @property
    def used_terms(self) -> int:
        """Number of series coefficients (f_0..f_{K-1}) the fit consumes."""
        return self.unknowns - 1

    def label(self) -> str:
        return f"M{self.order}:" + ",".join(map(str, self.degrees)) + f";P{self.deg_P}"


@dataclass
class HolonomicApproximant:
    spec: ApproximantSpec
    q_polys: list       # q_polys[k][m] = q_{k,m} (Fractions)
    p_poly: list

    @property
    def order_M(self) -> int:
        return self.spec.order

    @property
    def used_terms(self) -> int:
        return self.spec.used_terms

    def residual(self, coeffs, upto: int | None = None) -> list:
        """Coefficients of sum_k Q_k (tD)^k F - P for n < ``upto``."""
        upto = self.used_terms if upto is None else upto
        out = []
        for n in range(upto):
            s = -(self.p_poly[n] if n < len(self.p_poly) else 0)
            for k, q in enumerate(self.q_polys):
                for m, c in enumerate(q):
                    if m > n or not c:
                        continue
                    s += c * (n - m) ** k * coeffs[n - m]
            out.append(s)
        return out

    def poly_mpf(self, k: int) -> list:
        """Coefficients of Q_k (ascending) as mpf at the current precision."""
        return [mpmath.mpf(c.numerator) / c.denominator for c in self.q_polys[k]]

    def leading_factor(self, n: int):
        """sum_k q_{k,0} n^k, the pivot of the forward recurrence at t^n."""
        return sum(q[0] * n**k for k, q in enumerate(self.q_polys) if q)

    def to_archive(self) -> dict:
        return {
            "order": self.order_M,
            "degrees": list(self.spec.degrees),
            "deg_P": self.spec.deg_P,
            "q": [[[c.numerator, c.denominator] for c in q] for q in self.q_polys],
            "p": [[c.numerator, c.denominator] for c in self.p_poly],
        }

    @classmethod
    def from_archive(cls, d) -> "HolonomicApproximant":
        spec = ApproximantSpec(tuple(d["degrees"]), d["deg_P"])
        q = [[Fraction(a, b) for a, b in poly] for poly in d["q"]]
        p = [Fraction(a, b) for a, b in d["p"]]
        return cls(spec, q, p)


def system_rows(coeffs, spec: ApproximantSpec) -> list[list[int]]:
    """Integer matrix of the matching conditions t^0..t^(K-1)."""
    K = spec.used_terms
    rows = []
    for n in range(K):
        row = []
        for k, d in enumerate(spec.degrees):
            for m in range(d + 1):
                row.append((n - m) ** k * coeffs[n - m] if m <= n else 0)
        row.extend(-1 if m == n else 0 for m in range(spec.deg_P + 1))
        rows.append(row)
    return rows


def fit_approximant(coeffs, spec: ApproximantSpec) -> HolonomicApproximant:
    """Fit one approximant to exact coefficients ``coeffs`` (f_0, f_1, ...).

    Rational (or real, see exact_coefficients) input is scaled by the common
    denominator first; that only rescales P, so the Q_k are unchanged.  The
    solution direction is normalised so that its first nonzero unknown
    (ordering: Q_0, ..., Q_M coefficients, then P) equals 1.
    """
    K = spec.used_terms
    if K > len(coeffs):
        raise ValueError(f"{spec.label()} needs {K} coefficients, {len(coeffs)} given")
    coeffs = exact_coefficients(coeffs[:K])
    if any(isinstance(c, Fraction) for c in coeffs):
        scale = 1
        for c in coeffs:
            scale = lcm(scale, Fraction(c).denominator)
        coeffs = [int(c * scale) for c in coeffs]
    else:
        scale = 1
    rows = system_rows(coeffs, spec)
    X, nullity = flint.fmpz_mat(rows).nullspace()
    if nullity != 1:
        raise NullspaceError(
            f"{spec.label()}: nullspace dimension {nullity}", nullity)
    vec = [int(X[i, 0]) for i in range(spec.unknowns)]
    lead = next(v for v in vec if v)
    sol = [Fraction(v, lead) for v in vec]
    q_polys, pos = [], 0
    for d in spec.degrees:
        q_polys.append(sol[pos:pos + d + 1])
        pos += d + 1
    return HolonomicApproximant(spec, q_polys, [c / scale for c in sol[pos:]])


def exact_coefficients(values) -> list:
    """Ints and Fractions pass through; floats and mpf become their exact
    binary value as a Fraction, so real-valued input is fitted exactly as
    given (its rounding is part of the data)."""
    out = []
    for v in values:
        if isinstance(v, (int, Fraction)):
            out.append(v)
            continue
        if isinstance(v, float):
            out.append(Fraction(v))
            continue
        man, exp = v.man_exp     # not mpf(v): that would round to the context precision
        out.append(Fraction(int(man) * 2**exp) if exp >= 0 else Fraction(int(man), 2**-exp))
    return out
