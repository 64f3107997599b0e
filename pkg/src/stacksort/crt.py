from __future__ import annotations

from dataclasses import dataclass

from .primes import PrimePlan
from .series import CoefficientSeries


@dataclass
class CertificationReport:
    N: int
    product_P: int
    max_coefficient: int
    passed: bool
    margin_log10: float | None  # log10 of P / (N * max w~_n)

    def as_dict(self):
        return {
            "N": self.N,
            "product_P_digits": len(str(self.product_P)),
            "product_P": str(self.product_P),
            "max_coefficient": str(self.max_coefficient),
            "passed": self.passed,
            "margin_log10": self.margin_log10,
        }


def crt_combine(residue_vectors, plan: PrimePlan, name: str = "w3") -> CoefficientSeries:
    """Reconstruct each coefficient as the unique value in [0, P).

    ``residue_vectors[i]`` are the residues modulo ``plan.primes[i]``.
    """
    primes = plan.primes
    if len(residue_vectors) != len(primes):
        raise ValueError(f"{len(residue_vectors)} residue vectors for {len(primes)} primes")
    if len(set(primes)) != len(primes):
        raise ValueError("duplicate primes")
    lengths = {len(v) for v in residue_vectors}
    if len(lengths) != 1:
        raise ValueError(f"residue vectors have mismatched lengths {sorted(lengths)}")
    P = plan.product_P
    # x = sum r_i * e_i with e_i = 1 mod p_i, 0 mod p_j
    basis = []
    for p in primes:
        M = P // p
        basis.append(M * pow(M % p, -1, p))
    out = []
    for n in range(lengths.pop()):
        out.append(sum(int(v[n]) * e for v, e in zip(residue_vectors, basis)) % P)
    return CoefficientSeries(name, out, "exact-uncertified")


def certify(series: CoefficientSeries, plan: PrimePlan) -> CertificationReport:
    """Post-hoc proof that the CRT output is the true sequence.

    Since w_n <= n w_{n-1}, ``N * w~_n < P`` for every n forces w_n < P and
    hence w~_n = w_n.  On success the series is upgraded in place to
    ``exact-certified``.
    """
    from math import log10

    N = series.N
    P = plan.product_P
    top = max(series.coeffs) if series.coeffs else 0
    passed = all(N * c < P for c in series.coeffs)
    margin = log10(P) - log10(N * top) if top > 0 else None
    if passed:
        series.provenance = "exact-certified"
    return CertificationReport(N, P, top, passed, margin)
