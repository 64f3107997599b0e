"""Singularities of an approximant: roots of Q_M and their indicial exponents."""
from __future__ import annotations

from dataclasses import dataclass

import mpmath
import numpy as np

from ..errors import RootFindingError


def _horner_with_derivative(coeffs, z):
    """p(z), p'(z) for ascending ``coeffs``."""
    p = mpmath.mpc(0)
    dp = mpmath.mpc(0)
    for c in reversed(coeffs):
        dp = dp * z + p
        p = p * z + c
    return p, dp


def _initial_guesses(coeffs):
    d = len(coeffs) - 1
    scale = max(abs(c) for c in coeffs)
    try:
        desc = np.array([float(c / scale) for c in reversed(coeffs)], dtype=float)
        guess = np.roots(desc)
        if len(guess) == d and np.all(np.isfinite(guess)):
            # perturb so no two seeds coincide exactly
            return [mpmath.mpc(complex(g)) * (1 + mpmath.mpf(2) ** -30 * (k + 1))
                    for k, g in enumerate(guess)]
    except (OverflowError, ValueError, np.linalg.LinAlgError):
        pass
    # Cauchy bound circle with irrational angular offset
    r = 1 + max(abs(c / coeffs[-1]) for c in coeffs[:-1])
    return [r * mpmath.expjpi(2 * mpmath.mpf(k) / d + mpmath.mpf(0.4) / d)
            for k in range(d)]


def aberth_roots(coeffs, digits: int | None = None, maxiter: int = 500) -> list:
    """All roots of the polynomial with ascending ``coeffs`` (Aberth-Ehrlich).

    Iterates all roots simultaneously at the current mpmath precision (or
    ``digits`` if given).  A root is frozen once its relative correction
    drops below 10**(3 - digits).  Roots in tight clusters stall well above
    that, so the sweep also stops once corrections have stopped shrinking
    and every root has backward residual at most 10**(5 - digits).
    """
    with mpmath.workdps(digits or mpmath.mp.dps):
        coeffs = [mpmath.mpmathify(c) for c in coeffs]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        if len(coeffs) <= 1:
            if not coeffs:
                raise RootFindingError("zero polynomial has no isolated roots")
            return []
        zero_roots = 0
        while coeffs[0] == 0:
            coeffs.pop(0)
            zero_roots += 1
        d = len(coeffs) - 1
        if d == 0:
            return [mpmath.mpc(0)] * zero_roots
        z = _initial_guesses(coeffs)
        tol = mpmath.mpf(10) ** (3 - mpmath.mp.dps)
        res_tol = mpmath.mpf(10) ** (5 - mpmath.mp.dps)
        active = [True] * d
        best, stale = None, 0
        for _ in range(maxiter):
            biggest = mpmath.mpf(0)
            for i in range(d):
                if not active[i]:
                    continue
                p, dp = _horner_with_derivative(coeffs, z[i])
                if p == 0:
                    active[i] = False
                    continue
                ratio = p / dp if dp != 0 else mpmath.mpc(1)
                s = mpmath.fsum(1 / (z[i] - z[j]) for j in range(d) if j != i)
                w = ratio / (1 - ratio * s)
                z[i] -= w
                rel = abs(w) / max(abs(z[i]), tol)
                if rel < tol:
                    active[i] = False
                biggest = max(biggest, rel)
            if not any(active):
                break
            if best is None or biggest < best / 2:
                best, stale = biggest, 0
            else:
                stale += 1
                if stale >= 4 and max(backward_residual(coeffs, r) for r in z) <= res_tol:
                    break
        else:
            res = [backward_residual(coeffs, r) for r in z]
            raise RootFindingError(f"Aberth iteration did not converge in {maxiter} steps",
                                   residuals=res)
        return [mpmath.mpc(0)] * zero_roots + z


def backward_residual(coeffs, z):
    """|p(z)| / sum |c_m| |z|^m, the relative backward error of a root."""
    p, _ = _horner_with_derivative(coeffs, z)
    a = abs(z)
    return abs(p) / mpmath.fsum(abs(c) * a**m for m, c in enumerate(coeffs))


@dataclass
class SingularityEstimate:
    location: mpmath.mpc
    exponent: mpmath.mpc | None   # lambda in F ~ (1 - t/z)^lambda, i.e. -theta
    simple_root: bool
    approximant_id: str = ""

    @property
    def theta(self):
        """Exponent in the convention F ~ (1 - mu t)^(-theta)."""
        return None if self.exponent is None else -self.exponent

    @property
    def is_real(self) -> bool:
        z = self.location
        return abs(z.imag) <= abs(z) * mpmath.mpf(10) ** (-mpmath.mp.dps // 2)


def find_singularities(approx, precision_digits: int = 50, guard_digits: int = 20,
                       multiple_tol: float = 1e-20) -> list[SingularityEstimate]:
    """Roots of Q_M with exponents M - 1 - Q_{M-1}(z) / (z Q_M'(z)).

    Roots are iterated with ``guard_digits`` beyond ``precision_digits``
    because the singularities of interest sit in tight clusters, where
    root accuracy is far below working precision.  Roots closer than
    ``multiple_tol`` (relative) to another root are flagged as not simple
    and get no exponent.
    """
    M = approx.order_M
    with mpmath.workdps(precision_digits + guard_digits):
        qM = approx.poly_mpf(M)
        qM1 = approx.poly_mpf(M - 1) if M >= 1 else [mpmath.mpf(0)]
        if all(c == 0 for c in qM):
            raise RootFindingError("Q_M vanishes identically")
        roots = aberth_roots(qM)
        out = []
        for i, z in enumerate(roots):
            near = any(abs(z - w) <= multiple_tol * max(abs(z), 1e-300)
                       for j, w in enumerate(roots) if j != i)
            expo = None
            if not near and z != 0:
                _, dqM = _horner_with_derivative(qM, z)
                q1, _ = _horner_with_derivative(qM1, z)
                expo = (M - 1) - q1 / (z * dqM)
            out.append(SingularityEstimate(z, expo, not near, approx.spec.label()))
        out.sort(key=lambda s: abs(s.location))
        bad = [backward_residual(qM, s.location) for s in out]
        if max(bad) > mpmath.mpf(10) ** (5 - precision_digits):
            raise RootFindingError("root residual above tolerance", residuals=bad)
        return out


def root_residual(approx, z, precision_digits: int = 50):
    """Backward residual of ``z`` as a root of Q_M."""
    with mpmath.workdps(precision_digits):
        return backward_residual(approx.poly_mpf(approx.order_M), z)
