"""Prime selection for the multi-modular run.

All primes live just below 2**32 so that residues fit in 32 bits and a
product of two residues fits in an unsigned 64-bit word.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

PRIME_BOUND = 2**32

# Deterministic Miller-Rabin witnesses for every n < 4_759_123_141.
_MR_BASES_32 = (2, 7, 61)


def is_prime_u32(n: int) -> bool:
    """Deterministic primality test, valid for ``n < 2**32``."""
    if n < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 61):
        if n % q == 0:
            return n == q
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for b in _MR_BASES_32:
        y = pow(b, d, n)
        if y == 1 or y == n - 1:
            continue
        for _ in range(r - 1):
            y = y * y % n
            if y == n - 1:
                break
        else:
            return False
    return True


def generate_primes(k: int, bound: int = PRIME_BOUND) -> list[int]:
    """Return the ``k`` largest primes strictly below ``bound``, descending."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if bound > PRIME_BOUND:
        raise ValueError("bound must not exceed 2**32")
    out = []
    n = bound - 1
    while len(out) < k:
        if n < 2:
            raise ValueError(f"only {len(out)} primes below {bound}")
        if is_prime_u32(n):
            out.append(n)
        n -= 1
    return out


@dataclass
class PrimePlan:
    primes: list[int]
    target_N: int
    product_P: int = field(init=False)

    def __post_init__(self):
        if len(set(self.primes)) != len(self.primes):
            raise ValueError("duplicate primes in plan")
        if any(b >= a for a, b in zip(self.primes, self.primes[1:])):
            raise ValueError("plan primes must be strictly decreasing")
        if any(p <= self.target_N + 2 for p in self.primes):
            raise ValueError(
                f"every prime must exceed N+2={self.target_N + 2} "
                "(binomials and grid inverses are taken mod p)")
        self.product_P = math.prod(self.primes)

    @property
    def k(self) -> int:
        return len(self.primes)

    def extended(self, extra: int) -> "PrimePlan":
        """Plan with ``extra`` further primes appended (existing ones untouched)."""
        more = generate_primes(self.k + extra)[self.k:]
        return PrimePlan(self.primes + more, self.target_N)


def primes_needed(N: int, safety_digits: float = 20, growth: float = 10.5) -> int:
    """Number of top 32-bit primes whose product exceeds
    ``10**(N*log10(growth) + safety_digits)``."""
    target = N * math.log10(growth) + safety_digits
    k, digits = 0, 0.0
    n = PRIME_BOUND - 1
    while digits <= target:
        if is_prime_u32(n):
            k += 1
            digits += math.log10(n)
        n -= 1
    return max(k, 1)


def plan_primes(N: int, safety_digits: float = 20, growth: float = 10.5) -> PrimePlan:
    """Choose enough primes to *believe* ``P > N * w_N``.

    The belief rests on ``w_n <= growth**n``; it is checked after the run by
    :func:`stacksort.crt.certify`, which is the only correctness authority.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    k = primes_needed(N, safety_digits, growth)
    return PrimePlan(generate_primes(k), N)
