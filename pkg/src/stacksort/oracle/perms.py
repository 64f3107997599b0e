"""Brute-force ground truth on permutations.

Permutations are tuples of distinct positive integers.  Positions in the
public API (descents, hook endpoints, ``c_index``) are 1-based.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, permutations
from math import comb

import numpy as np
from numba import njit

from ..errors import ResourceBudgetError

ENUM_CAP = 10
PREIMAGE_CAP = 9


def standardize(perm) -> tuple:
    """Replace the i-th smallest entry by i."""
    rank = {v: i for i, v in enumerate(sorted(perm), start=1)}
    return tuple(rank[v] for v in perm)


def catalan(n: int) -> int:
    return comb(2 * n, n) // (n + 1)


def stack_sort(perm) -> tuple:
    """s(LmR) = s(L) s(R) m, applied literally."""
    perm = tuple(perm)
    if not perm:
        return ()
    i = perm.index(max(perm))
    return stack_sort(perm[:i]) + stack_sort(perm[i + 1:]) + (perm[i],)


def stack_sort_pass(perm) -> tuple:
    """One pass through a stack; same map as :func:`stack_sort`."""
    stack, out = [], []
    for v in perm:
        while stack and stack[-1] < v:
            out.append(stack.pop())
        stack.append(v)
    out.extend(reversed(stack))
    return tuple(out)


def is_increasing(perm) -> bool:
    return all(a < b for a, b in zip(perm, perm[1:]))


def is_k_stack_sortable(perm, k: int) -> bool:
    if k < 0:
        raise ValueError("k must be >= 0")
    for _ in range(k):
        perm = stack_sort_pass(perm)
    return is_increasing(perm)


@njit(cache=True)
def _count_sortable(n, k):
    perm = np.arange(1, n + 1)
    work = np.empty(n, dtype=perm.dtype)
    stack = np.empty(n, dtype=perm.dtype)
    out = np.empty(n, dtype=perm.dtype)
    count = 0
    while True:
        work[:] = perm
        for _ in range(k):
            top = 0
            m = 0
            for v in work:
                while top > 0 and stack[top - 1] < v:
                    top -= 1
                    out[m] = stack[top]
                    m += 1
                stack[top] = v
                top += 1
            while top > 0:
                top -= 1
                out[m] = stack[top]
                m += 1
            work[:] = out
        ok = True
        for i in range(n):
            if work[i] != i + 1:
                ok = False
                break
        if ok:
            count += 1
        # next permutation in lexicographic order
        i = n - 2
        while i >= 0 and perm[i] > perm[i + 1]:
            i -= 1
        if i < 0:
            break
        j = n - 1
        while perm[j] < perm[i]:
            j -= 1
        perm[i], perm[j] = perm[j], perm[i]
        perm[i + 1:] = perm[i + 1:][::-1]
    return count


def count_sortable(n: int, k: int, cap: int = ENUM_CAP) -> int:
    """|W_k(n)| by running every permutation of S_n through k stacks."""
    if n > cap:
        raise ResourceBudgetError(f"enumerating S_{n} exceeds the cap n <= {cap}")
    if n == 0:
        return 1
    return int(_count_sortable(n, k))


@lru_cache(maxsize=None)
def _image_counts(n: int) -> Counter:
    return Counter(stack_sort_pass(p) for p in permutations(range(1, n + 1)))


def preimage_count_brute(perm, cap: int = PREIMAGE_CAP) -> int:
    """#{sigma : s(sigma) = perm} by exhaustive search over S_n."""
    n = len(perm)
    if n > cap:
        raise ResourceBudgetError(f"exhaustive preimage search capped at length {cap}")
    return _image_counts(n)[standardize(perm)]


@dataclass(frozen=True)
class PermStats:
    n: int
    leg: int
    tl: int
    tail_bound_descents: tuple
    c_index: int | None


def legal_spaces(perm) -> list[int]:
    """The a in 0..n for which (a, a+1) is a legal space."""
    n = len(perm)
    out = []
    for a in range(n + 1):
        # illegal iff some i1 < i2 < i3 has perm[i3] <= a < perm[i1] < perm[i2]
        bad = False
        for i1, i2, i3 in combinations(range(n), 3):
            if perm[i3] <= a < perm[i1] < perm[i2]:
                bad = True
                break
        if not bad:
            out.append(a)
    return out


def leg(perm) -> int:
    return len(legal_spaces(perm))


def tail_length(perm) -> int:
    n = len(perm)
    ell = 0
    while ell < n and perm[n - 1 - ell] == n - ell:
        ell += 1
    return ell


def descents(perm) -> list[int]:
    return [i for i in range(1, len(perm)) if perm[i - 1] > perm[i]]


def hooks_sw(perm, i: int) -> list[int]:
    """Northeast endpoints j (1-based) of the hooks with southwest endpoint i."""
    return [j for j in range(i + 1, len(perm) + 1) if perm[j - 1] > perm[i - 1]]


def tail_bound_descents(perm) -> list[int]:
    n = len(perm)
    tail_start = n - tail_length(perm) + 1
    return [d for d in descents(perm) if all(j >= tail_start for j in hooks_sw(perm, d))]


def c_index(perm) -> int | None:
    """Position of the entry n - tl(perm); None for the identity."""
    n = len(perm)
    t = tail_length(perm)
    if t == n:
        return None
    return perm.index(n - t) + 1


def stats(perm) -> PermStats:
    perm = tuple(perm)
    return PermStats(len(perm), leg(perm), tail_length(perm),
                     tuple(tail_bound_descents(perm)), c_index(perm))


def hook_split(perm, i: int, j: int) -> tuple[tuple, tuple]:
    """(unsheltered, sheltered) subpermutations for the hook (i, j)."""
    return perm[:i] + perm[j:], perm[i:j - 1]


@lru_cache(maxsize=None)
def _preimages_std(perm: tuple) -> int:
    n = len(perm)
    if n == 0:
        return 1
    if is_increasing(perm):
        return catalan(n)
    d = c_index(perm)
    total = 0
    for j in hooks_sw(perm, d):
        U, S = hook_split(perm, d, j)
        total += _preimages_std(standardize(U)) * _preimages_std(standardize(S))
    return total


def preimage_count_decomposition(perm) -> int:
    """|s^{-1}(perm)| through the decomposition formula at d = c(perm).

    Recursion is memoised on standardisations.
    """
    perm = standardize(perm)
    if is_increasing(perm):
        raise ValueError("identity permutation: use catalan(n) directly")
    return _preimages_std(perm)


def contains_pattern(perm, pattern) -> bool:
    k = len(pattern)
    target = standardize(pattern)
    return any(standardize(sub) == target for sub in combinations(perm, k))


def west_check(perm) -> bool:
    """2-stack-sortable iff no 2341, and every 3241 sits inside a 35241."""
    perm = tuple(perm)
    if contains_pattern(perm, (2, 3, 4, 1)):
        return False
    for i1, i2, i3, i4 in combinations(range(len(perm)), 4):
        a, b, c, d = perm[i1], perm[i2], perm[i3], perm[i4]
        if d < b < a < c:
            # a "5" between the 3 and the 2, above the 4
            if not any(perm[k] > c for k in range(i1 + 1, i2)):
                return False
    return True


def is_sum_indecomposable(perm) -> bool:
    """No proper prefix of length k consists of the values 1..k."""
    m = 0
    for k, v in enumerate(perm[:-1], start=1):
        m = max(m, v)
        if m == k:
            return False
    return True


def count_indecomposable_sortable(n: int, k: int = 3, cap: int = 8) -> int:
    """Sum-indecomposable k-stack-sortable permutations of length n."""
    if n > cap:
        raise ResourceBudgetError(f"indecomposable enumeration capped at n={cap}")
    return sum(1 for p in permutations(range(1, n + 1))
               if is_sum_indecomposable(p) and is_k_stack_sortable(p, k))
