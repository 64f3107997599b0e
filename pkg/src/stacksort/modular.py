"""Grid recurrence for Q_n(x, a) modulo a single 32-bit prime.

The series Q(t, x, a) = sum_n Q_n(x, a) t^n is never expanded into
coefficients.  Instead each Q_n is evaluated on the grid x, a in 1..N+2,
where the recurrence

    Q_n = (1+x)(1+a)^2 A_{n-1}/a + (1+x) a Q_{n-1}
          + (1+x)/x * sum_{j=1}^{n-2} A_j B_{n-1-j}

with A_j = Q_j(x,a) - Q_j(x,0) and B_j = Q_j(x,a) - Q_j(0,a) needs no
boundary values at the new level.  The boundary rows Q_n(x,0), Q_n(0,a)
then follow from the vanishing (n+2)-th finite difference, since Q_n has
degree n+1 in each variable.  Q_n(0,0) is w_n.

Note on the convolution term: the coefficient-of-t^n extraction of the
functional equation leaves no stray factor of t in front of the sum; the
published form of this recurrence carries one, which is a typesetting
artifact.  The brute-force counts agree only without it.
"""
from __future__ import annotations

import numpy as np
from numba import njit

from .errors import LevelOrderError, ResourceBudgetError

U64 = np.uint64
_MASK = np.uint64(0xFFFFFFFF)
_SHIFT = np.uint64(32)
_ONE = np.uint64(1)

BLOCK = 2048


def footprint_bytes(N: int) -> int:
    """Bytes held by the two residue histories of one prime."""
    G = N + 2
    return 2 * 4 * (N + 1) * G * G


@njit(cache=True, nogil=True)
def _tables(G, p):
    inv = np.zeros(G + 2, dtype=np.uint64)
    inv[1] = 1
    for i in range(2, G + 2):
        ui = np.uint64(i)
        inv[i] = (p - (p // ui) * inv[p % ui] % p) % p
    fact = np.ones(G + 2, dtype=np.uint64)
    ifact = np.ones(G + 2, dtype=np.uint64)
    for i in range(1, G + 2):
        fact[i] = fact[i - 1] * np.uint64(i) % p
        ifact[i] = ifact[i - 1] * inv[i] % p
    P = G * G
    cA = np.zeros(P, dtype=np.uint64)
    cB = np.zeros(P, dtype=np.uint64)
    cC = np.zeros(P, dtype=np.uint64)
    for x in range(1, G + 1):
        ux1 = np.uint64(x + 1)
        for a in range(1, G + 1):
            ua1 = np.uint64(a + 1)
            pt = (x - 1) * G + (a - 1)
            cA[pt] = ux1 * (ua1 * ua1 % p) % p * inv[a] % p
            cB[pt] = ux1 * np.uint64(a) % p
            cC[pt] = ux1 * inv[x] % p
    return inv, fact, ifact, cA, cB, cC


@njit(cache=True, nogil=True)
def _init_level1(A, B, bx0, b0a, G, p):
    for x in range(G + 1):
        bx0[1, x] = np.uint64((x + 1) * (x + 1)) % p
    for a in range(G + 1):
        b0a[1, a] = np.uint64((a + 1) * (a + 1)) % p
    for x in range(1, G + 1):
        for a in range(1, G + 1):
            q = np.uint64((x + 1) * (x + 1)) % p * np.uint64((a + 1) * (a + 1)) % p
            pt = (x - 1) * G + (a - 1)
            A[1, pt] = (q + p - bx0[1, x]) % p
            B[1, pt] = (q + p - b0a[1, a]) % p


@njit(cache=True, nogil=True)
def _interior(A, B, bx0, n, G, p, cA, cB, cC, qn, block):
    """Q_n on the interior grid, written to ``qn`` (flattened x-major)."""
    P = G * G
    lo = np.zeros(block, dtype=np.uint64)
    hi = np.zeros(block, dtype=np.uint64)
    for s in range(0, P, block):
        e = min(P, s + block)
        w = e - s
        for i in range(w):
            lo[i] = 0
            hi[i] = 0
        # convolution, products split so 2**32 terms can accumulate unreduced
        for j in range(1, n - 1):
            ra = A[j, s:e]
            rb = B[n - 1 - j, s:e]
            for i in range(w):
                pr = np.uint64(ra[i]) * np.uint64(rb[i])
                lo[i] += pr & _MASK
                hi[i] += pr >> _SHIFT
        prev = A[n - 1, s:e]
        for i in range(w):
            pt = s + i
            x = pt // G + 1
            conv = ((hi[i] % p) << _SHIFT) % p
            conv = (conv + lo[i] % p) % p
            aprev = np.uint64(prev[i])
            qprev = (aprev + bx0[n - 1, x]) % p
            t1 = cA[pt] * aprev % p
            t2 = cB[pt] * qprev % p
            t3 = cC[pt] * conv % p
            qn[pt] = (t1 + t2 + t3) % p


@njit(cache=True, nogil=True)
def _boundary(A, B, bx0, b0a, n, G, p, fact, ifact, qn):
    m = n + 2
    coef = np.zeros(m + 1, dtype=np.uint64)
    for j in range(1, m + 1):
        c = fact[m] * ifact[j] % p * ifact[m - j] % p
        # Q(.,0) = sum_{j>=1} (-1)^(j+1) C(m,j) Q(.,j)
        coef[j] = c if j % 2 == 1 else (p - c) % p
    for x in range(1, G + 1):
        s = np.uint64(0)
        base = (x - 1) * G
        for j in range(1, m + 1):
            s = (s + coef[j] * qn[base + j - 1]) % p
        bx0[n, x] = s
    for a in range(0, G + 1):
        s = np.uint64(0)
        for j in range(1, m + 1):
            if a == 0:
                v = bx0[n, j]
            else:
                v = qn[(j - 1) * G + a - 1]
            s = (s + coef[j] * v) % p
        b0a[n, a] = s
    bx0[n, 0] = b0a[n, 0]
    for x in range(1, G + 1):
        for a in range(1, G + 1):
            pt = (x - 1) * G + (a - 1)
            A[n, pt] = (qn[pt] + p - bx0[n, x]) % p
            B[n, pt] = (qn[pt] + p - b0a[n, a]) % p


def boundary_interpolation(values, n: int, p: int | None = None):
    """Value at 0 of a degree <= n+1 polynomial known at 1, ..., n+2.

    ``values`` holds the evaluations along its last axis.  With ``p`` the
    result is reduced mod p; without it the computation is exact.
    """
    from math import comb

    m = n + 2
    vals = [list(map(int, row)) for row in np.atleast_2d(np.asarray(values, dtype=object))]
    if any(len(row) != m for row in vals):
        raise ValueError(f"need exactly n+2={m} evaluations")
    coef = [(-1) ** (j + 1) * comb(m, j) for j in range(1, m + 1)]
    out = []
    for row in vals:
        s = sum(c * v for c, v in zip(coef, row))
        out.append(s % p if p is not None else s)
    return out if np.ndim(values) > 1 else out[0]


class ModularRun:
    """Per-prime state of the grid algorithm.

    ``a_history[j]`` / ``b_history[j]`` hold A_j, B_j on the interior grid
    (flattened, index (x-1)*(N+2) + (a-1)); ``boundary_x0[j, x]`` is
    Q_j(x, 0) and ``boundary_a0[j, a]`` is Q_j(0, a).
    """

    def __init__(self, N: int, prime: int, memory_budget: int | None = None,
                 block: int = BLOCK):
        if prime <= N + 2:
            raise ValueError(f"prime {prime} must exceed N+2={N + 2}")
        if prime >= 2**32:
            raise ValueError("prime must be below 2**32")
        need = footprint_bytes(N)
        if memory_budget is not None and need > memory_budget:
            raise ResourceBudgetError(
                f"N={N} needs {need / 2**20:.1f} MiB per prime, budget is "
                f"{memory_budget / 2**20:.1f} MiB; raise the budget or lower N")
        self.N = N
        self.prime = prime
        self.block = block
        G = self.G = N + 2
        p = U64(prime)
        self._p = p
        (self._inv, self._fact, self._ifact,
         self._cA, self._cB, self._cC) = _tables(G, p)
        self.a_history = np.zeros((N + 1, G * G), dtype=np.uint32)
        self.b_history = np.zeros((N + 1, G * G), dtype=np.uint32)
        self.boundary_x0 = np.zeros((N + 1, G + 1), dtype=np.uint64)
        self.boundary_a0 = np.zeros((N + 1, G + 1), dtype=np.uint64)
        self._qn = np.zeros(G * G, dtype=np.uint64)
        _init_level1(self.a_history, self.b_history,
                     self.boundary_x0, self.boundary_a0, G, p)
        self.level = 1
        self._pending = None

    @property
    def output(self) -> list[int]:
        """Residues of w_1..w_level."""
        return [int(self.boundary_a0[n, 0]) for n in range(1, self.level + 1)]

    def interior(self, n: int | None = None) -> np.ndarray:
        """Residues Q_n(x, a) for x, a in 1..N+2 as a (G, G) array."""
        n = self.level if n is None else n
        if n > self.level:
            raise LevelOrderError(f"level {n} not computed yet")
        A = self.a_history[n].astype(np.uint64).reshape(self.G, self.G)
        return (A + self.boundary_x0[n, 1:, None]) % self._p

    def step(self, n: int | None = None) -> "ModularRun":
        recurrence_step(self, self.level + 1 if n is None else n)
        self._finish_level()
        return self

    def _finish_level(self):
        n = self._pending
        _boundary(self.a_history, self.b_history, self.boundary_x0,
                  self.boundary_a0, n, self.G, self._p, self._fact,
                  self._ifact, self._qn)
        self.level = n
        self._pending = None

    def run(self) -> list[int]:
        while self.level < self.N:
            self.step()
        return self.output


def recurrence_step(run: ModularRun, n: int) -> ModularRun:
    """Evaluate Q_n on the interior grid of ``run`` (boundaries not yet set)."""
    if n != run.level + 1 or n < 2 or run._pending is not None:
        raise LevelOrderError(
            f"level {n} requested but levels 1..{run.level} are complete")
    if n > run.N:
        raise LevelOrderError(f"level {n} beyond grid order N={run.N}")
    _interior(run.a_history, run.b_history, run.boundary_x0, n, run.G,
              run._p, run._cA, run._cB, run._cC, run._qn, run.block)
    run._pending = n
    return run


def compute_series_mod_p(N: int, p: int, memory_budget: int | None = None) -> list[int]:
    """Residues of w_1..w_N modulo ``p``; Theta(N^4) modular products."""
    return ModularRun(N, p, memory_budget).run()
