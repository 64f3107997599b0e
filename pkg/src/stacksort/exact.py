"""The grid algorithm in exact integer arithmetic.

Independent of the modular kernels: plain Python integers, no residues,
no precomputed tables.  Divisions by a and x are exact because A_{n-1} is
divisible by a and the convolution is divisible by x as polynomials.
"""
from __future__ import annotations

from math import comb

from .errors import ResourceBudgetError
from .series import CoefficientSeries

MAX_EXACT_N = 60


class ExactGrid:
    """Q_n(x, a) for x, a in 0..N+2, every level kept."""

    def __init__(self, N: int):
        if N > MAX_EXACT_N:
            raise ResourceBudgetError(f"exact engine capped at N={MAX_EXACT_N}")
        self.N = N
        self.G = G = N + 2
        self.q = [None, [[(x + 1) ** 2 * (a + 1) ** 2 for a in range(G + 1)]
                         for x in range(G + 1)]]
        self.level = 1

    def A(self, j, x, a):
        return self.q[j][x][a] - self.q[j][x][0]

    def B(self, j, x, a):
        return self.q[j][x][a] - self.q[j][0][a]

    def interior_value(self, n, x, a):
        """Q_n(x, a) straight from the recurrence (x, a >= 1)."""
        prev = self.A(n - 1, x, a)
        head, r = divmod((1 + x) * (1 + a) ** 2 * prev, a)
        assert r == 0
        conv = sum(self.A(j, x, a) * self.B(n - 1 - j, x, a) for j in range(1, n - 1))
        tail, r = divmod((1 + x) * conv, x)
        assert r == 0
        return head + (1 + x) * a * self.q[n - 1][x][a] + tail

    def step(self):
        n = self.level + 1
        G = self.G
        grid = [[0] * (G + 1) for _ in range(G + 1)]
        for x in range(1, G + 1):
            for a in range(1, G + 1):
                grid[x][a] = self.interior_value(n, x, a)
        m = n + 2
        coef = [0] + [(-1) ** (j + 1) * comb(m, j) for j in range(1, m + 1)]
        for x in range(1, G + 1):
            grid[x][0] = sum(coef[j] * grid[x][j] for j in range(1, m + 1))
        for a in range(0, G + 1):
            grid[0][a] = sum(coef[j] * grid[j][a] for j in range(1, m + 1))
        self.q.append(grid)
        self.level = n

    def run(self):
        while self.level < self.N:
            self.step()
        return [self.q[n][0][0] for n in range(1, self.N + 1)]


def reference_compute_exact(N_small: int) -> CoefficientSeries:
    coeffs = ExactGrid(N_small).run()
    return CoefficientSeries("w3", coeffs, "exact-uncertified")
