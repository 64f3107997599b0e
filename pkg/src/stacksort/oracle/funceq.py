"""Small-order checks of the catalytic functional equations.

A truncated series in t is a list ``S`` with ``S[n]`` a sparse polynomial
in two catalytic variables, stored as ``{(i, j): int}``.  For J the
variables are (u, v); for Q they are (x, a).  All rational-looking pieces
of the equation for J are evaluated as polynomial difference quotients, so
nothing is ever divided as a power series.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from math import comb

from ..errors import InvariantViolation, ResourceBudgetError
from .perms import (catalan, is_k_stack_sortable, leg, preimage_count_brute,
                    tail_length)

J_ENUM_CAP = 8


# -- sparse bivariate polynomials ------------------------------------------

def padd(*ps):
    out = {}
    for p in ps:
        for k, c in p.items():
            out[k] = out.get(k, 0) + c
    return {k: c for k, c in out.items() if c}


def pscale(p, c):
    return {k: c * v for k, v in p.items()} if c else {}


def psub(p, q):
    return padd(p, pscale(q, -1))


def pmul(p, q):
    out = {}
    for (i1, j1), c1 in p.items():
        for (i2, j2), c2 in q.items():
            k = (i1 + i2, j1 + j2)
            out[k] = out.get(k, 0) + c1 * c2
    return {k: c for k, c in out.items() if c}


def pshift(p, di=0, dj=0):
    return {(i + di, j + dj): c for (i, j), c in p.items()}


def at_second_1(p):
    """p(u, 1) as a polynomial in the first variable."""
    out = {}
    for (i, j), c in p.items():
        out[(i, 0)] = out.get((i, 0), 0) + c
    return {k: c for k, c in out.items() if c}


def at_first_1(p):
    out = {}
    for (i, j), c in p.items():
        out[(0, j)] = out.get((0, j), 0) + c
    return {k: c for k, c in out.items() if c}


def quotient_second(p):
    """(p(u, 1) - p(u, v)) / (1 - v), a polynomial."""
    out = {}
    for (i, j), c in p.items():
        for e in range(j):
            out[(i, e)] = out.get((i, e), 0) + c
    return {k: c for k, c in out.items() if c}


def divide_one_minus_first(p):
    """Exact p / (1 - u) by synthetic division; raises if not divisible."""
    out = {}
    by_j = {}
    for (i, j), c in p.items():
        by_j.setdefault(j, {})[i] = c
    for j, col in by_j.items():
        top = max(col)
        acc = 0
        for i in range(top + 1):
            acc += col.get(i, 0)
            if i < top and acc:
                out[(i, j)] = acc
        if acc:
            raise InvariantViolation("polynomial not divisible by (1 - u)")
    return out


# -- truncated series in t -------------------------------------------------

def szero(T):
    return [dict() for _ in range(T + 1)]


def smul(A, B, T):
    out = szero(T)
    for n1, p in enumerate(A):
        if not p:
            continue
        for n2, q in enumerate(B[:T - n1 + 1]):
            if q:
                out[n1 + n2] = padd(out[n1 + n2], pmul(p, q))
    return out


def sapply(A, f):
    return [f(p) for p in A]


def catalan_tuv_minus_1(T):
    """C(tuv) - 1."""
    return [dict()] + [{(n, n): catalan(n)} for n in range(1, T + 1)]


def catalan_tuv_minus_1_over_v(T):
    return [dict()] + [{(n, n - 1): catalan(n)} for n in range(1, T + 1)]


# -- J(t, u, v) ------------------------------------------------------------

def compute_J_truncated(max_n: int):
    """J(t,u,v) = sum over pi in W_2(n) of |s^-1(pi)| t^n u^(leg-1) v^tl.

    Exact, by enumerating S_n; ``J[n]`` is a {(k, l): count} polynomial.
    """
    if max_n > J_ENUM_CAP:
        raise ResourceBudgetError(f"J enumeration capped at order {J_ENUM_CAP}")
    J = szero(max_n)
    for n in range(1, max_n + 1):
        poly = {}
        for perm in permutations(range(1, n + 1)):
            if not is_k_stack_sortable(perm, 2):
                continue
            key = (leg(perm) - 1, tail_length(perm))
            poly[key] = poly.get(key, 0) + preimage_count_brute(perm)
        J[n] = poly
    return J


def funceq_rhs(J, T):
    """Right side of the functional equation for J, to order T.

    Every occurrence of J on the right carries a factor t, so orders up to
    T only read J up to T-1.
    """
    Cm1 = catalan_tuv_minus_1(T)
    Ju1 = sapply(J, at_second_1)                        # J(t,u,1)
    # J(t,1,uv) * uv, written through g(y) = y J(t,1,y)
    g = sapply(J, lambda p: {(j + 1, j + 1): c for (_, j), c in at_first_1(p).items()})

    one = szero(T)
    one[0] = {(0, 0): 1}
    tuJu1 = [dict()] + [pshift(p, 1, 0) for p in Ju1[:T]]
    term1 = smul(Cm1, [padd(a, b) for a, b in zip(one, tuJu1)], T)

    # X = (J(u,1) - J(u,v))/(1-v) - (C(tuv)-1)/v
    X = [psub(quotient_second(p), q) for p, q in
         zip(J, catalan_tuv_minus_1_over_v(T))]
    # Y = (J(1,1) - uv J(1,uv))/(1-uv) - u (J(u,1) - v J(u,v))/(1-v)
    Y = []
    for n in range(T + 1):
        first = {}
        for (i, j), c in g[n].items():
            # (g(1) - g(uv)) / (1 - uv) with g monomial (uv)^i
            for e in range(i):
                first[(e, e)] = first.get((e, e), 0) + c
        vJ = pshift(J[n], 0, 1)
        second = pshift(quotient_second(vJ), 1, 0)
        Y.append(psub(padd(first), second))
    Yq = [divide_one_minus_first(p) for p in Y]
    XY = smul(X, Yq, T)
    term2 = [dict()] + [pshift(p, 1, 1) for p in XY[:T]]
    return [padd(a, b) for a, b in zip(term1, term2)]


@dataclass
class VerificationReport:
    max_n: int
    passed: bool
    mismatched_orders: list

    def __bool__(self):
        return self.passed


def verify_functional_equation(max_n: int, J=None) -> VerificationReport:
    """Check J = RHS(J) coefficientwise in t up to ``max_n``."""
    if J is None:
        J = compute_J_truncated(max_n)
    J = [dict(p) for p in J[:max_n + 1]]
    try:
        rhs = funceq_rhs(J, max_n)
    except InvariantViolation:
        return VerificationReport(max_n, False, ["non-cancelling (1-u) factor"])
    bad = [n for n in range(1, max_n + 1) if padd(J[n]) != padd(rhs[n])]
    return VerificationReport(max_n, not bad, bad)


def solve_J(T: int):
    """J to order T by iterating its functional equation from J = 0."""
    J = szero(T)
    for n in range(1, T + 1):
        J[n] = funceq_rhs(J, n)[n]
    return J


# -- J -> J1 -> J2 -> Q ----------------------------------------------------

def transform_to_Q(max_n: int, J=None):
    """Q(t,x,a) = J2(t, x+1, a/(1+a)^2), orders 1..max_n, as {(i, j)} in (x, a).

    Q_n has a-degree n+1, and its coefficient of a^D draws on J up to order
    n + D; J is therefore generated to order 2*max_n + 1 from its functional
    equation unless supplied.
    """
    if max_n > 6:
        raise ResourceBudgetError("Q transform capped at order 6")
    D = max_n + 1            # a-degree kept
    need = max_n + D
    if J is None:
        J = solve_J(need)
    if len(J) - 1 < need:
        raise InvariantViolation(f"J must reach order {need}")

    # J1(t,u,w) = J(t,u,w/(tu)): t^n u^k v^l -> t^(n-l) u^(k-l) w^l
    J1 = {}
    for n in range(1, need + 1):
        for (k, l), c in J[n].items():
            if l > k or l > n:
                raise InvariantViolation(f"monomial u^{k} v^{l} t^{n} outside Z[u][[t,w]]")
            key = (n - l, k - l, l)
            J1[key] = J1.get(key, 0) + c

    # J2 = u (w J1(w) - y J1(y)) / (w - y) - u (C(w) - 1), y = tu
    J2 = {}
    for (tt, uu, ll), c in J1.items():
        for i in range(min(ll, D) + 1):
            te = tt + ll - i
            if te > max_n:
                continue
            key = (te, uu + 1 + ll - i, i)
            J2[key] = J2.get(key, 0) + c
    for i in range(1, D + 1):
        key = (0, 1, i)
        J2[key] = J2.get(key, 0) - catalan(i)
    leftover = {k: c for k, c in J2.items() if k[0] == 0 and c}
    if leftover:
        raise InvariantViolation(f"t^0 part of J2 does not cancel: {leftover}")

    # u -> x+1, w -> a (1+a)^(-2), truncated at a^D
    def w_power(i):
        if i == 0:
            return {0: 1}
        return {i + k: (-1) ** k * comb(2 * i + k - 1, k) for k in range(D - i + 1)}

    Q = szero(max_n)
    for (te, uu, i), c in J2.items():
        if not c or te == 0:
            continue
        wp = w_power(i)
        for bx in range(uu + 1):
            cx = c * comb(uu, bx)
            for ae, ca in wp.items():
                key = (bx, ae)
                Q[te][key] = Q[te].get(key, 0) + cx * ca
    return [padd(p) for p in Q]


def truncate_a(p, D):
    return {k: c for k, c in p.items() if k[1] <= D}


def recurrence_polys(T: int):
    """Q_1..Q_T as exact polynomials straight from the coefficient recurrence."""
    Q = szero(T)
    Q[1] = pmul({(0, 0): 1, (1, 0): 2, (2, 0): 1}, {(0, 0): 1, (0, 1): 2, (0, 2): 1})
    one_x = {(0, 0): 1, (1, 0): 1}
    one_a_sq = {(0, 0): 1, (0, 1): 2, (0, 2): 1}

    def A(j):
        return {k: c for k, c in Q[j].items() if k[1] > 0}

    def B(j):
        return {k: c for k, c in Q[j].items() if k[0] > 0}

    for n in range(2, T + 1):
        head = pmul(pmul(one_x, one_a_sq), pshift(A(n - 1), 0, -1))
        mid = pmul(one_x, pshift(Q[n - 1], 0, 1))
        conv = padd(*[pmul(A(j), B(n - 1 - j)) for j in range(1, n - 1)]) if n > 2 else {}
        tail = pmul(one_x, pshift(conv, -1, 0))
        Q[n] = padd(head, mid, tail)
    return Q


def Q_at_origin(Q):
    return [p.get((0, 0), 0) for p in Q[1:]]
