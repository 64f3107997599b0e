from itertools import permutations
from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stacksort.errors import ResourceBudgetError
from stacksort.oracle import funceq
from stacksort.oracle.perms import (catalan, count_indecomposable_sortable, count_sortable,
                                    is_k_stack_sortable, is_sum_indecomposable,
                                    preimage_count_brute, preimage_count_decomposition,
                                    stack_sort, stats, west_check)

W3 = [1, 2, 6, 24, 114, 606, 3494, 21426, 137901, 922862]


def test_stack_sort_examples():
    assert stack_sort((2, 3, 1)) == (2, 1, 3)
    assert stack_sort((1, 2, 3)) == (1, 2, 3)
    assert stack_sort((3, 2, 1)) == (1, 2, 3)
    assert stack_sort(()) == ()


@given(st.permutations(list(range(1, 8))))
def test_stack_sort_ends_with_max(p):
    out = stack_sort(tuple(p))
    assert out[-1] == 7
    assert sorted(out) == sorted(p)


@given(st.permutations(list(range(1, 8))))
def test_n_minus_one_passes_sort_everything(p):
    assert is_k_stack_sortable(tuple(p), 6)


def test_counts_one_and_two_stacks():
    for n in range(1, 9):
        assert count_sortable(n, 1) == catalan(n)
    for n in range(1, 8):
        assert count_sortable(n, 2) == 2 * comb(3 * n, n) // ((n + 1) * (2 * n + 1))


def test_three_stack_counts():
    assert [count_sortable(n, 3) for n in range(1, 10)] == W3[:9]


def test_enumeration_cap():
    with pytest.raises(ResourceBudgetError):
        count_sortable(11, 3)


def test_west_characterisation_on_s7():
    for p in permutations(range(1, 8)):
        assert west_check(p) == is_k_stack_sortable(p, 2)


def test_decomposition_lemma_on_s6():
    for p in permutations(range(1, 7)):
        if p == tuple(range(1, 7)):
            continue
        assert preimage_count_decomposition(p) == preimage_count_brute(p)


def test_identity_preimages_are_catalan():
    for n in range(1, 7):
        assert preimage_count_brute(tuple(range(1, n + 1))) == catalan(n)


def test_stats_examples():
    assert stats((1, 4, 5, 3, 2, 6)).leg == 5
    assert [stats(p).tl for p in ((2, 3, 1, 4, 5), (2, 3, 1, 5, 4), (1, 2, 3, 4, 5))] == [2, 0, 5]
    s = stats((4, 2, 6, 3, 1, 5, 7, 8, 9))
    assert s.tail_bound_descents == (3,) and s.c_index == 3


def test_west_examples():
    assert west_check((4, 1, 6, 3, 5, 2))
    assert not west_check((2, 3, 4, 1))


def test_indecomposable_counts():
    assert is_sum_indecomposable((2, 1))
    assert not is_sum_indecomposable((1, 2))
    assert [count_indecomposable_sortable(n) for n in range(1, 6)] == [1, 1, 3, 13, 65]


def test_functional_equation_identity():
    assert funceq.verify_functional_equation(7).passed


def test_functional_equation_detects_corruption():
    J = funceq.compute_J_truncated(5)
    J[4] = dict(J[4])
    key = next(iter(J[4]))
    J[4][key] += 1
    rep = funceq.verify_functional_equation(5, J)
    assert not rep.passed and 4 in rep.mismatched_orders


def test_transform_chain():
    Q = funceq.transform_to_Q(6)
    q1 = {(i, j): comb(2, i) * comb(2, j) for i in range(3) for j in range(3)}
    q2 = {(i, j): 2 * comb(3, i) * comb(3, j) for i in range(4) for j in range(4)}
    assert funceq.padd(Q[1]) == q1
    assert funceq.padd(Q[2]) == q2
    assert funceq.Q_at_origin(Q) == W3[:6]
    R = funceq.recurrence_polys(6)
    for n in range(1, 7):
        assert funceq.padd(Q[n]) == funceq.padd(funceq.truncate_a(R[n], n + 1))
