import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stacksort.crt import certify, crt_combine
from stacksort.engine import compute_series
from stacksort.errors import LevelOrderError, ResourceBudgetError
from stacksort.exact import ExactGrid, reference_compute_exact
from stacksort.modular import (ModularRun, boundary_interpolation, compute_series_mod_p,
                               footprint_bytes, recurrence_step)
from stacksort.primes import PrimePlan, generate_primes, is_prime_u32, plan_primes
from stacksort.series import CoefficientSeries, read_series, write_series

HISTORICAL = [1, 2, 6, 24, 114, 606, 3494, 21426, 137901, 922862, 6377818,
              45281958, 328969075]
P1 = 4294967291


def test_generate_primes():
    assert generate_primes(1) == [P1]
    assert generate_primes(2) == [P1, 4294967279]
    assert generate_primes(0) == []


@given(st.integers(min_value=2, max_value=200_000))
@settings(max_examples=200)
def test_primality_against_trial_division(n):
    trial = n > 1 and all(n % d for d in range(2, math.isqrt(n) + 1))
    assert is_prime_u32(n) == trial


def test_plan_sizes():
    assert plan_primes(1, safety_digits=0).k == 1
    assert plan_primes(200).k == 24
    plan = plan_primes(1000)
    assert math.log10(plan.product_P) > 1000 * math.log10(10.5) + 20
    # 105 top primes give P ~ 2.9e1011
    P105 = math.prod(generate_primes(105))
    assert len(str(P105)) == 1012 and round(int(str(P105)[:3]) / 100, 1) == 2.9


def test_plan_rejects_small_primes():
    with pytest.raises(ValueError):
        PrimePlan([7, 5], 4)
    with pytest.raises(ValueError):
        PrimePlan([5, 7], 1)


def test_level_values():
    run = ModularRun(4, P1)
    Q1 = run.interior(1)
    assert Q1[0, 0] == 16                  # Q_1(1,1) = 2^2 2^2
    run.step()
    assert run.interior(2)[0, 0] == 128    # 2 (1+x)^3 (1+a)^3 at (1,1)
    run.step()
    assert run.output == [1, 2, 6]


def test_level_order_enforced():
    run = ModularRun(4, P1)
    with pytest.raises(LevelOrderError):
        recurrence_step(run, 3)
    with pytest.raises(LevelOrderError):
        run.interior(3)


def test_memory_budget():
    assert footprint_bytes(200) == pytest.approx(8 * 200 * 202**2, rel=0.05)
    with pytest.raises(ResourceBudgetError):
        ModularRun(200, P1, memory_budget=10**6)


def test_boundary_interpolation():
    row = [(1 + 1) ** 2 * (j + 1) ** 2 for j in range(1, 4)]
    assert boundary_interpolation(row, 1) == 4
    for x in range(4):
        row = [2 * (1 + x) ** 3 * (1 + j) ** 3 for j in range(1, 5)]
        assert boundary_interpolation(row, 2) == 2 * (1 + x) ** 3
        assert boundary_interpolation(row, 2, P1) == 2 * (1 + x) ** 3 % P1
    assert boundary_interpolation([0] * 6, 4) == 0
    with pytest.raises(ValueError):
        boundary_interpolation([1, 2], 2)


def test_small_runs():
    assert compute_series_mod_p(4, P1) == [1, 2, 6, 24]
    assert compute_series_mod_p(1, 5) == [1]
    assert reference_compute_exact(2).coeffs == [1, 2]
    assert reference_compute_exact(13).coeffs == HISTORICAL


def test_modular_matches_exact_mod_p():
    exact = reference_compute_exact(25).coeffs
    for p in (P1, 1_000_003, 101):
        assert compute_series_mod_p(25, p) == [w % p for w in exact]


def test_alternating_binomial_identity():
    # recompute the j = 0 column from the others and compare with the stored boundary
    run = ModularRun(8, P1)
    run.run()
    for n in range(1, 9):
        Q = run.interior(n)
        m = n + 2
        for x in (0, 3, 9):
            total = int(run.boundary_x0[n, x + 1])
            total = sum((-1) ** j * math.comb(m, j) * int(Q[x, j - 1]) for j in range(1, m + 1)) \
                + total
            assert total % P1 == 0


def test_degree_bound_in_exact_engine():
    g = ExactGrid(16)
    g.run()
    for n in range(1, 16):
        for x in (0, 1, 5):
            pts = list(range(1, n + 3))
            target = n + 3
            pred = Fraction(0)
            for i in pts:
                li = Fraction(1)
                for j in pts:
                    if j != i:
                        li *= Fraction(target - j, i - j)
                pred += li * g.q[n][x][i]
            assert pred == g.q[n][x][target]


def test_crt_combine():
    plan = PrimePlan([7, 5], 1)
    assert crt_combine([[1], [3]], plan).coeffs == [8]
    single = PrimePlan([P1], 3)
    assert crt_combine([[5, 6, 7]], single).coeffs == [5, 6, 7]
    with pytest.raises(ValueError):
        crt_combine([[1], [3, 4]], plan)
    with pytest.raises(ValueError):
        crt_combine([[1]], plan)


@given(st.lists(st.integers(min_value=0), min_size=1, max_size=6))
def test_crt_round_trip(values):
    plan = PrimePlan(generate_primes(4), 6)
    vals = [v % plan.product_P for v in values]
    res = [[v % p for v in vals] for p in plan.primes]
    s = crt_combine(res, plan)
    assert s.coeffs == vals
    assert [[w % p for w in s.coeffs] for p in plan.primes] == res


def test_certify():
    plan = PrimePlan(generate_primes(2), 13)
    s = crt_combine([[w % p for w in HISTORICAL] for p in plan.primes], plan)
    assert s.coeffs == HISTORICAL
    rep = certify(s, plan)
    assert rep.passed and s.provenance == "exact-certified"
    bad = CoefficientSeries("w", [1, plan.product_P - 1])
    assert not certify(bad, plan).passed
    assert bad.provenance == "exact-uncertified"


def test_compute_series_and_resume(tmp_path):
    first = compute_series(30, checkpoint_dir=tmp_path)
    assert first.report.passed
    assert first.series.coeffs == reference_compute_exact(30).coeffs
    again = compute_series(30, checkpoint_dir=tmp_path)
    assert sorted(again.resumed) == sorted(first.plan.primes)
    assert again.series.coeffs == first.series.coeffs
    # a corrupted checkpoint is recomputed, not trusted
    victim = next(tmp_path.glob("residues_*"))
    victim.write_text(victim.read_text().replace("\n2 ", "\n2 x"))
    third = compute_series(30, checkpoint_dir=tmp_path)
    assert third.series.coeffs == first.series.coeffs
    assert len(third.resumed) == len(first.plan.primes) - 1


def test_top_up_after_failed_certification():
    # two primes cannot hold w_40 ~ 10^37, so the engine must add primes
    res = compute_series(40, PrimePlan(generate_primes(2), 40))
    assert res.report.passed and res.plan.k > 2
    assert res.series.coeffs == reference_compute_exact(40).coeffs


def test_thread_count_does_not_change_output():
    a = compute_series(20, threads=1).series.coeffs
    b = compute_series(20, threads=3).series.coeffs
    assert a == b


def test_counting_invariants():
    s = CoefficientSeries("w", HISTORICAL)
    assert s.check_counting_invariants() == []
    assert CoefficientSeries("w", [1, 2, 7]).check_counting_invariants()


def test_series_file_round_trip(tmp_path):
    s = CoefficientSeries("w", HISTORICAL, "exact-certified")
    path = write_series(s, tmp_path / "w.txt")
    assert path.read_text().splitlines()[0] == "stacksort-coeffs v1 N=13 provenance=exact-certified"
    back = read_series(path)
    assert back.coeffs == HISTORICAL and back.provenance == "exact-certified"
    assert back[13] == 328969075
    with pytest.raises(IndexError):
        back[0]
