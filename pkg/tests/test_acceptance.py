"""Acceptance criteria, one PASS/FAIL line each (collected in the terminal summary).

Slow: criteria 4 and 6 to 9 need the certified 300-term series, which the
``certified_series`` fixture computes once (about 4 minutes) and caches.
"""
import os
import time
from itertools import permutations
from math import comb

import mpmath
import pytest

from stacksort.bounds import bona_checks, indecomposable_bound, root_bound
from stacksort.cli import HISTORICAL
from stacksort.diffapprox import (default_family, ensemble_scan, extend_series, fit_members,
                                  make_test_series, satellites)
from stacksort.engine import compute_series
from stacksort.exact import reference_compute_exact
from stacksort.oracle import funceq
from stacksort.oracle.perms import (catalan, count_sortable, preimage_count_brute,
                                    preimage_count_decomposition)

pytestmark = pytest.mark.slow


def test_criterion_1_oracle_equivalence(record):
    t0 = time.perf_counter()
    got = compute_series(10).series.coeffs
    elapsed = time.perf_counter() - t0
    brute = [count_sortable(n, 3) for n in range(1, 11)]
    ok = got == brute and elapsed < 120
    record(1, ok, f"N=10 modular == brute force: {got == brute}; pipeline {elapsed:.1f}s (< 120s)")
    assert ok


def test_criterion_2_historical_prefix(record):
    res = compute_series(13)
    ok = res.series.coeffs == HISTORICAL and res.report.passed
    record(2, ok, f"N=13 reproduces the 13-term sequence ending {res.series.coeffs[-1]}")
    assert ok


def test_criterion_3_exact_engine(record):
    exact = reference_compute_exact(40).coeffs
    modular = compute_series(40).series.coeffs
    ok = exact == modular
    first_bad = next((n for n, (a, b) in enumerate(zip(exact, modular), 1) if a != b), None)
    record(3, ok, f"exact engine vs modular+CRT at N=40: first mismatch {first_bad}")
    assert ok


def test_criterion_4_root_bound(record, certified_series):
    rb = root_bound(certified_series.prefix(174))
    got = mpmath.nstr(rb.bound_value, 7)
    ok = got == "8.659702" and rb.certified
    record(4, ok, f"w_174^(1/174) = {mpmath.nstr(rb.bound_value, 12)} (want 8.659702)")
    assert ok


def test_criterion_5_calibration(record):
    f = make_test_series("log-test", 150, precision=50)
    res = ensemble_scan(f, default_family(3, 150))
    with mpmath.workdps(50):
        sats = satellites(res)
        xc_ok = res.ok and abs(res.location - mpmath.mpf("0.9999995")) <= 1e-6
        ex_ok = res.ok and abs(res.exponent - mpmath.mpf("2.462")) <= 0.02
        near = [s for s in sats if abs(s.location - mpmath.mpf("1.000004")) <= 2e-6]
        far = [s for s in sats if abs(s.location - mpmath.mpf("1.022")) <= 5e-3]
        found = ", ".join(f"{mpmath.nstr(s.location, 8)} ({s.support:.2f})" for s in sats)
    ok = xc_ok and ex_ok and bool(near) and bool(far)
    record(5, ok, f"x_c={res.summary()['x_c']} exponent={res.summary()['exponent'][:7]} "
                  f"satellites: [{found}]; 1.000004 found: {bool(near)}, 1.022 found: {bool(far)}")
    assert ok


def test_criterion_6_table_cell_250(record, certified_series):
    t0 = time.perf_counter()
    f = [1] + certified_series.coeffs[:250]
    res = ensemble_scan(f, default_family(4, len(f)), precision=50)
    elapsed = time.perf_counter() - t0
    with mpmath.workdps(50):
        xc_ok = res.ok and abs(res.location - mpmath.mpf("0.1030966482")) <= 2e-9
        ex_ok = res.ok and 2.34 <= res.exponent <= 2.40
    ok = xc_ok and ex_ok and elapsed < 600
    s = res.summary()
    record(6, ok, f"250 terms, order 4: x_c={s['x_c']} exponent={(s['exponent'] or '')[:6]} "
                  f"({elapsed:.0f}s, limit 600s)")
    assert ok


@pytest.fixture(scope="module")
def extension_174(certified_series):
    f = [1] + certified_series.coeffs[:174]
    with mpmath.workdps(60):
        members = [m.approximant for m in fit_members(f, default_family(6, len(f)))
                   if m.approximant is not None]
    return f, members


def test_criterion_7_extension_fidelity(record, certified_series, extension_174):
    f, members = extension_174
    res = extend_series(f, members, 300, precision=60)
    with mpmath.workdps(60):
        exact = certified_series[300]
        digits = -mpmath.log10(abs(res.value(300) - exact) / exact)
        ok = digits >= 25
        record(7, ok, f"w_300 from 174 terms: {mpmath.nstr(digits, 4)} matching digits (>= 25), "
                      f"declared {mpmath.nstr(res.declared_digits[-1], 4)}")
    assert ok


def test_extension_disjoint_subensembles(certified_series, extension_174):
    # a disjoint half of the ensemble stays within 3 declared stddevs of the full one
    f, members = extension_174
    full = extend_series(f, members, 300, precision=60)
    for half in (members[0::2], members[1::2]):
        sub = extend_series(f, half, 300, precision=60)
        with mpmath.workdps(60):
            for n in range(175, 301):
                assert abs(sub.value(n) - full.value(n)) < 3 * full.stddev[n - 175], n


def test_criterion_8_bound_logic_desk(record, certified_series):
    w = certified_series
    ib200 = indecomposable_bound(w.prefix(200))
    rb174 = root_bound(w.prefix(174))
    above = ib200.bound_value > rb174.bound_value
    prev, monotone, dominant = 0, True, True
    for N in range(10, 201, 10):
        ib = indecomposable_bound(w.prefix(N)).bound_value
        monotone &= ib > prev
        dominant &= ib >= root_bound(w, N).bound_value
        prev = ib
    bona = bona_checks(w)
    ok = above and monotone and dominant and bona.log_convex and ib200.certified
    record(8, ok, f"N=200 indecomposable bound {mpmath.nstr(ib200.bound_value, 8)} > "
                  f"N=174 root bound {mpmath.nstr(rb174.bound_value, 8)}: {above}; "
                  f"monotone {monotone}, dominant {dominant}, log-convex to n={w.N}: "
                  f"{bona.log_convex}")
    assert ok


@pytest.mark.fullscale
def test_criterion_8_full_scale(record):
    # hours of compute; opt-in only
    w = compute_series(1000, threads=os.cpu_count() or 1).series
    ib = indecomposable_bound(w)
    bona = bona_checks(w, ib)
    ok = mpmath.nstr(ib.bound_value, 5) == "9.4854" and bona.refuted and bona.log_convex
    record("8b", ok, f"N=1000 indecomposable bound {mpmath.nstr(ib.bound_value, 10)}, "
                     f"exceeds 256/27: {bona.refuted}")
    assert ok


def _planted_recovery_digits():
    """Worst agreement (in digits) of each estimator with its planted parameters."""
    from stacksort.asymptotics import (EstimatorSeries, amplitude_fit, beta_from_ratios,
                                       estimator_g, linear_intercepts, normalized_ratio_estimator,
                                       ratios, windowed_fit_coeffs, windowed_fit_ratios)
    worst = {}

    def note(name, values, want):
        d = min(-mpmath.log10(abs(v - want) / max(1, abs(want)) + mpmath.mpf(10) ** -55)
                for v in values)
        worst[name] = min(worst.get(name, 99), d)

    mu = mpmath.mpf("9.7")
    r = ratios([(n + 1) * mu**n for n in range(1, 200)])
    note("g", estimator_g(r, mu).values, 1)
    note("intercepts", linear_intercepts(r).values, mu)
    ns = list(range(50, 200))
    rr = EstimatorSeries("ratios", ns, [mu * (1 - 3 / mpmath.mpf(n) - 3 / (n * mpmath.log(n)))
                                        for n in ns])
    note("beta_ratio", beta_from_ratios(rr, mu, 2).values, -3)
    t = [mpmath.mpf(v) for v in ("0.4", "-3", "-3", "1.5", "-0.25")]
    c = [mpmath.mpf(1), mpmath.mpf(1)]
    for n in range(3, 200):
        L = mpmath.log(n)
        c.append(mpmath.exp(t[0] + t[1] * L + t[2] * mpmath.log(L) + t[3] / L + t[4] / L**2
                            + n * mpmath.log(mu)))
    for i, tr in enumerate(windowed_fit_coeffs(c, mu, 5).values()):
        note(f"t{i + 1}", tr.window(lo=50).values, t[i])
    e = [mpmath.mpf(v) for v in ("-3", "-3", "0.7", "2.5")]
    ns = list(range(2, 200))
    rv = EstimatorSeries("ratios", ns, [mu * (1 + (e[0] + e[1] / mpmath.log(n) + e[2] / mpmath.log(n) ** 2
                                                  + e[3] / mpmath.log(n) ** 3) / n) for n in ns])
    for i, tr in enumerate(windowed_fit_ratios(rv, mu, 4).values()):
        note(f"t{i + 1}r", tr.window(lo=50).values, e[i])
    s, w = mpmath.mpf(1), []
    for n in range(1, 200):
        if n > 1:
            s *= 1 - 3 / (n * mpmath.log(n))
        w.append(s * mu**n / mpmath.mpf(n) ** 3)
    note("Rn", normalized_ratio_estimator(w, mu).window(lo=50).values, -3)
    w = [5 * mu**n / mpmath.mpf(n) ** 6 for n in range(1, 200)]
    note("e1", amplitude_fit(w, mu, -2)["e1"].values, 5)
    return worst


def test_criterion_9_substitute(record, certified_series):
    with mpmath.workdps(60):
        worst = _planted_recovery_digits()
    synth_ok = min(worst.values()) >= 8
    f = [1] + certified_series.coeffs[:125]
    res = ensemble_scan(f, default_family(2, len(f)), precision=50)
    with mpmath.workdps(50):
        delta = abs(res.location - mpmath.mpf("0.10309660")) if res.ok else mpmath.inf
    # 2e-8 = two units in the last quoted digit; the cell's own last digit
    # moves by up to 3 units across orders at this length
    cell_ok = delta <= 2e-8
    ok = synth_ok and cell_ok
    record(9, ok, f"planted recovery worst {mpmath.nstr(min(worst.values()), 3)} digits "
                  f"({min(worst, key=worst.get)}); 125 terms, order 2: "
                  f"x_c={res.summary()['x_c']} |delta|={mpmath.nstr(delta, 3)} (<= 2e-8)")
    assert ok


def test_criterion_10_functional_equations(record):
    feq = funceq.verify_functional_equation(7)
    Q = funceq.transform_to_Q(6)
    q1 = {(i, j): comb(2, i) * comb(2, j) for i in range(3) for j in range(3)}
    q2 = {(i, j): 2 * comb(3, i) * comb(3, j) for i in range(4) for j in range(4)}
    chain = (funceq.padd(Q[1]) == q1 and funceq.padd(Q[2]) == q2
             and funceq.Q_at_origin(Q) == HISTORICAL[:6])
    decomp = all(
        (preimage_count_decomposition(p) if p != tuple(range(1, 7)) else catalan(6))
        == preimage_count_brute(p) for p in permutations(range(1, 7)))
    ok = bool(feq.passed) and chain and decomp
    record(10, ok, f"J identity to order 7: {feq.passed}; chain Q1, Q2, Q(t,0,0) to order 6: "
                   f"{chain}; decomposition on S6 (720): {decomp}")
    assert ok
