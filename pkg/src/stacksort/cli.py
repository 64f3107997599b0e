"""Command line entry point: ``stacksort <subcommand>``.

Exit codes: 0 success, 1 usage error, 2 certification failure,
3 invariant failure, 4 resource error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import time
from dataclasses import asdict, dataclass
from math import comb
from pathlib import Path

import mpmath

from . import __version__
from .errors import (EnsembleError, InvariantViolation, ResourceBudgetError,
                     StackSortError)
from .series import CoefficientSeries, read_series, write_series

log = logging.getLogger("stacksort")

EXIT_OK, EXIT_USAGE, EXIT_CERT, EXIT_INVARIANT, EXIT_RESOURCE = 0, 1, 2, 3, 4

# first terms, as known before the modular computation
HISTORICAL = [1, 2, 6, 24, 114, 606, 3494, 21426, 137901, 922862, 6377818,
              45281958, 328969075]

DEFAULT_ORDERS = (2, 3, 4, 5, 6, 7, 8)
TABLE_PREFIXES = (125, 250, 500, 750, 1000)


@dataclass
class RunConfig:
    N: int = 1
    prime_count: int | None = None
    threads: int = 1
    memory_budget_bytes: int | None = None
    precision_digits: int = 50
    output_dir: str = "."
    resume: bool = False

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if self.precision_digits < 30:
            raise ValueError("precision_digits must be >= 30")

    def digest(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _env_int(name):
    v = os.environ.get(name)
    if v in (None, ""):
        return None
    try:
        return int(v)
    except ValueError:
        raise SystemExit(f"{name}={v!r} is not an integer") from None


def make_config(args, N: int = 1) -> RunConfig:
    """Flags win over STACKSORT_THREADS / STACKSORT_PRECISION, which win over defaults."""
    threads = getattr(args, "threads", None) or _env_int("STACKSORT_THREADS") or 1
    prec = getattr(args, "precision", None) or _env_int("STACKSORT_PRECISION") or 50
    return RunConfig(
        N=N,
        prime_count=getattr(args, "primes", None),
        threads=threads,
        memory_budget_bytes=getattr(args, "memory_budget", None),
        precision_digits=prec,
        output_dir=str(getattr(args, "output_dir", None) or "."),
        resume=bool(getattr(args, "resume", False)),
    )


def write_manifest(cfg: RunConfig, command: str, payload: dict, name="manifest.json") -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    doc = {"tool": "stacksort", "version": __version__, "command": command,
           "config": asdict(cfg), "config_hash": cfg.digest(), **payload}
    path = out / name
    path.write_text(json.dumps(doc, indent=2, default=str) + "\n")
    return path


def _load(path) -> CoefficientSeries:
    s = read_series(path)
    if s.N < 1:
        raise InvariantViolation(f"{path}: empty series")
    return s


# -- compute ---------------------------------------------------------------

def cmd_compute(cfg: RunConfig) -> int:
    from .engine import compute_series
    from .primes import plan_primes, generate_primes, PrimePlan

    plan = plan_primes(cfg.N)
    if cfg.prime_count:
        plan = PrimePlan(generate_primes(cfg.prime_count), cfg.N)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    ckpt = out / "checkpoints"
    if not cfg.resume and ckpt.exists():
        for f in ckpt.glob("*"):
            f.unlink()
    t0 = time.perf_counter()
    res = compute_series(cfg.N, plan, threads=cfg.threads,
                         memory_budget=cfg.memory_budget_bytes, checkpoint_dir=ckpt)
    path = write_series(res.series, out / f"w3_N{cfg.N}.txt")
    write_manifest(cfg, "compute", {"series_file": path.name, "elapsed_s": time.perf_counter() - t0,
                                    **res.manifest()})
    if not res.report.passed:
        print(f"certification FAILED after top-ups (margin log10 {res.report.margin_log10}); "
              "rerun with --primes set higher", file=sys.stderr)
        return EXIT_CERT
    print(f"wrote {path} ({res.series.provenance}, {len(plan.primes)}+ primes)")
    return EXIT_OK


# -- verify ----------------------------------------------------------------

def oracle_suite(cap: int = 8, coeffs: CoefficientSeries | None = None) -> list[tuple]:
    """(name, passed, detail) rows for every oracle invariant up to ``cap``."""
    from itertools import permutations

    from .engine import compute_series
    from .exact import reference_compute_exact
    from .oracle import funceq
    from .oracle.perms import (catalan, count_sortable, is_k_stack_sortable,
                               preimage_count_brute, preimage_count_decomposition,
                               west_check)

    rows = []

    def check(name, fn):
        try:
            ok, detail = fn()
        except StackSortError as e:
            ok, detail = False, f"{type(e).__name__}: {e}"
        rows.append((name, bool(ok), detail))

    n_enum = min(cap, 10)
    brute = [count_sortable(n, 3) for n in range(1, n_enum + 1)]

    def one_stack():
        bad = [n for n in range(1, n_enum + 1) if count_sortable(n, 1) != catalan(n)]
        return not bad, f"n<= {n_enum}" + (f"; mismatch at {bad}" if bad else "")

    def two_stack():
        f = lambda n: 2 * comb(3 * n, n) // ((n + 1) * (2 * n + 1))
        bad = [n for n in range(1, min(cap, 7) + 1) if count_sortable(n, 2) != f(n)]
        return not bad, f"n<= {min(cap, 7)}" + (f"; mismatch at {bad}" if bad else "")

    def west():
        n = min(cap, 7)
        bad = next((p for p in permutations(range(1, n + 1))
                    if west_check(p) != is_k_stack_sortable(p, 2)), None)
        return bad is None, f"S_{n}" + (f"; counterexample {bad}" if bad else "")

    def historical():
        bad = [n for n in range(1, n_enum + 1) if brute[n - 1] != HISTORICAL[n - 1]]
        return not bad, f"n<= {n_enum}" + (f"; mismatch at {bad}" if bad else "")

    def modular():
        got = compute_series(n_enum).series.coeffs
        return got == brute, f"N={n_enum}" + ("" if got == brute else f"; got {got}")

    def exact_engine():
        n = min(max(cap, 6), 20)
        a = reference_compute_exact(n).coeffs
        b = compute_series(n).series.coeffs
        return a == b, f"N={n}"

    def decomposition():
        n = min(cap, 6)
        bad = next((p for p in permutations(range(1, n + 1))
                    if (catalan(n) if p == tuple(range(1, n + 1)) else
                        preimage_count_decomposition(p)) != preimage_count_brute(p)), None)
        return bad is None, f"S_{n}" + (f"; mismatch at {bad}" if bad else "")

    def feq():
        r = funceq.verify_functional_equation(min(cap, 7))
        return r.passed, f"order {r.max_n}" + (f"; bad orders {r.mismatched_orders}"
                                               if not r.passed else "")

    def q_chain():
        T = min(cap, 6)
        Q = funceq.transform_to_Q(T)
        R = funceq.recurrence_polys(T)
        q1 = {(i, j): comb(2, i) * comb(2, j) for i in range(3) for j in range(3)}
        q2 = {(i, j): 2 * comb(3, i) * comb(3, j) for i in range(4) for j in range(4)}
        problems = []
        if funceq.padd(Q[1]) != q1:
            problems.append("Q1")
        if T >= 2 and funceq.padd(Q[2]) != q2:
            problems.append("Q2")
        for n in range(1, T + 1):
            if funceq.padd(Q[n]) != funceq.padd(funceq.truncate_a(R[n], n + 1)):
                problems.append(f"Q{n} vs recurrence")
        if funceq.Q_at_origin(Q) != HISTORICAL[:T]:
            problems.append("Q(t,0,0) != W(t)")
        return not problems, f"order {T}" + (f"; {problems}" if problems else "")

    check("count_sortable(n,1) = Catalan", one_stack)
    check("count_sortable(n,2) = 2/((n+1)(2n+1)) C(3n,n)", two_stack)
    check("West characterisation of 2-stack-sortable", west)
    check("brute-force W3(n) = historical prefix", historical)
    check("modular pipeline = brute force", modular)
    check("exact engine = modular pipeline", exact_engine)
    check("decomposition lemma = brute preimages", decomposition)
    check("functional equation for J", feq)
    check("J -> Q transform, Q1, Q2, Q(t,0,0)", q_chain)

    if coeffs is not None:
        def file_check():
            k = min(coeffs.N, n_enum)
            bad = [n for n in range(1, k + 1) if coeffs[n] != brute[n - 1]]
            bad += [n for n in range(k + 1, min(coeffs.N, 13) + 1) if coeffs[n] != HISTORICAL[n - 1]]
            viol = coeffs.check_counting_invariants() if coeffs.is_exact else []
            return not bad and not viol, (f"mismatch at n={bad}" if bad else
                                          "; ".join(viol[:3]) or f"first {min(coeffs.N, 13)} terms")
        check("coefficient file vs oracle", file_check)
    return rows


def cmd_verify(cap: int, coeff_file=None) -> int:
    coeffs = _load(coeff_file) if coeff_file else None
    rows = oracle_suite(cap, coeffs)
    width = max(len(r[0]) for r in rows)
    for name, ok, detail in rows:
        print(f"{'PASS' if ok else 'FAIL'}  {name:<{width}}  {detail}")
    return EXIT_OK if all(ok for _, ok, _ in rows) else EXIT_INVARIANT


# -- analyze / export-plot -------------------------------------------------

def _mu_guess(s: CoefficientSeries):
    # last linear intercept: crude, but much closer than the last ratio
    c = [mpmath.mpf(v) for v in s.coeffs[-3:]]
    n = s.N
    return n * c[2] / c[1] - (n - 1) * c[1] / c[0]


def cmd_export_plot(s: CoefficientSeries, outdir, mu=None, alpha=2, beta=-2,
                    precision: int = 60) -> list[Path]:
    from .asymptotics import estimator_suite, export_csvs

    if s.N < 10:
        raise InvariantViolation(f"{s.N} terms are too few for the estimator suite")
    with mpmath.workdps(precision):
        mu = mpmath.mpf(mu) if mu is not None else _mu_guess(s)
        est = estimator_suite(s, mu, alpha, beta, precision)
        return export_csvs(est, outdir)


def singularity_table(s: CoefficientSeries, orders, prefixes, precision: int = 50,
                      max_members: int = 24) -> list[dict]:
    from .diffapprox import default_family, ensemble_scan

    rows = []
    for K in prefixes:
        f = [1] + list(s.coeffs[:K])
        for M in orders:
            specs = default_family(M, len(f), max_members=max_members)
            if len(specs) < 10:
                raise EnsembleError(f"{K} terms are too few for order {M}")
            t0 = time.perf_counter()
            r = ensemble_scan(f, specs, precision)
            row = {"terms": K, "order": M, "elapsed_s": round(time.perf_counter() - t0, 2),
                   **r.summary()}
            log.info("K=%d M=%d x_c=%s exponent=%s", K, M, row["x_c"], row["exponent"])
            rows.append(row)
    return rows


def cmd_analyze(s: CoefficientSeries, cfg: RunConfig, orders, prefixes, mu=None,
                alpha=2, beta=-2, max_members=24) -> dict:
    from .asymptotics import ratios, windowed_fit_ratios

    if not s.is_exact:
        log.warning("analysing approximate coefficients")
    out = Path(cfg.output_dir)
    prefixes = [K for K in (prefixes or [K for K in TABLE_PREFIXES if K < s.N] + [s.N])
                if K <= s.N]
    table = singularity_table(s, orders, prefixes, cfg.precision_digits, max_members)
    best = next((r for r in reversed(table) if r["x_c"] is not None), None)
    summary = {"terms": s.N, "provenance": s.provenance}
    if best:
        with mpmath.workdps(cfg.precision_digits):
            xc = mpmath.mpf(best["x_c"])
            summary.update(x_c=best["x_c"], mu=mpmath.nstr(1 / xc, 15),
                           exponent=best["exponent"], from_order=best["order"],
                           from_terms=best["terms"])
    if mu is None and best:
        mu = 1 / mpmath.mpf(best["x_c"])
    summary["mu_used_for_estimators"] = None if mu is None else mpmath.nstr(mpmath.mpf(mu), 15)
    files = cmd_export_plot(s, out / "estimators", mu, alpha, beta,
                            max(cfg.precision_digits, 60))
    if s.N >= 12 and mu is not None:
        with mpmath.workdps(max(cfg.precision_digits, 60)):
            t1 = windowed_fit_ratios(ratios(s), mpmath.mpf(mu))["t1r"].values[-1]
            summary["alpha_from_ratio_fit"] = mpmath.nstr(-t1 - 1, 8)
    report = {"singularities": table, "summary": summary,
              "estimator_files": [str(p.relative_to(out)) for p in files]}
    (out / "singularities.json").write_text(json.dumps(report, indent=2) + "\n")
    return report


# -- extend ----------------------------------------------------------------

def cmd_extend(s: CoefficientSeries, target: int, threshold: float, cfg: RunConfig,
               order: int = 6, max_members: int = 24) -> Path:
    from .diffapprox import default_family, extend_series, fit_members

    if not s.is_exact:
        raise InvariantViolation("extension needs an exact input series")
    if target <= s.N:
        raise ValueError(f"target {target} must exceed the {s.N} known terms")
    f = [1] + list(s.coeffs)
    specs = default_family(order, len(f), max_members=max_members)
    if len(specs) < 10:
        raise EnsembleError(f"{s.N} terms are too few for order {order}")
    prec = max(cfg.precision_digits, 60)
    with mpmath.workdps(prec):
        members = fit_members(f, specs, cfg.precision_digits)
        approx = [m.approximant for m in members if m.approximant is not None]
        if not approx:
            raise EnsembleError("no approximant could be fitted")
        res = extend_series(f, approx, target, threshold, prec)
        ext = res.to_series(s.coeffs, f"{s.name}-extended")
        out = Path(cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = write_series(ext, out / f"{s.name}_extended_{ext.N}.txt")
    digits = [float(d) for d in res.declared_digits]
    write_manifest(cfg, "extend", {
        "input_terms": s.N, "target": target, "reached": ext.N, "stopped_at": res.stopped_at,
        "order": order, "members_used": res.members_used, "discarded": res.discarded,
        "min_declared_digits": min(digits) if digits else None,
        "series_file": path.name}, name="extend_manifest.json")
    print(f"wrote {path}: terms {s.N + 1}..{ext.N}, worst declared digits "
          f"{min(digits):.1f}" if digits else f"wrote {path}: no terms met the threshold")
    return path


# -- bounds ----------------------------------------------------------------

def cmd_bounds(s: CoefficientSeries, cfg: RunConfig | None = None) -> dict:
    from .bounds import bounds_report

    rep = bounds_report(s, precision=cfg.precision_digits if cfg else 50)
    rep["rigorous"] = s.provenance == "exact-certified"
    return rep


# -- argument handling -----------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text):
    return [int(t) for t in text.split(",") if t]


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="stacksort", description="3-stack-sortable permutation series workbench")
    p.add_argument("--version", action="version", version=f"stacksort {__version__}")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, threads=False):
        sp.add_argument("--precision", type=int, help="working digits (env STACKSORT_PRECISION)")
        sp.add_argument("--output-dir", "-o", default=".")
        if threads:
            sp.add_argument("--threads", type=int, help="workers (env STACKSORT_THREADS)")

    c = sub.add_parser("compute", help="compute and certify w_1..w_N")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--primes", type=int, help="override the planned prime count")
    c.add_argument("--memory-budget", type=int, help="bytes")
    c.add_argument("--resume", action="store_true", help="reuse per-prime checkpoints")
    common(c, threads=True)

    v = sub.add_parser("verify", help="run the oracle suite")
    v.add_argument("--cap", type=int, default=8, help="largest n enumerated")
    v.add_argument("--coeffs", help="also check this coefficient file")

    a = sub.add_parser("analyze", help="differential approximants and estimator CSVs")
    a.add_argument("coeff_file")
    a.add_argument("--orders", type=_int_list, default=list(DEFAULT_ORDERS))
    a.add_argument("--prefixes", type=_int_list, help="prefix lengths (default table columns)")
    a.add_argument("--mu", type=str)
    a.add_argument("--alpha", type=float, default=2)
    a.add_argument("--beta", type=float, default=-2)
    a.add_argument("--max-members", type=int, default=24)
    common(a, threads=True)

    e = sub.add_parser("extend", help="predict further coefficients")
    e.add_argument("coeff_file")
    e.add_argument("--target", type=int, required=True)
    e.add_argument("--threshold", type=float, default=0, help="minimum declared digits")
    e.add_argument("--order", type=int, default=6)
    e.add_argument("--max-members", type=int, default=24)
    common(e, threads=True)

    b = sub.add_parser("bounds", help="rigorous lower bounds and conjecture checks")
    b.add_argument("coeff_file")
    common(b)

    x = sub.add_parser("export-plot", help="write estimator CSVs (plot data)")
    x.add_argument("coeff_file")
    x.add_argument("--mu", type=str)
    x.add_argument("--alpha", type=float, default=2)
    x.add_argument("--beta", type=float, default=-2)
    common(x)
    return p


def run(args) -> int:
    cmd = args.command
    if cmd == "compute":
        return cmd_compute(make_config(args, N=args.n))
    if cmd == "verify":
        return cmd_verify(args.cap, args.coeffs)
    s = _load(args.coeff_file)
    cfg = make_config(args, N=args.target if cmd == "extend" else s.N)
    if cmd == "analyze":
        rep = cmd_analyze(s, cfg, args.orders, args.prefixes, args.mu, args.alpha, args.beta,
                          args.max_members)
        write_manifest(cfg, "analyze", {"input": args.coeff_file, "summary": rep["summary"]},
                       name="analyze_manifest.json")
        print(json.dumps(rep["summary"], indent=2))
    elif cmd == "extend":
        cmd_extend(s, args.target, args.threshold, cfg, args.order, args.max_members)
    elif cmd == "bounds":
        rep = cmd_bounds(s, cfg)
        write_manifest(cfg, "bounds", {"input": args.coeff_file, "bounds": rep},
                       name="bounds_manifest.json")
        print(json.dumps(rep, indent=2))
    elif cmd == "export-plot":
        files = cmd_export_plot(s, cfg.output_dir, args.mu, args.alpha, args.beta,
                                max(cfg.precision_digits, 60))
        for f in files:
            print(f)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return run(args)
    except (ResourceBudgetError, MemoryError) as e:
        print(f"resource error: {e}\nhint: lower --threads, raise --memory-budget, "
              "or reduce --n", file=sys.stderr)
        return EXIT_RESOURCE
    except (InvariantViolation, EnsembleError) as e:
        print(f"invariant failure: {e}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ValueError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except StackSortError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
