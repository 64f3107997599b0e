"""Multi-prime orchestration: plan, per-prime runs, CRT, certification.

Each finished prime is written to its own checkpoint file immediately, so an
interrupted run resumes by skipping primes already on disk.
"""
from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .crt import CertificationReport, certify, crt_combine
from .errors import ResourceBudgetError
from .modular import ModularRun, footprint_bytes
from .primes import PrimePlan, plan_primes
from .series import CoefficientSeries

log = logging.getLogger(__name__)


def checkpoint_path(directory, prime: int, N: int) -> Path:
    return Path(directory) / f"residues_p{prime}_N{N}.txt"


def write_checkpoint(path, prime: int, N: int, residues) -> None:
    path = Path(path)
    tmp = path.with_suffix(".tmp")
    body = [f"prime={prime} N={N}"] + [f"{n} {r}" for n, r in enumerate(residues, 1)]
    tmp.write_text("\n".join(body) + "\n")
    os.replace(tmp, path)


def read_checkpoint(path, prime: int, N: int) -> list[int] | None:
    """Residues from a checkpoint, or None if absent or for another run."""
    path = Path(path)
    if not path.exists():
        return None
    lines = path.read_text().split("\n")
    if lines[0].strip() != f"prime={prime} N={N}":
        return None
    try:
        res = [int(l.split()[1]) for l in lines[1:] if l.strip()]
    except (IndexError, ValueError):
        res = None
    if res is None or len(res) != N or any(not 0 <= r < prime for r in res):
        log.warning("discarding malformed checkpoint %s", path)
        return None
    return res


@dataclass
class RunResult:
    series: CoefficientSeries
    plan: PrimePlan
    report: CertificationReport
    wall_times: dict = field(default_factory=dict)
    resumed: list = field(default_factory=list)

    def manifest(self) -> dict:
        return {
            "N": self.series.N,
            "primes": self.plan.primes,
            "product_P": str(self.plan.product_P),
            "wall_time_per_prime_s": {str(p): t for p, t in self.wall_times.items()},
            "resumed_primes": self.resumed,
            "certification": self.report.as_dict(),
        }


def _one_prime(N, p, checkpoint_dir):
    if checkpoint_dir is not None:
        got = read_checkpoint(checkpoint_path(checkpoint_dir, p, N), p, N)
        if got is not None:
            return p, got, None
    t0 = time.perf_counter()
    res = ModularRun(N, p).run()
    dt = time.perf_counter() - t0
    if checkpoint_dir is not None:
        write_checkpoint(checkpoint_path(checkpoint_dir, p, N), p, N, res)
    log.info("prime %d done in %.2fs", p, dt)
    return p, res, dt


def run_primes(N, primes, threads=1, memory_budget=None, checkpoint_dir=None):
    """Residue vectors for each prime, in the order given.

    Concurrency is capped by ``memory_budget``; scheduling never affects
    the result since primes share no state.
    """
    per = footprint_bytes(N)
    workers = max(1, threads)
    if memory_budget is not None:
        if per > memory_budget:
            raise ResourceBudgetError(
                f"one prime at N={N} needs {per / 2**20:.0f} MiB, budget "
                f"{memory_budget / 2**20:.0f} MiB; raise --memory-budget")
        workers = max(1, min(workers, memory_budget // per))
    if checkpoint_dir is not None:
        Path(checkpoint_dir).mkdir(parents=True, exist_ok=True)
    if workers == 1:
        results = [_one_prime(N, p, checkpoint_dir) for p in primes]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(lambda p: _one_prime(N, p, checkpoint_dir), primes))
    return results


def compute_series(N: int, plan: PrimePlan | None = None, *, threads: int = 1,
                   memory_budget: int | None = None, checkpoint_dir=None,
                   top_up: int = 4, max_top_ups: int = 3) -> RunResult:
    """Compute, combine and certify w_1..w_N.

    If certification fails, ``top_up`` further primes are added and only
    those are computed; this repeats at most ``max_top_ups`` times.
    """
    plan = plan or plan_primes(N)
    residues, walls, resumed = {}, {}, []

    def absorb(results):
        for p, res, dt in results:
            residues[p] = res
            if dt is None:
                resumed.append(p)
            else:
                walls[p] = dt

    absorb(run_primes(N, plan.primes, threads, memory_budget, checkpoint_dir))
    for attempt in range(max_top_ups + 1):
        series = crt_combine([residues[p] for p in plan.primes], plan)
        report = certify(series, plan)
        if report.passed or attempt == max_top_ups:
            break
        log.warning("certification failed with %d primes; adding %d", plan.k, top_up)
        new = plan.extended(top_up)
        absorb(run_primes(N, new.primes[plan.k:], threads, memory_budget, checkpoint_dir))
        plan = new
    return RunResult(series, plan, report, walls, resumed)
