"""Coefficient series container and its text file format.

File layout::

    stacksort-coeffs v1 N=<N> provenance=<...>
    <n> <decimal integer>
    ...

Approximate series may carry a third column holding the standard deviation.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

PROVENANCES = ("exact-certified", "exact-uncertified", "approximate")
HEADER = "stacksort-coeffs v1"
_HEADER_RE = re.compile(r"^stacksort-coeffs v1 N=(\d+) provenance=([\w-]+)\s*$")


@dataclass
class CoefficientSeries:
    """Coefficients c_1, c_2, ... (index 0 of ``coeffs`` is n=1).

    Exact series hold ints; approximate ones hold ``mpf`` or ``Decimal``-like
    values parsed from the file and a per-term ``stddev``.
    """
    name: str
    coeffs: list
    provenance: str = "exact-uncertified"
    stddev: list | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, n):
        """1-based access: ``series[n]`` is c_n."""
        if n < 1:
            raise IndexError("series is indexed from n=1")
        return self.coeffs[n - 1]

    @property
    def N(self) -> int:
        return len(self.coeffs)

    @property
    def is_exact(self) -> bool:
        return self.provenance != "approximate"

    def prefix(self, n: int) -> "CoefficientSeries":
        sd = self.stddev[:n] if self.stddev is not None else None
        return CoefficientSeries(self.name, self.coeffs[:n], self.provenance, sd)

    def check_counting_invariants(self) -> list[str]:
        """Violations of w_n >= 1, w_n < w_{n+1} <= (n+1) w_n (empty if fine)."""
        bad = []
        c = self.coeffs
        for i, v in enumerate(c):
            if v < 1:
                bad.append(f"w_{i + 1} = {v} < 1")
        for i in range(1, len(c)):
            n = i + 1
            if not c[i - 1] < c[i]:
                bad.append(f"w_{n} not > w_{n - 1}")
            if c[i] > n * c[i - 1]:
                bad.append(f"w_{n} > {n} * w_{n - 1}")
        return bad


def write_series(series: CoefficientSeries, path) -> Path:
    path = Path(path)
    lines = [f"{HEADER} N={series.N} provenance={series.provenance}"]
    for n, c in enumerate(series.coeffs, start=1):
        if series.stddev is not None:
            lines.append(f"{n} {_fmt(c)} {_fmt(series.stddev[n - 1])}")
        else:
            lines.append(f"{n} {_fmt(c)}")
    path.write_text("\n".join(lines) + "\n")
    return path


def _fmt(v):
    if isinstance(v, int):
        return str(v)
    import mpmath
    return mpmath.nstr(v, max(mpmath.mp.dps, 15), min_fixed=0, max_fixed=0)


def read_series(path, name: str | None = None) -> CoefficientSeries:
    path = Path(path)
    with path.open() as fh:
        head = fh.readline()
        m = _HEADER_RE.match(head)
        if not m:
            raise ValueError(f"{path}: not a {HEADER} file")
        N, prov = int(m.group(1)), m.group(2)
        coeffs, sd = [], []
        for k, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if int(parts[0]) != k:
                raise ValueError(f"{path}: expected index {k}, got {parts[0]}")
            coeffs.append(_parse(parts[1], prov))
            if len(parts) > 2:
                sd.append(_parse(parts[2], "approximate"))
    if len(coeffs) != N:
        raise ValueError(f"{path}: header says N={N}, found {len(coeffs)} terms")
    return CoefficientSeries(name or path.stem, coeffs, prov, sd or None)


def _parse(tok, prov):
    if prov != "approximate":
        return int(tok)
    import mpmath
    # parse at the precision the token carries, not the ambient one
    with mpmath.workdps(max(mpmath.mp.dps, len(tok) + 5)):
        return mpmath.mpf(tok)
