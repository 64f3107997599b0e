"""Approximant archive: one JSON object per line, coefficients as integer pairs."""
from __future__ import annotations

import json
from pathlib import Path

from .fit import HolonomicApproximant

HEADER = "stacksort-approximants v1"


def write_archive(approximants, path) -> Path:
    path = Path(path)
    lines = [HEADER] + [json.dumps(a.to_archive(), separators=(",", ":")) for a in approximants]
    path.write_text("\n".join(lines) + "\n")
    return path


def read_archive(path) -> list[HolonomicApproximant]:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0].strip() != HEADER:
        raise ValueError(f"{path}: not an approximant archive")
    return [HolonomicApproximant.from_archive(json.loads(l)) for l in lines[1:] if l.strip()]
