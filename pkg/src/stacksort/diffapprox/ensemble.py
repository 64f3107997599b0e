"""Families of approximants and the dominant-singularity consensus."""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from statistics import median

import mpmath

from ..errors import EnsembleError, StackSortError
from .fit import ApproximantSpec, fit_approximant
from .roots import find_singularities

log = logging.getLogger(__name__)

CLUSTER_TOL = 1e-6
MIN_SUPPORT = 0.8
MAD_CUT = 3.0
TIGHTNESS_FACTOR = 10.0


def default_family(order: int, n_terms: int, *, spread: int = 2, deg_P=(0, 1, 2),
                   min_fraction: float = 0.9, max_members: int | None = 24) -> list:
    """Degree vectors with max - min <= ``spread`` using >= ``min_fraction`` of the terms.

    ``n_terms`` counts the coefficients f_0..f_{n_terms-1} available.  When
    more specs qualify than ``max_members``, the ones using the most terms
    are kept, balanced degree vectors first.
    """
    lo = math.ceil(min_fraction * n_terms)
    out = []
    for dP in deg_P:
        # used_terms = sum(deg + 1) + dP, so sum(deg + 1) lies in [lo - dP, n_terms - dP]
        for base in range(max(0, (lo - dP) // (order + 1) - spread - 1),
                          (n_terms - dP) // (order + 1) + 1):
            for offs in itertools.product(range(spread + 1), repeat=order + 1):
                if min(offs) != 0:
                    continue
                degs = tuple(base + o for o in offs)
                spec = ApproximantSpec(degs, dP)
                if lo <= spec.used_terms <= n_terms:
                    out.append(spec)
    out = sorted(set(out), key=lambda s: (-s.used_terms, max(s.degrees) - min(s.degrees),
                                          s.deg_P, s.degrees))
    return out[:max_members] if max_members else out


@dataclass
class MemberResult:
    spec: ApproximantSpec
    approximant: object = None
    singularities: list = field(default_factory=list)
    error: str | None = None


@dataclass
class EnsembleResult:
    members: list
    location: mpmath.mpf | None = None
    location_std: mpmath.mpf | None = None
    exponent: mpmath.mpf | None = None
    exponent_std: mpmath.mpf | None = None
    picks: dict = field(default_factory=dict)    # label -> SingularityEstimate
    rejected: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.location is not None

    @property
    def approximants(self) -> list:
        return [m.approximant for m in self.members if m.approximant is not None]

    def summary(self) -> dict:
        fmt = lambda v: None if v is None else mpmath.nstr(v, 15)
        return {
            "members": len(self.members),
            "fitted": len(self.approximants),
            "supporting": len(self.picks),
            "rejected_outliers": self.rejected,
            "x_c": fmt(self.location),
            "x_c_std": fmt(self.location_std),
            "exponent": fmt(self.exponent),
            "exponent_std": fmt(self.exponent_std),
            "diagnostics": self.diagnostics,
        }


def fit_members(coeffs, specs, precision: int = 50) -> list[MemberResult]:
    out = []
    for spec in specs:
        m = MemberResult(spec)
        try:
            m.approximant = fit_approximant(coeffs, spec)
            m.singularities = find_singularities(m.approximant, precision)
        except (StackSortError, ValueError) as e:
            m.error = f"{type(e).__name__}: {e}"
            log.info("skipping %s: %s", spec.label(), m.error)
        out.append(m)
    return out


def mad_filter(values, cut: float = MAD_CUT) -> list[bool]:
    """True for values within ``cut`` median absolute deviations of the median."""
    med = median(values)
    mad = median(abs(v - med) for v in values)
    if mad == 0:
        return [v == med for v in values] if any(v != med for v in values) else [True] * len(values)
    return [abs(v - med) <= cut * mad for v in values]


def _mean_std(values):
    n = len(values)
    mean = mpmath.fsum(values) / n
    if n < 2:
        return mean, mpmath.mpf(0)
    var = mpmath.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, mpmath.sqrt(var)


def _candidates(members):
    """Positive real roots of every member, with their owner index."""
    out = []
    for i, m in enumerate(members):
        for s in m.singularities:
            if s.location.real > 0 and s.is_real:
                out.append((i, s))
    return out


def consensus(members, *, cluster_tol: float = CLUSTER_TOL, min_support: float = MIN_SUPPORT,
              tightness: float = TIGHTNESS_FACTOR, mad_cut: float = MAD_CUT) -> EnsembleResult:
    """Dominant singularity common to (almost) all fitted members.

    A candidate root is supported by a member that has a root within
    relative ``cluster_tol`` of it; candidates with support below
    ``min_support`` are dropped.  Each survivor is scored by the median
    relative distance of its supporters.  Spurious roots near a confluent
    singularity also recur in every member, only less tightly, so the
    dominant cluster is the nearest-origin candidate whose score is within
    ``tightness`` of the best score.
    """
    res = EnsembleResult(members)
    fitted = [m for m in members if m.approximant is not None]
    if not fitted:
        res.diagnostics.append("no member could be fitted")
        return res
    need = math.ceil(min_support * len(fitted))
    cands = _candidates(fitted)
    floor = mpmath.mpf(10) ** (-(mpmath.mp.dps // 2))
    scored = []
    for owner, s in cands:
        c = s.location
        dists = []
        for j, m in enumerate(fitted):
            d = min((abs(t.location - c) for t in m.singularities if t.is_real),
                    default=mpmath.inf) / abs(c)
            if d <= cluster_tol:
                dists.append(d)
        if len(dists) >= need:
            scored.append((max(median(dists), floor), abs(c), c))
    if not scored:
        near = sorted(cands, key=lambda p: abs(p[1].location))[:5]
        res.diagnostics.append(
            f"no root shared by {need}/{len(fitted)} members at relative tolerance "
            f"{cluster_tol}; nearest candidates: "
            + ", ".join(mpmath.nstr(s.location.real, 12) for _, s in near))
        return res
    best = min(sc for sc, _, _ in scored)
    _, _, center = min((p for p in scored if p[0] <= tightness * best), key=lambda p: p[1])

    labels, picks = [], []
    for m in fitted:
        s = min((t for t in m.singularities if t.is_real),
                key=lambda t: abs(t.location - center))
        if abs(s.location - center) <= cluster_tol * abs(center):
            labels.append(m.spec.label())
            picks.append(s)
    locs = [s.location.real for s in picks]
    keep = mad_filter(locs, mad_cut)
    res.rejected = [l for l, k in zip(labels, keep) if not k]
    res.picks = {l: s for l, s, k in zip(labels, picks, keep) if k}
    res.location, res.location_std = _mean_std([s.location.real for s in res.picks.values()])
    expos = [s.exponent.real for s in res.picks.values() if s.exponent is not None]
    if expos:
        ek = mad_filter(expos, mad_cut)
        res.exponent, res.exponent_std = _mean_std([e for e, k in zip(expos, ek) if k])
    return res


@dataclass
class Satellite:
    location: mpmath.mpf
    exponent: mpmath.mpf | None
    support: float          # fraction of supporting members that show it


def satellites(result: EnsembleResult, *, window: float = 0.1, tol: float = 1e-5,
               min_support: float = 0.5) -> list[Satellite]:
    """Real roots just beyond the dominant one that recur across members.

    Roots in (x_c, x_c (1 + window)] from the supporting members are grouped
    greedily at relative tolerance ``tol``; groups seen in at least
    ``min_support`` of the members are returned, nearest first.
    """
    if not result.ok:
        return []
    xc = result.location
    by_label = {m.spec.label(): m for m in result.members}
    pts = []
    for label, pick in result.picks.items():
        for s in by_label[label].singularities:
            z = s.location.real
            if (s.is_real and s is not pick and xc * (1 + CLUSTER_TOL) < z
                    and z <= xc * (1 + window)):
                pts.append((z, label, s))
    pts.sort(key=lambda p: p[0])
    groups, cur = [], []
    for p in pts:
        if cur and p[0] - cur[0][0] > tol * cur[0][0]:
            groups.append(cur)
            cur = []
        cur.append(p)
    if cur:
        groups.append(cur)
    out = []
    total = len(result.picks)
    for g in groups:
        support = len({label for _, label, _ in g}) / total
        if support >= min_support:
            loc = mpmath.fsum(z for z, _, _ in g) / len(g)
            ex = [s.exponent.real for _, _, s in g if s.exponent is not None]
            out.append(Satellite(loc, mpmath.fsum(ex) / len(ex) if ex else None, support))
    return out


def ensemble_scan(coeffs, specs, precision: int = 50, **kw) -> EnsembleResult:
    """Fit every spec, then locate the consensus dominant singularity.

    Raises EnsembleError if fewer than 10 specs are given; an ensemble with
    no common cluster comes back with ``ok`` False and a diagnostic.
    """
    if len(specs) < 10:
        raise EnsembleError(f"ensemble needs at least 10 specs, got {len(specs)}")
    with mpmath.workdps(precision):
        return consensus(fit_members(coeffs, specs, precision), **kw)
