"""Ratio-method estimators, windowed fits and coefficient asymptotics.

Coefficient sequences are taken 1-based (``coeffs[0]`` is c_1), as stored in
:class:`CoefficientSeries`.  All arithmetic is in mpmath at the ambient or
requested precision; big integers convert to mpf by mantissa/exponent, so
logs of 2000-digit coefficients never overflow.  Logarithms are natural.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import mpmath

from .errors import InvariantViolation, StackSortError
from .series import CoefficientSeries

DEFAULT_PRECISION = 60

ABSCISSAE = {
    "1/n": lambda n: 1 / mpmath.mpf(n),
    "1/log n": lambda n: 1 / mpmath.log(n),
    "1/(n log^2 n)": lambda n: 1 / (n * mpmath.log(n) ** 2),
    "1/(n log n)": lambda n: 1 / (n * mpmath.log(n)),
}


class IntegerAlphaError(StackSortError):
    """Gamma(-alpha) diverges; use the integer-alpha form of the expansion."""


@dataclass
class EstimatorSeries:
    kind: str
    n: list
    values: list
    abscissa: str = "1/n"

    def __post_init__(self):
        if self.abscissa not in ABSCISSAE:
            raise ValueError(f"unknown abscissa {self.abscissa!r}")
        if len(self.n) != len(self.values):
            raise ValueError("n and values differ in length")
        if any(not mpmath.isfinite(v) for v in self.values):
            raise InvariantViolation(f"{self.kind}: non-finite estimator value")

    def __len__(self):
        return len(self.n)

    def at(self, n):
        return self.values[self.n.index(n)]

    def x(self) -> list:
        f = ABSCISSAE[self.abscissa]
        return [f(k) for k in self.n]

    def window(self, lo=None, hi=None) -> "EstimatorSeries":
        keep = [i for i, k in enumerate(self.n)
                if (lo is None or k >= lo) and (hi is None or k <= hi)]
        return EstimatorSeries(self.kind, [self.n[i] for i in keep],
                               [self.values[i] for i in keep], self.abscissa)


def _coeffs(series):
    c = series.coeffs if isinstance(series, CoefficientSeries) else series
    return [mpmath.mpf(v) for v in c]


def log_coefficient(c):
    """log c for a positive big integer (or real), without overflow."""
    return mpmath.log(mpmath.mpf(c))


# -- plain ratio estimators ------------------------------------------------

def ratios(series) -> EstimatorSeries:
    """r_n = c_n / c_{n-1}, n = 2..N."""
    c = _coeffs(series)
    if len(c) < 2:
        raise ValueError("ratios need at least two coefficients")
    vals = []
    for i in range(1, len(c)):
        if c[i - 1] == 0:
            raise ZeroDivisionError(f"c_{i} = 0")
        vals.append(c[i] / c[i - 1])
    return EstimatorSeries("ratios", list(range(2, len(c) + 1)), vals, "1/n")


def linear_intercepts(r: EstimatorSeries, abscissa="1/(n log^2 n)") -> EstimatorSeries:
    """l_n = n r_n - (n-1) r_{n-1}."""
    if len(r) < 3:
        raise ValueError("linear intercepts need at least three ratios")
    n, v = r.n, r.values
    out = [n[i] * v[i] - (n[i] - 1) * v[i - 1] for i in range(1, len(n))]
    return EstimatorSeries("intercepts", n[1:], out, abscissa)


def estimator_g(r: EstimatorSeries, mu, abscissa="1/log n") -> EstimatorSeries:
    """g_n = (r_n / mu - 1) n."""
    if mu <= 0:
        raise ValueError("mu must be positive")
    mu = mpmath.mpf(mu)
    return EstimatorSeries("g", list(r.n), [(v / mu - 1) * k for k, v in zip(r.n, r.values)],
                           abscissa)


def beta_from_ratios(r: EstimatorSeries, mu, alpha) -> EstimatorSeries:
    """beta_n - 1 = ((r_n/mu - 1) n + alpha + 1) log n."""
    mu = mpmath.mpf(mu)
    vals = [((v / mu - 1) * k + alpha + 1) * mpmath.log(k) for k, v in zip(r.n, r.values)]
    return EstimatorSeries("beta_ratio", list(r.n), vals, "1/log n")


def beta_from_intercepts(l: EstimatorSeries, mu) -> EstimatorSeries:
    """beta_n - 1 = (1 - l_n/mu) n log^2 n, plotted against 1/log n."""
    mu = mpmath.mpf(mu)
    vals = [(1 - v / mu) * k * mpmath.log(k) ** 2 for k, v in zip(l.n, l.values)]
    return EstimatorSeries("beta_intercept", list(l.n), vals, "1/log n")


def beta_estimators(r: EstimatorSeries, mu, alpha) -> dict:
    """Both beta - 1 estimator sequences, keyed by kind."""
    return {"beta_ratio": beta_from_ratios(r, mu, alpha),
            "beta_intercept": beta_from_intercepts(linear_intercepts(r), mu)}


def normalized_ratio_estimator(series, mu, alpha=2) -> EstimatorSeries:
    """(R_n - 1) n log n with s_n = c_n n^(alpha+1) / mu^n and R_n = s_n / s_{n-1}."""
    c = _coeffs(series)
    mu = mpmath.mpf(mu)
    # R_n directly, so mu^n never has to be formed
    vals, ns = [], []
    for i in range(1, len(c)):
        n = i + 1
        R = c[i] / c[i - 1] / mu * (mpmath.mpf(n) / (n - 1)) ** (alpha + 1)
        ns.append(n)
        vals.append((R - 1) * n * mpmath.log(n))
    return EstimatorSeries("Rn", ns, vals, "1/log n")


# -- windowed fits ---------------------------------------------------------

_COEFF_BASIS = [
    lambda n, L: mpmath.mpf(1),
    lambda n, L: L,
    lambda n, L: mpmath.log(L),
    lambda n, L: 1 / L,
    lambda n, L: 1 / L**2,
    lambda n, L: 1 / L**3,
]
_RATIO_BASIS = [lambda n, L, j=j: 1 / L**j for j in range(6)]


def _window_points(k, width):
    lo = k - width // 2
    return list(range(lo, lo + width))


def _windowed(values_by_n, basis, width, kinds, abscissae, drop=None):
    """Solve width x width systems over every full window; one track per parameter."""
    if width < 1 or width > len(basis):
        raise ValueError(f"window width must be 1..{len(basis)}")
    cols = [i for i in range(len(basis)) if i != drop][:width]
    ns = sorted(values_by_n)
    tracks = {i: [] for i in cols}
    centers = []
    for k in ns:
        pts = _window_points(k, width)
        if pts[0] < 3 or any(p not in values_by_n for p in pts):
            continue
        A = mpmath.matrix([[basis[i](p, mpmath.log(p)) for i in cols] for p in pts])
        b = mpmath.matrix([values_by_n[p] for p in pts])
        x = mpmath.lu_solve(A, b)
        centers.append(k)
        for j, i in enumerate(cols):
            tracks[i].append(x[j])
    return {kinds[i]: EstimatorSeries(kinds[i], list(centers), tracks[i], abscissae[i])
            for i in cols}


def windowed_fit_coeffs(series, mu, window: int = 5, alpha=None) -> dict:
    """Fit d_n = log c_n - n log mu = t1 + t2 log n + t3 log log n + t4/log n + ...

    Windows of ``window`` consecutive n, centred as {k-2..k+2} for quintuples
    ({k-2..k+1} for quartets, {k-1..k+1} for triples).  With ``alpha`` given,
    t2 is fixed at -alpha-1 and the remaining parameters are fitted.
    Returns tracks keyed t1, t2, ...; t2 runs against 1/n, t3 against 1/log n
    (against 1/(n log n) when alpha is fixed).
    """
    c = _coeffs(series)
    lmu = mpmath.log(mu)
    d = {}
    for i, v in enumerate(c):
        n = i + 1
        if v > 0:
            d[n] = mpmath.log(v) - n * lmu
            if alpha is not None:
                d[n] += (alpha + 1) * mpmath.log(n)
    kinds = {i: f"t{i + 1}" for i in range(6)}
    absc = {0: "1/n", 1: "1/n", 2: "1/(n log n)" if alpha is not None else "1/log n",
            3: "1/log n", 4: "1/log n", 5: "1/log n"}
    return _windowed(d, _COEFF_BASIS, window, kinds, absc, drop=1 if alpha is not None else None)


def windowed_fit_ratios(r: EstimatorSeries, mu, window: int = 4) -> dict:
    """Fit e_n = (r_n/mu - 1) n = t1 + t2/log n + t3/log^2 n + t4/log^3 n over quartets.

    Tracks are keyed t1r, t2r, ...; t1r runs against 1/n, the rest against 1/log n.
    """
    mu = mpmath.mpf(mu)
    e = {k: (v / mu - 1) * k for k, v in zip(r.n, r.values)}
    kinds = {i: f"t{i + 1}r" for i in range(6)}
    absc = {i: ("1/n" if i == 0 else "1/log n") for i in range(6)}
    return _windowed(e, _RATIO_BASIS, window, kinds, absc)


def amplitude_fit(series, mu, beta, alpha=2) -> dict:
    """Amplitudes e1, e2, e3 from triples {s_{k-1}, s_k, s_{k+1}}.

    s_n = c_n n^(alpha+1) / mu^n is fitted to e1/n^(1-beta) + e2/n^(2-beta)
    + e3/n^(3-beta).  Tracks run against 1/n.
    """
    c = _coeffs(series)
    lmu = mpmath.log(mu)
    s = {}
    for i, v in enumerate(c):
        n = i + 1
        if v > 0:
            s[n] = mpmath.exp(mpmath.log(v) + (alpha + 1) * mpmath.log(n) - n * lmu)
    basis = [lambda n, L, j=j: mpmath.mpf(n) ** (beta - j) for j in (1, 2, 3)]
    kinds = {0: "e1", 1: "e2", 2: "e3"}
    absc = {0: "1/n", 1: "1/n", 2: "1/n"}
    return _windowed(s, basis, 3, kinds, absc)


def classify_track(track: EstimatorSeries, tail: float = 0.25, tol: float = 0.05) -> str:
    """Crude reading of an amplitude track: converging, diverging or vanishing.

    Compares the last value with the one at the start of the final ``tail``
    fraction: a track that keeps growing in magnitude is diverging, one that
    shrinks toward zero (relative to its peak) is vanishing, and so is one that
    sits at rounding level throughout.
    """
    v = [abs(x) for x in track.values]
    if len(v) < 4:
        return "undetermined"
    start = v[int(len(v) * (1 - tail))]
    last = v[-1]
    peak = max(v)
    if peak <= mpmath.sqrt(mpmath.eps) or last <= tol * peak:
        return "vanishing"
    if last > start * (1 + tol) and v[-1] >= v[-2]:
        return "diverging"
    return "converging"


# -- Flajolet-Sedgewick expansion ------------------------------------------

def _near_nonneg_integer(alpha, tol=1e-6):
    k = mpmath.nint(alpha)
    return k >= 0 and abs(alpha - k) < tol


def rgamma_derivatives(s, k_max: int) -> list:
    """(1/Gamma)^(k)(s) for k = 0..k_max, by numerical differentiation."""
    return [mpmath.diff(mpmath.rgamma, s, k) for k in range(k_max + 1)]


def fs_coefficients(alpha, beta, k_max: int) -> list:
    """c_0..c_{k_max} with c_k = binom(beta, k) Gamma(-alpha) (1/Gamma)^(k)(-alpha)."""
    alpha, beta = mpmath.mpf(alpha), mpmath.mpf(beta)
    if _near_nonneg_integer(alpha):
        raise IntegerAlphaError(
            f"alpha={alpha} is (near) a non-negative integer; Gamma(-alpha) diverges. "
            "Use AsymptoticModel/model_predict, which switch to the integer-alpha form.")
    g = mpmath.gamma(-alpha)
    ders = rgamma_derivatives(-alpha, k_max)
    return [mpmath.binomial(beta, k) * g * ders[k] for k in range(k_max + 1)]


@dataclass
class AsymptoticModel:
    """f(x) ~ C (1 - mu x)^alpha ((1/(mu x)) log(1/(1 - mu x)))^beta.

    Coefficients then behave as c0 mu^n / (n^(alpha+1) log^lam n) with
    lam = -beta, or lam = -beta + 1 when alpha is a positive integer.  A
    supplied ``lam`` is checked against that rule.
    """
    mu: object
    alpha: object
    beta: object
    C: object = 1
    lam: object = None
    k_max: int = 4
    amplitudes: list = field(default_factory=list)    # e_1, e_2, ... if fitted

    def __post_init__(self):
        want = self.expected_lambda()
        if self.lam is None:
            self.lam = want
        elif abs(mpmath.mpf(self.lam) - want) > mpmath.mpf(10) ** (-mpmath.mp.dps // 2):
            raise InvariantViolation(
                f"lambda={self.lam} inconsistent with alpha={self.alpha}, beta={self.beta} "
                f"(expected {want})")

    @property
    def integer_alpha(self) -> bool:
        a = mpmath.mpf(self.alpha)
        return a > 0 and a == mpmath.nint(a)

    def expected_lambda(self):
        b = mpmath.mpf(self.beta)
        return -b + 1 if self.integer_alpha else -b

    def series_terms(self) -> list:
        """b_k in f_n ~ C mu^n n^(-alpha-1) (log n)^beta sum_k b_k / log^k n.

        For non-integer alpha, b_k = c_k / Gamma(-alpha).  For a positive
        integer alpha, b_k = binom(beta, k) (1/Gamma)^(k)(-alpha): b_0 = 0 and
        the expansion leads with b_1 / log n.
        """
        a, b = mpmath.mpf(self.alpha), mpmath.mpf(self.beta)
        if self.integer_alpha:
            ders = rgamma_derivatives(-a, self.k_max)
            return [mpmath.mpf(0)] + [mpmath.binomial(b, k) * ders[k]
                                      for k in range(1, self.k_max + 1)]
        if _near_nonneg_integer(a):
            raise IntegerAlphaError("alpha = 0 has no log-free leading term")
        return [ck / mpmath.gamma(-a) for ck in fs_coefficients(a, b, self.k_max)]


def model_predict(model: AsymptoticModel, n: int):
    """Predicted n-th coefficient from the truncated expansion."""
    if n < 2:
        raise ValueError("model_predict needs n >= 2")
    L = mpmath.log(n)
    terms = model.series_terms()
    s = mpmath.fsum(bk / L**k for k, bk in enumerate(terms))
    logpre = (n * mpmath.log(model.mu) - (mpmath.mpf(model.alpha) + 1) * L
              + model.beta * mpmath.log(L))
    return model.C * mpmath.exp(logpre) * s


def ratio_expansion(model: AsymptoticModel, n: int):
    """mu (1 - (alpha+1)/n + b/(n log n) - c/(n log^2 n)), accurate to O(1/(n log^3 n)).

    b = beta - 1 and c = b_2/b_1 for integer alpha, else b = beta, c = b_1/b_0.
    """
    a = mpmath.mpf(model.alpha)
    L = mpmath.log(n)
    terms = model.series_terms()
    if model.integer_alpha:
        b, c = model.beta - 1, terms[2] / terms[1]
    else:
        b, c = model.beta, terms[1] / terms[0]
    return model.mu * (1 - (a + 1) / n + b / (n * L) - c / (n * L**2))


# -- export ----------------------------------------------------------------

def write_csv(est: EstimatorSeries, path, digits: int = 30) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "abscissa", "value"])
        for k, x, v in zip(est.n, est.x(), est.values):
            w.writerow([k, mpmath.nstr(x, digits), mpmath.nstr(v, digits)])
    return path


def estimator_suite(series, mu, alpha=2, beta=-2, precision: int = DEFAULT_PRECISION) -> dict:
    """Every plot-data estimator, keyed by its CSV name."""
    with mpmath.workdps(precision):
        r = ratios(series)
        l = linear_intercepts(r)
        out = {
            "ratios": r,
            "intercepts": l,
            "g": estimator_g(r, mu),
            "beta_ratio": beta_from_ratios(r, mu, alpha),
            "beta_intercept": beta_from_intercepts(l, mu),
            "Rn": normalized_ratio_estimator(series, mu, alpha),
        }
        cf = windowed_fit_coeffs(series, mu, 5)
        out["t2"], out["t3"] = cf["t2"], cf["t3"]
        rf = windowed_fit_ratios(r, mu, 4)
        out["t1r"], out["t2r"] = rf["t1r"], rf["t2r"]
        out["e1"] = amplitude_fit(series, mu, beta, alpha)["e1"]
    return out


def export_csvs(estimators: dict, outdir, digits: int = 30) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    return [write_csv(est, outdir / f"{name}.csv", digits) for name, est in estimators.items()]
