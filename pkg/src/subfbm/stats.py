"""Analytic covariances, Monte Carlo estimators and statistical checks.

Estimates are always reported with a standard error.  Point checks use a
3-SE band and distributional checks a 1% level; since a suite runs many such
checks at once, reports carry a note on the family-wise false-failure rate.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path as FilePath
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import linalg, stats as sps

from . import kernel as kern
from .errors import DomainError, SubfbmError
from .kernel import KernelSpec, QuadratureConfig

KINDS = ("sub", "fbm", "bm")
_ALIASES = {"subfbm": "sub", "sub": "sub", "fbm": "fbm", "bm": "bm", "brownian": "bm"}
Z_LEVEL = 3.0
TEST_LEVEL = 0.01


def covariance_kind(kind: str) -> str:
    try:
        return _ALIASES[str(kind).lower().replace("-", "").replace("_", "")]
    except KeyError:
        raise DomainError(f"unknown covariance kind {kind!r}; expected one of {KINDS}") from None


def cov_analytic(kind: str, H: float | None, s, t):
    """Covariance of sub-fBm, fBm or Brownian motion at times s, t in [0, 1]."""
    kind = covariance_kind(kind)
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if kind == "bm":
        out = np.minimum(s, t)
    else:
        H = kern.hurst_index(H)
        p = 2.0 * H
        d = np.abs(t - s) ** p
        if kind == "sub":
            out = s**p + t**p - 0.5 * ((s + t) ** p + d)
        else:
            out = 0.5 * (s**p + t**p - d)
        # exact zero on the boundary rather than rounding residue
        out = np.where((s == 0) | (t == 0), 0.0, out)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class CovarianceTarget:
    H: float | None
    kind: str = "sub"

    def __post_init__(self):
        object.__setattr__(self, "kind", covariance_kind(self.kind))
        if self.kind != "bm":
            object.__setattr__(self, "H", kern.hurst_index(self.H))

    def __call__(self, s, t):
        return cov_analytic(self.kind, self.H, s, t)

    def variance(self, t):
        return self(t, t)

    def matrix(self, grid: Sequence[float]) -> np.ndarray:
        g = np.asarray(grid, dtype=float)
        return self(g[:, None], g[None, :])


@dataclass
class StatReport:
    """Per-point estimates against targets with a verdict.

    ``estimate``, ``target``, ``se`` and ``z`` are aligned with ``points``.
    For bound checks ``target`` holds ``[lower, upper]`` pairs and ``z`` the
    worst signed excess in SE units.
    """

    name: str
    points: list
    estimate: list
    target: list
    se: list
    z: list
    passed: list
    level: float
    metadata: dict = field(default_factory=dict)

    @property
    def verdict(self) -> bool:
        return bool(all(self.passed))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["verdict"] = "pass" if self.verdict else "fail"
        return _jsonable(d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def save(self, path) -> None:
        FilePath(path).write_text(self.to_json() + "\n", encoding="utf-8")

    def summary(self) -> str:
        zs = [z for z in self.z if z is not None and np.isfinite(z)]
        head = f"{self.name}: {'pass' if self.verdict else 'fail'} ({len(self.points)} points"
        if not zs:
            return head + ")"
        # bound checks store signed excess, where negative means inside the band
        bounds = bool(self.target) and isinstance(self.target[0], (list, tuple))
        worst = max(zs) if bounds else max(abs(z) for z in zs)
        return head + f", {'max excess z' if bounds else 'max |z|'} = {worst:.2f})"


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    return x


def bonferroni_note(n_checks: int, level: float) -> str:
    return (f"{n_checks} checks at per-check level {level:g}; "
            f"family-wise false-failure bound {min(1.0, n_checks * level):.3g}")


def z_pass(estimate: float, target: float, se: float, z_level: float = Z_LEVEL) -> tuple[float, bool]:
    """Signed z-score and whether |estimate - target| <= z_level * se."""
    diff = estimate - target
    if se == 0:
        return (0.0 if diff == 0 else math.copysign(math.inf, diff)), diff == 0
    z = diff / se
    return z, abs(z) <= z_level


# --- estimators ---------------------------------------------------------------------------


def mean_with_se(x) -> tuple[float, float]:
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise DomainError("cannot estimate from zero samples")
    if x.size == 1:
        return float(x[0]), float("nan")
    return float(np.mean(x)), float(np.std(x, ddof=1) / math.sqrt(x.size))


def _values(ensemble) -> np.ndarray:
    return ensemble.values if hasattr(ensemble, "values") else np.asarray(ensemble, dtype=float)


def empirical_cov(ensemble, s_idx: int, t_idx: int) -> tuple[float, float]:
    """Mean of X(s) X(t) over paths and its standard error (the processes are centred)."""
    v = _values(ensemble)
    return mean_with_se(v[:, s_idx] * v[:, t_idx])


def empirical_mean_square(ensemble, idx: int) -> tuple[float, float]:
    v = _values(ensemble)
    return mean_with_se(v[:, idx] ** 2)


def increment_second_moment(ensemble, s_idx: int, t_idx: int) -> tuple[float, float]:
    v = _values(ensemble)
    return mean_with_se((v[:, t_idx] - v[:, s_idx]) ** 2)


def check_covariance(ensemble, pairs: Iterable[tuple[int, int]], target: CovarianceTarget,
                     *, z_level: float = Z_LEVEL, name: str = "covariance") -> StatReport:
    pts, est, tgt, ses, zs, ok = [], [], [], [], [], []
    for i, j in pairs:
        s, t = float(ensemble.times[i]), float(ensemble.times[j])
        e, se = empirical_cov(ensemble, i, j)
        c = target(s, t)
        z, p = z_pass(e, c, se, z_level)
        pts.append([s, t]); est.append(e); tgt.append(c); ses.append(se); zs.append(z); ok.append(p)
    meta = _ensemble_meta(ensemble)
    meta["note"] = bonferroni_note(len(pts), 2 * sps.norm.sf(z_level))
    return StatReport(name, pts, est, tgt, ses, zs, ok, z_level, meta)


def sandwich_bounds(H: float, s: float, t: float) -> tuple[float, float]:
    """Lower and upper bounds on E[(X(t) - X(s))^2] for sub-fBm with H > 1/2."""
    d = abs(t - s) ** (2.0 * H)
    return kern.sub_variance_constant(H) * d, d


def check_variance_sandwich(ensemble, pairs: Iterable[tuple[int, int]], H: float | None = None,
                            *, z_level: float = Z_LEVEL) -> StatReport:
    """Increment second moments within [lower - 3 SE, upper + 3 SE] at each (s_idx, t_idx)."""
    H = ensemble.H if H is None else H
    if H is None or not H > 0.5:
        raise DomainError("the variance sandwich check needs H > 1/2")
    H = kern.hurst_index(H)
    pts, est, tgt, ses, zs, ok = [], [], [], [], [], []
    for i, j in pairs:
        s, t = float(ensemble.times[i]), float(ensemble.times[j])
        e, se = increment_second_moment(ensemble, i, j)
        lo, hi = sandwich_bounds(H, s, t)
        slack = z_level * se if np.isfinite(se) else 0.0
        excess = max(lo - e, e - hi)
        z = excess / se if se > 0 else (0.0 if excess <= 0 else math.inf)
        pts.append([s, t]); est.append(e); tgt.append([lo, hi]); ses.append(se); zs.append(z)
        ok.append(lo - slack <= e <= hi + slack)
    meta = _ensemble_meta(ensemble)
    meta["note"] = bonferroni_note(len(pts), sps.norm.sf(z_level))
    return StatReport("variance_sandwich", pts, est, tgt, ses, zs, ok, z_level, meta)


def increment_moment_check(ensemble, triples: Iterable[tuple[int, int, int]], H: float | None = None,
                           *, z_level: float = Z_LEVEL) -> StatReport:
    """Fit C in E|X(t)-X(s)||X(u)-X(t)| <= C |u-s|^{2H} over s < t < u.

    Each point reports the ratio of the moment to |u-s|^{2H}.  The fitted C is
    the largest ratio; by Cauchy-Schwarz and the sandwich upper bound it cannot
    exceed 1, which is the verdict (within 3 SE).
    """
    H = kern.hurst_index(ensemble.H if H is None else H)
    v = _values(ensemble)
    pts, est, tgt, ses, zs, ok = [], [], [], [], [], []
    for i, j, k in triples:
        s, t, u = (float(ensemble.times[x]) for x in (i, j, k))
        if not s < t < u:
            raise DomainError(f"increment triple must be increasing, got {(s, t, u)}")
        scale = (u - s) ** (2.0 * H)
        r, se = mean_with_se(np.abs(v[:, j] - v[:, i]) * np.abs(v[:, k] - v[:, j]) / scale)
        z, _ = z_pass(r, 1.0, se, z_level)
        pts.append([s, t, u]); est.append(r); tgt.append(1.0); ses.append(se); zs.append(z)
        ok.append(r <= 1.0 + z_level * se)
    meta = _ensemble_meta(ensemble)
    meta["fitted_C"] = max(est) if est else None
    return StatReport("increment_moment", pts, est, tgt, ses, zs, ok, z_level, meta)


def _ensemble_meta(ensemble) -> dict:
    if hasattr(ensemble, "metadata"):
        meta = ensemble.metadata()
        meta.pop("times", None)
        return meta
    return {}


# --- exact Gaussian oracle ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CholeskyOracle:
    """Exact centred Gaussian vector with the analytic covariance on ``grid``.

    Test oracle only: it samples from the target law directly and is never
    used as a path scheme.
    """

    target: CovarianceTarget
    grid: np.ndarray
    cov: np.ndarray
    factor: np.ndarray  # lower triangular, cov = factor @ factor.T

    def sample(self, M: int, seed: int) -> np.ndarray:
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))
        z = rng.standard_normal((int(M), len(self.grid)))
        return z @ self.factor.T


def cholesky_oracle(kind: str, H: float | None, grid: Sequence[float]) -> CholeskyOracle:
    g = np.asarray(grid, dtype=float).ravel()
    if g.size == 0 or np.any(g <= 0) or np.any(g > 1):
        raise DomainError("oracle grid points must lie in (0, 1]")
    target = CovarianceTarget(H, kind)
    cov = target.matrix(g)
    try:
        factor = linalg.cholesky(cov, lower=True)
    except linalg.LinAlgError as exc:
        raise SubfbmError(f"covariance matrix is not positive definite on the grid: {exc}") from exc
    return CholeskyOracle(target, g, cov, factor)


# --- distributional tests -----------------------------------------------------------------


def gaussianity_test(samples, sd: float | None = None, *, level: float = TEST_LEVEL,
                     name: str = "gaussianity") -> StatReport:
    """One-sample KS test of standardized samples against N(0, 1).

    With ``sd`` given (for instance the analytic standard deviation) samples are
    divided by it; otherwise they are studentized.  The p-value uses the
    asymptotic Kolmogorov distribution.
    """
    x = np.asarray(samples, dtype=float).ravel()
    M = x.size
    if M < 2:
        raise DomainError("KS test needs at least two samples")
    if sd is None:
        sd_used = float(np.std(x, ddof=1))
        center = float(np.mean(x))
    else:
        sd_used, center = float(sd), 0.0
    if sd_used > 0:
        z = np.sort((x - center) / sd_used)
        cdf = sps.norm.cdf(z)
        i = np.arange(1, M + 1)
        D = float(max(np.max(i / M - cdf), np.max(cdf - (i - 1) / M)))
    else:
        D = 1.0
    p = float(sps.kstwobign.sf(math.sqrt(M) * D))
    meta = {"M": M, "sd": sd_used, "statistic": D, "p_value": p}
    return StatReport(name, [0], [D], [0.0], [float("nan")], [p], [p >= level], level, meta)


def two_sample_ks(a, b, *, level: float = TEST_LEVEL, name: str = "two_sample_ks") -> tuple[float, float, bool]:
    """(statistic, p-value, not rejected) for the two-sample KS test."""
    res = sps.ks_2samp(np.asarray(a, dtype=float).ravel(), np.asarray(b, dtype=float).ravel())
    return float(res.statistic), float(res.pvalue), bool(res.pvalue >= level)


def compare_marginals(sample_a: np.ndarray, sample_b: np.ndarray, times: Sequence[float], *,
                      level: float = TEST_LEVEL) -> StatReport:
    """Two-sample KS per column; columns of both arrays correspond to ``times``."""
    est, ps, ok = [], [], []
    for c in range(len(times)):
        D, p, keep = two_sample_ks(sample_a[:, c], sample_b[:, c], level=level)
        est.append(D); ps.append(p); ok.append(keep)
    meta = {"M_a": int(sample_a.shape[0]), "M_b": int(sample_b.shape[0]),
            "note": bonferroni_note(len(times), level)}
    return StatReport("two_sample_ks", [float(t) for t in times], est, [0.0] * len(times),
                      [float("nan")] * len(times), ps, ok, level, meta)


# --- kernel distances and rates -----------------------------------------------------------


def l2_kernel_distance(f: Callable, g: Callable, quad: QuadratureConfig | None = None, *,
                       points: Sequence[float] | None = None, a: float = 0.0, b: float = 1.0) -> float:
    """sqrt(int_a^b (f - g)^2 du), integrated piecewise between ``points``."""
    quad = quad or QuadratureConfig(singularity_exponent=-0.75)
    edges = sorted({a, b, *(p for p in (points or ()) if a < p < b)})
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        total += kern.adaptive_quad(lambda u: (f(u) - g(u)) ** 2, lo, hi, quad, what="L2 distance")[0]
    return math.sqrt(total)


def step_kernel_distance(m: int, t: float, spec: KernelSpec) -> float:
    """||K^m(t, .) - K(t, .)||_2 for the left-point step kernel on the partition i/m."""
    from .discretize import build_step_kernel

    step = build_step_kernel(m, t, spec)
    section = lambda u: kern.k_sub(t, u, spec)
    pts = list(step.edges) + [t]
    return l2_kernel_distance(lambda u: step(u), section, spec.quad, points=pts)


@dataclass
class RateFit:
    slope: float | None
    intercept: float | None
    se: float | None
    residuals: list
    degenerate: bool

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))


def fit_rate(xs, ys) -> RateFit:
    """Least-squares slope of log(ys) against log(xs)."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.size == 0:
        raise DomainError("fit_rate needs equally sized, non-empty inputs")
    if np.any(x <= 0) or np.any(y <= 0):
        raise DomainError("fit_rate needs strictly positive resolutions and errors")
    if x.size < 2 or np.ptp(x) == 0:
        return RateFit(None, None, None, [], True)
    lx, ly = np.log(x), np.log(y)
    A = np.column_stack([lx, np.ones_like(lx)])
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    res = ly - A @ coef
    dof = x.size - 2
    if dof > 0:
        s2 = float(res @ res) / dof
        se = math.sqrt(s2 / float(np.sum((lx - lx.mean()) ** 2)))
    else:
        se = float("nan")
    return RateFit(float(coef[0]), float(coef[1]), se, res.tolist(), False)


def write_convergence_csv(path, resolutions, errors, ses, fit: RateFit, *, label: str = "n") -> None:
    """Columns: resolution label, error, SE, fitted slope (repeated per row)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([label, "error", "se", "slope"])
        slope = "" if fit.slope is None else repr(fit.slope)
        for r, e, s in zip(resolutions, errors, ses):
            w.writerow([r, repr(float(e)), "" if s is None or not np.isfinite(s) else repr(float(s)), slope])


def write_long_csv(path, records: Iterable[dict]) -> None:
    """Plot-ready long format: one row per (series, x, y[, se])."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=["series", "x", "y", "se"])
        w.writeheader()
        for rec in records:
            w.writerow({k: rec.get(k, "") for k in ("series", "x", "y", "se")})


# --- proof-ladder experiments -------------------------------------------------------------

LADDER_TERMS = ("d1", "d2", "d3")
D1_TIMES = (0.37, 1.0 / 3.0, 0.93)


@dataclass
class LadderResult:
    """Mean-square distance between two schemes at one time across resolutions.

    ``exact`` is the squared norm of the weight difference (the second moment
    for any unit-variance innovations); ``mc`` and ``se`` are its Monte Carlo
    estimate.  ``bound`` holds the reference bound per resolution, if any.
    """

    term: str
    t: float
    resolutions: list
    exact: list
    mc: list
    se: list
    fit_exact: RateFit
    fit_mc: RateFit | None
    bound: list | None = None
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        return _jsonable(d)

    def mc_consistent(self, z_level: float = Z_LEVEL) -> bool:
        return all(z_pass(m, e, s, z_level)[1] for m, e, s in zip(self.mc, self.exact, self.se))


def _ladder_pair(term: str, t: float, n: int, spec: KernelSpec, m: int | None):
    from . import discretize as disc
    from . import simulate as sim

    if term == "d1":
        k = disc.floor_index(n, t)
        mat = disc.build_matrix_exact([t, k / n], n, spec)
        a = sim.LinearScheme("sub_exact", mat.times[[0, 1]], mat.weights[[0, 1]], n=n, H=spec.H)
        b = sim.LinearScheme("sub_floor", mat.times[[0, 1]], mat.weights[[0, 2]], n=n, H=spec.H)
        return sim.difference(b, a), None
    if m is None:
        raise DomainError(f"ladder term {term} needs m")
    if term == "d2":
        a = sim.overlap_step_scheme(m, n, spec, [t])
        b = sim.matrix_scheme(disc.build_matrix_exact([t], n, spec))
        return sim.difference(a, b), step_kernel_distance(m, t, spec) ** 2
    if term == "d3":
        a = sim.walk_step_scheme(m, n, spec, [t])
        b = sim.overlap_step_scheme(m, n, spec, [t])
        kv = np.asarray(kern.k_sub(t, np.arange(m) / m, spec))
        return sim.difference(a, b), float(np.sum(kv**2)) / n
    raise DomainError(f"unknown ladder term {term!r}; expected one of {LADDER_TERMS}")


def ladder_experiment(term: str, spec: KernelSpec, t: float, resolutions: Sequence[int], *, m: int | None = None,
                      M: int = 0, seed: int = 0, distribution: str = "gaussian", workers: int = 1) -> LadderResult:
    """Mean-square ladder distance at time ``t`` for each n in ``resolutions``.

    d1: floor-time scheme against exact-time scheme.  d2: overlap step scheme
    against exact-time scheme, with bound ||K^m - K||^2.  d3: whole-block step
    scheme against overlap step scheme, with bound sum_i K^2(t, (i-1)/m) / n.
    With ``M > 0`` each distance is also estimated from M paths.
    """
    from . import simulate as sim

    if not resolutions:
        raise DomainError("resolution list is empty")
    exact, mc, se, bound = [], [], [], []
    for r, n in enumerate(resolutions):
        diff, b = _ladder_pair(term, t, int(n), spec, m)
        exact.append(float(sim.exact_mean_square(diff)[-1]))
        bound.append(b)
        if M > 0:
            ens = sim.run_ensemble(diff, M, seed + r, distribution=distribution, workers=workers)
            e, s = empirical_mean_square(ens, len(diff.times) - 1)
            mc.append(e); se.append(s)
    res = [int(n) for n in resolutions]
    fit_exact = fit_rate(res, exact) if all(e > 0 for e in exact) else RateFit(None, None, None, [], True)
    fit_mc = fit_rate(res, mc) if mc and all(e > 0 for e in mc) else None
    params = {"H": spec.H, "m": m, "M": M, "seed": seed, "distribution": distribution}
    return LadderResult(term, float(t), res, exact, mc, se, fit_exact, fit_mc,
                        None if bound[0] is None else bound, params)
