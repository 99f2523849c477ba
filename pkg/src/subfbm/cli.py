"""Command-line entry point: calibrate, matrix, simulate, verify, convergence.

Exit codes: 0 success, 1 verification failure, 2 usage or configuration
error, 3 numerical (quadrature or calibration) failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
import time
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from . import discretize as disc
from . import kernel as kern
from . import simulate as sim
from . import stats as st
from .errors import CacheError, CalibrationError, DomainError, QuadratureError

log = logging.getLogger("subfbm")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
SUITES = ("covariance", "sandwich", "gaussianity", "ladder", "kernel")
SIM_SCHEMES = ("donsker", "sub_floor", "fbm", "sub_exact", "sub_step", "sub_walk_step", "sub_wiener")
FORMATS = ("csv", "bin")


class ConfigError(DomainError):
    """An invalid configuration field; the message names the field."""


class _JsonFormatter(logging.Formatter):
    def format(self, record):
        return json.dumps({"level": record.levelname, "logger": record.name, "message": record.getMessage()})


# --- configuration ------------------------------------------------------------------------


@dataclass
class RunConfig:
    """Every command parameter; command-specific validation picks what it needs."""

    H: float | None = None
    n: int | None = None
    m: int | None = None
    M: int | None = None
    scheme: str = "sub_floor"
    distribution: str = "rademacher"
    seed: int = 0
    workers: int = 1
    out: str = "."
    spec: str | None = None
    ensemble: str | None = None
    suite: str | None = None
    term: str = "d1"
    t: float | None = None
    times: list | None = None
    n_list: list | None = None
    m_list: list | None = None
    format: str = "csv"
    abs_tol: float | None = None
    rel_tol: float | None = None
    max_subdivisions: int | None = None
    grid_tol: float = 1e-8
    cache_dir: str | None = None
    no_cache: bool = False
    matrix_file: str | None = None


_CONFIG_FIELDS = {f.name for f in fields(RunConfig)}


def load_config(path, overrides: dict) -> RunConfig:
    """Merge a JSON config file with flag overrides (non-None flags win)."""
    data = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: {path} is not valid JSON ({exc.msg})") from exc
        if not isinstance(data, dict):
            raise ConfigError("config: top level must be a JSON object")
        data = {k.replace("-", "_"): v for k, v in data.items()}
        for key in data:
            if key not in _CONFIG_FIELDS:
                raise ConfigError(f"config: unknown field {key!r}")
    for key, value in overrides.items():
        if value is not None and key in _CONFIG_FIELDS:
            data[key] = value
    return _typed(RunConfig(**data))


def _typed(cfg: RunConfig) -> RunConfig:
    def num(name, kind, lo=None):
        v = getattr(cfg, name)
        if v is None:
            return
        try:
            if kind is int and (isinstance(v, bool) or float(v) != int(float(v))):
                raise ValueError
            v = kind(v)
        except (TypeError, ValueError):
            raise ConfigError(f"{name}: expected {kind.__name__}, got {getattr(cfg, name)!r}") from None
        if lo is not None and v < lo:
            raise ConfigError(f"{name}: must be >= {lo}, got {v}")
        setattr(cfg, name, v)

    for name in ("n", "m", "M", "max_subdivisions"):
        num(name, int, 1)
    num("workers", int, 1)
    num("seed", int, 0)
    if cfg.seed >= 2**64:
        raise ConfigError("seed: must fit in 64 bits")
    for name in ("H", "t", "abs_tol", "rel_tol", "grid_tol"):
        num(name, float)
    for name in ("abs_tol", "rel_tol", "grid_tol"):
        v = getattr(cfg, name)
        if v is not None and not v > 0:
            raise ConfigError(f"{name}: must be positive")
    if cfg.H is not None:
        try:
            cfg.H = kern.hurst_index(cfg.H)
        except DomainError as exc:
            raise ConfigError(f"H: {exc}") from None
    if cfg.t is not None and not 0 < cfg.t <= 1:
        raise ConfigError("t: must lie in (0, 1]")
    for name, kind in (("times", float), ("n_list", int), ("m_list", int)):
        v = getattr(cfg, name)
        if v is None:
            continue
        if isinstance(v, str):
            v = [x for x in v.replace(",", " ").split() if x]
        try:
            v = [kind(x) for x in v]
        except (TypeError, ValueError):
            raise ConfigError(f"{name}: expected a list of {kind.__name__}") from None
        if kind is int and any(x < 1 for x in v):
            raise ConfigError(f"{name}: entries must be >= 1")
        if kind is float and any(not 0 <= x <= 1 for x in v):
            raise ConfigError(f"{name}: entries must lie in [0, 1]")
        setattr(cfg, name, v)
    if cfg.distribution not in sim.DISTRIBUTIONS:
        raise ConfigError(f"distribution: expected one of {sim.DISTRIBUTIONS}, got {cfg.distribution!r}")
    if cfg.format not in FORMATS:
        raise ConfigError(f"format: expected one of {FORMATS}, got {cfg.format!r}")
    return cfg


def _require(cfg: RunConfig, *names):
    for name in names:
        if getattr(cfg, name) is None:
            raise ConfigError(f"{name}: required for this command")


def _quad(cfg: RunConfig, H: float) -> kern.QuadratureConfig:
    over = {k: getattr(cfg, k) for k in ("abs_tol", "rel_tol", "max_subdivisions") if getattr(cfg, k) is not None}
    return kern.QuadratureConfig.for_hurst(H, **over)


def _spec(cfg: RunConfig) -> kern.KernelSpec:
    _require(cfg, "spec")
    path = Path(cfg.spec)
    if not path.is_file():
        raise ConfigError(f"spec: file not found: {path}")
    try:
        return kern.load_spec(path)
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ConfigError(f"spec: {path} is not a kernel spec ({exc})") from exc


def _out(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cache_dir(cfg: RunConfig) -> Path:
    return Path(cfg.cache_dir) if cfg.cache_dir else _out(cfg) / "cache"


# --- commands -----------------------------------------------------------------------------


def cmd_calibrate(cfg: RunConfig) -> int:
    _require(cfg, "H")
    out = _out(cfg)
    quad = _quad(cfg, cfg.H)
    try:
        spec = kern.calibrate(cfg.H, quad, grid_tol=cfg.grid_tol)
    except CalibrationError as exc:
        (out / "calibration_residuals.json").write_text(json.dumps(exc.residuals, indent=2, sort_keys=True) + "\n")
        log.error("%s", exc)
        return EXIT_NUMERIC
    path = out / f"spec_H{cfg.H:g}.json"
    kern.save_spec(spec, path)
    resid = kern.calibration_residuals(spec)
    worst = {k: max(v.values()) for k, v in resid.items()}
    print(f"calibrated H={spec.H:g} c_sub={spec.c_sub:.12g} c_fbm={spec.c_fbm:.12g} "
          f"max residual sub={worst['sub']:.2e} fbm={worst['fbm']:.2e} -> {path}")
    return EXIT_OK


def build_scheme(cfg: RunConfig, spec: kern.KernelSpec | None) -> tuple[sim.LinearScheme, bool | None]:
    """Scheme named by ``cfg.scheme`` and whether its matrix came from the cache."""
    scheme = cfg.scheme
    if scheme not in SIM_SCHEMES:
        raise ConfigError(f"scheme: expected one of {SIM_SCHEMES}, got {scheme!r}")
    if scheme == "donsker":
        _require(cfg, "n")
        return sim.donsker_scheme(cfg.n), None
    if spec is None:
        raise ConfigError("spec: required for kernel schemes")
    if scheme == "sub_wiener":
        _require(cfg, "m")
        return sim.wiener_scheme(cfg.m, spec, cfg.times), None
    _require(cfg, "n")
    if scheme == "sub_walk_step":
        _require(cfg, "m")
        return sim.walk_step_scheme(cfg.m, cfg.n, spec, cfg.times), None
    if scheme in ("sub_step",):
        _require(cfg, "m")
    if scheme == "sub_exact":
        _require(cfg, "times")
    times = cfg.times if scheme in ("sub_exact", "sub_step") else None
    mat, hit = disc.cached_matrix(scheme, cfg.n, spec, _cache_dir(cfg), m=cfg.m if scheme == "sub_step" else None,
                                  times=times, workers=cfg.workers, use_cache=not cfg.no_cache)
    return sim.matrix_scheme(mat), hit


def cmd_matrix(cfg: RunConfig, action: str) -> int:
    if action == "inspect":
        _require(cfg, "matrix_file")
        try:
            mat = disc.load_matrix(cfg.matrix_file)
        except FileNotFoundError as exc:
            raise ConfigError(f"matrix_file: file not found: {cfg.matrix_file}") from exc
        hdr = mat.header()
        hdr.pop("times", None)
        var = mat.row_variance()
        hdr["final_row_variance"] = float(var[-1])
        print(json.dumps(hdr, indent=2, sort_keys=True))
        return EXIT_OK
    spec = _spec(cfg)
    if cfg.scheme not in disc.SCHEMES:
        raise ConfigError(f"scheme: expected one of {disc.SCHEMES}, got {cfg.scheme!r}")
    t0 = time.perf_counter()
    _, hit = build_scheme(cfg, spec)
    print(f"matrix scheme={cfg.scheme} n={cfg.n} cache={'hit' if hit else 'miss'} "
          f"time={time.perf_counter() - t0:.2f}s dir={_cache_dir(cfg)}")
    return EXIT_OK


def _ensemble_path(cfg: RunConfig) -> Path:
    return _out(cfg) / f"ensemble.{cfg.format}"


def cmd_simulate(cfg: RunConfig) -> int:
    _require(cfg, "M")
    spec = None if cfg.scheme == "donsker" else _spec(cfg)
    t0 = time.perf_counter()
    scheme, hit = build_scheme(cfg, spec)
    ens = sim.run_ensemble(scheme, cfg.M, cfg.seed, distribution=cfg.distribution, workers=cfg.workers)
    path = _ensemble_path(cfg)
    sidecar = sim.save_ensemble(ens, path, cfg.format)
    meta = json.loads(sidecar.read_text())
    meta["wall_time_s"] = time.perf_counter() - t0
    meta["matrix_cache"] = None if hit is None else ("hit" if hit else "miss")
    sidecar.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    cache = "n/a" if hit is None else ("hit" if hit else "miss")
    print(f"simulate scheme={scheme.name} n={scheme.n} M={ens.M} time={meta['wall_time_s']:.2f}s "
          f"cache={cache} -> {path}")
    return EXIT_OK


def _grid_pairs(times: np.ndarray, wanted: Sequence[float]) -> list[int]:
    idx = []
    for w in wanted:
        j = int(np.argmin(np.abs(times - w)))
        if abs(times[j] - w) < 1e-12:
            idx.append(j)
    return idx


COV_TIMES = (0.25, 0.5, 0.75, 1.0)
SANDWICH_TIMES = (0.0, 0.125, 0.25, 0.5, 0.75, 1.0)


def covariance_pairs(times: np.ndarray) -> list[tuple[int, int]]:
    idx = _grid_pairs(times, COV_TIMES)
    return [(i, j) for a, i in enumerate(idx) for j in idx[a:]]


def sandwich_pairs(times: np.ndarray) -> list[tuple[int, int]]:
    idx = _grid_pairs(times, SANDWICH_TIMES)
    return [(i, j) for a, i in enumerate(idx) for j in idx[a + 1 :]]


def _ensemble_for_verify(cfg: RunConfig) -> sim.PathEnsemble:
    if cfg.ensemble is not None:
        path = Path(cfg.ensemble)
        if not path.is_file():
            raise ConfigError(f"ensemble: file not found: {path}")
        return sim.load_ensemble(path)
    _require(cfg, "M")
    scheme, _ = build_scheme(cfg, _spec(cfg))
    return sim.run_ensemble(scheme, cfg.M, cfg.seed, distribution=cfg.distribution, workers=cfg.workers)


def _target_kind(ens: sim.PathEnsemble) -> str:
    if ens.scheme == "donsker":
        return "bm"
    return "fbm" if ens.scheme.startswith("fbm") else "sub"


def suite_kernel(spec: kern.KernelSpec, cfg: RunConfig) -> list[st.StatReport]:
    """Calibration residuals, kernel covariance reproduction and the step-kernel L2 table."""
    resid = kern.calibration_residuals(spec)
    pts = [[k, t] for k in resid for t in resid[k]]
    vals = [resid[k][t] for k, t in pts]
    calib = st.StatReport("calibration_residuals", pts, vals, [0.0] * len(vals), [0.0] * len(vals),
                          [None] * len(vals), [v < cfg.grid_tol for v in vals], cfg.grid_tol)
    grid = np.round(np.arange(1, 11) / 10, 1)
    pts, est, tgt, ok = [], [], [], []
    for s in grid:
        for t in grid:
            v = kern.covariance_integral("sub", float(s), float(t), spec)
            c = st.cov_analytic("sub", spec.H, float(s), float(t))
            pts.append([float(s), float(t)]); est.append(v); tgt.append(c); ok.append(abs(v - c) < 1e-6)
    cov = st.StatReport("kernel_covariance", pts, est, tgt, [0.0] * len(pts),
                        [abs(a - b) for a, b in zip(est, tgt)], ok, 1e-6)
    ms = cfg.m_list or [4, 16, 64, 256]
    d = [st.step_kernel_distance(m, 1.0, spec) for m in ms]
    dec = [True] + [b < a for a, b in zip(d[:-1], d[1:])]
    l2 = st.StatReport("step_kernel_l2", ms, d, [None] * len(ms), [0.0] * len(ms), [None] * len(ms), dec, 0.0,
                       {"t": 1.0, "criterion": "strictly decreasing in m"})
    return [calib, cov, l2]


def suite_ladder(spec: kern.KernelSpec, cfg: RunConfig) -> list[st.StatReport]:
    """D1 slopes at the fixture times, D3 slope at t = 1, D2 dominance by the L2 kernel distance."""
    M = cfg.M or 0
    reports = []
    n_list = cfg.n_list or [64, 256, 1024]
    target = -2.0 * spec.H
    for t in st.D1_TIMES:
        r = st.ladder_experiment("d1", spec, t, n_list, M=M, seed=cfg.seed, distribution=cfg.distribution,
                                 workers=cfg.workers)
        reports.append(_rate_report(f"d1_t{t:.4g}", r, target, 0.3))
    m = cfg.m or 16
    d3_list = [m * (max(1, n // m)) + 1 for n in n_list]
    r = st.ladder_experiment("d3", spec, 1.0, d3_list, m=m, M=M, seed=cfg.seed + 100,
                             distribution=cfg.distribution, workers=cfg.workers)
    reports.append(_rate_report("d3_t1", r, -1.0, 0.3))
    r = st.ladder_experiment("d2", spec, 1.0, n_list, m=m, M=M, seed=cfg.seed + 200,
                             distribution=cfg.distribution, workers=cfg.workers)
    ok = [e <= b * (1 + 1e-9) for e, b in zip(r.exact, r.bound)]
    if M:
        ok = [o and mc <= b + st.Z_LEVEL * se for o, mc, b, se in zip(ok, r.mc, r.bound, r.se)]
    reports.append(st.StatReport("d2_dominance", r.resolutions, r.mc or r.exact, r.bound, r.se or [0.0] * len(ok),
                                 [None] * len(ok), ok, st.Z_LEVEL, {"exact": r.exact, "m": m}))
    return reports


def _rate_report(name: str, r: st.LadderResult, target: float, tol: float) -> st.StatReport:
    slope = r.fit_exact.slope
    ok = slope is not None and abs(slope - target) <= tol
    passed = [ok]
    if r.mc:
        passed.append(r.mc_consistent())
    return st.StatReport(name, [r.t], [slope], [target], [r.fit_exact.se], [None], passed, tol,
                         {"ladder": r.to_dict()})


def cmd_verify(cfg: RunConfig) -> int:
    _require(cfg, "suite")
    if cfg.suite not in SUITES:
        raise ConfigError(f"suite: expected one of {SUITES}, got {cfg.suite!r}")
    out = _out(cfg)
    if cfg.suite == "kernel":
        reports = suite_kernel(_spec(cfg), cfg)
    elif cfg.suite == "ladder":
        reports = suite_ladder(_spec(cfg), cfg)
    else:
        ens = _ensemble_for_verify(cfg)
        kind = _target_kind(ens)
        if cfg.suite == "covariance":
            reports = [st.check_covariance(ens, covariance_pairs(ens.times), st.CovarianceTarget(ens.H, kind))]
        elif cfg.suite == "sandwich":
            if kind != "sub":
                raise ConfigError("suite: the sandwich check applies to sub-fBm ensembles only")
            reports = [st.check_variance_sandwich(ens, sandwich_pairs(ens.times))]
        else:
            j = ens.index_of(1.0)
            sd = float(np.sqrt(st.CovarianceTarget(ens.H, kind).variance(1.0)))
            reports = [st.gaussianity_test(ens.values[:, j], sd)]
    doc = {"suite": cfg.suite, "verdict": "pass" if all(r.verdict for r in reports) else "fail",
           "reports": [r.to_dict() for r in reports]}
    path = out / f"report_{cfg.suite}.json"
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    for r in reports:
        print(r.summary())
    print(f"verify suite={cfg.suite} verdict={doc['verdict']} -> {path}")
    return EXIT_OK if doc["verdict"] == "pass" else EXIT_FAIL


def cmd_convergence(cfg: RunConfig) -> int:
    spec = _spec(cfg)
    if cfg.term not in st.LADDER_TERMS:
        raise ConfigError(f"term: expected one of {st.LADDER_TERMS}, got {cfg.term!r}")
    if not cfg.n_list:
        raise ConfigError("n_list: must contain at least one resolution")
    t = cfg.t if cfg.t is not None else (st.D1_TIMES[0] if cfg.term == "d1" else 1.0)
    m = cfg.m if cfg.m is not None else (None if cfg.term == "d1" else 16)
    r = st.ladder_experiment(cfg.term, spec, t, cfg.n_list, m=m, M=cfg.M or 0, seed=cfg.seed,
                             distribution=cfg.distribution, workers=cfg.workers)
    out = _out(cfg)
    use_mc = bool(r.mc)
    errors, ses = (r.mc, r.se) if use_mc else (r.exact, [None] * len(r.exact))
    fit = (r.fit_mc if use_mc else r.fit_exact) or st.RateFit(None, None, None, [], True)
    csv_path = out / f"convergence_{cfg.term}.csv"
    st.write_convergence_csv(csv_path, r.resolutions, errors, ses, fit)
    records = [{"series": f"{cfg.term}_exact", "x": n, "y": e} for n, e in zip(r.resolutions, r.exact)]
    records += [{"series": f"{cfg.term}_mc", "x": n, "y": e, "se": s} for n, e, s in zip(r.resolutions, r.mc, r.se)]
    st.write_long_csv(out / f"convergence_{cfg.term}_long.csv", records)
    (out / f"convergence_{cfg.term}.json").write_text(json.dumps(r.to_dict(), indent=2, sort_keys=True) + "\n")
    slope = "degenerate" if fit.degenerate else f"{fit.slope:.4f}"
    print(f"convergence term={cfg.term} t={t:.6g} slope={slope} (exact fit "
          f"{'degenerate' if r.fit_exact.degenerate else f'{r.fit_exact.slope:.4f}'}) -> {csv_path}")
    return EXIT_OK


# --- argument parsing ---------------------------------------------------------------------


def _global_flags(defaults: bool) -> argparse.ArgumentParser:
    # shared by the top level and each subcommand so flags work in either position
    d = (lambda v: v) if defaults else (lambda v: argparse.SUPPRESS)
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", default=d(None), help="JSON config file; flags override its fields")
    p.add_argument("--seed", type=int, default=d(None), help="master seed (unsigned 64-bit)")
    p.add_argument("--workers", type=int, default=d(None), help="parallel workers (does not change outputs)")
    p.add_argument("--out", default=d(None), help="output directory")
    p.add_argument("--no-cache", action="store_true", default=d(None), help="rebuild matrices, ignore the cache")
    p.add_argument("--json-logs", action="store_true", default=d(False), help="log as JSON lines on stderr")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="subfbm", parents=[_global_flags(True)],
                                     description="Random-walk simulation and verification of sub-fBm.")
    sub = parser.add_subparsers(dest="command", required=True)
    g = _global_flags(False)

    def common_model(p, scheme=True):
        p.add_argument("--spec", help="calibrated kernel spec JSON")
        p.add_argument("--n", type=int)
        p.add_argument("--m", type=int)
        if scheme:
            p.add_argument("--scheme", choices=SIM_SCHEMES)
        p.add_argument("--times", help="comma-separated times in [0, 1]")
        p.add_argument("--cache-dir")

    p = sub.add_parser("calibrate", parents=[g], help="calibrate the kernel constants for H")
    p.add_argument("--H", type=float)
    p.add_argument("--abs-tol", type=float)
    p.add_argument("--rel-tol", type=float)
    p.add_argument("--max-subdivisions", type=int)
    p.add_argument("--grid-tol", type=float)

    p = sub.add_parser("matrix", parents=[g], help="build or inspect cached kernel matrices")
    p.add_argument("action", choices=("build", "inspect"))
    p.add_argument("matrix_file", nargs="?")
    common_model(p)

    p = sub.add_parser("simulate", parents=[g], help="simulate an ensemble of paths")
    common_model(p)
    p.add_argument("--M", type=int)
    p.add_argument("--distribution", choices=sim.DISTRIBUTIONS)
    p.add_argument("--format", choices=FORMATS)

    p = sub.add_parser("verify", parents=[g], help="run a verification suite")
    p.add_argument("--suite", help=f"one of {', '.join(SUITES)}")
    p.add_argument("--ensemble", help="ensemble file written by simulate")
    common_model(p)
    p.add_argument("--M", type=int)
    p.add_argument("--distribution", choices=sim.DISTRIBUTIONS)
    p.add_argument("--n-list", help="comma-separated resolutions for the ladder suite")
    p.add_argument("--m-list", help="comma-separated step resolutions for the kernel suite")

    p = sub.add_parser("convergence", parents=[g], help="error-versus-resolution table for a ladder term")
    common_model(p, scheme=False)
    p.add_argument("--term", choices=st.LADDER_TERMS)
    p.add_argument("--t", type=float)
    p.add_argument("--n-list", help="comma-separated resolutions")
    p.add_argument("--M", type=int)
    p.add_argument("--distribution", choices=sim.DISTRIBUTIONS)
    return parser


def _setup_logging(json_logs: bool) -> None:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(_JsonFormatter() if json_logs else logging.Formatter("%(levelname)s: %(message)s"))
    log.handlers[:] = [handler]
    log.setLevel(logging.INFO)
    log.propagate = False


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    _setup_logging(bool(args.json_logs))
    overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config", "json_logs", "action")}
    if args.command == "verify" and args.suite is not None and args.suite not in SUITES:
        log.error("suite: expected one of %s, got %r", SUITES, args.suite)
        return EXIT_USAGE
    try:
        cfg = load_config(args.config, overrides)
        if args.command == "calibrate":
            return cmd_calibrate(cfg)
        if args.command == "matrix":
            return cmd_matrix(cfg, args.action)
        if args.command == "simulate":
            return cmd_simulate(cfg)
        if args.command == "verify":
            return cmd_verify(cfg)
        return cmd_convergence(cfg)
    except (QuadratureError, CalibrationError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC
    except (DomainError, CacheError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
