"""Acceptance criteria, each at its stated tolerance.

Every check appends one PASS/FAIL line (printed immediately and repeated in
the terminal summary).  Monte Carlo runs use fixed seeds.
"""

import math
import time

import numpy as np
import pytest

from subfbm import discretize as disc
from subfbm import kernel as kern
from subfbm import simulate as sim
from subfbm import stats as st

from conftest import ACCEPTANCE_LINES

GRID_T = kern.DEFAULT_GRID
SUB_TIMES = (0.0, 0.125, 0.25, 0.5, 0.75, 1.0)
COV_PAIRS = ((0.25, 0.25), (0.25, 0.5), (0.5, 0.5), (0.5, 1.0), (0.75, 1.0), (1.0, 1.0))
FIXTURE_T = (0.37, 0.61, 0.93)


def record(criterion: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def rows_at(matrix: disc.KernelMatrix, times) -> sim.LinearScheme:
    """Scheme restricted to the rows at ``times`` (same innovations, fewer outputs)."""
    idx = [int(round(t * matrix.n)) for t in times]
    return sim.LinearScheme(matrix.scheme, matrix.times[idx], matrix.weights[idx], n=matrix.n, H=matrix.H,
                            matrix_checksum=matrix.checksum)


@pytest.fixture(scope="module")
def floor256(calibrated):
    return {H: disc.build_matrix_floor(256, calibrated(H)) for H in (0.6, 0.75, 0.9)}


# --- 1: calibration fixed point -------------------------------------------------------------


@pytest.mark.parametrize("H", [0.6, 0.75, 0.9])
def test_c1_calibration_fixed_point(calibrated, H):
    spec = calibrated(H)
    target = kern.sub_variance_constant(H)
    unit = abs(kern.variance_integral("sub", 1.0, spec) - target) / target
    grid = max(abs(kern.variance_integral("sub", t, spec) - target * t ** (2 * H)) / t ** (2 * H) for t in GRID_T)
    ok = unit < 1e-8 and grid < 1e-6
    record(f"C1 calibration H={H}", ok, f"unit residual {unit:.2e} (<1e-8), worst grid residual {grid:.2e} (<1e-6)")
    assert ok


# --- 2: covariance reproduction by the kernel -----------------------------------------------


def test_c2_kernel_covariance_reproduction(spec75):
    worst = 0.0
    for s in GRID_T:
        for t in GRID_T:
            v = kern.covariance_integral("sub", s, t, spec75)
            worst = max(worst, abs(v - st.cov_analytic("sub", 0.75, s, t)))
    ok = worst < 1e-6
    record("C2 kernel covariance 10x10 H=0.75", ok, f"max abs error {worst:.2e} (<1e-6)")
    assert ok


# --- 3, 4, 7: Monte Carlo covariance, marginal and sandwich ---------------------------------


def _ensemble(floor, H, distribution, seed, M=100_000):
    return sim.run_ensemble(rows_at(floor[H], SUB_TIMES), M, seed, distribution=distribution)


@pytest.mark.parametrize("distribution,crit", [("gaussian", "C3"), ("rademacher", "C7/C3")])
def test_c3_finite_dimensional_convergence(floor256, distribution, crit):
    ens = _ensemble(floor256, 0.75, distribution, seed=3001)
    pairs = [(ens.index_of(s), ens.index_of(t)) for s, t in COV_PAIRS]
    rep = st.check_covariance(ens, pairs, st.CovarianceTarget(0.75, "sub"))
    zs = ", ".join(f"{z:+.2f}" for z in rep.z)
    record(f"{crit} covariance n=256 M=1e5 {distribution}", rep.verdict, f"z-scores [{zs}] (|z|<=3)")
    sd = math.sqrt(kern.sub_variance_constant(0.75))
    ks = st.gaussianity_test(ens.values[:, ens.index_of(1.0)], sd)
    record(f"{crit} KS X_n(1) {distribution}", ks.verdict,
           f"D={ks.metadata['statistic']:.4f}, p={ks.metadata['p_value']:.3f} (>=0.01)")
    assert rep.verdict and ks.verdict


@pytest.mark.parametrize("H", [0.6, 0.9])
@pytest.mark.parametrize("distribution,crit", [("gaussian", "C4"), ("rademacher", "C7/C4")])
def test_c4_variance_sandwich(floor256, H, distribution, crit):
    ens = _ensemble(floor256, H, distribution, seed=4001 + int(100 * H))
    idx = [ens.index_of(t) for t in SUB_TIMES]
    pairs = [(i, j) for a, i in enumerate(idx) for j in idx[a + 1 :]]
    rep = st.check_variance_sandwich(ens, pairs)
    record(f"{crit} sandwich H={H} n=256 M=1e5 {distribution}", rep.verdict,
           f"{sum(rep.passed)}/{len(rep.passed)} pairs inside [lower-3SE, upper+3SE], worst excess z={max(rep.z):+.2f}")
    assert rep.verdict


# --- 5: proof-ladder rates -------------------------------------------------------------------


@pytest.mark.parametrize("t", FIXTURE_T)
def test_c5_d1_rate_at_fixture_times(spec75, t):
    r = st.ladder_experiment("d1", spec75, t, [64, 256, 1024], M=20_000, seed=5001)
    slope = r.fit_exact.slope
    ok = abs(slope + 1.5) <= 0.3
    gaps = [t - disc.floor_index(n, t) / n for n in r.resolutions]
    record(f"C5 D1 slope t={t}", ok,
           f"slope {slope:+.3f} (target -1.5 +/- 0.3); Monte Carlo slope {r.fit_mc.slope:+.3f}; "
           f"floor gaps {', '.join(f'{g:.3e}' for g in gaps)}")
    assert r.mc_consistent()
    assert ok


def test_c5_d1_rate_at_shrinking_gap(spec75):
    # t = 1/3 has floor gap exactly 1/(3n) at every n, so the rate is measurable
    r = st.ladder_experiment("d1", spec75, 1.0 / 3.0, [64, 256, 1024], M=20_000, seed=5101)
    ok = abs(r.fit_exact.slope + 1.5) <= 0.3 and r.mc_consistent()
    record("C5 D1 slope t=1/3 (gap 1/(3n))", ok,
           f"slope {r.fit_exact.slope:+.3f} (target -1.5 +/- 0.3); Monte Carlo slope {r.fit_mc.slope:+.3f}")
    assert ok


def test_c5_d3_rate_stated_resolutions(spec75):
    r = st.ladder_experiment("d3", spec75, 1.0, [64, 256, 1024], m=16, M=20_000, seed=5201)
    ok = (not r.fit_exact.degenerate) and abs(r.fit_exact.slope + 1.0) <= 0.3
    record("C5 D3 slope m=16 n in {64,256,1024}", ok,
           f"distances {', '.join(f'{e:.1e}' for e in r.exact)}; slope "
           f"{'undefined (all distances exactly 0)' if r.fit_exact.degenerate else f'{r.fit_exact.slope:+.3f}'}")
    assert ok


def test_c5_d3_rate_with_fractional_cells(spec75):
    r = st.ladder_experiment("d3", spec75, 1.0, [65, 257, 1025], m=16, M=20_000, seed=5301)
    bound_ok = all(e <= 4 * b for e, b in zip(r.exact, r.bound))
    ok = abs(r.fit_exact.slope + 1.0) <= 0.3 and abs(r.fit_mc.slope + 1.0) <= 0.3 and r.mc_consistent()
    record("C5 D3 slope m=16 n in {65,257,1025}", ok and bound_ok,
           f"slope {r.fit_exact.slope:+.3f}, Monte Carlo slope {r.fit_mc.slope:+.3f} (target -1 +/- 0.3); "
           f"max distance/bound {max(e / b for e, b in zip(r.exact, r.bound)):.3f}")
    assert ok and bound_ok


def test_c5_step_kernel_l2_decreasing(spec75):
    ms = [4, 16, 64, 256]
    d = [st.step_kernel_distance(m, 1.0, spec75) for m in ms]
    ok = all(b < a for a, b in zip(d[:-1], d[1:]))
    record("C5 step-kernel L2 strictly decreasing", ok, ", ".join(f"m={m}: {v:.5f}" for m, v in zip(ms, d)))
    assert ok


def test_c5_d2_dominated_by_kernel_distance(spec75):
    r = st.ladder_experiment("d2", spec75, 1.0, [64, 256, 1024], m=16, M=20_000, seed=5401)
    ok = all(e <= b for e, b in zip(r.exact, r.bound)) and all(
        mc <= b + 3 * se for mc, b, se in zip(r.mc, r.bound, r.se))
    record("C5 D2 dominated by ||K^m-K||^2 (m=16)", ok,
           f"distances {', '.join(f'{e:.5f}' for e in r.exact)} <= bound {r.bound[0]:.5f}")
    assert ok


# --- 6: oracle equivalence -------------------------------------------------------------------


def test_c6_two_sample_against_cholesky_oracle(spec75):
    times = (0.25, 0.5, 1.0)
    mat = disc.build_matrix_floor(512, spec75)
    ens = sim.run_ensemble(rows_at(mat, times), 10_000, 6001, distribution="gaussian")
    oracle = st.cholesky_oracle("sub", 0.75, times).sample(10_000, 6002)
    rep = st.compare_marginals(ens.values, oracle, times)
    record("C6 two-sample KS vs Cholesky oracle n=512 M=1e4", rep.verdict,
           ", ".join(f"t={t}: p={p:.3f}" for t, p in zip(times, rep.z)))
    assert rep.verdict


# --- 8: determinism and performance ----------------------------------------------------------


def test_c8_determinism_and_performance(spec75, tmp_path):
    t0 = time.perf_counter()
    mat, hit = disc.cached_matrix("sub_floor", 1024, spec75, tmp_path)
    build = time.perf_counter() - t0
    mat2, hit2 = disc.cached_matrix("sub_floor", 1024, spec75, tmp_path)
    assert not hit and hit2 and mat2.checksum == mat.checksum
    scheme = sim.matrix_scheme(mat2)
    t0 = time.perf_counter()
    a = sim.run_ensemble(scheme, 10_000, 8001)
    run = time.perf_counter() - t0
    b = sim.run_ensemble(scheme, 10_000, 8001, workers=4)
    same = np.array_equal(a.values, b.values)
    ok = same and run < 300
    record("C8 determinism + n=1024 M=1e4", ok,
           f"bit-identical across 1 and 4 workers: {same}; matrix build {build:.1f}s (cached reload hit), "
           f"ensemble {run:.1f}s (budget 300s)")
    assert ok
