import json
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as hst
from scipy import integrate, special

from subfbm import kernel as kern
from subfbm.errors import CalibrationError, DomainError, QuadratureError

from conftest import C_FBM, C_SUB

mp.mp.dps = 30


def mp_inner_sub(H, s, t):
    """int_s^t (x^2 - s^2)^a dx after x = s + w^(1/(a+1)), which leaves a smooth integrand."""
    a = mp.mpf(H) - mp.mpf(3) / 2
    q = 1 / (a + 1)
    s, t = mp.mpf(s), mp.mpf(t)
    return q * mp.quad(lambda w: (2 * s + w**q) ** a, mp.linspace(0, (t - s) ** (a + 1), 8))


def mp_inner_fbm(H, s, t):
    a = mp.mpf(H) - mp.mpf(3) / 2
    q = 1 / (a + 1)
    s, t = mp.mpf(s), mp.mpf(t)
    return q * mp.quad(lambda w: (s + w**q) ** (mp.mpf(H) - mp.mpf(1) / 2), mp.linspace(0, (t - s) ** (a + 1), 8))


def brute_inner_sub(H, s, t, panels=400):
    """Composite Gauss-Legendre on graded panels after the same substitution (independent of the Jacobi engine)."""
    a = H - 1.5
    q = 1 / (a + 1)
    W = (t - s) ** (a + 1)
    x, w = np.polynomial.legendre.leggauss(20)
    edges = np.linspace(0, W, panels + 1)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        u = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
        total += 0.5 * (hi - lo) * np.sum(w * q * (2 * s + u**q) ** a)
    return total


def molchan_c(H):
    return math.sqrt(H * (2 * H - 1) / special.beta(2 - 2 * H, H - 0.5))


def sub_c_closed(H):
    # sqrt(2) times the usual sub-fBm constant, folded with sqrt(pi) / (2^(H-1) Gamma(H - 1/2))
    CH = math.sqrt(2 * math.gamma(1 + 2 * H) * math.sin(math.pi * H) / math.pi)
    return CH * math.sqrt(math.pi) / (2 ** (H - 1) * math.gamma(H - 0.5))


# --- validation ---------------------------------------------------------------------------


@pytest.mark.parametrize("H", [0.5, 1.0, 0.4, 1.2, float("nan"), "x"])
def test_hurst_index_rejects_out_of_range(H):
    with pytest.raises(DomainError):
        kern.hurst_index(H)


def test_quadrature_config_invariants():
    q = kern.QuadratureConfig.for_hurst(0.75)
    assert q.singularity_exponent == -0.75
    with pytest.raises(DomainError):
        kern.QuadratureConfig(-0.75, abs_tol=0)
    with pytest.raises(DomainError):
        kern.QuadratureConfig(-0.75, max_subdivisions=0)
    with pytest.raises(DomainError):
        kern.KernelSpec(0.75, quad=kern.QuadratureConfig.for_hurst(0.6))
    with pytest.raises(DomainError):
        kern.KernelSpec(0.75, c_sub=-1.0)


# --- inner integrals ----------------------------------------------------------------------


def test_inner_integral_empty_range_is_zero():
    spec = kern.KernelSpec(0.75)
    assert kern.inner_integral(0.4, 0.4, spec) == 0.0


def test_inner_integral_domain_errors():
    spec = kern.KernelSpec(0.75)
    with pytest.raises(DomainError):
        kern.inner_integral(0.6, 0.5, spec)
    with pytest.raises(DomainError):
        kern.inner_integral(0.0, 0.5, spec)
    with pytest.raises(DomainError):
        kern.inner_integral(0.5, 1.5, spec)


def test_inner_integral_near_one_approaches_arccosh():
    # exponent -1/2 has the closed form arccosh(t/s); H = 1 - 1e-7 sits within O(1e-7) of it
    spec = kern.KernelSpec(1 - 1e-7)
    v = kern.inner_integral(0.5, 1.0, spec)
    assert v == pytest.approx(math.log(2 + math.sqrt(3)), rel=1e-5)
    assert math.log(2 + math.sqrt(3)) == pytest.approx(1.3169579, abs=1e-7)


@pytest.mark.parametrize("H", [0.55, 0.6, 0.75, 0.9, 0.99])
@pytest.mark.parametrize("s,t", [(0.5, 1.0), (0.05, 1.0), (0.3, 0.35), (0.001, 0.9), (0.4142, 1.0), (0.9, 1.0)])
def test_inner_integral_matches_mpmath(H, s, t):
    spec = kern.KernelSpec(H)
    ref = float(mp_inner_sub(H, s, t))
    assert kern.inner_integral(s, t, spec) == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("H", [0.6, 0.75, 0.9])
@pytest.mark.parametrize("s,t", [(0.5, 1.0), (0.05, 1.0), (0.3, 0.35), (0.01, 0.7)])
def test_fbm_inner_integral_matches_mpmath(H, s, t):
    spec = kern.KernelSpec(H)
    ref = float(mp_inner_fbm(H, s, t))
    assert kern.fbm_inner_integral(s, t, spec) == pytest.approx(ref, rel=1e-10)


def test_inner_integral_reference_point_h075():
    spec = kern.KernelSpec(0.75)
    ref = float(mp_inner_sub(0.75, 0.5, 1.0))
    assert kern.inner_integral(0.5, 1.0, spec) == pytest.approx(ref, rel=1e-10)
    assert kern.inner_integral(0.5, 1.0, spec, method="adaptive") == pytest.approx(ref, rel=1e-10)


def test_jacobi_and_adaptive_routes_agree():
    spec = kern.KernelSpec(0.7)
    s = np.array([0.01, 0.2, 0.5, 0.8])
    a = kern.inner_integral(s, 1.0, spec)
    b = kern.inner_integral(s, 1.0, spec, method="adaptive")
    np.testing.assert_allclose(a, b, rtol=1e-10)


def test_halving_tolerance_changes_less_than_error_bound():
    H = 0.75
    loose = kern.KernelSpec(H, quad=kern.QuadratureConfig.for_hurst(H, abs_tol=1e-8, rel_tol=1e-8))
    tight = kern.KernelSpec(H, quad=kern.QuadratureConfig.for_hurst(H, abs_tol=5e-9, rel_tol=5e-9))
    for s in (0.1, 0.5, 0.9):
        v1, e1 = kern.inner_integral(s, 1.0, loose, method="adaptive", full_output=True)
        v2, _ = kern.inner_integral(s, 1.0, tight, method="adaptive", full_output=True)
        assert abs(v1 - v2) <= max(e1, 1e-15)


def test_quadrature_failure_carries_estimate():
    H = 0.75
    spec = kern.KernelSpec(H, quad=kern.QuadratureConfig.for_hurst(H, abs_tol=1e-300, rel_tol=1e-300,
                                                                   max_subdivisions=1))
    with pytest.raises(QuadratureError) as info:
        kern.inner_integral(0.3, 1.0, spec)
    assert info.value.estimate is not None and info.value.error_bound is not None
    assert info.value.location is not None


# --- kernels ------------------------------------------------------------------------------


def test_k_sub_cross_check_brute_force(spec75):
    s, t = 0.25, 0.5
    ref = spec75.c_sub * s ** (1.5 - 0.75) * brute_inner_sub(0.75, s, t)
    assert kern.k_sub(t, s, spec75) == pytest.approx(ref, rel=1e-8)


def test_k_fbm_reference_point(spec75):
    ref = spec75.c_fbm * 0.5 ** (0.5 - 0.75) * float(mp_inner_fbm(0.75, 0.5, 1.0))
    assert kern.k_fbm(1.0, 0.5, spec75) == pytest.approx(ref, rel=1e-8)


def test_support_is_exact_zero():
    spec = kern.KernelSpec(0.75)
    for k in (kern.k_sub, kern.k_fbm):
        assert k(0.5, 0.5, spec) == 0.0
        assert k(0.5, 0.7, spec) == 0.0
        assert k(0.5, 0.0, spec) == 0.0
        assert k(0.0, 0.0, spec) == 0.0
    with pytest.raises(DomainError):
        kern.k_sub(1.2, 0.5, spec)


@settings(max_examples=60, deadline=None)
@given(H=hst.floats(0.52, 0.98), s=hst.floats(1e-4, 0.999), dt=hst.floats(1e-4, 1.0))
def test_positivity_and_monotonicity_in_t(H, s, dt):
    spec = kern.KernelSpec(H)
    t1 = min(1.0, s + dt)
    t2 = min(1.0, t1 + 0.5 * dt)
    if t1 <= s:
        return
    k1, k2 = kern.k_sub(t1, s, spec), kern.k_sub(t2, s, spec)
    assert k1 > 0
    assert k2 >= k1


@settings(max_examples=40, deadline=None)
@given(H=hst.floats(0.52, 0.98), v=hst.floats(1e-3, 0.999), t=hst.floats(0.05, 1.0))
def test_kernel_scaling_law(H, v, t):
    spec = kern.KernelSpec(H)
    for k in (kern.k_sub, kern.k_fbm):
        lhs = k(t, v * t, spec)
        rhs = t ** (H - 0.5) * k(1.0, v, spec)
        assert lhs == pytest.approx(rhs, rel=1e-11)


@pytest.mark.parametrize("kind", ["sub", "fbm"])
@pytest.mark.parametrize("H", [0.6, 0.75, 0.9])
def test_unit_primitive_matches_direct_quadrature(kind, H):
    spec = kern.KernelSpec(H)
    k = kern.kernel(kind)
    split = spec.unit(kind).split
    for x in (0.05, 0.3, split, 0.7, 1.0):
        ref = integrate.quad(lambda u: k(1.0, u, spec), 0, x, epsabs=1e-14, epsrel=1e-13, limit=200,
                             points=[p for p in (split,) if p < x] or None)[0]
        assert kern.unit_primitive(kind, x, spec) == pytest.approx(ref, rel=1e-11, abs=1e-14)


def test_cell_integral_clips_at_t(spec75):
    full = kern.cell_integral("sub", 0.5, 0.4, 0.5, spec75)
    over = kern.cell_integral("sub", 0.5, 0.4, 0.8, spec75)
    assert float(full) == float(over)
    assert float(kern.cell_integral("sub", 0.5, 0.6, 0.8, spec75)) == 0.0


# --- calibration --------------------------------------------------------------------------


@pytest.mark.parametrize("H", [0.6, 0.75, 0.9])
def test_calibration_fixed_point(calibrated, H):
    spec = calibrated(H)
    target = 2 - 2 ** (2 * H - 1)
    v = kern.variance_integral("sub", 1.0, spec)
    assert abs(v - target) / target < 1e-8
    assert abs(kern.variance_integral("fbm", 1.0, spec) - 1.0) < 1e-8


@pytest.mark.parametrize("H", [0.6, 0.75, 0.9])
def test_calibrated_constants_are_frozen(calibrated, H):
    spec = calibrated(H)
    assert spec.c_sub == pytest.approx(C_SUB[H], abs=1e-8)
    assert spec.c_fbm == pytest.approx(C_FBM[H], abs=1e-7)


@pytest.mark.parametrize("H", [0.6, 0.75, 0.9])
def test_calibrated_constants_match_closed_forms(calibrated, H):
    spec = calibrated(H)
    assert spec.c_fbm == pytest.approx(molchan_c(H), rel=1e-10)
    assert spec.c_sub == pytest.approx(sub_c_closed(H), rel=1e-10)


def test_variance_at_half(spec75):
    assert kern.variance_integral("sub", 0.5, spec75) == pytest.approx((2 - math.sqrt(2)) * 0.5**1.5, rel=1e-9)
    assert (2 - math.sqrt(2)) * 0.5**1.5 == pytest.approx(0.2071068, abs=1e-7)
    assert kern.variance_integral("fbm", 0.5, spec75) == pytest.approx(0.5**1.5, rel=1e-9)


def test_self_similarity_grid(spec75):
    res = kern.calibration_residuals(spec75)
    assert set(res) == {"sub", "fbm"}
    assert max(res["sub"].values()) < 1e-8
    assert max(res["fbm"].values()) < 1e-8


def test_calibration_grid_check_can_fail():
    with pytest.raises(CalibrationError) as info:
        kern.calibrate_sub(0.75, grid_tol=1e-30)
    assert len(info.value.residuals) == 10


def test_spec_json_round_trip(tmp_path, spec75):
    p = tmp_path / "spec.json"
    kern.save_spec(spec75, p)
    back = kern.load_spec(p)
    assert back == spec75
    doc = json.loads(p.read_text())
    assert set(doc) == {"H", "c_sub", "c_fbm", "quad"}
    assert set(doc["quad"]) == {"abs_tol", "rel_tol", "max_subdivisions"}
    with pytest.raises(DomainError):
        kern.KernelSpec.from_dict({"H": 0.75})


def test_calibration_is_deterministic(spec75):
    again = kern.calibrate(0.75)
    assert again.to_json() == spec75.to_json()
