"""Bessel quadrature and the two weighted Bessel-sum formulas."""

import cmath
import math

import numpy as np
import pytest
from scipy.special import jv

from skrlab.asymptotics import (
    BesselSumParams,
    WeightFunction,
    bessel_J,
    even_bessel_sum,
    g_oscillatory,
    ik_integral,
    s_asymptotic,
    s_direct,
    single_bessel_sum,
)


@pytest.fixture(scope="module")
def w64():
    return WeightFunction(64)


@pytest.fixture(scope="module")
def w128():
    return WeightFunction(128)


# ---------------------------------------------------------------------------
# bessel_J
# ---------------------------------------------------------------------------

def test_bessel_trivial_and_envelope():
    assert bessel_J(0, 0) == 1.0
    with pytest.raises(ValueError):
        bessel_J(20000, 1.0)
    with pytest.raises(ValueError):
        bessel_J(1, 2e7)
    with pytest.raises(ValueError):
        bessel_J(1.5, 1.0)


def test_bessel_small_regime_bound():
    assert abs(bessel_J(39, 10)) <= 2.0 ** -40 * 10


def test_bessel_vs_power_series():
    # ascending series of J_1 at x = 1
    x = 1.0
    total = 0.0
    for m in range(20):
        total += (-1) ** m * (x / 2.0) ** (1 + 2 * m) / (
            math.factorial(m) * math.factorial(m + 1))
    assert abs(bessel_J(1, 1.0) - total) < 1e-12


def test_bessel_vs_library_route():
    for l, x in [(0, 1.0), (2, 7.5), (17, 3.0), (50, 60.0),
                 (200, 350.0), (513, 430.0)]:
        assert abs(bessel_J(l, x) - jv(l, x)) < 1e-10


# ---------------------------------------------------------------------------
# weight function
# ---------------------------------------------------------------------------

def test_weight_support_and_shape(w64):
    assert w64(96.0) == 1.0
    assert w64(64.0) == 0.0
    assert w64(128.0) == 0.0
    assert w64(50.0) == 0.0
    # symmetric bump about 3K/2
    for d in (3.0, 11.0, 25.0):
        assert w64(96.0 - d) == pytest.approx(w64(96.0 + d), rel=1e-14)
    assert 0.0 < w64(70.0) < 1.0


def test_weight_derivatives_vs_finite_differences(w64):
    for j, h in ((1, 1e-4), (2, 1e-3)):
        for x in (75.0, 96.0, 110.0):
            fd = sum((-1) ** i * math.comb(j, i) * w64(x + (j / 2.0 - i) * h)
                     for i in range(j + 1)) / h ** j
            assert w64.deriv(j, x) == pytest.approx(fd, rel=1e-6, abs=1e-9)


def test_weight_derivative_bounds(w64):
    for j in (0, 1, 2, 6):
        cj = w64.deriv_bound(j)
        assert math.isfinite(cj)
        grid = np.linspace(64.0, 128.0, 257)
        assert np.max(np.abs(w64.deriv(j, grid))) <= cj * 64.0 ** -j + 1e-12


def test_wcheck_zero_frequency(w64):
    # at v = 0 the transform reduces to a plain integral of the bump
    grid = np.linspace(64.0, 128.0, 20001)
    plain = math.sqrt(2.0 / math.pi) * np.trapezoid(w64(grid), grid)
    val = w64.wcheck(0.0)
    assert val.imag == pytest.approx(0.0, abs=1e-12)
    assert val.real == pytest.approx(plain, rel=1e-9)


def test_hat_zero_is_mass(w64):
    grid = np.linspace(64.0, 128.0, 20001)
    plain = np.trapezoid(w64(grid), grid)
    assert w64.hat(0.0).real == pytest.approx(plain, rel=1e-9)


# ---------------------------------------------------------------------------
# single-Bessel average
# ---------------------------------------------------------------------------

def test_single_sum_residual_and_scaling():
    worst = {}
    for K in (128, 256):
        w = WeightFunction(K)
        c = 0.0
        for xf in (1.3, 1.5, 1.7):
            x = xf * K
            for a in (0, 2):
                direct, formula = single_bessel_sum(a, x, w)
                resid = abs(direct - formula)
                assert resid <= 100.0 * x / K ** 3
                c = max(c, resid / (x / K ** 3))
        worst[K] = c
    # the residual scales like x/K^3: doubling K at fixed x/K cuts it by
    # about 8x, which in terms of the fitted constants reads as follows
    reduction = 4.0 * worst[128] / worst[256]
    assert 4.0 <= reduction <= 16.0


def test_single_sum_presum_smallness(w128):
    direct, formula = single_bessel_sum(0, 128.0 / 200.0, w128)
    assert abs(direct) < 1e-20
    assert formula == 0.0


def test_single_sum_validation(w64):
    with pytest.raises(ValueError):
        single_bessel_sum(1, 96.0, w64)
    with pytest.raises(ValueError):
        single_bessel_sum(0, -1.0, w64)


def test_even_sum_variant(w64):
    # the alternating even-k average keeps only the oscillatory term; probed
    # where that term is O(1) so the constant in front of g is pinned
    for x in (2048.0, 4096.0):
        direct, formula = even_bessel_sum(x, w64)
        assert abs(formula) > 0.1
        assert abs(direct - formula) <= 100.0 * x / 64.0 ** 3
        # the doubled-constant variant is ruled out by the direct route
        assert abs(direct - 2.0 * formula) > abs(direct - formula) * 10


# ---------------------------------------------------------------------------
# bilinear sum: direct and asymptotic
# ---------------------------------------------------------------------------

class _ZeroWeight:
    K = 64.0

    def __call__(self, x):
        return 0.0


def _params(K, gamma):
    # alpha chosen so 2 pi beta sqrt(1-gamma^2) = 1.5K, centering the
    # stationary-phase weight in its support
    beta = 1.5 * K / (2.0 * math.pi * math.sqrt(1.0 - gamma ** 2))
    return BesselSumParams(beta / (4.0 * gamma), beta, K)


def test_s_direct_zero_weight():
    p = BesselSumParams(32.0, 64.0, 64.0)
    assert s_direct(p, _ZeroWeight()) == 0.0


def test_s_direct_refinement_invariance(w64):
    p = _params(64, 0.5)
    a = s_direct(p, w64, tol=1e-12)
    b = s_direct(p, w64, tol=1e-14)
    assert abs(a - b) < 1e-10


def test_s_direct_exponentially_small(w128):
    p = BesselSumParams(128.0 / 200.0, 128.0, 128.0)
    assert p.regime == "exponentially-small"
    assert abs(s_direct(p, w128)) <= math.exp(-64.0)


def test_regime_flags():
    assert BesselSumParams(1.0, 100.0, 128.0).regime == "exponentially-small"
    assert BesselSumParams(30.0, 130.0, 128.0).regime == "gamma-large"
    assert _params(128, 0.5).regime == "main-term"


def test_s_asymptotic_refuses_gamma_large(w64):
    p = BesselSumParams(30.0, 130.0, 64.0)
    with pytest.raises(ValueError):
        s_asymptotic(p, w64)


def test_s_asymptotic_matches_direct():
    ratios = {}
    for K in (64, 128, 256):
        w = WeightFunction(K)
        worst = 0.0
        for gamma in (0.2, 0.5, 0.8):
            p = _params(K, gamma)
            sd = s_direct(p, w)
            sa = s_asymptotic(p, w)
            assert sa.real == pytest.approx(0.0, abs=1e-15)
            assert sd.real == 0.0
            ratio = abs(sd - sa) * K / math.log(K)
            assert ratio <= 10.0
            worst = max(worst, ratio)
            # magnitude scale of the main term
            assert abs(sa) <= (p.beta / K) / math.sqrt(p.alpha)
        ratios[K] = worst
    # no growth with K: the fitted constant at the largest K does not
    # exceed the one at the smallest
    assert ratios[256] <= ratios[64]


# ---------------------------------------------------------------------------
# inner-integral diagnostic
# ---------------------------------------------------------------------------

def _ik_series(w, u, alpha, sign):
    """Exact route: expanding the periodic phase in Bessel functions gives
    sum_m i^m J_m(sign 4 pi alpha) e(2mu) w(m)."""
    total = 0j
    m = int(w.K)
    while m <= 2 * w.K:
        wm = w(float(m))
        if wm != 0.0:
            jm = bessel_J(m, 4.0 * math.pi * alpha)
            if sign == -1:
                jm *= (-1) ** m
            total += 1j ** m * jm * cmath.exp(4j * math.pi * m * u) * wm
        m += 1
    return total


def test_ik_integral_matches_series_route(w64):
    for u, alpha in ((0.101, 8.0), (0.06, 64.0), (0.03, 30.0)):
        integral, _ = ik_integral(u, alpha, -1, w64)
        series = _ik_series(w64, u, alpha, -1)
        assert abs(integral - series) < 1e-8


def test_ik_expansion_in_regime():
    for K in (64, 128):
        w = WeightFunction(K)
        alpha = K / 8.0
        u = math.asin(1.5 * K / (4.0 * math.pi * alpha)) / (4.0 * math.pi)
        integral, expansion = ik_integral(u, alpha, -1, w)
        assert abs(expansion) > 0.5
        assert abs(integral - expansion) <= 1.0 / K


def test_ik_expansion_negligible_off_support(w64):
    # sin(4 pi u) large: the stationary weight is unsupported and the whole
    # integral is small
    integral, expansion = ik_integral(0.06, 64.0, -1, w64)
    assert abs(expansion) < 1e-15
    assert abs(integral) <= 1.0 / 64.0


def test_ik_truncation_stability(w64):
    u = math.asin(1.5 * 64.0 / (4.0 * math.pi * 8.0)) / (4.0 * math.pi)
    _, e12 = ik_integral(u, 8.0, -1, w64, J=12)
    _, e14 = ik_integral(u, 8.0, -1, w64, J=14)
    assert abs(e12 - e14) < 1.0 / 64.0


def test_ik_zero_alpha_and_validation(w64):
    integral, expansion = ik_integral(0.01, 0.0, 1, w64)
    # 0 is outside the support of w, so the inverse transform vanishes
    assert abs(integral) < 1e-8
    assert expansion == 0.0
    with pytest.raises(ValueError):
        ik_integral(0.01, 1.0, 2, w64)
    with pytest.raises(ValueError):
        ik_integral(0.01, 70000.0, 1, w64)
