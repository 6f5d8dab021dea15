import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from edgelab.metrics import (
    PROXY_LABEL,
    bump,
    bump_normalization,
    build_mollifier,
    estimate_cumulants,
    fit_rate,
    ks_distance_to_normal,
    ks_two_sample,
    mollifier_delta,
    multivariate_gaussian_distance,
    normal_cdf,
    smoothed_expectation_gap,
)

# sup |phi''''| of the normalized bump, rounded up once and frozen
FIFTH_DERIVATIVE_CONSTANT = 1.9e4


def test_normal_cdf_oracles():
    mpmath = pytest.importorskip("mpmath")
    mpmath.mp.dps = 40
    ref = float(mpmath.ncdf(-8))
    assert normal_cdf(0.0) == 0.5
    assert abs(normal_cdf(-8.0) - ref) <= 1e-12 * ref
    assert abs(ref - 6.22096e-16) < 1e-20
    assert abs(normal_cdf(8.0) - 1.0) <= 1e-12
    grid = np.linspace(-10, 10, 10**4)
    assert np.all(np.diff(normal_cdf(grid)) >= 0)


def test_ks_single_point():
    assert ks_distance_to_normal([0.0]) == 0.5


def test_ks_matches_scipy():
    from scipy.stats import kstest

    x = np.random.default_rng(0).standard_normal(777) * 1.1 + 0.05
    assert ks_distance_to_normal(x) == pytest.approx(kstest(x, "norm").statistic, abs=1e-14)


def test_ks_dkw_calibration():
    x = np.random.default_rng(1).standard_normal(10**5)
    assert ks_distance_to_normal(x) <= 1.95 / np.sqrt(10**5)


@settings(max_examples=50)
@given(st.lists(st.floats(-20, 20), min_size=1, max_size=200))
def test_ks_in_unit_interval(xs):
    d = ks_distance_to_normal(xs)
    assert 0 < d <= 1


def test_ks_two_sample_identical():
    x = np.arange(10.0)
    stat, p = ks_two_sample(x, x)
    assert stat == 0 and p == 1


def test_bump_normalization():
    assert bump_normalization() == pytest.approx(0.443993816168079, rel=1e-12)
    from scipy.integrate import quad

    assert quad(lambda u: float(bump(u)), -1, 1)[0] == pytest.approx(1.0, abs=1e-12)
    assert bump(1.0) == 0 and bump(-1.5) == 0


def test_mollifier_sandwich():
    x, delta = 0.3, 0.1
    f = build_mollifier(x, delta)
    assert f(x - 3 * delta) == 1.0
    assert f(x + 3 * delta) == 0.0
    assert f(x) == 1.0 and f(x + 2 * delta) == 0.0
    ys = np.linspace(-1, 1, 501)
    v = f(ys)
    assert np.all((v >= 0) & (v <= 1))
    assert np.all(np.diff(v) <= 1e-15)
    assert f(x + delta) == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(ValueError):
        build_mollifier(0.0, 0.0)


def test_mollifier_fifth_derivative():
    delta, h = 0.1, 0.001
    f = build_mollifier(0.0, delta)
    ys = np.linspace(0.0, 2 * delta, 401)
    coef = [-1, 5, -10, 10, -5, 1]
    vals = f(np.concatenate([ys + (k - 2.5) * h for k in range(6)])).reshape(6, -1)
    fd = np.abs(sum(c * v for c, v in zip(coef, vals))) / h**5
    assert fd.max() <= FIFTH_DERIVATIVE_CONSTANT * delta**-5
    assert fd.max() >= 0.5 * FIFTH_DERIVATIVE_CONSTANT * delta**-5


def test_mollifier_delta():
    assert mollifier_delta(1e6) == pytest.approx(0.1468, abs=1e-4)
    assert mollifier_delta(1e6) == pytest.approx(10 ** (-6 * 5 / 36), rel=1e-14)


def test_smoothed_gap():
    from scipy.integrate import quad

    rng = np.random.default_rng(3)
    f = build_mollifier(0.0, 0.1)
    a = rng.standard_normal(10**5)
    assert smoothed_expectation_gap(a, a, f) == 0.0
    b = rng.standard_normal(10**5) + 0.5
    gap = smoothed_expectation_gap(a, b, f)
    # exact E f(Z) - E f(Z + 0.5) for the mollifier, and the unsmoothed target
    ef = lambda s: quad(lambda y: float(f(y)) * np.exp(-((y - s) ** 2) / 2) / np.sqrt(2 * np.pi), -12, 12, points=[0, 0.2])[0]
    exact = ef(0.0) - ef(0.5)
    se = np.sqrt((f(a).var() + f(b).var()) / 10**5)
    assert abs(gap - exact) <= 3 * se
    assert abs(gap - (normal_cdf(0) - normal_cdf(-0.5))) <= 3 * se + 0.2 * 0.4
    with pytest.raises(ValueError):
        smoothed_expectation_gap([], a, f)


def test_cumulants_gaussian():
    x = np.random.default_rng(4).standard_normal(50000)
    c = estimate_cumulants(x)
    target = np.array([0, 1, 0, 0])
    assert np.all(np.abs(c.values - target) <= 4 * c.std_errors)


def test_cumulants_constant_and_small():
    c = estimate_cumulants(np.full(1000, 2.5))
    np.testing.assert_allclose(c.values, [2.5, 0, 0, 0], atol=1e-12)
    with pytest.raises(ValueError):
        estimate_cumulants(np.zeros(999))
    with pytest.raises(ValueError):
        estimate_cumulants(np.zeros(1000), up_to_order=5)


def test_kstats_match_scipy():
    from scipy.stats import kstat

    x = np.random.default_rng(5).exponential(size=3000)
    c = estimate_cumulants(x)
    np.testing.assert_allclose(c.values, [kstat(x, k) for k in range(1, 5)], rtol=1e-9)
    # exponential(1) cumulants are (k-1)!
    assert np.all(np.abs(c.values - [1, 1, 2, 6]) <= 4 * c.std_errors)


def test_fit_rate():
    ns = np.array([500, 1000, 2000, 4000])
    fit = fit_rate(np.column_stack((ns, 7 * ns ** (-1 / 6))))
    assert abs(fit.exponent + 1 / 6) <= 1e-10
    assert fit.intercept == pytest.approx(np.log(7))
    assert fit.residual < 1e-12
    assert abs(fit_rate(np.column_stack((ns, np.full(4, 3.0)))).exponent) < 1e-12
    with pytest.raises(ValueError):
        fit_rate([[1, 1], [2, 2]])
    with pytest.raises(ValueError):
        fit_rate([[1, 1], [2, -2], [3, 1]])


def test_projection_proxy():
    rng = np.random.default_rng(6)
    z = rng.standard_normal((10**4, 4))
    assert multivariate_gaussian_distance(z, 50, seed=0) <= 0.03
    x = rng.standard_normal(10**4)
    coupled = np.column_stack((x, x))
    d = multivariate_gaussian_distance(coupled, directions=[[1.0, 1.0]])
    # N(0, 2) against Phi: sup |Phi(x/sqrt2) - Phi(x)| is about 0.083
    assert d > 0.06
    one = multivariate_gaussian_distance(x[:, None], directions=[[1.0]])
    assert one == ks_distance_to_normal(x)
    assert "proxy" in PROXY_LABEL
    with pytest.raises(ValueError):
        multivariate_gaussian_distance(z[:99])
