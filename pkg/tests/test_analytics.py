import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, stats

from limloc import analytics as an
from limloc.errors import ParameterError


def test_prob_E_value():
    assert an.prob_E_exact(100.0, 1.0) == pytest.approx(0.0796557, abs=1e-6)
    assert an.prob_E_exact(100.0, 1.0) == pytest.approx(2 * stats.norm.cdf(0.1) - 1, abs=1e-14)


def test_prob_Eprime():
    assert an.prob_Eprime(2 / math.pi, math.log(2)) == pytest.approx(0.5, abs=1e-14)
    assert an.prob_Eprime(3.0, 0.0) == 0.0
    t, c = np.meshgrid(np.geomspace(0.1, 1e4, 30), np.geomspace(1e-3, 30, 30))
    assert np.all(an.prob_Eprime(t, c) <= an.prob_E_exact(t, c) + 1e-15)


def test_hitting_density():
    assert an.hitting_density(1.0, 1.0) == pytest.approx(math.exp(-0.5) / math.sqrt(2 * math.pi), abs=1e-6)
    total, _ = integrate.quad(lambda s: an.hitting_density(1.0, s), 0, np.inf, limit=200)
    assert abs(total - 1) < 1e-4
    # the density is the derivative of the reflection CDF
    h = 1e-6
    assert (an.hitting_cdf(1.0, 2 + h) - an.hitting_cdf(1.0, 2 - h)) / (2 * h) == pytest.approx(
        an.hitting_density(1.0, 2.0), rel=1e-7)


@given(st.floats(0.1, 10), st.floats(0.01, 100))
def test_hitting_density_scaling(x, t):
    assert an.hitting_density(x, t) == pytest.approx(an.hitting_density(1.0, t / x**2) / x**2, rel=1e-12)


def test_arcsine():
    assert an.arcsine_cdf(0.5) == pytest.approx(0.5)
    assert an.arcsine_cdf(1.0) == 1.0
    assert an.arcsine_cdf(0.75) == pytest.approx(2 / 3)
    with pytest.raises(ParameterError):
        an.arcsine_cdf(1.5)
    total, _ = integrate.quad(an.arcsine_pdf, 0, 1)
    assert total == pytest.approx(1.0, abs=1e-8)


def test_g_law():
    assert an.g_tail(1.0) == 0.5 == an.g_head(1.0)
    assert an.g_tail(4.0) == 0.25
    head, _ = integrate.quad(lambda y: 0.25 * y**-0.5, 0, 1)
    tail, _ = integrate.quad(lambda y: 0.25 * y**-1.5, 1, np.inf)
    assert abs(head + tail - 1) < 1e-10
    with pytest.raises(ParameterError):
        an.g_tail(0.5)
    with pytest.raises(ParameterError):
        an.g_head(2.0)


@given(st.floats(0, 0.999999))
def test_g_quantile_inverts_cdf(v):
    assert an.g_cdf(an.g_quantile(v)) == pytest.approx(v, abs=1e-9)


def test_cdfs_nondecreasing_and_in_range():
    x = np.linspace(0, 1, 1000)
    for cdf in (an.arcsine_cdf, an.normal_cdf, lambda u: an.g_cdf(50 * u), lambda u: an.hitting_cdf(1.0, 1e-3 + 50 * u)):
        y = np.asarray(cdf(x))
        assert np.all(np.diff(y) >= 0) and np.all((y >= 0) & (y <= 1))


def test_normal_cdf_accuracy():
    x = np.linspace(-8, 8, 1001)
    assert np.max(np.abs(an.normal_cdf(x) - stats.norm.cdf(x))) < 1e-12


def test_density_grid(tmp_path):
    g = an.density_grid(lambda s: an.hitting_density(1.0, s), np.geomspace(1e-3, 1e8, 20001))
    # mass beyond 1e8 is P(T > 1e8) = erf(1/sqrt(2e8))
    assert g.normalisation == pytest.approx(1.0 - math.erf(1 / math.sqrt(2e8)), abs=1e-6)
    g.to_csv(tmp_path / "d.csv")
    assert (tmp_path / "d.csv").read_text().startswith("x,density\n")
    with pytest.raises(ParameterError):
        an.density_grid(an.arcsine_pdf, [0.5])


def test_prob_E_agrees_with_simulation():
    # L_t has the law of |X_t|; compare the closed form with simulated endpoints
    from limloc.paths import brownian_batch
    x = brownian_batch(33, 50000, 4.0, 0.04)[:, -1]
    p = np.mean(np.abs(x) <= 1.0)
    assert abs(p - an.prob_E_exact(4.0, 1.0)) < 3 * math.sqrt(p * (1 - p) / x.size)
