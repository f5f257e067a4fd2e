import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from gsphqc.errors import ConfigError, InputError
from gsphqc.noise import (AlphaStable, BernoulliGaussian, Gaussian, Laplace, laplace_from_uniform,
                          mixture_abs_moment, noise_from_dict, noise_to_dict, sample_noise, theta_moment)


@pytest.mark.parametrize("k", range(1, 9))
def test_theta_moment_matches_quadrature(k):
    val, _ = integrate.quad(lambda z: abs(z) ** k * math.exp(-z * z / 2) / math.sqrt(2 * math.pi),
                            -math.inf, math.inf)
    assert theta_moment(k) == pytest.approx(val, rel=1e-9)


def test_theta_two_is_exactly_one():
    assert theta_moment(2) == 1.0
    assert theta_moment(4) == 3.0


@pytest.mark.parametrize("k", [0, -1, 1.5])
def test_theta_rejects_bad_order(k):
    with pytest.raises(InputError):
        theta_moment(k)


def test_bernoulli_gaussian_draw_order():
    p = BernoulliGaussian(0.3, 0.5, 7.0)
    w = p.sample((4, 5), np.random.default_rng(9))
    r = np.random.default_rng(9)
    eta = math.sqrt(0.5) * r.standard_normal((4, 5))
    gam = math.sqrt(7.0) * r.standard_normal((4, 5))
    gate = r.random((4, 5)) < 0.3
    np.testing.assert_array_equal(w, eta + gate * gam)


def test_bernoulli_gaussian_exact_moments():
    p = BernoulliGaussian(0.2, 1.0, 4.0)
    w = p.sample(200_000, np.random.default_rng(1))
    # E w^2 = var_eta + pr var_gamma ; E w^4 = 3(1-pr) var_eta^2 + 3 pr (var_eta+var_gamma)^2
    m2 = 1.0 + 0.2 * 4.0
    m4 = 3 * 0.8 + 3 * 0.2 * 25.0
    se = math.sqrt((m4 - m2 ** 2) / w.size)
    assert abs(np.mean(w ** 2) - m2) < 4 * se
    assert abs(np.mean(w)) < 4 * math.sqrt(m2 / w.size)


def test_mixture_moment_formula():
    p = BernoulliGaussian(0.1, 0.01, 100.0)
    assert mixture_abs_moment(p, 2) == pytest.approx(0.1 * 100 + 0.9 * 0.01)
    assert mixture_abs_moment(p, 1) == pytest.approx(math.sqrt(2 / math.pi) * (0.1 * 10 + 0.9 * 0.1))


def test_pure_gaussian_edge_cases():
    z = BernoulliGaussian(0.0, 0.0, 5.0).sample(100, np.random.default_rng(0))
    assert np.all(z == 0)
    with pytest.raises(InputError):
        BernoulliGaussian(1.5, 1, 1)
    with pytest.raises(InputError):
        BernoulliGaussian(0.5, -1, 1)


def test_cauchy_quartiles():
    # alpha = 1, beta = 0: Cauchy with scale gamma, quartiles at delta +- gamma
    x = AlphaStable(1.0, 0.0, 2.0, 0.5).sample(200_000, np.random.default_rng(3))
    q1, q3 = np.quantile(x, [0.25, 0.75])
    assert q3 - q1 == pytest.approx(4.0, rel=0.02)
    assert np.median(x) == pytest.approx(0.5, abs=0.03)


def test_standard_cauchy_against_scipy():
    x = AlphaStable(1.0).sample(50_000, np.random.default_rng(4))
    assert stats.kstest(x, "cauchy").pvalue > 1e-3


@pytest.mark.parametrize("alpha,beta,gamma,delta", [
    (1.5, 0.5, 2.0, 0.3),
    (0.8, -0.7, 1.0, 0.0),
    (1.0, 0.6, 1.5, -0.2),
    (2.0, 0.0, 0.5, 1.0),
])
def test_empirical_characteristic_function(alpha, beta, gamma, delta):
    p = AlphaStable(alpha, beta, gamma, delta)
    n = 200_000
    x = p.sample(n, np.random.default_rng(11))
    for k in (-1.3, -0.4, 0.25, 0.7, 1.6):
        emp = np.mean(np.exp(1j * k * x))
        # each of Re/Im is a mean of values bounded by 1
        assert abs(emp - p.characteristic_function(k)) < 5 / math.sqrt(n)


def test_alpha_two_is_gaussian_with_variance_two_gamma():
    x = AlphaStable(2.0, 0.0, 1.5).sample(200_000, np.random.default_rng(5))
    assert np.var(x) == pytest.approx(3.0, rel=0.02)


@pytest.mark.parametrize("args", [(0.0,), (2.5,), (1.0, 1.5), (1.0, 0.0, 0.0)])
def test_alpha_stable_validation(args):
    with pytest.raises(InputError):
        AlphaStable(*args)


def test_laplace_inverse_cdf():
    p = Laplace(1.0, 2.0)
    assert laplace_from_uniform(0.5, p) == 1.0
    u = np.linspace(0.01, 0.99, 99)
    np.testing.assert_allclose(laplace_from_uniform(u, p), stats.laplace.ppf(u, loc=1.0, scale=2.0), rtol=1e-12)


def test_laplace_variance():
    x = Laplace(0.0, 1.5).sample(200_000, np.random.default_rng(6))
    assert np.var(x) == pytest.approx(2 * 1.5 ** 2, rel=0.02)


def test_gaussian_variance():
    x = sample_noise(Gaussian(0.25), 100_000, np.random.default_rng(7))
    assert np.var(x) == pytest.approx(0.25, rel=0.02)


def test_same_seed_same_draws():
    p = AlphaStable(1.3, 0.2)
    a = p.sample(1000, np.random.default_rng(42))
    b = p.sample(1000, np.random.default_rng(42))
    assert np.array_equal(a, b)


noise_models = st.one_of(
    st.builds(BernoulliGaussian, st.floats(0, 1), st.floats(0, 10), st.floats(0, 1e4)),
    st.builds(AlphaStable, st.floats(0.1, 2.0), st.floats(-1, 1), st.floats(0.01, 10), st.floats(-5, 5)),
    st.builds(Laplace, st.floats(-5, 5), st.floats(0.01, 10)),
    st.builds(Gaussian, st.floats(0, 10)),
)


@settings(max_examples=100, deadline=None)
@given(noise_models)
def test_noise_dict_round_trip(model):
    assert noise_from_dict(noise_to_dict(model)) == model


def test_noise_dict_errors():
    with pytest.raises(ConfigError):
        noise_from_dict({"kind": "pink"})
    with pytest.raises(ConfigError):
        noise_from_dict({"kind": "laplace", "scale": 1})
    with pytest.raises(ConfigError):
        noise_from_dict({"kind": "gaussian", "var": -1})
