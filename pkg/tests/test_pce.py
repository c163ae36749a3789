import math

import numpy as np
import pytest
from scipy.special import ndtr

from resilience_uq.errors import DegenerateShape, NoConvergence, RankDeficient
from resilience_uq.orthopoly import HERMITE, LEGENDRE, hermite_eval
from resilience_uq.pce import (
    PceModel,
    TauCache,
    bootstrap_probability_stderr,
    draw_zetas,
    empirical_cdf_sup_distance,
    evaluate_pce,
    fit_adaptive,
    fit_from_samples,
    fit_pce,
    pos,
    resilience_probability,
    surrogate_cdf,
    tau_distribution,
    truncation_gap,
)
from resilience_uq.quadrature import gauss_hermite


def pce(*coeffs, family=HERMITE):
    return PceModel(family, len(coeffs) - 1, np.array(coeffs, dtype=float))


def test_exact_fit():
    tau = lambda z: 2 * hermite_eval(1, z) + 0.5 * hermite_eval(3, z)  # noqa: E731
    m = fit_pce(tau, HERMITE, 4, 50, seed=1)
    assert np.allclose(m.coeffs, [0, 2, 0, 0.5, 0], atol=1e-9)
    assert m.fit_meta.residual_rms < 1e-9
    assert m.fit_meta.samples == 50
    assert truncation_gap(m) < 1e-8


def test_constant_fit():
    m = fit_pce(lambda z: np.full_like(z, 3.25), HERMITE, 3, seed=0)
    assert m.coeffs[0] == pytest.approx(3.25)
    assert np.allclose(m.coeffs[1:], 0, atol=1e-12)


def test_scalar_tau_and_degenerate_samples():
    def tau(z):
        if z > 1.5:
            raise DegenerateShape("no critical point")
        return 1.0 + z
    m = fit_pce(tau, HERMITE, 2, 200, seed=3, vectorized=False)
    assert m.fit_meta.excluded > 0
    assert m.fit_meta.samples + m.fit_meta.excluded == 200
    assert np.allclose(m.coeffs, [1, 1, 0], atol=1e-10)


def test_rank_deficient():
    with pytest.raises(RankDeficient):
        fit_from_samples(np.array([0.5, 0.5, 0.5, 0.5]), np.ones(4), HERMITE, 2)
    with pytest.raises(RankDeficient):
        fit_from_samples(np.arange(5.0), np.full(5, np.nan), HERMITE, 1)
    with pytest.raises(ValueError):
        fit_pce(lambda z: z, HERMITE, 3, samples=3)


def test_legendre_fit():
    from resilience_uq.orthopoly import legendre_eval
    tau = lambda z: 1 - 2 * legendre_eval(2, z)  # noqa: E731
    m = fit_pce(tau, LEGENDRE, 3, seed=0)
    assert np.allclose(m.coeffs, [1, 0, -2, 0], atol=1e-10)
    zs = draw_zetas(LEGENDRE, 1000, 0)
    assert zs.min() >= -1 and zs.max() <= 1


@pytest.mark.parametrize("coeffs, z, expected", [((1, 0, 0), 0.3, 1.0), ((0, 1, 0), 2.0, 2.0), ((0, 0, 1), 2.0, 3.0)])
def test_evaluate(coeffs, z, expected):
    assert evaluate_pce(pce(*coeffs), z) == expected


def test_model_immutable():
    m = pce(1.0, 2.0)
    with pytest.raises(ValueError):
        m.coeffs[0] = 5.0
    with pytest.raises(ValueError):
        PceModel(HERMITE, 2, np.zeros(2))


def test_truncation_gap_examples():
    assert truncation_gap(pce(1.0, 0.0)) == 0.0
    assert truncation_gap(pce(0.0, 0.5)) == pytest.approx(2.0)
    assert truncation_gap(pce(0.0, 0.0, 1.0)) == pytest.approx(15.0)


def test_adaptive_stops_at_exact_order():
    # the stopping test fires at the first order whose last term is negligible,
    # so a cubic stops at N=4 with a vanishing quartic coefficient
    cubic = lambda z: 0.2 - z + 0.3 * z**3  # noqa: E731
    m = fit_adaptive(cubic, HERMITE, precision=1e-8, seed=0)
    assert m.order == 4
    assert abs(m.coeffs[4]) < 1e-12
    z = np.linspace(-4, 4, 9)
    assert np.allclose(m(z), cubic(z), atol=1e-10)
    zero = fit_adaptive(lambda z: np.zeros_like(z), HERMITE, seed=0)
    assert zero.order == 2 and np.all(zero.coeffs == 0)


def test_adaptive_no_convergence():
    with pytest.raises(NoConvergence) as info:
        fit_adaptive(lambda z: np.sin(3 * z), HERMITE, precision=1e-12, max_order=4)
    assert info.value.max_order == 4
    with pytest.raises(ValueError):
        fit_adaptive(lambda z: z, HERMITE, max_order=1)


def test_tau_cache_shares_evaluations():
    calls = []

    def tau(z):
        calls.append(len(z))
        return 2 * z

    cache = TauCache(tau)
    a = fit_pce(cache, HERMITE, 2, seed=5)
    b = fit_pce(cache, HERMITE, 3, seed=5)
    assert calls == [100]
    assert len(cache) == 100
    assert a.coeffs[1] == pytest.approx(2.0) and b.coeffs[1] == pytest.approx(2.0)


@pytest.mark.parametrize("x, expected", [(1, 1), (-0.5, 0), (0, 0)])
def test_pos(x, expected):
    assert pos(x) == expected


def test_pos_array():
    assert list(pos(np.array([-1.0, 0.0, 2.0]))) == [0, 0, 1]


def test_probability_examples():
    assert resilience_probability(pce(0.0, 1.0)) == pytest.approx(0.5, abs=1e-15)
    assert resilience_probability(pce(1.0)) == 1.0
    assert resilience_probability(pce(-1.0)) == 0.0
    assert resilience_probability(pce(0.0, 0.0, 1.0)) == pytest.approx(2 * (1 - ndtr(1.0)), abs=1e-12)


def test_probability_bounds_for_signed_surrogates():
    # bounded below / above on [-8, 8] by +-1e-12 margins
    assert resilience_probability(pce(1e-12 + 64.0 + 1e-9, 0.0, 1.0)) == 1.0
    assert resilience_probability(pce(-2.0, 0.0, -1.0)) == 0.0
    rng = np.random.default_rng(8)
    for _ in range(50):
        p = resilience_probability(pce(*rng.normal(size=4)))
        assert 0.0 <= p <= 1.0


def test_probability_valid_window():
    # tau undefined above 1: that mass counts as resilient
    m = pce(-1.0)
    assert resilience_probability(m, valid=(-math.inf, 1.0)) == pytest.approx(1 - ndtr(1.0), abs=1e-15)
    m2 = pce(0.0, 1.0)
    p = resilience_probability(m2, valid=(-2.0, 1.0))
    assert p == pytest.approx(ndtr(-2.0) + (ndtr(1.0) - 0.5) + (1 - ndtr(1.0)), abs=1e-15)


def test_probability_legendre():
    assert resilience_probability(pce(0.25, 1.0, family=LEGENDRE)) == pytest.approx(0.625)


def test_refinement_vs_quadrature():
    # pos(tau) jumps at each root, so plain quadrature is off by at most
    # one node weight per root; the refinement path is checked against MC
    rng = np.random.default_rng(21)
    rule = gauss_hermite(128)
    mc_rng = np.random.default_rng(77)
    for i in range(20):
        m = pce(*rng.normal(size=4))
        exact = resilience_probability(m)
        quad = resilience_probability(m, rule=rule, refine=False)
        z = np.linspace(-8, 8, 4001)
        roots = np.count_nonzero(np.sign(m(z[1:])) != np.sign(m(z[:-1])))
        assert abs(exact - quad) <= max(roots, 1) * rule.weights.max()
        if i < 5:
            draws = mc_rng.standard_normal(10**7)
            p_mc = np.mean(m(draws) > 0)
            assert abs(exact - p_mc) < 3 * math.sqrt(p_mc * (1 - p_mc) / draws.size) + 1e-12
    with pytest.raises(ValueError):
        resilience_probability(pce(0.0, 1.0), rule=gauss_hermite(16), refine=False)


def test_root_at_window_edge():
    # single root exactly at the right window end
    m = pce(-8.0, 1.0)
    assert resilience_probability(m) == pytest.approx(ndtr(-8.0), rel=1e-12)


def test_a0_is_sample_mean_projection():
    tau = lambda z: 0.7 + 0.2 * z + 0.05 * (z**2 - 1)  # noqa: E731
    m = fit_pce(tau, HERMITE, 2, 400, seed=2)
    z = draw_zetas(HERMITE, 400, 2)
    t = tau(z)
    assert m.coeffs[0] == pytest.approx(0.7, abs=1e-12)
    assert abs(m.coeffs[0] - t.mean()) < 3 * t.std() / math.sqrt(t.size)


def test_distribution_linear():
    pdf, cdf = tau_distribution(pce(0.0, 1.0), draws=100_000, bins=50, seed=0)
    assert pdf.shape == cdf.shape == (50, 2)
    assert np.all(np.diff(cdf[:, 1]) >= 0)
    assert abs(cdf[-1, 1] - 1.0) < 1e-9
    F0 = np.interp(0.0, cdf[:, 0], cdf[:, 1])
    assert abs(F0 - 0.5) < 3 / math.sqrt(100_000) + 1 / 50
    widths = np.diff(np.concatenate([[2 * pdf[0, 0] - cdf[0, 0]], cdf[:, 0]]))
    assert np.sum(pdf[:, 1] * widths) == pytest.approx(1.0)


def test_distribution_constant_is_step():
    pdf, cdf = tau_distribution(pce(0.4), draws=10_000, bins=10, seed=0)
    assert cdf[-1, 1] == 1.0
    assert np.all(np.abs(cdf[:, 0] - 0.4) <= 0.5)
    with pytest.raises(ValueError):
        tau_distribution(pce(0.4), draws=100)


def test_probability_matches_cdf():
    m = pce(0.3, 0.5, 0.1)
    _, cdf = tau_distribution(m, draws=200_000, bins=400, seed=4)
    F0 = np.interp(0.0, cdf[:, 0], cdf[:, 1])
    bin_w = cdf[1, 0] - cdf[0, 0]
    assert abs(resilience_probability(m) - (1 - F0)) < 3 / math.sqrt(200_000) + bin_w


def test_surrogate_cdf_exact():
    t = np.array([-1.0, 0.0, 0.5])
    assert np.allclose(surrogate_cdf(pce(0.0, 1.0), t), ndtr(t), atol=1e-14)


def test_sup_distance():
    a = np.array([0.0, 1.0, 2.0, 3.0])
    assert empirical_cdf_sup_distance(a, a) == 0.0
    assert empirical_cdf_sup_distance(a, a + 10) == 1.0
    assert empirical_cdf_sup_distance(a, np.array([0.0, 1.0, 2.0, 10.0])) == pytest.approx(0.25)


def test_bootstrap_stderr():
    rng = np.random.default_rng(0)
    z = rng.standard_normal(200)
    t = 0.1 + z + 0.05 * rng.standard_normal(200)
    se = bootstrap_probability_stderr(z, t, HERMITE, 1, resamples=100, seed=1)
    assert 0.0 < se < 0.05
    same = bootstrap_probability_stderr(z, t, HERMITE, 1, resamples=100, seed=1)
    assert se == same
    assert bootstrap_probability_stderr(z, 0 * z + 2.0, HERMITE, 1, resamples=50) == 0.0
