import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import digamma as sp_digamma
from scipy.special import polygamma

from policyblend.dirichlet import (DirichletParams, digamma, dir_entropy,
                                   dir_log_pdf, dir_mle_update, dir_sample,
                                   dir_sample_n, inv_digamma, moment_match,
                                   simplex_stats, trigamma)
from policyblend.errors import DomainError

EULER = 0.5772156649015328606


# ---------------------------------------------------------------------------
# special functions

def test_digamma_at_one():
    assert abs(digamma(1.0) + EULER) < 1e-10


def test_digamma_recurrence():
    for x in (0.1, 1.0, 10.0, 100.0):
        assert abs(digamma(x + 1.0) - digamma(x) - 1.0 / x) < 1e-10


def test_trigamma_recurrence():
    for x in (0.1, 1.0, 10.0, 100.0):
        assert abs(trigamma(x + 1.0) - trigamma(x) + 1.0 / (x * x)) < 1e-10


def test_inv_digamma_round_trip():
    for x in (0.05, 0.5, 5.0, 50.0):
        assert abs(inv_digamma(digamma(x)) - x) < 1e-9


def test_special_functions_match_scipy_on_arrays():
    x = np.geomspace(1e-3, 1e4, 200)
    assert np.max(np.abs(digamma(x) - sp_digamma(x))) < 1e-10
    assert np.max(np.abs(trigamma(x) - polygamma(1, x)) / polygamma(1, x)) < 1e-9


def test_special_functions_domain():
    with pytest.raises(DomainError):
        digamma(0.0)
    with pytest.raises(DomainError):
        trigamma(-1.0)
    with pytest.raises(DomainError):
        digamma(np.array([1.0, -2.0]))


# ---------------------------------------------------------------------------
# distribution basics

def test_params_validation():
    with pytest.raises(ValueError):
        DirichletParams(np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        DirichletParams(np.array([[1.0, 1.0]]))
    p = DirichletParams(np.array([2.0, 6.0]))
    assert np.allclose(p.mean, [0.25, 0.75])


def test_sample_simplex_membership_and_determinism():
    p = DirichletParams(np.array([0.3, 2.0, 5.0]))
    b = dir_sample(p, 9)
    assert b.shape == (3,)
    assert np.all(b > 0)
    assert abs(b.sum() - 1.0) < 1e-12
    assert np.array_equal(b, dir_sample(p, 9))
    B = dir_sample_n(p, 50, 9)
    assert B.shape == (50, 3)
    assert np.allclose(B.sum(axis=1), 1.0)
    assert np.array_equal(B[0], b)


def test_sample_mean_matches_alpha():
    p = DirichletParams(np.array([1.0, 1.0, 1.0]))
    B = dir_sample_n(p, 100000, 11)
    # Dir(1,1,1) component variance is 1/18
    se = np.sqrt((1.0 / 18.0) / B.shape[0])
    assert np.all(np.abs(B.mean(axis=0) - 1.0 / 3.0) < 3.0 * se)


def test_sample_concentration_shrinks_variance():
    c = 200.0
    B = dir_sample_n(DirichletParams(np.array([c, c])), 20000, 12)
    assert float(B[:, 0].var()) < 1.0 / (8.0 * c)


def test_log_pdf_uniform_case():
    p = DirichletParams(np.array([1.0, 1.0]))
    for b in (0.1, 0.5, 0.93):
        assert abs(dir_log_pdf(p, np.array([b, 1.0 - b]))) < 1e-12


def test_log_pdf_normalizes_n2():
    p = DirichletParams(np.array([2.5, 0.8]))
    total, _ = quad(lambda b: np.exp(dir_log_pdf(p, np.array([b, 1.0 - b]))),
                    1e-12, 1.0 - 1e-12)
    assert abs(total - 1.0) < 1e-3


def test_log_pdf_exchangeable():
    p = DirichletParams(np.array([3.0, 3.0, 3.0]))
    b = np.array([0.2, 0.3, 0.5])
    assert abs(dir_log_pdf(p, b) - dir_log_pdf(p, b[::-1])) < 1e-12


def test_log_pdf_boundary_rejected():
    with pytest.raises(DomainError):
        dir_log_pdf(DirichletParams(np.array([1.0, 1.0])), np.array([0.0, 1.0]))


def test_entropy_uniform_and_monotone():
    assert abs(dir_entropy(DirichletParams(np.array([1.0, 1.0])))) < 1e-12
    hs = [dir_entropy(DirichletParams(np.array([c, c, c])))
          for c in (1.0, 3.0, 10.0, 100.0)]
    assert all(a > b for a, b in zip(hs, hs[1:]))


def test_entropy_matches_monte_carlo():
    p = DirichletParams(np.array([2.0, 5.0, 3.0]))
    B = dir_sample_n(p, 100000, 13)
    mc = -np.mean([dir_log_pdf(p, b) for b in B[:20000]])
    h = dir_entropy(p)
    assert abs(mc - h) < 0.01 * abs(h)


# ---------------------------------------------------------------------------
# maximum likelihood

def avg_ll(alpha, stats):
    from policyblend.dirichlet import _avg_loglik
    return _avg_loglik(np.asarray(alpha, dtype=float), stats.mean_log)


def test_stats_validation():
    with pytest.raises(ValueError):
        simplex_stats(np.array([[0.5, 0.5]]))


def test_mle_recovers_concentration():
    true = np.array([2.0, 5.0, 3.0])
    B = dir_sample_n(DirichletParams(true), 10000, 21)
    fit = dir_mle_update(simplex_stats(B), DirichletParams(np.ones(3)))
    assert np.all(np.abs(fit.alpha - true) / true < 0.10)


def test_mle_symmetric_stats_give_symmetric_alpha():
    B = dir_sample_n(DirichletParams(np.array([2.0, 2.0, 2.0])), 5000, 22)
    stats = simplex_stats(B)
    sym = np.full(3, float(np.mean(stats.mean_log)))
    stats = type(stats)(stats.n_samples, sym, np.full(3, 1.0 / 3.0))
    fit = dir_mle_update(stats, DirichletParams(np.ones(3)))
    assert np.max(fit.alpha) - np.min(fit.alpha) < 1e-6


def test_mle_likelihood_monotone_in_iterations():
    B = dir_sample_n(DirichletParams(np.array([0.5, 4.0, 1.5])), 2000, 23)
    stats = simplex_stats(B)
    init = DirichletParams(np.ones(3))
    lls = [avg_ll(dir_mle_update(stats, init, max_iters=k).alpha, stats)
           for k in range(1, 9)]
    assert all(b >= a - 1e-9 for a, b in zip(lls, lls[1:]))


def test_mle_rejects_degenerate_stats():
    stats = simplex_stats(np.array([[0.5, 0.5], [0.4, 0.6]]))
    bad = type(stats)(2, np.array([-np.inf, -1.0]), stats.mean)
    with pytest.raises(DomainError):
        dir_mle_update(bad, DirichletParams(np.ones(2)))


# ---------------------------------------------------------------------------
# moment matching

def test_moment_match_momentum_one_is_identity():
    prev = DirichletParams(np.array([1.0, 2.0, 3.0]))
    elites = np.array([[0.2, 0.3, 0.5], [0.1, 0.4, 0.5], [0.3, 0.3, 0.4]])
    out = moment_match(elites, prev, 1.0)
    assert np.array_equal(out.alpha, prev.alpha)


def test_moment_match_momentum_zero_is_pure_fit():
    prev = DirichletParams(np.ones(3))
    B = dir_sample_n(DirichletParams(np.array([2.0, 5.0, 3.0])), 500, 31)
    out = moment_match(B, prev, 0.0)
    fit = dir_mle_update(simplex_stats(B), prev)
    assert np.allclose(out.alpha, fit.alpha)


def test_moment_match_tracks_elite_vertex():
    prev = DirichletParams(np.ones(3))
    rng = np.random.default_rng(32)
    elites = rng.dirichlet([90.0, 5.0, 5.0], size=20)
    out = moment_match(elites, prev, 0.5)
    assert out.mean[0] > prev.mean[0]


def test_moment_match_precision_cap():
    prev = DirichletParams(np.ones(3))
    rng = np.random.default_rng(33)
    elites = rng.dirichlet([400.0, 300.0, 300.0], size=64)
    uncapped = moment_match(elites, prev, 0.0)
    assert float(np.sum(uncapped.alpha)) > 10.0
    capped = moment_match(elites, prev, 0.0, precision_cap=10.0)
    assert abs(float(np.sum(capped.alpha)) - 10.0) < 1e-9
    assert np.allclose(capped.mean, uncapped.mean, atol=1e-12)


def test_moment_match_validation():
    prev = DirichletParams(np.ones(2))
    with pytest.raises(ValueError):
        moment_match(np.array([[0.5, 0.5]]), prev, 0.5)
    with pytest.raises(ValueError):
        moment_match(np.array([[0.5, 0.5], [0.4, 0.6]]), prev, 1.5)
