"""Dirichlet machinery for the variational distribution over blend weights.

Sampling, exact log-pdf and entropy, and maximum-likelihood fitting of the
concentration vector from elite samples.  The fit follows Minka's separate
mean/precision scheme: a fixed-point iteration on the mean (via the inverse
digamma) alternating with a safeguarded Newton-Raphson step on the
precision.  The digamma/trigamma special functions are implemented here so
the estimator is self-contained and independently testable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DomainError

ALPHA_MIN = 1e-3
ALPHA_MAX = 1e4
_EULER = 0.5772156649015328606
_BOUNDARY_NUDGE = 1e-9

_lgamma = np.vectorize(math.lgamma, otypes=[float])


# ---------------------------------------------------------------------------
# special functions

def digamma(x):
    """psi(x) for x > 0: upward recurrence to x >= 10, then the Stirling
    tail, which converges there to ~1e-13."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise DomainError("digamma requires x > 0")
    if x.ndim == 0:
        return _kernels.dg(float(x))
    return _kernels.digamma_arr(np.ascontiguousarray(x))


def trigamma(x):
    """psi'(x) for x > 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise DomainError("trigamma requires x > 0")
    if x.ndim == 0:
        return _kernels.tg(float(x))
    return _kernels.trigamma_arr(np.ascontiguousarray(x))


def inv_digamma(y):
    """Solve psi(x) = y for x > 0 by Newton iteration."""
    y = np.asarray(y, dtype=float)
    scalar = y.ndim == 0
    y = np.atleast_1d(np.ascontiguousarray(y, dtype=float))
    # Minka's initialization: exp branch for large y, pole branch near 0+
    exp_branch = y >= -2.22
    denom = np.where(exp_branch, 1.0, y + _EULER)
    x = np.where(exp_branch, np.exp(y) + 0.5, -1.0 / denom)
    x = _kernels.inv_digamma_arr(y, x)
    return float(x[0]) if scalar else x


# ---------------------------------------------------------------------------
# distribution

@dataclass(frozen=True)
class DirichletParams:
    alpha: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=float)
        if a.ndim != 1 or np.any(a <= 0.0) or np.any(a > ALPHA_MAX):
            raise ValueError("alpha must be strictly positive and <= ALPHA_MAX")
        object.__setattr__(self, "alpha", a)

    @property
    def mean(self) -> np.ndarray:
        return self.alpha / float(np.sum(self.alpha))


@dataclass(frozen=True)
class SimplexSampleStats:
    n_samples: int
    mean_log: np.ndarray
    mean: np.ndarray


def dir_sample(params: DirichletParams, rng_seed) -> np.ndarray:
    """One draw from Dir(alpha) via normalized Gamma variates."""
    rng = np.random.default_rng(rng_seed)
    return _gamma_draw(params.alpha, rng, 1)[0]


def dir_sample_n(params: DirichletParams, n: int, rng_seed) -> np.ndarray:
    """(n, k) matrix of independent draws; deterministic given the seed."""
    rng = np.random.default_rng(rng_seed)
    return _gamma_draw(params.alpha, rng, n)


def _gamma_draw(alpha, rng, n):
    g = rng.gamma(alpha, size=(n, alpha.size))
    g = np.maximum(g, 1e-300)  # tiny alphas can underflow to exactly zero
    return g / np.sum(g, axis=1, keepdims=True)


def dir_log_pdf(params: DirichletParams, beta) -> float:
    b = np.asarray(beta, dtype=float)
    if np.any(b <= 0.0) or np.any(b >= 1.0):
        raise DomainError("beta must be strictly interior to the simplex")
    a = params.alpha
    log_b_fn = float(np.sum(_lgamma(a)) - _lgamma(np.sum(a)))
    return float(np.sum((a - 1.0) * np.log(b))) - log_b_fn


def dir_entropy(params: DirichletParams) -> float:
    a = params.alpha
    a0 = float(np.sum(a))
    k = a.size
    log_b_fn = float(np.sum(_lgamma(a))) - float(_lgamma(a0))
    return log_b_fn + (a0 - k) * digamma(a0) - float(np.sum((a - 1.0) * digamma(a)))


# ---------------------------------------------------------------------------
# maximum likelihood

def simplex_stats(samples) -> SimplexSampleStats:
    """Sufficient statistics of simplex samples for the Dirichlet MLE.

    Samples touching the boundary are nudged inward so log stays finite.
    """
    s = np.asarray(samples, dtype=float)
    if s.ndim != 2 or s.shape[0] < 2:
        raise ValueError("need at least 2 simplex samples")
    s = np.clip(s, _BOUNDARY_NUDGE, None)
    s = s / np.sum(s, axis=1, keepdims=True)
    return SimplexSampleStats(s.shape[0], np.mean(np.log(s), axis=0), np.mean(s, axis=0))


def _avg_loglik(alpha, mean_log) -> float:
    return float(_kernels.avg_loglik(np.ascontiguousarray(alpha),
                                     np.ascontiguousarray(mean_log)))


def dir_mle_update(stats: SimplexSampleStats, init: DirichletParams,
                   max_iters: int = 200, tol: float = 1e-8) -> DirichletParams:
    """Fit Dir(alpha) to sample statistics, warm-started at `init`.

    Alternates the mean fixed point (precision held fixed) and a Newton step
    on the precision (mean held fixed); both sub-steps backtrack if they
    would decrease the average log-likelihood, so the iteration is monotone.
    """
    ml = np.asarray(stats.mean_log, dtype=float)
    if not np.all(np.isfinite(ml)):
        raise DomainError("degenerate sample statistics (boundary mass)")
    alpha = np.clip(init.alpha.astype(float), ALPHA_MIN, ALPHA_MAX)
    ll = _avg_loglik(alpha, ml)
    for _ in range(max_iters):
        prev_alpha = alpha
        s = float(np.sum(alpha))
        m = alpha / s

        # mean fixed point at fixed precision
        target = ml + float(np.sum(m * (digamma(s * m) - ml)))
        m_new = inv_digamma(target)
        m_new = np.maximum(m_new, 1e-12)
        m_new = m_new / float(np.sum(m_new))
        cand = np.clip(s * m_new, ALPHA_MIN, ALPHA_MAX)
        ll_cand = _avg_loglik(cand, ml)
        for _ in range(30):
            if ll_cand >= ll - 1e-12:
                break
            cand = 0.5 * (cand + alpha)
            ll_cand = _avg_loglik(cand, ml)
        if ll_cand >= ll - 1e-12:
            alpha, ll = cand, ll_cand
        s = float(np.sum(alpha))
        m = alpha / s

        # precision Newton step at fixed mean
        g = digamma(s) - float(np.sum(m * digamma(s * m))) + float(np.sum(m * ml))
        h = trigamma(s) - float(np.sum(m * m * trigamma(s * m)))
        if h != 0.0:
            step = g / h
            s_new = s - step
            if s_new <= 0.0:
                s_new = 0.5 * s
            cand = np.clip(s_new * m, ALPHA_MIN, ALPHA_MAX)
            ll_cand = _avg_loglik(cand, ml)
            for _ in range(30):
                if ll_cand >= ll - 1e-12:
                    break
                s_new = 0.5 * (s_new + s)
                cand = np.clip(s_new * m, ALPHA_MIN, ALPHA_MAX)
                ll_cand = _avg_loglik(cand, ml)
            if ll_cand >= ll - 1e-12:
                alpha, ll = cand, ll_cand

        if float(np.max(np.abs(alpha - prev_alpha))) < tol:
            break
    return DirichletParams(np.clip(alpha, ALPHA_MIN, ALPHA_MAX))


def moment_match(elites, prev: DirichletParams, momentum: float,
                 precision_cap: float | None = None) -> DirichletParams:
    """Refit the Dirichlet to elite samples and blend with the previous fit.

    `precision_cap` bounds the total concentration of the result by a
    mean-preserving rescale.  Elite sets cluster tightly once the search
    converges, so the unconstrained fit's precision grows without bound and
    sampling would freeze; the cap keeps the search distribution wide.
    """
    if not 0.0 <= momentum <= 1.0:
        raise ValueError("momentum must lie in [0, 1]")
    elites = np.asarray(elites, dtype=float)
    if elites.ndim != 2 or elites.shape[0] < 2:
        raise ValueError("need at least 2 elite samples")
    if momentum == 1.0:
        return prev
    fit = dir_mle_update(simplex_stats(elites), prev)
    alpha = momentum * prev.alpha + (1.0 - momentum) * fit.alpha
    if precision_cap is not None:
        a0 = float(np.sum(alpha))
        if a0 > precision_cap:
            alpha = alpha * (precision_cap / a0)
    return DirichletParams(np.clip(alpha, ALPHA_MIN, ALPHA_MAX))
