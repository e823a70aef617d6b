"""Closed-form weighted product of multivariate Gaussian experts.

Raising each expert density to a nonnegative temperature and multiplying
yields another Gaussian: precision is the temperature-weighted sum of expert
precisions and the mean solves Lambda mu = eta with eta the weighted sum of
precision-scaled means.  The log-partition of the unnormalized product is
kept so the fused density is exact, not just known up to a constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class BlendWeights:
    beta: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.beta, dtype=float)
        if b.ndim != 1 or np.any(b < 0) or not np.any(b > 0):
            raise ValueError("beta must be a 1-D nonnegative vector with a positive entry")
        object.__setattr__(self, "beta", b)


@dataclass(frozen=True)
class FusedGaussian:
    mu: np.ndarray
    lam: np.ndarray
    log_partition: float


def _as_beta(beta) -> np.ndarray:
    if isinstance(beta, BlendWeights):
        return beta.beta
    b = np.asarray(beta, dtype=float)
    if b.ndim != 1 or np.any(b < 0) or not np.any(b > 0):
        raise ValueError("beta must be a 1-D nonnegative vector with a positive entry")
    return b


def fuse(evals, beta) -> FusedGaussian:
    """Fuse expert Gaussians under temperatures beta.

    Zero-weight experts are skipped, so a unit vector beta reproduces the
    corresponding expert exactly.
    """
    b = _as_beta(beta)
    if len(evals) != b.size:
        raise ValueError(f"{len(evals)} experts but {b.size} temperatures")
    d = evals[0].mu.size
    lam = np.zeros((d, d))
    eta = np.zeros(d)
    xi = 0.0
    for ev, bi in zip(evals, b):
        if bi == 0.0:
            continue
        if ev.mu.size != d:
            raise ValueError("experts disagree on action dimension")
        lam += bi * ev.lam
        eta += bi * (ev.lam @ ev.mu)
        sign, logdet_i = np.linalg.slogdet(ev.lam)
        if sign <= 0:
            raise ValueError("expert precision must be positive definite")
        xi += bi * (-0.5 * d * _LOG_2PI + 0.5 * logdet_i - 0.5 * float(ev.mu @ ev.lam @ ev.mu))
    cf = cho_factor(lam, lower=True)
    mu = cho_solve(cf, eta)
    logdet = 2.0 * float(np.sum(np.log(np.diag(cf[0]))))
    log_partition = xi + 0.5 * float(eta @ mu) + 0.5 * d * _LOG_2PI - 0.5 * logdet
    return FusedGaussian(mu, lam, log_partition)


def optimal_action(fused: FusedGaussian) -> np.ndarray:
    """The argmax of the fused log-density, i.e. its mean."""
    return fused.mu.copy()


def log_density(fused: FusedGaussian, a) -> float:
    a = np.asarray(a, dtype=float)
    d = fused.mu.size
    r = a - fused.mu
    sign, logdet = np.linalg.slogdet(fused.lam)
    return -0.5 * float(r @ fused.lam @ r) + 0.5 * logdet - 0.5 * d * _LOG_2PI


def sample_action(fused: FusedGaussian, rng_seed) -> np.ndarray:
    """Draw from N(mu, Lambda^-1); deterministic for a given seed."""
    rng = np.random.default_rng(rng_seed)
    cov = np.linalg.inv(fused.lam)
    L = np.linalg.cholesky(cov)
    return fused.mu + L @ rng.standard_normal(fused.mu.size)
