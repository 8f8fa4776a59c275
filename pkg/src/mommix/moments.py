"""Core moment-based estimator for the two-component mixture regression.

The model is Y = P*Y1 + (1-P)*Y2 where only component 1 sees the
covariates: Y1 = mu1 + beta'X + noise, Y2 is covariate-free, and P is a
latent Bernoulli(p) membership. With eta = lambda1'X for lambda1 = p*beta,
the first two conditional moments are polynomial in eta:

    E(Y   | X) = p*mu1 + (1-p)*mu2 + eta
    E(Y^2 | X) = alpha_tilde + lambda2*eta + lambda3*eta^2

where lambda2 = 2*mu1 and lambda3 = 1/p. Stage one estimates lambda1 by
regressing Y on (1, X); stage two turns weighted empirical moments of
(eta, Y^2) into lambda2 and lambda3 through the a/b/g statistics; the
mixture parameters follow as beta = lambda3*lambda1, mu1 = lambda2/2,
p = 1/lambda3.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels, numkit
from .errors import (
    DegenerateMixture,
    DegenerateWeights,
    DimensionMismatch,
    InvalidData,
    NonIdentifiable,
)

IDENTIFIABILITY_TOL = 1e-12
DEGENERACY_TOL = 1e-8


@dataclass(frozen=True)
class Dataset:
    """Response vector and covariate matrix, the raw input to every fit.

    ``x`` has one row per observation and no intercept column; a 1-d array
    is accepted and treated as a single covariate. Requires n >= m + 3 so
    both moment regressions have spare degrees of freedom.
    """

    y: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        y = np.ascontiguousarray(self.y, dtype=float)
        x = np.ascontiguousarray(self.x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if y.ndim != 1 or x.ndim != 2:
            raise DimensionMismatch(
                f"y must be a vector and x a matrix, got shapes {y.shape} and {x.shape}"
            )
        if x.shape[0] != y.shape[0]:
            raise DimensionMismatch(
                f"y has {y.shape[0]} rows but x has {x.shape[0]}"
            )
        n, m = x.shape
        if m < 1:
            raise InvalidData("x needs at least one covariate column")
        if n < m + 3:
            raise InvalidData(f"need at least m + 3 = {m + 3} rows, got {n}")
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(x))):
            raise InvalidData("dataset entries must be finite")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "x", x)

    @property
    def n(self):
        return self.y.shape[0]

    @property
    def m(self):
        return self.x.shape[1]


class FirstStage(NamedTuple):
    lambda1: np.ndarray
    first_intercept: float
    eta: np.ndarray
    v_weights: np.ndarray


@dataclass(frozen=True)
class MomentFit:
    """Everything the two moment regressions produce.

    ``lambda1``, ``lambda2``, ``lambda3`` and ``alpha_tilde`` are the raw
    regression-scale quantities; ``beta``, ``mu1`` and ``p`` are derived
    from them by construction, so the identity chain beta = lambda3 *
    lambda1, mu1 = lambda2 / 2, p = 1 / lambda3 holds exactly. ``p`` is
    reported raw even outside (0, 1]; ``p_in_range`` flags validity.
    """

    lambda1: np.ndarray
    lambda2: float
    lambda3: float
    alpha_tilde: float
    beta: np.ndarray
    mu1: float
    p: float
    eta: np.ndarray
    first_intercept: float
    w_weights: np.ndarray
    v_weights: np.ndarray
    a_stats: tuple
    b_stats: tuple
    g_stats: tuple
    p_in_range: bool


def _check_weights(w):
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise DegenerateWeights("weights must be finite and nonnegative")
    if not w.sum() > 0:
        raise DegenerateWeights("weights must have a positive sum")


def _stats_from_sums(sums, identifiability_tol):
    """Compose the a/b/g statistics from a raw weighted moment block."""
    _, p1, p2, p3, p4, py2, pey2, pe2y2 = sums
    a1 = p4 - p2 * p2
    a2 = p3 - p1 * p2
    a3 = p2 - p1 * p1
    b1 = pey2 - p1 * py2
    b2 = pe2y2 - p2 * py2
    g1 = a1 * b1 - a2 * b2
    g2 = a3 * b2 - a2 * b1
    g3 = a1 * a3 - a2 * a2
    # the 1e-300 floor makes an exactly-constant eta (all stats zero) trip
    # the threshold too
    if abs(g3) < identifiability_tol * (a1 * a3 + a2 * a2 + 1e-300):
        raise NonIdentifiable(
            f"second-moment statistics are degenerate (g3 = {g3:.3e}); "
            "the linear predictor carries no usable quadratic signal"
        )
    return (a1, a2, a3), (b1, b2), (g1, g2, g3)


def fit_lambda1(data, reweight=True):
    """First-moment regression of Y on (1, X).

    Stage one is plain OLS. With ``reweight`` the fitted linear predictor
    feeds one weighted refit with v_i = 1 / (1 + eta_i^2), approximating
    the inverse conditional variance; eta is then recomputed from the
    refitted coefficients. Exactly one reweighting pass, no iteration.

    Returns a ``FirstStage`` tuple ``(lambda1, first_intercept, eta,
    v_weights)``.
    """
    design = np.column_stack([np.ones(data.n), data.x])
    ols = numkit.weighted_least_squares(design, data.y, np.ones(data.n))
    lam1 = ols.coefficients[1:]
    eta = data.x @ lam1
    if not reweight:
        return FirstStage(lam1, float(ols.coefficients[0]), eta, np.ones(data.n))
    v = 1.0 / (1.0 + eta * eta)
    wls = numkit.weighted_least_squares(design, data.y, v)
    lam1 = wls.coefficients[1:]
    eta = data.x @ lam1
    return FirstStage(lam1, float(wls.coefficients[0]), eta, v)


def second_moment_stats(y, eta, w_weights, identifiability_tol=IDENTIFIABILITY_TOL):
    """Weighted a/b/g statistics of (eta, Y^2) under the given weights.

    With P the w-weighted empirical mean:
        a1 = P(eta^4) - P(eta^2)^2      b1 = P(eta Y^2) - P(eta) P(Y^2)
        a2 = P(eta^3) - P(eta) P(eta^2) b2 = P(eta^2 Y^2) - P(eta^2) P(Y^2)
        a3 = P(eta^2) - P(eta)^2
    and g1 = a1 b1 - a2 b2, g2 = a3 b2 - a2 b1, g3 = a1 a3 - a2^2.

    Returns ``(a_stats, b_stats, g_stats)`` as tuples. Raises
    NonIdentifiable when |g3| falls below ``identifiability_tol``
    relative to a1*a3 + a2^2.
    """
    y = np.ascontiguousarray(y, dtype=float)
    eta = np.ascontiguousarray(eta, dtype=float)
    w = np.ascontiguousarray(w_weights, dtype=float)
    if y.ndim != 1 or eta.ndim != 1 or w.ndim != 1:
        raise DimensionMismatch("y, eta and w_weights must be vectors")
    if not (y.shape[0] == eta.shape[0] == w.shape[0]):
        raise DimensionMismatch(
            f"length mismatch: y {y.shape[0]}, eta {eta.shape[0]}, w {w.shape[0]}"
        )
    _check_weights(w)
    return _stats_from_sums(_kernels.moment_sums(eta, y, w), identifiability_tol)


def lambda23_profile(x, y, lam1, identifiability_tol=IDENTIFIABILITY_TOL):
    """Empirical map lam1 -> (lambda2, lambda3), holding the data fixed.

    Recomputes eta = x @ lam1, the weights w = 1/(1 + eta^4) and every
    statistic from scratch, which is exactly what the finite-difference
    gradients in the asymptotics module need to perturb.
    """
    sums = _kernels.profile_moments(x, y, np.ascontiguousarray(lam1, dtype=float))
    _, _, g = _stats_from_sums(sums, identifiability_tol)
    g1, g2, g3 = g
    return np.array([g1 / g3, g2 / g3])


def fit(data, identifiability_tol=IDENTIFIABILITY_TOL, degeneracy_tol=DEGENERACY_TOL):
    """Full moment estimator: both stages plus the derived parameters.

    Runs ``fit_lambda1`` with reweighting, forms w_i = 1/(1 + eta_i^4),
    computes the second-moment statistics, and recovers

        lambda2 = g1/g3, lambda3 = g2/g3,
        alpha_tilde = P(Y^2) - lambda2 P(eta) - lambda3 P(eta^2),
        beta = lambda3 * lambda1, mu1 = lambda2 / 2, p = 1 / lambda3.

    Raises RankDeficient (from the first stage), NonIdentifiable (from the
    statistics) or DegenerateMixture when |lambda3| < ``degeneracy_tol``
    and p would be undefined.
    """
    stage = fit_lambda1(data, reweight=True)
    eta = stage.eta
    e2 = eta * eta
    w = 1.0 / (1.0 + e2 * e2)
    sums = _kernels.moment_sums(eta, data.y, w)
    a, b, g = _stats_from_sums(sums, identifiability_tol)
    g1, g2, g3 = g
    lambda2 = g1 / g3
    lambda3 = g2 / g3
    if abs(lambda3) < degeneracy_tol:
        raise DegenerateMixture(
            f"lambda3 = {lambda3:.3e} is numerically zero, p = 1/lambda3 undefined"
        )
    _, p_eta, p_eta2, _, _, p_y2, _, _ = sums
    alpha_tilde = p_y2 - lambda2 * p_eta - lambda3 * p_eta2
    p = 1.0 / lambda3
    return MomentFit(
        lambda1=stage.lambda1,
        lambda2=lambda2,
        lambda3=lambda3,
        alpha_tilde=alpha_tilde,
        beta=lambda3 * stage.lambda1,
        mu1=lambda2 / 2.0,
        p=p,
        eta=eta,
        first_intercept=stage.first_intercept,
        w_weights=w,
        v_weights=stage.v_weights,
        a_stats=a,
        b_stats=b,
        g_stats=g,
        p_in_range=bool(0.0 < p <= 1.0),
    )
