"""EM baseline: two-component Gaussian mixture regression where only
component 1 sees the covariates.

Component 1 is N(mu1 + beta'X, sigma1_sq), component 2 is N(mu2,
sigma2_sq). Because the covariate enters one component structurally,
labels are fixed and no post-hoc label switching is needed: the returned
beta always belongs to the covariate-driven component.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels, numkit
from .errors import DegenerateComponent, RankDeficient

VARIANCE_FLOOR = 1e-8


@dataclass(frozen=True)
class GaussianMixFit:
    beta: np.ndarray
    mu1: float
    sigma1_sq: float
    mu2: float
    sigma2_sq: float
    p: float
    loglik: float
    responsibilities: np.ndarray
    iterations: int
    converged: bool
    variance_floored: bool
    loglik_trace: np.ndarray


class _MStep:
    # plain holder for the current parameter block
    __slots__ = ("beta", "mu1", "mean1", "s1", "mu2", "s2", "p", "floored")

    def __init__(self, beta, mu1, mean1, s1, mu2, s2, p, floored):
        self.beta = beta
        self.mu1 = mu1
        self.mean1 = mean1
        self.s1 = s1
        self.mu2 = mu2
        self.s2 = s2
        self.p = p
        self.floored = floored


def _mstep(design, y, gamma):
    n = y.shape[0]
    mass1 = float(gamma.sum())
    mass2 = n - mass1
    if mass1 < 2.0 or mass2 < 2.0:
        raise DegenerateComponent(
            f"component responsibility mass below 2 ({mass1:.3f} vs {mass2:.3f})"
        )
    wls = numkit.weighted_least_squares(design, y, gamma)
    mean1 = wls.fitted
    s1 = float(gamma @ wls.residuals**2) / mass1
    anti = 1.0 - gamma
    mu2 = float(anti @ y) / mass2
    s2 = float(anti @ (y - mu2) ** 2) / mass2
    floored = False
    if s1 < VARIANCE_FLOOR:
        s1 = VARIANCE_FLOOR
        floored = True
    if s2 < VARIANCE_FLOOR:
        s2 = VARIANCE_FLOOR
        floored = True
    return _MStep(
        beta=wls.coefficients[1:],
        mu1=float(wls.coefficients[0]),
        mean1=mean1,
        s1=s1,
        mu2=mu2,
        s2=s2,
        p=mass1 / n,
        floored=floored,
    )


def _run_em(design, y, gamma0, max_iter, tol):
    params = _mstep(design, y, gamma0)
    floored = params.floored
    trace = []
    prev = None
    converged = False
    gamma = gamma0
    iterations = 0
    for iterations in range(1, max_iter + 1):
        gamma, ll = _kernels.em_estep(
            y, params.mean1, params.s1, params.mu2, params.s2, params.p
        )
        trace.append(ll)
        params = _mstep(design, y, gamma)
        floored = floored or params.floored
        if prev is not None and abs(ll - prev) <= tol * (abs(prev) + 1e-12):
            converged = True
            break
        prev = ll
    # p comes from the final M-step, so mean(responsibilities) equals it
    # exactly; loglik is the E-step value that triggered the stop
    return GaussianMixFit(
        beta=params.beta,
        mu1=params.mu1,
        sigma1_sq=params.s1,
        mu2=params.mu2,
        sigma2_sq=params.s2,
        p=params.p,
        loglik=trace[-1],
        responsibilities=gamma,
        iterations=iterations,
        converged=converged,
        variance_floored=floored,
        loglik_trace=np.asarray(trace),
    )


def _initial_split(design, y):
    base = numkit.weighted_least_squares(design, y, np.ones(y.shape[0]))
    return (base.residuals >= np.median(base.residuals)).astype(float)


def em_fit(data, restarts=5, max_iter=500, tol=1e-8, seed=0):
    """Best-of-restarts EM fit.

    Restart 0 initializes responsibilities by splitting observations at
    the median residual of an overall OLS fit; later restarts flip each
    membership independently with probability 0.2 under a rng derived
    from (seed, restart index). A restart that degenerates (component
    mass below 2, or a rank-deficient weighted solve) is skipped; the fit
    with the highest final log-likelihood wins, earliest restart on ties.
    Raises DegenerateComponent only if every restart fails.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    design = np.column_stack([np.ones(data.n), data.x])
    split = _initial_split(design, data.y)
    best = None
    first_error = None
    for k in range(restarts):
        if k == 0:
            gamma0 = split
        else:
            rng = np.random.default_rng(
                np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, k])
            )
            flip = rng.random(data.n) < 0.2
            gamma0 = np.where(flip, 1.0 - split, split)
        try:
            cand = _run_em(design, data.y, gamma0, max_iter, tol)
        except (DegenerateComponent, RankDeficient) as exc:
            if first_error is None:
                first_error = exc
            continue
        if best is None or cand.loglik > best.loglik:
            best = cand
    if best is None:
        raise DegenerateComponent(
            f"all {restarts} EM restarts degenerated; first failure: {first_error}"
        )
    return best
