"""Standard errors and Wald intervals for the moment estimator.

Everything is built from per-observation influence terms. The first stage
contributes eps_i (the least-squares influence of observation i on
lambda1), the second stage contributes f1_i and f2_i (centered
second-moment residual terms), and the chain rule through the empirical
profile map lam1 -> (lambda2, lambda3) combines them into scalar
influences for lambda2 and lambda3 and a vector influence xi_i for beta.
Variances are uncentered empirical second moments of those terms, which
are asymptotically mean zero; p inherits its standard error from lambda3
by the delta method.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.stats import norm

from . import numkit
from .errors import RankDeficient
from .moments import lambda23_profile


@dataclass(frozen=True)
class AsymptoticSummary:
    """Standard errors and confidence intervals on the estimate scale.

    ``se_beta[j]`` is directly comparable to the sampling standard
    deviation of ``beta[j]``; intervals are ``estimate +/- z * se``.
    ``xi_matrix`` holds the per-observation influence rows for beta.
    """

    se_beta: np.ndarray
    se_p: float
    se_lambda3: float
    se_lambda2: float
    xi_matrix: np.ndarray
    ci_beta: np.ndarray
    ci_p: tuple
    level: float


class _Pieces(NamedTuple):
    eps: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    dlam2: np.ndarray
    dlam3: np.ndarray
    zeta2: np.ndarray
    zeta3: np.ndarray
    xi: np.ndarray


def epsilon_terms(data, fit):
    """First-stage influence rows, one per observation.

    eps_i is the last-m block of (n^-1 Xt'V Xt)^-1 v_i Xt_i r_i with Xt
    the intercept-augmented design, V the diagonal of the first-stage
    regression weights and r_i the residual of observation i against the
    fitted first stage. The Gram matrix carries the same weights the
    coefficients were estimated under (all ones when reweighting was
    off), so the influence matches the estimator that was actually run.
    """
    xt = np.column_stack([np.ones(data.n), data.x])
    v = fit.v_weights
    gram = (xt * v[:, None]).T @ xt / data.n
    sing = np.linalg.svd(gram, compute_uv=False)
    if sing[-1] < 1e-10 * sing[0]:
        raise RankDeficient(
            f"augmented design Gram matrix is singular (ratio {sing[-1] / sing[0]:.3e})"
        )
    resid = data.y - (fit.first_intercept + fit.eta)
    rows = np.linalg.solve(gram, xt.T).T * (v * resid)[:, None]
    return rows[:, 1:]


def f_terms(data, fit):
    """Centered second-moment residual terms (f1_i, f2_i).

    The second-moment residual is r2_i = Y_i^2 - (alpha_tilde + lambda2 *
    eta_i + lambda3 * eta_i^2); f1 centers it by eta minus its w-weighted
    mean, f2 by eta^2 minus its w-weighted mean.
    """
    eta = fit.eta
    eta2 = eta * eta
    r2 = data.y**2 - (fit.alpha_tilde + fit.lambda2 * eta + fit.lambda3 * eta2)
    f1 = (eta - numkit.weighted_mean(eta, fit.w_weights)) * r2
    f2 = (eta2 - numkit.weighted_mean(eta2, fit.w_weights)) * r2
    return f1, f2


def _pieces(data, fit):
    eps = epsilon_terms(data, fit)
    f1, f2 = f_terms(data, fit)
    jac = numkit.finite_diff_jacobian(
        lambda lam1: lambda23_profile(data.x, data.y, lam1), fit.lambda1
    )
    dlam2, dlam3 = jac[0], jac[1]
    a1, a2, a3 = fit.a_stats
    g3 = fit.g_stats[2]
    scale = 1.0 / (g3 * float(fit.w_weights.mean()))
    zeta2 = eps @ dlam2 + fit.w_weights * (a1 * f1 - a2 * f2) * scale
    zeta3 = eps @ dlam3 + fit.w_weights * (a3 * f2 - a2 * f1) * scale
    xi = fit.lambda3 * eps + np.outer(zeta3, fit.lambda1)
    return _Pieces(eps, f1, f2, dlam2, dlam3, zeta2, zeta3, xi)


def xi_decomposition(data, fit):
    """Per-observation influence rows for beta.

    xi_i = lambda3 * eps_i + lambda1 * zeta3_i, the chain rule for
    beta = lambda3 * lambda1 with zeta3_i the scalar influence of
    observation i on lambda3 (gradient term plus the weighted
    {a3 f2 - a2 f1} fluctuation, normalized by g3 times the mean weight).
    """
    return _pieces(data, fit).xi


def summarize(data, fit, level=0.95):
    """Standard errors and Wald confidence intervals at the given level.

    var(xi) is the uncentered empirical second moment n^-1 sum xi_i xi_i';
    se_beta = sqrt(diag(var(xi)) / n), and the scalar influences give
    se_lambda2 and se_lambda3 the same way. se_p = se_lambda3 / lambda3^2
    by the delta method, and ci_p is centered on the raw p estimate.
    """
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must be in (0, 1), got {level}")
    pieces = _pieces(data, fit)
    n = data.n
    var_xi = pieces.xi.T @ pieces.xi / n
    se_beta = np.sqrt(np.diag(var_xi) / n)
    se_lambda2 = float(np.sqrt(np.mean(pieces.zeta2**2) / n))
    se_lambda3 = float(np.sqrt(np.mean(pieces.zeta3**2) / n))
    se_p = se_lambda3 / fit.lambda3**2
    z = float(norm.ppf(0.5 + level / 2.0))
    ci_beta = np.column_stack([fit.beta - z * se_beta, fit.beta + z * se_beta])
    ci_p = (fit.p - z * se_p, fit.p + z * se_p)
    return AsymptoticSummary(
        se_beta=se_beta,
        se_p=se_p,
        se_lambda3=se_lambda3,
        se_lambda2=se_lambda2,
        xi_matrix=pieces.xi,
        ci_beta=ci_beta,
        ci_p=ci_p,
        level=level,
    )
