"""Dense numerical primitives shared by the estimation modules.

Three tools live here: weighted least squares solved through an orthogonal
factorization, weighted empirical means, and central finite differences.
Matrices are plain float64 numpy arrays; a design is an (n, k) array whose
rows are observations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import (
    DegenerateWeights,
    DimensionMismatch,
    NonFiniteEvaluation,
    RankDeficient,
)

# central-difference step scale, ~6.06e-6 for float64
_STEP_SCALE = float(np.cbrt(np.finfo(float).eps))


@dataclass(frozen=True)
class WlsFit:
    """Solution of a weighted least-squares problem.

    Attributes
    ----------
    coefficients : ndarray, shape (k,)
        Minimizer of the weighted residual sum of squares.
    fitted : ndarray, shape (n,)
        ``design @ coefficients``.
    residuals : ndarray, shape (n,)
        ``response - fitted``, so ``fitted + residuals`` reproduces the
        response exactly.
    """

    coefficients: np.ndarray
    fitted: np.ndarray
    residuals: np.ndarray


def _as_vector(values, name):
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise DimensionMismatch(f"{name} must be 1-dimensional, got shape {arr.shape}")
    return arr


def _check_weights(w):
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise DegenerateWeights("weights must be finite and nonnegative")
    if not w.sum() > 0:
        raise DegenerateWeights("weights must have a positive sum")


def weighted_mean(values, weights):
    """Weight-normalized average ``sum(v * w) / sum(w)``.

    Parameters
    ----------
    values, weights : array_like, shape (n,)
        Equal-length vectors; weights nonnegative with a positive sum.

    Returns
    -------
    float

    Raises
    ------
    DimensionMismatch
        If the inputs are not equal-length vectors.
    DegenerateWeights
        If any weight is negative or non-finite, or the weights sum to
        zero.
    """
    v = _as_vector(values, "values")
    w = _as_vector(weights, "weights")
    if v.shape[0] != w.shape[0]:
        raise DimensionMismatch(
            f"values has length {v.shape[0]} but weights has length {w.shape[0]}"
        )
    _check_weights(w)
    return float((v @ w) / w.sum())


def weighted_least_squares(design, response, weights, rank_rtol=1e-10):
    """Minimize ``sum_i w_i * (y_i - x_i @ b)**2`` over ``b``.

    The solve runs on the QR factorization of ``diag(sqrt(w)) @ design``
    rather than the normal equations; the second-moment designs downstream
    contain eta and eta^2 columns whose squared condition number would
    otherwise bite.

    Parameters
    ----------
    design : array_like, shape (n, k)
    response : array_like, shape (n,)
    weights : array_like, shape (n,)
        Nonnegative, at least one strictly positive. Zero-weight rows are
        ignored by construction.
    rank_rtol : float
        Relative threshold on the R-diagonal below which the weighted
        design is declared rank deficient.

    Returns
    -------
    WlsFit

    Raises
    ------
    RankDeficient
        If the smallest R-diagonal magnitude falls below ``rank_rtol``
        times the largest.
    DimensionMismatch, DegenerateWeights
        On malformed inputs.
    """
    a = np.asarray(design, dtype=float)
    if a.ndim != 2:
        raise DimensionMismatch(f"design must be 2-dimensional, got shape {a.shape}")
    y = _as_vector(response, "response")
    w = _as_vector(weights, "weights")
    n, k = a.shape
    if y.shape[0] != n or w.shape[0] != n:
        raise DimensionMismatch(
            f"design has {n} rows but response has {y.shape[0]} and weights {w.shape[0]}"
        )
    if k > n:
        raise DimensionMismatch(f"design has more columns ({k}) than rows ({n})")
    _check_weights(w)

    sw = np.sqrt(w)
    q, r = np.linalg.qr(sw[:, None] * a)
    diag = np.abs(np.diag(r))
    top = diag.max()
    if top == 0.0 or diag.min() < rank_rtol * top:
        raise RankDeficient(
            "weighted design is numerically rank deficient "
            f"(R-diagonal ratio {diag.min() / top if top else 0.0:.3e})"
        )
    coef = solve_triangular(r, q.T @ (sw * y), lower=False)
    fitted = a @ coef
    return WlsFit(coefficients=coef, fitted=fitted, residuals=y - fitted)


def _steps(at):
    return _STEP_SCALE * np.maximum(1.0, np.abs(at))


def finite_diff_gradient(f, at):
    """Central-difference gradient of a scalar function.

    The step in coordinate j is ``cbrt(eps) * max(1, |at_j|)``, the
    standard scale balancing truncation against rounding for central
    differences.

    Parameters
    ----------
    f : callable
        Maps a length-k float vector to a finite scalar.
    at : array_like, shape (k,)

    Returns
    -------
    ndarray, shape (k,)

    Raises
    ------
    NonFiniteEvaluation
        If f returns a non-finite value at any perturbed point.
    """
    x = _as_vector(at, "at").copy()
    h = _steps(x)
    grad = np.empty_like(x)
    for j in range(x.shape[0]):
        fp, fm = _pair_eval(f, x, j, h[j])
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise NonFiniteEvaluation(
                f"f evaluated non-finite near coordinate {j} (got {fp!r}, {fm!r})"
            )
        grad[j] = (fp - fm) / (2.0 * h[j])
    return grad


def finite_diff_jacobian(f, at):
    """Central-difference Jacobian of a vector-valued function.

    Same stepping rule as ``finite_diff_gradient``; row i of the result is
    the gradient of the i-th output. Useful when several outputs share the
    same expensive evaluation, as with the profile map from lambda1 to
    (lambda2, lambda3).

    Returns
    -------
    ndarray, shape (len(f(at)), k)
    """
    x = _as_vector(at, "at").copy()
    h = _steps(x)
    cols = []
    for j in range(x.shape[0]):
        fp, fm = _pair_eval(f, x, j, h[j])
        fp = np.asarray(fp, dtype=float)
        fm = np.asarray(fm, dtype=float)
        if not (np.all(np.isfinite(fp)) and np.all(np.isfinite(fm))):
            raise NonFiniteEvaluation(f"f evaluated non-finite near coordinate {j}")
        cols.append((fp - fm) / (2.0 * h[j]))
    return np.stack(cols, axis=-1)


def _pair_eval(f, x, j, hj):
    old = x[j]
    x[j] = old + hj
    fp = f(x)
    x[j] = old - hj
    fm = f(x)
    x[j] = old
    return fp, fm
