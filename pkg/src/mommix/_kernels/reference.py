"""Reference numpy implementations of the hot kernels.

The compiled backend in ``_fast.pyx`` must agree with these to float
precision; the kernel tests enforce it. Inputs are assumed to be
C-contiguous float64 arrays (the callers guarantee this), and no argument
validation happens at this level.
"""

import numpy as np


def moment_sums(eta, y, w):
    """One-pass weighted moment block for the second-order regression.

    Returns the tuple ``(wbar, p_eta, p_eta2, p_eta3, p_eta4, p_y2,
    p_eta_y2, p_eta2_y2)`` where each ``p_*`` is the w-weighted empirical
    mean of the named product and ``wbar`` is the plain average of ``w``.
    """
    sw = float(w.sum())
    e2 = eta * eta
    y2 = y * y
    we = w * eta
    we2 = w * e2
    return (
        sw / eta.shape[0],
        float(we.sum()) / sw,
        float(we2.sum()) / sw,
        float((we * e2).sum()) / sw,
        float((we2 * e2).sum()) / sw,
        float((w * y2).sum()) / sw,
        float((we * y2).sum()) / sw,
        float((we2 * y2).sum()) / sw,
    )


def profile_moments(x, y, lam1):
    """``moment_sums`` with eta = x @ lam1 and w = 1/(1 + eta^4), fused.

    This is the inner evaluation of the finite-difference loop, so eta and
    the weights are always recomputed from the supplied lam1.
    """
    eta = x @ lam1
    e2 = eta * eta
    w = 1.0 / (1.0 + e2 * e2)
    return moment_sums(eta, y, w)


def em_estep(y, mean1, var1, mu2, var2, p):
    """Posterior component-1 weights and the observed-data log-likelihood.

    Component 1 is N(mean1_i, var1), component 2 is N(mu2, var2), mixed
    with proportion p. Computed in log space so collapsing variances do
    not overflow.
    """
    la = np.log(p) - 0.5 * np.log(2.0 * np.pi * var1) - (y - mean1) ** 2 / (2.0 * var1)
    lb = np.log1p(-p) - 0.5 * np.log(2.0 * np.pi * var2) - (y - mu2) ** 2 / (2.0 * var2)
    s = np.logaddexp(la, lb)
    return np.exp(la - s), float(s.sum())
