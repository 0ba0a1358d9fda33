"""Numba-compiled hot loops.

Everything here evaluates sums of the form
``sum_i c_i * prod_l p_l((q_l - X_{i,l}) / h_l)`` where each ``p_l`` is
a polynomial supported on ``(-half_l, half_l)``.  Both the density
estimator and the regression estimators are of this shape once the
``1/h`` scale factors are folded into the coefficients ``c_i`` by the
caller.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def weighted_product_sum(Q, X, c, coeffs, half, h):
    """``out[a] = sum_i c[i] * prod_l K_l((Q[a,l] - X[i,l]) / h[l])``.

    Parameters
    ----------
    Q : (nq, d) query points
    X : (n, d) data points
    c : (n,) per-observation weights
    coeffs : (d, nc) ascending polynomial coefficients per axis
    half : (d,) half-supports in the standardized argument
    h : (d,) bandwidths
    """
    nq = Q.shape[0]
    n, d = X.shape
    nc = coeffs.shape[1]
    out = np.zeros(nq)
    for a in range(nq):
        s = 0.0
        for i in range(n):
            p = 1.0
            for l in range(d):
                u = (Q[a, l] - X[i, l]) / h[l]
                if u <= -half[l] or u >= half[l]:
                    p = 0.0
                    break
                v = coeffs[l, nc - 1]
                for m in range(nc - 2, -1, -1):
                    v = v * u + coeffs[l, m]
                p *= v
            s += c[i] * p
        out[a] = s
    return out


@njit(cache=True)
def kernel_matrix(q, x, coeffs, half, h):
    """``out[a, i] = K((q[a] - x[i]) / h)`` for one axis (no 1/h factor)."""
    nq = q.shape[0]
    n = x.shape[0]
    nc = coeffs.shape[0]
    out = np.zeros((nq, n))
    for a in range(nq):
        for i in range(n):
            u = (q[a] - x[i]) / h
            if u <= -half or u >= half:
                continue
            v = coeffs[nc - 1]
            for m in range(nc - 2, -1, -1):
                v = v * u + coeffs[m]
            out[a, i] = v
    return out
