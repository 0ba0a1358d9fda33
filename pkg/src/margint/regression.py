"""Kernel regression fields: plug-in, single-bandwidth, and oracle.

All three estimators share the weighted product-kernel form

    m(x) = sum_i  w_i * prod_l (1/h_l) K_l((x_l - X_{i,l}) / h_l)

and differ only in the per-observation weights ``w_i``: the plug-in
field divides each response by the estimated density at the data point,
the oracle field by the true density, and the single-bandwidth field
uses one bandwidth for every axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._fast import kernel_matrix, weighted_product_sum
from .density import DensityField, Sample, coeff_matrix
from .kernels import KernelSpec, ProductKernel
from .quadrature import gauss_legendre, integrate_1d

#: Default bandwidth constants; calibrated on the reference designs.
DEFAULT_C_H = 0.45
DEFAULT_C_ELL = 0.60
DEFAULT_C_SINGLE = 1.0


@dataclass(frozen=True)
class BandwidthPlan:
    """Per-axis regression bandwidths, density bandwidth, single bandwidth."""

    h_axes: np.ndarray  # (d,) h_{l,n}
    ell: float
    h_single: float
    n: int
    rate_meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        h = np.asarray(self.h_axes, dtype=float)
        object.__setattr__(self, "h_axes", h)
        if np.any(h <= 0) or self.ell <= 0 or self.h_single <= 0:
            raise ValueError("all bandwidths must be strictly positive")
        if self.n < 1:
            raise ValueError("plan sample size must be >= 1")

    @property
    def d(self) -> int:
        return self.h_axes.size

    @property
    def equal_h(self) -> bool:
        return bool(np.all(self.h_axes == self.h_axes[0]))

    def with_equal_h(self) -> "BandwidthPlan":
        h = np.full(self.d, self.h_axes[0])
        return BandwidthPlan(h, self.ell, self.h_single, self.n,
                             dict(self.rate_meta, equal_h=True))


def make_default_plan(n: int, d: int, k: int = 2, *,
                      c_h: float = DEFAULT_C_H,
                      c_ell: float = DEFAULT_C_ELL,
                      c_single: float = DEFAULT_C_SINGLE,
                      h_exponent: float | None = None,
                      ell_exponent: float | None = None,
                      single_exponent: float | None = None,
                      equal_h: bool = False) -> BandwidthPlan:
    """Bandwidths from the default rate rules.

    The regression bandwidths are slightly under-smoothed,
    ``h = c_h * n^(-1/(2k + 0.5))``, so that the scaled bias term
    vanishes in the band experiments; the density bandwidth decays as
    ``n^(-1/(8d))`` and the single bandwidth follows the prescribed
    ``n^(-2k/(2k+1))`` rate (overridable, see ``single_exponent``).
    """
    he = h_exponent if h_exponent is not None else 1.0 / (2 * k + 0.5)
    ee = ell_exponent if ell_exponent is not None else 1.0 / (8 * d)
    se = single_exponent if single_exponent is not None else 2 * k / (2 * k + 1.0)
    h = c_h * n ** (-he)
    ell = c_ell * n ** (-ee)
    h_single = c_single * n ** (-se)
    meta = {"k": k, "h_exponent": he, "ell_exponent": ee, "single_exponent": se,
            "c_h": c_h, "c_ell": c_ell, "c_single": c_single}
    plan = BandwidthPlan(np.full(d, h), ell, h_single, n, meta)
    return plan.with_equal_h() if equal_h else plan


def validate_plan(plan: BandwidthPlan) -> list[str]:
    """Finite-n surrogates of the bandwidth hypotheses; returns problems."""
    problems = []
    h1 = float(plan.h_axes[0])
    if h1 >= 1:
        problems.append(f"h1={h1} must be < 1 (log(1/h1) must be positive)")
    if plan.n * h1 <= math.log(plan.n):
        problems.append(f"n*h1={plan.n * h1:.3g} must exceed log(n)={math.log(plan.n):.3g}")
    return problems


@dataclass(frozen=True)
class RegressionField:
    """A fitted weighted kernel-sum regression surface.

    ``base_weights[i] = Y_i / (n * denom_i)`` with the ``1/h_l`` kernel
    scale factors applied at evaluation time.
    """

    kind: str  # plug_in | single_bandwidth | oracle
    sample: Sample
    kernels: tuple[KernelSpec, ...]
    h: np.ndarray  # (d,) bandwidth per axis
    base_weights: np.ndarray  # (n,)

    def __post_init__(self):
        object.__setattr__(self, "h", np.asarray(self.h, dtype=float))
        object.__setattr__(self, "base_weights",
                           np.ascontiguousarray(self.base_weights, dtype=float))
        if len(self.kernels) != self.sample.d or self.h.size != self.sample.d:
            raise ValueError("kernel/bandwidth count must match the sample dimension")

    @property
    def d(self) -> int:
        return self.sample.d

    @property
    def h_prod(self) -> float:
        return float(np.prod(self.h))

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        vals = self.at_points(np.atleast_2d(x))
        return float(vals[0]) if single else vals

    __call__ = evaluate

    def at_points(self, pts: np.ndarray) -> np.ndarray:
        """Vectorized evaluation at an (N, d) point matrix."""
        coeffs = coeff_matrix(ProductKernel(self.kernels))
        half = np.array([k.half_support for k in self.kernels])
        c = self.base_weights / self.h_prod
        return weighted_product_sum(np.ascontiguousarray(pts, dtype=float),
                                    self.sample.x, c, coeffs, half, self.h)

    def axis_matrix(self, axis: int, q: np.ndarray) -> np.ndarray:
        """Unscaled kernel matrix ``K_l((q_a - X_{i,l}) / h_l)`` of shape (nq, n)."""
        k = self.kernels[axis]
        return kernel_matrix(np.ascontiguousarray(q, dtype=float),
                             self.sample.x[:, axis], k.coeffs,
                             k.half_support, float(self.h[axis]))

    def on_grid(self, axes: list[np.ndarray]) -> np.ndarray:
        """Evaluate on the tensor grid of per-axis arrays (factorized)."""
        if len(axes) != self.d:
            raise ValueError("one grid per axis required")
        mats = [self.axis_matrix(l, np.asarray(g, dtype=float))
                for l, g in enumerate(axes)]
        c = self.base_weights / self.h_prod
        letters = "abcefg"
        spec = ",".join(f"{letters[l]}i" for l in range(self.d))
        out_spec = "".join(letters[: self.d])
        return np.einsum(f"{spec},i->{out_spec}", *mats, c, optimize=True)


def _fit(kind, sample, denom, kernels, h, plan):
    if len(kernels) != sample.d:
        raise ValueError("plan/kernel dimension mismatch with sample")
    if np.any(denom <= 0):
        raise ValueError("density denominator must be positive; use a floor > 0")
    w = sample.y / (sample.n * denom)
    return RegressionField(kind=kind, sample=sample, kernels=tuple(kernels),
                           h=h, base_weights=w)


def fit_plug_in(sample: Sample, density: DensityField,
                kernels: ProductKernel, plan: BandwidthPlan) -> RegressionField:
    """The plug-in estimator: responses divided by ``f_hat`` at the data.

    Requires a density fitted with a positive clamping floor; the density
    is evaluated at the observations, not at the query point.
    """
    if density.floor <= 0:
        raise ValueError("plug-in fit needs a density with floor > 0")
    if plan.d != sample.d:
        raise ValueError("plan dimension mismatch with sample")
    denom = density.clamped(sample.x)
    return _fit("plug_in", sample, denom, kernels.factors, plan.h_axes, plan)


def fit_single_bandwidth(sample: Sample, density: DensityField,
                         kernel_K: ProductKernel, plan: BandwidthPlan) -> RegressionField:
    """The single-bandwidth estimator: one ``h_n`` in every axis."""
    if density.floor <= 0:
        raise ValueError("single-bandwidth fit needs a density with floor > 0")
    if plan.d != sample.d:
        raise ValueError("plan dimension mismatch with sample")
    denom = density.clamped(sample.x)
    h = np.full(sample.d, plan.h_single)
    return _fit("single_bandwidth", sample, denom, kernel_K.factors, h, plan)


def fit_oracle(sample: Sample, truth: DensityField,
               kernels: ProductKernel, plan: BandwidthPlan) -> RegressionField:
    """The known-density estimator: the true density in the denominator."""
    if plan.d != sample.d:
        raise ValueError("plan dimension mismatch with sample")
    denom = truth.clamped(sample.x) if truth.floor > 0 else truth.evaluate(sample.x)
    return _fit("oracle", sample, denom, kernels.factors, plan.h_axes, plan)


def bias_bound(design, plan: BandwidthPlan, kernels: ProductKernel) -> float:
    """Order-k smoothing bias bound for the regression estimator.

    ``(2/k!) * ||d^k m|| * sum_{|alpha| = k} h^alpha * int v^alpha K(v) dv``
    where the sum runs over multi-indices and ``||d^k m||`` is the sup of
    the k-th partials exposed by the design.  Diagnostic only.
    """
    k = design.k
    d = plan.d
    deriv_sup = design.kth_partial_sup()
    total = 0.0
    for alpha in _multi_indices(d, k):
        mom = 1.0
        for l, a in enumerate(alpha):
            mom *= kernels.factors[l].moment(a)
        total += float(np.prod(plan.h_axes ** np.array(alpha))) * abs(mom)
    return 2.0 / math.factorial(k) * deriv_sup * total


def _multi_indices(d, k):
    if d == 1:
        yield (k,)
        return
    for first in range(k + 1):
        for rest in _multi_indices(d - 1, k - first):
            yield (first,) + rest
