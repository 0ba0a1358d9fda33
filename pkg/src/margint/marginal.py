"""Marginal integration: additive components and the additive constant.

A component is recovered by integrating the full-dimensional regression
surface against a product weight density over the other coordinates.
Two routes are provided: a factorized fast path that reduces every
integral to per-observation axis weights, and a brute-force tensor
quadrature path used as an independent cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .density import Sample, EvaluationDomain
from .kernels import KernelSpec, ProductKernel
from .quadrature import (QuadratureRule, TensorRule, composite_gauss_legendre,
                         gauss_legendre, integrate_1d, panelized_rule)
from .regression import (BandwidthPlan, RegressionField, fit_plug_in,
                         fit_single_bandwidth)

_COMPONENT_KINDS = ("plug_in", "oracle")


@dataclass(frozen=True)
class BumpDensity:
    """Polynomial bump ``q(t) = C (1 - s^2)^p`` on ``[lo, hi]``, s affine.

    ``p - 1`` continuous derivatives vanish at the endpoints, so with
    ``p >= k + 1`` the density has the k bounded derivatives the
    integration weights need.
    """

    lo: float
    hi: float
    p: int

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError("bump support must be a proper interval")
        if self.p < 1:
            raise ValueError("bump exponent must be >= 1")
        # int_{-1}^{1} (1-s^2)^p ds = 2^(2p+1) (p!)^2 / (2p+1)!
        raw = 2.0 ** (2 * self.p + 1) * math.factorial(self.p) ** 2 \
            / math.factorial(2 * self.p + 1)
        object.__setattr__(self, "_norm", 2.0 / ((self.hi - self.lo) * raw))

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        s = (2.0 * t - (self.lo + self.hi)) / (self.hi - self.lo)
        inside = np.abs(s) < 1.0
        vals = self._norm * np.where(inside, (1.0 - s * s) ** self.p, 0.0)
        return float(vals) if vals.ndim == 0 else vals

    __call__ = evaluate

    @property
    def support(self):
        return (self.lo, self.hi)


@dataclass(frozen=True)
class IntegrationDensity:
    """Known product weight density ``q(x) = prod_l q_l(x_l)``.

    Each factor is checked to integrate to one; products over subsets of
    axes are always derived from the factors, never stored.
    """

    axes: tuple[BumpDensity, ...]
    smoothness: int = 2

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        for l, q in enumerate(self.axes):
            rule = gauss_legendre(q.lo, q.hi, 2 * q.p + 4)
            mass = integrate_1d(rule, q.evaluate)
            if abs(mass - 1.0) > 1e-8:
                raise ValueError(f"q_{l} integrates to {mass}, not 1")

    @property
    def d(self) -> int:
        return len(self.axes)

    def q_axis(self, l: int, t):
        return self.axes[l].evaluate(t)

    def q_minus(self, l: int, pts: np.ndarray) -> np.ndarray:
        """``prod_{j != l} q_j`` at points with the l-th coordinate removed."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        others = [j for j in range(self.d) if j != l]
        out = np.ones(pts.shape[0])
        for col, j in enumerate(others):
            out *= self.axes[j].evaluate(pts[:, col])
        return out

    def q_full(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        out = np.ones(pts.shape[0])
        for j in range(self.d):
            out *= self.axes[j].evaluate(pts[:, j])
        return out


def bump_integration_density(supports, k: int = 2) -> IntegrationDensity:
    """Bump densities on the given per-axis supports, smoothness >= k."""
    p = k + 2
    return IntegrationDensity(tuple(BumpDensity(lo, hi, p) for lo, hi in supports),
                              smoothness=k)


@dataclass(frozen=True)
class ComponentCurve:
    """One estimated (or true) additive component on a grid."""

    axis: int
    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)
        if g.shape != v.shape or g.ndim != 1:
            raise ValueError("grid and values must be equal-length vectors")
        if g.size > 1 and not np.all(np.diff(g) > 0):
            raise ValueError("grid must be strictly increasing")
        if not np.all(np.isfinite(v)):
            raise ValueError("component values must be finite")

    def interp(self, t):
        return np.interp(t, self.grid, self.values)


@dataclass(frozen=True)
class AdditiveFit:
    """Sum-of-components reconstruction of the regression surface."""

    components: tuple[ComponentCurve, ...]
    mu_n: float
    constant_source: str  # single_bandwidth | plug_in

    def evaluate(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.full(x.shape[0], self.mu_n)
        for l, comp in enumerate(self.components):
            out += comp.interp(x[:, l])
        return out if out.size > 1 else float(out[0])

    __call__ = evaluate


def axis_weights(sample: Sample, regression: RegressionField,
                 q: IntegrationDensity, n_nodes: int = 32) -> np.ndarray:
    """Per-observation axis weights of the factorized path.

    ``w[i, j] = int (1/h_j) K_j((t - X_{i,j})/h_j) q_j(t) dt`` computed
    after the change of variables ``u = (t - X_{i,j})/h_j`` on Gauss
    nodes.  The interval in ``u`` is clipped per observation to the
    overlap of the kernel support with the support of ``q_j``, so the
    integrand is a plain polynomial on the interval and the rule is
    exact up to rounding.
    """
    X = sample.x
    n, d = X.shape
    w = np.empty((n, d))
    u0, gw0 = np.polynomial.legendre.leggauss(n_nodes)
    for j in range(d):
        k = regression.kernels[j]
        h = float(regression.h[j])
        q_lo, q_hi = q.axes[j].support
        a = np.maximum(-k.half_support, (q_lo - X[:, j]) / h)
        b = np.minimum(k.half_support, (q_hi - X[:, j]) / h)
        span = np.maximum(b - a, 0.0)
        mid = 0.5 * (a + b)
        u = mid[:, None] + 0.5 * span[:, None] * u0[None, :]
        gw = 0.5 * span[:, None] * gw0[None, :]
        vals = gw * k.evaluate(u) * q.q_axis(j, X[:, j][:, None] + h * u)
        w[:, j] = vals.sum(axis=1)
    return w


def component_estimate(l: int, grid, sample: Sample,
                       regression: RegressionField, q: IntegrationDensity,
                       method: str = "factorized", *,
                       domain: EvaluationDomain | None = None,
                       n_nodes: int = 32,
                       tensor_rule: TensorRule | None = None) -> ComponentCurve:
    """Estimate the l-th additive component on a grid.

    ``eta_l(x_l) = int m(x) q_{-l} dx_{-l} - int m(z) q(z) dz`` with the
    fitted regression surface in place of ``m``.
    """
    grid = np.asarray(grid, dtype=float)
    if regression.kind not in _COMPONENT_KINDS:
        raise ValueError("component_estimate expects a plug-in (or oracle) field")
    if domain is not None:
        lo, hi = domain.inner[l]
        if np.any(grid < lo) or np.any(grid > hi):
            raise ValueError(f"grid leaves the inner evaluation interval of axis {l}")
    if method == "factorized":
        values = _component_factorized(l, grid, sample, regression, q, n_nodes)
    elif method == "tensor":
        if sample.d > 4:
            raise ValueError("tensor method restricted to d <= 4 (cost guard)")
        values = _component_tensor(l, grid, regression, q, tensor_rule)
    else:
        raise ValueError(f"unknown method {method!r}")
    return ComponentCurve(axis=l, grid=grid, values=values)


def _component_factorized(l, grid, sample, regression, q, n_nodes):
    w = axis_weights(sample, regression, q, n_nodes)
    b = regression.base_weights  # Y_i / (n * denom_i)
    prod_all = w.prod(axis=1)
    mu_hat = float(b @ prod_all)
    others = np.prod(np.delete(w, l, axis=1), axis=1)
    kmat = regression.axis_matrix(l, grid) / float(regression.h[l])
    return kmat @ (b * others) - mu_hat


def _component_tensor(l, grid, regression, q, tensor_rule):
    rules = tensor_rule.axes if tensor_rule is not None \
        else default_tensor_rules(regression, q)
    other_axes = [j for j in range(regression.d) if j != l]
    mu_n = additive_constant(regression.sample, regression, q,
                             method="tensor", tensor_rule=TensorRule(tuple(rules)))
    # weighted node values of q_j along each integrated axis
    axes_grids = [None] * regression.d
    axes_grids[l] = grid
    axis_w = {}
    for j in other_axes:
        axes_grids[j] = rules[j].nodes
        axis_w[j] = rules[j].weights * q.q_axis(j, rules[j].nodes)
    surface = regression.on_grid(axes_grids)
    for j in sorted(other_axes, reverse=True):
        surface = np.tensordot(surface, axis_w[j], axes=([j], [0]))
    return surface - mu_n


def default_tensor_rules(regression: RegressionField,
                         q: IntegrationDensity) -> tuple[QuadratureRule, ...]:
    """Kink-aligned rules over the weight supports.

    The regression surface is polynomial between scaled kernel support
    edges, so panel edges at ``X_{i,j} +/- h_j * half_support`` make the
    tensor path exact up to the per-panel Gauss degree.
    """
    rules = []
    for j in range(regression.d):
        lo, hi = q.axes[j].support
        reach = float(regression.h[j]) * regression.kernels[j].half_support
        edges = np.concatenate([regression.sample.x[:, j] - reach,
                                regression.sample.x[:, j] + reach])
        deg_j = (len(regression.kernels[j].coeffs) - 1) + 2 * q.axes[j].p
        rules.append(panelized_rule(lo, hi, edges, nodes_per_panel=deg_j // 2 + 2))
    return tuple(rules)


def additive_constant(sample: Sample, regression: RegressionField,
                      q: IntegrationDensity, method: str = "factorized", *,
                      n_nodes: int = 32,
                      tensor_rule: TensorRule | None = None) -> float:
    """``mu_n = int m(z) q(z) dz`` for a fitted regression surface."""
    if regression.kind not in _COMPONENT_KINDS + ("single_bandwidth",):
        raise ValueError(f"unsupported regression kind {regression.kind!r}")
    if method == "factorized":
        w = axis_weights(sample, regression, q, n_nodes)
        return float(regression.base_weights @ w.prod(axis=1))
    if method == "tensor":
        rules = tensor_rule.axes if tensor_rule is not None \
            else default_tensor_rules(regression, q)
        surface = regression.on_grid([r.nodes for r in rules])
        for j in reversed(range(regression.d)):
            w = rules[j].weights * q.q_axis(j, rules[j].nodes)
            surface = np.tensordot(surface, w, axes=([j], [0]))
        return float(surface)
    raise ValueError(f"unknown method {method!r}")


def additive_fit(sample: Sample, q: IntegrationDensity,
                 kernels: ProductKernel, plan: BandwidthPlan,
                 grids, constant_source: str = "single_bandwidth", *,
                 density=None, kernel_K: ProductKernel | None = None,
                 domain: EvaluationDomain | None = None,
                 n_nodes: int = 32) -> AdditiveFit:
    """Assemble all component curves plus the additive constant.

    ``grids`` is one grid per axis.  The constant defaults to the
    single-bandwidth surface integrated against q; ``plug_in`` selects
    the plug-in surface instead.
    """
    if constant_source not in ("single_bandwidth", "plug_in"):
        raise ValueError("constant_source must be single_bandwidth or plug_in")
    if density is None:
        raise ValueError("additive_fit needs a fitted (or analytic) density field")
    plug = fit_plug_in(sample, density, kernels, plan) \
        if density.floor > 0 else None
    if plug is None:
        raise ValueError("density floor must be positive for the plug-in fit")
    comps = tuple(
        component_estimate(l, grids[l], sample, plug, q,
                           method="factorized", domain=domain, n_nodes=n_nodes)
        for l in range(sample.d)
    )
    if constant_source == "plug_in":
        mu = additive_constant(sample, plug, q, n_nodes=n_nodes)
    else:
        single = fit_single_bandwidth(sample, density, kernel_K or kernels, plan)
        mu = additive_constant(sample, single, q, n_nodes=n_nodes)
    return AdditiveFit(components=comps, mu_n=mu, constant_source=constant_source)


def true_component(l: int, grid, design, q: IntegrationDensity) -> ComponentCurve:
    """True component ``eta_l = m_l - int m_l q_l`` from an analytic design."""
    grid = np.asarray(grid, dtype=float)
    m_l = design.m_components[l]
    lo, hi = q.axes[l].support
    rule = composite_gauss_legendre(lo, hi, 16, 10)
    center = integrate_1d(rule, lambda t: m_l(t) * q.q_axis(l, t))
    return ComponentCurve(axis=l, grid=grid, values=m_l(grid) - center)


def component_to_csv_rows(curve: ComponentCurve):
    """Rows (axis, x, eta_hat) for CSV serialization."""
    for x, v in zip(curve.grid, curve.values):
        yield (curve.axis, x, v)
