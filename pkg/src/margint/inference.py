"""Variance estimation, band half-widths, and the scaled sup statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._fast import kernel_matrix
from .density import DensityField, Sample
from .kernels import KernelSpec, ProductKernel
from .marginal import AdditiveFit, ComponentCurve, IntegrationDensity
from .quadrature import composite_gauss_legendre
from .regression import BandwidthPlan


@dataclass(frozen=True)
class VarianceOracle:
    """Analytic variance target computed from a simulation design.

    ``sigma_fun`` is sqrt(phi / f_l) on ``grid``; ``sigma_l`` is the sup
    of ``sigma_fun * sqrt(int K_l^2)`` over the grid.
    """

    grid: np.ndarray
    phi: np.ndarray
    f_marginal: np.ndarray
    k_l2: float
    sigma_l: float

    @property
    def sigma_fun(self) -> np.ndarray:
        return np.sqrt(self.phi / self.f_marginal)


@dataclass(frozen=True)
class BandCurve:
    """Center curve with simultaneous band envelopes."""

    grid: np.ndarray
    center: np.ndarray
    halfwidth: np.ndarray
    epsilon_factor: float = 1.0

    def __post_init__(self):
        for name in ("grid", "center", "halfwidth"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if not (self.grid.shape == self.center.shape == self.halfwidth.shape):
            raise ValueError("grid, center and halfwidth must align")
        if np.any(self.halfwidth < 0):
            raise ValueError("halfwidths must be non-negative")

    @property
    def lower(self) -> np.ndarray:
        return self.center - self.epsilon_factor * self.halfwidth

    @property
    def upper(self) -> np.ndarray:
        return self.center + self.epsilon_factor * self.halfwidth

    def contains(self, values) -> bool:
        """Simultaneous containment of a curve sampled on the same grid."""
        v = np.asarray(values, dtype=float)
        return bool(np.all(v >= self.lower) and np.all(v <= self.upper))


@dataclass(frozen=True)
class AdditiveBand:
    """Band for the additive reconstruction: summed per-axis envelopes."""

    axis_bands: tuple[BandCurve, ...]
    mu_n: float

    def envelopes_on_grid(self):
        """Lower/upper tensors over the product of the per-axis grids."""
        d = len(self.axis_bands)
        shape = [b.grid.size for b in self.axis_bands]
        lower = np.full(shape, self.mu_n)
        upper = np.full(shape, self.mu_n)
        for l, b in enumerate(self.axis_bands):
            idx = [None] * d
            idx[l] = slice(None)
            lower = lower + b.lower[tuple(idx)]
            upper = upper + b.upper[tuple(idx)]
        return lower, upper

    def contains_additive(self, mu: float, component_values) -> bool:
        """Exact simultaneous containment of an additive truth.

        ``component_values[l]`` samples the l-th true component on the
        l-th band grid.  Because truth, center and envelopes are all
        additive over axes, the tensor-grid min/max split by axis.
        """
        lo_margin = mu - self.mu_n
        hi_margin = mu - self.mu_n
        for b, v in zip(self.axis_bands, component_values):
            v = np.asarray(v, dtype=float)
            lo_margin += np.min(v - b.lower)
            hi_margin += np.max(v - b.upper)
        return bool(lo_margin >= 0.0 and hi_margin <= 0.0)


@dataclass(frozen=True)
class TheoremStatistic:
    """Scaled one-sided sup deviations and their theoretical target."""

    t_plus: float
    t_minus: float
    target: float


def variance_field(sample: Sample, density: DensityField, kernels,
                   plan: BandwidthPlan, q: IntegrationDensity,
                   grid, axis: int = 0, *, halton_points: int = 4096,
                   x_bandwidth: float | None = None):
    """Per-grid-point variance estimate for one component.

    Returns ``(sigma_sq, diagnostics)`` where ``sigma_sq[a]`` estimates
    the variance function at ``grid[a]`` and diagnostics report how many
    values were clipped at zero (possible with higher-order kernels).

    ``x_bandwidth`` overrides the smoothing bandwidth along the target
    axis.  The variance function is a nuisance quantity: a wider
    bandwidth than the regression one stabilizes it pointwise without
    affecting the estimator rate, which matters when the result feeds a
    simultaneous band.

    The inner integral over the other coordinates runs on a shared
    tensor rule over the weight supports for d <= 3 and falls back to
    quasi-random integration beyond that (cost guard).
    """
    grid = np.asarray(grid, dtype=float)
    X, Y = sample.x, sample.y
    n, d = X.shape
    factors = kernels.factors if isinstance(kernels, ProductKernel) else tuple(kernels)
    h = plan.h_axes
    others = [j for j in range(d) if j != axis]

    pts_other, wts = _inner_nodes(q, factors, h, others, d, halton_points)
    # the integration weight enters the estimator variance squared: the
    # component estimate averages terms proportional to q_minus(X_other)
    wts = wts * q.q_minus(axis, pts_other) ** 2

    # A[i, g] = prod_{j != axis} (1/h_j) K_j((z_{g,j} - X_{i,j}) / h_j)
    A = np.ones((n, pts_other.shape[0]))
    for col, j in enumerate(others):
        kj = factors[j]
        A *= kernel_matrix(np.ascontiguousarray(pts_other[:, col]), X[:, j],
                           kj.coeffs, kj.half_support, float(h[j])).T / float(h[j])

    F = _density_on_product(density, grid, pts_other, axis, others)
    F = np.maximum(density.floor, F)
    if density.floor <= 0:
        raise ValueError("variance_field divides by the density; floor must be > 0")

    ka = factors[axis]
    hx = float(h[axis]) if x_bandwidth is None else float(x_bandwidth)
    if hx <= 0:
        raise ValueError("x_bandwidth must be positive")
    Kmat = kernel_matrix(grid, X[:, axis], ka.coeffs, ka.half_support, hx)
    B = Kmat @ (Y[:, None] ** 2 * A)  # (grid, G)
    sigma_sq = (B * (wts[None, :] / F ** 2)).sum(axis=1) / (n * hx)

    clipped = int(np.sum(sigma_sq < 0))
    sigma_sq = np.maximum(sigma_sq, 0.0)
    return sigma_sq, {"clipped_negative": clipped}


def _inner_nodes(q, factors, h, others, d, halton_points):
    if d <= 3:
        rules = []
        for j in others:
            lo, hi = q.axes[j].support
            width = float(h[j]) * factors[j].half_support
            panels = int(np.clip(np.ceil((hi - lo) / max(width / 2.0, 1e-6)),
                                 8, 40 if d == 2 else 12))
            rules.append(composite_gauss_legendre(lo, hi, panels, 8))
        mesh = np.meshgrid(*(r.nodes for r in rules), indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=1)
        w = rules[0].weights
        for r in rules[1:]:
            w = np.multiply.outer(w, r.weights)
        return pts, w.ravel()
    from scipy.stats import qmc
    lo = np.array([q.axes[j].support[0] for j in others])
    hi = np.array([q.axes[j].support[1] for j in others])
    sampler = qmc.Halton(d=len(others), scramble=False)
    u = sampler.random(halton_points)
    pts = lo + u * (hi - lo)
    vol = float(np.prod(hi - lo))
    return pts, np.full(halton_points, vol / halton_points)


def _density_on_product(density, grid, pts_other, axis, others):
    """Density on {grid} x {inner nodes}, factorized when it is a KDE."""
    if density.kernel is not None and density.data is not None:
        X = density.data
        ell = density.bandwidth
        facs = density.kernel.factors
        ka = facs[axis]
        U = kernel_matrix(np.ascontiguousarray(grid, dtype=float), X[:, axis],
                          ka.coeffs, ka.half_support, ell)
        V = np.ones((X.shape[0], pts_other.shape[0]))
        for col, j in enumerate(others):
            kj = facs[j]
            V *= kernel_matrix(np.ascontiguousarray(pts_other[:, col]), X[:, j],
                               kj.coeffs, kj.half_support, ell).T
        return (U @ V) / (X.shape[0] * ell ** X.shape[1])
    full = np.empty((grid.size, pts_other.shape[0], len(others) + 1))
    full[:, :, axis] = grid[:, None]
    for col, j in enumerate(others):
        full[:, :, j] = pts_other[:, col][None, :]
    return density.evaluate(full.reshape(-1, len(others) + 1)) \
        .reshape(grid.size, pts_other.shape[0])


def nuisance_bandwidth(n: int, h: float, c: float = 0.8,
                       exponent: float = 0.3) -> float:
    """Bandwidth for variance estimation feeding simultaneous bands.

    The band half-width needs a variance curve that is stable at every
    grid point; at the regression bandwidth the pointwise estimate is
    noisy enough to collapse the band wherever the local sample is
    sparse.  A slower-vanishing rate keeps the estimate consistent while
    controlling its sup-norm fluctuation.
    """
    return max(float(h), c * float(n) ** (-exponent))


def band_halfwidth(sigma_sq, plan: BandwidthPlan, kernel_K1: KernelSpec,
                   n: int, axis: int = 0) -> np.ndarray:
    """Half-width ``L_n = sqrt(2 log(1/h) / (n h) * sigma_sq * int K^2)``.

    The variance function enters squared under the root so the product
    scales like the sup statistic's normalization.
    """
    h = float(plan.h_axes[axis])
    if h >= 1:
        raise ValueError("bandwidth must be < 1 so that log(1/h) > 0")
    sigma_sq = np.asarray(sigma_sq, dtype=float)
    if np.any(sigma_sq < 0):
        raise ValueError("sigma_sq must be non-negative")
    return np.sqrt(2.0 * math.log(1.0 / h) / (n * h) * sigma_sq * kernel_K1.l2_norm)


def component_band(fit: ComponentCurve, halfwidths,
                   epsilon_factor: float = 1.0) -> BandCurve:
    """Band around a fitted component curve."""
    hw = np.asarray(halfwidths, dtype=float)
    if hw.shape != fit.grid.shape:
        raise ValueError("halfwidths must align with the component grid")
    return BandCurve(grid=fit.grid, center=fit.values, halfwidth=hw,
                     epsilon_factor=epsilon_factor)


def additive_band(fit: AdditiveFit, axis_bands, mu_n: float,
                  plan: BandwidthPlan | None = None) -> AdditiveBand:
    """Additive band: per-axis envelopes summed around the constant."""
    bands = tuple(axis_bands)
    if len(bands) != len(fit.components):
        raise ValueError("one band per fitted component required")
    if plan is not None and not plan.equal_h:
        raise ValueError("additive bands require equal per-axis bandwidths")
    return AdditiveBand(axis_bands=bands, mu_n=float(mu_n))


def sigma_oracle(design, q: IntegrationDensity, kernel_K1: KernelSpec,
                 axis: int = 0, *, integrator: str = "quadrature",
                 grid_points: int = 512, halton_points: int = 16384) -> VarianceOracle:
    """Theoretical variance target by direct integration of the design.

    ``phi(u) = int H / f(. | u) q_{-axis}`` with H the conditional second
    moment of the response; ``sigma = sup sqrt(phi / f_axis * int K^2)``
    over a dense grid of the inner interval.

    Note the asymmetry with :func:`variance_field`: this target carries
    the integration weight linearly, while the per-point variance
    estimate used for bands carries it squared.  See the module docs for
    why both conventions are kept.
    """
    lo, hi = design.domain.inner[axis]
    grid = np.linspace(lo, hi, grid_points)
    others = [j for j in range(design.d) if j != axis]

    if integrator == "quadrature":
        rules = [composite_gauss_legendre(*q.axes[j].support, 16, 10) for j in others]
        mesh = np.meshgrid(*(r.nodes for r in rules), indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=1)
        w = rules[0].weights
        for r in rules[1:]:
            w = np.multiply.outer(w, r.weights)
        w = w.ravel()
    elif integrator == "halton":
        from scipy.stats import qmc
        lo_o = np.array([q.axes[j].support[0] for j in others])
        hi_o = np.array([q.axes[j].support[1] for j in others])
        sampler = qmc.Halton(d=len(others), scramble=False)
        pts = lo_o + sampler.random(halton_points) * (hi_o - lo_o)
        w = np.full(halton_points, float(np.prod(hi_o - lo_o)) / halton_points)
    else:
        raise ValueError(f"unknown integrator {integrator!r}")

    w = w * q.q_minus(axis, pts)
    full = np.empty((grid.size, pts.shape[0], design.d))
    full[:, :, axis] = grid[:, None]
    for col, j in enumerate(others):
        full[:, :, j] = pts[:, col][None, :]
    flat = full.reshape(-1, design.d)
    # 1 / f(u_{-axis} | u_axis) = f_axis(u_axis) / f(u)
    integrand = design.second_moment(flat) * design.f_axis(axis, flat[:, axis]) \
        / design.f_joint(flat)
    phi = (integrand.reshape(grid.size, pts.shape[0]) * w[None, :]).sum(axis=1)

    f_marg = design.f_axis(axis, grid)
    sigma_fun = np.sqrt(np.maximum(phi, 0.0) / f_marg * kernel_K1.l2_norm)
    return VarianceOracle(grid=grid, phi=phi, f_marginal=f_marg,
                          k_l2=kernel_K1.l2_norm, sigma_l=float(sigma_fun.max()))


def theorem_statistic(fit_values, true_values, h1: float, n: int,
                      target: float = float("nan")) -> TheoremStatistic:
    """Scaled one-sided sup deviations ``sqrt(n h / (2 |log h|)) sup +/- diff``."""
    if h1 >= 1:
        raise ValueError("h1 must be < 1")
    diff = np.asarray(fit_values, dtype=float) - np.asarray(true_values, dtype=float)
    scale = math.sqrt(n * h1 / (2.0 * abs(math.log(h1))))
    return TheoremStatistic(t_plus=scale * float(diff.max()),
                            t_minus=scale * float((-diff).max()),
                            target=float(target))
