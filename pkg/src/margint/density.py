"""Multivariate kernel density estimation and evaluation domains."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._fast import weighted_product_sum
from .kernels import ProductKernel


@dataclass(frozen=True)
class Sample:
    """Observed covariate matrix and response vector."""

    x: np.ndarray  # (n, d)
    y: np.ndarray  # (n,)

    def __post_init__(self):
        x = np.ascontiguousarray(self.x, dtype=float)
        y = np.ascontiguousarray(self.y, dtype=float)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
            raise ValueError("x must be (n, d) and y (n,) with matching n")
        if x.shape[0] < 1:
            raise ValueError("need at least one observation")
        if x.shape[1] < 2:
            raise ValueError("covariate dimension must be >= 2")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("sample contains non-finite entries")

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]


@dataclass(frozen=True)
class EvaluationDomain:
    """Nested evaluation boxes: estimation is read off the inner box only.

    ``inner`` and ``outer`` are (d, 2) arrays of per-axis intervals with
    strict nesting ``outer_lo < inner_lo < inner_hi < outer_hi``.
    """

    inner: np.ndarray
    outer: np.ndarray

    def __post_init__(self):
        inner = np.asarray(self.inner, dtype=float)
        outer = np.asarray(self.outer, dtype=float)
        object.__setattr__(self, "inner", inner)
        object.__setattr__(self, "outer", outer)
        if inner.shape != outer.shape or inner.ndim != 2 or inner.shape[1] != 2:
            raise ValueError("inner and outer must both be (d, 2)")
        ok = (outer[:, 0] < inner[:, 0]) & (inner[:, 0] < inner[:, 1]) \
            & (inner[:, 1] < outer[:, 1])
        if not np.all(ok):
            raise ValueError("domains must nest strictly: a' < a < c < c' per axis")

    @property
    def d(self) -> int:
        return self.inner.shape[0]

    def inner_grid(self, axis: int, m: int) -> np.ndarray:
        lo, hi = self.inner[axis]
        return np.linspace(lo, hi, m)

    def tensor_grid(self, m: int) -> np.ndarray:
        """All points of the per-axis inner grids, flattened to (m^d, d)."""
        axes = [self.inner_grid(l, m) for l in range(self.d)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in mesh], axis=1)


class DensityField:
    """A density over R^d with a clamping floor for divisor use.

    ``evaluate`` returns the raw (possibly negative, for higher-order
    kernels) value; ``clamped`` applies ``max(floor, .)`` and is what
    every division-by-density site must use.
    """

    def __init__(self, point_eval: Callable, floor: float,
                 bandwidth: float = 0.0, kernel: ProductKernel | None = None,
                 data: np.ndarray | None = None):
        if floor < 0:
            raise ValueError("floor must be >= 0")
        self._eval = point_eval
        self.floor = float(floor)
        self.bandwidth = float(bandwidth)
        self.kernel = kernel
        self.data = data  # fitted observations, set for KDE fields

    def evaluate(self, x) -> np.ndarray:
        """Raw density values at points ``x`` of shape (d,) or (N, d)."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        vals = self._eval(np.atleast_2d(x))
        return float(vals[0]) if single else vals

    __call__ = evaluate

    def clamped(self, x) -> np.ndarray:
        return np.maximum(self.floor, self.evaluate(x))


def kde_fit(sample: Sample, kernel: ProductKernel, ell: float,
            floor: float = 0.0) -> DensityField:
    """Product-kernel density estimate with bandwidth ``ell``.

    ``f_hat(x) = (1 / (n ell^d)) sum_i L((x - X_i) / ell)`` with L the
    product kernel; the returned field reports raw values and clamps at
    ``floor`` only through :meth:`DensityField.clamped`.
    """
    if ell <= 0:
        raise ValueError("bandwidth ell must be positive")
    if kernel.dim != sample.d:
        raise ValueError("kernel dimension does not match the sample")
    X = sample.x
    n, d = X.shape
    coeffs = coeff_matrix(kernel)
    half = kernel.half_supports
    h = np.full(d, ell)
    c = np.full(n, 1.0 / (n * ell ** d))

    def point_eval(pts):
        return weighted_product_sum(np.ascontiguousarray(pts, dtype=float),
                                    X, c, coeffs, half, h)

    return DensityField(point_eval, floor=floor, bandwidth=ell, kernel=kernel,
                        data=X)


def analytic_density(fn: Callable, floor: float = 0.0) -> DensityField:
    """Wrap an analytic density ``fn((N, d)) -> (N,)`` as a field."""

    def point_eval(pts):
        return np.asarray(fn(pts), dtype=float)

    return DensityField(point_eval, floor=floor)


def sup_density_error(field: DensityField, truth: DensityField,
                      domain: EvaluationDomain, grid_per_axis: int) -> float:
    """Max of ``|field - truth|`` over the tensor grid of the inner box."""
    if grid_per_axis < 2:
        raise ValueError("grid_per_axis must be >= 2")
    pts = domain.tensor_grid(grid_per_axis)
    return float(np.max(np.abs(field.evaluate(pts) - truth.evaluate(pts))))


def coeff_matrix(kernel: ProductKernel) -> np.ndarray:
    """Stack factor polynomial coefficients into a padded (d, nc) matrix."""
    nc = max(len(k.coeffs) for k in kernel.factors)
    out = np.zeros((kernel.dim, nc))
    for l, k in enumerate(kernel.factors):
        out[l, : len(k.coeffs)] = k.coeffs
    return out
