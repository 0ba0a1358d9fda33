"""Compactly supported polynomial smoothing kernels.

Only polynomial-times-indicator kernels are offered.  That keeps every
kernel admissible for the sup-norm theory backing the estimators (the
admissibility condition holds for any polynomial composed with a
bounded function), and it makes every moment computable exactly by
Gauss-Legendre quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .quadrature import gauss_legendre, integrate_1d


@dataclass(frozen=True)
class KernelSpec:
    """A univariate kernel ``K(u) = p(u) * 1{|u| < half_support}``.

    Parameters
    ----------
    coeffs : ndarray
        Polynomial coefficients of ``p`` in ascending powers of ``u``.
    half_support : float
        Half-width of the support in the standardized argument.
    order : int
        Number of vanishing moments: ``int u^j K = 0`` for
        ``1 <= j < order`` and ``int K = 1``.
    l2_norm : float
        Cached value of ``int K^2``.
    name : str
    """

    coeffs: np.ndarray
    half_support: float
    order: int
    l2_norm: float
    name: str

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=float))
        if self.half_support <= 0:
            raise ValueError("half_support must be positive")
        if self.order < 1:
            raise ValueError("order must be >= 1")

    def evaluate(self, u):
        """Evaluate the kernel; zero outside ``(-half_support, half_support)``."""
        u = np.asarray(u, dtype=float)
        inside = np.abs(u) < self.half_support
        vals = np.polynomial.polynomial.polyval(u, self.coeffs)
        out = np.where(inside, vals, 0.0)
        return float(out) if out.ndim == 0 else out

    __call__ = evaluate

    @property
    def support(self):
        return (-self.half_support, self.half_support)

    def moment(self, j: int, n_nodes: int | None = None) -> float:
        """``int u^j K(u) du`` by exact-degree Gauss quadrature."""
        deg = len(self.coeffs) - 1 + j
        n = n_nodes or (deg // 2 + 2)
        rule = gauss_legendre(-self.half_support, self.half_support, n)
        return integrate_1d(rule, lambda u: (u ** j) * self.evaluate(u))


@dataclass(frozen=True)
class ProductKernel:
    """Product of univariate kernels, one factor per axis.

    Serves both as the multivariate regression kernel and (raised to a
    higher order) as the density kernel.  The structural order of the
    product equals the minimum factor order; this is verified by moment
    checks at construction time via :func:`verify_order`.
    """

    factors: tuple[KernelSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise ValueError("ProductKernel needs at least one factor")

    @property
    def dim(self) -> int:
        return len(self.factors)

    @property
    def order(self) -> int:
        return min(k.order for k in self.factors)

    @property
    def half_supports(self) -> np.ndarray:
        return np.array([k.half_support for k in self.factors])

    def evaluate(self, u):
        """Evaluate at points ``u`` of shape (..., dim)."""
        u = np.asarray(u, dtype=float)
        out = self.factors[0].evaluate(u[..., 0])
        for l in range(1, self.dim):
            out = out * self.factors[l].evaluate(u[..., l])
        return out

    __call__ = evaluate


@dataclass(frozen=True)
class MomentReport:
    """Result of checking the first ``order`` moments of a kernel."""

    moments: np.ndarray  # mu_0 .. mu_{order-1}
    order: int
    tol: float
    passed: bool
    failures: tuple[int, ...]  # indices j with |mu_j - target| > tol


def epanechnikov() -> KernelSpec:
    """The Epanechnikov kernel ``K(u) = 3/4 (1 - u^2)`` on ``[-1, 1]``."""
    return KernelSpec(
        coeffs=np.array([0.75, 0.0, -0.75]),
        half_support=1.0,
        order=2,
        l2_norm=0.6,
        name="epanechnikov",
    )


def raise_order(base: KernelSpec, target_order: int) -> KernelSpec:
    """Build a kernel of higher (even) order from a symmetric base.

    Multiplies the base by an even polynomial whose coefficients solve
    the moment system ``mu_0 = 1, mu_2 = ... = mu_{target-2} = 0``; odd
    moments vanish by symmetry.  The support is unchanged and the result
    stays polynomial-type.
    """
    if target_order % 2 != 0:
        raise ValueError("target_order must be even")
    if target_order < base.order:
        raise ValueError("target_order must be >= base order")
    if target_order == base.order:
        return base
    if not _is_even_poly(base.coeffs):
        raise ValueError("raise_order requires a symmetric base kernel")

    m = target_order // 2  # unknown coefficients a_0 .. a_{m-1} of p(u) = sum a_j u^{2j}
    mom = [base.moment(2 * j) for j in range(2 * m)]
    A = np.array([[mom[i + j] for j in range(m)] for i in range(m)])
    rhs = np.zeros(m)
    rhs[0] = 1.0
    a = np.linalg.solve(A, rhs)

    mult = np.zeros(2 * m - 1)
    mult[::2] = a
    coeffs = np.polynomial.polynomial.polymul(base.coeffs, mult)
    spec = KernelSpec(
        coeffs=coeffs,
        half_support=base.half_support,
        order=target_order,
        l2_norm=0.0,
        name=f"{base.name}_order{target_order}",
    )
    l2 = integrate_1d(
        gauss_legendre(-spec.half_support, spec.half_support, len(coeffs) + 2),
        lambda u: spec.evaluate(u) ** 2,
    )
    return KernelSpec(coeffs, spec.half_support, target_order, l2, spec.name)


def verify_order(kernel: KernelSpec, k: int, tol: float = 1e-8) -> MomentReport:
    """Check ``mu_0 = 1`` and ``mu_j = 0`` for ``1 <= j < k``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    moments = np.array([kernel.moment(j) for j in range(k)])
    targets = np.zeros(k)
    targets[0] = 1.0
    bad = tuple(int(j) for j in np.nonzero(np.abs(moments - targets) > tol)[0])
    return MomentReport(moments=moments, order=k, tol=tol,
                        passed=not bad, failures=bad)


def scaled_eval(kernel: KernelSpec, center, bandwidth: float, x):
    """``(1/h) K((center - x)/h)`` -- the bandwidth-scaled kernel factor."""
    if bandwidth <= 0:
        raise ValueError("bandwidth must be positive")
    return kernel.evaluate((np.asarray(center, dtype=float) - x) / bandwidth) / bandwidth


def product_kernel(base: KernelSpec, d: int, order: int | None = None) -> ProductKernel:
    """Product kernel with ``d`` identical factors, optionally order-raised."""
    factor = base if order is None else raise_order(base, order)
    return ProductKernel(factors=(factor,) * d)


def density_kernel(base: KernelSpec, d: int, k: int) -> ProductKernel:
    """Density-estimation kernel of order ``k*d + 2``.

    The density kernel must beat the regression kernel order times the
    dimension; ``k*d + 2`` is the smallest even order doing so.
    """
    kprime = k * d + 2
    if kprime % 2:
        kprime += 1
    return product_kernel(base, d, order=kprime)


_NAMED = {"epanechnikov": epanechnikov}


def by_name(name: str, order: int | None = None) -> KernelSpec:
    """Look up a base kernel by name, optionally raised to ``order``."""
    try:
        base = _NAMED[name]()
    except KeyError:
        raise ValueError(f"unknown kernel {name!r}; known: {sorted(_NAMED)}") from None
    if order is None or order == base.order:
        return base
    return raise_order(base, order)


def _is_even_poly(coeffs, tol=1e-14) -> bool:
    c = np.asarray(coeffs)
    return bool(np.all(np.abs(c[1::2]) <= tol))
