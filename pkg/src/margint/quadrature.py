"""Deterministic Gauss-Legendre quadrature, 1-D and tensor-product.

All integrals in the estimators reduce to integrals of (piecewise)
polynomial integrands over compact intervals, so a single quadrature
family suffices.  Rules are immutable after construction and safe to
share between threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np


class IntegrationError(ValueError):
    """Raised when an integrand returns a non-finite value at a node."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights of a 1-D rule on a compact interval.

    Invariants (checked at construction): weights positive, nodes
    strictly increasing and inside ``[lo, hi]``, and the rule integrates
    the constant 1 to ``hi - lo`` within 1e-12 relative.
    """

    nodes: np.ndarray
    weights: np.ndarray
    lo: float
    hi: float

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        if nodes.shape != weights.shape or nodes.ndim != 1:
            raise ValueError("nodes and weights must be 1-D of equal length")
        if not np.all(weights > 0):
            raise ValueError("quadrature weights must all be positive")
        if nodes.size > 1 and not np.all(np.diff(nodes) > 0):
            raise ValueError("quadrature nodes must be strictly increasing")
        if np.any(nodes < self.lo) or np.any(nodes > self.hi):
            raise ValueError("quadrature nodes must lie inside [lo, hi]")
        length = self.hi - self.lo
        if abs(weights.sum() - length) > 1e-12 * max(1.0, abs(length)):
            raise ValueError("rule fails to integrate the constant 1")

    @property
    def interval(self):
        return (self.lo, self.hi)


@dataclass(frozen=True)
class TensorRule:
    """Tensor product of 1-D rules, one per integrated coordinate."""

    axes: tuple[QuadratureRule, ...]

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        if not self.axes:
            raise ValueError("TensorRule needs at least one axis")

    @property
    def ndim(self) -> int:
        return len(self.axes)

    @property
    def n_nodes(self) -> int:
        out = 1
        for r in self.axes:
            out *= r.nodes.size
        return out

    def grid(self) -> tuple[np.ndarray, np.ndarray]:
        """Flattened node matrix (N, d) and weight vector (N,)."""
        mesh = np.meshgrid(*(r.nodes for r in self.axes), indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=1)
        w = self.axes[0].weights
        for r in self.axes[1:]:
            w = np.multiply.outer(w, r.weights)
        return pts, w.ravel()


def gauss_legendre(lo: float, hi: float, n_nodes: int) -> QuadratureRule:
    """Gauss-Legendre rule with ``n_nodes`` points on ``[lo, hi]``.

    Exact for polynomials of degree <= 2 * n_nodes - 1.
    """
    if not lo < hi:
        raise ValueError(f"degenerate interval: lo={lo} must be < hi={hi}")
    if n_nodes < 1:
        raise ValueError("n_nodes must be >= 1")
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    return QuadratureRule(mid + half * x, half * w, lo, hi)


def composite_gauss_legendre(lo: float, hi: float, n_panels: int,
                             nodes_per_panel: int = 10) -> QuadratureRule:
    """Composite Gauss-Legendre rule: ``n_panels`` equal panels.

    Used where the integrand is only piecewise smooth (kernel sums have
    derivative kinks at scaled support edges); the composite rule keeps
    the error controlled by the panel width rather than global
    smoothness.
    """
    if not lo < hi:
        raise ValueError(f"degenerate interval: lo={lo} must be < hi={hi}")
    if n_panels < 1:
        raise ValueError("n_panels must be >= 1")
    edges = np.linspace(lo, hi, n_panels + 1)
    x, w = np.polynomial.legendre.leggauss(nodes_per_panel)
    nodes = []
    weights = []
    for a, b in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (a + b)
        half = 0.5 * (b - a)
        nodes.append(mid + half * x)
        weights.append(half * w)
    return QuadratureRule(np.concatenate(nodes), np.concatenate(weights), lo, hi)


def panelized_rule(lo: float, hi: float, breakpoints,
                   nodes_per_panel: int = 6) -> QuadratureRule:
    """Composite Gauss rule with panel edges at the given breakpoints.

    When an integrand is polynomial between breakpoints (kernel sums
    are, between scaled support edges), the resulting rule is exact up
    to the per-panel Gauss degree.
    """
    if not lo < hi:
        raise ValueError(f"degenerate interval: lo={lo} must be < hi={hi}")
    pts = np.asarray(breakpoints, dtype=float)
    pts = np.unique(pts[(pts > lo) & (pts < hi)])
    edges = np.concatenate([[lo], pts, [hi]])
    keep = np.concatenate([[True], np.diff(edges) > 1e-12])
    edges = edges[keep]
    if edges[-1] != hi:
        edges[-1] = hi
    x, w = np.polynomial.legendre.leggauss(nodes_per_panel)
    nodes = []
    weights = []
    for a, b in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (a + b)
        half = 0.5 * (b - a)
        nodes.append(mid + half * x)
        weights.append(half * w)
    return QuadratureRule(np.concatenate(nodes), np.concatenate(weights), lo, hi)


def intersect_intervals(a: Sequence[float], b: Sequence[float]):
    """Intersection of two closed intervals, or None when disjoint."""
    lo = max(a[0], b[0])
    hi = min(a[1], b[1])
    if lo >= hi:
        return None
    return (lo, hi)


def integrate_1d(rule: QuadratureRule, f: Callable) -> float:
    """Apply the rule to ``f``; ``f`` may be scalar or vectorized.

    A non-finite value of ``f`` at any node raises
    :class:`IntegrationError` carrying the offending node.
    """
    vals = _eval_on_nodes(f, rule.nodes)
    return float(np.dot(rule.weights, vals))


def integrate_tensor(rule: TensorRule, f: Callable) -> float:
    """Full tensor sum of weighted evaluations of ``f(point)``.

    ``f`` takes a length-d vector (or an (N, d) matrix when vectorized).
    """
    pts, w = rule.grid()
    try:
        vals = np.asarray(f(pts), dtype=float)
        if vals.shape != (pts.shape[0],):
            raise TypeError
    except TypeError:
        vals = np.array([float(f(p)) for p in pts])
    if not np.all(np.isfinite(vals)):
        bad = pts[~np.isfinite(vals)][0]
        raise IntegrationError(f"integrand not finite at node {bad}", node=bad)
    return float(np.dot(w, vals))


def _eval_on_nodes(f, nodes):
    try:
        vals = np.asarray(f(nodes), dtype=float)
        if vals.shape != nodes.shape:
            raise TypeError
    except TypeError:
        vals = np.array([float(f(x)) for x in nodes])
    if not np.all(np.isfinite(vals)):
        bad = nodes[~np.isfinite(vals)][0]
        raise IntegrationError(f"integrand not finite at node {bad}", node=bad)
    return vals
