"""Numerical integration rules on edges, triangles, and star-shaped polygons."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@dataclass(frozen=True)
class QuadratureRule:
    """Point set and weights integrating polynomials exactly up to ``degree``."""

    points: np.ndarray  # (n, 2)
    weights: np.ndarray  # (n,)
    degree: int

    def integrate(self, values: np.ndarray) -> float:
        return float(self.weights @ values)


@lru_cache(maxsize=None)
def gauss_legendre(n_points: int):
    nodes, weights = np.polynomial.legendre.leggauss(n_points)
    return nodes, weights


def edge_rule(p0: np.ndarray, p1: np.ndarray, degree: int) -> QuadratureRule:
    """Gauss-Legendre rule on the segment p0 -> p1, exact to ``degree``."""
    n = max(1, (degree + 2) // 2)
    nodes, weights = gauss_legendre(n)
    mid = 0.5 * (np.asarray(p0) + np.asarray(p1))
    half = 0.5 * (np.asarray(p1) - np.asarray(p0))
    points = mid[None, :] + nodes[:, None] * half[None, :]
    length = 2.0 * np.linalg.norm(half)
    return QuadratureRule(points, weights * (length / 2.0), degree)


def triangle_rule(a: np.ndarray, b: np.ndarray, c: np.ndarray, degree: int) -> QuadratureRule:
    """Product Gauss rule on a triangle, exact for polynomials up to ``degree``.

    Built by collapsing a tensor Gauss-Legendre grid onto the triangle; the
    collapse Jacobian raises the required one-dimensional degree by one, which
    the point counts below account for.
    """
    nu = max(1, (degree + 3) // 2)
    nv = max(1, (degree + 2) // 2)
    xu, wu = gauss_legendre(nu)
    xv, wv = gauss_legendre(nv)
    u = 0.5 * (xu + 1.0)
    v = 0.5 * (xv + 1.0)
    wu = 0.5 * wu
    wv = 0.5 * wv
    uu, vv = np.meshgrid(u, v, indexing="ij")
    ww = np.outer(wu, wv) * uu  # collapse Jacobian
    xi = uu * (1.0 - vv)
    eta = uu * vv
    a = np.asarray(a, dtype=float)
    area2 = abs(
        (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    )
    points = (
        a[None, :]
        + xi.ravel()[:, None] * (np.asarray(b) - a)[None, :]
        + eta.ravel()[:, None] * (np.asarray(c) - a)[None, :]
    )
    weights = ww.ravel() * area2
    return QuadratureRule(points, weights, degree)


def polygon_rule(vertices: np.ndarray, center: np.ndarray, degree: int) -> QuadratureRule:
    """Quadrature on a star-shaped polygon via its fan sub-triangulation.

    Parameters
    ----------
    vertices : array, shape (m, 2)
        Polygon vertices in counterclockwise order.
    center : array, shape (2,)
        Interior fan point; every fan triangle must be positively oriented.
    degree : int
        Polynomial exactness degree of the aggregated rule.
    """
    m = len(vertices)
    pts = []
    wts = []
    for i in range(m):
        a = vertices[i]
        b = vertices[(i + 1) % m]
        cross = (a[0] - center[0]) * (b[1] - center[1]) - (a[1] - center[1]) * (
            b[0] - center[0]
        )
        if cross <= 0.0:
            raise ValueError("fan point is not interior: non-positive sub-triangle")
        rule = triangle_rule(center, a, b, degree)
        pts.append(rule.points)
        wts.append(rule.weights)
    return QuadratureRule(np.vstack(pts), np.concatenate(wts), degree)
