"""Shared fixtures: randomized polygon corpus and cached meshes."""

from __future__ import annotations

import numpy as np
import pytest

from platevem.mesh import PolygonMesh, derive_topology, validate_regularity


def random_star_polygon(rng: np.random.Generator, n_vertices: int) -> np.ndarray:
    """Star polygon with jittered angles and bounded radii.

    Rejection keeps the corpus at the shape regularity of the generated mesh
    families (their reports all pass 0.15), the regime the method targets.
    """
    for _ in range(200):
        jitter = rng.uniform(0.35, 0.65, n_vertices)
        angles = 2.0 * np.pi * (np.arange(n_vertices) + jitter) / n_vertices
        radii = rng.uniform(0.7, 1.0, n_vertices) * rng.uniform(0.05, 1.0)
        center = rng.uniform(0.2, 0.8, 2)
        verts = center + np.column_stack(
            [radii * np.cos(angles), radii * np.sin(angles)]
        )
        mesh = derive_topology(verts, [list(range(n_vertices))])
        if validate_regularity(mesh).passes(0.15):
            return verts
    raise RuntimeError("could not draw a shape-regular polygon")


def single_cell_mesh(vertices: np.ndarray) -> PolygonMesh:
    return derive_topology(vertices, [list(range(len(vertices)))])


def polygon_corpus(seed: int, count: int) -> list[PolygonMesh]:
    """Seeded corpus of single-cell meshes with 3 to 8 vertices."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        m = int(rng.integers(3, 9))
        out.append(single_cell_mesh(random_star_polygon(rng, m)))
    return out


@pytest.fixture(scope="session")
def small_corpus():
    return polygon_corpus(seed=2024, count=20)


@pytest.fixture(scope="session")
def unit_square_mesh():
    return single_cell_mesh(
        np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    )


@pytest.fixture(scope="session")
def reference_triangle_mesh():
    return single_cell_mesh(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))


@pytest.fixture(scope="session")
def mesh_cache():
    """Session-wide cache of generated family meshes keyed by (family, n)."""
    from platevem.generators import build_family

    cache: dict = {}

    def get(family: str, n: int, seed: int = 0):
        key = (family, n, seed)
        if key not in cache:
            cache[key] = build_family(family, n, seed)
        return cache[key]

    return get


def boundary_identity_expansion(frame, basis, material, rule):
    """Energy pairings assembled from the integration-by-parts identity.

    Independent route cross-checking the volume Gram matrix: interior
    bilaplacian term plus edge moment, shear, and endpoint twist pairings,
    all evaluated by quadrature on the cell traversal.
    """
    from platevem.plate import normal_moment_matrix, shear_matrix, twist_matrix
    from platevem.quadrature import edge_rule

    bilap = basis.bilaplacian_matrix()
    vals = basis.eval(rule.points)
    mass = (vals * rule.weights[:, None]).T @ vals
    out = material.rigidity * (mass @ bilap).T
    m = frame.n_vertices
    for i in range(m):
        a = frame.vertices[i]
        b = frame.vertices[(i + 1) % m]
        n_out = frame.outward_normal(i)
        t_out = frame.traversal_tangent(i)
        erule = edge_rule(a, b, 2 * basis.order)
        evals = basis.eval(erule.points)
        egrads = n_out[0] * basis.eval(erule.points, (1, 0)) + n_out[1] * basis.eval(
            erule.points, (0, 1)
        )
        mnn_vals = evals @ normal_moment_matrix(basis, n_out, material)
        shear_vals = evals @ shear_matrix(basis, n_out, t_out, material)
        out += mnn_vals.T @ (erule.weights[:, None] * egrads)
        out -= shear_vals.T @ (erule.weights[:, None] * evals)
        twist = twist_matrix(basis, n_out, t_out, material)
        for point, sign in ((a, -1.0), (b, 1.0)):
            pvals = basis.eval(point[None, :])[0]
            out += sign * np.outer(twist.T @ pvals, pvals)
    return out


def divergence_theorem_integrals(frame, basis):
    """Closed-form polygon integrals of the basis via boundary quadrature."""
    from platevem.quadrature import edge_rule

    total = np.zeros(basis.dim)
    m = frame.n_vertices
    for i in range(m):
        a = frame.vertices[i]
        b = frame.vertices[(i + 1) % m]
        rule = edge_rule(a, b, basis.order + 3)
        tangent = (b - a) / np.linalg.norm(b - a)
        normal = np.array([tangent[1], -tangent[0]])
        x = rule.points[:, 0]
        y = rule.points[:, 1]
        xi = (x - basis.center[0]) / basis.h
        eta = (y - basis.center[1]) / basis.h
        for k, (p, q) in enumerate(basis.exponents):
            antider = basis.h * xi ** (p + 1) * eta**q / (p + 1)
            total[k] += rule.weights @ (antider * normal[0])
    return total
