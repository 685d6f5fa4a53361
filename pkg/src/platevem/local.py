"""Per-cell virtual element machinery.

Local unknowns of a cell with m vertices, ordered as

* vertex values, one per vertex;
* per edge, moments of the normal derivative against powers of the centered
  edge variable up to degree order - 2 (un-normalized integrals);
* per edge and order >= 3, length-averaged moments of the trace against
  powers up to degree order - 3;
* for order >= 4, area-averaged interior moments against the scaled cell
  monomials up to degree order - 4.

Edge quantities are always taken in the global edge convention (normal and
centered arclength induced by the lower-to-higher vertex orientation) so
that the two cells sharing an edge address identical functionals. Edge
moment test polynomials are powers of t = 2 (s - s_mid) / |e| in [-1, 1];
the doubled variable keeps high-order moment columns of the local systems
away from underflow-like scales.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import CellFrame
from .plate import (
    MaterialParams,
    energy_and_seminorm_grams,
    energy_gram,
    normal_moment_matrix,
    shear_matrix,
    twist_matrix,
)
from .polynomials import ScaledMonomialBasis, centered_power_moments, space_dim
from .quadrature import edge_rule, polygon_rule


class ProjectorError(Exception):
    """Singular local projector system (degenerate cell)."""


@dataclass(frozen=True)
class DofLayout:
    """Index layout of the local unknowns of one cell."""

    order: int
    n_vertices: int

    @property
    def n_edge_normal(self) -> int:
        return self.order - 1

    @property
    def n_edge_value(self) -> int:
        return self.order - 2 if self.order >= 3 else 0

    @property
    def n_cell(self) -> int:
        return space_dim(self.order - 4)

    @property
    def n_total(self) -> int:
        return self.n_vertices * (1 + self.n_edge_normal + self.n_edge_value) + self.n_cell

    def vertex_index(self, i: int) -> int:
        return i

    def edge_normal_slice(self, i: int) -> slice:
        start = self.n_vertices + i * self.n_edge_normal
        return slice(start, start + self.n_edge_normal)

    def edge_value_slice(self, i: int) -> slice:
        start = self.n_vertices * (1 + self.n_edge_normal) + i * self.n_edge_value
        return slice(start, start + self.n_edge_value)

    @property
    def cell_slice(self) -> slice:
        start = self.n_vertices * (1 + self.n_edge_normal + self.n_edge_value)
        return slice(start, start + self.n_cell)


def dof_layout(n_vertices: int, order: int) -> DofLayout:
    """Local layout for a cell with ``n_vertices`` vertices at ``order`` >= 2."""
    if order < 2:
        raise ValueError("order must be at least 2")
    return DofLayout(order, n_vertices)


def cell_basis(frame: CellFrame, order: int) -> ScaledMonomialBasis:
    return ScaledMonomialBasis(frame.centroid, frame.diameter, order)


def dof_matrix(
    frame: CellFrame,
    order: int,
    basis: ScaledMonomialBasis | None = None,
    vander=None,
    rule=None,
) -> np.ndarray:
    """Unknowns of every basis monomial: the (n_total x dim) evaluation matrix.

    Exact: edge moments use the closed-form integrals of centered powers and
    interior moments use a fan quadrature of sufficient degree. ``vander``
    may supply precomputed basis values at the points of ``rule`` (which must
    be exact to twice the order).
    """
    basis = basis or cell_basis(frame, order)
    layout = dof_layout(frame.n_vertices, order)
    mat = np.empty((layout.n_total, basis.dim))
    mat[: layout.n_vertices] = basis.eval(frame.vertices)
    sigma = centered_power_moments(2 * order)
    for i in range(frame.n_vertices):
        p0, p1 = frame.edge_endpoints_global(i)
        restr = basis.edge_restriction(p0, p1)  # (order + 1, dim)
        normal_der = basis.directional_matrix(frame.normals[i])
        restr_dn = restr @ normal_der
        n_deg = restr.shape[0]
        for k in range(layout.n_edge_normal):
            pair = 2.0**k * sigma[k : k + n_deg]
            mat[layout.edge_normal_slice(i)][k] = frame.edge_lengths[i] * (
                pair @ restr_dn
            )
        for k in range(layout.n_edge_value):
            pair = 2.0**k * sigma[k : k + n_deg]
            mat[layout.edge_value_slice(i)][k] = pair @ restr
    if layout.n_cell:
        if rule is None or vander is None:
            rule = polygon_rule(frame.vertices, frame.star, 2 * order)
            vander = basis.eval(rule.points)
        low_dim = space_dim(order - 4)
        vals_low = vander[:, :low_dim]
        mat[layout.cell_slice] = (vals_low * rule.weights[:, None]).T @ vander / frame.area
    return mat


def compute_dofs(
    frame: CellFrame,
    order: int,
    w,
    grad_w,
    quad_degree: int | None = None,
) -> np.ndarray:
    """Local unknowns of a smooth function given value and gradient callbacks.

    Parameters
    ----------
    w : callable
        ``w(x, y)`` -> array of values.
    grad_w : callable
        ``grad_w(x, y)`` -> pair of arrays (d/dx, d/dy). Only needed when the
        layout contains normal-derivative moments (always for order >= 2).
    quad_degree : int, optional
        Quadrature exactness for the edge and interior moments; defaults to
        order + 8, exact for polynomial data up to degree 8.
    """
    layout = dof_layout(frame.n_vertices, order)
    degree = quad_degree if quad_degree is not None else order + 8
    out = np.empty(layout.n_total)
    out[: layout.n_vertices] = w(frame.vertices[:, 0], frame.vertices[:, 1])
    for i in range(frame.n_vertices):
        p0, p1 = frame.edge_endpoints_global(i)
        rule = edge_rule(p0, p1, degree)
        x, y = rule.points[:, 0], rule.points[:, 1]
        mid = 0.5 * (p0 + p1)
        that = 2.0 * ((rule.points - mid) @ frame.tangents[i]) / frame.edge_lengths[i]
        gx, gy = grad_w(x, y)
        dn = frame.normals[i][0] * gx + frame.normals[i][1] * gy
        wvals = w(x, y)
        for k in range(layout.n_edge_normal):
            out[layout.edge_normal_slice(i)][k] = rule.weights @ (dn * that**k)
        for k in range(layout.n_edge_value):
            out[layout.edge_value_slice(i)][k] = (
                rule.weights @ (wvals * that**k) / frame.edge_lengths[i]
            )
    if layout.n_cell:
        rule = polygon_rule(frame.vertices, frame.star, degree)
        low = ScaledMonomialBasis(frame.centroid, frame.diameter, order - 4)
        vals_low = low.eval(rule.points)
        wvals = w(rule.points[:, 0], rule.points[:, 1])
        out[layout.cell_slice] = vals_low.T @ (rule.weights * wvals) / frame.area
    return out


def _load_row(
    frame: CellFrame,
    order: int,
    basis: ScaledMonomialBasis,
    layout: DofLayout,
    material: MaterialParams,
) -> np.ndarray:
    """Energy pairings a(m_beta, .) of all monomials against the unknowns.

    Row beta of the returned (dim x n_total) matrix represents the functional
    v -> a_K(m_beta, v) through the boundary expansion of the cell energy,
    which involves only the local unknowns.
    """
    b = np.zeros((basis.dim, layout.n_total))
    rigidity = material.rigidity
    if layout.n_cell:
        bilap = basis.bilaplacian_matrix()  # columns: coefficients of Lap^2 m_beta
        low_dim = space_dim(order - 4)
        b[:, layout.cell_slice] += rigidity * frame.area * bilap[:low_dim, :].T
    vertex_vals = np.zeros((basis.dim, layout.n_vertices))
    for i in range(frame.n_vertices):
        n_out = frame.outward_normal(i)
        t_out = frame.traversal_tangent(i)
        sign = frame.edge_signs[i]
        p0, p1 = frame.edge_endpoints_global(i)
        restr = basis.edge_restriction(p0, p1)
        # restrictions come in powers of s in [-1/2, 1/2]; the edge moments
        # pair against powers of t = 2 s, so coefficient k picks up 2^-k
        mnn = restr @ normal_moment_matrix(basis, n_out, material)
        n_mom = layout.n_edge_normal
        halving = 0.5 ** np.arange(n_mom)
        b[:, layout.edge_normal_slice(i)] += sign * (halving[:, None] * mnn[:n_mom, :]).T
        if layout.n_edge_value:
            shear = restr @ shear_matrix(basis, n_out, t_out, material)
            n_val = layout.n_edge_value
            halving_v = 0.5 ** np.arange(n_val)
            b[:, layout.edge_value_slice(i)] -= frame.edge_lengths[i] * (
                halving_v[:, None] * shear[:n_val, :]
            ).T
        twist = twist_matrix(basis, n_out, t_out, material)
        i_next = (i + 1) % frame.n_vertices
        start_vals = basis.eval(frame.vertices[i : i + 1]) @ twist
        end_vals = basis.eval(frame.vertices[i_next : i_next + 1]) @ twist
        vertex_vals[:, i] -= start_vals[0]
        vertex_vals[:, i_next] += end_vals[0]
    b[:, : layout.n_vertices] += vertex_vals
    return b


def _constraints(frame: CellFrame, basis: ScaledMonomialBasis, layout: DofLayout):
    """Vertex-average pairing rows closing the rank-3 deficiency.

    Returns (c, d) with c (3 x dim) the pairings of the basis against the
    linear monomials summed over vertices, and d (3 x n_total) reading the
    same pairings off the vertex unknowns.
    """
    vander = basis.eval(frame.vertices)  # (m, dim)
    lin = vander[:, :3]  # 1, x, y columns
    c = lin.T @ vander
    d = np.zeros((3, layout.n_total))
    d[:, : layout.n_vertices] = lin.T
    return c, d


def elliptic_projector(
    frame: CellFrame,
    order: int,
    material: MaterialParams,
    dofs_of_basis: np.ndarray | None = None,
    gram: np.ndarray | None = None,
):
    """Energy projector onto polynomials, computable from the unknowns.

    Returns
    -------
    gram : array (dim x dim)
        Energy pairings of the monomial basis (symmetric PSD, 3-dim kernel).
    b : array (dim x n_total)
        Energy pairings of monomials against the unknowns.
    pi : array (dim x n_total)
        Coefficients of the projected polynomial per unit unknown; satisfies
        ``pi @ dof_matrix = identity`` on polynomial data.
    """
    basis = cell_basis(frame, order)
    layout = dof_layout(frame.n_vertices, order)
    if gram is None:
        rule = polygon_rule(frame.vertices, frame.star, 2 * order)
        gram = energy_gram(basis, rule, material)
    b = _load_row(frame, order, basis, layout, material)
    c, d = _constraints(frame, basis, layout)
    n = basis.dim
    saddle = np.zeros((n + 3, n + 3))
    saddle[:n, :n] = gram
    saddle[:n, n:] = c.T
    saddle[n:, :n] = c
    rhs = np.vstack([b, d])
    try:
        sol = np.linalg.solve(saddle, rhs)
    except np.linalg.LinAlgError as exc:
        raise ProjectorError(f"cell {frame.index}: singular projector system") from exc
    if not np.all(np.isfinite(sol)):
        raise ProjectorError(f"cell {frame.index}: projector system produced non-finite values")
    pi = sol[:n]
    # One Newton-Schulz step squares the polynomial-reproduction residual,
    # which the monomial conditioning would otherwise amplify at high order.
    # The correction runs in extended precision: in double it would bottom
    # out at the rounding floor of the large-coefficient products.
    if dofs_of_basis is None:
        dofs_of_basis = dof_matrix(frame, order, basis)
    pi_l = pi.astype(np.longdouble)
    dofs_l = dofs_of_basis.astype(np.longdouble)
    residual = np.eye(n, dtype=np.longdouble) - pi_l @ dofs_l
    pi = np.asarray(pi_l + residual @ pi_l, dtype=float)
    return gram, b, pi


@dataclass
class LocalKernels:
    """All per-cell matrices needed for assembly and error evaluation."""

    frame: CellFrame
    layout: DofLayout
    basis: ScaledMonomialBasis
    pi: np.ndarray  # (dim x n_total) projector coefficients
    stiffness: np.ndarray  # (n_total x n_total) consistency + stabilization
    stabilization: np.ndarray
    moment_op: np.ndarray  # (dim_{order-2} x n_total) interior moments
    moment_mass: np.ndarray  # (dim_{order-2} x dim_{order-2})
    seminorm_gram: np.ndarray  # (dim x dim) broken H2 metric


def local_stiffness(
    frame: CellFrame,
    order: int,
    material: MaterialParams,
    gram: np.ndarray,
    pi: np.ndarray,
    dofs_of_basis: np.ndarray,
):
    """Consistency plus stabilization stiffness of one cell.

    The consistency part evaluates the energy of the projected polynomials;
    the stabilization is the Euclidean product of the unknowns on the
    projector complement, scaled by rigidity / diameter^2.
    """
    consistency = pi.T @ gram @ pi
    q = dofs_of_basis @ pi
    residual = np.eye(q.shape[0]) - q
    scale = material.rigidity / frame.diameter**2
    stab = scale * (residual.T @ residual)
    stiff = consistency + stab
    return 0.5 * (stiff + stiff.T), 0.5 * (stab + stab.T)


def moment_operator(
    frame: CellFrame,
    order: int,
    basis: ScaledMonomialBasis,
    pi: np.ndarray,
    layout: DofLayout,
    vander=None,
    rule=None,
):
    """Interior moments against all monomials up to degree order - 2.

    Moments against monomials of degree up to order - 4 are read directly
    from the interior unknowns; the top two degrees use the moments of the
    projected polynomial, which the enhanced local space makes exact.

    Returns (moment_op, mass) with mass the Gram matrix of the degree
    order - 2 monomials, both integrated exactly.
    """
    low_dim = space_dim(order - 4)
    mid_dim = space_dim(order - 2)
    if rule is None or vander is None:
        rule = polygon_rule(frame.vertices, frame.star, 2 * order)
        vander = basis.eval(rule.points)
    vals_mid = vander[:, :mid_dim]  # canonical order nests lower degrees
    w = rule.weights[:, None]
    cross_mass = vals_mid.T @ (w * vander)  # (mid_dim x dim)
    mass = vals_mid.T @ (w * vals_mid)
    op = cross_mass @ pi
    if low_dim:
        op[:low_dim] = 0.0
        op[:low_dim, layout.cell_slice] = frame.area * np.eye(low_dim)
    return op, 0.5 * (mass + mass.T)


def local_load(
    kern: LocalKernels, f, quad_degree: int | None = None
) -> np.ndarray:
    """Load pairings of a source density against the local unknowns.

    Implements the pairing of f with the degree order - 2 moment
    reconstruction of the test functions:
    ``load = moment_op^T mass^{-1} (integrals of f against the monomials)``.
    """
    frame = kern.frame
    degree = quad_degree if quad_degree is not None else kern.layout.order + 8
    rule = polygon_rule(frame.vertices, frame.star, degree)
    basis_mid = ScaledMonomialBasis(frame.centroid, frame.diameter, kern.layout.order - 2)
    vals_mid = basis_mid.eval(rule.points)
    fvals = f(rule.points[:, 0], rule.points[:, 1])
    fmom = vals_mid.T @ (rule.weights * fvals)
    return kern.moment_op.T @ np.linalg.solve(kern.moment_mass, fmom)


def build_cell_kernels(frame: CellFrame, order: int, material: MaterialParams) -> LocalKernels:
    """Assemble every local operator of one cell.

    One fan quadrature rule exact to twice the order and one Vandermonde of
    the basis at its points serve every interior integral.
    """
    basis = cell_basis(frame, order)
    layout = dof_layout(frame.n_vertices, order)
    rule = polygon_rule(frame.vertices, frame.star, 2 * order)
    vander = basis.eval(rule.points)
    gram, h2 = energy_and_seminorm_grams(basis, rule, material)
    dofs_basis = dof_matrix(frame, order, basis, vander, rule)
    _gram, _b, pi = elliptic_projector(frame, order, material, dofs_basis, gram)
    stiff, stab = local_stiffness(frame, order, material, gram, pi, dofs_basis)
    mom_op, mass = moment_operator(frame, order, basis, pi, layout, vander, rule)
    return LocalKernels(
        frame=frame,
        layout=layout,
        basis=basis,
        pi=pi,
        stiffness=stiff,
        stabilization=stab,
        moment_op=mom_op,
        moment_mass=mass,
        seminorm_gram=h2,
    )


def build_local_kernels(mesh, order: int, material: MaterialParams) -> list[LocalKernels]:
    """Kernels for every cell of a mesh; cells are independent of each other."""
    return [build_cell_kernels(mesh.frame(c), order, material) for c in range(mesh.n_cells)]
