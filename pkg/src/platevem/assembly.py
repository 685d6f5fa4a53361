"""Global numbering, boundary conditions, sparse assembly, and direct solve."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .local import LocalKernels, build_local_kernels, compute_dofs, dof_layout, local_load
from .mesh import PolygonMesh
from .plate import MaterialParams
from .polynomials import space_dim
from .quadrature import edge_rule


class AssemblyError(Exception):
    """Failure while building the global system."""


class SolverError(Exception):
    """Failure while factorizing or solving the reduced system."""


@dataclass
class GlobalDofMap:
    """Global numbering of the unknowns of a mesh at a given order.

    Vertex unknowns come first (shared across incident cells), then the
    normal-derivative edge moments grouped by edge, then the trace edge
    moments, then the per-cell interior moments. Edge unknowns address the
    global edge convention, so the two cells sharing an edge scatter into
    identical columns without sign bookkeeping; each cell's own outward
    normal enters its local kernels through the edge orientation signs.
    """

    mesh: PolygonMesh
    order: int
    n_total: int = field(init=False)
    offsets: tuple = field(init=False)

    def __post_init__(self):
        if self.order < 2:
            raise AssemblyError("order must be at least 2")
        layout = dof_layout(3, self.order)
        mesh = self.mesh
        self._n_en = layout.n_edge_normal
        self._n_ev = layout.n_edge_value
        self._n_cell = layout.n_cell
        o_vertex = 0
        o_en = mesh.n_vertices
        o_ev = o_en + mesh.n_edges * self._n_en
        o_cell = o_ev + mesh.n_edges * self._n_ev
        self.offsets = (o_vertex, o_en, o_ev, o_cell)
        self.n_total = o_cell + mesh.n_cells * self._n_cell

    def cell_dofs(self, c: int) -> np.ndarray:
        """Global indices of cell c's unknowns, in local layout order."""
        mesh = self.mesh
        ids = mesh.cells[c]
        eids = mesh.cell_edges[c]
        _, o_en, o_ev, o_cell = self.offsets
        parts = [ids]
        if self._n_en:
            parts.append(
                (o_en + eids[:, None] * self._n_en + np.arange(self._n_en)).ravel()
            )
        if self._n_ev:
            parts.append(
                (o_ev + eids[:, None] * self._n_ev + np.arange(self._n_ev)).ravel()
            )
        if self._n_cell:
            parts.append(o_cell + c * self._n_cell + np.arange(self._n_cell))
        return np.concatenate(parts)

    @property
    def boundary_mask(self) -> np.ndarray:
        """True for unknowns constrained by boundary conditions.

        Boundary vertices and every edge moment (both kinds) of boundary
        edges are constrained; interior moments never are.
        """
        mesh = self.mesh
        mask = np.zeros(self.n_total, dtype=bool)
        mask[: mesh.n_vertices] = mesh.boundary_vertices
        _, o_en, o_ev, _ = self.offsets
        bnd_edges = np.flatnonzero(mesh.edge_is_boundary)
        for e in bnd_edges:
            mask[o_en + e * self._n_en : o_en + (e + 1) * self._n_en] = True
            if self._n_ev:
                mask[o_ev + e * self._n_ev : o_ev + (e + 1) * self._n_ev] = True
        return mask

    def closed_form_count(self) -> int:
        mesh = self.mesh
        n = mesh.n_vertices + (self.order - 1) * mesh.n_edges
        if self.order >= 3:
            n += (self.order - 2) * mesh.n_edges
        if self.order >= 4:
            n += space_dim(self.order - 4) * mesh.n_cells
        return n


def global_dof_map(mesh: PolygonMesh, order: int) -> GlobalDofMap:
    """Global numbering for a mesh at the given order."""
    return GlobalDofMap(mesh, order)


@dataclass(frozen=True)
class BoundarySpec:
    """Boundary data: homogeneous clamped, or strong values from callbacks."""

    value: object = None  # callable u(x, y) or None for clamped
    gradient: object = None  # callable -> (du/dx, du/dy)

    @classmethod
    def clamped(cls) -> "BoundarySpec":
        return cls()

    @classmethod
    def dirichlet(cls, value, gradient) -> "BoundarySpec":
        if value is None or gradient is None:
            raise AssemblyError("strong boundary data needs value and gradient callbacks")
        return cls(value, gradient)

    @property
    def is_clamped(self) -> bool:
        return self.value is None


def assemble_stiffness(
    mesh: PolygonMesh, kernels: list[LocalKernels], dofmap: GlobalDofMap
) -> sp.csr_matrix:
    """Scatter the local stiffness matrices into the full symmetric matrix."""
    rows, cols, vals = [], [], []
    for c, kern in enumerate(kernels):
        idx = dofmap.cell_dofs(c)
        grid = np.meshgrid(idx, idx, indexing="ij")
        rows.append(grid[0].ravel())
        cols.append(grid[1].ravel())
        vals.append(kern.stiffness.ravel())
    mat = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dofmap.n_total, dofmap.n_total),
    )
    return mat.tocsr()


def assemble_load(
    mesh: PolygonMesh,
    kernels: list[LocalKernels],
    dofmap: GlobalDofMap,
    f,
    quad_degree: int | None = None,
) -> np.ndarray:
    """Scatter the local load pairings of the source density f."""
    b = np.zeros(dofmap.n_total)
    for c, kern in enumerate(kernels):
        np.add.at(b, dofmap.cell_dofs(c), local_load(kern, f, quad_degree))
    return b


def boundary_values(
    mesh: PolygonMesh,
    dofmap: GlobalDofMap,
    bc: BoundarySpec,
    quad_degree: int | None = None,
) -> np.ndarray:
    """Values of the constrained unknowns (zeros for the clamped plate)."""
    values = np.zeros(dofmap.n_total)
    if bc.is_clamped:
        return values
    degree = quad_degree if quad_degree is not None else dofmap.order + 8
    verts = np.flatnonzero(mesh.boundary_vertices)
    values[verts] = bc.value(mesh.vertices[verts, 0], mesh.vertices[verts, 1])
    _, o_en, o_ev, _ = dofmap.offsets
    n_en, n_ev = dofmap._n_en, dofmap._n_ev
    for e in np.flatnonzero(mesh.edge_is_boundary):
        v0, v1 = mesh.edge_vertices[e]
        p0, p1 = mesh.vertices[v0], mesh.vertices[v1]
        vec = p1 - p0
        length = float(np.linalg.norm(vec))
        tangent = vec / length
        normal = np.array([tangent[1], -tangent[0]])
        rule = edge_rule(p0, p1, degree)
        x, y = rule.points[:, 0], rule.points[:, 1]
        that = 2.0 * ((rule.points - 0.5 * (p0 + p1)) @ tangent) / length
        gx, gy = bc.gradient(x, y)
        dn = normal[0] * gx + normal[1] * gy
        wvals = bc.value(x, y)
        for k in range(n_en):
            values[o_en + e * n_en + k] = rule.weights @ (dn * that**k)
        for k in range(n_ev):
            values[o_ev + e * n_ev + k] = rule.weights @ (wvals * that**k) / length
    return values


@dataclass
class SparseSystem:
    """Reduced symmetric system after eliminating the constrained unknowns."""

    matrix: sp.csr_matrix  # free x free block
    rhs: np.ndarray
    free: np.ndarray  # indices of free unknowns
    constrained: np.ndarray
    constrained_values: np.ndarray
    dofmap: GlobalDofMap


def reduce_system(
    full: sp.csr_matrix,
    load: np.ndarray,
    dofmap: GlobalDofMap,
    values: np.ndarray,
) -> SparseSystem:
    """Eliminate constrained unknowns, moving their columns to the load."""
    mask = dofmap.boundary_mask
    free = np.flatnonzero(~mask)
    constrained = np.flatnonzero(mask)
    a_ff = full[free][:, free].tocsr()
    rhs = load[free]
    vals = values[constrained]
    if np.any(vals):
        rhs = rhs - full[free][:, constrained] @ vals
    return SparseSystem(a_ff, rhs, free, constrained, vals, dofmap)


def assemble_system(
    mesh: PolygonMesh,
    order: int,
    material: MaterialParams,
    f,
    bc: BoundarySpec,
    quad_degree: int | None = None,
) -> SparseSystem:
    """Build the reduced sparse system of the discrete plate problem."""
    kernels = build_local_kernels(mesh, order, material)
    dofmap = global_dof_map(mesh, order)
    full = assemble_stiffness(mesh, kernels, dofmap)
    load = assemble_load(mesh, kernels, dofmap, f, quad_degree)
    values = boundary_values(mesh, dofmap, bc, quad_degree)
    return reduce_system(full, load, dofmap, values)


def _check_pivots(lu) -> None:
    """Reject numerically singular factorizations (e.g. unconstrained kernels)."""
    diag = np.abs(lu.U.diagonal())
    if diag.min() <= 1e-12 * max(diag.max(), 1e-300):
        raise SolverError(
            "factorization found a numerically zero pivot: matrix is singular "
            "or not symmetric positive definite"
        )


def _refined_solve(a: sp.csc_matrix, lu, rhs: np.ndarray, tol: float) -> np.ndarray:
    """LU solve with iterative refinement down to the residual tolerance.

    Convergence is measured by the normwise backward error
    ``|r| / (|A| |x| + |b|)``, the tightest residual notion a fixed-precision
    factorization can meet once the fourth-order operator drives the
    condition number past 1/tol.
    """
    x = lu.solve(rhs)
    if not np.all(np.isfinite(x)):
        raise SolverError("solver produced non-finite values (singular matrix?)")
    rhs_norm = float(np.linalg.norm(rhs))
    if rhs_norm == 0.0:
        return np.zeros_like(rhs)
    a_norm = spla.norm(a, 1)

    def backward_error(vec):
        res = float(np.linalg.norm(rhs - a @ vec))
        return res / (a_norm * float(np.linalg.norm(vec)) + rhs_norm)

    for _ in range(3):
        if backward_error(x) <= tol:
            return x
        x = x + lu.solve(rhs - a @ x)
    err = backward_error(x)
    if err > tol:
        raise SolverError(
            f"backward error {err:.3e} exceeds {tol:.1e}: "
            "matrix is not symmetric positive definite"
        )
    return x


def solve_spd(system: SparseSystem, residual_tol: float = 1e-10) -> np.ndarray:
    """Direct sparse solve of the reduced system; returns the full vector.

    Raises
    ------
    SolverError
        When factorization breaks down or the relative residual exceeds
        ``residual_tol`` (symptoms of an indefinite or singular matrix, e.g.
        a system assembled without boundary elimination).
    """
    a = system.matrix.tocsc()
    try:
        lu = spla.splu(a)
    except RuntimeError as exc:
        raise SolverError(f"sparse factorization failed: {exc}") from exc
    _check_pivots(lu)
    x = _refined_solve(a, lu, system.rhs, residual_tol)
    full = np.zeros(system.dofmap.n_total)
    full[system.free] = x
    full[system.constrained] = system.constrained_values
    return full


class PlateSolver:
    """Reusable discrete plate problem on a fixed mesh, order, and material.

    Builds the per-cell kernels, the global numbering, and the stiffness
    matrix once; each :meth:`solve` call assembles a load, applies boundary
    data, and reuses the cached factorization of the free block.
    """

    def __init__(self, mesh: PolygonMesh, order: int, material: MaterialParams):
        self.mesh = mesh
        self.order = order
        self.material = material
        self.kernels = build_local_kernels(mesh, order, material)
        self.dofmap = global_dof_map(mesh, order)
        self.matrix = assemble_stiffness(mesh, self.kernels, self.dofmap)
        mask = self.dofmap.boundary_mask
        self.free = np.flatnonzero(~mask)
        self.constrained = np.flatnonzero(mask)
        self._a_ff = self.matrix[self.free][:, self.free].tocsc()
        self._a_fc = self.matrix[self.free][:, self.constrained].tocsr()
        self._lu = None

    @property
    def n_dofs(self) -> int:
        return self.dofmap.n_total

    def solve(
        self, f, bc: BoundarySpec, quad_degree: int | None = None
    ) -> np.ndarray:
        """Solve for the full unknown vector under the given load and data."""
        load = assemble_load(self.mesh, self.kernels, self.dofmap, f, quad_degree)
        values = boundary_values(self.mesh, self.dofmap, bc, quad_degree)
        rhs = load[self.free]
        vals = values[self.constrained]
        if np.any(vals):
            rhs = rhs - self._a_fc @ vals
        if self._lu is None:
            try:
                self._lu = spla.splu(self._a_ff)
            except RuntimeError as exc:
                raise SolverError(f"sparse factorization failed: {exc}") from exc
            _check_pivots(self._lu)
        x = _refined_solve(self._a_ff, self._lu, rhs, 1e-10)
        full = np.zeros(self.dofmap.n_total)
        full[self.free] = x
        full[self.constrained] = vals
        return full

    def interpolate(self, w, grad_w, quad_degree: int | None = None) -> np.ndarray:
        """Global unknown vector of a smooth function (defined cell by cell).

        Shared unknowns are written once per incident cell with identical
        values, so the result is the plain interpolant.
        """
        out = np.zeros(self.dofmap.n_total)
        for c in range(self.mesh.n_cells):
            frame = self.kernels[c].frame
            out[self.dofmap.cell_dofs(c)] = compute_dofs(
                frame, self.order, w, grad_w, quad_degree
            )
        return out


def dump_matrix(matrix: sp.spmatrix, path) -> None:
    """Write a sparse matrix in coordinate text format (row col value)."""
    coo = matrix.tocoo()
    with open(path, "w") as fh:
        for r, c, v in zip(coo.row, coo.col, coo.data):
            fh.write(f"{r} {c} {v:.17g}\n")
