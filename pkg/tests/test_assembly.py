import numpy as np
import pytest
import scipy.sparse as sp

from platevem import assembly, manufactured
from platevem.assembly import (
    AssemblyError,
    BoundarySpec,
    PlateSolver,
    SolverError,
    assemble_stiffness,
    assemble_system,
    boundary_values,
    dump_matrix,
    global_dof_map,
    solve_spd,
)
from platevem.local import build_local_kernels, compute_dofs
from platevem.mesh import derive_topology
from platevem.plate import DEFAULT_MATERIAL

from reference_counts import BY_FAMILY


def zero_f(x, y):
    return np.zeros_like(np.asarray(x, dtype=float))


def test_global_count_criss_order2(mesh_cache):
    dofmap = global_dof_map(mesh_cache("crisscross", 0), 2)
    assert dofmap.n_total == 221
    assert dofmap.n_total == dofmap.closed_form_count()


def test_global_count_octagonal_order5(mesh_cache):
    dofmap = global_dof_map(mesh_cache("octagonal", 0), 5)
    assert dofmap.n_total == 1011


def test_single_triangle_all_constrained():
    mesh = derive_topology(
        np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]), [[0, 1, 2]]
    )
    dofmap = global_dof_map(mesh, 2)
    assert dofmap.n_total == 6
    assert dofmap.boundary_mask.all()


def test_rejects_order_one(mesh_cache):
    with pytest.raises(AssemblyError):
        global_dof_map(mesh_cache("crisscross", 0), 1)


def test_cell_dofs_disjoint_blocks(mesh_cache):
    mesh = mesh_cache("crisscross", 0)
    dofmap = global_dof_map(mesh, 4)
    seen = np.zeros(dofmap.n_total, dtype=int)
    for c in range(mesh.n_cells):
        idx = dofmap.cell_dofs(c)
        assert len(set(idx.tolist())) == len(idx)
        seen[idx] += 1
    assert seen.min() >= 1  # every unknown touched by at least one cell


def test_boundary_entity_counts(mesh_cache):
    """Brute-force recount of constrained unknowns on the coarse mesh.

    The criss-cross n=0 boundary has 20 vertices and 20 edges, so the
    order-2 clamped problem eliminates 40 unknowns leaving 181 free.
    """
    mesh = mesh_cache("crisscross", 0)
    n_bnd_edges = int(mesh.edge_is_boundary.sum())
    n_bnd_verts = int(mesh.boundary_vertices.sum())
    assert n_bnd_edges == 20
    assert n_bnd_verts == 20
    dofmap = global_dof_map(mesh, 2)
    free = int((~dofmap.boundary_mask).sum())
    assert free == 221 - 40 == 181


def test_reduced_matrix_spd(mesh_cache):
    mesh = mesh_cache("crisscross", 0)
    system = assemble_system(mesh, 2, DEFAULT_MATERIAL, zero_f, BoundarySpec.clamped())
    dense = system.matrix.toarray()
    assert np.abs(dense - dense.T).max() == 0.0
    w = np.linalg.eigvalsh(dense)
    assert w.min() > 0


def test_assembled_matrix_symmetric(mesh_cache):
    mesh = mesh_cache("octagonal", 0)
    kernels = build_local_kernels(mesh, 3, DEFAULT_MATERIAL)
    dofmap = global_dof_map(mesh, 3)
    full = assemble_stiffness(mesh, kernels, dofmap)
    asym = (full - full.T).tocoo()
    max_asym = np.abs(asym.data).max() if asym.nnz else 0.0
    assert max_asym == 0.0


def test_assembly_order_independent(mesh_cache):
    mesh = mesh_cache("randomquad", 0)
    kernels = build_local_kernels(mesh, 3, DEFAULT_MATERIAL)
    dofmap = global_dof_map(mesh, 3)
    a1 = assemble_stiffness(mesh, kernels, dofmap)

    order = np.random.default_rng(0).permutation(mesh.n_cells)
    rows, cols, vals = [], [], []
    for c in order:
        idx = dofmap.cell_dofs(int(c))
        grid = np.meshgrid(idx, idx, indexing="ij")
        rows.append(grid[0].ravel())
        cols.append(grid[1].ravel())
        vals.append(kernels[int(c)].stiffness.ravel())
    a2 = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dofmap.n_total, dofmap.n_total),
    ).tocsr()
    diff = (a1 - a2).tocoo()
    scale = np.abs(a1.data).max()
    assert (np.abs(diff.data).max() if diff.nnz else 0.0) <= 1e-15 * scale


def test_zero_load_gives_zero_solution(mesh_cache):
    mesh = mesh_cache("hexagonal", 0)
    system = assemble_system(mesh, 2, DEFAULT_MATERIAL, zero_f, BoundarySpec.clamped())
    solution = solve_spd(system)
    assert np.abs(solution).max() == 0.0


def test_solve_recovers_random_vector(mesh_cache):
    mesh = mesh_cache("crisscross", 0)
    system = assemble_system(mesh, 2, DEFAULT_MATERIAL, zero_f, BoundarySpec.clamped())
    rng = np.random.default_rng(4)
    x0 = rng.uniform(-1, 1, system.matrix.shape[0])
    system.rhs = system.matrix @ x0
    solution = solve_spd(system)
    got = solution[system.free]
    assert np.linalg.norm(got - x0) <= 1e-8 * np.linalg.norm(x0)


def test_unconstrained_system_rejected(mesh_cache):
    # without boundary elimination the matrix keeps its 3-dim kernel,
    # which the solver must report as a distinct failure
    mesh = mesh_cache("crisscross", 0)
    kernels = build_local_kernels(mesh, 2, DEFAULT_MATERIAL)
    dofmap = global_dof_map(mesh, 2)
    full = assemble_stiffness(mesh, kernels, dofmap).tocsr()
    rng = np.random.default_rng(1)
    system = assembly.SparseSystem(
        matrix=full,
        rhs=rng.uniform(-1, 1, dofmap.n_total),
        free=np.arange(dofmap.n_total),
        constrained=np.array([], dtype=int),
        constrained_values=np.array([]),
        dofmap=dofmap,
    )
    with pytest.raises(SolverError):
        solve_spd(system)


@pytest.mark.parametrize("family", ["crisscross", "octagonal"])
@pytest.mark.parametrize("order", [2, 3])
def test_patch_solution_matches_interpolant(family, order, mesh_cache):
    """Strong-data polynomial solutions reproduce the interpolant unknowns."""
    mesh = mesh_cache(family, 0)
    solver = PlateSolver(mesh, order, DEFAULT_MATERIAL)
    u, grad, f = manufactured.monomial_solution(order, 0, DEFAULT_MATERIAL)
    solution = solver.solve(f, BoundarySpec.dirichlet(u, grad))
    expected = solver.interpolate(u, grad)
    scale = np.abs(expected).max()
    assert np.abs(solution - expected).max() <= 1e-9 * scale


def test_shared_edge_normal_moments_opposite(mesh_cache):
    """The normal-moment functional flips sign across a shared edge.

    Evaluating int_e (grad w . n) t^k with each cell's own outward normal
    must produce opposite values, the discrete form of the jump condition.
    """
    mesh = mesh_cache("randomquad", 0)
    interior = np.flatnonzero(~mesh.edge_is_boundary)[0]
    c0, c1 = mesh.edge_cells[interior]
    w = manufactured.displacement
    gw = manufactured.gradient
    vals = []
    for c in (c0, c1):
        frame = mesh.frame(c)
        local_edge = list(frame.edge_ids).index(interior)
        dofs = compute_dofs(frame, 3, w, gw)
        layout_slice = assembly.dof_layout(frame.n_vertices, 3).edge_normal_slice(
            local_edge
        )
        sign = frame.edge_signs[local_edge]
        vals.append(sign * dofs[layout_slice])
    assert np.allclose(vals[0], -vals[1], rtol=1e-12, atol=1e-14)


def test_boundary_values_clamped_are_zero(mesh_cache):
    mesh = mesh_cache("crisscross", 0)
    dofmap = global_dof_map(mesh, 3)
    values = boundary_values(mesh, dofmap, BoundarySpec.clamped())
    assert np.abs(values).max() == 0.0


def test_boundary_spec_validation():
    with pytest.raises(AssemblyError):
        BoundarySpec.dirichlet(None, None)


def test_dump_matrix_roundtrip(tmp_path, mesh_cache):
    mesh = mesh_cache("randomquad", 0)
    kernels = build_local_kernels(mesh, 2, DEFAULT_MATERIAL)
    dofmap = global_dof_map(mesh, 2)
    full = assemble_stiffness(mesh, kernels, dofmap)
    path = tmp_path / "matrix.txt"
    dump_matrix(full, path)
    rows, cols, vals = [], [], []
    for line in path.read_text().splitlines():
        r, c, v = line.split()
        rows.append(int(r))
        cols.append(int(c))
        vals.append(float(v))
    back = sp.coo_matrix((vals, (rows, cols)), shape=full.shape).tocsr()
    diff = (back - full).tocoo()
    assert (np.abs(diff.data).max() if diff.nnz else 0.0) == 0.0


def test_global_dof_counts_match_tables(mesh_cache):
    for family in ("crisscross", "hexagonal", "octagonal", "randomquad"):
        table = BY_FAMILY[family]
        for n in (0, 1):
            mesh = mesh_cache(family, n)
            for col, order in enumerate((2, 3, 4, 5), start=3):
                expected = table[n][col]
                assert global_dof_map(mesh, order).n_total == expected
