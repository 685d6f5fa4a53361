"""Projected broken-energy error metric and convergence study harness."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import manufactured
from .assembly import BoundarySpec, PlateSolver
from .generators import build_family
from .local import LocalKernels, compute_dofs
from .mesh import PolygonMesh
from .plate import DEFAULT_MATERIAL, MaterialParams


class ZeroSeminormError(Exception):
    """Reference field projects to piecewise linears: relative error undefined."""


@dataclass
class ProjectedField:
    """Cellwise polynomial coefficients (scaled cell bases) of a projection."""

    mesh: PolygonMesh
    order: int
    coefficients: np.ndarray  # (n_cells, dim)


def project_solution(
    mesh: PolygonMesh,
    kernels: list[LocalKernels],
    dofmap,
    solution: np.ndarray,
) -> ProjectedField:
    """Cellwise energy projection of a discrete solution vector."""
    coeffs = np.empty((mesh.n_cells, kernels[0].basis.dim))
    for c, kern in enumerate(kernels):
        coeffs[c] = kern.pi @ solution[dofmap.cell_dofs(c)]
    return ProjectedField(mesh, kernels[0].layout.order, coeffs)


def project_exact(
    mesh: PolygonMesh,
    kernels: list[LocalKernels],
    w,
    grad_w,
    quad_degree: int | None = None,
) -> ProjectedField:
    """Cellwise energy projection of a smooth function given by callbacks."""
    order = kernels[0].layout.order
    coeffs = np.empty((mesh.n_cells, kernels[0].basis.dim))
    for c, kern in enumerate(kernels):
        dofs = compute_dofs(kern.frame, order, w, grad_w, quad_degree)
        coeffs[c] = kern.pi @ dofs
    return ProjectedField(mesh, order, coeffs)


def seminorm_2h(kernels: list[LocalKernels], coefficients: np.ndarray) -> float:
    """Broken H2 seminorm of a cellwise polynomial field."""
    total = 0.0
    for c, kern in enumerate(kernels):
        v = coefficients[c]
        total += float(v @ kern.seminorm_gram @ v)
    return float(np.sqrt(max(total, 0.0)))


def _seminorm_scale(kernels: list[LocalKernels], coefficients: np.ndarray) -> float:
    """Magnitude a generic field with these coefficients would have.

    Used to detect reference fields whose seminorm is pure rounding noise
    (projections of globally linear functions).
    """
    total = 0.0
    for c, kern in enumerate(kernels):
        total += float(np.abs(kern.seminorm_gram).max() * (coefficients[c] ** 2).sum())
    return float(np.sqrt(total))


def error_2h(
    kernels: list[LocalKernels],
    exact: ProjectedField,
    discrete: ProjectedField,
) -> float:
    """Relative broken H2 distance between two projected fields.

    Raises
    ------
    ZeroSeminormError
        When the reference field has (numerically) zero broken seminorm,
        i.e. it projects to a piecewise linear field.
    """
    denom = seminorm_2h(kernels, exact.coefficients)
    num = seminorm_2h(kernels, exact.coefficients - discrete.coefficients)
    if denom <= 1e-9 * _seminorm_scale(kernels, exact.coefficients):
        raise ZeroSeminormError("reference projection is piecewise linear")
    return num / denom


def relative_or_absolute_error(
    kernels: list[LocalKernels],
    exact: ProjectedField,
    discrete: ProjectedField,
) -> float:
    """Relative projected error, absolute when the reference is linear.

    Falls back to the absolute broken seminorm of the difference whenever
    the reference seminorm sits at rounding-noise level, which keeps
    consistency sweeps meaningful for linear solutions.
    """
    denom = seminorm_2h(kernels, exact.coefficients)
    num = seminorm_2h(kernels, exact.coefficients - discrete.coefficients)
    if denom <= 1e-9 * _seminorm_scale(kernels, exact.coefficients):
        return num
    return num / denom


@dataclass
class ConvergenceRecord:
    """One row of a refinement study."""

    family: str
    n: int
    h: float
    n_dofs: int
    error: float
    rate_h: float  # vs previous row; nan on the first
    rate_dofs: float

    def as_csv_row(self) -> str:
        return (
            f"{self.family},{self.n},{self.h:.12g},{self.n_dofs},"
            f"{self.error:.12g},{self.rate_h:.12g},{self.rate_dofs:.12g}"
        )


CSV_HEADER = "family,n,h,ndof,error2h,rate_h,rate_dof"


def pairwise_rates(records: list[ConvergenceRecord]) -> None:
    """Fill the consecutive-pair rate columns in place."""
    for i, rec in enumerate(records):
        if i == 0:
            rec.rate_h = float("nan")
            rec.rate_dofs = float("nan")
            continue
        prev = records[i - 1]
        rec.rate_h = float(
            np.log(prev.error / rec.error) / np.log(prev.h / rec.h)
        )
        rec.rate_dofs = float(
            np.log(prev.error / rec.error) / np.log(rec.n_dofs / prev.n_dofs)
        )


def windowed_rate(records: list[ConvergenceRecord], versus: str = "h") -> float:
    """Least-squares slope of log(error) over the whole study window.

    ``versus='h'`` fits against log h (positive slope for convergence);
    ``versus='dofs'`` fits against log n_dofs and negates, so both
    conventions report a positive order of convergence.
    """
    errs = np.log([r.error for r in records])
    if versus == "h":
        x = np.log([r.h for r in records])
        return float(np.polyfit(x, errs, 1)[0])
    x = np.log([r.n_dofs for r in records])
    return float(-np.polyfit(x, errs, 1)[0])


def run_single(
    mesh: PolygonMesh,
    order: int,
    material: MaterialParams,
    f,
    bc: BoundarySpec,
    exact,
    exact_grad,
    quad_degree: int | None = None,
):
    """Solve one problem and measure the projected relative error.

    Returns (solver, solution vector, error).
    """
    solver = PlateSolver(mesh, order, material)
    solution = solver.solve(f, bc, quad_degree)
    proj_u = project_exact(mesh, solver.kernels, exact, exact_grad, quad_degree)
    proj_uh = project_solution(mesh, solver.kernels, solver.dofmap, solution)
    err = relative_or_absolute_error(solver.kernels, proj_u, proj_uh)
    return solver, solution, err


def convergence_study(
    family: str,
    order: int,
    n_max: int,
    material: MaterialParams = DEFAULT_MATERIAL,
    seed: int = 0,
    quad_degree: int | None = None,
) -> list[ConvergenceRecord]:
    """Refinement study for the reference displacement on one mesh family.

    Runs refinement indices 0..n_max, records the relative projected error,
    and fills both pairwise rate columns.
    """
    if order not in (2, 3, 4, 5):
        raise ValueError("order must be one of 2, 3, 4, 5")
    if n_max > 8 or (order == 5 and n_max > 4):
        raise ValueError("n_max out of range for this order")
    f = manufactured.load(material)
    records = []
    for n in range(n_max + 1):
        mesh = build_family(family, n, seed)
        solver, _, err = run_single(
            mesh,
            order,
            material,
            f,
            BoundarySpec.clamped(),
            manufactured.displacement,
            manufactured.gradient,
            quad_degree,
        )
        records.append(
            ConvergenceRecord(
                family, n, mesh.h, solver.n_dofs, err, float("nan"), float("nan")
            )
        )
    pairwise_rates(records)
    return records


def write_csv(records: list[ConvergenceRecord], path) -> None:
    with open(path, "w") as fh:
        fh.write(CSV_HEADER + "\n")
        for rec in records:
            fh.write(rec.as_csv_row() + "\n")


def write_plot_data(records: list[ConvergenceRecord], path) -> None:
    """Log-log pairs (h, error), one per line, for external plotting."""
    with open(path, "w") as fh:
        for rec in records:
            fh.write(f"{rec.h:.12g} {rec.error:.12g}\n")
