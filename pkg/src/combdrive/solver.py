"""Bilinear FEM assembly and solves on tensor meshes.

The discrete problem is diagonal-coefficient diffusion,

    a(u, v) = sum_cells  integral  a1 du/dx1 dv/dx1 + a2 du/dx2 dv/dx2,

with coefficients per layer.  On the rescaled domain the pair is
``(eps^alpha, eps^-alpha)`` in the gap layers and ``(d_eps, 1/d_eps)`` in the
middle; on the physical domain the problem is plain Laplace, ``(1, 1)``.
Rectangular cells admit a closed-form element matrix, so assembly is exact
(no quadrature error) and linear fields are reproduced to round-off.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from . import kernels
from .geometry import RescaleMap, Region, build_physical_domain, build_rescaled_domain
from .mesh import NodeClass, RefineSpec, TensorMesh, generate_mesh
from .params import CombParams

# Element stiffness of a rectangle a x b with coefficients (a1, a2):
#   K = a1*(b/a)*KXX + a2*(a/b)*KYY,  node order (SW, SE, NE, NW).
KXX = np.array([
    [2, -2, -1, 1],
    [-2, 2, 1, -1],
    [-1, 1, 2, -2],
    [1, -1, -2, 2],
]) / 6.0
KYY = np.array([
    [2, 1, -1, -2],
    [1, 2, -2, -1],
    [-1, -2, 2, 1],
    [-2, -1, 1, 2],
]) / 6.0


def element_stiffness(a: float, b: float, a1: float, a2: float) -> np.ndarray:
    return a1 * (b / a) * KXX + a2 * (a / b) * KYY


@dataclass(frozen=True)
class AnisotropicCoeffs:
    """Per-layer diagonal diffusion pairs (a1, a2)."""

    c1: tuple[float, float]
    c2: tuple[float, float]
    c3: tuple[float, float]

    @classmethod
    def rescaled(cls, params: CombParams) -> "AnisotropicCoeffs":
        g = params.gap
        d = RescaleMap(params).d_eps
        return cls(c1=(g, 1.0 / g), c2=(d, 1.0 / d), c3=(g, 1.0 / g))

    @classmethod
    def physical(cls) -> "AnisotropicCoeffs":
        return cls(c1=(1.0, 1.0), c2=(1.0, 1.0), c3=(1.0, 1.0))

    def pairs(self) -> np.ndarray:
        """(4, 2) lookup indexed by Region value."""
        out = np.zeros((4, 2))
        out[Region.C1] = self.c1
        out[Region.C2] = self.c2
        out[Region.C3] = self.c3
        return out

    def validate(self):
        for a1, a2 in (self.c1, self.c2, self.c3):
            if a1 <= 0.0 or a2 <= 0.0:
                raise AssemblyError(f"non-positive diffusion coefficient ({a1}, {a2})")


class AssemblyError(ValueError):
    pass


DIRICHLET_VALUES = {int(NodeClass.DIRICHLET_ROTOR): 1.0,
                    int(NodeClass.DIRICHLET_STATOR): 0.0}


@dataclass
class SparseSystem:
    """Reduced SPD system over FREE nodes after Dirichlet elimination."""

    A: sparse.csr_matrix            # free x free stiffness
    b: np.ndarray                   # lifting right-hand side
    free_nodes: np.ndarray          # flat node ids of the unknowns
    dirichlet_nodes: np.ndarray
    dirichlet_values: np.ndarray
    used_nodes: np.ndarray
    full: sparse.csr_matrix         # pre-elimination stiffness over used nodes
    mesh: TensorMesh

    @property
    def n_free(self) -> int:
        return self.free_nodes.size


@dataclass
class DiscreteField:
    """Nodal potential on a tensor mesh; NaN marks nodes inside electrodes."""

    mesh: TensorMesh
    values: np.ndarray       # flat, length n_nodes, x2 fastest
    iterations: int = 0
    residual: float = 0.0

    def grid(self) -> np.ndarray:
        return self.values.reshape(self.mesh.x1.size, self.mesh.x2.size)

    def used_minmax(self) -> tuple[float, float]:
        used = self.mesh.node_class.ravel() != int(NodeClass.UNUSED)
        v = self.values[used]
        return float(v.min()), float(v.max())


def cell_corner_nodes(mesh: TensorMesh, ci: np.ndarray, cj: np.ndarray):
    """Flat node ids of cell corners in (SW, SE, NE, NW) order."""
    ny1 = mesh.x2.size
    sw = ci * ny1 + cj
    se = (ci + 1) * ny1 + cj
    return sw, se, se + 1, sw + 1


def assemble(mesh: TensorMesh, coeffs: AnisotropicCoeffs) -> SparseSystem:
    """Assemble the reduced system; Dirichlet data moves to the right side."""
    coeffs.validate()
    ci, cj = np.nonzero(mesh.active)
    a = mesh.dx1[ci]
    b = mesh.dx2[cj]
    pair = coeffs.pairs()
    reg = mesh.cell_region[ci, cj]
    if np.any(reg == 0):
        raise AssemblyError("active cell without a region label")
    kxx = pair[reg, 0] * b / a
    kyy = pair[reg, 1] * a / b

    sw, se, ne, nw = cell_corner_nodes(mesh, ci, cj)
    corners = np.stack([sw, se, ne, nw], axis=1)         # (ncell, 4)
    ele = kxx[:, None, None] * KXX + kyy[:, None, None] * KYY

    classes = mesh.node_class.ravel()
    used = np.nonzero(classes != int(NodeClass.UNUSED))[0]
    renum = np.full(classes.size, -1, dtype=np.int64)
    renum[used] = np.arange(used.size)
    if np.any(renum[corners] < 0):
        raise AssemblyError("active cell references an unused node")

    rows = np.repeat(renum[corners], 4, axis=1).ravel()
    cols = np.tile(renum[corners], (1, 4)).ravel()
    full = sparse.coo_matrix(
        (ele.ravel(), (rows, cols)), shape=(used.size, used.size)
    ).tocsr()

    used_classes = classes[used]
    free_mask = used_classes == int(NodeClass.FREE)
    free_local = np.nonzero(free_mask)[0]
    dir_local = np.nonzero(~free_mask)[0]
    gdir = np.where(
        used_classes[dir_local] == int(NodeClass.DIRICHLET_ROTOR), 1.0, 0.0
    )

    A = full[free_local][:, free_local].tocsr()
    rhs = -full[free_local][:, dir_local] @ gdir
    return SparseSystem(
        A=A, b=np.asarray(rhs).ravel(),
        free_nodes=used[free_local],
        dirichlet_nodes=used[dir_local],
        dirichlet_values=gdir,
        used_nodes=used,
        full=full,
        mesh=mesh,
    )


@dataclass(frozen=True)
class SolverSettings:
    tol: float = 1e-10
    max_iter: int = 50_000
    precond: str = "sgs"
    backend: str | None = None


def solve(system: SparseSystem, settings: SolverSettings = SolverSettings()) -> DiscreteField:
    """PCG-solve the reduced system and rebuild the full nodal field."""
    mesh = system.mesh
    values = np.full(mesh.n_nodes, np.nan)
    values[system.dirichlet_nodes] = system.dirichlet_values
    if system.n_free > 0:
        x, iters, res = kernels.pcg(
            system.A, system.b, tol=settings.tol, max_iter=settings.max_iter,
            precond=settings.precond, backend=settings.backend,
        )
        values[system.free_nodes] = x
    else:
        iters, res = 0, 0.0
    field = DiscreteField(mesh, values, iterations=iters, residual=res)
    lo, hi = field.used_minmax()
    slack = 1e3 * max(settings.tol, 1e-14)
    if lo < -slack or hi > 1.0 + slack:
        warnings.warn(
            f"discrete max principle violated: range [{lo:.3e}, {hi:.3e}]",
            RuntimeWarning, stacklevel=2,
        )
    return field


def solve_rescaled(params: CombParams, refine: RefineSpec | None = None,
                   settings: SolverSettings = SolverSettings()) -> DiscreteField:
    """Pipeline: rescaled domain -> mesh -> anisotropic assembly -> PCG."""
    domain = build_rescaled_domain(params)
    mesh = generate_mesh(domain, refine)
    system = assemble(mesh, AnisotropicCoeffs.rescaled(params))
    return solve(system, settings)


def solve_physical(params: CombParams, refine: RefineSpec | None = None,
                   settings: SolverSettings = SolverSettings()) -> DiscreteField:
    """Pipeline: physical domain -> mesh -> Laplace assembly -> PCG."""
    domain = build_physical_domain(params)
    mesh = generate_mesh(domain, refine)
    system = assemble(mesh, AnisotropicCoeffs.physical())
    return solve(system, settings)
