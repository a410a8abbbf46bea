"""Tensor-product meshes snapped to every geometric feature line.

Cells never straddle a material interface because the breakpoint lists
contain every finger wall and every layer level; a cell is therefore either
entirely vacuum (active) or entirely electrode material (inactive).  Node
classification is derived by walking the boundary faces of the active-cell
union and matching each face against the tagged segments of the domain, so a
geometry/mesh inconsistency surfaces as an error instead of a silent
misclassification.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .geometry import RectilinearDomain, Region, Tag, period_bases


class NodeClass(IntEnum):
    FREE = 0             # interior or lateral (natural) boundary
    DIRICHLET_ROTOR = 1  # potential 1
    DIRICHLET_STATOR = 2  # potential 0
    UNUSED = 3           # tensor node inside electrode material


@dataclass(frozen=True)
class RefineSpec:
    """Cells per feature interval, per role, times a global nesting factor."""

    gap: int = 4
    zeta: int = 8
    middle: int = 16
    factor: int = 1
    grading: float = 3.0
    node_budget: int = 4_000_000

    def count(self, role: str) -> int:
        base = {"gap": self.gap, "zeta": self.zeta, "middle": self.middle}[role]
        return base * self.factor

    def with_factor(self, factor: int) -> "RefineSpec":
        return RefineSpec(self.gap, self.zeta, self.middle, int(factor),
                          self.grading, self.node_budget)


class MeshBudgetError(ValueError):
    def __init__(self, required: int, budget: int):
        self.required = required
        self.budget = budget
        super().__init__(
            f"mesh needs {required} nodes, exceeding the node budget {budget}"
        )


class MeshConsistencyError(RuntimeError):
    """An active-cell boundary face matched no tagged domain segment."""


@dataclass
class TensorMesh:
    x1: np.ndarray                 # sorted breakpoints, length nx+1
    x2: np.ndarray                 # sorted breakpoints, length ny+1
    active: np.ndarray             # (nx, ny) bool
    cell_region: np.ndarray        # (nx, ny) int8, Region values
    node_class: np.ndarray         # (nx+1, ny+1) int8, NodeClass values
    col_interval: np.ndarray       # (nx,) int8, zeta-subinterval id 0..4 (-1 generic)
    col_period: np.ndarray         # (nx,) int32 period index (-1 generic)
    domain: RectilinearDomain
    faces: list = field(default_factory=list)  # (orient, i, j, side, tag)

    @property
    def nx(self) -> int:
        return self.x1.size - 1

    @property
    def ny(self) -> int:
        return self.x2.size - 1

    @property
    def dx1(self) -> np.ndarray:
        return np.diff(self.x1)

    @property
    def dx2(self) -> np.ndarray:
        return np.diff(self.x2)

    @property
    def n_nodes(self) -> int:
        return self.x1.size * self.x2.size

    @property
    def h(self) -> float:
        """Maximum diameter over active cells."""
        a = self.dx1[:, None]
        b = self.dx2[None, :]
        d = np.hypot(np.broadcast_to(a, self.active.shape),
                     np.broadcast_to(b, self.active.shape))
        return float(d[self.active].max())

    def node_id(self, ix, iy):
        """Flat node index; x2 varies fastest (column-major sweeps)."""
        return ix * self.x2.size + iy

    def node_coords(self):
        xx = np.repeat(self.x1, self.x2.size)
        yy = np.tile(self.x2, self.x1.size)
        return xx, yy

    def active_area(self) -> float:
        return float((self.dx1[:, None] * self.dx2[None, :])[self.active].sum())

    def class_counts(self) -> dict[str, int]:
        flat = self.node_class.ravel()
        return {c.name: int(np.count_nonzero(flat == c)) for c in NodeClass}

    def to_json(self) -> str:
        return json.dumps({
            "x1": self.x1.tolist(),
            "x2": self.x2.tolist(),
            "active": self.active.astype(int).tolist(),
            "cell_region": self.cell_region.tolist(),
            "node_class": self.node_class.tolist(),
        })


def _stretch(u: np.ndarray, p: float) -> np.ndarray:
    """Symmetric power stretching of [0, 1] toward both ends (p = 1: identity).

    Evaluated at dyadic points, so doubling the cell count yields a nested
    breakpoint set (the stretch map is fixed, only its sampling refines).
    """
    lower = 0.5 * (2.0 * u) ** p
    upper = 1.0 - 0.5 * (2.0 * (1.0 - u)) ** p
    return np.where(u <= 0.5, lower, upper)


def _subdivide(lo: float, hi: float, m: int, grading: float) -> np.ndarray:
    """Interior breakpoints of [lo, hi] split into m cells.

    grading > 1 shrinks cells toward both interval ends (the ends sit on
    corner/feature lines); grading == 1 is uniform.
    """
    if m == 1:
        return np.empty(0)
    t = np.arange(1, m) / m
    if grading != 1.0:
        t = _stretch(t, grading)
    return lo + (hi - lo) * t


def _breakpoints(intervals, refine: RefineSpec):
    pts = [intervals[0][0]]
    for lo, hi, role in intervals:
        pts.extend(_subdivide(lo, hi, refine.count(role), refine.grading))
        pts.append(hi)
    return np.asarray(pts)


def _periodic_x_breakpoints(domain: RectilinearDomain, refine: RefineSpec):
    """x1 breakpoints built as period-base + within-period pattern.

    Reusing one within-period offset pattern for every period makes the
    breakpoint sets of all periods bitwise-identical shifts of period 0.
    """
    p = domain.params
    bases = period_bases(p)
    pattern = [0.0]
    for lo, hi, role in domain.x_intervals[:5]:
        pattern.extend(_subdivide(lo, hi, refine.count(role), refine.grading))
        pattern.append(hi)
    pattern = np.asarray(pattern[:-1])   # right edge comes from the next base
    chunks = [bases[k] + pattern for k in range(p.n)]
    return np.concatenate(chunks + [bases[-1:]])


def generate_mesh(domain: RectilinearDomain, refine: RefineSpec | None = None) -> TensorMesh:
    """Tensor mesh of a rectilinear domain with feature-snapped breakpoints."""
    refine = refine or RefineSpec()
    if domain.kind in ("physical", "rescaled"):
        x1 = _periodic_x_breakpoints(domain, refine)
    else:
        x1 = _breakpoints(domain.x_intervals, refine)
    x2 = _breakpoints(domain.y_intervals, refine)
    n_nodes = x1.size * x2.size
    if n_nodes > refine.node_budget:
        raise MeshBudgetError(required=n_nodes, budget=refine.node_budget)

    nx, ny = x1.size - 1, x2.size - 1
    cx = 0.5 * (x1[:-1] + x1[1:])
    cy = 0.5 * (x2[:-1] + x2[1:])

    active = np.zeros((nx, ny), dtype=bool)
    cell_region = np.zeros((nx, ny), dtype=np.int8)
    for r in domain.rects:
        in_x = (cx >= r.x1min) & (cx <= r.x1max)
        in_y = (cy >= r.x2min) & (cy <= r.x2max)
        box = np.outer(in_x, in_y)
        active |= box
        cell_region[box] = r.region

    # region of inactive cells (electrode footprints) from the layer levels,
    # needed by the extension operators
    y_edges = [iv[1] for iv in domain.y_intervals[:-1]]
    lay = np.searchsorted(np.asarray(y_edges), cy, side="left")
    if len(domain.y_intervals) == 3:
        cell_region[~active] = (lay + 1).astype(np.int8)[None, :].repeat(nx, 0)[~active]

    col_interval = np.full(nx, -1, dtype=np.int8)
    col_period = np.full(nx, -1, dtype=np.int32)
    if domain.kind in ("physical", "rescaled"):
        p = domain.params
        bases = period_bases(p)
        col_period = np.clip(np.searchsorted(bases, cx, side="right") - 1, 0, p.n - 1)
        frac = (cx - bases[col_period]) / p.epsilon
        col_interval = np.searchsorted(np.asarray(p.zetas), frac).astype(np.int8)

    node_class, faces = _classify_nodes(domain, x1, x2, active)
    return TensorMesh(
        x1=x1, x2=x2, active=active, cell_region=cell_region,
        node_class=node_class, col_interval=col_interval,
        col_period=col_period, domain=domain, faces=faces,
    )


def _segment_index(domain: RectilinearDomain):
    """Group tagged segments by orientation and fixed coordinate."""
    horiz: dict[float, list] = {}
    vert: dict[float, list] = {}
    for s in domain.boundary:
        if s.horizontal:
            y = s.p0[1]
            lo, hi = sorted((s.p0[0], s.p1[0]))
            horiz.setdefault(y, []).append((lo, hi, s.normal[1], s.tag))
        else:
            x = s.p0[0]
            lo, hi = sorted((s.p0[1], s.p1[1]))
            vert.setdefault(x, []).append((lo, hi, s.normal[0], s.tag))
    return horiz, vert


def _match(segments, key, lo, hi, sign, tol):
    for k, entries in segments.items():
        if abs(k - key) > tol:
            continue
        for (slo, shi, ssign, tag) in entries:
            if ssign == sign and lo >= slo - tol and hi <= shi + tol:
                return tag
    return None  # no tagged segment covers the face with this orientation


def _classify_nodes(domain, x1, x2, active):
    nx, ny = active.shape
    node_class = np.full((nx + 1, ny + 1), int(NodeClass.UNUSED), dtype=np.int8)

    # nodes touching at least one active cell are used; default FREE
    pad = np.zeros((nx + 2, ny + 2), dtype=bool)
    pad[1:-1, 1:-1] = active
    touched = pad[:-1, :-1] | pad[1:, :-1] | pad[:-1, 1:] | pad[1:, 1:]
    node_class[touched] = int(NodeClass.FREE)

    horiz, vert = _segment_index(domain)
    scale = max(abs(x1[-1] - x1[0]), abs(x2[-1] - x2[0]))
    tol = 1e-9 * scale

    # boundary faces of the active union: active cell with inactive/outside
    # neighbor; outward normal points away from the vacuum
    faces = []
    rotor_nodes: list[tuple[int, int]] = []
    stator_nodes: list[tuple[int, int]] = []

    def handle_h(i, j_edge, sign):
        tag = _match(horiz, x2[j_edge], x1[i], x1[i + 1], sign, tol)
        if tag is None:
            raise MeshConsistencyError(
                f"untagged horizontal face y={x2[j_edge]!r} "
                f"x=[{x1[i]!r},{x1[i+1]!r}]"
            )
        faces.append(("h", i, j_edge, sign, tag))
        if tag == Tag.DIRICHLET_ROTOR:
            rotor_nodes.extend([(i, j_edge), (i + 1, j_edge)])
        elif tag == Tag.DIRICHLET_STATOR:
            stator_nodes.extend([(i, j_edge), (i + 1, j_edge)])

    def handle_v(i_edge, j, sign):
        tag = _match(vert, x1[i_edge], x2[j], x2[j + 1], sign, tol)
        if tag is None:
            raise MeshConsistencyError(
                f"untagged vertical face x={x1[i_edge]!r} "
                f"y=[{x2[j]!r},{x2[j+1]!r}]"
            )
        faces.append(("v", i_edge, j, sign, tag))
        if tag == Tag.DIRICHLET_ROTOR:
            rotor_nodes.extend([(i_edge, j), (i_edge, j + 1)])
        elif tag == Tag.DIRICHLET_STATOR:
            stator_nodes.extend([(i_edge, j), (i_edge, j + 1)])

    up = active & ~pad[1:-1, 2:]
    dn = active & ~pad[1:-1, :-2]
    rt = active & ~pad[2:, 1:-1]
    lt = active & ~pad[:-2, 1:-1]
    for i, j in zip(*np.nonzero(up)):
        handle_h(i, j + 1, +1.0)
    for i, j in zip(*np.nonzero(dn)):
        handle_h(i, j, -1.0)
    for i, j in zip(*np.nonzero(rt)):
        handle_v(i + 1, j, +1.0)
    for i, j in zip(*np.nonzero(lt)):
        handle_v(i, j, -1.0)

    # Dirichlet wins over Neumann/interior at shared corners; rotor wins
    # over stator (the two never meet in a valid geometry)
    for ix, iy in stator_nodes:
        node_class[ix, iy] = int(NodeClass.DIRICHLET_STATOR)
    for ix, iy in rotor_nodes:
        node_class[ix, iy] = int(NodeClass.DIRICHLET_ROTOR)

    return node_class, faces


def node_classification(mesh: TensorMesh) -> np.ndarray:
    """Per-node class array (nx+1, ny+1); see :class:`NodeClass`."""
    return mesh.node_class
