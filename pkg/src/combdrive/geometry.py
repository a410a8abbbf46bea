"""Comb-drive vacuum domains, boundary tagging, and the gap-flattening map.

The vacuum between the electrodes is a union of axis-aligned rectangles.
Two variants are built from the same parameters:

* the *physical* domain, whose electrode gap layers have thickness
  ``epsilon**alpha``, and
* the *rescaled* domain, where both gap layers have unit thickness and the
  middle region has height ``l2 - l1 - 2``.

A piecewise-affine map (:class:`RescaleMap`) carries the rescaled domain onto
the physical one; it is affine on each of the three horizontal layers and
continuous across the layer interfaces.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .params import CombParams, require_valid


class Tag(IntEnum):
    """Boundary condition tag of a boundary segment."""

    DIRICHLET_ROTOR = 1   # potential 1
    DIRICHLET_STATOR = 2  # potential 0
    NEUMANN_LATERAL = 3   # insulated lateral sides


class Region(IntEnum):
    """Horizontal layer of the vacuum: bottom gap, middle, top gap."""

    C1 = 1
    C2 = 2
    C3 = 3


@dataclass(frozen=True)
class Rect:
    x1min: float
    x1max: float
    x2min: float
    x2max: float
    region: int

    @property
    def area(self) -> float:
        return (self.x1max - self.x1min) * (self.x2max - self.x2min)


@dataclass(frozen=True)
class BoundarySegment:
    """Axis-aligned boundary piece with its outward normal (exterior to the vacuum)."""

    p0: tuple[float, float]
    p1: tuple[float, float]
    tag: Tag
    normal: tuple[float, float]

    @property
    def length(self) -> float:
        return abs(self.p1[0] - self.p0[0]) + abs(self.p1[1] - self.p0[1])

    @property
    def horizontal(self) -> bool:
        return self.p0[1] == self.p1[1]


@dataclass
class RectilinearDomain:
    """Union of axis-aligned rectangles with a fully tagged boundary.

    ``x_intervals`` / ``y_intervals`` list the feature intervals of the two
    axes together with a refinement role (``"zeta"``, ``"gap"``, ``"middle"``)
    so a mesh generator can snap nodes to every geometric feature line.
    """

    kind: str                      # "physical" | "rescaled"
    params: CombParams
    rects: list[Rect]
    boundary: list[BoundarySegment]
    x_intervals: list[tuple[float, float, str]]
    y_intervals: list[tuple[float, float, str]]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        # canonical ordering, so permuted construction input cannot leak
        # into downstream meshes
        self.rects = sorted(self.rects, key=lambda r: (r.x2min, r.x1min))

    def area(self) -> float:
        return float(sum(r.area for r in self.rects))

    def area_by_region(self) -> dict[int, float]:
        out = {int(r): 0.0 for r in Region}
        for r in self.rects:
            out[r.region] += r.area
        return out

    def contains(self, x1, x2, tol: float = 0.0):
        """Vectorized closed-rectangle membership test."""
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        inside = np.zeros(np.broadcast(x1, x2).shape, dtype=bool)
        for r in self.rects:
            inside |= (
                (x1 >= r.x1min - tol) & (x1 <= r.x1max + tol)
                & (x2 >= r.x2min - tol) & (x2 <= r.x2max + tol)
            )
        return inside

    def boundary_length_by_tag(self) -> dict[Tag, float]:
        out = {t: 0.0 for t in Tag}
        for s in self.boundary:
            out[s.tag] += s.length
        return out

    def to_json(self) -> str:
        payload = {
            "kind": self.kind,
            "rects": [
                {
                    "x1min": r.x1min, "x1max": r.x1max,
                    "x2min": r.x2min, "x2max": r.x2max,
                    "region": Region(r.region).name,
                }
                for r in self.rects
            ],
            "boundary": [
                {
                    "p0": list(s.p0), "p1": list(s.p1),
                    "tag": s.tag.name, "normal": list(s.normal),
                }
                for s in self.boundary
            ],
            "meta": self.meta,
        }
        return json.dumps(payload, indent=2)


def period_bases(params: CombParams) -> np.ndarray:
    """x1 coordinates of the period boundaries, 0 = base[0] < ... < base[n] = L.

    Built by a running sum of epsilon so each rectangle edge and every mesh
    breakpoint reuse bitwise-identical floats; the final edge is snapped to L.
    """
    eps = params.epsilon
    bases = np.empty(params.n + 1, dtype=float)
    acc = 0.0
    for k in range(params.n):
        bases[k] = acc
        acc += eps
    bases[params.n] = params.L
    return bases


def zeta_offsets(params: CombParams) -> np.ndarray:
    """Within-period x1 offsets of the four finger walls."""
    eps = params.epsilon
    return np.array([eps * z for z in params.zetas], dtype=float)


def _build_domain(params: CombParams, rescaled: bool) -> RectilinearDomain:
    require_valid(params)
    gap = 1.0 if rescaled else params.gap
    l1, l2 = params.l1, params.l2
    y_bot, y_tip_a, y_tip_b, y_top = l1, l1 + gap, l2 - gap, l2
    if not (y_tip_a < y_tip_b):
        raise ValueError(
            f"gap {gap} too large: layers overlap (l2-l1 = {l2 - l1})"
        )

    bases = period_bases(params)
    offs = zeta_offsets(params)

    rects: list[Rect] = []
    boundary: list[BoundarySegment] = []
    x_intervals: list[tuple[float, float, str]] = []

    up, down = (0.0, 1.0), (0.0, -1.0)
    for k in range(params.n):
        b, b1 = bases[k], bases[k + 1]
        xz = (b + offs[0], b + offs[1], b + offs[2], b + offs[3])

        for lo, hi in zip((b,) + xz, xz + (b1,)):
            x_intervals.append((lo, hi, "zeta"))

        # bottom gap layer: everything except the stator finger footprint
        rects.append(Rect(b, xz[2], y_bot, y_tip_a, Region.C1))
        rects.append(Rect(xz[3], b1, y_bot, y_tip_a, Region.C1))
        # middle: three channels between the finger footprints
        rects.append(Rect(b, xz[0], y_tip_a, y_tip_b, Region.C2))
        rects.append(Rect(xz[1], xz[2], y_tip_a, y_tip_b, Region.C2))
        rects.append(Rect(xz[3], b1, y_tip_a, y_tip_b, Region.C2))
        # top gap layer: everything except the rotor finger footprint
        rects.append(Rect(b, xz[0], y_tip_b, y_top, Region.C3))
        rects.append(Rect(xz[1], b1, y_tip_b, y_top, Region.C3))

        # rotor: finger tip, finger walls, backbone underside
        boundary.append(BoundarySegment((xz[0], y_tip_a), (xz[1], y_tip_a),
                                        Tag.DIRICHLET_ROTOR, up))
        boundary.append(BoundarySegment((xz[0], y_tip_a), (xz[0], y_top),
                                        Tag.DIRICHLET_ROTOR, (1.0, 0.0)))
        boundary.append(BoundarySegment((xz[1], y_tip_a), (xz[1], y_top),
                                        Tag.DIRICHLET_ROTOR, (-1.0, 0.0)))
        boundary.append(BoundarySegment((b, y_top), (xz[0], y_top),
                                        Tag.DIRICHLET_ROTOR, up))
        boundary.append(BoundarySegment((xz[1], y_top), (b1, y_top),
                                        Tag.DIRICHLET_ROTOR, up))

        # stator: finger tip, finger walls, backbone top
        boundary.append(BoundarySegment((xz[2], y_tip_b), (xz[3], y_tip_b),
                                        Tag.DIRICHLET_STATOR, down))
        boundary.append(BoundarySegment((xz[2], y_bot), (xz[2], y_tip_b),
                                        Tag.DIRICHLET_STATOR, (1.0, 0.0)))
        boundary.append(BoundarySegment((xz[3], y_bot), (xz[3], y_tip_b),
                                        Tag.DIRICHLET_STATOR, (-1.0, 0.0)))
        boundary.append(BoundarySegment((b, y_bot), (xz[2], y_bot),
                                        Tag.DIRICHLET_STATOR, down))
        boundary.append(BoundarySegment((xz[3], y_bot), (b1, y_bot),
                                        Tag.DIRICHLET_STATOR, down))

    boundary.append(BoundarySegment((0.0, y_bot), (0.0, y_top),
                                    Tag.NEUMANN_LATERAL, (-1.0, 0.0)))
    boundary.append(BoundarySegment((params.L, y_bot), (params.L, y_top),
                                    Tag.NEUMANN_LATERAL, (1.0, 0.0)))

    y_intervals = [
        (y_bot, y_tip_a, "gap"),
        (y_tip_a, y_tip_b, "middle"),
        (y_tip_b, y_top, "gap"),
    ]
    return RectilinearDomain(
        kind="rescaled" if rescaled else "physical",
        params=params,
        rects=rects,
        boundary=boundary,
        x_intervals=x_intervals,
        y_intervals=y_intervals,
        meta={"l3": params.l3, "gap": gap},
    )


def build_physical_domain(params: CombParams) -> RectilinearDomain:
    """Vacuum domain with electrode gap layers of thickness epsilon**alpha."""
    return _build_domain(params, rescaled=False)


def build_rescaled_domain(params: CombParams) -> RectilinearDomain:
    """Vacuum domain with unit-thickness gap layers (the alpha = 0 geometry)."""
    return _build_domain(params, rescaled=True)


class DomainMembershipError(ValueError):
    """A point handed to the rescale map lies outside the domain closure."""


def d_eps_limit(params: CombParams) -> float:
    """Small-period limit of the middle-layer stretch coefficient."""
    return (params.l2 - params.l1) / (params.l2 - params.l1 - 2.0)


@dataclass(frozen=True)
class RescaleMap:
    """Piecewise-affine map from the rescaled vacuum onto the physical one.

    Bottom and top gap layers are compressed by ``epsilon**alpha``; the middle
    layer is stretched by ``d_eps = (l2-l1-2*eps^alpha)/(l2-l1-2)``.  The x1
    coordinate is untouched.
    """

    params: CombParams

    @property
    def d_eps(self) -> float:
        p = self.params
        return (p.l2 - p.l1 - 2.0 * p.gap) / (p.l2 - p.l1 - 2.0)

    def _check_membership(self, x1, x2, rescaled: bool):
        p = self.params
        tol = 1e-12 * max(p.L, p.l3)
        gap = 1.0 if rescaled else p.gap
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        ok = (x1 >= -tol) & (x1 <= p.L + tol) & (x2 >= p.l1 - tol) & (x2 <= p.l2 + tol)
        # strictly inside a finger footprint at the matching heights -> outside
        frac = (x1 / p.epsilon) % 1.0
        in_a = (frac > p.zeta1 + tol) & (frac < p.zeta2 - tol)
        in_b = (frac > p.zeta3 + tol) & (frac < p.zeta4 - tol)
        ok &= ~(in_a & (x2 > p.l1 + gap + tol))
        ok &= ~(in_b & (x2 < p.l2 - gap - tol))
        if not np.all(ok):
            raise DomainMembershipError("point outside the vacuum domain closure")

    def forward(self, x1, x2):
        """Map a point of the rescaled domain into the physical one."""
        self._check_membership(x1, x2, rescaled=True)
        p = self.params
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        g, d = p.gap, self.d_eps
        out = np.where(
            x2 <= p.l1 + 1.0,
            (x2 - p.l1) * g + p.l1,
            np.where(
                x2 >= p.l2 - 1.0,
                (x2 - p.l2 + 1.0) * g + p.l2 - g,
                d * (x2 - p.l1 - 1.0) + p.l1 + g,
            ),
        )
        if out.ndim == 0:
            return float(x1), float(out)
        return np.asarray(x1, dtype=float).copy(), out

    def inverse(self, x1, x2):
        """Map a point of the physical domain back into the rescaled one."""
        self._check_membership(x1, x2, rescaled=False)
        p = self.params
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        g, d = p.gap, self.d_eps
        out = np.where(
            x2 <= p.l1 + g,
            (x2 - p.l1) / g + p.l1,
            np.where(
                x2 >= p.l2 - g,
                (x2 - p.l2 + g) / g + p.l2 - 1.0,
                (x2 - p.l1 - g) / d + p.l1 + 1.0,
            ),
        )
        if out.ndim == 0:
            return float(x1), float(out)
        return np.asarray(x1, dtype=float).copy(), out


def map_forward(m: RescaleMap, p: tuple[float, float]) -> tuple[float, float]:
    return m.forward(p[0], p[1])


def map_inverse(m: RescaleMap, p: tuple[float, float]) -> tuple[float, float]:
    return m.inverse(p[0], p[1])
