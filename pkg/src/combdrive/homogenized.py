"""Closed-form small-period limits: profiles, averages, energies, correctors.

Everything the solver output is tested against lives here.  The three limit
profiles are

* ``phi2(y)``: 1-periodic, 1 on the rotor strip, 0 on the stator strip,
  affine across the three channels (the middle-region cell profile);
* ``phi1(x2, y) = (x2 - l1)`` on the rotor strip, 0 elsewhere (bottom gap);
* ``phi3(x2, y) = (x2 + 1 - l2)`` on the stator strip, 1 elsewhere (top gap).

The limit of the scaled longitudinal force integral is
``L * (meas_omega_a + meas_omega_b)`` for every gap exponent alpha >= 2; the
limit energy carries an extra middle-region term only at alpha = 2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Region
from .params import CombParams, require_proven_regime
from .solver import DiscreteField
from .mesh import NodeClass
from .quadrature import cell_averages, cell_gauss, region_cells


@dataclass(frozen=True)
class LimitProfiles:
    """Vectorized evaluators of the three limit profiles."""

    params: CombParams

    def _frac(self, y):
        return np.asarray(y, dtype=float) % 1.0

    def in_omega_a(self, y):
        p = self.params
        f = self._frac(y)
        return (f >= p.zeta1) & (f < p.zeta2)

    def in_omega_b(self, y):
        p = self.params
        f = self._frac(y)
        return (f >= p.zeta3) & (f < p.zeta4)

    def phi2(self, y):
        p = self.params
        f = self._frac(y)
        z1, z2, z3, z4 = p.zetas
        wrap = z1 - z4 + 1.0
        out = np.empty_like(f)
        seg0 = f <= z1
        out[seg0] = (f[seg0] + 1.0 - z4) / wrap
        seg1 = (f > z1) & (f < z2)
        out[seg1] = 1.0
        seg2 = (f >= z2) & (f <= z3)
        out[seg2] = (f[seg2] - z3) / (z2 - z3)
        seg3 = (f > z3) & (f < z4)
        out[seg3] = 0.0
        seg4 = f >= z4
        out[seg4] = (f[seg4] - z4) / wrap
        return out

    def dphi2(self, y):
        p = self.params
        f = self._frac(y)
        z1, z2, z3, z4 = p.zetas
        out = np.zeros_like(f)
        out[(f < z1) | (f > z4)] = 1.0 / (z1 - z4 + 1.0)
        mid = (f > z2) & (f < z3)
        out[mid] = 1.0 / (z2 - z3)
        return out

    def phi1(self, x2, y):
        x2 = np.asarray(x2, dtype=float)
        return np.where(self.in_omega_a(y), x2 - self.params.l1, 0.0)

    def dphi1_dx2(self, y):
        return self.in_omega_a(y).astype(float)

    def phi3(self, x2, y):
        x2 = np.asarray(x2, dtype=float)
        return np.where(self.in_omega_b(y), x2 + 1.0 - self.params.l2, 1.0)

    def dphi3_dx2(self, y):
        return self.in_omega_b(y).astype(float)


def limit_force(params: CombParams) -> float:
    """Limit of the scaled force integral: L * (meas_omega_a + meas_omega_b)."""
    require_proven_regime(params)
    return params.L * (params.meas_omega_a + params.meas_omega_b)


def limit_energy(params: CombParams) -> float:
    """Limit of the scaled energy.

    The gap layers contribute ``L * (meas_omega_a + meas_omega_b)``; at
    alpha = 2 the middle region adds
    ``(l2 - l1) * L * (1/(zeta1 + 1 - zeta4) + 1/(zeta3 - zeta2))``,
    and for alpha > 2 the middle contribution vanishes.
    """
    require_proven_regime(params)
    base = params.L * (params.meas_omega_a + params.meas_omega_b)
    if params.alpha == 2.0:
        z1, z2, z3, z4 = params.zetas
        base += (params.l2 - params.l1) * params.L * (
            1.0 / (z1 + 1.0 - z4) + 1.0 / (z3 - z2)
        )
    return base


def limit_energy_quadrature(params: CombParams, samples: int = 4096) -> float:
    """Independent check of :func:`limit_energy` by 1D midpoint quadrature.

    Integrates |dphi2/dy|^2 over the channels and the squared gap-layer
    profile slopes over the finger strips, sampling each segment between
    profile breakpoints separately (the integrands are piecewise constant,
    so per-segment midpoint quadrature carries no discretization error).
    """
    require_proven_regime(params)
    prof = LimitProfiles(params)

    def integrate(f):
        cuts = np.array([0.0, *params.zetas, 1.0])
        total = 0.0
        for lo, hi in zip(cuts, cuts[1:]):
            if hi <= lo:
                continue
            y = lo + (hi - lo) * (np.arange(samples) + 0.5) / samples
            total += float(np.sum(f(y))) * (hi - lo) / samples
        return total

    # gap layers: |d phi1/dx2|^2 over omega_a and |d phi3/dx2|^2 over omega_b,
    # each integrated over a unit-height layer of length L
    gap = params.L * (integrate(lambda y: prof.dphi1_dx2(y) ** 2)
                      + integrate(lambda y: prof.dphi3_dx2(y) ** 2))
    if params.alpha > 2.0:
        return gap
    mid = integrate(lambda y: prof.dphi2(y) ** 2)
    mid *= (params.l2 - params.l1) / (params.l2 - params.l1 - 2.0)
    mid *= params.L * (params.l2 - params.l1 - 2.0)
    return gap + mid


@dataclass(frozen=True)
class WeakAverages:
    """Limits of plain means over the three regions."""

    mean_phi_c2: float        # middle-region mean (alpha-scaled field)
    mean_dx2_c1: float        # mean of d/dx2 over the bottom gap layer
    mean_dx2_c3: float        # mean of d/dx2 over the top gap layer

    def mean_phi_c1(self, x2, params: CombParams):
        return (np.asarray(x2) - params.l1) * params.meas_omega_a

    def mean_phi_c3(self, x2, params: CombParams):
        return (np.asarray(x2) - params.l2) * params.meas_omega_b + 1.0


def weak_averages(params: CombParams) -> WeakAverages:
    """Closed-form limit means; the middle-region mean is 0 for alpha > 2."""
    require_proven_regime(params)
    if params.alpha == 2.0:
        mean_c2 = 0.5 * (1.0 + params.meas_omega_a - params.meas_omega_b)
    else:
        mean_c2 = 0.0
    return WeakAverages(
        mean_phi_c2=mean_c2,
        mean_dx2_c1=params.meas_omega_a,
        mean_dx2_c3=params.meas_omega_b,
    )


@dataclass
class ExtendedField:
    """Field values on the full rectangle grid of one region.

    Electrode footprints are filled with the constant the material carries:
    1 inside rotor fingers, 0 inside stator fingers; vacuum nodes keep the
    solved values.
    """

    region: int
    values: np.ndarray      # (nx+1, rows) node values on the region subgrid
    x2: np.ndarray          # region breakpoints (rows)
    j0: int                 # first x2-node index of the region


ROTOR_INTERVAL = 1   # zeta-subinterval ids of the finger footprints
STATOR_INTERVAL = 3


def _region_rows(field: DiscreteField, region: int):
    mesh = field.mesh
    y_lo, y_hi, _ = mesh.domain.y_intervals[region - 1]
    j0 = int(np.searchsorted(mesh.x2, y_lo))
    j1 = int(np.searchsorted(mesh.x2, y_hi))
    return j0, j1


def extend(field: DiscreteField, region: int) -> ExtendedField:
    """Fill the electrode footprints of one region with their plate value."""
    mesh = field.mesh
    p = mesh.domain.params
    j0, j1 = _region_rows(field, region)
    vals = field.grid()[:, j0:j1 + 1].copy()

    unused = mesh.node_class[:, j0:j1 + 1] == int(NodeClass.UNUSED)
    frac = (mesh.x1 / p.epsilon) % 1.0
    in_a = (frac > p.zeta1) & (frac < p.zeta2)
    in_b = (frac > p.zeta3) & (frac < p.zeta4)
    fill = np.zeros_like(vals)
    fill[in_a, :] = 1.0
    bad = unused & ~(in_a | in_b)[:, None]
    if np.any(bad):
        raise ValueError("unused node outside any finger footprint")
    vals[unused] = fill[unused]
    return ExtendedField(region=region, values=vals,
                         x2=mesh.x2[j0:j1 + 1], j0=j0)


@dataclass(frozen=True)
class CorrectorNorms:
    """Squared L2 errors against the pulled-back limit profiles."""

    c1: float
    c2: float
    c3: float


def corrector_norms(field: DiscreteField, params: CombParams) -> CorrectorNorms:
    """Corrector mismatch integrals on the three rescaled subregions.

    Bottom/top gap layers compare d/dx2 against the oscillating indicator
    profile and penalize the scaled d/dx1; the middle region compares the
    scaled d/dx1 against the cell-profile slope (alpha = 2 only; for
    alpha > 2 the middle term is the plain scaled gradient seminorm).
    """
    require_proven_regime(params)
    mesh = field.mesh
    if mesh.domain.kind != "rescaled":
        raise ValueError("corrector norms need a rescaled-domain field")
    prof = LimitProfiles(params)
    eps, alpha = params.epsilon, params.alpha
    ga = eps ** alpha
    gh = eps ** (alpha / 2.0)

    out = {}
    for region in (Region.C1, Region.C2, Region.C3):
        ci, cj = region_cells(mesh, region)
        if ci.size == 0:
            out[region] = 0.0
            continue
        gx, gy, xg, _, w = cell_gauss(mesh, field.values, ci, cj)
        y = xg / eps
        if region == Region.C1:
            t = gy - prof.dphi1_dx2(y)
            out[region] = float(np.sum(w * ((ga * gx) ** 2 + t * t)))
        elif region == Region.C3:
            t = gy - prof.dphi3_dx2(y)
            out[region] = float(np.sum(w * ((ga * gx) ** 2 + t * t)))
        else:
            tx = gh * gx
            if alpha == 2.0:
                tx = tx - prof.dphi2(y)
            out[region] = float(np.sum(w * (tx * tx + (gh * gy) ** 2)))
    return CorrectorNorms(c1=out[Region.C1], c2=out[Region.C2], c3=out[Region.C3])


@dataclass(frozen=True)
class DiscreteAverages:
    """Mesh-weighted means of the extended fields, mirroring WeakAverages."""

    mean_phi_c2: float
    mean_dx2_c1: float
    mean_dx2_c3: float


def discrete_weak_averages(field: DiscreteField, params: CombParams) -> DiscreteAverages:
    """Plain means over the full region rectangles.

    The middle-region mean carries the alpha-dependent scaling
    ``eps^((alpha-2)/2)`` (identity at alpha = 2) so its limit is the
    closed-form middle mean for alpha = 2 and zero for alpha > 2.
    """
    mesh = field.mesh
    if mesh.domain.kind != "rescaled":
        raise ValueError("weak averages need a rescaled-domain field")
    p = params
    y_int = mesh.domain.y_intervals
    heights = {i + 1: (hi - lo) for i, (lo, hi, _) in enumerate(y_int)}

    # middle mean: solved cells by quadrature-exact corner averages,
    # footprint cells by their constant plate value
    ci, cj = region_cells(mesh, Region.C2, active_only=True)
    int_phi = float(np.sum(cell_averages(mesh, field.values, ci, cj)))
    ii, jj = region_cells(mesh, Region.C2, active_only=False)
    inactive = ~mesh.active[ii, jj]
    rot = inactive & (mesh.col_interval[ii] == ROTOR_INTERVAL)
    cell_area = mesh.dx1[ii] * mesh.dx2[jj]
    int_phi += float(np.sum(cell_area[rot]))  # stator cells contribute 0
    scale = p.epsilon ** ((p.alpha - 2.0) / 2.0)
    mean_c2 = scale * int_phi / (p.L * heights[2])

    means_dx2 = {}
    for region in (Region.C1, Region.C3):
        ci, cj = region_cells(mesh, region)
        if ci.size == 0:
            means_dx2[region] = 0.0
            continue
        _, gy, _, _, w = cell_gauss(mesh, field.values, ci, cj)
        means_dx2[region] = float(np.sum(w * gy)) / (p.L * heights[int(region)])

    return DiscreteAverages(
        mean_phi_c2=mean_c2,
        mean_dx2_c1=means_dx2[Region.C1],
        mean_dx2_c3=means_dx2[Region.C3],
    )
