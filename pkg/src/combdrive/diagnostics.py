"""Scalar diagnostics of a solved potential: forces, energies, norms.

The longitudinal electrostatic force on the rotor is evaluated two ways.

* ``force_volume``: the exact volume reformulation.  With the rescaled
  solution ``u`` and an admissible oscillated blend ``w_eps``, the scaled
  force integral equals

      eps^(2*alpha) * [  I(C1 u C3; eps^(-2*alpha))  +  I(C2; 1/d_eps^2) ],

  where on each subregion

      I = int -dw/dx2 * (|du/dx1|^2 - kappa |du/dx2|^2)
              + 2 du/dx2 * dw/dx1 * du/dx1  dx.

  This is the primary force path (robust: no boundary gradients needed).
* ``force_boundary``: direct integration of |eps^alpha grad u|^2 nu_2 over
  the horizontal rotor faces of the physical mesh, with one-sided
  Richardson-combined normal-derivative recovery.  Diagnostic only: the
  reentrant finger corners limit its accuracy.

The physical force in newtons per unit depth is
``-(epsilon0 / 2) * V^2`` times the scaled integral.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .cutoff import CutoffSpec, evaluate_oscillated
from .geometry import RescaleMap, Region, Tag
from .params import CombParams
from .quadrature import cell_gauss, cell_values_at_gauss, region_cells
from .solver import DiscreteField

VACUUM_PERMITTIVITY = 8.8541878128e-12  # F/m


class ForceMethod(Enum):
    VOLUME = "volume"
    BOUNDARY = "boundary"


@dataclass(frozen=True)
class ForceResult:
    scaled_integral: float      # dimensionless force integral
    physical_force: float       # -(eps0/2) V^2 * scaled_integral  [N/m]
    method: ForceMethod
    epsilon0: float
    voltage: float


def _package(scaled: float, method: ForceMethod, epsilon0: float, voltage: float):
    scaled = float(scaled)
    return ForceResult(
        scaled_integral=scaled,
        physical_force=-0.5 * epsilon0 * voltage * voltage * scaled,
        method=method,
        epsilon0=epsilon0,
        voltage=voltage,
    )


def force_volume(field: DiscreteField, spec: CutoffSpec, params: CombParams,
                 epsilon0: float = VACUUM_PERMITTIVITY,
                 voltage: float = 1.0) -> ForceResult:
    """Volume form of the scaled force integral (rescaled-domain field)."""
    mesh = field.mesh
    if mesh.domain.kind != "rescaled":
        raise ValueError("force_volume needs the rescaled-domain field")
    if spec.params != params:
        raise ValueError("cutoff is bound to different parameters")
    eps, alpha = params.epsilon, params.alpha
    ga = eps ** alpha
    d = RescaleMap(params).d_eps

    total = 0.0
    for region, kappa_scaled in (
        (Region.C1, None), (Region.C3, None), (Region.C2, d),
    ):
        ci, cj = region_cells(mesh, region)
        if ci.size == 0:
            continue
        gx, gy, xg, yg, w = cell_gauss(mesh, field.values, ci, cj)
        _, w_x1, w_x2 = evaluate_oscillated(spec, xg, yg, eps)
        if kappa_scaled is None:
            # gap layers: eps^(2a) * (-w_x2 (gx^2 - eps^(-2a) gy^2) + 2 gy w_x1 gx)
            term = -w_x2 * ((ga * gx) ** 2 - gy ** 2) \
                + 2.0 * ga * ga * gy * w_x1 * gx
        else:
            # middle: eps^(2a) * (-w_x2 (gx^2 - gy^2/d^2) + 2 gy w_x1 gx)
            term = -w_x2 * ((ga * gx) ** 2 - (ga * gy / d) ** 2) \
                + 2.0 * ga * ga * gy * w_x1 * gx
        total += float(np.sum(w * term))
    return _package(total, ForceMethod.VOLUME, epsilon0, voltage)


def force_boundary(field: DiscreteField, params: CombParams,
                   epsilon0: float = VACUUM_PERMITTIVITY,
                   voltage: float = 1.0) -> ForceResult:
    """Boundary form over the horizontal rotor faces (physical-domain field).

    Vertical rotor faces carry nu_2 = 0 and drop out.  On each horizontal
    face the vacuum lies below; the normal derivative is recovered from the
    face value and two interior samples at depths h1/2 and h1 + h2/2,
    combined to cancel the leading one-sided error term.
    """
    mesh = field.mesh
    if mesh.domain.kind != "physical":
        raise ValueError("force_boundary needs the physical-domain field")
    vals = field.values
    x1, x2 = mesh.x1, mesh.x2
    ny1 = x2.size
    total = 0.0
    from .quadrature import GAUSS_1D

    for orient, i, j_edge, sign, tag in mesh.faces:
        if orient != "h" or tag != Tag.DIRICHLET_ROTOR:
            continue
        if sign != 1.0:
            raise ValueError("rotor horizontal face with vacuum above: "
                             "unexpected geometry")
        a = x1[i + 1] - x1[i]
        # two cells below the face
        j_top = j_edge - 1
        if j_top < 1 or not mesh.active[i, j_top] or not mesh.active[i, j_top - 1]:
            raise ValueError("need two active cells below each rotor face")
        h1 = x2[j_edge] - x2[j_top]
        h2 = x2[j_top] - x2[j_top - 1]
        d1 = 0.5 * h1
        d2 = h1 + 0.5 * h2

        n_sw = i * ny1
        v_left = vals[n_sw + j_edge]
        v_right = vals[n_sw + ny1 + j_edge]
        ut = (v_right - v_left) / a

        for s in GAUSS_1D:
            uf = v_left * (1.0 - s) + v_right * s
            u1 = _bilinear_at(mesh, vals, i, j_top, s, 0.5)
            u2 = _bilinear_at(mesh, vals, i, j_top - 1, s, 0.5)
            D1 = (uf - u1) / d1
            D2 = (uf - u2) / d2
            un = (D1 * d2 - D2 * d1) / (d2 - d1)
            total += 0.5 * a * (un * un + ut * ut) * sign
    scale = params.epsilon ** (2.0 * params.alpha)
    return _package(scale * total, ForceMethod.BOUNDARY, epsilon0, voltage)


def _bilinear_at(mesh, vals, ci, cj, s, t):
    ny1 = mesh.x2.size
    sw = ci * ny1 + cj
    se = sw + ny1
    return (
        vals[sw] * (1.0 - s) * (1.0 - t)
        + vals[se] * s * (1.0 - t)
        + vals[se + 1] * s * t
        + vals[sw + 1] * (1.0 - s) * t
    )


@dataclass(frozen=True)
class NormReport:
    """Scaled-gradient and field norms tracked across a sweep.

    All entries are plain L2 norms (not squared); ``energy`` is the scaled
    quadratic energy whose small-period limit is closed-form.
    """

    eps_dx1_c13: float      # || eps^a du/dx1 ||  on the gap layers
    dx2_c13: float          # || du/dx2 ||        on the gap layers
    grad_c2: float          # || eps^(a/2) grad u || on the middle
    phi: float              # || u ||  on the whole rescaled vacuum
    phi_c2_scaled: float    # || eps^((a-2)/2) u ||  on the middle
    energy: float

    def as_dict(self) -> dict:
        return {
            "norm_eps_dx1_c13": self.eps_dx1_c13,
            "norm_dx2_c13": self.dx2_c13,
            "norm_grad_c2": self.grad_c2,
            "norm_phi": self.phi,
            "norm_phi_c2_scaled": self.phi_c2_scaled,
            "energy": self.energy,
        }


def apriori_norms(field: DiscreteField, params: CombParams) -> NormReport:
    """Cell-wise Gauss evaluation of the tracked norms (rescaled field)."""
    mesh = field.mesh
    if mesh.domain.kind != "rescaled":
        raise ValueError("apriori_norms needs the rescaled-domain field")
    eps, alpha = params.epsilon, params.alpha
    ga = eps ** alpha
    gh = eps ** (alpha / 2.0)
    d = RescaleMap(params).d_eps

    sq_eps_dx1 = 0.0
    sq_dx2 = 0.0
    sq_grad_c2 = 0.0
    sq_phi = 0.0
    sq_phi_c2 = 0.0
    energy = 0.0
    for region in (Region.C1, Region.C2, Region.C3):
        ci, cj = region_cells(mesh, region)
        if ci.size == 0:
            continue
        gx, gy, _, _, w = cell_gauss(mesh, field.values, ci, cj)
        u = cell_values_at_gauss(mesh, field.values, ci, cj)
        sq_phi += float(np.sum(w * u * u))
        if region == Region.C2:
            sq_grad_c2 += float(np.sum(w * ((gh * gx) ** 2 + (gh * gy) ** 2)))
            sq_phi_c2 += float(np.sum(w * u * u))
            energy += float(np.sum(w * (d * (gh * gx) ** 2
                                        + (gh * gy) ** 2 / d)))
        else:
            sq_eps_dx1 += float(np.sum(w * (ga * gx) ** 2))
            sq_dx2 += float(np.sum(w * gy * gy))
            energy += float(np.sum(w * ((ga * gx) ** 2 + gy * gy)))
    c2_scale = eps ** (alpha - 2.0)
    return NormReport(
        eps_dx1_c13=float(np.sqrt(sq_eps_dx1)),
        dx2_c13=float(np.sqrt(sq_dx2)),
        grad_c2=float(np.sqrt(sq_grad_c2)),
        phi=float(np.sqrt(sq_phi)),
        phi_c2_scaled=float(np.sqrt(c2_scale * sq_phi_c2)),
        energy=energy,
    )
