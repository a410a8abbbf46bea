"""Admissible auxiliary blend functions for the volume force functional.

A blend ``w(y, x2)`` converts the boundary force integral into a volume
integral.  Admissibility: 1-periodic in y; equal to 1 on the rotor strip
``closure(omega_a) x [l1+1, l2]`` and 0 on the stator strip
``closure(omega_b) x [l1, l2-1]``; trace 1 on the top line ``x2 = l2`` and 0
on the bottom line ``x2 = l1``; values in [0, 1] with bounded gradient.

Construction is a separable blend

    w(y, x2) = A(y) * R1(x2) + (1 - A(y)) * R0(x2),

where ``A`` is a periodic profile equal to 1 on ``omega_a`` and 0 on
``omega_b`` (transitions inside the open gaps between the finger strips,
with a configurable margin), ``R1`` ramps 0 -> 1 across ``[l1, l1+1]`` and
stays 1 above, and ``R0`` is 0 below ``l2-1`` and ramps 0 -> 1 across
``[l2-1, l2]``.  All four plateau/trace conditions follow directly.

Two variants are provided so the blend-independence of the force can be
tested: piecewise-linear ramps (W^{1,inf}) and C^1 smoothstep ramps.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .params import CombParams


class Variant(Enum):
    TENSOR_LINEAR = "tensor_linear"
    TENSOR_SMOOTHSTEP = "tensor_smoothstep"


@dataclass(frozen=True)
class CutoffSpec:
    params: CombParams
    variant: Variant = Variant.TENSOR_LINEAR
    margin: float = 1.0   # fraction of each y-gap used by the transition

    def __post_init__(self):
        if not (0.0 < self.margin <= 1.0):
            raise ValueError("margin must lie in (0, 1]")


def _ramp(t, smooth: bool):
    t = np.clip(t, 0.0, 1.0)
    if smooth:
        return t * t * (3.0 - 2.0 * t)
    return t


def _dramp(t, smooth: bool):
    inside = (t > 0.0) & (t < 1.0)
    if smooth:
        return np.where(inside, 6.0 * t * (1.0 - t), 0.0)
    return np.where(inside, 1.0, 0.0)


def _y_profile(spec: CutoffSpec, y):
    """A(y), dA/dy: periodic, 1 on omega_a, 0 on omega_b."""
    p = spec.params
    smooth = spec.variant is Variant.TENSOR_SMOOTHSTEP
    y = np.asarray(y, dtype=float) % 1.0

    z1, z2, z3, z4 = p.zetas
    gap_down = z3 - z2                       # transition 1 -> 0
    gap_up = z1 + 1.0 - z4                   # wrap transition 0 -> 1
    d_down = 0.5 * (1.0 - spec.margin) * gap_down
    d_up = 0.5 * (1.0 - spec.margin) * gap_up
    w_down = gap_down - 2.0 * d_down
    w_up = gap_up - 2.0 * d_up

    A = np.zeros_like(y)
    dA = np.zeros_like(y)

    on_a = (y >= z1) & (y <= z2)
    A[on_a] = 1.0

    sel = (y > z2) & (y < z3)
    t = (z3 - d_down - y[sel]) / w_down
    A[sel] = _ramp(t, smooth)
    dA[sel] = -_dramp(t, smooth) / w_down

    # wrap-around gap (z4, 1) u [0, z1), parameterized from z4
    sel = y > z4
    t = (y[sel] - z4 - d_up) / w_up
    A[sel] = _ramp(t, smooth)
    dA[sel] = _dramp(t, smooth) / w_up
    sel = y < z1
    t = (y[sel] + 1.0 - z4 - d_up) / w_up
    A[sel] = _ramp(t, smooth)
    dA[sel] = _dramp(t, smooth) / w_up

    return A, dA


def _x2_ramps(spec: CutoffSpec, x2):
    """R1, R0 and their derivatives on [l1, l2]."""
    p = spec.params
    smooth = spec.variant is Variant.TENSOR_SMOOTHSTEP
    x2 = np.asarray(x2, dtype=float)
    t1 = x2 - p.l1            # bottom ramp across [l1, l1+1]
    t0 = x2 - (p.l2 - 1.0)    # top ramp across [l2-1, l2]
    return (_ramp(t1, smooth), _ramp(t0, smooth),
            _dramp(t1, smooth), _dramp(t0, smooth))


def evaluate(spec: CutoffSpec, y, x2):
    """Blend value at (y, x2); x2 must lie in [l1, l2]."""
    _check_range(spec, x2)
    A, _ = _y_profile(spec, y)
    r1, r0, _, _ = _x2_ramps(spec, x2)
    return A * r1 + (1.0 - A) * r0


def gradient(spec: CutoffSpec, y, x2):
    """(d/dy, d/dx2) of the blend at (y, x2)."""
    _check_range(spec, x2)
    A, dA = _y_profile(spec, y)
    r1, r0, dr1, dr0 = _x2_ramps(spec, x2)
    return dA * (r1 - r0), A * dr1 + (1.0 - A) * dr0


def evaluate_oscillated(spec: CutoffSpec, x1, x2, epsilon: float):
    """Value and gradient of the epsilon-oscillated blend w(x1/eps, x2).

    Chain rule: d/dx1 = (1/eps) * (dw/dy)(x1/eps, x2).
    """
    y = np.asarray(x1, dtype=float) / epsilon
    val = evaluate(spec, y, x2)
    dy, dx2 = gradient(spec, y, x2)
    return val, dy / epsilon, dx2


def _check_range(spec: CutoffSpec, x2):
    p = spec.params
    x2 = np.asarray(x2, dtype=float)
    tol = 1e-12 * max(p.L, p.l3)
    if np.any(x2 < p.l1 - tol) or np.any(x2 > p.l2 + tol):
        raise ValueError(f"x2 outside [{p.l1}, {p.l2}]")
