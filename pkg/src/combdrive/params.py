"""Admissible comb-drive parameter sets and their validation."""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class CombParams:
    """One comb-drive configuration.

    ``zeta1 < zeta2 < zeta3 < zeta4`` are the dimensionless wall positions of
    the two finger families inside a unit period: the rotor finger occupies
    ``(zeta1, zeta2)``, the stator finger ``(zeta3, zeta4)``.  ``L`` is the
    comb length, ``l1 < l2 < l3`` the vertical levels (stator backbone top,
    rotor backbone bottom, rotor backbone top), ``alpha`` the gap exponent
    (electrode gap = epsilon**alpha), and ``n`` the number of finger periods,
    so the period is ``epsilon = L / n``.

    ``l3`` only fixes the solid rotor backbone above ``l2``; the vacuum, and
    hence every solve, lives in ``l1 < x2 < l2``.
    """

    zeta1: float
    zeta2: float
    zeta3: float
    zeta4: float
    L: float
    l1: float
    l2: float
    l3: float
    alpha: float
    n: int

    @property
    def epsilon(self) -> float:
        return self.L / self.n

    @property
    def gap(self) -> float:
        """Electrode gap thickness epsilon**alpha."""
        return self.epsilon ** self.alpha

    @property
    def meas_omega_a(self) -> float:
        """Width of the rotor finger cross-section, zeta2 - zeta1."""
        return self.zeta2 - self.zeta1

    @property
    def meas_omega_b(self) -> float:
        """Width of the stator finger cross-section, zeta4 - zeta3."""
        return self.zeta4 - self.zeta3

    @property
    def zetas(self) -> tuple[float, float, float, float]:
        return (self.zeta1, self.zeta2, self.zeta3, self.zeta4)

    @property
    def outside_proven_regime(self) -> bool:
        """Exponents below 2 are accepted for exploratory solves only."""
        return self.alpha < 2.0

    def with_n(self, n: int) -> "CombParams":
        return replace(self, n=int(n))

    def with_alpha(self, alpha: float) -> "CombParams":
        return replace(self, alpha=float(alpha))


def validate(params: CombParams) -> list[str]:
    """Return every violated admissibility condition (empty when valid).

    Validation never raises; callers that must reject invalid input wrap the
    result in :class:`InvalidParamsError`.
    """
    v = []
    z1, z2, z3, z4 = params.zetas
    if not (0.0 < z1):
        v.append("0 < zeta1 violated")
    if not (z1 < z2):
        v.append("zeta1 < zeta2 violated")
    if not (z2 < z3):
        v.append("zeta2 < zeta3 violated")
    if not (z3 < z4):
        v.append("zeta3 < zeta4 violated")
    if not (z4 < 1.0):
        v.append("zeta4 < 1 violated")
    if not (params.L > 0.0):
        v.append("L > 0 violated")
    if not (params.l1 > 0.0):
        v.append("l1 > 0 violated")
    if not (params.l1 + 2.0 < params.l2):
        v.append("l1+2 < l2 violated")
    if not (params.l2 < params.l3):
        v.append("l2 < l3 violated")
    if not (params.alpha >= 0.0):
        v.append("alpha >= 0 violated")
    if not (isinstance(params.n, int) and params.n >= 1):
        v.append("n must be a positive integer")
    return v


class InvalidParamsError(ValueError):
    """Raised by pipelines when handed inadmissible parameters."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("invalid parameters: " + "; ".join(violations))


def require_valid(params: CombParams) -> None:
    violations = validate(params)
    if violations:
        raise InvalidParamsError(violations)


class OutsideProvenRegimeError(ValueError):
    """Limit formulas are only available for gap exponents alpha >= 2."""


def require_proven_regime(params: CombParams) -> None:
    if params.outside_proven_regime:
        raise OutsideProvenRegimeError(
            f"alpha = {params.alpha} is outside the proven regime (alpha >= 2); "
            "closed-form limits are not available"
        )
