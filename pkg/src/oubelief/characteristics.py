"""Closed-form characteristic curves of the time-reversed HJB equation.

The first-order part of the reversed-time PDE propagates information along
the ODE system (tau is the characteristic parameter, p and q the co-states
conjugate to m and z)

    dm/dtau = theta*m + p/(2C),
    dz/dtau = -(b^2 - 2*theta*z),
    dp/dtau = 2*m - theta*p,
    dq/dtau = 1 - 2*theta*q,

which solves in closed form with exponentials of rates 2*theta and
lam = sqrt(theta^2 + 1/C).  The z-curves diverge from the fixed point
b^2/(2*theta) and the m-curves from m = 0, so any computational box
containing both points has purely outflowing characteristics; that is the
domain-validity check used to justify truncation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .hjb import Grid
from .model import ModelParams


@dataclass(frozen=True)
class CharacteristicConstants:
    """Integration constants of the closed-form characteristic solution."""

    c1: float
    c2: float
    c3: float
    c4: float


@dataclass(frozen=True)
class CharacteristicState:
    """Point (m, z) and co-states (p, q) on a characteristic at parameter tau."""

    m: float
    z: float
    p: float
    q: float


def _lam(params: ModelParams) -> float:
    return math.sqrt(params.theta**2 + 1.0 / params.c_control)


def characteristic_constants(
    m0: float, z0: float, p0: float, q0: float, params: ModelParams
) -> CharacteristicConstants:
    """Constants fixed by the curve's root point and initial co-states."""
    th = params.theta
    lam = _lam(params)
    c1 = z0 - params.stationary_variance
    c2 = q0 - 1.0 / (2.0 * th)
    c4 = ((th + lam) / 2.0 * p0 - m0) / lam
    c3 = p0 - c4
    return CharacteristicConstants(c1=c1, c2=c2, c3=c3, c4=c4)


def characteristic_state(
    consts: CharacteristicConstants, tau: float, params: ModelParams
) -> CharacteristicState:
    """Evaluate the closed-form characteristic at parameter tau."""
    th = params.theta
    lam = _lam(params)
    e_plus = math.exp(lam * tau)
    e_minus = math.exp(-lam * tau)
    z = params.stationary_variance + consts.c1 * math.exp(2.0 * th * tau)
    q = 1.0 / (2.0 * th) + consts.c2 * math.exp(-2.0 * th * tau)
    p = consts.c3 * e_plus + consts.c4 * e_minus
    m = (th + lam) * consts.c3 / 2.0 * e_plus + (th - lam) * consts.c4 / 2.0 * e_minus
    return CharacteristicState(m=m, z=z, p=p, q=q)


def characteristic_rhs(state: CharacteristicState, params: ModelParams):
    """Right-hand side of the characteristic ODE system (for oracle checks)."""
    th, b, c = params.theta, params.b, params.c_control
    return (
        th * state.m + state.p / (2.0 * c),
        -(b * b - 2.0 * th * state.z),
        2.0 * state.m - th * state.p,
        1.0 - 2.0 * th * state.q,
    )


@dataclass(frozen=True)
class DomainReport:
    valid: bool
    reasons: tuple


def validate_domain(grid: Grid, params: ModelParams) -> DomainReport:
    """Check that the grid box has purely outflowing characteristics.

    Requires m_min < 0 < m_max and z_min <= b^2/(2*theta) <= z_max, so both
    divergence centers lie inside the box.
    """
    reasons = []
    if not grid.m_min < 0.0 < grid.m_max:
        reasons.append(
            f"0 not inside (m_min, m_max) = ({grid.m_min}, {grid.m_max})"
        )
    zstar = params.stationary_variance
    if not grid.z_min <= zstar <= grid.z_max:
        reasons.append(
            f"variance fixed point b^2/(2*theta) = {zstar} outside "
            f"[z_min, z_max] = [{grid.z_min}, {grid.z_max}]"
        )
    return DomainReport(valid=not reasons, reasons=tuple(reasons))
