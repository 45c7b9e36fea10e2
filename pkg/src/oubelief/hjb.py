"""Monotone upwind finite-difference solver for the belief-state HJB equation.

After reversing time the PDE between observation dates reads

    dU/dt + H1(m, z, dU/dm) + H2(m, z, dU/dz) = 0,
    H1(m, z, p) = -m^2 + theta*m*p + p^2/(4C),
    H2(m, z, q) = -z - (b^2 - 2*theta*z)*q,

and is discretized explicitly on a uniform (m, z) grid with Godunov-type
numerical Hamiltonians built from one-sided differences.  H1 is convex in p
with sonic point p0 = -2*C*theta*m, so the flux switches between the left
and right difference around p0; H2 is linear in q and plainly upwinded on
the sign of the advection speed b^2 - 2*theta*z.

No boundary condition is imposed: on the recommended domain the
characteristics flow outward, so where the upwind selection asks for a
one-sided difference that does not exist, the available one is substituted.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import ModelParams


class GridError(ValueError):
    """Malformed grid specification."""


class CflViolationError(RuntimeError):
    """The explicit step violated the monotonicity (CFL) condition."""

    def __init__(self, message, point=None, gradients=None):
        super().__init__(message)
        self.point = point
        self.gradients = gradients


@dataclass(frozen=True)
class Grid:
    """Uniform rectangular grid over belief means and variances."""

    m_min: float
    m_max: float
    z_min: float
    z_max: float
    n_m: int
    n_z: int

    def __post_init__(self):
        if not self.m_min < self.m_max:
            raise GridError(f"m_min < m_max required: [{self.m_min}, {self.m_max}]")
        if not self.z_min < self.z_max:
            raise GridError(f"z_min < z_max required: [{self.z_min}, {self.z_max}]")
        if self.z_min < 0:
            raise GridError(f"z_min >= 0 required, got {self.z_min}")
        if self.n_m < 2 or self.n_z < 2:
            raise GridError(f"need at least 2 points per axis, got {self.n_m}x{self.n_z}")

    @property
    def dm(self) -> float:
        return (self.m_max - self.m_min) / (self.n_m - 1)

    @property
    def dz(self) -> float:
        return (self.z_max - self.z_min) / (self.n_z - 1)

    @property
    def m_nodes(self) -> np.ndarray:
        return np.linspace(self.m_min, self.m_max, self.n_m)

    @property
    def z_nodes(self) -> np.ndarray:
        return np.linspace(self.z_min, self.z_max, self.n_z)

    def refined(self, factor: int = 2) -> "Grid":
        """Same box with every spacing divided by ``factor``."""
        return Grid(
            self.m_min,
            self.m_max,
            self.z_min,
            self.z_max,
            (self.n_m - 1) * factor + 1,
            (self.n_z - 1) * factor + 1,
        )


@dataclass(frozen=True)
class ValueField:
    """One time layer of the discretized value function, shape (n_m, n_z)."""

    grid: Grid
    time: float
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n_m, self.grid.n_z):
            raise GridError(
                f"values shape {v.shape} != grid shape "
                f"({self.grid.n_m}, {self.grid.n_z})"
            )
        if not np.all(np.isfinite(v)):
            raise GridError("non-finite value in field")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class SolverConfig:
    dt: float
    grad_bound: float | None = None  # a-priori |dU/dm| bound; None = runtime check
    check_monotonicity_each_step: bool = True

    def __post_init__(self):
        if not self.dt > 0:
            raise GridError(f"dt > 0 required, got {self.dt}")
        if self.grad_bound is not None and not self.grad_bound > 0:
            raise GridError(f"grad_bound > 0 required, got {self.grad_bound}")


def terminal_field(grid: Grid, horizon: float) -> ValueField:
    """Terminal layer U(T, m, z) = m^2 + z."""
    mm, zz = np.meshgrid(grid.m_nodes, grid.z_nodes, indexing="ij")
    return ValueField(grid=grid, time=horizon, values=mm * mm + zz)


def hamiltonian_m(m, z, p, params: ModelParams):
    """Time-reversed mean-direction Hamiltonian H1(m, z, p)."""
    return -(m * m) + params.theta * m * p + p * p / (4.0 * params.c_control)


def hamiltonian_z(m, z, q, params: ModelParams):
    """Time-reversed variance-direction Hamiltonian H2(m, z, q)."""
    return -z - (params.b**2 - 2.0 * params.theta * z) * q


def _one_sided_arrays(values: np.ndarray, dm: float, dz: float):
    """One-sided difference arrays with the outward-pointing edge difference
    replaced by the available interior one."""
    d_minus_m = np.empty_like(values)
    d_plus_m = np.empty_like(values)
    d_minus_m[1:, :] = (values[1:, :] - values[:-1, :]) / dm
    d_plus_m[:-1, :] = d_minus_m[1:, :]
    d_minus_m[0, :] = d_plus_m[0, :]
    d_plus_m[-1, :] = d_minus_m[-1, :]

    d_minus_z = np.empty_like(values)
    d_plus_z = np.empty_like(values)
    d_minus_z[:, 1:] = (values[:, 1:] - values[:, :-1]) / dz
    d_plus_z[:, :-1] = d_minus_z[:, 1:]
    d_minus_z[:, 0] = d_plus_z[:, 0]
    d_plus_z[:, -1] = d_minus_z[:, -1]
    return d_minus_m, d_plus_m, d_minus_z, d_plus_z


def one_sided_differences(field: ValueField, i: int, j: int):
    """(D-_m, D+_m, D-_z, D+_z) at grid point (i, j).

    At a boundary the missing one-sided difference is replaced by the
    available one, matching the solver's upwind substitution rule.
    """
    g = field.grid
    if not (0 <= i < g.n_m and 0 <= j < g.n_z):
        raise GridError(f"index ({i}, {j}) outside grid {g.n_m}x{g.n_z}")
    dmm, dpm, dmz, dpz = _one_sided_arrays(field.values, g.dm, g.dz)
    return (
        float(dmm[i, j]),
        float(dpm[i, j]),
        float(dmz[i, j]),
        float(dpz[i, j]),
    )


def numerical_hamiltonian_m(m, z, d_minus, d_plus, params: ModelParams):
    """Godunov-type flux for H1, branching at the sonic point -2*C*theta*m.

    Works elementwise on arrays as well as on scalars.
    """
    p0 = -2.0 * params.c_control * params.theta * np.asarray(m, dtype=float)
    d_minus = np.asarray(d_minus, dtype=float)
    d_plus = np.asarray(d_plus, dtype=float)
    h_minus = hamiltonian_m(m, z, d_minus, params)
    h_plus = hamiltonian_m(m, z, d_plus, params)
    h_sonic = hamiltonian_m(m, z, p0, params)
    both_ge = (d_minus >= p0) & (d_plus >= p0)
    both_le = (d_minus <= p0) & (d_plus <= p0)
    straddle_out = (d_minus >= p0) & (d_plus <= p0)  # both branches active
    out = np.where(
        both_ge,
        h_minus,
        np.where(
            both_le,
            h_plus,
            np.where(straddle_out, h_plus + h_minus - h_sonic, h_sonic),
        ),
    )
    if out.ndim == 0:
        return float(out)
    return out


def numerical_hamiltonian_z(m, z, d_minus, d_plus, params: ModelParams):
    """Upwind flux for H2: use D+ where b^2 - 2*theta*z >= 0, else D-."""
    speed = params.b**2 - 2.0 * params.theta * np.asarray(z, dtype=float)
    q = np.where(speed >= 0.0, d_plus, d_minus)
    out = -np.asarray(z, dtype=float) - speed * q
    if out.ndim == 0:
        return float(out)
    return out


def _realized_cfl_slack(grid: Grid, params: ModelParams, dt: float, d_minus_m, d_plus_m):
    """Pointwise monotonicity slack with the realized one-sided m-gradients."""
    th, b, c = params.theta, params.b, params.c_control
    mm = grid.m_nodes[:, None]
    zz = grid.z_nodes[None, :]
    dh1 = np.maximum(
        np.abs(th * mm + d_minus_m / (2.0 * c)),
        np.abs(th * mm + d_plus_m / (2.0 * c)),
    )
    dh2 = np.abs(2.0 * th * zz - b * b)
    return 1.0 - 2.0 * (dt / grid.dm) * dh1 - (dt / grid.dz) * dh2


def step_backward(field: ValueField, params: ModelParams, config: SolverConfig) -> ValueField:
    """One explicit step away from the horizon: U <- U - dt*(H1_num + H2_num).

    The returned layer sits dt earlier in physical time.  With per-step
    checking enabled, the monotonicity condition is verified against the
    realized one-sided differences (or the configured a-priori bound) and a
    violation raises CflViolationError carrying the worst point.
    """
    g = field.grid
    dt = config.dt
    dmm, dpm, dmz, dpz = _one_sided_arrays(field.values, g.dm, g.dz)

    if config.check_monotonicity_each_step:
        if config.grad_bound is not None:
            L = config.grad_bound
            slack = _realized_cfl_slack(
                g, params, dt, np.full_like(dmm, -L), np.full_like(dpm, L)
            )
        else:
            slack = _realized_cfl_slack(g, params, dt, dmm, dpm)
        worst = np.unravel_index(np.argmin(slack), slack.shape)
        if slack[worst] < 0.0:
            i, j = int(worst[0]), int(worst[1])
            raise CflViolationError(
                f"monotonicity condition violated at layer t={field.time:.6g}, "
                f"point (m={g.m_nodes[i]:.6g}, z={g.z_nodes[j]:.6g}), "
                f"slack={slack[worst]:.3e}",
                point=(i, j),
                gradients=(dmm[i, j], dpm[i, j], dmz[i, j], dpz[i, j]),
            )

    mm = g.m_nodes[:, None]
    zz = g.z_nodes[None, :]
    flux = numerical_hamiltonian_m(mm, zz, dmm, dpm, params) + numerical_hamiltonian_z(
        mm, zz, dmz, dpz, params
    )
    new_values = field.values - dt * flux
    return ValueField(grid=g, time=field.time - dt, values=new_values)


@dataclass(frozen=True)
class MonotonicityReport:
    holds: bool
    margin: float
    worst_point: tuple  # (i, j) grid indices

    def describe(self, grid: Grid) -> str:
        i, j = self.worst_point
        status = "holds" if self.holds else "VIOLATED"
        return (
            f"monotonicity condition {status}: worst slack {self.margin:.6e} "
            f"at (m={grid.m_nodes[i]:.6g}, z={grid.z_nodes[j]:.6g})"
        )


def check_monotonicity(
    grid: Grid, params: ModelParams, dt: float, L: float
) -> MonotonicityReport:
    """Evaluate the explicit-scheme monotonicity condition over the grid.

    Uses the flux derivative bounds dH1/dp = theta*m + p/(2C) with |p| <= L
    and dH2/dq = 2*theta*z - b^2, and reports the minimum of

        1 - 2*(dt/dm)*sup|dH1/dp| - (dt/dz)*|dH2/dq|.
    """
    if not L > 0:
        raise GridError(f"L > 0 required, got {L}")
    th, c = params.theta, params.c_control
    mm = grid.m_nodes[:, None]
    zz = grid.z_nodes[None, :]
    dh1 = th * np.abs(mm) + L / (2.0 * c) + 0.0 * zz  # sup over |p| <= L
    dh2 = np.abs(2.0 * th * zz - params.b**2) + 0.0 * mm
    slack = 1.0 - 2.0 * (dt / grid.dm) * dh1 - (dt / grid.dz) * dh2
    worst = np.unravel_index(np.argmin(slack), slack.shape)
    margin = float(slack[worst])
    return MonotonicityReport(
        holds=margin >= 0.0, margin=margin, worst_point=(int(worst[0]), int(worst[1]))
    )


def solve_between_observations(
    terminal_layer: ValueField,
    t_start: float,
    t_end: float,
    params: ModelParams,
    config: SolverConfig,
) -> list:
    """March the scheme from the layer at t_end down to t_start.

    Returns all layers in ascending time order; the last entry is the input
    layer.  The interval must be an integer number of dt steps (tol 1e-9).
    """
    if t_start > t_end:
        raise GridError(f"t_start {t_start} > t_end {t_end}")
    span = t_end - t_start
    n = int(round(span / config.dt))
    if abs(n * config.dt - span) > 1e-9:
        raise GridError(
            f"interval [{t_start}, {t_end}] is not a whole number of dt={config.dt} steps"
        )
    layers = [terminal_layer]
    for _ in range(n):
        layers.append(step_backward(layers[-1], params, config))
    layers.reverse()
    return layers
