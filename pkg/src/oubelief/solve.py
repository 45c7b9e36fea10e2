"""Interlaced backward solve: PDE steps between observations, jumps at them.

Starting from the terminal layer m^2 + z at the horizon, the solver marches
the monotone scheme backward through each inter-observation interval and
applies the Bayesian observation update at every interior observation time.
The full stack of layers is retained so paths can be simulated and slices
exported afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hjb import (
    Grid,
    GridError,
    SolverConfig,
    ValueField,
    solve_between_observations,
    terminal_field,
)
from .model import ModelParams
from .obs_update import QuadratureRule, apply_observation_update


@dataclass(frozen=True)
class ValueSolution:
    """Value function on the full time grid.

    times[n] = n*dt; layers[n] is the layer valid on [times[n], times[n+1]),
    i.e. at observation times the post-observation layer U(t_i, .).  The
    pre-observation layers U(t_i-, .) are kept separately, keyed by the time
    grid index of t_i.
    """

    params: ModelParams
    grid: Grid
    config: SolverConfig
    times: np.ndarray
    layers: list
    pre_jump: dict = field(default_factory=dict)

    def layer_at(self, t: float) -> ValueField:
        """Layer governing control at time t (right-continuous in t)."""
        n = int(round((t - self.times[0]) / self.config.dt))
        if abs(self.times[n] - t) > 1e-9:
            raise GridError(f"time {t} is not on the solver time grid")
        return self.layers[n]


def _aligned_index(t: float, dt: float, n_total: int) -> int:
    n = int(round(t / dt))
    if abs(n * dt - t) > 1e-9 or not 0 < n < n_total:
        raise GridError(
            f"observation time {t} does not align with the dt={dt} time grid"
        )
    return n


def solve_value_function(
    params: ModelParams,
    grid: Grid,
    config: SolverConfig,
    with_observations: bool = True,
    rule: QuadratureRule | None = None,
) -> ValueSolution:
    """Solve the belief-state HJB problem backward from the horizon.

    With observations disabled the result is the no-observation benchmark
    problem on the same grid (useful against the Riccati closed form).
    """
    n_total = int(round(params.horizon / config.dt))
    if abs(n_total * config.dt - params.horizon) > 1e-9:
        raise GridError(
            f"horizon {params.horizon} is not a whole number of dt={config.dt} steps"
        )
    times = np.arange(n_total + 1) * config.dt

    obs_times = list(params.obs_times) if with_observations else []
    obs_idx = [_aligned_index(t, config.dt, n_total) for t in obs_times]
    if with_observations and obs_times and rule is None:
        rule = QuadratureRule.gauss_hermite()

    layers: list = [None] * (n_total + 1)
    pre_jump: dict = {}

    boundaries = [0] + obs_idx + [n_total]
    current = terminal_field(grid, params.horizon)
    layers[n_total] = current
    for left, right in zip(reversed(boundaries[:-1]), reversed(boundaries[1:])):
        interval = solve_between_observations(
            current, times[left], times[right], params, config
        )
        for offset, lay in enumerate(interval[:-1]):
            layers[left + offset] = lay
        if left in obs_idx:
            # interval[0] is U(t_i, .): the post-observation layer
            layers[left] = interval[0]
            current = apply_observation_update(interval[0], params, rule)
            pre_jump[left] = ValueField(
                grid=grid, time=times[left], values=current.values
            )
        else:
            current = interval[0]
            layers[left] = current

    return ValueSolution(
        params=params,
        grid=grid,
        config=config,
        times=times,
        layers=layers,
        pre_jump=pre_jump,
    )
