"""Simulation of optimal belief paths under a solved value function.

Between observations the belief mean follows the feedback-controlled drift
and the variance follows its deterministic ODE:

    dm* = (-theta*m* + a*(t, m*, z*)) dt,      a* = -(1/(2C)) dU/dm,
    dz* = (-2*theta*z* + b^2) dt,

integrated with forward Euler on the solver's time step.  At each
observation time a measurement Y ~ N(m*(t-), z*(t-) + eps^2) is drawn and
the belief is updated with the conjugate Gaussian formulas; the variance
path is deterministic (identical across seeds).

The published path dynamics use the drift -theta*m + dU/dm, which does not
match the Hamiltonian minimizer; control_mode="printed" reproduces that
variant verbatim, the default follows the minimizer.

Each trajectory draws from its own generator seeded by (base seed,
trajectory index), so runs are reproducible regardless of execution order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .model import GaussianBelief, ModelParams
from .obs_update import _field_eval
from .solve import ValueSolution


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class BeliefTrajectory:
    """One simulated optimal path of the belief (mean, variance).

    Observation times appear twice: the pre-update (t-) sample immediately
    followed by the post-update (t) sample.  ``controls`` holds the feedback
    control applied on [times[k], times[k+1]) (NaN on the duplicated jump
    rows and at the final time).  ``exited_at`` is the time at which the
    mean left the grid box, or None; past it the path is truncated.
    """

    times: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    controls: np.ndarray
    observations: np.ndarray
    seed: object
    exited_at: float | None = None


def _grad_m(solution: ValueSolution, layer, m, z: float):
    """Centered difference of the interpolated layer in m; one-sided when the
    probe stencil would leave the box."""
    g = solution.grid
    h = g.dm
    m = np.asarray(m, dtype=float)
    lo = np.maximum(m - h, g.m_min)
    hi = np.minimum(m + h, g.m_max)
    # keep a nonzero stencil even at the very edge
    width = np.where(hi - lo > 0, hi - lo, h)
    v_hi = _field_eval(layer, hi, z, "quadratic")
    v_lo = _field_eval(layer, lo, z, "quadratic")
    return (v_hi - v_lo) / width


def _simulate_batch(
    solution: ValueSolution,
    start: GaussianBelief,
    params: ModelParams,
    w_draws: np.ndarray,
    control_mode: str,
):
    """Vectorized forward simulation of n = w_draws.shape[0] paths.

    Returns (times, means, variances, controls, observations, exit_times);
    the per-path outputs have one row per output time (observation times
    duplicated as pre/post rows).
    """
    if control_mode not in ("hamiltonian", "printed"):
        raise SimulationError(f"unknown control_mode {control_mode!r}")
    g = solution.grid
    dt = solution.config.dt
    n_paths = w_draws.shape[0]
    obs_idx = sorted(solution.pre_jump) if solution.pre_jump else sorted(
        int(round(t / dt)) for t in params.obs_times
    )
    if w_draws.shape[1] < len(obs_idx):
        raise SimulationError(
            f"need {len(obs_idx)} observation draws per path, got {w_draws.shape[1]}"
        )
    if not (g.m_min <= start.mean <= g.m_max):
        raise SimulationError(f"start mean {start.mean} outside grid box")
    if not (g.z_min <= start.variance <= g.z_max):
        raise SimulationError(f"start variance {start.variance} outside grid box")

    n_steps = len(solution.times) - 1
    obs_set = set(obs_idx)
    n_out = n_steps + 1 + len(obs_idx)

    times = np.empty(n_out)
    means = np.empty((n_paths, n_out))
    variances = np.empty(n_out)  # deterministic, shared by all paths
    controls = np.full((n_paths, n_out), np.nan)
    observations = np.full((n_paths, len(obs_idx)), np.nan)
    exit_time = np.full(n_paths, np.nan)
    alive = np.ones(n_paths, dtype=bool)

    m = np.full(n_paths, float(start.mean))
    z = float(start.variance)
    row = 0
    obs_count = 0
    for k in range(n_steps + 1):
        t = solution.times[k]
        if k in obs_set:
            # pre-update sample at t-
            times[row] = t
            means[:, row] = m
            variances[row] = z
            row += 1
            w = w_draws[:, obs_count]
            y = m + np.sqrt(z + params.eps**2) * w
            denom = z + params.eps**2
            m = np.where(alive, m + (z / denom) * (y - m), m)
            observations[alive, obs_count] = y[alive]
            z = z * params.eps**2 / denom
            obs_count += 1
        times[row] = t
        means[:, row] = m
        variances[row] = z
        if k < n_steps:
            layer = solution.layers[k]
            grad = _grad_m(solution, layer, m, z)
            if control_mode == "hamiltonian":
                alpha = -grad / (2.0 * params.c_control)
            else:
                alpha = grad
            alpha = np.where(alive, alpha, 0.0)
            controls[alive, row] = alpha[alive]
            m_next = m + dt * (-params.theta * m + alpha)
            z = z + dt * (-2.0 * params.theta * z + params.b**2)
            exiting = alive & ((m_next < g.m_min) | (m_next > g.m_max))
            exit_time[exiting] = t + dt
            alive = alive & ~exiting
            m = np.where(alive, m_next, m)
        row += 1

    return times, means, variances, controls, observations, exit_time


def simulate_path(
    solution: ValueSolution,
    start: GaussianBelief,
    params: ModelParams,
    seed,
    control_mode: str = "hamiltonian",
) -> BeliefTrajectory:
    """Simulate one optimal belief path with its own seeded generator."""
    n_obs = max(len(params.obs_times), 1)
    rng = np.random.default_rng(seed)
    w = rng.standard_normal(n_obs)[None, :]
    times, means, variances, controls, observations, exit_time = _simulate_batch(
        solution, start, params, w, control_mode
    )
    exited = None if np.isnan(exit_time[0]) else float(exit_time[0])
    return BeliefTrajectory(
        times=times,
        means=means[0],
        variances=variances,
        controls=controls[0],
        observations=observations[0],
        seed=seed,
        exited_at=exited,
    )


def simulate_paths(
    solution: ValueSolution,
    start: GaussianBelief,
    params: ModelParams,
    n_paths: int,
    base_seed: int,
    control_mode: str = "hamiltonian",
    threads: int = 1,
) -> list:
    """Simulate n_paths trajectories with streams derived from the base seed.

    Path k uses generator seed (base_seed, k); results are independent of
    batching and thread count.
    """
    n_obs = max(len(params.obs_times), 1)
    w = np.empty((n_paths, n_obs))
    for k in range(n_paths):
        w[k] = np.random.default_rng((base_seed, k)).standard_normal(n_obs)

    def run_chunk(chunk):
        lo, hi = chunk
        out = _simulate_batch(solution, start, params, w[lo:hi], control_mode)
        return lo, out

    if threads > 1 and n_paths > 1:
        bounds = np.linspace(0, n_paths, threads + 1).astype(int)
        chunks = [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = sorted(pool.map(run_chunk, chunks))
    else:
        results = [run_chunk((0, n_paths))]

    trajectories = []
    for lo, (times, means, variances, controls, observations, exit_time) in results:
        for i in range(means.shape[0]):
            exited = None if np.isnan(exit_time[i]) else float(exit_time[i])
            trajectories.append(
                BeliefTrajectory(
                    times=times,
                    means=means[i],
                    variances=variances,
                    controls=controls[i],
                    observations=observations[i],
                    seed=(base_seed, lo + i),
                    exited_at=exited,
                )
            )
    return trajectories


def trajectory_cost(traj: BeliefTrajectory, params: ModelParams) -> float:
    """Realized cost: left-Riemann running cost plus terminal cost."""
    c = params.c_control
    total = 0.0
    for k in range(len(traj.times) - 1):
        step = traj.times[k + 1] - traj.times[k]
        if step <= 0:  # duplicated observation row
            continue
        alpha = traj.controls[k]
        if np.isnan(alpha):
            alpha = 0.0
        total += (traj.means[k] ** 2 + traj.variances[k] + c * alpha * alpha) * step
    total += traj.means[-1] ** 2 + traj.variances[-1]
    return total


def estimate_cost(trajectories, params: ModelParams):
    """Monte-Carlo (mean, standard error) of the realized cost."""
    if not trajectories:
        raise SimulationError("estimate_cost needs at least one trajectory")
    costs = np.array([trajectory_cost(tr, params) for tr in trajectories])
    mean = float(costs.mean())
    if len(costs) < 2:
        return mean, 0.0
    se = float(costs.std(ddof=1) / np.sqrt(len(costs)))
    return mean, se
