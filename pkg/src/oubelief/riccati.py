"""Closed-form value-function benchmarks via backward Riccati ODEs.

Two reference problems bracket the partially observed one:

* no observations at all -- the value is quadratic in the belief,
  zeta(t)*(m^2+z) + eta(t)*m^2 + xi(t), with coefficients solving a scalar
  Riccati system backward from T;
* perfect continuous observation -- the value is f(t)*x^2 + g(t) in the
  exactly known state x, with its own Riccati ODE and zero terminal cost.

Both systems are integrated with classical RK4; the quadrature states xi
and g are carried as extra ODE components so every coefficient shares the
same fourth-order accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ModelParams


def _rk4_backward(rhs, y_terminal, horizon: float, n_steps: int):
    """Integrate dy/dt = rhs(y) backward from t=T to t=0 with RK4.

    Returns (times ascending on [0, T], samples aligned with times).
    """
    if n_steps < 2:
        raise ValueError(f"n_steps >= 2 required, got {n_steps}")
    h = -horizon / n_steps
    times = np.linspace(0.0, horizon, n_steps + 1)
    out = np.empty((n_steps + 1, len(y_terminal)))
    y = np.asarray(y_terminal, dtype=float)
    out[-1] = y
    for k in range(n_steps, 0, -1):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * h * k1)
        k3 = rhs(y + 0.5 * h * k2)
        k4 = rhs(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[k - 1] = y
    return times, out


def _interp_coeff(times: np.ndarray, samples: np.ndarray, t: float) -> float:
    if t < times[0] - 1e-12 or t > times[-1] + 1e-12:
        raise ValueError(f"time {t} outside [{times[0]}, {times[-1]}]")
    return float(np.interp(t, times, samples))


@dataclass(frozen=True)
class RiccatiSolution:
    """Sampled coefficients of the no-observation value function."""

    times: np.ndarray
    zeta: np.ndarray
    eta: np.ndarray
    xi: np.ndarray


@dataclass(frozen=True)
class PerfectObsSolution:
    """Sampled coefficients f, g of the perfect-observation value function."""

    times: np.ndarray
    f: np.ndarray
    g: np.ndarray


def solve_no_obs_riccati(params: ModelParams, n_steps: int = 2000) -> RiccatiSolution:
    """Integrate the no-observation Riccati system backward from T.

    zeta' = 2*theta*zeta - 1                     zeta(T) = 1
    eta'  = 2*theta*eta + (zeta+eta)^2 / C       eta(T) = 0
    xi'   = -b^2 * zeta                          xi(T) = 0

    The eta equation is forced by the HJB equation itself: substituting the
    quadratic ansatz zeta*(m^2+z) + eta*m^2 + xi makes the m^2 balance read
    zeta' + eta' + 1 - 2*theta*(zeta+eta) - (zeta+eta)^2/C = 0.  (A commonly
    quoted variant with quadratic coefficient (C-1)/C^2, which makes eta
    vanish for C=1, does not solve the PDE and is not used here.)
    """
    th, b, c = params.theta, params.b, params.c_control

    def rhs(y):
        zeta, eta, xi = y
        return np.array(
            [
                2.0 * th * zeta - 1.0,
                2.0 * th * eta + (zeta + eta) ** 2 / c,
                -b * b * zeta,
            ]
        )

    times, out = _rk4_backward(rhs, (1.0, 0.0, 0.0), params.horizon, n_steps)
    return RiccatiSolution(times=times, zeta=out[:, 0], eta=out[:, 1], xi=out[:, 2])


def no_obs_value(sol: RiccatiSolution, t: float, belief) -> float:
    """Benchmark value zeta(t)*(m^2+z) + eta(t)*m^2 + xi(t)."""
    zeta = _interp_coeff(sol.times, sol.zeta, t)
    eta = _interp_coeff(sol.times, sol.eta, t)
    xi = _interp_coeff(sol.times, sol.xi, t)
    m, z = belief.mean, belief.variance
    return zeta * (m * m + z) + eta * m * m + xi


def solve_perfect_obs_riccati(
    params: ModelParams, n_steps: int = 2000
) -> PerfectObsSolution:
    """Integrate the perfect-observation Riccati ODE backward from T.

    f' = 2*theta*f + f^2/C - 1 with f(T) = 0, and g(t) = b^2 * int_t^T f,
    carried as the extra state g' = -b^2*f with g(T) = 0.
    """
    th, b, c = params.theta, params.b, params.c_control

    def rhs(y):
        f, g = y
        return np.array([2.0 * th * f + f * f / c - 1.0, -b * b * f])

    times, out = _rk4_backward(rhs, (0.0, 0.0), params.horizon, n_steps)
    return PerfectObsSolution(times=times, f=out[:, 0], g=out[:, 1])


def perfect_obs_value(sol: PerfectObsSolution, t: float, x: float) -> float:
    """Benchmark value f(t)*x^2 + g(t) for the exactly observed state x."""
    f = _interp_coeff(sol.times, sol.f, t)
    g = _interp_coeff(sol.times, sol.g, t)
    return f * x * x + g
