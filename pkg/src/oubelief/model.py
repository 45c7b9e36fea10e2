"""Scalar model parameters, Gaussian belief states, and closed-form control primitives.

The controlled state is a one-dimensional mean-reverting diffusion

    dX_t = (-theta * X_t + alpha_t) dt + b dW_t,

observed at discrete times through additive Gaussian noise of standard
deviation ``eps``.  Conditional on past observations the state stays
Gaussian, so a belief is just a (mean, variance) pair.  Everything in this
module is a pure function of value types.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


class ModelError(ValueError):
    """Invalid model parameters or belief state."""


@dataclass(frozen=True)
class ModelParams:
    """Constants of the scalar control problem.

    theta      mean-reversion rate (> 0)
    b          diffusion coefficient (> 0)
    c_control  quadratic control cost weight (> 0)
    eps        observation noise standard deviation (>= 0)
    horizon    terminal time T (> 0)
    obs_times  strictly increasing observation times, all inside (0, T)
    """

    theta: float
    b: float
    c_control: float
    eps: float
    horizon: float
    obs_times: tuple = field(default=())

    def __post_init__(self):
        if not self.theta > 0:
            raise ModelError(f"theta > 0 required, got {self.theta}")
        if not self.b > 0:
            raise ModelError(f"b > 0 required, got {self.b}")
        if not self.c_control > 0:
            raise ModelError(f"c_control > 0 required, got {self.c_control}")
        if not self.eps >= 0:
            raise ModelError(f"eps >= 0 required, got {self.eps}")
        if not self.horizon > 0:
            raise ModelError(f"horizon > 0 required, got {self.horizon}")
        ts = tuple(float(t) for t in self.obs_times)
        object.__setattr__(self, "obs_times", ts)
        for a, c in zip(ts, ts[1:]):
            if not a < c:
                raise ModelError(f"obs_times must be strictly increasing, got {ts}")
        for t in ts:
            if not 0.0 < t < self.horizon:
                raise ModelError(
                    f"observation time {t} outside (0, {self.horizon})"
                )

    @property
    def stationary_variance(self) -> float:
        """Fixed point b^2/(2 theta) of the uncontrolled variance flow."""
        return self.b * self.b / (2.0 * self.theta)


@dataclass(frozen=True)
class GaussianBelief:
    """Belief state N(mean, variance) over the unobserved scalar state."""

    mean: float
    variance: float

    def __post_init__(self):
        if not self.variance >= 0:
            raise ModelError(f"variance >= 0 required, got {self.variance}")


def gaussian_posterior(prior: GaussianBelief, y: float, eps: float) -> GaussianBelief:
    """Conjugate Bayesian update of a Gaussian belief by one noisy observation.

    Observing y = X + eps*Z with Z ~ N(0,1) maps N(m, z) to

        N( m + z/(z+eps^2) * (y - m),  z*eps^2/(z+eps^2) ).

    A degenerate prior (z = 0) is already certain and is returned unchanged,
    unless eps = 0 as well and the exact datum contradicts it.  A perfect
    measurement (eps = 0, z > 0) collapses the belief onto y.
    """
    if eps < 0:
        raise ModelError(f"eps >= 0 required, got {eps}")
    m, z = prior.mean, prior.variance
    if z == 0.0:
        if eps == 0.0 and y != m:
            raise ModelError(
                f"contradictory exact data: certain belief at {m}, observed {y}"
            )
        return prior
    if eps == 0.0:
        return GaussianBelief(mean=float(y), variance=0.0)
    denom = z + eps * eps
    return GaussianBelief(
        mean=m + z / denom * (y - m),
        variance=z * eps * eps / denom,
    )


def optimal_control(du_dm: float, c_control: float) -> float:
    """Minimizer of C*a^2 + a*du_dm over the control a, i.e. -du_dm/(2C)."""
    if not c_control > 0:
        raise ModelError(f"c_control > 0 required, got {c_control}")
    return -du_dm / (2.0 * c_control)


def running_cost(belief: GaussianBelief, alpha: float, c_control: float) -> float:
    """Instantaneous cost rate m^2 + z + C*alpha^2.

    m^2 + z is the second moment of the belief, i.e. the expected quadratic
    state cost under N(m, z).
    """
    return belief.mean**2 + belief.variance + c_control * alpha * alpha


def terminal_cost(belief: GaussianBelief) -> float:
    """Terminal cost m^2 + z (expected squared state at the horizon)."""
    return belief.mean**2 + belief.variance


def reference_params(
    dt: float = 0.0125, obs_every: int = 20, horizon: float = 1.0
) -> ModelParams:
    """Reference configuration: theta=0.25, b=0.5, C=1, eps=0.9, T=1.

    Observations every ``obs_every`` solver steps, strictly inside (0, T).
    """
    n = int(round(horizon / dt))
    if abs(n * dt - horizon) > 1e-9:
        raise ModelError(f"horizon {horizon} not a multiple of dt {dt}")
    obs = tuple(
        k * obs_every * dt
        for k in range(1, math.ceil(n / obs_every))
        if k * obs_every < n
    )
    return ModelParams(
        theta=0.25, b=0.5, c_control=1.0, eps=0.9, horizon=horizon, obs_times=obs
    )
