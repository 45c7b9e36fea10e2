"""Multidimensional belief algebra: Kalman updates and the Hamiltonian.

For a d-dimensional mean-reverting state observed through an n x d matrix H
with isotropic noise eps, the observation jump acts on a Gaussian belief
N(m, Sigma) through the Kalman gain

    K = Sigma H^T (H Sigma H^T + eps^2 I)^{-1},

and the value-function update is an n-dimensional Gaussian expectation over
shifted means m + K L w with L L^T = H Sigma H^T + eps^2 I.  This module
provides those operations plus the evaluator of the multidimensional
Hamiltonian in (mean, covariance) coordinates; the full PDE solve in
d + d(d+1)/2 space dimensions is intentionally out of scope.

Covariances are handled as full symmetric matrices; the half-vectorization
of the upper triangle is exposed only as an I/O view (half_vec/from_half_vec).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, cholesky

from .obs_update import QuadratureRule


class LinearAlgebraError(ValueError):
    pass


_SYM_TOL = 1e-12
_PSD_TOL = 1e-10


@dataclass(frozen=True)
class NdBelief:
    """Gaussian belief N(mean, cov) in d dimensions."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        d = mean.shape[0]
        if cov.shape != (d, d):
            raise LinearAlgebraError(f"cov shape {cov.shape} != ({d}, {d})")
        if np.max(np.abs(cov - cov.T)) > _SYM_TOL * max(1.0, np.max(np.abs(cov))):
            raise LinearAlgebraError("covariance is not symmetric")
        if np.min(np.linalg.eigvalsh(cov)) < -_PSD_TOL:
            raise LinearAlgebraError("covariance is not nonnegative definite")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


@dataclass(frozen=True)
class NdModelParams:
    """Constants of the d-dimensional problem.

    theta       per-coordinate mean-reversion rates (> 0)
    b           upper-triangular diffusion coefficients b[i, j], j >= i
    c_control   per-coordinate control cost weights (> 0)
    obs_matrix  n x d observation matrix H
    eps         observation noise standard deviation (>= 0)
    """

    theta: np.ndarray
    b: np.ndarray
    c_control: np.ndarray
    obs_matrix: np.ndarray
    eps: float

    def __post_init__(self):
        theta = np.atleast_1d(np.asarray(self.theta, dtype=float))
        c = np.atleast_1d(np.asarray(self.c_control, dtype=float))
        b = np.atleast_2d(np.asarray(self.b, dtype=float))
        h = np.atleast_2d(np.asarray(self.obs_matrix, dtype=float))
        d = theta.shape[0]
        if np.any(theta <= 0):
            raise LinearAlgebraError("all theta entries must be > 0")
        if c.shape != (d,) or np.any(c <= 0):
            raise LinearAlgebraError("c_control must be d positive entries")
        if b.shape != (d, d):
            raise LinearAlgebraError(f"b shape {b.shape} != ({d}, {d})")
        if np.any(np.tril(b, -1) != 0.0):
            raise LinearAlgebraError("b must be upper triangular")
        if h.shape[1] != d:
            raise LinearAlgebraError(f"obs_matrix must have {d} columns")
        if self.eps < 0:
            raise LinearAlgebraError("eps must be >= 0")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "c_control", c)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "obs_matrix", h)

    @property
    def dim(self) -> int:
        return self.theta.shape[0]


@dataclass(frozen=True)
class NdGradient:
    """Value-function gradient: d_m[i] = dU/dm_i, d_z[i, j] = dU/dz_ij (i <= j).

    Only the upper triangle of d_z is read.
    """

    d_m: np.ndarray
    d_z: np.ndarray

    def __post_init__(self):
        d_m = np.atleast_1d(np.asarray(self.d_m, dtype=float))
        d_z = np.atleast_2d(np.asarray(self.d_z, dtype=float))
        d = d_m.shape[0]
        if d_z.shape != (d, d):
            raise LinearAlgebraError(f"d_z shape {d_z.shape} != ({d}, {d})")
        if not (np.all(np.isfinite(d_m)) and np.all(np.isfinite(d_z))):
            raise LinearAlgebraError("non-finite gradient entry")
        object.__setattr__(self, "d_m", d_m)
        object.__setattr__(self, "d_z", d_z)


def half_vec(sigma: np.ndarray) -> np.ndarray:
    """Upper-triangle half-vectorization (row-major over i <= j)."""
    sigma = np.asarray(sigma, dtype=float)
    d = sigma.shape[0]
    return np.array([sigma[i, j] for i in range(d) for j in range(i, d)])

def from_half_vec(v: np.ndarray, d: int) -> np.ndarray:
    """Inverse of half_vec: rebuild the full symmetric matrix."""
    v = np.asarray(v, dtype=float)
    if v.shape != (d * (d + 1) // 2,):
        raise LinearAlgebraError(f"half-vector length {v.shape} != {d*(d+1)//2}")
    out = np.zeros((d, d))
    k = 0
    for i in range(d):
        for j in range(i, d):
            out[i, j] = out[j, i] = v[k]
            k += 1
    return out


def cholesky_factor(s: np.ndarray) -> np.ndarray:
    """Lower-triangular L with L L^T = s, positive diagonal."""
    s = np.atleast_2d(np.asarray(s, dtype=float))
    if np.max(np.abs(s - s.T)) > _SYM_TOL * max(1.0, np.max(np.abs(s))):
        raise LinearAlgebraError("matrix is not symmetric")
    try:
        return cholesky(s, lower=True)
    except Exception as exc:
        raise LinearAlgebraError(f"matrix is not positive definite: {exc}") from exc


def _innovation(cov: np.ndarray, h: np.ndarray, eps: float) -> np.ndarray:
    return h @ cov @ h.T + eps * eps * np.eye(h.shape[0])


def kalman_gain(cov: np.ndarray, h: np.ndarray, eps: float) -> np.ndarray:
    """Gain K solving K (H Sigma H^T + eps^2 I) = Sigma H^T.

    Solved through the Cholesky factor of the innovation matrix; no explicit
    inverse is formed.
    """
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    h = np.atleast_2d(np.asarray(h, dtype=float))
    s = _innovation(cov, h, eps)
    try:
        low = cholesky(s, lower=True)
    except Exception as exc:
        raise LinearAlgebraError(
            f"singular innovation matrix (eps={eps}, rank-deficient H Sigma H^T): {exc}"
        ) from exc
    # K^T = S^{-1} (H Sigma): two triangular solves
    kt = cho_solve((low, True), h @ cov)
    return kt.T


def kalman_update(belief: NdBelief, h: np.ndarray, eps: float, y: np.ndarray) -> NdBelief:
    """Posterior belief after observing y = H x + eps*Z.

    mean <- m + K (y - H m); cov <- (I - K H) Sigma, re-symmetrized.
    """
    h = np.atleast_2d(np.asarray(h, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    gain = kalman_gain(belief.cov, h, eps)
    mean = belief.mean + gain @ (y - h @ belief.mean)
    cov = (np.eye(belief.dim) - gain @ h) @ belief.cov
    cov = 0.5 * (cov + cov.T)
    return NdBelief(mean=mean, cov=cov)


def gauss_hermite_nd(n_nodes: int, dim: int) -> QuadratureRule:
    """Tensorized Gauss-Hermite rule for a standard normal in ``dim`` variables.

    Nodes have shape (n_nodes**dim, dim); weights sum to one.
    """
    base = QuadratureRule.gauss_hermite(n_nodes)
    nodes = np.array(list(itertools.product(base.nodes, repeat=dim)))
    weights = np.array(
        [math.prod(p) for p in itertools.product(base.weights, repeat=dim)]
    )
    return QuadratureRule(nodes=nodes, weights=weights)


@dataclass(frozen=True)
class MonteCarloRule:
    """Seeded Monte-Carlo fallback for higher observation dimensions."""

    n_samples: int
    seed: int = 0


def expected_update_value(phi, belief: NdBelief, h, eps: float, rule) -> float:
    """Expectation of phi at the observation jump.

    phi is an evaluator on (mean vector, covariance matrix); the expectation
    runs over the innovation variable w with posterior mean m + K L w and
    fixed posterior covariance (I - K H) Sigma.  ``rule`` is either a
    tensorized QuadratureRule (observation dim <= 3) or a MonteCarloRule.
    """
    h = np.atleast_2d(np.asarray(h, dtype=float))
    n = h.shape[0]
    gain = kalman_gain(belief.cov, h, eps)
    low = cholesky_factor(_innovation(belief.cov, h, eps))
    cov_post = (np.eye(belief.dim) - gain @ h) @ belief.cov
    cov_post = 0.5 * (cov_post + cov_post.T)
    shift = gain @ low  # d x n

    if isinstance(rule, MonteCarloRule):
        rng = np.random.default_rng(rule.seed)
        draws = rng.standard_normal((rule.n_samples, n))
        vals = [phi(belief.mean + shift @ w, cov_post) for w in draws]
        return float(np.mean(vals))

    nodes = np.atleast_2d(rule.nodes)
    if nodes.shape[0] == 1 and n == 1 and nodes.shape[1] > 1:
        nodes = nodes.T  # 1-d rule stored flat
    if nodes.shape[1] != n:
        raise LinearAlgebraError(
            f"rule dimension {nodes.shape[1]} != observation dimension {n}"
        )
    vals = np.array([phi(belief.mean + shift @ w, cov_post) for w in nodes])
    return float(vals @ rule.weights)


def hamiltonian_nd(
    m: np.ndarray, z: np.ndarray, grad: NdGradient, params: NdModelParams
) -> float:
    """Multidimensional Hamiltonian in (mean, covariance) coordinates.

    z is the full symmetric covariance (use from_half_vec for the
    half-vectorized view); grad holds dU/dm_i and dU/dz_ij for i <= j.
    """
    m = np.atleast_1d(np.asarray(m, dtype=float))
    z = np.atleast_2d(np.asarray(z, dtype=float))
    d = params.dim
    th, b, c = params.theta, params.b, params.c_control
    dm, dz = grad.d_m, grad.d_z
    total = 0.0
    for i in range(d):
        total += z[i, i] + m[i] ** 2
        total += -th[i] * m[i] * dm[i]
        total += (b[i, i] ** 2 - 2.0 * th[i] * z[i, i]) * dz[i, i]
        cross = 0.0
        for l in range(i):
            total += -th[i] * (z[l, i] + m[l] * m[i]) * dz[l, i]
            cross += m[l] * dz[l, i]
        for j in range(i + 1, d):
            total += (b[i, j] ** 2 / 2.0 - th[i] * z[i, j]) * dz[i, j]
        total += -(dm[i] + cross) ** 2 / (4.0 * c[i])
    return float(total)
