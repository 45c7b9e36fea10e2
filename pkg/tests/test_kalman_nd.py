import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from oubelief import (
    GaussianBelief,
    LinearAlgebraError,
    MonteCarloRule,
    NdBelief,
    NdGradient,
    NdModelParams,
    QuadratureRule,
    cholesky_factor,
    expected_posterior_value,
    expected_update_value,
    from_half_vec,
    gaussian_posterior,
    gauss_hermite_nd,
    half_vec,
    hamiltonian_nd,
    kalman_gain,
    kalman_update,
)


def random_psd(rng, d, jitter=0.0):
    a = rng.standard_normal((d, d))
    return a @ a.T + jitter * np.eye(d)


def test_belief_validation():
    with pytest.raises(LinearAlgebraError):
        NdBelief(mean=[0.0, 0.0], cov=[[1.0, 0.5], [0.4, 1.0]])  # not symmetric
    with pytest.raises(LinearAlgebraError):
        NdBelief(mean=[0.0, 0.0], cov=[[1.0, 2.0], [2.0, 1.0]])  # indefinite
    b = NdBelief(mean=[1.0, 2.0], cov=np.eye(2))
    assert b.dim == 2


def test_params_validation():
    with pytest.raises(LinearAlgebraError):
        NdModelParams(theta=[0.25, -1.0], b=np.eye(2), c_control=[1, 1],
                      obs_matrix=np.eye(2), eps=0.9)
    with pytest.raises(LinearAlgebraError):
        # lower-triangular entry in b
        NdModelParams(theta=[0.25, 0.25], b=[[1, 0], [0.3, 1]], c_control=[1, 1],
                      obs_matrix=np.eye(2), eps=0.9)


@given(
    v=arrays(np.float64, 6, elements=st.floats(-5, 5)),
)
def test_half_vec_roundtrip(v):
    s = from_half_vec(v, 3)
    assert np.array_equal(s, s.T)
    assert np.array_equal(half_vec(s), v)


def test_cholesky_factor():
    rng = np.random.default_rng(0)
    s = random_psd(rng, 4, jitter=0.1)
    low = cholesky_factor(s)
    assert np.allclose(low @ low.T, s, atol=1e-12)
    assert np.all(np.diag(low) > 0)
    with pytest.raises(LinearAlgebraError):
        cholesky_factor(np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_gain_matches_explicit_inverse_oracle():
    rng = np.random.default_rng(1)
    for _ in range(50):
        d = rng.integers(1, 5)
        n = rng.integers(1, 4)
        cov = random_psd(rng, d, jitter=0.05)
        h = rng.standard_normal((n, d))
        eps = rng.uniform(0.1, 2.0)
        k = kalman_gain(cov, h, eps)
        k_ref = cov @ h.T @ np.linalg.inv(h @ cov @ h.T + eps * eps * np.eye(n))
        assert np.allclose(k, k_ref, atol=1e-10)


def test_update_joseph_form_equivalence():
    rng = np.random.default_rng(2)
    for _ in range(50):
        d = rng.integers(1, 5)
        n = rng.integers(1, 4)
        cov = random_psd(rng, d, jitter=0.05)
        h = rng.standard_normal((n, d))
        eps = rng.uniform(0.1, 2.0)
        y = rng.standard_normal(n)
        belief = NdBelief(mean=rng.standard_normal(d), cov=cov)
        upd = kalman_update(belief, h, eps, y)
        k = kalman_gain(cov, h, eps)
        ikh = np.eye(d) - k @ h
        joseph = ikh @ cov @ ikh.T + eps * eps * k @ k.T
        assert np.allclose(upd.cov, joseph, atol=1e-10)


def test_update_preserves_psd_on_random_matrices():
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(1000):
        d = rng.integers(1, 4)
        cov = random_psd(rng, d)  # possibly near-singular
        h = rng.standard_normal((1, d))
        belief = NdBelief(mean=np.zeros(d), cov=cov)
        upd = kalman_update(belief, h, 0.9, [0.3])
        worst = min(worst, np.linalg.eigvalsh(upd.cov).min())
    assert worst >= -1e-10


def test_d1_reduction_matches_scalar_module():
    scalar = GaussianBelief(0.7, 1.3)
    nd = NdBelief(mean=[0.7], cov=[[1.3]])
    y, eps = -0.2, 0.9
    upd1 = gaussian_posterior(scalar, y, eps)
    updn = kalman_update(nd, [[1.0]], eps, [y])
    assert abs(updn.mean[0] - upd1.mean) < 1e-12
    assert abs(updn.cov[0, 0] - upd1.variance) < 1e-12


def test_expected_update_value_d1_matches_scalar_route():
    phi_nd = lambda m, s: float(np.sin(m[0]) + s[0, 0] ** 2)
    phi_1d = lambda m, z: float(np.sin(m) + z * z)
    belief = NdBelief(mean=[0.4], cov=[[0.9]])
    rule = gauss_hermite_nd(20, 1)
    got = expected_update_value(phi_nd, belief, [[1.0]], 0.9, rule)
    want = expected_posterior_value(
        phi_1d, GaussianBelief(0.4, 0.9), 0.9, QuadratureRule.gauss_hermite(20)
    )
    assert got == pytest.approx(want, abs=1e-12)


def test_gh_nd_tensor_rule():
    rule = gauss_hermite_nd(5, 2)
    assert rule.nodes.shape == (25, 2)
    assert rule.weights.sum() == pytest.approx(1.0, abs=1e-12)
    # E[w1^2 w2^2] = 1 for independent standard normals
    val = (rule.nodes[:, 0] ** 2 * rule.nodes[:, 1] ** 2) @ rule.weights
    assert val == pytest.approx(1.0, abs=1e-12)


def test_monte_carlo_rule_agrees_with_quadrature():
    belief = NdBelief(mean=[0.2, -0.1], cov=[[1.0, 0.3], [0.3, 0.8]])
    h = [[1.0, 0.0], [0.0, 1.0]]
    phi = lambda m, s: float(m @ m + np.trace(s))
    quad = expected_update_value(phi, belief, h, 0.9, gauss_hermite_nd(12, 2))
    mc = expected_update_value(phi, belief, h, 0.9, MonteCarloRule(200_000, seed=5))
    assert mc == pytest.approx(quad, abs=0.02)


def scalar_hamiltonian(m, z, p, q, theta, b, c):
    # forward-time Hamiltonian of the scalar problem
    return z + m * m - theta * m * p + (b * b - 2 * theta * z) * q - p * p / (4 * c)


def test_hamiltonian_d1_reduction():
    rng = np.random.default_rng(4)
    params = NdModelParams(theta=[0.25], b=[[0.5]], c_control=[1.0],
                           obs_matrix=[[1.0]], eps=0.9)
    for _ in range(100):
        m, z = rng.uniform(-1, 1), rng.uniform(0.01, 1)
        p, q = rng.uniform(-3, 3, 2)
        got = hamiltonian_nd([m], [[z]], NdGradient(d_m=[p], d_z=[[q]]), params)
        want = scalar_hamiltonian(m, z, p, q, 0.25, 0.5, 1.0)
        assert abs(got - want) < 1e-12


def test_hamiltonian_decoupled_d2_is_additive():
    """Two independent coordinates: the multi-D Hamiltonian splits into the
    sum of the scalar Hamiltonians when covariances and gradients decouple."""
    rng = np.random.default_rng(5)
    th = [0.25, 0.4]
    bb = [[0.5, 0.0], [0.0, 0.7]]
    cc = [1.0, 2.0]
    params = NdModelParams(theta=th, b=bb, c_control=cc,
                           obs_matrix=np.eye(2), eps=0.9)
    for _ in range(50):
        m = rng.uniform(-1, 1, 2)
        z = np.diag(rng.uniform(0.01, 1, 2))
        p = rng.uniform(-3, 3, 2)
        q = np.diag(rng.uniform(-3, 3, 2))
        got = hamiltonian_nd(m, z, NdGradient(d_m=p, d_z=q), params)
        want = sum(
            scalar_hamiltonian(m[i], z[i, i], p[i], q[i, i], th[i], bb[i][i], cc[i])
            for i in range(2)
        )
        assert abs(got - want) < 1e-12


def test_singular_innovation_rejected():
    # eps = 0 with rank-deficient H Sigma H^T has no well-defined gain
    belief = NdBelief(mean=[0.0, 0.0], cov=np.diag([1.0, 0.0]))
    with pytest.raises(LinearAlgebraError):
        kalman_gain(belief.cov, [[0.0, 1.0]], 0.0)
