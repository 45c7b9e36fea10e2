import numpy as np
import pytest

from oubelief import (
    Grid,
    characteristic_constants,
    characteristic_rhs,
    characteristic_state,
    reference_params,
    validate_domain,
)

P = reference_params()


def rk4_characteristics(m0, z0, p0, q0, tau_end, n_steps=2000):
    """Independent fixed-step RK4 oracle for the characteristic ODE system."""

    class _S:
        def __init__(self, y):
            self.m, self.z, self.p, self.q = y

    y = np.array([m0, z0, p0, q0], dtype=float)
    h = tau_end / n_steps
    for _ in range(n_steps):
        k1 = np.array(characteristic_rhs(_S(y), P))
        k2 = np.array(characteristic_rhs(_S(y + 0.5 * h * k1), P))
        k3 = np.array(characteristic_rhs(_S(y + 0.5 * h * k2), P))
        k4 = np.array(characteristic_rhs(_S(y + h * k3), P))
        y = y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


def test_closed_form_matches_rk4_on_random_starts():
    rng = np.random.default_rng(7)
    for _ in range(100):
        m0 = rng.uniform(-1, 1)
        z0 = rng.uniform(0, 1)
        p0 = rng.uniform(-2, 2)
        q0 = rng.uniform(-2, 2)
        tau = rng.uniform(0, 1)
        consts = characteristic_constants(m0, z0, p0, q0, P)
        st = characteristic_state(consts, tau, P)
        ref = rk4_characteristics(m0, z0, p0, q0, tau)
        assert np.allclose([st.m, st.z, st.p, st.q], ref, atol=1e-8)


def test_initial_conditions_recovered_at_tau_zero():
    consts = characteristic_constants(0.3, 0.7, -1.2, 0.4, P)
    st = characteristic_state(consts, 0.0, P)
    assert (st.m, st.z, st.p, st.q) == pytest.approx((0.3, 0.7, -1.2, 0.4), abs=1e-14)


def test_variance_fixed_point_is_stationary():
    z_star = P.stationary_variance  # b^2/(2 theta) = 0.5
    consts = characteristic_constants(0.0, z_star, 0.0, 1.0, P)
    for tau in np.linspace(0, 1, 11):
        assert characteristic_state(consts, tau, P).z == z_star


def test_characteristics_diverge_from_centers():
    # z above the fixed point moves further above as tau grows; m away from 0
    consts = characteristic_constants(0.2, 0.8, 2 * 0.2, 1.0, P)
    s0 = characteristic_state(consts, 0.0, P)
    s1 = characteristic_state(consts, 1.0, P)
    assert s1.z > s0.z > P.stationary_variance
    assert s1.m > s0.m > 0


def test_validate_domain():
    good = validate_domain(Grid(-1, 1, 0, 1, 21, 11), P)
    assert good.valid and good.reasons == ()
    no_zero = validate_domain(Grid(0.1, 1, 0, 1, 5, 5), P)
    assert not no_zero.valid
    assert any("m_min" in r for r in no_zero.reasons)
    no_fixed_point = validate_domain(Grid(-1, 1, 0, 0.4, 5, 5), P)
    assert not no_fixed_point.valid
    assert any("fixed point" in r for r in no_fixed_point.reasons)
    both = validate_domain(Grid(0.1, 1, 0, 0.4, 5, 5), P)
    assert len(both.reasons) == 2
