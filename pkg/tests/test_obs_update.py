import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oubelief import (
    GaussianBelief,
    Grid,
    InterpolationError,
    QuadratureRule,
    ValueField,
    apply_observation_update,
    convolution_kernel_density,
    convolution_observation_value,
    expected_posterior_value,
    interpolate_value,
    reference_params,
    posterior_variance,
    shift_scale,
    terminal_field,
)

P = reference_params()
GRID = Grid(-1.0, 1.0, 0.0, 1.0, 21, 11)
RULE = QuadratureRule.gauss_hermite(20)


def test_rule_is_a_probability_rule():
    assert RULE.weights.sum() == pytest.approx(1.0, abs=1e-13)
    assert np.all(RULE.weights > 0)
    # standard normal moments up to a high even order
    assert RULE.nodes @ RULE.weights == pytest.approx(0.0, abs=1e-12)
    assert (RULE.nodes**2) @ RULE.weights == pytest.approx(1.0, abs=1e-12)
    assert (RULE.nodes**4) @ RULE.weights == pytest.approx(3.0, abs=1e-11)
    assert (RULE.nodes**6) @ RULE.weights == pytest.approx(15.0, abs=1e-10)


def test_posterior_helpers():
    assert posterior_variance(1.0, 0.9) == pytest.approx(0.81 / 1.81)
    assert posterior_variance(0.0, 0.9) == 0.0
    assert shift_scale(1.0, 0.9) == pytest.approx(1.0 / math.sqrt(1.81))
    assert shift_scale(0.0, 0.9) == 0.0
    # eps = 0 and z = 0 simultaneously: no update, no division blowup
    assert posterior_variance(0.0, 0.0) == 0.0
    assert shift_scale(0.0, 0.0) == 0.0


def test_bilinear_interpolation_exact_on_bilinear_data():
    mm, zz = np.meshgrid(GRID.m_nodes, GRID.z_nodes, indexing="ij")
    f = ValueField(GRID, 1.0, 2.0 + 3.0 * mm - 1.5 * zz + 0.7 * mm * zz)
    for m, z in [(-0.93, 0.21), (0.0, 0.5), (0.55, 0.99), (1.0, 0.0)]:
        want = 2.0 + 3.0 * m - 1.5 * z + 0.7 * m * z
        assert interpolate_value(f, m, z) == pytest.approx(want, abs=1e-12)
    with pytest.raises(InterpolationError):
        interpolate_value(f, 0.0, 1.5)


def test_quadratic_extrapolation_in_m():
    f = terminal_field(GRID, 1.0)  # m^2 + z is quadratic in m
    assert interpolate_value(f, 1.7, 0.5) == pytest.approx(1.7**2 + 0.5, abs=1e-10)
    assert interpolate_value(f, -2.4, 0.0) == pytest.approx(2.4**2, abs=1e-10)
    # clamp mode freezes the edge value instead
    assert interpolate_value(f, 1.7, 0.5, extrapolation="clamp") == pytest.approx(1.5)


def test_quadratic_field_invariance_analytic():
    # law of total variance: E[m'^2 + z'] = m^2 + z exactly
    phi = lambda m, z: m * m + z
    for m, z in [(0.0, 1.0), (0.7, 0.3), (-1.0, 0.01)]:
        got = expected_posterior_value(phi, GaussianBelief(m, z), P.eps, RULE)
        assert got == pytest.approx(m * m + z, abs=1e-10)


def test_quadratic_field_invariance_on_grid():
    f = terminal_field(GRID, 1.0)
    # default mode carries the quadratic bulk exactly
    upd = apply_observation_update(f, P, RULE)
    assert np.max(np.abs(upd.values - f.values)) < 1e-12
    # raw interpolation mode shows the O(dm^2) bilinear error instead
    raw = apply_observation_update(f, P, RULE, exact_quadratic=False)
    err = np.max(np.abs(raw.values - f.values))
    assert err < 1e-2
    fine = Grid(-1.0, 1.0, 0.0, 1.0, 41, 11)
    ffine = terminal_field(fine, 1.0)
    err_fine = np.max(
        np.abs(
            apply_observation_update(ffine, P, RULE, exact_quadratic=False).values
            - ffine.values
        )
    )
    assert err / err_fine >= 4.0


@given(
    a=st.floats(-3, 3),
    e=st.floats(-3, 3),
    gamma=st.floats(-3, 3),
    m=st.floats(-1, 1),
    z=st.floats(1e-6, 1),
)
def test_violation_identity_quadrature(a, e, gamma, m, z):
    """E[phi(m', z')] for phi = a(m^2+z) + e*m^2 + gamma picks up the extra
    variance of the posterior mean: a(m^2+z) + e(m^2 + z^2/(z+eps^2)) + gamma."""
    eps = P.eps
    phi = lambda mm, zz: a * (mm * mm + zz) + e * mm * mm + gamma
    got = expected_posterior_value(phi, GaussianBelief(m, z), eps, RULE)
    want = a * (m * m + z) + e * (m * m + z * z / (z + eps * eps)) + gamma
    assert got == pytest.approx(want, abs=1e-10)


def test_violation_identity_monte_carlo_oracle():
    rng = np.random.default_rng(20240817)
    m, z, eps = 0.4, 0.8, P.eps
    a, e, gamma = 1.3, -0.7, 0.2
    n = 1_000_000
    y = m + math.sqrt(z + eps * eps) * rng.standard_normal(n)
    m_post = m + z / (z + eps * eps) * (y - m)
    z_post = z * eps * eps / (z + eps * eps)
    samples = a * (m_post**2 + z_post) + e * m_post**2 + gamma
    mc, se = samples.mean(), samples.std(ddof=1) / math.sqrt(n)
    quad = expected_posterior_value(
        lambda mm, zz: a * (mm * mm + zz) + e * mm * mm + gamma,
        GaussianBelief(m, z),
        eps,
        RULE,
    )
    assert abs(quad - mc) < 3 * se


def test_update_keeps_z0_row():
    f = terminal_field(GRID, 1.0)
    upd = apply_observation_update(f, P, RULE)
    assert np.array_equal(upd.values[:, 0], f.values[:, 0])


def test_convolution_kernel_normalization():
    z, eps = 0.8, 0.9
    tau = np.linspace(-8, 8, 20001)
    mass = np.trapezoid(convolution_kernel_density(tau, z, eps), tau)
    assert mass == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(i=st.integers(2, 18), j=st.integers(1, 10), seed=st.integers(0, 10))
def test_convolution_route_matches_quadrature(i, j, seed):
    # a non-quadratic field: terminal data plus a smooth even bump
    mm, zz = np.meshgrid(GRID.m_nodes, GRID.z_nodes, indexing="ij")
    f = ValueField(GRID, 1.0, mm**2 + zz + 0.1 * np.cos(seed + mm) * (1 + zz))
    upd = apply_observation_update(f, P, RULE)
    via_conv = convolution_observation_value(
        f, GRID.m_nodes[i], GRID.z_nodes[j], P.eps
    )
    # the routes share the kernel but integrate the piecewise-linear
    # interpolant differently (quadrature nodes vs continuous integral), so
    # agreement is limited by the interpolant's kinks, not by the kernel
    assert via_conv == pytest.approx(upd.values[i, j], abs=2e-4)
