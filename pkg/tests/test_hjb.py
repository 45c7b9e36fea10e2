import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oubelief import (
    CflViolationError,
    GaussianBelief,
    Grid,
    GridError,
    SolverConfig,
    ValueField,
    check_monotonicity,
    hamiltonian_m,
    hamiltonian_z,
    no_obs_value,
    numerical_hamiltonian_m,
    numerical_hamiltonian_z,
    one_sided_differences,
    reference_params,
    solve_between_observations,
    solve_no_obs_riccati,
    solve_value_function,
    step_backward,
    terminal_field,
)

P = reference_params()
REF_GRID = Grid(-1.0, 1.0, 0.0, 1.0, 21, 11)
DT = 0.0125


def test_grid_basics():
    g = REF_GRID
    assert g.dm == pytest.approx(0.1)
    assert g.dz == pytest.approx(0.1)
    assert g.m_nodes[0] == -1.0 and g.m_nodes[-1] == 1.0
    r = g.refined(2)
    assert (r.n_m, r.n_z) == (41, 21)
    assert r.dm == pytest.approx(0.05)
    with pytest.raises(GridError):
        Grid(1.0, -1.0, 0.0, 1.0, 21, 11)
    with pytest.raises(GridError):
        Grid(-1.0, 1.0, -0.1, 1.0, 21, 11)


def test_terminal_field():
    f = terminal_field(REF_GRID, 1.0)
    assert f.time == 1.0
    assert f.values[0, 0] == pytest.approx(1.0)  # m=-1, z=0
    assert f.values[-1, -1] == pytest.approx(2.0)  # m=1, z=1
    assert f.values[10, 5] == pytest.approx(0.5)  # m=0, z=0.5


def test_one_sided_differences_and_edge_substitution():
    f = terminal_field(REF_GRID, 1.0)
    dmm, dpm, dmz, dpz = one_sided_differences(f, 10, 5)  # m=0, z=0.5
    assert dmm == pytest.approx(-0.1)
    assert dpm == pytest.approx(0.1)
    assert dmz == pytest.approx(1.0)
    assert dpz == pytest.approx(1.0)
    # at the m_min edge the backward difference is replaced by the forward one
    dmm0, dpm0, _, _ = one_sided_differences(f, 0, 5)
    assert dmm0 == dpm0


@given(
    m=st.floats(-1, 1),
    z=st.floats(0, 1),
    p=st.floats(-5, 5),
    q=st.floats(-5, 5),
)
def test_numerical_hamiltonian_consistency(m, z, p, q):
    # equal one-sided arguments collapse to the exact Hamiltonian
    assert numerical_hamiltonian_m(m, z, p, p, P) == pytest.approx(
        hamiltonian_m(m, z, p, P), abs=1e-12
    )
    assert numerical_hamiltonian_z(m, z, q, q, P) == pytest.approx(
        hamiltonian_z(m, z, q, P), abs=1e-12
    )


def test_numerical_hamiltonian_m_cases():
    # sonic point at m=1 is p0 = -0.5; both differences above it -> left flux
    assert numerical_hamiltonian_m(1.0, 0.0, 1.0, 2.0, P) == pytest.approx(
        hamiltonian_m(1.0, 0.0, 1.0, P)
    )
    # both below -> right flux
    assert numerical_hamiltonian_m(1.0, 0.0, -3.0, -2.0, P) == pytest.approx(
        hamiltonian_m(1.0, 0.0, -2.0, P)
    )
    # straddling with D- >= p0 >= D+ -> both branches active
    got = numerical_hamiltonian_m(1.0, 0.0, 1.0, -2.0, P)
    want = (
        hamiltonian_m(1.0, 0.0, -2.0, P)
        + hamiltonian_m(1.0, 0.0, 1.0, P)
        - hamiltonian_m(1.0, 0.0, -0.5, P)
    )
    assert got == pytest.approx(want)
    # rarefaction: D- <= p0 <= D+ -> sonic value
    assert numerical_hamiltonian_m(1.0, 0.0, -2.0, 1.0, P) == pytest.approx(
        hamiltonian_m(1.0, 0.0, -0.5, P)
    )


def test_numerical_hamiltonian_z_upwind():
    # z = b^2/(2 theta): advection speed vanishes
    assert numerical_hamiltonian_z(0.0, 0.5, 3.0, -7.0, P) == pytest.approx(-0.5)
    # z=1: speed -0.25 < 0 -> backward difference
    assert numerical_hamiltonian_z(0.0, 1.0, 1.0, 9.0, P) == pytest.approx(
        -1.0 + 0.25 * 1.0
    )


def test_step_backward_hand_value():
    f = terminal_field(REF_GRID, 1.0)
    new = step_backward(f, P, SolverConfig(dt=DT))
    assert new.time == pytest.approx(1.0 - DT)
    # (m, z) = (0, 0.5): sonic H1 = 0, H2 = -0.5 -> 0.5 + dt*0.5
    assert new.values[10, 5] == pytest.approx(0.50625, abs=1e-14)


def test_cfl_certificate_bounds():
    rep7 = check_monotonicity(REF_GRID, P, DT, L=7.0)
    assert rep7.holds
    assert rep7.margin == pytest.approx(0.03125, abs=1e-12)
    rep8 = check_monotonicity(REF_GRID, P, DT, L=8.0)
    assert not rep8.holds
    assert "VIOLATED" in rep8.describe(REF_GRID)


def test_cfl_violation_raises_with_location():
    # a huge time step must trip the runtime check
    f = terminal_field(REF_GRID, 1.0)
    with pytest.raises(CflViolationError) as exc:
        step_backward(f, P, SolverConfig(dt=1.0))
    assert exc.value.point is not None
    assert exc.value.gradients is not None


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_scheme_monotone_in_each_stencil_value(seed):
    """Direct probe: raising any single neighbor never lowers the update.

    Random Lipschitz fields with |one-sided difference| <= L under a dt that
    satisfies the certificate for that L.
    """
    rng = np.random.default_rng(seed)
    g = Grid(-1.0, 1.0, 0.0, 1.0, 9, 5)
    vals = rng.uniform(0.0, 1.0, (g.n_m, g.n_z))
    bump = 1e-3 * g.dm
    # realized difference bound (with room for the probe bump), then a dt
    # that satisfies the certificate for it
    L = max(
        np.abs(np.diff(vals, axis=0)).max() / g.dm,
        np.abs(np.diff(vals, axis=1)).max() / g.dz,
    ) + 2 * bump / min(g.dm, g.dz)
    sup_h1p = P.theta * 1.0 + L / (2 * P.c_control)
    sup_h2q = max(abs(2 * P.theta * z - P.b**2) for z in (0.0, 1.0))
    dt = 0.9 / (2 * sup_h1p / g.dm + sup_h2q / g.dz)
    assert check_monotonicity(g, P, dt, L).holds
    cfg = SolverConfig(dt=dt, check_monotonicity_each_step=False)
    base = step_backward(ValueField(g, 1.0, vals), P, cfg).values
    i = int(rng.integers(1, g.n_m - 1))
    j = int(rng.integers(1, g.n_z - 1))
    for di, dj in ((-1, 0), (1, 0), (0, -1), (0, 1), (0, 0)):
        bumped = vals.copy()
        bumped[i + di, j + dj] += bump
        new = step_backward(ValueField(g, 1.0, bumped), P, cfg).values
        assert new[i, j] >= base[i, j] - 1e-13


def test_no_obs_solution_even_in_m():
    sol = solve_value_function(P, REF_GRID, SolverConfig(dt=DT), with_observations=False)
    for layer in sol.layers:
        assert np.allclose(layer.values, layer.values[::-1, :], atol=1e-11)


def test_layers_stay_nonnegative():
    sol = solve_value_function(P, REF_GRID, SolverConfig(dt=DT), with_observations=False)
    assert all(layer.values.min() >= 0.0 for layer in sol.layers)


def test_interval_solver_structure():
    f = terminal_field(REF_GRID, 1.0)
    layers = solve_between_observations(f, 0.75, 1.0, P, SolverConfig(dt=DT))
    assert len(layers) == 21
    assert layers[-1] is f
    assert layers[0].time == pytest.approx(0.75)
    # zero-length interval: just the input layer
    assert solve_between_observations(f, 1.0, 1.0, P, SolverConfig(dt=DT)) == [f]
    with pytest.raises(GridError):
        solve_between_observations(f, 0.75, 1.0, P, SolverConfig(dt=0.013))


def test_single_step_tracks_riccati_to_first_order():
    ric = solve_no_obs_riccati(P)
    f = terminal_field(REF_GRID, 1.0)
    new = step_backward(f, P, SolverConfig(dt=DT))
    t = 1.0 - DT
    for i in (5, 10, 15):
        for j in (2, 5, 8):
            ref = no_obs_value(
                ric, t, GaussianBelief(REF_GRID.m_nodes[i], REF_GRID.z_nodes[j])
            )
            assert new.values[i, j] == pytest.approx(
                ref, abs=5 * (DT + REF_GRID.dm + REF_GRID.dz)
            )
