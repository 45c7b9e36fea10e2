"""Belief-state optimal control of a mean-reverting diffusion with
discrete noisy observations.

The package solves the (mean, variance) reduction of the partially observed
linear-quadratic control problem: a monotone upwind finite-difference scheme
integrates the belief-state HJB equation backward between observation dates,
a conjugate Gaussian jump handles each observation, Riccati ODEs provide the
no-observation and perfect-observation benchmarks, closed-form
characteristics justify the truncated domain, and a path simulator rolls the
optimal feedback control forward.
"""

__version__ = "0.1.0"

from .model import (
    GaussianBelief,
    ModelError,
    ModelParams,
    gaussian_posterior,
    optimal_control,
    reference_params,
    running_cost,
    terminal_cost,
)
from .riccati import (
    PerfectObsSolution,
    RiccatiSolution,
    no_obs_value,
    perfect_obs_value,
    solve_no_obs_riccati,
    solve_perfect_obs_riccati,
)
from .hjb import (
    CflViolationError,
    Grid,
    GridError,
    MonotonicityReport,
    SolverConfig,
    ValueField,
    check_monotonicity,
    hamiltonian_m,
    hamiltonian_z,
    numerical_hamiltonian_m,
    numerical_hamiltonian_z,
    one_sided_differences,
    solve_between_observations,
    step_backward,
    terminal_field,
)
from .obs_update import (
    InterpolationError,
    QuadratureRule,
    apply_observation_update,
    convolution_kernel_density,
    convolution_observation_value,
    expected_posterior_value,
    interpolate_value,
    posterior_variance,
    shift_scale,
)
from .characteristics import (
    CharacteristicConstants,
    CharacteristicState,
    DomainReport,
    characteristic_constants,
    characteristic_rhs,
    characteristic_state,
    validate_domain,
)
from .solve import ValueSolution, solve_value_function
from .path_sim import (
    BeliefTrajectory,
    SimulationError,
    estimate_cost,
    simulate_path,
    simulate_paths,
    trajectory_cost,
)
from .kalman_nd import (
    LinearAlgebraError,
    MonteCarloRule,
    NdBelief,
    NdGradient,
    NdModelParams,
    cholesky_factor,
    expected_update_value,
    from_half_vec,
    gauss_hermite_nd,
    half_vec,
    hamiltonian_nd,
    kalman_gain,
    kalman_update,
)

__all__ = [
    "__version__",
    # model
    "GaussianBelief",
    "ModelError",
    "ModelParams",
    "gaussian_posterior",
    "optimal_control",
    "reference_params",
    "running_cost",
    "terminal_cost",
    # riccati
    "PerfectObsSolution",
    "RiccatiSolution",
    "no_obs_value",
    "perfect_obs_value",
    "solve_no_obs_riccati",
    "solve_perfect_obs_riccati",
    # hjb
    "CflViolationError",
    "Grid",
    "GridError",
    "MonotonicityReport",
    "SolverConfig",
    "ValueField",
    "check_monotonicity",
    "hamiltonian_m",
    "hamiltonian_z",
    "numerical_hamiltonian_m",
    "numerical_hamiltonian_z",
    "one_sided_differences",
    "solve_between_observations",
    "step_backward",
    "terminal_field",
    # obs_update
    "InterpolationError",
    "QuadratureRule",
    "apply_observation_update",
    "convolution_kernel_density",
    "convolution_observation_value",
    "expected_posterior_value",
    "interpolate_value",
    "posterior_variance",
    "shift_scale",
    # characteristics
    "CharacteristicConstants",
    "CharacteristicState",
    "DomainReport",
    "characteristic_constants",
    "characteristic_rhs",
    "characteristic_state",
    "validate_domain",
    # solve
    "ValueSolution",
    "solve_value_function",
    # path_sim
    "BeliefTrajectory",
    "SimulationError",
    "estimate_cost",
    "simulate_path",
    "simulate_paths",
    "trajectory_cost",
    # kalman_nd
    "LinearAlgebraError",
    "MonteCarloRule",
    "NdBelief",
    "NdGradient",
    "NdModelParams",
    "cholesky_factor",
    "expected_update_value",
    "from_half_vec",
    "gauss_hermite_nd",
    "half_vec",
    "hamiltonian_nd",
    "kalman_gain",
    "kalman_update",
]
