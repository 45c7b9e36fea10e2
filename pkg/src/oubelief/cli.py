"""Command-line driver: configuration parsing, orchestration, CSV artifacts.

Configuration is a TOML document; every key is optional and defaults to the
reference setup (theta=0.25, b=0.5, C=1, eps=0.9, T=1, m in [-1,1],
z in [0,1], dt=0.0125, dm=dz=0.1, observations every 20 steps).  Unknown
keys are rejected and all invariant violations are reported at once.

Subcommands:
    solve            solve the requested regimes, write value-function CSVs
    simulate         solve plus optimal-path simulation and cost estimate
    check            domain validity + monotonicity certification only
    characteristics  dump closed-form characteristic curve samples
    kalman-demo      run the multidimensional reduction checks

Exit codes: 0 success, 2 validation failure, 3 numerical failure (CFL/NaN).
"""

from __future__ import annotations

import argparse
import sys

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .characteristics import (
    characteristic_constants,
    characteristic_state,
    validate_domain,
)
from .hjb import CflViolationError, Grid, GridError, SolverConfig, check_monotonicity
from .kalman_nd import (
    NdBelief,
    NdModelParams,
    expected_update_value,
    gauss_hermite_nd,
    hamiltonian_nd,
    kalman_update,
    NdGradient,
)
from .model import GaussianBelief, ModelError, ModelParams, gaussian_posterior
from .obs_update import QuadratureRule, expected_posterior_value
from .path_sim import SimulationError, estimate_cost, simulate_paths
from .riccati import solve_perfect_obs_riccati, perfect_obs_value
from .solve import ValueSolution, solve_value_function

REGIMES = ("no_obs", "noisy_obs", "perfect_obs", "all")

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


class ConfigError(ValueError):
    """Bad run configuration; the message lists every violation found."""


@dataclass(frozen=True)
class RunConfig:
    model: ModelParams
    grid: Grid
    solver: SolverConfig
    regime: str = "all"
    n_paths: int = 100
    seed: int = 0
    output_dir: str = "out"
    quad_nodes: int = 20
    initial_mean: float = 1.0
    initial_variance: float = 1.0
    threads: int = 1


_KNOWN_TOP = {
    "regime",
    "n_paths",
    "seed",
    "output_dir",
    "quad_nodes",
    "initial_mean",
    "initial_variance",
    "threads",
    "model",
    "grid",
    "solver",
}
_KNOWN_MODEL = {"theta", "b", "c_control", "eps", "horizon", "obs_times", "obs_every"}
_KNOWN_GRID = {"m_min", "m_max", "z_min", "z_max", "n_m", "n_z"}
_KNOWN_SOLVER = {"dt", "grad_bound", "check_monotonicity_each_step"}


def _reject_unknown(section: dict, known: set, where: str, errors: list):
    for key in section:
        if key not in known:
            errors.append(f"unknown key {where}{key}")


def parse_config(text: str) -> RunConfig:
    """Parse and fully validate a TOML run configuration."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error: {exc}") from exc

    errors: list = []
    _reject_unknown(doc, _KNOWN_TOP, "", errors)
    model_doc = doc.get("model", {})
    grid_doc = doc.get("grid", {})
    solver_doc = doc.get("solver", {})
    if isinstance(model_doc, dict):
        _reject_unknown(model_doc, _KNOWN_MODEL, "model.", errors)
    if isinstance(grid_doc, dict):
        _reject_unknown(grid_doc, _KNOWN_GRID, "grid.", errors)
    if isinstance(solver_doc, dict):
        _reject_unknown(solver_doc, _KNOWN_SOLVER, "solver.", errors)
    if errors:
        raise ConfigError("; ".join(errors))

    dt = float(solver_doc.get("dt", 0.0125))
    horizon = float(model_doc.get("horizon", 1.0))
    if "obs_times" in model_doc:
        obs_times = tuple(float(t) for t in model_doc["obs_times"])
    else:
        obs_every = int(model_doc.get("obs_every", 20))
        if obs_every <= 0:
            errors.append("model.obs_every must be positive")
            obs_times = ()
        else:
            n_total = int(round(horizon / dt)) if dt > 0 else 0
            obs_times = tuple(
                k * dt for k in range(obs_every, n_total, obs_every)
            )

    model = grid = solver = None
    try:
        model = ModelParams(
            theta=float(model_doc.get("theta", 0.25)),
            b=float(model_doc.get("b", 0.5)),
            c_control=float(model_doc.get("c_control", 1.0)),
            eps=float(model_doc.get("eps", 0.9)),
            horizon=horizon,
            obs_times=obs_times,
        )
    except ModelError as exc:
        errors.append(str(exc))
    try:
        grid = Grid(
            m_min=float(grid_doc.get("m_min", -1.0)),
            m_max=float(grid_doc.get("m_max", 1.0)),
            z_min=float(grid_doc.get("z_min", 0.0)),
            z_max=float(grid_doc.get("z_max", 1.0)),
            n_m=int(grid_doc.get("n_m", 21)),
            n_z=int(grid_doc.get("n_z", 11)),
        )
    except GridError as exc:
        errors.append(str(exc))
    try:
        gb = solver_doc.get("grad_bound")
        solver = SolverConfig(
            dt=dt,
            grad_bound=None if gb is None else float(gb),
            check_monotonicity_each_step=bool(
                solver_doc.get("check_monotonicity_each_step", True)
            ),
        )
    except GridError as exc:
        errors.append(str(exc))

    regime = str(doc.get("regime", "all"))
    if regime not in REGIMES:
        errors.append(f"regime must be one of {REGIMES}, got {regime!r}")
    n_paths = int(doc.get("n_paths", 100))
    if n_paths < 0:
        errors.append("n_paths must be >= 0")
    quad_nodes = int(doc.get("quad_nodes", 20))
    if quad_nodes < 2:
        errors.append("quad_nodes must be >= 2")
    threads = int(doc.get("threads", 1))
    if threads < 1:
        errors.append("threads must be >= 1")
    initial_variance = float(doc.get("initial_variance", 1.0))
    if initial_variance < 0:
        errors.append("initial_variance must be >= 0")

    # observation times must sit on the solver time grid
    if model is not None and solver is not None:
        for t in model.obs_times:
            n = round(t / solver.dt)
            if abs(n * solver.dt - t) > 1e-9:
                errors.append(
                    f"observation time {t} is not a multiple of dt={solver.dt}"
                )

    if errors:
        raise ConfigError("; ".join(errors))

    return RunConfig(
        model=model,
        grid=grid,
        solver=solver,
        regime=regime,
        n_paths=n_paths,
        seed=int(doc.get("seed", 0)),
        output_dir=str(doc.get("output_dir", "out")),
        quad_nodes=quad_nodes,
        initial_mean=float(doc.get("initial_mean", 1.0)),
        initial_variance=initial_variance,
        threads=threads,
    )


def _fmt(x) -> str:
    return f"{float(x):.17g}"


def _write_csv(path: Path, header_cols, rows):
    lines = [f"# oubelief {__version__}", ",".join(header_cols)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _write_manifest(path: Path, config: RunConfig, extra: dict):
    lines = [
        f"oubelief_version={__version__}",
        f"numpy_version={np.__version__}",
        f"scipy_version={scipy.__version__}",
        f"python_version={sys.version.split()[0]}",
        f"regime={config.regime}",
        f"seed={config.seed}",
        f"n_paths={config.n_paths}",
        f"threads={config.threads}",
        f"quad_nodes={config.quad_nodes}",
        f"initial_mean={_fmt(config.initial_mean)}",
        f"initial_variance={_fmt(config.initial_variance)}",
        f"model.theta={_fmt(config.model.theta)}",
        f"model.b={_fmt(config.model.b)}",
        f"model.c_control={_fmt(config.model.c_control)}",
        f"model.eps={_fmt(config.model.eps)}",
        f"model.horizon={_fmt(config.model.horizon)}",
        "model.obs_times=" + ",".join(_fmt(t) for t in config.model.obs_times),
        f"grid.m_min={_fmt(config.grid.m_min)}",
        f"grid.m_max={_fmt(config.grid.m_max)}",
        f"grid.z_min={_fmt(config.grid.z_min)}",
        f"grid.z_max={_fmt(config.grid.z_max)}",
        f"grid.n_m={config.grid.n_m}",
        f"grid.n_z={config.grid.n_z}",
        f"solver.dt={_fmt(config.solver.dt)}",
        f"solver.grad_bound={config.solver.grad_bound}",
        f"solver.check_monotonicity_each_step={config.solver.check_monotonicity_each_step}",
    ]
    lines += [f"{k}={v}" for k, v in extra.items()]
    path.write_text("\n".join(lines) + "\n")


def run(config: RunConfig) -> int:
    """Full orchestration: validate, solve regimes, simulate, emit files."""
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    report = validate_domain(config.grid, config.model)
    if not report.valid:
        for reason in report.reasons:
            print(f"invalid domain: {reason}", file=sys.stderr)
        return EXIT_VALIDATION

    want_noobs = config.regime in ("no_obs", "all")
    want_noisy = config.regime in ("noisy_obs", "all")
    want_perfect = config.regime in ("perfect_obs", "all")

    rule = QuadratureRule.gauss_hermite(config.quad_nodes)
    solutions: dict = {}
    try:
        if want_noobs:
            solutions["no_obs"] = solve_value_function(
                config.model, config.grid, config.solver, with_observations=False
            )
        if want_noisy:
            solutions["noisy_obs"] = solve_value_function(
                config.model,
                config.grid,
                config.solver,
                with_observations=True,
                rule=rule,
            )
    except CflViolationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    perfect = solve_perfect_obs_riccati(config.model) if want_perfect else None

    grid = config.grid
    m_nodes = grid.m_nodes
    z_nodes = grid.z_nodes
    grid_regimes = [r for r in ("no_obs", "noisy_obs") if r in solutions]

    # value function at t=0 over the full grid
    cols = ["m", "z"] + [f"value_{r}" for r in grid_regimes]
    rows = []
    for i, m in enumerate(m_nodes):
        for j, z in enumerate(z_nodes):
            rows.append(
                [m, z] + [solutions[r].layers[0].values[i, j] for r in grid_regimes]
            )
    if grid_regimes:
        _write_csv(out / "value_t0.csv", cols, rows)

    # slices through time: z fixed at z_max, m fixed at m_max
    if grid_regimes:
        any_sol = solutions[grid_regimes[0]]
        times = any_sol.times
        rows_m, rows_z = [], []
        for n, t in enumerate(times):
            for i, m in enumerate(m_nodes):
                rows_m.append(
                    [t, m]
                    + [solutions[r].layers[n].values[i, -1] for r in grid_regimes]
                )
            for j, z in enumerate(z_nodes):
                rows_z.append(
                    [t, z]
                    + [solutions[r].layers[n].values[-1, j] for r in grid_regimes]
                )
        _write_csv(
            out / "value_m_slice.csv",
            ["t", "m"] + [f"value_{r}" for r in grid_regimes],
            rows_m,
        )
        _write_csv(
            out / "value_z_slice.csv",
            ["t", "z"] + [f"value_{r}" for r in grid_regimes],
            rows_z,
        )

    # regime comparison at t=0 on the z = z_max slice
    comp_cols = ["x"]
    comp_vals = [list(m_nodes)]
    if perfect is not None:
        comp_cols.append("value_perfect_obs")
        comp_vals.append([perfect_obs_value(perfect, 0.0, x) for x in m_nodes])
    for r in grid_regimes:
        comp_cols.append(f"value_{r}")
        comp_vals.append(list(solutions[r].layers[0].values[:, -1]))
    if len(comp_cols) > 1:
        _write_csv(
            out / "comparison.csv", comp_cols, list(zip(*comp_vals))
        )

    # monotonicity certification (a-priori bound if given, else terminal-data bound)
    L = config.solver.grad_bound
    if L is None:
        L = 2.0 * max(abs(grid.m_min), abs(grid.m_max)) + 1.0
    mono = check_monotonicity(grid, config.model, config.solver.dt, L)
    (out / "monotonicity_report.txt").write_text(
        mono.describe(grid) + f"\n(gradient bound L={_fmt(L)})\n"
    )
    if not mono.holds:
        print(f"numerical failure: {mono.describe(grid)}", file=sys.stderr)
        return EXIT_NUMERICAL

    extra = {"monotonicity_margin": _fmt(mono.margin)}

    # optimal-path simulation (noisy regime when available)
    if config.n_paths > 0 and grid_regimes:
        sim_regime = "noisy_obs" if "noisy_obs" in solutions else "no_obs"
        start = GaussianBelief(config.initial_mean, config.initial_variance)
        try:
            trajectories = simulate_paths(
                solutions[sim_regime],
                start,
                config.model,
                config.n_paths,
                config.seed,
                threads=config.threads,
            )
        except SimulationError as exc:
            print(f"numerical failure: {exc}", file=sys.stderr)
            return EXIT_NUMERICAL
        times = trajectories[0].times
        mean_cols = ["time"] + [f"mean_{k}" for k in range(len(trajectories))]
        mean_rows = [
            [times[r]] + [tr.means[r] for tr in trajectories]
            for r in range(len(times))
        ]
        _write_csv(out / "paths_mean.csv", mean_cols, mean_rows)
        var_rows = [
            [times[r], trajectories[0].variances[r]] for r in range(len(times))
        ]
        _write_csv(out / "paths_var.csv", ["time", "variance"], var_rows)
        cost_mean, cost_se = estimate_cost(trajectories, config.model)
        extra["cost_mean"] = _fmt(cost_mean)
        extra["cost_se"] = _fmt(cost_se)
        extra["sim_regime"] = sim_regime

    _write_manifest(out / "manifest.txt", config, extra)
    print(f"wrote artifacts to {out}")
    return EXIT_OK


def _cmd_check(config: RunConfig) -> int:
    report = validate_domain(config.grid, config.model)
    for reason in report.reasons:
        print(f"invalid domain: {reason}", file=sys.stderr)
    L = config.solver.grad_bound
    if L is None:
        L = 2.0 * max(abs(config.grid.m_min), abs(config.grid.m_max)) + 1.0
    mono = check_monotonicity(config.grid, config.model, config.solver.dt, L)
    print(f"domain valid: {report.valid}")
    print(mono.describe(config.grid) + f" (L={_fmt(L)})")
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "monotonicity_report.txt").write_text(
        f"domain valid: {report.valid}\n"
        + "".join(f"reason: {r}\n" for r in report.reasons)
        + mono.describe(config.grid)
        + f"\n(gradient bound L={_fmt(L)})\n"
    )
    if not report.valid:
        return EXIT_VALIDATION
    if not mono.holds:
        return EXIT_NUMERICAL
    return EXIT_OK


def _cmd_characteristics(config: RunConfig) -> int:
    """Sample closed-form characteristic curves from a fan of root points."""
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    grid = config.grid
    taus = np.linspace(0.0, 1.0, 101)
    rows = []
    for m0 in np.linspace(grid.m_min, grid.m_max, 9):
        for z0 in np.linspace(grid.z_min, grid.z_max, 9):
            # terminal-data gradient of m^2 + z: p0 = 2 m0, q0 = 1
            consts = characteristic_constants(m0, z0, 2.0 * m0, 1.0, config.model)
            for tau in taus:
                st = characteristic_state(consts, tau, config.model)
                rows.append([m0, z0, tau, st.m, st.z, st.p, st.q])
    _write_csv(
        out / "characteristics.csv",
        ["m0", "z0", "tau", "m", "z", "p", "q"],
        rows,
    )
    print(f"wrote {out / 'characteristics.csv'}")
    return EXIT_OK


def _cmd_kalman_demo(config: RunConfig) -> int:
    """Cross-check the d=1 multidimensional operations against the scalar path."""
    p = config.model
    nd = NdModelParams(
        theta=[p.theta],
        b=[[p.b]],
        c_control=[p.c_control],
        obs_matrix=[[1.0]],
        eps=p.eps,
    )
    belief = NdBelief(mean=[config.initial_mean], cov=[[config.initial_variance]])
    scalar = GaussianBelief(config.initial_mean, config.initial_variance)
    y = 0.3
    upd_nd = kalman_update(belief, nd.obs_matrix, nd.eps, [y])
    upd_1d = gaussian_posterior(scalar, y, p.eps)
    err_mean = abs(upd_nd.mean[0] - upd_1d.mean)
    err_var = abs(upd_nd.cov[0, 0] - upd_1d.variance)
    print(f"kalman_update vs gaussian_posterior: |dmean|={err_mean:.3e}, "
          f"|dvar|={err_var:.3e}")

    rule = gauss_hermite_nd(config.quad_nodes, 1)
    phi_nd = lambda mean, cov: mean[0] ** 2 + cov[0, 0]
    e_nd = expected_update_value(phi_nd, belief, nd.obs_matrix, nd.eps, rule)
    e_1d = expected_posterior_value(
        lambda m, z: m * m + z,
        scalar,
        p.eps,
        QuadratureRule.gauss_hermite(config.quad_nodes),
    )
    print(f"expected_update_value vs scalar route: |diff|={abs(e_nd - e_1d):.3e}")

    grad = NdGradient(d_m=[0.7], d_z=[[-0.4]])
    h_nd = hamiltonian_nd(belief.mean, belief.cov, grad, nd)
    m0, z0 = config.initial_mean, config.initial_variance
    h_1d = (
        z0
        + m0 * m0
        - p.theta * m0 * 0.7
        + (p.b**2 - 2 * p.theta * z0) * (-0.4)
        - 0.7**2 / (4 * p.c_control)
    )
    print(f"hamiltonian_nd d=1 reduction: |diff|={abs(h_nd - h_1d):.3e}")
    ok = max(err_mean, err_var, abs(e_nd - e_1d), abs(h_nd - h_1d)) < 1e-10
    print("all reduction checks passed" if ok else "REDUCTION CHECKS FAILED")
    return EXIT_OK if ok else EXIT_NUMERICAL


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oubelief",
        description="Belief-state optimal control of an OU process with "
        "discrete noisy observations",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("solve", "solve the value function(s) and write CSV artifacts"),
        ("simulate", "solve and additionally simulate optimal belief paths"),
        ("check", "validate the domain and certify the monotonicity condition"),
        ("characteristics", "dump closed-form characteristic curve samples"),
        ("kalman-demo", "run the multidimensional reduction checks"),
    ]:
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", type=Path, help="TOML configuration file")
        cmd.add_argument("--regime", choices=REGIMES)
        cmd.add_argument("--seed", type=int)
        cmd.add_argument("--paths", type=int, dest="paths")
        cmd.add_argument("--out", type=Path)
        cmd.add_argument("--threads", type=int)
        cmd.add_argument("--check-cfl", choices=["on", "off"])
    return parser


def _load_config(args) -> RunConfig:
    text = args.config.read_text() if args.config else ""
    config = parse_config(text)
    overrides = {}
    if args.regime is not None:
        overrides["regime"] = args.regime
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.paths is not None:
        if args.paths < 0:
            raise ConfigError("n_paths must be >= 0")
        overrides["n_paths"] = args.paths
    if args.out is not None:
        overrides["output_dir"] = str(args.out)
    if args.threads is not None:
        if args.threads < 1:
            raise ConfigError("threads must be >= 1")
        overrides["threads"] = args.threads
    if args.check_cfl is not None:
        overrides["solver"] = replace(
            config.solver, check_monotonicity_each_step=args.check_cfl == "on"
        )
    return replace(config, **overrides) if overrides else config


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = _load_config(args)
    except (ConfigError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    if args.command == "solve":
        return run(replace(config, n_paths=0))
    if args.command == "simulate":
        return run(config)
    if args.command == "check":
        return _cmd_check(config)
    if args.command == "characteristics":
        return _cmd_characteristics(config)
    if args.command == "kalman-demo":
        return _cmd_kalman_demo(config)
    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
