"""Solve the full problem with noisy observations at t = 0.25, 0.5, 0.75.

The solver marches the monotone scheme backward between observation dates and
applies the Bayesian observation jump at each date.  The jump replaces the
layer U(t_i, .) by the Gaussian expectation over posterior beliefs, which can
only lower the value: information helps a minimizing controller.
"""

import numpy as np

import oubelief as ob

params = ob.reference_params()
grid = ob.Grid(-1.0, 1.0, 0.0, 1.0, 21, 11)
cfg = ob.SolverConfig(dt=0.0125)

report = ob.validate_domain(grid, params)
print(f"domain valid (outflowing characteristics): {report.valid}")
mono = ob.check_monotonicity(grid, params, cfg.dt, L=3.0)
print(mono.describe(grid))
print()

noisy = ob.solve_value_function(params, grid, cfg, with_observations=True)
no_obs = ob.solve_value_function(params, grid, cfg, with_observations=False)

print("value at t=0 along the z = 1 slice (m = -1 .. 1):")
print("  noisy :", np.array2string(noisy.layers[0].values[::5, -1], precision=4))
print("  no-obs:", np.array2string(no_obs.layers[0].values[::5, -1], precision=4))
print()

print("jump size at each observation date (max over the grid, z > 0):")
for idx in sorted(noisy.pre_jump):
    pre = noisy.pre_jump[idx].values[:, 1:]
    post = noisy.layers[idx].values[:, 1:]
    drop = post - pre
    print(f"  t = {noisy.times[idx]:.2f}: value drops by up to {drop.max():.4f}, "
          f"never rises (max pre-post = {(pre - post).max():.2e})")
print()
print("Three observations are worth "
      f"{no_obs.layers[0].values[-1, -1] - noisy.layers[0].values[-1, -1]:.4f} "
      "at (m, z) = (1, 1).")
