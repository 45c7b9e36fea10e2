"""Compare the three information regimes on the shared slice z = 1, t = 0.

* perfect observation: the controller sees the state continuously; the value
  f(t) x^2 + g(t) comes from its own Riccati ODE with zero terminal cost;
* noisy discrete observations: the grid solve with Bayesian jumps;
* no observations: the grid solve without jumps (equivalently the
  closed-form quadratic benchmark).

More information can only help: perfect <= noisy <= no observation.
"""

import oubelief as ob

params = ob.reference_params()
grid = ob.Grid(-1.0, 1.0, 0.0, 1.0, 21, 11)
cfg = ob.SolverConfig(dt=0.0125)

noisy = ob.solve_value_function(params, grid, cfg, with_observations=True)
noobs = ob.solve_value_function(params, grid, cfg, with_observations=False)
perfect = ob.solve_perfect_obs_riccati(params)

print(f"{'x':>5} {'perfect':>9} {'noisy':>9} {'no obs':>9}")
ordered = True
for i in range(0, grid.n_m, 2):
    x = grid.m_nodes[i]
    vp = ob.perfect_obs_value(perfect, 0.0, x)
    vn = noisy.layers[0].values[i, -1]
    v0 = noobs.layers[0].values[i, -1]
    ordered &= vp <= vn + 1e-9 <= v0 + 1e-6
    print(f"{x:5.1f} {vp:9.4f} {vn:9.4f} {v0:9.4f}")

print()
print(f"ordering perfect <= noisy <= no-obs holds at every node: {ordered}")
