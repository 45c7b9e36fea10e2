"""Why the truncated box [-1, 1] x [0, 1] needs no boundary conditions.

The first-order part of the reversed-time PDE propagates information along
closed-form characteristic curves.  The variance curves diverge from the
fixed point b^2/(2 theta) = 0.5 and the mean curves from m = 0, so on any
box containing both centers the characteristics point outward everywhere:
nothing flows in from outside the box, and the missing one-sided difference
at a boundary can safely be replaced by the interior one.
"""

import numpy as np

import oubelief as ob

params = ob.reference_params()
print(f"variance fixed point b^2/(2 theta) = {params.stationary_variance}")
print()

print("characteristic curves from a fan of root points (tau = 0 -> 1):")
for m0, z0 in [(0.2, 0.6), (-0.2, 0.6), (0.2, 0.4), (-0.5, 0.5)]:
    consts = ob.characteristic_constants(m0, z0, 2 * m0, 1.0, params)
    s0 = ob.characteristic_state(consts, 0.0, params)
    s1 = ob.characteristic_state(consts, 1.0, params)
    print(f"  (m, z) = ({m0:+.1f}, {z0:.1f}) -> ({s1.m:+.3f}, {s1.z:.3f})"
          f"   [m moves away from 0, z away from 0.5]")
print()

good = ob.validate_domain(ob.Grid(-1, 1, 0, 1, 21, 11), params)
print(f"box [-1,1] x [0,1]: valid = {good.valid}")

bad = ob.validate_domain(ob.Grid(0.1, 1.0, 0.0, 0.4, 11, 5), params)
print(f"box [0.1,1] x [0,0.4]: valid = {bad.valid}")
for reason in bad.reasons:
    print(f"  - {reason}")
print()

# closed form vs direct integration of the characteristic ODE system
rng = np.random.default_rng(0)
m0, z0, p0, q0 = rng.uniform(-1, 1), rng.uniform(0, 1), 0.7, -0.3
consts = ob.characteristic_constants(m0, z0, p0, q0, params)
state = [m0, z0, p0, q0]
h = 1.0 / 100000
for _ in range(100000):  # plain Euler is enough for a visual check
    s = ob.CharacteristicState(*state)
    rhs = ob.characteristic_rhs(s, params)
    state = [x + h * d for x, d in zip(state, rhs)]
closed = ob.characteristic_state(consts, 1.0, params)
print("closed form vs 1e5-step Euler at tau = 1:")
print(f"  m: {closed.m:+.6f} vs {state[0]:+.6f}")
print(f"  z: {closed.z:.6f} vs {state[1]:.6f}")
