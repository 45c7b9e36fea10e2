"""Multidimensional belief algebra: Kalman updates and the Hamiltonian.

Beliefs are Gaussian N(mean, cov) in d dimensions.  The observation jump is
the conjugate Kalman update, the expectation over the jump is a Gaussian
quadrature (or Monte Carlo) over the innovation, and the Hamiltonian couples
means with the half-vectorized covariance.  For d = 1 everything collapses to
the scalar formulas used by the grid solver.
"""

import numpy as np

import oubelief as ob

# --- d = 1 reduction -------------------------------------------------------
belief1 = ob.NdBelief(mean=[0.4], cov=[[0.9]])
post = ob.kalman_update(belief1, h=[[1.0]], eps=0.9, y=[1.0])
scalar = ob.gaussian_posterior(ob.GaussianBelief(0.4, 0.9), y=1.0, eps=0.9)
print("d = 1 Kalman update vs scalar conjugate update:")
print(f"  mean: {post.mean[0]:.6f} vs {scalar.mean:.6f}")
print(f"  var : {post.cov[0, 0]:.6f} vs {scalar.variance:.6f}")
print()

# --- a genuinely 2-d update ------------------------------------------------
belief = ob.NdBelief(mean=[0.5, -0.3], cov=[[1.0, 0.4], [0.4, 0.8]])
h = np.array([[1.0, 0.0]])  # only the first coordinate is measured
post2 = ob.kalman_update(belief, h=h, eps=0.5, y=[1.2])
print("2-d belief, noisy measurement of the first coordinate only:")
print(f"  posterior mean: {np.array2string(post2.mean, precision=4)}")
print("  posterior cov :")
print(np.array2string(post2.cov, precision=4, prefix="  "))
print("  (the correlation lets the unobserved coordinate move too, and the")
print("   whole covariance shrinks in the Loewner order)")
eigs = np.linalg.eigvalsh(belief.cov - post2.cov)
print(f"  prior - posterior covariance eigenvalues: "
      f"{np.array2string(eigs, precision=4)} (nonnegative up to round-off)")
print()

# --- expected value over the observation jump ------------------------------
def phi(mean, cov):
    return float(mean @ mean + np.trace(cov))

rule = ob.gauss_hermite_nd(20, 1)
exact = phi(belief.mean, belief.cov)  # law of total variance
quad = ob.expected_update_value(phi, belief, h, 0.5, rule)
mc = ob.expected_update_value(phi, belief, h, 0.5,
                              ob.MonteCarloRule(n_samples=200_000, seed=1))
print("E[ |mean|^2 + tr(cov) ] over the jump (exactly preserved in law):")
print(f"  prior value : {exact:.6f}")
print(f"  quadrature  : {quad:.6f}")
print(f"  Monte Carlo : {mc:.6f}")
print()

# --- Hamiltonian reduction and half-vectorization --------------------------
params2 = ob.NdModelParams(
    theta=[0.25, 0.4],
    b=[[0.5, 0.0], [0.0, 0.3]],
    c_control=[1.0, 2.0],
    obs_matrix=h,
    eps=0.5,
)
grad = ob.NdGradient(d_m=[0.7, -0.2], d_z=[[0.3, 0.1], [0.0, 0.5]])
val = ob.hamiltonian_nd(belief.mean, belief.cov, grad, params2)
print(f"H(m, Sigma, grad) for the 2-d model: {val:.6f}")

v = ob.half_vec(belief.cov)
print(f"half-vectorized covariance: {np.array2string(v, precision=3)}")
print(f"round trip exact: {np.array_equal(ob.from_half_vec(v, 2), belief.cov)}")
