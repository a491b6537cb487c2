"""
Higher exit moments
===================

The k-th moment of the exit time solves a Poisson problem driven by the
(k-1)-th moment.  Here the hierarchy is solved two ways and checked against
the moment bounds.
"""

# %%
import numpy as np

from sphexit import (BallGeometry, TubeGeometry, factorial_cap, lower_bound_F, moment_hierarchy,
                     pde_residual)

# %%
tube = TubeGeometry(10, 0.6)
quad = moment_hierarchy(tube, 3, grid_size=257)
ode = moment_hierarchy(tube, 3, grid_size=257, method="ode")
for a, b in zip(quad, ode):
    print(f"k={a.k}: u_k(0) = {a.values[0]:.10g}, ODE cross-check differs by "
          f"{np.max(np.abs(a.values - b.values)):.2e}")

# %% [markdown]
# Lower bounds for the tube moments, evaluated on the same grid.

# %%
for prof in quad:
    gap = prof.values[1:-1] - lower_bound_F(tube, prof.k, prof.grid[1:-1])
    print(f"k={prof.k}: min(u_k - F_k) = {gap.min():.4g}")

# %% [markdown]
# For the ball, the k-th moment never exceeds k! v_1(0)^k.

# %%
ball = BallGeometry(10, 0.6)
for prof in moment_hierarchy(ball, 3, grid_size=257):
    print(f"k={prof.k}: v_k(0) = {prof.values[0]:.6g} <= {factorial_cap(ball, prof.k):.6g}")

# %% [markdown]
# A finite-difference residual of the Poisson equation shows second-order
# behaviour as the grid is refined.  It is small for moderate dimensions and
# large once the exit time itself grows exponentially.

# %%
for size in (257, 513, 1025, 2049):
    print(size, pde_residual(moment_hierarchy(TubeGeometry(5, 0.5), 1, size)[0]))
print("n=25, delta=0.8:", pde_residual(moment_hierarchy(TubeGeometry(25, 0.8), 1, 2049)[0]))
print("u(0) there:", moment_hierarchy(TubeGeometry(25, 0.8), 1, 33)[0].values[0])
