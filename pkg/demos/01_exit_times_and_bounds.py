"""
Mean exit times from equatorial tubes and polar balls
=====================================================

Brownian motion on the unit sphere S^n leaves a thin tube around the equator
slower and slower as n grows, while it leaves a polar ball faster and faster.
This walk-through evaluates both exit times and the two bounds that sandwich
them.
"""

# %%
import math

import numpy as np

from sphexit import (BallGeometry, TubeGeometry, closed_form_tube_n2, exit_time_ball,
                     exit_time_tube, lower_bound_F, upper_bound_G)

# %% [markdown]
# On S^2 the tube exit time has the closed form ln cos s - ln cos delta, a handy
# sanity check for the quadrature.

# %%
tube = TubeGeometry(2, math.pi / 4)
s = np.linspace(0.0, tube.delta, 5)
print(np.column_stack([s, exit_time_tube(tube, s), closed_form_tube_n2(tube.delta, s)]))

# %% [markdown]
# Hold the tube half-width fixed and raise the dimension.  The center exit
# time of the tube and the lower bound F both blow up.  The ball of the
# complementary radius collapses, and so does the upper bound G.

# %%
delta = 0.5
print(f"{'n':>5} {'u(0)':>14} {'F(delta/2)':>14} {'v(0)':>12} {'G':>12}")
for n in (2, 10, 50, 100, 200):
    t = TubeGeometry(n, delta)
    b = BallGeometry.from_delta(n, delta)
    print(f"{n:5d} {exit_time_tube(t, 0.0):14.6g} {lower_bound_F(t, 1, delta / 2):14.6g} "
          f"{exit_time_ball(b, 0.0):12.6g} {upper_bound_G(b):12.6g}")

# %% [markdown]
# The bound F is evaluated in log space, so it stays finite long after
# cos^{n-1} underflows.

# %%
for n in (500, 1000, 5000):
    print(n, lower_bound_F(TubeGeometry(n, delta), 1, 0.25))
