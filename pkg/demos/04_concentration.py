"""
Volume concentration near the equator
=====================================

Almost all of the volume of a high-dimensional sphere lies in a thin
equatorial tube.  Compare the exact fraction with the Levy lower bound and
evaluate the rigidity volume cap.
"""

# %%
import numpy as np

from sphexit import (TubeGeometry, levy_lower_bound, rigidity_volume_cap, scan,
                     sphere_theorem_threshold, tube_volume_fraction, volume_fraction_table)
from sphexit.geometry import sphere_volume

# %%
dims, table = volume_fraction_table(1000, [0.1, 0.3])
for n in (2, 10, 100, 1000):
    row = table[n - 2]
    print(f"n={n:5d}: fraction {row[0]:.6f} {row[1]:.6f}   "
          f"Levy {levy_lower_bound(n, 0.1):+.6f} {levy_lower_bound(n, 0.3):+.6f}")

# %% [markdown]
# The Levy bound is negative (vacuous) for small n and is reported as such.
# Once it is positive the cap is defined.  In very high dimension the cap
# underflows, but its logarithm is still available.

# %%
for n, d in [(2, 0.1), (51, 0.5), (5000, 0.5)]:
    cap = rigidity_volume_cap(n, d)
    print(n, d, cap.defined, cap.value, cap.log_value)

# %%
vol = sphere_volume(50)
print([sphere_theorem_threshold(51, 0.5, f * vol) for f in (0.3, 0.6, 1.0)])

# %% [markdown]
# A scan puts the exit times, the bounds and the volume quantities side by side.

# %%
for r in scan([10, 100, 1000], [0.5]):
    print(r.n, r.u_at_center, r.v_at_center, r.tube_volume_fraction, r.levy_bound)
print(tube_volume_fraction(TubeGeometry(1000, 0.3)), np.nextafter(1.0, 0.0))
