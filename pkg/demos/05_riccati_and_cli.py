"""
Curvature flow and the command line
===================================

Principal curvatures of parallel hypersurfaces obey k' = k^2 + 1.  Starting
at an equator gives tan r; starting at a pole gives -cot r.  The second half
drives the same computations through the ``sphexit`` command.
"""

# %%
import math
import subprocess
import sys

from sphexit import solve_riccati

# %%
r = math.pi / 4
print(solve_riccati(0.0, r, 1e-3).k[-1] - math.tan(r))
print(solve_riccati("negative-infinity", r, 1e-3).k[-1] + 1 / math.tan(r))

# %% [markdown]
# Every report starts with its full configuration, so it can be replayed.

# %%
def sphexit(*args):
    res = subprocess.run([sys.executable, "-m", "sphexit", *args], capture_output=True, text=True)
    return res.returncode, res.stdout, res.stderr


code, out, _ = sphexit("solve", "--kind", "tube", "--n", "2", "--delta", repr(math.pi / 4), "--at", "0")
print(out)
print(sphexit("scan", "--n", "10,100", "--delta", "0.5")[1])
print(sphexit("solve", "--n", "1", "--delta", "0.5"))
