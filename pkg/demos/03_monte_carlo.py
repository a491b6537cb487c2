"""
Monte Carlo exit times
======================

Simulate the radial part of spherical Brownian motion with Euler-Maruyama and
compare the sample moments with the deterministic solver.
"""

# %%
import math

from sphexit import (BallGeometry, SimulationConfig, TubeGeometry, convergence_sweep,
                     moment_hierarchy, simulate)

# %%
for geom in (TubeGeometry(3, math.pi / 4), BallGeometry(10, 0.6)):
    cfg = SimulationConfig(geom, 0.0, paths=40_000, dt=1e-4, seed=1, streams=8)
    st = simulate(cfg, k_max=2)
    exact = [p.values[0] for p in moment_hierarchy(geom, 2)]
    for k in range(2):
        z = (st.raw_moments[k] - exact[k]) / st.std_errors[k]
        print(f"{geom.kind} n={geom.n} moment {k + 1}: {st.raw_moments[k]:.6f} "
              f"vs {exact[k]:.6f} (z = {z:+.2f})")

# %% [markdown]
# Results depend on the seed and the number of random streams, never on how
# many threads execute them.

# %%
cfg = SimulationConfig(TubeGeometry(3, 0.5), 0.1, paths=5000, dt=1e-4, seed=9, streams=4)
print(simulate(cfg, workers=1) == simulate(cfg, workers=4))

# %% [markdown]
# Time-step sweep: the bias shrinks with dt.

# %%
tube = TubeGeometry(2, math.pi / 4)
target = moment_hierarchy(tube, 1)[0].values[0]
for row in convergence_sweep(SimulationConfig(tube, 0.0, 20_000, 1e-2, seed=3), [1e-2, 1e-3, 1e-4]):
    print(f"dt={row.dt:.0e}: bias {row.mean - target:+.5f} +- {row.std_error:.5f}")
