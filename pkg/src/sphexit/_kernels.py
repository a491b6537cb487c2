"""Compiled first-passage kernels for the radial diffusions.

One call simulates every path of one random stream.  Eight paths advance in
lockstep so that the ``tan``/``cot`` evaluations of independent paths overlap;
the order in which random numbers are consumed is fixed by the lane layout,
so a stream's output depends only on its generator state.
"""
import math

import numpy as np
from numba import njit

LANES = 8
# skip the bridge test when the crossing probability is below exp(-40)
_BRIDGE_CUTOFF = 40.0


@njit(nogil=True, cache=True)
def _pole_correction(t):
    # cot t - 1/t, smooth through t = 0
    if t < 1e-4:
        return -t / 3.0
    return math.cos(t) / math.sin(t) - 1.0 / t


@njit(nogil=True, cache=True)
def run_stream(rng, ball, n, bound, start, npaths, dt, sigma, drift, sign,
               antithetic, max_steps, times):
    """Fill ``times[:npaths]`` with exit times; return the number of capped paths.

    Tube (``ball`` false): dX = -drift (n-1) tan X dt + sigma dW, exit at |X| >= bound.
    Ball: dT = drift (n-1) cot T dt + sigma dW on [0, bound), exit at T >= bound.
    Within 10 sigma of the pole the ball step is the exact radial step of
    flat n-dimensional Brownian motion plus the curvature part of the drift.
    After every step that stays inside, a Brownian-bridge test decides whether
    the continuous path crossed the boundary during the step.  An exit in
    step i is recorded at time (i - 1/2) dt.
    """
    var = sigma * sigma
    near = 10.0 * sigma
    cdt = drift * (n - 1) * dt
    shape = 0.5 * (n - 1)
    x = np.full(LANES, start)
    steps = np.zeros(LANES, np.int64)
    path = np.full(LANES, -1, np.int64)
    z = np.zeros(LANES)
    fresh = np.zeros(LANES, np.bool_)
    nxt = 0
    for j in range(LANES):
        if nxt < npaths:
            path[j] = nxt
            nxt += 1
    capped = 0
    live = 1
    while live > 0:
        fresh[:] = False
        if antithetic:
            for j in range(0, LANES, 2):
                if path[j] >= 0 or path[j + 1] >= 0:
                    g = rng.standard_normal()
                    z[j] = g
                    z[j + 1] = -g
        else:
            for j in range(LANES):
                if path[j] >= 0:
                    z[j] = rng.standard_normal()
        for j in range(LANES):
            if path[j] < 0 or fresh[j]:
                continue
            x0 = x[j]
            dw = sigma * sign * z[j]
            if ball:
                if x0 < near:
                    radial = x0 + dw
                    chi = 2.0 * rng.standard_gamma(shape)
                    x1 = math.sqrt(radial * radial + var * chi) + cdt * _pole_correction(x0)
                else:
                    x1 = x0 + cdt * math.cos(x0) / math.sin(x0) + dw
                if x1 < 0.0:
                    x1 = -x1
            else:
                x1 = x0 - cdt * math.tan(x0) + dw
            steps[j] += 1
            done = False
            if ball:
                if x1 >= bound:
                    done = True
                else:
                    e = 2.0 * (bound - x0) * (bound - x1) / var
                    if e < _BRIDGE_CUTOFF and rng.random() < math.exp(-e):
                        done = True
            else:
                if abs(x1) >= bound:
                    done = True
                else:
                    eu = 2.0 * (bound - x0) * (bound - x1) / var
                    ed = 2.0 * (bound + x0) * (bound + x1) / var
                    if eu < _BRIDGE_CUTOFF or ed < _BRIDGE_CUTOFF:
                        p = 1.0 - (1.0 - math.exp(-eu)) * (1.0 - math.exp(-ed))
                        if rng.random() < p:
                            done = True
            if done:
                times[path[j]] = (steps[j] - 0.5) * dt
            elif steps[j] >= max_steps:
                times[path[j]] = steps[j] * dt
                capped += 1
                done = True
            if not done:
                x[j] = x1
                continue
            path[j] = -1
            if not antithetic:
                if nxt < npaths:
                    path[j] = nxt
                    nxt += 1
                    x[j] = start
                    steps[j] = 0
            else:
                lead = j - (j % 2)
                if path[lead] < 0 and path[lead + 1] < 0:
                    for q in range(lead, lead + 2):
                        if nxt < npaths:
                            path[q] = nxt
                            nxt += 1
                            x[q] = start
                            steps[q] = 0
                            fresh[q] = True
        live = 0
        for j in range(LANES):
            if path[j] >= 0:
                live += 1
    return capped
