"""
Two formulations, one solution
==============================

The same dynamics can be written for the kinetic pair (f1, f2), which move
at speeds +-lam/eps and relax to Maxwellians, or for the C-D pair (w1, w2).
The two solvers share nothing but the grid, so agreement of u is a strong
check on both.
"""
import time

import numpy as np

from jinxin.harness import l2_norm
from jinxin.model import (
    Grid,
    ModelParams,
    StateBGK,
    bgk_to_uv,
    cd_to_uv,
    gaussian,
    uv_to_bgk,
    uv_to_cd,
    well_prepared_data,
)
from jinxin.solvers import SolverConfig, bgk_solve, nonlinear_jinxin_solve

g = Grid(2048, 500.0)
p = ModelParams(0.1, 1.0, 0.5)
w0 = uv_to_cd(well_prepared_data(gaussian(g, 0.3), p, g), p)
cfg = SolverConfig(1e-3, 2.0, record=(0.0, 0.5, 1.0, 2.0))

t0 = time.perf_counter()
cd = nonlinear_jinxin_solve(w0, cfg, p, g)
t1 = time.perf_counter()
bgk = bgk_solve(uv_to_bgk(cd_to_uv(w0, p), p), cfg, p, g)
t2 = time.perf_counter()
print(f"C-D solver {t1 - t0:.1f} s, BGK solver {t2 - t1:.1f} s")

print("    t     |u_BGK - u_CD|_0    mass drift (BGK)")
m0 = bgk.mass()[0]
for k, t in enumerate(cd.times):
    u_bgk = bgk_to_uv(StateBGK(bgk.states[k, 0], bgk.states[k, 1]), p).u
    gap = l2_norm(u_bgk - cd.states[k, 0], g)
    print(f"  {t:4.1f}     {gap:.3e}          {abs(bgk.mass()[k] - m0) / m0:.1e}")

# the kinetic variables are far from equilibrium only at O(eps)
f = bgk.states[-1]
print("\nmax |f1 - f2| at T:", np.max(np.abs(f[0] - f[1])))
