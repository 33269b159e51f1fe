"""
Decay rates of the relaxation system
====================================

Small data spread out like the heat equation: the conserved part decays
like t^(-1/4) in L2 and the dissipative part like t^(-3/4).  We sample the
exact linear solution at log-spaced times and fit power laws.  Pass
``--nonlinear`` to run the Burgers case with the time stepper instead
(about a minute).
"""
import sys

from jinxin.harness import decay_study
from jinxin.model import Grid, ModelParams

nonlinear = "--nonlinear" in sys.argv

# the box must be much wider than the diffusive footprint sqrt(lam^2 t)
g = Grid(8192 if nonlinear else 2**14, 2000.0)

for a in (0.0, 0.5):
    if nonlinear:
        p = ModelParams(0.1, 1.0, a)
        r = decay_study(p, g)
    else:
        # Gaussian in w1, nothing in w2
        p = ModelParams(0.1, 1.0, a, h=())
        r = decay_study(p, g, initial="conservative")
    print(f"\na = {a}, window t in [{r.fits['w1'].window[0]:g}, {r.fits['w1'].window[1]:g}]")
    for name, f in r.fits.items():
        print(f"  {name:10s} exponent {f.exponent:8.4f}   rms residual {f.residual:.1e}")
    for c in r.checks:
        print("  " + c.describe())

# a = 0 makes d_t u = lam^2 u_xx, so its exponent is -5/4 instead of -3/4
