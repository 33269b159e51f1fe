"""
Convergence to the parabolic limit
==================================

As eps goes to zero the density u of the relaxation system approaches the
solution w_p of the viscous Burgers equation with the same initial datum.
We measure the gap at T = 20 for a sequence of eps and fit the order.
"""
from jinxin.harness import epsilon_study
from jinxin.model import Grid, ModelParams

g = Grid(1024, 200.0)
eps_list = [0.4, 0.2, 0.1, 0.05]

for a in (0.0, 0.5):
    r = epsilon_study(ModelParams(0.4, 1.0, a), eps_list, g, T=20.0, jobs=4)
    print(f"\na = {a}")
    print("   eps   |u - w_p|(T)   |S|(T)")
    for e, err, s in zip(r.table["eps"], r.table["err_T"], r.table["S_T"]):
        print(f"  {e:5.2f}   {err:.4e}    {s:.4e}")
    print(f"  order of the gap in eps:      {r.epsilon_slopes['err']:.3f}")
    print(f"  order of the residual S:      {r.epsilon_slopes['S']:.3f}")
    print(f"  decay of the gap in t (eps=0.2): {r.fits['difference'].exponent:.3f}")

# both orders come out as 2: well-prepared data remove the initial layer,
# and what is left is the eps^2 d_t v term of the Chapman-Enskog expansion
