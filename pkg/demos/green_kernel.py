"""
The Green kernel mode by mode
=============================

The linear system in conservative-dissipative variables is diagonal in
Fourier space: each frequency evolves by the 2x2 matrix exp(E(i xi) t).
This script looks at the two eigenvalue branches, then splits the
propagator into its parabolic part, its hyperbolic part and what is left.
"""
import numpy as np

from jinxin.green import eigenvalues_E, kernel_split, matexp_entries
from jinxin.model import ModelParams

p = ModelParams(epsilon=0.1, lam=1.0, a=0.5)

# slow branch ~ -a i xi - D xi^2 near zero, fast branch ~ -1/eps^2
xi = np.array([1e-3, 1e-2, 0.1, 1.0, 5.0, 10.0, 100.0])
ev = eigenvalues_E(xi, p)
print("     xi        Re lam1        Re lam2")
for x, l1, l2 in zip(xi, ev.lam1, ev.lam2):
    print(f"{x:8.3g} {l1.real:14.6g} {l2.real:14.6g}")

# both branches share real part -1/(2 eps^2) once the discriminant turns negative
print("\nfor large xi both real parts sit at", -0.5 / p.epsilon**2)

# the exponential is contractive: the C-D form is symmetric with damping only in w2
norms = np.linalg.norm(matexp_entries(xi, 1.0, p), 2, axis=(-2, -1))
print("spectral norms of exp(E t) at t=1:", np.round(norms, 6))

# Gamma = K + Khyp + R; at t=5 the hyperbolic part is below 1e-100
ks = kernel_split(1.0, 5.0, p)
print("\n|Gamma|:\n", np.abs(ks.gamma_hat))
print("|K|:\n", np.abs(ks.k_hat))
print("|Khyp|:\n", np.abs(ks.khyp_hat))
print("|R|:\n", np.abs(ks.r_hat))

# how the remainder shrinks when eps is halved
print("\n  eps      |R12|        |R22|")
for eps in (0.4, 0.2, 0.1, 0.05):
    r = kernel_split(1.0, 5.0, p.replace(epsilon=eps)).r_hat
    print(f"{eps:5.2f} {abs(r[0, 1]):12.4e} {abs(r[1, 1]):12.4e}")
# every halving divides R12 by about 8 and R22 by about 16, so eps^3 and eps^4
