"""Explicit Painleve VI solutions from the Hitchin family and its l0 = 1 analogue.

For each family the residual of the elliptic and the rational form is
sampled along Im tau in [1, 1.5], and the monodromy exponents are shown
to stay put while tau moves.
"""
import cmath

import numpy as np

from heunlab import painleve as pv

grid = [1j * (1 + 0.5 * k / 24) for k in range(25)]

for family in ("hitchin_l0000", "explicit_l1000"):
    inst = pv.P6Instance(family, (0.31, 0.17))
    print(f"{inst.name}  kappas = {inst.kappas}")
    for mode in ("elliptic", "rational", "hamiltonian"):
        rep = pv.p6_residual(inst, grid, mode)
        print(f"  {mode:11s} residual  max {rep.max:.1e}  median {rep.median:.1e}")
    seed, mult = None, []
    for tau in grid[::6]:
        mc = pv.monodromy_constants(inst, tau, seed=seed)
        seed = mc.alpha
        mult.append([cmath.exp(e) for e in mc.exponents])
        print(f"  tau={tau.imag:.3f}i  b1={pv.family_b1(inst, tau):.6f}  "
              f"exp(C_1)={mult[-1][0]:.10f}  exp(C_3)={mult[-1][1]:.10f}")
    m = np.array(mult)
    print(f"  largest drift of the multipliers: {np.max(np.abs(m - m[0])):.1e}")

# degenerate (Q = 0) families have no multiplier but still solve the equation
for family, idx in (("degenerate_mu0", None), ("degenerate_mui", 2), ("degenerate_l1000_ei", 1)):
    inst = pv.P6Instance(family, (0.3, 1.0), idx)
    print(f"{inst.name}: elliptic residual {pv.p6_residual(inst, grid, 'elliptic').max:.1e}")
