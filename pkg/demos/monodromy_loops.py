"""Numerical monodromy of the apparent Fuchsian equation along the two cycles,
compared with the multipliers predicted from the Hermite-Krichever data.
The loop around the apparent singularity of the rational form is trivial.
"""
import numpy as np

from heunlab import elliptic as ell
from heunlab import monodromy as mo
from heunlab import painleve as pv

inst = pv.P6Instance("hitchin_l0000", (0.31, 0.17))
tau = 1.2j
L = ell.lattice_from_tau(tau)
ode = pv.instance_ode(inst, tau)
print(f"b1 = {ode.b1:.10f}, mu1 = {ode.mu1:.10f}, delta1 = {ode.delta1:.10f}")
print(f"obstruction to a log term at delta1: {pv.frobenius_apparency_check(ode):.1e}")

hk, alpha, _, _ = pv.hk_from_instance(inst, L)
lo = mo.fuchsian_m1_ode(ode)
base = 0.137 + 0.291 * tau
for k in (1, 3):
    res = mo.cycle_monodromy(lo, base, k)
    cmp = mo.multiplier_compare(res, alpha, hk.kappa, k, L)
    print(f"cycle 2 omega_{k}: eigenvalues {np.round(res.eigenvalues, 10)}")
    print(f"                predicted   {np.round(cmp.predicted, 10)}  residual {cmp.residual:.1e}")

fr = pv.frame_map(ode.b1, ode.mu1, ode.l, L)
rode = mo.rational_p6_ode(fr.rational_ode())
m = mo.monodromy_matrix(rode, mo.loop_around(rode, fr.lam), predict_det=False)
print(f"lambda = {fr.lam:.10f}; loop around it differs from the identity by "
      f"{np.max(np.abs(m.matrix - np.eye(2))):.1e}")
