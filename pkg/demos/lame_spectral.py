"""Lame equation with l0 = 2: the even product Xi, the constant Q and the
monodromy of the integral representation, computed three ways.

Run with ``python3 demos/lame_spectral.py``.
"""
import numpy as np

from heunlab import elliptic as ell
from heunlab import spectral as sp

tau = 1.1j
E = 1.3 + 0.4j
L = ell.lattice_from_tau(tau)
print(f"tau = {tau}, E = {E}")
print(f"e_i = {np.round(L.e, 6)}, g2 = {L.g2:.6f}, g3 = {L.g3:.6f}")

# Xi from the null vector of the symmetric-square equation, then Q from the samples
sd = sp.build_xi_even((2, 0, 0, 0), E, L)
Q = sp.compute_Q(sd)
print(f"Q (sampled)     = {Q:.12f}   spread {sd.Q_spread:.1e}")
print(f"Q (closed form) = {sp.lame2_Q(E, L):.12f}")

# monodromy of Lambda along 2 omega_k: numerically, from HK data, from genus-two periods
hk = sp.hk_parameters_lame2(E, L, sqrtQ_sign=sd.sqrtQ_sign)
print(f"HK data: alpha = {hk.alpha:.8f}, kappa = {hk.kappa:.8f}")
for k in (1, 3):
    num = sp.lambda_monodromy(sd, k)
    m = sp.monodromy_multiplier_elliptic(hk, k, L)
    hyp, _ = sp.monodromy_multiplier_hyperelliptic(E, k, L)
    print(f"k={k}: path integral {num:.10f}")
    print(f"     elliptic      {m:.10f}")
    print(f"     genus two     {hyp:.10f}  (one of m, 1/m; pair distance {sp.unordered_pair_distance(m, hyp):.1e})")

rep = sp.verify_reduction_identities(E, L)
kres = ", ".join(f"{row['residual']:.1e}" for row in rep.kappa_rows)
print(f"reduction identities: alpha residual {rep.alpha_residual:.1e}, kappa residuals {kres}")
