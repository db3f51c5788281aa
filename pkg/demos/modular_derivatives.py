"""Closed-form tau derivatives of t, e_i, eta1 and (e2 - e1)^a checked
against 5-point finite differences, and the observed stencil order.
"""
from heunlab import elliptic as ell
from heunlab import modular

tau = 0.2 + 1.15j
L = ell.lattice_from_tau(tau)
print(f"tau = {tau}, t = {L.t:.10f}")
for tag in modular.TAGS:
    a = 0.5 if tag == "pow_e2_minus_e1" else None
    q = modular.modular_derivative(tag, L=L, a=a)
    fd = modular.finite_difference_oracle(tag, tau, a=a)
    print(f"{tag:16s} d/dtau = {q.dtau:.12f}  finite differences rel. err {abs(q.dtau - fd.value) / abs(q.dtau):.1e}")

for tag in ("t", "eta1"):
    print(f"stencil order for {tag}: {modular.convergence_order(tag, tau):.3f}")

# the cross ratio runs over (1, inf) on the imaginary axis and inverts back
for t in (1.5, 2.0, 0.5, 0.3 + 0.4j):
    print(f"t = {t}: tau = {ell.tau_from_t(t):.10f}")
