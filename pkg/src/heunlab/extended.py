"""Extended-precision lattice quantities backed by mpmath.

Used to generate oracles that outrank the double-precision code paths.  The
theta functions come from :func:`mpmath.jtheta`, an implementation independent
of the series in :mod:`heunlab.elliptic`.
"""
from dataclasses import dataclass

import mpmath

from .errors import DomainError

DEFAULT_DPS = 40


@dataclass(frozen=True)
class MPLattice:
    tau: mpmath.mpc
    q: mpmath.mpc
    e1: mpmath.mpc
    e2: mpmath.mpc
    e3: mpmath.mpc
    g2: mpmath.mpc
    g3: mpmath.mpc
    eta1: mpmath.mpc
    eta3: mpmath.mpc
    t: mpmath.mpc
    theta1p0: mpmath.mpc
    dps: int

    def as_complex(self):
        return {k: complex(getattr(self, k)) for k in
                ("tau", "e1", "e2", "e3", "g2", "g3", "eta1", "eta3", "t")}


def mp_lattice(tau, dps=DEFAULT_DPS):
    with mpmath.workdps(dps):
        tau = mpmath.mpc(tau)
        if tau.imag <= 0:
            raise DomainError(f"Im tau must be positive, got {tau}")
        q = mpmath.exp(1j * mpmath.pi * tau)
        t1p = mpmath.jtheta(1, 0, q, 1)
        t1ppp = mpmath.jtheta(1, 0, q, 3)
        eta1 = -mpmath.pi**2 * t1ppp / (6 * t1p)
        eta3 = tau * eta1 - 1j * mpmath.pi
        th2, th3, th4 = (mpmath.jtheta(k, 0, q) for k in (2, 3, 4))
        c = mpmath.pi**2 / 3
        e1 = c * (th3**4 + th4**4)
        e2 = c * (th2**4 - th4**4)
        e3 = -c * (th2**4 + th3**4)
        g2 = -4 * (e1 * e2 + e2 * e3 + e3 * e1)
        g3 = 4 * e1 * e2 * e3
        t = (e3 - e1) / (e2 - e1)
        return MPLattice(tau, q, e1, e2, e3, g2, g3, eta1, eta3, t, t1p, dps)


def mp_wp(z, L):
    """wp(z) on an :class:`MPLattice` (no argument reduction; keep |Im z| moderate)."""
    with mpmath.workdps(L.dps):
        v = mpmath.pi * mpmath.mpc(z)
        th = mpmath.jtheta(1, v, L.q)
        d1 = mpmath.jtheta(1, v, L.q, 1)
        d2 = mpmath.jtheta(1, v, L.q, 2)
        return -2 * L.eta1 - mpmath.pi**2 * (d2 / th - (d1 / th) ** 2)


def mp_zeta(z, L):
    with mpmath.workdps(L.dps):
        z = mpmath.mpc(z)
        v = mpmath.pi * z
        return 2 * L.eta1 * z + mpmath.pi * mpmath.jtheta(1, v, L.q, 1) / mpmath.jtheta(1, v, L.q)


def mp_sigma(z, L):
    with mpmath.workdps(L.dps):
        z = mpmath.mpc(z)
        return mpmath.exp(L.eta1 * z**2) * mpmath.jtheta(1, mpmath.pi * z, L.q) / (mpmath.pi * L.theta1p0)


def mp_wp_prime(z, L):
    with mpmath.workdps(L.dps):
        v = mpmath.pi * mpmath.mpc(z)
        th = mpmath.jtheta(1, v, L.q)
        r1 = mpmath.jtheta(1, v, L.q, 1) / th
        r2 = mpmath.jtheta(1, v, L.q, 2) / th
        r3 = mpmath.jtheta(1, v, L.q, 3) / th
        return -mpmath.pi**3 * (r3 - 3 * r2 * r1 + 2 * r1**3)
