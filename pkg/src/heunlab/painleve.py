r"""Painleve VI solution families from the Hermite--Krichever Ansatz with one apparent singularity.

The linear problem is

.. math::

    f'' - \frac{\wp'(x)}{\wp(x)-b_1} f'
        - \Big(\frac{\tilde s_1}{\wp(x)-b_1} + \sum_i l_i(l_i+1)\wp(x+\omega_i) - \tilde E\Big) f = 0,

with ``b1 = wp(delta1)``.  Keeping ``x = +-delta1`` apparent while ``tau``
moves with fixed monodromy makes ``delta1(tau)`` a solution of

.. math::

    \frac{d^2\delta_1}{d\tau^2} = -\frac{1}{8\pi^2}\sum_{i=0}^3 (l_i+\tfrac12)^2\,\wp'(\delta_1+\omega_i).

Explicit families (``omega = C1 omega3 - C3 omega1``, ``eta = C1 eta3 - C3 eta1``,
``Z = zeta(omega) - eta``):

=========================  ===============================================================
family                     ``b1``
=========================  ===============================================================
hitchin_l0000              ``wp(omega) + wp'(omega) / (2 Z)``
explicit_l1000             cubic-over-cubic rational function of ``(wp, wp', Z)``
degenerate_mu0             ``-eta / omega``
degenerate_mui(i)          ``((g2/4 - 2 e_i^2) omega + e_i eta) / (e_i omega + eta)``
degenerate_l1000_cubic     ``(4 eta^3 + g2 omega^2 eta - 2 g3 omega^3) / (omega (g2 omega^2 - 12 eta^2))``
degenerate_l1000_ei(i)     ``(-g2 e_i omega/2 + (6 e_i^2 - g2) eta) / ((6 e_i^2 - g2) omega - 6 e_i eta)``
=========================  ===============================================================

The degenerate families use ``(D1, D3)`` in place of ``(C1, C3)``.
"""
import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import elliptic as ell
from . import modular
from .errors import (ContinuityError, DegeneracyError, DomainError,
                     InconsistencyError)

FAMILIES = (
    "hitchin_l0000",
    "explicit_l1000",
    "degenerate_mu0",
    "degenerate_mui",
    "degenerate_l1000_cubic",
    "degenerate_l1000_ei",
)
INDEXED = ("degenerate_mui", "degenerate_l1000_ei")
L0000 = (0, 0, 0, 0)
L1000 = (1, 0, 0, 0)

# families with Q = 0 (no Hermite-Krichever multiplier)
DEGENERATE = ("degenerate_mu0", "degenerate_mui", "degenerate_l1000_cubic", "degenerate_l1000_ei")

PARAM_CLEARANCE = 1e-10


class ParameterSingularityError(DomainError):
    """A family formula hits a zero denominator at this ``tau``."""

    def __init__(self, message, tau):
        super().__init__(message)
        self.tau = tau


def kappas_from_l(l):
    """``(kappa_0, kappa_1, kappa_t, kappa_inf) = (l1, l2, l3, l0) + 1/2``."""
    return (l[1] + 0.5, l[2] + 0.5, l[3] + 0.5, l[0] + 0.5)


def kappa_h(kappas):
    """Constant term ``((k0 + k1 + kt - 1)^2 - kinf^2) / 4`` of the Painleve Hamiltonian."""
    k0, k1, kt, ki = kappas
    return ((k0 + k1 + kt - 1) ** 2 - ki**2) / 4


@dataclass(frozen=True)
class P6Instance:
    """One member of an explicit family.

    ``constants`` is ``(C1, C3)`` for the generic families and ``(D1, D3)``
    for the degenerate ones; ``index`` selects ``e_i`` where needed.
    """

    family: str
    constants: tuple
    index: int = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown family {self.family!r}")
        if self.family in INDEXED and self.index not in (1, 2, 3):
            raise DomainError(f"family {self.family} needs index in {{1,2,3}}")
        if len(self.constants) != 2:
            raise DomainError("constants must be a pair")

    @property
    def l(self):
        return L0000 if self.family in ("hitchin_l0000", "degenerate_mu0", "degenerate_mui") else L1000

    @property
    def kappas(self):
        return kappas_from_l(self.l)

    @property
    def degenerate(self):
        return self.family in DEGENERATE

    @property
    def name(self):
        return self.family + (f"({self.index})" if self.index else "")


def _omega_eta(c, L):
    c1, c3 = (complex(v) for v in c)
    return c1 * L.omega3 - c3 * L.omega1, c1 * L.eta3 - c3 * L.eta1


def _guard(den, scale, what, L):
    if abs(den) <= PARAM_CLEARANCE * max(1.0, scale):
        raise ParameterSingularityError(f"{what}: denominator {abs(den):.2e} at tau={L.tau}", L.tau)


def _wp_data(omega, L):
    z0 = ell.reduce_argument(omega, L)[0]
    if abs(z0) < 1e-8:
        raise ParameterSingularityError(f"C1 omega3 - C3 omega1 is a lattice point at tau={L.tau}", L.tau)
    p, dp = ell.wp_and_prime(omega, L)
    return complex(p), complex(dp), complex(ell.zeta(omega, L))


def family_b1(inst, tau=None, L=None):
    """``b1 = wp(delta1)`` for the instance at ``tau`` (closed form)."""
    if L is None:
        L = ell.lattice_from_tau(tau)
    w, eta = _omega_eta(inst.constants, L)
    g2, g3 = L.g2, L.g3
    f = inst.family
    if f in ("hitchin_l0000", "explicit_l1000"):
        _wp_data(w, L)
        # with Z = 1/w + a, wp = 1/w^2 + p, wp' = -2/w^3 + d the pole terms
        # cancel exactly; the forms below are what is left after cancelling
        p, d, a = ell.laurent_regular(w, L)
        a = a - eta
        if f == "hitchin_l0000":
            den = 2 * w * (1 + a * w)
            _guard(den, 2 * abs(w) * (1 + abs(a * w)), "hitchin b1", L)
            return (2 * a * p * w * w + 2 * a + d * w * w + 2 * p * w) / den
        # Z^3 - 3 wp Z - wp' = Dw / w and the numerator is Nw / w^3
        Dw = a**3 * w + 3 * a * a - 3 * a * p * w - d * w - 3 * p
        _guard(Dw, abs(a) ** 3 * abs(w) + 3 * abs(a) ** 2 + 3 * abs(p) + abs(d * w), "l1000 b1", L)
        Nw = (2 * a**3 * p * w**3 + 2 * a**3 * w + 3 * a * a * d * w**3 + 6 * a * a * p * w * w
              + 6 * a * d * w * w - a * g2 * w**3 + 6 * a * p * p * w**3 + 18 * a * p * w + d * p * w**3
              + 4 * d * w - g2 * w * w + 6 * p * p * w * w + 12 * p)
        return Nw / (2 * Dw * w * w)
    if f == "degenerate_mu0":
        _guard(w, 1.0, "mu0 b1", L)
        return -eta / w
    if f == "degenerate_mui":
        e = L.e[inst.index - 1]
        den = e * w + eta
        _guard(den, abs(e * w) + abs(eta), "mui b1", L)
        return ((g2 / 4 - 2 * e * e) * w + e * eta) / den
    if f == "degenerate_l1000_cubic":
        den = w * (g2 * w * w - 12 * eta * eta)
        _guard(den, abs(w) * (abs(g2 * w * w) + abs(12 * eta * eta)), "l1000 cubic b1", L)
        return (4 * eta**3 + g2 * w * w * eta - 2 * g3 * w**3) / den
    e = L.e[inst.index - 1]
    den = (6 * e * e - g2) * w - 6 * e * eta
    _guard(den, abs((6 * e * e - g2) * w) + abs(6 * e * eta), "l1000 e_i b1", L)
    return (-g2 * e * w / 2 + (6 * e * e - g2) * eta) / den


def cubic_mu_roots(b1, L):
    """Roots of ``2 (4b^3 - g2 b - g3) mu^3 - (12 b^2 - g2) mu^2 + 4``."""
    P = 4 * b1**3 - L.g2 * b1 - L.g3
    return np.roots([2 * P, -(12 * b1 * b1 - L.g2), 0, 4])


def family_mu1(inst, L, b1=None, mu_hint=None):
    """``mu1`` accompanying ``b1`` (closed form; for the cubic family the root nearest ``mu_hint``)."""
    if b1 is None:
        b1 = family_b1(inst, L=L)
    f = inst.family
    if f in ("hitchin_l0000", "explicit_l1000"):
        w, eta = _omega_eta(inst.constants, L)
        P, dP, z = _wp_data(w, L)
        # alpha = -omega: wp(alpha) = P, wp'(alpha) = -dP, kappa = Z
        hk = HKData(wp_alpha=P, wp_prime_alpha=-dP, kappa=z - eta)
        case = "l0000" if f == "hitchin_l0000" else "l1000"
        return hk_inversion(case, "hk_to_mu_b1", hk, L).mu1
    if f == "degenerate_mu0":
        return 0j
    if f == "degenerate_mui":
        return 1 / (2 * (b1 - L.e[inst.index - 1]))
    if f == "degenerate_l1000_ei":
        e = L.e[inst.index - 1]
        return (2 * b1 + e) / (2 * (b1 * b1 + e * b1 + e * e - L.g2 / 4))
    roots = cubic_mu_roots(b1, L)
    if mu_hint is None:
        raise DomainError("degenerate_l1000_cubic needs mu_hint to select a root of the cubic")
    return complex(roots[np.argmin(np.abs(roots - mu_hint))])


# ---------------------------------------------------------------- apparency


def _cubic(b, L):
    return 4 * b**3 - L.g2 * b - L.g3


def apparency_p(b1, mu1, l, L):
    """Accessory parameter ``p`` that makes ``x = +-delta1`` apparent.

    .. math::

        p = (4b_1^3-g_2b_1-g_3)\\Big(-\\mu_1^2+\\sum_{i=1}^3\\frac{l_i+1/2}{b_1-e_i}\\mu_1\\Big)
            - b_1(l_1+l_2+l_3-l_0)(l_1+l_2+l_3+l_0+1)
    """
    _check_b1(b1, L)
    s = sum((l[i] + 0.5) / (b1 - L.e[i - 1]) for i in (1, 2, 3))
    m = l[1] + l[2] + l[3]
    return _cubic(b1, L) * (-mu1 * mu1 + s * mu1) - b1 * (m - l[0]) * (m + l[0] + 1)


def apparency_p_l0000(b1, mu1, L):
    return -_cubic(b1, L) * mu1**2 + (6 * b1 * b1 - L.g2 / 2) * mu1


def apparency_p_l1000(b1, mu1, L):
    return apparency_p_l0000(b1, mu1, L) + 2 * b1


def _check_b1(b1, L):
    for e in L.e:
        if abs(b1 - e) < 1e-12 * max(1.0, abs(e)):
            raise DomainError(f"b1 coincides with a half-period value e_i = {e}")


@dataclass
class FuchsianODE_M1:
    """Elliptic-form linear equation with one apparent pair ``x = +-delta1``.

    Written as ``f'' + P(x) f' + R(x) f = 0`` with ``P = -wp'/(wp - b1)`` and
    ``R = -(s1/(wp - b1) + V - E)``.
    """

    l: tuple
    b1: complex
    mu1: complex
    p: complex
    tildeE: complex
    tildeS1: complex
    lattice: ell.Lattice
    apparent: bool = False
    delta1: complex = None

    @classmethod
    def from_parameters(cls, l, b1, mu1, L, p=None, delta1=None):
        """Build from ``(b1, mu1)``; ``p`` defaults to the apparency value."""
        l = tuple(l)
        _check_b1(b1, L)
        apparent = p is None
        if p is None:
            p = apparency_p(b1, mu1, l, L)
        e1, e2, e3 = L.e
        s1 = -(mu1 - sum(l[i] / (2 * (b1 - L.e[i - 1])) for i in (1, 2, 3))) * _cubic(b1, L)
        E = (p + 2 * (l[1] * l[2] * e3 + l[2] * l[3] * e1 + l[3] * l[1] * e2)
             - sum(l[i] * (l[i] * L.e[i - 1] + 2 * (L.e[i - 1] + b1)) for i in (1, 2, 3)))
        if delta1 is None:
            delta1 = ell.elliptic_log(b1, L)
        return cls(l=l, b1=complex(b1), mu1=complex(mu1), p=complex(p), tildeE=complex(E),
                   tildeS1=complex(s1), lattice=L, apparent=apparent, delta1=complex(delta1))

    def p_from_E(self):
        L, l = self.lattice, self.l
        e1, e2, e3 = L.e
        return (self.tildeE - 2 * (l[1] * l[2] * e3 + l[2] * l[3] * e1 + l[3] * l[1] * e2)
                + sum(l[i] * (l[i] * L.e[i - 1] + 2 * (L.e[i - 1] + self.b1)) for i in (1, 2, 3)))

    def mu1_from_s1(self):
        L, l = self.lattice, self.l
        return (-self.tildeS1 / _cubic(self.b1, L)
                + sum(l[i] / (2 * (self.b1 - L.e[i - 1])) for i in (1, 2, 3)))

    def potential(self, x):
        from .spectral import potential
        return potential(self.l, x, self.lattice)

    def coefficients(self, x):
        """``(P(x), R(x))``."""
        L = self.lattice
        p, dp = ell.wp_and_prime(x, L)
        D = p - self.b1
        P = -dp / D
        R = -(self.tildeS1 / D + self.potential(x) - self.tildeE)
        return P, R

    def singular_points(self):
        """Representatives of the singular points in the fundamental cell."""
        pts = [0j, complex(self.delta1), complex(-self.delta1)]
        pts += [complex(self.lattice.omegas[i]) for i in (1, 2, 3) if self.l[i]]
        return pts


# ---------------------------------------------------------------- Frobenius


def frobenius_obstruction(P, R, x0, rho, n=64):
    """Log obstruction at a regular singular point with exponents ``0`` and ``2``.

    ``P`` and ``R`` are vectorised callables.  The Taylor coefficients of
    ``a(z) = z P(x0 + z)`` and ``b(z) = z^2 R(x0 + z)`` are taken from an FFT
    on the circle ``|z| = rho/2``.  With ``a_0 = -1`` and ``b_0 = 0`` the
    recursion for the exponent-0 series stalls at ``n = 2`` unless

    ``(a_1 + b_1) b_1 + b_2 = 0``.

    Returns the modulus of that coefficient scaled by ``rho**2`` (so it is
    dimensionless), together with ``(a_0, b_0)``.

    Raises
    ------
    DomainError
        If the point is not a regular singularity with exponents 0 and 2.
    """
    r = rho / 2
    th = 2 * np.pi * np.arange(n) / n
    z = r * np.exp(1j * th)
    a = z * np.asarray(P(x0 + z))
    b = z * z * np.asarray(R(x0 + z))
    ak = np.fft.fft(a) / n / r ** np.arange(n)
    bk = np.fft.fft(b) / n / r ** np.arange(n)
    # the tail must be small for the point to be Fuchsian
    if np.max(np.abs(ak[n // 2:]) * r ** np.arange(n // 2, n)) > 1e-6 * max(1.0, np.max(np.abs(a))):
        raise DomainError("coefficients are not holomorphic after Fuchsian rescaling")
    if abs(ak[0] + 1) > 1e-6 or abs(bk[0]) > 1e-6 * max(1.0, abs(ak[1]) * rho):
        raise DomainError(f"exponents are not (0, 2): a0={ak[0]:.6g}, b0={bk[0]:.6g}")
    obs = (ak[1] + bk[1]) * bk[1] + bk[2]
    return float(abs(obs) * rho * rho)


def frobenius_apparency_check(ode):
    """Obstruction to apparency at ``x = delta1`` (elliptic form) or ``w = lambda`` (rational form)."""
    if isinstance(ode, FuchsianODE_M1):
        L = ode.lattice
        others = [0j] + [complex(L.omegas[i]) for i in (1, 2, 3) if ode.l[i]]
        d = ode.delta1
        cands = []
        for c in others + [-d]:
            for m in (-1, 0, 1):
                for k in (-1, 0, 1):
                    cands.append(abs(d - c - m - k * L.tau))
        rho = min(v for v in cands if v > 1e-12)
        rho = min(rho, 1.0)

        def P(x):
            return ode.coefficients(x)[0]

        def R(x):
            return ode.coefficients(x)[1]

        return frobenius_obstruction(P, R, d, rho)
    if isinstance(ode, RationalP6ODE):
        lam = ode.lam
        rho = min(abs(lam), abs(lam - 1), abs(lam - ode.t), 1.0)
        return frobenius_obstruction(ode.p1, ode.p2, lam, rho)
    raise DomainError(f"not a supported Fuchsian equation: {type(ode).__name__}")


# ---------------------------------------------------------------- HK inversion


@dataclass
class HKData:
    wp_alpha: complex = None
    wp_prime_alpha: complex = None
    kappa: complex = None
    mu1: complex = None
    b1: complex = None
    Q: complex = None
    sqrt_minus_Q: complex = None


def _den_l1000(b, mu, L):
    return 2 * _cubic(b, L) * mu**3 - (12 * b * b - L.g2) * mu**2 + 4


def hk_inversion(case, direction, data, L, sqrtQ_sign=1):
    """Rational maps between ``(mu1, b1)`` and ``(wp(alpha), wp'(alpha), kappa)``.

    Parameters
    ----------
    case : {"l0000", "l1000"}
    direction : {"hk_to_mu_b1", "mu_b1_to_hk"}
    data : HKData
    sqrtQ_sign : int
        Branch of ``sqrt(-Q)`` used by ``mu_b1_to_hk``.

    Raises
    ------
    DegeneracyError
        When ``mu1 = 0``, ``kappa = 0`` or ``Q = 0`` (route to the degenerate families).
    """
    if case not in ("l0000", "l1000"):
        raise DomainError(f"unknown case {case!r}")
    g2 = L.g2
    if direction == "hk_to_mu_b1":
        P, dP, k = data.wp_alpha, data.wp_prime_alpha, data.kappa
        if k is None or abs(k) < 1e-14:
            raise DegeneracyError("kappa = 0: use the Q = 0 families")
        if case == "l0000":
            if abs(dP) < 1e-14:
                raise DegeneracyError("wp'(alpha) = 0")
            return HKData(P, dP, k, mu1=-k / dP, b1=P - dP / (2 * k))
        den_b = 2 * (k**3 - 3 * P * k + dP)
        den_m = -2 * dP * k**3 + (12 * P * P - g2) * k * k - 6 * P * dP * k + dP * dP
        if abs(den_b) < 1e-14 or abs(den_m) < 1e-14:
            raise DegeneracyError("singular l1000 inversion")
        b1 = (2 * P * k**3 - 3 * dP * k * k + (6 * P * P - g2) * k - P * dP) / den_b
        mu1 = 2 * (k**3 - 3 * P * k + dP) * k / den_m
        return HKData(P, dP, k, mu1=mu1, b1=b1)
    if direction != "mu_b1_to_hk":
        raise DomainError(f"unknown direction {direction!r}")
    mu, b = data.mu1, data.b1
    if abs(mu) < 1e-14:
        raise DegeneracyError("mu1 = 0: use the degenerate_mu0 family")
    _, Q = xi_and_Q(case, mu, b, L)
    if abs(Q) < 1e-13 * max(1.0, abs(mu) ** 4 * max(1.0, abs(b)) ** 6):
        raise DegeneracyError("Q = 0: use the degenerate families")
    s = sqrtQ_sign * cmath.sqrt(-Q)
    if case == "l0000":
        return HKData(wp_alpha=b - 1 / (2 * mu), wp_prime_alpha=-s / (2 * mu * mu),
                      kappa=s / (2 * mu), mu1=mu, b1=b, Q=Q, sqrt_minus_Q=s)
    c = _cubic(b, L)
    D = _den_l1000(b, mu, L)
    P = (2 * c * b * mu**3 + (-24 * b**3 + 4 * g2 * b + 3 * L.g3) * mu**2
         + (24 * b * b - 2 * g2) * mu - 8 * b) / D
    dP = -4 * (c * mu**3 - (12 * b * b - g2) * mu**2 + 12 * b * mu - 4) / D**2 * s
    k = 2 * mu / D * s
    return HKData(wp_alpha=P, wp_prime_alpha=dP, kappa=k, mu1=mu, b1=b, Q=Q, sqrt_minus_Q=s)


# ---------------------------------------------------------------- Xi and Q


@dataclass
class XiM1:
    """``Xi = c0 + k wp(x) + d / (wp(x) - b1)``."""

    c0: complex
    k: complex
    d: complex
    b1: complex
    lattice: ell.Lattice

    def derivs(self, x):
        """``(Xi, Xi', Xi'')`` at ``x``."""
        L = self.lattice
        p, dp = ell.wp_and_prime(x, L)
        ddp = 6 * p * p - L.g2 / 2
        D = p - self.b1
        xi = self.c0 + self.k * p + self.d / D
        x1 = dp * (self.k - self.d / D**2)
        x2 = ddp * (self.k - self.d / D**2) + 2 * self.d * dp * dp / D**3
        return xi, x1, x2

    def __call__(self, x):
        return self.derivs(x)[0]


def xi_and_Q(case, mu1, b1, L, factor_reading="symmetric"):
    """Product function ``Xi`` and constant ``Q`` for the ``l0000`` / ``l1000`` cases.

    ``factor_reading="printed"`` uses the ``l1000`` quartic-product exactly
    as typeset (``e1 e2`` in the second factor, ``e1 e3`` in the third);
    the default uses the symmetric form ``e_j e_k`` for the ``i``-th factor,
    which matches the product-of-solutions oracle.
    """
    _check_b1(b1, L)
    g2, g3 = L.g2, L.g3
    e1, e2, e3 = L.e
    mu, b = complex(mu1), complex(b1)
    if case == "l0000":
        xi = XiM1(c0=2 * mu, k=0j, d=1.0 + 0j, b1=b, lattice=L)
        Q = 2 * mu * (2 * mu * (e1 - b) + 1) * (2 * (e2 - b) * mu + 1) * (2 * mu * (e3 - b) + 1)
        return xi, Q
    if case != "l1000":
        raise DomainError(f"unknown case {case!r}")
    c = -_cubic(b, L)
    xi = XiM1(c0=c * mu**2 + (6 * b * b - g2 / 2) * mu - b, k=1.0 + 0j,
              d=c * mu / 2 + 3 * b * b - g2 / 4, b1=b, lattice=L)
    pairs = {"symmetric": (e2 * e3, e1 * e3, e1 * e2), "printed": (e2 * e3, e1 * e2, e1 * e3)}[factor_reading]
    Q = -_den_l1000(b, mu, L)
    for ei, pe in zip((e1, e2, e3), pairs):
        Q = Q * (2 * (b * b + ei * b + pe) * mu - 2 * b - ei)
    return xi, Q


def q_from_product(ode, xi, x):
    """``Q`` recovered from the product ``u = Xi (wp - b1)`` of two solutions.

    For ``f'' + P f' + R f = 0`` the Wronskian ``W`` of the two solutions
    with product ``u`` satisfies ``W^2 = u'^2 - 2u(u'' + P u' + 2 R u)``,
    and ``W = -2 sqrt(-Q) (wp - b1)`` for the pair ``Lambda(+-x)``.
    """
    L = ode.lattice
    p, dp = ell.wp_and_prime(x, L)
    ddp = 6 * p * p - L.g2 / 2
    D = p - ode.b1
    X, X1, X2 = xi.derivs(x)
    u = X * D
    u1 = X1 * D + X * dp
    u2 = X2 * D + 2 * X1 * dp + X * ddp
    P, R = ode.coefficients(x)
    W2 = u1 * u1 - 2 * u * (u2 + P * u1 + 2 * R * u)
    return -W2 / (4 * D * D)


def lambda_log_derivative_m1(xi, b1, sqrt_minus_Q, x, L):
    """``Lambda'/Lambda`` and its derivative for ``Lambda = sqrt(Xi (wp - b1)) exp int sqrt(-Q)/Xi``."""
    p, dp = ell.wp_and_prime(x, L)
    ddp = 6 * p * p - L.g2 / 2
    D = p - b1
    X, X1, X2 = xi.derivs(x)
    u = X * D
    u1 = X1 * D + X * dp
    u2 = X2 * D + 2 * X1 * dp + X * ddp
    s = sqrt_minus_Q
    ld = u1 / (2 * u) + s / X
    dld = (u2 * u - u1 * u1) / (2 * u * u) - s * X1 / (X * X)
    return ld, dld


def lambda_ode_residual(ode, xi, sqrt_minus_Q, x):
    """Relative residual of ``Lambda''/Lambda + P Lambda'/Lambda + R`` (branch free)."""
    ld, dld = lambda_log_derivative_m1(xi, ode.b1, sqrt_minus_Q, x, ode.lattice)
    P, R = ode.coefficients(x)
    res = dld + ld * ld + P * ld + R
    scale = np.abs(dld) + np.abs(ld) ** 2 + np.abs(P * ld) + np.abs(R)
    return np.abs(res) / scale


# ---------------------------------------------------------------- rational form


@dataclass
class RationalP6ODE:
    """``y'' + p1(w) y' + p2(w) y = 0`` with singular points ``0, 1, t, infinity, lambda``."""

    t: complex
    lam: complex
    mu: complex
    H: complex
    kappas: tuple

    @property
    def kappa(self):
        return kappa_h(self.kappas)

    def p1(self, w):
        k0, k1, kt, _ = self.kappas
        return (1 - k0) / w + (1 - k1) / (w - 1) + (1 - kt) / (w - self.t) - 1 / (w - self.lam)

    def p2(self, w):
        t, lam = self.t, self.lam
        return (self.kappa / (w * (w - 1)) - t * (t - 1) * self.H / (w * (w - 1) * (w - t))
                + lam * (lam - 1) * self.mu / (w * (w - 1) * (w - lam)))

    def singular_points(self):
        return [0j, 1 + 0j, complex(self.t), complex(self.lam)]


def hamiltonian_p6(lam, mu, t, kappas):
    """Painleve VI Hamiltonian ``H_VI(lambda, mu, t)``."""
    k0, k1, kt, _ = kappas
    return (lam * (lam - 1) * (lam - t) * mu**2
            - (k0 * (lam - 1) * (lam - t) + k1 * lam * (lam - t) + (kt - 1) * lam * (lam - 1)) * mu
            + kappa_h(kappas) * (lam - t)) / (t * (t - 1))


def dH_dmu(lam, mu, t, kappas):
    k0, k1, kt, _ = kappas
    return (2 * lam * (lam - 1) * (lam - t) * mu
            - (k0 * (lam - 1) * (lam - t) + k1 * lam * (lam - t) + (kt - 1) * lam * (lam - 1))) / (t * (t - 1))


@dataclass
class P6Frame:
    tau: complex
    t: complex
    lam: complex
    delta1: complex
    mu: complex
    H_VI: complex
    kappas: tuple
    kappa: complex
    p: complex
    gamma: complex = None
    calH: complex = None

    def rational_ode(self):
        return RationalP6ODE(t=self.t, lam=self.lam, mu=self.mu, H=self.H_VI, kappas=self.kappas)


def frame_map(b1, mu1, l, L, seed=None, p=None, gamma=None):
    """Map elliptic-form data to the rational Painleve frame.

    ``H_VI = [ (p/4 + kappa e3) / (e2 - e1) + lambda (1 - lambda) mu ] / (t (1 - t))``
    with ``kappa = ((k0 + k1 + kt - 1)^2 - kinf^2) / 4``; this normalisation was
    fixed by transforming the elliptic form symbolically (residue of ``p2``
    at ``w = t``).
    """
    l = tuple(l)
    e1, e2, e3 = L.e
    if p is None:
        p = apparency_p(b1, mu1, l, L)
    kap = kappas_from_l(l)
    t = L.t
    lam = (b1 - e1) / (e2 - e1)
    mu = (e2 - e1) * mu1
    k = kappa_h(kap)
    H = ((p / 4 + k * e3) / (e2 - e1) + lam * (1 - lam) * mu) / (t * (1 - t))
    d1 = ell.elliptic_log(b1, L, branch_seed=seed)
    calH = None
    if gamma is not None:
        calH = elliptic_hamiltonian(d1, gamma, l, L)
    return P6Frame(tau=L.tau, t=t, lam=lam, delta1=complex(d1), mu=mu, H_VI=H, kappas=kap,
                   kappa=k, p=p, gamma=gamma, calH=calH)


def elliptic_hamiltonian(delta, gamma, l, L):
    """``(gamma^2 - sum (l_i + 1/2)^2 wp(delta + omega_i)) / 2``."""
    s = sum((l[i] + 0.5) ** 2 * ell.wp(delta + L.omegas[i], L) for i in range(4))
    return 0.5 * (gamma * gamma - s)


def elliptic_force(delta, l, L):
    """``-dcalH/ddelta = (1/2) sum (l_i + 1/2)^2 wp'(delta + omega_i)`` and the term scale."""
    terms = [(l[i] + 0.5) ** 2 * ell.wp_prime(delta + L.omegas[i], L) for i in range(4)]
    return 0.5 * sum(terms), 0.5 * max(abs(v) for v in terms)


# ---------------------------------------------------------------- trajectories


@dataclass
class InstancePoint:
    """All derived data of an instance at one ``tau``."""

    tau: complex
    lattice: ell.Lattice
    b1: complex
    mu1: complex = None
    delta1: complex = None


def instance_point(inst, tau, seed=None, mu_hint=None, with_mu=True):
    L = ell.lattice_from_tau(tau)
    b1 = family_b1(inst, L=L)
    d1 = ell.elliptic_log(b1, L, branch_seed=seed)
    mu1 = None
    if with_mu and not (inst.family == "degenerate_l1000_cubic" and mu_hint is None):
        mu1 = family_mu1(inst, L, b1, mu_hint=mu_hint)
    return InstancePoint(tau=complex(tau), lattice=L, b1=complex(b1), mu1=mu1, delta1=complex(d1))


def _default_seed(inst, tau):
    L = ell.lattice_from_tau(tau)
    return ell.elliptic_log(family_b1(inst, L=L), L)


def delta_track(inst, taus, seed=None, max_jump=None):
    """Branch-continuous ``delta1`` along ``taus`` (sequential continuation).

    Raises
    ------
    ContinuityError
        If consecutive values differ by more than ``max_jump`` (default: a
        quarter of the shortest period), naming the offending grid gap.
    """
    taus = [complex(t) for t in taus]
    if not taus:
        raise DomainError("empty tau grid")
    out = []
    prev = seed if seed is not None else _default_seed(inst, taus[0])
    for k, tau in enumerate(taus):
        L = ell.lattice_from_tau(tau)
        d = complex(ell.elliptic_log(family_b1(inst, L=L), L, branch_seed=prev))
        jump = abs(d - prev)
        lim = max_jump if max_jump is not None else 0.25 * min(1.0, abs(L.tau))
        if k > 0 and jump > lim:
            raise ContinuityError(f"delta1 jumped by {jump:.3g} between tau={taus[k - 1]} and tau={tau}")
        out.append(d)
        prev = d
    return np.array(out)


def _delta_at(inst, tau, seed):
    L = ell.lattice_from_tau(tau)
    return complex(ell.elliptic_log(family_b1(inst, L=L), L, branch_seed=seed))


def _lam_at(inst, tau):
    L = ell.lattice_from_tau(tau)
    return (family_b1(inst, L=L) - L.e1) / (L.e2 - L.e1)


def _d1(f, h):
    return (-f(2) + 8 * f(1) - 8 * f(-1) + f(-2)) / (12 * h)


def _d2(f, h):
    return (-f(2) + 16 * f(1) - 30 * f(0) + 16 * f(-1) - f(-2)) / (12 * h * h)


def _richardson(fn, h, richardson):
    if not richardson:
        return fn(h)
    a, b = fn(h), fn(h / 2)
    return (16 * b - a) / 15


def delta_derivatives(inst, tau, delta, h=2e-3, richardson=True):
    """``(d delta/d tau, d^2 delta/d tau^2)`` by central differences on the continued branch."""
    def first(hh):
        return _d1(lambda k: _delta_at(inst, tau + k * hh, delta), hh)

    def second(hh):
        return _d2(lambda k: delta if k == 0 else _delta_at(inst, tau + k * hh, delta), hh)

    return _richardson(first, h, richardson), _richardson(second, h, richardson)


def lambda_derivatives(inst, tau, h=2e-3, richardson=True):
    lam0 = _lam_at(inst, tau)

    def first(hh):
        return _d1(lambda k: _lam_at(inst, tau + k * hh), hh)

    def second(hh):
        return _d2(lambda k: lam0 if k == 0 else _lam_at(inst, tau + k * hh), hh)

    return lam0, _richardson(first, h, richardson), _richardson(second, h, richardson)


def rational_rhs_terms(lam, lt, t, kappas):
    k0, k1, kt, ki = kappas
    t1 = 0.5 * (1 / lam + 1 / (lam - 1) + 1 / (lam - t)) * lt * lt
    t2 = -(1 / t + 1 / (t - 1) + 1 / (lam - t)) * lt
    pre = lam * (lam - 1) * (lam - t) / (t * t * (t - 1) ** 2)
    t3 = pre * (ki**2 / 2 - k0**2 / 2 * t / lam**2 + k1**2 / 2 * (t - 1) / (lam - 1) ** 2
                + (1 - kt**2) / 2 * t * (t - 1) / (lam - t) ** 2)
    return t1, t2, t3


def mu_from_flow(inst, tau, h=2e-3):
    """``mu`` recovered from ``d lambda/dt = dH/dmu`` along the trajectory (as ``mu1``)."""
    L = ell.lattice_from_tau(tau)
    lam, lt_tau, _ = lambda_derivatives(inst, tau, h)
    t = L.t
    lt = lt_tau / modular.dt_dtau(L)
    k0, k1, kt, _ = inst.kappas
    lin = k0 * (lam - 1) * (lam - t) + k1 * lam * (lam - t) + (kt - 1) * lam * (lam - 1)
    mu = (t * (t - 1) * lt + lin) / (2 * lam * (lam - 1) * (lam - t))
    return mu / (L.e2 - L.e1)


@dataclass
class ResidualReport:
    mode: str
    family: str
    taus: list
    residuals: list
    max: float
    median: float
    notes: dict = field(default_factory=dict)


def _residual_elliptic(inst, tau, delta, h, richardson):
    L = ell.lattice_from_tau(tau)
    _, dd = delta_derivatives(inst, tau, delta, h, richardson)
    rhs = -sum((li + 0.5) ** 2 * ell.wp_prime(delta + L.omegas[i], L) for i, li in enumerate(inst.l)) / (8 * math.pi**2)
    terms = max(abs((li + 0.5) ** 2 * ell.wp_prime(delta + L.omegas[i], L)) for i, li in enumerate(inst.l)) / (8 * math.pi**2)
    return abs(dd - rhs) / max(1.0, abs(dd), terms)


def _residual_rational(inst, tau, h, richardson):
    L = ell.lattice_from_tau(tau)
    lam, l1, l2 = lambda_derivatives(inst, tau, h, richardson)
    tt = modular.dt_dtau(L)
    ttt = modular.d2t_dtau2(L)
    lt = l1 / tt
    ltt = (l2 - lt * ttt) / (tt * tt)
    terms = rational_rhs_terms(lam, lt, L.t, inst.kappas)
    return abs(ltt - sum(terms)) / max(1.0, abs(ltt), *(abs(v) for v in terms))


def _residual_hamiltonian(inst, tau, delta, h):
    L = ell.lattice_from_tau(tau)
    two_pi_i = 2j * math.pi

    def gamma_at(k):
        tk = tau + k * h
        dk = delta if k == 0 else _delta_at(inst, tk, delta)
        return two_pi_i * _d1(lambda j: _delta_at(inst, tk + j * h, dk), h)

    dgamma = _d1(gamma_at, h)
    force, scale = elliptic_force(delta, inst.l, L)
    lhs = two_pi_i * dgamma
    return abs(lhs - force) / max(1.0, abs(lhs), scale)


def p6_residual(inst, tau_grid, mode="elliptic", h=2e-3, richardson=True, seed=None):
    """Residual of the Painleve VI equation along ``tau_grid`` for one instance.

    Modes
    -----
    elliptic
        ``|delta'' - rhs| / max(1, |delta''|, max term)`` with the
        ``(l_i + 1/2)^2`` weights.
    rational
        ``lambda(t)`` differentiated through ``t(tau)`` and inserted into the
        rational equation with the instance's ``kappa``'s; normalised by the
        largest term.
    hamiltonian
        ``2 pi i d gamma/d tau`` against ``-d calH/d delta`` with
        ``gamma = 2 pi i d delta/d tau``.
    """
    if mode not in ("elliptic", "rational", "hamiltonian"):
        raise DomainError(f"unknown residual mode {mode!r}")
    taus = [complex(t) for t in tau_grid]
    deltas = delta_track(inst, taus, seed=seed)
    res = []
    for tau, d in zip(taus, deltas):
        if mode == "elliptic":
            res.append(_residual_elliptic(inst, tau, d, h, richardson))
        elif mode == "rational":
            res.append(_residual_rational(inst, tau, h, richardson))
        else:
            res.append(_residual_hamiltonian(inst, tau, d, h))
    res = [float(r) for r in res]
    return ResidualReport(mode=mode, family=inst.name, taus=taus, residuals=res,
                          max=max(res), median=float(np.median(res)),
                          notes={"h": h, "richardson": richardson, "deltas": deltas})


# ---------------------------------------------------------------- monodromy data


@dataclass
class MonodromyConstants:
    tau: complex
    alpha: complex
    kappa: complex
    exponents: tuple
    sqrtQ_sign: int
    kappa_mismatch: float


def hk_from_instance(inst, L, seed=None):
    """HK data ``(alpha, kappa)`` of the instance computed from ``(b1, mu1)`` alone.

    The branch of ``sqrt(-Q)`` is chosen so that ``kappa`` matches
    ``zeta(C1 omega3 - C3 omega1) + C3 eta1 - C1 eta3``; the mismatch of that
    choice is reported.
    """
    if inst.degenerate:
        raise DegeneracyError("Q = 0 families have no Hermite-Krichever multiplier")
    case = "l0000" if inst.family == "hitchin_l0000" else "l1000"
    b1 = family_b1(inst, L=L)
    mu1 = family_mu1(inst, L, b1)
    w, eta = _omega_eta(inst.constants, L)
    k_ref = complex(ell.zeta(w, L)) - eta
    best = None
    for sgn in (1, -1):
        hk = hk_inversion(case, "mu_b1_to_hk", HKData(mu1=mu1, b1=b1), L, sqrtQ_sign=sgn)
        mis = abs(hk.kappa - k_ref) / max(1.0, abs(k_ref))
        if best is None or mis < best[1]:
            best = (sgn, mis, hk)
    sgn, mis, hk = best
    from .spectral import alpha_from_wp
    alpha = alpha_from_wp(hk.wp_alpha, hk.wp_prime_alpha, L, seed=seed)
    return hk, alpha, sgn, mis


def monodromy_constants(inst, tau, seed=None):
    """``-2 eta_k alpha + 2 omega_k zeta(alpha) + 2 kappa omega_k`` for ``k = 1, 3``."""
    from .spectral import monodromy_exponent
    L = ell.lattice_from_tau(tau)
    hk, alpha, sgn, mis = hk_from_instance(inst, L, seed=seed)
    ex = tuple(monodromy_exponent(alpha, hk.kappa, k, L) for k in (1, 3))
    return MonodromyConstants(tau=complex(tau), alpha=alpha, kappa=hk.kappa, exponents=ex,
                              sqrtQ_sign=sgn, kappa_mismatch=mis)


def wrap_2pi_i(z):
    """Representative of ``z`` modulo ``2 pi i`` with imaginary part in ``(-pi, pi]``."""
    im = (z.imag + math.pi) % (2 * math.pi) - math.pi
    if im == -math.pi:
        im = math.pi
    return complex(z.real, im)


def check_cycle_reading(inst, tau):
    """Compare the ``2 omega_k`` and ``2 omega_j`` readings of the multiplier exponent.

    Returns residuals of ``exp(exponent) - exp(pi i C_k)`` for both readings
    (``j`` taken as the other cycle index).
    """
    L = ell.lattice_from_tau(tau)
    hk, alpha, _, _ = hk_from_instance(inst, L)
    C1, C3 = inst.constants
    z = ell.zeta(alpha, L)
    out = {}
    for k, Ck in ((1, C1), (3, C3)):
        j = 3 if k == 1 else 1
        target = cmath.exp(1j * math.pi * Ck)
        ek = cmath.exp(-2 * L.eta(k) * alpha + 2 * L.half_period(k) * z + 2 * hk.kappa * L.half_period(k))
        ej = cmath.exp(-2 * L.eta(k) * alpha + 2 * L.half_period(j) * z + 2 * hk.kappa * L.half_period(k))
        out[k] = {"omega_k": abs(ek - target) / abs(target), "omega_j": abs(ej - target) / abs(target)}
    return out


def instance_ode(inst, tau, seed=None, mu_hint=None):
    """The apparent :class:`FuchsianODE_M1` of the instance at ``tau``."""
    pt = instance_point(inst, tau, seed=seed, mu_hint=mu_hint)
    if pt.mu1 is None:
        raise DomainError("mu1 unavailable; pass mu_hint for the cubic family")
    return FuchsianODE_M1.from_parameters(inst.l, pt.b1, pt.mu1, pt.lattice, delta1=pt.delta1)
