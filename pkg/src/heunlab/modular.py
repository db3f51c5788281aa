"""Closed-form tau-derivatives of lattice quantities and their finite-difference oracles.

Conventions: ``omega_1 = 1/2``, ``omega_3 = tau/2``, ``t = (e3 - e1)/(e2 - e1)``.
All closed forms divide by ``pi*sqrt(-1)`` and work unchanged on
:class:`heunlab.elliptic.Lattice` and :class:`heunlab.extended.MPLattice`.
"""
import cmath
import math
from dataclasses import dataclass

import mpmath

from . import elliptic as ell
from . import extended as ext
from .errors import DomainError, PrecisionError

TAGS = ("t", "e1", "e2", "e3", "eta1", "pow_e2_minus_e1")


def _pi_i(L):
    if isinstance(L, ext.MPLattice):
        return mpmath.mpc(0, mpmath.pi)
    return 1j * math.pi


def _e(L, i):
    return (L.e1, L.e2, L.e3)[i - 1]


def dt_dtau(L):
    return (L.e2 - L.e1) * L.t * (L.t - 1) / _pi_i(L)


def de_dtau(L, i):
    ei = _e(L, i)
    return (-2 * L.eta1 * ei + ei * ei - L.g2 / 6) / _pi_i(L)


def deta1_dtau(L):
    return (-L.eta1**2 + L.g2 / 48) / _pi_i(L)


def d_pow_e21_dtau(L, a, value=None):
    """Derivative of ``(e2 - e1)**a`` (principal power unless ``value`` is given)."""
    if value is None:
        value = _pow(L.e2 - L.e1, a)
    return -a * (2 * L.eta1 + L.e3) * value / _pi_i(L)


def d2t_dtau2(L):
    """Second derivative of ``t`` from the first-order closed forms (product rule)."""
    d21 = d_pow_e21_dtau(L, 1, L.e2 - L.e1)
    tt = dt_dtau(L)
    return (d21 * L.t * (L.t - 1) + (L.e2 - L.e1) * (2 * L.t - 1) * tt) / _pi_i(L)


def _pow(z, a):
    if isinstance(z, mpmath.mpc) or isinstance(a, mpmath.mpc):
        return mpmath.power(z, a)
    return complex(z) ** complex(a) if a != 0 else 1.0 + 0j


@dataclass(frozen=True)
class ModularQuantity:
    tag: str
    value: complex
    dtau: complex
    a: complex = None


def _check_tag(tag, a):
    if tag not in TAGS:
        raise DomainError(f"unknown modular tag {tag!r}; expected one of {TAGS}")
    if tag == "pow_e2_minus_e1" and a is None:
        raise DomainError("pow_e2_minus_e1 needs the exponent a")


def modular_value(tag, L, a=None):
    _check_tag(tag, a)
    if tag == "t":
        return L.t
    if tag == "eta1":
        return L.eta1
    if tag == "pow_e2_minus_e1":
        return _pow(L.e2 - L.e1, a)
    return _e(L, int(tag[1]))


def modular_derivative(tag, tau=None, L=None, a=None):
    """Closed-form ``d/dtau`` of a tagged modular quantity.

    Parameters
    ----------
    tag : {"t", "e1", "e2", "e3", "eta1", "pow_e2_minus_e1"}
    tau : complex, optional
        Ignored when ``L`` is given.
    L : Lattice, optional
    a : complex, optional
        Exponent for ``pow_e2_minus_e1``.
    """
    _check_tag(tag, a)
    if L is None:
        L = ell.lattice_from_tau(tau)
    value = modular_value(tag, L, a)
    if tag == "t":
        d = dt_dtau(L)
    elif tag == "eta1":
        d = deta1_dtau(L)
    elif tag == "pow_e2_minus_e1":
        d = d_pow_e21_dtau(L, a, value)
    else:
        d = de_dtau(L, int(tag[1]))
    return ModularQuantity(tag=tag, value=complex(value), dtau=complex(d), a=a)


@dataclass(frozen=True)
class FDResult:
    value: complex
    error: float
    d4_h: complex
    d4_h2: complex
    h: float


def _stencil(f, tau, h):
    return (-f(tau + 2 * h) + 8 * f(tau + h) - 8 * f(tau - h) + f(tau - 2 * h)) / (12 * h)


def _sampler(tag, tau0, a, precision, dps):
    """Function ``tau -> quantity`` (branch of the power continued from ``tau0``)."""
    if precision == "extended":
        def lat(tt):
            return ext.mp_lattice(tt, dps=dps)
    else:
        lat = ell.lattice_from_tau
    if tag != "pow_e2_minus_e1":
        return lambda tt: modular_value(tag, lat(tt), a)
    L0 = lat(tau0)
    d0 = L0.e2 - L0.e1
    v0 = _pow(d0, a)
    if precision == "extended":
        return lambda tt: v0 * mpmath.exp(a * mpmath.log((lat(tt).e2 - lat(tt).e1) / d0))
    return lambda tt: v0 * cmath.exp(a * cmath.log((lat(tt).e2 - lat(tt).e1) / d0))


def finite_difference_oracle(tag, tau, h=None, a=None, precision="double", dps=30):
    """Fourth-order central difference of ``tag`` at ``tau`` with one Richardson level.

    Returns
    -------
    FDResult
        ``value`` is ``(16 D(h/2) - D(h)) / 15``; ``error`` is ``|D(h/2) - D(h)|/15``.

    Raises
    ------
    PrecisionError
        If ``h`` is too small for the working precision, or ``tau +- 2h``
        leaves the upper half plane.
    """
    _check_tag(tag, a)
    tau = complex(tau)
    if h is None:
        h = 1e-4 * max(1.0, abs(tau))
    if tau.imag <= 0:
        raise DomainError("Im tau must be positive")
    eps = 2.0 ** -52 if precision == "double" else 10.0 ** (-dps)
    if h < 1e3 * eps * max(1.0, abs(tau)):
        raise PrecisionError(f"step h={h:g} underflows the working precision")
    f = _sampler(tag, tau, a, precision, dps)
    if precision == "extended":
        with mpmath.workdps(dps):
            t0 = mpmath.mpc(tau)
            hh = mpmath.mpf(h)
            d1 = _stencil(f, t0, hh)
            d2 = _stencil(f, t0, hh / 2)
            val = (16 * d2 - d1) / 15
            return FDResult(complex(val), float(abs(d2 - d1) / 15), complex(d1), complex(d2), h)
    d1 = _stencil(f, tau, h)
    d2 = _stencil(f, tau, h / 2)
    return FDResult((16 * d2 - d1) / 15, abs(d2 - d1) / 15, d1, d2, h)


def convergence_order(tag, tau, h=1e-2, a=None, dps=30):
    """Observed order of the 4th-order stencil: ``log2(err(h)/err(h/2))``.

    Run in extended precision so round-off does not mask truncation error;
    the exact derivative is the closed form on the extended lattice.
    """
    _check_tag(tag, a)
    with mpmath.workdps(dps):
        L = ext.mp_lattice(tau, dps=dps)
        if tag == "t":
            exact = dt_dtau(L)
        elif tag == "eta1":
            exact = deta1_dtau(L)
        elif tag == "pow_e2_minus_e1":
            exact = d_pow_e21_dtau(L, a)
        else:
            exact = de_dtau(L, int(tag[1]))
        f = _sampler(tag, tau, a, "extended", dps)
        t0 = mpmath.mpc(tau)
        err1 = abs(_stencil(f, t0, mpmath.mpf(h)) - exact)
        err2 = abs(_stencil(f, t0, mpmath.mpf(h) / 2) - exact)
        if err2 == 0:
            return math.inf
        return float(mpmath.log(err1 / err2, 2))


def consistency_checks(L):
    """Residuals of the internal consistency chain (all should vanish)."""
    pi_i = _pi_i(L)
    de = [de_dtau(L, i) for i in (1, 2, 3)]
    d31 = de[2] - de[0]
    d21 = de[1] - de[0]
    out = {
        "sum_de": abs(sum(de)),
        "e31_form": abs(d31 + (2 * L.eta1 + L.e2) * (L.e3 - L.e1) / pi_i),
        "quotient_rule_t": abs((d31 * (L.e2 - L.e1) - (L.e3 - L.e1) * d21) / (L.e2 - L.e1) ** 2 - dt_dtau(L)),
        "e21_form": abs(d21 - d_pow_e21_dtau(L, 1, L.e2 - L.e1)),
    }
    scale = max(1.0, abs(L.g2), abs(L.eta1) ** 2)
    return {k: float(v) / scale for k, v in out.items()}
