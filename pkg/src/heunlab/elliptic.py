r"""Weierstrass elliptic functions on the lattice :math:`\mathbb{Z} + \tau\mathbb{Z}`.

The half periods are fixed to ``omega1 = 1/2`` and ``omega3 = tau/2`` with
``omega2 = -omega1 - omega3``.  Everything is evaluated through the Jacobi
theta function :math:`\theta_1(v \mid \tau)`, after reducing the argument to the
fundamental cell.  With :math:`q = e^{i\pi\tau}` and :math:`v = \pi z`,

.. math::

    \zeta(z) = 2\eta_1 z + \pi\frac{\theta_1'(v)}{\theta_1(v)}, \qquad
    \sigma(z) = \frac{e^{\eta_1 z^2}\,\theta_1(v)}{\pi\,\theta_1'(0)},

and :math:`\wp = -\zeta'`, :math:`\wp' = -\zeta''`.  The number of theta terms
is chosen from :math:`|q|` so that the truncated tail stays below
``THETA_TAIL`` relative to the leading term.

All functions accept scalars or numpy arrays and broadcast.
"""
import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import elliprf

from .errors import DomainError, NumericError, PoleProximityError, PrecisionError

THETA_TAIL = 1e-18
MAX_THETA_TERMS = 60
DEFAULT_CLEARANCE = 1e-6
MIN_IM_TAU = 0.05


@dataclass(frozen=True)
class Lattice:
    """Torus frame with periods 1 and ``tau``.

    Attributes
    ----------
    tau : complex
        Period ratio, ``Im tau > 0``.
    e1, e2, e3 : complex
        Branch points ``wp(omega_i)``.
    g2, g3 : complex
        Weierstrass invariants.
    eta1, eta3 : complex
        ``zeta(omega1)`` and ``zeta(omega3)``.
    t : complex
        Cross ratio ``(e3 - e1)/(e2 - e1)``.
    clearance : float
        Minimal distance to a lattice point tolerated by ``wp``, ``wp'`` and
        ``zeta``.
    """

    tau: complex
    e1: complex
    e2: complex
    e3: complex
    g2: complex
    g3: complex
    eta1: complex
    eta3: complex
    t: complex
    nterms: int
    theta1p0: complex
    clearance: float = DEFAULT_CLEARANCE
    _n: np.ndarray = field(default=None, repr=False, compare=False)
    _qn: np.ndarray = field(default=None, repr=False, compare=False)

    omega1 = 0.5

    @property
    def omega3(self):
        return self.tau / 2

    @property
    def omega2(self):
        return -self.omega1 - self.omega3

    @property
    def eta2(self):
        return -self.eta1 - self.eta3

    @property
    def omegas(self):
        """Half periods ``(omega0, omega1, omega2, omega3)``."""
        return (0.0, self.omega1, self.omega2, self.omega3)

    @property
    def e(self):
        return (self.e1, self.e2, self.e3)

    def half_period(self, k):
        return self.omegas[k]

    def eta(self, k):
        return (0.0, self.eta1, self.eta2, self.eta3)[k]


def _theta_terms(tau):
    """Number of terms of the theta_1 series for a relative tail below THETA_TAIL."""
    y = tau.imag
    if y < MIN_IM_TAU:
        raise PrecisionError(
            f"Im tau = {y:.3g} is too close to the real axis for the theta series"
        )
    # After reduction |Im v| <= pi*y/2, so term n is bounded by
    # (2n+1)^3 |q|^{n^2 - 1/4} relative to |q|^{1/4}.
    log_q = math.pi * y
    for n in range(1, MAX_THETA_TERMS):
        if (2 * n + 1) ** 3 * math.exp(-log_q * (n * n - 0.5)) < THETA_TAIL:
            return n
    raise PrecisionError(f"theta series needs more than {MAX_THETA_TERMS} terms")


def lattice_from_tau(tau, clearance=DEFAULT_CLEARANCE):
    """Build the :class:`Lattice` for period ratio ``tau``.

    Parameters
    ----------
    tau : complex
        Upper half plane point.
    clearance : float, optional
        Pole clearance used by the evaluators.

    Raises
    ------
    DomainError
        If ``Im tau <= 0``.
    PrecisionError
        If ``tau`` is too close to the real axis.
    """
    tau = complex(tau)
    if not tau.imag > 0:
        raise DomainError(f"Im tau must be positive, got {tau}")
    nterms = _theta_terms(tau)
    n = np.arange(nterms + 1)
    qn = (-1.0) ** n * np.exp(1j * math.pi * tau * (n + 0.5) ** 2)
    k = 2 * n + 1
    theta1p0 = complex(2 * np.sum(qn * k))
    theta1ppp0 = complex(-2 * np.sum(qn * k**3))
    eta1 = -(math.pi**2) * theta1ppp0 / (6 * theta1p0)
    eta3 = tau * eta1 - 1j * math.pi

    # theta constants: theta2 = sum q^{(n+1/2)^2}, theta3/theta4 = 1 + 2 sum (+-q)^{n^2}
    m = np.arange(1, nterms + 2)
    th2 = complex(2 * np.sum(np.exp(1j * math.pi * tau * (n + 0.5) ** 2)))
    qm = np.exp(1j * math.pi * tau * m**2)
    th3 = complex(1 + 2 * np.sum(qm))
    th4 = complex(1 + 2 * np.sum((-1.0) ** m * qm))
    c = math.pi**2 / 3
    e1 = c * (th3**4 + th4**4)
    e2 = c * (th2**4 - th4**4)
    e3 = -c * (th2**4 + th3**4)
    g2 = -4 * (e1 * e2 + e2 * e3 + e3 * e1)
    g3 = 4 * e1 * e2 * e3
    t = (e3 - e1) / (e2 - e1)
    return Lattice(
        tau=tau, e1=e1, e2=e2, e3=e3, g2=g2, g3=g3, eta1=eta1, eta3=eta3, t=t,
        nterms=nterms, theta1p0=theta1p0, clearance=clearance, _n=k, _qn=qn,
    )


def reduce_argument(z, L):
    """Split ``z = z0 + m + n*tau`` with ``z0`` in the cell centred at 0.

    Returns
    -------
    z0 : ndarray
    m, n : ndarray of int
    """
    z = np.asarray(z, dtype=complex)
    n = np.round(z.imag / L.tau.imag)
    w = z - n * L.tau
    m = np.round(w.real)
    return w - m, m.astype(int), n.astype(int)


def nearest_lattice_point(z, L):
    z0, m, n = reduce_argument(z, L)
    return m + n * L.tau


def _theta1(v, L, order):
    """theta_1 and its v-derivatives up to ``order`` (<= 3) at ``v`` (array)."""
    v = np.asarray(v, dtype=complex)
    arg = np.multiply.outer(v, L._n)
    s, c = np.sin(arg), np.cos(arg)
    k, qn = L._n, L._qn
    out = [2 * np.sum(qn * s, axis=-1)]
    if order >= 1:
        out.append(2 * np.sum(qn * k * c, axis=-1))
    if order >= 2:
        out.append(-2 * np.sum(qn * k**2 * s, axis=-1))
    if order >= 3:
        out.append(-2 * np.sum(qn * k**3 * c, axis=-1))
    return out


def _check_clearance(z0, m, n, L):
    near = np.abs(z0) < L.clearance
    if np.any(near):
        idx = np.flatnonzero(np.atleast_1d(near))[0]
        pt = complex(np.atleast_1d(m)[idx] + np.atleast_1d(n)[idx] * L.tau)
        raise PoleProximityError(
            f"argument within clearance {L.clearance:g} of lattice point {pt}", pt
        )


def _scalar(x):
    return complex(x) if np.ndim(x) == 0 else x


def _log_derivs(z, L, order, check=True):
    z0, m, n = reduce_argument(z, L)
    if check:
        _check_clearance(z0, m, n, L)
    th = _theta1(math.pi * z0, L, order)
    r1 = th[1] / th[0]
    out = [z0, m, n, r1]
    if order >= 2:
        out.append(th[2] / th[0])
    if order >= 3:
        out.append(th[3] / th[0])
    return out


def wp(z, L):
    """Weierstrass ``wp(z)``."""
    _, _, _, r1, r2 = _log_derivs(z, L, 2)
    return _scalar(-2 * L.eta1 - math.pi**2 * (r2 - r1 * r1))


def wp_prime(z, L):
    """Derivative ``wp'(z)``."""
    _, _, _, r1, r2, r3 = _log_derivs(z, L, 3)
    return _scalar(-(math.pi**3) * (r3 - 3 * r2 * r1 + 2 * r1**3))


def wp_and_prime(z, L):
    """Return ``(wp(z), wp'(z))`` sharing one theta evaluation."""
    _, _, _, r1, r2, r3 = _log_derivs(z, L, 3)
    p = -2 * L.eta1 - math.pi**2 * (r2 - r1 * r1)
    dp = -(math.pi**3) * (r3 - 3 * r2 * r1 + 2 * r1**3)
    return _scalar(p), _scalar(dp)


def zeta(z, L):
    """Weierstrass ``zeta(z)`` (quasi-periodic, ``zeta(z + 2 omega_k) = zeta(z) + 2 eta_k``)."""
    z0, m, n, r1 = _log_derivs(z, L, 1)
    val = 2 * L.eta1 * z0 + math.pi * r1 + 2 * m * L.eta1 + 2 * n * L.eta3
    return _scalar(val)


def laurent_regular(z, L, terms=40):
    """Regular parts ``(wp - 1/z^2, wp' + 2/z^3, zeta - 1/z)`` at a scalar ``z``.

    Near the origin the parts come from the Laurent coefficients
    ``c_k`` of ``wp = 1/z^2 + sum c_k z^{2k}`` (``c_1 = g2/20``, ``c_2 = g3/28``,
    ``(2k+3)(k-2) c_k = 3 sum c_m c_{k-1-m}``), so they carry no cancellation
    against the poles.  Elsewhere they are differences of theta values.
    """
    z = complex(z)
    tau = L.tau
    R = min(1.0, abs(tau), abs(tau - 1), abs(tau + 1))
    if z == 0 or abs(z) >= 0.5 * R:
        p, dp = wp_and_prime(z, L)
        return complex(p) - 1 / z**2, complex(dp) + 2 / z**3, complex(zeta(z, L)) - 1 / z
    c = [0j, L.g2 / 20, L.g3 / 28]
    z2 = z * z
    p = d = a = 0j
    zk = 1 + 0j
    small = 0
    for k in range(1, terms + 1):
        if k >= 3:
            c.append(3 * sum(c[m] * c[k - 1 - m] for m in range(1, k - 1)) / ((2 * k + 3) * (k - 2)))
        zk *= z2
        term = c[k] * zk
        p += term
        d += 2 * k * term / z
        a -= term * z / (2 * k + 1)
        # odd-index coefficients vanish when g3 = 0, so wait for two small terms
        small = small + 1 if abs(term) < 1e-18 * max(1.0, abs(p)) else 0
        if small == 2:
            break
    return p, d, a


def sigma(z, L):
    """Weierstrass ``sigma(z)``; entire, no clearance check."""
    z0, m, n = reduce_argument(z, L)
    th = _theta1(math.pi * z0, L, 0)[0]
    s0 = np.exp(L.eta1 * z0**2) * th / (math.pi * L.theta1p0)
    # sigma(z + w) = (-1)^{m+n+mn} exp(2 eta_w (z + w/2)) sigma(z), w = m + n tau
    w = m + n * L.tau
    eta_w = m * L.eta1 + n * L.eta3
    sign = np.where((m + n + m * n) % 2 == 0, 1.0, -1.0)
    return _scalar(sign * np.exp(2 * eta_w * (z0 + w / 2)) * s0)


@dataclass(frozen=True)
class EllipticValue:
    """A single evaluated Weierstrass quantity with an error estimate."""

    z: complex
    kind: str
    value: complex
    error_estimate: float


_EPS = np.finfo(float).eps


def eval_weierstrass(kind, z, L):
    """Evaluate one of ``wp``, ``wp_prime``, ``zeta``, ``sigma`` at a scalar ``z``.

    The error estimate combines the theta tail bound with a round-off term
    proportional to the condition of the log-derivative ratios (which blow up
    like ``1/|z0|^k`` near a pole).
    """
    funcs = {"wp": wp, "wp_prime": wp_prime, "zeta": zeta, "sigma": sigma}
    if kind not in funcs:
        raise DomainError(f"unknown kind {kind!r}")
    z = complex(z)
    value = complex(funcs[kind](z, L))
    z0 = complex(reduce_argument(z, L)[0])
    order = {"wp": 2, "wp_prime": 3, "zeta": 1, "sigma": 0}[kind]
    pole_scale = 1.0 / max(abs(z0), L.clearance) ** order
    scale = max(abs(value), pole_scale, 1.0)
    err = 64 * _EPS * scale + THETA_TAIL * scale
    return EllipticValue(z=z, kind=kind, value=value, error_estimate=float(err))


def phi(i, x, alpha, L, derivative=0):
    r"""Baker--Akhiezer function :math:`\Phi_i(x,\alpha)` or one of its x-derivatives.

    .. math::

        \Phi_i(x,\alpha) = \frac{\sigma(x+\omega_i-\alpha)}{\sigma(x+\omega_i)}
        e^{\zeta(\alpha)x}

    ``derivative`` may be 0, 1 or 2.

    Raises
    ------
    DegeneracyError
        If ``alpha`` is a lattice point (the exponential-times-periodic branch).
    """
    from .errors import DegeneracyError

    alpha = complex(alpha)
    a0 = complex(reduce_argument(alpha, L)[0])
    if abs(a0) < L.clearance:
        raise DegeneracyError(f"alpha = {alpha} is a lattice point")
    if derivative not in (0, 1, 2):
        raise DomainError("only derivatives of order 0, 1, 2 are supported")
    x = np.asarray(x, dtype=complex)
    wi = L.omegas[i]
    za = zeta(alpha, L)
    val = sigma(x + wi - alpha, L) / sigma(x + wi, L) * np.exp(za * x)
    if derivative == 0:
        return _scalar(val)
    logd = zeta(x + wi - alpha, L) - zeta(x + wi, L) + za
    if derivative == 1:
        return _scalar(val * logd)
    dlogd = -wp(x + wi - alpha, L) + wp(x + wi, L)
    return _scalar(val * (logd**2 + dlogd))


eval_phi = phi


def quasi_period_factor(alpha, k, L):
    """``exp(-2 eta_k alpha + 2 omega_k zeta(alpha))`` picked up by ``Phi_i`` under ``x -> x + 2 omega_k``."""
    alpha = complex(alpha)
    return cmath.exp(-2 * L.eta(k) * alpha + 2 * L.half_period(k) * zeta(alpha, L))


def _nearest_representative(x, seed, L):
    d = seed - x
    n = round(d.imag / L.tau.imag)
    m = round((d - n * L.tau).real)
    return x + m + n * L.tau


def elliptic_log(w, L, branch_seed=None, tol=1e-14, maxiter=50):
    """Solve ``wp(x) = w``.

    Without a seed the preimage is reduced to the fundamental cell.  With a
    seed the representative of ``{x, -x} + lattice`` nearest to the seed is
    returned, which is how callers continue a branch along a path.

    ``w = e_i`` returns ``omega_i`` exactly (double preimage, ``wp' = 0``).

    Raises
    ------
    DomainError
        If ``w`` is not finite.
    NumericError
        If the Newton polish fails.
    """
    w = complex(w)
    if not cmath.isfinite(w):
        raise DomainError("elliptic_log needs a finite value")
    scale = max(1.0, abs(w), abs(L.e1), abs(L.e2), abs(L.e3))
    for i, ei in enumerate(L.e, start=1):
        if abs(w - ei) <= 4 * _EPS * scale:
            x = complex(L.omegas[i])
            return x if branch_seed is None else _nearest_representative(x, complex(branch_seed), L)

    x = _carlson_preimage(w, L)
    if branch_seed is not None:
        seed = complex(branch_seed)
        cands = [_nearest_representative(s * x, seed, L) for s in (1, -1)]
        x = min(cands, key=lambda c: abs(c - seed))
    x = _newton_wp(x, w, L, tol, maxiter)
    if branch_seed is None:
        x0 = complex(reduce_argument(x, L)[0])
        return x0
    return x


def _carlson_preimage(w, L):
    # R_F is cut along the negative real axis; on the cut (real w below e2 for
    # rectangular lattices) rotate all arguments, using
    # R_F(c a, c b, c z) = c^{-1/2} R_F(a, b, z)
    args = [w - e for e in L.e]
    for theta in (0.0, 0.5, -0.5, 1.0, -1.0):
        c = cmath.exp(1j * theta)
        x = cmath.sqrt(c) * complex(elliprf(*(c * a for a in args)))
        if cmath.isfinite(x):
            return x
    raise NumericError(f"elliptic_log: Carlson integral undefined for w={w}")


def _newton_wp(x, w, L, tol, maxiter):
    scale = max(1.0, abs(w))
    for _ in range(maxiter):
        p, dp = wp_and_prime(x, L)
        r = p - w
        if abs(r) <= tol * scale:
            return x
        if dp == 0:
            break
        step = r / dp
        x = x - step
        if abs(step) < 1e-17 * max(1.0, abs(x)):
            break
    p = wp(x, L)
    if abs(p - w) > 1e3 * tol * scale:
        raise NumericError(f"elliptic_log: Newton did not converge for w={w}")
    return x


def reduce_gamma2(tau):
    """Map ``tau`` into the fundamental domain of Gamma(2).

    The domain is ``-1 < Re tau <= 1`` with ``|tau - 1/2| >= 1/2`` and
    ``|tau + 1/2| >= 1/2``.  The cross ratio ``t`` is invariant under the map.
    """
    tau = complex(tau)
    for _ in range(200):
        shift = 2 * math.floor((tau.real + 1) / 2)
        if tau.real - shift <= -1:
            shift -= 2
        tau -= shift
        if abs(tau + 0.5) < 0.5:
            tau = tau / (2 * tau + 1)
        elif abs(tau - 0.5) < 0.5:
            tau = tau / (-2 * tau + 1)
        else:
            return tau
    raise NumericError("Gamma(2) reduction did not terminate")


def tau_from_t(t, tol=1e-13, maxiter=60):
    r"""Period ratio ``tau`` with ``lattice_from_tau(tau).t == t``.

    The classical modular lambda satisfies :math:`t = 1/(1-\lambda(\tau))`, so
    the starting point is :math:`\tau_0 = iK(1-\lambda)/K(\lambda)`; Newton
    steps use :math:`dt/d\tau = (e_2-e_1)t(t-1)/(\pi i)`.  The result is
    returned in the Gamma(2) fundamental domain (see :func:`reduce_gamma2`),
    which is a convention: any Gamma(2)-image of it has the same ``t``.

    Raises
    ------
    DomainError
        If ``t`` is 0 or 1.
    NumericError
        If Newton iteration does not converge.
    """
    import mpmath

    t = complex(t)
    if t == 0 or t == 1 or not cmath.isfinite(t):
        raise DomainError(f"t must avoid 0, 1 and infinity, got {t}")
    lam = 1 - 1 / t
    tau = complex(1j * mpmath.ellipk(1 - lam) / mpmath.ellipk(lam))
    if not tau.imag > 0:
        tau = complex(tau.real, abs(tau.imag) or 1.0)
    tau = reduce_gamma2(tau)
    for _ in range(maxiter):
        L = lattice_from_tau(tau)
        r = L.t - t
        if abs(r) <= tol * max(1.0, abs(t)):
            return reduce_gamma2(tau)
        dt = (L.e2 - L.e1) * L.t * (L.t - 1) / (math.pi * 1j)
        step = r / dt
        # keep the iterate in the upper half plane
        while (tau - step).imag <= 0.5 * tau.imag:
            step /= 2
        tau = reduce_gamma2(tau - step)
    raise NumericError(f"tau_from_t did not converge for t={t}")
