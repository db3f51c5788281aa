r"""Finite-gap data for the elliptic Heun equation ``-f'' + V f = E f``.

``V(x) = sum_i l_i (l_i + 1) wp(x + omega_i)`` with integer ``l_i >= 0``.
For fixed numeric ``E`` the even doubly periodic product function

.. math::

    \Xi(x) = c_0 + \sum_{i=0}^{3}\sum_{j=0}^{l_i-1} b^{(i)}_j\,\wp(x+\omega_i)^{l_i-j}

is the (one dimensional) even elliptic solution of the symmetric-square
equation ``Xi''' - 4 (V - E) Xi' - 2 V' Xi = 0``; it is found as the null
vector of that linear condition sampled at points of the torus.  The constant

.. math::

    Q = \Xi^2 (E - V) + \tfrac12 \Xi\Xi'' - \tfrac14 \Xi'^2

then gives the solution ``Lambda = sqrt(Xi) exp(int sqrt(-Q)/Xi dx)``.
"""
import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import elliptic as ell
from .errors import (DegeneracyError, DegenerateEnergyError, DomainError,
                     InconsistencyError, PoleProximityError)
from .quadrature import (BranchedIntegrand, build_safe_path, continue_root,
                         integrate_path)

GOLDEN = (math.sqrt(5) - 1) / 2
PLASTIC = 0.7548776662466927


def sample_points(L, n, clearance=0.1, offset=0):
    """Deterministic points ``a + b*tau`` in the cell avoiding half periods.

    ``clearance`` is measured in the reduced coordinates ``(a, b)``.  The
    points come from a two dimensional Kronecker sequence.
    """
    avoid = np.array([[0, 0], [0.5, 0], [0, 0.5], [0.5, 0.5]])
    pts = []
    k = offset + 1
    while len(pts) < n:
        a = (k * GOLDEN) % 1.0 - 0.5
        b = (k * PLASTIC) % 1.0 - 0.5
        k += 1
        d = np.abs(np.array([a, b]) - avoid)
        d = np.minimum(d, 1 - d)
        if np.min(np.hypot(d[:, 0], d[:, 1])) >= clearance:
            pts.append(a + b * L.tau)
    return np.array(pts)


def potential(l, x, L, derivative=0):
    """Treibich--Verdier potential ``sum l_i(l_i+1) wp(x + omega_i)`` (or its derivative)."""
    x = np.asarray(x, dtype=complex)
    out = np.zeros_like(x)
    for i, li in enumerate(l):
        if li:
            z = x + L.omegas[i]
            f = ell.wp(z, L) if derivative == 0 else ell.wp_prime(z, L)
            out = out + li * (li + 1) * f
    return out


def _power_derivs(u, du, L, k):
    """Derivatives 0..3 of ``u**k`` where ``u = wp(y)``, ``du = wp'(y)``."""
    d2u = 6 * u * u - L.g2 / 2
    d3u = 12 * u * du
    p = [u ** (k - j) if k - j >= 0 else np.zeros_like(u) for j in range(4)]
    f0 = p[0]
    f1 = k * p[1] * du
    f2 = k * (k - 1) * p[2] * du**2 + k * p[1] * d2u
    f3 = k * (k - 1) * (k - 2) * p[3] * du**3 + 3 * k * (k - 1) * p[2] * du * d2u + k * p[1] * d3u
    return f0, f1, f2, f3


def _basis(l):
    """Labels ``(i, power)`` of the Xi basis; ``(None, 0)`` is the constant."""
    labels = [(None, 0)]
    for i, li in enumerate(l):
        for j in range(li):
            labels.append((i, li - j))
    return labels


def _basis_derivs(l, x, L):
    """Array of shape (4, nbasis, npoints) holding derivatives 0..3 of every basis function."""
    x = np.asarray(x, dtype=complex)
    labels = _basis(l)
    out = np.zeros((4, len(labels), x.size), dtype=complex)
    out[0, 0] = 1.0
    cache = {}
    for col, (i, k) in enumerate(labels):
        if i is None:
            continue
        if i not in cache:
            cache[i] = ell.wp_and_prime(x + L.omegas[i], L)
        u, du = cache[i]
        for d, v in enumerate(_power_derivs(np.asarray(u), np.asarray(du), L, k)):
            out[d, col] = v
    return out


@dataclass
class SpectralData:
    """Finite-gap record at a fixed eigenvalue.

    ``xi_coeffs`` follows the order of :func:`xi_labels`: the constant
    ``c0`` first, then ``b^{(i)}_j`` for ``i = 0..3``, ``j = 0..l_i-1``.
    """

    l: tuple
    E: complex
    xi_coeffs: np.ndarray
    lattice: ell.Lattice
    Q: complex = None
    sqrtQ_sign: int = 1
    normalization: str = ""
    null_ratio: float = 0.0
    Q_spread: float = None

    def xi(self, x, derivative=0):
        B = _basis_derivs(self.l, x, self.lattice)
        val = self.xi_coeffs @ B[derivative]
        return val if np.ndim(x) else complex(val[0])

    def xi_all(self, x):
        """``(Xi, Xi', Xi'', Xi''')`` at ``x`` (array)."""
        B = _basis_derivs(self.l, np.atleast_1d(x), self.lattice)
        return tuple(self.xi_coeffs @ B[d] for d in range(4))

    @property
    def c0(self):
        return complex(self.xi_coeffs[0])

    def coefficient(self, i, j):
        """``b^{(i)}_j`` (coefficient of ``wp(x + omega_i)**(l_i - j)``)."""
        return complex(self.xi_coeffs[_basis(self.l).index((i, self.l[i] - j))])

    @property
    def sqrt_minus_Q(self):
        if self.Q is None:
            raise DomainError("Q has not been computed")
        return self.sqrtQ_sign * cmath.sqrt(-self.Q)

    def xi_polynomial_in_wp(self):
        """Numerator ``N(w)`` and the list ``l`` with ``Xi = N(w) / prod (w - e_i)^{l_i}``, ``w = wp(x)``.

        Uses ``wp(x + omega_i) = e_i + (e_i - e_j)(e_i - e_k) / (wp(x) - e_i)``.
        """
        L = self.lattice
        e = (None,) + L.e
        P = np.polynomial.Polynomial
        den = P([1.0 + 0j])
        for i in (1, 2, 3):
            den = den * P([-e[i], 1.0]) ** self.l[i]
        num = P([0j])
        for col, (i, k) in enumerate(_basis(self.l)):
            c = self.xi_coeffs[col]
            if i is None:
                term = P([c])
            elif i == 0:
                term = c * P([0, 1.0]) ** k
            else:
                j, m = [r for r in (1, 2, 3) if r != i]
                a = (e[i] - e[j]) * (e[i] - e[m])
                lin = P([-e[i], 1.0])
                # (e_i + a/(w - e_i))^k = (e_i (w - e_i) + a)^k / (w - e_i)^k
                term = c * (P([a - e[i] ** 2, e[i]]) ** k) * lin ** (self.l[i] - k)
                others = [r for r in (1, 2, 3) if r != i]
                for r in others:
                    term = term * P([-e[r], 1.0]) ** self.l[r]
                num = num + term
                continue
            num = num + term * den
        return num, den


def xi_labels(l):
    out = []
    for i, k in _basis(l):
        out.append("c0" if i is None else f"b{i}_{l[i] - k}")
    return out


def _closed_form_c0(l, E, L):
    table = {
        (0, 0, 0, 0): lambda: 1.0 + 0j,
        (1, 0, 0, 0): lambda: E,
        (2, 0, 0, 0): lambda: E * E - 9 * L.g2 / 4,
    }
    f = table.get(tuple(l))
    return None if f is None else complex(f())


def symmetric_square_residual(l, E, coeffs, x, L):
    """``Xi''' - 4(V - E) Xi' - 2 V' Xi`` for the Xi with ``coeffs`` at points ``x``."""
    B = _basis_derivs(l, x, L)
    V = potential(l, x, L)
    dV = potential(l, x, L, derivative=1)
    return coeffs @ (B[3] - 4 * (V - E) * B[1] - 2 * dV * B[0])


def build_xi_even(l, E, L, npoints=50, normalization="closed_form", rtol=1e-8):
    """Solve for the even elliptic product function ``Xi`` at eigenvalue ``E``.

    Parameters
    ----------
    l : sequence of four non-negative ints
    E : complex
    L : Lattice
    normalization : {"closed_form", "leading"}
        ``"closed_form"`` sets ``c0`` to its known closed form for
        ``l = (0,0,0,0), (1,0,0,0), (2,0,0,0)`` and falls back to
        ``"leading"`` (unit coefficient of the highest power of the first
        ``wp(x + omega_i)`` present) otherwise.

    Raises
    ------
    DegenerateEnergyError
        If the null space is not one dimensional or the normalising
        coefficient vanishes at this ``E``.
    """
    l = tuple(int(v) for v in l)
    if len(l) != 4 or min(l) < 0:
        raise DomainError(f"l must be four non-negative integers, got {l}")
    E = complex(E)
    ncol = 1 + sum(l)
    if ncol == 1:
        coeffs = np.array([1.0 + 0j])
        return SpectralData(l=l, E=E, xi_coeffs=coeffs, lattice=L, normalization="trivial")

    x = sample_points(L, npoints, clearance=0.1)
    B = _basis_derivs(l, x, L)
    V = potential(l, x, L)
    dV = potential(l, x, L, derivative=1)
    A = (B[3] - 4 * (V - E) * B[1] - 2 * dV * B[0]).T
    # row and column equilibration
    rs = np.linalg.norm(A, axis=1)
    A = A / rs[:, None]
    cs = np.linalg.norm(A, axis=0)
    if np.any(cs == 0):
        raise DegenerateEnergyError("a basis column vanishes identically")
    A = A / cs
    _, sv, vh = np.linalg.svd(A)
    ratio = sv[-1] / sv[0]
    gap = sv[-2] / sv[0]
    if ratio > rtol or gap < 1e3 * max(ratio, 1e-16):
        raise DegenerateEnergyError(
            f"symmetric-square system at E={E} has no isolated null vector "
            f"(sigma_min/sigma_max={ratio:.2e}, next={gap:.2e})"
        )
    coeffs = np.conj(vh[-1]) / cs

    norm = normalization
    c0 = _closed_form_c0(l, E, L) if normalization == "closed_form" else None
    if c0 is not None:
        if abs(coeffs[0]) < 1e-12 * np.max(np.abs(coeffs)) or abs(c0) < 1e-14:
            raise DegenerateEnergyError(f"c0 vanishes at E={E}; renormalise with 'leading'")
        coeffs = coeffs * (c0 / coeffs[0])
        norm = "closed_form"
    else:
        lead = 1  # first non-constant column is the highest power of the first present shift
        if abs(coeffs[lead]) < 1e-12 * np.max(np.abs(coeffs)):
            raise DegenerateEnergyError(f"leading coefficient vanishes at E={E}")
        coeffs = coeffs / coeffs[lead]
        norm = "leading"

    sd = SpectralData(l=l, E=E, xi_coeffs=coeffs, lattice=L, normalization=norm,
                      null_ratio=float(ratio))
    # residual check on fresh points
    xt = sample_points(L, 12, clearance=0.15, offset=1000)
    Bt = _basis_derivs(l, xt, L)
    res = symmetric_square_residual(l, E, coeffs, xt, L)
    scale = np.abs(coeffs) @ (np.abs(Bt[3]) + 4 * np.abs(potential(l, xt, L) - E) * np.abs(Bt[1])
                              + 2 * np.abs(potential(l, xt, L, 1)) * np.abs(Bt[0]))
    if np.max(np.abs(res) / scale) > rtol:
        raise InconsistencyError(f"Xi fails the symmetric-square equation at E={E}")
    return sd


def q_samples(sd, x):
    """Values of the constant ``Xi^2 (E - V) + Xi Xi''/2 - Xi'^2/4`` at points ``x``."""
    L = sd.lattice
    xi, d1, d2, _ = sd.xi_all(x)
    V = potential(sd.l, x, L)
    return xi * xi * (sd.E - V) + 0.5 * xi * d2 - 0.25 * d1 * d1


def compute_Q(sd, L=None, npoints=24, rtol=1e-9):
    """Evaluate the x-independent constant ``Q`` and store it on ``sd``.

    The spread (standard deviation) of the samples must stay below
    ``rtol*|Q|``, or below ``rtol`` times the size of the largest sampled
    term when ``Q`` is negligible against it.

    Raises
    ------
    InconsistencyError
        If the sampled values are not constant.
    """
    L = L or sd.lattice
    x = sample_points(L, npoints, clearance=0.2, offset=500)
    vals = q_samples(sd, x)
    Q = complex(np.mean(vals))
    spread = float(np.std(vals))
    xi, d1, d2, _ = sd.xi_all(x)
    V = potential(sd.l, x, L)
    term_scale = float(np.max(np.abs(xi * xi * (sd.E - V)) + np.abs(xi * d2) + np.abs(d1 * d1)))
    if spread > rtol * max(abs(Q), 1e-3 * term_scale):
        raise InconsistencyError(f"Q is not constant: spread {spread:.3e} against |Q|={abs(Q):.3e}")
    sd.Q = Q
    sd.Q_spread = spread
    return Q


def xi_zeros(sd, near=0j, radius=2.0):
    """Zeros of ``Xi`` (all lattice translates within ``radius`` of ``near``)."""
    L = sd.lattice
    num, _ = sd.xi_polynomial_in_wp()
    num = num.trim(tol=0)
    if num.degree() < 1:
        return []
    roots = num.roots()
    base = []
    for w in roots:
        if not np.isfinite(w):
            continue
        if min(abs(w - e) for e in L.e) < 1e-10 * max(1.0, abs(w)):
            continue
        x0 = ell.elliptic_log(w, L)
        base.extend([x0, -x0])
    return _translates(base, L, near, radius)


def _translates(points, L, near, radius):
    out = []
    nmax = int(math.ceil(radius / L.tau.imag)) + 1
    mmax = int(math.ceil(radius + nmax * abs(L.tau.real))) + 1
    for p in points:
        for n in range(-nmax, nmax + 1):
            for m in range(-mmax, mmax + 1):
                z = p + m + n * L.tau
                if abs(z - near) <= radius:
                    out.append(complex(z))
    return out


def pole_points(l, L, near=0j, radius=2.0):
    """Lattice points and the half periods carrying a nonzero ``l_i``."""
    pts = [0j] + [complex(-L.omegas[i]) for i in (1, 2, 3) if l[i]]
    return _translates(pts, L, near, radius)


def _lambda_singularities(sd, a, b):
    L = sd.lattice
    centre = (a + b) / 2
    radius = abs(b - a) / 2 + 1.5
    return pole_points(sd.l, L, centre, radius) + xi_zeros(sd, centre, radius)


PATH_CLEARANCE = 0.02


def lambda_path(sd, basepoint, x, clearance=PATH_CLEARANCE):
    sing = _lambda_singularities(sd, basepoint, x)
    try:
        return build_safe_path(basepoint, x, sing, clearance)
    except DomainError as exc:
        raise PoleProximityError(f"endpoint too close to a pole or zero of Xi: {exc}",
                                 nearest=None) from exc


def lambda_log_derivative(sd, x):
    """``Lambda'/Lambda = Xi'/(2 Xi) + sqrt(-Q)/Xi`` (branch-free)."""
    xi, d1, _, _ = sd.xi_all(np.atleast_1d(x))
    r = d1 / (2 * xi) + sd.sqrt_minus_Q / xi
    return r if np.ndim(x) else complex(r[0])


def eval_lambda_integral(sd, x, basepoint=None, L=None, tol=1e-12, path=None):
    """``Lambda(x) = sqrt(Xi(x)) exp(int_{basepoint}^x sqrt(-Q)/Xi dt)``.

    The square root of ``Xi`` is the principal one at ``basepoint`` and is
    continued along a safe path (zeros of ``Xi``, lattice points and active
    half periods are avoided).
    """
    if sd.Q is None:
        compute_Q(sd)
    L = L or sd.lattice
    x = complex(x)
    if basepoint is None:
        basepoint = default_basepoint(L)
    basepoint = complex(basepoint)
    if x == basepoint:
        return cmath.sqrt(sd.xi(basepoint))
    path = path or lambda_path(sd, basepoint, x)
    s = sd.sqrt_minus_Q
    res = integrate_path(lambda z: s / sd.xi(z), path, tol=tol)
    root = continue_root(lambda z: sd.xi(z), path, cmath.sqrt(sd.xi(basepoint)))
    return complex(root * cmath.exp(res.value))


def default_basepoint(L):
    return complex(0.2113 + 0.3271 * L.tau)


def lambda_monodromy(sd, k, x0=None, tol=1e-12):
    """Numerical ``Lambda(x0 + 2 omega_k) / Lambda(x0)`` by path continuation."""
    if sd.Q is None:
        compute_Q(sd)
    L = sd.lattice
    x0 = default_basepoint(L) if x0 is None else complex(x0)
    x1 = x0 + 2 * L.half_period(k)
    path = lambda_path(sd, x0, x1)
    s = sd.sqrt_minus_Q
    res = integrate_path(lambda z: s / sd.xi(z), path, tol=tol)
    r0 = cmath.sqrt(sd.xi(x0))
    r1 = continue_root(lambda z: sd.xi(z), path, r0)
    return complex(r1 / r0 * cmath.exp(res.value))


@dataclass
class HKAnsatz:
    """Hermite--Krichever data ``(alpha, kappa)`` with ``wp(alpha)`` and ``wp'(alpha)``."""

    alpha: complex
    kappa: complex
    wp_alpha: complex
    wp_prime_alpha: complex
    term_counts: tuple
    degenerate: bool = False
    curve_residual: float = 0.0


def lame2_Q(E, L):
    """Closed form ``(E^2 - 3 g2) prod_i (E - 3 e_i)`` for ``l = (2, 0, 0, 0)``."""
    E = complex(E)
    return (E * E - 3 * L.g2) * (E - 3 * L.e1) * (E - 3 * L.e2) * (E - 3 * L.e3)


def lame2_xi(x, E, L):
    """Closed form ``9 wp^2 + 3 E wp + E^2 - 9 g2 / 4``."""
    p = ell.wp(x, L)
    return 9 * p * p + 3 * E * p + E * E - 9 * L.g2 / 4


def lame2_xi_map(E, L):
    """``xi(E) = -(E^3 - 27 g3) / (9 (E^2 - 3 g2))``."""
    E = complex(E)
    return -(E**3 - 27 * L.g3) / (9 * (E * E - 3 * L.g2))


def alpha_from_wp(wp_alpha, wp_prime_alpha, L, seed=None):
    """The point ``alpha`` with ``(wp(alpha), wp'(alpha))`` as given (mod lattice)."""
    a = ell.elliptic_log(wp_alpha, L, branch_seed=seed)
    d = ell.wp_prime(a, L) if abs(ell.reduce_argument(a, L)[0]) > 0 else math.inf
    if abs(d + wp_prime_alpha) < abs(d - wp_prime_alpha):
        a = -a
        if seed is not None:
            a = ell._nearest_representative(a, complex(seed), L)
    return complex(a)


def hk_parameters_lame2(E, L, sqrtQ_sign=1, alpha_seed=None):
    r"""Hermite--Krichever ``(alpha, kappa)`` for the Lame equation with ``l0 = 2``.

    .. math::

        \wp(\alpha) = -\frac{E^3-27g_3}{9(E^2-3g_2)},\quad
        \kappa = \frac{2\sqrt{-Q}}{3(E^2-3g_2)},\quad
        \wp'(\alpha) = \frac{2\prod_i (E+6e_i)}{27(E^2-3g_2)^2}\sqrt{-Q}

    with ``sqrt(-Q) = sqrtQ_sign * principal sqrt``.  The sign of
    ``wp'(alpha)`` against ``kappa`` was fixed by matching the monodromy of the
    integral representation.

    Raises
    ------
    DegeneracyError
        When ``E**2 == 3 g2`` (the exponential-times-elliptic branch).
    """
    E = complex(E)
    D = E * E - 3 * L.g2
    scale = max(1.0, abs(E) ** 2, abs(L.g2))
    if abs(D) < 1e-12 * scale:
        raise DegeneracyError(f"E^2 = 3 g2 at E={E}: alpha is a lattice point")
    Q = lame2_Q(E, L)
    s = sqrtQ_sign * cmath.sqrt(-Q)
    P = lame2_xi_map(E, L)
    kappa = 2 * s / (3 * D)
    prod = (E + 6 * L.e1) * (E + 6 * L.e2) * (E + 6 * L.e3)
    dP = LAME2_WP_PRIME_SIGN * 2 * prod / (27 * D * D) * s
    alpha = alpha_from_wp(P, dP, L, seed=alpha_seed)
    curve = abs(dP * dP - (4 * P**3 - L.g2 * P - L.g3)) / max(1.0, abs(P) ** 3)
    return HKAnsatz(alpha=alpha, kappa=kappa, wp_alpha=P, wp_prime_alpha=dP,
                    term_counts=(2, 0, 0, 0), curve_residual=float(curve))


LAME2_WP_PRIME_SIGN = 1


def monodromy_exponent(alpha, kappa, k, L):
    """``-2 eta_k alpha + 2 omega_k zeta(alpha) + 2 kappa omega_k``."""
    w = L.half_period(k)
    return complex(-2 * L.eta(k) * alpha + 2 * w * ell.zeta(alpha, L) + 2 * kappa * w)


def monodromy_multiplier_elliptic(hk, k, L):
    """``exp(-2 eta_k alpha + 2 omega_k zeta(alpha) + 2 kappa omega_k)``.

    Raises
    ------
    DegeneracyError
        For the degenerate branch.
    """
    if hk.degenerate:
        raise DegeneracyError("multiplier formula needs a non-degenerate Hermite-Krichever form")
    if k not in (1, 3):
        raise DomainError("cycle index k must be 1 or 3")
    return cmath.exp(monodromy_exponent(hk.alpha, hk.kappa, k, L))


def lame2_hyper_radicand(Et, L):
    Et = np.asarray(Et, dtype=complex)
    return -(Et * Et - 3 * L.g2) * (Et - 3 * L.e1) * (Et - 3 * L.e2) * (Et - 3 * L.e3)


def lame2_hyper_integrand(func, L, seed=1.0):
    """Branched integrand over ``-(E^2 - 3 g2) prod (E - 3 e_i)`` in factored form."""
    return BranchedIntegrand(func=func, radicand=lambda z: lame2_hyper_radicand(z, L), seed=seed,
                             roots=lame2_branch_points(L), lead=-1.0)


def elliptic_integrand(func, L, seed=1.0):
    """Branched integrand over ``4 xi^3 - g2 xi - g3`` in factored form."""
    return BranchedIntegrand(func=func, radicand=lambda z: _elliptic_radicand(z, L), seed=seed,
                             roots=list(L.e), lead=4.0)


def lame2_branch_points(L):
    r = cmath.sqrt(3 * L.g2)
    return [r, -r, 3 * L.e1, 3 * L.e2, 3 * L.e3]


def _hyper_clearance(L, E, start):
    pts = lame2_branch_points(L)
    d = min(abs(a - b) for a in pts for b in pts if a != b)
    d = min([d] + [abs(E - p) for p in pts if p != start])
    return 0.25 * d


def monodromy_multiplier_hyperelliptic(E, k, L, tol=1e-11, side=None):
    r"""Monodromy of ``Lambda`` under ``x -> x + 2 omega_k`` from the genus-two integral

    .. math::

        \exp\Big(-\tfrac12\int_{\sqrt{3g_2}}^{E}
        \frac{-6\eta_k \tilde E + 2\omega_k(\tilde E^2 - 3g_2/2)}
        {\sqrt{-(\tilde E^2-3g_2)\prod_i(\tilde E-3e_i)}}\,d\tilde E\Big)

    The path is straight from the principal ``sqrt(3 g2)`` to ``E`` with
    detours around the other branch points; the square root starts on an
    arbitrary branch, so the result is meaningful as the pair ``{m, 1/m}``.
    """
    E = complex(E)
    a = cmath.sqrt(3 * L.g2)
    others = [p for p in lame2_branch_points(L) if abs(p - a) > 1e-12]
    clr = _hyper_clearance(L, E, a)
    path = build_safe_path(a, E, others, clr, side=side)
    eta, w = L.eta(k), L.half_period(k)
    f = lame2_hyper_integrand(lambda z, r: (-6 * eta * z + 2 * w * (z * z - 1.5 * L.g2)) / r, L)
    res = integrate_path(f, path, tol=tol, start="branch")
    return cmath.exp(-0.5 * res.value), res


def unordered_pair_distance(m1, m2):
    """Distance between ``{m1, 1/m1}`` and ``{m2, 1/m2}``."""
    return min(max(abs(m1 - m2), abs(1 / m1 - 1 / m2)),
               max(abs(m1 - 1 / m2), abs(1 / m1 - m2)))


def fit_hk_form(sd, hk, points=None, basepoint=None):
    """Least-squares fit of ``exp(kappa x)(b0 Phi_0 + b1 Phi_0')`` to ``Lambda``.

    Returns the coefficients and the maximal relative residual over
    ``points``.
    """
    L = sd.lattice
    if points is None:
        points = sample_points(L, 10, clearance=0.2, offset=300)
    base = default_basepoint(L) if basepoint is None else basepoint
    lam = np.array([eval_lambda_integral(sd, x, base) for x in points])
    cols = [np.exp(hk.kappa * points) * ell.phi(0, points, hk.alpha, L, derivative=j)
            for j in range(hk.term_counts[0])]
    A = np.array(cols).T
    coef, *_ = np.linalg.lstsq(A, lam, rcond=None)
    resid = np.max(np.abs(A @ coef - lam) / np.abs(lam))
    return coef, float(resid)


@dataclass
class ReductionReport:
    E: complex
    xi: complex
    alpha_lhs: complex
    alpha_rhs: complex
    alpha_sign: int
    alpha_residual: float
    kappa: complex
    kappa_rows: list = field(default_factory=list)
    tol: float = 1e-6

    @property
    def passed(self):
        return self.alpha_residual < self.tol and all(r["residual"] < self.tol for r in self.kappa_rows)


def _elliptic_radicand(z, L):
    z = np.asarray(z, dtype=complex)
    return 4 * z**3 - L.g2 * z - L.g3


def _far_point(points, direction=1 + 0.37j):
    R = 4 * max(1.0, max(abs(p) for p in points))
    return R * direction / abs(direction)


def verify_reduction_identities(E, L, tol=1e-6, quad_tol=1e-11):
    r"""Check the genus-two to genus-one reductions for the ``l0 = 2`` Lame case.

    First identity (compared modulo the period lattice ``Z + tau Z`` and up to
    the overall sign of the square roots):

    .. math::

        \int_\infty^{\xi}\frac{d\tilde\xi}{\sqrt{4\tilde\xi^3-g_2\tilde\xi-g_3}}
        = -\frac32\int_\infty^{E}\frac{\tilde E\,d\tilde E}{\sqrt{-(\tilde E^2-3g_2)\prod(\tilde E-3e_i)}}

    Second identity, for ``i = 1, 2, 3`` (the hyperelliptic leg starts at the
    branch point ``3 e_i`` and the elliptic leg at ``e_i = xi(3 e_i)``):

    .. math::

        \kappa = -\frac12\int_{3e_i}^{E}\frac{\tilde E^2-3g_2/2}{\sqrt{\cdots}}\,d\tilde E
                 + \int_{e_i}^{\xi}\frac{\tilde\xi\,d\tilde\xi}{\sqrt{4\tilde\xi^3-g_2\tilde\xi-g_3}}

    Each side is found by independent quadrature; sign choices of the two
    square roots and of ``kappa`` are scanned and the matching one recorded.
    The elliptic leg is compared modulo its periods ``2 eta_1 Z + 2 eta_3 Z``.
    """
    E = complex(E)
    bps = lame2_branch_points(L)
    scale = max(1.0, abs(E))
    if min(abs(E - p) for p in bps) < 1e-9 * scale:
        raise DomainError(f"E={E} coincides with a branch point")
    xi = lame2_xi_map(E, L)
    hk = hk_parameters_lame2(E, L)

    # -- first identity
    e_pts = list(L.e)
    R1 = _far_point(e_pts + [xi])
    clr1 = 0.25 * min(abs(a - b) for a in e_pts for b in e_pts if a != b)
    path = build_safe_path(R1, xi, e_pts, min(clr1, 0.25 * min(abs(xi - e) for e in e_pts)))
    lhs = integrate_path(elliptic_integrand(lambda z, r: 1 / r, L,
                                            seed=cmath.sqrt(_elliptic_radicand(R1, L))),
                         path, tol=quad_tol, start="infinity").value
    R2 = _far_point(bps + [E])
    clr2 = _hyper_clearance(L, E, None)
    path = build_safe_path(R2, E, bps, clr2)
    rhs_int = integrate_path(lame2_hyper_integrand(lambda z, r: z / r, L,
                                                  seed=cmath.sqrt(complex(lame2_hyper_radicand(R2, L)))),
                             path, tol=quad_tol, start="infinity").value
    rhs = -1.5 * rhs_int
    best = None
    for sgn in (1, -1):
        d = lhs - sgn * rhs
        r = abs(complex(ell.reduce_argument(d, L)[0]))
        if best is None or r < best[1]:
            best = (sgn, r)
    report = ReductionReport(E=E, xi=xi, alpha_lhs=lhs, alpha_rhs=rhs, alpha_sign=best[0],
                             alpha_residual=best[1], kappa=hk.kappa, tol=tol)

    # -- second identity
    for i, ei in enumerate(L.e, start=1):
        a = 3 * ei
        others = [p for p in bps if abs(p - a) > 1e-12]
        clr = _hyper_clearance(L, E, a)
        hyp = integrate_path(
            lame2_hyper_integrand(lambda z, r: (z * z - 1.5 * L.g2) / r, L),
            build_safe_path(a, E, others, clr), tol=quad_tol, start="branch").value
        oth_e = [e for e in L.e if e != ei]
        clr_e = 0.25 * min([abs(ei - e) for e in oth_e] + [abs(xi - e) for e in oth_e])
        if abs(xi - ei) < 1e-14 * scale:
            ell_leg = 0j
        else:
            ell_leg = integrate_path(
                elliptic_integrand(lambda z, r: z / r, L),
                build_safe_path(ei, xi, oth_e, clr_e), tol=quad_tol, start="branch").value
        rows = []
        for s1 in (1, -1):
            for s2 in (1, -1):
                for sk in (1, -1):
                    rhs_k = -0.5 * s1 * hyp + s2 * ell_leg
                    d = sk * hk.kappa - rhs_k
                    raw = abs(d)
                    red = _reduce_quasi(d, L)
                    rows.append((red, raw, s1, s2, sk, rhs_k))
        red, raw, s1, s2, sk, rhs_k = min(rows, key=lambda r: (r[0], r[1]))
        report.kappa_rows.append(dict(i=i, hyper_leg=hyp, elliptic_leg=ell_leg, rhs=rhs_k,
                                      kappa_sign=sk, hyper_sign=s1, elliptic_sign=s2,
                                      raw_residual=raw, residual=red))
    return report


def _reduce_quasi(d, L):
    """Distance from ``d`` to the lattice ``2 eta_1 Z + 2 eta_3 Z``."""
    # solve d = 2 eta1 a + 2 eta3 b for real (a, b)
    M = np.array([[2 * L.eta1.real, 2 * L.eta3.real], [2 * L.eta1.imag, 2 * L.eta3.imag]])
    a, b = np.linalg.solve(M, [d.real, d.imag])
    best = math.inf
    for da in (0, 1):
        for db in (0, 1):
            ra, rb = math.floor(a) + da, math.floor(b) + db
            best = min(best, abs(d - 2 * L.eta1 * ra - 2 * L.eta3 * rb))
    return best
