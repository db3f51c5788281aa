"""Continuation of second-order linear ODEs along complex paths and their monodromy.

The companion system ``Y' = A(z) Y`` is integrated segment by segment of a
:class:`~heunlab.quadrature.PathPolyline` with ``scipy.integrate.solve_ivp``
(DOP853, complex state), each segment parametrised by ``s`` in ``[0, 1]``.
"""
import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from . import elliptic as ell
from .errors import DomainError, IntegrationError, PoleProximityError
from .quadrature import PathPolyline, build_safe_path, closed_loop, integrate_path

RTOL = 1e-12
ATOL = 1e-14


@dataclass
class LinearODE2:
    """``y'' + p1(z) y' + p2(z) y = 0``.

    ``singular_points`` lists singularities; when ``lattice`` is given they
    are understood modulo ``Z + tau Z`` (elliptic-form equations).
    """

    p1: Callable
    p2: Callable
    singular_points: Sequence = ()
    lattice: Optional[ell.Lattice] = None
    exponents: dict = field(default_factory=dict)
    name: str = ""

    def singularities_near(self, centre, radius):
        pts = [complex(s) for s in self.singular_points]
        if self.lattice is None:
            return [s for s in pts if abs(s - centre) <= radius]
        L = self.lattice
        out = []
        nmax = int(math.ceil(radius / L.tau.imag)) + 1
        mmax = int(math.ceil(radius + nmax * abs(L.tau.real))) + 1
        for s in pts:
            for n in range(-nmax, nmax + 1):
                for m in range(-mmax, mmax + 1):
                    z = s + m + n * L.tau
                    if abs(z - centre) <= radius:
                        out.append(z)
        return out

    def distance_to_singularity(self, z):
        near = self.singularities_near(z, 2.0)
        return min((abs(z - s) for s in near), default=math.inf)


def heun_elliptic_ode(l, E, L):
    """``-f'' + V f = E f`` as ``f'' + (E - V) f = 0``."""
    from .spectral import potential
    pts = [0j] + [complex(L.omegas[i]) for i in (1, 2, 3) if l[i]]
    return LinearODE2(p1=lambda z: np.zeros_like(np.asarray(z, dtype=complex)),
                      p2=lambda z: E - potential(l, z, L),
                      singular_points=pts, lattice=L, name=f"heun l={tuple(l)} E={E}")


def fuchsian_m1_ode(ode):
    """:class:`~heunlab.painleve.FuchsianODE_M1` as a :class:`LinearODE2`."""
    return LinearODE2(p1=lambda z: ode.coefficients(z)[0], p2=lambda z: ode.coefficients(z)[1],
                      singular_points=ode.singular_points(), lattice=ode.lattice,
                      exponents={"delta1": (0, 2)}, name=f"elliptic M=1 l={ode.l}")


def rational_p6_ode(rode):
    """:class:`~heunlab.painleve.RationalP6ODE` as a :class:`LinearODE2`."""
    return LinearODE2(p1=rode.p1, p2=rode.p2, singular_points=rode.singular_points(),
                      exponents={"lambda": (0, 2)}, name="rational P6 linear problem")


def _segment_rhs(ode, a, d):
    def rhs(s, y):
        z = a + d * s
        p1 = complex(np.asarray(ode.p1(np.array([z])))[0])
        p2 = complex(np.asarray(ode.p2(np.array([z])))[0])
        y = y.reshape(2, -1)
        return (d * np.array([y[1], -p1 * y[1] - p2 * y[0]])).ravel()
    return rhs


def continue_solutions(ode, path, Y0, rtol=RTOL, atol=ATOL):
    """Continue the columns of ``Y0`` (rows: value, derivative) along ``path``.

    Raises
    ------
    IntegrationError
        When the step size collapses; ``location`` is the last point reached.
    PoleProximityError
        When the path touches a singular point closer than its clearance.
    """
    Y = np.array(Y0, dtype=complex).reshape(2, -1)
    clearance = path.clearance or 0.0
    sing = ode.singularities_near((path.start + path.end) / 2, path.length / 2 + 1.0)
    if sing:
        dmin = path.min_distance(sing)
        if dmin < 1e-9 or (clearance and dmin < 0.5 * clearance):
            raise PoleProximityError(f"path passes within {dmin:.2e} of a singular point", nearest=None)
    for a, b in path.segments():
        d = b - a
        sol = solve_ivp(_segment_rhs(ode, a, d), (0.0, 1.0), Y.ravel(), method="DOP853",
                        rtol=rtol, atol=atol)
        if sol.status != 0:
            s_last = float(sol.t[-1]) if sol.t.size else 0.0
            raise IntegrationError(f"integration failed: {sol.message}", location=complex(a + d * s_last))
        Y = sol.y[:, -1].reshape(2, -1)
    return Y


@dataclass
class MonodromyResult:
    base: complex
    loop: PathPolyline
    matrix: np.ndarray
    eigenvalues: tuple
    det: complex
    det_predicted: Optional[complex] = None
    shift: complex = 0j

    @property
    def det_residual(self):
        if self.det_predicted is None:
            return None
        return abs(self.det - self.det_predicted) / max(1.0, abs(self.det_predicted))


def monodromy_matrix(ode, loop, basis=None, shift=0j, predict_det=True):
    """Monodromy of ``ode`` along ``loop``.

    ``loop`` must be closed, or (for equations with ``lattice``) end at
    ``start + shift`` with ``shift`` a lattice vector.  ``basis`` holds two
    initial value columns ``[[y1, y2], [y1', y2']]`` (identity by default);
    the returned matrix acts on initial-value vectors in that basis.
    """
    if basis is None:
        basis = np.eye(2, dtype=complex)
    B = np.asarray(basis, dtype=complex)
    if abs(np.linalg.det(B)) < 1e-14 * max(1.0, np.max(np.abs(B)) ** 2):
        raise DomainError("basis is not linearly independent (Wronskian vanishes)")
    shift = complex(shift)
    if abs(loop.end - loop.start - shift) > 1e-10 * max(1.0, abs(loop.start)):
        raise DomainError("loop does not close (up to the given lattice shift)")
    if shift != 0 and ode.lattice is None:
        raise DomainError("a lattice shift needs a doubly periodic equation")
    Phi = continue_solutions(ode, loop, np.eye(2, dtype=complex))
    M = np.linalg.solve(B, Phi @ B)
    ev = np.linalg.eigvals(M)
    det_pred = None
    if predict_det:
        q = integrate_path(lambda z: np.asarray(ode.p1(z), dtype=complex), loop, tol=1e-11)
        det_pred = cmath.exp(-q.value)
    return MonodromyResult(base=loop.start, loop=loop, matrix=M, eigenvalues=tuple(complex(v) for v in ev),
                           det=complex(np.linalg.det(M)), det_predicted=det_pred, shift=shift)


def cycle_path(ode, base, k, clearance=0.05):
    """Straight displacement ``base -> base + 2 omega_k`` with lateral detours around poles."""
    L = ode.lattice
    if L is None:
        raise DomainError("cycle paths need an elliptic-form equation")
    shift = 2 * L.half_period(k)
    end = base + shift
    sing = ode.singularities_near(base + shift / 2, abs(shift) / 2 + 1.0)
    return build_safe_path(base, end, sing, clearance), shift


def cycle_monodromy(ode, base, k, basis=None, clearance=0.05):
    path, shift = cycle_path(ode, base, k, clearance)
    return monodromy_matrix(ode, path, basis=basis, shift=shift)


def loop_around(ode, point, radius=None, n=16):
    """Closed polygon around ``point`` enclosing no other singular point."""
    others = [s for s in ode.singularities_near(point, 4.0) if abs(s - point) > 1e-12]
    dmin = min((abs(s - point) for s in others), default=1.0)
    r = radius if radius is not None else 0.5 * dmin
    if r >= dmin:
        raise DomainError("loop radius reaches another singular point")
    return closed_loop(point, r, n)


@dataclass
class MultiplierReport:
    eigenvalues: tuple
    predicted: tuple
    residual: float
    exponent: complex


def multiplier_compare(result, alpha, kappa, k, L):
    """Compare eigenvalues with ``exp(+-(-2 eta_k alpha + 2 omega_k zeta(alpha) + 2 kappa omega_k))``.

    ``residual`` is the smaller (over the two pairings) of the larger relative
    eigenvalue error.
    """
    from .spectral import monodromy_exponent
    c = monodromy_exponent(alpha, kappa, k, L)
    m = (cmath.exp(c), cmath.exp(-c))
    e = result.eigenvalues
    rel = [max(abs(e[0] - m[0]) / abs(m[0]), abs(e[1] - m[1]) / abs(m[1])),
           max(abs(e[0] - m[1]) / abs(m[1]), abs(e[1] - m[0]) / abs(m[0]))]
    return MultiplierReport(eigenvalues=e, predicted=m, residual=float(min(rel)), exponent=c)


def diagonal_leakage(result, basis_vectors):
    """Off-diagonal size of the monodromy in the basis given by two initial-value columns."""
    V = np.asarray(basis_vectors, dtype=complex)
    D = np.linalg.solve(V, result.matrix @ V)
    off = max(abs(D[0, 1]), abs(D[1, 0]))
    return float(off / max(abs(D[0, 0]), abs(D[1, 1]))), D


def eigenvalue_pair_distance(e1, e2):
    """Distance between two unordered eigenvalue pairs."""
    a = max(abs(e1[0] - e2[0]), abs(e1[1] - e2[1]))
    b = max(abs(e1[0] - e2[1]), abs(e1[1] - e2[0]))
    return min(a, b)


def ode_residual(ode, y, points, h_max=1e-3):
    """Max relative residual ``|y'' + p1 y' + p2 y| / scale`` at ``points``.

    Derivatives use 4th-order central differences with
    ``h = min(h_max, 0.1 * distance to the nearest singularity)``;
    ``scale = |y''| + |p1 y'| + |p2 y|``.

    Raises
    ------
    PoleProximityError
        When a point lies within ``1e-6`` of a singularity.
    """
    worst = 0.0
    for z in np.atleast_1d(points):
        z = complex(z)
        dist = ode.distance_to_singularity(z)
        if dist < 1e-6:
            raise PoleProximityError(f"point {z} is {dist:.1e} from a singularity", nearest=None)
        h = min(h_max, 0.1 * dist)
        f = [complex(y(z + k * h)) for k in (-2, -1, 0, 1, 2)]
        d1 = (f[0] - 8 * f[1] + 8 * f[3] - f[4]) / (12 * h)
        d2 = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h * h)
        p1 = complex(np.asarray(ode.p1(np.array([z])))[0])
        p2 = complex(np.asarray(ode.p2(np.array([z])))[0])
        res = abs(d2 + p1 * d1 + p2 * f[2])
        scale = abs(d2) + abs(p1 * d1) + abs(p2 * f[2])
        worst = max(worst, res / scale if scale else res)
    return worst
