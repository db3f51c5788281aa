"""Independent high-precision oracles for the test suite.

Nothing here imports :mod:`heunlab`.  Weierstrass functions come from
row-summed lattice series (each row of ``Z + tau Z`` summed in closed form
with ``pi^2 / sin^2`` and ``pi cot``), which converge geometrically in the
row index and share no code with the theta series used by the package.
"""
import mpmath

DPS = 40


def _rows(tau):
    # rows beyond |n| ~ dps / (pi Im tau) are below working precision
    n = int(mpmath.ceil(mpmath.mpf(mpmath.mp.dps) / (mpmath.pi * mpmath.im(tau)))) + 4
    return max(4, min(n, 400))


def wp(z, tau):
    """``wp(z)`` on the lattice ``Z + tau Z`` by row summation."""
    z, tau = mpmath.mpc(z), mpmath.mpc(tau)
    pi2 = mpmath.pi**2
    s = pi2 / mpmath.sin(mpmath.pi * z) ** 2 - pi2 / 3
    for n in range(1, _rows(tau) + 1):
        for m in (n, -n):
            s += pi2 / mpmath.sin(mpmath.pi * (z + m * tau)) ** 2 - pi2 / mpmath.sin(mpmath.pi * m * tau) ** 2
    return s


def wp_prime(z, tau):
    z, tau = mpmath.mpc(z), mpmath.mpc(tau)
    pi = mpmath.pi

    def row(u):
        return -2 * pi**3 * mpmath.cos(pi * u) / mpmath.sin(pi * u) ** 3

    s = row(z)
    for n in range(1, _rows(tau) + 1):
        s += row(z + n * tau) + row(z - n * tau)
    return s


def zeta(z, tau):
    """``zeta(z)`` by row summation (``zeta' = -wp``)."""
    z, tau = mpmath.mpc(z), mpmath.mpc(tau)
    pi = mpmath.pi
    s = pi * mpmath.cot(pi * z) + z * pi**2 / 3
    for n in range(1, _rows(tau) + 1):
        for m in (n, -n):
            s += (pi * mpmath.cot(pi * (z + m * tau)) - pi * mpmath.cot(pi * m * tau)
                  + z * pi**2 / mpmath.sin(pi * m * tau) ** 2)
    return s


class Lat:
    """Half-period data on ``Z + tau Z`` at ``DPS`` digits."""

    def __init__(self, tau, dps=DPS):
        self.dps = dps
        with mpmath.workdps(dps):
            self.tau = mpmath.mpc(tau)
            self.omega = (0, mpmath.mpf(1) / 2, -(1 + self.tau) / 2, self.tau / 2)
            self.e = tuple(wp(self.omega[i], self.tau) for i in (1, 2, 3))
            e1, e2, e3 = self.e
            self.g2 = -4 * (e1 * e2 + e2 * e3 + e3 * e1)
            self.g3 = 4 * e1 * e2 * e3
            self.eta1 = zeta(self.omega[1], self.tau)
            self.eta3 = zeta(self.omega[3], self.tau)
            self.t = (e3 - e1) / (e2 - e1)

    def wp(self, z):
        with mpmath.workdps(self.dps):
            return wp(z, self.tau)

    def wp_prime(self, z):
        with mpmath.workdps(self.dps):
            return wp_prime(z, self.tau)

    def zeta(self, z):
        with mpmath.workdps(self.dps):
            return zeta(z, self.tau)

    def sigma(self, z):
        """``sigma`` from the Jacobi theta function and the row-summed ``eta1``."""
        with mpmath.workdps(self.dps):
            q = mpmath.exp(1j * mpmath.pi * self.tau)
            return (mpmath.exp(self.eta1 * mpmath.mpc(z) ** 2) * mpmath.jtheta(1, mpmath.pi * z, q)
                    / (mpmath.pi * mpmath.jtheta(1, 0, q, 1)))


def phi0(x, alpha, lat):
    """``sigma(x - alpha) / sigma(x) exp(zeta(alpha) x)``."""
    with mpmath.workdps(lat.dps):
        return lat.sigma(x - alpha) / lat.sigma(x) * mpmath.exp(lat.zeta(alpha) * x)


def elliptic_log_by_quadrature(w, lat, direction=None):
    """``x = int_w^infinity dz / sqrt(4 z^3 - g2 z - g3)`` along a ray.

    The square root is taken as ``2 prod sqrt(z - e_i)`` with principal
    factors, which is continuous as long as no ``z - e_i`` crosses the
    negative real axis along the ray (checked by the caller's choice of
    ``w`` and ``direction``).
    """
    with mpmath.workdps(lat.dps):
        w = mpmath.mpc(w)
        d = direction if direction is not None else w / abs(w)

        def f(s):
            z = w + s * d
            r = 2 * mpmath.sqrt(z - lat.e[0]) * mpmath.sqrt(z - lat.e[1]) * mpmath.sqrt(z - lat.e[2])
            return d / r

        return mpmath.quad(f, [0, 1, 10, mpmath.inf])


def lame2_Q(E, lat):
    with mpmath.workdps(lat.dps):
        E = mpmath.mpc(E)
        out = E * E - 3 * lat.g2
        for ei in lat.e:
            out *= E - 3 * ei
        return out


def hitchin_b1(c1, c3, lat):
    """``wp(w) + wp'(w) / (2 (zeta(w) - eta))`` with ``w = C1 omega3 - C3 omega1``."""
    with mpmath.workdps(lat.dps):
        w = c1 * lat.omega[3] - c3 * lat.omega[1]
        eta = c1 * lat.eta3 - c3 * lat.eta1
        return lat.wp(w) + lat.wp_prime(w) / (2 * (lat.zeta(w) - eta))


# ---------------------------------------------------------------- series oracle


def _div(a, b, n):
    # power series quotient a / b with b[0] != 0
    out = []
    for k in range(n):
        out.append((a[k] - sum(out[i] * b[k - i] for i in range(k))) / b[0])
    return out


def frobenius_obstruction_series(l, b1, E, s1, delta, lat, order=4):
    """Log obstruction at ``x = delta`` by an independent power-series recursion.

    The equation is ``f'' + P f' + R f = 0`` with ``P = -wp'/(wp - b1)`` and
    ``R = -(s1/(wp - b1) + V - E)``.  Taylor coefficients of ``wp`` at
    ``delta`` come from :func:`mpmath.taylor`; ``zP`` and ``z^2 R`` are formed
    by series division and the recursion
    ``F(n) c_n = -sum_k c_{n-k} (p_k (n-k) + r_k)``, ``F(n) = n(n-2)``,
    is run up to ``n = 2`` where ``F`` vanishes; the right-hand side there is
    the obstruction.
    """
    n = order + 2
    with mpmath.workdps(lat.dps):
        delta = mpmath.mpc(delta)
        w = mpmath.taylor(lambda z: wp(z, lat.tau), delta, n + 1)
        dw = [(k + 1) * w[k + 1] for k in range(n)]
        # N(z) = wp(delta + z) - b1 vanishes at z = 0; work with N / z
        N = [w[0] - b1] + w[1:]
        Nz = N[1:n + 1]
        zP = [-c for c in _div(dw, Nz, n)]
        Vs = [mpmath.mpc(0)] * n
        for i in range(4):
            if l[i]:
                vi = mpmath.taylor(lambda z: wp(z + lat.omega[i], lat.tau), delta, n)
                Vs = [a + l[i] * (l[i] + 1) * b for a, b in zip(Vs, vi)]
        VmE = [Vs[0] - E] + Vs[1:]
        inv = _div([mpmath.mpc(1)] + [mpmath.mpc(0)] * (n - 1), Nz, n)
        # z^2 R = -(s1 z / (N/z) + z^2 (V - E))
        z2R = [-((s1 * inv[k - 1] if k >= 1 else 0) + (VmE[k - 2] if k >= 2 else 0)) for k in range(n)]
        p0, r0 = zP[0], z2R[0]
        c = [mpmath.mpc(1)]
        for m in (1, 2):
            rhs = -sum(c[m - k] * (zP[k] * (m - k) + z2R[k]) for k in range(1, m + 1))
            F = m * (m - 1) + p0 * m + r0
            if m == 2:
                return rhs, p0, r0
            c.append(rhs / F)
