"""Complex path quadrature with square-root branch tracking.

A path is a :class:`PathPolyline`.  :func:`integrate_path` runs an adaptive
Gauss--Kronrod (7/15) rule leg by leg, always refining the leftmost pending
interval first so that the square-root factor of a :class:`BranchedIntegrand`
can be continued node by node in path order.  Inverse-square-root endpoints
are smoothed with ``s = v**2`` (or a cosine map when both ends are branch
points) and an infinite start is handled by ``z = R / u**2``.
"""
import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError, NumericError, PathError

# Gauss-Kronrod 7/15 on [-1, 1]
_XK = np.array([
    -0.991455371120812639206854697526329, -0.949107912342758524526189684047851,
    -0.864864423359769072789712788640926, -0.741531185599394439863864773280788,
    -0.586087235467691130294144845693013, -0.405845151377397166906606412076961,
    -0.207784955007898467600689403773245, 0.0,
    0.207784955007898467600689403773245, 0.405845151377397166906606412076961,
    0.586087235467691130294144845693013, 0.741531185599394439863864773280788,
    0.864864423359769072789712788640926, 0.949107912342758524526189684047851,
    0.991455371120812639206854697526329,
])
_WK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
    0.204432940075298892414161999234649, 0.190350578064785409913256402421014,
    0.169004726639267902826583426598550, 0.140653259715525918745189590510238,
    0.104790010322250183839876322541518, 0.063092092629978553290700663189204,
    0.022935322010529224963732008058970,
])
_WG = np.zeros(15)
_WG[1::2] = [
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
    0.381830050505118944950369775488975, 0.279705391489276667901467771423780,
    0.129484966168869693270611432679082,
]

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class PathPolyline:
    """Polyline through ``vertices`` keeping ``clearance`` from registered singularities."""

    vertices: tuple
    clearance: float = 0.0

    def __post_init__(self):
        v = tuple(complex(z) for z in self.vertices)
        if len(v) < 2:
            raise DomainError("a path needs at least two vertices")
        for a, b in zip(v, v[1:]):
            if a == b:
                raise DomainError("consecutive vertices must be distinct")
        object.__setattr__(self, "vertices", v)

    @property
    def start(self):
        return self.vertices[0]

    @property
    def end(self):
        return self.vertices[-1]

    @property
    def closed(self):
        return abs(self.vertices[0] - self.vertices[-1]) < 1e-14 * max(1.0, abs(self.vertices[0]))

    @property
    def length(self):
        return sum(abs(b - a) for a, b in self.segments())

    def segments(self):
        return list(zip(self.vertices, self.vertices[1:]))

    def sample(self, per_segment=64):
        """Points along the path, including every vertex."""
        pts = [self.vertices[0]]
        s = np.linspace(0, 1, per_segment + 1)[1:]
        for a, b in self.segments():
            pts.extend(a + (b - a) * s)
        return np.array(pts)

    def min_distance(self, points):
        """Smallest distance from the path to any of ``points``."""
        best = math.inf
        for s in points:
            for a, b in self.segments():
                best = min(best, segment_distance(complex(s), a, b))
        return best

    def reversed(self):
        return PathPolyline(self.vertices[::-1], self.clearance)

    def __add__(self, other):
        if abs(self.end - other.start) > 1e-12 * max(1.0, abs(self.end)):
            raise DomainError("paths do not join")
        return PathPolyline(self.vertices + other.vertices[1:], min(self.clearance, other.clearance))


def segment_distance(s, a, b):
    """Distance from point ``s`` to the segment ``[a, b]``."""
    d = b - a
    u = ((s - a) * d.conjugate()).real / abs(d) ** 2
    u = min(1.0, max(0.0, u))
    return abs(s - (a + u * d))


def _detour(a, b, s, clearance, side):
    """Polygonal arc around ``s`` replacing the part of ``[a, b]`` near it."""
    d = b - a
    u = d / abs(d)
    rad = min(2 * clearance, 0.95 * min(abs(s - a), abs(s - b)))
    if rad < 1.1 * clearance:
        return None
    # chords of an 8-gon stay at cos(pi/8) * rad >= 1.01 clearance from s
    phis = np.linspace(math.pi, 0, 5)
    return [s + rad * u * cmath.exp(1j * side * p) for p in phis]


def build_safe_path(start, end, singularities=(), clearance=1e-3, max_detours=64, side=None):
    """Polyline from ``start`` to ``end`` staying ``clearance`` away from ``singularities``.

    Each offending singularity is bypassed by a half 8-gon of radius up to
    ``2*clearance``.  By default the detour passes on the side of the chord
    opposite to the singularity (left of the direction of travel for exact
    hits); ``side=+1`` or ``-1`` forces left or right.

    Raises
    ------
    DomainError
        If an endpoint is within ``clearance`` of a singularity.
    PathError
        If no admissible path is found within ``max_detours`` detours.
    """
    start, end = complex(start), complex(end)
    sing = [complex(s) for s in singularities]
    for p in (start, end):
        for s in sing:
            if abs(p - s) < clearance:
                raise DomainError(f"endpoint {p} within clearance of singularity {s}")
    if start == end:
        raise DomainError("start and end coincide")

    verts = [start, end]
    detours = 0
    i = 0
    while i < len(verts) - 1:
        a, b = verts[i], verts[i + 1]
        hits = [s for s in sing if segment_distance(s, a, b) < clearance * (1 - 1e-12)]
        if not hits:
            i += 1
            continue
        d = b - a
        # nearest along the direction of travel first
        s = min(hits, key=lambda z: ((z - a) * d.conjugate()).real)
        cross = ((s - a) * d.conjugate()).imag
        sd = side if side is not None else (-1 if cross > 0 else 1)
        arc = _detour(a, b, s, clearance, sd)
        if arc is None or any(abs(p - q) < clearance for p in arc for q in sing if q != s):
            arc = _detour(a, b, s, clearance, -sd)
        if arc is None:
            raise PathError(f"cannot detour around singularity {s} between {a} and {b}")
        detours += 1
        if detours > max_detours:
            raise PathError(f"path construction exceeded {max_detours} detours")
        verts[i + 1:i + 1] = arc
    # drop duplicate consecutive vertices
    clean = [verts[0]]
    for v in verts[1:]:
        if abs(v - clean[-1]) > 1e-15:
            clean.append(v)
    path = PathPolyline(tuple(clean), clearance)
    if sing and path.min_distance(sing) < clearance * (1 - 1e-9):
        raise PathError("constructed path violates clearance")
    return path


def closed_loop(center, radius, n=16):
    """Regular ``n``-gon around ``center`` (counter-clockwise, closed)."""
    ang = 2 * math.pi * np.arange(n + 1) / n
    pts = center + radius * np.exp(1j * ang)
    pts[-1] = pts[0]
    return PathPolyline(tuple(pts), radius * math.cos(math.pi / n))


@dataclass(frozen=True)
class BranchedIntegrand:
    """Integrand ``func(z, root)`` where ``root`` continues ``sqrt(radicand(z))`` along the path.

    ``seed`` selects the branch at the path start: the first root is the
    square root whose direction is closest to ``seed``.  When the radicand
    is a polynomial, passing its ``roots`` and ``lead`` coefficient lets the
    integrator form ``z - root`` without cancellation next to a branch
    point endpoint.
    """

    func: Callable
    radicand: Callable
    seed: complex
    singularities: Sequence = ()
    tag: str = ""
    roots: Optional[Sequence] = None
    lead: complex = 1.0

    def radicand_split(self, base, delta):
        """Radicand at ``base + delta``, using the factored form when available."""
        if self.roots is None:
            return np.asarray(self.radicand(base + delta), dtype=complex)
        out = np.full(np.shape(delta), complex(self.lead))
        for r in self.roots:
            out = out * ((base - r) + delta)
        return out


@dataclass
class QuadResult:
    value: complex
    error: float
    root_end: Optional[complex] = None
    intervals: int = 0
    max_phase_step: float = 0.0
    notes: dict = field(default_factory=dict)


def _pick_root(p, prev):
    r = np.sqrt(complex(p))
    if prev is None:
        return r
    return r if (r * np.conj(prev)).real >= 0 else -r


class _Leg:
    """Map v in [0, 1] -> z with Jacobian dz/dv; ``sign`` multiplies the contribution."""

    def __init__(self, zmap, jac, sign=1.0, split=None):
        self.zmap, self.jac, self.sign = zmap, jac, sign
        self.split = split or (lambda v: (0j, zmap(v)))


def _legs_for(path, start, end):
    legs = []
    segs = path.segments()
    if start == "infinity":
        R = path.start

        def zmap(v, R=R):
            u = 1 - v
            return R / u**2

        def jac(v, R=R):
            u = 1 - v
            return 2 * R / u**3

        legs.append(_Leg(zmap, jac, sign=-1.0))
    for k, (a, b) in enumerate(segs):
        d = b - a
        first, last = k == 0, k == len(segs) - 1
        sing_a = first and start == "branch"
        sing_b = last and end == "branch"
        if sing_a and sing_b:
            def smap(v):
                return np.sin(math.pi * v / 2) ** 2

            def cmap(v):
                return np.cos(math.pi * v / 2) ** 2

            def ds(v):
                return math.pi / 2 * np.sin(math.pi * v)
        elif sing_a:
            def smap(v):
                return v * v

            def cmap(v):
                return (1 - v) * (1 + v)

            def ds(v):
                return 2 * v
        elif sing_b:
            def smap(v):
                return v * (2 - v)

            def cmap(v):
                return (1 - v) ** 2

            def ds(v):
                return 2 * (1 - v)
        else:
            def smap(v):
                return v

            def cmap(v):
                return 1 - v

            def ds(v):
                return np.ones_like(v)

        def split(v, a=a, b=b, d=d, smap=smap, cmap=cmap):
            # measure from the nearer endpoint so z - vertex is exact
            v = np.asarray(v, dtype=float)
            near_b = v > 0.5
            base = np.where(near_b, b, a)
            delta = np.where(near_b, -d * cmap(v), d * smap(v))
            return base, delta

        legs.append(_Leg(lambda v, a=a, d=d, smap=smap: a + d * smap(v),
                         lambda v, d=d, ds=ds: d * ds(v), split=split))
    return legs


def integrate_path(f, path, tol=DEFAULT_TOL, start="regular", end="regular", max_depth=40,
                   max_intervals=20000, max_phase=math.pi / 2):
    """Integrate ``f`` along ``path``.

    Parameters
    ----------
    f : callable or BranchedIntegrand
        Plain callables are evaluated as ``f(z)`` on arrays.
    path : PathPolyline
    tol : float
        Absolute tolerance for the whole path.
    start : {"regular", "branch", "infinity"}
        ``"branch"``: the integrand has an inverse square-root singularity at
        the first vertex.  ``"infinity"``: the integral starts at infinity and
        comes in along the ray through the first vertex.
    end : {"regular", "branch"}

    Returns
    -------
    QuadResult
        ``value``, error estimate and (for branched integrands) the continued
        root at the path end.

    Raises
    ------
    NumericError
        When an interval cannot meet its share of ``tol`` at ``max_depth``.
    """
    branched = isinstance(f, BranchedIntegrand)
    legs = _legs_for(path, start, end)
    total = float(len(legs))
    value = 0j
    error = 0.0
    nint = 0
    root = complex(f.seed) if branched else None
    have_root = False
    worst_phase = 0.0

    for leg in legs:
        stack = [(0.0, 1.0, 0)]
        while stack:
            a, b, depth = stack.pop()
            half = (b - a) / 2
            v = a + half * (_XK + 1)
            z = leg.zmap(v)
            jac = leg.jac(v)
            if branched:
                base, delta = leg.split(v)
                rad = f.radicand_split(base, delta)
                roots = np.empty(15, dtype=complex)
                prev = root
                phase_ok = True
                for j in range(15):
                    r = _pick_root(rad[j], prev)
                    if (have_root or j > 0) and r != 0 and prev != 0:
                        ph = abs(cmath.phase(r / prev))
                        worst_phase = max(worst_phase, ph)
                        if ph > max_phase:
                            phase_ok = False
                    roots[j] = r
                    prev = r
                fz = np.asarray(f.func(z, roots), dtype=complex)
            else:
                fz = np.asarray(f(z), dtype=complex)
                phase_ok = True
            g = fz * jac
            k = half * np.sum(_WK * g)
            gq = half * np.sum(_WG * g)
            err = abs(k - gq)
            local_tol = max(tol * (b - a) / total,
                            100 * np.finfo(float).eps * abs(half) * float(np.sum(_WK * np.abs(g))))
            if not np.all(np.isfinite(g)):
                raise NumericError(f"non-finite integrand near z={complex(z[7])}")
            if (err > local_tol or not phase_ok) and depth < max_depth and nint < max_intervals:
                mid = (a + b) / 2
                stack.append((mid, b, depth + 1))
                stack.append((a, mid, depth + 1))
                continue
            if err > local_tol or not phase_ok:
                raise NumericError(
                    f"quadrature did not converge near z={complex(z[7])} (error {err:.3g})"
                )
            value += leg.sign * k
            error += err
            nint += 1
            if branched:
                have_root = True
                with np.errstate(divide="ignore", invalid="ignore"):
                    zb = leg.zmap(np.array([b]))
                if np.isfinite(zb).all():
                    pb = complex(np.asarray(f.radicand(zb))[0])
                    root = _pick_root(pb, roots[-1]) if pb != 0 else roots[-1]
                else:
                    root = roots[-1]
        if branched and leg.sign < 0:
            # the tail leg runs outward from the first vertex; restart the
            # continuation at that vertex for the finite legs
            root = _pick_root(complex(f.radicand(np.array([path.start]))[0]), complex(f.seed))
    return QuadResult(value=complex(value), error=float(error),
                      root_end=root if branched else None, intervals=nint,
                      max_phase_step=worst_phase)


def continue_root(radicand, path, seed, max_phase=math.pi / 8, per_segment=32, max_refine=12):
    """Continue ``sqrt(radicand)`` along ``path`` starting from the root nearest ``seed``.

    Returns the continued root at the last vertex.  Sampling is refined
    until consecutive roots differ in phase by less than ``max_phase``.
    """
    root = _pick_root(complex(radicand(np.array([path.start]))[0]), complex(seed))
    for a, b in path.segments():
        n = per_segment
        for _ in range(max_refine):
            s = np.linspace(0, 1, n + 1)[1:]
            vals = np.asarray(radicand(a + (b - a) * s), dtype=complex)
            r = root
            ok = True
            out = []
            for p in vals:
                nr = _pick_root(p, r)
                if r != 0 and nr != 0 and abs(cmath.phase(nr / r)) > max_phase:
                    ok = False
                    break
                out.append(nr)
                r = nr
            if ok:
                root = r
                break
            n *= 2
        else:
            raise NumericError("square-root continuation failed to resolve the phase")
    return root
