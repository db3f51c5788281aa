"""Verification suites behind ``heunlab verify``.

Each suite returns a list of :class:`~heunlab.report.Check`.  A numerical
failure inside one check is recorded on that check and does not abort the
suite.  Detector checks (where a large value is the expected outcome) store
``threshold / observed`` as the residual with ``tol = 1``.
"""
import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import elliptic as ell
from . import extended as ext
from . import modular
from . import monodromy as mo
from . import painleve as pv
from . import spectral as sp
from .quadrature import PathPolyline
from .report import Check, failed_check

SUITES = ("lame", "reduction", "p6", "modular", "monodromy")

DEFAULT_TAU = 1.1j
DEFAULT_GRID = tuple(1j * (1.0 + 0.5 * k / 49) for k in range(50))
DEFAULT_C = (0.31, 0.17)
DEFAULT_D = (0.3, 1.0)


@dataclass
class RunConfig:
    command: str = "verify"
    suite: str = "all"
    taus: tuple = ()
    tau_grid: tuple = ()
    family: str = "hitchin_l0000"
    index: int = None
    c: tuple = None
    d: tuple = None
    l: tuple = (2, 0, 0, 0)
    tol: float = None
    precision: str = "double"
    seed: int = 0
    samples: int = 5
    out: str = None
    format: str = "json"

    def echo(self):
        return {
            "command": self.command, "suite": self.suite, "taus": list(self.taus),
            "tau_grid": list(self.tau_grid), "family": self.family, "index": self.index,
            "c": list(self.c) if self.c else None, "d": list(self.d) if self.d else None,
            "l": list(self.l), "tol": self.tol, "precision": self.precision, "seed": self.seed,
            "samples": self.samples, "format": self.format,
        }

    def instance(self):
        consts = self.d if self.family in pv.DEGENERATE else self.c
        if consts is None:
            consts = DEFAULT_D if self.family in pv.DEGENERATE else DEFAULT_C
        return pv.P6Instance(self.family, tuple(complex(v) for v in consts), self.index)


class _Collector:
    def __init__(self, cfg):
        self.cfg = cfg
        self.checks = []

    def tol(self, default, detector=False):
        if detector or self.cfg.tol is None:
            return default
        return self.cfg.tol

    def run(self, name, anchor, tol, inputs, fn, detector=False):
        t = self.tol(tol, detector)
        try:
            r = float(fn())
            self.checks.append(Check(name=name, anchor=anchor, residual=r, tol=t, inputs=inputs))
        except Exception as exc:  # recorded, not raised: a failing check is data
            self.checks.append(failed_check(name, anchor, t, inputs, exc))


def _rng(cfg, salt):
    return np.random.default_rng([cfg.seed, salt])


def random_energies(L, n, rng, avoid_margin=0.3):
    """Random ``E`` away from the genus-two branch points and ``E^2 = 3 g2``."""
    bps = sp.lame2_branch_points(L)
    out = []
    while len(out) < n:
        E = complex(rng.uniform(-4, 4), rng.uniform(-2.5, 2.5))
        if min(abs(E - b) for b in bps) > avoid_margin:
            out.append(E)
    return out


def _taus(cfg, default=(DEFAULT_TAU,)):
    return cfg.taus or default


# ---------------------------------------------------------------- lame


def suite_lame(cfg):
    col = _Collector(cfg)
    l = tuple(cfg.l)
    for it, tau in enumerate(_taus(cfg)):
        L = ell.lattice_from_tau(tau)
        for j, E in enumerate(random_energies(L, cfg.samples, _rng(cfg, 11 + it))):
            pre = f"lame/tau{it:02d}/E{j:02d}"
            inputs = {"tau": tau, "E": E, "l": list(l)}
            state = {}

            def build():
                sd = sp.build_xi_even(l, E, L)
                state["sd"] = sd
                x = sp.sample_points(L, 10, clearance=0.15, offset=77)
                res = sp.symmetric_square_residual(l, E, sd.xi_coeffs, x, L)
                B = sp._basis_derivs(l, x, L)
                scale = np.abs(sd.xi_coeffs) @ np.abs(B[3]) + 1.0
                return np.max(np.abs(res) / scale)

            col.run(pre + "/symmetric_square", "product function solves the symmetric-square equation",
                    1e-8, inputs, build)
            if "sd" not in state:
                continue
            sd = state["sd"]

            def qconst():
                sp.compute_Q(sd, rtol=1.0)
                return sd.Q_spread / abs(sd.Q)

            col.run(pre + "/q_constant", "Q independent of x", 1e-9, inputs, qconst)

            def even():
                x = sp.sample_points(L, 10, clearance=0.15, offset=91)
                return np.max(np.abs(sd.xi(x) - sd.xi(-x)) / np.abs(sd.xi(x)))

            col.run(pre + "/xi_even", "Xi even", 1e-10, inputs, even)
            if l != (2, 0, 0, 0) or sd.Q is None:
                continue
            col.run(pre + "/q_closed_form", "Q = (E^2 - 3 g2) prod (E - 3 e_i)", 1e-9, inputs,
                    lambda: abs(sd.Q - sp.lame2_Q(E, L)) / abs(sp.lame2_Q(E, L)))

            def xi_closed():
                x = sp.sample_points(L, 10, clearance=0.15, offset=5)
                ref = sp.lame2_xi(x, E, L)
                return np.max(np.abs(sd.xi(x) - ref) / np.abs(ref))

            col.run(pre + "/xi_closed_form", "Xi = 9 wp^2 + 3 E wp + E^2 - 9 g2 / 4", 1e-9, inputs, xi_closed)

            def ode():
                lo = mo.heun_elliptic_ode(l, E, L)
                pts = sp.sample_points(L, 3, clearance=0.2, offset=33)
                return mo.ode_residual(lo, lambda z: sp.eval_lambda_integral(sd, z), pts)

            col.run(pre + "/lambda_ode_residual", "integral representation solves the equation", 1e-7, inputs, ode)
            hk_state = {}

            def fit():
                hk = sp.hk_parameters_lame2(E, L, sqrtQ_sign=sd.sqrtQ_sign)
                hk_state["hk"] = hk
                return sp.fit_hk_form(sd, hk)[1]

            col.run(pre + "/hk_reconstruction", "Hermite-Krichever form reproduces Lambda", 1e-6, inputs, fit)
            for k in (1, 3):
                def mult(k=k):
                    hk = hk_state.get("hk") or sp.hk_parameters_lame2(E, L)
                    num = sp.lambda_monodromy(sd, k)
                    m = sp.monodromy_multiplier_elliptic(hk, k, L)
                    return abs(num - m) / abs(m)

                col.run(pre + f"/multiplier_k{k}", "Lambda(x + 2 omega_k) / Lambda(x) against the elliptic multiplier",
                        1e-6, inputs, mult)
    return col.checks


# ---------------------------------------------------------------- reduction


def suite_reduction(cfg):
    col = _Collector(cfg)
    for it, tau in enumerate(_taus(cfg)):
        L = ell.lattice_from_tau(tau)
        for j, E in enumerate(random_energies(L, cfg.samples, _rng(cfg, 23 + it))):
            pre = f"reduction/tau{it:02d}/E{j:02d}"
            inputs = {"tau": tau, "E": E}
            state = {}

            def rep():
                if "r" not in state:
                    state["r"] = sp.verify_reduction_identities(E, L)
                return state["r"]

            col.run(pre + "/alpha_identity", "elliptic integral to xi against genus-two integral to E (mod periods)",
                    1e-6, inputs, lambda: rep().alpha_residual)
            for i in (1, 2, 3):
                col.run(pre + f"/kappa_identity_e{i}", f"kappa as genus-two plus elliptic integral from e_{i}",
                        1e-6, inputs, lambda i=i: rep().kappa_rows[i - 1]["residual"])
            for k in (1, 3):
                def mult(k=k):
                    hk = sp.hk_parameters_lame2(E, L)
                    m1 = sp.monodromy_multiplier_elliptic(hk, k, L)
                    m2, _ = sp.monodromy_multiplier_hyperelliptic(E, k, L)
                    return sp.unordered_pair_distance(m1, m2) / max(abs(m1), abs(1 / m1))

                col.run(pre + f"/hyperelliptic_multiplier_k{k}", "elliptic against genus-two multiplier ({m, 1/m})",
                        1e-6, inputs, mult)
    return col.checks


# ---------------------------------------------------------------- p6


def _grid(cfg):
    return cfg.tau_grid or DEFAULT_GRID


def suite_p6(cfg):
    col = _Collector(cfg)
    inst = cfg.instance()
    grid = list(_grid(cfg))
    pre = f"p6/{inst.name}"
    inputs = {"family": inst.name, "constants": list(inst.constants), "n_tau": len(grid),
              "tau_first": grid[0], "tau_last": grid[-1]}
    tols = {"elliptic": 1e-6, "rational": 1e-5, "hamiltonian": 1e-6}
    for mode, tol in tols.items():
        col.run(f"{pre}/residual_{mode}", f"Painleve VI residual ({mode} form)", tol, inputs,
                lambda mode=mode: pv.p6_residual(inst, grid, mode).max)

    picks = sorted({0, len(grid) // 2, len(grid) - 1})
    for k in picks:
        tau = grid[k]
        inp = {"family": inst.name, "tau": tau}
        state = {}

        def ode(tau=tau, state=state):
            if "ode" not in state:
                mu_hint = pv.mu_from_flow(inst, tau) if inst.family == "degenerate_l1000_cubic" else None
                state["ode"] = pv.instance_ode(inst, tau, mu_hint=mu_hint)
            return state["ode"]

        col.run(f"{pre}/tau{k:02d}/apparency", "no logarithmic term at x = delta1", 1e-10, inp,
                lambda ode=ode: pv.frobenius_apparency_check(ode()))

        def perturbed(ode=ode):
            o = ode()
            dp = 0.1 * max(abs(o.p), abs(o.b1), 1.0)
            o2 = pv.FuchsianODE_M1.from_parameters(o.l, o.b1, o.mu1, o.lattice, p=o.p + dp, delta1=o.delta1)
            return 1e-3 / pv.frobenius_apparency_check(o2)

        col.run(f"{pre}/tau{k:02d}/apparency_detector", "perturbed p: 1e-3 / obstruction", 1.0, inp,
                perturbed, detector=True)

        def rational(ode=ode, tau=tau):
            o = ode()
            fr = pv.frame_map(o.b1, o.mu1, o.l, o.lattice)
            r = pv.frobenius_apparency_check(fr.rational_ode())
            return max(r, abs(fr.H_VI - pv.hamiltonian_p6(fr.lam, fr.mu, fr.t, fr.kappas)) / max(1.0, abs(fr.H_VI)))

        col.run(f"{pre}/tau{k:02d}/rational_apparency", "w = lambda apparent; H_VI from the frame map", 1e-10,
                inp, rational)

        def mu_flow(ode=ode, tau=tau):
            o = ode()
            return abs(o.mu1 - pv.mu_from_flow(inst, tau)) / max(1.0, abs(o.mu1))

        col.run(f"{pre}/tau{k:02d}/mu_flow", "mu1 against d lambda/dt = dH/dmu", 1e-7, inp, mu_flow)

    if cfg.precision == "extended" and inst.family == "hitchin_l0000":
        tau0 = grid[0]
        col.run(f"{pre}/b1_extended", "b1 against the mpmath lattice", 1e-9, {"tau": tau0},
                lambda: abs(pv.family_b1(inst, tau0) - hitchin_b1_extended(inst, tau0))
                / max(1.0, abs(hitchin_b1_extended(inst, tau0))))

    if not inst.degenerate:
        def preserved():
            seed = None
            vals = []
            for tau in grid[:: max(1, len(grid) // 20)]:
                mc = pv.monodromy_constants(inst, tau, seed=seed)
                seed = mc.alpha
                vals.append([cmath.exp(e) for e in mc.exponents])
            v = np.array(vals)
            return float(np.max(np.abs(v - v[0]) / np.abs(v[0])))

        col.run(f"{pre}/monodromy_constants", "multiplier exponents constant along the grid", 1e-8, inputs, preserved)

        def round_trip():
            L = ell.lattice_from_tau(grid[0])
            case = "l0000" if inst.family == "hitchin_l0000" else "l1000"
            b1 = pv.family_b1(inst, L=L)
            mu1 = pv.family_mu1(inst, L, b1)
            hk = pv.hk_inversion(case, "mu_b1_to_hk", pv.HKData(mu1=mu1, b1=b1), L)
            back = pv.hk_inversion(case, "hk_to_mu_b1", hk, L)
            return max(abs(back.mu1 - mu1) / max(1.0, abs(mu1)), abs(back.b1 - b1) / max(1.0, abs(b1)))

        col.run(f"{pre}/hk_round_trip", "(mu1, b1) -> HK -> (mu1, b1)", 1e-10, inputs, round_trip)

        def reading():
            r = pv.check_cycle_reading(inst, grid[0])
            return max(r[1]["omega_k"], r[3]["omega_k"])

        col.run(f"{pre}/cycle_reading", "exponent with 2 omega_k reproduces exp(pi i C_k)", 1e-9, inputs, reading)
    return col.checks


def hitchin_b1_extended(inst, tau, dps=30):
    """Hitchin ``b1`` on the mpmath lattice (independent theta implementation)."""
    import mpmath
    with mpmath.workdps(dps):
        M = ext.mp_lattice(tau, dps)
        c1, c3 = (mpmath.mpc(v) for v in inst.constants)
        w = c1 * M.tau / 2 - c3 / 2
        eta = c1 * M.eta3 - c3 * M.eta1
        Z = ext.mp_zeta(w, M) - eta
        return complex(ext.mp_wp(w, M) + ext.mp_wp_prime(w, M) / (2 * Z))


# ---------------------------------------------------------------- modular


def suite_modular(cfg):
    col = _Collector(cfg)
    groups = {"t": ("t",), "e_i": ("e1", "e2", "e3"), "eta1": ("eta1",), "pow_e2_minus_e1": ("pow_e2_minus_e1",)}
    a_values = (0.5, -1.0, 0.3 + 0.2j)
    for it, tau in enumerate(_taus(cfg, (1.2j,))):
        L = ell.lattice_from_tau(tau)
        inputs = {"tau": tau, "precision": cfg.precision}
        for g, tags in groups.items():
            def derr(tags=tags, g=g):
                worst = 0.0
                for tag in tags:
                    for a in (a_values if g == "pow_e2_minus_e1" else (None,)):
                        q = modular.modular_derivative(tag, L=L, a=a)
                        h = 1e-6 if cfg.precision == "extended" else None
                        fd = modular.finite_difference_oracle(tag, tau, h=h, a=a, precision=cfg.precision)
                        worst = max(worst, abs(q.dtau - fd.value) / max(abs(q.dtau), 1e-300))
                return worst

            col.run(f"modular/tau{it:02d}/d_{g}", f"closed-form d/dtau of {g} against finite differences", 1e-6,
                    inputs, derr)

        def order():
            return max(abs(modular.convergence_order(tag, tau, a=(0.5 if tag.startswith("pow") else None)) - 4)
                       for tag in ("t", "e1", "eta1", "pow_e2_minus_e1"))

        col.run(f"modular/tau{it:02d}/convergence_order", "|observed stencil order - 4|", 0.5, inputs, order,
                detector=True)
        col.run(f"modular/tau{it:02d}/consistency", "e3 - e1 form, quotient rule for t, vanishing sum", 1e-9,
                inputs, lambda: max(modular.consistency_checks(L).values()))
    return col.checks


# ---------------------------------------------------------------- monodromy


def keyhole_loop(base, centre, radius, n=16):
    """Closed path ``base -> circle around centre -> base`` (counter-clockwise)."""
    d = base - centre
    u = d / abs(d)
    start = centre + radius * u
    ang = np.angle(u) + 2 * math.pi * np.arange(n + 1) / n
    ring = list(centre + radius * np.exp(1j * ang))
    ring[-1] = start
    ring[0] = start
    return PathPolyline(tuple([base] + ring + [base]), 0.5 * radius)


def pick_base(ode, keyholes, n=48):
    """Base point on a grid maximising the clearance of all keyhole loops."""
    best = None
    for k in range(n):
        b = 0.5 + 0.8 * cmath.exp(2j * math.pi * (k + 0.5) / n)
        loops = [keyhole_loop(b, c, r) for c, r in keyholes]
        d = min(lp.min_distance([s for s in ode.singular_points if abs(s - c) > 1e-12])
                for lp, (c, _) in zip(loops, keyholes))
        if best is None or d > best[0]:
            best = (d, b)
    return best[1]


def suite_monodromy(cfg):
    col = _Collector(cfg)
    inst = cfg.instance() if cfg.family not in pv.DEGENERATE else pv.P6Instance("hitchin_l0000", DEFAULT_C)
    for it, tau in enumerate(_taus(cfg, (1.2j,))):
        L = ell.lattice_from_tau(tau)
        pre = f"monodromy/tau{it:02d}/{inst.name}"
        inputs = {"tau": tau, "family": inst.name, "constants": list(inst.constants)}
        state = {}

        def setup():
            if not state:
                fo = pv.instance_ode(inst, tau)
                hk, alpha, sgn, _ = pv.hk_from_instance(inst, L)
                case = "l0000" if inst.family == "hitchin_l0000" else "l1000"
                xi, _ = pv.xi_and_Q(case, fo.mu1, fo.b1, L)
                state.update(fo=fo, lo=mo.fuchsian_m1_ode(fo), hk=hk, alpha=alpha, xi=xi)
            return state

        base = 0.137 + 0.291 * tau
        for k in (1, 3):
            res = {}

            def cyc(k=k, res=res):
                if "r" not in res:
                    s = setup()
                    res["r"] = mo.cycle_monodromy(s["lo"], base, k)
                return res["r"]

            col.run(f"{pre}/multiplier_k{k}", "eigenvalues against exp(+-(-2 eta_k alpha + 2 omega_k zeta + 2 kappa omega_k))",
                    1e-6, inputs, lambda k=k, cyc=cyc: mo.multiplier_compare(cyc(), setup()["alpha"], setup()["hk"].kappa, k, L).residual)

            def diag(cyc=cyc):
                s = setup()
                sq = s["hk"].sqrt_minus_Q
                lp, _ = pv.lambda_log_derivative_m1(s["xi"], s["fo"].b1, sq, base, L)
                lm, _ = pv.lambda_log_derivative_m1(s["xi"], s["fo"].b1, sq, -base, L)
                return mo.diagonal_leakage(cyc(), np.array([[1, 1], [lp, -lm]]))[0]

            col.run(f"{pre}/diagonal_k{k}", "monodromy diagonal in the (Lambda(x), Lambda(-x)) basis", 1e-6, inputs, diag)
            col.run(f"{pre}/det_k{k}", "det = exp(-integral of p1)", 1e-8, inputs, lambda cyc=cyc: cyc().det_residual)

        rstate = {}

        def rational():
            if not rstate:
                s = setup()
                fr = pv.frame_map(s["fo"].b1, s["fo"].mu1, inst.l, L)
                rstate["ode"] = mo.rational_p6_ode(fr.rational_ode())
                rstate["lam"] = fr.lam
            return rstate

        def apparent_loop():
            r = rational()
            m = mo.monodromy_matrix(r["ode"], mo.loop_around(r["ode"], r["lam"]))
            return float(np.max(np.abs(m.matrix - np.eye(2))))

        col.run(f"{pre}/rational_lambda_loop", "loop around the apparent point is the identity", 1e-7, inputs, apparent_loop)

        def homotopy():
            r = rational()
            ode = r["ode"]
            dmin = min(abs(s) for s in ode.singular_points if abs(s) > 0)
            b = pick_base(ode, ((0j, 0.3 * dmin),))
            m1 = mo.monodromy_matrix(ode, keyhole_loop(b, 0j, 0.3 * dmin), predict_det=False)
            m2 = mo.monodromy_matrix(ode, keyhole_loop(b, 0j, 0.15 * dmin), predict_det=False)
            return mo.eigenvalue_pair_distance(m1.eigenvalues, m2.eigenvalues)

        col.run(f"{pre}/homotopy", "homotopic loops give the same eigenvalues", 2e-8, inputs, homotopy)

        def composition():
            r = rational()
            ode = r["ode"]
            d0 = min(abs(s) for s in ode.singular_points if abs(s) > 0)
            d1 = min(abs(s - 1) for s in ode.singular_points if abs(s - 1) > 0)
            b = pick_base(ode, ((0j, 0.3 * d0), (1 + 0j, 0.3 * d1)))
            A = keyhole_loop(b, 0j, 0.3 * d0)
            B = keyhole_loop(b, 1 + 0j, 0.3 * d1)
            mA = mo.monodromy_matrix(ode, A, predict_det=False).matrix
            mB = mo.monodromy_matrix(ode, B, predict_det=False).matrix
            mAB = mo.monodromy_matrix(ode, A + B, predict_det=False).matrix
            return float(np.max(np.abs(mAB - mB @ mA)) / max(1.0, np.max(np.abs(mAB))))

        col.run(f"{pre}/composition", "concatenated loop is the matrix product", 1e-7, inputs, composition)

        E = random_energies(L, 1, _rng(cfg, 41 + it))[0]

        def lame_cycle():
            hk = sp.hk_parameters_lame2(E, L)
            r = mo.cycle_monodromy(mo.heun_elliptic_ode((2, 0, 0, 0), E, L), base, 1)
            return mo.multiplier_compare(r, hk.alpha, hk.kappa, 1, L).residual

        col.run(f"monodromy/tau{it:02d}/lame2_multiplier_k1", "Lame l0 = 2 cycle eigenvalues against the elliptic multiplier",
                1e-6, {"tau": tau, "E": E}, lame_cycle)
    return col.checks


RUNNERS = {
    "lame": suite_lame,
    "reduction": suite_reduction,
    "p6": suite_p6,
    "modular": suite_modular,
    "monodromy": suite_monodromy,
}


def run_suite(cfg):
    names = SUITES if cfg.suite == "all" else (cfg.suite,)
    checks = []
    for n in names:
        checks.extend(RUNNERS[n](cfg))
    return checks


# ---------------------------------------------------------------- trajectory


def trajectory_rows(inst, grid):
    """Rows ``(tau, t, b1, delta1, lambda, residual_elliptic, residual_rational, status)``.

    Rows hitting a parameter singularity or a branch jump are kept and flagged.
    """
    rows = []
    prev = None
    for tau in grid:
        tau = complex(tau)
        row = {"tau": tau, "status": "ok"}
        try:
            L = ell.lattice_from_tau(tau)
            b1 = complex(pv.family_b1(inst, L=L))
            d = complex(ell.elliptic_log(b1, L, branch_seed=prev))
            if prev is not None and abs(d - prev) > 0.25 * min(1.0, abs(L.tau)):
                row["status"] = "branch_jump"
            row.update(t=complex(L.t), b1=b1, delta1=d, **{"lambda": complex((b1 - L.e1) / (L.e2 - L.e1))})
            row["residual_elliptic"] = float(pv._residual_elliptic(inst, tau, d, 2e-3, True))
            row["residual_rational"] = float(pv._residual_rational(inst, tau, 2e-3, True))
            prev = d
        except pv.ParameterSingularityError:
            row["status"] = "parameter_singularity"
            prev = None
        except Exception as exc:  # flagged row, never dropped
            row["status"] = f"error:{type(exc).__name__}"
            prev = None
        rows.append(row)
    return rows
