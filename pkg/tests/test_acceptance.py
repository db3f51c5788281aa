"""The twelve acceptance criteria at their stated tolerances and runtime limits.

Each test prints (and records for the terminal summary) one PASS/FAIL line.
Random draws use fixed seeds.
"""
import cmath
import math
import time

import numpy as np
import pytest

from heunlab import cli
from heunlab import elliptic as ell
from heunlab import modular
from heunlab import monodromy as mo
from heunlab import painleve as pv
from heunlab import spectral as sp
from acceptance_log import record


def rng(k):
    return np.random.default_rng(20260 + k)


def random_taus(r, n, lo=0.8, hi=1.6):
    return [complex(r.uniform(-0.5, 0.5), r.uniform(lo, hi)) for _ in range(n)]


def random_energies(L, r, n):
    bps = sp.lame2_branch_points(L)
    out = []
    while len(out) < n:
        E = complex(r.uniform(-4, 4), r.uniform(-2.5, 2.5))
        if min(abs(E - b) for b in bps) > 0.3:
            out.append(E)
    return out


class Clock:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def finish(number, title, worst, limit, clock, extra=""):
    ok = all(w < tol for w, tol in worst) and clock.elapsed < limit
    detail = ", ".join(f"{w:.2e} < {tol:.0e}" for w, tol in worst)
    record(number, title, ok, f"{detail}; {clock.elapsed:.1f}s < {limit}s{extra}")
    assert ok


# ---------------------------------------------------------------- 1


def test_criterion_01_elliptic_identities():
    r = rng(1)
    w_ode = w_per = w_zeta = w_leg = 0.0
    with Clock() as c:
        for tau in random_taus(r, 5):
            L = ell.lattice_from_tau(tau)
            z = np.array([complex(r.uniform(-0.5, 0.5), 0) + r.uniform(-0.5, 0.5) * tau for _ in range(400)])
            z = z[np.abs(ell.reduce_argument(z, L)[0]) > 0.05][:100]
            assert len(z) == 100
            p, dp = ell.wp(z, L), ell.wp_prime(z, L)
            scale = np.maximum.reduce([np.ones(100), np.abs(4 * p**3), np.abs(L.g2 * p), np.full(100, abs(L.g3))])
            w_ode = max(w_ode, np.max(np.abs(dp**2 - (4 * p**3 - L.g2 * p - L.g3)) / scale))
            for m, n in ((1, 0), (0, 1), (1, 1), (-2, 1)):
                w_per = max(w_per, np.max(np.abs(ell.wp(z + m + n * tau, L) - p) / np.maximum(1, np.abs(p))))
            zz = ell.zeta(z, L)
            for k in (1, 3):
                sh = ell.zeta(z + 2 * L.half_period(k), L)
                w_zeta = max(w_zeta, np.max(np.abs(sh - zz - 2 * L.eta(k)) / np.maximum(1, np.abs(sh))))
            w_leg = max(w_leg, abs(L.eta1 * L.omega3 - L.eta3 * L.omega1 - math.pi * 1j / 2))
    finish(1, "elliptic identities", [(w_ode, 1e-10), (w_per, 1e-10), (w_zeta, 1e-10), (w_leg, 1e-12)], 5, c)


# ---------------------------------------------------------------- 2


def test_criterion_02_lame_spectral_data():
    r = rng(2)
    L = ell.lattice_from_tau(1.1j)
    w_const = w_closed = 0.0
    with Clock() as c:
        for E in random_energies(L, r, 10):
            sd = sp.build_xi_even((2, 0, 0, 0), E, L)
            Q = sp.compute_Q(sd, rtol=1.0)
            w_const = max(w_const, sd.Q_spread / abs(Q))
            ref = sp.lame2_Q(E, L)
            w_closed = max(w_closed, abs(Q - ref) / abs(ref))
    finish(2, "Lame l0=2 Q constancy and closed form", [(w_const, 1e-9), (w_closed, 1e-9)], 10, c)


# ---------------------------------------------------------------- 3


def test_criterion_03_multiplier_cross_check():
    r = rng(3)
    worst = 0.0
    with Clock() as c:
        for tau in (1.1j, 0.15 + 1.3j):
            L = ell.lattice_from_tau(tau)
            for E in random_energies(L, r, 5):
                hk = sp.hk_parameters_lame2(E, L)
                for k in (1, 3):
                    m1 = sp.monodromy_multiplier_elliptic(hk, k, L)
                    m2, _ = sp.monodromy_multiplier_hyperelliptic(E, k, L)
                    worst = max(worst, sp.unordered_pair_distance(m1, m2) / max(abs(m1), abs(1 / m1)))
    finish(3, "elliptic vs genus-two multiplier", [(worst, 1e-6)], 60, c)


# ---------------------------------------------------------------- 4


def test_criterion_04_reduction_identities():
    r = rng(4)
    L = ell.lattice_from_tau(1.1j)
    w_alpha = w_kappa = 0.0
    with Clock() as c:
        for E in random_energies(L, r, 5):
            rep = sp.verify_reduction_identities(E, L)
            w_alpha = max(w_alpha, rep.alpha_residual)
            assert len(rep.kappa_rows) == 3
            w_kappa = max(w_kappa, max(row["residual"] for row in rep.kappa_rows))
    finish(4, "genus-two reduction identities", [(w_alpha, 1e-6), (w_kappa, 1e-6)], 60, c)


# ---------------------------------------------------------------- 5


def test_criterion_05_modular_calculus():
    r = rng(5)
    worst, order_dev = 0.0, 0.0
    orders = []
    with Clock() as c:
        for tau in random_taus(r, 10, 0.9, 1.6):
            L = ell.lattice_from_tau(tau)
            for tag in modular.TAGS:
                for a in ((0.5, -1.0) if tag == "pow_e2_minus_e1" else (None,)):
                    q = modular.modular_derivative(tag, L=L, a=a)
                    fd = modular.finite_difference_oracle(tag, tau, a=a)
                    worst = max(worst, abs(q.dtau - fd.value) / abs(q.dtau))
            orders.append(modular.convergence_order("t", tau))
        tau0 = 1.2j
        for tag, a in (("e1", None), ("eta1", None), ("pow_e2_minus_e1", 0.5)):
            orders.append(modular.convergence_order(tag, tau0, a=a))
    ok_order = all(3.5 <= o <= 4.5 for o in orders)
    order_dev = max(abs(o - 4) for o in orders)
    finish(5, "modular derivatives", [(worst, 1e-6), (order_dev, 0.5)], 10, c,
           f"; orders in [{min(orders):.3f}, {max(orders):.3f}]")
    assert ok_order


# ---------------------------------------------------------------- 6, 7


GRID50 = [1j * (1 + 0.5 * k / 49) for k in range(50)]


def _family_residuals(family, seed):
    r = rng(seed)
    w_ell = w_rat = 0.0
    for _ in range(5):
        inst = pv.P6Instance(family, (r.uniform(0.05, 0.45), r.uniform(0.05, 0.45)))
        w_ell = max(w_ell, pv.p6_residual(inst, GRID50, "elliptic").max)
        w_rat = max(w_rat, pv.p6_residual(inst, GRID50, "rational").max)
    return w_ell, w_rat


def test_criterion_06_hitchin_family():
    with Clock() as c:
        w_ell, w_rat = _family_residuals("hitchin_l0000", 6)
    finish(6, "Hitchin family residuals", [(w_ell, 1e-6), (w_rat, 1e-5)], 120, c)


def test_criterion_07_l1000_family():
    assert pv.kappas_from_l((1, 0, 0, 0))[3] == 1.5
    with Clock() as c:
        w_ell, w_rat = _family_residuals("explicit_l1000", 7)
    finish(7, "l0=1 family residuals", [(w_ell, 1e-6), (w_rat, 1e-5)], 120, c)


# ---------------------------------------------------------------- 8


def test_criterion_08_degenerate_families():
    grid = [1j * (1 + 0.5 * k / 29) for k in range(30)]
    insts = [pv.P6Instance("degenerate_mu0", (0.3, 1.0)), pv.P6Instance("degenerate_l1000_cubic", (0.3, 1.0))]
    insts += [pv.P6Instance(f, (0.3, 1.0), i) for f in pv.INDEXED for i in (1, 2, 3)]
    worst = 0.0
    with Clock() as c:
        for inst in insts:
            worst = max(worst, pv.p6_residual(inst, grid, "elliptic").max)
    finish(8, "degenerate family residuals", [(worst, 1e-6)], 60, c, f"; {len(insts)} instances")


# ---------------------------------------------------------------- 9


def test_criterion_09_apparency():
    r = rng(9)
    obs_max, det_min, loop_max = 0.0, math.inf, 0.0
    with Clock() as c:
        odes = []
        for tau in (1.0j, 1.25j, 0.1 + 1.4j):
            L = ell.lattice_from_tau(tau)
            for l in ((0, 0, 0, 0), (1, 0, 0, 0)):
                for _ in range(3):
                    b1 = complex(r.uniform(-1, 1), r.uniform(0.8, 2))
                    mu1 = complex(r.uniform(-0.5, 0.5), r.uniform(-0.5, 0.5))
                    odes.append(pv.FuchsianODE_M1.from_parameters(l, b1, mu1, L))
        for family, idx in (("hitchin_l0000", None), ("explicit_l1000", None), ("degenerate_mu0", None),
                            ("degenerate_mui", 2), ("degenerate_l1000_ei", 3)):
            consts = (0.3, 1.0) if family in pv.DEGENERATE else (0.31, 0.17)
            odes.append(pv.instance_ode(pv.P6Instance(family, consts, idx), 1.2j))
        for ode in odes:
            obs_max = max(obs_max, pv.frobenius_apparency_check(ode))
            dp = 0.1 * max(abs(ode.p), abs(ode.b1), 1.0)
            bad = pv.FuchsianODE_M1.from_parameters(ode.l, ode.b1, ode.mu1, ode.lattice, p=ode.p + dp,
                                                    delta1=ode.delta1)
            det_min = min(det_min, pv.frobenius_apparency_check(bad))
        for ode in odes[::4]:
            fr = pv.frame_map(ode.b1, ode.mu1, ode.l, ode.lattice)
            rode = mo.rational_p6_ode(fr.rational_ode())
            m = mo.monodromy_matrix(rode, mo.loop_around(rode, fr.lam), predict_det=False)
            loop_max = max(loop_max, float(np.max(np.abs(m.matrix - np.eye(2)))))
    finish(9, "apparency", [(obs_max, 1e-10), (1e-3 / det_min, 1.0), (loop_max, 1e-7)], 30, c,
           f"; {len(odes)} triples, perturbed obstruction >= {det_min:.2e}")


# ---------------------------------------------------------------- 10


def test_criterion_10_monodromy_preservation():
    inst = pv.P6Instance("hitchin_l0000", (0.31, 0.17))
    grid = [1j * (1 + 0.5 * k / 19) for k in range(20)]
    with Clock() as c:
        seed, vals = None, []
        for tau in grid:
            mc = pv.monodromy_constants(inst, tau, seed=seed)
            seed = mc.alpha
            vals.append([cmath.exp(e) for e in mc.exponents])
        v = np.array(vals)
        drift = float(np.max(np.abs(v - v[0]) / np.abs(v[0])))
        num = 0.0
        for tau in (grid[0], grid[10], grid[-1]):
            L = ell.lattice_from_tau(tau)
            ode = mo.fuchsian_m1_ode(pv.instance_ode(inst, tau))
            hk, alpha, _, _ = pv.hk_from_instance(inst, L)
            for k in (1, 3):
                res = mo.cycle_monodromy(ode, 0.137 + 0.291 * tau, k)
                num = max(num, mo.multiplier_compare(res, alpha, hk.kappa, k, L).residual)
    finish(10, "monodromy preservation", [(drift, 1e-8), (num, 1e-6)], 120, c)


# ---------------------------------------------------------------- 11


def test_criterion_11_hk_family_consistency():
    r = rng(11)
    trip = 0.0
    route = 0.0
    wrong_pairing = math.inf
    with Clock() as c:
        for tau in (1.0j, 1.2j, 0.2 + 1.1j):
            L = ell.lattice_from_tau(tau)
            for case in ("l0000", "l1000"):
                for _ in range(5):
                    b1 = complex(r.uniform(-1, 1), r.uniform(0.8, 2))
                    mu1 = complex(r.uniform(0.2, 0.8), r.uniform(-0.5, 0.5))
                    hk = pv.hk_inversion(case, "mu_b1_to_hk", pv.HKData(mu1=mu1, b1=b1), L)
                    back = pv.hk_inversion(case, "hk_to_mu_b1", hk, L)
                    again = pv.hk_inversion(case, "mu_b1_to_hk", back, L)
                    trip = max(trip, abs(back.mu1 - mu1) / max(1, abs(mu1)), abs(back.b1 - b1) / max(1, abs(b1)),
                               abs(again.kappa - hk.kappa) / max(1, abs(hk.kappa)),
                               abs(again.wp_prime_alpha - hk.wp_prime_alpha) / max(1, abs(hk.wp_prime_alpha)))
            for c1, c3 in ((0.31, 0.17), (0.5, 0.5), (0.12, 0.37)):
                inst = pv.P6Instance("hitchin_l0000", (c1, c3))
                b1 = pv.family_b1(inst, L=L)
                w = c1 * L.omega3 - c3 * L.omega1
                Z = ell.zeta(w, L) - (c1 * L.eta3 - c3 * L.eta1)
                P, dP = ell.wp(w, L), ell.wp_prime(w, L)
                # alpha = -w: wp'(alpha) pairs with -wp'(w)
                fwd = pv.hk_inversion("l0000", "hk_to_mu_b1", pv.HKData(P, -dP, Z), L)
                route = max(route, abs(fwd.b1 - b1) / max(1, abs(b1)))
                bad = pv.hk_inversion("l0000", "hk_to_mu_b1", pv.HKData(P, dP, Z), L)
                wrong_pairing = min(wrong_pairing, abs(bad.b1 - b1) / max(1, abs(b1)))
                # backwards: (b1, mu1) -> HK with the sqrt(-Q) sign rule
                hk, alpha, _, mis = pv.hk_from_instance(inst, L)
                route = max(route, mis, abs(hk.wp_alpha - P) / max(1, abs(P)),
                            abs(hk.wp_prime_alpha + dP) / max(1, abs(dP)))
    finish(11, "HK inversion and family consistency", [(trip, 1e-10), (route, 1e-9)], 10, c,
           f"; wrong sign pairing misses by >= {wrong_pairing:.2e}")
    assert wrong_pairing > 1e-3


# ---------------------------------------------------------------- 12


DETERMINISM_RUNS = (
    ["verify", "lame", "--samples", "2"],
    ["verify", "reduction", "--samples", "2"],
    ["verify", "p6", "--tau-grid", "1i:1.3i:10"],
    ["verify", "modular", "--tau", "1.2i,1.4i"],
    ["verify", "monodromy"],
    ["trajectory", "--tau-grid", "1i:1.5i:20"],
)


def test_criterion_12_determinism(tmp_path):
    differing = []
    for j, argv in enumerate(DETERMINISM_RUNS):
        outs = []
        for k in range(2):
            f = tmp_path / f"run{j}_{k}"
            cli.main(argv + ["--seed", "5", "--out", str(f)])
            outs.append(f.read_bytes())
        assert outs[0]
        if outs[0] != outs[1]:
            differing.append(" ".join(argv[:2]))
    ok = not differing
    record(12, "determinism", ok, f"{len(DETERMINISM_RUNS)} configurations rerun, "
           + ("all byte-identical" if ok else "differing: " + ", ".join(differing)))
    assert ok
