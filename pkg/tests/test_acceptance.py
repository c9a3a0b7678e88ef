"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines as they complete.  Criterion 7's sign-table assignment is asserted
twice: once against the sign pairs that the half-period limit construction
actually forces (passes), and once against the originally required
assignment, which is contradictory and kept as a strict xfail (see the
README's "known discrepancy" note).
"""

import sys
import time

import numpy as np
import pytest

from conftest import RHO, cell_points
from lame_spectra import (Branch, LameParams, classify, classify_regime,
                          discriminant_grid, endpoints, extract_arcs,
                          integrate_monodromy, invert_wp, lift, limit_family,
                          make_apparent, monodromy_sweep,
                          p_star, premodular_Z, premodular_zero_tau,
                          pv6_wp_pstar, spectral_polynomial, torus_init,
                          verify_trace_equivalence)
from lame_spectra.equivalence import EPS_SIGN_TABLE
from lame_spectra.metrics import blowup_sets, green_critical_residual
from lame_spectra.monodromy import noncr_ratio_from_matrices
from lame_spectra.spectral import (SpectralCurvePoint, bk_phi, bk_psi,
                                   chi_ratio, contour_base_point, lambda_data,
                                   noncr_limit_datum, phi_e)
from lame_spectra.spectral_sets import (fit_discriminant_order,
                                        real_axis_spectrum)
from oracles import contour_integral


def _report(num, name, elapsed, detail):
    sys.stdout.write(f"[PASS] criterion {num:2d} ({name}): {detail} "
                     f"[{elapsed:.1f}s]\n")
    sys.stdout.flush()


def test_criterion_01_elliptic_kernel():
    t0 = time.time()
    taus = [1j, 2j, RHO, 0.3 + 0.8j, -0.4 + 1.7j]
    worst_ode = worst_leg = worst_sigma = 0.0
    for k, tau in enumerate(taus):
        t = torus_init(tau)
        zs = cell_points(t, 40, seed=100 + k)
        w, wd = t.wp(zs), t.wp_prime(zs)
        ode = np.abs(wd**2 - (4 * w**3 - t.g2 * w - t.g3)) / (1 + np.abs(w) ** 3)
        worst_ode = max(worst_ode, float(np.max(ode)))
        worst_leg = max(worst_leg, abs(t.tau * t.eta1 - t.eta2 - 2j * np.pi))
        for om, eta in ((1.0, t.eta1), (t.tau, t.eta2)):
            lhs = np.exp(t.log_sigma(zs + om) - t.log_sigma(zs))
            rhs = -np.exp(eta * (zs + om / 2))
            worst_sigma = max(worst_sigma, float(np.max(np.abs(lhs - rhs) / np.abs(rhs))))
    elapsed = time.time() - t0
    assert worst_ode <= 1e-9
    assert worst_leg <= 1e-12
    assert worst_sigma <= 1e-8
    assert elapsed < 5.0
    _report(1, "elliptic kernel", elapsed,
            f"ode {worst_ode:.1e}, legendre {worst_leg:.1e}, sigma {worst_sigma:.1e}")


def test_criterion_02_rho_constants():
    t0 = time.time()
    t = torus_init(RHO)
    g2 = abs(t.g2)
    Z = abs(premodular_Z(t, 1 / 3, 1 / 3))
    wp0 = abs(t.wp((1 + RHO) / 3))
    elapsed = time.time() - t0
    assert g2 < 1e-10
    assert Z < 1e-9
    assert wp0 < 1e-9
    assert elapsed < 1.0
    _report(2, "constants at the hexagonal torus", elapsed,
            f"|g2| {g2:.1e}, |Z| {Z:.1e}, |wp| {wp0:.1e}")


def test_criterion_03_first_integral():
    t0 = time.time()
    rng = np.random.default_rng(7)
    worst_spread = worst_match = 0.0
    for k in range(10):
        tau = complex(rng.uniform(-0.4, 0.4), rng.uniform(0.8, 2.0))
        t = torus_init(tau)
        p = complex(rng.uniform(0.15, 0.85)) + complex(rng.uniform(0.15, 0.85)) * tau
        if min(abs(t.wp_prime(p)), 1) < 1e-2:
            p += 0.07 + 0.05 * tau
        T = complex(rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5))
        params = make_apparent(t, p, Branch.NONEVEN, T)
        zs = cell_points(t, 50, seed=200 + k, avoid=(p, -p))
        Qz = spectral_polynomial(params, "first-integral", z_sample=zs)
        Qc = spectral_polynomial(params, "closed-form")
        worst_spread = max(worst_spread, float(np.std(Qz) / abs(Qc)))
        worst_match = max(worst_match, abs(np.mean(Qz) - Qc) / abs(Qc))
        A = complex(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0))
        even = make_apparent(t, p, Branch.EVEN, A)
        QzA = spectral_polynomial(even, "first-integral", z_sample=zs)
        y1, y2 = even.even_Y_factors(A)
        worst_match = max(worst_match,
                          abs(np.mean(QzA) + y1 * y2) / (1 + abs(y1 * y2)))
    elapsed = time.time() - t0
    assert worst_spread < 1e-8
    assert worst_match < 1e-8
    assert elapsed < 10.0
    _report(3, "first integral", elapsed,
            f"spread {worst_spread:.1e}, closed-form match {worst_match:.1e}")


def test_criterion_04_monodromy_validity(torus_2i):
    t0 = time.time()
    t = torus_2i
    p = 0.23 + 0.61j
    params = make_apparent(t, p, Branch.NONEVEN, 0.0)
    Ts = np.array([0.3 + 0.2j, -0.7 + 0.6j, 1.4 - 0.3j, 0.9j, 2.1 + 0.4j,
                   -1.8 - 0.5j, 0.05 + 0.01j, 1.1 + 1.2j, -0.4 + 2.2j, 3.1 - 0.9j])
    M1, M2 = monodromy_sweep(params, Ts, rtol=1e-10, atol=1e-12)
    det_err = comm_err = 0.0
    for k in range(len(Ts)):
        det_err = max(det_err, abs(np.linalg.det(M1[k]) - 1),
                      abs(np.linalg.det(M2[k]) - 1))
        comm = M1[k] @ M2[k] @ np.linalg.inv(M1[k]) @ np.linalg.inv(M2[k])
        comm_err = max(comm_err, float(np.max(np.abs(comm - np.eye(2)))))
    # local monodromy around p for the whole batch in one polygon pass
    from lame_spectra.monodromy import integrate_path
    angles = 2.0 * np.pi * np.arange(7) / 6
    vertices = [p + 0.15 * np.exp(1j * a) for a in angles]
    loops = integrate_path(params, Ts, vertices, rtol=1e-10, atol=1e-12)
    loop_err = float(np.max(np.abs(loops + np.eye(2)[None, :, :])))
    elapsed = time.time() - t0
    assert det_err < 1e-8
    assert comm_err < 1e-7
    assert loop_err < 1e-6
    assert elapsed < 20.0
    _report(4, "monodromy validity", elapsed,
            f"det {det_err:.1e}, commutator {comm_err:.1e}, loop {loop_err:.1e}")


def test_criterion_05_trace_equivalence():
    t0 = time.time()
    rng = np.random.default_rng(11)
    worst = 0.0
    cases = []
    for k in range(17):
        tau = complex(rng.uniform(-0.45, 0.45), rng.uniform(0.75, 2.2))
        p_frac = complex(rng.uniform(0.12, 0.88)) + complex(rng.uniform(0.12, 0.88))
        cases.append((tau, None, complex(rng.uniform(-1.2, 1.2),
                                         rng.uniform(-1.2, 1.2)), 300 + k))
    # tau near the fundamental-domain boundary |tau| = 1
    cases.append((np.exp(1j * (np.pi / 2 + 0.05)), None, 0.8 + 0.3j, 901))
    cases.append((0.02 + 0.999j, None, -0.6 + 0.4j, 902))
    # p near a half period but outside the integration clearance
    cases.append((2j, 0.5 + 0.11 + 0.55j, 0.7 + 0.2j, 903))
    for tau, p, T, seed in cases:
        t = torus_init(tau)
        if p is None:
            rng2 = np.random.default_rng(seed)
            p = complex(rng2.uniform(0.15, 0.85)) + complex(rng2.uniform(0.15, 0.85)) * tau
            if abs(t.wp_prime(p)) < 5e-2:
                p += 0.06 + 0.04 * tau
        rep = verify_trace_equivalence(t, p, T)
        worst = max(worst, rep.max_error)
    elapsed = time.time() - t0
    assert worst < 1e-6
    assert elapsed < 120.0
    _report(5, "trace equivalence (20 samples)", elapsed, f"max error {worst:.1e}")


def test_criterion_06_p_invariance(torus_2i):
    t0 = time.time()
    t = torus_2i
    Bt = 0.9 - 1.4j
    ps = [0.23 + 0.61j, 0.61 + 0.54j, 0.17 + 0.82j, 0.71 + 1.38j, 0.37 + 0.29j]
    datas = []
    for p in ps:
        Tp, _ = lift(t, p, Bt)
        params = make_apparent(t, p, Branch.NONEVEN, Tp)
        data = classify(params, integrate_monodromy(params))
        datas.append((data.r, data.s))
    worst = 0.0
    for i in range(len(datas)):
        for k in range(i + 1, len(datas)):
            dr = datas[i][0] - datas[k][0]
            ds = datas[i][1] - datas[k][1]
            worst = max(worst, abs(dr - np.round(np.real(dr)))
                        + abs(ds - np.round(np.real(ds))))
    elapsed = time.time() - t0
    assert worst < 1e-5
    _report(6, "p-invariance of data", elapsed,
            f"worst pairwise (r,s) distance {worst:.1e} over {len(ps)} positions")


def _limit_families(torus, Bt):
    return {k: limit_family(torus, Bt, k, n_terms=6) for k in (0, 1, 2, 3)}


@pytest.fixture(scope="module")
def limit_results(torus_2i):
    return _limit_families(torus_2i, 0.9 - 0.4j)


def test_criterion_07_half_period_limits(limit_results):
    t0 = time.time()
    noise_floor = 1e-6
    for k, fam in limit_results.items():
        errs = [max(e) for e in fam.trace_errors]
        assert errs[-1] < 1e-4, f"k={k}: final trace error {errs[-1]:.2e}"
        for a, b in zip(errs, errs[1:]):
            assert b <= a + noise_floor, f"k={k}: trace errors not decreasing"
        sup = fam.potential_sup_errors
        assert all(b < a for a, b in zip(sup, sup[1:])), f"k={k}: potential sup"
        assert fam.eps == EPS_SIGN_TABLE[k]
    elapsed = time.time() - t0
    finals = {k: max(fam.trace_errors[-1]) for k, fam in limit_results.items()}
    _report(7, "half-period limits", elapsed,
            "final trace errors " + ", ".join(f"k={k}: {v:.1e}" for k, v in finals.items())
            + f"; realized signs {[EPS_SIGN_TABLE[k] for k in (1, 2, 3)]}")


@pytest.mark.xfail(strict=True, reason=(
    "the required sign assignment (-1,1), (1,-1), (-1,-1) for k = 1,2,3 "
    "contradicts the half-integer shifts of the monodromy data that the "
    "half-period degeneration forces: those give (1,-1), (-1,1), (-1,-1), "
    "confirmed numerically at 1e-12 across independent configurations; "
    "see README, 'known discrepancy'"))
def test_criterion_07_sign_table_as_stated(limit_results):
    stated = {1: (-1, 1), 2: (1, -1), 3: (-1, -1)}
    for k in (1, 2, 3):
        fam = limit_results[k]
        tr = fam.gle_traces[-1]
        tr_lim = fam.limit_traces
        for j in (0, 1):
            assert abs(stated[k][j] * tr[j] - tr_lim[j]) < 1e-4


def test_criterion_08_lame_spectra(torus_2i):
    t0 = time.time()
    t = torus_2i
    lame = LameParams(torus=t, Btilde=0.0)
    iv1, _, _ = real_axis_spectrum(lame, 1, (-6.0, 9.0), n=161)
    iv2, _, _ = real_axis_spectrum(lame, 2, (-6.0, 9.0), n=161)
    e1, e2, e3 = t.e1.real, t.e2.real, t.e3.real
    # structure: sigma_1 = (-inf, e2] u [e3, e1], sigma_2 = [e2, e3] u [e1, inf)
    assert len(iv1) == 2 and len(iv2) == 2
    errs = [abs(iv1[0][1] - e2), abs(iv1[1][0] - e3), abs(iv1[1][1] - e1),
            abs(iv2[0][0] - e2), abs(iv2[0][1] - e3), abs(iv2[1][0] - e1)]
    worst = max(errs)
    assert iv1[0][0] <= -6.0 + 1e-9 and iv2[1][1] >= 9.0 - 1e-9
    assert worst < 1e-6
    elapsed = time.time() - t0
    assert elapsed < 120.0
    _report(8, "classical spectra at tau=2i", elapsed,
            f"six endpoint errors <= {worst:.1e}")


def test_criterion_09_regimes(torus_2i):
    t0 = time.time()
    t = torus_2i
    th1, th3, th2 = -t.e1.real / 2, -t.e3.real / 2, -t.e2.real / 2
    reps = {1: th1 - 0.5, 2: th1, 3: 0.0, 4: th3,
            5: 0.5 * (th3 + th2), 6: th2, 7: th2 + 0.55}
    details = []
    for expected_regime, wp_p in reps.items():
        regime, decomp = classify_regime(t, wp_p)
        assert regime == expected_regime
        p = invert_wp(t, wp_p)
        params = make_apparent(t, p, Branch.NONEVEN, 0.0)
        grid = discriminant_grid(params, 1, window=(-4, 4, -4, 4), n=161)
        import warnings as _w
        with _w.catch_warnings():
            _w.simplefilter("ignore", RuntimeWarning)
            aset = extract_arcs(grid)
        res = aset.resolution
        pts = aset.all_points()
        assert len(pts) > 50

        # every traced point lies on the predicted set, and every predicted
        # interval is covered by traced points, both within 2 * resolution
        def dist_to_decomp(u):
            best = np.inf
            for axis, lo, hi in decomp:
                if axis == "re":
                    x, off = u.real, abs(u.imag)
                else:
                    x, off = u.imag, abs(u.real)
                lo_c, hi_c = max(lo, -4.0), min(hi, 4.0)
                d_axis = 0.0 if lo_c <= x <= hi_c else min(abs(x - lo_c), abs(x - hi_c))
                best = min(best, np.hypot(off, d_axis))
            return best

        worst_on = max(dist_to_decomp(u) for u in pts)
        assert worst_on < 2 * res, f"regime {regime}: stray arc point {worst_on:.3f}"
        worst_cover = 0.0
        for axis, lo, hi in decomp:
            lo_c, hi_c = max(lo, -3.9), min(hi, 3.9)
            if hi_c <= lo_c:
                continue
            for x in np.arange(lo_c, hi_c, res):
                u = complex(x, 0) if axis == "re" else complex(0, x)
                worst_cover = max(worst_cover, float(np.min(np.abs(pts - u))))
        assert worst_cover < 2 * res, f"regime {regime}: gap {worst_cover:.3f}"

        # endpoint positions within 2 * resolution of the closed form
        eps_cf, origin_excluded = endpoints(t, p)
        for u, _count in aset.endpoints:
            assert min(abs(u - e) for e in eps_cf) < 2 * res
        if expected_regime in (2, 4, 6):
            assert origin_excluded, f"regime {regime}: origin not excluded"
            assert all(abs(e) > 1e-6 for e in eps_cf)
        details.append(f"{regime}: ok")
    elapsed = time.time() - t0
    assert elapsed < 900.0
    _report(9, "seven interval regimes", elapsed,
            f"{len(reps)} regimes traced on 161x161 grids")


def test_criterion_10_endpoint_orders(torus_2i):
    t0 = time.time()
    t = torus_2i
    p = 0.23 + 0.61j
    params = make_apparent(t, p, Branch.NONEVEN, 0.0)
    orders = {}
    for ek in t.e:
        T_root = complex(np.sqrt(2 * t.wp(p) + ek))
        orders[T_root] = fit_discriminant_order(params, T_root)
        assert orders[T_root] == {1: 1, 2: 1}
    p_deg = invert_wp(t, -t.e1.real / 2)
    params_deg = make_apparent(t, p_deg, Branch.NONEVEN, 0.0)
    d0 = fit_discriminant_order(params_deg, 0.0)
    assert d0 == {1: 2, 2: 2}
    elapsed = time.time() - t0
    _report(10, "argument-principle orders", elapsed,
            "d_j = 1 at three simple roots; d_j(0) = 2 at the double root")


def test_criterion_11_baker_akhiezer(torus_2i):
    t0 = time.time()
    t = torus_2i
    p = 0.23 + 0.61j
    T = 0.7 + 0.2j
    params = make_apparent(t, p, Branch.NONEVEN, T)
    P = SpectralCurvePoint.from_parameter(params)
    Pd = P.dual()
    z0 = contour_base_point(params)
    worst_w = worst_prod = 0.0
    for z in cell_points(t, 4, seed=400, avoid=(p, -p), clear=0.18):
        psi = bk_psi(P, params, z, z0)
        psid = bk_psi(Pd, params, z, z0)
        W = (bk_phi(P, params, z) - bk_phi(Pd, params, z)) * psi * psid
        worst_w = max(worst_w, abs(W * phi_e(params, z0) - 2j * P.C))
        worst_prod = max(worst_prod,
                         abs(psi * psid * phi_e(params, z0) / phi_e(params, z) - 1))
    lam1, lam2, _, _ = lambda_data(P, params, z0=z0)
    mono = integrate_monodromy(params, z0=z0)
    ev1 = np.linalg.eigvals(mono.M1)
    ev2 = np.linalg.eigvals(mono.M2)
    lam_err = max(min(abs(ev1 - lam1)), min(abs(ev2 - lam2)))
    res0 = abs(contour_integral(lambda x: bk_phi(P, params, x), 0.0, 0.12)
               / (2j * np.pi) + 1)
    resp = abs(contour_integral(lambda x: bk_phi(P, params, x), p, 0.12)
               / (2j * np.pi) + 0.5)
    resm = abs(contour_integral(lambda x: bk_phi(P, params, x), -p, 0.12)
               / (2j * np.pi) + 0.5)
    elapsed = time.time() - t0
    assert worst_w < 1e-7
    assert worst_prod < 1e-7
    assert lam_err < 1e-6
    assert max(res0, resp, resm) < 1e-6
    _report(11, "Baker-Akhiezer suite", elapsed,
            f"wronskian {worst_w:.1e}, product {worst_prod:.1e}, "
            f"multipliers {lam_err:.1e}, residues {max(res0, resp, resm):.1e}")


def test_criterion_12_noncr_datum(torus_2i):
    t0 = time.time()
    t = torus_2i
    p = 0.23 + 0.61j
    worst_mat = worst_lim = 0.0
    for ek in t.e:
        for sgn in (1, -1):
            T0 = sgn * complex(np.sqrt(2 * t.wp(p) + ek))
            params = make_apparent(t, p, Branch.NONEVEN, T0)
            z0 = contour_base_point(params, T=T0)
            D = chi_ratio(params, z0=z0)
            D_mat, _, _ = noncr_ratio_from_matrices(
                integrate_monodromy(params, z0=z0))
            D_lim, _ = noncr_limit_datum(params, z0=z0)
            worst_mat = max(worst_mat, abs(D - D_mat))
            worst_lim = max(worst_lim, abs(D - D_lim))
    elapsed = time.time() - t0
    assert worst_mat < 1e-4
    assert worst_lim < 1e-4
    _report(12, "non-reducible datum at the six roots", elapsed,
            f"matrix ratio {worst_mat:.1e}, limit formula {worst_lim:.1e}")


def test_criterion_13_metrics_suite():
    t0 = time.time()
    zero = premodular_zero_tau(1 / 3, 1 / 3)
    tau_err = abs(zero.tau - RHO)
    assert tau_err < 1e-8

    zero_g = premodular_zero_tau(0.3, 0.35)
    t = zero_g.torus
    ps = p_star(zero_g)
    pv6_err = abs(t.wp(ps) - pv6_wp_pstar(t, 0.3, 0.35))
    assert pv6_err < 1e-8

    sg = 0.3 + 0.35 * t.tau
    p = 0.31 + 0.22 * t.tau
    cfg = blowup_sets(t, p, sg)
    worst_res = worst_sum = 0.0
    for pts in (cfg.points_plus, cfg.points_minus):
        assert pts
        worst_sum = max(worst_sum, float(t.dist_to_lattice(pts[0] + pts[1] - sg)))
        r22, r23, _ = green_critical_residual(t, p, pts[0], pts[1])
        worst_res = max(worst_res, r22, r23)
    assert worst_res < 1e-8
    assert worst_sum < 1e-8

    cfg_even = blowup_sets(t, ps, sg)
    wps = complex(t.wp(sg))
    root = np.sqrt(t.g2 - 3.0 * wps**2)
    expected = sorted([0.5 * (-wps + root), 0.5 * (-wps - root)],
                      key=lambda z: (z.real, z.imag))
    even_err = 0.0
    for got in (cfg_even.plus_set, cfg_even.minus_set):
        got = sorted(got, key=lambda z: (z.real, z.imag))
        even_err = max(even_err, max(abs(a - b) for a, b in zip(expected, got)))
    assert even_err < 1e-9
    elapsed = time.time() - t0
    assert elapsed < 30.0
    _report(13, "cone-metric suite", elapsed,
            f"zero {tau_err:.1e}, p* {pv6_err:.1e}, residuals {worst_res:.1e}, "
            f"even reduction {even_err:.1e}")
