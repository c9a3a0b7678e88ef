"""Premodular zeros, the exceptional point, blow-up sets, and the critical
equations of the multiple Green function."""

import numpy as np
import pytest

from conftest import RHO
from lame_spectra import (blowup_at_singularity_check, blowup_sets,
                          green_critical_residual, p_star, premodular_Z,
                          premodular_zero_tau, pv6_wp_pstar, torus_init)
from lame_spectra.errors import InvalidParameterError
from lame_spectra.metrics import in_fundamental_region, in_triangle


@pytest.fixture(scope="module")
def zero_third():
    return premodular_zero_tau(1 / 3, 1 / 3)


@pytest.fixture(scope="module")
def zero_generic():
    return premodular_zero_tau(0.3, 0.35)


def test_zero_at_rho(zero_third):
    assert abs(zero_third.tau - RHO) < 1e-8
    assert zero_third.residual < 1e-10


def test_zero_outside_triangle_rejected():
    with pytest.raises(InvalidParameterError):
        premodular_zero_tau(0.1, 0.1)
    assert not in_triangle(0.1, 0.1)
    assert in_triangle(0.3, 0.35)


def test_zero_generic_in_region(zero_generic):
    assert zero_generic.residual < 1e-10
    assert in_fundamental_region(zero_generic.tau)
    # grid-scan oracle: |Z| has its minimum in the cell Newton converged to
    taus_re = np.linspace(0.2, 0.8, 41)
    taus_im = np.linspace(0.75, 1.3, 41)
    best, best_tau = np.inf, None
    for a in taus_re:
        for b in taus_im:
            t = torus_init(complex(a, b))
            v = abs(premodular_Z(t, 0.3, 0.35))
            if v < best:
                best, best_tau = v, complex(a, b)
    cell = max(taus_re[1] - taus_re[0], taus_im[1] - taus_im[0])
    assert abs(zero_generic.tau - best_tau) < 2 * cell


def test_zero_locally_unique(zero_generic):
    for tau0 in (0.35 + 1.05j, 0.6 + 0.95j):
        z = premodular_zero_tau(0.3, 0.35, tau0=tau0)
        assert abs(z.tau - zero_generic.tau) < 1e-8


def test_newton_residuals_decrease(zero_generic):
    assert zero_generic.iterations <= 12


def test_p_star_at_rho(zero_third):
    t = zero_third.torus
    ps = p_star(zero_third)
    assert abs(t.wp(ps)) < 1e-9
    ref = (1 + RHO) / 3
    assert min(t.dist_to_lattice(ps - ref), t.dist_to_lattice(ps + ref)) < 1e-8


def test_p_star_matches_pv6(zero_generic):
    t = zero_generic.torus
    ps = p_star(zero_generic)
    assert abs(t.wp(ps) - pv6_wp_pstar(t, 0.3, 0.35)) < 1e-8


def test_blowup_sets_satisfy_critical_equations(zero_generic):
    t = zero_generic.torus
    sg = 0.3 + 0.35 * t.tau
    p = 0.31 + 0.22 * t.tau
    cfg = blowup_sets(t, p, sg)
    assert cfg.consistent and not cfg.even_case
    wp_p = complex(t.wp(p))
    for pts, xs in ((cfg.points_plus, cfg.plus_set), (cfg.points_minus, cfg.minus_set)):
        assert pts
        # a1 + a2 = sg and wp(a1) + wp(a2) = 2 wp(p)
        assert t.dist_to_lattice(pts[0] + pts[1] - sg) < 1e-7
        assert abs(t.wp(pts[0]) + t.wp(pts[1]) - 2 * wp_p) < 1e-8
        r22, r23, det_err = green_critical_residual(t, p, pts[0], pts[1])
        scale = 1.0 + abs(wp_p)
        assert r22 < 1e-8 * scale and r23 < 1e-8 * scale
        assert det_err < 1e-10


def test_random_pair_fails_critical_equations(zero_generic):
    t = zero_generic.torus
    p = 0.31 + 0.22 * t.tau
    r22, r23, _ = green_critical_residual(t, p, 0.21 + 0.13 * t.tau,
                                          0.47 + 0.31 * t.tau)
    assert r22 > 1e-2 and r23 > 1e-2


def test_determinant_identity_both_directions(zero_generic):
    t = zero_generic.torus
    a1, a2 = 0.21 + 0.13 * t.tau, 0.47 + 0.31 * t.tau
    x1, x2 = complex(t.wp(a1)), complex(t.wp(a2))

    def det_of(wp_p):
        A = 1.0 / (2.0 * (x1 - wp_p)) - 1.0 / (x1 - x2)
        B = 1.0 / (2.0 * (x2 - wp_p)) + 1.0 / (x1 - x2)
        return -2.0 * A * B

    # wp(p) at the midpoint kills the determinant ...
    assert abs(det_of((x1 + x2) / 2)) < 1e-12
    # ... and away from the midpoint the determinant stays nonzero
    wp_p = complex(t.wp(0.31 + 0.22 * t.tau))
    assert abs(det_of(wp_p)) > 1e-4
    assert abs(det_of(5.0)) > 1e-3
    # closed form agrees with the direct 2x2 determinant off the locus
    closed = (x1 + x2 - 2 * wp_p) ** 2 / (
        2 * (x1 - x2) ** 2 * (x1 - wp_p) * (x2 - wp_p))
    assert abs(det_of(wp_p) - closed) < 1e-12 * (1 + abs(closed))


def test_configuration_violations_rejected(zero_generic):
    t = zero_generic.torus
    p = 0.31 + 0.22 * t.tau
    with pytest.raises(InvalidParameterError):
        green_critical_residual(t, p, 0.5, 0.3 + 0.2 * t.tau)      # half period
    with pytest.raises(InvalidParameterError):
        green_critical_residual(t, p, p, 0.3 + 0.2 * t.tau)        # a = p
    a = 0.3 + 0.2 * t.tau
    with pytest.raises(InvalidParameterError):
        green_critical_residual(t, p, a, -a)                       # a1 = -a2


def test_even_case_reduction(zero_generic):
    t = zero_generic.torus
    sg = 0.3 + 0.35 * t.tau
    ps = p_star(zero_generic)
    cfg = blowup_sets(t, ps, sg)
    assert cfg.even_case
    wps = complex(t.wp(sg))
    root = np.sqrt(t.g2 - 3.0 * wps**2)
    expected = sorted([0.5 * (-wps + root), 0.5 * (-wps - root)],
                      key=lambda z: (z.real, z.imag))
    for got in (cfg.plus_set, cfg.minus_set):
        got = sorted(got, key=lambda z: (z.real, z.imag))
        assert max(abs(a - b) for a, b in zip(expected, got)) < 1e-9


def test_collapse_limit_toward_2p_equals_sg(zero_generic):
    # as 2p -> sg one configuration collapses onto the singularity and the
    # other tends to the stated closed form
    t = zero_generic.torus
    sg = 0.3 + 0.35 * t.tau
    wps = complex(t.wp(sg))
    dmins = []
    for eps in (1e-2, 1e-3, 1e-4):
        p = sg / 2 + eps * (0.4 + 0.2 * t.tau)
        cfg = blowup_sets(t, p, sg)
        dmin = min(abs(cfg.delta_plus), abs(cfg.delta_minus))
        dother = max((cfg.delta_plus, cfg.delta_minus), key=abs)
        dmins.append(dmin)
        wp_p = complex(t.wp(p))
        limit = np.sqrt(t.g2 / 2 + 2 * wp_p**2 - 4 * wp_p * wps - 4 * wps**2)
        assert min(abs(dother - limit), abs(dother + limit)) < 60 * eps
    # the collapsing delta vanishes at the square-root rate in the offset
    for a, b in zip(dmins, dmins[1:]):
        assert b < 0.5 * a
    assert dmins[-1] < 40 * np.sqrt(1e-4)


def test_blowup_sets_rejects_collapsed_configuration(zero_generic):
    t = zero_generic.torus
    sg = 0.3 + 0.35 * t.tau
    with pytest.raises(InvalidParameterError):
        blowup_sets(t, sg / 2, sg)


def test_blowup_at_singularity(zero_third):
    t = zero_third.torus
    p0 = (1 + RHO) / 3
    hit, resid = blowup_at_singularity_check(t, 1 / 3, 1 / 3, p0)
    assert hit and resid < 1e-9
    # at rho the collapse point is also the exceptional point: wp''(p0) = 0
    assert abs(t.wp_pp(p0)) < 1e-9
    hit2, _ = blowup_at_singularity_check(t, 1 / 3, 1 / 3, 0.21 + 0.13j)
    assert not hit2


def test_trivial_critical_points_of_green_gradient(torus_generic):
    # half-period data are always premodular zeros (the gradient identity)
    t = torus_generic
    for r, s in ((0.5, 0.0), (0.0, 0.5), (0.5, 0.5)):
        assert abs(premodular_Z(t, r, s)) < 1e-11
