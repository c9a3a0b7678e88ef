r"""Cone-spherical-metric data: premodular zeros, the exceptional point, and
blow-up configurations of the one-parameter solution families.

A pair (r, s) in the open triangle D0 = {0 < r, s < 1/2, r + s > 1/2} admits
a unique modulus tau in the fundamental region
F0 = {0 <= Re tau <= 1, |tau - 1/2| >= 1/2} with Z(r, s, tau) = 0; we locate
it by a damped Newton iteration in tau.  At such a zero, with
sg = r + s tau the blow-up configurations of the family attached to a
singularity position p (2p != +-sg) have wp-values

    { wp(p) +- Delta_pm },   Delta_pm = (1/2) sqrt(g2 + 4 [ wp(p)^2
        - 2 wp(sg) wp(p) - 2 wp(sg)^2 +- wp'(sg) sqrt(2 wp(p) + wp(sg)) ]),

which collapse at the exceptional point wp(p*) = -wp(sg)/2 to
(1/2)(-wp(sg) +- sqrt(g2 - 3 wp(sg)^2)) on both sides.  The blow-up points
themselves come from inverting wp with the sign pair fixed by a1 + a2 = sg,
and they satisfy the two critical-point equations of the multiple Green
function, which this module evaluates as residuals.  The Green function
itself is never evaluated; only its gradient identity
-4 pi dG/dz = zeta(z) - r eta1 - s eta2 enters, through Z.

Note: sg = r + s tau denotes the sum of blow-up points throughout; the
Weierstrass sigma function never appears by that name here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .elliptic import Torus, invert_wp, premodular_Z, torus_init
from .errors import InvalidParameterError, ZeroNotFoundError

__all__ = [
    "DELTA0",
    "PremodularZero",
    "BlowupConfig",
    "in_triangle",
    "in_fundamental_region",
    "premodular_zero_tau",
    "p_star",
    "blowup_sets",
    "green_critical_residual",
    "blowup_at_singularity_check",
]

DELTA0 = "0 < r < 1/2, 0 < s < 1/2, r + s > 1/2"


def in_triangle(r: float, s: float) -> bool:
    return 0.0 < r < 0.5 and 0.0 < s < 0.5 and r + s > 0.5


def in_fundamental_region(tau: complex, slack: float = 1e-9) -> bool:
    return (tau.imag > 0 and -slack <= tau.real <= 1.0 + slack
            and abs(tau - 0.5) >= 0.5 - slack)


@dataclass
class PremodularZero:
    r: float
    s: float
    tau: complex
    residual: float
    iterations: int
    torus: Torus = field(repr=False, default=None)


def premodular_zero_tau(r: float, s: float, tau0: complex = 0.45 + 1.0j,
                        tol: float = 1e-10, max_iter: int = 60,
                        fd_step: float = 1e-6) -> PremodularZero:
    """Newton iteration on tau for Z(r, s, tau) = 0, (r, s) in the triangle.

    The tau-derivative is taken by central differences; steps that would
    leave the fundamental region or grow |Z| are damped.  Raises
    InvalidParameterError for (r, s) outside the triangle (no zero exists in
    F0 then) and ZeroNotFoundError with the iterate trail on failure.
    """
    r, s = float(r), float(s)
    if not in_triangle(r, s):
        raise InvalidParameterError(
            f"(r, s) = ({r}, {s}) outside the admissible triangle {DELTA0}")
    tau = complex(tau0)
    trail = []
    fval = complex(premodular_Z(torus_init(tau), r, s))
    for it in range(max_iter):
        trail.append((tau, abs(fval)))
        if abs(fval) < tol:
            t = torus_init(tau)
            if not in_fundamental_region(tau, slack=1e-6):
                raise ZeroNotFoundError(
                    f"converged to tau = {tau} outside the fundamental region; "
                    f"trail: {trail}")
            return PremodularZero(r=r, s=s, tau=tau, residual=abs(fval),
                                  iterations=it, torus=t)
        zp = complex(premodular_Z(torus_init(tau + fd_step), r, s))
        zm = complex(premodular_Z(torus_init(tau - fd_step), r, s))
        dz = (zp - zm) / (2.0 * fd_step)
        if dz == 0:
            raise ZeroNotFoundError(f"vanishing derivative at tau = {tau}; trail: {trail}")
        step = fval / dz
        lam = 1.0
        for _ in range(25):
            cand = tau - lam * step
            if cand.imag > 0.05:
                fc = complex(premodular_Z(torus_init(cand), r, s))
                if abs(fc) < abs(fval) or lam < 0.1:
                    tau, fval = cand, fc
                    break
            lam *= 0.5
        else:
            raise ZeroNotFoundError(f"damping failed at tau = {tau}; trail: {trail}")
    raise ZeroNotFoundError(f"no convergence after {max_iter} iterations; trail: {trail}")


def p_star(zero: PremodularZero) -> complex:
    """Exceptional point: wp(p*) = -wp(r + s tau) / 2 at the premodular zero."""
    t = zero.torus if zero.torus is not None else torus_init(zero.tau)
    alpha = zero.r + zero.s * t.tau
    return invert_wp(t, -0.5 * complex(t.wp(alpha)))


@dataclass
class BlowupConfig:
    sg: complex                       # r + s tau = a1 + a2
    p: complex
    plus_set: tuple                   # wp-values of the beta -> +inf blow-up pair
    minus_set: tuple
    delta_plus: complex
    delta_minus: complex
    points_plus: tuple = ()           # (a1, a2) with a1 + a2 = sg, when resolvable
    points_minus: tuple = ()
    ambiguous_inner_root: bool = False
    even_case: bool = False           # p at the exceptional point
    consistent: bool = True


def _delta_pm(t: Torus, wp_p: complex, wp_s: complex, wpd_s: complex, sign: float):
    inner = np.sqrt(2.0 * wp_p + wp_s)
    rad = t.g2 + 4.0 * (wp_p**2 - 2.0 * wp_s * wp_p - 2.0 * wp_s**2
                        + sign * wpd_s * inner)
    return 0.5 * np.sqrt(rad)


def _resolve_points(t: Torus, xs, sg, tol=1e-7):
    """Invert wp on the pair of x-values and fix signs by a1 + a2 = sg."""
    try:
        c1 = invert_wp(t, xs[0])
        c2 = invert_wp(t, xs[1])
    except ZeroNotFoundError:
        return (), False
    for s1 in (1.0, -1.0):
        for s2 in (1.0, -1.0):
            if t.dist_to_lattice(s1 * c1 + s2 * c2 - sg) < tol:
                return (complex(s1 * c1), complex(s2 * c2)), True
    return (), False


def blowup_sets(torus: Torus, p: complex, sg: complex,
                degenerate_tol: float = 1e-8) -> BlowupConfig:
    """Blow-up configuration of the family at singularity p, sum point sg.

    Requires 2p != +-sg mod the lattice (the collapsed case blows up at the
    singularity itself and is handled by blowup_at_singularity_check).  Both
    square-root sign choices of the inner root are emitted as the unordered
    pair (plus_set, minus_set); when they collide within tolerance the config
    is flagged ambiguous.  At p = p* both sets reduce to
    (1/2)(-wp(sg) +- sqrt(g2 - 3 wp(sg)^2)).
    """
    p, sg = complex(p), complex(sg)
    if (torus.dist_to_lattice(2.0 * p - sg) < degenerate_tol
            or torus.dist_to_lattice(2.0 * p + sg) < degenerate_tol):
        raise InvalidParameterError(
            "2p = +-sg: the family blows up at the singularity itself; "
            "use blowup_at_singularity_check")
    wp_p = complex(torus.wp(p))
    wp_s = complex(torus.wp(sg))
    wpd_s = complex(torus.wp_prime(sg))
    even_case = abs(2.0 * wp_p + wp_s) < 1e-8 * (1.0 + abs(wp_s))
    if even_case:
        # p at the exceptional point: the inner root vanishes and both sets
        # reduce to (1/2)(-wp(sg) +- sqrt(g2 - 3 wp(sg)^2)); evaluating the
        # reduced form avoids the square-root sensitivity at the collision
        d_plus = d_minus = complex(0.5 * np.sqrt(torus.g2 - 3.0 * wp_s**2))
        base = -0.5 * wp_s
        plus_set = (base + d_plus, base - d_plus)
        minus_set = plus_set
    else:
        d_plus = complex(_delta_pm(torus, wp_p, wp_s, wpd_s, +1.0))
        d_minus = complex(_delta_pm(torus, wp_p, wp_s, wpd_s, -1.0))
        plus_set = (wp_p + d_plus, wp_p - d_plus)
        minus_set = (wp_p + d_minus, wp_p - d_minus)
    pts_p, ok_p = _resolve_points(torus, plus_set, sg)
    pts_m, ok_m = _resolve_points(torus, minus_set, sg)
    return BlowupConfig(
        sg=sg, p=p, plus_set=plus_set, minus_set=minus_set,
        delta_plus=d_plus, delta_minus=d_minus,
        points_plus=pts_p, points_minus=pts_m,
        ambiguous_inner_root=bool(abs(d_plus - d_minus) < degenerate_tol * (1 + abs(d_plus))),
        even_case=bool(even_case),
        consistent=bool(ok_p and ok_m))


def green_critical_residual(torus: Torus, p: complex, a1: complex, a2: complex):
    """Residuals of the two critical-point equations of the multiple Green
    function at (a1, a2), plus the determinant identity of the linear system.

    Returns (res22, res23, det_error).  res22 is against the right-hand side
    -2 Z(sg) with sg = a1 + a2 decomposed in real lattice coordinates; res23
    is the homogeneous combination.  Configuration constraints: a_j not in
    {+-p, half periods} and a1 != +-a2.
    """
    from .elliptic import TorusPoint   # local to avoid cycles in module docs

    p, a1, a2 = complex(p), complex(a1), complex(a2)
    for label, a in (("a1", a1), ("a2", a2)):
        if TorusPoint(a).is_half_period(torus, tol=1e-8):
            raise InvalidParameterError(f"{label} is a half period")
        for b in (p, -p):
            if torus.dist_to_lattice(a - b) < 1e-8:
                raise InvalidParameterError(f"{label} coincides with a singularity")
    if torus.dist_to_lattice(a1 - a2) < 1e-8 or torus.dist_to_lattice(a1 + a2) < 1e-8:
        raise InvalidParameterError("a1 = +-a2 violates the configuration constraints")

    x1, y1 = complex(torus.wp(a1)), complex(torus.wp_prime(a1))
    x2, y2 = complex(torus.wp(a2)), complex(torus.wp_prime(a2))
    wp_p = complex(torus.wp(p))
    sg = a1 + a2
    rx, ry = torus.lattice_coords(sg)
    Z = complex(torus.zeta(sg)) - float(rx) * torus.eta1 - float(ry) * torus.eta2

    lhs22 = (y1 / (2.0 * (x1 - wp_p)) + y2 / (2.0 * (x2 - wp_p))
             - (y1 - y2) / (x1 - x2))
    lhs23 = (y1 / (2.0 * (x1 - wp_p)) - y2 / (2.0 * (x2 - wp_p))
             - (y1 + y2) / (x1 - x2))
    res22 = abs(lhs22 + 2.0 * Z)
    res23 = abs(lhs23)

    A = 1.0 / (2.0 * (x1 - wp_p)) - 1.0 / (x1 - x2)
    Bc = 1.0 / (2.0 * (x2 - wp_p)) + 1.0 / (x1 - x2)
    det_direct = -2.0 * A * Bc
    # closed form (x1 + x2 - 2 wp(p))^2 / (2 (x1 - x2)^2 (x1 - wp p)(x2 - wp p)):
    # expanding -2AB gives the (x1 - x2) factor squared; the vanishing locus
    # is wp(p) = (x1 + x2)/2 either way
    det_closed = (x1 + x2 - 2.0 * wp_p) ** 2 / (
        2.0 * (x1 - x2) ** 2 * (x1 - wp_p) * (x2 - wp_p))
    det_error = abs(det_direct - det_closed)
    return float(res22), float(res23), float(det_error)


def blowup_at_singularity_check(torus: Torus, r: float, s: float, p: complex,
                                tol: float = 1e-6):
    """True iff the family at p blows up at the singularity: 2p = +-(r + s tau).

    When true, also verifies T(p)^2 = wp(2p) + 2 wp(p) = wp''(p)^2/(4 wp'(p)^2)
    and returns (True, residual); otherwise (False, None).
    """
    sg = r + s * torus.tau
    hit = (torus.dist_to_lattice(2.0 * complex(p) - sg) < tol
           or torus.dist_to_lattice(2.0 * complex(p) + sg) < tol)
    if not hit:
        return False, None
    T2 = complex(torus.wp(2.0 * p)) + 2.0 * complex(torus.wp(p))
    ratio2 = complex(torus.wp_pp(p)) ** 2 / (4.0 * complex(torus.wp_prime(p)) ** 2)
    return True, float(abs(T2 - ratio2))
