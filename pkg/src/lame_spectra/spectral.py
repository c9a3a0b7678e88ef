r"""Closed-form spectral objects of the generalized Lame-type equation.

The second symmetric product of y'' = q y is the third-order equation
Phi''' - 4 q Phi' - 2 q' Phi = 0.  It has (up to scale) a unique elliptic
solution Phi_e; on the non-even branch, with w4 = wp''(p)/(4 wp'(p)),

    Phi_e(z; T) = wp(z) + c1 (zeta(z+p) - zeta(z)) + c2 (zeta(z-p) - zeta(z)) + c3,
    c1 = -T - 2 w4,  c2 = -T + 2 w4,
    c3 = 2 T^2 + 4 w4 zeta(p) - wp(p),

and on the even branch c1 = -c2 = A/2 - (3/2) w4 with its own constant term.
The first integral

    Q = (1/2) Phi_e Phi_e'' - (1/4) (Phi_e')^2 - q Phi_e^2

is z-independent; on the non-even branch it equals the sextic
-4 prod_k (T^2 - 2 wp(p) - e_k), and on the even branch -Y1(A) Y2(A).

A point P = (T, C) with C^2 = Q(T) carries the meromorphic logarithmic
derivative phi(P; z) = (i C + Phi_e'/2) / Phi_e, the Baker-Akhiezer function
psi(P; z) = exp int phi, its cycle multipliers lambda_j(P), the monodromy
data (r(P), s(P)), the Hermite zero data (a1, a2, c), and at roots of Q the
non-reducible datum D = chi_2/chi_1 where chi_j = int of 1/Phi_e over cycle j.

Cycle integrals reuse the straight segments and base point of the monodromy
module so that all data refer to the same contours.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .elliptic import invert_wp
from .errors import (DegenerateBranchError, InvalidParameterError,
                     LameSpectraError)
from .monodromy import select_base_point, strip_parity
from .potentials import Branch, GLEParams

__all__ = [
    "SpectralCurvePoint",
    "HermiteData",
    "phi_e",
    "phi_e_derivative",
    "spectral_polynomial",
    "bk_phi",
    "bk_psi",
    "lambda_data",
    "hermite_zeros",
    "chi_ratio",
    "contour_base_point",
]


@dataclass(frozen=True)
class SpectralCurvePoint:
    """P = (T, C) on the curve C^2 = Q(T); dual() flips the sheet."""

    T: complex
    C: complex

    def dual(self) -> "SpectralCurvePoint":
        return SpectralCurvePoint(self.T, -self.C)

    @staticmethod
    def from_parameter(params: GLEParams, sheet: int = +1) -> "SpectralCurvePoint":
        u = complex(np.asarray(params.sweep_value))
        Q = complex(params.spectral_polynomial_at(u))
        C = np.sqrt(Q)
        return SpectralCurvePoint(u, C if sheet >= 0 else -C)


@dataclass
class HermiteData:
    """Zero data of the Baker-Akhiezer function in Hermite form."""

    c: complex
    a1: complex
    a2: complex
    r: complex
    s: complex
    degenerate: bool = False


def _phi_coeffs(params: GLEParams):
    u = complex(np.asarray(params.sweep_value))
    w4 = params.wp_ratio / 4.0
    zeta_p = complex(params.torus.zeta(params.p))
    if params.branch is Branch.NONEVEN:
        c1 = -u - 2.0 * w4
        c2 = -u + 2.0 * w4
        c3 = 2.0 * u * u + 4.0 * w4 * zeta_p - params.wp_p
    elif params.branch is Branch.EVEN:
        c1 = u / 2.0 - 1.5 * w4
        c2 = -c1
        c3 = (-u * u + (2.0 * w4 - zeta_p) * u - params.wp_p
              + 3.0 * w4 * zeta_p + 3.0 * w4 * w4)
    else:
        raise InvalidParameterError("Phi_e needs an apparent branch (even or non-even)")
    return c1, c2, c3


def phi_e(params: GLEParams, z):
    """The elliptic solution of the second symmetric product at z."""
    t, p = params.torus, params.p
    c1, c2, c3 = _phi_coeffs(params)
    return (t.wp(z) + c1 * (t.zeta(z + p) - t.zeta(z))
            + c2 * (t.zeta(z - p) - t.zeta(z)) + c3)


def phi_e_derivative(params: GLEParams, z, order: int = 1):
    """Exact derivatives of Phi_e (orders 1..3), via zeta' = -wp."""
    t, p = params.torus, params.p
    c1, c2, _ = _phi_coeffs(params)
    if order == 1:
        return (t.wp_prime(z) - c1 * (t.wp(z + p) - t.wp(z))
                - c2 * (t.wp(z - p) - t.wp(z)))
    if order == 2:
        return (t.wp_pp(z) - c1 * (t.wp_prime(z + p) - t.wp_prime(z))
                - c2 * (t.wp_prime(z - p) - t.wp_prime(z)))
    if order == 3:
        def wp3(x):
            return 12.0 * t.wp(x) * t.wp_prime(x)
        return (wp3(z) - c1 * (t.wp_pp(z + p) - t.wp_pp(z))
                - c2 * (t.wp_pp(z - p) - t.wp_pp(z)))
    raise InvalidParameterError(f"unsupported derivative order {order}")


def spectral_polynomial(params: GLEParams, mode: str = "closed-form", z_sample=None):
    """Q at the branch parameter, by closed form or from the first integral.

    ``mode='first-integral'`` evaluates (1/2) Phi Phi'' - (1/4) Phi'^2 - q Phi^2
    at z_sample (defaults to one generic point) and is z-independent up to
    round-off; 'closed-form' uses the factored sextic.
    """
    if mode == "closed-form":
        return complex(params.spectral_polynomial_at(complex(np.asarray(params.sweep_value))))
    if mode != "first-integral":
        raise InvalidParameterError(f"unknown mode {mode!r}")
    if z_sample is None:
        z_sample = 0.311 + 0.413 * params.torus.tau
    z = np.asarray(z_sample, dtype=complex)
    f = phi_e(params, z)
    f1 = phi_e_derivative(params, z, 1)
    f2 = phi_e_derivative(params, z, 2)
    q = params.potential(z)
    return 0.5 * f * f2 - 0.25 * f1 * f1 - q * f * f


def bk_phi(P: SpectralCurvePoint, params: GLEParams, z):
    """phi(P; z) = (i C + Phi_e'/2) / Phi_e, the Riccati solution at P."""
    f = phi_e(params, z)
    if np.any(np.abs(f) < 1e-12):
        raise DegenerateBranchError("bk_phi: z is at (or near) a zero of Phi_e")
    return (1j * P.C + 0.5 * phi_e_derivative(params, z, 1)) / f


def _segment_quad(fn, a, b, epsabs=1e-12, epsrel=1e-12):
    om = b - a
    val, _ = quad(lambda s: fn(a + s * om), 0.0, 1.0, complex_func=True,
                  epsabs=epsabs, epsrel=epsrel, limit=300)
    return om * val


def contour_base_point(params: GLEParams, T=None, floor_samples: int = 41):
    """Base point whose cycle segments also stay away from zeros of Phi_e."""
    t = params.torus

    def phi_floor(z0):
        ts = np.linspace(0.0, 1.0, floor_samples)
        m1 = np.min(np.abs(phi_e(params, z0 + ts)))
        m2 = np.min(np.abs(phi_e(params, z0 + ts * t.tau)))
        return 0.5 * min(m1, m2)

    return select_base_point(params, extra_score=phi_floor)


def lambda_data(P: SpectralCurvePoint, params: GLEParams, z0=None):
    """Cycle multipliers and monodromy data of the Baker-Akhiezer function.

    Returns (lambda1, lambda2, r, s) with lambda1 = e^{-2 pi i s},
    lambda2 = e^{2 pi i r}, the segments being the same fundamental cycles
    the monodromy integrator uses (including its sign normalization), and
    (r, s) canonicalized by the spectral anchor of the non-even system.
    """
    t = params.torus
    if z0 is None:
        z0 = contour_base_point(params)

    def phi_fn(z):
        return bk_phi(P, params, z)

    s1, s2 = strip_parity(t, z0, params.p)
    I1 = _segment_quad(phi_fn, z0, z0 + 1.0)
    I2 = _segment_quad(phi_fn, z0, z0 + t.tau)
    lam1 = s1 * np.exp(I1)
    lam2 = s2 * np.exp(I2)
    s = -np.log(lam1) / (2j * np.pi)
    r = np.log(lam2) / (2j * np.pi)
    r = complex(r - np.floor(r.real))
    s = complex(s - np.floor(s.real))
    _validate_alpha(params, r, s)
    return lam1, lam2, r, s


def _validate_alpha(params: GLEParams, r, s, anchor_tol: float = 1e-5):
    """Consistency of the data with the anchoring system: wp(r + s tau) must
    hit the parameter target; the wp' branch is observed, not asserted."""
    t = params.torus
    alpha = r + s * t.tau
    if t.dist_to_lattice(alpha) < 1e-7:
        raise DegenerateBranchError("monodromy data (r, s) lies on the lattice")
    if params.branch is Branch.NONEVEN:
        u = complex(np.asarray(params.sweep_value))
        target = complex(params.wp_alpha_target(u))
        mis = abs(t.wp(alpha) - target)
        if mis > anchor_tol * (1.0 + abs(target)):
            raise DegenerateBranchError(
                f"cycle multipliers inconsistent with the parameter "
                f"(anchor mismatch {mis:.2e})")


def bk_psi(P: SpectralCurvePoint, params: GLEParams, z, z0):
    """Baker-Akhiezer value psi(P; z, z0) = exp of the phi integral z0 -> z.

    The straight segment from z0 to z must avoid poles and zeros of Phi_e;
    callers pick z accordingly.
    """
    return np.exp(_segment_quad(lambda x: bk_phi(P, params, x), z0, z))


def hermite_zeros(P: SpectralCurvePoint, params: GLEParams, z0=None,
                  degenerate_tol: float = 1e-8) -> HermiteData:
    """Zeros (a1, a2) and exponent c of psi(P) in Hermite product form.

    Generic points satisfy wp(a1) + wp(a2) = 2 wp(p), a1 + a2 = r + s tau and
    T = (wp'(a1) - wp'(a2)) / (2 (wp(a1) - wp(a2))); the degenerate points
    T = +-wp''(p)/(2 wp'(p)) collapse to a1 = a2 = +-p with c = +-zeta(2p).
    """
    if params.branch is not Branch.NONEVEN:
        raise InvalidParameterError("hermite_zeros is defined on the non-even branch")
    t = params.torus
    T = complex(P.T)
    t_star = params.wp_ratio / 2.0
    _, _, r, s = lambda_data(P, params, z0=z0)
    alpha = r + s * t.tau

    scale = 1.0 + abs(t_star)
    if abs(T - t_star) < degenerate_tol * scale or abs(T + t_star) < degenerate_tol * scale:
        sign = 1.0 if abs(T - t_star) <= abs(T + t_star) else -1.0
        a = sign * params.p
        return HermiteData(c=complex(sign * t.zeta(2 * params.p)), a1=complex(a),
                           a2=complex(a), r=r, s=s, degenerate=True)

    wp_p = params.wp_p
    wp_a, wpd_a = complex(t.wp(alpha)), complex(t.wp_prime(alpha))
    g2 = t.g2
    # the two sheets of x = wp(p) +- Delta; the inner sqrt(T^2) is resolved by
    # trying both signs and testing the T-relation on the recovered points
    for inner in (T, -T):
        disc = 0.25 * (g2 + 4.0 * (wp_p**2 - 2.0 * wp_a * wp_p - 2.0 * wp_a**2
                                   + wpd_a * inner))
        delta = np.sqrt(disc)
        x1, x2 = wp_p + delta, wp_p - delta
        if abs(x1 - x2) < 1e-10 * (1.0 + abs(x1)):
            continue
        try:
            cand1 = invert_wp(t, x1)
            cand2 = invert_wp(t, x2)
        except LameSpectraError:
            continue
        for s1 in (1.0, -1.0):
            for s2v in (1.0, -1.0):
                a1, a2 = s1 * cand1, s2v * cand2
                if t.dist_to_lattice(a1 + a2 - alpha) > 1e-6:
                    continue
                # make a1 + a2 = alpha exact (not just mod the lattice), as the
                # Hermite exponent c = zeta(alpha) is only quasi-periodic
                mx, my = t.lattice_coords(a1 + a2 - alpha)
                a2 = a2 - (np.round(mx) + np.round(my) * t.tau)
                y1, y2 = t.wp_prime(a1), t.wp_prime(a2)
                Trel = (y1 - y2) / (2.0 * (t.wp(a1) - t.wp(a2)))
                if abs(Trel - T) < 1e-6 * (1.0 + abs(T)):
                    return HermiteData(c=complex(t.zeta(alpha)), a1=complex(a1),
                                       a2=complex(a2), r=r, s=s)
    raise DegenerateBranchError(
        "hermite_zeros: no consistent (a1, a2) configuration found")


def noncr_limit_datum(params: GLEParams, z0=None, offsets=(1e-4, 5e-5, 2.5e-5),
                      direction: complex = np.exp(0.3j), rtol: float = 1e-12,
                      atol: float = 1e-14):
    """The non-reducible datum as the limit of (r(P) - r0) / (s0 - s(P)).

    Approaches the root T0 = params.sweep_value radially, reads the
    completely reducible data nearest the half-integer limit, and removes the
    offset-polynomial error by Neville extrapolation to offset zero.  The
    convergence is linear in the offset, so the raw terms need the tighter
    integration tolerances used here.  Returns (extrapolated value, raw
    sequence).
    """
    from .monodromy import classify as _classify
    from .monodromy import integrate_monodromy as _integrate

    T0 = complex(np.asarray(params.sweep_value))
    if z0 is None:
        z0 = contour_base_point(params)
    mono0 = _integrate(params, z0=z0, rtol=rtol, atol=atol)
    r0 = 0.0 if np.real(np.trace(mono0.M2)) > 0 else 0.5
    s0 = 0.0 if np.real(np.trace(mono0.M1)) > 0 else 0.5
    raw = []
    for dk in offsets:
        pk = params.with_sweep_value(T0 + dk * direction)
        data = _classify(pk, _integrate(pk, z0=z0, rtol=rtol, atol=atol))
        rk = data.r - np.round(np.real(data.r - r0))
        sk = data.s - np.round(np.real(data.s - s0))
        raw.append((-r0 + rk) / (s0 - sk))
    vals = list(raw)
    hs = list(offsets)
    n = len(vals)
    for level in range(1, n):
        vals = [(hs[i] * vals[i + 1] - hs[i + level] * vals[i])
                / (hs[i] - hs[i + level]) for i in range(n - level)]
    return vals[0], raw


def chi_ratio(params: GLEParams, z0=None, both_zero_tol: float = 1e-10):
    """D = chi_2 / chi_1 at a root of Q, with chi_j the cycle integrals of
    1/Phi_e on the monodromy contours; a vanishing chi_1 gives D = inf."""
    t = params.torus
    if z0 is None:
        z0 = contour_base_point(params)

    def inv_phi(z):
        return 1.0 / phi_e(params, z)

    chi1 = _segment_quad(inv_phi, z0, z0 + 1.0)
    chi2 = _segment_quad(inv_phi, z0, z0 + t.tau)
    scale = abs(chi1) + abs(chi2)
    if scale < both_zero_tol:
        raise LameSpectraError(
            "chi_ratio: both cycle integrals vanish; this indicates a bug, "
            "not a mathematical case")
    if abs(chi1) < 1e-9 * scale:
        return complex(np.inf)
    return chi2 / chi1
