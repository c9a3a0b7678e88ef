r"""Potentials for the n=1 Lame equation and its generalized Lame-type variant.

The classical potential is 2*wp(z) + Btilde.  The generalized one is

    q(z) = 2 wp(z) + (3/4)(wp(z+p) + wp(z-p))
           + T1 (zeta(z+p) - zeta(z)) + T2 (zeta(z-p) - zeta(z)) + B,

with regular singular points at 0 and +-p (mod the lattice).  The equation
y'' = q y is free of logarithms at all three singularities exactly when

    (T1 + T2) * (T1 - T2 + wp''(p) / (2 wp'(p))) = 0,
    B = (T1^2 + T2^2)/2 - (T1 - T2) zeta(2p)/2 - (3/4) wp(2p) - 2 wp(p).

The two factors give the two apparent branches:

* even branch:      (T1, T2) = (A, -A), potential even in z;
* non-even branch:  (T1, T2) = (T - w, T + w) with w = wp''(p)/(4 wp'(p)),
  even only at T = 0 (where it meets the even branch at A = -w).

Every potential here exposes a "sweep form" q(z; u) = F0(z) + F1(z) u + c2 u^2
in its scalar parameter u (u = Btilde, T, or A), which is what lets the
monodromy integrator advance a whole parameter grid in one pass.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .elliptic import Torus, TorusPoint
from .errors import InvalidParameterError, PoleProximityError

__all__ = [
    "Branch",
    "LameParams",
    "GLEParams",
    "LimitLameTypeParams",
    "make_apparent",
    "potential_eval",
    "frobenius_no_log",
    "apparentness_B",
]


class Branch(Enum):
    EVEN = "even"
    NONEVEN = "noneven"
    GENERAL = "general"


def _require_admissible_p(torus: Torus, p: complex):
    if TorusPoint(p).is_half_period(torus):
        raise InvalidParameterError(f"p = {p} is a half period; wp'(p) = 0 there")
    if torus.dist_to_lattice(p) < 1e-9:
        raise InvalidParameterError(f"p = {p} is a lattice point")


def apparentness_B(torus: Torus, p: complex, T1: complex, T2: complex) -> complex:
    """B forced by apparentness for given (T1, T2)."""
    wp_p = torus.wp(p)
    return ((T1**2 + T2**2) / 2.0 - (T1 - T2) * torus.zeta(2 * p) / 2.0
            - 0.75 * torus.wp(2 * p) - 2.0 * wp_p)


@dataclass(frozen=True)
class LameParams:
    """Classical Lame potential 2 wp(z) + Btilde; apparent for every Btilde."""

    torus: Torus
    Btilde: complex

    @property
    def singular_points(self):
        return (0.0,)

    def potential(self, z):
        return 2.0 * self.torus.wp(z) + self.Btilde

    def potential_prime(self, z):
        return 2.0 * self.torus.wp_prime(z)

    def sweep_basis(self, z):
        """q(z; u) = F0 + F1*u + c2*u^2 with u = Btilde."""
        F0 = 2.0 * self.torus.wp(z)
        return F0, np.ones_like(F0)

    sweep_c2 = 0.0

    @property
    def sweep_value(self):
        return self.Btilde

    def spectral_polynomial_at(self, u):
        t = self.torus
        u = np.asarray(u, dtype=complex)
        return -4.0 * (u - t.e1) * (u - t.e2) * (u - t.e3)

    def wp_alpha_target(self, u):
        """wp(r + s tau) for monodromy data (r, s) at parameter u (= Btilde)."""
        return np.asarray(u, dtype=complex)


@dataclass(frozen=True)
class GLEParams:
    """Generalized Lame-type potential with parameters (p, T1, T2, B).

    Use make_apparent to construct points on an apparent branch; the raw
    constructor does not validate, which the logarithm detector
    frobenius_no_log relies on.
    """

    torus: Torus
    p: complex
    T1: complex
    T2: complex
    B: complex
    branch: Branch = Branch.GENERAL
    branch_value: complex = 0.0     # A on the even branch, T on the non-even

    # cached wp data at p
    _wp_p: complex = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        _require_admissible_p(self.torus, self.p)
        object.__setattr__(self, "_wp_p", complex(self.torus.wp(self.p)))

    @property
    def wp_p(self):
        return self._wp_p

    @property
    def wp_prime_p(self):
        return complex(self.torus.wp_prime(self.p))

    @property
    def wp_ratio(self):
        """wp''(p) / wp'(p)."""
        return complex(self.torus.wp_pp(self.p)) / self.wp_prime_p

    @property
    def singular_points(self):
        return (0.0, self.p, -self.p)

    def potential(self, z):
        t, p = self.torus, self.p
        return (2.0 * t.wp(z) + 0.75 * (t.wp(z + p) + t.wp(z - p))
                + self.T1 * (t.zeta(z + p) - t.zeta(z))
                + self.T2 * (t.zeta(z - p) - t.zeta(z)) + self.B)

    def potential_prime(self, z):
        t, p = self.torus, self.p
        return (2.0 * t.wp_prime(z) + 0.75 * (t.wp_prime(z + p) + t.wp_prime(z - p))
                - self.T1 * (t.wp(z + p) - t.wp(z))
                - self.T2 * (t.wp(z - p) - t.wp(z)))

    # -- sweep form over the branch parameter ------------------------------

    sweep_c2 = 1.0

    @property
    def sweep_value(self):
        if self.branch is Branch.GENERAL:
            raise InvalidParameterError("general (T1, T2) points have no sweep parameter")
        return self.branch_value

    def sweep_basis(self, z):
        """q(z; u) = F0 + F1*u + u^2 along the apparent branch through p."""
        t, p = self.torus, self.p
        P0, Pp, Pm = t.wp(z), t.wp(z + p), t.wp(z - p)
        Z0, Zp, Zm = t.zeta(z), t.zeta(z + p), t.zeta(z - p)
        core = 2.0 * P0 + 0.75 * (Pp + Pm)
        if self.branch is Branch.NONEVEN:
            w = self.wp_ratio / 4.0
            F0 = core - w * (Zp - Zm) + 2.0 * w * t.zeta(p) - self.wp_p / 2.0
            F1 = Zp + Zm - 2.0 * Z0
        elif self.branch is Branch.EVEN:
            F0 = core - 0.75 * t.wp(2 * p) - 2.0 * self.wp_p
            F1 = Zp - Zm - t.zeta(2 * p)
        else:
            raise InvalidParameterError("general (T1, T2) points have no sweep basis")
        return F0, F1

    def with_sweep_value(self, u) -> "GLEParams":
        return make_apparent(self.torus, self.p, self.branch, u)

    # -- spectral data along the branch -------------------------------------

    def spectral_polynomial_at(self, u):
        """Q at sweep parameter u: closed form on either apparent branch."""
        t = self.torus
        u = np.asarray(u, dtype=complex)
        if self.branch is Branch.NONEVEN:
            a = u * u - 2.0 * self.wp_p
            return -4.0 * (a - t.e1) * (a - t.e2) * (a - t.e3)
        if self.branch is Branch.EVEN:
            y1, y2 = self.even_Y_factors(u)
            return -y1 * y2
        raise InvalidParameterError("spectral polynomial needs an apparent branch")

    def even_Y_factors(self, A):
        """The two cubic factors with Q(A) = -Y1(A) Y2(A) on the even branch."""
        A = np.asarray(A, dtype=complex)
        wp_p, wpd = self.wp_p, self.wp_prime_p
        r = self.wp_ratio
        y1 = (A**3 - 1.25 * r * A**2 + 3.0 * (wp_p + r * r / 16.0) * A
              + wpd / 2.0 - 2.25 * r * wp_p + (9.0 / 64.0) * r**3)
        y2 = A**3 - 0.25 * r * A**2 - (5.0 / 16.0) * r * r * A + 2.0 * wpd - (3.0 / 64.0) * r**3
        return y1, y2

    def wp_alpha_target(self, u):
        """wp(r + s tau) for the data (r, s) at sweep parameter u (= T)."""
        if self.branch is not Branch.NONEVEN:
            raise InvalidParameterError("wp_alpha_target is the non-even anchor")
        u = np.asarray(u, dtype=complex)
        return u * u - 2.0 * self.wp_p


@dataclass(frozen=True)
class LimitLameTypeParams:
    """Limit of the non-even family as p -> om_k/2 (k = 1, 2, 3):

        q(z) = 2 (wp(z) + wp(z - om_k/2)) + 2 Ttilde (zeta(z - om_k/2) - zeta(z))
               + Ttilde^2 + eta_k Ttilde - e_k.

    Both singularities carry integer exponents, so the equation is apparent
    for every Ttilde and there is no square-root sign issue on any cycle.
    """

    torus: Torus
    k: int
    Ttilde: complex

    def __post_init__(self):
        if self.k not in (1, 2, 3):
            raise InvalidParameterError("k must be 1, 2, or 3")

    @property
    def half_period(self):
        t = self.torus
        return (0.5, t.tau / 2.0, (1 + t.tau) / 2.0)[self.k - 1]

    @property
    def eta_k(self):
        t = self.torus
        return (t.eta1, t.eta2, t.eta1 + t.eta2)[self.k - 1]

    @property
    def e_k(self):
        return self.torus.e[self.k - 1]

    @property
    def singular_points(self):
        return (0.0, self.half_period)

    sweep_c2 = 1.0

    @property
    def sweep_value(self):
        return self.Ttilde

    def sweep_basis(self, z):
        t, h = self.torus, self.half_period
        F0 = 2.0 * (t.wp(z) + t.wp(z - h)) - self.e_k
        F1 = 2.0 * (t.zeta(z - h) - t.zeta(z)) + self.eta_k
        return F0, F1

    def potential(self, z):
        F0, F1 = self.sweep_basis(z)
        return F0 + F1 * self.Ttilde + self.Ttilde**2


def make_apparent(torus: Torus, p: complex, branch: Branch | str, value: complex) -> GLEParams:
    """Apparent parameters on the chosen branch through p.

    Branch.NONEVEN with value T gives (T1, T2) = (T -+ wp''/(4 wp')); at
    T = 0 this is the intersection point with the even branch.  Branch.EVEN
    with value A gives (T1, T2) = (A, -A).
    """
    branch = Branch(branch)
    _require_admissible_p(torus, p)
    value = complex(value)
    wpd = complex(torus.wp_prime(p))
    if abs(wpd) < 1e-12:
        raise InvalidParameterError("wp'(p) vanishes; p is a half period")
    w = complex(torus.wp_pp(p)) / (4.0 * wpd)
    if branch is Branch.NONEVEN:
        T1, T2 = value - w, value + w
    elif branch is Branch.EVEN:
        T1, T2 = value, -value
    else:
        raise InvalidParameterError("make_apparent needs Branch.EVEN or Branch.NONEVEN")
    B = apparentness_B(torus, p, T1, T2)
    return GLEParams(torus=torus, p=p, T1=T1, T2=T2, B=B, branch=branch,
                     branch_value=value)


def potential_eval(params, z):
    """q(z) for any parameter bundle, rejecting near-singular arguments."""
    t = params.torus
    for s in params.singular_points:
        d = t.dist_to_lattice(np.asarray(z, dtype=complex) - s)
        if np.any(d < t.pole_cutoff):
            raise PoleProximityError(f"potential_eval: z within cutoff of singularity {s}")
    return params.potential(z)


# ---------------------------------------------------------------------------
# Frobenius logarithm detector
# ---------------------------------------------------------------------------

def _laurent_coeffs(params, center: complex, n_low: int, n_high: int, n_nodes: int = 128):
    """Laurent coefficients of the potential at a singularity, by a discrete
    Cauchy integral on a circle inside the annulus of convergence."""
    t = params.torus
    others = [s + m + n * t.tau
              for s in params.singular_points
              for m in (-1, 0, 1) for n in (-1, 0, 1)
              if abs(s + m + n * t.tau - center) > 1e-9]
    rad = 0.45 * min(abs(w - center) for w in others)
    rad = min(rad, 0.35 * min(1.0, abs(t.tau)))
    th = 2.0 * np.pi * np.arange(n_nodes) / n_nodes
    ring = center + rad * np.exp(1j * th)
    vals = params.potential(ring)
    hat = np.fft.fft(vals) / n_nodes
    coeffs = {}
    for n in range(n_low, n_high + 1):
        coeffs[n] = hat[n % n_nodes] * rad ** (-n)
    return coeffs


def frobenius_no_log(params, tol: float = 1e-9) -> dict:
    """Per-singularity logarithm report for y'' = q y.

    At z = 0 the exponents are -1 and 2; the resonance sits at order m = 3 of
    the series sum c_m z^(m-1).  At z = +-p they are -1/2 and 3/2 with the
    resonance at m = 2 of sum d_m (z -+ p)^(m - 1/2).  Each entry maps the
    singularity to (passes, obstruction, scale): the series continues past the
    resonance iff the obstruction coefficient vanishes.  Works for GLEParams
    and LameParams (the latter only has the z = 0 entry).
    """
    report = {}

    # z = 0: c_m m(m-3) = Q_{-1} c_{m-1} + sum_{j>=0} Q_j c_{m-2-j}
    Q = _laurent_coeffs(params, 0.0, -2, 2)
    c0 = 1.0
    c1 = -Q[-1] * c0 / 2.0
    c2 = -(Q[-1] * c1 + Q[0] * c0) / 2.0
    obstruction = Q[-1] * c2 + Q[0] * c1 + Q[1] * c0
    scale = max(abs(Q[-1] * c2), abs(Q[0] * c1), abs(Q[1] * c0), 1.0)
    report["0"] = (abs(obstruction) < tol * scale, complex(obstruction), scale)
    if not isinstance(params, GLEParams):
        return report

    # z = +-p: d_m m(m-2) = Q_{-1} d_{m-1} + sum_{j>=0} Q_j d_{m-2-j}
    for label, center in (("+p", params.p), ("-p", -params.p)):
        Q = _laurent_coeffs(params, center, -2, 1)
        d0 = 1.0
        d1 = -Q[-1] * d0
        obstruction = Q[-1] * d1 + Q[0] * d0
        scale = max(abs(Q[-1] * d1), abs(Q[0] * d0), 1.0)
        report[label] = (abs(obstruction) < tol * scale, complex(obstruction), scale)
    return report
