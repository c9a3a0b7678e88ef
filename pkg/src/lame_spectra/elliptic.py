r"""Weierstrass elliptic functions on the torus C / (Z + tau*Z).

Conventions follow the classical normalization with periods 1 and tau,
Im tau > 0.  Half periods are om_1/2 = 1/2, om_2/2 = tau/2, om_3/2 = (1+tau)/2
with critical values e_k = wp(om_k/2), quasi-periods eta_j = zeta(z+om_j) -
zeta(z), and the Legendre relation tau*eta_1 - eta_2 = 2*pi*i.

Evaluation goes through the Jacobi theta_1 q-series in the nome
q = exp(i*pi*tau):

    zeta(z) = eta_1 z + pi * theta_1'(pi z) / theta_1(pi z)
    wp(z)   = -zeta'(z),   wp'(z) by one more theta derivative,
    log sigma(z) = eta_1 z^2 / 2 + log theta_1(pi z) - log theta_1'(0).

Arguments are reduced to the centered fundamental cell before summation and
the quasi-periodic factors are restored afterwards, so each series is
evaluated where it converges fastest.  Terms are included until they drop
below 1e-17 in the worst case over the cell, capped at 64 terms; this keeps
all values accurate to at least 12 significant digits for |q| < 0.9.
Raw lattice sums are deliberately not used here (they converge too slowly);
the test suite keeps them as an independent oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, PoleProximityError, ZeroNotFoundError

__all__ = [
    "Torus",
    "TorusPoint",
    "torus_init",
    "wp_family",
    "zeta_sigma",
    "premodular_Z",
    "invert_wp",
]

_THETA_TERM_FLOOR = 1e-17
_THETA_TERM_CAP = 64

# deterministic Newton starts for inverting wp, as (x, y) lattice fractions
_INVERT_STARTS = (
    (0.23, 0.31), (0.71, 0.37), (0.29, 0.73), (0.67, 0.69),
    (0.50, 0.27), (0.27, 0.50), (0.73, 0.50), (0.41, 0.59),
)


class Torus:
    """Lattice data for E_tau = C / (Z + tau*Z), immutable after construction.

    Attributes
    ----------
    tau : complex with Im tau > 0
    q : complex nome exp(i*pi*tau)
    e : (e1, e2, e3), the half-period values of wp
    eta : (eta1, eta2), the quasi-periods of zeta
    g2, g3 : complex lattice invariants
    pole_cutoff : evaluation points closer than this to a lattice point
        (or, for log sigma, to a zero of sigma) raise PoleProximityError
    """

    def __init__(self, tau: complex, pole_cutoff: float = 1e-8):
        tau = complex(tau)
        if not np.isfinite(tau.real) or not np.isfinite(tau.imag) or tau.imag <= 0:
            raise InvalidParameterError(f"tau must satisfy Im tau > 0, got {tau}")
        self.tau = tau
        self.pole_cutoff = float(pole_cutoff)
        self.q = np.exp(1j * np.pi * tau)
        absq = abs(self.q)
        # worst-case term size in the centered cell is |q|^(n^2 - 1/4)
        n_terms = int(np.ceil(np.sqrt(-np.log10(_THETA_TERM_FLOOR) / -np.log10(absq)))) + 2
        self._N = min(max(n_terms, 6), _THETA_TERM_CAP)
        n = np.arange(self._N)
        self._k = 2 * n + 1
        self._c1 = (-1.0) ** n * self.q ** ((n + 0.5) ** 2)
        self._th1p0 = 2.0 * np.sum(self._c1 * self._k)
        th1ppp0 = -2.0 * np.sum(self._c1 * self._k**3)
        self.eta1 = -np.pi**2 * th1ppp0 / (3.0 * self._th1p0)
        self.eta2 = tau * self.eta1 - 2j * np.pi
        self.eta = (self.eta1, self.eta2)
        self.e1 = complex(self.wp(0.5))
        self.e2 = complex(self.wp(tau / 2))
        self.e3 = complex(self.wp((1 + tau) / 2))
        self.e = (self.e1, self.e2, self.e3)
        self.g2 = -4.0 * (self.e1 * self.e2 + self.e1 * self.e3 + self.e2 * self.e3)
        self.g3 = 4.0 * self.e1 * self.e2 * self.e3

    def __repr__(self):
        return f"Torus(tau={self.tau!r})"

    # -- lattice geometry -------------------------------------------------

    def lattice_coords(self, z) -> tuple:
        """Real coordinates (x, y) with z = x + y*tau."""
        z = np.asarray(z, dtype=complex)
        y = z.imag / self.tau.imag
        x = z.real - y * self.tau.real
        return x, y

    def reduce_centered(self, z):
        """Split z = z0 + m + n*tau with z0 in the centered cell.

        Returns (z0, m, n); m, n are integer-valued floats.
        """
        z = np.asarray(z, dtype=complex)
        x, y = self.lattice_coords(z)
        n = np.round(y)
        m = np.round(x)
        return z - m - n * self.tau, m, n

    def dist_to_lattice(self, z):
        """Euclidean distance from z to the period lattice."""
        z0, _, _ = self.reduce_centered(z)
        d = np.abs(z0)
        for w in (1.0, -1.0, self.tau, -self.tau, 1 + self.tau, -1 - self.tau,
                  1 - self.tau, -1 + self.tau):
            d = np.minimum(d, np.abs(z0 - w))
        return d

    def _check_pole(self, z, what: str):
        d = self.dist_to_lattice(z)
        if np.any(d < self.pole_cutoff):
            raise PoleProximityError(
                f"{what}: argument within {self.pole_cutoff:g} of a lattice point "
                f"(min distance {float(np.min(d)):.3g})")

    # -- theta kernel ------------------------------------------------------

    def _theta1(self, v):
        """theta_1 and its first three v-derivatives at v (scalar or array)."""
        v = np.asarray(v, dtype=complex)
        m = np.multiply.outer(v, self._k)
        ex = np.exp(1j * m)
        exi = 1.0 / ex
        s = (ex - exi) / 2j
        c = (ex + exi) / 2.0
        t0 = 2.0 * np.sum(self._c1 * s, axis=-1)
        t1 = 2.0 * np.sum(self._c1 * self._k * c, axis=-1)
        t2 = -2.0 * np.sum(self._c1 * self._k**2 * s, axis=-1)
        t3 = -2.0 * np.sum(self._c1 * self._k**3 * c, axis=-1)
        return t0, t1, t2, t3

    # -- function values ---------------------------------------------------

    def wp(self, z, check: bool = False):
        if check:
            self._check_pole(z, "wp")
        z0, _, _ = self.reduce_centered(z)
        t0, t1, t2, _ = self._theta1(np.pi * z0)
        r = t1 / t0
        return -self.eta1 - np.pi**2 * (t2 / t0 - r * r)

    def wp_prime(self, z, check: bool = False):
        if check:
            self._check_pole(z, "wp_prime")
        z0, _, _ = self.reduce_centered(z)
        t0, t1, t2, t3 = self._theta1(np.pi * z0)
        r = t1 / t0
        return -np.pi**3 * (t3 / t0 - 3.0 * (t2 / t0) * r + 2.0 * r**3)

    def wp_pp(self, z, check: bool = False):
        """Second derivative, via wp'' = 6 wp^2 - g2/2."""
        w = self.wp(z, check=check)
        return 6.0 * w * w - self.g2 / 2.0

    def zeta(self, z, check: bool = False):
        if check:
            self._check_pole(z, "zeta")
        z0, m, n = self.reduce_centered(z)
        t0, t1, _, _ = self._theta1(np.pi * z0)
        return self.eta1 * z0 + np.pi * t1 / t0 + m * self.eta1 + n * self.eta2

    def log_sigma(self, z, check: bool = False):
        """log sigma(z) on one fixed branch per reduced argument.

        Only differences of values are meaningful after exponentiation; the
        2*pi*i ambiguity of the complex log is not tracked across calls.
        """
        if check:
            self._check_pole(z, "log_sigma")
        z0, m, n = self.reduce_centered(z)
        t0, _, _, _ = self._theta1(np.pi * z0)
        base = self.eta1 * z0**2 / 2.0 + np.log(t0) - np.log(self._th1p0)
        shift = (m * self.eta1 + n * self.eta2) * (z0 + (m + n * self.tau) / 2.0)
        return base + shift + 1j * np.pi * (m + n + m * n)


@dataclass(frozen=True)
class TorusPoint:
    """A point of E_tau; ``z`` is a representative in C."""

    z: complex

    def reduced(self, torus: Torus) -> "TorusPoint":
        """Representative in the fundamental cell [0,1) + [0,1) tau."""
        x, y = torus.lattice_coords(self.z)
        return TorusPoint(complex((x % 1.0) + (y % 1.0) * torus.tau))

    def is_half_period(self, torus: Torus, tol: float = 1e-9) -> bool:
        x, y = torus.lattice_coords(self.z)
        fx = abs((x * 2) - round(x * 2))
        fy = abs((y * 2) - round(y * 2))
        return fx < tol and fy < tol


def torus_init(tau: complex, pole_cutoff: float = 1e-8) -> Torus:
    """Build a Torus with all derived invariants (rejects Im tau <= 0)."""
    return Torus(tau, pole_cutoff=pole_cutoff)


def wp_family(torus: Torus, z):
    """(wp, wp', wp'') at z, with wp'' = 6 wp^2 - g2/2."""
    torus._check_pole(z, "wp_family")
    w = torus.wp(z)
    return w, torus.wp_prime(z), 6.0 * w * w - torus.g2 / 2.0


def zeta_sigma(torus: Torus, z):
    """(zeta(z), log sigma(z)); see Torus.log_sigma for the branch caveat."""
    torus._check_pole(z, "zeta_sigma")
    return torus.zeta(z), torus.log_sigma(z)


def premodular_Z(torus: Torus, r: float, s: float):
    """Z(r, s) = zeta(r + s*tau) - r*eta1 - s*eta2.

    Defined whenever r + s*tau is not a lattice point; Z(r+1, s) = Z(r, s)
    and Z(-r, -s) = -Z(r, s).  Accepts complex r, s as well.
    """
    z = r + s * torus.tau
    torus._check_pole(z, "premodular_Z")
    return torus.zeta(z) - r * torus.eta1 - s * torus.eta2


def invert_wp(torus: Torus, value: complex, tol: float = 1e-12) -> complex:
    """Solve wp(a) = value by Newton from deterministic starts.

    Returns the representative a of {a, -a} in the fundamental cell whose
    reduced imaginary part is >= that of its negation (ties broken by real
    part), so repeated calls are reproducible.
    """
    value = complex(value)
    scale = 1.0 + abs(value)
    for fx, fy in _INVERT_STARTS:
        a = fx + fy * torus.tau
        ok = False
        for _ in range(60):
            f = torus.wp(a) - value
            if abs(f) < tol * scale:
                ok = True
                break
            fp = torus.wp_prime(a)
            if abs(fp) < 1e-14:
                break
            step = f / fp
            # keep iterates off the lattice
            if abs(step) > 0.45:
                step *= 0.45 / abs(step)
            a = a - step
            if torus.dist_to_lattice(a) < 1e-6:
                a = a + 0.05 + 0.05 * torus.tau
        if ok:
            return _canonical_pm(torus, a)
    raise ZeroNotFoundError(f"invert_wp: no Newton start converged for value {value}")


def _canonical_pm(torus: Torus, a: complex) -> complex:
    """Pick between a and -a per the invert_wp convention."""
    x, y = torus.lattice_coords(a)
    a1 = (x % 1.0) + (y % 1.0) * torus.tau
    x2, y2 = torus.lattice_coords(-a)
    a2 = (x2 % 1.0) + (y2 % 1.0) * torus.tau
    if abs(a1.imag - a2.imag) > 1e-12:
        return complex(a1 if a1.imag > a2.imag else a2)
    return complex(a1 if a1.real >= a2.real else a2)
