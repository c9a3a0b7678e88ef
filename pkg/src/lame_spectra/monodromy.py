r"""Global monodromy of y'' = q(z) y along the two fundamental cycles.

The second-order equation is integrated as the first-order system
Y' = [[0, 1], [q, 0]] Y with an embedded Dormand-Prince 5(4) pair over
straight segments z0 -> z0 + 1 and z0 -> z0 + tau.  The propagated matrix of
a closed cycle is the monodromy matrix M_j for that cycle; Hill discriminants
are Delta_j = tr M_j / 2.

Sign convention.  The generalized potential has square-root exponents at
+-p, so continuing along lines in different strips of the fundamental cell
yields monodromies differing by the central factor -Id.  We normalize to the
convention that is continuous under p -> 0 (where the equation degenerates
to the classical Lame equation): the base line must separate the p row from
the -p row of singularities, one coordinate per cycle.  Rather than forcing
the base point into that (possibly thin) region, we pick the base point for
clearance alone and multiply M_j by -1 when the base point sits outside the
separating strip.  With this normalization the Hill discriminants of the
generalized equation match the classical ones under the parameter
correspondence, which the test suite checks directly.

Everything here is a pure function of its inputs; batched sweeps share one
adaptive integration, with the error norm taken over the whole batch.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .elliptic import Torus
from .errors import (EigenPairingError, IntegratorError, InvalidParameterError,
                     PathClearanceError)
from .potentials import GLEParams, LameParams

__all__ = [
    "MonodromyResult",
    "CompletelyReducible",
    "NonCompletelyReducible",
    "integrate_monodromy",
    "monodromy_sweep",
    "loop_monodromy",
    "select_base_point",
    "strip_parity",
    "classify",
    "noncr_ratio_from_matrices",
    "canonical_rs",
]

MIN_CLEARANCE_FACTOR = 0.05

# Dormand-Prince 5(4) tableau
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_ERR = tuple(b5 - b4 for b5, b4 in zip(_B5, _B4))


def _dopri5(f, y0, rtol, atol, max_steps=100000):
    """Integrate y' = f(t, y) from t=0 to t=1; y complex ndarray of any shape."""
    y = y0
    t, h = 0.0, 0.01
    k0 = f(0.0, y)
    steps = 0
    while t < 1.0:
        h = min(h, 1.0 - t)
        k = [k0, None, None, None, None, None, None]
        for i in range(1, 7):
            yi = y.copy()
            for a, kj in zip(_A[i], k):
                if a:
                    yi += (h * a) * kj
            k[i] = f(t + _C[i] * h, yi)
        y5 = y.copy()
        for b, kj in zip(_B5, k):
            if b:
                y5 += (h * b) * kj
        e = np.zeros_like(y)
        for d, kj in zip(_ERR, k):
            if d:
                e += (h * d) * kj
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y5))
        enorm = float(np.max(np.abs(e) / scale))
        if enorm <= 1.0:
            t += h
            y = y5
            k0 = k[6]          # first-same-as-last
        fac = 0.9 * (1.0 / max(enorm, 1e-16)) ** 0.2
        h *= min(5.0, max(0.2, fac))
        steps += 1
        if steps > max_steps:
            raise IntegratorError(f"step limit {max_steps} exceeded at t={t:.4f}")
    return y


def integrate_path(params, u, vertices, rtol=1e-10, atol=1e-12):
    """Propagator of the fundamental system along a polyline, Y(start) = Id.

    ``u`` may be a scalar or an array of sweep-parameter values; the result
    has shape u.shape + (2, 2).  The system is linear, so later segments
    simply continue the integration from the current propagator.
    """
    u = np.asarray(u, dtype=complex)
    c2 = params.sweep_c2
    Y = np.zeros(u.shape + (2, 2), dtype=complex)
    Y[..., 0, 0] = 1.0
    Y[..., 1, 1] = 1.0
    for a, b in zip(vertices[:-1], vertices[1:]):
        om = b - a

        def f(tv, Yv, a=a, om=om):
            F0, F1 = params.sweep_basis(a + tv * om)
            q = F0 + F1 * u + c2 * u * u
            out = np.empty_like(Yv)
            out[..., 0, :] = Yv[..., 1, :]
            out[..., 1, :] = np.asarray(q)[..., None] * Yv[..., 0, :]
            return om * out

        Y = _dopri5(f, Y, rtol, atol)
    return Y


# -- geometry -----------------------------------------------------------------

def _point_segment_distance(w, a, b):
    ab = b - a
    t = np.clip(((w - a) * np.conj(ab)).real / abs(ab) ** 2, 0.0, 1.0)
    return abs(a + t * ab - w)


def segment_clearance(torus: Torus, z0, omega, singular_points):
    """Min distance from the segment [z0, z0+omega] to the singular lattice."""
    d = np.inf
    for s in singular_points:
        for m in range(-2, 4):
            for n in range(-2, 4):
                d = min(d, _point_segment_distance(s + m + n * torus.tau, z0, z0 + omega))
    return d


def select_base_point(params, extra_score=None, min_clearance=None):
    """Deterministic base point maximizing clearance of both cycle segments.

    ``extra_score``, if given, maps a candidate z0 to an additional value the
    selection must also keep large (used to keep contours away from zeros of
    the elliptic solution).  Raises PathClearanceError when nothing admissible
    exists.
    """
    t = params.torus
    if min_clearance is None:
        min_clearance = MIN_CLEARANCE_FACTOR * min(1.0, abs(t.tau))
    sing = params.singular_points
    best_score, best_z0, best_clear = -np.inf, None, 0.0
    for fx in np.linspace(0.06, 0.94, 12):
        for fy in np.linspace(0.06, 0.94, 12):
            z0 = fx + fy * t.tau
            clear = min(segment_clearance(t, z0, 1.0, sing),
                        segment_clearance(t, z0, t.tau, sing))
            score = clear
            if extra_score is not None:
                score = min(score, extra_score(z0))
            if score > best_score:
                best_score, best_z0, best_clear = score, z0, clear
    if best_clear < min_clearance:
        raise PathClearanceError(
            f"no base point with clearance >= {min_clearance:.3g} "
            f"(best {best_clear:.3g}); p too close to a half period?")
    return best_z0


def strip_parity(torus: Torus, z0, p):
    """Signs (s1, s2) normalizing segment monodromies to the p -> 0 convention.

    Cycle j picks up -Id for each p/-p row (resp. column) between the base
    line and the line separating p from -p; that count is odd exactly when
    the base coordinate lies outside the open interval between the p and -p
    coordinates.
    """
    xp, yp = torus.lattice_coords(p)
    xp, yp = xp % 1.0, yp % 1.0
    x0, y0 = torus.lattice_coords(z0)
    x0, y0 = x0 % 1.0, y0 % 1.0

    def sign(c0, cp):
        lo, hi = min(cp, 1.0 - cp), max(cp, 1.0 - cp)
        return 1.0 if lo < c0 < hi else -1.0

    return sign(y0, yp), sign(x0, xp)


# -- results ------------------------------------------------------------------

@dataclass
class CompletelyReducible:
    r: complex
    s: complex


@dataclass
class NonCompletelyReducible:
    D: complex          # chi_2/chi_1; inf encoded as complex(inf)
    sign1: int
    sign2: int


@dataclass
class MonodromyResult:
    M1: np.ndarray
    M2: np.ndarray
    delta1: complex
    delta2: complex
    z0: complex
    parity: tuple
    classification: object = None

    def trace_pair(self):
        return 2.0 * self.delta1, 2.0 * self.delta2


def integrate_monodromy(params, z0: Optional[complex] = None,
                        rtol: float = 1e-10, atol: float = 1e-12) -> MonodromyResult:
    """Monodromy matrices of the two fundamental cycles at params.sweep_value."""
    t = params.torus
    if z0 is None:
        z0 = select_base_point(params)
    u = np.asarray(params.sweep_value, dtype=complex)
    M1 = integrate_path(params, u, [z0, z0 + 1.0], rtol, atol)
    M2 = integrate_path(params, u, [z0, z0 + t.tau], rtol, atol)
    parity = (1.0, 1.0)
    if isinstance(params, GLEParams):
        parity = strip_parity(t, z0, params.p)
        M1 = parity[0] * M1
        M2 = parity[1] * M2
    return MonodromyResult(M1=M1, M2=M2, delta1=np.trace(M1) / 2.0,
                           delta2=np.trace(M2) / 2.0, z0=z0, parity=parity)


def monodromy_sweep(params, u_values, z0: Optional[complex] = None,
                    rtol: float = 1e-9, atol: float = 1e-11, cycles=(1, 2)):
    """Batched monodromy over an array of sweep parameters.

    Returns (M1, M2) with shape u_values.shape + (2, 2), in the same
    normalization as integrate_monodromy; a cycle not listed in ``cycles``
    comes back as None.  One adaptive integration serves the whole batch; the
    step controller uses the worst error across it.
    """
    t = params.torus
    if z0 is None:
        z0 = select_base_point(params)
    u = np.asarray(u_values, dtype=complex)
    s1, s2 = (strip_parity(t, z0, params.p) if isinstance(params, GLEParams)
              else (1.0, 1.0))
    M1 = M2 = None
    if 1 in cycles:
        M1 = s1 * integrate_path(params, u, [z0, z0 + 1.0], rtol, atol)
    if 2 in cycles:
        M2 = s2 * integrate_path(params, u, [z0, z0 + t.tau], rtol, atol)
    return M1, M2


def loop_monodromy(params, center, radius, n_segments: int = 16,
                   rtol: float = 1e-10, atol: float = 1e-12):
    """Continuation around a small positively-oriented circle (local monodromy)."""
    u = np.asarray(params.sweep_value, dtype=complex)
    angles = 2.0 * np.pi * np.arange(n_segments + 1) / n_segments
    vertices = [center + radius * np.exp(1j * a) for a in angles]
    return integrate_path(params, u, vertices, rtol, atol)


# -- classification -----------------------------------------------------------

def canonical_rs(params, mono: MonodromyResult, anchor_tol: float = 1e-5):
    """Monodromy data (r, s) from eigenvalues, pinned by the spectral anchor.

    M1 has eigenvalues e^{-+2 pi i s}, M2 has e^{+-2 pi i r} on a shared
    eigenbasis.  Of the two candidates (r, s) and (-r, -s) (reduced to
    Re in [0, 1)), the one with wp'(r + s tau) equal to the principal branch
    of sqrt(-Q) is returned; the evenness of wp makes wp(r + s tau) match the
    parameter target for both, which is checked as a consistency assertion.
    """
    t = params.torus
    u = complex(np.asarray(params.sweep_value))
    try:
        target = complex(params.wp_alpha_target(u))
    except InvalidParameterError:
        target = None       # even branch: only the wp' branch pick applies
    Q = complex(params.spectral_polynomial_at(u))

    M1, M2 = mono.M1, mono.M2
    gap1 = _eigen_gap(M1)
    gap2 = _eigen_gap(M2)
    lead, other = (M2, M1) if gap2 >= gap1 else (M1, M2)
    evals, V = np.linalg.eig(lead)
    try:
        D_other = np.linalg.solve(V, other) @ V
    except np.linalg.LinAlgError as exc:
        raise EigenPairingError(f"eigenbasis singular: {exc}") from None
    off = max(abs(D_other[0, 1]), abs(D_other[1, 0]))
    scal = max(1.0, np.max(np.abs(D_other)))
    if off > 1e-5 * scal:
        raise EigenPairingError(
            f"monodromy pair not simultaneously diagonal (off-diagonal {off:.2e})")
    if gap2 >= gap1:
        lam2, lam1 = evals[0], D_other[0, 0]
    else:
        lam1, lam2 = evals[0], D_other[0, 0]
    s = -np.log(lam1) / (2j * np.pi)
    r = np.log(lam2) / (2j * np.pi)

    cands = []
    for rc, sc in ((r, s), (-r, -s)):
        rc = rc - np.floor(rc.real)
        sc = sc - np.floor(sc.real)
        alpha = rc + sc * t.tau
        if t.dist_to_lattice(alpha) < 1e-6:
            raise EigenPairingError("monodromy data degenerate: r + s tau on the lattice")
        mis = 0.0 if target is None else abs(t.wp(alpha) - target)
        branch = abs(t.wp_prime(alpha) - np.sqrt(-Q))
        cands.append((mis, branch, complex(rc), complex(sc)))
    mis_scale = anchor_tol * (1.0 + (abs(target) if target is not None else 0.0))
    cands.sort(key=lambda c: (c[0] > mis_scale, c[1]))
    mis, _, rc, sc = cands[0]
    if mis > mis_scale:
        raise EigenPairingError(
            f"spectral anchor mismatch {mis:.2e}: monodromy data inconsistent "
            "with the parameter (wrong cycle normalization?)")
    return rc, sc


def _eigen_gap(M):
    ev = np.linalg.eigvals(M)
    return abs(ev[0] - ev[1])


def noncr_ratio_from_matrices(mono: MonodromyResult, tol: float = 1e-6):
    """(D, sign1, sign2) read off the normalized non-reducible pair.

    Writing M_j = eps_j (I + P_j) with P_j nilpotent sharing a one-dimensional
    image, D is the ratio of the two nilpotent amplitudes; D = inf encodes a
    trivial P_1.
    """
    M1, M2 = mono.M1, mono.M2
    e1 = 1.0 if np.real(np.trace(M1)) > 0 else -1.0
    e2 = 1.0 if np.real(np.trace(M2)) > 0 else -1.0
    N1 = M1 / e1 - np.eye(2)
    N2 = M2 / e2 - np.eye(2)
    n1, n2 = np.max(np.abs(N1)), np.max(np.abs(N2))
    if max(n1, n2) < tol:
        raise EigenPairingError("both cycle matrices are scalar; no nilpotent datum")
    # common image direction of the nilpotent parts
    big = N1 if n1 >= n2 else N2
    w = np.array([1.0, 0.37], dtype=complex)
    v = big @ w
    if np.linalg.norm(v) < tol * np.max(np.abs(big)):
        w = np.array([-0.41, 1.0], dtype=complex)
        v = big @ w
    vdir = v / np.linalg.norm(v)
    i = int(np.argmax(np.abs(vdir)))
    m1 = (N1 @ w)[i] / vdir[i]
    m2 = (N2 @ w)[i] / vdir[i]
    if abs(m1) < tol * max(abs(m2), 1.0):
        return complex(np.inf), int(e1), int(e2)
    return complex(m2 / m1), int(e1), int(e2)


def classify(params, mono: MonodromyResult, qtol: float = 1e-8):
    """Monodromy classification per the spectral dichotomy.

    Q != 0 at the parameter gives the completely reducible case with data
    (r, s); at a root of Q the datum is D = chi_2/chi_1 computed from the
    cycle integrals of 1/Phi_e on the same contours as the monodromy.
    """
    u = complex(np.asarray(params.sweep_value))
    Q = complex(params.spectral_polynomial_at(u))
    t = params.torus
    try:
        a = abs(params.wp_alpha_target(u))
    except InvalidParameterError:
        a = abs(u) ** 2
    scale = 4.0 * (1.0 + a + max(abs(e) for e in t.e)) ** 3
    if abs(Q) > qtol * scale:
        r, s = canonical_rs(params, mono)
        result = CompletelyReducible(r=r, s=s)
    else:
        if isinstance(params, LameParams):
            D, s1, s2 = noncr_ratio_from_matrices(mono)
        else:
            from .spectral import chi_ratio
            D = chi_ratio(params, z0=mono.z0)
            s1 = 1 if np.real(np.trace(mono.M1)) > 0 else -1
            s2 = 1 if np.real(np.trace(mono.M2)) > 0 else -1
        result = NonCompletelyReducible(D=D, sign1=s1, sign2=s2)
    mono.classification = result
    return result
