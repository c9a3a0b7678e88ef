r"""Spectral sets of Hill's equation along the two torus cycles.

For a sweep family q(z; u) the Hill discriminants Delta_j(u) are entire in
u, and the spectral set sigma_j is the preimage of the real interval [-1, 1].
Arcs are traced by marching squares on the level set Im Delta_j = 0 with the
filter |Re Delta_j| <= 1 applied per segment; this works because Delta_j is
holomorphic, so its zero level set of the imaginary part is a smooth curve
family away from critical points.

For the classical equation with tau on the imaginary axis the spectrum is
real: sigma_1 = (-inf, e2] u [e3, e1] and sigma_2 = [e2, e3] u [e1, +inf).
The generalized sets pull back through u^2 - 2 wp(p), which for real wp(p)
pins them to the real and imaginary axes and yields seven interval regimes
as wp(p) crosses -e1/2, -e3/2, -e2/2.

Finite endpoints of sigma_j are zeros of the spectral polynomial; their
multiplicity d_j = ord(Delta_j^2 - 1) is fitted by the argument principle on
a small circle (an endpoint has odd order, and a double zero of Q at the
origin has d_j = 2, hence is no endpoint).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .elliptic import Torus
from .errors import IntegratorError, InvalidParameterError
from .monodromy import monodromy_sweep, select_base_point

__all__ = [
    "ArcSet",
    "DiscriminantGrid",
    "discriminant_grid",
    "extract_arcs",
    "endpoints",
    "classify_regime",
    "predicted_decomposition",
    "lame_interval_structure",
    "real_axis_spectrum",
    "fit_discriminant_order",
]


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------

@dataclass
class DiscriminantGrid:
    j: int
    re: np.ndarray            # (n,) real parts of u
    im: np.ndarray            # (m,) imaginary parts of u
    delta: np.ndarray         # (m, n) complex Delta_j, row i at im[i]
    valid: np.ndarray         # (m, n) bool
    window: tuple
    z0: complex
    params: object = None     # sweep template, for exact re-evaluation
    rtol: float = 1e-9
    atol: float = 1e-11


def discriminant_grid(params_template, j: int, window=(-4.0, 4.0, -4.0, 4.0),
                      n: int = 161, z0=None, rtol: float = 1e-9,
                      atol: float = 1e-11, chunk_rows: int = 0) -> DiscriminantGrid:
    """Delta_j over a rectangular grid of sweep parameters.

    One batched integration covers the whole grid by default; with
    chunk_rows > 0 the grid is advanced in row blocks (the unit callers may
    distribute over worker processes).  Integrator failures invalidate the
    affected block instead of aborting.
    """
    if j not in (1, 2):
        raise InvalidParameterError("cycle index j must be 1 or 2")
    x0, x1, y0, y1 = window
    re = np.linspace(x0, x1, n)
    im = np.linspace(y0, y1, n)
    U = re[None, :] + 1j * im[:, None]
    if z0 is None:
        z0 = select_base_point(params_template)
    delta = np.full(U.shape, np.nan + 0j)
    valid = np.zeros(U.shape, dtype=bool)
    blocks = [slice(0, n)] if chunk_rows <= 0 else [
        slice(i, min(i + chunk_rows, n)) for i in range(0, n, chunk_rows)]
    for blk in blocks:
        try:
            M1, M2 = monodromy_sweep(params_template, U[blk], z0=z0, rtol=rtol,
                                     atol=atol, cycles=(j,))
            M = M1 if j == 1 else M2
            delta[blk] = np.trace(M, axis1=-2, axis2=-1) / 2.0
            valid[blk] = np.isfinite(delta[blk].real) & np.isfinite(delta[blk].imag)
        except IntegratorError:
            pass
    return DiscriminantGrid(j=j, re=re, im=im, delta=delta, valid=valid,
                            window=tuple(window), z0=complex(z0),
                            params=params_template, rtol=rtol, atol=atol)


# ---------------------------------------------------------------------------
# marching squares on Im Delta with the Re filter
# ---------------------------------------------------------------------------

@dataclass
class ArcSet:
    arcs: list = field(default_factory=list)        # complex polylines
    endpoints: list = field(default_factory=list)   # (u, n_semiarcs) clusters
    unbounded: list = field(default_factory=list)   # per-arc window-boundary flag
    j: int = 1
    window: tuple = ()
    resolution: float = 0.0

    def all_points(self):
        if not self.arcs:
            return np.empty(0, dtype=complex)
        return np.concatenate(self.arcs)


def _locate_crossings(grid: DiscriminantGrid, edges_data, refine_rounds,
                      snap_tol: float = 1e-9):
    """Crossing position and exact Re Delta per edge key.

    Without a sweep template this is plain linear interpolation of the node
    values.  With one, the zero of Im Delta is bracketed by batched bisection
    (treating snapped +0 node values as positive, so axis-borne crossings
    collapse onto their nodes) and Re Delta is taken from a final exact
    evaluation at the located points.
    """
    keys = list(edges_data)
    point_of, re_of = {}, {}
    if not keys:
        return point_of, re_of
    pa = np.array([edges_data[k][0] for k in keys], dtype=complex)
    pb = np.array([edges_data[k][1] for k in keys], dtype=complex)
    va = np.array([edges_data[k][2] for k in keys], dtype=float)
    vb = np.array([edges_data[k][3] for k in keys], dtype=float)

    def sweep_delta(points):
        M1, M2 = monodromy_sweep(grid.params, points, z0=grid.z0,
                                 rtol=grid.rtol, atol=grid.atol,
                                 cycles=(grid.j,))
        M = M1 if grid.j == 1 else M2
        return np.trace(M, axis1=-2, axis2=-1) / 2.0

    if grid.params is None or refine_rounds <= 0:
        ra = np.array([edges_data[k][4] for k in keys], dtype=float)
        rb = np.array([edges_data[k][5] for k in keys], dtype=float)
        t = va / (va - vb)
        pts = pa + t * (pb - pa)
        rvals = ra + t * (rb - ra)
    else:
        ta = np.zeros(len(keys))
        tb = np.ones(len(keys))
        fa, fb = va.copy(), vb.copy()
        for _ in range(refine_rounds):
            tm = 0.5 * (ta + tb)
            dm = sweep_delta(pa + tm * (pb - pa))
            fm = np.where(np.abs(dm.imag) < snap_tol * (1.0 + np.abs(dm)),
                          0.0, dm.imag)
            same_as_a = (fm >= 0.0) == (fa >= 0.0)
            ta = np.where(same_as_a, tm, ta)
            fa = np.where(same_as_a, fm, fa)
            tb = np.where(same_as_a, tb, tm)
            fb = np.where(same_as_a, fb, fm)
        denom = np.where(fa == fb, 1.0, fa - fb)
        t = ta + (fa / denom) * (tb - ta)
        pts = pa + t * (pb - pa)
        rvals = sweep_delta(pts).real
    for k, p, r in zip(keys, pts, rvals):
        point_of[k] = complex(p)
        re_of[k] = float(r)
    return point_of, re_of


def extract_arcs(grid: DiscriminantGrid, snap_tol: float = 1e-9,
                 re_filter_margin: float = 0.0, refine_rounds: int = 2) -> ArcSet:
    """Connected polylines of {Im Delta_j = 0, |Re Delta_j| <= 1} on the grid.

    Node values whose imaginary part is below snap_tol (relative) are snapped
    to +0 so that arcs running exactly along grid lines (the real/imaginary
    axes for real lattice data) extract as one clean polyline instead of
    zigzag fragments.  When the grid carries its sweep template, every edge
    crossing is refined by a few rounds of batched bisection on Im Delta and
    the band filter |Re Delta| <= 1 uses the exactly re-evaluated value;
    linear interpolation alone misplaces crossings (and misjudges the filter)
    where the discriminant is steep.
    """
    re, im, D = grid.re, grid.im, grid.delta
    n_rows, n_cols = D.shape
    w = np.where(np.abs(D.imag) < snap_tol * (1.0 + np.abs(D)), 0.0, D.imag)
    pos = (w >= 0.0)
    redl = D.real
    res = max(re[1] - re[0], im[1] - im[0]) if len(re) > 1 else 0.0

    # unique crossing edges: key -> (pa, pb, imag_a, imag_b, re_a, re_b)
    edges_data = {}

    def note_edge(key, ia, ib, pa, pb):
        if key not in edges_data:
            edges_data[key] = (pa, pb, w[ia], w[ib], redl[ia], redl[ib])
        return key

    raw_segments = []        # pairs of edge keys per cell
    for i in range(n_rows - 1):
        for k in range(n_cols - 1):
            if not (grid.valid[i, k] and grid.valid[i, k + 1]
                    and grid.valid[i + 1, k] and grid.valid[i + 1, k + 1]):
                continue
            corners = (pos[i, k], pos[i, k + 1], pos[i + 1, k + 1], pos[i + 1, k])
            idx = corners[0] * 8 + corners[1] * 4 + corners[2] * 2 + corners[3]
            if idx in (0, 15):
                continue
            cell_edges = []
            if corners[0] != corners[1]:
                cell_edges.append(note_edge(("h", i, k), (i, k), (i, k + 1),
                                            re[k] + 1j * im[i], re[k + 1] + 1j * im[i]))
            if corners[1] != corners[2]:
                cell_edges.append(note_edge(("v", i, k + 1), (i, k + 1), (i + 1, k + 1),
                                            re[k + 1] + 1j * im[i], re[k + 1] + 1j * im[i + 1]))
            if corners[3] != corners[2]:
                cell_edges.append(note_edge(("h", i + 1, k), (i + 1, k), (i + 1, k + 1),
                                            re[k] + 1j * im[i + 1], re[k + 1] + 1j * im[i + 1]))
            if corners[0] != corners[3]:
                cell_edges.append(note_edge(("v", i, k), (i, k), (i + 1, k),
                                            re[k] + 1j * im[i], re[k] + 1j * im[i + 1]))
            if len(cell_edges) == 2:
                raw_segments.append((cell_edges[0], cell_edges[1]))
            elif len(cell_edges) == 4:
                # saddle cell: resolve by the sign of the cell-center value
                center = 0.25 * (w[i, k] + w[i, k + 1] + w[i + 1, k] + w[i + 1, k + 1])
                if (center >= 0) == corners[0]:
                    raw_segments.append((cell_edges[0], cell_edges[3]))
                    raw_segments.append((cell_edges[1], cell_edges[2]))
                else:
                    raw_segments.append((cell_edges[0], cell_edges[1]))
                    raw_segments.append((cell_edges[2], cell_edges[3]))

    point_of, re_of = _locate_crossings(grid, edges_data, refine_rounds)

    lim = 1.0 + re_filter_margin + 1e-12
    kept = [(a, b) for a, b in raw_segments
            if abs(re_of[a]) <= lim and abs(re_of[b]) <= lim]
    kept = [((a, point_of[a]), (b, point_of[b])) for a, b in kept]
    adj = {}
    for seg_id, (a, b) in enumerate(kept):
        adj.setdefault(a[0], []).append((seg_id, 0))
        adj.setdefault(b[0], []).append((seg_id, 1))

    used = np.zeros(len(kept), dtype=bool)
    arcs, open_ends = [], []
    for start_id in range(len(kept)):
        if used[start_id]:
            continue
        chain = _walk_chain(kept, adj, used, start_id)
        pts = np.array([p for p, _ in chain], dtype=complex)
        if len(pts) >= 2:
            arcs.append(pts)
            open_ends.append((chain[0][1], chain[-1][1]))

    x0, x1, y0, y1 = grid.window
    margin = 1.6 * res
    aset = ArcSet(j=grid.j, window=grid.window, resolution=res)

    def on_boundary(u):
        return (abs(u.real - x0) < margin or abs(u.real - x1) < margin
                or abs(u.imag - y0) < margin or abs(u.imag - y1) < margin)

    terminals = []
    for pts, (k0, k1) in zip(arcs, open_ends):
        closed = k0 == k1
        ub = (not closed) and (on_boundary(pts[0]) or on_boundary(pts[-1]))
        aset.arcs.append(pts)
        aset.unbounded.append(bool(ub))
        if not closed:
            for end_pt in (pts[0], pts[-1]):
                if not on_boundary(end_pt):
                    terminals.append(end_pt)
    # cluster arc terminals; an odd number of meeting semiarcs marks an endpoint
    terminals = list(terminals)
    clustered = []
    while terminals:
        seed = terminals.pop()
        members = [seed]
        rest = []
        for q in terminals:
            (members if abs(q - seed) <= 2.0 * res else rest).append(q)
        terminals = rest
        clustered.append((np.mean(members), len(members)))
    aset.endpoints = [(complex(u), int(c)) for u, c in clustered if c % 2 == 1]
    for u, c in clustered:
        if c > 1:
            warnings.warn(
                f"{c} semiarcs meet within one cell of {u:.4g}; the grid "
                "resolution may be too coarse to separate endpoints",
                RuntimeWarning, stacklevel=2)
    return aset


def _walk_chain(kept, adj, used, start_id):
    a, b = kept[start_id]
    used[start_id] = True
    chain = [(a[1], a[0]), (b[1], b[0])]
    # extend forward from b then backward from a
    for head in (True, False):
        while True:
            key = chain[-1][1] if head else chain[0][1]
            nxt = [(sid, side) for sid, side in adj.get(key, []) if not used[sid]]
            if not nxt:
                break
            sid, side = nxt[0]
            used[sid] = True
            other = kept[sid][1 - side]
            if head:
                chain.append((other[1], other[0]))
            else:
                chain.insert(0, (other[1], other[0]))
    return chain


# ---------------------------------------------------------------------------
# closed-form endpoints and interval regimes
# ---------------------------------------------------------------------------

def endpoints(torus: Torus, p: complex, tol: float = 1e-9):
    """Finite spectral-set endpoints of the non-even family through p.

    The candidates are the six roots +-sqrt(2 wp(p) + e_k) of Q; a double
    root at the origin (2 wp(p) = -e_k) is excluded since an even-order zero
    of Delta^2 - 1 is not an arc endpoint.  Returns (endpoint list,
    excluded origin flag).
    """
    a = 2.0 * complex(torus.wp(p))
    eps, origin_double = [], False
    for ek in torus.e:
        root2 = a + ek
        if abs(root2) < tol * (1.0 + abs(a)):
            origin_double = True
            continue
        r = np.sqrt(root2)
        eps.extend([complex(r), complex(-r)])
    return eps, origin_double


_LAME_SIGMA = {
    1: ((-np.inf, "e2"), ("e3", "e1")),
    2: (("e2", "e3"), ("e1", np.inf)),
}


def lame_interval_structure(torus: Torus, j: int):
    """sigma_tilde_j of the classical equation for tau on the imaginary axis,
    as a list of real intervals (lo, hi) with +-inf allowed."""
    names = {"e1": torus.e1.real, "e2": torus.e2.real, "e3": torus.e3.real}
    out = []
    for lo, hi in _LAME_SIGMA[j]:
        out.append((names.get(lo, lo) if isinstance(lo, str) else lo,
                    names.get(hi, hi) if isinstance(hi, str) else hi))
    return out


def predicted_decomposition(torus: Torus, wp_p: float, j: int):
    """Pull the classical intervals back through u^2 - 2 wp(p), for real wp(p).

    Returns intervals on the two axes as tuples (axis, lo, hi) with axis in
    {"re", "im"}; "im" intervals are in the imaginary coordinate.  Symmetric
    pairs are merged through the origin when they touch it.
    """
    a = 2.0 * float(wp_p)
    out = []
    for lo, hi in lame_interval_structure(torus, j):
        # Btilde = u^2 - a in [lo, hi]  <=>  u^2 in [lo + a, hi + a]
        lo_t = -np.inf if lo == -np.inf else lo + a
        hi_t = np.inf if hi == np.inf else hi + a
        r_lo, r_hi = max(0.0, lo_t), hi_t
        if r_hi > r_lo >= 0.0:
            u, v = np.sqrt(r_lo), np.sqrt(r_hi) if r_hi != np.inf else np.inf
            if u == 0.0:
                out.append(("re", -v, v))
            else:
                out.append(("re", u, v))
                out.append(("re", -v, -u))
        # imaginary axis: -(y^2) in [lo_t, hi_t]
        i_lo, i_hi = max(0.0, -hi_t if hi_t != np.inf else 0.0), \
            (np.inf if lo_t == -np.inf else -lo_t)
        if i_hi > i_lo >= 0.0:
            u, v = np.sqrt(i_lo), np.sqrt(i_hi) if i_hi != np.inf else np.inf
            if u == 0.0:
                out.append(("im", -v, v))
            else:
                out.append(("im", u, v))
                out.append(("im", -v, -u))
    return out


def classify_regime(torus: Torus, wp_p: float, boundary_tol: float = 1e-9):
    """Regime index 1..7 for tau in i R and real wp(p), plus the predicted
    sigma_1 decomposition; thresholds within boundary_tol route to the
    degenerate regimes 2, 4, 6."""
    if abs(torus.tau.real) > 1e-12:
        raise InvalidParameterError("regime classification requires tau in i R_{>0}")
    wp_p = float(wp_p)
    th1, th3, th2 = -torus.e1.real / 2.0, -torus.e3.real / 2.0, -torus.e2.real / 2.0
    # ordering: -e1/2 < -e3/2 < -e2/2
    if abs(wp_p - th1) <= boundary_tol:
        regime = 2
    elif abs(wp_p - th3) <= boundary_tol:
        regime = 4
    elif abs(wp_p - th2) <= boundary_tol:
        regime = 6
    elif wp_p < th1:
        regime = 1
    elif wp_p < th3:
        regime = 3
    elif wp_p < th2:
        regime = 5
    else:
        regime = 7
    return regime, predicted_decomposition(torus, wp_p, 1)


# ---------------------------------------------------------------------------
# real-axis sweeps and endpoint refinement
# ---------------------------------------------------------------------------

def real_axis_spectrum(params_template, j: int, window, n: int = 161,
                       axis: str = "re", z0=None, rtol: float = 1e-10,
                       atol: float = 1e-12, refine_iters: int = 40):
    """Spectral intervals along the real or imaginary parameter axis.

    Sweeps Delta_j over the axis segment, finds sign changes of |Delta_j| - 1
    and refines every interval endpoint by batched bisection.  Returns
    (intervals, us, deltas) where intervals is a list of (lo, hi) in the axis
    coordinate; window ends inside the spectrum produce half-open intervals
    reported with the window end as the numeric bound.
    """
    lo, hi = window
    ts = np.linspace(lo, hi, n)
    us = ts if axis == "re" else 1j * ts
    if z0 is None:
        z0 = select_base_point(params_template)
    M1, M2 = monodromy_sweep(params_template, us, z0=z0, rtol=rtol, atol=atol,
                             cycles=(j,))
    M = M1 if j == 1 else M2
    deltas = np.trace(M, axis1=-2, axis2=-1) / 2.0
    inside = np.abs(deltas.real) <= 1.0

    # bracket all structure changes
    flips = np.nonzero(inside[:-1] != inside[1:])[0]
    a_br = ts[flips].astype(float)
    b_br = ts[flips + 1].astype(float)
    if len(flips):
        for _ in range(refine_iters):
            mid = 0.5 * (a_br + b_br)
            um = mid if axis == "re" else 1j * mid
            Mm1, Mm2 = monodromy_sweep(params_template, um, z0=z0, rtol=rtol,
                                       atol=atol, cycles=(j,))
            Mm = Mm1 if j == 1 else Mm2
            dm = np.trace(Mm, axis1=-2, axis2=-1) / 2.0
            in_m = np.abs(dm.real) <= 1.0
            take_a = in_m == inside[flips]
            a_br = np.where(take_a, mid, a_br)
            b_br = np.where(take_a, b_br, mid)
    cross = 0.5 * (a_br + b_br)

    intervals = []
    bounds = list(cross)
    state = bool(inside[0])
    start = ts[0] if state else None
    for c in bounds:
        if state:
            intervals.append((float(start), float(c)))
            state = False
        else:
            start = c
            state = True
    if state:
        intervals.append((float(start), float(ts[-1])))
    return intervals, us, deltas


def fit_discriminant_order(params_template, u0: complex, radius: float = 1e-2,
                           n_points: int = 64, z0=None, rtol: float = 1e-10,
                           atol: float = 1e-12):
    """Order of Delta_j^2 - 1 at u0 for j = 1, 2, by the argument principle.

    Windings of Delta_j^2 - 1 along the circle of the given radius are
    counted from the unwrapped phase; the result is rounded to an integer and
    a non-integer winding (drift above 0.1) raises IntegratorError.
    """
    th = 2.0 * np.pi * np.arange(n_points + 1) / n_points
    us = u0 + radius * np.exp(1j * th)
    M1, M2 = monodromy_sweep(params_template, us, z0=z0, rtol=rtol, atol=atol)
    orders = {}
    for j, M in ((1, M1), (2, M2)):
        f = (np.trace(M, axis1=-2, axis2=-1) / 2.0) ** 2 - 1.0
        ph = np.unwrap(np.angle(f))
        wind = (ph[-1] - ph[0]) / (2.0 * np.pi)
        if abs(wind - np.round(wind)) > 0.1:
            raise IntegratorError(f"non-integer winding {wind:.3f} for cycle {j}")
        orders[j] = int(np.round(wind))
    return orders
