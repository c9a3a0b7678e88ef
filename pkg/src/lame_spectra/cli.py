"""Command-line front end.

Subcommands mirror the library: torus, monodromy, equiv-check, spectral-set,
endpoints, premodular-zero, blowup, plus `run --config` to re-execute a saved
config or a previously written artifact (whose provenance block embeds its
config).  Output is deterministic for a fixed config: no randomness, fixed
grid orders, 17-significant-digit serialization.

Exit codes: 0 success, 2 config error, 3 numerical failure; errors are
mirrored as JSON on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from ._serialize import config_hash, dump_csv, dump_json, encode
from .elliptic import invert_wp, torus_init
from .equivalence import verify_trace_equivalence
from .errors import InvalidParameterError, LameSpectraError
from .metrics import blowup_sets, p_star, premodular_zero_tau
from .monodromy import (CompletelyReducible, classify, integrate_monodromy,
                        monodromy_sweep, select_base_point)
from .potentials import Branch, LameParams, make_apparent
from .spectral_sets import (DiscriminantGrid, classify_regime, endpoints,
                            extract_arcs)

EXIT_CONFIG = 2
EXIT_NUMERIC = 3


class ConfigError(Exception):
    pass


def _parse_complex(text, name):
    try:
        parts = [float(x) for x in str(text).split(",")]
    except ValueError:
        raise ConfigError(f"{name}: expected RE or RE,IM, got {text!r}") from None
    if len(parts) == 1:
        return complex(parts[0], 0.0)
    if len(parts) == 2:
        return complex(parts[0], parts[1])
    raise ConfigError(f"{name}: expected RE or RE,IM, got {text!r}")


def _cpx(value):
    """Config-side complex: [re, im] list or number."""
    if isinstance(value, (list, tuple)):
        return complex(value[0], value[1])
    return complex(value)


def _pair(z):
    z = complex(z)
    return [z.real, z.imag]


def _matrix(M):
    return [[_pair(M[0, 0]), _pair(M[0, 1])], [_pair(M[1, 0]), _pair(M[1, 1])]]


# ---------------------------------------------------------------------------
# command implementations: cfg dict -> (result dict, csv rows or None, header)
# ---------------------------------------------------------------------------

def _resolve_p(cfg, torus):
    if cfg.get("p") is not None:
        return _cpx(cfg["p"])
    if cfg.get("wp_p") is not None:
        return invert_wp(torus, _cpx(cfg["wp_p"]))
    raise ConfigError("either p or wp-p is required for this command")


def _cmd_torus(cfg):
    t = torus_init(_cpx(cfg["tau"]))
    result = {
        "tau": t.tau, "nome": t.q,
        "e1": t.e1, "e2": t.e2, "e3": t.e3,
        "eta1": t.eta1, "eta2": t.eta2,
        "g2": t.g2, "g3": t.g3,
        "legendre_residual": abs(t.tau * t.eta1 - t.eta2 - 2j * np.pi),
    }
    return result, None, None


def _cmd_monodromy(cfg):
    t = torus_init(_cpx(cfg["tau"]))
    if cfg.get("Btilde") is not None:
        params = LameParams(torus=t, Btilde=_cpx(cfg["Btilde"]))
    else:
        p = _resolve_p(cfg, t)
        if cfg.get("A") is not None:
            params = make_apparent(t, p, Branch.EVEN, _cpx(cfg["A"]))
        elif cfg.get("T") is not None:
            params = make_apparent(t, p, Branch.NONEVEN, _cpx(cfg["T"]))
        else:
            raise ConfigError("monodromy needs one of T, A (with p) or Btilde")
    tol = float(cfg.get("tol") or 1e-10)
    mono = integrate_monodromy(params, rtol=tol, atol=tol * 1e-2)
    cls = classify(params, mono)
    if isinstance(cls, CompletelyReducible):
        cls_doc = {"type": "completely-reducible", "r": cls.r, "s": cls.s}
    else:
        cls_doc = {"type": "non-completely-reducible", "D": cls.D,
                   "sign1": cls.sign1, "sign2": cls.sign2}
    result = {
        "M1": _matrix(mono.M1), "M2": _matrix(mono.M2),
        "delta1": mono.delta1, "delta2": mono.delta2,
        "base_point": mono.z0, "classification": cls_doc,
    }
    return result, None, None


def _cmd_equiv_check(cfg):
    t = torus_init(_cpx(cfg["tau"]))
    p = _resolve_p(cfg, t)
    T = _cpx(cfg["T"])
    tol = float(cfg.get("tol") or 1e-10)
    rep = verify_trace_equivalence(t, p, T, rtol=tol, atol=tol * 1e-2)
    result = {
        "T": T, "Btilde": T * T - 2.0 * complex(t.wp(p)),
        "delta_gle": list(rep.delta_gle), "delta_lame": list(rep.delta_lame),
        "max_trace_error": rep.max_error,
    }
    return result, None, None


def _sweep_rows(args):
    params, j, u_rows, z0, rtol, atol = args
    M1, M2 = monodromy_sweep(params, u_rows, z0=z0, rtol=rtol, atol=atol,
                             cycles=(j,))
    M = M1 if j == 1 else M2
    return np.trace(M, axis1=-2, axis2=-1) / 2.0


def _compute_grid(params, j, window, n, threads, rtol, atol):
    x0, x1, y0, y1 = window
    re = np.linspace(x0, x1, n)
    im = np.linspace(y0, y1, n)
    U = re[None, :] + 1j * im[:, None]
    z0 = select_base_point(params)
    if threads <= 1:
        delta = _sweep_rows((params, j, U, z0, rtol, atol))
    else:
        blocks = np.array_split(np.arange(n), threads)
        jobs = [(params, j, U[blk], z0, rtol, atol) for blk in blocks if len(blk)]
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(_sweep_rows, jobs))
        delta = np.concatenate(parts, axis=0)
    valid = np.isfinite(delta.real) & np.isfinite(delta.imag)
    return DiscriminantGrid(j=j, re=re, im=im, delta=delta, valid=valid,
                            window=tuple(window), z0=complex(z0),
                            params=params, rtol=rtol, atol=atol)


def _cmd_spectral_set(cfg):
    t = torus_init(_cpx(cfg["tau"]))
    j = int(cfg.get("j") or 1)
    if j not in (1, 2):
        raise ConfigError("j must be 1 or 2")
    window = tuple(float(x) for x in (cfg.get("window") or (-4.0, 4.0, -4.0, 4.0)))
    if len(window) != 4:
        raise ConfigError("window must be four numbers: re_min,re_max,im_min,im_max")
    n = int(cfg.get("resolution") or 161)
    tol = float(cfg.get("tol") or 1e-9)
    threads = int(cfg.get("threads") or 1)
    regime_doc = None
    if cfg.get("lame"):
        params = LameParams(torus=t, Btilde=0.0)
        wp_p = None
    else:
        p = _resolve_p(cfg, t)
        params = make_apparent(t, p, Branch.NONEVEN, 0.0)
        wp_p = complex(t.wp(p))
        if abs(t.tau.real) < 1e-12 and abs(wp_p.imag) < 1e-9:
            regime, decomposition = classify_regime(t, wp_p.real)
            regime_doc = {
                "regime": regime,
                "wp_p": wp_p,
                "thresholds": [-t.e1.real / 2.0, -t.e3.real / 2.0, -t.e2.real / 2.0],
                "predicted_sigma1": [
                    {"axis": ax, "lo": lo if np.isfinite(lo) else "inf",
                     "hi": hi if np.isfinite(hi) else "inf"}
                    for ax, lo, hi in decomposition],
            }
    grid = _compute_grid(params, j, window, n, threads, tol, tol * 1e-2)
    aset = extract_arcs(grid)
    result = {
        "j": j, "window": list(window), "resolution_cells": n,
        "cell_size": aset.resolution,
        "arcs": [[_pair(u) for u in arc] for arc in aset.arcs],
        "unbounded": aset.unbounded,
        "arc_endpoints": [{"T": u, "semiarcs": c} for u, c in aset.endpoints],
    }
    if not cfg.get("lame"):
        eps, origin_double = endpoints(t, p)
        result["closed_form_endpoints"] = eps
        result["origin_double_root_excluded"] = origin_double
    if regime_doc is not None:
        result["regime"] = regime_doc
    rows = []
    for arc_id, arc in enumerate(aset.arcs):
        for k, u in enumerate(arc):
            rows.append((j, arc_id, k, u.real, u.imag))
    header = ("j", "arc_id", "point_index", "T_re", "T_im")
    if cfg.get("plot"):
        from .plotting import plot_arc_sets
        plot_arc_sets([aset], cfg["plot"],
                      title=f"spectral set sigma_{j}, tau = {t.tau}")
    return result, rows, header


def _cmd_endpoints(cfg):
    t = torus_init(_cpx(cfg["tau"]))
    p = _resolve_p(cfg, t)
    eps, origin_double = endpoints(t, p)
    result = {
        "wp_p": complex(t.wp(p)),
        "endpoints": [{"T": u, "multiplicity": 1} for u in eps],
        "origin_double_root_excluded": origin_double,
    }
    rows = [(u.real, u.imag, 1) for u in eps]
    return result, rows, ("T_re", "T_im", "multiplicity")


def _cmd_premodular_zero(cfg):
    r, s = float(cfg["r"]), float(cfg["s"])
    tau0 = _cpx(cfg["tau0"]) if cfg.get("tau0") is not None else 0.45 + 1.0j
    zero = premodular_zero_tau(r, s, tau0=tau0)
    ps = p_star(zero)
    result = {
        "r": r, "s": s, "tau": zero.tau, "Z_residual": zero.residual,
        "newton_iterations": zero.iterations, "p_star": ps,
        "wp_p_star": complex(zero.torus.wp(ps)),
    }
    return result, None, None


def _cmd_blowup(cfg):
    r, s = float(cfg["r"]), float(cfg["s"])
    tau0 = _cpx(cfg["tau0"]) if cfg.get("tau0") is not None else 0.45 + 1.0j
    zero = premodular_zero_tau(r, s, tau0=tau0)
    t = zero.torus
    sg = r + s * t.tau
    ps = p_star(zero)
    p_list = [_cpx(p) for p in (cfg.get("p_list") or [])]
    if cfg.get("p") is not None:
        p_list.append(_cpx(cfg["p"]))
    if cfg.get("wp_p") is not None:
        p_list.append(invert_wp(t, _cpx(cfg["wp_p"])))
    if not p_list:
        raise ConfigError("blowup needs at least one singularity position p")
    configs = []
    cfg_objs = []
    for p in p_list:
        bc = blowup_sets(t, p, sg)
        cfg_objs.append(bc)
        doc = {
            "p": p, "plus_set": list(bc.plus_set), "minus_set": list(bc.minus_set),
            "delta_plus": bc.delta_plus, "delta_minus": bc.delta_minus,
            "ambiguous_inner_root": bc.ambiguous_inner_root,
            "consistent": bc.consistent,
        }
        residuals = {}
        from .metrics import green_critical_residual
        for side, pts in (("plus", bc.points_plus), ("minus", bc.points_minus)):
            if pts:
                try:
                    r22, r23, det_err = green_critical_residual(t, p, pts[0], pts[1])
                    residuals[side] = {"res22": r22, "res23": r23, "det_error": det_err}
                except LameSpectraError as exc:
                    residuals[side] = {"skipped": str(exc)}
        doc["residuals"] = residuals
        doc["points_plus"] = list(bc.points_plus)
        doc["points_minus"] = list(bc.points_minus)
        configs.append(doc)
    result = {"r": r, "s": s, "tau": t.tau, "p_star": ps, "configs": configs}
    if cfg.get("plot"):
        from .plotting import plot_blowup
        plot_blowup(t, cfg_objs, cfg["plot"], p_star_point=ps,
                    title=f"blow-up configuration, (r, s) = ({r}, {s})")
    return result, None, None


_COMMANDS = {
    "torus": _cmd_torus,
    "monodromy": _cmd_monodromy,
    "equiv-check": _cmd_equiv_check,
    "spectral-set": _cmd_spectral_set,
    "endpoints": _cmd_endpoints,
    "premodular-zero": _cmd_premodular_zero,
    "blowup": _cmd_blowup,
}


# ---------------------------------------------------------------------------
# argument parsing and dispatch
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _fail(EXIT_CONFIG, "config", message)


def _fail(code, kind, message):
    sys.stderr.write(json.dumps({"error": {"type": kind, "message": message}}) + "\n")
    raise SystemExit(code)


def _build_parser():
    ap = _Parser(prog="lame-spectra",
                 description="Monodromy, spectral sets, and blow-up data for "
                             "Lame-type equations on complex tori.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, *, tau=True):
        if tau:
            p.add_argument("--tau", required=True, help="torus modulus RE,IM")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--tol", type=float, help="integration tolerance")
        p.add_argument("--threads", type=int,
                       help="worker processes (fallback: LAME_SPECTRA_THREADS)")

    p = sub.add_parser("torus", help="lattice invariants")
    common(p)

    p = sub.add_parser("monodromy", help="monodromy matrices and classification")
    common(p)
    p.add_argument("--p", help="singularity position RE,IM")
    p.add_argument("--wp-p", dest="wp_p", help="wp(p); inverted on the torus")
    p.add_argument("--T", help="non-even branch parameter RE,IM")
    p.add_argument("--A", help="even branch parameter RE,IM")
    p.add_argument("--Btilde", help="classical Lame parameter RE,IM")

    p = sub.add_parser("equiv-check", help="trace equivalence of the two equations")
    common(p)
    p.add_argument("--p", help="singularity position RE,IM")
    p.add_argument("--wp-p", dest="wp_p", help="wp(p); inverted on the torus")
    p.add_argument("--T", required=True, help="non-even branch parameter RE,IM")

    p = sub.add_parser("spectral-set", help="trace sigma_j arcs in the parameter plane")
    common(p)
    p.add_argument("--p", help="singularity position RE,IM")
    p.add_argument("--wp-p", dest="wp_p", help="wp(p); inverted on the torus")
    p.add_argument("--j", type=int, choices=(1, 2), required=True)
    p.add_argument("--window", help="re_min,re_max,im_min,im_max (default -4,4,-4,4)")
    p.add_argument("--resolution", type=int, help="grid points per axis (default 161)")
    p.add_argument("--lame", action="store_true",
                   help="sweep the classical Btilde plane instead")
    p.add_argument("--plot", metavar="PNG", help="also render the arcs to a figure")

    p = sub.add_parser("endpoints", help="closed-form spectral endpoints")
    common(p)
    p.add_argument("--p", help="singularity position RE,IM")
    p.add_argument("--wp-p", dest="wp_p", help="wp(p); inverted on the torus")

    p = sub.add_parser("premodular-zero", help="tau with Z(r, s, tau) = 0")
    common(p, tau=False)
    p.add_argument("--r", required=True, type=float)
    p.add_argument("--s", required=True, type=float)
    p.add_argument("--tau0", help="Newton start RE,IM")

    p = sub.add_parser("blowup", help="blow-up sets at a premodular zero")
    common(p, tau=False)
    p.add_argument("--r", required=True, type=float)
    p.add_argument("--s", required=True, type=float)
    p.add_argument("--tau0", help="Newton start RE,IM")
    p.add_argument("--p", action="append", dest="p_list",
                   help="singularity position RE,IM (repeatable)")
    p.add_argument("--wp-p", dest="wp_p", help="wp(p); inverted on the torus")
    p.add_argument("--plot", metavar="PNG", help="also render the configuration")

    p = sub.add_parser("run", help="re-run a saved config or artifact")
    p.add_argument("--config", required=True, help="config or artifact JSON path")
    return ap


def _args_to_config(args):
    cfg = {"command": args.command}
    for key in ("tau", "p", "wp_p", "T", "A", "Btilde", "tau0", "window"):
        val = getattr(args, key, None)
        if val is not None:
            if key == "window":
                parts = [float(x) for x in val.split(",")]
                cfg[key] = parts
            else:
                cfg[key] = _pair(_parse_complex(val, key))
    for key in ("r", "s", "tol"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = float(val)
    for key in ("j", "resolution"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = int(val)
    if getattr(args, "p_list", None):
        cfg["p_list"] = [_pair(_parse_complex(x, "p")) for x in args.p_list]
    if getattr(args, "lame", False):
        cfg["lame"] = True
    if getattr(args, "plot", None):
        cfg["plot"] = args.plot
    threads = getattr(args, "threads", None)
    if threads is None:
        threads = os.environ.get("LAME_SPECTRA_THREADS")
    if threads is not None:
        cfg["threads"] = int(threads)
    if getattr(args, "out", None):
        cfg["out"] = args.out
    fmt = getattr(args, "format", None)
    if fmt:
        cfg["format"] = fmt
    return cfg


def run_config(cfg):
    """Execute a config dict; returns the rendered artifact text."""
    command = cfg.get("command")
    if command not in _COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    fmt = cfg.get("format", "json")
    if fmt not in ("json", "csv"):
        raise ConfigError(f"unknown format {fmt!r}")
    if cfg.get("tol") is not None and not float(cfg["tol"]) > 0:
        raise ConfigError("tol must be positive")
    if cfg.get("resolution") is not None and int(cfg["resolution"]) < 3:
        raise ConfigError("resolution must be at least 3 grid points")
    result, rows, header = _COMMANDS[command](cfg)
    prov = {"command": command, "config": cfg,
            "config_hash": config_hash(cfg), "version": __version__}
    if fmt == "json":
        text = dump_json(encode({"provenance": prov, "result": result})) + "\n"
    else:
        if rows is None:
            raise ConfigError(f"command {command!r} has no CSV representation")
        head = (f"# command={command} config_hash={prov['config_hash']} "
                f"version={__version__}\n")
        text = head + dump_csv(rows, header)
    return text


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            with open(args.config, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
            cfg = doc.get("provenance", {}).get("config", doc)
            if "command" not in cfg:
                raise ConfigError(f"{args.config}: neither a config nor an artifact")
        else:
            cfg = _args_to_config(args)
        text = run_config(cfg)
    except ConfigError as exc:
        _fail(EXIT_CONFIG, "config", str(exc))
    except InvalidParameterError as exc:
        _fail(EXIT_CONFIG, "invalid-parameter", str(exc))
    except LameSpectraError as exc:
        _fail(EXIT_NUMERIC, type(exc).__name__, str(exc))
    out = cfg.get("out")
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
