"""Figure rendering for traced spectral sets and blow-up configurations.

Opt-in companion to the CLI's data output: the report path can render a PNG
next to the CSV/JSON artifact.  Uses the Agg backend so it works headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

ARC_COLORS = {1: "tab:blue", 2: "tab:red"}


def plot_arc_sets(arc_sets, path, title=None, endpoints_closed_form=None):
    """Spectral arcs in the parameter plane, one color per cycle index."""
    fig, ax = plt.subplots(figsize=(6.0, 6.0))
    seen = set()
    for aset in arc_sets:
        color = ARC_COLORS.get(aset.j, "tab:gray")
        label = f"sigma_{aset.j}" if aset.j not in seen else None
        seen.add(aset.j)
        for k, arc in enumerate(aset.arcs):
            ax.plot(arc.real, arc.imag, "-", lw=1.4, color=color,
                    label=label if k == 0 else None)
        for u, _ in aset.endpoints:
            ax.plot(u.real, u.imag, "o", ms=5, mfc="black", mec="black")
    if endpoints_closed_form:
        for u in endpoints_closed_form:
            ax.plot(u.real, u.imag, "x", ms=7, color="k", mew=1.2)
    ax.axhline(0.0, color="0.85", lw=0.6, zorder=0)
    ax.axvline(0.0, color="0.85", lw=0.6, zorder=0)
    ax.set_xlabel("Re T")
    ax.set_ylabel("Im T")
    if title:
        ax.set_title(title)
    if seen:
        ax.legend(loc="upper right", fontsize=9)
    ax.set_aspect("equal")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_blowup(torus, configs, path, p_star_point=None, title=None):
    """Blow-up points on the fundamental cell for one or more configurations."""
    fig, ax = plt.subplots(figsize=(6.0, 6.0))
    tau = torus.tau
    cell = [0.0, 1.0, 1.0 + tau, tau, 0.0]
    ax.plot([c.real for c in cell], [c.imag for c in cell], "-", color="0.7", lw=1.0)
    for cfg in configs:
        ax.plot(cfg.p.real, cfg.p.imag, "s", color="k", ms=6, label="p")
        for pts, color, lab in ((cfg.points_plus, "tab:green", "beta -> +inf"),
                                (cfg.points_minus, "tab:purple", "beta -> -inf")):
            for a in pts:
                ax.plot(a.real, a.imag, "o", color=color, ms=6, label=lab)
                lab = None
        sg = cfg.sg
        ax.plot(sg.real, sg.imag, "*", color="tab:orange", ms=10, label="sg = r + s tau")
    if p_star_point is not None:
        ax.plot(p_star_point.real, p_star_point.imag, "D", color="tab:cyan",
                ms=7, label="p*")
    handles, labels = ax.get_legend_handles_labels()
    uniq = dict(zip(labels, handles))
    ax.legend(uniq.values(), uniq.keys(), loc="upper left", fontsize=8)
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")
    if title:
        ax.set_title(title)
    ax.set_aspect("equal")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
