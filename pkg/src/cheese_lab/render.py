"""Static SVG output (plan drawings and convergence plots)."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.patches import Circle, Wedge  # noqa: E402

from .builder import MCKISSICK, THM14, CheesePlan  # noqa: E402

FAMILY_COLORS = {MCKISSICK: "#c0392b", "strong-regularity": "#2471a3"}


def _save(fig, path) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with plt.rc_context({"svg.hashsalt": "cheese-lab", "svg.fonttype": "none"}):
        fig.savefig(p, format="svg", metadata={"Date": None})
    plt.close(fig)
    return p


def render_plan(plan: CheesePlan, path) -> Path:
    """Holes coloured by family, working shells shaded, and the target (point 1 or Lambda)."""
    fig, ax = plt.subplots(figsize=(6, 6))
    ax.add_patch(Circle((0, 0), plan.outer.radius, fill=False, lw=1.0, color="black"))
    for fam in plan.families:
        if fam.status != "placed" or fam.family_type != MCKISSICK:
            continue
        c = fam.center
        ax.add_patch(Wedge((c.real, c.imag), fam.radius, 0, 360, width=fam.placed_eps,
                           color="#f5b7b1", alpha=0.5, lw=0))
    for h in plan.holes:
        c = h.disc.center
        ax.add_patch(Circle((c.real, c.imag), h.disc.radius, color=FAMILY_COLORS.get(h.family_type, "gray"),
                            lw=0.3))
    if plan.mode == THM14:
        ax.plot([1.0], [0.0], marker="*", color="#1e8449", ms=12, label="point 1")
    elif plan.lambda_set is not None:
        for i, arc in enumerate(plan.lambda_set.arcs):
            t = np.linspace(arc.theta_start, arc.theta_end, 200)
            ax.plot(np.cos(t), np.sin(t), color="#1e8449", lw=3, label="Lambda" if i == 0 else None)
    for ftype, color in FAMILY_COLORS.items():
        ax.plot([], [], "o", color=color, label=ftype)
    ax.set_xlim(-1.15, 1.15)
    ax.set_ylim(-1.15, 1.15)
    ax.set_aspect("equal")
    ax.legend(loc="lower left", fontsize=7)
    ax.set_title(f"{plan.mode}: {len(plan.holes)} holes, radius sum {plan.radius_sum:.3g}")
    return _save(fig, path)


def render_convergence(series: dict[str, list[tuple[int, float]]], path, floor: float = 1e-18) -> Path:
    """Log-scale residual against truncation ``n``; one line per series."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label in sorted(series):
        pts = sorted(series[label])
        if not pts:
            continue
        n, res = zip(*pts)
        ax.semilogy(n, np.maximum(np.asarray(res, dtype=float), floor), marker="o", label=label)
    ax.set_xlabel("truncation n")
    ax.set_ylabel("relative residual")
    if series:
        ax.legend(fontsize=7)
    return _save(fig, path)
