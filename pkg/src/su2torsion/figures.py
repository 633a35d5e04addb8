"""Report figures for the CLI.

Matplotlib is imported lazily inside the render functions so the numeric
modules never pay for (or depend on) a plotting backend; the CLI report
path writes these PNGs next to its CSV/JSON output.
"""

from __future__ import annotations

import numpy as np


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def render_f_of_s(s, f, path, period=None, zeros=()):
    """Plot the middle-coefficient function f(s) = tr rho_s(mu)."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.0, 3.4))
    ax.plot(s, f, lw=1.2, color="tab:blue")
    if period is not None:
        # close the periodic curve visually
        ax.plot([s[-1], period], [f[-1], f[0]], lw=1.2, color="tab:blue")
        ax.set_xlim(0.0, period)
    ax.axhline(0.0, color="0.6", lw=0.6)
    for z in zeros:
        ax.axvline(z, color="tab:red", lw=0.8, ls="--")
    ax.set_xlabel("arc length s")
    ax.set_ylabel("f(s)")
    ax.set_title("middle torsion coefficient along the circle")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_circle(fingerprints, path, marked=()):
    """Plot the traced circle in character coordinates (tr x, tr xy)."""
    plt = _pyplot()
    fp = np.asarray(fingerprints)
    fig, ax = plt.subplots(figsize=(4.6, 4.4))
    ax.plot(np.append(fp[:, 0], fp[0, 0]), np.append(fp[:, 2], fp[0, 2]),
            lw=1.0, color="tab:blue")
    if len(marked):
        mk = np.asarray(marked)
        ax.plot(mk[:, 0], mk[:, 2], "o", ms=5, color="tab:red",
                label="iota-fixed")
        ax.legend(loc="best", fontsize=8)
    ax.set_xlabel("tr rho(x)")
    ax.set_ylabel("tr rho(xy)")
    ax.set_title("representation circle")
    ax.set_aspect("equal", adjustable="datalim")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
