"""Summary figure for a finished run (phantom, reconstruction, traces)."""

from __future__ import annotations

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

# compact single-figure style, independent of the user's rcParams
STYLE = {
    "font.size": 8,
    "axes.titlesize": 9,
    "axes.labelsize": 8,
    "xtick.labelsize": 7,
    "ytick.labelsize": 7,
    "lines.linewidth": 1.0,
}


def _image(ax, field, lo, hi, title):
    g = field.spec
    im = ax.imshow(field.values.T, origin="lower", cmap="gray", vmin=lo, vmax=hi,
                   extent=(g.x_min, g.x_max, g.y_min, g.y_max))
    ax.set_title(title)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    return im


def render_summary(report, path, dpi: int = 120) -> None:
    """Write a PNG with the phantom, the reconstruction and the sweep traces."""
    import matplotlib

    with matplotlib.rc_context(STYLE):
        fig = Figure(figsize=(10.5, 3.2))
        FigureCanvasAgg(fig)
        axes = fig.subplots(1, 3)
        ph, rec = report.phantom, report.x
        lo = float(min(ph.values.min(), rec.values.min()))
        hi = float(max(ph.values.max(), rec.values.max()))
        _image(axes[0], ph, lo, hi, "phantom")
        im = _image(axes[1], rec, lo, hi, f"reconstruction (n = {report.n_delta})")
        fig.colorbar(im, ax=axes[1], fraction=0.046, pad=0.04)

        ax = axes[2]
        sweeps = np.arange(len(report.residual_sums))
        ax.semilogy(sweeps, np.maximum(report.residual_sums, 1e-300), label="R_n")
        if report.bregman:
            ax.semilogy(np.arange(len(report.bregman)), np.maximum(report.bregman, 1e-300),
                        label="Bregman distance")
        thr = report.residual_target
        if thr > 0:
            ax.axhline(thr, color="0.5", linestyle="--", label="N (tau delta)^p")
        ax.set_xlabel("sweep")
        ax.set_title(report.status)
        ax.legend(frameon=False)
        fig.tight_layout()
        fig.savefig(path, dpi=dpi)
