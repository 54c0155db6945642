"""PNG companions for the landscape and verify-expansion tables."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def landscape_figure(s, t, values, path, title=None):
    """Filled contours of F on the (s, t) grid; NaN cells are left blank."""
    s = np.asarray(s)
    t = np.asarray(t)
    F = np.asarray(values, float)
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    if F.size > 1 and s.size > 1 and t.size > 1:
        # clip the repulsive spikes so the saddle stays readable
        lo, hi = np.nanpercentile(F, [1, 95])
        cs = ax.contourf(s, t, np.clip(F, lo, hi).T, levels=30, cmap="viridis")
        ax.contour(s, t, np.clip(F, lo, hi).T, levels=15, colors="k", linewidths=0.4)
        fig.colorbar(cs, ax=ax, label="F")
    else:
        ax.scatter(s, t, c="k")
    ax.set_xlabel("s")
    ax.set_ylabel("t")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def expansion_figure(series, path):
    """Log-log residuals per pairing kind, with the fitted power laws.

    ``series`` holds "eps", "residuals" and "stderrs" (per kind, in the
    normalization that was fitted) and "fits" (per kind, ExponentFit dicts).
    """
    kinds = list(series["residuals"])
    fig, axes = plt.subplots(1, len(kinds), figsize=(4.2 * len(kinds), 3.8), squeeze=False)
    eps = np.asarray(series["eps"], float)
    for ax, kind in zip(axes[0], kinds):
        r = np.abs(np.asarray(series["residuals"][kind], float))
        se = np.asarray(series["stderrs"][kind], float)
        ax.errorbar(eps, r, yerr=np.minimum(se, 0.999 * r), fmt="o", capsize=3, label="|numeric - analytic|")
        fit = series["fits"].get(kind)
        if fit is not None and np.isfinite(fit["exponent"]):
            grid = np.geomspace(eps.min(), eps.max(), 50)
            L = np.abs(np.log(grid)) ** fit["log_power"]
            ax.plot(grid, fit["prefactor"] * grid ** fit["exponent"] * L, "-",
                    label=f"fit k={fit['exponent']:.3f}")
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("eps")
        ax.set_title(kind)
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
