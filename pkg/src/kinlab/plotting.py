"""PNG rendering of run tables for the ``report`` subcommand."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _column(rows, key):
    out = []
    for r in rows:
        try:
            out.append(float(r[key]))
        except (KeyError, TypeError, ValueError):
            out.append(float("nan"))
    return out


def plot_table(rows: list, hint: dict, path, title: str = ""):
    """Line (or scatter) plot of hint['y'] columns against hint['x']."""
    fig, ax = plt.subplots(figsize=(5.5, 3.8), dpi=110)
    x = _column(rows, hint["x"])
    for key in hint["y"]:
        y = _column(rows, key)
        if hint.get("scatter"):
            ax.scatter(x, y, s=8, label=key)
        else:
            ax.plot(x, y, marker="o", ms=3, label=key)
    if hint.get("scatter"):
        lo, hi = min(x), max(x)
        ax.plot([lo, hi], [lo, hi], "k--", lw=0.8, label="y = x")
    if hint.get("logx"):
        ax.set_xscale("log")
    if hint.get("logy"):
        ax.set_yscale("log")
    ax.set_xlabel(hint["x"])
    ax.legend(fontsize=8)
    ax.set_title(title, fontsize=9)
    fig.tight_layout()
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
