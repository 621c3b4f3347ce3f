"""Figures written next to the CSV reports (Agg backend, no display needed)."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

AXIS_LABELS = {
    "quality": "Data quality score",
    "alpha": r"Seller minimum profit margin $\alpha$",
    "p2": r"Posterior probability $p_2$",
    "eta": r"Information disclosure degree $\eta$",
}

# strip volatile metadata so repeated runs write identical files
_PNG_META = {"Software": None}


def _finish(fig, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_PNG_META)
    plt.close(fig)
    return path


def plot_sweep(rows: Sequence, path: str | Path) -> Path:
    """Seller and buyer-alliance extra profit against the swept parameter."""
    param = rows[0].param
    x = [r.value for r in rows]
    fig, ax = plt.subplots(figsize=(5.5, 3.6))
    ax.plot(x, [r.seller_extra for r in rows], "o-", label="Seller extra profit")
    ax.plot(x, [r.buyer_extra for r in rows], "s--", label="Buyer alliance extra profit")
    flagged = [r for r in rows if r.flag]
    if flagged:
        ax.plot([r.value for r in flagged], [r.seller_extra for r in flagged], "rx",
                label="flagged point")
    ax.set_xlabel(AXIS_LABELS.get(param, param))
    ax.set_ylabel("Additional profit")
    ax.grid(alpha=0.3)
    ax.legend(frameon=False)
    return _finish(fig, Path(path))


def plot_summary(summary: dict, path: str | Path, title: str = "") -> Path:
    """Median extra profit per participant; whiskers span one standard deviation."""
    ids = list(summary)
    med = [summary[i]["median_extra"] for i in ids]
    std = [summary[i]["std_extra"] for i in ids]
    colors = ["tab:blue" if summary[i]["kind"] == "seller" else "tab:orange" for i in ids]
    fig, ax = plt.subplots(figsize=(6, 3.6))
    ax.bar(ids, med, yerr=std, color=colors, capsize=3)
    ax.axhline(0, color="k", lw=0.6)
    ax.set_ylabel("Median additional profit")
    if title:
        ax.set_title(title)
    return _finish(fig, Path(path))
