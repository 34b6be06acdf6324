"""Static SVG figures. Imported lazily so data runs never depend on matplotlib."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# Fixed ids and no timestamp keep SVG output stable across reruns.
plt.rcParams["svg.hashsalt"] = "kickedrotor"
_SAVE = {"format": "svg", "metadata": {"Date": None}}


def section_plot(path: Path, sections: dict[str, np.ndarray], kappa: float) -> None:
    fig, axes = plt.subplots(1, len(sections), figsize=(5 * len(sections), 4.5), squeeze=False)
    for ax, (tag, pts) in zip(axes[0], sections.items()):
        ax.scatter(pts[:, 0], pts[:, 1], s=0.05, c="k", marker=".", linewidths=0, rasterized=True)
        ax.set_xlim(0, 2 * np.pi)
        ax.set_ylim(0, 2 * np.pi)
        ax.set_xlabel(r"$\theta$")
        ax.set_ylabel(r"$\tilde L$ mod $2\pi$")
        ax.set_title(f"{tag.upper()}, $\\kappa={kappa:g}$")
    fig.tight_layout()
    fig.savefig(path, **_SAVE)
    plt.close(fig)


def energy_plot(path: Path, arms: dict) -> None:
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    for tag, (quantum, classical) in arms.items():
        for series, style, name in ((quantum, "-", "quantum"), (classical, "--", "classical")):
            if series is None:
                continue
            n = series.kicks[1:]
            ax.loglog(n, np.maximum(series.values[1:], 1e-300), style, label=f"{tag.upper()} {name}")
    ax.set_xlabel("N (kicks)")
    ax.set_ylabel(r"$\tilde E$")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, **_SAVE)
    plt.close(fig)


def distribution_plot(path: Path, dists: dict) -> None:
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    styles = {"kr": "--", "mkr": "-"}
    for tag, dist in dists.items():
        ax.semilogy(dist.indices, np.maximum(dist.probabilities, 1e-300), styles.get(tag, ":"), lw=0.6, label=tag.upper())
    ax.set_ylim(1e-30, 1)
    ax.set_xlabel("m")
    ax.set_ylabel("P(m)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, **_SAVE)
    plt.close(fig)
