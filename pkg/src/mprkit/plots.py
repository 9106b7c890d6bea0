"""Figure rendering for the experiment drivers.

Each subcommand's tabular output has a matching plot; figures are written
next to the CSV so a run leaves both the numbers and the picture.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "plot_linearity",
    "plot_goodbits",
    "plot_srls_vs_mds",
    "plot_rsvd",
    "plot_scaling",
]

_STYLE = {
    "figure.figsize": (5.2, 3.6),
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 9,
    "legend.fontsize": 8,
}


def _grouped(rows, key):
    groups = {}
    for r in rows:
        groups.setdefault(r[key], []).append(r)
    return groups


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_linearity(rows, path):
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        for method, group in sorted(_grouped(rows, "method").items()):
            group = sorted(group, key=lambda r: r["anchors"])
            x = [r["anchors"] for r in group]
            y = [r["mean_linearity_error"] for r in group]
            err = [r["stderr"] for r in group]
            ax.errorbar(x, y, yerr=err, marker="o", capsize=2, label=method)
        ax.set_yscale("log")
        ax.set_xlabel("anchors")
        ax.set_ylabel("mean linearity error")
        ax.set_title(f"Linearity vs anchors (tau={rows[0]['tau']:g})")
        ax.legend()
        _save(fig, path)


def plot_goodbits(rows, path):
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        for method, group in sorted(_grouped(rows, "method").items()):
            group = sorted(group, key=lambda r: r["anchors"])
            x = [r["anchors"] for r in group]
            y = [r["mean_good_bits"] for r in group]
            err = [r["stderr"] for r in group]
            ax.errorbar(x, y, yerr=err, marker="o", capsize=2, label=method)
        ax.set_xlabel("anchors")
        ax.set_ylabel("mean good bits")
        ax.set_title(f"Magnitude denoising (tau={rows[0]['tau']:g})")
        ax.legend()
        _save(fig, path)


def plot_srls_vs_mds(rows, path):
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        for method, group in sorted(_grouped(rows, "method").items()):
            group = sorted(group, key=lambda r: r["anchors"])
            x = [r["anchors"] for r in group]
            y = [r["mean_snr_db"] for r in group]
            ax.plot(x, y, marker="o", label=method)
        ax.set_xlabel("anchors")
        ax.set_ylabel("mean SNR (dB)")
        ax.set_title("Known anchors (SR-LS) vs joint localization (MDS)")
        ax.legend()
        _save(fig, path)


def plot_rsvd(rows, path):
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        x = [r["projections"] for r in rows]
        y = [r["mean_entry_error"] for r in rows]
        err = [r["stderr"] for r in rows]
        ax.errorbar(x, y, yerr=err, marker="o", capsize=2)
        ax.set_yscale("log")
        ax.set_xlabel("projections (device rows)")
        ax.set_ylabel("mean per-entry reconstruction error")
        ax.set_title("Randomized SVD via recovered projections")
        _save(fig, path)


def plot_scaling(rows, path):
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        for p, group in sorted(_grouped(rows, "keep_probability").items()):
            group = sorted(group, key=lambda r: r["n_points"])
            x = [r["n_points"] for r in group]
            y = [r["normalized_error"] for r in group]
            ax.plot(x, y, marker="o", label=f"p={p:g}")
        ax.set_xscale("log")
        ax.set_xlabel("points K")
        ax.set_ylabel("(mean error / K) * sqrt(pK)")
        ax.set_title("Distance-error scaling vs point count")
        ax.legend()
        _save(fig, path)
