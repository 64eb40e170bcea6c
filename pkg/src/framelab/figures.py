"""Figure rendering for the CLI report path.

Each writer takes the rows that were written to the matching CSV and
renders a PNG next to it.  Consumers that prefer their own plotting can
pass --no-figures and use the CSV directly.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def save_sigma_profile(rows, path):
    """rows: (level_d, level_N, k, sigma_k)."""
    fig, ax = plt.subplots(figsize=(7, 5))
    by_level = {}
    for d, _, k, s in rows:
        by_level.setdefault(d, []).append((k, s))
    for d, pts in sorted(by_level.items()):
        ks = [k for k, _ in pts]
        ss = [s for _, s in pts]
        ax.plot(ks, ss, marker=".", label=f"d={d}")
    ax.set_xlabel("k")
    ax.set_ylabel("sigma_k")
    ax.set_yscale("log")
    ax.set_title("Analysis-matrix singular value profile")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_gram_spectrum(rows, path):
    """rows: (window, lambda_min, lambda_max)."""
    fig, ax = plt.subplots(figsize=(7, 5))
    ws = [r[0] for r in rows]
    ax.plot(ws, [r[1] for r in rows], marker="o", label="lambda_min")
    ax.plot(ws, [r[2] for r in rows], marker="s", label="lambda_max")
    ax.set_xlabel("window size")
    ax.set_ylabel("Gram eigenvalue")
    ax.set_yscale("log")
    ax.set_title("Exponential-system Gram spectrum")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_divergence(rows, path):
    """rows: (M, partial_sum)."""
    fig, ax = plt.subplots(figsize=(7, 5))
    ax.plot([r[0] for r in rows], [r[1] for r in rows], lw=1.2)
    ax.set_xlabel("M")
    ax.set_ylabel("partial coefficient energy T(M)")
    ax.set_xscale("symlog")
    ax.set_title("One-sided coefficient energy")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_kaczmarz(rows, path):
    """rows: (N, residual, parseval_defect)."""
    fig, ax = plt.subplots(figsize=(7, 5))
    ns = [r[0] for r in rows]
    ax.plot(ns, [r[1] for r in rows], marker="o", label="residual")
    ax.plot(ns, [r[2] for r in rows], marker="s", label="parseval defect")
    ax.set_xlabel("N")
    ax.set_yscale("log")
    ax.set_title("Kaczmarz reconstruction trend")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
