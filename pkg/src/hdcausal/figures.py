"""Report figures rendered next to the delimited outputs.

All rendering uses the Agg backend and strips the creation date from PNG
metadata, so repeated runs with the same inputs produce byte-identical
files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_METHOD_COLORS = {"oal": "tab:blue", "goal": "tab:orange"}


def save_figure(fig, path) -> None:
    fig.savefig(path, dpi=150, bbox_inches="tight", metadata={"Date": None})
    plt.close(fig)


def screening_figure(scores: np.ndarray, q: int, path) -> None:
    """Sorted score decay with the retention cutoff."""
    ranked = np.sort(scores)[::-1]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(np.arange(1, ranked.size + 1), ranked, lw=1.2)
    ax.axvline(q, color="tab:red", ls="--", lw=1, label=f"q = {q}")
    ax.set_xlabel("feature rank")
    ax.set_ylabel("conditional ball covariance")
    ax.set_title("Screening scores")
    ax.legend()
    save_figure(fig, path)


def metrics_figure(metrics: dict, path) -> None:
    """Absolute bias, SE and MSE per method."""
    methods = list(metrics)
    x = np.arange(len(methods))
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(x, [abs(metrics[m].bias) for m in methods], "o", label="|bias|", ms=9)
    ax.plot(x, [metrics[m].se for m in methods], "s", label="SE", ms=9)
    ax.plot(x, [metrics[m].mse for m in methods], "^", label="MSE", ms=9)
    ax.set_xticks(x, [m.upper() for m in methods])
    ax.set_ylabel("value")
    ax.set_title("Estimator accuracy")
    ax.legend()
    save_figure(fig, path)


def inclusion_figure(inclusion_by_method: dict, path, max_features: int = 60) -> None:
    """Per-feature selection proportion, truncated to the leading columns."""
    fig, ax = plt.subplots(figsize=(7, 4))
    for method, freq in inclusion_by_method.items():
        freq = np.asarray(freq)
        upto = min(freq.size, max_features)
        ax.plot(
            np.arange(1, upto + 1),
            freq[:upto],
            marker=".",
            lw=1,
            label=method.upper(),
            color=_METHOD_COLORS.get(method),
        )
    ax.set_ylim(-0.02, 1.02)
    ax.set_xlabel("covariate index")
    ax.set_ylabel("inclusion proportion")
    ax.set_title("Propensity-model inclusion")
    ax.legend()
    save_figure(fig, path)


def tuning_figure(records, path) -> None:
    """wAMD across the lambda1 grid, one trace per lambda2 value."""
    fig, ax = plt.subplots(figsize=(6.5, 4))
    by_lam2: dict[float, list] = {}
    for rec in records:
        by_lam2.setdefault(rec.lambda2, []).append(rec)
    many = len(by_lam2) > 1
    for lam2, recs in sorted(by_lam2.items()):
        recs = sorted(recs, key=lambda r: r.lambda1)
        ax.plot(
            [r.lambda1 for r in recs],
            [r.wamd for r in recs],
            marker=".",
            lw=1,
            label=f"lambda2 = {lam2:g}" if many else None,
        )
    ax.set_xscale("log")
    ax.set_xlabel("lambda1")
    ax.set_ylabel("wAMD")
    ax.set_title("Balance across the tuning grid")
    if many:
        ax.legend(fontsize=7, ncols=2)
    save_figure(fig, path)


def bootstrap_figure(resample_ates: np.ndarray, point: float, ci, path) -> None:
    """Resample distribution with the point estimate and its interval."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(resample_ates, bins=40, color="tab:gray", alpha=0.8)
    ax.axvline(point, color="tab:red", lw=1.5, label="point estimate")
    ax.axvline(ci[0], color="tab:blue", ls="--", lw=1, label="95% CI")
    ax.axvline(ci[1], color="tab:blue", ls="--", lw=1)
    ax.set_xlabel("ATE")
    ax.set_ylabel("resamples")
    ax.set_title("Bootstrap distribution")
    ax.legend()
    save_figure(fig, path)


def overlap_figure(pi: np.ndarray, A: np.ndarray, path) -> None:
    """Propensity overlap between the two treatment groups."""
    A = np.asarray(A)
    fig, ax = plt.subplots(figsize=(6, 4))
    bins = np.linspace(0, 1, 31)
    ax.hist(pi[A == 1], bins=bins, alpha=0.6, label="treated")
    ax.hist(pi[A == 0], bins=bins, alpha=0.6, label="control")
    ax.set_xlabel("fitted propensity")
    ax.set_ylabel("count")
    ax.set_title("Propensity overlap")
    ax.legend()
    save_figure(fig, path)
