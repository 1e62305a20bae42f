"""Matplotlib figures written next to the JSONL reports."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_theta(coefficients, path, title=""):
    n = np.arange(len(coefficients))
    fig, ax = plt.subplots(figsize=(7, 3.5))
    ax.plot(n, coefficients, ".", ms=2)
    ax.set_xlabel("n")
    ax.set_ylabel("r_Q(n)")
    ax.set_title(title)
    return _save(fig, path)


def plot_layer_counts(rows, path):
    dims = [r["dim"] for r in rows]
    counts = [r["classes"] for r in rows]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.bar(dims, counts)
    ax.set_yscale("log")
    ax.set_xlabel("dimension")
    ax.set_ylabel("escalator classes")
    for d, c in zip(dims, counts):
        ax.annotate(str(c), (d, c), ha="center", va="bottom")
    return _save(fig, path)


def plot_certificate(n, ratios, cq, path, title=""):
    """|a_C(n)| / (d(n) sqrt(n)) against the certified constant C_Q."""
    fig, ax = plt.subplots(figsize=(7, 3.5))
    ax.plot(n, ratios, ".", ms=2, label="|a_C(n)| / (d(n) sqrt n)")
    ax.axhline(cq, color="C3", lw=1, label=f"C_Q = {cq:.2f}")
    ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.legend(loc="lower right")
    ax.set_title(title)
    return _save(fig, path)


def plot_exceptions(report, path):
    fig, ax = plt.subplots(figsize=(6, 3))
    exc = report.exceptions
    ax.eventplot(exc if exc else [[]], lineoffsets=0.5)
    ax.set_yticks([])
    ax.set_xlabel("n")
    ax.set_title(f"{report.form}: {len(exc)} exceptions (method {report.method})")
    return _save(fig, path)
