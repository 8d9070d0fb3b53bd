"""Self-contained SVG figures for run reports."""
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .problems import BenchmarkId, KNO1_FRONT_OFFSET  # noqa: E402

# fonts as paths and fixed ids keep the files self-contained and reproducible
matplotlib.rcParams["svg.fonttype"] = "path"
matplotlib.rcParams["svg.hashsalt"] = "mopadgan"

COLORS = ("tab:red", "tab:blue", "tab:green", "tab:orange", "tab:purple")


def _save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)


def _pareto_line(ax, benchmark):
    t = np.linspace(-0.5, 0.5, 2)
    if BenchmarkId.parse(benchmark) is BenchmarkId.KNO1:
        ax.plot(t, KNO1_FRONT_OFFSET - t, "k--", lw=1, label="Pareto set")
    else:
        ax.plot(t, t, "k--", lw=1, label="Pareto set")


def samples_plot(path, data, samples_by_label, benchmark):
    """Generated designs over the training data with the Pareto-set line."""
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.scatter(data[:, 0], data[:, 1], s=2, c="0.75", label="data")
    for (label, pts), color in zip(samples_by_label.items(), COLORS):
        ax.scatter(pts[:, 0], pts[:, 1], s=3, c=color, alpha=0.6, label=label)
    _pareto_line(ax, benchmark)
    ax.set_xlim(-0.5, 0.5)
    ax.set_ylim(-0.5, 0.5)
    ax.set_aspect("equal")
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    ax.legend(loc="lower right", fontsize=7)
    _save(fig, path)


def hv_history_plot(path, histories_by_label):
    """Mean and one-std band of hypervolume history per method."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for (label, hv), color in zip(histories_by_label.items(), COLORS):
        hv = np.asarray(hv, dtype=np.float64)
        x = np.arange(1, hv.shape[1] + 1)
        mean, std = hv.mean(axis=0), hv.std(axis=0)
        ax.plot(x, mean, color=color, label=label)
        ax.fill_between(x, mean - std, mean + std, color=color, alpha=0.2, lw=0)
    ax.set_xlabel("evaluations")
    ax.set_ylabel("hypervolume")
    ax.legend(fontsize=8)
    _save(fig, path)


def union_front_plot(path, fronts_by_label):
    """Union of final solution sets in objective space."""
    fig, ax = plt.subplots(figsize=(5, 5))
    for (label, f), color in zip(fronts_by_label.items(), COLORS):
        f = np.asarray(f, dtype=np.float64).reshape(-1, 2)
        ax.scatter(f[:, 0], f[:, 1], s=8, c=color, alpha=0.7, label=label)
    ax.set_xlabel("f1")
    ax.set_ylabel("f2")
    ax.legend(fontsize=8)
    _save(fig, path)
