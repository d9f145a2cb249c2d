"""Figure rendering for report paths.  All figures go to files (Agg backend)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_training_curves(report, path) -> None:
    """Per-seed validation accuracy and mean training loss vs. epoch."""
    fig, (ax_acc, ax_loss) = plt.subplots(1, 2, figsize=(10, 4))
    for res in report.seed_results:
        epochs = np.arange(1, len(res.val_accuracy) + 1)
        ax_acc.plot(epochs, res.val_accuracy, label=f"seed {res.seed}")
        ax_loss.plot(np.arange(1, len(res.epoch_losses) + 1), res.epoch_losses)
    ax_acc.set_xlabel("epoch")
    ax_acc.set_ylabel("validation accuracy")
    ax_acc.set_ylim(0, 1.02)
    ax_acc.legend(fontsize=8)
    ax_loss.set_xlabel("epoch")
    ax_loss.set_ylabel("training loss")
    ax_loss.set_yscale("log")
    fig.suptitle(
        f"test accuracy {report.mean_test_accuracy:.3f} "
        f"+/- {report.std_test_accuracy:.3f}"
    )
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_ablation_chart(table, path) -> None:
    """Bar chart of mean test accuracy with one-std error bars per row."""
    names = [name for name, _ in table.rows]
    means = [rep.mean_test_accuracy for _, rep in table.rows]
    stds = [rep.std_test_accuracy for _, rep in table.rows]
    colors = ["tab:red" if name in table.flagged else "tab:blue" for name in names]
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.bar(range(len(names)), means, yerr=stds, color=colors, capsize=3)
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("mean test accuracy")
    ax.set_ylim(0, 1.05)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_convergence_plot(deviations, fitted_rate, envelope_constant, path) -> None:
    """Semilog decay of the walk deviations with the fitted envelope."""
    steps = np.arange(len(deviations))
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(steps, deviations, marker="o", ms=3, lw=1, label="max deviation")
    envelope = envelope_constant * fitted_rate**steps
    ax.semilogy(
        steps, envelope, ls="--", label=f"envelope {envelope_constant:.2g} * {fitted_rate:.4f}^l"
    )
    ax.set_xlabel("step l")
    ax.set_ylabel("max |M^l - pi|")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_cycle_histogram(histogram: dict[int, int], path) -> None:
    """Bar chart of basis cycle lengths."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    if histogram:
        lengths = sorted(histogram)
        ax.bar(lengths, [histogram[l] for l in lengths])
        ax.set_xticks(lengths)
    ax.set_xlabel("cycle length")
    ax.set_ylabel("count")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
