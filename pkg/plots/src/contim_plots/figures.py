"""Figure rendering and the plotted-data payloads behind it.

Every plot function returns the exact numbers it drew, so tests and the
--dump-json flag can check figures without image diffing. Rendering uses
the Agg backend; nothing here opens a window.
"""

from __future__ import annotations

import os

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402 (backend must be set first)

from .readers import read_results, read_training_log

GROUP_KEYS = ("q", "T", "V")


def validation_curve_data(log_paths):
    """Plotted series for one line per training log.

    Args:
        log_paths: training-log CSV paths; legend labels come from the
            file names.

    Returns:
        List of {label, step, val_mean, val_std} dicts in input order.
    """
    series = []
    for path in log_paths:
        rows = read_training_log(path)
        series.append({
            "label": os.path.splitext(os.path.basename(path))[0],
            "step": [row[0] for row in rows],
            "val_mean": [row[2] for row in rows],
            "val_std": [row[3] for row in rows],
        })
    return series


def plot_validation_curve(log_paths, out_image):
    """Validation mean vs training step, one band-shaded line per log.

    Args:
        log_paths: one or more training-log CSVs.
        out_image: PNG path to write.

    Returns:
        The validation_curve_data payload that was drawn.
    """
    series = validation_curve_data(log_paths)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for entry in series:
        steps = entry["step"]
        mean = np.asarray(entry["val_mean"])
        std = np.asarray(entry["val_std"])
        # A single logged point still needs a visible marker.
        marker = "o" if len(steps) == 1 else None
        line, = ax.plot(steps, mean, marker=marker, label=entry["label"])
        ax.fill_between(steps, mean - std, mean + std, alpha=0.25,
                        color=line.get_color(), linewidth=0)
    ax.set_xlabel("training step")
    ax.set_ylabel("validation influence")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_image, dpi=150)
    plt.close(fig)
    return series


def comparison_data(results_path, group_by=None):
    """Plotted numbers for a method comparison chart.

    Args:
        results_path: results CSV from the harness.
        group_by: sweep column to group on (one of q, T, V); None uses the
            file's own sweep column when present, otherwise a flat
            per-method comparison.

    Returns:
        {"group_by": column or None,
         "series": [{method, values, means}] per method (grouped), or
         [{method, mean}] (flat),
         "method_means": {method: mean over every row},
         "summaries": the file's summary block}.

    Raises:
        ValueError: empty results body ("no rows"), a group key outside
            q/T/V, or a group column the file does not carry.
    """
    rows, summaries, sweep_column = read_results(results_path)
    if not rows:
        raise ValueError(f"{results_path}: no rows")
    if group_by is not None:
        if group_by not in GROUP_KEYS:
            raise ValueError(f"unknown group key {group_by!r}")
        if group_by != sweep_column:
            raise ValueError(
                f"{results_path} has no {group_by} column"
                + (f" (it carries {sweep_column})" if sweep_column else "")
            )
    column = group_by if group_by is not None else sweep_column
    methods = []
    for row in rows:
        if row["method"] not in methods:
            methods.append(row["method"])
    method_means = {
        m: float(np.mean([r["normalized_influence"] for r in rows
                          if r["method"] == m]))
        for m in methods
    }
    if column is None:
        series = [{"method": m, "mean": method_means[m]} for m in methods]
    else:
        series = []
        for m in methods:
            values = sorted({r[column] for r in rows if r["method"] == m})
            means = [
                float(np.mean([r["normalized_influence"] for r in rows
                               if r["method"] == m and r[column] == v]))
                for v in values
            ]
            series.append({"method": m, "values": values, "means": means})
    return {
        "group_by": column,
        "series": series,
        "method_means": method_means,
        "summaries": {m: list(v) for m, v in summaries.items()},
    }


def plot_comparison(results_path, out_image, group_by=None):
    """Mean normalized influence per method, grouped by the swept setting.

    Args:
        results_path: results CSV from the harness.
        out_image: PNG path to write.
        group_by: sweep column (q, T or V); optional, see comparison_data.

    Returns:
        The comparison_data payload that was drawn.
    """
    payload = comparison_data(results_path, group_by)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if payload["group_by"] is None:
        methods = [entry["method"] for entry in payload["series"]]
        means = [entry["mean"] for entry in payload["series"]]
        ax.bar(range(len(methods)), means, width=0.6)
        ax.set_xticks(range(len(methods)), methods)
    else:
        for entry in payload["series"]:
            ax.plot(entry["values"], entry["means"], marker="o",
                    label=entry["method"])
        ax.set_xlabel(payload["group_by"])
        ax.legend()
    ax.set_ylabel("normalized influence")
    fig.tight_layout()
    fig.savefig(out_image, dpi=150)
    plt.close(fig)
    return payload
