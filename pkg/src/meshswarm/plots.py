"""Figure rendering for sweep tables and adaptation traces.

Figures are written next to the delimited data they come from; nothing
here feeds back into the simulation.
"""

import csv
import math
import os
import warnings
from typing import List, Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def read_csv_rows(path: str) -> List[dict]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def sweep_figure(rows: List[dict], out_path: str) -> str:
    """Metric panels vs the swept value, one line per profile arm."""
    metrics = (("mu_t", "mean duration [s]"),
               ("pct_searched", "searched [%]"),
               ("mean_collisions", "mean collisions"))
    profiles = sorted({row["profile"] for row in rows})
    axis = rows[0]["axis"] if rows else "value"
    fig, axes = plt.subplots(1, len(metrics), figsize=(13, 4))
    for ax, (metric, label) in zip(axes, metrics):
        for profile in profiles:
            sub = [r for r in rows if r["profile"] == profile]
            sub.sort(key=lambda r: float(r["value"]))
            xs = [float(r["value"]) for r in sub]
            ys = [float(r[metric]) for r in sub]
            if metric == "mu_t":
                errs = [math.sqrt(float(r["var_t"])) for r in sub]
                ax.errorbar(xs, ys, yerr=errs, marker="o", capsize=3, label=profile)
            else:
                ax.plot(xs, ys, marker="o", label=profile)
        ax.set_xlabel(axis)
        ax.set_ylabel(label)
        ax.grid(True, alpha=0.3)
    axes[0].legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=130)
    plt.close(fig)
    return out_path


def adapt_figure(rows: List[dict], out_path: str) -> str:
    """Per-iteration energy, running best and the temperature schedule."""
    iters = [int(r["iteration"]) for r in rows]
    e_c = [float(r["E_c"]) for r in rows]
    best = [float(r["best_E_c"]) for r in rows]
    temp = [float(r["temperature"]) for r in rows]
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(8, 6), sharex=True)
    ax1.plot(iters, e_c, marker=".", color="tab:gray", label="candidate")
    ax1.plot(iters, best, color="tab:blue", label="best so far")
    ax1.set_ylabel("trial heuristic")
    ax1.grid(True, alpha=0.3)
    ax1.legend()
    ax2.plot(iters, temp, color="tab:red")
    ax2.set_ylabel("temperature")
    ax2.set_xlabel("iteration")
    ax2.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=130)
    plt.close(fig)
    return out_path


def render_run_dir(run_dir: str, out_dir: Optional[str] = None) -> List[str]:
    """Render figures for every known table found under run_dir.

    A table that fails to parse is skipped with a warning so one bad file
    cannot block the rest of the directory.
    """
    target = out_dir or run_dir
    os.makedirs(target, exist_ok=True)
    written = []
    jobs = ((os.path.join(run_dir, "sweep.csv"), sweep_figure, "sweep.png"),
            (os.path.join(run_dir, "adapt_trace.csv"), adapt_figure,
             "adapt_trace.png"))
    for path, figure, out_name in jobs:
        if not os.path.exists(path):
            continue
        try:
            rows = read_csv_rows(path)
            if rows:
                written.append(figure(rows, os.path.join(target, out_name)))
        except (OSError, csv.Error, KeyError, TypeError, ValueError) as exc:
            warnings.warn("skipping %s: %s" % (path, exc))
    return written


# duration carries its batch variance; the other metrics are plain means.
TIDY_METRICS = (("duration", "mu_t", "var_t"),
                ("pct_searched", "pct_searched", None),
                ("mean_collisions", "mean_collisions", None),
                ("mean_E_c", "mean_E_c", None))


def write_tidy(run_dir: str, out_dir: Optional[str] = None) -> Optional[str]:
    """Melt sweep.csv into one row per (cell, metric); None if absent."""
    sweep_path = os.path.join(run_dir, "sweep.csv")
    if not os.path.exists(sweep_path):
        return None
    try:
        rows = read_csv_rows(sweep_path)
    except (OSError, csv.Error) as exc:
        warnings.warn("skipping %s: %s" % (sweep_path, exc))
        return None
    target = out_dir or run_dir
    os.makedirs(target, exist_ok=True)
    path = os.path.join(target, "tidy.csv")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("scenario", "profile", "axis", "value",
                         "metric", "mean", "variance"))
        for row in rows:
            for metric, mean_col, var_col in TIDY_METRICS:
                if row.get(mean_col) is None:
                    continue
                variance = row.get(var_col, "") if var_col else ""
                writer.writerow((row.get("scenario", ""), row.get("profile", ""),
                                 row.get("axis", ""), row.get("value", ""),
                                 metric, row[mean_col], variance))
    return path
