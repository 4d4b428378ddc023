"""Figure rendering for run directories.

Each panel is one SVG: a metric versus time with one curve per chaoticity
value, plus Lanczos-coefficient and Krylov-profile panels when the run
produced them.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd

PANELS = ("fidelity", "entropy", "fisher", "rank", "krylov")

_METRIC_COLUMNS = {
    "fidelity": ("mean_fidelity", r"mean reconstruction fidelity $\langle F\rangle$"),
    "entropy": ("S_c", "covariance-spectrum entropy $S_c$ (nats)"),
    "fisher": ("J", "Fisher information $J$ (regularized units)"),
    "rank": ("R", r"covariance rank $\mathcal{R}$"),
}


class MissingColumnsError(ValueError):
    """Results file lacks columns needed by the requested panel."""


def render_panels(run_dir, panels=PANELS, fmt: str = "svg") -> list[Path]:
    """Render the requested panels from a run directory; returns file paths."""
    run_dir = Path(run_dir)
    written: list[Path] = []
    results_path = run_dir / "results.csv"
    metric_panels = [p for p in panels if p in _METRIC_COLUMNS]
    if metric_panels:
        df = pd.read_csv(results_path)
        for panel in metric_panels:
            written.append(_metric_panel(df, panel, run_dir, fmt))
    if "krylov" in panels:
        written += _krylov_panels(run_dir, fmt)
    return written


def _metric_panel(df: pd.DataFrame, panel: str, run_dir: Path, fmt: str) -> Path:
    column, ylabel = _METRIC_COLUMNS[panel]
    missing = {column, "n", "chaos_param"} - set(df.columns)
    if missing:
        raise MissingColumnsError(f"results.csv lacks columns {sorted(missing)}")
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    for value, group in df.groupby("chaos_param"):
        group = group.dropna(subset=[column]).sort_values("n")
        if group.empty:
            continue
        if panel == "fidelity" and "fidelity_stderr" in group:
            ax.errorbar(
                group["n"], group[column], yerr=group["fidelity_stderr"],
                label=f"chaos param {value:g}", capsize=2,
            )
        else:
            ax.plot(group["n"], group[column], label=f"chaos param {value:g}")
    if panel == "rank":
        d = 2 ** int(df["L"].iloc[0])
        ax.axhline(d * d - d + 1, ls="--", color="gray",
                   label=r"$d^2-d+1$ ceiling")
    ax.set_xlabel("records $n$ (unit time step, free boundary)")
    ax.set_ylabel(ylabel)
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = run_dir / f"{panel}.{fmt}"
    fig.savefig(path)
    plt.close(fig)
    return path


def _krylov_panels(run_dir: Path, fmt: str) -> list[Path]:
    written = []
    lanczos_files = sorted(run_dir.glob("lanczos_*.csv"))
    if lanczos_files:
        fig, ax = plt.subplots(figsize=(5.0, 3.6))
        for path in lanczos_files:
            df = pd.read_csv(path)
            label = path.stem.replace("lanczos_", "")
            ax.plot(df["k"], df["b_k"], label=f"{label} (K={len(df) + 1})")
        ax.set_xlabel("$k$")
        ax.set_ylabel("Lanczos coefficient $b_k$")
        ax.legend(fontsize=8)
        fig.tight_layout()
        out = run_dir / f"lanczos.{fmt}"
        fig.savefig(out)
        plt.close(fig)
        written.append(out)
    profile_files = sorted(run_dir.glob("kprofile_*.csv"))
    if profile_files:
        fig, ax = plt.subplots(figsize=(5.0, 3.6))
        for path in profile_files:
            df = pd.read_csv(path)
            label = path.stem.replace("kprofile_", "")
            ax.plot(df["t"], df["C_K"], label=label)
        ax.set_xlabel("time $t$")
        ax.set_ylabel("Krylov complexity $C_K(t)$")
        ax.legend(fontsize=8)
        fig.tight_layout()
        out = run_dir / f"krylov_complexity.{fmt}"
        fig.savefig(out)
        plt.close(fig)
        written.append(out)
    return written
