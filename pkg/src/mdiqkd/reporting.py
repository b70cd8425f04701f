"""Delimited reports and the figures rendered alongside them.

CSV output is the primary, machine-readable artifact: stable column order,
scientific notation with six significant digits, newline-terminated rows.
Each report command also renders a matplotlib figure next to its CSV unless
asked not to.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Iterable, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .datasets import BenchmarkRow
from .detector import AfterpulseFit, DetectorParams, GateLoad, afterpulse_per_bin
from .link import BAND_KEYS, PredictionBand
from .optimizer import OptimizationResult


def format_value(value: object) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return f"{value:.5e}"
    return str(value)


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[object]]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(format_value(v) for v in row) for row in rows)
    Path(path).write_text("\n".join(lines) + "\n")


def figure_path(csv_path: str | Path) -> Path:
    return Path(csv_path).with_suffix(".png")


# ---------------------------------------------------------------------------
# Figures
# ---------------------------------------------------------------------------


def render_predict_figure(band: PredictionBand, path: str | Path) -> None:
    fig, (ax_gain, ax_err) = plt.subplots(1, 2, figsize=(9, 4))
    labels = {"z": ("gain_z", "error_z"), "x": ("gain_x", "error_x")}
    for ax, idx in ((ax_gain, 0), (ax_err, 1)):
        keys = [labels[basis][idx] for basis in ("z", "x")]
        centers = [band.central[k] for k in keys]
        lows = [band.central[k] - band.low[k] for k in keys]
        highs = [band.high[k] - band.central[k] for k in keys]
        ax.errorbar([0, 1], centers, yerr=[lows, highs], fmt="o", capsize=4)
        ax.set_xticks([0, 1], ["z basis", "x basis"])
        ax.set_xlim(-0.5, 1.5)
    ax_gain.set_yscale("log")
    ax_gain.set_ylabel("gain per pulse pair")
    ax_err.set_ylabel("error rate")
    fig.suptitle(f"prediction with uncertainty envelope ({band.n_samples} samples)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_compare_figure(
    rows: Sequence[BenchmarkRow], bands: Sequence[PredictionBand], path: str | Path
) -> None:
    """Measured points with model envelopes versus the intensity-loss product."""
    fig, (ax_gain, ax_err) = plt.subplots(1, 2, figsize=(10, 4.2))
    styles = {"gain_z": ("tab:green", "s"), "gain_x": ("tab:blue", "s"),
              "error_z": ("tab:green", "s"), "error_x": ("tab:blue", "s")}
    for row, band in zip(rows, bands):
        x = row.mu**2 * 10.0 ** (-row.loss_db / 10.0)
        for key in BAND_KEYS:
            color, marker = styles[key]
            ax = ax_gain if key.startswith("gain") else ax_err
            ax.errorbar(
                [x],
                [band.central[key]],
                yerr=[[band.central[key] - band.low[key]], [band.high[key] - band.central[key]]],
                color=color,
                alpha=0.45,
                capsize=3,
                fmt="none",
            )
            ax.plot(
                [x],
                [row.values[key]],
                marker="D" if row.fiber == "deployed" else marker,
                color="tab:red" if row.fiber == "deployed" else color,
                markersize=4,
                linestyle="none",
            )
    for ax in (ax_gain, ax_err):
        ax.set_xscale("log")
        ax.set_xlabel("intensity-transmission product")
    ax_gain.set_yscale("log")
    ax_gain.set_ylabel("gain per pulse pair")
    ax_err.set_ylabel("error rate")
    fig.suptitle("model envelopes (bars) vs measured benchmark (markers); z green, x blue")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_optimize_figure(results: Sequence[OptimizationResult], path: str | Path) -> None:
    fig, (ax_tau, ax_rate) = plt.subplots(1, 2, figsize=(10, 4.2))
    for result in results:
        losses = [row.loss_db for row in result.rows]
        label = result.scenario if result.scenario != "identity" else result.mode
        ax_tau.plot(losses, [row.tau_s for row in result.rows], label=label)
        positive = [(row.loss_db, row.secret_rate) for row in result.rows if row.secret_rate > 0.0]
        if positive:
            ax_rate.semilogy([p[0] for p in positive], [p[1] for p in positive], label=label)
    ax_tau.set_xlabel("total loss [dB]")
    ax_tau.set_ylabel("optimal signal intensity")
    ax_tau.legend(fontsize=8)
    ax_rate.set_xlabel("total loss [dB]")
    ax_rate.set_ylabel("secret key rate [bits/pulse pair]")
    ax_rate.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_fit_figure(
    points: Sequence[tuple[float, float]],
    fit: AfterpulseFit,
    detector: DetectorParams,
    path: str | Path,
) -> None:
    import numpy as np

    fitted = DetectorParams(
        eta=detector.eta,
        eta_gate=detector.eta_gate,
        p_dark_bin=detector.p_dark_bin,
        bin_gate_ratio=fit.bin_gate_ratio,
        alpha=fit.alpha,
        p_geo=fit.p_geo,
        k_dead=detector.k_dead,
    )
    xs = np.linspace(min(m for m, _ in points), max(m for m, _ in points), 80)
    ys = [afterpulse_per_bin(fitted, GateLoad(mu_avg=float(x))) for x in xs]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot([m for m, _ in points], [v for _, v in points], "o", label="measured")
    ax.plot(xs, ys, "-", label="fitted model")
    ax.set_xlabel("mean photons per gate")
    ax.set_ylabel("afterpulse probability per time-bin")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
