"""Time-series figure family: density traces with jump markers."""

from __future__ import annotations

from pathlib import Path

import matplotlib.pyplot as plt

from .core import FigureSpec, read_csv, save_figure

SPEC = FigureSpec(
    figure_id="fig4ab_timeseries",
    input_globs=["ctc_*/series.csv"],
    output_name="fig4ab_timeseries.svg",
)


def make(input_dir: Path, output_dir: Path) -> Path:
    inputs = SPEC.resolve_inputs(input_dir)
    series_files = [p for p in inputs if p.name == "series.csv"]

    fig, axes = plt.subplots(len(series_files), 1,
                             figsize=(7, 1.9 * max(len(series_files), 1)),
                             sharex=False, constrained_layout=True, squeeze=False)
    for ax, src in zip(axes.ravel(), series_files):
        data = read_csv(src, ["t", "rho_mean", "n_mean"])
        label = src.parent.name
        ax.plot(data["t"], data["rho_mean"], lw=0.6, label=r"$\bar\rho$")
        ax.plot(data["t"], data["n_mean"], lw=0.6, label=r"$\bar n$")
        events = src.parent / "events.csv"
        if events.exists():
            ev = read_csv(events, ["direction", "t_event"])
            for direction, color in (("up", "tab:red"), ("down", "tab:blue")):
                for te in ev["t_event"][ev["direction"] == direction][:200]:
                    ax.axvline(float(te), color=color, lw=0.4, alpha=0.4)
            inputs.append(events)
        ax.set_ylabel(label)
        ax.legend(loc="upper right", fontsize=7)
    axes.ravel()[-1].set_xlabel("t")

    out = Path(output_dir) / SPEC.output_name
    save_figure(fig, out)
    return out, inputs
