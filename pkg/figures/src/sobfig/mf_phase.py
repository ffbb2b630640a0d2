"""Mean-field figure family: limit cycle, stationary values and period law."""

from __future__ import annotations

from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np

from .core import FigureSpec, read_csv, read_json, save_figure

SPEC = FigureSpec(
    figure_id="fig2_mf",
    input_globs=["mf/mf.json", "mf/mf_trajectory.csv", "mf/mf_periods.csv"],
    output_name="fig2_mf.svg",
)


def make(input_dir: Path, output_dir: Path) -> Path:
    inputs = SPEC.resolve_inputs(input_dir)
    rep = read_json(Path(input_dir) / "mf/mf.json")
    traj = read_csv(Path(input_dir) / "mf/mf_trajectory.csv", ["t", "rho", "n"])
    periods = read_csv(Path(input_dir) / "mf/mf_periods.csv", ["lambda", "period"])

    fig, axes = plt.subplots(1, 3, figsize=(9.5, 2.8), constrained_layout=True)

    ax = axes[0]
    ax.plot(traj["n"], traj["rho"], color="tab:blue")
    fp = rep.get("fixed_point")
    if fp:
        marker = "x" if fp["unstable"] else "o"
        ax.plot([fp["n"]], [fp["rho"]], marker, color="tab:red",
                label=fp["kind"])
        ax.legend(loc="upper left")
    sp = rep.get("spinodals")
    if sp:
        for key in ("n_low", "n_high"):
            ax.axvline(sp[key], color="gray", ls="--", lw=0.8)
    ax.set_xlabel("n")
    ax.set_ylabel(r"$\rho$")
    ax.set_title("mean-field cycle")

    ax = axes[1]
    tail = traj["t"] >= (traj["t"][-1] * 0.6 if len(traj["t"]) else 0)
    ax.plot(traj["t"][tail], traj["rho"][tail], label=r"$\rho$")
    ax.plot(traj["t"][tail], traj["n"][tail], label="n")
    ax.set_xlabel("t")
    ax.legend(loc="upper right")
    ax.set_title("trajectory")

    ax = axes[2]
    lam, per = periods["lambda"], periods["period"]
    if len(lam):
        ax.loglog(lam, per, "o-", color="tab:green")
        # guide with slope -1 through the first point
        guide = per[0] * lam[0] / lam
        ax.loglog(lam, guide, "k--", lw=0.8, label=r"$\propto \lambda^{-1}$")
        ax.legend()
    ax.set_xlabel(r"$\lambda$")
    ax.set_ylabel("T")
    ax.set_title("period law")

    out = Path(output_dir) / SPEC.output_name
    save_figure(fig, out)
    return out, inputs
