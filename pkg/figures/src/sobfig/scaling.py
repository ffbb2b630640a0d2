"""Finite-size scaling figure family: period, coherence time, king probability."""

from __future__ import annotations

from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np

from .core import FigureSpec, read_csv, read_json, save_figure

SPEC = FigureSpec(
    figure_id="fig4efg_scaling",
    input_globs=["scaling.csv"],
    output_name="fig4efg_scaling.svg",
)


def make(input_dir: Path, output_dir: Path) -> Path:
    inputs = SPEC.resolve_inputs(input_dir)
    table = read_csv(Path(input_dir) / "scaling.csv",
                     ["L", "t_mean", "t_std", "tau_ctc"])
    L = table["L"]
    N = L ** 3

    fig, axes = plt.subplots(1, 3, figsize=(9.5, 2.8), constrained_layout=True)

    ax = axes[0]
    if len(L):
        ax.errorbar(L, table["t_mean"], yerr=table["t_std"], fmt="o-",
                    capsize=3)
    ax.set_xlabel("L")
    ax.set_ylabel("T")
    ax.set_title("inherent period")

    ax = axes[1]
    if len(L):
        ax.plot(N, table["tau_ctc"], "s-", color="tab:purple")
        ax.set_xscale("log")
    ax.set_xlabel(r"$N = L^3$")
    ax.set_ylabel(r"$\tau_{CTC}$")
    ax.set_title("coherence time")

    ax = axes[2]
    kings_L, kings_p = [], []
    for av in sorted(Path(input_dir).glob("ctc_*/avalanches.json")):
        rep = read_json(av)
        if rep.get("p_king") is not None:
            kings_L.append(float(av.parent.name.split("_L")[-1]))
            kings_p.append(rep["p_king"])
            inputs.append(av)
    if kings_L:
        order = np.argsort(kings_L)
        ax.semilogy(np.array(kings_L)[order], np.array(kings_p)[order], "d-",
                    color="tab:orange")
    ax.set_xlabel("L")
    ax.set_ylabel(r"$P_{king}$")
    ax.set_title("king avalanches")

    out = Path(output_dir) / SPEC.output_name
    save_figure(fig, out)
    return out, inputs
