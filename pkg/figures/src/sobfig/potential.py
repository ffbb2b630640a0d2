"""Effective-potential figure family: landscapes per dimension and n."""

from __future__ import annotations

import re
from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np

from .core import FigureSpec, read_csv, save_figure

SPEC = FigureSpec(
    figure_id="fig3_potential",
    input_globs=["potential/potential_*.csv", "potential/phase_diagram.csv"],
    output_name="fig3_potential.svg",
)

_NAME = re.compile(r"potential_(\d)_([-0-9.eE]+)\.csv$")


def make(input_dir: Path, output_dir: Path) -> Path:
    inputs = SPEC.resolve_inputs(input_dir)
    curves: dict[int, list] = {}
    for p in inputs:
        m = _NAME.search(p.name)
        if not m:
            continue
        d, n = int(m.group(1)), float(m.group(2))
        curves.setdefault(d, []).append((n, p))

    dims = sorted(curves)
    fig, axes = plt.subplots(1, max(len(dims), 1), figsize=(3.2 * max(len(dims), 1), 2.8),
                             constrained_layout=True, squeeze=False)
    for ax, d in zip(axes.ravel(), dims):
        for n, p in sorted(curves[d]):
            data = read_csv(p, ["rho", "phi", "count"])
            keep = np.isfinite(data["phi"])
            ax.plot(data["rho"][keep], data["phi"][keep], lw=0.9,
                    label=f"n={n:g}")
        ax.set_xlabel(r"$\bar\rho_\ell$")
        ax.set_ylabel(r"$\Phi_{eff}$")
        ax.set_title(f"d = {d}")
        ax.legend(fontsize=6)

    out = Path(output_dir) / SPEC.output_name
    save_figure(fig, out)
    return out, inputs
