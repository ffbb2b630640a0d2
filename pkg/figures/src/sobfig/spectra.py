"""Correlation/spectrum figure family."""

from __future__ import annotations

from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np

from .core import FigureSpec, read_csv, read_json, save_figure

SPEC = FigureSpec(
    figure_id="fig4d_spectra",
    input_globs=["ctc_*/spectrum.csv"],
    output_name="fig4d_spectra.svg",
)


def make(input_dir: Path, output_dir: Path) -> Path:
    inputs = SPEC.resolve_inputs(input_dir)
    spectra = [p for p in inputs if p.name == "spectrum.csv"]

    fig, (ax_c, ax_s) = plt.subplots(1, 2, figsize=(7.5, 2.8),
                                     constrained_layout=True)
    for src in spectra:
        label = src.parent.name
        spec = read_csv(src, ["omega", "magnitude"])
        omega, mag = spec["omega"], spec["magnitude"]
        keep = omega > 0
        if keep.any():
            ax_s.semilogy(omega[keep], mag[keep], lw=0.7, label=label)
        coh = src.parent / "coherence.json"
        if coh.exists():
            rep = read_json(coh)
            if rep.get("omega_m"):
                ax_s.axvline(rep["omega_m"], color="gray", lw=0.5, ls=":")
            inputs.append(coh)
        corr = src.parent / "autocorrelation.csv"
        if corr.exists():
            g = read_csv(corr, ["lag", "g"])
            ax_c.plot(g["lag"], g["g"], lw=0.7, label=label)
            inputs.append(corr)

    ax_c.set_xlabel(r"$\Delta t$")
    ax_c.set_ylabel(r"$G(\Delta t)$")
    ax_c.legend(fontsize=7)
    # zoom on the low-frequency structure around the fundamental
    if spectra:
        ax_s.set_xlim(0, 0.3)
    ax_s.set_xlabel(r"$\omega$")
    ax_s.set_ylabel("|FFT|")
    ax_s.legend(fontsize=7)

    out = Path(output_dir) / SPEC.output_name
    save_figure(fig, out)
    return out, inputs
