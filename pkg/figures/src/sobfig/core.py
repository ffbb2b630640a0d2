"""Shared plumbing: figure specs, strict CSV/JSON readers, deterministic output.

The scripts in this package only ever read the CSV/JSON files documented by
the simulation CLI; they never import the simulator.  All output is SVG with
pinned styles and scrubbed metadata so re-running on identical inputs yields
identical bytes, plus a manifest recording the SHA-256 of every input used.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

matplotlib.rcParams.update({
    "svg.hashsalt": "sobfig",        # stable ids inside the SVG
    "figure.dpi": 100,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.0,
})


class SchemaError(ValueError):
    """Input file does not match the documented column layout."""


@dataclass
class FigureSpec:
    figure_id: str                       # e.g. "fig2d"
    input_globs: list                    # relative to the input directory
    output_name: str                     # file name inside the output directory
    options: dict = field(default_factory=dict)

    def resolve_inputs(self, input_dir: Path) -> list[Path]:
        found = []
        for pattern in self.input_globs:
            hits = sorted(Path(input_dir).glob(pattern))
            if not hits:
                raise FileNotFoundError(
                    f"{self.figure_id}: no input matches {pattern!r} under {input_dir}")
            found.extend(hits)
        return found


def read_csv(path, columns: list[str]) -> dict:
    """Strict CSV reader: the header must contain exactly `columns`."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        missing = [c for c in columns if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing column(s) {missing}; header is {header}")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    out = {}
    for col in columns:
        j = header.index(col)
        vals = [r[j] for r in rows]
        try:
            out[col] = np.array([float(v) for v in vals])
        except ValueError:
            out[col] = np.array(vals)    # non-numeric column (e.g. direction)
    return out


def read_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def save_figure(fig, out_path: Path):
    """Deterministic SVG: fixed hash salt, no creation date."""
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, format="svg", metadata={"Date": None})
    plt.close(fig)


def write_manifest(out_dir: Path, entries: dict):
    """entries: figure_id -> {"inputs": {path: sha}, "output": name}."""
    payload = json.dumps(entries, indent=2, sort_keys=True)
    (Path(out_dir) / "manifest.json").write_text(payload + "\n", encoding="utf-8")
