"""File formats: series CSV, JSON sidecars, binary snapshot frames, checkpoints.

All floats round-trip exactly (17 significant digits in CSV, little-endian
64-bit in binary), so re-running a seeded configuration reproduces files
byte for byte on any platform.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .lattice import FieldState, LatticeConfig, RunOutput
from .model import ModelParams

_FRAME_MAGIC = b"SOBF"


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_series_csv(path, out: RunOutput):
    path = Path(path)
    with path.open("w") as fh:
        fh.write("t,rho_mean,n_mean\n")
        for t, r, n in zip(out.t, out.rho_mean, out.n_mean):
            fh.write(f"{_fmt(t)},{_fmt(r)},{_fmt(n)}\n")


def read_series_csv(path):
    data = np.genfromtxt(path, delimiter=",", names=True)
    data = np.atleast_1d(data)
    return data["t"], data["rho_mean"], data["n_mean"]


def write_csv(path, header: list[str], rows):
    """Generic CSV with full-precision floats; non-floats written via str()."""
    with Path(path).open("w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) if isinstance(v, float) else str(v)
                              for v in row) + "\n")


def write_json(path, obj):
    with Path(path).open("w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj)}")


class SnapshotWriter:
    """Streams full-field frames to a binary file plus a JSON index.

    Frame layout: magic 'SOBF', uint32 d, uint32 L, float64 t, then L^d
    float64 values row-major, all little-endian.
    """

    def __init__(self, path):
        self.path = Path(path)
        self._fh = self.path.open("wb")
        self._index = []

    def write(self, t: float, field: np.ndarray):
        offset = self._fh.tell()
        self._fh.write(_FRAME_MAGIC)
        self._fh.write(struct.pack("<IId", field.ndim, field.shape[0], float(t)))
        self._fh.write(np.ascontiguousarray(field, dtype="<f8").tobytes())
        self._index.append({"t": float(t), "offset": offset})

    def close(self):
        self._fh.close()
        write_json(self.path.with_suffix(self.path.suffix + ".index.json"),
                   {"frames": self._index})

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def iter_snapshots(path):
    """Yield (t, field) frames from a snapshot file, two-frames-in-memory safe."""
    path = Path(path)
    with path.open("rb") as fh:
        while True:
            magic = fh.read(4)
            if not magic:
                return
            if magic != _FRAME_MAGIC:
                raise ValueError(f"bad frame magic in {path}")
            d, l, t = struct.unpack("<IId", fh.read(16))
            count = l ** d
            buf = fh.read(count * 8)
            if len(buf) != count * 8:
                raise ValueError(f"truncated frame in {path}")
            yield t, np.frombuffer(buf, dtype="<f8").reshape((l,) * d)


def save_checkpoint(path_prefix, state: FieldState, config: LatticeConfig,
                    params: ModelParams):
    """JSON metadata + raw binary field dump (rho then n, little-endian f8)."""
    prefix = Path(path_prefix)
    write_json(prefix.with_suffix(".ckpt.json"), {
        "t": state.t,
        "step_index": state.step_index,
        "seed": config.seed,
        "config": config.__dict__ | {},
        "params": params.__dict__ | {},
    })
    with prefix.with_suffix(".ckpt.bin").open("wb") as fh:
        fh.write(np.ascontiguousarray(state.rho, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(state.n, dtype="<f8").tobytes())


def load_checkpoint(path_prefix):
    """Returns (state, config, params) saved by `save_checkpoint`."""
    prefix = Path(path_prefix)
    with prefix.with_suffix(".ckpt.json").open() as fh:
        meta = json.load(fh)
    config = LatticeConfig(**meta["config"])
    params = ModelParams(**meta["params"])
    raw = prefix.with_suffix(".ckpt.bin").read_bytes()
    count = config.n_sites
    rho = np.frombuffer(raw[:count * 8], dtype="<f8").reshape(config.shape).copy()
    n = np.frombuffer(raw[count * 8:], dtype="<f8").reshape(config.shape).copy()
    state = FieldState(rho, n, meta["t"], meta["step_index"])
    return state, config, params
