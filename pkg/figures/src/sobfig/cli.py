"""`sobfig` driver: regenerate all (or selected) figure families.

Usage: sobfig --input-dir DATA --output-dir FIGS [family ...]

Each family reads only the documented CSV/JSON outputs of the simulation
CLI and writes one SVG; a manifest.json records the SHA-256 of every input
consumed.  Running twice on unchanged inputs reproduces every byte.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import mf_phase, potential, scaling, spectra, timeseries
from .core import SchemaError, sha256, write_manifest

FAMILIES = {
    mod.SPEC.figure_id: mod
    for mod in (mf_phase, timeseries, spectra, scaling, potential)
}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="sobfig", description=__doc__)
    ap.add_argument("families", nargs="*", choices=[[], *FAMILIES],
                    help="figure families (default: all)")
    ap.add_argument("--input-dir", required=True)
    ap.add_argument("--output-dir", required=True)
    args = ap.parse_args(argv)

    wanted = args.families or sorted(FAMILIES)
    in_dir, out_dir = Path(args.input_dir), Path(args.output_dir)
    if not in_dir.is_dir():
        print(f"input directory not found: {in_dir}", file=sys.stderr)
        return 4
    out_dir.mkdir(parents=True, exist_ok=True)

    manifest = {}
    failures = 0
    for name in wanted:
        mod = FAMILIES[name]
        try:
            out, inputs = mod.make(in_dir, out_dir)
        except FileNotFoundError as exc:
            print(f"{name}: SKIP ({exc})", file=sys.stderr)
            failures += 1
            continue
        except SchemaError as exc:
            print(f"{name}: schema mismatch: {exc}", file=sys.stderr)
            failures += 1
            continue
        manifest[name] = {
            "output": out.name,
            "inputs": {str(p.relative_to(in_dir)): sha256(p)
                       for p in sorted(set(inputs))},
        }
        print(f"{name}: wrote {out}")
    write_manifest(out_dir, manifest)
    return 0 if manifest and failures == 0 else (3 if manifest else 4)


if __name__ == "__main__":
    sys.exit(main())
