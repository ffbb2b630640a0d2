"""Command-line entry point: `sobtc <subcommand>`.

Subcommands
    mf          fixed points, spinodals, critical loading rate, MF trajectories
    sim         lattice Langevin run -> series.csv (+ snapshots, checkpoint)
    analyze     correlation / spectrum / jump events / coherence from a series
    avalanche   spatio-temporal cluster statistics from a snapshot stream
    potential   quasi-stationary landscapes over an n scan
    sweep       repeat sim+analyze over one axis, emit a scaling table

Every command writes the fully-resolved config (including the seed) next to
its outputs, so any directory can be reproduced byte-for-byte.  Exit codes:
0 ok, 2 config error, 3 numerical failure, 4 missing input.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import io as sio
from .avalanche import king_probability, label_avalanches
from .config import (ConfigError, ExperimentConfig, parse_config_file, resolve)
from .lattice import LatticeConfig, SimulationError, run
from .model import (NoFixedPointError, integrate_mf, lambda_c, mf_fixed_point,
                    spinodals)
from .observables import (autocorrelation, coherence_time, detect_jumps,
                          spectrum, stationary_segment)
from .potential import landscape_scan

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_MISSING = 0, 2, 3, 4


class MissingInputError(FileNotFoundError):
    pass


# --------------------------------------------------------------- utilities


def _outdir(args) -> Path:
    root = args.outdir or os.environ.get("SOBTC_OUTDIR") or "."
    path = Path(root)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _check_overwrite(args, *paths: Path):
    if getattr(args, "force", False):
        return
    clashes = [str(p) for p in paths if p.exists()]
    if clashes:
        raise ConfigError(
            "refusing to overwrite existing outputs (use --force): "
            + ", ".join(clashes))


def _effective(args, overrides: dict) -> ExperimentConfig:
    file_values = parse_config_file(args.config) if getattr(args, "config", None) else {}
    return resolve(file_values, overrides)


def _write_effective_config(outdir: Path, cfg: ExperimentConfig, extra: dict | None = None):
    payload = cfg.as_dict()
    if extra:
        payload.update(extra)
    sio.write_json(outdir / "config.json", payload)


def _lattice_overrides(args) -> dict:
    keys = ("d", "l", "dx", "dt", "t_max", "record_every", "snapshot_every",
            "seed", "init_rho", "init_n")
    out = {k: getattr(args, k, None) for k in keys}
    out["lambda"] = getattr(args, "lam", None)
    for k in ("kappa", "omega", "gamma", "b", "tau", "n_p", "d_t", "r_fac"):
        out[k] = getattr(args, k, None)
    return out


def _add_common_physics(p: argparse.ArgumentParser):
    p.add_argument("--lambda", dest="lam", type=float, help="loading rate")
    p.add_argument("--kappa", type=float)
    p.add_argument("--omega", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--n-p", dest="n_p", type=float)
    p.add_argument("--d-t", dest="d_t", type=float)
    p.add_argument("--r-fac", dest="r_fac", type=float)


def _add_common_lattice(p: argparse.ArgumentParser):
    p.add_argument("--d", type=int, help="spatial dimension (1-3)")
    p.add_argument("--L", dest="l", type=int, help="sites per side")
    p.add_argument("--dx", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--t-max", dest="t_max", type=float)
    p.add_argument("--record-every", dest="record_every", type=float)
    p.add_argument("--snapshot-every", dest="snapshot_every", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--init-rho", dest="init_rho", type=float)
    p.add_argument("--init-n", dest="init_n", type=float)


# ------------------------------------------------------------- subcommands


def cmd_mf(args) -> int:
    cfg = _effective(args, _lattice_overrides(args))
    out = _outdir(args)
    _write_effective_config(out, cfg)
    p = cfg.params

    report: dict = {"lambda": p.lam}
    sp = spinodals(p)    # cheap; always reported (--spinodals kept for clarity)
    report["spinodals"] = None if sp is None else {"n_low": sp[0], "n_high": sp[1]}
    try:
        fp = mf_fixed_point(p)
        report["fixed_point"] = {"rho": fp.rho_star, "n": fp.n_star,
                                 "kind": fp.classification,
                                 "unstable": fp.unstable,
                                 "trace": float(np.trace(fp.jacobian)),
                                 "det": float(np.linalg.det(fp.jacobian))}
    except NoFixedPointError as exc:
        report["fixed_point"] = None
        report["fixed_point_error"] = str(exc)
    if args.lambda_c:
        lc = lambda_c(p)
        report["lambda_c"] = lc
    sio.write_json(out / "mf.json", report)

    if args.trajectory:
        traj = integrate_mf(p, t_max=args.t_max or 5000.0)
        sio.write_csv(out / "mf_trajectory.csv", ["t", "rho", "n"],
                      zip(traj.t, traj.rho, traj.n))
        sio.write_json(out / "mf_cycle.json", {
            "outcome": traj.outcome, "period": traj.period})
    print(f"mf: wrote {out / 'mf.json'}")
    return EXIT_OK


def cmd_sim(args) -> int:
    cfg = _effective(args, _lattice_overrides(args))
    out = _outdir(args)
    series_path = out / "series.csv"
    ckpt_prefix = out / "state"
    snap_path = out / "snapshots.sobf"

    state = None
    lattice = cfg.lattice
    if args.resume:
        if not ckpt_prefix.with_suffix(".ckpt.json").exists():
            raise MissingInputError(f"no checkpoint at {ckpt_prefix}")
        state, saved_cfg, saved_params = sio.load_checkpoint(ckpt_prefix)
        # geometry and physics come from the checkpoint; only the horizon moves
        lattice = replace(saved_cfg, t_max=lattice.t_max)
        cfg = ExperimentConfig(saved_params, lattice, cfg.outdir)
    else:
        _check_overwrite(args, series_path, ckpt_prefix.with_suffix(".ckpt.json"))

    _write_effective_config(out, cfg)
    writer = None
    frame_cb = None
    if lattice.snapshot_every:
        writer = sio.SnapshotWriter(snap_path)
        frame_cb = writer.write
    try:
        result = run(lattice, cfg.params, state=state, frame_callback=frame_cb)
    finally:
        if writer is not None:
            writer.close()

    if args.resume and series_path.exists():
        old_t, old_r, old_n = sio.read_series_csv(series_path)
        keep = old_t < result.t[0] - 1e-9
        result.t = np.concatenate([old_t[keep], result.t])
        result.rho_mean = np.concatenate([old_r[keep], result.rho_mean])
        result.n_mean = np.concatenate([old_n[keep], result.n_mean])
    sio.write_series_csv(series_path, result)
    sio.save_checkpoint(ckpt_prefix, result.final_state, lattice, cfg.params)
    sio.write_json(out / "run_meta.json", result.meta)
    print(f"sim: {len(result.t)} samples -> {series_path}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    src = Path(args.input)
    if not src.exists():
        raise MissingInputError(f"series file not found: {src}")
    out = _outdir(args)
    t, rho, n = sio.read_series_csv(src)
    if len(t) < 4:
        raise SimulationError("series too short to analyze")
    dt = float(t[1] - t[0])

    events = detect_jumps(t, rho, n)
    period_hint = None
    ups = [e.t_event for e in events if e.direction == "up"]
    if len(ups) >= 2:
        period_hint = float(np.mean(np.diff(ups)))
    ts, rs = stationary_segment(t, rho, period_hint=period_hint)

    omega, mag, omega_m, period = spectrum(rs, dt)
    sio.write_csv(out / "spectrum.csv", ["omega", "magnitude"], zip(omega, mag))

    max_lag = min(len(rs) - 1, int((4 * period_hint / dt) if period_hint else len(rs) // 4))
    if max_lag >= 1:
        try:
            corr = autocorrelation(rs, max_lag)
        except ValueError:               # near-zero mean: G is undefined
            pass
        else:
            sio.write_csv(out / "autocorrelation.csv", ["lag", "g"],
                          zip(np.arange(max_lag + 1) * dt, corr))

    sio.write_csv(out / "events.csv",
                  ["direction", "t_event", "n_at_event", "rho_before", "rho_after"],
                  ((e.direction, e.t_event, e.n_at_event, e.rho_before, e.rho_after)
                   for e in events))
    summary = {"omega_m": omega_m, "spectral_period": period,
               "n_events": len(events), "source": str(src)}
    if len(ups) >= 2:
        rep = coherence_time(events)
        summary.update({"t_mean": rep.t_mean, "t_std": rep.t_std,
                        "tau_ctc": rep.tau_ctc, "delta_theta": rep.delta_theta,
                        "cycles": rep.cycles, "low_statistics": rep.low_statistics})
    sio.write_json(out / "coherence.json", summary)
    print(f"analyze: {len(events)} events, omega_m={omega_m} -> {out}")
    return EXIT_OK


def cmd_avalanche(args) -> int:
    src = Path(args.input)
    if not src.exists():
        raise MissingInputError(f"snapshot file not found: {src}")
    out = _outdir(args)
    stats = label_avalanches(sio.iter_snapshots(src),
                             threshold=args.threshold, min_size=args.min_size)
    sio.write_csv(out / "clusters.csv",
                  ["site_count_spacetime", "distinct_spatial_sites", "t_start", "t_end"],
                  ((c.site_count_spacetime, c.distinct_spatial_sites, c.t_start, c.t_end)
                   for c in stats.clusters))
    p_king = king_probability(stats)
    sio.write_json(out / "avalanches.json", {
        "threshold": args.threshold, "min_size": args.min_size,
        "n_sites": stats.n_sites_total, "total_count": stats.total_count,
        "king_count": stats.king_count,
        "p_king": p_king, "p_king_undefined": p_king is None,
        "source": str(src)})
    print(f"avalanche: {stats.total_count} clusters, p_king={p_king} -> {out}")
    return EXIT_OK


def cmd_potential(args) -> int:
    cfg = _effective(args, _lattice_overrides(args))
    out = _outdir(args)
    n_values = [float(s) for s in args.n_values.split(",")]
    d = cfg.lattice.d
    _write_effective_config(out, cfg, {"n_values": n_values})
    curves = landscape_scan(d, n_values, params=cfg.params,
                            l=args.l, t_max=cfg.lattice.t_max,
                            seed=cfg.lattice.seed, cell_size=args.cell_size)
    rows = []
    for n, curve in sorted(curves.items()):
        sio.write_csv(out / f"potential_{d}_{n:g}.csv", ["rho", "phi", "count"],
                      zip(curve.rho_grid, curve.phi, curve.counts))
        rows.append((d, n, curve.n_minima, curve.barrier_height))
    sio.write_csv(out / "phase_diagram.csv",
                  ["d", "n", "n_minima", "barrier_height"], rows)
    print(f"potential: {len(rows)} landscapes -> {out}")
    return EXIT_OK


def _sweep_point(value: float, args) -> tuple:
    """One sweep point: sim + coherence analysis in its own subdirectory."""
    sub = argparse.Namespace(**vars(args))
    sub.outdir = str(Path(_outdir(args)) / f"{args.axis}_{value:g}")
    if args.axis == "L":
        sub.l = int(value)
    elif args.axis == "lambda":
        sub.lam = value
    else:
        setattr(sub, args.axis, value)
    sub.resume = False
    cmd_sim(sub)
    sub.input = str(Path(sub.outdir) / "series.csv")
    cmd_analyze(sub)
    import json
    with open(Path(sub.outdir) / "coherence.json") as fh:
        summary = json.load(fh)
    return value, summary


def cmd_sweep(args) -> int:
    values = [float(s) for s in args.values.split(",")]
    out = _outdir(args)
    results, errors = {}, {}

    def safe(v):
        try:
            return v, _sweep_point(v, args)[1], None
        except Exception as exc:          # per-point isolation
            return v, None, f"{type(exc).__name__}: {exc}"

    if args.threads and args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            outcomes = list(pool.map(safe, values))
    else:
        outcomes = [safe(v) for v in values]
    for v, summary, err in outcomes:
        if err is None:
            results[v] = summary
        else:
            errors[v] = err

    rows = [(v, results[v].get("t_mean"), results[v].get("t_std"),
             results[v].get("tau_ctc"), results[v].get("cycles"))
            for v in sorted(results)]
    sio.write_csv(out / "scaling.csv",
                  [args.axis, "t_mean", "t_std", "tau_ctc", "cycles"], rows)
    sio.write_json(out / "sweep.json",
                   {"axis": args.axis, "values": values,
                    "errors": errors or None})
    print(f"sweep: {len(results)}/{len(values)} points ok -> {out / 'scaling.csv'}")
    return EXIT_OK if results else EXIT_NUMERICAL


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sobtc", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, lattice=True):
        p.add_argument("--config", help="key=value config file")
        p.add_argument("--outdir", help="output directory (or $SOBTC_OUTDIR)")
        p.add_argument("--force", action="store_true",
                       help="overwrite existing outputs")
        p.add_argument("--threads", type=int, default=1,
                       help="worker count (never affects results)")
        _add_common_physics(p)
        if lattice:
            _add_common_lattice(p)

    p = sub.add_parser("mf", help="mean-field fixed points, spinodals, cycles")
    common(p)
    p.add_argument("--spinodals", action="store_true")
    p.add_argument("--lambda-c", dest="lambda_c", action="store_true",
                   help="bisect the critical loading rate")
    p.add_argument("--trajectory", action="store_true",
                   help="also integrate and write the MF trajectory")
    p.set_defaults(func=cmd_mf)

    p = sub.add_parser("sim", help="lattice Langevin simulation")
    common(p)
    p.add_argument("--resume", action="store_true",
                   help="continue bit-exactly from the checkpoint in outdir")
    p.set_defaults(func=cmd_sim)

    p = sub.add_parser("analyze", help="series -> correlation/spectrum/events")
    common(p)
    p.add_argument("input", help="series.csv produced by sim")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("avalanche", help="snapshot stream -> cluster statistics")
    common(p)
    p.add_argument("input", help="snapshots.sobf produced by sim")
    p.add_argument("--threshold", type=float, default=1e-7)
    p.add_argument("--min-size", dest="min_size", type=int, default=2)
    p.set_defaults(func=cmd_avalanche)

    p = sub.add_parser("potential", help="quasi-stationary landscapes over n")
    common(p)
    p.add_argument("--n-values", dest="n_values", required=True,
                   help="comma-separated n values to scan")
    p.add_argument("--cell-size", dest="cell_size", type=int, default=8)
    p.set_defaults(func=cmd_potential)

    p = sub.add_parser("sweep", help="repeat sim+analyze along one axis")
    common(p)
    p.add_argument("--axis", required=True,
                   help="swept key, e.g. L or lambda")
    p.add_argument("--values", required=True,
                   help="comma-separated axis values")
    p.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:            # argparse uses its own exit codes
        return EXIT_CONFIG if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MissingInputError as exc:
        print(f"missing input: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except (SimulationError, NoFixedPointError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
