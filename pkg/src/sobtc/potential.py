"""Effective potentials: mean-field quartic and simulation-based landscapes.

Two views of the same landscape.  `mf_potential` is the exact antiderivative
of the uniform drift, V(rho) = u2 rho^2/2 + u3 rho^3/3 + u4 rho^4/4 - tau n
rho, whose minima are the saddle-point phases.  `quasistationary_potential`
estimates the fluctuation-renormalized landscape on a lattice at conserved
total density (b = lam = 0) by histogramming coarse-graining-cell averages of
the active density and inverting, Phi = -ln P.  The number of minima and the
barrier heights of the latter carry the dimensionality dependence of the
transition (continuous in d = 1, discontinuous with a barrier for d >= 2).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import gaussian_filter1d

from .lattice import LatticeConfig, initial_state, run
from .model import ModelParams, couplings

MIN_CELL_SAMPLES = 10_000     # below this the histogram landscape is flagged
DEFAULT_BIN_WIDTH = 0.01
DEFAULT_CELL_SIZE = 8


@dataclass
class PotentialCurve:
    """A potential profile on a density grid with its extracted structure.

    `minima` is a list of (rho, phi) pairs in increasing rho; `barrier` is
    (height, rho_location) for the saddle between the two deepest-flanked
    minima, with height measured from the higher of the two flanking minima
    (the smaller escape barrier).  `counts` holds per-bin sample counts for
    histogram-derived curves (empty for analytic ones); bins with zero counts
    appear as NaN gaps in `phi`, never as infinities.
    """

    rho_grid: np.ndarray
    phi: np.ndarray
    minima: list = field(default_factory=list)
    barrier: tuple | None = None          # (height, rho_location)
    counts: np.ndarray | None = None
    insufficient_samples: bool = False

    @property
    def n_minima(self) -> int:
        return len(self.minima)

    @property
    def barrier_height(self) -> float:
        return self.barrier[0] if self.barrier is not None else 0.0


def _mf_phi(rho, n, params: ModelParams):
    c = couplings(n, params)
    rho = np.asarray(rho, dtype=np.float64)
    return (c.u2 * rho**2 / 2.0 + c.u3 * rho**3 / 3.0
            + c.u4 * rho**4 / 4.0 - params.tau * n * rho)


def mf_potential(n, params: ModelParams, rho_grid=None) -> PotentialCurve:
    """Mean-field potential V(rho) at fixed n, with exact minima/barrier.

    Extrema are the real roots of V'(rho) = u4 rho^3 + u3 rho^2 + u2 rho -
    tau n inside the grid range, classified by the sign of V''; this keeps
    the reported minima consistent with `mf_drift` to machine precision
    rather than to grid resolution.
    """
    if rho_grid is None:
        rho_grid = np.arange(0.0, 2.5 + DEFAULT_BIN_WIDTH / 2, DEFAULT_BIN_WIDTH)
    rho_grid = np.asarray(rho_grid, dtype=np.float64)
    if rho_grid.ndim != 1 or len(rho_grid) < 2 or np.any(np.diff(rho_grid) <= 0):
        raise ValueError("rho_grid must be strictly increasing, length >= 2")

    c = couplings(n, params)
    phi = _mf_phi(rho_grid, n, params)

    # V'(rho) = u4 rho^3 + u3 rho^2 + u2 rho - tau n
    roots = np.roots([c.u4, c.u3, c.u2, -params.tau * n])
    real = np.sort(roots[np.abs(roots.imag) < 1e-9].real)
    lo, hi = rho_grid[0], rho_grid[-1]
    minima, saddles = [], []
    for r in real:
        if not (lo - 1e-12 <= r <= hi + 1e-12):
            continue
        curv = 3.0 * c.u4 * r * r + 2.0 * c.u3 * r + c.u2
        entry = (float(r), float(_mf_phi(r, n, params)))
        if curv > 0:
            minima.append(entry)
        elif curv < 0:
            saddles.append(entry)
    barrier = None
    if len(minima) >= 2 and saddles:
        r_s, phi_s = saddles[0]
        flank = max(phi for _, phi in minima[:2])
        barrier = (phi_s - flank, r_s)
    return PotentialCurve(rho_grid, phi, minima, barrier)


def _extract_structure(rho_centers, phi, min_prominence: float = 0.0):
    """Local minima and the dominant barrier of a (possibly gappy) profile.

    NaN gaps (unsampled bins) are treated as high ground when locating
    wells, but the barrier value itself is read off sampled bins only.
    `min_prominence` (in units of Phi = log-probability) suppresses the
    jagged sub-minima a finite histogram always carries.
    """
    from scipy.signal import find_peaks

    phi = np.asarray(phi, dtype=np.float64)
    finite = np.isfinite(phi)
    if not finite.any():
        return [], None
    fill = np.nanmax(phi[finite]) + 10.0
    prof = np.where(finite, phi, fill)
    padded = np.concatenate([[-np.inf], -prof, [-np.inf]])
    kw = {"prominence": min_prominence} if min_prominence > 0 else {}
    peaks, _ = find_peaks(padded, **kw)
    idx = [i - 1 for i in peaks if finite[i - 1]]
    minima = [(float(rho_centers[i]), float(prof[i])) for i in idx]
    barrier = None
    if len(minima) >= 2:
        by_depth = sorted(zip(minima, idx), key=lambda mi: mi[0][1])[:2]
        (i_a, i_b) = sorted(mi[1] for mi in by_depth)
        inner = np.arange(i_a + 1, i_b)
        inner = inner[finite[inner]]
        if len(inner) == 0:
            return [min(minima, key=lambda m: m[1])], None
        j = inner[np.argmax(prof[inner])]
        flank = max(mi[0][1] for mi in by_depth)
        barrier = (float(prof[j] - flank), float(rho_centers[j]))
    return sorted(minima), barrier


def quasistationary_potential(params: ModelParams, n_fixed: float,
                              config: LatticeConfig,
                              cell_size: int = DEFAULT_CELL_SIZE,
                              bin_width: float = DEFAULT_BIN_WIDTH,
                              transient_frac: float = 0.2,
                              init_rhos=(1e-6, 1.0),
                              min_prominence: float = 0.0) -> PotentialCurve:
    """Phi_eff(rho) = -ln P(rho) from cell averages at conserved n.

    Forces b = lam = 0 so that the (uniform) total density stays at
    `n_fixed` exactly, while the default seed tau*n keeps regenerating
    activity out of the absorbing state.  One run per entry of `init_rhos`
    (low and high starts populate both wells in the bistable window); cell
    averages after the transient are pooled into one histogram.  Phi is
    Gaussian-smoothed over 3 bins before minima/barrier extraction and
    shifted so its minimum is zero.
    """
    if config.l % cell_size != 0:
        raise ValueError(f"l={config.l} not divisible by cell_size={cell_size}")
    p = params.with_(b=0.0, lam=0.0)
    counts = np.zeros(0, dtype=np.int64)
    t_min = transient_frac * config.t_max
    n_cells_side = config.l // cell_size

    def cell_means(rho):
        r = rho
        for axis in range(config.d):
            r = r.reshape(r.shape[:axis] + (n_cells_side, cell_size)
                          + r.shape[axis + 1:]).mean(axis=axis + 1)
        return r.ravel()

    for i, rho0 in enumerate(init_rhos):
        # cell samples are taken at the record cadence, streamed via the
        # snapshot callback so full frames never accumulate in memory
        cfg = LatticeConfig(d=config.d, l=config.l, dx=config.dx, dt=config.dt,
                            t_max=config.t_max, record_every=config.record_every,
                            snapshot_every=config.record_every,
                            seed=config.seed + i, init_rho=rho0, init_n=n_fixed,
                            noise=config.noise)
        bins_list = []

        def collect(t, rho, _bins=bins_list):
            if t >= t_min:
                _bins.append(np.floor_divide(cell_means(rho), bin_width).astype(np.int64))

        run(cfg, p, frame_callback=collect)
        if bins_list:
            samples = np.concatenate(bins_list)
            width = max(len(counts), int(samples.max()) + 1)
            if width > len(counts):
                counts = np.concatenate([counts, np.zeros(width - len(counts), np.int64)])
            counts += np.bincount(samples, minlength=width)

    total = int(counts.sum())
    insufficient = total < MIN_CELL_SAMPLES
    if insufficient:
        warnings.warn(f"only {total} cell samples (< {MIN_CELL_SAMPLES}); "
                      "landscape statistics are unreliable", stacklevel=2)
    centers = (np.arange(len(counts)) + 0.5) * bin_width
    if total == 0:
        return PotentialCurve(centers, np.full(len(counts), np.nan),
                              counts=counts, insufficient_samples=True)
    smooth = gaussian_filter1d(counts.astype(np.float64), sigma=1.0,
                               truncate=1.5, mode="constant")
    with np.errstate(divide="ignore"):
        phi = np.where(smooth > 0, -np.log(smooth / total), np.nan)
    phi -= np.nanmin(phi)
    minima, barrier = _extract_structure(centers, phi, min_prominence)
    return PotentialCurve(centers, phi, minima, barrier,
                          counts=counts, insufficient_samples=insufficient)


def landscape_scan(d: int, n_values, params: ModelParams = None,
                   l: int = None, t_max: float = 2000.0, seed: int = 0,
                   cell_size: int = DEFAULT_CELL_SIZE,
                   init_rhos=(1e-6, 1.0), min_prominence: float = 0.0,
                   progress_callback=None) -> dict:
    """Quasi-stationary landscapes over an n scan at fixed dimension.

    Returns {n: PotentialCurve}.  Default system sizes keep the cell count
    and runtime comparable across d: L = 4096 (d=1), 64 (d=2), 32 (d=3).
    """
    if params is None:
        params = ModelParams()
    if l is None:
        l = {1: 4096, 2: 64, 3: 32}[d]
    out = {}
    for i, n in enumerate(n_values):
        cfg = LatticeConfig(d=d, l=l, t_max=t_max, seed=seed + 1000 * i)
        out[float(n)] = quasistationary_potential(params, float(n), cfg,
                                                  cell_size=cell_size,
                                                  init_rhos=init_rhos,
                                                  min_prominence=min_prominence)
        if progress_callback is not None:
            progress_callback(d, float(n))
    return out
