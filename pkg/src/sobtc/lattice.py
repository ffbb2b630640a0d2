"""Spatially extended integration of the two-field Langevin dynamics.

Hypercubic lattices in d = 1, 2, 3, periodic boundaries, synchronous
updates.  Each step splits the active-density update into a deterministic
half (diffusion + nonlinear drift, explicit Euler) and an exact stochastic
half that samples the transition density of the linear drift plus
square-root multiplicative noise through a Poisson-Gamma kernel, so the
absorbing state is preserved exactly.  The total-density update is Euler
with Gaussian noise of variance b*rho*dt.
"""

from __future__ import annotations

import time as _time
from dataclasses import dataclass, field

import numpy as np

from .model import ModelParams, couplings
from .rng import SLOT_DORNIC, SLOT_N_NOISE, CounterRng

# below this shape parameter the Gamma draw goes through the boosted
# (Ahrens-Dieter) path, which is exact and fast for the tiny seeding shapes
_TINY_SHAPE = 0.01
# exp() underflows to 0 below this; smaller Gamma variates are exact zeros
_LOG_UNDERFLOW = -745.0


class SimulationError(RuntimeError):
    """Numerical pathology (NaN / negative density) during a lattice run."""


@dataclass(frozen=True)
class LatticeConfig:
    d: int = 3                      # spatial dimension
    l: int = 32                     # sites per side
    dx: float = 1.0
    dt: float = 0.05
    t_max: float = 1000.0
    record_every: float = 0.25      # sampling interval of spatial averages
    snapshot_every: float | None = None
    seed: int = 0
    init_rho: float = 1e-6          # uniform initial active density
    init_n: float = 1.0             # uniform initial total density
    noise: bool = True              # False: deterministic Euler (MF cross-checks)

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ValueError(f"d must be 1, 2 or 3, got {self.d}")
        if self.l < 2:
            raise ValueError(f"l must be >= 2, got {self.l}")
        if self.dx <= 0 or self.dt <= 0:
            raise ValueError("dx and dt must be > 0")
        if self.t_max < 0:
            raise ValueError("t_max must be >= 0")
        for name in ("record_every", "snapshot_every"):
            v = getattr(self, name)
            if v is None:
                continue
            if v <= 0 or abs(round(v / self.dt) - v / self.dt) > 1e-9:
                raise ValueError(f"{name} must be a positive multiple of dt")
        if self.init_rho < 0 or self.init_n < 0:
            raise ValueError("initial densities must be >= 0")

    @property
    def n_sites(self) -> int:
        return self.l ** self.d

    @property
    def shape(self) -> tuple:
        return (self.l,) * self.d

    def validate_stability(self, params: ModelParams):
        """Explicit-diffusion bound dt <= dx^2 / (2 d D_max)."""
        d_max = max(params.d_t, float(couplings(self.init_n, params).d_rho))
        if d_max > 0:
            bound = self.dx * self.dx / (2.0 * self.d * d_max)
            if self.dt > bound + 1e-12:
                raise ValueError(
                    f"dt={self.dt} violates the diffusion stability bound {bound:.6g}")


@dataclass
class FieldState:
    rho: np.ndarray
    n: np.ndarray
    t: float
    step_index: int

    def copy(self) -> "FieldState":
        return FieldState(self.rho.copy(), self.n.copy(), self.t, self.step_index)


@dataclass
class RunOutput:
    t: np.ndarray
    rho_mean: np.ndarray
    n_mean: np.ndarray
    snapshots: list = field(default_factory=list)   # [(t, rho-field), ...]
    meta: dict = field(default_factory=dict)
    final_state: "FieldState | None" = None


def initial_state(config: LatticeConfig) -> FieldState:
    rho = np.full(config.shape, config.init_rho, dtype=np.float64)
    n = np.full(config.shape, config.init_n, dtype=np.float64)
    return FieldState(rho, n, 0.0, 0)


def laplacian(f: np.ndarray, dx: float = 1.0) -> np.ndarray:
    """2d-point nearest-neighbor Laplacian with periodic boundaries."""
    out = -2.0 * f.ndim * f
    for ax in range(f.ndim):
        out += np.roll(f, 1, axis=ax) + np.roll(f, -1, axis=ax)
    if dx != 1.0:
        out /= dx * dx
    return out


def dornic_sample(rho0, a, beta, sigma2, dt, rng: np.random.Generator):
    """Exact transition sample of d(rho) = (beta + a*rho) dt + sqrt(sigma2*rho) dW.

    With lam_k = 2a / (sigma2*(e^{a dt} - 1)) (limit 2/(sigma2*dt) as a -> 0)
    and shape offset alpha = 2*beta/sigma2, draws
    k ~ Poisson(lam_k * rho0 * e^{a dt}) and rho1 ~ Gamma(alpha + k, 1/lam_k).
    rho1 is exactly 0 when alpha = 0 and k = 0.  Scalar or array arguments.
    """
    scalar = np.ndim(rho0) == 0 and np.ndim(a) == 0 and np.ndim(beta) == 0 \
        and np.ndim(sigma2) == 0
    rho0 = np.atleast_1d(np.asarray(rho0, dtype=np.float64))
    a = np.broadcast_to(np.asarray(a, dtype=np.float64), rho0.shape)
    beta = np.broadcast_to(np.asarray(beta, dtype=np.float64), rho0.shape)
    sigma2 = np.broadcast_to(np.asarray(sigma2, dtype=np.float64), rho0.shape)
    for name, arr in (("rho0", rho0), ("a", a), ("beta", beta), ("sigma2", sigma2)):
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"non-finite {name} in stochastic kernel")
    if np.any(sigma2 <= 0):
        raise ValueError("sigma2 must be > 0")
    if np.any(rho0 < 0) or np.any(beta < 0) or dt <= 0:
        raise ValueError("rho0, beta must be >= 0 and dt > 0")

    adt = a * dt
    growth = np.exp(adt)
    small = np.abs(adt) < 1e-12
    den = np.where(small, 1.0, np.expm1(adt))
    lam_k = np.where(small, 2.0 / (sigma2 * dt), 2.0 * a / (sigma2 * den))
    alpha = 2.0 * beta / sigma2

    k = rng.poisson(lam_k * rho0 * growth)
    shape = alpha + k
    out = np.zeros_like(rho0)

    big = shape >= _TINY_SHAPE
    if big.any():
        out[big] = rng.gamma(shape[big]) / lam_k[big]
    tiny = ~big & (shape > 0)
    if tiny.any():
        # boosted sampling: Gamma(s) = Gamma(s+1) * U^{1/s}; the power factor
        # underflows to an exact 0 for almost all U at seeding-sized shapes
        sh = shape[tiny]
        logu = np.log(rng.random(sh.size)) / sh
        live = logu > _LOG_UNDERFLOW
        if live.any():
            vals = np.zeros(sh.size)
            vals[live] = rng.gamma(sh[live] + 1.0) * np.exp(logu[live])
            out[tiny] = vals / lam_k[tiny]
    return float(out[0]) if scalar else out.reshape(np.shape(rho0))


def step(state: FieldState, params: ModelParams, config: LatticeConfig,
         crng: CounterRng) -> FieldState:
    """One full synchronous update; reads only pre-step neighbor values."""
    rho0, n0 = state.rho, state.n
    c = couplings(n0, params)
    dt = config.dt
    lap_rho = laplacian(rho0, config.dx)
    lap_n = laplacian(n0, config.dx)
    load = params.lam * params.n_p

    if config.noise:
        # deterministic half: diffusion + nonlinear drift, frozen couplings
        rho_half = rho0 + dt * (c.d_rho * lap_rho - c.u3 * rho0 * rho0
                                - c.u4 * rho0 ** 3)
        np.maximum(rho_half, 0.0, out=rho_half)
        # exact stochastic half: linear drift + sqrt multiplicative noise,
        # amplitude frozen at the pre-step density
        sigma2 = c.mu_coeff_lin + c.mu_coeff_quad * rho0
        gen = crng.stream(state.step_index, SLOT_DORNIC)
        rho1 = dornic_sample(rho_half, -c.u2, params.tau * n0, sigma2, dt, gen)
        g = crng.stream(state.step_index, SLOT_N_NOISE).standard_normal(rho0.shape)
        n1 = n0 + dt * (params.d_t * lap_n - params.b * rho0 + load) \
            + np.sqrt(params.b * rho0 * dt) * g
        np.maximum(n1, 0.0, out=n1)
    else:
        # noiseless mode is a single Euler update of the full drift, the
        # exact deterministic limit used by the mean-field cross-checks
        rho1 = rho0 + dt * (c.d_rho * lap_rho + params.tau * n0 - c.u2 * rho0
                            - c.u3 * rho0 * rho0 - c.u4 * rho0 ** 3)
        np.maximum(rho1, 0.0, out=rho1)
        n1 = n0 + dt * (params.d_t * lap_n - params.b * rho0 + load)
        np.maximum(n1, 0.0, out=n1)

    if not (np.all(np.isfinite(rho1)) and np.all(np.isfinite(n1))):
        bad = np.argwhere(~(np.isfinite(rho1) & np.isfinite(n1)))[0]
        raise SimulationError(
            f"non-finite density at site {tuple(bad)}, t={state.t + dt:.6g}")
    return FieldState(rho1, n1, state.t + dt, state.step_index + 1)


def run(config: LatticeConfig, params: ModelParams,
        state: FieldState | None = None,
        frame_callback=None, keep_snapshots: bool = False,
        progress_callback=None) -> RunOutput:
    """Advance t_max/dt steps recording spatial averages.

    `state` resumes from a checkpointed field state (bit-exact: randomness is
    keyed by absolute step index).  `frame_callback(t, rho)` streams full-field
    frames every snapshot_every time units; `keep_snapshots` retains them in
    memory instead.
    """
    config.validate_stability(params)
    crng = CounterRng(config.seed)
    if state is None:
        state = initial_state(config)
    elif state.rho.shape != config.shape:
        raise ValueError("resume state geometry does not match config")

    n_steps = int(round(config.t_max / config.dt))
    rec_stride = int(round(config.record_every / config.dt))
    snap_stride = (int(round(config.snapshot_every / config.dt))
                   if config.snapshot_every else 0)
    first_step = state.step_index
    last_step = first_step + n_steps

    times, rho_means, n_means = [], [], []
    snapshots = []

    def _record(st):
        times.append(st.t)
        rho_means.append(float(st.rho.mean()))
        n_means.append(float(st.n.mean()))

    def _snapshot(st):
        if frame_callback is not None:
            frame_callback(st.t, st.rho)
        if keep_snapshots:
            snapshots.append((st.t, st.rho.copy()))

    wall0 = _time.perf_counter()
    if state.step_index % rec_stride == 0:
        _record(state)
    if snap_stride and state.step_index % snap_stride == 0:
        _snapshot(state)
    while state.step_index < last_step:
        state = step(state, params, config, crng)
        if state.step_index % rec_stride == 0:
            _record(state)
        if snap_stride and state.step_index % snap_stride == 0:
            _snapshot(state)
        if progress_callback is not None:
            progress_callback(state)

    meta = {
        "config": config.__dict__ | {},
        "params": params.__dict__ | {},
        "seed": config.seed,
        "final_step_index": state.step_index,
        "wall_seconds": _time.perf_counter() - wall0,
        "version": __import__("sobtc").__version__,
    }
    return RunOutput(np.array(times), np.array(rho_means), np.array(n_means),
                     snapshots, meta, state)
