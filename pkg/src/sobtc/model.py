"""Mean-field layer: parameters, coupling coefficients, fixed points, cycles.

Everything here treats the spatially uniform, noiseless limit of the
two-field dynamics

    d(rho)/dt = tau*n - u2(n)*rho - u3(n)*rho^2 - u4(n)*rho^3
    d(n)/dt   = -b*rho + lam

where the n-dependent coefficients come from `couplings`.  All rates are
measured in units of the spontaneous deactivation rate (set to 1), so time
is dimensionless throughout.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq


class NoFixedPointError(RuntimeError):
    """No root of the stationarity condition inside the search bracket."""


@dataclass(frozen=True)
class ModelParams:
    """Physical constants of the two-field model.

    Defaults are the canonical parameter set used for all headline runs:
    kappa=0, omega=0.5, gamma=2, b=0.01, tau=1e-7, d_t=1, n_p=1.
    """

    kappa: float = 0.0      # incoherent activation rate
    omega: float = 0.5      # coherent activation rate
    gamma: float = 2.0      # total dephasing (>= 1 since it includes the decay unit)
    b: float = 0.01         # loss fraction per deactivation
    lam: float = 3.2e-3     # loading rate
    tau: float = 1e-7       # seed driving
    n_p: float = 1.0        # pump density (enters only as lam*n_p)
    d_t: float = 1.0        # thermal diffusivity
    r_fac: float = 1.0      # facilitation radius (lattice units)

    def __post_init__(self):
        for name in ("kappa", "omega", "gamma", "b", "lam", "tau", "n_p", "d_t", "r_fac"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {v}")
        if self.gamma < 1.0:
            raise ValueError(f"gamma must be >= 1 (includes the unit decay rate), got {self.gamma}")
        if not 0.0 <= self.b <= 1.0:
            raise ValueError(f"b must lie in [0, 1], got {self.b}")

    def with_(self, **kw) -> "ModelParams":
        return replace(self, **kw)


@dataclass
class Couplings:
    """n-dependent drift/noise coefficients.  Fields may be scalars or arrays."""

    u2: float | np.ndarray
    u3: float | np.ndarray
    u4: float | np.ndarray
    mu_coeff_lin: float | np.ndarray
    mu_coeff_quad: float | np.ndarray
    d_rho: float | np.ndarray

    def mu(self, rho):
        """Noise-amplitude function mu(rho) = lin*rho + quad*rho^2."""
        return self.mu_coeff_lin * rho + self.mu_coeff_quad * rho * rho


def couplings(n, params: ModelParams) -> Couplings:
    """Evaluate the coarse-grained coefficients at total density n (scalar or array)."""
    n = np.asarray(n, dtype=float) if np.ndim(n) else float(n)
    if np.any(np.asarray(n) < 0):
        raise ValueError("total density n must be >= 0")
    k, w, g = params.kappa, params.omega, params.gamma
    s = n * k + g
    u2 = 1.0 - n * k - 256.0 * n * n * w**4 / s**7
    u3 = 2.0 * (k - 2.0 * n * w * w / s)
    u4 = 8.0 * w * w / s
    mu_lin = 1.0 + n * k
    mu_quad = 4.0 * n * w * w / (s * s)
    d_rho = params.d_t + n * k * params.r_fac**2 / 2.0
    return Couplings(u2, u3, u4, mu_lin, mu_quad, d_rho)


def coupling_derivatives(n, params: ModelParams):
    """Closed-form d(u2)/dn, d(u3)/dn, d(u4)/dn (scalar or array n)."""
    k, w, g = params.kappa, params.omega, params.gamma
    s = np.asarray(n, dtype=float) * k + g if np.ndim(n) else n * k + g
    du2 = -k - 256.0 * w**4 * n * (2.0 * s - 7.0 * n * k) / s**8
    du3 = -4.0 * w * w * g / (s * s)
    du4 = -8.0 * w * w * k / (s * s)
    return du2, du3, du4


def mf_drift(rho, n, params: ModelParams):
    """Right-hand side of the uniform noiseless dynamics: (drho_dt, dn_dt)."""
    if np.any(np.asarray(rho) < 0) or np.any(np.asarray(n) < 0):
        raise ValueError("densities must be >= 0")
    c = couplings(n, params)
    drho = params.tau * n - c.u2 * rho - c.u3 * rho * rho - c.u4 * rho**3
    dn = -params.b * rho + params.lam * params.n_p
    return drho, dn


def mf_jacobian(rho, n, params: ModelParams) -> np.ndarray:
    """Analytic 2x2 Jacobian of `mf_drift` at (rho, n)."""
    c = couplings(n, params)
    du2, du3, du4 = coupling_derivatives(n, params)
    j11 = -(c.u2 + 2.0 * c.u3 * rho + 3.0 * c.u4 * rho * rho)
    j12 = params.tau - (du2 * rho + du3 * rho * rho + du4 * rho**3)
    return np.array([[j11, j12], [-params.b, 0.0]])


def _classify(eigs: np.ndarray, tol: float = 1e-10) -> str:
    re = eigs.real
    if re[0] * re[1] < 0 and np.all(np.abs(eigs.imag) < tol):
        return "saddle"
    if np.max(np.abs(re)) < tol:
        return "marginal"
    spiral = np.any(np.abs(eigs.imag) > tol)
    if np.max(re) > 0:
        return "unstable-spiral" if spiral else "unstable-node"
    return "stable-spiral" if spiral else "stable-node"


@dataclass
class FixedPoint:
    rho_star: float
    n_star: float
    jacobian: np.ndarray
    eigenvalues: np.ndarray
    classification: str

    @property
    def unstable(self) -> bool:
        return self.classification.startswith("unstable") or self.classification == "saddle"


def _stationarity_residual(n, rho_star, params):
    c = couplings(n, params)
    return params.tau * n - rho_star * (c.u2 + c.u3 * rho_star + c.u4 * rho_star * rho_star)


def mf_fixed_point(params: ModelParams, n_max: float = 50.0, scan_points: int = 4001) -> FixedPoint:
    """Locate the uniform fixed point: rho* = lam/b, n* from the stationarity root.

    If several roots exist in [0, n_max] a warning lists them and the
    smallest non-negative one is returned.
    """
    if params.b <= 0:
        raise ValueError("fixed point requires b > 0")
    rho_star = params.lam * params.n_p / params.b
    if rho_star == 0.0:
        n_star = 0.0
    else:
        grid = np.linspace(0.0, n_max, scan_points)
        vals = _stationarity_residual(grid, rho_star, params)
        roots = []
        for i in range(len(grid) - 1):
            if vals[i] == 0.0:
                roots.append(grid[i])
            elif vals[i] * vals[i + 1] < 0:
                roots.append(brentq(_stationarity_residual, grid[i], grid[i + 1],
                                    args=(rho_star, params), xtol=1e-15, rtol=8.9e-16))
        if vals[-1] == 0.0:
            roots.append(grid[-1])
        roots = [r for r in roots if r >= 0]
        if not roots:
            raise NoFixedPointError(
                f"no stationarity root in [0, {n_max}] for rho*={rho_star}")
        if len(roots) > 1:
            warnings.warn(f"multiple stationarity roots {roots}; returning the smallest",
                          stacklevel=2)
        n_star = min(roots)
    jac = mf_jacobian(rho_star, n_star, params)
    eigs = np.linalg.eigvals(jac)
    return FixedPoint(rho_star, n_star, jac, eigs, _classify(eigs))


def spinodals(params: ModelParams, n_max: float = 50.0, scan_points: int = 4001):
    """Bistable window (n_low, n_high) of the conserved-n drift, or None.

    n_high: the absorbing branch loses linear stability (u2 = 0).
    n_low:  the active branch first appears (u3^2 = 4 u2 u4 with u3 < 0).
    """
    grid = np.linspace(0.0, n_max, scan_points)
    c = couplings(grid, params)

    def u2_of(n):
        return couplings(n, params).u2

    def disc_of(n):
        cc = couplings(n, params)
        return cc.u3 * cc.u3 - 4.0 * cc.u2 * cc.u4

    n_high = None
    sign = np.sign(c.u2)
    for i in range(len(grid) - 1):
        if sign[i] > 0 and sign[i + 1] <= 0:
            n_high = brentq(u2_of, grid[i], grid[i + 1], xtol=1e-12)
            break

    disc = c.u3 * c.u3 - 4.0 * c.u2 * c.u4
    n_low = None
    for i in range(len(grid) - 1):
        if disc[i] < 0 <= disc[i + 1]:
            root = brentq(disc_of, grid[i], grid[i + 1], xtol=1e-12)
            if couplings(root, params).u3 < 0:
                n_low = root
                break
    if n_low is None or n_high is None or not (n_low < n_high):
        return None
    return (n_low, n_high)


@dataclass
class MfTrajectory:
    t: np.ndarray
    rho: np.ndarray
    n: np.ndarray
    period: float | None           # mean of post-transient cycle intervals
    periods: np.ndarray            # all post-transient intervals
    crossings: np.ndarray          # upward Poincare crossing times
    outcome: str                   # "cycle", "fixed-point" or "no-convergence"


def integrate_mf(params: ModelParams, init=(1e-6, 1.0), t_max: float = 5000.0,
                 dt: float = 0.1, method: str = "rk45",
                 poincare_rho: float = 0.2, transient_frac: float = 0.2) -> MfTrajectory:
    """Integrate the uniform noiseless dynamics and extract a cycle period.

    method="rk45" uses adaptive error-controlled stepping (the default);
    method="euler" uses fixed-step explicit Euler at step dt, which is the
    exact deterministic limit of the lattice integrator and exists for
    cross-checking it.
    """
    if dt <= 0 or t_max < 0:
        raise ValueError("dt must be > 0 and t_max >= 0")
    t_eval = np.arange(int(round(t_max / dt)) + 1) * dt

    if method == "euler":
        rho = np.empty_like(t_eval)
        n = np.empty_like(t_eval)
        r, m = float(init[0]), float(init[1])
        rho[0], n[0] = r, m
        for i in range(1, len(t_eval)):
            dr, dm = mf_drift(r, m, params)
            r = max(r + dt * dr, 0.0)
            m = max(m + dt * dm, 0.0)
            rho[i], n[i] = r, m
    elif method == "rk45":
        def rhs(_t, y):
            c = couplings(max(y[1], 0.0), params)
            r = y[0]
            return (params.tau * y[1] - c.u2 * r - c.u3 * r * r - c.u4 * r**3,
                    -params.b * r + params.lam * params.n_p)

        sol = solve_ivp(rhs, (0.0, t_eval[-1]), list(init), method="RK45",
                        t_eval=t_eval, rtol=1e-8, atol=[1e-12, 1e-9])
        if not sol.success:
            raise RuntimeError(f"ODE integration failed: {sol.message}")
        rho, n = sol.y[0], sol.y[1]
    else:
        raise ValueError(f"unknown method {method!r}")

    crossings = upward_crossings(t_eval, rho, poincare_rho)
    t0 = transient_frac * t_max
    crossings = crossings[crossings >= t0]
    periods = np.diff(crossings)
    if len(periods) >= 2:
        period = float(np.mean(periods))
        outcome = "cycle"
    else:
        period = None
        periods = np.array([])
        # fixed point if the late-time state barely moves
        tail = slice(max(len(t_eval) - max(len(t_eval) // 10, 2), 0), None)
        dr, dn = mf_drift(max(rho[-1], 0.0), max(n[-1], 0.0), params)
        still = (np.ptp(rho[tail]) < 1e-6 * (1.0 + abs(rho[-1]))
                 and np.ptp(n[tail]) < 1e-6 * (1.0 + abs(n[-1])))
        outcome = "fixed-point" if still or (abs(dr) < 1e-9 and abs(dn) < 1e-9) else "no-convergence"
    return MfTrajectory(t_eval, rho, n, period, periods, crossings, outcome)


def upward_crossings(t: np.ndarray, x: np.ndarray, threshold: float) -> np.ndarray:
    """Linearly interpolated times where x crosses threshold from below."""
    below = x[:-1] < threshold
    above = x[1:] >= threshold
    idx = np.nonzero(below & above)[0]
    frac = (threshold - x[idx]) / (x[idx + 1] - x[idx])
    return t[idx] + frac * (t[idx + 1] - t[idx])


@dataclass
class LambdaCMap:
    axis1_name: str
    axis1_values: np.ndarray
    axis2_name: str
    axis2_values: np.ndarray
    lambda_c: np.ndarray           # shape (len(axis1), len(axis2)); NaN = no transition/error
    status: list                   # same shape, "ok" | "no-transition" | error text


def lambda_c(params: ModelParams, lam_lo: float = 1e-5, lam_hi: float = 1.0,
             coarse: int = 41, rel_width: float = 1e-4) -> float | None:
    """Upper critical loading rate: largest lam where the fixed point is unstable.

    Returns None when the fixed point never destabilizes on the coarse grid.
    """
    lams = np.geomspace(lam_lo, lam_hi, coarse)
    unstable = np.zeros(len(lams), dtype=bool)
    for i, lv in enumerate(lams):
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                unstable[i] = mf_fixed_point(params.with_(lam=lv)).unstable
        except NoFixedPointError:
            unstable[i] = False
    if not unstable.any():
        return None
    hi_idx = int(np.max(np.nonzero(unstable)[0]))
    if hi_idx == len(lams) - 1:
        return float(lams[-1])    # still unstable at the top of the bracket
    lo, hi = lams[hi_idx], lams[hi_idx + 1]
    while (hi - lo) / hi > rel_width:
        mid = np.sqrt(lo * hi)
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                mid_unstable = mf_fixed_point(params.with_(lam=mid)).unstable
        except NoFixedPointError:
            mid_unstable = False
        if mid_unstable:
            lo = mid
        else:
            hi = mid
    return float(0.5 * (lo + hi))


def lambda_c_scan(params_base: ModelParams,
                  axis1=("kappa", (0.0, 0.5, 1.0)),
                  axis2=("omega", (0.25, 0.5, 0.75)),
                  **kw) -> LambdaCMap:
    """Map the critical loading rate over any two parameter axes."""
    name1, vals1 = axis1
    name2, vals2 = axis2
    vals1 = np.asarray(vals1, dtype=float)
    vals2 = np.asarray(vals2, dtype=float)
    out = np.full((len(vals1), len(vals2)), np.nan)
    status = [["" for _ in vals2] for _ in vals1]
    for i, v1 in enumerate(vals1):
        for j, v2 in enumerate(vals2):
            try:
                p = params_base.with_(**{name1: v1, name2: v2})
                lc = lambda_c(p, **kw)
                if lc is None:
                    status[i][j] = "no-transition"
                else:
                    out[i, j] = lc
                    status[i][j] = "ok"
            except Exception as exc:  # per-cell isolation by contract
                status[i][j] = f"error: {exc}"
    return LambdaCMap(name1, vals1, name2, vals2, out, status)
