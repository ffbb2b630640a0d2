"""Time-series measurements: two-time correlations, spectra, collective-jump
detection and coherence statistics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter1d
from scipy.signal import find_peaks


@dataclass
class JumpEvent:
    direction: str          # "up" | "down"
    t_event: float
    n_at_event: float       # spatial-average total density, interpolated
    rho_before: float
    rho_after: float


@dataclass
class CoherenceReport:
    t_mean: float
    t_std: float            # population standard deviation of the intervals
    tau_ctc: float          # t_mean / t_std (inf when t_std = 0)
    delta_theta: float      # 2*pi * t_std / t_mean
    cycles: int
    low_statistics: bool    # fewer than 10 intervals
    degenerate: bool        # t_std = 0 (perfectly periodic input)


def autocorrelation(x: np.ndarray, max_lag: int) -> np.ndarray:
    """Two-time correlation G(k) = <x(t) x(t+k)>_t / <x>_t^2 for k = 0..max_lag.

    Normalization is by the squared time mean, not the variance, so a
    constant positive series gives G identically 1.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or len(x) < 2:
        raise ValueError("need a 1-d series of length >= 2")
    if max_lag < 0 or max_lag >= len(x):
        raise ValueError("max_lag must lie in [0, len(x))")
    mean = x.mean()
    if abs(mean) < 1e-12 * max(np.max(np.abs(x)), 1e-300):
        raise ValueError("zero-mean series: mean-squared normalization undefined")
    # FFT cross-sums, then divide by the number of valid pairs per lag
    m = len(x)
    nfft = 1 << int(np.ceil(np.log2(2 * m)))
    fx = np.fft.rfft(x, nfft)
    raw = np.fft.irfft(fx * np.conj(fx), nfft)[:max_lag + 1]
    counts = m - np.arange(max_lag + 1)
    return raw / counts / (mean * mean)


def spectrum(x: np.ndarray, dt: float, prominence_factor: float = 3.0):
    """Magnitude spectrum of a uniformly sampled series and its first peak.

    Returns (omega, magnitude, omega_m, period): omega_m is the
    lowest-frequency local maximum whose prominence exceeds
    prominence_factor times the median magnitude (omega = 0 excluded);
    omega_m and period are None when no such peak exists.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or len(x) < 4:
        raise ValueError("need a 1-d series of length >= 4")
    mag = np.abs(np.fft.rfft(x - x.mean()))
    omega = 2.0 * np.pi * np.fft.rfftfreq(len(x), d=dt)
    # peaks are located on a lightly smoothed copy: on long noisy records the
    # raw periodogram has spurious single-bin maxima riding the low-frequency
    # continuum, which is monotone on the smoothed estimate
    sigma = 3 if len(mag) >= 256 else 1
    sm = gaussian_filter1d(mag, sigma)
    floor = np.median(sm)
    # absolute height floor on top of the prominence rule: with a nearly
    # empty background the median is ~0 and prominence alone passes noise
    height = max(5.0 * floor, 1e-3 * sm.max())
    peaks, _ = find_peaks(sm, prominence=prominence_factor * floor,
                          height=height)
    peaks = peaks[peaks > 0]
    if len(peaks) == 0:
        return omega, mag, None, None
    # refine to the raw-magnitude maximum inside the smoothed bump
    lo = max(peaks[0] - 3 * sigma, 1)
    hi = min(peaks[0] + 3 * sigma + 1, len(mag))
    om = float(omega[lo + int(np.argmax(mag[lo:hi]))])
    return omega, mag, om, 2.0 * np.pi / om


def detect_jumps(t: np.ndarray, rho: np.ndarray, n: np.ndarray,
                 rho_up: float = 0.2, rho_down: float = 0.05) -> list[JumpEvent]:
    """Hysteresis two-threshold jump detector.

    An up event fires when rho crosses rho_up from below while armed
    (armed = rho previously fell below rho_down); down events symmetric.
    Event times and n-values are linearly interpolated at the crossing.
    """
    if not rho_down < rho_up:
        raise ValueError("need rho_down < rho_up")
    t = np.asarray(t, float)
    rho = np.asarray(rho, float)
    n = np.asarray(n, float)
    events: list[JumpEvent] = []
    armed_up = rho[0] < rho_down       # can fire an up event
    armed_down = rho[0] > rho_up       # can fire a down event
    win = 5                            # pre/post averaging window (samples)
    for i in range(1, len(rho)):
        if armed_up and rho[i - 1] < rho_up <= rho[i]:
            frac = (rho_up - rho[i - 1]) / (rho[i] - rho[i - 1])
            events.append(JumpEvent(
                "up",
                float(t[i - 1] + frac * (t[i] - t[i - 1])),
                float(n[i - 1] + frac * (n[i] - n[i - 1])),
                float(rho[max(i - win, 0):i].mean()),
                float(rho[i:i + win].mean()),
            ))
            armed_up, armed_down = False, True
        elif armed_down and rho[i - 1] > rho_down >= rho[i]:
            frac = (rho_down - rho[i - 1]) / (rho[i] - rho[i - 1])
            events.append(JumpEvent(
                "down",
                float(t[i - 1] + frac * (t[i] - t[i - 1])),
                float(n[i - 1] + frac * (n[i] - n[i - 1])),
                float(rho[max(i - win, 0):i].mean()),
                float(rho[i:i + win].mean()),
            ))
            armed_down, armed_up = False, True
        elif not armed_up and rho[i] < rho_down:
            armed_up = True
        elif not armed_down and rho[i] > rho_up:
            armed_down = True
    return events


def coherence_time(events: list[JumpEvent]) -> CoherenceReport:
    """Inter-up-jump interval statistics; tau_ctc = mean / std of the period."""
    ups = np.array([e.t_event for e in events if e.direction == "up"])
    if len(ups) < 2:
        raise ValueError("need at least 2 up events")
    intervals = np.diff(ups)
    t_mean = float(intervals.mean())
    # sample (ddof=1) standard deviation; a single interval has no spread
    t_std = float(intervals.std(ddof=1)) if len(intervals) >= 2 else 0.0
    degenerate = t_std == 0.0
    tau = np.inf if degenerate else t_mean / t_std
    dth = 0.0 if degenerate else 2.0 * np.pi * t_std / t_mean
    return CoherenceReport(t_mean, t_std, tau, dth, len(intervals),
                           low_statistics=len(intervals) < 10,
                           degenerate=degenerate)


def stationary_segment(t: np.ndarray, *series, period_hint: float | None = None):
    """Drop the transient: first 10 cycles (when a period hint is given) or
    the first 20% of the series, whichever is longer."""
    t = np.asarray(t, float)
    t_cut = t[0] + 0.2 * (t[-1] - t[0])
    if period_hint:
        t_cut = max(t_cut, t[0] + 10.0 * period_hint)
    keep = t >= t_cut
    return (t[keep],) + tuple(np.asarray(s)[keep] for s in series)
