"""Measured quantities: fringe profiles, visibility, revivals, COM paths,
and the deviation between exact and effective evolutions.

The vertically integrated intensity I_n(t) = sum_m |c[n,m](t)|^2 is the
quantity imaged in the waveguide-array setting; at rational flux its fringe
contrast revives periodically at the cyclotron period, while at irrational
flux the revivals die out.  COM paths trace the cyclotron orbits, and
model_deviation quantifies how well the period-averaged model tracks the
exact driven one at stroboscopic times.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.signal import find_peaks

from .core import DriveSpec, TWO_PI
from .dynamics import Trajectory
from .effective import gauge_unmap

__all__ = [
    "FringeRecord",
    "vertical_profile",
    "central_columns",
    "fringe_visibility",
    "with_visibility",
    "revival_period",
    "com_path",
    "ModelDeviation",
    "model_deviation",
]


@dataclass(frozen=True)
class FringeRecord:
    """I_n(t) profiles with optional visibility series and revival period."""

    times: np.ndarray
    profiles: np.ndarray  # (T, Nn), row t -> I_n
    n_values: np.ndarray
    visibility: np.ndarray | None = None
    revival: float | None = None


def vertical_profile(traj: Trajectory) -> FringeRecord:
    """Column-integrated intensities I_n(t) = sum_m |c[n,m]|^2 per sample."""
    amps = traj.amplitude_stack()
    profiles = np.sum(np.abs(amps) ** 2, axis=2)
    return FringeRecord(times=np.asarray(traj.times, dtype=float),
                        profiles=profiles,
                        n_values=traj.window.n_values.copy())


def central_columns(count: int, fraction: float = 0.5) -> slice:
    """Central slice covering ``fraction`` of the columns (margins split evenly)."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must lie in (0, 1]")
    margin = int(round(count * (1.0 - fraction) / 2.0))
    margin = min(margin, (count - 1) // 2)
    return slice(margin, count - margin)


def fringe_visibility(profile, columns) -> float:
    """Period-2 fringe amplitude of the profile over the given column window.

    Normalized magnitude of the alternating-column component,
    |sum_i w_i (-1)^i I_i| / sum_i w_i I_i with half-weighted endpoints
    (trapezoid weights, so a constant profile scores exactly 0 for any
    window parity).  0 for a flat or smooth profile, 1 for full-contrast
    period-2 fringes; a raw max/min contrast would instead read the beam
    envelope whenever the window reaches into its tails.
    """
    seg = np.asarray(profile, dtype=float)[columns]
    if seg.size == 0 or not np.any(seg):
        raise ValueError("zero profile in visibility window")
    w = np.ones(seg.size)
    w[0] = w[-1] = 0.5
    signs = np.where(np.arange(seg.size) % 2 == 0, 1.0, -1.0)
    return abs(float(np.sum(w * signs * seg))) / float(np.sum(w * seg))


def with_visibility(record: FringeRecord, columns=None) -> FringeRecord:
    """Attach the per-time visibility series over the central columns."""
    if columns is None:
        columns = central_columns(record.profiles.shape[1])
    vis = np.array([fringe_visibility(p, columns) for p in record.profiles])
    return replace(record, visibility=vis)


def revival_period(record: FringeRecord) -> float | None:
    """Lag of the first dominant autocorrelation peak of the visibility.

    The visibility series is demeaned and autocorrelated; a peak qualifies
    when its prominence reaches 0.5 of the zero-lag value.  Returns None
    when no such peak exists (aperiodic fringe evolution).  Requires the
    record to carry a visibility series sampled on a uniform time grid.
    """
    if record.visibility is None:
        raise ValueError("record carries no visibility series; run with_visibility")
    t = record.times
    dt = np.diff(t)
    if t.size < 3 or np.max(np.abs(dt - dt[0])) > 1e-9 * max(1.0, abs(float(t[-1]))):
        raise ValueError("revival detection needs a uniform time grid")
    v = record.visibility - float(np.mean(record.visibility))
    ac = np.correlate(v, v, mode="full")[v.size - 1:]
    if ac[0] <= 0.0:
        return None
    acn = ac / ac[0]
    peaks, _ = find_peaks(acn, prominence=0.5)
    if peaks.size == 0:
        return None
    return float(peaks[0] * dt[0])


def com_path(traj: Trajectory) -> np.ndarray:
    """Center of mass (<n>, <m>) per sample, shape (T, 2)."""
    amps = traj.amplitude_stack()
    weight = np.abs(amps) ** 2
    norms = weight.sum(axis=(1, 2))
    if np.any(norms <= 0.0):
        raise ValueError("zero-norm field in trajectory")
    w = traj.window
    n_mean = (weight * w.n_grid[None, :, :]).sum(axis=(1, 2)) / norms
    m_mean = (weight * w.m_grid[None, :, :]).sum(axis=(1, 2)) / norms
    return np.column_stack([n_mean, m_mean])


@dataclass(frozen=True)
class ModelDeviation:
    """Per-sample exact-vs-effective mismatch at stroboscopic times."""

    times: np.ndarray
    max_abs: np.ndarray      # max_site | |c| - |f| |
    infidelity: np.ndarray   # 1 - |<f_mapped, c>|^2 (normalized)

    @property
    def peak(self) -> float:
        return float(np.max(self.max_abs))


def model_deviation(full: Trajectory, effective: Trajectory,
                    drive: DriveSpec) -> ModelDeviation:
    """Compare an exact run against an effective run, sample by sample.

    Both trajectories must share the window and identical sample times,
    and the times must be integer multiples of the drive period (the
    averaged model reproduces the exact one stroboscopically).  The modulus
    mismatch is gauge-free; the infidelity maps f back to the driven frame
    first and is invariant under global phases of either input.
    """
    if full.window != effective.window:
        raise ValueError("trajectories live on different windows")
    tf = np.asarray(full.times, dtype=float)
    te = np.asarray(effective.times, dtype=float)
    if tf.shape != te.shape or np.max(np.abs(tf - te)) > 1e-9:
        raise ValueError("trajectories have mismatched sample times")
    period = TWO_PI / drive.omega
    cycles = tf / period
    if np.max(np.abs(cycles - np.round(cycles))) > 1e-6:
        raise ValueError("sample times must be integer multiples of 2*pi/omega")
    max_abs = np.empty(tf.size)
    infid = np.empty(tf.size)
    for i, t in enumerate(tf):
        c = full.fields[i].amplitudes
        f = effective.fields[i].amplitudes
        max_abs[i] = float(np.max(np.abs(np.abs(c) - np.abs(f))))
        mapped = gauge_unmap(effective.fields[i], float(t), drive).amplitudes
        nc = float(np.sum(np.abs(c) ** 2))
        nf = float(np.sum(np.abs(f) ** 2))
        if nc <= 0.0 or nf <= 0.0:
            raise ValueError("zero-norm field in deviation comparison")
        overlap = complex(np.vdot(mapped, c))
        infid[i] = 1.0 - (abs(overlap) ** 2) / (nc * nf)
    return ModelDeviation(times=tf, max_abs=max_abs, infidelity=infid)
