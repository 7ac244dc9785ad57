"""Fourier series of piecewise-constant drive profiles.

A bang sequence defines f(t) = Omega(t)/Omega_bar on [0, T] with values
in {+1, 0, -1}; the two-qubit pulse trains are step profiles with
arbitrary real amplitudes.  Either way the series

    f(t) = c0/2 + sum_k [ s_k sin(2 pi k t/T) + c_k cos(2 pi k t/T) ]

has closed-form coefficients (each constant segment contributes a
sine/cosine antiderivative), so no numerical quadrature and no FFT is
involved anywhere; this keeps tiny truncation orders and the Parseval
bookkeeping exact.

A bandwidth Delta_omega admits harmonics with 2 pi k / T <= Delta_omega,
i.e. truncation order K = floor(Delta_omega * T / (2 pi)).  The mean
truncation error

    E_K = (1/2) * sum_{k > K} (c_k^2 + s_k^2)

is computed from the Parseval identity, never from an infinite sum: the
total spectral power sum_{k>=1}(c_k^2+s_k^2) equals (2/T)*int f^2 dt -
c0^2/2, and the integral of f^2 is a finite sum of level^2 * duration
terms.  The companion quantity (2/T)*int R_K^2 dt equals twice E_K;
both are exposed because closed-form fidelity predictions are sensitive
to the factor.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .bangbang import BangSequence, EmptySequence, NonPositiveInput

__all__ = [
    "FourierWaveform",
    "series_of",
    "piecewise_series",
    "waveform_for_bandwidth",
    "order_for_bandwidth",
    "eval_waveform",
    "tail_error",
    "tail_integral",
    "waveform_csv",
    "gibbs_maximum",
    "clamped_envelope",
    "OutOfDomain",
]


class OutOfDomain(ValueError):
    """Evaluation point lies outside the waveform's time domain."""


@dataclass(frozen=True)
class FourierWaveform:
    """Truncated series of a piecewise-constant profile.

    Attributes
    ----------
    period : float
        Total profile time T; the series is built on exactly this window.
    c0 : float
        Twice the mean of f (the series carries c0/2).
    cos_coeffs, sin_coeffs : tuple of float
        c_k and s_k for k = 1..order.
    order : int
        Truncation order K.
    bandwidth : float
        Angular bandwidth this truncation respects:
        2 pi K / period <= bandwidth < 2 pi (K+1) / period.
    tail_error : float
        E_K of the source profile (in squared profile units, >= 0).
    """

    period: float
    c0: float
    cos_coeffs: tuple[float, ...]
    sin_coeffs: tuple[float, ...]
    order: int
    bandwidth: float
    tail_error: float

    def __post_init__(self):
        if not self.period > 0:
            raise NonPositiveInput("period must be positive")
        if len(self.cos_coeffs) != self.order or len(self.sin_coeffs) != self.order:
            raise ValueError("coefficient count must equal the truncation order")
        lo = 2 * math.pi * self.order / self.period
        hi = 2 * math.pi * (self.order + 1) / self.period
        if not (lo <= self.bandwidth * (1 + 1e-12) and self.bandwidth < hi):
            raise ValueError("bandwidth inconsistent with truncation order")
        if self.tail_error < -1e-12:
            raise ValueError("tail error must be nonnegative")


def _profile_arrays(durations, levels) -> tuple[np.ndarray, np.ndarray]:
    d = np.asarray(durations, dtype=float)
    lv = np.asarray(levels, dtype=float)
    if d.size == 0:
        raise EmptySequence("cannot expand an empty profile")
    if d.shape != lv.shape:
        raise ValueError("durations and levels must have equal length")
    if np.any(d < 0) or not d.sum() > 0:
        raise NonPositiveInput("durations must be nonnegative with positive total")
    return d, lv


def _coefficients(durations, levels, order: int):
    d, lv = _profile_arrays(durations, levels)
    edges = np.concatenate([[0.0], np.cumsum(d)])
    total = float(edges[-1])
    c0 = 2.0 * float(np.dot(lv, d)) / total
    if order == 0:
        return total, c0, np.zeros(0), np.zeros(0)
    k = np.arange(1, order + 1)
    wa = 2 * np.pi * np.outer(k, edges[:-1]) / total
    wb = 2 * np.pi * np.outer(k, edges[1:]) / total
    cos_k = ((np.sin(wb) - np.sin(wa)) * lv).sum(axis=1) / (np.pi * k)
    sin_k = ((np.cos(wa) - np.cos(wb)) * lv).sum(axis=1) / (np.pi * k)
    return total, c0, cos_k, sin_k


def _tail(durations, levels, order: int) -> float:
    total, c0, cos_k, sin_k = _coefficients(durations, levels, order)
    d, lv = _profile_arrays(durations, levels)
    power_total = 2.0 * float(np.dot(lv * lv, d)) / total - c0 * c0 / 2.0
    power_partial = float(np.dot(cos_k, cos_k) + np.dot(sin_k, sin_k))
    tail = 0.5 * (power_total - power_partial)
    scale = max(power_total, 1.0)
    if tail < -1e-12 * scale:
        raise ValueError(f"Parseval bookkeeping broke: tail={tail!r}")
    return max(tail, 0.0)


def tail_error(seq: BangSequence, order: int) -> float:
    """Mean truncation error E_K = (1/2) sum_{k>K} (c_k^2 + s_k^2).

    Exact through Parseval: the total spectral power comes from
    (2/T) int f^2 dt minus the DC share c0^2/2, and the retained power
    is subtracted off.
    """
    if order < 0:
        raise NonPositiveInput("order must be >= 0")
    return _tail(seq.durations, seq.levels, order)


def tail_integral(seq: BangSequence, order: int) -> float:
    """(2/T) int_0^T R_K^2 dt, which is twice the spectral tail E_K."""
    return 2.0 * tail_error(seq, order)


def piecewise_series(durations, levels, order: int) -> FourierWaveform:
    """Truncated series of a step profile with arbitrary real levels."""
    if order < 0:
        raise NonPositiveInput("order must be >= 0")
    total, c0, cos_k, sin_k = _coefficients(durations, levels, order)
    return FourierWaveform(
        period=total,
        c0=c0,
        cos_coeffs=tuple(float(c) for c in cos_k),
        sin_coeffs=tuple(float(s) for s in sin_k),
        order=order,
        bandwidth=2 * math.pi * order / total,
        tail_error=_tail(durations, levels, order),
    )


def series_of(seq: BangSequence, order: int) -> FourierWaveform:
    """Exact series coefficients of a bang sequence, truncated at ``order``."""
    return piecewise_series(seq.durations, seq.levels, order)


def order_for_bandwidth(delta_omega: float, period: float) -> int:
    """Largest K with 2 pi K / period <= delta_omega (boundary inclusive)."""
    if not (delta_omega > 0 and period > 0):
        raise NonPositiveInput("bandwidth and period must be positive")
    x = delta_omega * period / (2 * math.pi)
    return int(math.floor(x + 1e-9))


def waveform_for_bandwidth(seq: BangSequence, delta_omega: float,
                           min_order: int = 0) -> FourierWaveform:
    """Series truncated to the given angular bandwidth.

    min_order lets callers enforce at least one retained harmonic when
    the bandwidth is below the fundamental (a warning-level situation
    handled at the interface layer).
    """
    order = max(order_for_bandwidth(delta_omega, sum(seq.durations)), min_order)
    wf = series_of(seq, order)
    lo = 2 * math.pi * order / wf.period
    return FourierWaveform(
        period=wf.period,
        c0=wf.c0,
        cos_coeffs=wf.cos_coeffs,
        sin_coeffs=wf.sin_coeffs,
        order=order,
        bandwidth=max(delta_omega, lo),
        tail_error=wf.tail_error,
    )


def eval_waveform(waveform: FourierWaveform, t) -> np.ndarray | float:
    """Partial-sum value(s) of the truncated series at time(s) t in [0, T]."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t_arr < -1e-12) or np.any(t_arr > waveform.period * (1 + 1e-12)):
        raise OutOfDomain("evaluation time outside [0, period]")
    value = np.full(t_arr.shape, waveform.c0 / 2.0)
    if waveform.order > 0:
        k = np.arange(1, waveform.order + 1)
        angles = 2 * np.pi * np.outer(t_arr, k) / waveform.period
        value = value + np.sin(angles) @ np.asarray(waveform.sin_coeffs)
        value = value + np.cos(angles) @ np.asarray(waveform.cos_coeffs)
    return value if np.ndim(t) else float(value[0])


def gibbs_maximum(waveform: FourierWaveform, samples: int = 65536) -> float:
    """Max |f_K| on a dense uniform grid; the truncated square wave
    overshoots toward 2 Si(pi)/pi ~ 1.179 near switching times."""
    grid = np.linspace(0.0, waveform.period, samples)
    return float(np.max(np.abs(eval_waveform(waveform, grid))))


def clamped_envelope(waveform: FourierWaveform):
    """Playback with the Gibbs overshoot hard-limited to |f| <= 1.

    Amplifiers saturate; the closed-form tail analysis does not model
    that, so this envelope is a hardware-realism option only: none of
    the E_K bookkeeping applies to the clipped signal.  The result is a
    callable suitable for propagate_envelope.
    """
    def env(t):
        return np.clip(eval_waveform(waveform, t), -1.0, 1.0)
    return env


def waveform_csv(waveform: FourierWaveform, samples: int) -> str:
    """Sample the waveform on an inclusive uniform grid as CSV text.

    Values are written with repr-round-trip precision and LF endings so
    regenerated files are byte-identical across platforms and runs.
    """
    if samples < 2:
        raise NonPositiveInput("need at least 2 samples")
    grid = np.linspace(0.0, waveform.period, samples)
    values = eval_waveform(waveform, grid)
    out = io.StringIO()
    out.write("t,f\n")
    for t, f in zip(grid, values):
        out.write(f"{float(t)!r},{float(f)!r}\n")
    return out.getvalue()
