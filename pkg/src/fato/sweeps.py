"""Deterministic sweep engine behind the figure-style datasets.

Every sweep maps a strictly increasing grid of x values to one record
each, computed independently per point, so records can be farmed out to
worker processes and reassembled in grid order with bit-identical
output for any worker count.  There is no randomness anywhere in the
pipeline; determinism failures would indicate real bugs, not seeds.

Record schema (fixed across sweep kinds, NaN where not applicable):

    x, fidelity_sim, fidelity_analytic, fidelity_rwa, total_time,
    order_K, e_k

Column meaning by kind:
  bandwidth      x = Delta_omega; one synthesized sequence, truncated
                 per point.  fidelity_rwa is the resonant-pulse
                 reference for the same theta (constant down the grid).
  theta          x = theta; sequence synthesized per point at fixed
                 bandwidth or fixed order from `fixed`.
  detune_omega0  x = fractional drift error; nominal waveform played
                 on a detuned qubit.  fidelity_rwa carries the same
                 offset applied to the resonant reference.
  detune_amp     x = fractional amplitude error, same convention.
  time_ratio     x = theta; total_time holds the bang-bang duration,
                 fidelity columns are NaN.  The duration ratio against
                 the resonant pulse compares at equal peak amplitude:
                 the truncated square wave overshoots to
                 (2 Si(pi)/pi) * Omega_bar, so the reference pulse gets
                 that amplitude too and the ratio is
                 total_time * Si(pi) * Omega_bar / pi^2, which is
                 Si(pi) sin(theta)/(2 theta) on the weak family.
  swap_bandwidth x = Delta_omega; fidelity_sim is the truncated-pulse
                 SWAP fidelity and fidelity_rwa holds the
                 rectangular-pulse baseline, which is the reference
                 strategy in the SWAP study.
  swap_amp       x = pulse amplitude Omega; fidelity_sim is the
                 rectangular-pulse SWAP fidelity (with a truncated
                 variant instead when `fixed` pins a bandwidth, the
                 baseline then moving to fidelity_rwa).

order_K is 0 for kinds with no truncation in play.
"""

from __future__ import annotations

import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .bangbang import (
    BangSequence,
    DriveParams,
    NonPositiveInput,
    params_from_theta,
    synthesize_pi,
)
from .dynamics import fato_propagation, rwa_infidelity, sequence_analytic_fidelity
from .fourier import order_for_bandwidth, series_of
from .twoqubit import TwoQubitDrive, build_swap_schedule, fato_swap_fidelity, rect_swap_fidelity

__all__ = [
    "SweepSpec",
    "SweepRecord",
    "run_sweep",
    "robustness_point",
    "sweep_csv",
    "SWEEP_KINDS",
]

SWEEP_KINDS = ("bandwidth", "theta", "detune_omega0", "detune_amp",
               "time_ratio", "swap_bandwidth", "swap_amp")

_CSV_HEADER = "x,fidelity_sim,fidelity_analytic,fidelity_rwa,total_time,order_K,e_k"


@dataclass(frozen=True)
class SweepSpec:
    """One sweep request: what to vary, over which grid, around what base."""

    kind: str
    gate: str
    grid: tuple[float, ...]
    base: DriveParams | TwoQubitDrive | None = None
    fixed: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in SWEEP_KINDS:
            raise ValueError(f"unknown sweep kind {self.kind!r}")
        g = self.gate.lower()
        object.__setattr__(self, "gate", g)
        swap = self.kind.startswith("swap_")
        if swap != (g == "swap"):
            raise ValueError(f"kind {self.kind!r} is incompatible with gate {g!r}")
        if not swap and g not in ("x", "y"):
            raise ValueError(f"gate must be 'x', 'y' or 'swap', got {g!r}")
        object.__setattr__(self, "grid", tuple(float(x) for x in self.grid))
        if not self.grid:
            raise ValueError("grid must be non-empty")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ValueError("grid must be strictly increasing")
        if not swap and not isinstance(self.base, DriveParams):
            raise ValueError(f"kind {self.kind!r} needs DriveParams as base")


@dataclass(frozen=True)
class SweepRecord:
    """One grid point.  `error` tags a captured per-point failure (empty
    on success) and is not part of the CSV schema."""

    x: float
    fidelity_sim: float
    fidelity_analytic: float
    fidelity_rwa: float
    total_time: float
    order_k: int
    e_k: float
    error: str = ""

    def __post_init__(self):
        for name in ("x", "fidelity_sim", "fidelity_analytic", "fidelity_rwa",
                     "total_time", "e_k"):
            # plain floats so csv_line reprs stay clean of numpy scalars
            object.__setattr__(self, name, float(getattr(self, name)))
        object.__setattr__(self, "order_k", int(self.order_k))
        for name in ("fidelity_sim", "fidelity_analytic", "fidelity_rwa"):
            v = getattr(self, name)
            if not (math.isnan(v) or 0.0 <= v <= 1.0):
                raise ValueError(f"{name}={v!r} outside [0,1]")

    def csv_line(self) -> str:
        return (f"{self.x!r},{self.fidelity_sim!r},{self.fidelity_analytic!r},"
                f"{self.fidelity_rwa!r},{self.total_time!r},{self.order_k},"
                f"{self.e_k!r}")


def _failed(x: float, err: Exception) -> SweepRecord:
    nan = math.nan
    return SweepRecord(x=x, fidelity_sim=nan, fidelity_analytic=nan,
                       fidelity_rwa=nan, total_time=nan, order_k=0, e_k=nan,
                       error=type(err).__name__)


def _clamp(f: float) -> float:
    return float(min(1.0, max(0.0, f)))


def _rwa_fidelity_or_nan(gate: str, params: DriveParams, *,
                         drift_scale: float = 1.0,
                         amp_scale: float = 1.0) -> float:
    if params.theta > math.pi / 4 + 1e-12:
        return math.nan
    _, inf = rwa_infidelity(gate, params, drift_scale=drift_scale,
                            amp_scale=amp_scale)
    return _clamp(1.0 - inf)


def _fato_record(x: float, seq: BangSequence, gate: str, order: int, *,
                 drift_scale: float = 1.0, amp_scale: float = 1.0,
                 analytic: bool = True) -> SweepRecord:
    waveform = series_of(seq, order)
    res = fato_propagation(seq, waveform, drift_scale=drift_scale,
                           amp_scale=amp_scale)
    f_analytic = (sequence_analytic_fidelity(seq, order)
                  if analytic else math.nan)
    f_rwa = _rwa_fidelity_or_nan(gate, seq.params, drift_scale=drift_scale,
                                 amp_scale=amp_scale)
    return SweepRecord(x=x, fidelity_sim=_clamp(res.fidelity),
                       fidelity_analytic=f_analytic, fidelity_rwa=f_rwa,
                       total_time=seq.total_time, order_k=order,
                       e_k=waveform.tail_error)


def robustness_point(gate: str, params: DriveParams, order: int,
                     eps_omega0: float, eps_amp: float) -> SweepRecord:
    """Nominal waveform, perturbed physics: drift omega0*(1+eps_omega0)
    and amplitude Omega_bar*(1+eps_amp), fidelity against the nominal
    target.  The resonant-pulse reference gets the same offsets."""
    if abs(eps_omega0) > 0.2 or abs(eps_amp) > 0.2:
        raise NonPositiveInput("fractional errors are limited to |eps| <= 0.2")
    seq = synthesize_pi(gate, params)
    x = eps_omega0 if eps_omega0 != 0.0 else eps_amp
    return _fato_record(x, seq, gate, order,
                        drift_scale=1.0 + eps_omega0,
                        amp_scale=1.0 + eps_amp,
                        analytic=False)


def _min_order(fixed: dict) -> int:
    return int(fixed.get("min_order", 1))


def _point_bandwidth(spec: SweepSpec, x: float) -> SweepRecord:
    seq = synthesize_pi(spec.gate, spec.base)
    order = max(order_for_bandwidth(x, seq.total_time), _min_order(spec.fixed))
    return _fato_record(x, seq, spec.gate, order)


def _point_theta(spec: SweepSpec, x: float) -> SweepRecord:
    params = params_from_theta(x, spec.base.omega0)
    seq = synthesize_pi(spec.gate, params)
    if "order" in spec.fixed:
        order = int(spec.fixed["order"])
    else:
        order = max(order_for_bandwidth(float(spec.fixed["bandwidth"]),
                                        seq.total_time),
                    _min_order(spec.fixed))
    return _fato_record(x, seq, spec.gate, order)


def _point_detune(spec: SweepSpec, x: float, which: str) -> SweepRecord:
    if "order" in spec.fixed:
        order = int(spec.fixed["order"])
    else:
        seq_probe = synthesize_pi(spec.gate, spec.base)
        order = max(order_for_bandwidth(float(spec.fixed["bandwidth"]),
                                        seq_probe.total_time),
                    _min_order(spec.fixed))
    eps_w0 = x if which == "omega0" else 0.0
    eps_amp = x if which == "amp" else 0.0
    rec = robustness_point(spec.gate, spec.base, order, eps_w0, eps_amp)
    # robustness_point picks x from the nonzero offset; eps=0 baselines
    # must still land on the right grid coordinate
    return SweepRecord(x=x, fidelity_sim=rec.fidelity_sim,
                       fidelity_analytic=rec.fidelity_analytic,
                       fidelity_rwa=rec.fidelity_rwa,
                       total_time=rec.total_time, order_k=rec.order_k,
                       e_k=rec.e_k)


def _point_time_ratio(spec: SweepSpec, x: float) -> SweepRecord:
    params = params_from_theta(x, spec.base.omega0)
    seq = synthesize_pi(spec.gate, params)
    nan = math.nan
    return SweepRecord(x=x, fidelity_sim=nan, fidelity_analytic=nan,
                       fidelity_rwa=nan, total_time=seq.total_time,
                       order_k=0, e_k=nan)


def _swap_drive(spec: SweepSpec, amp: float | None = None) -> TwoQubitDrive:
    if isinstance(spec.base, TwoQubitDrive) and amp is None:
        return spec.base
    coupling = (spec.base.coupling if isinstance(spec.base, TwoQubitDrive)
                else float(spec.fixed["coupling"]))
    if amp is None:
        amp = float(spec.fixed["amp"])
    return build_swap_schedule(coupling, amp)


def _point_swap_bandwidth(spec: SweepSpec, x: float) -> SweepRecord:
    drive = _swap_drive(spec)
    f_fato, f_rect = fato_swap_fidelity(drive, x)
    order = order_for_bandwidth(x, drive.total_time)
    return SweepRecord(x=x, fidelity_sim=_clamp(f_fato),
                       fidelity_analytic=math.nan,
                       fidelity_rwa=_clamp(f_rect),
                       total_time=drive.total_time, order_k=order,
                       e_k=math.nan)


def _point_swap_amp(spec: SweepSpec, x: float) -> SweepRecord:
    drive = _swap_drive(spec, amp=x)
    if "bandwidth" in spec.fixed:
        f_fato, f_rect = fato_swap_fidelity(drive, float(spec.fixed["bandwidth"]))
        order = order_for_bandwidth(float(spec.fixed["bandwidth"]),
                                    drive.total_time)
        return SweepRecord(x=x, fidelity_sim=_clamp(f_fato),
                           fidelity_analytic=math.nan,
                           fidelity_rwa=_clamp(f_rect),
                           total_time=drive.total_time, order_k=order,
                           e_k=math.nan)
    f_rect = rect_swap_fidelity(drive)
    return SweepRecord(x=x, fidelity_sim=_clamp(f_rect),
                       fidelity_analytic=math.nan, fidelity_rwa=math.nan,
                       total_time=drive.total_time, order_k=0, e_k=math.nan)


def _compute_point(spec: SweepSpec, x: float) -> SweepRecord:
    try:
        if spec.kind == "bandwidth":
            return _point_bandwidth(spec, x)
        if spec.kind == "theta":
            return _point_theta(spec, x)
        if spec.kind == "detune_omega0":
            return _point_detune(spec, x, "omega0")
        if spec.kind == "detune_amp":
            return _point_detune(spec, x, "amp")
        if spec.kind == "time_ratio":
            return _point_time_ratio(spec, x)
        if spec.kind == "swap_bandwidth":
            return _point_swap_bandwidth(spec, x)
        return _point_swap_amp(spec, x)
    except Exception as err:  # per-point isolation: tag, never abort
        return _failed(x, err)


def run_sweep(spec: SweepSpec, workers: int = 1) -> list[SweepRecord]:
    """One record per grid point, in grid order, identical for any
    worker count.  Per-point failures come back as NaN records tagged
    with the exception name."""
    if workers < 1:
        raise NonPositiveInput("workers must be >= 1")
    if workers == 1 or len(spec.grid) == 1:
        return [_compute_point(spec, x) for x in spec.grid]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_compute_point, [spec] * len(spec.grid), spec.grid))


def sweep_csv(records) -> str:
    """Fixed-schema CSV with repr round-trip floats and LF endings."""
    out = io.StringIO()
    out.write(_CSV_HEADER + "\n")
    for rec in records:
        out.write(rec.csv_line() + "\n")
    return out.getvalue()
