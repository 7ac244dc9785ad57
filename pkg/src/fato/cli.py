"""Command-line surface: synthesis, waveform export, fidelity
evaluation, parameter sweeps, and the two-qubit SWAP study.

Every command is deterministic; identical invocations give
byte-identical output.  CSV uses LF endings and repr round-trip floats,
JSON uses sorted keys, so golden-file tests can pin exact bytes.

Exit codes: 0 success, 2 usage/validation error (one-line diagnostic
naming the offending flag where possible), 3 numerical failure
(non-converging step doubling, schedule construction failing its own
oracle).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import qmat
from .bangbang import (
    DriveParams,
    NotFound,
    derive_params,
    params_from_theta,
    sequence_unitary,
    synthesize_pi,
)
from .dynamics import (
    NoConvergence,
    QuadratureBudgetExceeded,
    analytic_fidelity,
    fato_propagation,
    rwa_infidelity,
)
from .fourier import (
    eval_waveform,
    gibbs_maximum,
    order_for_bandwidth,
    series_of,
    tail_integral,
    waveform_csv,
    waveform_for_bandwidth,
)
from .sweeps import SWEEP_KINDS, SweepSpec, run_sweep, sweep_csv
from .twoqubit import ConstructionFailed, build_swap_schedule, fato_swap_fidelity, rect_swap_fidelity

__all__ = ["CliConfig", "main", "build_parser"]

SCHEMA_VERSION = 1


class CliError(ValueError):
    """Usage-level problem; main() turns it into exit code 2."""


@dataclass(frozen=True)
class CliConfig:
    """Resolved common options shared by the drive-parameter commands."""

    omega0: float = 1.0
    theta: float | None = None
    omega_bar: float | None = None
    gate: str | None = None
    bandwidth: float | None = None
    output: str | None = None
    format: str = "json"

    def __post_init__(self):
        if self.omega0 <= 0:
            raise CliError("--omega0 must be positive")
        if (self.theta is None) == (self.omega_bar is None):
            raise CliError(
                "exactly one of --theta/--theta-frac or --omega-bar is required")
        if self.theta is not None and not 0.0 < self.theta < math.pi / 2:
            raise CliError(f"--theta must lie in (0, pi/2), got {self.theta!r}")
        if self.omega_bar is not None and self.omega_bar <= 0:
            raise CliError("--omega-bar must be positive")
        if self.bandwidth is not None and self.bandwidth <= 0:
            raise CliError("--bandwidth must be positive")

    def params(self) -> DriveParams:
        if self.theta is not None:
            return params_from_theta(self.theta, self.omega0)
        return derive_params(self.omega0, self.omega_bar)


def _resolve_theta(args) -> float | None:
    if getattr(args, "theta_frac", None) is not None:
        if args.theta_frac < 2:
            raise CliError("--theta-frac must be an integer >= 2")
        return math.pi / (2 * args.theta_frac)
    return args.theta


def _config(args, *, require_angle: bool = True) -> CliConfig | None:
    theta = _resolve_theta(args)
    omega_bar = getattr(args, "omega_bar", None)
    if theta is None and omega_bar is None:
        if require_angle:
            raise CliError(
                "exactly one of --theta/--theta-frac or --omega-bar is required")
        return None
    return CliConfig(omega0=args.omega0, theta=theta, omega_bar=omega_bar,
                     gate=getattr(args, "gate", None),
                     bandwidth=getattr(args, "bandwidth", None),
                     output=getattr(args, "output", None))


def _json_text(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _plot_path(args) -> str:
    if not getattr(args, "output", None):
        raise CliError("--plot requires --output (the figure lands next to it)")
    return os.path.splitext(args.output)[0] + ".png"


def _truncation(seq, args):
    """Waveform for --bandwidth/--order, applying the minimum-bandwidth
    rule: below sqrt(omega0^2 + Omega_bar^2), warn and keep K >= 1."""
    if args.order is not None:
        if args.bandwidth is not None:
            raise CliError("--bandwidth and --order are mutually exclusive")
        if args.order < 0:
            raise CliError("--order must be >= 0")
        return series_of(seq, args.order)
    if args.bandwidth is None:
        raise CliError("one of --bandwidth or --order is required")
    if args.bandwidth <= 0:
        raise CliError("--bandwidth must be positive")
    min_order = 0
    omega = seq.params.omega
    if args.bandwidth < omega - 1e-12:
        print(f"warning: --bandwidth {args.bandwidth!r} is below the minimum "
              f"bandwidth sqrt(omega0^2 + Omega_bar^2) = {omega!r}; "
              "keeping at least one harmonic", file=sys.stderr)
        min_order = 1
    return waveform_for_bandwidth(seq, args.bandwidth, min_order=min_order)


# ---------------------------------------------------------------------------
# subcommands


def cmd_synth(args) -> int:
    cfg = _config(args)
    seq = synthesize_pi(args.gate, cfg.params())
    check = qmat.trace_fidelity(qmat.pauli(args.gate), sequence_unitary(seq))
    p = seq.params
    doc = {
        "schema_version": SCHEMA_VERSION,
        "params": {"omega0": p.omega0, "omega_bar": p.omega_bar,
                   "theta": p.theta, "omega": p.omega},
        "bangs": [{"level": lv, "duration": d} for lv, d in seq.bangs],
        "total_time": seq.total_time,
        "t2x_parsing": seq.meta.get("t2x_parsing"),
        "gate_fidelity_check": check,
    }
    _emit(_json_text(doc), args.output)
    return 0


def cmd_waveform(args) -> int:
    cfg = _config(args)
    if args.samples < 2:
        raise CliError("--samples must be at least 2")
    seq = synthesize_pi(args.gate, cfg.params())
    wf = _truncation(seq, args)
    meta = {
        "schema_version": SCHEMA_VERSION,
        "order": wf.order,
        "bandwidth": wf.bandwidth,
        "period": wf.period,
        "tail_error": wf.tail_error,
        "gibbs_max": gibbs_maximum(wf),
    }
    _emit(waveform_csv(wf, args.samples), args.output)
    if args.output:
        _emit(_json_text(meta), args.output + ".meta.json")
    else:
        sys.stderr.write(_json_text(meta))
    if args.plot:
        from . import plots
        plots.plot_waveform(wf, seq, _plot_path(args))
    return 0


def cmd_fidelity(args) -> int:
    cfg = _config(args)
    params = cfg.params()
    seq = synthesize_pi(args.gate, params)
    wf = _truncation(seq, args)
    res = fato_propagation(seq, wf)
    weak = params.theta <= math.pi / 4 + 1e-12
    if weak:
        f_main = analytic_fidelity("weak", args.gate, params.theta,
                                   wf.tail_error, "main_text")
        f_appx = analytic_fidelity("weak", args.gate, params.theta,
                                   wf.tail_error, "appendix")
    else:
        e_int = tail_integral(seq, wf.order)
        f_main = f_appx = analytic_fidelity("strong", args.gate,
                                            params.theta, e_int)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "T": seq.total_time,
        "K": wf.order,
        "E_K": wf.tail_error,
        "F_sim": res.fidelity,
        "F_analytic_main": f_main,
        "F_analytic_appendix": f_appx,
    }
    if weak:
        _, inf = rwa_infidelity(args.gate, params)
        doc["F_rwa"] = 1.0 - inf
    _emit(_json_text(doc), args.output)
    return 0


def _parse_grid(text: str) -> tuple[float, ...]:
    parts = text.split(":")
    if len(parts) != 3:
        raise CliError("--grid expects a:b:n (inclusive linear grid)")
    try:
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise CliError(f"--grid expects numeric a:b:n, got {text!r}") from None
    if n < 1:
        raise CliError("--grid needs n >= 1")
    return tuple(float(x) for x in np.linspace(a, b, n))


def _swap_spec(kind: str, grid, args) -> SweepSpec:
    if args.coupling <= 0:
        raise CliError("--coupling must be positive")
    fixed = {"coupling": args.coupling}
    if kind == "swap_bandwidth":
        if args.amp is None:
            raise CliError("--amp is required for a swap bandwidth sweep")
        fixed["amp"] = args.amp
    elif args.bandwidth is not None:
        fixed["bandwidth"] = args.bandwidth
    return SweepSpec(kind=kind, gate="swap", grid=grid, base=None, fixed=fixed)


def _family_grid(gate: str) -> tuple[float, ...]:
    """Analytic-family angles theta = pi/(2n), n = 2..16, restricted to
    the parity the gate lives on (odd n for x, even for y)."""
    rem = 1 if gate == "x" else 0
    return tuple(sorted(math.pi / (2 * n)
                        for n in range(2, 17) if n % 2 == rem))


def cmd_sweep(args) -> int:
    kind = args.kind
    if args.grid is None:
        if kind in ("theta", "time_ratio") and args.gate is not None:
            grid = _family_grid(args.gate)
        else:
            raise CliError("--grid a:b:n is required for this sweep kind")
    else:
        grid = _parse_grid(args.grid)
    if kind.startswith("swap_"):
        spec = _swap_spec(kind, grid, args)
    else:
        if args.gate is None:
            raise CliError("--gate is required for single-qubit sweeps")
        need_angle = kind in ("bandwidth", "detune_omega0", "detune_amp")
        cfg = _config(args, require_angle=need_angle)
        # theta and time_ratio kinds take theta from the grid; the base
        # only contributes omega0 there
        base = cfg.params() if cfg is not None else params_from_theta(
            math.pi / 4, args.omega0)
        fixed = {}
        if kind in ("theta", "detune_omega0", "detune_amp"):
            if args.order is not None:
                fixed["order"] = args.order
            elif args.bandwidth is not None:
                fixed["bandwidth"] = args.bandwidth
            else:
                raise CliError(
                    f"--kind {kind} needs one of --bandwidth or --order")
        if kind == "bandwidth" and any(x < base.omega - 1e-12 for x in grid):
            print("warning: grid extends below the minimum bandwidth "
                  f"{base.omega!r}; those points keep at least one harmonic",
                  file=sys.stderr)
        spec = SweepSpec(kind=kind, gate=args.gate, grid=grid, base=base,
                         fixed=fixed)
    records = run_sweep(spec, workers=args.workers)
    _emit(sweep_csv(records), args.output)
    if args.plot:
        from . import plots
        plots.plot_sweep(records, _plot_path(args), title=kind)
    return 0


def _profiles_csv(drive, bandwidth: float | None, samples: int) -> str:
    lines = []
    if bandwidth is None:
        lines.append("duration,amp_x,amp_y")
        for (dur, ax), (_, ay) in zip(drive.x_profile.segments,
                                      drive.y_profile.segments):
            lines.append(f"{float(dur)!r},{float(ax)!r},{float(ay)!r}")
    else:
        order = order_for_bandwidth(bandwidth, drive.total_time)
        if order < 1:
            raise CliError("--bandwidth below 2*pi/total_time leaves no "
                           "harmonics; raise it or drop --bandwidth")
        wx = drive.x_profile.series(order)
        wy = drive.y_profile.series(order)
        grid = np.linspace(0.0, drive.total_time, samples)
        fx = eval_waveform(wx, grid)
        fy = eval_waveform(wy, grid)
        lines.append("t,fx,fy")
        for t, vx, vy in zip(grid, fx, fy):
            lines.append(f"{float(t)!r},{float(vx)!r},{float(vy)!r}")
    return "\n".join(lines) + "\n"


def cmd_swap2q(args) -> int:
    if args.sweep is not None:
        kind = "swap_bandwidth" if args.sweep == "bandwidth" else "swap_amp"
        if args.grid is None:
            raise CliError("--sweep requires --grid a:b:n")
        spec = _swap_spec(kind, _parse_grid(args.grid), args)
        records = run_sweep(spec, workers=args.workers)
        _emit(sweep_csv(records), args.output)
        if args.plot:
            from . import plots
            plots.plot_sweep(records, _plot_path(args), title=kind)
        return 0

    if args.amp is None:
        raise CliError("--amp is required")
    if args.coupling <= 0:
        raise CliError("--coupling must be positive")
    drive = build_swap_schedule(args.coupling, args.amp)

    if args.profiles:
        if args.samples < 2:
            raise CliError("--samples must be at least 2")
        _emit(_profiles_csv(drive, args.bandwidth, args.samples), args.output)
        if args.plot:
            from . import plots
            plots.plot_profiles(drive, _plot_path(args),
                                bandwidth=args.bandwidth,
                                samples=max(args.samples, 512))
        return 0

    doc = {
        "schema_version": SCHEMA_VERSION,
        "coupling": drive.coupling,
        "drive_amp": drive.drive_amp,
        "total_time": drive.total_time,
        "zz_time": drive.meta["zz_time"],
        "pulse_time": drive.meta["pulse_time"],
        "assignment": drive.meta["assignment"],
        "F_rect": rect_swap_fidelity(drive),
    }
    if args.bandwidth is not None:
        f_fato, f_rect = fato_swap_fidelity(drive, args.bandwidth)
        doc["F_fato"] = f_fato
        doc["F_rect"] = f_rect
        doc["K"] = order_for_bandwidth(args.bandwidth, drive.total_time)
        doc["bandwidth"] = args.bandwidth
    _emit(_json_text(doc), args.output)
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_drive_args(p: argparse.ArgumentParser, *, required: bool) -> None:
    p.add_argument("--omega0", type=float, default=1.0,
                   help="drift angular frequency (rad/time), default 1.0")
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--theta", type=float,
                   help="drive angle arctan(Omega_bar/omega0), radians")
    g.add_argument("--theta-frac", type=int, metavar="N",
                   help="shorthand for --theta pi/(2N), N >= 2")
    g.add_argument("--omega-bar", type=float,
                   help="drive amplitude Omega_bar (rad/time)")


def _add_truncation_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--bandwidth", type=float,
                   help="angular bandwidth Delta-omega; retains K = "
                        "floor(Delta-omega T / 2pi) harmonics")
    p.add_argument("--order", type=int,
                   help="retain exactly K harmonics instead of --bandwidth")


def _add_output_args(p: argparse.ArgumentParser, *, plot: bool = False) -> None:
    p.add_argument("--output", "-o", metavar="PATH",
                   help="write to PATH instead of stdout")
    if plot:
        p.add_argument("--plot", action="store_true",
                       help="also render a PNG next to --output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fato",
        description="Bang-bang pulse synthesis and finite-bandwidth "
                    "(Fourier-truncated) gate analysis.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth",
                       help="synthesize a time-optimal bang-bang pi pulse")
    p.add_argument("--gate", required=True, choices=("x", "y"))
    _add_drive_args(p, required=True)
    _add_output_args(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("waveform",
                       help="export the bandwidth-truncated drive waveform")
    p.add_argument("--gate", required=True, choices=("x", "y"))
    _add_drive_args(p, required=True)
    _add_truncation_args(p)
    p.add_argument("--samples", type=int, default=2048,
                   help="number of sample rows (inclusive grid), default 2048")
    _add_output_args(p, plot=True)
    p.set_defaults(func=cmd_waveform)

    p = sub.add_parser("fidelity",
                       help="simulated and analytic fidelity of one "
                            "truncated pulse")
    p.add_argument("--gate", required=True, choices=("x", "y"))
    _add_drive_args(p, required=True)
    _add_truncation_args(p)
    _add_output_args(p)
    p.set_defaults(func=cmd_fidelity)

    p = sub.add_parser("sweep", help="parameter sweep to CSV")
    p.add_argument("--kind", required=True, choices=SWEEP_KINDS)
    p.add_argument("--grid", metavar="A:B:N",
                   help="inclusive linear grid; theta and time_ratio "
                        "default to the family angles pi/(2n), n=2..16, "
                        "on the gate's parity")
    p.add_argument("--gate", choices=("x", "y"),
                   help="gate for single-qubit sweep kinds")
    _add_drive_args(p, required=False)
    _add_truncation_args(p)
    p.add_argument("--coupling", type=float, default=1.0,
                   help="ZZ coupling J for swap_* kinds, default 1.0")
    p.add_argument("--amp", type=float,
                   help="collective drive amplitude for swap_bandwidth")
    p.add_argument("--workers", type=int, default=1,
                   help="parallel worker processes, default 1")
    _add_output_args(p, plot=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("swap2q",
                       help="two-qubit SWAP schedule report, profiles, "
                            "or sweep")
    p.add_argument("--coupling", type=float, default=1.0,
                   help="ZZ coupling J, default 1.0")
    p.add_argument("--amp", type=float,
                   help="collective pulse amplitude Omega")
    p.add_argument("--bandwidth", type=float,
                   help="angular bandwidth for the truncated playback")
    p.add_argument("--profiles", action="store_true",
                   help="emit the drive profiles as CSV (segments, or "
                        "samples when --bandwidth is given)")
    p.add_argument("--samples", type=int, default=2048,
                   help="sample rows for truncated profiles, default 2048")
    p.add_argument("--sweep", choices=("bandwidth", "amp"),
                   help="run the matching swap sweep over --grid")
    p.add_argument("--grid", metavar="A:B:N", help="grid for --sweep")
    p.add_argument("--workers", type=int, default=1,
                   help="parallel worker processes, default 1")
    _add_output_args(p, plot=True)
    p.set_defaults(func=cmd_swap2q)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (NoConvergence, NotFound, ConstructionFailed,
            QuadratureBudgetExceeded, qmat.NonUnitary) as err:
        print(f"error: {err}", file=sys.stderr)
        return 3
    except (ValueError, KeyError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
