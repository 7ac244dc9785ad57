"""Two-qubit extensions: opposite-drift simultaneous control and SWAP.

Two non-interacting qubits with opposite drift signs,

    H(t) = (omega0/2)(sz1 - sz2) + (Omega(t)/2)(sx1 + sx2),

can be driven by one shared waveform; the Hamiltonian is a tensor sum,
so the two-qubit fidelity factorizes into the square of the single-qubit
one.  That identity is verified here against an honest 4x4 simulation
rather than assumed.

The SWAP construction exchanges two qubits coupled by H0 = J sz1 sz2/2:
three ZZ evolutions of angle pi/4 (duration pi/(2J) each, total ZZ time
3 pi/(2J)), with two of the three conjugated by collective pi/2 pulses
about x and y that rotate the coupling axis through the Cartan frames.
The exact pulse pair/axes/signs are not dictated externally; the
constructor enumerates the finite family of such assignments in a fixed
order and locks the first one whose delta-pulse product equals SWAP up
to global phase.  Finite pulses are rectangular with amplitude Omega and
duration pi/(2 Omega); replacing them with their bandwidth-truncated
Fourier series quantifies what a finite-bandwidth synthesizer does to
the gate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product as iproduct

import numpy as np

from . import qmat
from .bangbang import BangSequence, NonPositiveInput, sequence_unitary
from .dynamics import NoConvergence
from .fourier import FourierWaveform, eval_waveform, order_for_bandwidth, piecewise_series

__all__ = [
    "StepProfile",
    "TwoQubitDrive",
    "TwoQubitResult",
    "ConstructionFailed",
    "ProfileMismatch",
    "SWAP_MATRIX",
    "build_swap_schedule",
    "rect_swap_fidelity",
    "fato_swap_fidelity",
    "opposite_drift_fidelity",
    "propagate_two_qubit",
]


class ConstructionFailed(RuntimeError):
    """No pulse assignment in the searched family reproduces the gate."""


class ProfileMismatch(ValueError):
    """Paired drive profiles disagree in segmentation or duration."""


SWAP_MATRIX = np.array(
    [[1, 0, 0, 0],
     [0, 0, 1, 0],
     [0, 1, 0, 0],
     [0, 0, 0, 1]], dtype=complex)

_ZZ = np.kron(qmat.PAULI_Z, qmat.PAULI_Z)
_X_COLLECTIVE = np.kron(qmat.PAULI_X, qmat.PAULI_I) + np.kron(qmat.PAULI_I, qmat.PAULI_X)
_Y_COLLECTIVE = np.kron(qmat.PAULI_Y, qmat.PAULI_I) + np.kron(qmat.PAULI_I, qmat.PAULI_Y)


@dataclass(frozen=True)
class StepProfile:
    """Piecewise-constant drive profile: ((duration, amplitude), ...)."""

    segments: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if not self.segments:
            raise NonPositiveInput("profile needs at least one segment")
        if any(d < 0 for d, _ in self.segments) or not self.total_time > 0:
            raise NonPositiveInput("segment durations must be nonnegative, total positive")

    @property
    def total_time(self) -> float:
        return sum(d for d, _ in self.segments)

    @property
    def durations(self) -> tuple[float, ...]:
        return tuple(d for d, _ in self.segments)

    @property
    def amplitudes(self) -> tuple[float, ...]:
        return tuple(a for _, a in self.segments)

    def series(self, order: int) -> FourierWaveform:
        return piecewise_series(self.durations, self.amplitudes, order)


@dataclass(frozen=True)
class TwoQubitDrive:
    """Coupled-qubit schedule: shared coupling plus x/y pulse profiles."""

    coupling: float
    drive_amp: float
    x_profile: StepProfile
    y_profile: StepProfile
    total_time: float
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.coupling <= 0 or self.drive_amp <= 0:
            raise NonPositiveInput("coupling and drive amplitude must be positive")
        tx, ty = self.x_profile.total_time, self.y_profile.total_time
        if abs(tx - ty) > 1e-12 * max(tx, ty) or abs(tx - self.total_time) > 1e-12 * tx:
            raise ProfileMismatch("x/y profiles must share the stated total time")
        if self.x_profile.durations != self.y_profile.durations:
            raise ProfileMismatch("x/y profiles must share segmentation")


@dataclass(frozen=True)
class TwoQubitResult:
    final_unitary: np.ndarray
    fidelity: float
    steps: int
    max_unitarity_defect: float
    richardson_defect: float


def _collective_pulse(axis: str, sign: int) -> np.ndarray:
    gen = _X_COLLECTIVE if axis == "x" else _Y_COLLECTIVE
    return qmat.expm_hermitian(sign * gen / 2, math.pi / 2)


def build_swap_schedule(coupling: float, omega: float) -> TwoQubitDrive:
    """SWAP from three ZZ(pi/4) blocks and two collective pulse pairs.

    Enumerates, in a fixed order, which two of the three ZZ blocks get
    conjugated, the x/y axis assignment, and the pulse signs; each
    candidate is screened with exact (delta-pulse) unitaries against the
    SWAP matrix and the first pass is locked into the schedule, recorded
    in meta["assignment"].  Finite pulses then get amplitude omega and
    duration pi/(2 omega) so each implements the same pi/2 collective
    rotation.

    Raises ConstructionFailed if no candidate passes, which would mean
    the oracle or the algebra is broken, not the parameters.
    """
    if coupling <= 0 or omega <= 0:
        raise NonPositiveInput("coupling and pulse amplitude must be positive")
    u_zz = qmat.expm_hermitian(coupling * _ZZ / 2, math.pi / (2 * coupling))
    chosen = None
    for wrapped in ((0, 1), (0, 2), (1, 2)):
        for axes in (("x", "y"), ("y", "x")):
            for s1, s2 in iproduct((1, -1), repeat=2):
                u = np.eye(4, dtype=complex)
                for block in range(3):
                    if block == wrapped[0]:
                        v = _collective_pulse(axes[0], s1)
                        u = v.conj().T @ u_zz @ v @ u
                    elif block == wrapped[1]:
                        v = _collective_pulse(axes[1], s2)
                        u = v.conj().T @ u_zz @ v @ u
                    else:
                        u = u_zz @ u
                if qmat.aligned_distance(SWAP_MATRIX, u) < 1e-9:
                    chosen = (wrapped, axes, s1, s2)
                    break
            if chosen:
                break
        if chosen:
            break
    if chosen is None:
        raise ConstructionFailed("no pulse assignment reproduces SWAP in the delta limit")
    wrapped, axes, s1, s2 = chosen
    t_pulse = math.pi / (2 * omega)
    t_zz = math.pi / (2 * coupling)
    x_segs: list[tuple[float, float]] = []
    y_segs: list[tuple[float, float]] = []

    def _pulse(axis: str, amp: float):
        x_segs.append((t_pulse, amp if axis == "x" else 0.0))
        y_segs.append((t_pulse, amp if axis == "y" else 0.0))

    def _zz():
        x_segs.append((t_zz, 0.0))
        y_segs.append((t_zz, 0.0))

    signs = {wrapped[0]: (axes[0], s1), wrapped[1]: (axes[1], s2)}
    for block in range(3):
        if block in signs:
            axis, sign = signs[block]
            _pulse(axis, sign * omega)
            _zz()
            _pulse(axis, -sign * omega)
        else:
            _zz()
    total = sum(d for d, _ in x_segs)
    return TwoQubitDrive(
        coupling=coupling,
        drive_amp=omega,
        x_profile=StepProfile(tuple(x_segs)),
        y_profile=StepProfile(tuple(y_segs)),
        total_time=total,
        meta={"assignment": chosen, "zz_time": 3 * t_zz, "pulse_time": 4 * t_pulse},
    )


def rect_swap_fidelity(drive: TwoQubitDrive, *,
                       coupling_during_pulses: bool = True) -> float:
    """Fidelity of the rectangular-pulse schedule, segment-exact.

    Every segment has a constant Hamiltonian, so the product of
    eigendecomposition exponentials is exact; no time stepping.  With
    coupling_during_pulses False the ZZ term is suspended while a pulse
    is on (a diagnostic idealization: the construction then reproduces
    SWAP exactly at any pulse amplitude).
    """
    u = np.eye(4, dtype=complex)
    j = drive.coupling
    for (dur, ax), (_, ay) in zip(drive.x_profile.segments, drive.y_profile.segments):
        pulsing = ax != 0.0 or ay != 0.0
        j_eff = 0.0 if (pulsing and not coupling_during_pulses) else j
        h = j_eff * _ZZ / 2 + ax * _X_COLLECTIVE / 2 + ay * _Y_COLLECTIVE / 2
        u = qmat.expm_hermitian(h, dur) @ u
    return qmat.trace_fidelity(SWAP_MATRIX, u)


def _run_two_qubit(h_mid, duration: float, n: int) -> np.ndarray:
    h = duration / n
    t_mid = (np.arange(n) + 0.5) * h
    mats = qmat.expm_hermitian(h_mid(t_mid), h)
    return qmat.ordered_product(mats)


def propagate_two_qubit(h_mid, duration: float, target: np.ndarray, *,
                        n0: int, tol: float = 1e-7,
                        max_refinements: int = 3) -> TwoQubitResult:
    """Midpoint-stepped 4x4 propagation with fidelity-based halving.

    h_mid maps an array of midpoint times to stacked Hermitian 4x4
    Hamiltonians.  The step is halved until the fidelity against target
    moves by less than tol, which is the quantity the SWAP study
    consumes (entrywise agreement of the unitary is tracked by the
    single-qubit engine where the acceptance contract demands it).
    """
    if duration <= 0:
        raise NonPositiveInput("duration must be positive")
    n = n0
    u = _run_two_qubit(h_mid, duration, n)
    fid = qmat.trace_fidelity(target, u)
    for _ in range(max_refinements + 1):
        n2 = 2 * n
        u2 = _run_two_qubit(h_mid, duration, n2)
        fid2 = qmat.trace_fidelity(target, u2)
        defect = abs(fid2 - fid)
        if defect < tol:
            return TwoQubitResult(final_unitary=u2, fidelity=fid2, steps=n2,
                                  max_unitarity_defect=qmat.unitarity_defect(u2),
                                  richardson_defect=defect)
        u, fid, n = u2, fid2, n2
    raise NoConvergence(
        f"fidelity moved {defect:.3e} (> {tol:.1e}) after {max_refinements} refinements",
        defect, n)


def fato_swap_fidelity(drive: TwoQubitDrive, bandwidth: float) -> tuple[float, float]:
    """SWAP fidelity with the pulse trains played through a bandwidth cut.

    Both the x and y pulse profiles are Fourier-expanded over the full
    schedule window and truncated at order_for_bandwidth; the ZZ
    coupling stays on throughout.  Returns (f_fato, f_rect) with f_rect
    the rectangular-pulse baseline of the same schedule.
    """
    total = drive.total_time
    if bandwidth < 2 * math.pi / total:
        raise NonPositiveInput(
            "bandwidth below the fundamental 2*pi/T keeps no harmonics")
    order = order_for_bandwidth(bandwidth, total)
    wx = drive.x_profile.series(order)
    wy = drive.y_profile.series(order)
    j = drive.coupling

    def h_mid(t: np.ndarray) -> np.ndarray:
        ax = np.asarray(eval_waveform(wx, t))
        ay = np.asarray(eval_waveform(wy, t))
        return (j * _ZZ[None, :, :] / 2
                + ax[:, None, None] * _X_COLLECTIVE[None, :, :] / 2
                + ay[:, None, None] * _Y_COLLECTIVE[None, :, :] / 2)

    top = 2 * math.pi * max(order, 1) / total
    n0 = max(8192, int(math.ceil(64 * total * top / (2 * math.pi))))
    res = propagate_two_qubit(h_mid, total, SWAP_MATRIX, n0=n0)
    return res.fidelity, rect_swap_fidelity(drive)


def opposite_drift_fidelity(seq: BangSequence, order: int) -> tuple[float, float]:
    """Shared-waveform control of two opposite-drift qubits.

    Simulates the full 4x4 dynamics under
    H(t) = (omega0/2)(sz1 - sz2) + (Omega_bar f_K(t)/2)(sx1 + sx2)
    against the simultaneous target U1 (x) (sx U1 sx), where U1 is the
    exact gate of the bang sequence; the mirrored qubit sees the drift
    reversed, which conjugation by sx implements.  Returns (f2q, f1q).

    f1q comes from an independent single-qubit propagation (closed-form
    su(2) steps, not the 4x4 eigendecomposition) on the same midpoint
    grid.  The factorization f2q = f1q^2 is exact per grid, so checking
    it at 1e-10 probes the 4x4 Hamiltonian assembly and product
    machinery, not the step convergence.
    """
    from .dynamics import _run_steps
    from .fourier import series_of

    waveform = series_of(seq, order)
    params = seq.params
    total = waveform.period
    u1_target = sequence_unitary(seq)
    u2_target = qmat.PAULI_X @ u1_target @ qmat.PAULI_X
    target = np.kron(u1_target, u2_target)
    drift = (np.kron(qmat.PAULI_Z, qmat.PAULI_I)
             - np.kron(qmat.PAULI_I, qmat.PAULI_Z))
    drive = _X_COLLECTIVE

    def h_mid(t: np.ndarray) -> np.ndarray:
        f = params.omega_bar * np.asarray(eval_waveform(waveform, t))
        return (params.omega0 * drift[None, :, :] / 2
                + f[:, None, None] * drive[None, :, :] / 2)

    top = max(2 * math.pi * max(order, 1) / total, params.omega)
    amp_eff = max(1.2 * params.omega_bar, 0.2 * params.omega)
    c_est = total * top * (top + params.omega) * amp_eff / 24.0
    n0 = max(1024,
             int(math.ceil(64 * total * top / (2 * math.pi))),
             int(math.ceil(total * math.sqrt(c_est / (32 * 1e-8)))))
    res = propagate_two_qubit(h_mid, total, target, n0=n0)
    u1 = _run_steps(lambda t: eval_waveform(waveform, t), total, params, res.steps)
    f1q = qmat.trace_fidelity(u1_target, u1)
    return res.fidelity, f1q
