"""Bang-bang qubit control with finite-bandwidth Fourier playback.

Synthesizes time-optimal switching sequences for single-qubit pi
rotations, truncates them to a stated spectral bandwidth, simulates the
resulting dynamics exactly, and quantifies the fidelity, robustness and
bandwidth trade-offs, including a two-qubit SWAP construction driven by
the same truncated pulses.
"""

from .bangbang import (
    BangSequence,
    DriveParams,
    derive_params,
    params_from_theta,
    rwa_reference,
    search_to_sequence,
    sequence_unitary,
    strong_pi_sequence,
    synthesize_pi,
    weak_pi_sequence,
)
from .dynamics import (
    EffectiveHamiltonian,
    PropagationResult,
    analytic_fidelity,
    fato_propagation,
    magnus_effective,
    propagate_bb,
    propagate_waveform,
    rwa_infidelity,
)
from .fourier import (
    FourierWaveform,
    eval_waveform,
    order_for_bandwidth,
    series_of,
    tail_error,
    tail_integral,
    waveform_for_bandwidth,
)
from .sweeps import SWEEP_KINDS, SweepRecord, SweepSpec, robustness_point, run_sweep, sweep_csv
from .twoqubit import (
    StepProfile,
    TwoQubitDrive,
    build_swap_schedule,
    fato_swap_fidelity,
    opposite_drift_fidelity,
    rect_swap_fidelity,
)

__version__ = "0.1.0"

__all__ = [
    "BangSequence",
    "DriveParams",
    "EffectiveHamiltonian",
    "FourierWaveform",
    "PropagationResult",
    "SWEEP_KINDS",
    "StepProfile",
    "SweepRecord",
    "SweepSpec",
    "TwoQubitDrive",
    "analytic_fidelity",
    "build_swap_schedule",
    "derive_params",
    "eval_waveform",
    "fato_propagation",
    "fato_swap_fidelity",
    "magnus_effective",
    "opposite_drift_fidelity",
    "order_for_bandwidth",
    "params_from_theta",
    "propagate_bb",
    "propagate_waveform",
    "rect_swap_fidelity",
    "robustness_point",
    "run_sweep",
    "rwa_infidelity",
    "rwa_reference",
    "search_to_sequence",
    "sequence_unitary",
    "series_of",
    "strong_pi_sequence",
    "sweep_csv",
    "synthesize_pi",
    "tail_error",
    "tail_integral",
    "waveform_for_bandwidth",
    "weak_pi_sequence",
    "__version__",
]
