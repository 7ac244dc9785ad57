import math

import numpy as np
import pytest

from fato import qmat
from fato.bangbang import (
    StrongRegime,
    params_from_theta,
    sequence_unitary,
    strong_pi_sequence,
    weak_pi_sequence,
)
from fato.dynamics import (
    NoConvergence,
    analytic_fidelity,
    fato_propagation,
    magnus_effective,
    propagate_bb,
    propagate_envelope,
    propagate_waveform,
    richardson_scan,
    rwa_infidelity,
    sequence_analytic_fidelity,
)
from fato.fourier import series_of, tail_error

P10 = params_from_theta(math.pi / 10)
SEQ_X5 = weak_pi_sequence("x", 5, P10)


def test_propagate_bb_is_exact_product():
    res = propagate_bb(SEQ_X5)
    assert np.max(np.abs(res.final_unitary - sequence_unitary(SEQ_X5))) < 1e-14
    assert res.fidelity == pytest.approx(1.0, abs=1e-12)  # target from meta
    assert res.max_unitarity_defect < 1e-12


def test_propagate_bb_without_target_reports_nan():
    seq = weak_pi_sequence("y", 4, params_from_theta(math.pi / 8))
    bare = seq.__class__(bangs=seq.bangs, params=seq.params,
                         total_time=seq.total_time)
    res = propagate_bb(bare)
    assert math.isnan(res.fidelity)


# deterministic playback infidelities for the five-bang X pulse; these
# pin regressions in the stepper, the series code and the coefficients
FATO_ORACLE = {2: 1.149153e-01, 3: 7.780555e-05, 4: 4.922905e-05}


@pytest.mark.parametrize("order,expected", sorted(FATO_ORACLE.items()))
def test_fato_infidelity_oracle(order, expected):
    res = fato_propagation(SEQ_X5, series_of(SEQ_X5, order))
    assert 1.0 - res.fidelity == pytest.approx(expected, rel=1e-3)
    assert res.max_unitarity_defect < 1e-9


def test_fato_propagation_rejects_period_mismatch():
    other = weak_pi_sequence("y", 4, params_from_theta(math.pi / 8))
    with pytest.raises(ValueError):
        fato_propagation(SEQ_X5, series_of(other, 3))


def test_richardson_defect_shrinks_per_halving():
    wf = series_of(SEQ_X5, 3)
    defects = richardson_scan(wf, P10, halvings=3)
    assert len(defects) == 3
    for a, b in zip(defects, defects[1:]):
        assert a / b >= 3.0


def test_propagate_envelope_raises_when_bandwidth_understated():
    # declaring max_angular_freq far below the envelope's true content
    # starves the initial step; the halving cap must trip, not loop
    with pytest.raises(NoConvergence):
        propagate_envelope(lambda t: np.cos(3000.0 * t), 0.7, P10,
                           target=None, max_angular_freq=1.0, tol=1e-12,
                           max_refinements=2)


def test_detuning_perturbs_fidelity():
    wf = series_of(SEQ_X5, 8)
    target = sequence_unitary(SEQ_X5)
    nominal = propagate_waveform(wf, P10, target)
    detuned = propagate_waveform(wf, P10, target, drift_scale=1.02)
    assert 1.0 - nominal.fidelity < 1e-5
    assert 1.0 - detuned.fidelity > 10 * (1.0 - nominal.fidelity)


def test_rwa_infidelity_reference_point():
    duration, inf = rwa_infidelity("x", P10)
    assert duration == 2 * math.pi / P10.omega_bar
    assert inf == pytest.approx(7.8829e-4, rel=1e-3)


def test_rwa_infidelity_vanishes_with_drive_strength():
    # counter-rotating breakage scales like (omega_bar/omega0)^2
    inf_small = rwa_infidelity("x", params_from_theta(math.pi / 40))[1]
    inf_large = rwa_infidelity("x", P10)[1]
    assert inf_small < inf_large / 10


def test_rwa_infidelity_strong_regime_guard():
    with pytest.raises(StrongRegime):
        rwa_infidelity("x", params_from_theta(0.3 * math.pi))


def test_magnus_matches_closed_form_coefficient_for_y_family():
    p = params_from_theta(math.pi / 8)
    seq = weak_pi_sequence("y", 4, p)
    eff = magnus_effective(seq, 3)
    expected = p.omega0 * p.theta / math.pi * math.tan(p.theta) * tail_error(seq, 3)
    assert abs(eff.h_x) == pytest.approx(expected, rel=1e-9)
    assert abs(eff.h_z) < 1e-12 * abs(eff.h_x)
    assert eff.remainder_tail == 0.0


def test_magnus_prediction_tracks_simulation_on_y_family():
    p = params_from_theta(math.pi / 8)
    seq = weak_pi_sequence("y", 4, p)
    eff = magnus_effective(seq, 3)
    sim = 1.0 - fato_propagation(seq, series_of(seq, 3)).fidelity
    assert 0.8 < eff.predicted_infidelity / sim < 1.1


def test_magnus_norm_collapses_at_large_order():
    eff = magnus_effective(SEQ_X5, 120)
    assert eff.norm < 1e-5 * P10.omega0


def test_analytic_fidelity_formulas():
    th = math.pi / 10
    f = analytic_fidelity("weak", "x", th, 0.1, "main_text")
    assert f == pytest.approx(math.cos(math.pi / 4 * math.tan(th) * 0.1))
    f2 = analytic_fidelity("weak", "x", th, 0.1, "appendix")
    assert f2 == pytest.approx(math.cos(math.pi / 2 * math.tan(th) * 0.1))
    fy = analytic_fidelity("strong", "y", math.pi / 3, 0.05)
    assert fy == pytest.approx(math.cos(2 / math.pi * math.tan(math.pi / 3) * 0.05))
    assert fy == pytest.approx(0.99848, abs=5e-5)
    with pytest.raises(ValueError):
        analytic_fidelity("weak", "x", th, 0.1, "nonsense")
    with pytest.raises(ValueError):
        analytic_fidelity("medium", "x", th, 0.1)
    with pytest.raises(ValueError):
        analytic_fidelity("weak", "x", th, -0.1)


def test_sequence_analytic_fidelity_calibrated_pairing():
    # weak branch uses the appendix constant with the spectral tail
    f = sequence_analytic_fidelity(SEQ_X5, 4)
    expected = math.cos(math.pi / 2 * math.tan(math.pi / 10)
                        * tail_error(SEQ_X5, 4))
    assert f == pytest.approx(expected, rel=1e-12)
    # strong branch feeds the integral tail (twice spectral)
    ps = params_from_theta(math.pi / 3)
    seq_s = strong_pi_sequence("y", ps)
    fs = sequence_analytic_fidelity(seq_s, 5)
    expected_s = math.cos(2 / math.pi * math.tan(math.pi / 3)
                          * 2 * tail_error(seq_s, 5))
    assert fs == pytest.approx(expected_s, rel=1e-12)


def test_sequence_analytic_fidelity_untagged_is_nan():
    bare = SEQ_X5.__class__(bangs=SEQ_X5.bangs, params=SEQ_X5.params,
                            total_time=SEQ_X5.total_time)
    assert math.isnan(sequence_analytic_fidelity(bare, 4))
