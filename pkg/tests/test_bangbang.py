import math

import numpy as np
import pytest

from fato import qmat
from fato.bangbang import (
    BangSequence,
    NonPositiveInput,
    NotFound,
    ParityMismatch,
    StrongRegime,
    ThetaMismatch,
    WeakRegime,
    derive_params,
    params_from_theta,
    rwa_reference,
    search_to_sequence,
    sequence_unitary,
    si_pi,
    strong_pi_sequence,
    synthesize_pi,
    weak_pi_sequence,
)

STRONG_THETAS = [0.26 * math.pi, 0.30 * math.pi, math.pi / 3,
                 0.40 * math.pi, 0.45 * math.pi]


def test_derive_params_consistency():
    p = derive_params(1.0, 1.0)
    assert p.theta == pytest.approx(math.pi / 4)
    assert p.omega == pytest.approx(math.sqrt(2.0))
    with pytest.raises(NonPositiveInput):
        derive_params(-1.0, 1.0)
    with pytest.raises(NonPositiveInput):
        params_from_theta(math.pi / 2)
    with pytest.raises(ThetaMismatch):
        # internally inconsistent tuple must not construct
        from fato.bangbang import DriveParams
        DriveParams(omega0=1.0, omega_bar=1.0, theta=0.3, omega=math.sqrt(2))


def test_weak_family_reaches_targets():
    for n in range(2, 12):
        gate = "x" if n % 2 else "y"
        params = params_from_theta(math.pi / (2 * n))
        seq = weak_pi_sequence(gate, n, params)
        assert len(seq.bangs) == n
        assert seq.total_time == pytest.approx(n * math.pi / params.omega)
        target = qmat.pauli(gate)
        assert qmat.aligned_distance(target, sequence_unitary(seq)) < 1e-9


def test_weak_family_parity_and_theta_guards():
    params = params_from_theta(math.pi / 6)  # n = 3
    with pytest.raises(ParityMismatch):
        weak_pi_sequence("y", 3, params)     # y needs even n
    with pytest.raises(ThetaMismatch):
        weak_pi_sequence("x", 5, params)     # theta != pi/10


def test_weak_alternation_pattern():
    params = params_from_theta(math.pi / 8)
    seq = weak_pi_sequence("y", 4, params)
    assert seq.levels == (1, -1, 1, -1)
    assert seq.time_optimal


@pytest.mark.parametrize("theta", STRONG_THETAS)
@pytest.mark.parametrize("gate", ["x", "y"])
def test_strong_family_reaches_targets(theta, gate):
    params = params_from_theta(theta)
    seq = strong_pi_sequence(gate, params)
    assert len(seq.bangs) == 3
    assert qmat.aligned_distance(qmat.pauli(gate), sequence_unitary(seq)) < 1e-9
    if gate == "x":
        assert seq.levels == (1, -1, 1)
        assert seq.meta["t2x_parsing"] == "parenthesized"
    else:
        assert seq.levels == (1, 0, -1)
        # middle singular bang evolves under drift alone
        assert seq.bangs[1][0] == 0


def test_strong_rejects_weak_theta():
    with pytest.raises(WeakRegime):
        strong_pi_sequence("x", params_from_theta(math.pi / 5))


def test_bang_sequence_validation():
    p = params_from_theta(math.pi / 6)
    with pytest.raises(NonPositiveInput):
        BangSequence(bangs=((1, -0.5),), params=p, total_time=-0.5)
    with pytest.raises(ValueError):
        BangSequence(bangs=((2, 1.0),), params=p, total_time=1.0)
    with pytest.raises(ValueError):
        BangSequence(bangs=((1, 1.0), (1, 1.0)), params=p, total_time=2.0)
    with pytest.raises(ValueError):
        BangSequence(bangs=((1, 1.0),), params=p, total_time=3.0)


def test_synthesize_pi_dispatch():
    weak = synthesize_pi("x", params_from_theta(math.pi / 10))
    assert len(weak.bangs) == 5
    assert weak.meta["gate"] == "x"
    strong = synthesize_pi("y", params_from_theta(math.pi / 3))
    assert strong.levels == (1, 0, -1)


def test_search_identity_is_empty():
    params = params_from_theta(math.pi / 10)
    seq = search_to_sequence(np.eye(2), params)
    assert seq.total_time == 0.0
    assert seq.bangs == ()


def test_search_recovers_weak_x():
    # small case n = 3 keeps the multistart cheap
    params = params_from_theta(math.pi / 6)
    seq = search_to_sequence(qmat.pauli("x"), params)
    expected = 3 * math.pi / params.omega
    assert seq.total_time == pytest.approx(expected, rel=1e-6)
    assert qmat.aligned_distance(qmat.pauli("x"), sequence_unitary(seq)) < 1e-7


def test_search_determinism():
    params = params_from_theta(math.pi / 6)
    a = search_to_sequence(qmat.pauli("x"), params)
    b = search_to_sequence(qmat.pauli("x"), params)
    assert a.bangs == b.bangs


def test_si_pi_quadrature():
    # Si(pi) = 1.8519370... (Wilbraham-Gibbs constant)
    assert si_pi() == pytest.approx(1.851937051982, abs=1e-9)


def test_rwa_reference_timing_and_ratio():
    params = params_from_theta(math.pi / 4)
    t_rwa, ratio = rwa_reference(params)
    assert t_rwa == 2 * math.pi / params.omega_bar  # exact, no rounding
    assert abs(ratio - 0.83368) < 5e-4
    for n in range(2, 40):
        r = rwa_reference(params_from_theta(math.pi / (2 * n)))[1]
        assert r < 1.0
    with pytest.raises(StrongRegime):
        rwa_reference(params_from_theta(0.3 * math.pi))
