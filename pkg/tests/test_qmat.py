import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from fato import qmat


def test_pauli_algebra():
    sx, sy, sz = qmat.pauli("x"), qmat.pauli("y"), qmat.pauli("z")
    assert np.allclose(sx @ sx, np.eye(2))
    assert np.allclose(sx @ sy, 1j * sz)
    assert np.allclose(sy @ sz, 1j * sx)
    with pytest.raises(qmat.DimMismatch):
        qmat.pauli("w")


@given(st.floats(-10, 10), st.floats(-1, 1), st.floats(-1, 1),
       st.floats(-1, 1))
@settings(max_examples=60, deadline=None)
def test_exp_su2_matches_scipy(phi, ax, ay, az):
    norm = np.hypot(np.hypot(ax, ay), az)
    if norm < 1e-3:
        ax, ay, az, norm = 0.0, 0.0, 1.0, 1.0
    n = np.array([ax, ay, az], dtype=float) / norm
    u = qmat.exp_su2(n[0], n[1], n[2], phi)
    h = (n[0] * qmat.pauli("x") + n[1] * qmat.pauli("y")
         + n[2] * qmat.pauli("z"))
    # phi is the half-angle: exp_su2(n, phi) = exp(-i phi n.sigma)
    assert np.max(np.absolute(u - expm(-1j * phi * h))) < 1e-12


def test_exp_su2_rejects_non_unit_axis():
    with pytest.raises(qmat.NonUnitAxis):
        qmat.exp_su2(1.0, 1.0, 0.0, 0.3)


def test_expm_hermitian_stacked():
    rng = np.random.default_rng(7)
    a = rng.normal(size=(5, 2, 2)) + 1j * rng.normal(size=(5, 2, 2))
    h = a + np.conj(np.swapaxes(a, -1, -2))
    u = qmat.expm_hermitian(h, 0.37)
    for k in range(5):
        assert np.max(np.abs(u[k] - expm(-1j * 0.37 * h[k]))) < 1e-11


def test_expm_hermitian_rejects_nonhermitian():
    with pytest.raises(ValueError):
        qmat.expm_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_ordered_product_matches_sequential():
    rng = np.random.default_rng(3)
    mats = []
    for _ in range(11):
        n = rng.normal(size=3)
        n /= np.linalg.norm(n)
        mats.append(qmat.exp_su2(*n, rng.uniform(-3, 3)))
    mats = np.array(mats)
    direct = np.eye(2, dtype=complex)
    for m in mats:        # last factor applied last: U = U_N ... U_1
        direct = m @ direct
    assert np.max(np.abs(qmat.ordered_product(mats) - direct)) < 1e-13


def test_ordered_product_shape_check():
    with pytest.raises(qmat.DimMismatch):
        qmat.ordered_product(np.zeros((3, 2, 3)))


def test_trace_fidelity_phase_invariant():
    u = qmat.exp_su2(0.0, 1.0, 0.0, 0.8)
    f1 = qmat.trace_fidelity(u, u)
    f2 = qmat.trace_fidelity(u, np.exp(1j * 1.234) * u)
    assert abs(f1 - 1.0) < 1e-14
    assert abs(f2 - 1.0) < 1e-14


def test_trace_fidelity_rejects_nonunitary():
    with pytest.raises(qmat.NonUnitary):
        qmat.trace_fidelity(np.eye(2), 2.0 * np.eye(2))


def test_phase_align_and_distance():
    u = qmat.exp_su2(1.0, 0.0, 0.0, 1.1)
    v = np.exp(-1j * 0.77) * u
    aligned = qmat.phase_align(u, v)
    assert np.max(np.abs(aligned - u)) < 1e-13
    assert qmat.aligned_distance(u, v) < 1e-13


def test_kron_dimensions():
    sx = qmat.pauli("x")
    k = qmat.kron(sx, np.eye(2))
    assert k.shape == (4, 4)
    assert np.allclose(k, np.kron(sx, np.eye(2)))


def test_unitarity_defect_scales():
    u = qmat.exp_su2(0.0, 0.0, 1.0, 0.5)
    assert qmat.unitarity_defect(u) < 1e-15
    assert qmat.unitarity_defect(u * 1.001) > 1e-4
