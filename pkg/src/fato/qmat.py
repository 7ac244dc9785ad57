"""Dense complex-matrix kernel for 2x2 and 4x4 unitaries.

Everything downstream (sequence synthesis, waveform propagation, the
two-qubit SWAP study) reduces to products of matrix exponentials of
Hermitian generators.  For a single qubit the generators are traceless
2x2 matrices, so the exponential has the closed axis-angle form

    exp(-i*phi*(n.sigma)) = cos(phi)*I - i*sin(phi)*(n.sigma),

which is exactly unitary at any angle.  Four-dimensional generators
(ZZ coupling plus collective drives) are exponentiated through an
eigendecomposition of the Hermitian matrix.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "PAULI_I",
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "pauli",
    "exp_su2",
    "expm_hermitian",
    "kron",
    "ordered_product",
    "trace_fidelity",
    "phase_align",
    "aligned_distance",
    "unitarity_defect",
    "NonUnitAxis",
    "DimMismatch",
    "NonUnitary",
]


class NonUnitAxis(ValueError):
    """Rotation axis does not have unit norm."""


class DimMismatch(ValueError):
    """Operands have incompatible or unsupported dimensions."""


class NonUnitary(ValueError):
    """A matrix required to be unitary is not."""


PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

_PAULIS = {"x": PAULI_X, "y": PAULI_Y, "z": PAULI_Z, "i": PAULI_I}

# Max-entry norm is the diagnostic norm used throughout: cheap and
# sufficient for the pass/fail thresholds in the tests.


def pauli(axis: str) -> np.ndarray:
    """Return a copy of the Pauli matrix for ``axis`` in {'x','y','z','i'}."""
    try:
        return _PAULIS[axis.lower()].copy()
    except KeyError:
        raise DimMismatch(f"unknown Pauli axis {axis!r}") from None


def exp_su2(nx: float, ny: float, nz: float, phi: float) -> np.ndarray:
    """Closed-form SU(2) exponential cos(phi)*I - i*sin(phi)*(n.sigma).

    Parameters
    ----------
    nx, ny, nz : float
        Unit rotation axis.  Checked to 1e-12; a series expansion is
        never used, so large angles (long bangs) lose no accuracy.
    phi : float
        Half-angle of the rotation in radians: exp_su2(n, omega*t/2)
        propagates a Hamiltonian (omega/2)*(n.sigma) for time t.
    """
    norm = np.sqrt(nx * nx + ny * ny + nz * nz)
    if abs(norm - 1.0) > 1e-12:
        raise NonUnitAxis(f"axis norm {norm!r} deviates from 1 beyond 1e-12")
    c = np.cos(phi)
    s = np.sin(phi)
    return np.array(
        [
            [c - 1j * s * nz, -s * ny - 1j * s * nx],
            [s * ny - 1j * s * nx, c + 1j * s * nz],
        ]
    )


def expm_hermitian(h: np.ndarray, t: float = 1.0) -> np.ndarray:
    """exp(-i*t*h) for Hermitian h via eigendecomposition."""
    h = np.asarray(h, dtype=complex)
    if h.shape[-1] != h.shape[-2]:
        raise DimMismatch(f"square matrix required, got {h.shape}")
    if np.max(np.abs(h - np.conj(np.swapaxes(h, -1, -2)))) > 1e-10:
        raise NonUnitary("generator is not Hermitian within 1e-10")
    w, v = np.linalg.eigh(h)
    phase = np.exp(-1j * t * w)
    return np.matmul(v * phase[..., None, :], np.conj(np.swapaxes(v, -1, -2)))


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product of two 2x2 operators, giving the 4x4 two-qubit operator."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != (2, 2) or b.shape != (2, 2):
        raise DimMismatch(f"kron expects 2x2 operands, got {a.shape} and {b.shape}")
    return np.kron(a, b)


def unitarity_defect(u: np.ndarray) -> float:
    """Max-entry norm of U^dag U - I."""
    u = np.asarray(u)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def ordered_product(mats: np.ndarray) -> np.ndarray:
    """Time-ordered product mats[-1] @ ... @ mats[0] by pairwise halving.

    Log-depth matmul keeps the work vectorized and the roundoff growth
    O(log N) instead of O(N) for the sequential loop.
    """
    m = np.asarray(mats)
    if m.ndim != 3 or m.shape[0] == 0 or m.shape[1] != m.shape[2]:
        raise DimMismatch(
            f"need a nonempty stack of square matrices, got {m.shape}")
    while m.shape[0] > 1:
        if m.shape[0] % 2:
            head = np.matmul(m[1::2], m[0:-1:2])
            m = np.concatenate([head, m[-1:]], axis=0)
        else:
            m = np.matmul(m[1::2], m[0::2])
    return m[0]


def trace_fidelity(u_target: np.ndarray, u_actual: np.ndarray) -> float:
    """Entanglement fidelity |Tr(U_target^dag U_actual)| / dim.

    Global-phase invariant by construction.  Both arguments must be
    unitary to 1e-9 in the max-entry norm; this catches propagation
    bugs early instead of silently reporting fidelities above 1.
    """
    u_target = np.asarray(u_target, dtype=complex)
    u_actual = np.asarray(u_actual, dtype=complex)
    if u_target.shape != u_actual.shape:
        raise DimMismatch(f"shape mismatch {u_target.shape} vs {u_actual.shape}")
    for u in (u_target, u_actual):
        if unitarity_defect(u) > 1e-9:
            raise NonUnitary("argument is not unitary within 1e-9")
    dim = u_target.shape[0]
    return float(abs(np.trace(u_target.conj().T @ u_actual)) / dim)


def phase_align(u_reference: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Multiply u by the unit phase maximizing Re Tr(u_reference^dag u).

    Fidelity ignores global phase, so matrix-entry distances should
    too; align before differencing.
    """
    z = np.trace(np.asarray(u_reference).conj().T @ np.asarray(u))
    if abs(z) < 1e-300:
        return np.asarray(u).copy()
    return np.asarray(u) * (np.conj(z) / abs(z))


def aligned_distance(u_reference: np.ndarray, u: np.ndarray) -> float:
    """Max-entry distance between u_reference and phase-aligned u."""
    return float(np.max(np.abs(phase_align(u_reference, u) - u_reference)))
