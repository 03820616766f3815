"""Exact two-qubit quantum mechanics: states, projective measurements, correlators.

Conventions (pinned, tests depend on them):
  * computational basis ordering |00>, |01>, |10>, |11> with H -> |0>, V -> |1>,
  * Pauli matrices in standard form,
  * measurement directions given as Bloch angles (theta, phi) with
    r = (sin theta cos phi, sin theta sin phi, cos theta).

All functions are pure and operate on plain numpy arrays; a density matrix is a
4x4 complex ndarray.
"""

from __future__ import annotations

import math

import numpy as np

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = np.stack([SIGMA_X, SIGMA_Y, SIGMA_Z])
IDENTITY_2 = np.eye(2, dtype=complex)

TSIRELSON = 2.0 * math.sqrt(2.0)

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = -1e-10

# sigma_i (x) sigma_j for all nine Pauli pairs, used by the correlation tensor
_PAULI_KRON = np.array([[np.kron(si, sj) for sj in PAULIS] for si in PAULIS])


def validate_density_matrix(rho: np.ndarray) -> None:
    """Raise ValueError unless rho is Hermitian, unit-trace and PSD (within tolerance)."""
    rho = np.asarray(rho)
    if rho.shape != (4, 4):
        raise ValueError(f"density matrix must be 4x4, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > HERMITICITY_TOL:
        raise ValueError("density matrix is not Hermitian within 1e-12")
    if abs(np.trace(rho).real - 1.0) > TRACE_TOL or abs(np.trace(rho).imag) > TRACE_TOL:
        raise ValueError("density matrix trace differs from 1 beyond 1e-12")
    eigenvalues = np.linalg.eigvalsh(rho)
    if eigenvalues.min() < PSD_TOL:
        raise ValueError(f"density matrix has negative eigenvalue {eigenvalues.min():.3e}")


def make_pure_state(gamma: float, phi: float = 0.0) -> np.ndarray:
    """Density matrix of cos(gamma)|01> + e^{i phi} sin(gamma)|10>.

    gamma controls the degree of entanglement (gamma = pi/4 is maximally
    entangled, gamma = 0 is the product state |01>); phi is a relative phase
    and defaults to 0.
    """
    amplitudes = np.zeros(4, dtype=complex)
    amplitudes[1] = math.cos(gamma)
    amplitudes[2] = np.exp(1j * phi) * math.sin(gamma)
    return np.outer(amplitudes, amplitudes.conj())


_PSI_MINUS = np.array([0.0, 1.0, -1.0, 0.0], dtype=complex) / math.sqrt(2.0)
_PSI_PLUS = np.array([0.0, 1.0, 1.0, 0.0], dtype=complex) / math.sqrt(2.0)


def make_noisy_state(p: float, lam: float, gamma: float) -> np.ndarray:
    """Mix the pure target state with Bell-diagonal and white noise.

    rho = p |psi^gamma><psi^gamma|
          + (1-p) [ lam (|psi-><psi-| + |psi+><psi+|)/2 + (1-lam) I/4 ]

    with |psi+-> = (|01> +- |10>)/sqrt(2).  p and lam must lie in [0, 1].
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must be in [0, 1], got {lam}")
    bell_mix = 0.5 * (np.outer(_PSI_MINUS, _PSI_MINUS.conj()) + np.outer(_PSI_PLUS, _PSI_PLUS.conj()))
    white = np.eye(4, dtype=complex) / 4.0
    return p * make_pure_state(gamma) + (1.0 - p) * (lam * bell_mix + (1.0 - lam) * white)


def bloch_vector(theta: float, phi: float) -> np.ndarray:
    """Unit vector on the Bloch sphere for polar angle theta and azimuth phi."""
    sin_t = math.sin(theta)
    return np.array([sin_t * math.cos(phi), sin_t * math.sin(phi), math.cos(theta)])


def observable(theta: float, phi: float) -> np.ndarray:
    """The +-1 valued qubit observable r(theta, phi) . sigma."""
    r = bloch_vector(theta, phi)
    return r[0] * SIGMA_X + r[1] * SIGMA_Y + r[2] * SIGMA_Z


def projector_pm(theta: float, phi: float) -> tuple[np.ndarray, np.ndarray]:
    """Eigenprojectors (P_plus, P_minus) of the +-1 outcomes along r(theta, phi)."""
    obs = observable(theta, phi)
    return 0.5 * (IDENTITY_2 + obs), 0.5 * (IDENTITY_2 - obs)


def joint_probability(
    rho: np.ndarray,
    a: int,
    b: int,
    dir_a: tuple[float, float],
    dir_b: tuple[float, float],
) -> float:
    """Born-rule probability p(a, b) for outcomes a, b in {+1, -1}."""
    if a not in (+1, -1) or b not in (+1, -1):
        raise ValueError("outcomes must be +1 or -1")
    proj_a = projector_pm(*dir_a)[0 if a == +1 else 1]
    proj_b = projector_pm(*dir_b)[0 if b == +1 else 1]
    return float(np.trace(np.kron(proj_a, proj_b) @ rho).real)


def correlator(rho: np.ndarray, dir_a: tuple[float, float], dir_b: tuple[float, float]) -> float:
    """Expectation value Tr[(A (x) B) rho] of the product of +-1 observables."""
    op = np.kron(observable(*dir_a), observable(*dir_b))
    return float(np.trace(op @ rho).real)


def correlation_matrix(rho: np.ndarray) -> np.ndarray:
    """3x3 real correlation tensor T_ij = Tr[rho (sigma_i (x) sigma_j)]."""
    return np.real(np.einsum("ijkl,lk->ij", _PAULI_KRON, rho))


def bloch_marginals(rho: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Local Bloch vectors (s_A, s_B) with s_A[i] = Tr[rho (sigma_i (x) I)]."""
    s_a = np.array([np.trace(np.kron(sigma, IDENTITY_2) @ rho).real for sigma in PAULIS])
    s_b = np.array([np.trace(np.kron(IDENTITY_2, sigma) @ rho).real for sigma in PAULIS])
    return s_a, s_b


def horodecki_chsh_max(rho: np.ndarray) -> float:
    """Maximal CHSH value 2 sqrt(m1 + m2) achievable by rho.

    m1 >= m2 are the two largest eigenvalues of T^T T where T is the
    correlation tensor of the state.
    """
    t = correlation_matrix(rho)
    eigenvalues = np.linalg.eigvalsh(t.T @ t)
    m1, m2 = eigenvalues[-1], eigenvalues[-2]
    return 2.0 * math.sqrt(max(m1, 0.0) + max(m2, 0.0))
