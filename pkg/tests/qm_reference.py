"""Density-matrix reference for two-qubit behaviors.

Builds states and projective measurements as explicit 4x4 / 2x2 matrices and
takes traces, so it shares no code path with the closed-form tables in
localdist.quantum.
"""

import numpy as np

SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SY = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SZ = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
ID2 = np.eye(2, dtype=complex)


def pure_state_density(gamma: float) -> np.ndarray:
    """Density matrix of (|00> + gamma |11>) / sqrt(1 + gamma^2)."""
    psi = np.array([1.0, 0.0, 0.0, gamma], dtype=complex)
    psi /= np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def singlet_density() -> np.ndarray:
    psi = np.array([0.0, 1.0, -1.0, 0.0], dtype=complex) / np.sqrt(2.0)
    return np.outer(psi, psi.conj())


def werner_density(p: float) -> np.ndarray:
    return p * singlet_density() + (1.0 - p) * np.eye(4, dtype=complex) / 4.0


def projector(direction, outcome: int) -> np.ndarray:
    """Spin projector (I +- n.sigma) / 2; outcome 0 is the +1 eigenvalue."""
    n = np.asarray(direction, dtype=float)
    nsigma = n[0] * SX + n[1] * SY + n[2] * SZ
    sign = 1.0 if outcome == 0 else -1.0
    return 0.5 * (ID2 + sign * nsigma)


def behavior_table(rho4: np.ndarray, alice_dirs, bob_dirs) -> np.ndarray:
    """Conditional table P(r, s | a, b) = tr(rho Pi_r^a x Pi_s^b), shape (2, 2, A, B)."""
    A, B = len(alice_dirs), len(bob_dirs)
    table = np.zeros((2, 2, A, B))
    for a in range(A):
        for b in range(B):
            for r in range(2):
                for s in range(2):
                    op = np.kron(projector(alice_dirs[a], r), projector(bob_dirs[b], s))
                    table[r, s, a, b] = np.trace(rho4 @ op).real
    return table
