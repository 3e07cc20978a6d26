"""Dense matrices for the small named gates used across the package.

These are the only gate matrices the package ever hard-codes; everything
larger is built from them (kron/compose) or from canonical forms.
"""

from __future__ import annotations

import numpy as np

_s2 = 1.0 / np.sqrt(2.0)

I = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[_s2, _s2], [_s2, -_s2]], dtype=complex)
S = np.array([[1, 0], [0, 1j]], dtype=complex)
SDG = S.conj().T
T = np.array([[1, 0], [0, np.exp(1j * np.pi / 4)]], dtype=complex)
TDG = T.conj().T


def controlled(u: np.ndarray) -> np.ndarray:
    """C(U) = |0><0| (x) I + |1><1| (x) U, control as the first tensor factor."""
    k = u.shape[0]
    out = np.eye(2 * k, dtype=complex)
    out[k:, k:] = u
    return out


CX = controlled(X)
CY = controlled(Y)
CZ = controlled(Z)
CH = controlled(H)
SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)

GATES_1Q = {"I": I, "X": X, "Y": Y, "Z": Z, "H": H, "S": S, "SDG": SDG,
            "T": T, "TDG": TDG}
GATES_2Q = {"CX": CX, "CY": CY, "CZ": CZ, "CH": CH, "SWAP": SWAP}


def gate_matrix(name: str) -> np.ndarray:
    if name in GATES_1Q:
        return GATES_1Q[name]
    if name in GATES_2Q:
        return GATES_2Q[name]
    raise KeyError(f"unknown gate {name!r}")


def gate_arity(name: str) -> int:
    return 1 if name in GATES_1Q else 2


def kron_all(mats) -> np.ndarray:
    out = np.array([[1]], dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def embed(u: np.ndarray, qubits: tuple[int, ...], n: int) -> np.ndarray:
    """Embed a k-qubit unitary acting on `qubits` into an n-qubit unitary.

    Qubit 0 is the most significant tensor factor, matching PauliString.
    """
    k = len(qubits)
    dim = 1 << n
    u = np.asarray(u, dtype=complex)
    out = np.zeros((dim, dim), dtype=complex)
    rest = [q for q in range(n) if q not in qubits]
    for col in range(dim):
        sub = 0
        for i, q in enumerate(qubits):
            sub |= ((col >> (n - 1 - q)) & 1) << (k - 1 - i)
        base = col
        for i, q in enumerate(qubits):
            base &= ~(1 << (n - 1 - q))
        colvec = u[:, sub]
        for subrow in range(1 << k):
            if colvec[subrow] == 0:
                continue
            row = base
            for i, q in enumerate(qubits):
                row |= ((subrow >> (k - 1 - i)) & 1) << (n - 1 - q)
            out[row, col] = colvec[subrow]
    _ = rest
    return out
