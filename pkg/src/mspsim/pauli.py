"""Phased n-qubit Pauli strings in the binary symplectic representation.

A Pauli is stored as two n-bit integers (X part, Z part) plus a power of i:

    P = i^phase * prod_j X_j^{x_j} Z_j^{z_j}

so the group {+1, -1, +i, -i} x {I, X, Y, Z}^n is represented exactly.  The
operator Y on qubit j corresponds to x_j = z_j = 1 with a +i phase correction
(X Z = -i Y).  Bit j of the integers refers to qubit j; qubit 0 is the most
significant factor in tensor products (matches the dense kron convention used
by the oracle module).

Text form used in logs and tests: sign prefix ("+", "-", "+i", "-i") followed
by one letter per qubit, with "_" (or "I") for identity, e.g. "+X_IZ".
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_SIGN_PREFIX = {0: "+", 1: "+i", 2: "-", 3: "-i"}
_PREFIX_SIGN = {"+": 0, "+i": 1, "-": 2, "-i": 3, "i": 1, "-1": 2, "": 0}

_LETTER_BITS = {"_": (0, 0), "I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}

_I2 = np.eye(2, dtype=complex)
_X2 = np.array([[0, 1], [1, 0]], dtype=complex)
_Y2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z2 = np.array([[1, 0], [0, -1]], dtype=complex)
# bit-pattern factors of the representation i^phase * X^x Z^z; the (1,1)
# slot is the bare product XZ = -iY, the +i correction lives in `phase`
_MATS = {(0, 0): _I2, (1, 0): _X2, (1, 1): _X2 @ _Z2, (0, 1): _Z2}


def _parity(v: int) -> int:
    return v.bit_count() & 1


@dataclass(frozen=True)
class PauliString:
    """Immutable phased Pauli; safe to share across shot workers."""

    n: int
    x: int = 0
    z: int = 0
    phase: int = 0  # exponent of i, mod 4

    def __post_init__(self):
        mask = (1 << self.n) - 1
        if self.x & ~mask or self.z & ~mask:
            raise ValueError("bit vector exceeds qubit count")
        object.__setattr__(self, "phase", self.phase & 3)

    # -- constructors ------------------------------------------------------

    @staticmethod
    def identity(n: int) -> "PauliString":
        return PauliString(n)

    @staticmethod
    def single(n: int, qubit: int, letter: str) -> "PauliString":
        """Single-qubit X/Y/Z (the actual Hermitian operator) on `qubit`."""
        xb, zb = _LETTER_BITS[letter]
        phase = 1 if (xb and zb) else 0  # Y = +i * XZ
        return PauliString(n, xb << qubit, zb << qubit, phase)

    @staticmethod
    def from_bits(n: int, x: int, z: int, phase: int = 0) -> "PauliString":
        return PauliString(n, x, z, phase)

    @staticmethod
    def from_text(text: str) -> "PauliString":
        text = text.strip()
        sign = 0
        for prefix in ("+i", "-i", "+", "-"):
            if text.startswith(prefix):
                sign = _PREFIX_SIGN[prefix]
                text = text[len(prefix):]
                break
        x = z = 0
        y_count = 0
        for j, ch in enumerate(text):
            try:
                xb, zb = _LETTER_BITS[ch]
            except KeyError:
                raise ValueError(f"bad Pauli letter {ch!r} in {text!r}") from None
            x |= xb << j
            z |= zb << j
            y_count += xb & zb
        return PauliString(len(text), x, z, (sign + y_count) & 3)

    # -- queries -----------------------------------------------------------

    def to_text(self) -> str:
        letters = []
        y_count = 0
        for j in range(self.n):
            xb = (self.x >> j) & 1
            zb = (self.z >> j) & 1
            y_count += xb & zb
            letters.append({(0, 0): "_", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}[(xb, zb)])
        sign = (self.phase - y_count) & 3
        return _SIGN_PREFIX[sign] + "".join(letters)

    def __str__(self) -> str:
        return self.to_text()

    @property
    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    @property
    def is_identity_up_to_phase(self) -> bool:
        return self.is_identity

    def support(self) -> tuple[int, ...]:
        return tuple(j for j in range(self.n) if (self.x | self.z) >> j & 1)

    def weight(self) -> int:
        return (self.x | self.z).bit_count()

    def is_hermitian(self) -> bool:
        return (self.phase & 1) == _parity(self.x & self.z)

    def restricted(self, qubits: tuple[int, ...]) -> "PauliString":
        """Same operator content on `qubits`, relabelled onto len(qubits) wires."""
        x = z = 0
        for new, old in enumerate(qubits):
            x |= ((self.x >> old) & 1) << new
            z |= ((self.z >> old) & 1) << new
        return PauliString(len(qubits), x, z, self.phase)

    def embedded(self, n: int, qubits: tuple[int, ...]) -> "PauliString":
        """Inverse of `restricted`: place this Pauli onto wires `qubits` of n."""
        x = z = 0
        for old, new in enumerate(qubits):
            x |= ((self.x >> old) & 1) << new
            z |= ((self.z >> old) & 1) << new
        return PauliString(n, x, z, self.phase)

    # -- algebra -----------------------------------------------------------

    def multiply(self, other: "PauliString") -> "PauliString":
        """Exact operator product self * other (phase tracked mod 4)."""
        if self.n != other.n:
            raise ValueError("qubit count mismatch")
        phase = self.phase + other.phase + 2 * _parity(self.z & other.x)
        return PauliString(self.n, self.x ^ other.x, self.z ^ other.z, phase)

    __mul__ = multiply

    def inverse(self) -> "PauliString":
        phase = -self.phase + 2 * _parity(self.x & self.z)
        return PauliString(self.n, self.x, self.z, phase)

    def adjoint(self) -> "PauliString":
        return self.inverse()

    def with_phase(self, phase: int) -> "PauliString":
        return PauliString(self.n, self.x, self.z, phase)

    def times_i(self, k: int = 1) -> "PauliString":
        return PauliString(self.n, self.x, self.z, self.phase + k)

    def symplectic_product(self, other: "PauliString") -> int:
        if self.n != other.n:
            raise ValueError("qubit count mismatch")
        return _parity(self.x & other.z) ^ _parity(self.z & other.x)

    def commutes(self, other: "PauliString") -> bool:
        """True iff the symplectic inner product vanishes (Appendix-B test)."""
        return self.symplectic_product(other) == 0

    def anticommutes(self, other: "PauliString") -> bool:
        return not self.commutes(other)

    def equals_up_to_phase(self, other: "PauliString") -> bool:
        return self.n == other.n and self.x == other.x and self.z == other.z

    # -- dense form (test/oracle use; small n only) -------------------------

    def to_matrix(self) -> np.ndarray:
        if self.n > 12:
            raise ValueError("dense Pauli matrix capped at 12 qubits")
        m = np.array([[1]], dtype=complex)
        for j in range(self.n):
            m = np.kron(m, _MATS[((self.x >> j) & 1, (self.z >> j) & 1)])
        return (1j ** self.phase) * m


def multiply(a: PauliString, b: PauliString) -> PauliString:
    return a.multiply(b)


def commutes(a: PauliString, b: PauliString) -> bool:
    return a.commutes(b)


class SymplecticForm:
    """The 2n x 2n block form omega; <u,v> = u^T omega v detects commutation."""

    def __init__(self, n: int):
        self.n = n

    def matrix(self) -> np.ndarray:
        n = self.n
        zero = np.zeros((n, n), dtype=np.uint8)
        eye = np.eye(n, dtype=np.uint8)
        return np.block([[zero, eye], [eye, zero]])

    def product(self, u: np.ndarray, v: np.ndarray) -> int:
        n = self.n
        u = np.asarray(u, dtype=np.uint8)
        v = np.asarray(v, dtype=np.uint8)
        return int(u[:n] @ v[n:] + u[n:] @ v[:n]) & 1


def pauli_to_vector(p: PauliString) -> np.ndarray:
    """Binary (x|z) vector of length 2n (phase dropped)."""
    v = np.zeros(2 * p.n, dtype=np.uint8)
    for j in range(p.n):
        v[j] = (p.x >> j) & 1
        v[p.n + j] = (p.z >> j) & 1
    return v


def vector_to_pauli(n: int, v: np.ndarray, phase: int = 0) -> PauliString:
    x = z = 0
    for j in range(n):
        x |= int(v[j]) << j
        z |= int(v[n + j]) << j
    return PauliString(n, x, z, phase)
