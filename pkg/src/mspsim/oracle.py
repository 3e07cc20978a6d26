"""Dense state-vector / small density-matrix simulator.

Ground truth for propagation, CH-form and estimator tests, and the
brute-force Pauli-rank counter.  Correctness infrastructure only: plain
numpy kernels, hard size caps (14 qubits pure, 4 qubits density).
"""

from __future__ import annotations

import numpy as np

from .pauli import PauliString
from .circuit import ProtocolCircuit, GateKind, Channel
from . import gates as _g

_PURE_CAP = 14
_DENSITY_CAP = 4

_INIT_VECS = {
    "zero": np.array([1.0, 0.0], dtype=complex),
    "plus": np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0),
    "magic_h": np.array([np.cos(np.pi / 8), np.sin(np.pi / 8)], dtype=complex),
    "magic_t": np.array([1.0, np.exp(1j * np.pi / 4)], dtype=complex) / np.sqrt(2.0),
}


def _apply_matrix(tensor: np.ndarray, u: np.ndarray, qubits: tuple[int, ...]) -> np.ndarray:
    """Apply u on the given tensor axes; extra trailing axes act as a batch."""
    k = len(qubits)
    u_t = np.asarray(u, dtype=complex).reshape((2,) * (2 * k))
    out = np.tensordot(u_t, tensor, axes=(list(range(k, 2 * k)), list(qubits)))
    return np.moveaxis(out, range(k), qubits)


class DenseState:
    """2^n complex amplitudes, qubit 0 as the most significant index bit."""

    def __init__(self, n: int, vec: np.ndarray | None = None):
        if n > _PURE_CAP:
            raise ValueError(f"dense state capped at {_PURE_CAP} qubits")
        self.n = n
        if vec is None:
            vec = np.zeros(1 << n, dtype=complex)
            vec[0] = 1.0
        self.tensor = np.asarray(vec, dtype=complex).reshape((2,) * n)

    @staticmethod
    def product(locals_: list[np.ndarray]) -> "DenseState":
        vec = _g.kron_all([np.asarray(v, dtype=complex).reshape(2, 1) for v in locals_])
        return DenseState(len(locals_), vec.ravel())

    def copy(self) -> "DenseState":
        s = DenseState.__new__(DenseState)
        s.n = self.n
        s.tensor = self.tensor.copy()
        return s

    @property
    def vector(self) -> np.ndarray:
        return self.tensor.reshape(-1)

    def norm2(self) -> float:
        v = self.vector
        return float(np.real(np.vdot(v, v)))

    def normalize(self) -> "DenseState":
        self.tensor = self.tensor / np.sqrt(self.norm2())
        return self

    def apply_matrix(self, u: np.ndarray, qubits: tuple[int, ...]) -> "DenseState":
        self.tensor = _apply_matrix(self.tensor, u, tuple(qubits))
        return self

    def apply_named(self, name: str, qubits: tuple[int, ...]) -> "DenseState":
        return self.apply_matrix(_g.gate_matrix(name), qubits)

    def apply_pauli(self, p: PauliString) -> "DenseState":
        for q in p.support():
            xb = (p.x >> q) & 1
            zb = (p.z >> q) & 1
            self.apply_matrix(_g.X if (xb and not zb) else _g.Z if (zb and not xb)
                              else _g.Y, (q,))
        w = (p.x & p.z).bit_count() & 1
        self.tensor = self.tensor * (1j ** ((p.phase - w) & 3))
        return self

    def apply_op(self, op) -> "DenseState":
        """Accepts ProtocolGate / ErrorGate / PauliString / (name, qubits) / (matrix, qubits)."""
        if isinstance(op, PauliString):
            return self.apply_pauli(op)
        if hasattr(op, "to_matrix") and hasattr(op, "kind"):
            sup = _op_support(op)
            local = _op_local_matrix(op)
            return self.apply_matrix(local, sup)
        name_or_mat, qubits = op
        if isinstance(name_or_mat, str):
            return self.apply_named(name_or_mat, tuple(qubits))
        return self.apply_matrix(name_or_mat, tuple(qubits))

    def expectation(self, p: PauliString) -> float:
        other = self.copy().apply_pauli(p)
        return float(np.real(np.vdot(self.vector, other.vector)))

    def overlap(self, other: "DenseState") -> complex:
        return complex(np.vdot(other.vector, self.vector))

    def project_pauli(self, p: PauliString, outcome: int = +1) -> float:
        """In-place (I + outcome*P)/2 projection; returns the new norm^2."""
        other = self.copy().apply_pauli(p)
        self.tensor = (self.tensor + outcome * other.tensor) / 2.0
        return self.norm2()

    def project_qubit(self, qubit: int, local_state: np.ndarray) -> float:
        """Project onto |phi><phi| on one wire (state kept in place); norm^2."""
        phi = np.asarray(local_state, dtype=complex)
        phi = phi / np.linalg.norm(phi)
        proj = np.outer(phi, phi.conj())
        self.apply_matrix(proj, (qubit,))
        return self.norm2()


def _op_support(op) -> tuple[int, ...]:
    from .clifford import ErrorGate, ErrorKind
    if isinstance(op, ErrorGate):
        if op.kind is ErrorKind.PAULI:
            return op.pauli.support()
        if op.kind is ErrorKind.PSC:
            return tuple(op.qubits)
        return (op.control,) + op.pauli.support()
    # ProtocolGate
    return op.touched()


def _op_local_matrix(op) -> np.ndarray:
    from .clifford import ErrorGate, ErrorKind
    if isinstance(op, ErrorGate):
        if op.kind is ErrorKind.PAULI:
            sup = op.pauli.support()
            return op.pauli.restricted(sup).to_matrix()
        if op.kind is ErrorKind.PSC:
            return op.psc.reconstruct()
        sup = op.pauli.support()
        return _g.controlled(op.pauli.restricted(sup).to_matrix())
    if op.kind is GateKind.CLIFFORD:
        return _g.gate_matrix(op.name)
    if op.kind is GateKind.CONTROLLED_PAULI:
        sup = op.payload.support()
        return _g.controlled(op.payload.restricted(sup).to_matrix())
    return _g.controlled(op.psc.reconstruct())


# ---------------------------------------------------------------------------
# circuit-level dense runs
# ---------------------------------------------------------------------------

def initial_state(circ: ProtocolCircuit) -> DenseState:
    """Ideal initial state: encoder inputs on carriers, ancillas as tagged."""
    locals_ = []
    for q in range(circ.n_tot):
        tag = circ.init_tags[q]
        if tag == "data":
            locals_.append(_INIT_VECS["zero"])
        else:
            locals_.append(_INIT_VECS[tag])
    state = DenseState.product(locals_)
    if circ.encoder is not None:
        for wire, tag in zip(circ.encoder.carriers, circ.encoder.carrier_tags):
            amp = _INIT_VECS[tag]
            state.apply_matrix(np.array([[amp[0], -np.conj(amp[1])],
                                         [amp[1], np.conj(amp[0])]]), (wire,))
        for name, qubits in circ.encoder.gates:
            state.apply_named(name, qubits)
    return state


def noisy_ops(circ: ProtocolCircuit, config) -> list:
    """Time-ordered ops for a noisy run: gates interleaved with config Paulis."""
    by_col: dict[int, list] = {}
    for loc in circ.locations:
        p = config.pauli_at(loc.index)
        if p is None or p.is_identity:
            continue
        by_col.setdefault(loc.column, []).append(p.embedded(circ.n_tot, (loc.qubit,)))
    ops: list = []
    max_col = circ.max_column() + 1
    gates_by_slot: dict[int, list] = {}
    for g in circ.gates:
        gates_by_slot.setdefault(g.time_step, []).append(g)
    for col in range(1, max_col + 1):
        ops.extend(by_col.get(col, []))
        ops.extend(gates_by_slot.get(col, []))
    return ops


def noiseless_ops(circ: ProtocolCircuit) -> list:
    return [g for g in sorted(circ.gates, key=lambda g: g.time_step)]


def accept_project(circ: ProtocolCircuit, state: DenseState) -> float:
    """Project onto the accept pattern (ancilla outcomes and final checks)."""
    groups: dict[int, list] = {}
    for m in circ.measurements:
        groups.setdefault(m.group, []).append(m)
    for group in groups.values():
        if len(group) == 1:
            m = group[0]
            basis = _INIT_VECS["plus"] if m.basis == "X" else _INIT_VECS["zero"]
            state.project_qubit(m.qubit, basis)
        else:
            prod = PauliString.identity(circ.n_tot)
            for m in group:
                prod = prod * PauliString.single(circ.n_tot, m.qubit, m.basis)
            state.project_pauli(prod, +1)
    for chk in circ.final_checks:
        state.project_pauli(chk, +1)
    return state.norm2()


def reference_state(circ: ProtocolCircuit) -> DenseState:
    """Noiseless protocol output (the target magic state with idle ancillas)."""
    state = initial_state(circ)
    for g in noiseless_ops(circ):
        state.apply_op(g)
    return state


def run_protocol_dense(circ: ProtocolCircuit, config=None) -> tuple[float, DenseState | None]:
    """Exact accept probability and normalized post-selected state."""
    if circ.n_tot > _PURE_CAP:
        raise ValueError("protocol exceeds the dense-oracle size cap")
    state = initial_state(circ)
    ops = noisy_ops(circ, config) if config is not None else noiseless_ops(circ)
    for op in ops:
        state.apply_op(op)
    p_acc = accept_project(circ, state)
    if p_acc <= 1e-15:
        return 0.0, None
    state.tensor = state.tensor / np.sqrt(p_acc)
    return p_acc, state


# ---------------------------------------------------------------------------
# unitary equivalence
# ---------------------------------------------------------------------------

def matrix_of_ops(ops: list, n: int) -> np.ndarray:
    if n > 12:
        raise ValueError("unitary comparison capped at 12 qubits")
    dim = 1 << n
    tensor = np.eye(dim, dtype=complex).reshape((2,) * n + (dim,))
    for op in ops:
        if isinstance(op, PauliString):
            sup = op.support()
            if not sup:
                tensor = tensor * (1j ** op.phase)
                continue
            local = op.restricted(sup).to_matrix()
            tensor = _apply_matrix(tensor, local, sup)
        elif hasattr(op, "kind"):
            tensor = _apply_matrix(tensor, _op_local_matrix(op), _op_support(op))
        else:
            name_or_mat, qubits = op
            mat = _g.gate_matrix(name_or_mat) if isinstance(name_or_mat, str) else name_or_mat
            tensor = _apply_matrix(tensor, mat, tuple(qubits))
    return tensor.reshape(dim, dim)


def unitary_equiv_up_to_phase(ops_a: list, ops_b: list, n: int,
                              tol: float = 1e-9) -> bool:
    a = matrix_of_ops(ops_a, n)
    b = matrix_of_ops(ops_b, n)
    idx = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    if abs(b[idx]) < tol:
        return bool(np.max(np.abs(a)) < tol)
    theta = a[idx] / b[idx]
    if abs(abs(theta) - 1.0) > 1e-6:
        return False
    return bool(np.max(np.abs(a - theta * b)) <= tol)


# ---------------------------------------------------------------------------
# density matrices (twirling and MSD checks)
# ---------------------------------------------------------------------------

class DenseChannelState:
    def __init__(self, n: int, rho: np.ndarray | None = None):
        if n > _DENSITY_CAP:
            raise ValueError(f"density matrices capped at {_DENSITY_CAP} qubits")
        self.n = n
        dim = 1 << n
        if rho is None:
            rho = np.zeros((dim, dim), dtype=complex)
            rho[0, 0] = 1.0
        self.rho = np.asarray(rho, dtype=complex)

    @staticmethod
    def from_pure(vec: np.ndarray) -> "DenseChannelState":
        v = np.asarray(vec, dtype=complex)
        n = v.size.bit_length() - 1
        return DenseChannelState(n, np.outer(v, v.conj()))

    def copy(self) -> "DenseChannelState":
        return DenseChannelState(self.n, self.rho.copy())

    def apply_unitary(self, u: np.ndarray, qubits: tuple[int, ...]) -> "DenseChannelState":
        full = _g.embed(u, tuple(qubits), self.n) if u.shape[0] != self.rho.shape[0] else u
        self.rho = full @ self.rho @ full.conj().T
        return self

    def apply_pauli_mixture(self, terms: list[tuple[float, PauliString]]) -> "DenseChannelState":
        out = np.zeros_like(self.rho)
        for prob, p in terms:
            m = p.to_matrix()
            out += prob * (m @ self.rho @ m.conj().T)
        self.rho = out
        return self

    def project_pauli(self, p: PauliString, outcome: int = +1) -> float:
        proj = (np.eye(self.rho.shape[0]) + outcome * p.to_matrix()) / 2.0
        self.rho = proj @ self.rho @ proj
        return float(np.real(np.trace(self.rho)))

    def partial_trace_keep(self, keep: tuple[int, ...]) -> "DenseChannelState":
        n = self.n
        keep = tuple(keep)
        drop = tuple(q for q in range(n) if q not in keep)
        t = self.rho.reshape((2,) * (2 * n))
        for q in sorted(drop, reverse=True):
            t = np.trace(t, axis1=q, axis2=q + (t.ndim // 2))
            # after tracing, the second-copy axes shift left by one
        out_n = len(keep)
        return DenseChannelState(out_n, t.reshape(1 << out_n, 1 << out_n))

    def expectation(self, p: PauliString) -> float:
        return float(np.real(np.trace(self.rho @ p.to_matrix())))

    def trace(self) -> float:
        return float(np.real(np.trace(self.rho)))


# ---------------------------------------------------------------------------
# Pauli rank
# ---------------------------------------------------------------------------

def pauli_rank_bruteforce(state, tol: float = 1e-10) -> int:
    """Number of non-identity Paulis with nonzero coefficient in rho.

    Accepts a DenseState, DenseChannelState, bare vector or density matrix;
    capped at 3 qubits.
    """
    if isinstance(state, DenseState):
        rho = np.outer(state.vector, state.vector.conj())
        n = state.n
    elif isinstance(state, DenseChannelState):
        rho, n = state.rho, state.n
    else:
        arr = np.asarray(state, dtype=complex)
        if arr.ndim == 1:
            rho = np.outer(arr, arr.conj())
            n = arr.size.bit_length() - 1
        else:
            rho = arr
            n = arr.shape[0].bit_length() - 1
    if n > 3:
        raise ValueError("pauli_rank_bruteforce capped at 3 qubits")
    rho = rho / np.trace(rho)
    count = 0
    for code in range(4 ** n):
        letters = []
        c = code
        for _ in range(n):
            letters.append("_XYZ"[c & 3])
            c >>= 2
        p = PauliString.from_text("+" + "".join(letters))
        if p.is_identity:
            continue
        if abs(np.trace(rho @ p.to_matrix())) > tol:
            count += 1
    return count
