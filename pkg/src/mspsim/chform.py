"""Phase-sensitive stabilizer states in CH form.

A state is omega * U_C * U_H |s> with U_C generated by {S, CX, CZ}, U_H a
layer of Hadamards (mask v) and |s> a computational basis state.  U_C is
tracked in both conjugation directions:

    backward:  U_C^+ X_p U_C = i^gamma[p] X^F[p] Z^M[p],   U_C^+ Z_p U_C = Z^G[p]
    forward:   U_C X_p U_C^+ = i^gt[p] X^Ft[p] Z^Mt[p],    U_C Z_p U_C^+ = Z^Gt[p]

Control-type gates applied to the state are row operations on the backward
matrices and column operations on the forward ones; the Hadamard update
right-multiplies U_C by a small desuperposition circuit, which is column
operations backward and row operations forward.  Everything is exact: the
global phase omega is part of the contract and all rules are unit-tested
against dense vectors.
"""

from __future__ import annotations

import numpy as np

from .pauli import PauliString
from .clifford import ErrorGate, ErrorKind, PscForm


def _rows_product_phase(m1: np.ndarray, f2: np.ndarray) -> int:
    """Crossing sign when multiplying X^f1 Z^m1 * X^f2 Z^m2."""
    return 2 * int(np.count_nonzero(m1 & f2) & 1)


class ChState:
    """omega * U_C * U_H |s>; value type, cloned per branch."""

    __slots__ = ("n", "omega", "F", "G", "M", "g", "Ft", "Gt", "Mt", "gt", "v", "s")

    def __init__(self, n: int):
        eye = np.eye(n, dtype=bool)
        self.n = n
        self.omega = complex(1.0)
        self.F = eye.copy()
        self.G = eye.copy()
        self.M = np.zeros((n, n), dtype=bool)
        self.g = np.zeros(n, dtype=np.int8)
        self.Ft = eye.copy()
        self.Gt = eye.copy()
        self.Mt = np.zeros((n, n), dtype=bool)
        self.gt = np.zeros(n, dtype=np.int8)
        self.v = np.zeros(n, dtype=bool)
        self.s = np.zeros(n, dtype=bool)

    @staticmethod
    def basis(n: int, bits: int = 0) -> "ChState":
        st = ChState(n)
        for q in range(n):
            st.s[q] = (bits >> q) & 1
        return st

    def copy(self) -> "ChState":
        st = ChState.__new__(ChState)
        st.n = self.n
        st.omega = self.omega
        for name in ("F", "G", "M", "g", "Ft", "Gt", "Mt", "gt", "v", "s"):
            setattr(st, name, getattr(self, name).copy())
        return st

    # -- control-type gates (left multiplication) ---------------------------

    def apply_s(self, q: int) -> None:
        self.M[q] ^= self.G[q]
        self.g[q] = (self.g[q] + 3) & 3
        mask = self.Ft[:, q]
        self.gt[mask] = (self.gt[mask] + 1) & 3
        self.Mt[:, q] ^= mask

    def apply_sdg(self, q: int) -> None:
        self.M[q] ^= self.G[q]
        self.g[q] = (self.g[q] + 1) & 3
        mask = self.Ft[:, q]
        self.gt[mask] = (self.gt[mask] + 3) & 3
        self.Mt[:, q] ^= mask

    def apply_cz(self, a: int, b: int) -> None:
        self.M[a] ^= self.G[b]
        self.M[b] ^= self.G[a]
        both = self.Ft[:, a] & self.Ft[:, b]
        self.gt[both] = (self.gt[both] + 2) & 3
        self.Mt[:, b] ^= self.Ft[:, a]
        self.Mt[:, a] ^= self.Ft[:, b]

    def apply_cx(self, c: int, t: int) -> None:
        self.g[c] = (self.g[c] + self.g[t]
                     + _rows_product_phase(self.M[c], self.F[t])) & 3
        self.F[c] ^= self.F[t]
        self.M[c] ^= self.M[t]
        self.G[t] ^= self.G[c]
        self.Ft[:, t] ^= self.Ft[:, c]
        self.Mt[:, c] ^= self.Mt[:, t]
        self.Gt[:, c] ^= self.Gt[:, t]

    # -- right multiplication (U_C <- U_C * W) -------------------------------

    def _right_cx(self, a: int, b: int) -> None:
        self.F[:, b] ^= self.F[:, a]
        self.M[:, a] ^= self.M[:, b]
        self.G[:, a] ^= self.G[:, b]
        self.gt[a] = (self.gt[a] + self.gt[b]
                      + _rows_product_phase(self.Mt[a], self.Ft[b])) & 3
        self.Ft[a] ^= self.Ft[b]
        self.Mt[a] ^= self.Mt[b]
        self.Gt[b] ^= self.Gt[a]

    def _right_cz(self, a: int, b: int) -> None:
        both = self.F[:, a] & self.F[:, b]
        self.g[both] = (self.g[both] + 2) & 3
        self.M[:, b] ^= self.F[:, a]
        self.M[:, a] ^= self.F[:, b]
        self.Mt[a] ^= self.Gt[b]
        self.Mt[b] ^= self.Gt[a]

    def _right_s(self, q: int) -> None:
        mask = self.F[:, q]
        self.g[mask] = (self.g[mask] + 3) & 3
        self.M[:, q] ^= mask
        self.gt[q] = (self.gt[q] + 1) & 3
        self.Mt[q] ^= self.Gt[q]

    # -- Pauli application ---------------------------------------------------

    def _conj_backward(self, phase: int, x: int, z: int):
        """U_C^+ (i^phase X^x Z^z) U_C as (gamma, xrow, zrow)."""
        gacc = phase
        xrow = np.zeros(self.n, dtype=bool)
        zrow = np.zeros(self.n, dtype=bool)
        for p in range(self.n):
            if (x >> p) & 1:
                gacc += self.g[p] + _rows_product_phase(zrow, self.F[p])
                xrow ^= self.F[p]
                zrow ^= self.M[p]
        for p in range(self.n):
            if (z >> p) & 1:
                zrow ^= self.G[p]
        return gacc & 3, xrow, zrow

    def _through_h_layer(self, gacc: int, xrow: np.ndarray, zrow: np.ndarray):
        """Push X^x Z^z through the Hadamard layer (swap bits where v=1)."""
        cross = np.count_nonzero(xrow & zrow & self.v) & 1
        gacc = (gacc + 2 * cross) & 3
        xv = np.where(self.v, zrow, xrow)
        zv = np.where(self.v, xrow, zrow)
        return gacc, xv, zv

    def apply_pauli(self, p: PauliString) -> None:
        gacc, xrow, zrow = self._conj_backward(p.phase, p.x, p.z)
        gacc, xv, zv = self._through_h_layer(gacc, xrow, zrow)
        sign = np.count_nonzero(zv & self.s) & 1
        self.omega *= (1j ** gacc) * (-1.0 if sign else 1.0)
        self.s = self.s ^ xv

    # -- Hadamard gate --------------------------------------------------------

    def apply_h(self, q: int) -> None:
        # H_q = (X_q + Z_q)/sqrt(2): two basis terms after pushing through U_C, U_H
        g1, x1, z1 = self._conj_backward(0, 1 << q, 0)
        g1, x1, z1 = self._through_h_layer(g1, x1, z1)
        g2, x2, z2 = self._conj_backward(0, 0, 1 << q)
        g2, x2, z2 = self._through_h_layer(g2, x2, z2)
        t1 = self.s ^ x1
        t2 = self.s ^ x2
        ph1 = (1j ** g1) * (-1.0 if (np.count_nonzero(z1 & self.s) & 1) else 1.0)
        ph2 = (1j ** g2) * (-1.0 if (np.count_nonzero(z2 & self.s) & 1) else 1.0)
        if np.array_equal(t1, t2):
            val = (ph1 + ph2) / np.sqrt(2.0)
            if abs(val) < 1e-12:
                raise AssertionError("H produced a null state (broken invariants)")
            self.omega *= val
            self.s = t1
            return
        self.omega /= np.sqrt(2.0)
        self._desuperpose(ph1, t1, ph2, t2)

    def _desuperpose(self, ph1: complex, t1: np.ndarray, ph2: complex,
                     t2: np.ndarray) -> None:
        """Rewrite U_C U_H (ph1|t1> + ph2|t2>) back into CH form, t1 != t2.

        The incoming two-term superposition is unnormalized by sqrt(2); the
        caller accounts for the 1/sqrt(2) so that |omega| is preserved.
        """
        ratio = ph2 / ph1
        delta = int(np.round(np.angle(ratio) / (np.pi / 2))) % 4
        if abs(ratio - 1j ** delta) > 1e-9:
            raise AssertionError("two-term phase ratio is not a power of i")
        self.omega *= ph1
        d = t1 ^ t2
        v0 = d & ~self.v
        v1 = d & self.v
        if v0.any():
            qs = int(np.flatnonzero(v0)[0])
            # inside the computational basis: fold the difference onto qs
            for j in np.flatnonzero(d):
                j = int(j)
                if j == qs:
                    continue
                if self.v[j]:
                    self._right_cz(qs, j)
                else:
                    self._right_cx(qs, j)
            t_new = t1.copy()
            for j in np.flatnonzero(d):
                j = int(j)
                if j != qs and not self.v[j]:
                    t_new[j] = t1[j] ^ t1[qs]
                # v=1 wires keep their t1 bit: CZ is diagonal
            a = bool(t1[qs])
            if a:
                self.omega *= 1j ** delta
                delta = (-delta) % 4
            m, b = {0: (0, 0), 1: (1, 0), 2: (0, 1), 3: (1, 1)}[delta]
            if m:
                self._right_s(qs)
            self.v[qs] = True
            t_new[qs] = b
            self.s = t_new
            return
        # every differing wire is Hadamarded
        idx = np.flatnonzero(v1)
        qs = int(idx[0])
        rest = [int(j) for j in idx[1:]]
        for j in rest:
            self._right_cx(j, qs)
        t_new = t1.copy()
        for j in rest:
            t_new[j] = t1[j] ^ t1[qs]
        tq = bool(t1[qs])
        if delta % 2 == 0:
            eps = 0 if delta == 0 else 1
            if tq and eps:
                self.omega *= -1.0
            self.v[qs] = False
            t_new[qs] = eps
        else:
            self.omega *= np.exp(1j * np.pi / 4) if delta == 1 else np.exp(-1j * np.pi / 4)
            self._right_s(qs)
            b = (1 ^ tq) if delta == 1 else tq
            self.v[qs] = True
            t_new[qs] = b
        self.s = t_new

    # -- named-gate front end -------------------------------------------------

    def apply_gate(self, name: str, qubits: tuple[int, ...]) -> None:
        if name == "H":
            self.apply_h(qubits[0])
        elif name == "S":
            self.apply_s(qubits[0])
        elif name == "SDG":
            self.apply_sdg(qubits[0])
        elif name == "CX":
            self.apply_cx(qubits[0], qubits[1])
        elif name == "CZ":
            self.apply_cz(qubits[0], qubits[1])
        elif name in ("X", "Y", "Z"):
            self.apply_pauli(PauliString.single(self.n, qubits[0], name))
        else:
            raise ValueError(f"gate {name!r} outside the CH generator set")

    def scale(self, c: complex) -> None:
        self.omega *= c

    # -- measurement ------------------------------------------------------------

    def project_pauli(self, p: PauliString, outcome: int = +1):
        """(I + outcome*P)/2; returns (state, norm^2) with the state unnormalized.

        norm^2 is exactly 0, 1/2 or 1 for stabilizer states.
        """
        gacc, xrow, zrow = self._conj_backward(p.phase, p.x, p.z)
        gacc, xv, zv = self._through_h_layer(gacc, xrow, zrow)
        sign = np.count_nonzero(zv & self.s) & 1
        ph = (1j ** gacc) * (-1.0 if sign else 1.0)
        if not xv.any():
            lam = ph.real if abs(ph.imag) < 1e-9 else None
            if lam is None:
                raise AssertionError("non-Hermitian eigenvalue in projection")
            return (self, 1.0) if int(np.sign(lam)) == outcome else (self, 0.0)
        out = self.copy()
        ph2 = outcome * ph
        out.omega /= np.sqrt(2.0)
        out._desuperpose(1.0, self.s.copy(), ph2, self.s ^ xv)
        return out, 0.5

    def expectation_sign(self, p: PauliString):
        """+1/-1 if p stabilizes the state up to sign, None if outcome random."""
        gacc, xrow, zrow = self._conj_backward(p.phase, p.x, p.z)
        gacc, xv, zv = self._through_h_layer(gacc, xrow, zrow)
        if xv.any():
            return None
        sign = np.count_nonzero(zv & self.s) & 1
        ph = (1j ** gacc) * (-1.0 if sign else 1.0)
        return int(np.sign(ph.real))

    # -- amplitudes and inner products -------------------------------------------

    def amplitude(self, x: int) -> complex:
        """<x|state> including the global phase."""
        gacc = 0
        arow = np.zeros(self.n, dtype=bool)
        brow = np.zeros(self.n, dtype=bool)
        for p in range(self.n):
            if (x >> p) & 1:
                gacc += self.g[p] + _rows_product_phase(brow, self.F[p])
                arow ^= self.F[p]
                brow ^= self.M[p]
        # U_C^+|x> = i^gacc |arow>  (Z^brow acts trivially on |0...0>)
        amp = self.omega * np.conj(1j ** (gacc & 3))
        for q in range(self.n):
            if self.v[q]:
                amp /= np.sqrt(2.0)
                if arow[q] and self.s[q]:
                    amp = -amp
            else:
                if arow[q] != self.s[q]:
                    return 0.0 + 0.0j
        return complex(amp)

    def inner_product(self, other: "ChState") -> complex:
        """<other|self>, exact including phase, O(n^3)."""
        if self.n != other.n:
            raise ValueError("qubit count mismatch")
        work = self.copy()
        work.omega = self.omega * np.conj(other.omega)
        _compose_adjoint_left(work, other)
        for q in range(self.n):
            if other.v[q]:
                work.apply_h(q)
        x = 0
        for q in range(self.n):
            if other.s[q]:
                x |= 1 << q
        return work.amplitude(x)

    def norm2(self) -> float:
        return float(abs(self.omega) ** 2)

    # -- dense reconstruction (tests / debug; n <= 12) ----------------------------

    def to_vector(self) -> np.ndarray:
        if self.n > 12:
            raise ValueError("dense ChState dump capped at 12 qubits")
        dim = 1 << self.n
        out = np.zeros(dim, dtype=complex)
        for idx in range(dim):
            x = 0
            for q in range(self.n):
                if (idx >> (self.n - 1 - q)) & 1:
                    x |= 1 << q
            out[idx] = self.amplitude(x)
        return out


def _compose_adjoint_left(work: ChState, other: ChState) -> None:
    """Replace work's U_C by other.U_C^+ * work.U_C (for inner products).

    The adjoint of a control-type tableau swaps its forward and backward
    data; composition maps each row of the left factor through the right.
    """
    n = work.n
    oF, oG, oM, og = other.Ft, other.Gt, other.Mt, other.gt      # backward of other^+
    oFt, oGt, oMt, ogt = other.F, other.G, other.M, other.g      # forward of other^+

    def conj_row_backward(ph, frow, mrow, F, G, M, g):
        gacc = int(ph)
        xr = np.zeros(n, dtype=bool)
        zr = np.zeros(n, dtype=bool)
        for p in range(n):
            if frow[p]:
                gacc += g[p] + _rows_product_phase(zr, F[p])
                xr ^= F[p]
                zr ^= M[p]
        for p in range(n):
            if mrow[p]:
                zr ^= G[p]
        return gacc & 3, xr, zr

    # new backward rows: (AB)^+ X (AB) = B^+ (A^+ X A) B with A = other^+,
    # B = work: map A's backward rows through work's backward conjugation
    nF = np.zeros((n, n), dtype=bool)
    nM = np.zeros((n, n), dtype=bool)
    nG = np.zeros((n, n), dtype=bool)
    ng = np.zeros(n, dtype=np.int8)
    for p in range(n):
        gacc, xr, zr = conj_row_backward(og[p], oF[p], oM[p],
                                         work.F, work.G, work.M, work.g)
        nF[p], nM[p], ng[p] = xr, zr, gacc
        zrow = np.zeros(n, dtype=bool)
        for r in range(n):
            if oG[p][r]:
                zrow ^= work.G[r]
        nG[p] = zrow
    # new forward rows: (AB) X (AB)^+ = A (B X B^+) A^+: map work's forward
    # rows through A's forward conjugation (= other's backward data swapped)
    nFt = np.zeros((n, n), dtype=bool)
    nMt = np.zeros((n, n), dtype=bool)
    nGt = np.zeros((n, n), dtype=bool)
    ngt = np.zeros(n, dtype=np.int8)
    for p in range(n):
        gacc, xr, zr = conj_row_backward(work.gt[p], work.Ft[p], work.Mt[p],
                                         oFt, oGt, oMt, ogt)
        nFt[p], nMt[p], ngt[p] = xr, zr, gacc
        zrow = np.zeros(n, dtype=bool)
        for r in range(n):
            if work.Gt[p][r]:
                zrow ^= oGt[r]
        nGt[p] = zrow
    work.F, work.G, work.M, work.g = nF, nG, nM, ng
    work.Ft, work.Gt, work.Mt, work.gt = nFt, nGt, nMt, ngt


# ---------------------------------------------------------------------------
# operations of the spec surface
# ---------------------------------------------------------------------------

def apply_clifford(state: ChState, gate: str, qubits: tuple[int, ...]) -> ChState:
    out = state.copy()
    out.apply_gate(gate, qubits)
    return out


def project_pauli(state: ChState, p: PauliString, outcome: int = +1):
    if p.is_identity:
        raise ValueError("projecting on the identity is not a measurement")
    return state.project_pauli(p, outcome)


def inner_product(a: ChState, b: ChState) -> complex:
    """<b|a> with exact phase."""
    return a.inner_product(b)


# ---------------------------------------------------------------------------
# rank decompositions
# ---------------------------------------------------------------------------

class RankDecomposition:
    """Linear combination sum_i alpha_i |term_i> of CH states; q = len."""

    def __init__(self, terms: list[tuple[complex, ChState]]):
        self.terms = [(complex(a), st) for a, st in terms]

    @property
    def q(self) -> int:
        return len(self.terms)

    def copy(self) -> "RankDecomposition":
        return RankDecomposition([(a, st.copy()) for a, st in self.terms])

    def apply_ops(self, ops) -> None:
        for op in ops:
            kind = op[0]
            if kind == "gate":
                for _, st in self.terms:
                    st.apply_gate(op[1], op[2])
            elif kind == "pauli":
                for _, st in self.terms:
                    st.apply_pauli(op[1])
            elif kind == "scale":
                for _, st in self.terms:
                    st.scale(op[1])
            else:
                raise ValueError(f"bad ch op {op!r}")

    def project(self, p: PauliString, outcome: int) -> float:
        """Project every term; returns the branch norm^2 of the combination."""
        new_terms = []
        for alpha, st in self.terms:
            post, _ = st.project_pauli(p, outcome)
            new_terms.append((alpha, post))
        gram = 0.0 + 0.0j
        for ai, sti in new_terms:
            for aj, stj in new_terms:
                gram += np.conj(ai) * aj * np.conj(sti.inner_product(stj) / 1.0) * 1.0
        # <psi|Pi|psi> with Pi idempotent equals the norm^2 of the projection
        norm2 = 0.0
        for i, (ai, sti) in enumerate(new_terms):
            for j, (aj, stj) in enumerate(new_terms):
                norm2 += (np.conj(ai) * aj * stj.inner_product(sti)).real
        self.terms = new_terms
        return max(norm2, 0.0)

    def renormalize(self, norm2: float) -> None:
        scale = 1.0 / np.sqrt(norm2)
        self.terms = [(a * scale, st) for a, st in self.terms]

    def overlap(self, other: "RankDecomposition") -> complex:
        out = 0.0 + 0.0j
        for ai, sti in self.terms:
            for aj, stj in other.terms:
                out += np.conj(aj) * ai * sti.inner_product(stj)
        return complex(out)

    def norm2(self) -> float:
        out = 0.0
        for ai, sti in self.terms:
            for aj, stj in self.terms:
                out += (np.conj(ai) * aj * stj.inner_product(sti)).real
        return out

    def to_vector(self) -> np.ndarray:
        out = None
        for a, st in self.terms:
            vec = a * st.to_vector()
            out = vec if out is None else out + vec
        return out


# ---------------------------------------------------------------------------
# error-gate decomposition into the CH generator set
# ---------------------------------------------------------------------------

_PSC_OPS_CACHE: dict[str, tuple] = {}


def _basis_change_to_z(q: PauliString, n: int):
    """Ops turning the Hermitian Pauli q into Z on a single pivot wire."""
    ops = []
    sup = q.support()
    for w in sup:
        xb = (q.x >> w) & 1
        zb = (q.z >> w) & 1
        if xb and zb:
            ops.append(("gate", "SDG", (w,)))
            ops.append(("gate", "H", (w,)))
        elif xb:
            ops.append(("gate", "H", (w,)))
    pivot = sup[0]
    for w in sup[1:]:
        ops.append(("gate", "CX", (w, pivot)))
    return ops, pivot


def psc_to_ch_ops(form: PscForm, qubits: tuple[int, ...], n: int) -> list:
    """Exact gate-list (with scalar factors) realizing the canonical form."""
    key = form.to_json() + "|" + ",".join(map(str, qubits)) + f"|{n}"
    cached = _PSC_OPS_CACHE.get(key)
    if cached is not None:
        return cached
    ops: list = []
    for q_local in form.q_set:
        q_glob = q_local.embedded(n, qubits)
        w = (q_glob.x & q_glob.z).bit_count() & 1
        sign = (q_glob.phase - w) & 3
        if sign not in (0, 2):
            raise ValueError("q_set entries must be Hermitian")
        herm = q_glob.with_phase(w)
        basis_ops, pivot = _basis_change_to_z(herm, n)
        ops.extend(basis_ops)
        if sign == 0:
            ops.append(("gate", "SDG", (pivot,)))
            ops.append(("scale", complex(np.exp(1j * np.pi / 4))))
        else:
            ops.append(("gate", "S", (pivot,)))
            ops.append(("scale", complex(np.exp(-1j * np.pi / 4))))
        for op in reversed(basis_ops):
            name = op[1]
            inv = {"H": "H", "CX": "CX", "SDG": "S", "S": "SDG"}[name]
            ops.append(("gate", inv, op[2]))
    p_glob = form.pauli_p.embedded(n, qubits)
    if not p_glob.is_identity or p_glob.phase:
        ops.append(("pauli", p_glob))
    if form.alpha_exp8:
        ops.append(("scale", complex(np.exp(1j * np.pi * form.alpha_exp8 / 4))))
    _PSC_OPS_CACHE[key] = ops
    return ops


def error_gate_to_ch_ops(gate: ErrorGate, n: int) -> list:
    if gate.kind is ErrorKind.PAULI:
        return [("pauli", gate.pauli)]
    if gate.kind is ErrorKind.PSC:
        return psc_to_ch_ops(gate.psc, gate.qubits, n)
    c = gate.control
    payload = gate.pauli
    w = (payload.x & payload.z).bit_count() & 1
    k = (payload.phase - w) & 3
    ops: list = []
    for t in payload.support():
        xb = (payload.x >> t) & 1
        zb = (payload.z >> t) & 1
        if xb and zb:
            ops.append(("gate", "SDG", (t,)))
            ops.append(("gate", "CX", (c, t)))
            ops.append(("gate", "S", (t,)))
        elif xb:
            ops.append(("gate", "CX", (c, t)))
        else:
            ops.append(("gate", "CZ", (c, t)))
    for _ in range(k):
        ops.append(("gate", "S", (c,)))
    return ops


def error_seq_to_ch_ops(seq, n: int) -> list:
    ops: list = []
    for g in (seq.gates if hasattr(seq, "gates") else seq):
        ops.extend(error_gate_to_ch_ops(g, n))
    return ops


# ---------------------------------------------------------------------------
# syndrome sampling and overlap estimation
# ---------------------------------------------------------------------------

def sample_syndrome_and_overlap(decomp: RankDecomposition, error_seq, schedule,
                                target: RankDecomposition, rng,
                                correction_table=None):
    """Bit-by-bit syndrome sampling, then the squared target overlap.

    `schedule` is a list of (PauliString, accept_sign) measurements; returns
    (outcomes tuple, accepted bool, overlap^2 or None).  Branch norms come
    from O(q^2) inner products per bit.
    """
    n = decomp.terms[0][1].n
    work = decomp.copy()
    if error_seq is not None:
        work.apply_ops(error_seq_to_ch_ops(error_seq, n))
    outcomes = []
    accepted = True
    for pauli, accept_sign in schedule:
        probe = work.copy()
        n_plus = probe.project(pauli, +1)
        total = work.norm2()
        if total <= 1e-12:
            raise ArithmeticError("inconsistent post-selection: zero-norm branch")
        p_plus = min(max(n_plus / total, 0.0), 1.0)
        if p_plus >= 1.0 - 1e-9:
            outcome = +1
        elif p_plus <= 1e-9:
            outcome = -1
        else:
            outcome = +1 if rng.random() < p_plus else -1
        if outcome == +1:
            work = probe
            work.renormalize(max(n_plus, 1e-300))
        else:
            n_minus = work.project(pauli, -1)
            work.renormalize(max(n_minus, 1e-300))
        outcomes.append(outcome)
        if outcome != accept_sign:
            accepted = False
            break
    if not accepted:
        return tuple(outcomes), False, None
    if correction_table is not None:
        corr = correction_table(tuple(outcomes))
        if corr is not None and not corr.is_identity:
            work.apply_ops([("pauli", corr)])
    ov = work.overlap(target)
    return tuple(outcomes), True, float(abs(ov) ** 2)
