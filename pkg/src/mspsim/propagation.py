"""Error propagation: sampled circuit-level Paulis to end-of-circuit Cliffords.

The engine sweeps the protocol left to right, alternating between appending
sampled errors and pushing the accumulated error list through the next
noiseless gate with a closed rule table.  Rules are derived exactly from the
PSC canonical form (conjugation is integer Pauli algebra) and each distinct
(error, gate) shape is verified once against a dense computation on the
joint support before being memoized.

The emitted gate set is closed: {Pauli, PSC, controlled-Pauli}; phases of
controlled payloads are normalized out into explicit S/S~dagger and Z gates
on the control, matching the identities of the toy-example walkthrough.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .pauli import PauliString
from .clifford import (
    CliffordTableau, ErrorGate, ErrorKind, PscForm, canonicalize_psc,
    flatten_to_tableau, named_psc_form,
)
from .circuit import ProtocolCircuit, ProtocolGate, GateKind
from . import gates as _g


class UnhandledPairError(Exception):
    """A (error, gate) pair outside the canonical protocol families."""


@dataclass
class CliffordErrorSeq:
    """Ordered Clifford error gates, applied after the noiseless protocol."""

    n: int
    gates: list[ErrorGate] = field(default_factory=list)

    def append(self, gate: ErrorGate) -> None:
        if gate.kind is ErrorKind.PAULI:
            if self.gates and self.gates[-1].kind is ErrorKind.PAULI:
                merged = gate.pauli * self.gates[-1].pauli
                if merged.is_identity:
                    self.gates.pop()
                else:
                    self.gates[-1] = ErrorGate.from_pauli(merged)
                return
            if gate.pauli.is_identity:
                return
        self.gates.append(gate)

    def extend(self, gates) -> None:
        for g in gates:
            self.append(g)

    def __len__(self) -> int:
        return len(self.gates)

    def counts_by_kind(self) -> dict[str, int]:
        out = {"pauli": 0, "psc": 0, "controlled_pauli": 0}
        for g in self.gates:
            if g.kind is ErrorKind.PAULI:
                out["pauli"] += 1
            elif g.kind is ErrorKind.PSC:
                out["psc"] += 1
            else:
                out["controlled_pauli"] += 1
        return out

    def to_tableau(self) -> CliffordTableau:
        return flatten_to_tableau(self.gates, self.n)

    def serialize(self) -> str:
        return "\n".join(g.serialize() for g in self.gates) + ("\n" if self.gates else "")

    @staticmethod
    def deserialize(text: str, n: int) -> "CliffordErrorSeq":
        seq = CliffordErrorSeq(n)
        for line in text.splitlines():
            if line.strip():
                seq.gates.append(ErrorGate.deserialize(line, n))
        return seq


@dataclass(frozen=True)
class PropagationStats:
    r: int
    r_s: int
    r_l: int
    w_c: int
    w_q: int
    ell: int
    m: int
    gate_count: int
    counts: dict


def collect_stats(seq: CliffordErrorSeq, circuit: ProtocolCircuit) -> PropagationStats:
    code = circuit.code
    return PropagationStats(
        r=circuit.r_s + circuit.r_l, r_s=circuit.r_s, r_l=circuit.r_l,
        w_c=code.w_c if code else 0, w_q=code.w_q if code else 0,
        ell=code.ell if code else 0, m=circuit.num_locations,
        gate_count=len(seq), counts=seq.counts_by_kind(),
    )


# ---------------------------------------------------------------------------
# payload normalization
# ---------------------------------------------------------------------------

def _phase_gates(n: int, control: int, k: int) -> list[ErrorGate]:
    """S_c^k as error gates: k=1 -> S, k=2 -> Z, k=3 -> S-dagger."""
    k &= 3
    if k == 0:
        return []
    if k == 2:
        return [ErrorGate.from_pauli(PauliString.single(n, control, "Z"))]
    return [ErrorGate.from_psc(named_psc_form("S" if k == 1 else "SDG"), (control,))]


def emit_controlled(n: int, control: int, payload: PauliString) -> list[ErrorGate]:
    """Normalize C(i^k Q0) into S_c^k gates plus a Hermitian-payload C(Q0)."""
    w = (payload.x & payload.z).bit_count() & 1
    k = (payload.phase - w) & 3
    out: list[ErrorGate] = []
    if payload.x or payload.z:
        out.append(ErrorGate.from_controlled_pauli(control, payload.with_phase(w)))
    out.extend(_phase_gates(n, control, k))
    return out


# ---------------------------------------------------------------------------
# rule table
# ---------------------------------------------------------------------------

def _wire_mask(qubits) -> int:
    m = 0
    for q in qubits:
        m |= 1 << q
    return m


def _disjoint(err: ErrorGate, gate: ProtocolGate) -> bool:
    if err.kind is ErrorKind.PAULI:
        err_mask = err.pauli.x | err.pauli.z
    elif err.kind is ErrorKind.PSC:
        err_mask = _wire_mask(err.qubits)
    else:
        err_mask = (err.pauli.x | err.pauli.z) | (1 << err.control)
    return (err_mask & _wire_mask(gate.touched())) == 0


def _pauli_through_cpsc(n: int, p: PauliString, gate: ProtocolGate) -> list[ErrorGate]:
    c = gate.control
    targets = gate.qubits
    v = gate.psc
    xc = (p.x >> c) & 1
    t_loc = p.restricted(targets).with_phase(0)
    if xc == 0:
        q_loc = v.conjugate_pauli(t_loc) * t_loc.inverse()
        out = [ErrorGate.from_pauli(p)]
        out.extend(emit_controlled(n, c, q_loc.embedded(n, targets)))
        return out
    qprime = v.conjugate_pauli(t_loc) * t_loc.inverse()
    w = v.square_pauli()
    q_loc = qprime.inverse() * w
    q_emb = q_loc.embedded(n, targets)
    out = [ErrorGate.from_pauli(p * q_emb)]
    out.extend(emit_controlled(n, c, q_emb))
    out.append(ErrorGate.from_psc(v, targets))
    return out


def _psc_through_cpauli(n: int, err: ErrorGate, gate: ProtocolGate) -> list[ErrorGate]:
    v = err.psc
    m_loc = gate.payload.restricted(err.qubits).with_phase(0)
    core = PauliString.identity(v.n)
    for q in v.q_set:
        if m_loc.anticommutes(q):
            core = core * q.times_i(-1)
    r = v.pauli_p * core * v.pauli_p.inverse()
    r = r.times_i(2 * m_loc.symplectic_product(v.pauli_p))
    out = [err]
    out.extend(emit_controlled(n, gate.control, r.embedded(n, err.qubits)))
    return out


def _psc_dense_images(err: ErrorGate, gate: ProtocolGate, n: int):
    """Joint-support dense matrices of an overlapping (PSC, gate) pair."""
    joint = tuple(sorted(set(err.qubits) | set(gate.touched())))
    if len(joint) > 8:
        raise UnhandledPairError("joint support too large for dense handling")
    remap = {q: i for i, q in enumerate(joint)}
    v_mat = _g.embed(err.psc.reconstruct(), tuple(remap[q] for q in err.qubits), len(joint))
    g_mat = _local_gate_matrix(gate, remap, len(joint))
    return joint, remap, v_mat, g_mat


def _local_gate_matrix(gate: ProtocolGate, remap: dict[int, int], k: int) -> np.ndarray:
    if gate.kind is GateKind.CLIFFORD:
        return _g.embed(_g.gate_matrix(gate.name), tuple(remap[q] for q in gate.qubits), k)
    if gate.kind is GateKind.CONTROLLED_PAULI:
        sup = gate.payload.support()
        local = gate.payload.restricted(sup)
        return _g.embed(_g.controlled(local.to_matrix()),
                        tuple(remap[q] for q in (gate.control,) + sup), k)
    return _g.embed(_g.controlled(gate.psc.reconstruct()),
                    tuple(remap[q] for q in (gate.control,) + gate.qubits), k)


def rule_lookup(err: ErrorGate, gate: ProtocolGate, n: int) -> list[ErrorGate]:
    """Emitted gate list G with gate*err == G*gate; [err] on disjoint support."""
    if _disjoint(err, gate):
        return [err]

    if err.kind is ErrorKind.PAULI:
        if gate.kind is GateKind.CONTROLLED_PSC:
            return _pauli_through_cpsc(n, err.pauli, gate)
        return [ErrorGate.from_pauli(gate.conjugate_pauli(err.pauli))]

    if err.kind is ErrorKind.PSC:
        if gate.kind in (GateKind.CONTROLLED_PAULI, GateKind.CONTROLLED_PSC) \
                and gate.control in err.qubits:
            # diagonal PSCs (S^a and kin) commute past any controlled gate
            targets = (gate.payload.support() if gate.kind is GateKind.CONTROLLED_PAULI
                       else gate.qubits)
            if err.psc.is_diagonal() and not (_wire_mask(targets) & _wire_mask(err.qubits)):
                return [err]
            raise UnhandledPairError(_pair_context(err, gate))
        if gate.kind is GateKind.CONTROLLED_PAULI:
            if not (_wire_mask(gate.payload.support()) & _wire_mask(err.qubits)):
                return [err]
            return _psc_through_cpauli(n, err, gate)
        if gate.kind is GateKind.CONTROLLED_PSC:
            joint, remap, v_mat, _ = _psc_dense_images(err, gate, n)
            payload = _g.embed(gate.psc.reconstruct(),
                               tuple(remap[q] for q in gate.qubits), len(joint))
            conj = payload @ v_mat @ payload.conj().T
            if np.allclose(conj, v_mat, atol=1e-9):
                return [err]
            if np.allclose(conj, -v_mat, atol=1e-9):
                return [err, ErrorGate.from_pauli(PauliString.single(n, gate.control, "Z"))]
            raise UnhandledPairError(_pair_context(err, gate))
        # plain Clifford: conjugate densely on the joint support, re-canonicalize
        joint, remap, v_mat, g_mat = _psc_dense_images(err, gate, n)
        form = canonicalize_psc(g_mat @ v_mat @ g_mat.conj().T)
        return [ErrorGate.from_psc(form, joint)]

    # controlled-Pauli error
    a, q = err.control, err.pauli
    if gate.kind is GateKind.CLIFFORD:
        if a in gate.qubits:
            raise UnhandledPairError(_pair_context(err, gate))
        return emit_controlled(n, a, gate.conjugate_pauli(q))
    if gate.kind is GateKind.CONTROLLED_PAULI:
        b, m = gate.control, gate.payload
        if a == b:
            sign = 2 * m.symplectic_product(q)
            return emit_controlled(n, a, q.times_i(sign))
        if ((m.x | m.z) >> a) & 1:
            raise UnhandledPairError(_pair_context(err, gate))
        if ((q.x | q.z) >> b) & 1:
            # a pure-Z payload component on the gate's control commutes past it
            if (q.x >> b) & 1 or ((q.x | q.z) & ~(1 << b)) & _wire_mask(m.support()):
                raise UnhandledPairError(_pair_context(err, gate))
            return [err]
        if q.commutes(m):
            return [err]
        return [err, ErrorGate.from_controlled_pauli(a, PauliString.single(n, b, "Z"))]
    # gate is controlled-PSC
    b, v, targets = gate.control, gate.psc, gate.qubits
    if a == b:
        tmask = _wire_mask(targets)
        q_loc = q.restricted(targets).with_phase(q.phase)
        rest = PauliString(n, q.x & ~tmask, q.z & ~tmask, 0)
        img = v.conjugate_pauli(q_loc)
        return emit_controlled(n, a, img.embedded(n, targets) * rest)
    if a in targets:
        raise UnhandledPairError(_pair_context(err, gate))
    if ((q.x | q.z) >> b) & 1:
        if (q.x >> b) & 1 or ((q.x | q.z) & ~(1 << b)) & _wire_mask(targets):
            raise UnhandledPairError(_pair_context(err, gate))
        return [err]
    q_loc = q.restricted(targets).with_phase(0)
    img = v.conjugate_pauli(q_loc)
    if img == q_loc:
        return [err]
    if img == q_loc.times_i(2):
        return [err, ErrorGate.from_controlled_pauli(a, PauliString.single(n, b, "Z"))]
    raise UnhandledPairError(_pair_context(err, gate))


def _pair_context(err: ErrorGate, gate: ProtocolGate) -> str:
    return f"error {err.serialize()!r} meeting gate kind={gate.kind.value} " \
           f"at slot {gate.time_step} qubits {gate.touched()}"


# ---------------------------------------------------------------------------
# rule verification (dense, once per distinct shape)
# ---------------------------------------------------------------------------

_VERIFIED: set = set()
VERIFY_RULES = True


def _shape_key(err: ErrorGate, gate: ProtocolGate, joint: tuple[int, ...]) -> tuple:
    remap = {q: i for i, q in enumerate(joint)}

    def pauli_sig(p: PauliString):
        return p.restricted(joint).to_text()

    if err.kind is ErrorKind.PAULI:
        esig = ("P", pauli_sig(err.pauli))
    elif err.kind is ErrorKind.PSC:
        esig = ("V", err.psc.to_json(), tuple(remap[q] for q in err.qubits))
    else:
        esig = ("CP", remap[err.control], pauli_sig(err.pauli))
    if gate.kind is GateKind.CLIFFORD:
        gsig = ("U", gate.name, tuple(remap[q] for q in gate.qubits))
    elif gate.kind is GateKind.CONTROLLED_PAULI:
        gsig = ("CM", remap[gate.control], pauli_sig(gate.payload))
    else:
        gsig = ("CV", remap[gate.control], gate.psc.to_json(),
                tuple(remap[q] for q in gate.qubits))
    return esig, gsig


def _error_support(err: ErrorGate) -> set[int]:
    if err.kind is ErrorKind.PAULI:
        return set(err.pauli.support())
    if err.kind is ErrorKind.PSC:
        return set(err.qubits)
    return set(err.pauli.support()) | {err.control}


def _verify_rule(err: ErrorGate, gate: ProtocolGate, emitted: list[ErrorGate], n: int) -> None:
    joint = sorted(_error_support(err) | set(gate.touched()))
    for g in emitted:
        joint = sorted(set(joint) | _error_support(g))
    joint = tuple(joint)
    if len(joint) > 8:
        return
    key = _shape_key(err, gate, joint)
    if key in _VERIFIED:
        return
    from .oracle import matrix_of_ops, unitary_equiv_up_to_phase

    remap = {q: i for i, q in enumerate(joint)}
    k = len(joint)

    def relocate(e: ErrorGate) -> ErrorGate:
        if e.kind is ErrorKind.PAULI:
            return ErrorGate.from_pauli(e.pauli.restricted(joint))
        if e.kind is ErrorKind.PSC:
            return ErrorGate.from_psc(e.psc, tuple(remap[q] for q in e.qubits))
        sup = e.pauli.support()
        payload = e.pauli.restricted(sup).embedded(k, tuple(remap[q] for q in sup))
        return ErrorGate.from_controlled_pauli(remap[e.control], payload)

    g_mat = _local_gate_matrix(gate, remap, k)
    lhs = [relocate(err), (g_mat, tuple(range(k)))]
    rhs = [(g_mat, tuple(range(k)))] + [relocate(e) for e in emitted]
    if not unitary_equiv_up_to_phase(lhs, rhs, k):
        raise AssertionError(f"rule verification failed for {key}")
    _ = matrix_of_ops
    _VERIFIED.add(key)


# ---------------------------------------------------------------------------
# the propagation sweep (Algorithm 1)
# ---------------------------------------------------------------------------

def propagate(circuit: ProtocolCircuit, config) -> CliffordErrorSeq:
    """Push a sampled error configuration to an end-of-circuit Clifford error."""
    if config.m != circuit.num_locations:
        raise ValueError("config length must match the circuit's location count")
    n = circuit.n_tot
    seq = CliffordErrorSeq(n)
    if config.trivial:
        return seq

    by_col: dict[int, list[PauliString]] = {}
    for loc in circuit.locations:
        p = config.pauli_at(loc.index)
        if p.is_identity:
            continue
        by_col.setdefault(loc.column, []).append(p.embedded(n, (loc.qubit,)))
    gates_by_slot: dict[int, list[ProtocolGate]] = {}
    for g in circuit.gates:
        gates_by_slot.setdefault(g.time_step, []).append(g)

    max_col = circuit.max_column() + 1
    for col in range(1, max_col + 1):
        for p in by_col.get(col, ()):
            seq.append(ErrorGate.from_pauli(p))
        for gate in gates_by_slot.get(col, ()):
            if not seq.gates:
                continue
            new_seq = CliffordErrorSeq(n)
            for err in seq.gates:
                try:
                    emitted = rule_lookup(err, gate, n)
                except UnhandledPairError as exc:
                    raise UnhandledPairError(f"{exc} (column {col})") from None
                if VERIFY_RULES:
                    _verify_rule(err, gate, emitted, n)
                new_seq.extend(emitted)
            seq = new_seq
    return seq


def propagate_per_location(circuit: ProtocolCircuit, config) -> CliffordErrorSeq:
    """Propagate each location's error separately, then combine (later errors
    compose to the left of earlier ones); must agree unitarily with the sweep."""
    n = circuit.n_tot
    combined = CliffordErrorSeq(n)
    order = sorted(circuit.locations, key=lambda loc: loc.column)
    for loc in order:
        p = config.pauli_at(loc.index)
        if p.is_identity:
            continue
        single = CliffordErrorSeq(n)
        single.append(ErrorGate.from_pauli(p.embedded(n, (loc.qubit,))))
        for gate in sorted(circuit.gates, key=lambda g: g.time_step):
            if gate.time_step < loc.column:
                continue
            new_seq = CliffordErrorSeq(n)
            for err in single.gates:
                new_seq.extend(rule_lookup(err, gate, n))
            single = new_seq
        combined.extend(single.gates)
    return combined


# ---------------------------------------------------------------------------
# transversal non-Clifford fast path
# ---------------------------------------------------------------------------

def propagate_transversal_nonclifford(frame: PauliString,
                                      partition: tuple[tuple[int, ...], tuple[int, ...]]
                                      ) -> CliffordErrorSeq:
    """Propagated error of a Pauli frame through T on A and T-dagger on A^c."""
    n = frame.n
    a_set, ac_set = partition
    seq = CliffordErrorSeq(n)
    seq.append(ErrorGate.from_pauli(frame))
    s_form = named_psc_form("S")
    sdg_form = named_psc_form("SDG")
    for i in a_set:
        if (frame.x >> i) & 1:
            seq.append(ErrorGate.from_psc(s_form, (i,)))
    for i in ac_set:
        if (frame.x >> i) & 1:
            seq.append(ErrorGate.from_psc(sdg_form, (i,)))
    return seq


# ---------------------------------------------------------------------------
# Appendix-D analytic Steane error
# ---------------------------------------------------------------------------

def steane_analytic_error(config, n: int = 9) -> CliffordErrorSeq:
    """Transcribed closed form C_prop = E9 E8 ... E1 for the Steane protocol.

    Indices follow the 42-label grid; a(i), b(i) are the X and Z bits of
    label i.  The printed sums systematically omit a33 (see the project
    notes); it is included here, which the dense equality test demands.
    """
    a = lambda i: config.bits(i)[0]
    b = lambda i: config.bits(i)[1]

    def par(*vals):
        return sum(vals) & 1

    # per data qubit (paper numbering): pre/post noise labels and the
    # control-ancilla X bits accumulated before that qubit's CH gate
    anc_x_before = {
        7: [1],
        6: [1, 3, 8],
        5: [1, 3, 8, 13],
        4: [1, 3, 8, 13, 18],
        3: [1, 3, 8, 13, 18, 23],
        2: [1, 3, 8, 13, 18, 23, 28],
        1: [1, 3, 8, 13, 18, 23, 28, 33, 36],
    }
    pre_labels = {7: [2], 6: [11, 12], 5: [16, 17], 4: [21, 22],
                  3: [26, 27], 2: [31, 32], 1: [39, 40]}
    post_labels = {7: [4, 5], 6: [14, 15], 5: [19, 20], 4: [24, 25],
                   3: [29, 30], 2: [34, 35], 1: [42]}

    h_form = named_psc_form("H")
    seq_parts: list[list[ErrorGate]] = []

    def e_data(qubit: int) -> list[ErrorGate]:
        wire = qubit - 1
        pre_x = par(*[a(l) for l in pre_labels[qubit]])
        pre_z = par(*[b(l) for l in pre_labels[qubit]])
        post_x = par(*[a(l) for l in post_labels[qubit]])
        post_z = par(*[b(l) for l in post_labels[qubit]])
        h_exp = par(*[a(l) for l in anc_x_before[qubit]])
        cy_exp = (pre_x + pre_z) & 1
        out: list[ErrorGate] = []
        if cy_exp:
            out.append(ErrorGate.from_controlled_pauli(7, PauliString.single(n, wire, "Y")))
        if pre_z:
            out.append(ErrorGate.from_pauli(PauliString.single(n, wire, "Z")))
        if pre_x:
            out.append(ErrorGate.from_pauli(PauliString.single(n, wire, "X")))
        if h_exp:
            out.append(ErrorGate.from_psc(h_form, (wire,)))
        if post_z:
            out.append(ErrorGate.from_pauli(PauliString.single(n, wire, "Z")))
        if post_x:
            out.append(ErrorGate.from_pauli(PauliString.single(n, wire, "X")))
        return out

    def e_flag() -> list[ErrorGate]:
        x_exp = par(a(6), a(7), a(9), a(10), a(8), a(13), a(18), a(23), a(28), a(33),
                    a(37), a(38))
        z_exp = par(b(6), b(7), b(9), b(10), b(37), b(38))
        out = []
        if z_exp:
            out.append(ErrorGate.from_pauli(PauliString.single(n, 8, "Z")))
        if x_exp:
            out.append(ErrorGate.from_pauli(PauliString.single(n, 8, "X")))
        return out

    def e_control() -> list[ErrorGate]:
        x_exp = par(a(1), a(3), a(8), a(13), a(18), a(23), a(28), a(33), a(36), a(41))
        z_exp = par(b(1), b(3), b(8), b(9), b(10), b(13), b(18), b(23), b(28),
                    b(33), b(36), b(41))
        # The S exponent counts mod 4 (S has order 4): each data qubit's
        # combined pre-CH frame contributes 3 per X part, 1 per Z part, and a
        # cross term 2 when both are present (a Y-type frame).  The printed
        # mod-2 split is recovered for single-bit configurations.
        s_exp = 0
        for qb in range(1, 8):
            px = par(*[a(l) for l in pre_labels[qb]])
            pz = par(*[b(l) for l in pre_labels[qb]])
            s_exp += 3 * px + pz + 2 * px * pz
        s_exp &= 3
        out: list[ErrorGate] = []
        out.extend(_phase_gates(n, 7, s_exp))
        if z_exp:
            out.append(ErrorGate.from_pauli(PauliString.single(n, 7, "Z")))
        if x_exp:
            out.append(ErrorGate.from_pauli(PauliString.single(n, 7, "X")))
        return out

    # C_prop = E9 E8 E7 ... E1 as a matrix product: E1 acts first.
    for qubit in (1, 2, 3, 4, 5, 6, 7):
        seq_parts.append(e_data(qubit))
    seq_parts.append(e_control())
    seq_parts.append(e_flag())

    seq = CliffordErrorSeq(n)
    for part in seq_parts:
        seq.extend(part)
    return seq
