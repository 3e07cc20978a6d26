"""Gate-level IR for magic-state preparation protocols.

A ProtocolCircuit is a time-gridded list of gates (Clifford unitaries,
controlled-PSC and controlled-Pauli ladders), an enumerated table of error
locations, and a deferred measurement schedule.  Builders cover the
[[4,2,2]] toy protocol, the flag-based Steane |H> preparation (with the
42-entry location grid), the generic standard / Shor-style families, and the
Clifford-decoder distillation wrapper.

Time convention: gates occupy integer slots 1,2,...; error column c applies
after every gate with slot < c and before gates with slot >= c (column 1 is
initialization noise).  The noise of the gate in slot s sits in column s+1,
and idle windows fill the remaining columns, which reproduces the paper's
white/green box grid exactly.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field, replace

import numpy as np

from .pauli import PauliString
from .clifford import PscForm, named_psc_form, CliffordTableau, tableau_from_gates, \
    conjugate_by_named_gate
from . import gates as _g


class GateKind(enum.Enum):
    CLIFFORD = "clifford"
    CONTROLLED_PSC = "cpsc"
    CONTROLLED_PAULI = "cpauli"


@dataclass(frozen=True)
class ProtocolGate:
    kind: GateKind
    time_step: int
    qubits: tuple[int, ...] = ()            # CLIFFORD wires / CPSC targets
    name: str | None = None                 # CLIFFORD gate name
    control: int | None = None
    psc: PscForm | None = None              # CPSC payload (local, len(qubits) wires)
    payload: PauliString | None = None      # CPAULI payload, global width

    def is_clifford(self) -> bool:
        return self.kind is not GateKind.CONTROLLED_PSC

    def conjugate_pauli(self, p: PauliString) -> PauliString:
        """U p U^dagger; valid for the Clifford kinds only."""
        if self.kind is GateKind.CLIFFORD:
            return conjugate_by_named_gate(p, self.name, self.qubits)
        if self.kind is GateKind.CONTROLLED_PAULI:
            from .clifford import ErrorGate
            return ErrorGate.from_controlled_pauli(self.control, self.payload).conjugate(p)
        raise ValueError("controlled-PSC gates are not Clifford")

    def to_matrix(self, n: int) -> np.ndarray:
        if self.kind is GateKind.CLIFFORD:
            return _g.embed(_g.gate_matrix(self.name), self.qubits, n)
        if self.kind is GateKind.CONTROLLED_PAULI:
            sup = self.payload.support()
            local = self.payload.restricted(sup)
            return _g.embed(_g.controlled(local.to_matrix()), (self.control,) + sup, n)
        return _g.embed(_g.controlled(self.psc.reconstruct()), (self.control,) + self.qubits, n)

    def touched(self) -> tuple[int, ...]:
        if self.kind is GateKind.CLIFFORD:
            return self.qubits
        if self.kind is GateKind.CONTROLLED_PAULI:
            return (self.control,) + self.payload.support()
        return (self.control,) + self.qubits


class Channel(enum.Enum):
    INIT0 = "init0"
    INIT_PLUS = "init_plus"
    INIT_MAGIC_H = "init_magic_h"
    INIT_MAGIC_T = "init_magic_t"
    DEPOL1 = "depol1"
    DEPOL2 = "depol2"
    IDLE = "idle"
    MEAS_X = "meas_x"
    MEAS_Z = "meas_z"
    DATA_FRAME = "data_frame"


@dataclass(frozen=True)
class ErrorLocation:
    index: int                  # dense 0..M-1
    label: int                  # human label (Fig.-10 numbering for steane-h)
    column: int
    qubit: int
    channel: Channel
    steps: int = 1              # idle window length
    pair_partner: int | None = None   # index of the other half of a Depol2 draw
    pair_role: int = 0          # 0 = owns the pair draw


@dataclass(frozen=True)
class Measurement:
    qubit: int
    basis: str                  # "X" or "Z"
    group: int                  # accept iff product of outcomes in a group is +1


@dataclass(frozen=True)
class EncoderSpec:
    """Noiseless logical-input preparation; its noise is reduced to frames."""
    gates: tuple[tuple[str, tuple[int, ...]], ...]
    carriers: tuple[int, ...]
    carrier_tags: tuple[str, ...]       # 'magic_h' | 'magic_t'
    zero_wires: tuple[int, ...]

    def tableau(self, n: int) -> CliffordTableau:
        return tableau_from_gates(n, self.gates)


@dataclass
class CodeSpec:
    """Stabilizer code data: parity rows, logicals, transversal PSC factors."""

    name: str
    n: int
    k: int
    stabilizers: list[PauliString]
    logical_x: list[PauliString]
    logical_z: list[PauliString]
    psc_factors: list[tuple[PscForm, tuple[int, ...]]]
    w_c: int = 0
    w_q: int = 0
    encoder_gates: tuple[tuple[str, tuple[int, ...]], ...] = ()
    carriers: tuple[int, ...] = ()

    def __post_init__(self):
        wc, wq = self.recompute_sparsity()
        if self.w_c == 0:
            self.w_c = wc
        if self.w_q == 0:
            self.w_q = wq
        self.validate()

    def recompute_sparsity(self) -> tuple[int, int]:
        wc = max((g.weight() for g in self.stabilizers), default=0)
        wq = 0
        for q in range(self.n):
            wq = max(wq, sum(1 for g in self.stabilizers if ((g.x | g.z) >> q) & 1))
        return wc, wq

    def validate(self) -> None:
        for i, gi in enumerate(self.stabilizers):
            for gj in self.stabilizers[i + 1:]:
                if not gi.commutes(gj):
                    raise ValueError("stabilizer rows do not commute")
            for lp in self.logical_x + self.logical_z:
                if not gi.commutes(lp):
                    raise ValueError("logicals must commute with stabilizers")
        wc, wq = self.recompute_sparsity()
        if (wc, wq) != (self.w_c, self.w_q):
            raise ValueError("stored sparsity parameters do not match rows")
        supports = [set(sup) for _, sup in self.psc_factors]
        for i, si in enumerate(supports):
            for sj in supports[i + 1:]:
                if si & sj:
                    raise ValueError("PSC tensor factors must have disjoint supports")

    @property
    def ell(self) -> int:
        return len(self.psc_factors)

    def logical_rep(self, letters: str) -> PauliString:
        """Physical representative of a logical Pauli word, e.g. 'XZ' or 'Y_'."""
        out = PauliString.identity(self.n)
        for j, ch in enumerate(letters):
            if ch in ("_", "I"):
                continue
            if ch == "X":
                out = out * self.logical_x[j]
            elif ch == "Z":
                out = out * self.logical_z[j]
            elif ch == "Y":
                out = out * (self.logical_x[j] * self.logical_z[j]).times_i(1)
            else:
                raise ValueError(f"bad logical letter {ch!r}")
        return out

    def to_json_dict(self) -> dict:
        return {
            "stabilizers": [g.to_text() for g in self.stabilizers],
            "logical_x": [g.to_text() for g in self.logical_x],
            "logical_z": [g.to_text() for g in self.logical_z],
            "psc_factors": [
                {"qubits": list(sup), "form": f.to_json_dict()}
                for f, sup in self.psc_factors
            ],
        }

    @staticmethod
    def from_json_dict(d: dict, name: str = "custom") -> "CodeSpec":
        stab = [PauliString.from_text(t) for t in d["stabilizers"]]
        lx = [PauliString.from_text(t) for t in d["logical_x"]]
        lz = [PauliString.from_text(t) for t in d["logical_z"]]
        n = stab[0].n if stab else lx[0].n
        factors = [
            (PscForm.from_json_dict(e["form"]), tuple(e["qubits"]))
            for e in d.get("psc_factors", [])
        ]
        return CodeSpec(name, n, len(lx), stab, lx, lz, factors)

    @staticmethod
    def load(path: str) -> "CodeSpec":
        with open(path) as fh:
            return CodeSpec.from_json_dict(json.load(fh), name=path)


@dataclass
class ProtocolCircuit:
    """Immutable after build; shared read-only across shot workers."""

    name: str
    n_data: int
    n_anc: int
    init_tags: list[str]
    gates: list[ProtocolGate]
    locations: list[ErrorLocation]
    measurements: list[Measurement]
    final_checks: list[PauliString]
    code: CodeSpec | None = None
    encoder: EncoderSpec | None = None
    target_tags: tuple[str, ...] = ()        # 'H' | 'T' per logical/output qubit
    input_kind: str = "eigenstate"           # or 'product_magic'
    r_s: int = 0
    r_l: int = 0
    output_wires: tuple[int, ...] = ()       # product_magic: the kept qubits

    @property
    def n_tot(self) -> int:
        return self.n_data + self.n_anc

    @property
    def num_locations(self) -> int:
        return len(self.locations)

    @property
    def k(self) -> int:
        return len(self.target_tags)

    def max_column(self) -> int:
        last_slot = max((g.time_step for g in self.gates), default=0)
        return max([last_slot + 1] + [loc.column + loc.steps - 1 for loc in self.locations])

    def observable(self, letters: str) -> PauliString:
        """Physical representative of a logical Pauli word on the outputs."""
        if self.input_kind == "product_magic":
            out = PauliString.identity(self.n_tot)
            for j, ch in enumerate(letters):
                if ch in ("_", "I"):
                    continue
                out = out * PauliString.single(self.n_tot, self.output_wires[j], ch)
            return out
        rep = self.code.logical_rep(letters)
        return PauliString(self.n_tot, rep.x, rep.z, rep.phase)

    def validate(self) -> None:
        for i, loc in enumerate(self.locations):
            if loc.index != i:
                raise ValueError("error-location ids must be dense 0..M-1")
        measured = [m.qubit for m in self.measurements]
        if len(set(measured)) != len(measured):
            raise ValueError("each measured qubit is measured exactly once")
        last_gate = max((g.time_step for g in self.gates), default=0)
        _ = last_gate


# ---------------------------------------------------------------------------
# built-in codes
# ---------------------------------------------------------------------------

def code_422() -> CodeSpec:
    """[[4,2,2]] code; row order matches the toy protocol's measurement order."""
    stab = [PauliString.from_text("+ZZZZ"), PauliString.from_text("+XXXX")]
    lx = [PauliString.from_text("+XX__"), PauliString.from_text("+X_X_")]
    lz = [PauliString.from_text("+Z_Z_"), PauliString.from_text("+__ZZ")]
    h = named_psc_form("H")
    factors = [(h, (q,)) for q in range(4)]
    enc = (("CX", (0, 1)), ("CX", (2, 0)), ("H", (3,)),
           ("CX", (3, 0)), ("CX", (3, 1)), ("CX", (3, 2)))
    return CodeSpec("[[4,2,2]]", 4, 2, stab, lx, lz, factors,
                    encoder_gates=enc, carriers=(0, 2))


def steane_code() -> CodeSpec:
    """[[7,1,3]] Steane code with a standard stabilizer-generator encoder."""
    stab_x = [PauliString.from_text("+" + t) for t in ("___XXXX", "_XX__XX", "X_X_X_X")]
    stab_z = [PauliString.from_text("+" + t) for t in ("___ZZZZ", "_ZZ__ZZ", "Z_Z_Z_Z")]
    lx = [PauliString.from_text("+__X_XX_")]
    lz = [PauliString.from_text("+ZZZ____")]
    h = named_psc_form("H")
    factors = [(h, (q,)) for q in range(7)]
    enc = (("CX", (2, 4)), ("CX", (2, 5)),
           ("H", (0,)), ("CX", (0, 2)), ("CX", (0, 4)), ("CX", (0, 6)),
           ("H", (1,)), ("CX", (1, 2)), ("CX", (1, 5)), ("CX", (1, 6)),
           ("H", (3,)), ("CX", (3, 4)), ("CX", (3, 5)), ("CX", (3, 6)))
    return CodeSpec("Steane", 7, 1, stab_x + stab_z, lx, lz, factors,
                    encoder_gates=enc, carriers=(2,))


def code_2m22(m: int) -> CodeSpec:
    """[[2m, 2m-2, 2]] family (X^2m, Z^2m); used for sparsity sweeps."""
    n = 2 * m
    stab = [PauliString.from_text("+" + "Z" * n), PauliString.from_text("+" + "X" * n)]
    lx, lz = [], []
    for i in range(n - 2):
        x = PauliString.identity(n)
        x = x * PauliString.single(n, 0, "X") * PauliString.single(n, i + 1, "X")
        z = PauliString.single(n, i + 1, "Z") * PauliString.single(n, n - 1, "Z")
        lx.append(x)
        lz.append(z)
    h = named_psc_form("H")
    factors = [(h, (q,)) for q in range(n)]
    return CodeSpec(f"[[{n},{n - 2},2]]", n, n - 2, stab, lx, lz, factors)


# ---------------------------------------------------------------------------
# generic grid construction
# ---------------------------------------------------------------------------

class _GridBuilder:
    def __init__(self, n_tot: int):
        self.n_tot = n_tot
        self.gates: list[ProtocolGate] = []
        self.slot = 0

    def add(self, gate_kind: GateKind, **kw) -> None:
        self.slot += 1
        self.gates.append(ProtocolGate(gate_kind, self.slot, **kw))

    def add_clifford(self, name: str, qubits: tuple[int, ...]) -> None:
        self.add(GateKind.CLIFFORD, name=name, qubits=qubits)

    def add_cpauli(self, control: int, payload: PauliString) -> None:
        self.add(GateKind.CONTROLLED_PAULI, control=control, payload=payload)

    def add_cpsc(self, control: int, form: PscForm, targets: tuple[int, ...]) -> None:
        self.add(GateKind.CONTROLLED_PSC, control=control, psc=form, qubits=targets)


def _grid_locations(n_tot: int, gates: list[ProtocolGate], init_channels: dict[int, Channel],
                    measured: dict[int, str], include_meas_errors: bool) -> list[ErrorLocation]:
    """Standard Appendix-A location grid: inits, per-gate depol, merged idles."""
    last_slot = max((g.time_step for g in gates), default=0)
    occupied: dict[int, set[int]] = {q: set() for q in range(n_tot)}
    entries: list[dict] = []
    for q in range(n_tot):
        entries.append(dict(column=1, qubit=q, channel=init_channels[q], steps=1))
    for g in gates:
        touched = g.touched()
        col = g.time_step + 1
        if len(touched) == 1:
            entries.append(dict(column=col, qubit=touched[0], channel=Channel.DEPOL1, steps=1))
            occupied[touched[0]].add(col)
        else:
            a, b = touched[0], touched[1]
            entries.append(dict(column=col, qubit=a, channel=Channel.DEPOL2, steps=1,
                                pair_tag=(g.time_step, 0)))
            entries.append(dict(column=col, qubit=b, channel=Channel.DEPOL2, steps=1,
                                pair_tag=(g.time_step, 1)))
            occupied[a].add(col)
            occupied[b].add(col)
    for q in range(n_tot):
        free = [c for c in range(2, last_slot + 2) if c not in occupied[q]]
        run_start = None
        prev = None
        for c in free + [None]:
            if run_start is not None and (c is None or c != prev + 1):
                entries.append(dict(column=run_start, qubit=q, channel=Channel.IDLE,
                                    steps=prev - run_start + 1))
                run_start = None
            if c is not None and run_start is None:
                run_start = c
            prev = c
    if include_meas_errors:
        for q, basis in measured.items():
            ch = Channel.MEAS_X if basis == "X" else Channel.MEAS_Z
            entries.append(dict(column=last_slot + 2, qubit=q, channel=ch, steps=1))

    entries.sort(key=lambda e: (e["column"], e["qubit"]))
    locs: list[ErrorLocation] = []
    first_of_pair: dict[int, int] = {}
    for i, e in enumerate(entries):
        locs.append(ErrorLocation(i, i + 1, e["column"], e["qubit"], e["channel"],
                                  e["steps"], None, 0))
        tag = e.get("pair_tag")
        if tag is not None:
            key = tag[0]
            if key in first_of_pair:
                j = first_of_pair[key]
                locs[j] = replace(locs[j], pair_partner=i, pair_role=0)
                locs[i] = replace(locs[i], pair_partner=j, pair_role=1)
            else:
                first_of_pair[key] = i
    return locs


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------

def build_standard_protocol(code: CodeSpec, schedule: list, *,
                            include_meas_errors: bool = True,
                            attach_encoder: bool = False,
                            target_tags: tuple[str, ...] = (),
                            name: str | None = None) -> ProtocolCircuit:
    """Standard (single bare ancilla per measured operator) protocol family.

    Schedule entries: ("psc",) for a transversal-PSC round, or
    ("stab", [row indices]) / ("stab", None) for a stabilizer round.
    """
    n = code.n
    anc_specs: list[tuple[str, object]] = []
    for entry in schedule:
        if entry[0] == "psc":
            anc_specs.append(("psc", None))
        elif entry[0] == "stab":
            rows = entry[1] if len(entry) > 1 and entry[1] is not None else list(range(len(code.stabilizers)))
            for r in rows:
                if r >= len(code.stabilizers):
                    raise ValueError("schedule references stabilizer not in code")
                anc_specs.append(("stab", r))
        else:
            raise ValueError(f"bad schedule entry {entry!r}")

    n_anc = len(anc_specs)
    n_tot = n + n_anc
    gb = _GridBuilder(n_tot)
    measured: dict[int, str] = {}
    groups: list[Measurement] = []
    for a, (kind, arg) in enumerate(anc_specs):
        anc = n + a
        if kind == "psc":
            for form, sup in code.psc_factors:
                gb.add_cpsc(anc, form, sup)
        else:
            row = code.stabilizers[arg]
            for q in sorted(row.support()):
                leg = row.restricted((q,)).with_phase(0)
                letter = leg.to_text()[1:]
                gb.add_cpauli(anc, PauliString.single(n_tot, q, letter))
        measured[anc] = "X"
        groups.append(Measurement(anc, "X", group=a))

    init_channels = {q: Channel.DATA_FRAME for q in range(n)}
    for a in range(n, n_tot):
        init_channels[a] = Channel.INIT_PLUS
    locs = _grid_locations(n_tot, gb.gates, init_channels, measured, include_meas_errors)

    encoder = None
    if attach_encoder:
        tags = tuple("magic_h" for _ in code.carriers)
        zero = tuple(q for q in range(n) if q not in code.carriers)
        encoder = EncoderSpec(code.encoder_gates, code.carriers, tags, zero)

    r_l = sum(1 for e in schedule if e[0] == "psc")
    r_s = sum(1 for e in schedule if e[0] == "stab")
    circ = ProtocolCircuit(
        name=name or f"standard-{code.name}",
        n_data=n, n_anc=n_anc,
        init_tags=["data"] * n + ["plus"] * n_anc,
        gates=gb.gates, locations=locs, measurements=groups,
        final_checks=[], code=code, encoder=encoder,
        target_tags=target_tags, r_s=r_s, r_l=r_l,
    )
    circ.validate()
    return circ


def build_shor_style_protocol(code: CodeSpec, schedule: list, *,
                              include_meas_errors: bool = True,
                              cat_verification: bool = False,
                              name: str | None = None) -> ProtocolCircuit:
    """Shor-style family: every operator measured from a |CAT> ancilla block."""
    n = code.n
    blocks: list[tuple[str, object, int]] = []
    for entry in schedule:
        if entry[0] == "psc":
            blocks.append(("psc", None, code.ell))
        elif entry[0] == "stab":
            rows = entry[1] if len(entry) > 1 and entry[1] is not None else list(range(len(code.stabilizers)))
            for r in rows:
                if r >= len(code.stabilizers):
                    raise ValueError("schedule references stabilizer not in code")
                blocks.append(("stab", r, code.stabilizers[r].weight()))
        else:
            raise ValueError(f"bad schedule entry {entry!r}")

    n_anc = sum(w + (1 if cat_verification and w > 1 else 0) for _, _, w in blocks)
    n_tot = n + n_anc
    gb = _GridBuilder(n_tot)
    measured: dict[int, str] = {}
    meas: list[Measurement] = []
    next_anc = n
    for bi, (kind, arg, w) in enumerate(blocks):
        cat = list(range(next_anc, next_anc + w))
        next_anc += w
        for t in cat[1:]:
            gb.add_cpauli(cat[0], PauliString.single(n_tot, t, "X"))
        if cat_verification and w > 1:
            ver = next_anc
            next_anc += 1
            gb.add_cpauli(cat[0], PauliString.single(n_tot, ver, "X"))
            gb.add_cpauli(cat[-1], PauliString.single(n_tot, ver, "X"))
            measured[ver] = "Z"
            meas.append(Measurement(ver, "Z", group=len(blocks) + bi))
        if kind == "psc":
            for leg, (form, sup) in enumerate(code.psc_factors):
                gb.add_cpsc(cat[leg % w], form, sup)
        else:
            row = code.stabilizers[arg]
            for leg, q in enumerate(sorted(row.support())):
                letter = row.restricted((q,)).with_phase(0).to_text()[1:]
                gb.add_cpauli(cat[leg], PauliString.single(n_tot, q, letter))
        for c in cat:
            measured[c] = "X"
            meas.append(Measurement(c, "X", group=bi))

    init_channels = {q: Channel.DATA_FRAME for q in range(n)}
    for a in range(n, n_tot):
        init_channels[a] = Channel.INIT_PLUS
    # CAT blocks start from one |+> leg; the fanned-out legs start in |0>.
    plus_targets = set()
    for g in gb.gates:
        if g.kind is GateKind.CONTROLLED_PAULI and g.payload.support()[0] >= n:
            plus_targets.add(g.payload.support()[0])
    for a in range(n, n_tot):
        if a in plus_targets:
            init_channels[a] = Channel.INIT0
    locs = _grid_locations(n_tot, gb.gates, init_channels, measured, include_meas_errors)

    r_l = sum(1 for e in schedule if e[0] == "psc")
    r_s = sum(1 for e in schedule if e[0] == "stab")
    tags = ["data"] * n + ["plus"] * n_anc
    for a in plus_targets:
        tags[a] = "zero"
    circ = ProtocolCircuit(
        name=name or f"shor-{code.name}",
        n_data=n, n_anc=n_anc, init_tags=tags,
        gates=gb.gates, locations=locs, measurements=meas,
        final_checks=[], code=code, r_s=r_s, r_l=r_l,
    )
    circ.validate()
    return circ


def build_422_toy() -> ProtocolCircuit:
    """Two rounds of logical-H and stabilizer measurement on the [[4,2,2]] code."""
    code = code_422()
    circ = build_standard_protocol(
        code, [("psc",), ("stab", None), ("psc",), ("stab", None)],
        attach_encoder=True, target_tags=("H", "H"), name="toy-422",
    )
    return circ


_STEANE_GRID = [
    # (label, channel, paper qubit, column, steps)
    (1, Channel.INIT_PLUS, 8, 1, 1),
    (2, Channel.DATA_FRAME, 7, 1, 1),
    (3, Channel.DEPOL2, 8, 2, 1),
    (4, Channel.DEPOL2, 7, 2, 1),
    (5, Channel.IDLE, 7, 3, 8),
    (6, Channel.INIT0, 9, 1, 1),
    (7, Channel.IDLE, 9, 2, 1),
    (8, Channel.DEPOL2, 8, 3, 1),
    (9, Channel.DEPOL2, 9, 3, 1),
    (10, Channel.IDLE, 9, 4, 5),
    (11, Channel.DATA_FRAME, 6, 1, 1),
    (12, Channel.IDLE, 6, 2, 2),
    (13, Channel.DEPOL2, 8, 4, 1),
    (14, Channel.DEPOL2, 6, 4, 1),
    (15, Channel.IDLE, 6, 5, 6),
    (16, Channel.DATA_FRAME, 5, 1, 1),
    (17, Channel.IDLE, 5, 2, 3),
    (18, Channel.DEPOL2, 8, 5, 1),
    (19, Channel.DEPOL2, 5, 5, 1),
    (20, Channel.IDLE, 5, 6, 5),
    (21, Channel.DATA_FRAME, 4, 1, 1),
    (22, Channel.IDLE, 4, 2, 4),
    (23, Channel.DEPOL2, 8, 6, 1),
    (24, Channel.DEPOL2, 4, 6, 1),
    (25, Channel.IDLE, 4, 7, 4),
    (26, Channel.DATA_FRAME, 3, 1, 1),
    (27, Channel.IDLE, 3, 2, 5),
    (28, Channel.DEPOL2, 8, 7, 1),
    (29, Channel.DEPOL2, 3, 7, 1),
    (30, Channel.IDLE, 3, 8, 3),
    (31, Channel.DATA_FRAME, 2, 1, 1),
    (32, Channel.IDLE, 2, 2, 6),
    (33, Channel.DEPOL2, 8, 8, 1),
    (34, Channel.DEPOL2, 2, 8, 1),
    (35, Channel.IDLE, 2, 9, 2),
    (36, Channel.DEPOL2, 8, 9, 1),
    (37, Channel.DEPOL2, 9, 9, 1),
    (38, Channel.IDLE, 9, 10, 1),
    (39, Channel.DATA_FRAME, 1, 1, 1),
    (40, Channel.IDLE, 1, 2, 8),
    (41, Channel.DEPOL2, 8, 10, 1),
    (42, Channel.DEPOL2, 1, 10, 1),
]

# Depol2 pairs of the Steane grid, by label: control-ancilla half listed first.
_STEANE_PAIRS = [(3, 4), (8, 9), (13, 14), (18, 19), (23, 24),
                 (28, 29), (33, 34), (36, 37), (41, 42)]


def build_steane_h() -> ProtocolCircuit:
    """Flag-based |H> preparation on the Steane code (Fig.-10 error grid).

    Wires 0..6 are data qubits 1..7, wire 7 the |+> control ancilla (paper
    qubit 8), wire 8 the |0> flag (paper qubit 9).  The final fault-tolerant
    stabilizer round is realized as ideal deferred generator measurements.
    """
    code = steane_code()
    n_tot = 9
    h = named_psc_form("H")
    gb = _GridBuilder(n_tot)
    gb.add_cpsc(7, h, (6,))                                    # slot 1: CH on qubit 7
    gb.add_cpauli(7, PauliString.single(n_tot, 8, "X"))        # slot 2: flag coupling
    for data in (5, 4, 3, 2, 1):                               # slots 3-7
        gb.add_cpsc(7, h, (data,))
    gb.add_cpauli(7, PauliString.single(n_tot, 8, "X"))        # slot 8: flag coupling
    gb.add_cpsc(7, h, (0,))                                    # slot 9: CH on qubit 1

    pair_of = {}
    for a, b in _STEANE_PAIRS:
        pair_of[a] = (b, 0)
        pair_of[b] = (a, 1)
    locs = []
    for label, channel, paper_q, col, steps in _STEANE_GRID:
        partner_label, role = pair_of.get(label, (None, 0))
        locs.append(ErrorLocation(
            index=label - 1, label=label, column=col, qubit=paper_q - 1,
            channel=channel, steps=steps,
            pair_partner=None if partner_label is None else partner_label - 1,
            pair_role=role,
        ))
    locs.sort(key=lambda e: e.index)

    encoder = EncoderSpec(code.encoder_gates, code.carriers, ("magic_h",),
                          tuple(q for q in range(7) if q not in code.carriers))
    circ = ProtocolCircuit(
        name="steane-h",
        n_data=7, n_anc=2,
        init_tags=["data"] * 7 + ["plus", "zero"],
        gates=gb.gates,
        locations=locs,
        measurements=[Measurement(7, "X", 0), Measurement(8, "Z", 1)],
        final_checks=[PauliString(n_tot, g.x, g.z, g.phase) for g in code.stabilizers],
        code=code, encoder=encoder, target_tags=("H",), r_s=1, r_l=1,
    )
    circ.validate()
    return circ


def build_msd_protocol(decoder: list[tuple[str, tuple[int, ...]]], n: int, k: int,
                       input_state_tag: str = "magic_h", *,
                       include_meas_errors: bool = True,
                       name: str = "msd") -> ProtocolCircuit:
    """n-to-k distillation wrapper: twirled magic inputs, Clifford decoder,
    post-selected Z measurements on the last n-k wires."""
    gb = _GridBuilder(n)
    for gate_name, qubits in decoder:
        if gate_name not in ("H", "S", "SDG", "X", "Y", "Z", "CX", "CZ", "SWAP", "CY", "I"):
            raise ValueError(f"non-Clifford gate {gate_name!r} in decoder")
        gb.add_clifford(gate_name, tuple(qubits))
    init_ch = Channel.INIT_MAGIC_H if input_state_tag == "magic_h" else Channel.INIT_MAGIC_T
    init_channels = {q: init_ch for q in range(n)}
    measured = {q: "Z" for q in range(k, n)}
    locs = _grid_locations(n, gb.gates, init_channels, measured, include_meas_errors)
    meas = [Measurement(q, "Z", group=q - k) for q in range(k, n)]
    circ = ProtocolCircuit(
        name=name, n_data=n, n_anc=0,
        init_tags=[input_state_tag] * n,
        gates=gb.gates, locations=locs, measurements=meas,
        final_checks=[], code=None, encoder=None,
        target_tags=tuple("H" if input_state_tag == "magic_h" else "T" for _ in range(k)),
        input_kind="product_magic", output_wires=tuple(range(k)),
    )
    circ.validate()
    return circ


BUILTIN_PROTOCOLS = {
    "steane-h": build_steane_h,
    "toy-422": build_422_toy,
}


# ---------------------------------------------------------------------------
# protocol text format
# ---------------------------------------------------------------------------

_INIT_WORDS = {"zero": "zero", "plus": "plus", "magic_h": "magic_h",
               "magic_t": "magic_t", "data": "data"}


def emit_protocol_text(circ: ProtocolCircuit) -> str:
    """One gate per line; #LOC annotation lines carry the error grid."""
    lines = [f"# protocol {circ.name} n_data={circ.n_data} n_anc={circ.n_anc}"]
    for q, tag in enumerate(circ.init_tags):
        lines.append(f"INIT {q} {tag}")
    for g in circ.gates:
        if g.kind is GateKind.CLIFFORD:
            lines.append(f"{g.name} {' '.join(str(q) for q in g.qubits)}")
        elif g.kind is GateKind.CONTROLLED_PAULI:
            sup = g.payload.support()
            letter = g.payload.restricted(sup)
            if len(sup) == 1 and letter.to_text() == "+X":
                lines.append(f"CX {g.control} {sup[0]}")
            elif len(sup) == 1 and letter.to_text() == "+Z":
                lines.append(f"CZ {g.control} {sup[0]}")
            else:
                lines.append(f"CP {g.control} {g.payload.to_text()}")
        else:
            if g.psc == named_psc_form("H") and len(g.qubits) == 1:
                lines.append(f"CH {g.control} {g.qubits[0]}")
            else:
                qs = ",".join(str(q) for q in g.qubits)
                lines.append(f"CPSC {g.control} {qs} {g.psc.to_json()}")
    for m in circ.measurements:
        lines.append(f"M{m.basis} {m.qubit} group={m.group}")
    for chk in circ.final_checks:
        lines.append(f"#CHECK {chk.to_text()}")
    for loc in circ.locations:
        extra = f" steps={loc.steps}" if loc.channel is Channel.IDLE else ""
        pair = f" pair={loc.pair_partner + 1}" if loc.pair_partner is not None else ""
        lines.append(f"#LOC {loc.label} {loc.channel.value} {loc.qubit + 1}"
                     f" col={loc.column}{extra}{pair}")
    return "\n".join(lines) + "\n"


def parse_protocol_text(text: str, name: str = "parsed") -> ProtocolCircuit:
    n_data = n_anc = 0
    init_tags: dict[int, str] = {}
    gate_rows: list[ProtocolGate] = []
    meas: list[Measurement] = []
    checks: list[PauliString] = []
    loc_rows: list[ErrorLocation] = []
    slot = 0
    n_tot_hint = 0
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if line.startswith("# protocol"):
            for tok in parts:
                if tok.startswith("n_data="):
                    n_data = int(tok.split("=")[1])
                if tok.startswith("n_anc="):
                    n_anc = int(tok.split("=")[1])
            n_tot_hint = n_data + n_anc
            continue
        if parts[0] == "#CHECK":
            checks.append(PauliString.from_text(parts[1]))
            continue
        if parts[0] == "#LOC":
            label = int(parts[1])
            channel = Channel(parts[2])
            qubit = int(parts[3]) - 1
            col = steps = 1
            partner = None
            for tok in parts[4:]:
                key, val = tok.split("=")
                if key == "col":
                    col = int(val)
                elif key == "steps":
                    steps = int(val)
                elif key == "pair":
                    partner = int(val) - 1
            loc_rows.append(ErrorLocation(label - 1, label, col, qubit, channel,
                                          steps, partner, 0))
            continue
        if line.startswith("#"):
            continue
        if parts[0] == "INIT":
            init_tags[int(parts[1])] = _INIT_WORDS[parts[2]]
            continue
        if parts[0] in ("MX", "MZ"):
            group = len(meas)
            for tok in parts[2:]:
                if tok.startswith("group="):
                    group = int(tok.split("=")[1])
            meas.append(Measurement(int(parts[1]), parts[0][1], group))
            continue
        slot += 1
        if parts[0] == "CH":
            gate_rows.append(ProtocolGate(GateKind.CONTROLLED_PSC, slot,
                                          qubits=(int(parts[2]),), control=int(parts[1]),
                                          psc=named_psc_form("H")))
        elif parts[0] == "CPSC":
            qubits = tuple(int(t) for t in parts[2].split(","))
            form = PscForm.from_json(line.split(None, 3)[3])
            gate_rows.append(ProtocolGate(GateKind.CONTROLLED_PSC, slot, qubits=qubits,
                                          control=int(parts[1]), psc=form))
        elif parts[0] == "CP":
            gate_rows.append(ProtocolGate(GateKind.CONTROLLED_PAULI, slot,
                                          control=int(parts[1]),
                                          payload=PauliString.from_text(parts[2])))
        elif parts[0] in ("CX", "CZ"):
            ctrl, tgt = int(parts[1]), int(parts[2])
            letter = "X" if parts[0] == "CX" else "Z"
            n_guess = max(n_tot_hint, ctrl + 1, tgt + 1)
            gate_rows.append(ProtocolGate(GateKind.CONTROLLED_PAULI, slot, control=ctrl,
                                          payload=PauliString.single(n_guess, tgt, letter)))
        elif parts[0] in ("H", "S", "SDG", "X", "Y", "Z", "SWAP"):
            gate_rows.append(ProtocolGate(GateKind.CLIFFORD, slot, name=parts[0],
                                          qubits=tuple(int(t) for t in parts[1:])))
        else:
            raise ValueError(f"bad protocol line {line!r}")

    n_tot = n_data + n_anc
    fixed_gates = []
    for g in gate_rows:
        if g.kind is GateKind.CONTROLLED_PAULI and g.payload.n != n_tot:
            sup = g.payload.support()
            fixed_gates.append(replace(g, payload=g.payload.restricted(sup).embedded(n_tot, sup)))
        else:
            fixed_gates.append(g)
    pair_fixed = []
    for loc in loc_rows:
        role = 1 if (loc.pair_partner is not None and loc.pair_partner < loc.index) else 0
        pair_fixed.append(replace(loc, pair_role=role))
    circ = ProtocolCircuit(
        name=name, n_data=n_data, n_anc=n_anc,
        init_tags=[init_tags[q] for q in range(n_tot)],
        gates=fixed_gates, locations=sorted(pair_fixed, key=lambda e: e.index),
        measurements=meas, final_checks=checks,
    )
    circ.validate()
    return circ
