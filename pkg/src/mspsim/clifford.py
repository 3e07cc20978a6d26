"""Clifford tableaux and the theory of Pauli-square-root Cliffords (PSC).

A PSC is a Clifford unitary whose square is a Pauli (H, S, CZ, ...).  Every
PSC admits the canonical form

    U = alpha * P * exp(i pi/4 * sum_j Q_j)

with alpha an eighth root of unity, P a Pauli and {Q_j} a commuting set of
Paulis.  The canonicalizer recovers this form from a dense matrix via the
binary-symplectic decomposition (rank-one splitting of the symmetric form
N*omega over GF(2)) and fits P and alpha on basis states.  Conjugation of
Paulis through the canonical form is exact integer arithmetic, which is what
the propagation rule table is built from.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

import numpy as np

from .pauli import PauliString, pauli_to_vector, vector_to_pauli
from . import gates


class NotUnitaryError(ValueError):
    pass


class NotPscError(ValueError):
    pass


# ---------------------------------------------------------------------------
# dense identification helpers
# ---------------------------------------------------------------------------

def _num_qubits(mat: np.ndarray) -> int:
    dim = mat.shape[0]
    n = dim.bit_length() - 1
    if mat.shape != (dim, dim) or (1 << n) != dim:
        raise ValueError("matrix is not square with power-of-two dimension")
    return n


def check_unitary(mat: np.ndarray, tol: float = 1e-9) -> None:
    dim = mat.shape[0]
    if not np.allclose(mat @ mat.conj().T, np.eye(dim), atol=tol):
        raise NotUnitaryError("input is not unitary")


def identify_phased_pauli(mat: np.ndarray, tol: float = 1e-9):
    """Return (PauliString, scalar) with mat = scalar * i^phase ... or None.

    The returned PauliString carries the full phase snapped to a power of i;
    `scalar` is the residual unit scalar before snapping (callers that allow
    eighth roots inspect it).  None if mat is not proportional to a Pauli.
    """
    n = _num_qubits(mat)
    col0 = mat[:, 0]
    nz = np.flatnonzero(np.abs(col0) > tol)
    if len(nz) != 1:
        return None
    row = int(nz[0])
    c = col0[row]
    # bit j of the x-part, with qubit 0 the most significant index bit
    x = 0
    for j in range(n):
        x |= ((row >> (n - 1 - j)) & 1) << j
    z = 0
    for j in range(n):
        col = 1 << (n - 1 - j)
        val = mat[row ^ col, col]
        if abs(val - c) < tol:
            pass
        elif abs(val + c) < tol:
            z |= 1 << j
        else:
            return None
    cand = PauliString(n, x, z, 0)
    if not np.allclose(mat, c * cand.to_matrix(), atol=tol):
        return None
    return cand, c


def _snap_phase_i(c: complex, tol: float = 1e-8) -> int:
    k = int(np.round(np.angle(c) / (np.pi / 2))) % 4
    if abs(c - 1j ** k) > tol:
        raise ValueError(f"scalar {c} is not a power of i")
    return k


def as_phased_pauli(mat: np.ndarray, tol: float = 1e-9) -> PauliString | None:
    """mat as an exact i^k-phased Pauli, or None."""
    out = identify_phased_pauli(mat, tol)
    if out is None:
        return None
    cand, c = out
    try:
        k = _snap_phase_i(c)
    except ValueError:
        return None
    return cand.with_phase(k)


def is_clifford_dense(mat: np.ndarray, tol: float = 1e-9) -> bool:
    n = _num_qubits(mat)
    for j in range(n):
        for letter in ("X", "Z"):
            p = PauliString.single(n, j, letter)
            img = mat @ p.to_matrix() @ mat.conj().T
            if as_phased_pauli(img, tol) is None:
                return False
    return True


# ---------------------------------------------------------------------------
# CliffordTableau
# ---------------------------------------------------------------------------

class CliffordTableau:
    """Images of X_i and Z_i under conjugation, each a signed PauliString."""

    __slots__ = ("n", "x_images", "z_images")

    def __init__(self, n: int, x_images: list[PauliString], z_images: list[PauliString]):
        self.n = n
        self.x_images = list(x_images)
        self.z_images = list(z_images)

    @staticmethod
    def identity(n: int) -> "CliffordTableau":
        xs = [PauliString.single(n, j, "X") for j in range(n)]
        zs = [PauliString.single(n, j, "Z") for j in range(n)]
        return CliffordTableau(n, xs, zs)

    def conjugate(self, p: PauliString) -> PauliString:
        """Exact U p U^dagger from the stored generator images."""
        if p.n != self.n:
            raise ValueError("qubit count mismatch")
        out = PauliString(self.n, 0, 0, p.phase)
        for j in range(self.n):
            if (p.x >> j) & 1:
                out = out * self.x_images[j]
        for j in range(self.n):
            if (p.z >> j) & 1:
                out = out * self.z_images[j]
        return out

    def then(self, later: "CliffordTableau") -> "CliffordTableau":
        """Tableau of (later . self): self applied first."""
        xs = [later.conjugate(p) for p in self.x_images]
        zs = [later.conjugate(p) for p in self.z_images]
        return CliffordTableau(self.n, xs, zs)

    def symplectic_matrix(self) -> np.ndarray:
        m = np.zeros((2 * self.n, 2 * self.n), dtype=np.uint8)
        for j in range(self.n):
            m[:, j] = pauli_to_vector(self.x_images[j])
            m[:, self.n + j] = pauli_to_vector(self.z_images[j])
        return m

    def preserves_symplectic_form(self) -> bool:
        n = self.n
        m = self.symplectic_matrix()
        omega = np.block([
            [np.zeros((n, n), dtype=np.uint8), np.eye(n, dtype=np.uint8)],
            [np.eye(n, dtype=np.uint8), np.zeros((n, n), dtype=np.uint8)],
        ])
        return bool(np.array_equal((m.T @ omega @ m) % 2, omega))

    def inverse(self) -> "CliffordTableau":
        n = self.n
        m = self.symplectic_matrix()
        minv = _gf2_inverse(m)
        xs, zs = [], []
        for j in range(2 * n):
            pre = vector_to_pauli(n, minv[:, j])
            pre = pre.with_phase((pre.x & pre.z).bit_count() & 1)  # Hermitian rep
            img = self.conjugate(pre)
            want = (PauliString.single(n, j, "X") if j < n
                    else PauliString.single(n, j - n, "Z"))
            if img != want:
                if img != want.times_i(2):
                    raise ValueError("tableau inversion failed")
                pre = pre.times_i(2)
            (xs if j < n else zs).append(pre)
        return CliffordTableau(n, xs, zs)

    def is_identity(self) -> bool:
        return all(p == q for p, q in zip(self.x_images + self.z_images,
                                          CliffordTableau.identity(self.n).x_images
                                          + CliffordTableau.identity(self.n).z_images))

    def __eq__(self, other) -> bool:
        return (isinstance(other, CliffordTableau) and self.n == other.n
                and self.x_images == other.x_images and self.z_images == other.z_images)


def _gf2_inverse(m: np.ndarray) -> np.ndarray:
    k = m.shape[0]
    a = np.concatenate([m.astype(np.uint8) % 2, np.eye(k, dtype=np.uint8)], axis=1)
    row = 0
    for col in range(k):
        piv = None
        for r in range(row, k):
            if a[r, col]:
                piv = r
                break
        if piv is None:
            raise ValueError("singular GF(2) matrix")
        a[[row, piv]] = a[[piv, row]]
        for r in range(k):
            if r != row and a[r, col]:
                a[r] ^= a[row]
        row += 1
    return a[:, k:]


def tableau_from_dense(mat: np.ndarray, tol: float = 1e-9) -> CliffordTableau:
    """Dense unitary -> tableau; raises if not Clifford."""
    check_unitary(mat, tol)
    n = _num_qubits(mat)
    xs, zs = [], []
    for j in range(n):
        for letter, acc in (("X", xs), ("Z", zs)):
            p = PauliString.single(n, j, letter)
            img = mat @ p.to_matrix() @ mat.conj().T
            pp = as_phased_pauli(img, tol)
            if pp is None:
                raise NotPscError("input is not a Clifford unitary")
            acc.append(pp)
    return CliffordTableau(n, xs, zs)


# Named-gate tableaux, generated once from the dense matrices so that the
# sign conventions cannot drift from the oracle.
_NAMED_TABLEAU_CACHE: dict[str, CliffordTableau] = {}


def named_gate_tableau(name: str) -> CliffordTableau:
    tab = _NAMED_TABLEAU_CACHE.get(name)
    if tab is None:
        tab = tableau_from_dense(gates.gate_matrix(name))
        _NAMED_TABLEAU_CACHE[name] = tab
    return tab


def conjugate_by_named_gate(p: PauliString, name: str, qubits: tuple[int, ...]) -> PauliString:
    """U p U^dagger for a named 1q/2q Clifford gate acting on `qubits`."""
    tab = named_gate_tableau(name)
    local = p.restricted(qubits)
    rest = PauliString(p.n, p.x & ~_mask(qubits), p.z & ~_mask(qubits), 0)
    img = tab.conjugate(local)
    return img.embedded(p.n, qubits) * rest


def _mask(qubits: tuple[int, ...]) -> int:
    m = 0
    for q in qubits:
        m |= 1 << q
    return m


def tableau_from_gates(n: int, gate_list) -> CliffordTableau:
    """Tableau of the product of named gates, first list entry applied first."""
    xs = [PauliString.single(n, j, "X") for j in range(n)]
    zs = [PauliString.single(n, j, "Z") for j in range(n)]
    for name, qubits in gate_list:
        xs = [conjugate_by_named_gate(p, name, tuple(qubits)) for p in xs]
        zs = [conjugate_by_named_gate(p, name, tuple(qubits)) for p in zs]
    return CliffordTableau(n, xs, zs)


def conjugate_by_clifford(p: PauliString, c: CliffordTableau) -> PauliString:
    """C p C^dagger with exact sign (the pauli-module contract)."""
    return c.conjugate(p)


# ---------------------------------------------------------------------------
# PscForm
# ---------------------------------------------------------------------------

class CommutationClass(enum.Enum):
    COMMUTE = "commute"
    ANTICOMMUTE = "anticommute"
    NEITHER = "neither"


@dataclass(frozen=True)
class PscForm:
    """Canonical form alpha * P * exp(i pi/4 sum Q_j) on a local wire set."""

    n: int
    alpha_exp8: int           # alpha = exp(i pi alpha_exp8 / 4)
    pauli_p: PauliString      # Hermitian-canonical P
    q_set: tuple[PauliString, ...]  # mutually commuting Hermitian Paulis
    order: int = 2            # order of the unitary up to phase: 2 or 4

    def __post_init__(self):
        for i, qi in enumerate(self.q_set):
            for qj in self.q_set[i + 1:]:
                if not qi.commutes(qj):
                    raise NotPscError("q_set is not a commuting set")

    @property
    def m(self) -> int:
        return len(self.q_set)

    def is_diagonal(self) -> bool:
        """Diagonal in the computational basis (commutes past any control)."""
        return self.pauli_p.x == 0 and all(q.x == 0 for q in self.q_set)

    # -- exact Pauli algebra on the canonical form --------------------------

    def _conj_by_exponential(self, p: PauliString) -> PauliString:
        """exp(i pi/4 sum Q) p exp(-i pi/4 sum Q), exact."""
        out = p
        for q in self.q_set:
            if out.anticommutes(q):
                out = (q * out).times_i(1)
        return out

    def conjugate_pauli(self, p: PauliString) -> PauliString:
        """V p V^dagger for this PSC V, exact including phase."""
        out = self._conj_by_exponential(p)
        if out.anticommutes(self.pauli_p):
            out = out.times_i(2)
        return out

    def square_pauli(self) -> PauliString:
        """V^2 as an exact phased Pauli."""
        ptil = self.pauli_p
        e_ptil = self._conj_by_exponential(ptil)
        exp_sq = PauliString.identity(self.n).times_i(self.m)
        for q in self.q_set:
            exp_sq = exp_sq * q
        out = ptil * e_ptil * exp_sq
        return out.times_i(self.alpha_exp8)  # alpha^2 = i^alpha_exp8

    def commutation_with(self, q: PauliString) -> CommutationClass:
        img = self.conjugate_pauli(q)
        if img == q:
            return CommutationClass.COMMUTE
        if img == q.times_i(2):
            return CommutationClass.ANTICOMMUTE
        return CommutationClass.NEITHER

    # -- dense reconstruction ------------------------------------------------

    def reconstruct(self) -> np.ndarray:
        dim = 1 << self.n
        e = np.eye(dim, dtype=complex)
        for q in self.q_set:
            e = e @ ((np.eye(dim) + 1j * q.to_matrix()) / np.sqrt(2.0))
        alpha = np.exp(1j * np.pi * self.alpha_exp8 / 4)
        return alpha * self.pauli_p.to_matrix() @ e

    # -- serialization -------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "alpha_exp8": self.alpha_exp8,
            "p": self.pauli_p.to_text(),
            "q_set": [q.to_text() for q in self.q_set],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), separators=(",", ":"))

    @staticmethod
    def from_json_dict(d: dict) -> "PscForm":
        p = PauliString.from_text(d["p"])
        qs = tuple(PauliString.from_text(t) for t in d["q_set"])
        form = PscForm(p.n, int(d["alpha_exp8"]) % 8, p, qs, 2)
        sq = form.square_pauli()
        return PscForm(p.n, form.alpha_exp8, p, qs, 2 if sq.is_identity else 4)

    @staticmethod
    def from_json(s: str) -> "PscForm":
        return PscForm.from_json_dict(json.loads(s))


# ---------------------------------------------------------------------------
# PSC recognition and canonicalization
# ---------------------------------------------------------------------------

def is_psc(u) -> bool:
    """True iff u is a Clifford whose square is a Pauli.

    Accepts a dense unitary (<= 8 qubits) or a CliffordTableau of any size.
    Paulis count as (degenerate) PSCs so that is_psc agrees with
    controlled_in_third_level on every input.
    """
    if isinstance(u, CliffordTableau):
        sq = u.then(u)
        m = sq.symplectic_matrix()
        return bool(np.array_equal(m % 2, np.eye(2 * u.n, dtype=np.uint8)))
    mat = np.asarray(u, dtype=complex)
    if _num_qubits(mat) > 8:
        raise ValueError("dense is_psc capped at 8 qubits")
    check_unitary(mat)
    if not is_clifford_dense(mat):
        return False
    return as_phased_pauli(mat @ mat) is not None


def canonicalize_psc(u: np.ndarray, support: tuple[int, ...] | None = None) -> PscForm:
    """Recover the Prop.-1 canonical form of a dense PSC exactly.

    `support` is informational (callers embed the local form themselves);
    the matrix must act on at most 8 qubits.
    """
    mat = np.asarray(u, dtype=complex)
    n = _num_qubits(mat)
    if n > 8:
        raise NotPscError("canonicalizer support capped at 8 qubits")
    check_unitary(mat)
    tab = tableau_from_dense(mat)
    c = tab.symplectic_matrix()
    eye = np.eye(2 * n, dtype=np.uint8)
    if not np.array_equal((c @ c) % 2, eye):
        raise NotPscError("unitary does not square to a Pauli")

    nmat = (c ^ eye)
    omega = np.block([
        [np.zeros((n, n), dtype=np.uint8), np.eye(n, dtype=np.uint8)],
        [np.eye(n, dtype=np.uint8), np.zeros((n, n), dtype=np.uint8)],
    ])
    a = (nmat @ omega) % 2
    if not np.array_equal(a, a.T):
        raise NotPscError("symmetric-form construction failed")

    q_vecs = _rank_one_decompose(a)
    q_set = []
    for v in q_vecs:
        q = vector_to_pauli(n, v)
        q_set.append(q.with_phase((q.x & q.z).bit_count() & 1))

    dim = 1 << n
    e = np.eye(dim, dtype=complex)
    for q in q_set:
        e = e @ ((np.eye(dim) + 1j * q.to_matrix()) / np.sqrt(2.0))
    r = mat @ e.conj().T
    ident = identify_phased_pauli(r)
    if ident is None:
        raise NotPscError("residual is not a phased Pauli")
    p_raw, scalar = ident
    w = (p_raw.x & p_raw.z).bit_count() & 1
    p_herm = p_raw.with_phase(w)
    alpha_c = scalar * (1j ** w) ** -1 if w else scalar
    k8 = int(np.round(np.angle(alpha_c) / (np.pi / 4))) % 8
    if abs(alpha_c - np.exp(1j * np.pi * k8 / 4)) > 1e-8:
        raise NotPscError("alpha is not an eighth root of unity")

    form = PscForm(n, k8, p_herm, tuple(q_set), 2)
    sq = form.square_pauli()
    form = PscForm(n, k8, p_herm, tuple(q_set), 2 if sq.is_identity else 4)
    if not np.allclose(form.reconstruct(), mat, atol=1e-9):
        raise NotPscError("canonical-form reconstruction mismatch")
    return form


def _rank_one_decompose(a: np.ndarray) -> list[np.ndarray]:
    """Symmetric GF(2) matrix as a sum of rank-one terms u u^T.

    Greedy diagonal pivoting, lowest index first; hollow 2x2 blocks handled
    by the standard three-term split.
    """
    a = a.copy() % 2
    k = a.shape[0]
    out: list[np.ndarray] = []
    while a.any():
        diag = np.flatnonzero(np.diag(a))
        if len(diag):
            i = int(diag[0])
            u = a[:, i].copy()
            out.append(u)
            a ^= np.outer(u, u)
        else:
            idx = np.argwhere(a)
            i, j = int(idx[0][0]), int(idx[0][1])
            ui = a[:, i].copy()
            uj = a[:, j].copy()
            out.append(ui)
            out.append(uj)
            out.append(ui ^ uj)
            a ^= np.outer(ui, ui) ^ np.outer(uj, uj) ^ np.outer(ui ^ uj, ui ^ uj)
    return out


def controlled_in_third_level(u: np.ndarray) -> bool:
    """True iff controlled-u lies in the third level of the Clifford hierarchy."""
    mat = np.asarray(u, dtype=complex)
    n = _num_qubits(mat)
    if n > 4:
        raise ValueError("controlled_in_third_level capped at 4 qubits")
    check_unitary(mat)
    cu = gates.controlled(mat)
    for j in range(n + 1):
        for letter in ("X", "Z"):
            p = PauliString.single(n + 1, j, letter).to_matrix()
            w = cu @ p @ cu.conj().T
            if not is_clifford_dense(w):
                return False
    return True


def psc_commutation_class(q: PauliString, c: PscForm) -> CommutationClass:
    return c.commutation_with(q)


# ---------------------------------------------------------------------------
# PSC zoo (shared by tests and by rule generation)
# ---------------------------------------------------------------------------

def _exp_pauli_quarter(*texts: str) -> np.ndarray:
    ps = [PauliString.from_text(t) for t in texts]
    dim = 1 << ps[0].n
    out = np.eye(dim, dtype=complex)
    for p in ps:
        out = out @ ((np.eye(dim) + 1j * p.to_matrix()) / np.sqrt(2.0))
    return out


def psc_zoo() -> dict[str, np.ndarray]:
    """Named PSC matrices used by round-trip and Lemma-1 tests."""
    zoo = {
        "H": gates.H,
        "S": gates.S,
        "SDG": gates.SDG,
        "X": gates.X,
        "Y": gates.Y,
        "Z": gates.Z,
        "CZ": gates.CZ,
        "CX": gates.CX,
        "CY": gates.CY,
        "SWAP": gates.SWAP,
        "TST+": gates.T @ gates.S @ gates.TDG,
        "X(x)CZ": np.kron(gates.X, gates.CZ),
        "H(x)H": np.kron(gates.H, gates.H),
        "S(x)S": np.kron(gates.S, gates.S),
        "CZ(x)X": np.kron(gates.CZ, gates.X),
        "sqrt(XX)": _exp_pauli_quarter("+XX"),
        "sqrt-XX-ZZ": _exp_pauli_quarter("+XX", "+ZZ"),
        "iSWAP": _exp_pauli_quarter("+XX", "+YY"),
        "Z.sqrt(YI)": gates.kron_all([gates.Z, gates.I]) @ _exp_pauli_quarter("+Y_"),
        "S(x)H": np.kron(gates.S, gates.H),
    }
    return zoo


def non_psc_zoo() -> dict[str, np.ndarray]:
    """Cliffords that do not square to a Pauli (HS is the paper's example)."""
    return {
        "HS": gates.H @ gates.S,
        "SH": gates.S @ gates.H,
        "CX.(HxI)": gates.CX @ np.kron(gates.H, gates.I),
        "(HxI).CX": np.kron(gates.H, gates.I) @ gates.CX,
        "SWAP.CZ.(SxI)": gates.SWAP @ gates.CZ @ np.kron(gates.S, gates.I),
        "CZ.(HxH)": gates.CZ @ np.kron(gates.H, gates.H),
        "CX.SWAP": gates.CX @ gates.SWAP,
    }


_PSC_FORM_CACHE: dict[str, PscForm] = {}


def named_psc_form(name: str) -> PscForm:
    """Canonical forms for gates used as protocol payloads (H, S, SDG...)."""
    form = _PSC_FORM_CACHE.get(name)
    if form is None:
        form = canonicalize_psc(gates.gate_matrix(name))
        _PSC_FORM_CACHE[name] = form
    return form


# ---------------------------------------------------------------------------
# ErrorGate: the closed error set {Pauli, PSC, controlled-Pauli}
# ---------------------------------------------------------------------------

class ErrorKind(enum.Enum):
    PAULI = "P"
    PSC = "PSC"
    CONTROLLED_PAULI = "CP"


@dataclass(frozen=True)
class ErrorGate:
    """One gate of a propagated Clifford error, on the global wire set."""

    kind: ErrorKind
    pauli: PauliString | None = None          # PAULI / CONTROLLED_PAULI payload
    psc: PscForm | None = None                 # PSC payload (local form)
    qubits: tuple[int, ...] = ()               # PSC support wires
    control: int | None = None                 # CONTROLLED_PAULI control wire

    @staticmethod
    def from_pauli(p: PauliString) -> "ErrorGate":
        return ErrorGate(ErrorKind.PAULI, pauli=p)

    @staticmethod
    def from_psc(form: PscForm, qubits: tuple[int, ...]) -> "ErrorGate":
        return ErrorGate(ErrorKind.PSC, psc=form, qubits=tuple(qubits))

    @staticmethod
    def from_controlled_pauli(control: int, payload: PauliString) -> "ErrorGate":
        return ErrorGate(ErrorKind.CONTROLLED_PAULI, pauli=payload, control=control)

    def conjugate(self, p: PauliString) -> PauliString:
        """g p g^dagger for this error gate g (used by flatten)."""
        if self.kind is ErrorKind.PAULI:
            sign = 2 * self.pauli.symplectic_product(p)
            return p.times_i(sign)
        if self.kind is ErrorKind.PSC:
            local = p.restricted(self.qubits)
            rest = PauliString(p.n, p.x & ~_mask(self.qubits), p.z & ~_mask(self.qubits), 0)
            img = self.psc.conjugate_pauli(local)
            return img.embedded(p.n, self.qubits) * rest
        # controlled-Pauli C(i^k Q0) = S_c^k . C(Q0); payload phase is exact
        c = self.control
        n = p.n
        q0 = self.pauli.with_phase((self.pauli.x & self.pauli.z).bit_count() & 1)
        k = (self.pauli.phase - q0.phase) & 3
        cbit = 1 << c
        xc = (p.x >> c) & 1
        zc = (p.z >> c) & 1
        rest = PauliString(n, p.x & ~cbit, p.z & ~cbit, 0)
        out = PauliString(n, 0, 0, p.phase)
        if xc:
            out = out * (PauliString.single(n, c, "X") * q0)
        if zc:
            out = out * PauliString.single(n, c, "Z")
        if q0.anticommutes(rest):
            out = out * PauliString.single(n, c, "Z")
        out = out * rest
        for _ in range(k & 3):
            out = conjugate_by_named_gate(out, "S", (c,))
        return out

    def to_matrix(self, n: int) -> np.ndarray:
        """Dense embedding on n qubits (oracle/test use)."""
        if self.kind is ErrorKind.PAULI:
            return self.pauli.to_matrix()
        if self.kind is ErrorKind.PSC:
            return gates.embed(self.psc.reconstruct(), self.qubits, n)
        payload = self.pauli
        sup = payload.support()
        local = payload.restricted(sup)
        u = local.to_matrix()
        cu = gates.controlled(u)
        return gates.embed(cu, (self.control,) + sup, n)

    def serialize(self) -> str:
        if self.kind is ErrorKind.PAULI:
            return f"P {self.pauli.to_text()}"
        if self.kind is ErrorKind.CONTROLLED_PAULI:
            return f"CP {self.control} {self.pauli.to_text()}"
        qs = ",".join(str(q) for q in self.qubits)
        return f"PSC {qs} {self.psc.to_json()}"

    @staticmethod
    def deserialize(line: str, n: int) -> "ErrorGate":
        parts = line.split(None, 2)
        if parts[0] == "P":
            return ErrorGate.from_pauli(PauliString.from_text(parts[1]))
        if parts[0] == "CP":
            return ErrorGate.from_controlled_pauli(int(parts[1]), PauliString.from_text(parts[2]))
        if parts[0] == "PSC":
            qubits = tuple(int(t) for t in parts[1].split(","))
            return ErrorGate.from_psc(PscForm.from_json(parts[2]), qubits)
        raise ValueError(f"bad error-gate line {line!r}")


def flatten_to_tableau(seq, n: int) -> CliffordTableau:
    """Single tableau equal to the ordered product of a CliffordErrorSeq."""
    gate_list = seq.gates if hasattr(seq, "gates") else seq
    xs = [PauliString.single(n, j, "X") for j in range(n)]
    zs = [PauliString.single(n, j, "Z") for j in range(n)]
    for g in gate_list:
        xs = [g.conjugate(p) for p in xs]
        zs = [g.conjugate(p) for p in zs]
    return CliffordTableau(n, xs, zs)
