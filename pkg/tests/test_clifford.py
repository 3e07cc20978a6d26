"""PSC theory: recognition, canonical forms, hierarchy checks, tableaux."""

import numpy as np
import pytest

from mspsim import gates as g
from mspsim.pauli import PauliString
from mspsim.clifford import (
    CliffordTableau, CommutationClass, ErrorGate, NotPscError,
    canonicalize_psc, conjugate_by_named_gate, controlled_in_third_level,
    flatten_to_tableau, is_psc, named_psc_form, non_psc_zoo, psc_zoo,
    psc_commutation_class, tableau_from_dense, tableau_from_gates,
)


def random_clifford_gates(rng, n, depth):
    names1 = ["H", "S", "SDG", "X", "Y", "Z"]
    names2 = ["CX", "CZ", "SWAP", "CY"]
    out = []
    for _ in range(depth):
        if n > 1 and rng.random() < 0.5:
            a, b = rng.choice(n, size=2, replace=False)
            out.append((str(rng.choice(names2)), (int(a), int(b))))
        else:
            out.append((str(rng.choice(names1)), (int(rng.integers(n)),)))
    return out


def dense_of_gates(gate_list, n):
    m = np.eye(1 << n, dtype=complex)
    for name, qubits in gate_list:
        m = g.embed(g.gate_matrix(name), qubits, n) @ m
    return m


class TestTableau:
    def test_hadamard_conjugates_x_to_z(self):
        tab = tableau_from_dense(g.H)
        assert tab.conjugate(PauliString.from_text("+X")) == PauliString.from_text("+Z")

    def test_identity_tableau_fixes_everything(self):
        tab = CliffordTableau.identity(3)
        p = PauliString.from_text("-iXYZ")
        assert tab.conjugate(p) == p

    def test_random_conjugation_matches_dense(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            gate_list = random_clifford_gates(rng, 6, 20)
            tab = tableau_from_gates(6, gate_list)
            u = dense_of_gates(gate_list, 6)
            p = PauliString(6, int(rng.integers(0, 64)), int(rng.integers(0, 64)),
                            int(rng.integers(0, 4)))
            img = tab.conjugate(p)
            assert np.allclose(u @ p.to_matrix() @ u.conj().T, img.to_matrix(),
                               atol=1e-10)

    def test_conjugation_preserves_commutation(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            tab = tableau_from_gates(4, random_clifford_gates(rng, 4, 12))
            p = PauliString(4, int(rng.integers(16)), int(rng.integers(16)), 0)
            q = PauliString(4, int(rng.integers(16)), int(rng.integers(16)), 0)
            assert p.commutes(q) == tab.conjugate(p).commutes(tab.conjugate(q))

    def test_compose_with_inverse_is_identity(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            tab = tableau_from_gates(5, random_clifford_gates(rng, 5, 15))
            assert tab.then(tab.inverse()).is_identity()
            assert tab.inverse().then(tab).is_identity()

    def test_symplectic_constraint(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            tab = tableau_from_gates(4, random_clifford_gates(rng, 4, 10))
            assert tab.preserves_symplectic_form()


class TestPscRecognition:
    def test_h_is_psc(self):
        assert is_psc(g.H)

    def test_hs_is_not_psc(self):
        assert not is_psc(g.H @ g.S)

    def test_cz_and_friends(self):
        assert is_psc(g.CZ)
        assert is_psc(np.kron(g.X, g.CZ))
        assert is_psc(g.T @ g.S @ g.TDG)

    def test_tableau_input(self):
        assert is_psc(tableau_from_dense(g.H))
        assert not is_psc(tableau_from_dense(g.H @ g.S))

    def test_non_unitary_raises(self):
        with pytest.raises(Exception):
            is_psc(np.ones((2, 2)))

    def test_zoo_classification(self):
        for name, mat in psc_zoo().items():
            assert is_psc(mat), name
        for name, mat in non_psc_zoo().items():
            assert not is_psc(mat), name


class TestLemma1Equivalence:
    def test_controlled_third_level_on_zoo(self):
        count = 0
        for name, mat in {**psc_zoo(), **non_psc_zoo()}.items():
            if mat.shape[0] > 8:
                continue
            assert controlled_in_third_level(mat) == is_psc(mat), name
            count += 1
        assert count >= 20

    def test_pauli_controlled_is_clifford(self):
        for letter in "XYZ":
            mat = g.gate_matrix(letter)
            assert controlled_in_third_level(mat)
            assert is_psc(mat)

    def test_hs_counterexample(self):
        assert not controlled_in_third_level(g.H @ g.S)


class TestCanonicalForm:
    def test_h_canonical_form(self):
        form = canonicalize_psc(g.H)
        assert form.alpha_exp8 == 0
        assert form.pauli_p == PauliString.from_text("+Z")
        assert [q.to_text() for q in form.q_set] == ["+Y"]
        assert np.allclose(form.reconstruct(), g.H, atol=1e-12)

    def test_s_canonical_form_reconstructs(self):
        form = canonicalize_psc(g.S)
        assert np.allclose(form.reconstruct(), g.S, atol=1e-12)
        assert form.alpha_exp8 % 2 == 1  # odd eighth root does arise

    def test_cz_canonical_form(self):
        form = canonicalize_psc(g.CZ)
        assert np.allclose(form.reconstruct(), g.CZ, atol=1e-12)
        assert sorted(q.equals_up_to_phase(PauliString.from_text("+ZZ"))
                      for q in form.q_set).count(True) == 1
        assert form.m == 3

    def test_round_trip_whole_zoo(self):
        alphas = set()
        for name, mat in psc_zoo().items():
            form = canonicalize_psc(mat)
            assert np.allclose(form.reconstruct(), mat, atol=1e-9), name
            alphas.add(form.alpha_exp8)
        assert any(a % 2 == 1 for a in alphas)  # resolves the alpha^4 question

    def test_rejects_non_psc(self):
        with pytest.raises(NotPscError):
            canonicalize_psc(g.H @ g.S)

    def test_order_field(self):
        assert canonicalize_psc(g.H).order == 2
        assert canonicalize_psc(g.S).order == 4  # S^2 = Z
        assert canonicalize_psc(g.CZ).order == 2

    def test_square_pauli_matches_dense(self):
        for name, mat in psc_zoo().items():
            form = canonicalize_psc(mat)
            sq = form.square_pauli()
            assert np.allclose(sq.to_matrix(), mat @ mat, atol=1e-9), name

    def test_conjugate_pauli_matches_dense(self):
        rng = np.random.default_rng(3)
        for name, mat in psc_zoo().items():
            form = canonicalize_psc(mat)
            n = form.n
            for _ in range(10):
                p = PauliString(n, int(rng.integers(1 << n)), int(rng.integers(1 << n)),
                                int(rng.integers(4)))
                img = form.conjugate_pauli(p)
                assert np.allclose(mat @ p.to_matrix() @ mat.conj().T,
                                   img.to_matrix(), atol=1e-9), name

    def test_json_round_trip(self):
        from mspsim.clifford import PscForm
        for name, mat in psc_zoo().items():
            form = canonicalize_psc(mat)
            again = PscForm.from_json(form.to_json())
            assert np.allclose(again.reconstruct(), mat, atol=1e-9), name


class TestCommutationClass:
    def test_y_anticommutes_with_h(self):
        form = named_psc_form("H")
        assert psc_commutation_class(PauliString.from_text("+Y"), form) \
            is CommutationClass.ANTICOMMUTE

    def test_identity_commutes(self):
        form = named_psc_form("H")
        assert psc_commutation_class(PauliString.identity(1), form) \
            is CommutationClass.COMMUTE

    def test_prop2_structure_never_neither(self):
        # Q = C P C+ P+ commutes-or-anticommutes with C and has support in C's
        for name, mat in psc_zoo().items():
            form = canonicalize_psc(mat)
            n = form.n
            if n > 2:
                continue
            for code in range(1 << (2 * n)):
                p = PauliString(n, code & ((1 << n) - 1), code >> n, 0)
                p = p.with_phase((p.x & p.z).bit_count() & 1)
                q = form.conjugate_pauli(p) * p.inverse()
                cls = psc_commutation_class(q, form)
                assert cls is not CommutationClass.NEITHER, (name, p)
                dense_q = mat @ p.to_matrix() @ mat.conj().T @ p.to_matrix().conj().T
                assert np.allclose(dense_q, q.to_matrix(), atol=1e-9)


class TestErrorGateAndFlatten:
    def test_flatten_empty_is_identity(self):
        assert flatten_to_tableau([], 3).is_identity()

    def test_flatten_pauli_product(self):
        x1 = ErrorGate.from_pauli(PauliString.single(2, 0, "X"))
        z1 = ErrorGate.from_pauli(PauliString.single(2, 0, "Z"))
        tab = flatten_to_tableau([x1, z1], 2)
        y_tab = flatten_to_tableau([ErrorGate.from_pauli(PauliString.single(2, 0, "Y"))], 2)
        assert tab == y_tab  # Pauli conjugation is phase-insensitive to i factors

    def test_error_gate_conjugation_matches_dense(self):
        rng = np.random.default_rng(12)
        n = 3
        hform = named_psc_form("H")
        gates_under_test = [
            ErrorGate.from_pauli(PauliString.from_text("+XZ_")),
            ErrorGate.from_psc(hform, (1,)),
            ErrorGate.from_controlled_pauli(0, PauliString.single(n, 2, "Y")),
            ErrorGate.from_controlled_pauli(2, PauliString.single(n, 0, "X").times_i(1)),
            ErrorGate.from_controlled_pauli(1, PauliString.from_text("+X_Z")),
        ]
        for eg in gates_under_test:
            u = eg.to_matrix(n)
            for _ in range(20):
                p = PauliString(n, int(rng.integers(8)), int(rng.integers(8)),
                                int(rng.integers(4)))
                img = eg.conjugate(p)
                assert np.allclose(u @ p.to_matrix() @ u.conj().T, img.to_matrix(),
                                   atol=1e-9), eg

    def test_flatten_matches_dense_product(self):
        rng = np.random.default_rng(13)
        n = 3
        hform = named_psc_form("H")
        seq = [
            ErrorGate.from_pauli(PauliString.from_text("+XY_")),
            ErrorGate.from_controlled_pauli(0, PauliString.single(n, 1, "Y")),
            ErrorGate.from_psc(hform, (2,)),
            ErrorGate.from_controlled_pauli(2, PauliString.single(n, 1, "Z")),
        ]
        tab = flatten_to_tableau(seq, n)
        u = np.eye(1 << n, dtype=complex)
        for eg in seq:
            u = eg.to_matrix(n) @ u
        for j in range(n):
            for letter in ("X", "Z"):
                p = PauliString.single(n, j, letter)
                img = tab.conjugate(p)
                assert np.allclose(u @ p.to_matrix() @ u.conj().T, img.to_matrix(),
                                   atol=1e-9)

    def test_serialization_round_trip(self):
        n = 4
        egs = [
            ErrorGate.from_pauli(PauliString.from_text("-X_ZY")),
            ErrorGate.from_controlled_pauli(1, PauliString.single(n, 3, "Y")),
            ErrorGate.from_psc(named_psc_form("S"), (2,)),
        ]
        for eg in egs:
            line = eg.serialize()
            again = ErrorGate.deserialize(line, n)
            assert again.serialize() == line


def test_conjugate_by_named_gate_matches_dense():
    rng = np.random.default_rng(15)
    n = 4
    for name, qubits in [("H", (2,)), ("S", (0,)), ("CX", (1, 3)), ("CZ", (0, 2)),
                         ("CY", (3, 1)), ("SWAP", (2, 0)), ("SDG", (1,))]:
        u = g.embed(g.gate_matrix(name), qubits, n)
        for _ in range(20):
            p = PauliString(n, int(rng.integers(16)), int(rng.integers(16)),
                            int(rng.integers(4)))
            img = conjugate_by_named_gate(p, name, qubits)
            assert np.allclose(u @ p.to_matrix() @ u.conj().T, img.to_matrix(),
                               atol=1e-10), (name, qubits)
