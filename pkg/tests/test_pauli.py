"""Pauli-string algebra against the dense matrix oracle."""

import numpy as np
import pytest

from mspsim.pauli import PauliString, SymplecticForm, pauli_to_vector


def random_pauli(rng, n):
    return PauliString(n, int(rng.integers(0, 1 << n)), int(rng.integers(0, 1 << n)),
                       int(rng.integers(0, 4)))


def test_single_qubit_products():
    x = PauliString.single(1, 0, "X")
    y = PauliString.single(1, 0, "Y")
    z = PauliString.single(1, 0, "Z")
    # X.Z = -iY
    assert (x * z) == y.times_i(-1)
    assert (x * z).to_text() == "-iY"
    # P . identity = P
    ident = PauliString.identity(1)
    assert x * ident == x and ident * x == x


def test_multiply_matches_dense_8q():
    rng = np.random.default_rng(7)
    for _ in range(50):
        a = random_pauli(rng, 8)
        b = random_pauli(rng, 8)
        prod = a * b
        dense = a.to_matrix() @ b.to_matrix()
        assert np.allclose(dense, prod.to_matrix(), atol=1e-12)


def test_inverse_and_identity_phase():
    rng = np.random.default_rng(11)
    for _ in range(100):
        p = random_pauli(rng, 6)
        check = p * p.inverse()
        assert check.is_identity and check.phase == 0


def test_commutes_basic():
    n1x = PauliString.single(1, 0, "X")
    n1z = PauliString.single(1, 0, "Z")
    assert not n1x.commutes(n1z)
    stab = PauliString.from_text("+XXXX")
    logical = PauliString.from_text("+ZZ__")
    assert stab.commutes(logical)


def test_commutes_matches_dense_all_2q_pairs():
    paulis = []
    for code in range(16):
        letters = "_XYZ"[code & 3] + "_XYZ"[(code >> 2) & 3]
        paulis.append(PauliString.from_text("+" + letters))
    for a in paulis:
        for b in paulis:
            comm = a.to_matrix() @ b.to_matrix() - b.to_matrix() @ a.to_matrix()
            assert a.commutes(b) == bool(np.allclose(comm, 0, atol=1e-12))


def test_commutation_properties():
    rng = np.random.default_rng(3)
    for _ in range(200):
        a = random_pauli(rng, 5)
        b = random_pauli(rng, 5)
        assert a.commutes(a)
        assert a.commutes(b) == b.commutes(a)
        # multiply phase law: ab and ba differ by 2<a,b> mod 4
        ab, ba = a * b, b * a
        assert (ab.phase - ba.phase) % 4 == (2 * a.symplectic_product(b)) % 4


def test_text_round_trip():
    rng = np.random.default_rng(5)
    for _ in range(100):
        p = random_pauli(rng, 7)
        assert PauliString.from_text(p.to_text()) == p
    assert PauliString.from_text("+X_IZ").to_text() == "+X__Z"
    assert PauliString.from_text("-iYX").to_matrix() is not None


def test_symplectic_form_matches_commutation():
    rng = np.random.default_rng(9)
    form = SymplecticForm(4)
    for _ in range(50):
        a = random_pauli(rng, 4)
        b = random_pauli(rng, 4)
        assert form.product(pauli_to_vector(a), pauli_to_vector(b)) == a.symplectic_product(b)


def test_bad_input_raises():
    with pytest.raises(ValueError):
        PauliString(2, 4, 0, 0)
    with pytest.raises(ValueError):
        PauliString.from_text("+XQ")
    with pytest.raises(ValueError):
        PauliString.single(2, 0, "X").multiply(PauliString.single(3, 0, "X"))
