import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mbqc.errors import ValidationError
from mbqc.pauli import PauliString, symplectic_rank

_SINGLE = {"I": np.eye(2), "X": np.array([[0, 1], [1, 0]]),
           "Y": np.array([[0, -1j], [1j, 0]]), "Z": np.array([[1, 0], [0, -1]])}


def dense(p: PauliString) -> np.ndarray:
    m = np.array([[p.sign]])
    for k in range(p.n):
        m = np.kron(m, _SINGLE[p.qubit(k)])
    return m


def test_text_round_trip():
    for text in ("+XZZI", "-IYXZ", "+I", "-Y"):
        assert PauliString.from_text(text).to_text() == text


def test_bad_text():
    with pytest.raises(ValidationError):
        PauliString.from_text("+XQ")


def test_single_factory():
    p = PauliString.single(3, 1, "Y", -1)
    assert p.to_text() == "-IYI"


pauli_texts = st.lists(st.sampled_from("IXYZ"), min_size=1, max_size=8).map("".join)


@given(pauli_texts, pauli_texts)
@settings(max_examples=80, deadline=None)
def test_commutation_matches_dense(a, b):
    if len(a) != len(b):
        b = (b * len(a))[:len(a)]
    pa, pb = PauliString.from_text("+" + a), PauliString.from_text("+" + b)
    da, db = dense(pa), dense(pb)
    commutes = np.allclose(da @ db, db @ da)
    assert pa.commutes_with(pb) == commutes


@given(pauli_texts, pauli_texts, st.booleans(), st.booleans())
@settings(max_examples=80, deadline=None)
def test_product_matches_dense_when_real(a, b, sa, sb):
    if len(a) != len(b):
        b = (b * len(a))[:len(a)]
    pa = PauliString.from_text(("-" if sa else "+") + a)
    pb = PauliString.from_text(("-" if sb else "+") + b)
    if not pa.commutes_with(pb):
        return          # anticommuting product has an imaginary sign
    prod = pa * pb
    assert np.allclose(dense(prod), dense(pa) @ dense(pb))


def test_anticommuting_product_raises():
    from mbqc.errors import VerificationError
    with pytest.raises(VerificationError):
        PauliString.from_text("+X") * PauliString.from_text("+Z")


def test_symplectic_rank():
    ops = [PauliString.from_text(t) for t in ("+XI", "+IX", "+XX")]
    assert symplectic_rank(ops) == 2
    ops = [PauliString.from_text(t) for t in ("+XZ", "+ZX")]
    assert symplectic_rank(ops) == 2
    assert symplectic_rank([]) == 0


def test_identity_and_equality():
    p = PauliString.from_text("+II")
    assert p.is_identity()
    assert PauliString.from_text("+XY") == PauliString.from_text("+XY")
    assert PauliString.from_text("+XY") != PauliString.from_text("-XY")


def test_wide_strings_cross_word_boundary():
    text = "I" * 70 + "X" + "I" * 9
    p = PauliString.from_text("+" + text)
    assert p.qubit(70) == "X" and p.qubit(0) == "I"
    assert p.to_text() == "+" + text
