from itertools import product

import numpy as np
import pytest

from qmem.codes import (
    AXES,
    encode_ideal,
    get_code,
    harmless_weight2_count,
    logical_representatives,
    validate_code,
)
from qmem.dense import DenseState, pauli_matrix
from qmem.pauli import PauliString, all_paulis
from qmem.sim import FrameBackend, TableauBackend
from qmem.tableau import ConfigurationError

CODES = ("five", "steane", "surface9")


@pytest.mark.parametrize("name", CODES)
def test_code_is_valid(name):
    code = get_code(name)
    validate_code(code)
    assert code.r == code.n - 1
    assert len(code.table) == 2**code.r


@pytest.mark.parametrize("name", ["five", "steane"])
def test_stabilizers_commute_as_matrices(name):
    code = get_code(name)
    mats = [pauli_matrix(g) for g in code.stabilizers]
    for a in mats:
        for b in mats:
            assert np.allclose(a @ b, b @ a)
    lx, lz = pauli_matrix(code.logical_x), pauli_matrix(code.logical_z)
    assert np.allclose(lx @ lz, -lz @ lx)


def test_unknown_code():
    with pytest.raises(ConfigurationError):
        get_code("toric")


@pytest.mark.parametrize("name", CODES)
def test_identity_has_zero_syndrome(name):
    code = get_code(name)
    assert code.syndrome_of(PauliString(code.n)) == 0
    with pytest.raises(ValueError):
        code.syndrome_of(PauliString(code.n + 1))


def test_five_qubit_code_is_perfect():
    code = get_code("five")
    syns = {code.syndrome_of(e) for e in all_paulis(5, weight=1)}
    assert len(syns) == 15 and 0 not in syns


def test_steane_css_separation():
    code = get_code("steane")
    for q in range(7):
        sx = code.syndrome_of(PauliString.single(7, q, "X"))
        sz = code.syndrome_of(PauliString.single(7, q, "Z"))
        for i, g in enumerate(code.stabilizers):
            if g.z == 0:      # X-type check
                assert not sx >> i & 1
            else:
                assert not sz >> i & 1


@pytest.mark.parametrize("name", CODES)
def test_all_weight1_errors_corrected(name):
    code = get_code(name)
    for e in all_paulis(code.n, weight=1):
        assert code.is_stabilizer(e * code.correction(code.syndrome_of(e)))
        for axis in AXES:
            assert not code.decode_flip(e, axis)


@pytest.mark.parametrize("name", CODES)
def test_encoded_states(name):
    code = get_code(name)
    for axis, sign in product(AXES, (1, -1)):
        t = encode_ideal(code, axis, sign)
        for g in code.stabilizers:
            assert t.peek(g) == 1
        assert t.peek(code.logical(axis)) == sign


def test_encoder_dense_check_five():
    code = get_code("five")
    psi = DenseState.zeros(5)
    for g in code.encoder:
        psi.apply(g)
    for g in code.stabilizers:
        assert psi.expectation(g) == pytest.approx(1)
    assert psi.expectation(code.logical_z) == pytest.approx(1)


def _ideal_decode(code, axis, sign, error):
    be = TableauBackend(code.n, [np.random.default_rng(0)])
    be.load_ideal(code, axis, np.array([int(sign < 0)]), np.arange(1))
    be.apply_pauli(error, np.arange(1))
    return -1 if be.ideal_bob(code, range(code.n), axis, np.arange(1), 0)[0] else 1


@pytest.mark.parametrize("name", CODES)
def test_round_trip_on_tableau(name):
    code = get_code(name)
    for axis, sign in product(AXES, (1, -1)):
        assert _ideal_decode(code, axis, sign, PauliString(code.n)) == sign
        for e in all_paulis(code.n, weight=1):
            assert _ideal_decode(code, axis, sign, e) == sign


def test_five_qubit_corrupted_by_weight2():
    code = get_code("five")
    harmless, total = harmless_weight2_count(code)
    assert (harmless, total) == (0, 90)
    # two distinct X errors: every pair flips at least one axis on the tableau
    pairs = [PauliString.from_sparse(5, {a: "X", b: "X"}) for a in range(5) for b in range(a + 1, 5)]
    for e in pairs:
        assert any(_ideal_decode(code, ax, 1, e) == -1 for ax in AXES)
        flips = [code.decode_flip(e, ax) for ax in AXES]
        assert flips == [_ideal_decode(code, ax, 1, e) == -1 for ax in AXES]


def test_steane_corrects_one_x_and_one_z():
    code = get_code("steane")
    for a, b in product(range(7), repeat=2):
        e = PauliString.single(7, a, "X") * PauliString.single(7, b, "Z")
        assert code.is_stabilizer(e * code.correction(code.syndrome_of(e))), (a, b)
    # and no pair of the same type is harmless
    for a in range(7):
        for b in range(a + 1, 7):
            for k in "XZ":
                e = PauliString.from_sparse(7, {a: k, b: k})
                assert not code.is_stabilizer(e * code.correction(code.syndrome_of(e)))


def test_surface9_has_most_harmless_weight2():
    counts = {c: harmless_weight2_count(get_code(c))[0] for c in CODES}
    assert counts["surface9"] > counts["steane"] > counts["five"]


def test_frame_decoder_matches_table():
    rng = np.random.default_rng(3)
    for name in CODES:
        code = get_code(name)
        be = FrameBackend(code.n, 200)
        fx = rng.integers(0, 2**code.n, 200)
        fz = rng.integers(0, 2**code.n, 200)
        be.apply_masks(range(code.n), fx, fz, np.arange(200))
        for axis in AXES:
            got = be.ideal_bob(code, range(code.n), axis, np.arange(200), 0)
            want = [code.decode_flip(PauliString(code.n, int(x), int(z)), axis) for x, z in zip(fx, fz)]
            assert list(got.astype(bool)) == want


def test_logical_representatives():
    code = get_code("steane")
    reps = logical_representatives(code, "Z", 3)
    assert len(reps) == 7
    for r in reps:
        assert r.weight == 3 and code.coordinates(r) == code.coordinates(code.logical_z)


def test_physical_qubit_code():
    code = get_code("physical_qubit")
    assert code.n == 1 and code.r == 0
    assert code.flips(PauliString.from_str("X"), "Z")
    assert not code.flips(PauliString.from_str("Z"), "Z")
