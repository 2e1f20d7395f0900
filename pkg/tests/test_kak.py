import numpy as np
import pytest

from conftest import random_unitary
from qmpso.circuits import new_staircase
from qmpso.kak import canonical_gate, kak_decompose, staircase_angles

CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
                dtype=complex)
SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]],
                dtype=complex)


def test_cnot_canonical_angles():
    f = kak_decompose(CNOT)
    assert np.allclose(f.canonical_angles, (np.pi / 4, 0.0, 0.0), atol=1e-9)
    assert np.max(np.abs(f.reconstruct() - CNOT)) < 1e-9


def test_swap_canonical_angles():
    f = kak_decompose(SWAP)
    assert np.allclose(f.canonical_angles, (np.pi / 4, np.pi / 4, np.pi / 4), atol=1e-9)


def test_identity_angles():
    f = kak_decompose(np.eye(4, dtype=complex))
    assert np.allclose(f.canonical_angles, (0.0, 0.0, 0.0), atol=1e-9)


def test_product_gate_has_zero_angles(rng):
    g = np.kron(random_unitary(2, rng), random_unitary(2, rng))
    f = kak_decompose(g)
    assert np.allclose(f.canonical_angles, (0.0, 0.0, 0.0), atol=1e-9)
    assert np.max(np.abs(f.reconstruct() - g)) < 1e-9


def test_random_reconstruction_and_chamber():
    rng = np.random.default_rng(515)
    for _ in range(25):
        u = random_unitary(4, rng)
        f = kak_decompose(u)
        ax, ay, az = f.canonical_angles
        assert np.pi / 4 + 1e-12 >= ax >= ay >= abs(az) >= 0.0
        assert np.max(np.abs(f.reconstruct() - u)) < 1e-9
        # local factors are pairs of single-qubit unitaries
        for m in (*f.pre, *f.post):
            assert m.shape == (2, 2)
            assert np.allclose(m @ m.conj().T, np.eye(2), atol=1e-9)


def test_canonical_gate_round_trip():
    angles = (0.3, 0.2, -0.1)
    f = kak_decompose(canonical_gate(angles))
    assert np.allclose(f.canonical_angles, (0.3, 0.2, 0.1), atol=1e-9) or \
        np.allclose(f.canonical_angles, angles, atol=1e-9)


def test_kak_rejects_non_unitary():
    with pytest.raises(Exception):
        kak_decompose(np.ones((4, 4)))


def test_staircase_angles_layout():
    c = new_staircase(4, 2, init="random", seed=4)
    rows = staircase_angles(c)
    assert len(rows) == 6
    assert [(r[0], r[1]) for r in rows] == [(0, 0), (0, 1), (0, 2),
                                            (1, 0), (1, 1), (1, 2)]
    for _, _, ax, ay, az in rows:
        assert np.pi / 4 + 1e-12 >= ax >= ay >= abs(az)
