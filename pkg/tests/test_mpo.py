import numpy as np
import pytest

from conftest import random_unitary
from qmpso.errors import ShapeError
from qmpso.exact import ExactPropagator
from qmpso.mpo import (frobenius_fidelity, identity_mpo, lift_left,
                       lift_right, max_useful_layers, trotter_propagator_mpo)
from qmpso.tfim import TfimParams, trotter_step_gates


def test_identity_mpo_dense():
    op = identity_mpo(3)
    assert np.allclose(op.to_dense(), np.eye(8), atol=1e-14)
    assert op.max_kappa() == 1
    assert frobenius_fidelity(op, op) == pytest.approx(1.0, abs=1e-14)


def vec_site(m: np.ndarray) -> np.ndarray:
    """Vectorize a two-qubit operator with the per-site (out, in) index
    interleaving the MPO chains use."""
    return m.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(16)


def test_lift_conventions(rng):
    g = random_unitary(4, rng)
    m = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    assert np.allclose(lift_left(g) @ vec_site(m), vec_site(g @ m), atol=1e-13)
    assert np.allclose(lift_right(g) @ vec_site(m), vec_site(m @ g), atol=1e-13)


def dense_apply(bond: int, gate: np.ndarray, op: np.ndarray, L: int,
                side: str) -> np.ndarray:
    g = np.kron(np.kron(np.eye(2 ** bond), gate), np.eye(2 ** (L - bond - 2)))
    return g @ op if side == "left" else op @ g


@pytest.mark.parametrize("side", ["left", "right"])
def test_gate_application_matches_dense(rng, side):
    L = 4
    op = identity_mpo(L)
    dense = np.eye(2 ** L, dtype=complex)
    for bond in (1, 0, 2, 1):
        g = random_unitary(4, rng)
        op.apply_two_site_gate(bond, g, side=side)
        dense = dense_apply(bond, g, dense, L, side)
    assert np.allclose(op.to_dense(), dense, atol=1e-11)


def test_trotter_propagator_matches_gate_product():
    p = TfimParams(L=4, dt=0.05)
    op = trotter_propagator_mpo(p, 0.25, kappa_max=64)
    sched = trotter_step_gates(p)
    step = np.eye(2 ** p.L, dtype=complex)
    for b, g in zip(sched.bonds, sched.gates):
        step = dense_apply(b, g, step, p.L, "left")
    dense = np.linalg.matrix_power(step, 5)
    assert np.allclose(op.to_dense(), dense, atol=1e-10)


def test_trotter_propagator_approaches_exact():
    p = TfimParams(L=4, dt=0.002)
    op = trotter_propagator_mpo(p, 0.2, kappa_max=64)
    prop = ExactPropagator(p)
    exact = prop.evecs @ np.diag(np.exp(-1j * prop.evals * 0.2)) @ prop.evecs.conj().T
    f = frobenius_fidelity(op, op)  # normalization sanity
    assert f == pytest.approx(1.0, abs=1e-10)
    err = np.max(np.abs(op.to_dense() - exact))
    assert err < 5e-4


def test_frobenius_fidelity_matches_dense_trace(rng):
    L = 3
    u = identity_mpo(L)
    v = identity_mpo(L)
    for bond in (0, 1):
        u.apply_two_site_gate(bond, random_unitary(4, rng), side="left")
        v.apply_two_site_gate(bond, random_unitary(4, rng), side="left")
    got = frobenius_fidelity(u, v)
    want = np.trace(u.to_dense().conj().T @ v.to_dense()) / 2 ** L
    assert got == pytest.approx(want, abs=1e-12)


def test_kappa_cap_enforced(rng):
    p = TfimParams(L=6, dt=0.1)
    op = trotter_propagator_mpo(p, 1.0, kappa_max=4)
    assert op.max_kappa() <= 4


def test_max_useful_layers_values():
    assert max_useful_layers(12) == 2
    assert max_useful_layers(10) == 2
    assert max_useful_layers(14) == 3
    with pytest.warns(UserWarning):
        assert max_useful_layers(4) == 1
    with pytest.raises(ValueError):
        max_useful_layers(1)


def test_frobenius_fidelity_shape_guard():
    with pytest.raises(ShapeError):
        frobenius_fidelity(identity_mpo(3), identity_mpo(4))
