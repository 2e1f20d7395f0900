"""Cartan (KAK) decomposition of two-qubit unitaries.

Any U in U(4) factors as

    U = phase * (post0 (x) post1) * exp(-i sum_j theta_j P_j (x) P_j) * (pre0 (x) pre1)

with P_j in {X, Y, Z} and canonical angles reduced into the Weyl chamber
pi/4 >= theta_xx >= theta_yy >= |theta_zz|.  The algorithm conjugates to
the magic basis, where local unitaries become real orthogonal matrices,
simultaneously diagonalizes the symmetric part, and normalizes the
angles with compensating Pauli factors absorbed into the local layers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericError, ShapeError, ValidationError
from .tfim import ID2, PAULI_X, PAULI_Y, PAULI_Z

MAGIC = np.array([[1, 0, 0, 1j],
                  [0, 1j, 1, 0],
                  [0, 1j, -1, 0],
                  [1, 0, 0, -1j]], dtype=complex) / np.sqrt(2)

_PAULIS = (PAULI_X, PAULI_Y, PAULI_Z)

# diag(theta) in the magic basis <-> Pauli-pair coefficients k:
# theta = _DIAG_MAP @ (k0, kx, ky, kz)
_DIAG_MAP = np.stack(
    [np.real(np.diag(MAGIC.conj().T @ np.kron(p, p) @ MAGIC))
     for p in (ID2,) + _PAULIS], axis=1)
_DIAG_MAP_INV = np.linalg.inv(_DIAG_MAP)


def canonical_gate(angles) -> np.ndarray:
    """exp(-i (a XX + b YY + c ZZ)) as a dense 4x4 unitary."""
    a, b, c = angles
    gen = (a * np.kron(PAULI_X, PAULI_X) + b * np.kron(PAULI_Y, PAULI_Y)
           + c * np.kron(PAULI_Z, PAULI_Z))
    w, v = np.linalg.eigh(gen)
    return (v * np.exp(-1j * w)) @ v.conj().T


@dataclass
class KakFactors:
    pre: tuple[np.ndarray, np.ndarray]
    canonical_angles: np.ndarray
    post: tuple[np.ndarray, np.ndarray]
    global_phase: complex

    def reconstruct(self) -> np.ndarray:
        mid = canonical_gate(self.canonical_angles)
        return (self.global_phase * np.kron(self.post[0], self.post[1])
                @ mid @ np.kron(self.pre[0], self.pre[1]))


def _common_real_eigenbasis(a: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Real orthogonal basis diagonalizing a complex symmetric unitary.

    Re(a) and Im(a) are commuting real symmetric matrices; degenerate
    blocks of Re(a) are resolved against Im(a).
    """
    xr, xi = a.real, a.imag
    w, v = np.linalg.eigh(xr)
    basis = np.empty_like(v)
    i = 0
    while i < len(w):
        j = i + 1
        while j < len(w) and w[j] - w[i] < tol:
            j += 1
        block = v[:, i:j]
        if j - i > 1:
            _, vi = np.linalg.eigh(block.T @ xi @ block)
            block = block @ vi
        basis[:, i:j] = block
        i = j
    return basis


def _orthogonal_split(um: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """um = ql @ diag(exp(i theta)) @ qr.T with ql, qr in SO(4)."""
    a = um @ um.T
    ql = _common_real_eigenbasis(a)
    if np.linalg.det(ql) < 0:
        ql[:, 0] = -ql[:, 0]
    lam = np.diag(ql.T @ a @ ql)
    theta = np.angle(lam) / 2
    qr_t = np.diag(np.exp(-1j * theta)) @ ql.T @ um
    if np.max(np.abs(qr_t.imag)) > 1e-8:
        raise NumericError("kak_decompose: orthogonal split failed to produce a "
                           "real factor; input may be far from unitary")
    qr_t = qr_t.real.copy()
    if np.linalg.det(qr_t) < 0:
        # shifting theta_0 by pi flips the sign of row 0, restoring det +1
        theta[0] += np.pi
        qr_t[0] = -qr_t[0]
    return theta, ql, qr_t


def _kron_factor(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split an exact tensor product of unitaries into its 2x2 factors."""
    res = m.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
    u, s, vh = np.linalg.svd(res)
    if s[1] > 1e-8:
        raise ValidationError("kak_decompose: local factor is not a tensor product")
    a = (u[:, 0] * np.sqrt(s[0])).reshape(2, 2)
    b = (vh[0] * np.sqrt(s[0])).reshape(2, 2)
    scale = np.sqrt(np.abs(np.linalg.det(a)))
    return a / scale, b * scale


def _rot(p: np.ndarray) -> np.ndarray:
    """exp(-i pi/4 P), the quarter turn about a Pauli axis."""
    return (np.cos(np.pi / 4) * ID2 - 1j * np.sin(np.pi / 4) * p).astype(complex)


def kak_decompose(gate: np.ndarray) -> KakFactors:
    gate = np.asarray(gate, dtype=complex)
    if gate.shape != (4, 4):
        raise ShapeError(f"kak_decompose: expected a 4x4 matrix, got {gate.shape}")
    if np.max(np.abs(gate @ gate.conj().T - np.eye(4))) > 1e-9:
        raise ValidationError("kak_decompose: input is not unitary to 1e-9")

    um = MAGIC.conj().T @ gate @ MAGIC
    theta, ql, qr_t = _orthogonal_split(um)

    k = _DIAG_MAP_INV @ theta  # (k0, kx, ky, kz): um middle = exp(i sum k P P)
    phase = np.exp(1j * k[0])
    angles = -k[1:]

    post = list(_kron_factor(MAGIC @ ql @ MAGIC.conj().T))
    pre = list(_kron_factor(MAGIC @ qr_t @ MAGIC.conj().T))

    _weyl_reduce(angles, post, pre, phase_box := [phase])
    return KakFactors(pre=(pre[0], pre[1]), canonical_angles=np.asarray(angles),
                      post=(post[0], post[1]), global_phase=phase_box[0])


def _weyl_reduce(angles, post, pre, phase_box) -> None:
    """Normalize angles into pi/4 >= a >= b >= |c| in place, absorbing the
    compensating factors into post/pre and the global phase."""

    def shift(j: int) -> None:
        # theta_j -> theta_j - m*pi/2 into (-pi/4, pi/4]
        m = int(np.ceil((angles[j] - np.pi / 4) / (np.pi / 2) - 1e-12))
        if m == 0:
            return
        angles[j] -= m * np.pi / 2
        p = _PAULIS[j]
        pm = np.linalg.matrix_power(p, m % 4)
        post[0] = post[0] @ pm
        post[1] = post[1] @ pm
        phase_box[0] *= (-1j) ** m

    def swap(j: int, k: int) -> None:
        # conjugate by r (x) r to exchange axes j and k; r rotates about
        # the remaining axis l
        l = 3 - j - k
        r = _rot(_PAULIS[l])
        post[0] = post[0] @ r.conj().T
        post[1] = post[1] @ r.conj().T
        pre[0] = r @ pre[0]
        pre[1] = r @ pre[1]
        angles[j], angles[k] = angles[k], angles[j]

    def flip(j: int, k: int) -> None:
        # conjugate by sigma_l (x) 1 to flip the signs of angles j and k
        l = 3 - j - k
        p = _PAULIS[l]
        post[0] = post[0] @ p
        pre[0] = p @ pre[0]
        angles[j] = -angles[j]
        angles[k] = -angles[k]

    def sort_desc() -> None:
        for j, k in ((0, 1), (1, 2), (0, 1)):
            if angles[j] < angles[k]:
                swap(j, k)

    for j in range(3):
        shift(j)
    for _ in range(4):
        sort_desc()
        if angles[0] < 0:
            flip(0, 1)
            continue
        if angles[1] < 0:
            flip(1, 2)
            continue
        if -angles[2] > angles[1] + 1e-15:
            flip(1, 2)
            continue
        break
    else:
        raise NumericError("kak_decompose: Weyl-chamber reduction did not settle")


def staircase_angles(circuit) -> list[tuple[int, int, float, float, float]]:
    """Interaction angles (theta_xx, theta_yy, theta_zz) for every gate
    of a circuit, in circuit order: rows (layer, bond, ax, ay, az).

    This is the hardware-facing export: each two-qubit gate equals
    single-qubit dressing around exp(-i sum_P theta_P P(x)P), i.e. three
    axis rotations R_XX R_YY R_ZZ.
    """
    rows = []
    for li, layer in enumerate(circuit.layers):
        for bond, u in layer:
            f = kak_decompose(u)
            ax, ay, az = (float(a) for a in f.canonical_angles)
            rows.append((li, bond, ax, ay, az))
    return rows
