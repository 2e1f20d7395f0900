"""Matrix product operators for propagators, stored in vectorized form.

An MPO site tensor (kappa_l, 2, 2, kappa_r) with legs (left, out, in,
right) is kept internally as an MPS site tensor (kappa_l, 4, kappa_r)
with the physical index flattened as out*2 + in.  Vectorization turns
left gate multiplication into gate (x) identity acting on the d=4 chain,
so all gauge and truncation machinery is shared with the state code.

Truncation here uses the unnormalized Frobenius inner product: discarded
weight is never renormalized away, it simply lowers Tr(U^dag V)/2^L.
"""

from __future__ import annotations

import warnings

import numpy as np

from .errors import CapabilityError, ShapeError
from .mps import MatrixProductState, overlap
from .tfim import TfimParams, trotter_step_gates

DENSE_LIMIT = 10

_ID2 = np.eye(2)


def lift_left(gate: np.ndarray) -> np.ndarray:
    """Lift a two-site gate to the vectorized chain as left multiplication:
    vec(g U) = (g (x) 1) vec(U).  Returns a 16x16 matrix on two d=4 sites.
    """
    g = np.asarray(gate).reshape(2, 2, 2, 2)  # o1 o2 p1 p2
    lifted = np.einsum("abcd,ef,gh->aebgcfdh", g, _ID2, _ID2)
    return lifted.reshape(16, 16)


def lift_right(gate: np.ndarray) -> np.ndarray:
    """Right multiplication: vec(U g) = (1 (x) g^T) vec(U)."""
    g = np.asarray(gate).reshape(2, 2, 2, 2)  # j1 j2 i1 i2
    lifted = np.einsum("jkab,op,qr->oaqbpjrk", g, _ID2, _ID2)
    return lifted.reshape(16, 16)


class MatrixProductOperator:
    def __init__(self, vec: MatrixProductState, kappa_max: int | None = None):
        if vec.d != 4:
            raise ShapeError("MatrixProductOperator: vectorized chain must have d=4")
        self.vec = vec
        self.kappa_max = kappa_max
        vec.chi_max = kappa_max

    @property
    def L(self) -> int:
        return self.vec.L

    def kappa_dims(self) -> list[int]:
        return self.vec.bond_dims()

    def max_kappa(self) -> int:
        return self.vec.max_bond()

    def copy(self) -> "MatrixProductOperator":
        return MatrixProductOperator(self.vec.copy(), self.kappa_max)

    def site_tensor(self, n: int) -> np.ndarray:
        """Rank-4 view (kappa_l, out, in, kappa_r) of site n."""
        t = self.vec.tensors[n]
        return t.reshape(t.shape[0], 2, 2, t.shape[2])

    def frobenius_norm(self) -> float:
        return self.vec.norm()

    def apply_two_site_gate(self, bond: int, gate: np.ndarray,
                            side: str = "left") -> float:
        """Multiply by a two-site gate on (bond, bond+1); returns the
        discarded Frobenius weight.  ``side="left"`` composes the gate
        after the operator (g U), ``"right"`` before it (U g).
        """
        if gate.shape != (4, 4):
            raise ShapeError(f"apply_two_site_gate: gate shape {gate.shape}, want (4, 4)")
        if side == "left":
            lifted = lift_left(gate)
        elif side == "right":
            lifted = lift_right(gate)
        else:
            raise ValueError(f"apply_two_site_gate: side must be 'left' or 'right', got {side!r}")
        return self.vec.apply_two_site_gate(bond, lifted, renormalize=False,
                                            chi_max=self.kappa_max)

    def to_dense(self, limit: int = DENSE_LIMIT) -> np.ndarray:
        """Contract to a 2^L x 2^L matrix (site 0 most significant)."""
        if self.L > limit:
            raise CapabilityError(f"to_dense: L={self.L} exceeds dense limit {limit}")
        from .mps import to_statevector

        flat = to_statevector(self.vec, limit=2 * limit)
        L = self.L
        arr = flat.reshape((2,) * (2 * L))  # o0 i0 o1 i1 ...
        perm = list(range(0, 2 * L, 2)) + list(range(1, 2 * L, 2))
        return arr.transpose(perm).reshape(2 ** L, 2 ** L)


def identity_mpo(L: int, kappa_max: int | None = None) -> MatrixProductOperator:
    """The identity operator: L parallel lines, all bonds of extent 1."""
    if L < 2:
        raise ValueError(f"identity_mpo: need L >= 2, got {L}")
    site = np.eye(2, dtype=complex).reshape(1, 4, 1)
    vec = MatrixProductState([site.copy() for _ in range(L)], chi_max=kappa_max, center=0)
    return MatrixProductOperator(vec, kappa_max=kappa_max)


def frobenius_fidelity(u: MatrixProductOperator, v: MatrixProductOperator) -> complex:
    """Tr(U^dag V) / 2^L, the normalized Frobenius overlap."""
    if u.L != v.L:
        raise ShapeError("frobenius_fidelity: operators live on different chains")
    return overlap(v.vec, u.vec) / 2 ** u.L


def trotter_propagator_mpo(p: TfimParams, t: float, kappa_max: int,
                           dt: float | None = None) -> MatrixProductOperator:
    """First-order Trotter propagator for time ``t`` as a kappa-capped MPO.

    Gates are composed onto the identity from the left, one step at a
    time, with unnormalized truncation at ``kappa_max``.
    """
    if t < 0:
        raise ValueError(f"trotter_propagator_mpo: t must be >= 0, got {t}")
    step = p.dt if dt is None else dt
    n_steps = int(round(t / step))
    op = identity_mpo(p.L, kappa_max=kappa_max)
    sched = trotter_step_gates(p, dt=step)
    for _ in range(n_steps):
        for bond, gate in zip(sched.bonds, sched.gates):
            op.apply_two_site_gate(bond, gate, side="left")
    return op


def max_useful_layers(L: int) -> int:
    """Depth beyond which a staircase cannot add operator entanglement
    at the given chain size: floor(log4 2^(floor(L/2) - 1)), clamped to 1.
    """
    if L < 2:
        raise ValueError(f"max_useful_layers: need L >= 2, got {L}")
    layers = (L // 2 - 1) // 2
    if layers < 1:
        warnings.warn(f"max_useful_layers: bound is 0 at L={L}; clamping to 1")
        return 1
    return layers
