"""Dense reference evolution for small chains.

Everything here works on full statevectors (site 0 = most significant
bit, |0> = Z eigenvalue +1) and exists to anchor the tensor-network
paths: exact eigendecomposition propagation, fine-step Trotter
references, and local observables.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse

from .circuits import apply_gate_statevector
from .errors import CapabilityError, ValidationError
from .tfim import TfimParams, local_terms, neel_product_state, trotter_step_gates

DENSE_LIMIT = 14


def product_statevector(labels: list[int]) -> np.ndarray:
    L = len(labels)
    if L > DENSE_LIMIT:
        raise CapabilityError(f"product_statevector: L={L} exceeds dense limit {DENSE_LIMIT}")
    idx = 0
    for lab in labels:
        if lab not in (0, 1):
            raise ValidationError(f"product_statevector: label {lab} not a qubit level")
        idx = (idx << 1) | lab
    vec = np.zeros(2 ** L, dtype=complex)
    vec[idx] = 1.0
    return vec


def dense_hamiltonian(p: TfimParams) -> np.ndarray:
    """Sum of the embedded bond terms, as a real symmetric matrix."""
    if p.L > DENSE_LIMIT:
        raise CapabilityError(f"dense_hamiltonian: L={p.L} exceeds dense limit {DENSE_LIMIT}")
    h = scipy.sparse.csr_matrix((2 ** p.L, 2 ** p.L), dtype=float)
    for b, term in enumerate(local_terms(p)):
        left = scipy.sparse.identity(2 ** b, format="csr")
        right = scipy.sparse.identity(2 ** (p.L - b - 2), format="csr")
        h = h + scipy.sparse.kron(scipy.sparse.kron(left, term.real), right, format="csr")
    return h.toarray()


class ExactPropagator:
    """e^{-iHt} through one cached eigendecomposition."""

    def __init__(self, p: TfimParams):
        self.p = p
        ham = dense_hamiltonian(p)
        self.evals, self.evecs = np.linalg.eigh(ham)

    def evolve(self, vec: np.ndarray, t: float) -> np.ndarray:
        if vec.shape != (2 ** self.p.L,):
            raise ValidationError(f"ExactPropagator.evolve: vector length {vec.shape} "
                                  f"does not match L={self.p.L}")
        coeff = self.evecs.conj().T @ vec
        return self.evecs @ (np.exp(-1j * self.evals * t) * coeff)

    def quench_state(self, t: float, labels: list[int] | None = None) -> np.ndarray:
        labels = labels if labels is not None else neel_product_state(self.p.L)
        return self.evolve(product_statevector(labels), t)


class TrotterStatevector:
    """Incremental dense first-order Trotter evolution on the dt grid."""

    def __init__(self, p: TfimParams, dt: float | None = None,
                 psi0: np.ndarray | None = None):
        if p.L > DENSE_LIMIT:
            raise CapabilityError(f"TrotterStatevector: L={p.L} exceeds dense limit {DENSE_LIMIT}")
        self.p = p
        self.dt = float(dt) if dt is not None else p.dt
        self.vec = psi0.astype(complex).copy() if psi0 is not None \
            else product_statevector(neel_product_state(p.L))
        self._sched = trotter_step_gates(p, self.dt)
        self._steps = 0

    @property
    def t(self) -> float:
        return self._steps * self.dt

    def advance_to(self, t: float) -> np.ndarray:
        k = int(round((t - self.t) / self.dt))
        if k < 0 or abs(t - self.t - k * self.dt) > 1e-9:
            raise ValidationError(f"advance_to: t={t} is behind or off the "
                                  f"dt={self.dt} grid from t={self.t}")
        for _ in range(k):
            for b, g in zip(self._sched.bonds, self._sched.gates):
                self.vec = apply_gate_statevector(self.vec, g, b, self.p.L)
            self._steps += 1
        return self.vec


def fine_trotter_state(p: TfimParams, t: float, dt: float = 0.01) -> np.ndarray:
    """One-shot dense Trotter state at resolution dt (reference quality)."""
    return TrotterStatevector(p, dt=dt).advance_to(t)


def local_magnetization(vec: np.ndarray) -> np.ndarray:
    """<Z_i> for every site, from the measurement distribution."""
    n = vec.shape[0]
    L = int(round(np.log2(n)))
    if 2 ** L != n:
        raise ValidationError(f"local_magnetization: length {n} is not a power of 2")
    probs = np.abs(vec) ** 2
    t = probs.reshape((2,) * L)
    out = np.empty(L)
    for i in range(L):
        rest = tuple(j for j in range(L) if j != i)
        pi = t.sum(axis=rest) if rest else t
        out[i] = pi[0] - pi[1]
    return out
