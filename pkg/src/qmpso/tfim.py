"""Transverse-field Ising chain: H = -J sum X_i X_{i+1} - h sum Z_i.

Open boundaries.  The field term is split evenly onto the two bonds
touching each bulk site so that the bond terms sum back to H exactly;
edge sites put their full field weight on their single bond.

Indexing is 0-based throughout the package: bond ``b`` couples sites
``b`` and ``b+1``.  A first-order Trotter step applies the gates on
even 0-based bonds first (bonds 0, 2, ... — the odd bonds when counting
from 1), then the odd 0-based bonds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensors import herm_exp

ID2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class TfimParams:
    """Chain length, couplings and the Trotter time step."""

    L: int
    J: float = 1.0
    h: float = 1.0
    dt: float = 0.01

    def __post_init__(self) -> None:
        if self.L < 2:
            raise ValueError(f"TfimParams: need L >= 2, got L={self.L}")
        if self.dt <= 0:
            raise ValueError(f"TfimParams: need dt > 0, got dt={self.dt}")

    @property
    def n_bonds(self) -> int:
        return self.L - 1


def local_terms(p: TfimParams) -> list[np.ndarray]:
    """The L-1 two-site bond Hamiltonians h_b (4x4, Hermitian).

    sum_b embed(h_b) equals the full dense H; the Z weight on a site is
    halved when the site is shared by two bonds.
    """
    xx = np.kron(PAULI_X, PAULI_X)
    z_left = np.kron(PAULI_Z, ID2)
    z_right = np.kron(ID2, PAULI_Z)
    terms = []
    for b in range(p.n_bonds):
        w_left = 1.0 if b == 0 else 0.5
        w_right = 1.0 if b == p.n_bonds - 1 else 0.5
        terms.append(-p.J * xx - p.h * (w_left * z_left + w_right * z_right))
    return terms


@dataclass(frozen=True)
class TrotterSchedule:
    """One first-order Trotter step as an ordered gate list.

    ``bonds[i]`` is the 0-based bond the unitary ``gates[i]`` acts on.
    Application order is list order (even 0-based bonds ascending, then
    odd 0-based bonds ascending).
    """

    bonds: tuple[int, ...]
    gates: tuple[np.ndarray, ...]
    dt: float


def trotter_step_gates(p: TfimParams, dt: float | None = None) -> TrotterSchedule:
    """Gates exp(-i h_b dt) for one Trotter step, in application order."""
    step = p.dt if dt is None else dt
    terms = local_terms(p)
    order = list(range(0, p.n_bonds, 2)) + list(range(1, p.n_bonds, 2))
    gates = tuple(herm_exp(terms[b], -1j * step) for b in order)
    return TrotterSchedule(bonds=tuple(order), gates=gates, dt=step)


def neel_product_state(L: int) -> list[int]:
    """Alternating computational-basis labels [0, 1, 0, 1, ...].

    0 is spin-up (Z eigenvalue +1), and site 0 is up.
    """
    if L < 1:
        raise ValueError(f"neel_product_state: need L >= 1, got {L}")
    return [n % 2 for n in range(L)]
