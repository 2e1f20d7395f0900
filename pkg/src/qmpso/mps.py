"""Matrix product states with an explicit orthogonality center, plus TEBD.

Site tensors have shape (chi_left, d, chi_right) with chi_0 = chi_L = 1.
The physical dimension d is 2 for spin chains; d=4 is used by the
operator layer, which stores vectorized operators in the same container.

Gauge bookkeeping: ``center`` is the site holding the norm; tensors left
of it are left-isometric, tensors right of it right-isometric.  Center
moves are exact SVD gauge moves and never change the encoded state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeError
from .tensors import DEFAULT_CUTOFF, svd_truncated
from .tfim import TfimParams, trotter_step_gates

ENTROPY_FLOOR = 1e-15  # Schmidt weights below this contribute no entropy


class MatrixProductState:
    def __init__(self, tensors: list[np.ndarray], chi_max: int | None = None,
                 center: int | None = None):
        if not tensors:
            raise ShapeError("MatrixProductState: empty tensor list")
        d = tensors[0].shape[1]
        if tensors[0].shape[0] != 1 or tensors[-1].shape[2] != 1:
            raise ShapeError("MatrixProductState: boundary bonds must have extent 1")
        for n, t in enumerate(tensors):
            if t.ndim != 3:
                raise ShapeError(f"MatrixProductState: tensor {n} has rank {t.ndim}, want 3")
            if t.shape[1] != d:
                raise ShapeError(f"MatrixProductState: tensor {n} has physical dim "
                                 f"{t.shape[1]}, want {d}")
            if n + 1 < len(tensors) and t.shape[2] != tensors[n + 1].shape[0]:
                raise ShapeError(f"MatrixProductState: bond mismatch between sites {n} and {n+1}")
        self.tensors = [np.asarray(t, dtype=complex) for t in tensors]
        self.chi_max = chi_max
        self.center = center

    # -- basic queries ------------------------------------------------

    @property
    def L(self) -> int:
        return len(self.tensors)

    @property
    def d(self) -> int:
        return self.tensors[0].shape[1]

    def bond_dims(self) -> list[int]:
        """Internal bond extents, length L-1."""
        return [t.shape[2] for t in self.tensors[:-1]]

    def max_bond(self) -> int:
        return max(self.bond_dims(), default=1)

    def copy(self) -> "MatrixProductState":
        out = MatrixProductState.__new__(MatrixProductState)
        out.tensors = [t.copy() for t in self.tensors]
        out.chi_max = self.chi_max
        out.center = self.center
        return out

    def norm(self) -> float:
        return float(np.sqrt(np.real(overlap(self, self))))

    # -- gauge moves --------------------------------------------------

    def _shift_center_right(self, n: int) -> None:
        chi_l, d, chi_r = self.tensors[n].shape
        res = svd_truncated(self.tensors[n].reshape(chi_l * d, chi_r), cutoff=0.0)
        self.tensors[n] = res.u.reshape(chi_l, d, res.rank)
        sv = res.s[:, None] * res.vh
        self.tensors[n + 1] = np.tensordot(sv, self.tensors[n + 1], axes=(1, 0))

    def _shift_center_left(self, n: int) -> None:
        chi_l, d, chi_r = self.tensors[n].shape
        res = svd_truncated(self.tensors[n].reshape(chi_l, d * chi_r), cutoff=0.0)
        self.tensors[n] = res.vh.reshape(res.rank, d, chi_r)
        us = res.u * res.s[None, :]
        self.tensors[n - 1] = np.tensordot(self.tensors[n - 1], us, axes=(2, 0))

    def canonicalize(self, center: int = 0) -> "MatrixProductState":
        """Establish mixed-canonical gauge with the norm at ``center``.

        Mutates the gauge in place (the encoded state is unchanged) and
        returns self.
        """
        if not 0 <= center < self.L:
            raise ValueError(f"canonicalize: center {center} out of range for L={self.L}")
        if self.center is None:
            for n in range(self.L - 1):
                self._shift_center_right(n)
            self.center = self.L - 1
        self.move_center(center)
        return self

    def move_center(self, site: int) -> None:
        if self.center is None:
            self.canonicalize(site)
            return
        while self.center < site:
            self._shift_center_right(self.center)
            self.center += 1
        while self.center > site:
            self._shift_center_left(self.center)
            self.center -= 1

    # -- gates ----------------------------------------------------------

    def apply_two_site_gate(self, bond: int, gate: np.ndarray,
                            renormalize: bool = True,
                            chi_max: int | None = None,
                            cutoff: float = DEFAULT_CUTOFF) -> float:
        """Apply a (d^2 x d^2) gate to sites (bond, bond+1); returns the
        discarded Schmidt weight.  The center ends on site bond+1.

        ``chi_max=None`` defers to the state's own cap (which may itself
        be None, meaning rank-limited only by tensor extents).
        """
        d = self.d
        if not 0 <= bond < self.L - 1:
            raise ValueError(f"apply_two_site_gate: bond {bond} out of range")
        if gate.shape != (d * d, d * d):
            raise ShapeError(f"apply_two_site_gate: gate shape {gate.shape}, "
                             f"want {(d * d, d * d)}")
        if self.center is None:
            self.canonicalize(bond)
        elif self.center < bond:
            self.move_center(bond)
        elif self.center > bond + 1:
            self.move_center(bond + 1)

        theta = np.tensordot(self.tensors[bond], self.tensors[bond + 1], axes=(2, 0))
        chi_l, _, _, chi_r = theta.shape
        g = gate.reshape(d, d, d, d)
        theta = np.tensordot(g, theta, axes=([2, 3], [1, 2]))  # o1 o2 chi_l chi_r
        theta = theta.transpose(2, 0, 1, 3).reshape(chi_l * d, d * chi_r)

        cap = chi_max if chi_max is not None else self.chi_max
        res = svd_truncated(theta, max_rank=cap, cutoff=cutoff)
        s = res.s
        if renormalize:
            s = s / np.linalg.norm(s)
        self.tensors[bond] = res.u.reshape(chi_l, d, res.rank)
        self.tensors[bond + 1] = (s[:, None] * res.vh).reshape(res.rank, d, chi_r)
        self.center = bond + 1
        return res.truncation_weight


def from_product(labels: list[int], chi_max: int | None = None,
                 d: int = 2) -> MatrixProductState:
    """Product state |labels[0], labels[1], ...> as a bond-1 MPS."""
    tensors = []
    for lab in labels:
        if not 0 <= lab < d:
            raise ValueError(f"from_product: label {lab} outside [0, {d})")
        t = np.zeros((1, d, 1), dtype=complex)
        t[0, lab, 0] = 1.0
        tensors.append(t)
    return MatrixProductState(tensors, chi_max=chi_max, center=0)


def overlap(psi: MatrixProductState, phi: MatrixProductState) -> complex:
    """<phi|psi> by left-to-right transfer contraction."""
    if psi.L != phi.L or psi.d != phi.d:
        raise ShapeError("overlap: states live on different chains")
    t = np.ones((1, 1), dtype=complex)  # (psi bond, phi bond)
    for n in range(psi.L):
        t = np.tensordot(t, psi.tensors[n], axes=(0, 0))        # (chi_phi, d, chi_psi')
        t = np.tensordot(t, phi.tensors[n].conj(), axes=([0, 1], [0, 1]))
    return complex(t[0, 0])


def schmidt_values(psi: MatrixProductState, cut: int) -> np.ndarray:
    """Schmidt values across the bipartition [0..cut-1]|[cut..L-1]."""
    if not 1 <= cut < psi.L:
        raise ValueError(f"schmidt_values: cut {cut} out of range for L={psi.L}")
    psi.move_center(cut - 1)
    chi_l, d, chi_r = psi.tensors[cut - 1].shape
    res = svd_truncated(psi.tensors[cut - 1].reshape(chi_l * d, chi_r), cutoff=0.0)
    return res.s


def entropy_vn(psi: MatrixProductState, cut: int) -> float:
    """Von Neumann entanglement entropy in bits at the given cut."""
    lam2 = schmidt_values(psi, cut) ** 2
    total = lam2.sum()
    if total <= 0:
        raise ValueError("entropy_vn: state has zero norm")
    lam2 = lam2 / total
    lam2 = lam2[lam2 > ENTROPY_FLOOR]
    return float(-np.sum(lam2 * np.log2(lam2)))


def to_statevector(psi: MatrixProductState, limit: int = 14) -> np.ndarray:
    """Contract to a dense vector (site 0 is the most significant digit)."""
    from .errors import CapabilityError

    if psi.L > limit:
        raise CapabilityError(f"to_statevector: L={psi.L} exceeds dense limit {limit}")
    vec = np.ones((1, 1), dtype=complex)
    for t in psi.tensors:
        vec = np.tensordot(vec, t, axes=(1, 0))
        vec = vec.reshape(vec.shape[0] * vec.shape[1], vec.shape[2])
    return vec[:, 0]


@dataclass
class EntropyTrace:
    """Half-chain (or chosen-cut) entropy sampled after every TEBD step."""

    times: np.ndarray
    entropy: np.ndarray
    cut: int

    def write_csv(self, path) -> None:
        with open(path, "w") as f:
            f.write("t,S_vN,cut\n")
            for t, s in zip(self.times, self.entropy):
                f.write(f"{t!r},{s!r},{self.cut}\n")


@dataclass
class TebdResult:
    final: MatrixProductState
    trace: EntropyTrace
    snapshots: list[tuple[float, MatrixProductState]] = field(default_factory=list)
    truncation_weight_total: float = 0.0
    truncation_weight_max: float = 0.0


def tebd_evolve(psi0: MatrixProductState, p: TfimParams, t_final: float,
                entropy_cut: int | None = None,
                snapshot_every: int = 10) -> TebdResult:
    """First-order Trotter evolution of a copy of ``psi0`` to ``t_final``.

    One step applies the even 0-based bond gates (ascending), then the
    odd ones.  Entropy at ``entropy_cut`` (default L//2) is recorded at
    every step; state snapshots are kept every ``snapshot_every`` steps
    (0 disables snapshots; the t=0 state is always included).
    """
    if t_final < 0:
        raise ValueError(f"tebd_evolve: t_final must be >= 0, got {t_final}")
    psi = psi0.copy()
    cut = entropy_cut if entropy_cut is not None else psi.L // 2
    sched = trotter_step_gates(p)
    n_steps = int(round(t_final / p.dt))

    times = [0.0]
    entropies = [entropy_vn(psi, cut)]
    snapshots = [(0.0, psi.copy())] if snapshot_every else []
    w_total = 0.0
    w_max = 0.0
    for step in range(1, n_steps + 1):
        for bond, gate in zip(sched.bonds, sched.gates):
            w = psi.apply_two_site_gate(bond, gate)
            w_total += w
            w_max = max(w_max, w)
        t = step * p.dt
        times.append(t)
        entropies.append(entropy_vn(psi, cut))
        if snapshot_every and (step % snapshot_every == 0):
            snapshots.append((t, psi.copy()))
    trace = EntropyTrace(np.array(times), np.array(entropies), cut)
    return TebdResult(final=psi, trace=trace, snapshots=snapshots,
                      truncation_weight_total=w_total, truncation_weight_max=w_max)


def t_max_detect(trace: EntropyTrace, chi: int, margin: float = 0.25) -> float:
    """First time the trace reaches log2(chi) - margin bits.

    A capped trace approaches its ceiling asymptotically and, once the
    cap nears the physical entropy peak, may stop short of it entirely;
    the default margin is wide enough that detection fires on every
    saturating curve.  Returns the last grid time if the threshold is
    never reached.
    """
    if chi < 2:
        raise ValueError(f"t_max_detect: need chi >= 2, got {chi}")
    threshold = np.log2(chi) - margin
    hit = np.nonzero(trace.entropy >= threshold)[0]
    if len(hit) == 0:
        return float(trace.times[-1])
    return float(trace.times[hit[0]])
