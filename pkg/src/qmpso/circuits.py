"""Layered two-qubit circuits on a chain, with MPS/MPO/dense evaluation.

A staircase layer walks the bonds 0..L-2 in ascending order; a brickwork
layer applies the even 0-based bonds first and then the odd ones (one
first-order Trotter step per layer).  Gates are 4x4 unitaries acting on
adjacent sites, stored per layer in application order.

Circuit evaluation is exact by construction: the MPS and MPO backends
raise CapabilityError instead of silently truncating.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import CapabilityError, CircuitFormatError, ShapeError
from .mpo import MatrixProductOperator, identity_mpo
from .mps import MatrixProductState
from .tfim import TfimParams, trotter_step_gates

SCHEMA_VERSION = "1"
KINDS = ("staircase", "brickwork")

# discarded weight above this in an exact evaluation means the bond
# budget was genuinely too small, not just cutoff noise
LOSSY_WEIGHT = 1e-20


@dataclass
class StaircaseCircuit:
    """Gate layers on a length-L chain.  ``layers[k]`` is a list of
    (bond, unitary) pairs in application order."""

    L: int
    kind: str
    layers: list[list[tuple[int, np.ndarray]]]

    def __post_init__(self) -> None:
        if self.L < 2:
            raise ValueError(f"StaircaseCircuit: need L >= 2, got {self.L}")
        if self.kind not in KINDS:
            raise ValueError(f"StaircaseCircuit: kind must be one of {KINDS}, got {self.kind!r}")
        for k, layer in enumerate(self.layers):
            for bond, u in layer:
                if not 0 <= bond < self.L - 1:
                    raise ValueError(f"StaircaseCircuit: layer {k} has bond {bond} "
                                     f"outside [0, {self.L - 1})")
                if np.asarray(u).shape != (4, 4):
                    raise ShapeError(f"StaircaseCircuit: layer {k} gate on bond {bond} "
                                     f"is not 4x4")

    @property
    def num_layers(self) -> int:
        return len(self.layers)

    @property
    def gates(self) -> list[tuple[int, np.ndarray]]:
        """Flat gate list in application order."""
        return [g for layer in self.layers for g in layer]

    @property
    def layer_boundaries(self) -> list[int]:
        """Cumulative gate counts; entry k is the index one past layer k."""
        out, acc = [], 0
        for layer in self.layers:
            acc += len(layer)
            out.append(acc)
        return out

    def gate_count(self) -> int:
        return sum(len(layer) for layer in self.layers)

    def copy(self) -> "StaircaseCircuit":
        return StaircaseCircuit(self.L, self.kind,
                                [[(b, u.copy()) for b, u in layer] for layer in self.layers])

    def adjoint_gates(self) -> list[tuple[int, np.ndarray]]:
        """Gates of the inverse circuit, in application order."""
        return [(b, u.conj().T) for b, u in reversed(self.gates)]


def haar_random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Gaussian matrix."""
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def new_staircase(L: int, num_layers: int, init: str = "identity",
                  seed: int | None = None) -> StaircaseCircuit:
    """Staircase ansatz of the given depth, gates all identity or Haar random."""
    if num_layers < 1:
        raise ValueError(f"new_staircase: need num_layers >= 1, got {num_layers}")
    if init == "identity":
        make = lambda: np.eye(4, dtype=complex)  # noqa: E731
    elif init == "random":
        rng = np.random.default_rng(seed)
        make = lambda: haar_random_unitary(4, rng)  # noqa: E731
    else:
        raise ValueError(f"new_staircase: init must be 'identity' or 'random', got {init!r}")
    layers = [[(b, make()) for b in range(L - 1)] for _ in range(num_layers)]
    return StaircaseCircuit(L, "staircase", layers)


def trotter_circuit(p: TfimParams, n_steps: int, dt: float | None = None) -> StaircaseCircuit:
    """First-order Trotter evolution as a brickwork circuit, one layer per step."""
    if n_steps < 1:
        raise ValueError(f"trotter_circuit: need n_steps >= 1, got {n_steps}")
    sched = trotter_step_gates(p, dt=dt)
    layer = [(b, g.copy()) for b, g in zip(sched.bonds, sched.gates)]
    layers = [[(b, g.copy()) for b, g in layer] for _ in range(n_steps)]
    return StaircaseCircuit(p.L, "brickwork", layers)


# -- evaluation -------------------------------------------------------


def apply_to_mps(circuit: StaircaseCircuit, psi0: MatrixProductState) -> MatrixProductState:
    """Circuit acting on a copy of ``psi0``.

    The state's own chi_max is the bond budget; if any gate would need a
    lossy truncation to respect it, a CapabilityError is raised (use
    chi_max=None, or >= 2^num_layers for a staircase, for exactness).
    """
    if psi0.L != circuit.L:
        raise ShapeError(f"apply_to_mps: circuit L={circuit.L}, state L={psi0.L}")
    psi = psi0.copy()
    for b, u in circuit.gates:
        w = psi.apply_two_site_gate(b, u)
        if w > LOSSY_WEIGHT:
            raise CapabilityError(
                f"apply_to_mps: chi_max={psi.chi_max} forces a lossy truncation "
                f"(weight {w:.3e}) at bond {b}; raise the bond budget")
    return psi


def apply_gate_statevector(vec: np.ndarray, gate: np.ndarray, bond: int,
                           L: int) -> np.ndarray:
    """Two-site gate on a dense state (site 0 most significant)."""
    v = vec.reshape(2 ** bond, 4, 2 ** (L - bond - 2))
    return np.einsum("ab,ibj->iaj", gate, v).reshape(-1)


def apply_to_statevector(circuit: StaircaseCircuit, vec: np.ndarray,
                         limit: int = 14) -> np.ndarray:
    if circuit.L > limit:
        raise CapabilityError(f"apply_to_statevector: L={circuit.L} exceeds dense "
                              f"limit {limit}")
    if vec.shape != (2 ** circuit.L,):
        raise ShapeError(f"apply_to_statevector: state has shape {vec.shape}, "
                         f"want ({2 ** circuit.L},)")
    out = vec.astype(complex)
    for b, u in circuit.gates:
        out = apply_gate_statevector(out, u, b, circuit.L)
    return out


def to_mpo(circuit: StaircaseCircuit, kappa_max: int | None = None) -> MatrixProductOperator:
    """Exact MPO of the circuit unitary.

    Default bond budget is 4^num_layers, which is always sufficient for
    staircase and brickwork layers; a smaller explicit budget raises
    CapabilityError as soon as it would lose weight.
    """
    budget = kappa_max if kappa_max is not None else 4 ** circuit.num_layers
    op = identity_mpo(circuit.L, kappa_max=budget)
    for b, u in circuit.gates:
        w = op.apply_two_site_gate(b, u, side="left")
        if w > LOSSY_WEIGHT:
            raise CapabilityError(
                f"to_mpo: kappa budget {budget} forces a lossy truncation "
                f"(weight {w:.3e}) at bond {b}")
    return op


# -- JSON interchange -------------------------------------------------


def _require(mapping: dict, field: str, where: str):
    if field not in mapping:
        raise CircuitFormatError(f"{where}: missing required field {field!r}")
    return mapping[field]


def serialize(circuit: StaircaseCircuit) -> str:
    layers = []
    for layer in circuit.layers:
        entries = []
        for b, u in layer:
            flat = [[float(np.real(x)), float(np.imag(x))] for x in np.asarray(u).ravel()]
            entries.append({"sites": [b, b + 1], "u": flat})
        layers.append(entries)
    doc = {"version": SCHEMA_VERSION, "L": circuit.L, "kind": circuit.kind,
           "layers": layers}
    return json.dumps(doc)


def deserialize(text: str) -> StaircaseCircuit:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CircuitFormatError(f"circuit JSON is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise CircuitFormatError("circuit JSON: top level must be an object")
    version = _require(doc, "version", "circuit JSON")
    if version != SCHEMA_VERSION:
        raise CircuitFormatError(
            f"circuit JSON: unsupported version {version!r} (this build reads "
            f"version {SCHEMA_VERSION!r}; re-export the circuit or upgrade)")
    L = _require(doc, "L", "circuit JSON")
    kind = _require(doc, "kind", "circuit JSON")
    raw_layers = _require(doc, "layers", "circuit JSON")
    if not isinstance(L, int) or L < 2:
        raise CircuitFormatError(f"circuit JSON: field 'L' must be an integer >= 2, got {L!r}")
    if kind not in KINDS:
        raise CircuitFormatError(f"circuit JSON: field 'kind' must be one of {KINDS}, "
                                 f"got {kind!r}")
    if not isinstance(raw_layers, list):
        raise CircuitFormatError("circuit JSON: field 'layers' must be a list")
    layers = []
    for k, raw_layer in enumerate(raw_layers):
        if not isinstance(raw_layer, list):
            raise CircuitFormatError(f"layer {k}: must be a list of gates")
        layer = []
        for j, raw_gate in enumerate(raw_layer):
            where = f"layer {k}, gate {j}"
            if not isinstance(raw_gate, dict):
                raise CircuitFormatError(f"{where}: must be an object")
            sites = _require(raw_gate, "sites", where)
            flat = _require(raw_gate, "u", where)
            if (not isinstance(sites, list) or len(sites) != 2
                    or sites[1] != sites[0] + 1 or not 0 <= sites[0] < L - 1):
                raise CircuitFormatError(f"{where}: field 'sites' must be adjacent "
                                         f"[i, i+1] with 0 <= i < {L - 1}, got {sites!r}")
            if not isinstance(flat, list) or len(flat) != 16:
                raise CircuitFormatError(f"{where}: field 'u' must hold 16 entries")
            vals = []
            for entry in flat:
                if (not isinstance(entry, list) or len(entry) != 2
                        or not all(isinstance(x, (int, float)) for x in entry)):
                    raise CircuitFormatError(f"{where}: entries of 'u' must be "
                                             f"[re, im] number pairs")
                vals.append(entry[0] + 1j * entry[1])
            u = np.array(vals, dtype=complex).reshape(4, 4)
            if not np.all(np.isfinite(u)):
                raise CircuitFormatError(f"{where}: field 'u' contains non-finite values")
            layer.append((sites[0], u))
        layers.append(layer)
    return StaircaseCircuit(L, kind, layers)


def save(circuit: StaircaseCircuit, path) -> None:
    with open(path, "w") as f:
        f.write(serialize(circuit))


def load(path) -> StaircaseCircuit:
    with open(path) as f:
        return deserialize(f.read())
