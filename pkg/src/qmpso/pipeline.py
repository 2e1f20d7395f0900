"""Long-time hybrid evolution: schedule arithmetic, circuit composition,
and the dense simulation drivers shared by the experiment runners.

A target time decomposes on the integer dt grid as
t = t_max_mps + M * t_max_mpo + delta_t with 0 <= delta_t < t_max_mpo;
the composed circuit is the state-preparation staircase followed by M
propagator blocks and one residue block.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuits import StaircaseCircuit, apply_to_statevector
from .compiler import CompileReport, SweepConfig, qmps_trajectory, qmpo_compile
from .config import RunConfig
from .errors import ValidationError
from .exact import TrotterStatevector, product_statevector
from .mpo import trotter_propagator_mpo
from .mps import from_product, to_statevector
from .noise import NoiseModel, NoisyState, alpha
from .tfim import TfimParams, neel_product_state, trotter_step_gates


def _grid_steps(t: float, dt: float, what: str) -> int:
    k = int(round(t / dt))
    if k < 0 or abs(t - k * dt) > 1e-9:
        raise ValidationError(f"{what}={t} does not sit on the dt={dt} grid")
    return k


@dataclass(frozen=True)
class QmpsoSchedule:
    t_max_mps: float
    t_max_mpo: float
    n_l_mps: int
    n_l_mpo: int
    dt: float
    target_t: float

    def __post_init__(self) -> None:
        if self.t_max_mpo <= 0:
            raise ValidationError("QmpsoSchedule: t_max_mpo must be positive")
        n_tgt = _grid_steps(self.target_t, self.dt, "target_t")
        n_mps = _grid_steps(self.t_max_mps, self.dt, "t_max_mps")
        _grid_steps(self.t_max_mpo, self.dt, "t_max_mpo")
        if n_tgt < n_mps:
            raise ValidationError(f"QmpsoSchedule: target_t={self.target_t} precedes "
                                  f"t_max_mps={self.t_max_mps}")

    @property
    def m(self) -> int:
        n = _grid_steps(self.target_t, self.dt, "target_t") \
            - _grid_steps(self.t_max_mps, self.dt, "t_max_mps")
        return n // _grid_steps(self.t_max_mpo, self.dt, "t_max_mpo")

    @property
    def delta_steps(self) -> int:
        n = _grid_steps(self.target_t, self.dt, "target_t") \
            - _grid_steps(self.t_max_mps, self.dt, "t_max_mps")
        return n % _grid_steps(self.t_max_mpo, self.dt, "t_max_mpo")

    @property
    def delta_t(self) -> float:
        return self.delta_steps * self.dt

    def n_gates(self, L: int) -> int:
        blocks = self.m + (1 if self.delta_steps > 0 else 0)
        return (L - 1) * (self.n_l_mps + blocks * self.n_l_mpo)


def compose_qmpso(schedule: QmpsoSchedule, qmps: StaircaseCircuit,
                  qmpo: StaircaseCircuit,
                  qmpo_delta: StaircaseCircuit | None = None) -> StaircaseCircuit:
    """Concatenate preparation staircase, M propagator blocks, and the
    residue block (required iff delta_t > 0)."""
    if qmps.num_layers != schedule.n_l_mps:
        raise ValidationError(f"compose_qmpso: preparation circuit has "
                              f"{qmps.num_layers} layers, schedule says {schedule.n_l_mps}")
    if qmpo.num_layers != schedule.n_l_mpo:
        raise ValidationError(f"compose_qmpso: block circuit has {qmpo.num_layers} "
                              f"layers, schedule says {schedule.n_l_mpo}")
    if qmpo.L != qmps.L:
        raise ValidationError("compose_qmpso: circuits live on different chains")
    layers = [list(layer) for layer in qmps.layers]
    for _ in range(schedule.m):
        layers.extend(list(layer) for layer in qmpo.layers)
    if schedule.delta_steps > 0:
        if qmpo_delta is None:
            raise ValidationError(f"compose_qmpso: delta_t={schedule.delta_t} needs a "
                                  f"residue block circuit and none was given")
        if qmpo_delta.num_layers != schedule.n_l_mpo or qmpo_delta.L != qmps.L:
            raise ValidationError("compose_qmpso: residue circuit shape mismatch")
        layers.extend(list(layer) for layer in qmpo_delta.layers)
    out = StaircaseCircuit(L=qmps.L, kind="staircase", layers=layers)
    assert out.gate_count() == schedule.n_gates(qmps.L)
    return out


# -- compiled artifacts for a config -------------------------------------


@dataclass
class CompiledArtifacts:
    """Everything expensive for one config: the preparation trajectory,
    the full propagator block, and residue blocks keyed by step count."""
    params: TfimParams
    cfg: RunConfig
    qmps_points: list  # TrajectoryPoint at each warm-start grid time
    qmpo_block: StaircaseCircuit
    qmpo_report: CompileReport
    residues: dict  # delta_steps -> StaircaseCircuit

    @property
    def qmps(self) -> StaircaseCircuit:
        return self.qmps_points[-1].circuit

    @property
    def qmps_report(self) -> CompileReport:
        return self.qmps_points[-1].report

    def schedule_for(self, t: float) -> QmpsoSchedule:
        return QmpsoSchedule(t_max_mps=self.cfg.t_max_mps, t_max_mpo=self.cfg.t_max_mpo,
                             n_l_mps=self.cfg.n_l_mps, n_l_mpo=self.cfg.n_l_mpo,
                             dt=self.cfg.dt, target_t=t)

    def circuit_at(self, t: float) -> StaircaseCircuit:
        sched = self.schedule_for(t)
        delta = self.residues.get(sched.delta_steps) if sched.delta_steps > 0 else None
        return compose_qmpso(sched, self.qmps, self.qmpo_block, delta)


def _residue_steps_needed(cfg: RunConfig, times) -> list[int]:
    n_mps = _grid_steps(cfg.t_max_mps, cfg.dt, "t_max_mps")
    n_mpo = _grid_steps(cfg.t_max_mpo, cfg.dt, "t_max_mpo")
    out = set()
    for t in times:
        n = _grid_steps(t, cfg.dt, "t")
        if n > n_mps:
            r = (n - n_mps) % n_mpo
            if r > 0:
                out.add(r)
    return sorted(out)


TARGET_DT = 0.01  # fine step for every compile target


def compile_for_config(cfg: RunConfig, times=None,
                       mps_grid_spacing: float = 0.2) -> CompiledArtifacts:
    """Run every compile a config needs: warm-started preparation
    trajectory up to t_max_mps, one full propagator block, and one block
    per distinct residue on the scan grid.

    Schedule arithmetic lives on the coarse cfg.dt grid, but every
    compile target (TEBD state, propagator MPO) is built at TARGET_DT so
    coarse Trotter error never enters the circuits.
    """
    p = TfimParams(L=cfg.L, J=cfg.J, h=cfg.h, dt=cfg.dt)
    p_fine = TfimParams(L=cfg.L, J=cfg.J, h=cfg.h, dt=min(TARGET_DT, cfg.dt))
    qmps_cfg = SweepConfig(max_sweeps=cfg.max_sweeps_qmps,
                           convergence_delta=cfg.convergence_delta)
    qmpo_cfg = SweepConfig(max_sweeps=cfg.max_sweeps_qmpo,
                           convergence_delta=cfg.convergence_delta)

    spacing = max(cfg.dt, round(mps_grid_spacing / cfg.dt) * cfg.dt)
    n_pts = int(round(cfg.t_max_mps / spacing))
    grid = [round(k * spacing, 12) for k in range(1, n_pts + 1)]
    if not grid or abs(grid[-1] - cfg.t_max_mps) > 1e-9:
        grid.append(cfg.t_max_mps)
    qmps_points = qmps_trajectory(p_fine, cfg.n_l_mps, grid, qmps_cfg)

    kappa = 4 ** cfg.n_l_mpo
    block_target = trotter_propagator_mpo(p_fine, cfg.t_max_mpo, kappa_max=kappa)
    qmpo_block, qmpo_report = qmpo_compile(block_target, cfg.n_l_mpo, qmpo_cfg)

    residues = {}
    for r in _residue_steps_needed(cfg, times or cfg.times()):
        tgt = trotter_propagator_mpo(p_fine, r * cfg.dt, kappa_max=kappa)
        circ, _ = qmpo_compile(tgt, cfg.n_l_mpo, qmpo_cfg)
        residues[r] = circ
    return CompiledArtifacts(params=p, cfg=cfg, qmps_points=qmps_points,
                             qmpo_block=qmpo_block, qmpo_report=qmpo_report,
                             residues=residues)


# -- dense series for the scan grid ---------------------------------------


def reference_series(p: TfimParams, times, dt: float = 0.01):
    """Fine-step Trotter reference statevector at each grid time."""
    ref = TrotterStatevector(p, dt=dt)
    return [ref.advance_to(t).copy() for t in times]


def mps_series(p: TfimParams, chi: int, times, dt: float = 0.01):
    """chi-capped TEBD statevectors at each grid time (the classical
    baseline: fine time step, truncation as the only error source)."""
    fine = TfimParams(L=p.L, J=p.J, h=p.h, dt=dt)
    psi = from_product(neel_product_state(p.L), chi_max=chi)
    sched_steps = [_grid_steps(t, dt, "t") for t in times]
    gates = trotter_step_gates(fine)
    out = []
    done = 0
    for n in sched_steps:
        for _ in range(n - done):
            for b, g in zip(gates.bonds, gates.gates):
                psi.apply_two_site_gate(b, g)
        done = n
        out.append(to_statevector(psi))
    return out


def trotter_circuit_series(p: TfimParams, times):
    """Coarse Trotter circuit states at each grid time plus gate counts
    (one brickwork step per dt, L-1 gates each)."""
    vec = product_statevector(neel_product_state(p.L))
    sched = TrotterStatevector(p, dt=p.dt, psi0=vec)
    states, counts = [], []
    for t in times:
        sched.advance_to(t)
        states.append(sched.vec.copy())
        counts.append((p.L - 1) * _grid_steps(t, p.dt, "t"))
    return states, counts


def qmpso_series(arts: CompiledArtifacts, times):
    """Composed-circuit states and gate counts at each grid time at or
    beyond t_max_mps."""
    psi0 = product_statevector(neel_product_state(arts.params.L))
    states, counts = [], []
    for t in times:
        circ = arts.circuit_at(t)
        states.append(apply_to_statevector(circ, psi0))
        counts.append(circ.gate_count())
    return states, counts


def noisy_state(pure: np.ndarray, nm: NoiseModel, n_gates: int, L: int) -> NoisyState:
    return NoisyState(pure_part=pure, alpha=alpha(nm, n_gates), L=L)
