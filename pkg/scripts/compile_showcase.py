#!/usr/bin/env python3
"""Minimal end-to-end walkthrough at dense-checkable scale.

Compiles the quench state at t=1.0 (L=8, three layers), one propagator
block, composes out to t=3.0, and prints noisy fidelities against the
exact state for a few error rates.  Everything here is small enough to
cross-check densely, so it doubles as a quick sanity run after changes.
"""

import numpy as np

from qmpso.circuits import apply_to_statevector
from qmpso.compiler import SweepConfig, qmps_trajectory, qmpo_compile
from qmpso.exact import ExactPropagator, product_statevector
from qmpso.mpo import trotter_propagator_mpo
from qmpso.noise import NoiseModel, NoisyState, alpha, noisy_fidelity
from qmpso.pipeline import QmpsoSchedule, compose_qmpso
from qmpso.tfim import TfimParams, neel_product_state


def main() -> None:
    L, layers_prep, layers_block = 8, 3, 1
    t_prep, t_block, t_target = 1.0, 0.2, 3.0
    p = TfimParams(L=L, dt=0.01)

    grid = [0.25, 0.5, 0.75, t_prep]
    points = qmps_trajectory(p, layers_prep, grid, SweepConfig(500, 1e-8))
    prep = points[-1]
    print(f"prep   t={t_prep}: F={prep.report.final_fidelity:.6f} "
          f"({prep.report.sweeps} sweeps)")

    target = trotter_propagator_mpo(p, t_block, kappa_max=4 ** layers_block)
    block, rep = qmpo_compile(target, layers_block, SweepConfig(500, 1e-8))
    print(f"block  t={t_block}: F_op={rep.final_fidelity:.6f} ({rep.sweeps} sweeps)")

    sched = QmpsoSchedule(t_max_mps=t_prep, t_max_mpo=t_block,
                          n_l_mps=layers_prep, n_l_mpo=layers_block,
                          dt=t_block, target_t=t_target)
    circ = compose_qmpso(sched, prep.circuit, block)
    print(f"composed to t={t_target}: {circ.gate_count()} gates, "
          f"{circ.num_layers} layers")

    psi0 = product_statevector(neel_product_state(L))
    pure = apply_to_statevector(circ, psi0)
    ref = ExactPropagator(p).quench_state(t_target)
    print(f"pure overlap^2 vs exact: {abs(np.vdot(ref, pure))**2:.6f}")
    for eps in (1e-4, 1e-3, 1e-2):
        rho = NoisyState(pure, alpha(NoiseModel(eps), circ.gate_count()), L)
        print(f"  eps={eps:g}: alpha={rho.alpha:.4f} "
              f"F={noisy_fidelity(rho, ref):.6f}")


if __name__ == "__main__":
    main()
