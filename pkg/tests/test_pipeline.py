import numpy as np
import pytest

from qmpso.circuits import apply_to_statevector, new_staircase
from qmpso.config import RunConfig
from qmpso.errors import ValidationError
from qmpso.exact import product_statevector
from qmpso.pipeline import (CompiledArtifacts, QmpsoSchedule, compile_for_config,
                            compose_qmpso, qmpso_series, reference_series,
                            trotter_circuit_series)
from qmpso.tfim import neel_product_state


def test_schedule_arithmetic():
    s = QmpsoSchedule(t_max_mps=2.2, t_max_mpo=0.2, n_l_mps=3, n_l_mpo=1,
                      dt=0.1, target_t=3.0)
    assert s.m == 4
    assert s.delta_steps == 0
    assert s.delta_t == pytest.approx(0.0)
    # gate count: (L-1) * (prep layers + M propagator layers)
    assert s.n_gates(12) == 11 * (3 + 4)


def test_schedule_with_residue():
    s = QmpsoSchedule(t_max_mps=2.2, t_max_mpo=0.5, n_l_mps=3, n_l_mpo=1,
                      dt=0.1, target_t=3.4)
    assert s.m == 2
    assert s.delta_steps == 2
    assert s.delta_t == pytest.approx(0.2)
    assert s.n_gates(10) == 9 * (3 + 2 + 1)


def test_schedule_rejects_pre_horizon_targets():
    with pytest.raises(ValidationError):
        QmpsoSchedule(t_max_mps=2.2, t_max_mpo=0.2, n_l_mps=3, n_l_mpo=1,
                      dt=0.1, target_t=2.0)
    with pytest.raises(ValidationError):
        QmpsoSchedule(t_max_mps=2.2, t_max_mpo=0.2, n_l_mps=3, n_l_mpo=1,
                      dt=0.1, target_t=2.25)  # off grid


def test_compose_equals_sequential_application():
    L = 5
    qmps = new_staircase(L, 2, init="random", seed=1)
    qmpo = new_staircase(L, 1, init="random", seed=2)
    delta = new_staircase(L, 1, init="random", seed=3)
    s = QmpsoSchedule(t_max_mps=1.0, t_max_mpo=0.5, n_l_mps=2, n_l_mpo=1,
                      dt=0.1, target_t=2.3)
    assert (s.m, s.delta_steps) == (2, 3)
    circ = compose_qmpso(s, qmps, qmpo, delta)
    assert circ.gate_count() == s.n_gates(L)
    vec = product_statevector(neel_product_state(L))
    want = apply_to_statevector(qmps, vec)
    for _ in range(2):
        want = apply_to_statevector(qmpo, want)
    want = apply_to_statevector(delta, want)
    assert np.allclose(apply_to_statevector(circ, vec), want, atol=1e-12)


def test_compose_validates_block_shapes():
    s = QmpsoSchedule(t_max_mps=1.0, t_max_mpo=0.5, n_l_mps=2, n_l_mpo=1,
                      dt=0.1, target_t=2.3)
    qmps = new_staircase(5, 2)
    qmpo = new_staircase(5, 1)
    with pytest.raises(ValidationError):
        compose_qmpso(s, qmps, qmpo, None)  # residue needed but missing
    with pytest.raises(ValidationError):
        compose_qmpso(s, new_staircase(5, 3), qmpo, new_staircase(5, 1))
    with pytest.raises(ValidationError):
        compose_qmpso(s, qmps, new_staircase(4, 1), new_staircase(5, 1))


@pytest.fixture(scope="module")
def small_arts():
    cfg = RunConfig(L=5, dt=0.1, chi_mps=4, n_l_mps=2, n_l_mpo=1,
                    t_max_mps=0.4, t_max_mpo=0.2, t_max=1.0,
                    grid_spacing=0.2, max_sweeps_qmps=300,
                    max_sweeps_qmpo=300)
    return cfg, compile_for_config(cfg)


def test_compile_for_config_shapes(small_arts):
    cfg, arts = small_arts
    assert isinstance(arts, CompiledArtifacts)
    assert [round(pt.t, 10) for pt in arts.qmps_points] == [0.2, 0.4]
    assert arts.qmps.num_layers == 2
    assert arts.qmpo_block.num_layers == 1
    assert arts.residues == {}  # 0.2-grid over 0.2-blocks leaves none
    assert arts.qmps_report.final_fidelity > 0.999


def test_circuit_at_matches_reported_fidelity(small_arts):
    cfg, arts = small_arts
    # at the handoff time the composition is the preparation circuit alone
    circ = arts.circuit_at(cfg.t_max_mps)
    vec0 = product_statevector(neel_product_state(cfg.L))
    got = apply_to_statevector(circ, vec0)
    want = apply_to_statevector(arts.qmps, vec0)
    assert np.allclose(got, want, atol=1e-13)


def test_qmpso_series_counts(small_arts):
    cfg, arts = small_arts
    times = [0.4, 0.6, 1.0]
    states, counts = qmpso_series(arts, times)
    assert counts == [4 * 2, 4 * 3, 4 * 5]
    for v in states:
        assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-10)


def test_trotter_series_counts(small_arts):
    cfg, arts = small_arts
    states, counts = trotter_circuit_series(arts.params, [0.2, 1.0])
    assert counts == [4 * 2, 4 * 10]
    refs = reference_series(arts.params, [0.2, 1.0])
    # coarse and fine Trotter agree loosely at these short times
    assert abs(np.vdot(refs[0], states[0])) ** 2 > 0.999
