"""Experiment runners.

Each runner takes a RunConfig, performs a full scan, and writes CSV
data, a small SVG rendering, and a manifest JSON (config hash plus
library versions) into <out_dir>/<name>/.  Everything is deterministic:
reruns with the same config produce byte-identical CSV files.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .compiler import SweepConfig, qmps_trajectory, qmpo_trajectory
from .config import RunConfig
from .circuits import apply_to_statevector, to_mpo, trotter_circuit
from .errors import ValidationError
from .exact import (ExactPropagator, fine_trotter_state, local_magnetization,
                    product_statevector)
from .kak import staircase_angles
from .mpo import frobenius_fidelity, identity_mpo, trotter_propagator_mpo
from .mps import from_product, tebd_evolve
from .noise import (NoiseModel, NoisyState, advantage_classify, alpha,
                    cumulated_error, density_matrix, infidelity_per_site,
                    noisy_fidelity, noisy_magnetization, operator_entropy)
from .pipeline import (TARGET_DT, compile_for_config, mps_series,
                       qmpso_series, reference_series, trotter_circuit_series)
from .svgplot import heat_map, line_plot
from .tfim import TfimParams, neel_product_state, trotter_step_gates


# -- emission helpers ----------------------------------------------------


def _fmt_cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt_cell(c) for c in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


def _write_manifest(out: Path, name: str, cfg: RunConfig, files: list[Path]) -> None:
    m = {"experiment": name,
         "config_hash": cfg.config_hash(),
         "config": cfg.to_dict(),
         "package_version": __version__,
         "numpy_version": np.__version__,
         "scipy_version": scipy.__version__,
         "outputs": sorted(f.name for f in files)}
    (out / "manifest.json").write_text(json.dumps(m, sort_keys=True, indent=2) + "\n")


def _parallel_map(fn, items, threads: int):
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def _prepare_out(cfg: RunConfig, name: str) -> Path:
    out = Path(cfg.out_dir) / name
    out.mkdir(parents=True, exist_ok=True)
    return out


def _sweep_cfgs(cfg: RunConfig) -> tuple[SweepConfig, SweepConfig]:
    return (SweepConfig(cfg.max_sweeps_qmps, cfg.convergence_delta),
            SweepConfig(cfg.max_sweeps_qmpo, cfg.convergence_delta))


def _fid_row(t: float, eps: float, method: str, f: float, L: int) -> tuple:
    return (t, eps, method, f, infidelity_per_site(min(max(f, 0.0), 1.0), L))


# -- individual runners --------------------------------------------------

FIG2_CHIS = (2, 4, 8, 16, 32, 64)


def run_fig2(cfg: RunConfig, out: Path, threads: int) -> list[Path]:
    """Half-chain entropy growth under TEBD for a ladder of bond caps."""
    p = TfimParams(L=cfg.L, J=cfg.J, h=cfg.h, dt=cfg.dt)

    def task(chi):
        res = tebd_evolve(from_product(neel_product_state(cfg.L), chi_max=chi),
                          p, cfg.t_max, snapshot_every=0)
        return chi, res.trace

    rows = []
    series = {}
    for chi, trace in _parallel_map(task, FIG2_CHIS, threads):
        for t, s in zip(trace.times, trace.entropy):
            rows.append((t, trace.cut, chi, s))
        series[f"chi={chi}"] = (list(trace.times), list(trace.entropy))
    csv = out / "entropy.csv"
    _write_csv(csv, ["t", "cut", "chi", "S_vN"], rows)
    svg = out / "entropy.svg"
    line_plot(svg, series, title=f"half-chain entropy, L={cfg.L}",
              xlabel="t", ylabel="S_vN (bits)",
              hlines=[np.log2(c) for c in FIG2_CHIS[:-1]])
    return [csv, svg]


FIG4_LAYERS = (1, 2, 3)


def run_fig4(cfg: RunConfig, out: Path, threads: int) -> list[Path]:
    """Compile fidelity of state staircases along the quench."""
    p_fine = TfimParams(L=cfg.L, J=cfg.J, h=cfg.h, dt=min(TARGET_DT, cfg.dt))
    n = int(round(cfg.t_max_mps / cfg.grid_spacing))
    grid = [round(k * cfg.grid_spacing, 12) for k in range(1, n + 1)]
    sweep_cfg, _ = _sweep_cfgs(cfg)

    def task(nl):
        return nl, qmps_trajectory(p_fine, nl, grid, sweep_cfg)

    rows = []
    series = {}
    for nl, points in _parallel_map(task, FIG4_LAYERS, threads):
        fs = [pt.report.final_fidelity for pt in points]
        series[f"layers={nl}"] = (grid, fs)
        rows.extend(_fid_row(pt.t, 0.0, f"qmps_nl{nl}", pt.report.final_fidelity, cfg.L)
                    for pt in points)
    csv = out / "fidelity.csv"
    _write_csv(csv, ["t", "epsilon", "method", "F", "infidelity_per_site"], rows)
    svg = out / "fidelity.svg"
    line_plot(svg, series, title=f"state compile fidelity, L={cfg.L}",
              xlabel="t", ylabel="F")
    return [csv, svg]


FIG5_TIMES = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6)
FIG5_LAYERS = (1, 2)
REF_KAPPA = 256


def run_fig5(cfg: RunConfig, out: Path, threads: int) -> list[Path]:
    """Propagator compression quality: compiled staircase vs the
    same-depth coarse Trotter circuit, both scored against a fine-step
    reference propagator MPO."""
    p_fine = TfimParams(L=cfg.L, J=cfg.J, h=cfg.h, dt=min(TARGET_DT, cfg.dt))
    _, sweep_cfg = _sweep_cfgs(cfg)

    refs = {}
    acc = identity_mpo(cfg.L, kappa_max=REF_KAPPA)
    sched = trotter_step_gates(p_fine)
    done = 0
    for t in FIG5_TIMES:
        steps = int(round(t / p_fine.dt))
        for _ in range(steps - done):
            for b, g in zip(sched.bonds, sched.gates):
                acc.apply_two_site_gate(b, g, side="left")
        done = steps
        refs[t] = acc.copy()

    def task(nl):
        points = qmpo_trajectory(p_fine, nl, FIG5_TIMES, sweep_cfg)
        rows = []
        for pt in points:
            f_q = abs(frobenius_fidelity(refs[pt.t], to_mpo(pt.circuit)))
            tr = trotter_circuit(TfimParams(L=cfg.L, J=cfg.J, h=cfg.h, dt=pt.t / nl), nl)
            f_t = abs(frobenius_fidelity(refs[pt.t], to_mpo(tr)))
            rows.append((pt.t, f"qmpo_nl{nl}", f_q))
            rows.append((pt.t, f"trotter_nl{nl}", f_t))
        return rows

    rows = []
    series = {}
    for chunk in _parallel_map(task, FIG5_LAYERS, threads):
        for t, method, f in chunk:
            rows.append(_fid_row(t, 0.0, method, f, cfg.L))
            series.setdefault(method, ([], []))
            series[method][0].append(t)
            series[method][1].append(max(1.0 - f, 1e-16))
    csv = out / "fidelity.csv"
    _write_csv(csv, ["t", "epsilon", "method", "F", "infidelity_per_site"], rows)
    svg = out / "op_infidelity.svg"
    line_plot(svg, series, title=f"propagator infidelity 1-|F_op|, L={cfg.L}",
              xlabel="t", ylabel="1-|F_op|", ylog=True)
    return [csv, svg]


def run_fig6(cfg: RunConfig, out: Path, threads: int) -> list[Path]:
    """Advantage diagram: noisy circuits vs the chi-capped MPS across a
    (t, epsilon) grid, all scored against the fine-Trotter reference."""
    times = list(cfg.times())
    arts = compile_for_config(cfg, times)
    p = arts.params
    refs = reference_series(p, times)
    mps = mps_series(p, cfg.chi_mps, times)
    # deep fine-step circuit: Trotter error suppressed, gate count pays for it
    p_fine = TfimParams(L=p.L, J=p.J, h=p.h, dt=min(TARGET_DT, p.dt))
    trot, n_trot = trotter_circuit_series(p_fine, times)

    # hybrid pure states: trajectory circuit below t_max_mps, composition beyond
    psi0 = product_statevector(neel_product_state(cfg.L))
    traj_at = {round(pt.t, 9): pt.circuit for pt in arts.qmps_points}
    q_states, q_counts = [], []
    for t in times:
        if t < cfg.t_max_mps - 1e-9:
            circ = traj_at.get(round(t, 9))
        else:
            circ = arts.circuit_at(t)
        if circ is None:
            q_states.append(None)
            q_counts.append(0)
        else:
            q_states.append(apply_to_statevector(circ, psi0))
            q_counts.append(circ.gate_count())

    fid_rows, adv_rows = [], []
    cells = []
    for eps in cfg.epsilons:
        nm = NoiseModel(eps)
        row = []
        for i, t in enumerate(times):
            f_m = abs(np.vdot(refs[i], mps[i])) ** 2
            f_t = noisy_fidelity(NoisyState(trot[i], alpha(nm, n_trot[i]), cfg.L), refs[i])
            if q_states[i] is None:
                f_q = f_m  # no compiled point on this grid slot; tie keeps mps label
            else:
                f_q = noisy_fidelity(NoisyState(q_states[i], alpha(nm, q_counts[i]), cfg.L),
                                     refs[i])
            region = advantage_classify(f_m, f_t, f_q)
            fid_rows.append(_fid_row(t, eps, "mps", f_m, cfg.L))
            fid_rows.append(_fid_row(t, eps, "trotter", f_t, cfg.L))
            fid_rows.append(_fid_row(t, eps, "qmpso", f_q, cfg.L))
            adv_rows.append((t, eps, region))
            row.append(region)
        cells.append(row)

    csv_f = out / "fidelity.csv"
    _write_csv(csv_f, ["t", "epsilon", "method", "F", "infidelity_per_site"], fid_rows)
    csv_a = out / "advantage.csv"
    _write_csv(csv_a, ["t", "epsilon", "region"], adv_rows)
    svg = out / "advantage.svg"
    heat_map(svg, times, list(cfg.epsilons), cells,
             title=f"advantage regions, L={cfg.L}, chi={cfg.chi_mps}",
             xlabel="t", ylabel="epsilon")
    mid = cfg.epsilons[len(cfg.epsilons) // 2]
    series = {}
    for method in ("mps", "trotter", "qmpso"):
        pts = [(r[0], r[3]) for r in fid_rows if r[1] == mid and r[2] == method]
        series[method] = ([x for x, _ in pts], [y for _, y in pts])
    svg2 = out / "fidelity.svg"
    line_plot(svg2, series, title=f"fidelity vs reference at eps={mid}",
              xlabel="t", ylabel="F")
    return [csv_f, csv_a, svg, svg2]


def run_fig7(cfg: RunConfig, out: Path, threads: int) -> list[Path]:
    """Local magnetization tracking under noise, the cumulated error of
    each method, and the interaction-angle export of the composed
    circuit."""
    times = list(cfg.times())
    eps = cfg.epsilons[0]
    nm = NoiseModel(eps)
    arts = compile_for_config(cfg, times)
    p = arts.params

    prop = ExactPropagator(p)
    z_ref = np.array([local_magnetization(prop.quench_state(t)) for t in times])
    mps = mps_series(p, cfg.chi_mps, times)
    z_mps = np.array([local_magnetization(v) for v in mps])
    trot, n_trot = trotter_circuit_series(p, times)
    z_trot = np.array([alpha(nm, n) * local_magnetization(v)
                       for v, n in zip(trot, n_trot)])

    comp_times = [t for t in times if t >= cfg.t_max_mps - 1e-9]
    q_states, q_counts = qmpso_series(arts, comp_times)
    z_q = np.array([noisy_magnetization(NoisyState(v, alpha(nm, n), cfg.L))
                    for v, n in zip(q_states, q_counts)])

    mag_rows = []
    for i, t in enumerate(times):
        for s in range(cfg.L):
            mag_rows.append((t, s, "reference", z_ref[i, s]))
            mag_rows.append((t, s, "mps", z_mps[i, s]))
            mag_rows.append((t, s, "trotter", z_trot[i, s]))
    for i, t in enumerate(comp_times):
        for s in range(cfg.L):
            mag_rows.append((t, s, "qmpso", z_q[i, s]))
    csv_m = out / "magnetization.csv"
    _write_csv(csv_m, ["t", "site", "method", "z"], mag_rows)

    t_arr = np.array(times)
    comp_arr = np.array(comp_times)
    z_ref_comp = z_ref[[i for i, t in enumerate(times)
                        if t >= cfg.t_max_mps - 1e-9]]
    err_rows = []
    for t in comp_times:
        if t <= cfg.t_max_mps + 1e-9:
            continue
        e_tr = cumulated_error(t_arr, z_trot, z_ref, cfg.t_max_mps, t)
        e_q = cumulated_error(comp_arr, z_q, z_ref_comp, cfg.t_max_mps, t)
        err_rows.append((t, eps, "trotter", e_tr))
        err_rows.append((t, eps, "qmpso", e_q))
    csv_e = out / "cumulated_error.csv"
    _write_csv(csv_e, ["t", "epsilon", "method", "eps_c"], err_rows)

    angle_rows = staircase_angles(arts.circuit_at(times[-1]))
    csv_k = out / "kak_angles.csv"
    _write_csv(csv_k, ["layer", "bond", "theta_xx", "theta_yy", "theta_zz"], angle_rows)

    mid_site = cfg.L // 2
    series = {"reference": (times, list(z_ref[:, mid_site])),
              "mps": (times, list(z_mps[:, mid_site])),
              "trotter": (times, list(z_trot[:, mid_site])),
              "qmpso": (comp_times, list(z_q[:, mid_site]))}
    svg = out / "magnetization.svg"
    line_plot(svg, series, title=f"<Z> at site {mid_site}, eps={eps}",
              xlabel="t", ylabel="<Z>")
    err_series = {}
    for method in ("trotter", "qmpso"):
        pts = [(r[0], r[3]) for r in err_rows if r[2] == method]
        err_series[method] = ([x for x, _ in pts], [y for _, y in pts])
    svg2 = out / "cumulated_error.svg"
    line_plot(svg2, err_series, title=f"cumulated magnetization error, eps={eps}",
              xlabel="t", ylabel="eps_c", ylog=True)
    return [csv_m, csv_e, csv_k, svg, svg2]


FIG8_SIZES = (8, 10, 12)
FIG8_LAYERS = 2
FIG8_TIME = 1.0


def run_fig8(cfg: RunConfig, out: Path, threads: int) -> list[Path]:
    """Per-site circuit infidelity against the reference state across
    chain lengths.

    Scored against the fine-step reference, not the compile target: the
    residual left by the sweep optimizer is a budget-dependent transient
    with no stable size structure, whereas the reference infidelity is
    dominated by the target's own truncation error, which is close to
    uniform per site.  Target fidelities are emitted alongside as
    qmps_target_L* diagnostics.
    """
    sweep_cfg, _ = _sweep_cfgs(cfg)
    grid = [0.5, FIG8_TIME]

    def task(L):
        p_fine = TfimParams(L=L, J=cfg.J, h=cfg.h, dt=min(TARGET_DT, cfg.dt))
        points = qmps_trajectory(p_fine, FIG8_LAYERS, grid, sweep_cfg)
        psi = apply_to_statevector(points[-1].circuit,
                                   product_statevector(neel_product_state(L)))
        ref = fine_trotter_state(p_fine, FIG8_TIME, dt=p_fine.dt)
        f_ref = float(abs(np.vdot(ref, psi)) ** 2)
        return L, f_ref, points[-1].report.final_fidelity

    rows = []
    xs, ys, ys_tgt = [], [], []
    for L, f_ref, f_tgt in _parallel_map(task, FIG8_SIZES, threads):
        rows.append(_fid_row(FIG8_TIME, 0.0, f"qmps_L{L}", f_ref, L))
        rows.append(_fid_row(FIG8_TIME, 0.0, f"qmps_target_L{L}", f_tgt, L))
        xs.append(L)
        ys.append(infidelity_per_site(f_ref, L))
        ys_tgt.append(infidelity_per_site(f_tgt, L))
    csv = out / "fidelity.csv"
    _write_csv(csv, ["t", "epsilon", "method", "F", "infidelity_per_site"], rows)
    svg = out / "size_scan.svg"
    line_plot(svg, {"vs reference": (xs, ys), "vs compile target": (xs, ys_tgt)},
              title=f"t={FIG8_TIME}, layers={FIG8_LAYERS}", xlabel="L",
              ylabel="1-F^(1/L)", ylog=True)
    return [csv, svg]


def run_fig9(cfg: RunConfig, out: Path, threads: int) -> list[Path]:
    """Operator entanglement of the noisy mixtures along the long-time
    evolution, against the classical bond-entropy ceiling."""
    times = list(cfg.times())
    eps = cfg.epsilons[0]
    nm = NoiseModel(eps)
    arts = compile_for_config(cfg, times)
    p = arts.params
    cut = cfg.L // 2

    trot, n_trot = trotter_circuit_series(p, times)
    q_states, q_counts = qmpso_series(arts, times)

    def s_op(pure, n_g):
        ns = NoisyState(pure, alpha(nm, n_g), cfg.L)
        return operator_entropy(density_matrix(ns), cut)

    rows = []
    s_tr = [s_op(v, n) for v, n in zip(trot, n_trot)]
    s_q = [s_op(v, n) for v, n in zip(q_states, q_counts)]
    for t, a, b in zip(times, s_tr, s_q):
        rows.append((t, eps, "trotter", a))
        rows.append((t, eps, "qmpso", b))
    csv = out / "operator_entropy.csv"
    _write_csv(csv, ["t", "epsilon", "method", "s_op"], rows)
    svg = out / "operator_entropy.svg"
    line_plot(svg, {"trotter": (times, s_tr), "qmpso": (times, s_q)},
              title=f"operator entropy at eps={eps}, L={cfg.L}",
              xlabel="t", ylabel="S_op (bits)", hlines=[np.log2(cfg.chi_mps)])
    return [csv, svg]


# -- dispatch -------------------------------------------------------------

_RUNNERS = {"fig2": run_fig2, "fig4": run_fig4, "fig5": run_fig5,
            "fig6": run_fig6, "fig7": run_fig7, "fig8": run_fig8,
            "fig9": run_fig9}


def experiment_names() -> list[str]:
    return sorted(_RUNNERS)


def default_config(name: str) -> RunConfig:
    """Per-experiment defaults; any field can be overridden via JSON."""
    if name == "fig2":
        return RunConfig(L=12, dt=0.01, chi_mps=8, n_l_mps=3, t_max=6.0)
    if name == "fig4":
        return RunConfig(L=12, dt=0.1, chi_mps=8, n_l_mps=3, t_max_mps=2.2,
                         grid_spacing=0.2)
    if name == "fig5":
        return RunConfig(L=12, dt=0.1, chi_mps=8, n_l_mps=3)
    if name == "fig6":
        return RunConfig(L=12, dt=0.1, chi_mps=8, n_l_mps=3, n_l_mpo=1,
                         t_max_mps=2.2, t_max_mpo=0.2, t_max=6.0,
                         grid_spacing=0.2, epsilons=(1e-2, 1e-3, 1e-4))
    if name == "fig7":
        return RunConfig(L=10, dt=0.1, chi_mps=8, n_l_mps=3, n_l_mpo=1,
                         t_max_mps=2.2, t_max_mpo=0.5, t_max=5.0,
                         grid_spacing=0.1, epsilons=(1e-2,))
    if name == "fig8":
        return RunConfig(L=12, dt=0.1, chi_mps=4, n_l_mps=2)
    if name == "fig9":
        return RunConfig(L=8, dt=0.1, chi_mps=8, n_l_mps=3, n_l_mpo=1,
                         t_max_mps=2.2, t_max_mpo=0.2, epsilons=(1e-3,),
                         t_grid=tuple(round(4.0 * k, 9) for k in range(1, 21)))
    raise ValidationError(f"unknown experiment {name!r}; "
                          f"choose from {experiment_names()}")


def run_experiment(name: str, cfg: RunConfig | None = None,
                   threads: int = 1) -> dict:
    if name not in _RUNNERS:
        raise ValidationError(f"unknown experiment {name!r}; "
                              f"choose from {experiment_names()}")
    cfg = cfg or default_config(name)
    out = _prepare_out(cfg, name)
    files = _RUNNERS[name](cfg, out, threads)
    _write_manifest(out, name, cfg, files)
    return {"out_dir": str(out),
            "files": [str(f) for f in files + [out / "manifest.json"]]}
