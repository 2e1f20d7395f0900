"""Command-line front end.

Subcommands mirror the library stages: TEBD evolution, the two compile
paths, composition, noisy simulation, advantage classification, exact
references, and the packaged experiment scans.  A JSON config file
(matching RunConfig fields) feeds every subcommand; individual flags
override it.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .circuits import load as load_circuit
from .circuits import save as save_circuit
from .circuits import apply_to_statevector, trotter_circuit
from .compiler import SweepConfig, qmps_compile, qmpo_compile
from .config import RunConfig
from .errors import ValidationError
from .exact import ExactPropagator, local_magnetization, product_statevector
from .experiments import default_config, experiment_names, run_experiment
from .mpo import trotter_propagator_mpo
from .mps import from_product, tebd_evolve, to_statevector
from .noise import (NoiseModel, NoisyState, advantage_classify, alpha,
                    infidelity_per_site, noisy_fidelity)
from .pipeline import TARGET_DT, QmpsoSchedule, compose_qmpso
from .tfim import TfimParams, neel_product_state


def _load_config(args, base: RunConfig | None = None) -> RunConfig:
    cfg = base or RunConfig()
    if args.config:
        cfg_d = cfg.to_dict()
        cfg_d.update(json.loads(Path(args.config).read_text()))
        cfg = RunConfig.from_dict(cfg_d)
    overrides = {}
    if args.out is not None:
        overrides["out_dir"] = args.out
    if args.seed is not None:
        overrides["seed"] = args.seed
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
    return cfg


def _params(cfg: RunConfig, dt: float | None = None) -> TfimParams:
    return TfimParams(L=cfg.L, J=cfg.J, h=cfg.h, dt=cfg.dt if dt is None else dt)


def _emit(payload: dict) -> None:
    print(json.dumps(payload, sort_keys=True, indent=2))


def cmd_tebd(args) -> int:
    cfg = _load_config(args)
    p = _params(cfg)
    psi0 = from_product(neel_product_state(cfg.L), chi_max=args.chi or cfg.chi_mps)
    res = tebd_evolve(psi0, p, args.t, snapshot_every=0)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    trace_path = out / "entropy_trace.csv"
    res.trace.write_csv(trace_path)
    _emit({"t": args.t, "chi": args.chi or cfg.chi_mps,
           "final_entropy": res.trace.entropy[-1],
           "max_bond": res.final.max_bond(),
           "truncation_weight_total": res.truncation_weight_total,
           "trace_csv": str(trace_path)})
    return 0


def cmd_compile_qmps(args) -> int:
    cfg = _load_config(args)
    p = _params(cfg, dt=min(TARGET_DT, cfg.dt))
    target = tebd_evolve(from_product(neel_product_state(cfg.L)), p, args.t,
                         snapshot_every=0).final
    sweep_cfg = SweepConfig(cfg.max_sweeps_qmps, cfg.convergence_delta)
    circ, report = qmps_compile(target, from_product(neel_product_state(cfg.L)),
                                args.layers or cfg.n_l_mps, sweep_cfg)
    if args.save:
        save_circuit(circ, args.save)
    _emit({"t": args.t, "layers": circ.num_layers,
           "fidelity": report.final_fidelity, "sweeps": report.sweeps,
           "converged": report.converged,
           "infidelity_per_site": infidelity_per_site(
               min(report.final_fidelity, 1.0), cfg.L),
           "circuit": args.save})
    return 0


def cmd_compile_qmpo(args) -> int:
    cfg = _load_config(args)
    p = _params(cfg, dt=min(TARGET_DT, cfg.dt))
    layers = args.layers or cfg.n_l_mpo
    target = trotter_propagator_mpo(p, args.t, kappa_max=4 ** layers)
    sweep_cfg = SweepConfig(cfg.max_sweeps_qmpo, cfg.convergence_delta)
    circ, report = qmpo_compile(target, layers, sweep_cfg)
    if args.save:
        save_circuit(circ, args.save)
    _emit({"t": args.t, "layers": layers,
           "operator_fidelity": report.final_fidelity,
           "sweeps": report.sweeps, "converged": report.converged,
           "circuit": args.save})
    return 0


def cmd_compose(args) -> int:
    cfg = _load_config(args)
    qmps = load_circuit(args.qmps)
    qmpo = load_circuit(args.qmpo)
    delta = load_circuit(args.delta) if args.delta else None
    sched = QmpsoSchedule(t_max_mps=cfg.t_max_mps, t_max_mpo=cfg.t_max_mpo,
                          n_l_mps=qmps.num_layers, n_l_mpo=qmpo.num_layers,
                          dt=cfg.dt, target_t=args.t)
    circ = compose_qmpso(sched, qmps, qmpo, delta)
    save_circuit(circ, args.save)
    _emit({"target_t": args.t, "m": sched.m, "delta_t": sched.delta_t,
           "layers": circ.num_layers, "gates": circ.gate_count(),
           "circuit": args.save})
    return 0


def cmd_simulate_noisy(args) -> int:
    cfg = _load_config(args)
    circ = load_circuit(args.circuit)
    if circ.L != cfg.L:
        raise ValidationError(f"circuit has L={circ.L}, config has L={cfg.L}")
    psi0 = product_statevector(neel_product_state(cfg.L))
    pure = apply_to_statevector(circ, psi0)
    nm = NoiseModel(args.epsilon)
    rho = NoisyState(pure, alpha(nm, circ.gate_count()), cfg.L)
    ref = ExactPropagator(_params(cfg)).quench_state(args.t)
    f = noisy_fidelity(rho, ref)
    _emit({"t": args.t, "epsilon": args.epsilon, "gates": circ.gate_count(),
           "alpha": rho.alpha, "fidelity": f,
           "infidelity_per_site": infidelity_per_site(min(f, 1.0), cfg.L),
           "magnetization": list(rho.alpha * local_magnetization(pure))})
    return 0


def cmd_advantage(args) -> int:
    region = advantage_classify(args.f_mps, args.f_trotter, args.f_qmpso)
    _emit({"f_mps": args.f_mps, "f_trotter": args.f_trotter,
           "f_qmpso": args.f_qmpso, "region": region})
    return 0


def cmd_exact(args) -> int:
    cfg = _load_config(args)
    p = _params(cfg)
    vec = ExactPropagator(p).quench_state(args.t)
    z = local_magnetization(vec)
    out = {"t": args.t, "L": cfg.L, "magnetization": list(z)}
    if args.trotter_dt:
        tr = trotter_circuit(_params(cfg, dt=args.trotter_dt),
                             int(round(args.t / args.trotter_dt)))
        tvec = apply_to_statevector(tr, product_statevector(neel_product_state(cfg.L)))
        out["trotter_fidelity"] = abs(np.vdot(vec, tvec)) ** 2
        out["trotter_dt"] = args.trotter_dt
    _emit(out)
    return 0


def cmd_experiment(args) -> int:
    cfg = _load_config(args, base=default_config(args.name))
    res = run_experiment(args.name, cfg, threads=args.threads)
    _emit(res)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="qmpso",
        description="staircase-circuit compilation of transverse-field "
                    "Ising quench dynamics")
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("--config", help="JSON file with RunConfig fields")
    ap.add_argument("--out", help="output directory (overrides config)")
    ap.add_argument("--seed", type=int, help="RNG seed (overrides config)")
    ap.add_argument("--threads", type=int, default=1,
                    help="worker threads for experiment scans")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("tebd", help="evolve the quench with bond-capped TEBD")
    s.add_argument("--t", type=float, required=True)
    s.add_argument("--chi", type=int)
    s.set_defaults(fn=cmd_tebd)

    s = sub.add_parser("compile-qmps",
                       help="compile the quench state at t into a staircase")
    s.add_argument("--t", type=float, required=True)
    s.add_argument("--layers", type=int)
    s.add_argument("--save", help="write the circuit JSON here")
    s.set_defaults(fn=cmd_compile_qmps)

    s = sub.add_parser("compile-qmpo",
                       help="compile the propagator over t into a staircase")
    s.add_argument("--t", type=float, required=True)
    s.add_argument("--layers", type=int)
    s.add_argument("--save", help="write the circuit JSON here")
    s.set_defaults(fn=cmd_compile_qmpo)

    s = sub.add_parser("compose",
                       help="chain preparation + propagator blocks to a target time")
    s.add_argument("--t", type=float, required=True)
    s.add_argument("--qmps", required=True, help="preparation circuit JSON")
    s.add_argument("--qmpo", required=True, help="propagator block JSON")
    s.add_argument("--delta", help="residue block JSON (when t needs one)")
    s.add_argument("--save", required=True)
    s.set_defaults(fn=cmd_compose)

    s = sub.add_parser("simulate-noisy",
                       help="score a saved circuit under depolarizing noise")
    s.add_argument("--circuit", required=True)
    s.add_argument("--t", type=float, required=True,
                   help="reference time the circuit targets")
    s.add_argument("--epsilon", type=float, required=True)
    s.set_defaults(fn=cmd_simulate_noisy)

    s = sub.add_parser("advantage", help="classify one (F_mps, F_trotter, F_qmpso) triple")
    s.add_argument("--f-mps", type=float, required=True)
    s.add_argument("--f-trotter", type=float, required=True)
    s.add_argument("--f-qmpso", type=float, required=True)
    s.set_defaults(fn=cmd_advantage)

    s = sub.add_parser("exact", help="exact quench state diagnostics (L <= 14)")
    s.add_argument("--t", type=float, required=True)
    s.add_argument("--trotter-dt", type=float,
                   help="also score a Trotter circuit at this step")
    s.set_defaults(fn=cmd_exact)

    s = sub.add_parser("experiment", help="run a packaged scan end to end")
    s.add_argument("name", choices=experiment_names())
    s.set_defaults(fn=cmd_experiment)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except (ValidationError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
