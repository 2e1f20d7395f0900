"""Run configuration: one JSON-serializable dataclass shared by the CLI
and the experiment runners, hashed for the output manifest."""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass

from .errors import ValidationError


@dataclass
class RunConfig:
    # model
    L: int = 12
    J: float = 1.0
    h: float = 1.0
    dt: float = 0.1
    # ansatz budgets (chi_mps must equal 2^n_l_mps)
    chi_mps: int = 8
    n_l_mps: int = 3
    n_l_mpo: int = 1
    # composition schedule
    t_max_mps: float = 2.2
    t_max_mpo: float = 0.2
    # scan axes
    epsilons: tuple = (1e-2, 1e-3, 1e-4)
    t_grid: tuple = ()  # empty -> multiples of grid_spacing up to t_max
    t_max: float = 6.0
    grid_spacing: float = 0.2
    # bookkeeping
    seed: int = 7
    out_dir: str = "runs"
    snapshot_every: int = 10
    # compile budgets
    max_sweeps_qmps: int = 2000
    max_sweeps_qmpo: int = 1000
    convergence_delta: float = 1e-8

    def __post_init__(self) -> None:
        self.epsilons = tuple(float(e) for e in self.epsilons)
        self.t_grid = tuple(float(t) for t in self.t_grid)
        if self.L < 2:
            raise ValidationError(f"RunConfig: L={self.L} < 2")
        if self.dt <= 0 or self.grid_spacing <= 0:
            raise ValidationError("RunConfig: dt and grid_spacing must be positive")
        if self.chi_mps != 2 ** self.n_l_mps:
            raise ValidationError(f"RunConfig: chi_mps={self.chi_mps} must equal "
                                  f"2^n_l_mps={2 ** self.n_l_mps}")
        budget = max(1, (self.n_l_mps - 1) // 2)
        if self.n_l_mpo > budget:
            raise ValidationError(f"RunConfig: n_l_mpo={self.n_l_mpo} exceeds the "
                                  f"kappa budget {budget} set by n_l_mps={self.n_l_mps}")
        if any(e < 0 for e in self.epsilons):
            raise ValidationError("RunConfig: error rates must be >= 0")

    def times(self) -> tuple:
        """The t scan grid: explicit if given, else spacing multiples."""
        if self.t_grid:
            return self.t_grid
        n = int(round(self.t_max / self.grid_spacing))
        return tuple(round(k * self.grid_spacing, 12) for k in range(1, n + 1))

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["epsilons"] = list(self.epsilons)
        d["t_grid"] = list(self.t_grid)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        fields = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - fields
        if unknown:
            raise ValidationError(f"RunConfig: unknown fields {sorted(unknown)}")
        return cls(**d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls.from_dict(json.loads(text))

    def config_hash(self) -> str:
        return hashlib.sha256(
            json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()
