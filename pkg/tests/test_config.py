import json

import pytest

from qmpso.config import RunConfig
from qmpso.errors import ValidationError


def test_defaults_are_valid():
    cfg = RunConfig()
    assert cfg.L == 12
    assert cfg.chi_mps == 2 ** cfg.n_l_mps


def test_chi_layer_consistency_enforced():
    with pytest.raises(ValidationError):
        RunConfig(chi_mps=8, n_l_mps=2)
    with pytest.raises(ValidationError):
        RunConfig(epsilons=(1e-3, -1e-4))


def test_mpo_layer_bound():
    # a deep propagator block cannot exceed what the preparation depth supports
    with pytest.raises(ValidationError):
        RunConfig(chi_mps=8, n_l_mps=3, n_l_mpo=2)
    RunConfig(chi_mps=32, n_l_mps=5, n_l_mpo=2)  # fine


def test_round_trip_dict_and_json():
    cfg = RunConfig(L=10, t_grid=(0.5, 1.0), epsilons=(1e-3,))
    assert RunConfig.from_dict(cfg.to_dict()) == cfg
    assert RunConfig.from_json(cfg.to_json()) == cfg


def test_from_dict_rejects_unknown_fields():
    d = RunConfig().to_dict()
    d["typo_field"] = 3
    with pytest.raises(ValidationError):
        RunConfig.from_dict(d)


def test_config_hash_stable_and_sensitive():
    a = RunConfig()
    b = RunConfig()
    assert a.config_hash() == b.config_hash()
    c = RunConfig(L=10)
    assert a.config_hash() != c.config_hash()
    # hash built from sorted keys: a reordered dict hashes the same
    d = dict(reversed(list(a.to_dict().items())))
    assert RunConfig.from_dict(d).config_hash() == a.config_hash()


def test_times_grid():
    cfg = RunConfig(t_max=1.0, grid_spacing=0.25)
    assert cfg.times() == (0.25, 0.5, 0.75, 1.0)
    explicit = RunConfig(t_grid=(0.3, 0.9))
    assert explicit.times() == (0.3, 0.9)


def test_json_is_plain_types():
    doc = json.loads(RunConfig().to_json())
    assert isinstance(doc["epsilons"], list)
    assert isinstance(doc["L"], int)
