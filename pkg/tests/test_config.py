import json
from fractions import Fraction

import pytest

from bml import config as cf


def sample_raw():
    return {
        "kind": "slope",
        "bundle": "split_p1:0,2",
        "k": 3,
        "grid": {"n_radial": 4, "n_angular": 8, "depth": 8},
        "ps": {"type": "two_step", "weights": ["2/3", "-1"], "sub": [1]},
        "t_end": 12.0,
        "samples": 10,
        "tol": 0.01,
        "seed": 3,
        "out": None,
    }


def test_parse_and_roundtrip():
    cfg = cf.parse_config(sample_raw())
    assert cfg.kind == "slope"
    assert cfg.ps.weights == (Fraction(2, 3), Fraction(-1))
    again = cf.parse_config(cf.config_to_dict(cfg))
    assert again == cfg


def test_defaults():
    cfg = cf.parse_config({"kind": "mna"})
    assert cfg.bundle == "split_p1:0,2"
    assert cfg.k == 3
    assert cfg.ps.type == "none"


def test_bundle_parsing():
    assert cf.parse_bundle("split_p1:1,1").degrees == (1, 1)
    assert cf.parse_bundle("euler_tp2").kind == "euler_tp2"
    with pytest.raises(cf.ConfigError):
        cf.parse_bundle("mystery")
    with pytest.raises(cf.ConfigError):
        cf.parse_bundle("split_p1:a,b")


def test_validation_errors():
    with pytest.raises(cf.ConfigError, match="kind"):
        cf.parse_config({"kind": "nope"})
    with pytest.raises(cf.ConfigError, match="regularity"):
        cf.parse_config({"kind": "mna", "bundle": "split_p1:-4", "k": 2})
    with pytest.raises(cf.ConfigError, match="tol"):
        cf.parse_config({"kind": "mna", "tol": -1})
    with pytest.raises(cf.ConfigError, match="t_end"):
        cf.parse_config({"kind": "mna", "t_end": 0})
    with pytest.raises(cf.ConfigError, match="samples"):
        cf.parse_config({"kind": "mna", "samples": 1})
    with pytest.raises(cf.ConfigError, match="grid"):
        cf.parse_config({"kind": "mna", "grid": {"spacing": 2}})


def test_ps_validation():
    with pytest.raises(cf.ConfigError, match="ps"):
        cf._parse_ps("diag")
    with pytest.raises(cf.ConfigError, match="type"):
        cf._parse_ps({"type": "spiral"})
    with pytest.raises(cf.ConfigError, match="weights"):
        cf._parse_ps({"type": "two_step", "weights": ["1"], "sub": [0]})
    with pytest.raises(cf.ConfigError, match="sub"):
        cf._parse_ps({"type": "two_step", "weights": ["1", "-1"]})


def test_ps_build_diag_dimension_check():
    cfg = cf.parse_config(
        {"kind": "slope", "bundle": "split_p1:0", "k": 1,
         "ps": {"type": "diag", "weights": ["1", "-1", "0"]}}
    )
    with pytest.raises(cf.ConfigError, match="dimension"):
        cfg.ps.build(cfg.section_basis())


def test_load_config(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(sample_raw()))
    cfg = cf.load_config(str(path))
    assert cfg.samples == 10
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(cf.ConfigError, match="JSON"):
        cf.load_config(str(bad))
