import json

import pytest

from emtrack.config import PipelineConfig, bin_alignment, config_from_dict, config_to_dict, dump_config, load_config
from emtrack.errors import ParseError, ValidationError
from emtrack.pipeline import SEED_ENV, seed_override


def write(tmp_path, text, name="cfg.json"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_empty_object_gives_defaults(tmp_path):
    cfg = load_config(write(tmp_path, "{}"))
    assert cfg == PipelineConfig()
    assert cfg.array.K == 8
    assert cfg.acquisition.sample_rate == 100000.0
    assert cfg.acquisition.frame_size == 1000
    assert all(bin_alignment(cfg))


def test_nyquist_rejected():
    coils = [{"center": [0.07 * i, 0.0, 0.0], "frequency": 20000.0 + 2000.0 * i} for i in range(4)]
    coils.append({"center": [0.0, 0.07, 0.0], "frequency": 60000.0})
    with pytest.raises(ValidationError, match="Nyquist"):
        config_from_dict({"array": {"coils": coils}})


def test_too_few_coils():
    coils = [{"center": [0.07 * i, 0.0, 0.0], "frequency": 20000.0 + 2000.0 * i} for i in range(4)]
    with pytest.raises(ValidationError):
        config_from_dict({"array": {"coils": coils}})


@pytest.mark.parametrize("data, where", [
    ({"bogus": 1}, "config"),
    ({"acquisition": {"framesize": 500}}, "acquisition"),
    ({"solver": {"bounds": {"lower": [0, 0, 0.1, 0, 0], "middle": 1}}}, "solver.bounds"),
    ({"array": {"coils": [{"center": [0, 0, 0], "frequency": 1.0, "colour": "red"}]}}, "array.coils[0]"),
    ({"trajectory": {"start_pose": {"x": 0, "w": 1}}}, "trajectory.start_pose"),
])
def test_unknown_keys_rejected(data, where):
    with pytest.raises(ValidationError, match="unknown key") as info:
        config_from_dict(data)
    assert where in str(info.value)


def test_invalid_values_name_section():
    with pytest.raises(ValidationError, match="acquisition"):
        config_from_dict({"acquisition": {"frame_size": 10}})
    with pytest.raises(ValidationError, match="server.port"):
        config_from_dict({"server": {"port": 70000}})
    with pytest.raises(ValidationError, match="start_pose"):
        config_from_dict({"trajectory": {"start_pose": {"z": 0.9}}})
    with pytest.raises(ValidationError, match="solver"):
        config_from_dict({"solver": {"scan_spacing": 0}})


def test_parse_error_position(tmp_path):
    p = write(tmp_path, '{\n  "acquisition": {\n    "frame_size": 500,\n  }\n}')
    with pytest.raises(ParseError) as info:
        load_config(p)
    assert (info.value.line, info.value.column) == (4, 3)
    assert "line 4" in str(info.value)


def test_partial_override(tmp_path):
    cfg = load_config(write(tmp_path, json.dumps({
        "acquisition": {"frame_size": 500, "noise_sigma": 1e-6},
        "solver": {"max_iterations": 50, "scan_seeds": 3},
        "server": {"port": 19000, "device": "Probe"},
    })))
    assert cfg.acquisition.frame_size == 500 and cfg.acquisition.noise_sigma == 1e-6
    assert cfg.solver.max_iterations == 50 and cfg.solver.scan_seeds == 3
    assert cfg.server == type(cfg.server)("0.0.0.0", 19000, "Probe")
    assert cfg.array == PipelineConfig().array


def test_round_trip_default(tmp_path):
    cfg = PipelineConfig()
    again = load_config(write(tmp_path, dump_config(cfg)))
    assert again == cfg
    assert config_to_dict(again) == config_to_dict(cfg)


def test_round_trip_custom(tmp_path):
    data = {
        "array": {"coils": [
            {"center": [0.05 * (i % 3), 0.05 * (i // 3), 0.0], "frequency": 15000.0 + 1000.0 * i,
             "moment": 0.3, "calibration_scale": 0.98}
            for i in range(6)
        ]},
        "acquisition": {"frame_size": 2000, "pacing": "unpaced", "seed": 7},
        "solver": {"bounds": {"lower": [-0.1, -0.1, 0.03, -3.2, -0.1], "upper": [0.2, 0.2, 0.25, 3.2, 1.7]}},
        "trajectory": {"kind": "linear_path", "start_pose": {"x": 0.05, "y": 0.05, "z": 0.1},
                       "velocity": [0.01, 0, 0], "box": {"lower": [0, 0, 0.05], "upper": [0.1, 0.1, 0.15]}},
    }
    cfg = config_from_dict(data)
    p = write(tmp_path, dump_config(cfg))
    assert load_config(p) == cfg
    assert dump_config(load_config(p)) == dump_config(cfg)


def test_seed_env_override(monkeypatch):
    cfg = PipelineConfig()
    monkeypatch.delenv(SEED_ENV, raising=False)
    assert seed_override(cfg) is cfg
    monkeypatch.setenv(SEED_ENV, "42")
    assert seed_override(cfg).acquisition.seed == 42
