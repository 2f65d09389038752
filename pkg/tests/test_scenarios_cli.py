import json

import numpy as np
import pytest

from dispcancel.cli import main
from dispcancel.errors import ConfigError
from dispcancel.scenarios import load_config

FAST = ["--modes", "64", "--realizations", "40", "--lag-max", "15"]


def run(tmp_path, *argv):
    return main(list(argv) + ["--out-dir", str(tmp_path)])


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def read_csv(path):
    return np.loadtxt(path, delimiter=",", skiprows=1)


def _write_config(tmp_path, text):
    p = tmp_path / "cfg.yaml"
    p.write_text(text)
    return str(p)


# -- config --


def test_defaults():
    cfg = load_config()
    assert (cfg.seed, cfg.n_modes, cfg.n_realizations) == (0, 256, 10_000)
    assert cfg.grid.window == 40.0 and cfg.grid.step == 0.05
    assert cfg.to_dict()["media"] == {"d1": 0.0, "d2": 0.0, "group_delay1": 0.0, "group_delay2": 0.0}


def test_precedence_defaults_file_flags(tmp_path):
    path = _write_config(tmp_path, "seed: 5\nn_modes: 32\nmedia:\n  d1: 0.5\n")
    cfg = load_config(path, {"seed": 9})
    assert cfg.seed == 9 and cfg.n_modes == 32 and cfg.media.d1 == 0.5 and cfg.media.d2 == 0.0


def test_unknown_key_is_rejected(tmp_path):
    path = _write_config(tmp_path, "media:\n  d3: 1.0\n")
    with pytest.raises(ConfigError) as exc:
        load_config(path)
    assert exc.value.field == "media.d3"
    assert run(tmp_path, "hbt", "--config", path) == 2


def test_bad_values_exit_2(tmp_path, capsys):
    assert run(tmp_path, "hbt", "--realizations", "0") == 2
    assert "n_realizations" in capsys.readouterr().err
    path = _write_config(tmp_path, "grid:\n  step: -0.1\n")
    assert run(tmp_path, "hbt", "--config", path) == 2
    path = _write_config(tmp_path, "n_modes: many\n")
    assert run(tmp_path, "hbt", "--config", path) == 2


def test_rank_deficient_sweep_reported_before_simulation(tmp_path, capsys):
    path = _write_config(tmp_path, "sweep:\n  points: 2\n")
    assert run(tmp_path, "sweep", "--config", path) == 2
    assert "rank-deficient" in capsys.readouterr().err
    assert not (tmp_path / "sweep.csv").exists()


def test_window_guard_exit_3(tmp_path):
    path = _write_config(tmp_path, "pulse:\n  window: 20\n")
    assert run(tmp_path, "pulse", "--config", path, "--d1", "5", "--d2", "-5") == 3


# -- scenarios --


def test_hbt_outputs_and_config_echo(tmp_path, capsys):
    assert run(tmp_path, "hbt", *FAST, "--d1", "2", "--d2", "-2") == 0
    printed = json.loads(capsys.readouterr().out)
    s = read_json(tmp_path / "hbt_summary.json")
    assert s["config"]["n_realizations"] == 40 and s["config"]["envelope"]["rms_width"] == 1.0
    assert "config" not in printed and printed["scenario"] == "hbt"
    with open(tmp_path / "hbt_reference.csv") as fh:
        assert fh.readline().strip() == "lag,g2,stderr"
    curve = read_csv(tmp_path / "hbt_dispersed.csv")
    assert curve.shape == (601, 3)
    assert s["classical_vs_quantum"]["quantum_background"] == 0.0


def test_outputs_are_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert run(d, "hbt", *FAST, "--d1", "1", "--d2", "1", "--seed", "3") == 0
    for name in ("hbt_reference.csv", "hbt_dispersed.csv", "hbt_summary.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_equal_media_degrade_hbt_peak(tmp_path):
    assert run(tmp_path, "hbt", "--realizations", "1000", "--d1", "1", "--d2", "1") == 0
    c = read_json(tmp_path / "hbt_summary.json")["comparison"]
    assert c["deficit_at_zero"] > 5 * c["deficit_stderr"]


def test_fields_identities(tmp_path):
    assert run(tmp_path, "fields", "--d1", "1", "--d2", "-1", "--seed", "4") == 0
    s = read_json(tmp_path / "fields_summary.json")
    tr = read_csv(tmp_path / "fields.csv")
    a, b, c, d = tr[:, 1], tr[:, 2], tr[:, 3], tr[:, 4]
    scale = a.mean()
    assert np.max(np.abs(a - b)) <= 1e-12 * scale
    assert np.max(np.abs(c - d)) <= 1e-9 * scale
    assert np.max(np.abs(c - a)) > 0.1 * scale
    assert s["gap_before"] <= 1e-12 and s["gap_after"] <= 1e-9 and s["field_change_beam1"] > 0.1


def test_fields_without_media(tmp_path):
    assert run(tmp_path, "fields", "--seed", "2") == 0
    tr = read_csv(tmp_path / "fields.csv")
    np.testing.assert_allclose(tr[:, 3], tr[:, 1], rtol=0, atol=1e-12 * tr[:, 1].mean())


def test_fields_markov_backend(tmp_path):
    path = _write_config(tmp_path, "backend: markov\n")
    assert run(tmp_path, "fields", "--config", path, "--d1", "1", "--d2", "-1") == 0
    s = read_json(tmp_path / "fields_summary.json")
    assert s["gap_before"] <= 1e-12 and s["gap_after"] <= 1e-9 and s["field_change_beam1"] > 0.1


def test_sweep_scenario(tmp_path):
    path = _write_config(tmp_path, "sweep:\n  points: 3\n  d_max: 0.1\n")
    assert run(tmp_path, "sweep", "--config", path, "--realizations", "200", "--modes", "64") == 0
    s = read_json(tmp_path / "sweep_fit.json")
    table = read_csv(tmp_path / "sweep.csv")
    assert table.shape == (9, 5)
    assert set(s["fit"]) >= {"a", "b1", "b2", "c1", "c2", "d", "residual_rms", "stderr"}
    assert s["config"]["sweep"]["realizations"] == 200


def test_pulse_scenario(tmp_path):
    assert run(tmp_path, "pulse", "--d1", "5", "--d2", "-5") == 0
    s = read_json(tmp_path / "pulse_summary.json")
    c = s["classical"]
    assert c["growth_beam1"] == pytest.approx(c["oracle_growth_beam1"], rel=0.03)
    assert c["growth_beam2"] == pytest.approx(c["oracle_growth_beam2"], rel=0.03)
    assert s["quantum"]["profile_unchanged"]
    assert run(tmp_path, "pulse") == 0
    c0 = read_json(tmp_path / "pulse_summary.json")["classical"]
    assert c0["growth_beam1"] == pytest.approx(1.0, abs=1e-12)


def test_identical_beams_scenario(tmp_path):
    assert run(tmp_path, "identical-beams", "--realizations", "1000", "--d1", "0.5", "--d2", "-0.5") == 0
    c = read_json(tmp_path / "identical_summary.json")["comparison"]
    assert c["deficit_at_zero"] > 5 * c["deficit_stderr"]
    assert run(tmp_path, "identical-beams", "--realizations", "1000", "--d1", "0.5", "--d2", "0.5") == 0
    c = read_json(tmp_path / "identical_summary.json")["comparison"]
    assert c["max_abs_z"] < 4


def test_quantum_scenario(tmp_path):
    assert run(tmp_path, "quantum", "--d1", "1.5", "--d2", "0.5") == 0
    s = read_json(tmp_path / "quantum_summary.json")
    assert s["rms_width_dispersed"] == pytest.approx(s["oracle_rms_width_dispersed"], rel=0.01)
    assert run(tmp_path, "quantum", "--d1", "3", "--d2", "-3") == 0
    assert read_json(tmp_path / "quantum_summary.json")["profile_unchanged"]
