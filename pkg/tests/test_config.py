import math
from dataclasses import replace

import pytest

from evysc.config import (ConfigBundle, ControllerParams, PacejkaParams,
                          PowertrainParams, ScenarioConfig, VehicleParams,
                          default_bundle, kph_to_mps, load_config, save_config)
from evysc.errors import ConfigError


def write(tmp_path, text, name="test.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_kph_to_mps():
    assert kph_to_mps(80.0) == pytest.approx(22.2222222222, abs=1e-9)
    assert kph_to_mps(0.0) == 0.0
    assert kph_to_mps(85.0) == pytest.approx(23.6111111111, abs=1e-9)


def test_empty_config_equals_defaults(tmp_path):
    loaded = load_config(write(tmp_path, ""))
    assert loaded == default_bundle()


def test_defaults_fill_omitted_controller_keys(tmp_path):
    loaded = load_config(write(tmp_path, "[controller]\nM_max = 5000.0\n"))
    assert loaded.controller.M_max == 5000.0
    assert loaded.controller.r_deadband == 0.02  # documented default
    assert loaded.controller.beta_deadband == 0.01


def test_mu_out_of_range_message(tmp_path):
    with pytest.raises(ConfigError, match=r"mu out of range \(0,1.3\]"):
        load_config(write(tmp_path, "[vehicle]\nmu = 1.5\n"))


def test_speed_kph_suffix(tmp_path):
    loaded = load_config(write(tmp_path, "[scenario]\nspeed_kph = 80\n"))
    assert loaded.scenario.speed == pytest.approx(80.0 / 3.6, rel=1e-15)


def test_deg_suffix(tmp_path):
    loaded = load_config(write(tmp_path, "[scenario]\namplitude_deg = 3\n"))
    assert loaded.scenario.amplitude == pytest.approx(math.radians(3.0), rel=1e-15)


def test_native_kph_key_not_converted(tmp_path):
    # asr_threshold_kph is a real schema key in km/h; no suffix conversion
    loaded = load_config(write(tmp_path, "[controller]\nasr_threshold_kph = 5.5\n"))
    assert loaded.controller.asr_threshold_kph == 5.5


def test_unknown_key_rejected(tmp_path):
    with pytest.raises(ConfigError, match="unknown key 'massa'"):
        load_config(write(tmp_path, "[vehicle]\nmassa = 1800\n"))


def test_unknown_section_rejected(tmp_path):
    with pytest.raises(ConfigError, match=r"unknown section \[engine\]"):
        load_config(write(tmp_path, "[engine]\nx = 1\n"))


def test_parse_error_carries_line_info(tmp_path):
    with pytest.raises(ConfigError, match="line"):
        load_config(write(tmp_path, "[vehicle]\nnot a key value pair\n"))


def test_missing_file():
    with pytest.raises(ConfigError, match="cannot read config"):
        load_config("/nonexistent/path.cfg")


def test_scenario_mu_override(tmp_path):
    loaded = load_config(write(tmp_path, "[scenario]\nmu = 0.45\n"))
    assert loaded.scenario.mu == 0.45
    assert loaded.effective_mu == 0.45
    assert default_bundle().effective_mu == 1.0  # falls back to vehicle.mu


def test_speed_floor_message(tmp_path):
    with pytest.raises(ConfigError, match="speed > 1 m/s required"):
        load_config(write(tmp_path, "[scenario]\nspeed = 0.5\n"))


def test_dt_bounds(tmp_path):
    with pytest.raises(ConfigError, match=r"dt out of range"):
        load_config(write(tmp_path, "[scenario]\ndt = 0.05\n"))


def test_torque_map_validation():
    with pytest.raises(ConfigError, match="strictly increasing"):
        PowertrainParams(torque_map=((0.0, 220.0), (0.0, 100.0))).validate()
    with pytest.raises(ConfigError, match="non-increasing after the knee"):
        PowertrainParams(torque_map=((0.0, 220.0), (300.0, 100.0),
                                     (400.0, 150.0))).validate()
    with pytest.raises(ConfigError, match=">= 0"):
        PowertrainParams(torque_map=((0.0, 220.0), (300.0, -1.0))).validate()


def test_asr_threshold_bounds():
    with pytest.raises(ConfigError, match=r"asr_threshold_kph out of range \[5,6\]"):
        ControllerParams(asr_threshold_kph=4.0).validate()
    ControllerParams(asr_threshold_kph=6.0).validate()


def test_track_width_invariant():
    with pytest.raises(ConfigError, match="2\\*wheelbase"):
        VehicleParams(l_w1=6.0).validate()


def test_pacejka_bounds():
    with pytest.raises(ConfigError, match="C out of range"):
        PacejkaParams(lateral=replace(PacejkaParams().lateral, C=3.5)).validate()
    with pytest.raises(ConfigError, match="E must be <= 1"):
        PacejkaParams(lateral=replace(PacejkaParams().lateral, E=1.5)).validate()


def test_round_trip_bit_exact_default(tmp_path):
    bundle = default_bundle()
    path = tmp_path / "rt.cfg"
    save_config(bundle, path)
    assert load_config(path) == bundle


def test_round_trip_bit_exact_modified(tmp_path):
    base = default_bundle()
    bundle = ConfigBundle(
        replace(base.vehicle, m=1723.4567890123, mu=0.8500000000000001),
        replace(base.pacejka, lateral=replace(base.pacejka.lateral, B=9.123456789)),
        replace(base.powertrain, torque_map=((0.0, 221.125), (500.0, 60.0625))),
        replace(base.controller, speed_grid=(7.77, 13.13, 39.999999999)),
        replace(base.scenario, mu=0.7777777777777, maneuver="sine",
                amplitude=0.031415926535, speed=19.191919191919),
    ).validate()
    path = tmp_path / "rt2.cfg"
    save_config(bundle, path)
    assert load_config(path) == bundle
    # second generation identical file bytes
    path2 = tmp_path / "rt3.cfg"
    save_config(load_config(path), path2)
    assert path.read_bytes() == path2.read_bytes()


def test_canonical_config_checked_in():
    from pathlib import Path
    path = Path(__file__).resolve().parent.parent / "configs" / "default.cfg"
    loaded = load_config(path)
    assert loaded == default_bundle()


def test_parameter_symbols_live_in_exactly_one_type():
    """Every geometric/inertial/tire symbol maps to exactly one loaded type."""
    owners = {
        "m": VehicleParams, "I_z": VehicleParams, "l_f": VehicleParams,
        "l_r": VehicleParams, "l_w1": VehicleParams, "l_w2": VehicleParams,
        "R_w": VehicleParams, "I_w": VehicleParams, "C_f0": VehicleParams,
        "C_r0": VehicleParams, "mu": VehicleParams, "g": VehicleParams,
        "R_q": PowertrainParams, "L_q": PowertrainParams,
        "K_b": PowertrainParams, "K_t": PowertrainParams,
        "eta_t": PowertrainParams, "k": PowertrainParams,
        "speed": ScenarioConfig,
    }
    import dataclasses
    types = (VehicleParams, PowertrainParams, ControllerParams)
    for symbol, owner in owners.items():
        holders = [t for t in types
                   if symbol in {f.name for f in dataclasses.fields(t)}]
        if owner in types:
            assert holders == [owner], symbol
        else:
            assert symbol in {f.name for f in dataclasses.fields(owner)}
