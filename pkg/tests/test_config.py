import json

import numpy as np
import pytest

from dtwinsim.config import NetworkConfig, load_config, save_config


def test_defaults_match_reference_scenario():
    cfg = NetworkConfig()
    assert cfg.num_mus == 30
    assert cfg.num_bss == 5
    assert cfg.frame_slots == 100
    assert cfg.episode_frames == 50
    assert cfg.slot_s == 0.05
    assert cfg.bandwidth_hz == 1.0e7
    assert cfg.wired_rate_bps == 1.0e7
    assert cfg.p_max_w == 0.5
    assert cfg.f_max_hz == 1.0e10
    assert cfg.request_prob == 0.5
    assert cfg.rician_k == 10.0
    assert cfg.speed_min_mps == 2.0 and cfg.speed_max_mps == 10.0
    assert cfg.area_width_m == 1000.0
    assert cfg.fail_tolerance == 0.2
    assert cfg.queue_weight == 1.0
    assert cfg.reward_scale == 100.0
    assert cfg.migration_slots == 10
    assert cfg.data_bits_min == 15000.0 and cfg.data_bits_max == 25000.0
    assert cfg.cycles_per_bit_min == 550.0 and cfg.cycles_per_bit_max == 700.0
    assert cfg.tau_frac_min == 0.5 and cfg.tau_frac_max == 1.0


def test_db_conversion_at_load():
    cfg = NetworkConfig()
    # -30 dB and -90 dBW, converted once at load
    assert cfg.ref_gain_lin == pytest.approx(1e-3, rel=1e-12)
    assert cfg.noise_w == pytest.approx(1e-9, rel=1e-12)


def test_derived_counts():
    cfg = NetworkConfig(num_mus=7, num_bss=3)
    assert cfg.num_agents == 7 + 3 + 1
    assert cfg.episode_slots == cfg.frame_slots * cfg.episode_frames
    assert cfg.cost_normalizer == cfg.episode_frames * 7 * cfg.frame_slots


def test_roundtrip_and_missing_keys(tmp_path):
    path = tmp_path / "cfg.json"
    with open(path, "w") as fh:
        json.dump({"num_mus": 4, "num_bss": 2, "seed": 3}, fh)
    cfg = load_config(path)
    assert cfg.num_mus == 4 and cfg.num_bss == 2 and cfg.seed == 3
    assert cfg.bandwidth_hz == 1.0e7  # missing key -> default

    save_config(cfg, tmp_path / "echo.json")
    again = load_config(tmp_path / "echo.json")
    assert again == cfg


def test_unknown_key_rejected(tmp_path):
    path = tmp_path / "bad.json"
    with open(path, "w") as fh:
        json.dump({"num_mus": 4, "bandwidht_hz": 1e7}, fh)
    with pytest.raises(ValueError, match="bandwidht_hz"):
        load_config(path)


@pytest.mark.parametrize("field,value", [
    ("num_mus", 0),
    ("request_prob", 1.5),
    ("fail_tolerance", 0.0),
    ("fail_tolerance", 1.0),
    ("path_loss_exp", 1.5),
    ("migration_slots", 100),      # G must stay below the frame length
    ("migration_slots", -1),
    ("tau_frac_max", 1.2),
    ("speed_memory", 1.1),
    ("p_max_w", 0.0),
    ("data_bits_min", -5.0),
])
def test_invalid_values_rejected(field, value):
    with pytest.raises(ValueError):
        NetworkConfig(**{field: value})


def test_bs_layout_deterministic_and_inside():
    cfg = NetworkConfig(num_mus=4, num_bss=5)
    pos = cfg.bs_position_array()
    assert pos.shape == (5, 2)
    assert np.array_equal(pos, cfg.bs_position_array())
    assert np.all(pos >= 0) and np.all(pos <= cfg.area_width_m)
    # center server present
    assert np.allclose(pos[0], [500.0, 500.0])


def test_explicit_bs_positions():
    cfg = NetworkConfig(num_mus=2, num_bss=2,
                        bs_positions=[[100.0, 100.0], [900.0, 900.0]])
    assert np.allclose(cfg.bs_position_array(),
                       [[100.0, 100.0], [900.0, 900.0]])
    with pytest.raises(ValueError):
        NetworkConfig(num_mus=2, num_bss=2, bs_positions=[[100.0, 100.0]])
    with pytest.raises(ValueError):
        NetworkConfig(num_mus=2, num_bss=2,
                      bs_positions=[[100.0, 100.0], [1900.0, 900.0]])
