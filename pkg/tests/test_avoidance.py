import math

import numpy as np
import pytest

from semdnav.avoidance import (ET, STRAIGHT, TURN_LEFT, TURN_RIGHT, MotorCommand, NetConfig,
                               OfiReadout, assemble, decode_motor, events_to_input, gap_min,
                               intersaccade_velocity, map_events_to_sptc, mot_injection)
from semdnav.snn import ConfigError
from semdnav.vision import from_event_list

N_CONNECT = (0, 2, 4, 8)
COLUMN_DEG = 140.0 / 64


@pytest.fixture(scope="module")
def net():
    return assemble(NetConfig())


def test_census_near_stated_size(net):
    c = net.census()
    assert 0.8 * 4000 <= c["neurons"] <= 1.2 * 4000
    assert 0.8 * 300_000 <= c["synapses"] <= 1.2 * 300_000


@pytest.mark.parametrize("n", N_CONNECT)
def test_gap_min_formula(n):
    assert gap_min(n) == (2 * n + 1) * 140.0 / 64


@pytest.mark.parametrize("n", N_CONNECT)
def test_gap_min_matches_realised_inhibition_footprint(n):
    """An interior winner needs every column it listens to free of flow."""
    w = [r for r in assemble(NetConfig(n_connect=n)).wiring()
         if r[0] == "INT_LR" and r[2] == "WTA"]
    srcs = {}
    for s, a, _, b, *_ in w:
        srcs.setdefault(b, set()).add(a)
    interior = srcs[32]
    assert max(interior) - min(interior) + 1 == len(interior)
    assert math.isclose(len(interior) * COLUMN_DEG, gap_min(n))


def test_gap_min_rejects_negative():
    with pytest.raises(ValueError):
        gap_min(-1)


def test_mot_injection_table():
    assert mot_injection(ET) == ("MOT1", 0)
    assert mot_injection(0) == ("MOT1", 50)
    assert mot_injection(8) == ("MOT1", 50)
    assert mot_injection(9) == ("MOT1", 50)
    assert mot_injection(31) == ("MOT1", 94)
    assert mot_injection(32) == ("MOT2", 94)
    assert mot_injection(53) == ("MOT2", 52)
    assert mot_injection(54) == ("MOT2", 50)
    assert mot_injection(63) == ("MOT2", 50)
    assert mot_injection(40, "literal") == ("MOT2", 23)
    with pytest.raises(ValueError):
        mot_injection(64)


def test_left_right_symmetry_of_turn_durations():
    for i in range(32):
        left = decode_motor(i)
        right = decode_motor(63 - i)
        assert left.mode == TURN_LEFT and right.mode == TURN_RIGHT
        assert left.remaining == right.remaining
        assert left.omega == -right.omega


def test_escape_turn_is_a_full_reversal():
    c = decode_motor(ET)
    assert c.duration_ms == pytest.approx(960.0)
    assert c.omega * c.duration_ms / 1000.0 == pytest.approx(180.0)


def test_central_winner_turns_least():
    durations = [decode_motor(i).duration_ms for i in range(32)]
    assert durations[31] == min(durations) == pytest.approx(20.0)
    assert durations[0] == max(durations)


def test_straight_command_has_no_rotation():
    assert MotorCommand.straight(1.0).mode == STRAIGHT
    with pytest.raises(ValueError):
        MotorCommand(STRAIGHT, 1.0, 5.0, 0)


@pytest.mark.parametrize("f, v", [(0.0, 1.0), (250.0, 0.75), (1000.0, 0.0), (5000.0, 0.0)])
def test_speed_law(f, v):
    assert intersaccade_velocity(f) == pytest.approx(v)


def test_speed_law_rejects_negative_rate():
    with pytest.raises(ValueError):
        intersaccade_velocity(-1.0)


def test_ofi_readout_window():
    r = OfiReadout()
    assert r.mean_rate == 0.0
    r.add(3, 5.0)
    r.add(2, 5.0)
    assert r.mean_rate == pytest.approx(500.0)
    r.reset()
    assert r.mean_rate == 0.0


def test_event_mapping_to_macropixels():
    ev = from_event_list([(0, 0, 0, 1), (0, 1, 1, 0), (0, 2, 0, 1), (0, 127, 39, 1)])
    idx, rejected = map_events_to_sptc(ev)
    assert rejected == 0
    assert idx.tolist() == [0, 0, 1, 19 * 64 + 63]


def test_events_to_input_ticks():
    ev = from_event_list([(1000, 0, 0, 1), (1050, 3, 2, 1), (1000 + 10_000, 0, 0, 1)])
    (ticks, pix), rejected = events_to_input(ev, 1000, 50)
    assert ticks.tolist() == [0, 0]
    assert pix.tolist() == [0, 2 * 128 + 3]
    assert rejected == 1


def test_config_validation():
    with pytest.raises(ConfigError):
        NetConfig(n_connect=-1)
    with pytest.raises(ConfigError):
        NetConfig(tau_fac_ms=0.0)
    with pytest.raises(ConfigError):
        NetConfig(sizes={"WTA": 10})
    with pytest.raises(ConfigError):
        NetConfig(mot2_mapping="other")
    with pytest.raises(ConfigError):
        NetConfig.from_dict({"bogus": 1})


def test_config_dict_round_trip():
    cfg = NetConfig(n_connect=2, tau_fac_ms=5.0)
    assert NetConfig.from_dict(cfg.to_dict()) == cfg


def test_wta_is_pure_inverse_input(net):
    """Motion detectors only inhibit the decision layer."""
    kinds = {r[6] for r in net.wiring() if r[0].startswith("INT_") and r[2] == "WTA"}
    assert kinds == {"inhibitory"}


def test_assembly_is_deterministic():
    a = list(assemble(NetConfig()).wiring())
    b = list(assemble(NetConfig()).wiring())
    assert a == b
    assert np.isfinite([r[4] for r in a]).all()
