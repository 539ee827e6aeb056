import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vsnsim.belief import LaneModel, UnknownVehicleError, model_update, position_uncertainty, predict
from vsnsim.fuzzy import FuzzyNumber, crisp, normalize, uncertainty

from .oracles import clearance_time, nasch_step


def lane_with(*vehicles, length=40):
    lane = LaneModel(0, length)
    for vid, (x, v) in enumerate(vehicles):
        lane.register(vid, x, v)
    lane.flush()
    return lane


def test_first_unmeasured_step_spreads_left():
    lane = lane_with((10, 2))
    model_update(lane, green=True)
    assert lane.vehicles[0].X == (11, 12, 12, 12)
    assert position_uncertainty(lane.vehicles[0]) == 0.5


@pytest.mark.parametrize("k", [1, 2, 5, 9])
def test_uncertainty_grows_half_a_cell_per_step(k):
    lane = lane_with((0, 2), length=200)
    for _ in range(k):
        model_update(lane, green=True)
    assert position_uncertainty(lane.vehicles[0]) == 0.5 * k


def test_stopped_vehicle_restarts_in_every_component():
    lane = lane_with((0, 0), length=200)
    for _ in range(6):
        model_update(lane, green=True)
    X = normalize(lane.vehicles[0].X)
    assert X.q1 > 0
    # the nominal scenario follows the deterministic automaton
    c, v = [0], [0]
    for _ in range(6):
        c, v = nasch_step(c, v, 2, 200, [1.0], 0.0)
    assert lane.vehicles[0].X.q2 == c[0]


def test_red_face_holds_every_component():
    lane = lane_with((36, 2))
    for _ in range(6):
        model_update(lane, green=False)
    # the pessimistic scenario keeps braking one cell short of the line
    assert lane.vehicles[0].X == (38, 39, 39, 39)


def test_measurement_collapses_to_crisp():
    lane = lane_with((0, 2), (5, 2))
    for _ in range(4):
        model_update(lane, green=True)
    model_update(lane, True, {0: (0, 7, 2), 1: (0, 12, 1)}, advance=False)
    assert all(v.X.is_crisp for v in lane.vehicles)
    model_update(lane, True)
    assert all(position_uncertainty(v) <= 0.5 for v in lane.vehicles)


def test_measurement_of_unknown_vehicle():
    lane = lane_with((3, 1))
    with pytest.raises(UnknownVehicleError):
        lane.assimilate({99: (0, 4, 1)})


def test_vehicle_leaves_when_whole_support_passes_line():
    lane = lane_with((38, 2))
    model_update(lane, True)
    # (39, 40, 40, 40): still partly upstream
    assert len(lane.vehicles) == 1
    model_update(lane, True)
    assert len(lane.vehicles) == 0 and len(lane.departed) == 1
    # it no longer needs green, but still leads the pessimistic queue for a while
    assert predict(lane).N == (0, 0, 0, 0)
    for _ in range(8):
        model_update(lane, True)
    assert not lane.departed


def test_departed_leader_holds_back_only_pessimistic_follower():
    lane = lane_with((39, 0), (38, 2))
    lane.vehicles[0].X = crisp(40)
    lane._resplit()
    assert len(lane.departed) == 1
    model_update(lane, True)
    # the leader may have turned onto another link, so only q1 respects it
    assert lane.vehicles[0].X == (38, 40, 40, 40)


def test_measured_exit_removes_vehicle():
    lane = lane_with((20, 2))
    lane.assimilate({0: (None, 0, 0)})
    assert not lane.vehicles


def test_crisp_neighbour_bounds_fuzzy_follower():
    lane = LaneModel(0, 40)
    lane.register(0, 20, 2)
    lane.register(1, 10, 2)
    lane.flush()
    lane.vehicles[1].X = FuzzyNumber(15, 22, 22, 22)
    lane._enforce_order()
    assert max(lane.vehicles[1].X) == 19


def test_predict_empty_lane():
    p = predict(LaneModel(0, 40))
    assert p.N == (0, 0, 0, 0) and p.G == (0, 0, 0, 0) and not p.capped


def test_predict_vehicle_at_stop_line():
    p = predict(lane_with((39, 0)))
    assert p.G == (1, 1, 1, 1)
    assert p.N == (1, 1, 1, 1)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 39), min_size=1, max_size=12, unique=True),
       st.integers(0, 2))
def test_crisp_prediction_matches_reference_clearance(cells, v0):
    cells = sorted(cells, reverse=True)
    lane = lane_with(*[(c, v0) for c in cells])
    p = predict(lane)
    g = clearance_time(cells, [v0] * len(cells), 40, 2)
    assert p.G == crisp(g)
    assert p.N == crisp(len(cells))


def test_prediction_cap_is_flagged():
    lane = lane_with(*[(c, 0) for c in range(39, 0, -1)], length=400)
    p = predict(lane, cap=10)
    assert p.capped and max(p.G) == 10


def test_green_uncertainty_grows_with_spread():
    def unc_for(width):
        lane = lane_with((20, 2))
        lane.vehicles[0].X = FuzzyNumber(20 - width, 20, 20, 20)
        return uncertainty(predict(lane).G)

    values = [unc_for(w) for w in (0, 2, 4, 8)]
    assert values[0] == 0
    assert values[2] > 0
    assert values == sorted(values)


def test_crisp_lane_tracks_deterministic_world():
    # with p = 0 the nominal component follows the automaton exactly, and
    # measuring everyone reproduces the reference state
    rng = np.random.default_rng(1)
    cells = sorted(rng.choice(20, size=8, replace=False).tolist(), reverse=True)
    lane = lane_with(*[(c, 1) for c in cells], length=80)
    c, v = cells, [1] * len(cells)
    for t in range(25):
        green = t >= 10
        model_update(lane, green)
        c, v = nasch_step(c, v, 2, 80, [1.0] * len(c), 0.0, stop=None if green else 80)
        assert [veh.X.q2 for veh in lane.vehicles] == c
        assert all(min(veh.X) <= x <= max(veh.X) for veh, x in zip(lane.vehicles, c))
        lane.assimilate({veh.id: (0, x, vv) for veh, x, vv in zip(lane.vehicles, c, v)})
        assert [veh.X for veh in lane.vehicles] == [crisp(x) for x in c]
