import numpy as np
import pytest

from vsnsim.belief import Prediction
from vsnsim.controller import (
    INTERGREEN,
    ControllerState,
    DegenerateDenominatorError,
    StreamState,
    compute_priority,
    decide,
    decision_uncertainty,
    execute,
    faces,
    hold,
    refresh_priorities,
    refresh_stabilization,
)
from vsnsim.fuzzy import FuzzyNumber, crisp


def pred(N, G):
    N = N if isinstance(N, FuzzyNumber) else crisp(N)
    G = G if isinstance(G, FuzzyNumber) else crisp(G)
    return Prediction(N, G)


def state_with(*predictions, sigma=0, **kw):
    st = ControllerState.create(len(predictions), initial=sigma, **kw)
    for s, p in zip(st.streams, predictions):
        s.prediction = p
    return st


# --- stabilization --------------------------------------------------------------

def test_long_red_joins_omega():
    st = state_with(pred(3, 10), pred(3, 10))
    st.streams[1].r = 130
    refresh_stabilization(st)
    assert st.streams[1].Z == (145, 145, 145, 145)
    assert st.omega == [1]


def test_short_red_does_not_join():
    st = state_with(pred(3, 10), pred(3, 10))
    refresh_stabilization(st)
    assert st.streams[1].Z == crisp(15)
    assert st.omega == []


def test_symmetric_boundary_does_not_join():
    # P(Z >= 120) is exactly one half: the join rule needs strictly more
    st = state_with(pred(1, 0), pred(1, FuzzyNumber(100, 110, 110, 120)))
    st.streams[1].r = 5
    refresh_stabilization(st)
    assert st.p_exceeds(1) == pytest.approx(0.5)
    assert st.omega == []


def test_served_and_empty_streams_do_not_join():
    st = state_with(pred(0, 0), pred(3, 10))
    st.streams[0].r = 200  # green stream 0 itself is served
    st.streams[1].r = 200
    st.green = 1
    st.sigma = 1
    refresh_stabilization(st)
    assert st.omega == []


def test_omega_is_fifo_by_insertion():
    st = state_with(pred(2, 5), pred(2, 5), pred(2, 5))
    st.green = st.sigma = 0
    st.streams[2].r = 150
    refresh_stabilization(st)
    st.streams[1].r = 150
    refresh_stabilization(st)
    assert st.omega == [2, 1]
    assert decide(st) == (2, 1.0)


# --- priorities -------------------------------------------------------------------

def test_priority_examples():
    assert compute_priority(StreamState(0, prediction=pred(0, 7)), tau_pen=5) == crisp(0)
    assert compute_priority(StreamState(0, prediction=pred(5, 5)), tau_pen=0) == crisp(0.5)
    pi = compute_priority(StreamState(0, prediction=pred(FuzzyNumber(4, 5, 5, 6), 5)), tau_pen=5)
    assert pi.astuple() == pytest.approx((4 / 15, 1 / 3, 1 / 3, 2 / 5))


def test_penalty_applies_to_challengers_only():
    st = state_with(pred(5, 5), pred(5, 5))
    refresh_priorities(st)
    assert st.streams[0].tau_pen == 0 and st.streams[1].tau_pen == 5
    assert st.streams[0].pi == crisp(0.5)
    assert st.streams[1].pi == crisp(5 / 15)


def test_degenerate_denominator():
    s = StreamState(0, tau=0.0, prediction=pred(1, 0))
    with pytest.raises(DegenerateDenominatorError):
        compute_priority(s, tau_pen=0, eps=0)
    assert compute_priority(s, tau_pen=0, eps=1.0) == crisp(1.0)


# --- decisions --------------------------------------------------------------------

def test_decide_crisp_argmax():
    st = state_with(pred(5, 5), pred(1, 5))
    refresh_priorities(st)
    assert decide(st) == (0, 1.0)


def test_decide_identical_fuzzy_priorities():
    st = state_with(pred(0, 0), pred(0, 0))
    st.streams[0].pi = FuzzyNumber(0.1, 0.2, 0.2, 0.3)
    st.streams[1].pi = FuzzyNumber(0.1, 0.2, 0.2, 0.3)
    idx, conf = decide(st)
    assert idx == 0 and conf == pytest.approx(0.5)


def test_decide_keeps_current_stream_on_a_tie():
    st = state_with(pred(2, 5), pred(2, 5), sigma=1)
    st.streams[0].pi = st.streams[1].pi = crisp(0.2)
    assert decide(st)[0] == 1


def test_decide_without_demand_keeps_stream():
    st = state_with(pred(0, 0), pred(0, 0), sigma=1)
    refresh_priorities(st)
    assert decide(st) == (1, 1.0)


def test_decision_uncertainty_examples():
    st = state_with(pred(1, 10), pred(1, 10))
    st.streams[0].Z = crisp(150)
    assert decision_uncertainty(st, 0) == (0.0, 0.0, 0.0)

    # P(Z >= 120) = 0.9 with Z uniform on [110, 210]
    st.streams[0].Z = FuzzyNumber(110, 110, 210, 210)
    total, stab, opt = decision_uncertainty(st, 0)
    assert stab == pytest.approx(0.2) and opt == 0.0 and total == pytest.approx(0.2)

    st.streams[0].Z = crisp(10)
    st.streams[0].pi = FuzzyNumber(0.1, 0.2, 0.2, 0.3)
    st.streams[1].pi = FuzzyNumber(0.1, 0.2, 0.2, 0.3)
    total, stab, opt = decision_uncertainty(st, 0)
    assert stab == 0.0 and opt == pytest.approx(1.0) and total == pytest.approx(1.0)


def test_decision_uncertainty_random_states_bounded():
    rng = np.random.default_rng(0)
    for _ in range(2000):
        st = state_with(pred(1, 1), pred(1, 1))
        for s in st.streams:
            s.Z = FuzzyNumber(*np.sort(rng.uniform(0, 250, 4)))
            s.pi = FuzzyNumber(*np.sort(rng.uniform(0, 1, 4)))
        sigma = int(rng.integers(0, 2))
        total, stab, opt = decision_uncertainty(st, sigma)
        assert 0 <= total <= 1 and 0 <= stab <= 1 and 0 <= opt <= 1
        if st.p_exceeds(sigma) > 0.5:
            assert opt == 0


# --- execution --------------------------------------------------------------------

def test_same_stream_keeps_faces():
    st = state_with(pred(1, 1), pred(1, 1))
    assert execute(st, 0) == ("green", "red")
    assert execute(st, 0) == ("green", "red")


def test_switch_passes_five_intergreen_seconds():
    st = state_with(pred(1, 1), pred(1, 1))
    shown = [execute(st, 1) for _ in range(8)]
    assert shown[:5] == [("intergreen", "intergreen")] * 5
    assert shown[5:] == [("red", "green")] * 3


def test_requests_during_intergreen_are_ignored():
    st = state_with(pred(1, 1), pred(1, 1))
    execute(st, 1)
    for _ in range(4):
        execute(st, 0)
    assert st.phase == INTERGREEN or st.green == 1
    assert execute(st, 0) == ("red", "green")


def test_new_green_lasts_at_least_one_second():
    st = state_with(pred(1, 1), pred(1, 1))
    for _ in range(5):
        execute(st, 1)
    assert execute(st, 0) == ("red", "green")
    assert execute(st, 0) == ("intergreen", "intergreen")


def test_hold_advances_timers_only():
    st = state_with(pred(1, 1), pred(1, 1))
    for _ in range(3):
        assert hold(st) == ("green", "red")
    assert st.streams[1].r == 3 and st.streams[0].r == 0
    execute(st, 1)
    assert hold(st) == ("intergreen", "intergreen")
    for _ in range(3):
        hold(st)
    assert hold(st) == ("red", "green")


def test_red_time_counts_from_green_end():
    st = state_with(pred(1, 1), pred(1, 1))
    for _ in range(5):
        execute(st, 1)
    assert st.streams[0].r == 5
    execute(st, 1)
    assert st.streams[1].r == 0 and st.streams[0].r == 6


def test_omega_member_cleared_when_its_green_ends():
    st = state_with(pred(3, 10), pred(3, 10))
    st.streams[1].r = 150
    refresh_stabilization(st)
    for _ in range(6):
        execute(st, 1)
    assert st.omega == [1]
    st.omega.append(0)
    for _ in range(2):
        execute(st, 0)
    assert st.omega == [0]


def test_invalid_stream():
    with pytest.raises(IndexError):
        execute(state_with(pred(1, 1), pred(1, 1)), 2)


def test_faces_never_two_greens():
    st = state_with(pred(1, 1), pred(1, 1))
    rng = np.random.default_rng(3)
    for _ in range(500):
        f = execute(st, int(rng.integers(0, 2))) if rng.random() < 0.8 else hold(st)
        assert f.count("green") <= 1
        assert f == faces(st)
