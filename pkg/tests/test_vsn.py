import io
import json

import pytest

from vsnsim.belief import UnknownVehicleError
from vsnsim.collection import CollectionPolicy
from vsnsim.experiment import ScenarioConfig, Simulation
from vsnsim.vsn import DuplicateRegistrationError, TransferLedger

from .helpers import empty_intersection, enter, place


def test_hello_puts_crisp_vehicle_in_belief():
    sim = empty_intersection()
    veh = enter(sim, 0, 0, 2)
    hello = [r for r in sim.vsn.log if r["type"] == "hello"]
    assert hello == [{"step": 0, "type": "hello", "intersection": 0, "vehicle": veh.id,
                      "payload": {"link": "we_in", "cell": 0, "velocity": 2}}]
    lane = sim.nodes[0].lanes[0]
    lane.flush()
    assert [v.id for v in lane.vehicles] == [veh.id]
    assert lane.vehicles[0].X == (0, 0, 0, 0)


def test_hellos_are_routed_to_owning_nodes():
    cfg = ScenarioConfig(topology="grid_2x2", duration=10, warmup=0, saturation=0.0)
    sim = Simulation(cfg, keep_log=True)
    net = sim.network
    a, b = net.entries[0].link, net.entries[-1].link
    for link in (a, b):
        sim.vsn.register(place(sim.world, link, 0, 0), 0)
    hellos = [r for r in sim.vsn.log if r["type"] == "hello"]
    assert len(hellos) == 2
    assert [h["intersection"] for h in hellos] == [net.owner[a], net.owner[b]]
    assert sim.vsn.ledgers[net.owner[a]].hellos >= 1


def test_duplicate_registration():
    sim = empty_intersection()
    veh = enter(sim, 0, 0, 2)
    with pytest.raises(DuplicateRegistrationError):
        sim.vsn.register(veh, 0)
    sim.vsn.exited(veh)
    sim.vsn.register(veh, 1)


def test_query_counts():
    sim = empty_intersection()
    ids = [enter(sim, 0, c, 1).id for c in (30, 20, 10)]
    out = sim.vsn.query_positions(0, ids, 0)
    assert [r.vehicle for r in out] == ids
    assert [r.cell for r in out] == [30, 20, 10]
    assert sim.vsn.ledgers[0].cumulative == 3
    assert sim.vsn.query_positions(0, [], 0) == []
    assert sim.vsn.ledgers[0].cumulative == 3


def test_query_unknown_vehicle():
    sim = empty_intersection()
    with pytest.raises(UnknownVehicleError):
        sim.vsn.query_positions(0, [42], 0)


def test_ledger_bookkeeping():
    lg = TransferLedger(0)
    lg.record(3, 2)
    lg.record(3, 1)
    lg.record(5, 0)
    lg.record(7, 4)
    assert lg.per_step == {3: 3, 7: 4}
    assert lg.cumulative == 7 and lg.since(4) == 4
    with pytest.raises(ValueError):
        lg.record(8, -1)


def test_responses_match_ground_truth_over_long_run():
    cfg = ScenarioConfig(topology="single_intersection", duration=10_000, warmup=0, saturation=0.5)
    sim = Simulation(cfg, seed=6, policy=CollectionPolicy(1, 0.0))
    query = sim.vsn.query_positions
    mismatches = []
    seen = [0]

    def checked(node, ids, step):
        out = query(node, ids, step)
        for r in out:
            veh = sim.world.vehicles.get(r.vehicle)
            truth = (None, 0, 0) if veh is None else (veh.link, veh.cell, veh.velocity)
            if r.link is not None and (r.link, r.cell, r.velocity) != truth:
                mismatches.append((step, r))
            assert step == sim.world.t
        seen[0] += len(out)
        return out

    sim.vsn.query_positions = checked
    sim.run()
    assert seen[0] > 10_000 and not mismatches


def test_no_unsolicited_positions():
    # every vehicle a node knows was announced to it by hello or handoff
    cfg = ScenarioConfig(topology="grid_2x2", duration=400, warmup=0, saturation=0.6)
    sim = Simulation(cfg, seed=1, keep_log=True)
    sim.run()
    announced = {(r["intersection"], r["vehicle"]) for r in sim.vsn.log
                 if r["type"] in ("hello", "handoff")}
    answered = {(r["intersection"], r["vehicle"]) for r in sim.vsn.log if r["type"] == "response"}
    assert answered and answered <= announced
    for node in sim.nodes:
        for lane in node.lanes:
            for v in lane.vehicles:
                assert (node.index, v.id) in announced


def test_trace_is_json_lines_and_deterministic():
    cfg = ScenarioConfig(topology="single_intersection", duration=200, warmup=0, saturation=0.5)

    def trace():
        buf = io.StringIO()
        Simulation(cfg, seed=2, policy=CollectionPolicy(3, 0.5), trace=buf).run()
        return buf.getvalue()

    text = trace()
    records = [json.loads(line) for line in text.splitlines()]
    assert {r["type"] for r in records} >= {"hello", "query", "response"}
    assert all(set(r) == {"step", "type", "intersection", "vehicle", "payload"} for r in records)
    assert trace() == text
