"""Shared fixtures for building small hand-made scenes."""

from vsnsim.collection import CollectionPolicy
from vsnsim.experiment import ScenarioConfig, Simulation
from vsnsim.world import GroundVehicle


def place(world, link, cell, velocity, vid=None):
    """Put a ground vehicle at ``cell`` of ``link``, routed straight on."""
    vid = world._next_id if vid is None else vid
    world._next_id = max(world._next_id, vid + 1)
    route = (link,) + tuple(o for o, _ in world.network.turn_options(link)[:1])
    veh = GroundVehicle(vid, route, world.t, 0, world.seed)
    veh.cell = cell
    veh.velocity = velocity
    veh.entry_step = world.t
    lane = world.lanes[link]
    lane.append(veh)
    lane.sort(key=lambda v: -v.cell)
    world.vehicles[vid] = veh
    return veh


def empty_intersection(policy=CollectionPolicy(1, 0.0), keep_log=True, **cfg):
    """A single-intersection simulation without arrivals."""
    config = ScenarioConfig(topology="single_intersection", duration=100, warmup=0,
                            saturation=0.0, **cfg)
    return Simulation(config, seed=0, policy=policy, keep_log=keep_log)


def enter(sim, stream, cell, velocity):
    """Place a vehicle on approach ``stream`` and announce it to its node."""
    link = sim.network.intersections[0].streams[stream]
    veh = place(sim.world, link, cell, velocity)
    sim.vsn.register(veh, sim.world.t)
    return veh


# one line per acceptance criterion, printed again in the terminal summary
ACCEPTANCE = []


def report(criterion, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  criterion {criterion}: {detail}"
    print(line)
    ACCEPTANCE.append(line)
    return ok
