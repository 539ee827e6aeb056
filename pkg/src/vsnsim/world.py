"""Ground-truth Nagel-Schreckenberg road network.

Vehicles occupy integer cells of single-lane links and update synchronously
once per simulated second: accelerate, brake to the gap, randomly slow down
with probability ``p``, move. A red (or intergreen) face acts as an obstacle
just past the last cell of the approach; under green the gap extends into
the next link of the vehicle's route.

Every vehicle draws its own slow-down noise from a generator keyed on the
run seed and its id, so two runs with the same seed see the same arrivals,
routes and per-vehicle noise regardless of how the signals behave.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .topology import RoadNetwork, TopologyError, single_lane

__all__ = [
    "V_MAX",
    "P_SLOW",
    "GroundVehicle",
    "StepEvents",
    "DelayReport",
    "World",
    "step_world",
    "generate_arrivals",
    "measure_delay",
    "saturation_flow_probe",
]

V_MAX = 2
P_SLOW = 0.15
_NOISE_BLOCK = 512
_FREE = 1 << 30


class GroundVehicle:
    __slots__ = ("id", "link", "cell", "velocity", "route", "leg", "arrival_step",
                 "entry_step", "exit_step", "entry", "_rng", "_noise", "age", "transfers")

    def __init__(self, vid, route, arrival_step, entry, seed):
        self.id = vid
        self.route = route
        self.leg = 0
        self.link = route[0] if route else None
        self.cell = 0
        self.velocity = 0
        self.arrival_step = arrival_step
        self.entry_step = None
        self.exit_step = None
        self.entry = entry
        self._rng = np.random.default_rng([seed, 1, vid])
        self._noise = None
        self.age = 0
        self.transfers = 0

    def draw(self) -> float:
        k = self.age % _NOISE_BLOCK
        if k == 0:
            self._noise = self._rng.random(_NOISE_BLOCK)
        self.age += 1
        return self._noise[k]

    def __repr__(self):
        return f"GroundVehicle(id={self.id}, link={self.link}, cell={self.cell}, v={self.velocity})"


@dataclass
class StepEvents:
    # (vehicle, from_link, to_link) for every stop-line crossing into a link
    handoffs: list = field(default_factory=list)
    exits: list = field(default_factory=list)
    crossings: dict = field(default_factory=dict)


@dataclass
class DelayReport:
    mean: float
    count: int
    completed: int
    per_vehicle: dict


class World:
    """Mutable ground-truth state; advance with :meth:`step`."""

    def __init__(self, network: RoadNetwork, v_max: int = V_MAX, p: float = P_SLOW,
                 seed: int = 0):
        self.network = network
        self.v_max = int(v_max)
        self.p = float(p)
        self.seed = int(seed)
        self.t = 0
        self.lanes: list[list[GroundVehicle]] = [[] for _ in network.links]
        self.vehicles: dict[int, GroundVehicle] = {}
        self.finished: list[GroundVehicle] = []
        self.entry_queues = [deque() for _ in network.entries]
        self._entry_rngs = [np.random.default_rng([self.seed, 0, e.index]) for e in network.entries]
        self._next_id = 0
        self.arrived = 0
        self.entered = 0
        self.exited = 0
        # per-link stop-line crossings, cumulative
        self.crossings = [0] * len(network.links)

    # -- queries ---------------------------------------------------------------
    def vehicle(self, vid):
        return self.vehicles.get(vid)

    def present(self) -> int:
        return len(self.vehicles)

    def occupancy(self, li: int) -> list:
        cells = [None] * self.network.links[li].cells
        for veh in self.lanes[li]:
            if cells[veh.cell] is not None:
                raise AssertionError(f"cell {veh.cell} of link {li} doubly occupied")
            cells[veh.cell] = veh.id
        return cells

    # -- dynamics --------------------------------------------------------------
    def _route(self, entry, rng) -> tuple:
        net = self.network
        route = [net.entries[entry].link]
        while True:
            options = net.turn_options(route[-1])
            if not options:
                return tuple(route)
            u = rng.random()
            acc = 0.0
            choice = options[-1][0]
            for out, prob in options:
                acc += prob
                if u < acc:
                    choice = out
                    break
            if not 0 <= choice < len(net.links):
                raise TopologyError(f"route references missing link {choice}")
            route.append(choice)

    def step(self, green) -> StepEvents:
        """One synchronous update. ``green[n]`` is the green stream of node n or None."""
        net = self.network
        links = net.links
        v_max = self.v_max
        p = self.p
        lanes = self.lanes
        moving = []
        for li, lane in enumerate(lanes):
            if not lane:
                continue
            length = links[li].cells
            node = net.owner[li]
            front = lane[0]
            if node is None:
                front_gap = _FREE
            elif green[node] is not None and net.intersections[node].streams[green[node]] == li:
                nxt = front.route[front.leg + 1]
                beyond = lanes[nxt][-1].cell if lanes[nxt] else links[nxt].cells
                front_gap = length - 1 - front.cell + beyond
            else:
                front_gap = length - 1 - front.cell
            ahead = None
            for veh in lane:
                gap = front_gap if ahead is None else ahead.cell - veh.cell - 1
                v = veh.velocity + 1
                if v > v_max:
                    v = v_max
                if v > gap:
                    v = gap
                if veh.draw() < p and v > 0:
                    v -= 1
                veh.velocity = v
                ahead = veh
            moving.append(li)

        for li in moving:
            for veh in lanes[li]:
                veh.cell += veh.velocity

        events = StepEvents()
        self.t += 1
        for li in moving:
            lane = lanes[li]
            length = links[li].cells
            while lane and lane[0].cell >= length:
                veh = lane.pop(0)
                veh.cell -= length
                self.crossings[li] += 1
                events.crossings[li] = events.crossings.get(li, 0) + 1
                if veh.leg + 1 >= len(veh.route):
                    veh.exit_step = self.t
                    del self.vehicles[veh.id]
                    self.finished.append(veh)
                    self.exited += 1
                    events.exits.append(veh)
                    continue
                veh.leg += 1
                veh.link = veh.route[veh.leg]
                lanes[veh.link].append(veh)
                events.handoffs.append((veh, li, veh.link))
        return events

    def generate_arrivals(self, rates) -> list[GroundVehicle]:
        """Bernoulli arrivals per entry; blocked ones wait in a virtual queue.

        Returns the vehicles placed on the road this step.
        """
        inserted = []
        for e, entry in enumerate(self.network.entries):
            rng = self._entry_rngs[e]
            if rng.random() < rates[e]:
                veh = GroundVehicle(self._next_id, None, self.t, e, self.seed)
                self._next_id += 1
                veh.route = self._route(e, veh._rng)
                veh.link = veh.route[0]
                self.entry_queues[e].append(veh)
                self.arrived += 1
            queue = self.entry_queues[e]
            lane = self.lanes[entry.link]
            if queue and (not lane or lane[-1].cell > 0):
                veh = queue.popleft()
                veh.cell = 0
                veh.velocity = self.v_max
                veh.entry_step = self.t
                lane.append(veh)
                self.vehicles[veh.id] = veh
                self.entered += 1
                inserted.append(veh)
        return inserted

    def queued(self) -> int:
        return sum(len(q) for q in self.entry_queues)


def step_world(world: World, signals) -> StepEvents:
    return world.step(signals)


def generate_arrivals(world: World, rates) -> list[GroundVehicle]:
    return world.generate_arrivals(rates)


def _free_flow(cells: int, v_max: int) -> int:
    return math.ceil(cells / v_max)


def measure_delay(world: World, window_start: int = 0, include_queue_wait: bool = True,
                  include_unfinished: bool = True) -> DelayReport:
    """Delay = time in network minus free-flow time of the distance covered.

    Vehicles count if they arrived at or after ``window_start``. Vehicles still
    on the road (or in an entry queue) at the current step contribute their
    delay so far unless ``include_unfinished`` is False.
    """
    net = world.network
    v_max = world.v_max
    t_now = world.t
    per_vehicle = {}
    completed = 0

    def start_of(veh):
        if include_queue_wait or veh.entry_step is None:
            return veh.arrival_step
        return veh.entry_step

    for veh in world.finished:
        if veh.arrival_step < window_start:
            continue
        ff = _free_flow(net.route_length(veh.route), v_max)
        per_vehicle[veh.id] = veh.exit_step - start_of(veh) - ff
        completed += 1
    if include_unfinished:
        for veh in world.vehicles.values():
            if veh.arrival_step < window_start:
                continue
            covered = net.route_length(veh.route[:veh.leg]) + veh.cell
            per_vehicle[veh.id] = t_now - start_of(veh) - _free_flow(covered, v_max)
        if include_queue_wait:
            for queue in world.entry_queues:
                for veh in queue:
                    if veh.arrival_step >= window_start:
                        per_vehicle[veh.id] = t_now - veh.arrival_step
    count = len(per_vehicle)
    mean = sum(per_vehicle.values()) / count if count else 0.0
    return DelayReport(mean=mean, count=count, completed=completed, per_vehicle=per_vehicle)


def saturation_flow_probe(duration: int = 3600, v_max: int = V_MAX, p: float = P_SLOW,
                          seed: int = 0, demand: float = 1.0, cells: int = 40) -> float:
    """Stop-line crossings per hour on one permanently green approach."""
    world = World(single_lane(cells), v_max=v_max, p=p, seed=seed)
    green = [0]
    rates = [demand]
    approach = world.network.link_by_id["in"].index
    for _ in range(duration):
        world.step(green)
        world.generate_arrivals(rates)
    return world.crossings[approach] * 3600.0 / duration
