"""Ideal vehicle-to-infrastructure channel.

Vehicles announce themselves with a hello message when they enter the
network and are handed to the next control node when they cross into one
of its approaches. Control nodes pull positions with queries; every answer
is one data transfer. Delivery is lossless and same-step, so the channel
only measures demand.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .belief import UnknownVehicleError

__all__ = [
    "DuplicateRegistrationError",
    "HelloMessage",
    "PositionQuery",
    "PositionResponse",
    "TransferLedger",
    "VSNLink",
]


class DuplicateRegistrationError(ValueError):
    pass


@dataclass(frozen=True)
class HelloMessage:
    vehicle: int
    link: int
    cell: int
    step: int
    intersection: int
    velocity: int = 0
    kind: str = "hello"


@dataclass(frozen=True)
class PositionQuery:
    intersection: int
    vehicles: tuple
    step: int


@dataclass(frozen=True)
class PositionResponse:
    vehicle: int
    link: int | None
    cell: int
    velocity: int
    step: int
    intersection: int


@dataclass
class TransferLedger:
    """Position transfers of one control node."""

    intersection: int = -1
    per_step: dict = field(default_factory=dict)
    cumulative: int = 0
    hellos: int = 0
    handoffs: int = 0

    def record(self, step: int, count: int):
        if count < 0:
            raise ValueError("negative transfer count")
        if count:
            self.per_step[step] = self.per_step.get(step, 0) + count
            self.cumulative += count

    def since(self, step: int) -> int:
        return sum(c for s, c in self.per_step.items() if s >= step)

    def total(self, include_hello: bool = False) -> int:
        return self.cumulative + (self.hellos + self.handoffs if include_hello else 0)


class VSNLink:
    """Routes hellos to owning nodes and answers their position queries."""

    def __init__(self, world, trace=None, keep_log: bool = False):
        self.world = world
        self.network = world.network
        self.trace = trace
        self.keep_log = keep_log
        self.log: list[dict] = []
        self.ledgers = [TransferLedger(n.index) for n in self.network.intersections]
        self._lanes = {}
        self._known = [set() for _ in self.network.intersections]
        self._active = set()
        self._vehicles = {}
        self.responses = 0

    def attach(self, lane_model):
        """Make a lane model the receiver for hellos on its link."""
        self._lanes[lane_model.link] = lane_model

    def _emit(self, step, kind, intersection, vehicle, payload):
        if self.trace is None and not self.keep_log:
            return
        rec = {"step": step, "type": kind, "intersection": intersection,
               "vehicle": vehicle, "payload": payload}
        if self.keep_log:
            self.log.append(rec)
        if self.trace is not None:
            self.trace.write(json.dumps(rec, sort_keys=True, separators=(",", ":")) + "\n")

    def _deliver(self, veh, link, step, kind):
        node = self.network.owner[link]
        if node is None:
            return None
        msg = HelloMessage(veh.id, link, veh.cell, step, node, veh.velocity, kind)
        self._known[node].add(veh.id)
        lane = self._lanes.get(link)
        if lane is not None:
            lane.register(veh.id, veh.cell, veh.velocity, step)
        if kind == "hello":
            self.ledgers[node].hellos += 1
        else:
            self.ledgers[node].handoffs += 1
        self._emit(step, kind, node, veh.id,
                   {"link": self.network.links[link].id, "cell": veh.cell, "velocity": veh.velocity})
        return msg

    def register(self, veh, step: int) -> HelloMessage:
        """Hello from a vehicle that has just been placed on an entry link."""
        if veh.id in self._active:
            raise DuplicateRegistrationError(f"vehicle {veh.id} is already registered")
        self._active.add(veh.id)
        self._vehicles[veh.id] = veh
        return self._deliver(veh, veh.link, step, "hello")

    def handoff(self, veh, to_link: int, step: int):
        """Forward a vehicle that crossed a stop line to the next node, if any."""
        return self._deliver(veh, to_link, step, "handoff")

    def exited(self, veh):
        self._active.discard(veh.id)

    def query_positions(self, node: int, vehicle_ids, step: int) -> list[PositionResponse]:
        ids = tuple(vehicle_ids)
        if not ids:
            return []
        known = self._known[node]
        for vid in ids:
            if vid not in known:
                raise UnknownVehicleError(vid)
        self._emit(step, "query", node, None, {"ids": list(ids)})
        links = self.network.links
        out = []
        for vid in ids:
            veh = self._vehicles[vid]
            link = veh.link if veh.exit_step is None else None
            resp = PositionResponse(vid, link, veh.cell, veh.velocity, step, node)
            veh.transfers += 1
            out.append(resp)
            self._emit(step, "response", node, vid,
                       {"link": None if link is None else links[link].id,
                        "cell": veh.cell, "velocity": veh.velocity})
        self.ledgers[node].record(step, len(out))
        self.responses += len(out)
        return out

    def total_transfers(self, since: int = 0, include_hello: bool = False) -> int:
        total = sum(lg.since(since) for lg in self.ledgers)
        if include_hello:
            total += sum(lg.hellos + lg.handoffs for lg in self.ledgers)
        return total
