"""Road network description and JSON topology files.

Topology file schema (JSON)::

    {
      "name": "grid_2x2",
      "cell_length_m": 7.5,
      "nodes": [
        {"id": "I00", "type": "intersection", "streams": ["h0_a", "v0_a"]},
        {"id": "W0", "type": "entry"},
        {"id": "E0", "type": "exit"}
      ],
      "links": [{"id": "h0_a", "cells": 40, "from": "W0", "to": "I00"}],
      "entries": [{"link": "h0_a", "weight": 1.0}],
      "turns": {"h0_a": {"h0_b": 0.5, "v1_b": 0.5}}
    }

``streams`` lists the two incoming links of an intersection; their order
fixes the stream indices 0 and 1. ``turns`` is optional; a missing entry
splits an approach evenly over the intersection's outgoing links.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

__all__ = [
    "TopologyError",
    "Link",
    "Intersection",
    "Entry",
    "RoadNetwork",
    "load_topology",
    "network_from_dict",
    "single_lane",
    "single_intersection",
    "grid_2x2",
    "BUNDLED",
]

DEFAULT_CELLS = 40
CELL_LENGTH_M = 7.5
BUNDLED = ("grid_2x2", "single_intersection")


class TopologyError(ValueError):
    pass


@dataclass
class Link:
    index: int
    id: str
    cells: int
    src: str
    dst: str

    @property
    def length(self) -> int:
        return self.cells


@dataclass
class Intersection:
    index: int
    id: str
    streams: tuple[int, int]
    outgoing: tuple[int, ...]


@dataclass
class Entry:
    index: int
    link: int
    weight: float = 1.0


@dataclass
class RoadNetwork:
    name: str
    links: list[Link]
    intersections: list[Intersection]
    entries: list[Entry]
    turns: dict[int, list[tuple[int, float]]] = field(default_factory=dict)
    cell_length_m: float = CELL_LENGTH_M

    def __post_init__(self):
        self.link_by_id = {lk.id: lk for lk in self.links}
        # intersection whose stop line terminates a link, or None for exits
        self.owner = [None] * len(self.links)
        self.stream_of = [None] * len(self.links)
        for node in self.intersections:
            for s, li in enumerate(node.streams):
                self.owner[li] = node.index
                self.stream_of[li] = s
        self._validate()

    def _validate(self):
        pairs = {(lk.src, lk.dst) for lk in self.links}
        for lk in self.links:
            if lk.cells <= 0:
                raise TopologyError(f"link {lk.id!r} has no cells")
            if (lk.dst, lk.src) in pairs:
                raise TopologyError(f"link {lk.id!r} is traversed in both directions")
        node_ids = {n.id for n in self.intersections}
        for node in self.intersections:
            if len(node.streams) != 2 or len(set(node.streams)) != 2:
                raise TopologyError(f"intersection {node.id!r} needs exactly two incoming streams")
            incoming = [lk.index for lk in self.links if lk.dst == node.id]
            if sorted(incoming) != sorted(node.streams):
                raise TopologyError(f"streams of {node.id!r} do not match its incoming links")
            if not node.outgoing:
                raise TopologyError(f"intersection {node.id!r} has no outgoing link")
        for e in self.entries:
            if self.links[e.link].src in node_ids:
                raise TopologyError(f"entry link {self.links[e.link].id!r} starts at an intersection")
        for li, options in self.turns.items():
            node = self.owner[li]
            if node is None:
                raise TopologyError(f"turns given for exit link {self.links[li].id!r}")
            allowed = set(self.intersections[node].outgoing)
            if any(o not in allowed for o, _ in options):
                raise TopologyError(f"turn from {self.links[li].id!r} to a link not leaving its intersection")
            if abs(sum(p for _, p in options) - 1.0) > 1e-9:
                raise TopologyError(f"turn probabilities from {self.links[li].id!r} do not sum to 1")
        self._check_acyclic()

    def _check_acyclic(self):
        # routes are drawn by walking downstream; a cycle would never exit
        state = {}

        def visit(li):
            if state.get(li) == 1:
                raise TopologyError("network contains a cycle")
            if state.get(li) == 2:
                return
            state[li] = 1
            for nxt in self.next_links(li):
                visit(nxt)
            state[li] = 2

        for e in self.entries:
            visit(e.link)

    def next_links(self, li: int) -> list[int]:
        node = self.owner[li]
        if node is None:
            return []
        return [o for o, p in self.turn_options(li) if p > 0]

    def turn_options(self, li: int) -> list[tuple[int, float]]:
        if li in self.turns:
            return self.turns[li]
        node = self.owner[li]
        if node is None:
            return []
        outs = self.intersections[node].outgoing
        return [(o, 1.0 / len(outs)) for o in outs]

    def route_length(self, route) -> int:
        return sum(self.links[li].cells for li in route)


def network_from_dict(data: dict) -> RoadNetwork:
    try:
        nodes = data["nodes"]
        raw_links = data["links"]
        raw_entries = data["entries"]
    except KeyError as exc:
        raise TopologyError(f"topology is missing key {exc.args[0]!r}") from None
    links = []
    ids = {}
    for i, rl in enumerate(raw_links):
        lk = Link(i, str(rl["id"]), int(rl.get("cells", DEFAULT_CELLS)), str(rl["from"]), str(rl["to"]))
        if lk.id in ids:
            raise TopologyError(f"duplicate link id {lk.id!r}")
        ids[lk.id] = i
        links.append(lk)

    def link_index(name):
        if name not in ids:
            raise TopologyError(f"unknown link {name!r}")
        return ids[name]

    node_types = {}
    for n in nodes:
        node_types[str(n["id"])] = n.get("type", "intersection")
    for lk in links:
        for end in (lk.src, lk.dst):
            if end not in node_types:
                raise TopologyError(f"link {lk.id!r} references unknown node {end!r}")

    intersections = []
    for n in nodes:
        if n.get("type", "intersection") != "intersection":
            continue
        nid = str(n["id"])
        streams = tuple(link_index(s) for s in n.get("streams", []))
        if len(streams) != 2:
            raise TopologyError(f"intersection {nid!r} needs exactly two streams")
        outgoing = tuple(lk.index for lk in links if lk.src == nid)
        intersections.append(Intersection(len(intersections), nid, streams, outgoing))
    for lk in links:
        if node_types[lk.dst] == "entry" or node_types[lk.src] == "exit":
            raise TopologyError(f"link {lk.id!r} runs against an entry/exit node")

    entries = [Entry(i, link_index(e["link"]), float(e.get("weight", 1.0)))
               for i, e in enumerate(raw_entries)]
    turns = {}
    for src, dist in data.get("turns", {}).items():
        turns[link_index(src)] = [(link_index(dst), float(p)) for dst, p in dist.items()]
    return RoadNetwork(
        name=str(data.get("name", "network")),
        links=links,
        intersections=intersections,
        entries=entries,
        turns=turns,
        cell_length_m=float(data.get("cell_length_m", CELL_LENGTH_M)),
    )


def load_topology(source) -> RoadNetwork:
    """Load a network from a JSON path, a dict, or a bundled name."""
    if isinstance(source, RoadNetwork):
        return source
    if isinstance(source, dict):
        return network_from_dict(source)
    text = None
    if isinstance(source, str) and source in BUNDLED:
        text = resources.files("vsnsim.data").joinpath(f"{source}.json").read_text()
    else:
        path = Path(source)
        if not path.exists():
            raise TopologyError(f"topology file {str(path)!r} not found")
        text = path.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TopologyError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return network_from_dict(data)


# --- programmatic builders ----------------------------------------------------

def single_lane(cells: int = DEFAULT_CELLS) -> RoadNetwork:
    """One approach into a stop line, the other stream unused."""
    return network_from_dict({
        "name": "single_lane",
        "nodes": [
            {"id": "S", "type": "entry"}, {"id": "S2", "type": "entry"},
            {"id": "I", "type": "intersection", "streams": ["in", "side"]},
            {"id": "X", "type": "exit"},
        ],
        "links": [
            {"id": "in", "cells": cells, "from": "S", "to": "I"},
            {"id": "side", "cells": cells, "from": "S2", "to": "I"},
            {"id": "out", "cells": cells, "from": "I", "to": "X"},
        ],
        "entries": [{"link": "in"}],
    })


def single_intersection(cells: int = DEFAULT_CELLS) -> RoadNetwork:
    return load_topology("single_intersection") if cells == DEFAULT_CELLS else network_from_dict(
        _single_intersection_dict(cells))


def _single_intersection_dict(cells):
    return {
        "name": "single_intersection",
        "nodes": [
            {"id": "W", "type": "entry"}, {"id": "N", "type": "entry"},
            {"id": "I", "type": "intersection", "streams": ["we_in", "ns_in"]},
            {"id": "E", "type": "exit"}, {"id": "S", "type": "exit"},
        ],
        "links": [
            {"id": "we_in", "cells": cells, "from": "W", "to": "I"},
            {"id": "ns_in", "cells": cells, "from": "N", "to": "I"},
            {"id": "we_out", "cells": cells, "from": "I", "to": "E"},
            {"id": "ns_out", "cells": cells, "from": "I", "to": "S"},
        ],
        "entries": [{"link": "we_in"}, {"link": "ns_in"}],
    }


def grid_2x2(cells: int = DEFAULT_CELLS) -> RoadNetwork:
    return load_topology("grid_2x2") if cells == DEFAULT_CELLS else network_from_dict(_grid_dict(cells))


def _grid_dict(cells):
    # rows: h0 eastbound, h1 westbound; columns: v0 southbound, v1 northbound
    nodes = [
        {"id": "I00", "type": "intersection", "streams": ["h0_in", "v0_in"]},
        {"id": "I01", "type": "intersection", "streams": ["h0_mid", "v1_mid"]},
        {"id": "I10", "type": "intersection", "streams": ["h1_mid", "v0_mid"]},
        {"id": "I11", "type": "intersection", "streams": ["h1_in", "v1_in"]},
    ]
    for name in ("W0", "N0", "E1", "S1"):
        nodes.append({"id": name, "type": "entry"})
    for name in ("E0", "N1", "W1", "S0"):
        nodes.append({"id": name, "type": "exit"})
    spec = [
        ("h0_in", "W0", "I00"), ("h0_mid", "I00", "I01"), ("h0_out", "I01", "E0"),
        ("h1_in", "E1", "I11"), ("h1_mid", "I11", "I10"), ("h1_out", "I10", "W1"),
        ("v0_in", "N0", "I00"), ("v0_mid", "I00", "I10"), ("v0_out", "I10", "S0"),
        ("v1_in", "S1", "I11"), ("v1_mid", "I11", "I01"), ("v1_out", "I01", "N1"),
    ]
    links = [{"id": i, "cells": cells, "from": a, "to": b} for i, a, b in spec]
    entries = [{"link": name} for name in ("h0_in", "v0_in", "h1_in", "v1_in")]
    return {"name": "grid_2x2", "cell_length_m": CELL_LENGTH_M, "nodes": nodes,
            "links": links, "entries": entries}
