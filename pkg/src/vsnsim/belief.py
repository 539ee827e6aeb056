"""Controller-side fuzzy cellular model of an intersection approach.

Each vehicle carries a fuzzy position ``X`` and velocity ``V``. Components
are read as four ordered scenarios, from the pessimistic ``q1`` to the
optimistic ``q4``, and the motion rule is the deterministic cellular
automaton applied component by component: accelerate, brake to the gap
behind the leader (or the stop line when the face is not green), and in
the pessimistic component also take the random slow-down. A vehicle left
unmeasured therefore spreads to the left by up to one cell per step.

Positions are cells of the approach link; the stop line sits at ``length``.
Vehicles whose whole support has passed it leave :attr:`LaneModel.vehicles`
and linger in :attr:`LaneModel.departed` as leaders in the pessimistic scenario.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .fuzzy import FuzzyNumber, crisp, normalize, uncertainty

__all__ = [
    "UnknownVehicleError",
    "FuzzyVehicle",
    "LaneModel",
    "Prediction",
    "model_update",
    "predict",
    "position_uncertainty",
]

_ZERO = FuzzyNumber(0, 0, 0, 0)


class UnknownVehicleError(KeyError):
    pass


class FuzzyVehicle:
    __slots__ = ("id", "X", "V", "last_acquired")

    def __init__(self, vid, X: FuzzyNumber, V: FuzzyNumber, last_acquired: int = -1):
        self.id = vid
        self.X = X
        self.V = V
        self.last_acquired = last_acquired

    @property
    def is_crisp(self) -> bool:
        return self.X.is_crisp

    def __repr__(self):
        return f"FuzzyVehicle({self.id}, X={tuple(self.X)}, V={tuple(self.V)})"


def position_uncertainty(vehicle: FuzzyVehicle) -> float:
    return uncertainty(normalize(vehicle.X))


@dataclass(frozen=True)
class Prediction:
    N: FuzzyNumber
    G: FuzzyNumber
    capped: bool = False


class LaneModel:
    """Fuzzy vehicles on one approach, ordered front (nearest the stop line) to back."""

    def __init__(self, link: int, length: int, v_max: int = 2, index: int = 0):
        self.link = link
        self.length = int(length)
        self.v_max = int(v_max)
        self.index = index
        self.vehicles: list[FuzzyVehicle] = []
        self.departed: list[FuzzyVehicle] = []
        self._pending: list[FuzzyVehicle] = []
        self.green = False

    def __len__(self):
        return len(self.vehicles)

    def __contains__(self, vid):
        return any(v.id == vid for v in self.vehicles)

    def ids(self) -> list:
        return [v.id for v in self.vehicles]

    def find(self, vid):
        for veh in self.vehicles:
            if veh.id == vid:
                return veh
        for veh in self.departed:
            if veh.id == vid:
                return veh
        return None

    # -- inputs ----------------------------------------------------------------
    def register(self, vid, cell: int, velocity: int, step: int = -1):
        """Queue a newly announced vehicle; it joins at the back on the next update."""
        self._pending.append(FuzzyVehicle(vid, crisp(cell), crisp(velocity), step))

    def assimilate(self, measurements: dict, step: int = -1):
        """Replace positions with measured ones.

        ``measurements`` maps vehicle id to ``(link, cell, velocity)``; a link of
        None means the vehicle has left the network, and a foreign link means it
        is already past the stop line.
        """
        if not measurements:
            return
        dropped = set()
        for vid, (link, cell, velocity) in measurements.items():
            veh = self.find(vid)
            if veh is None:
                raise UnknownVehicleError(vid)
            if link is None:
                dropped.add(vid)
                continue
            pos = cell if link == self.link else self.length + cell
            veh.X = crisp(pos)
            veh.V = crisp(velocity)
            veh.last_acquired = step
        if dropped:
            self.vehicles = [v for v in self.vehicles if v.id not in dropped]
            self.departed = [v for v in self.departed if v.id not in dropped]
        self._enforce_order()
        self._resplit()

    # -- dynamics --------------------------------------------------------------
    def advance(self, green: bool):
        """One fuzzy motion step under the face shown during that step."""
        self.green = green
        length = self.length
        v_max = self.v_max
        n_departed = len(self.departed)
        prev = None
        for i, veh in enumerate(self.departed + self.vehicles):
            # a leader already past the line may have turned onto another
            # link, so it only holds back the pessimistic scenario
            after_departed = i == n_departed and n_departed > 0
            x = veh.X.astuple()
            v = veh.V.astuple()
            nx = [0, 0, 0, 0]
            nv = [0, 0, 0, 0]
            for k in range(4):
                xk = x[k]
                # the pessimistic component accelerates like the nominal one and
                # then takes the slow-down, so it lags without ever stalling
                a = (v[1] if k == 0 else v[k]) + 1
                if a > v_max:
                    a = v_max
                if prev is not None and (k == 0 or not after_departed):
                    gap = prev[k] - xk - 1
                    if a > gap:
                        a = gap
                if not green and xk < length:
                    gap = length - 1 - xk
                    if a > gap:
                        a = gap
                if k == 0:
                    a -= 1
                if a < 0:
                    a = 0
                nv[k] = a
                nx[k] = xk + a
            veh.X = FuzzyNumber(*nx)
            veh.V = FuzzyNumber(*nv)
            prev = x
        self._resplit()

    def flush(self):
        if self._pending:
            self.vehicles.extend(self._pending)
            self._pending = []
            self._enforce_order()
            self._resplit()

    def _resplit(self):
        length = self.length
        while self.vehicles and min(self.vehicles[0].X) >= length:
            self.departed.append(self.vehicles.pop(0))
        # a leader keeps holding back the pessimistic queue until it is far
        # enough ahead that neither it nor anything it follows can reach back
        horizon = length + 2 * (self.v_max + 1)
        self.departed = [v for v in self.departed if min(v.X) < horizon]

    def _enforce_order(self):
        # Crisp vehicles bound their neighbours: a vehicle ahead of a crisp one
        # at cell c sits at c+1 or further, one behind at c-1 or closer.
        chain = self.vehicles
        lower = None
        for veh in reversed(chain):
            if veh.X.is_crisp:
                lower = veh.X.q1 + 1
                continue
            if lower is not None:
                if min(veh.X) < lower:
                    veh.X = FuzzyNumber(*(max(q, lower) for q in veh.X))
                lower += 1
        upper = None
        for veh in chain:
            if veh.X.is_crisp:
                upper = veh.X.q1 - 1
                continue
            if upper is not None:
                if max(veh.X) > upper:
                    veh.X = FuzzyNumber(*(min(q, upper) for q in veh.X))
                upper -= 1

    # -- copies ----------------------------------------------------------------
    def scenario(self, k: int):
        """Crisp positions and velocities of component ``k``.

        Departed vehicles are left out: the green-time prediction concerns
        the vehicles still upstream of the line.
        """
        chain = self.vehicles
        return (tuple(v.X[k] for v in chain), tuple(v.V[k] for v in chain), 0)


def model_update(lane: LaneModel, green: bool, measurements=None, step: int = -1,
                 advance: bool = True) -> LaneModel:
    """Assimilate, advance one step, admit announced vehicles, retire departed ones.

    ``advance=False`` performs only the assimilation, for the re-update after
    mid-step acquisitions.
    """
    if measurements:
        lane.assimilate(measurements, step)
    if advance:
        lane.advance(green)
    lane.flush()
    return lane


def _free_flowing(pos, vel, v_max) -> bool:
    for j in range(len(pos)):
        if vel[j] != v_max or (j and pos[j - 1] - pos[j] - 1 < v_max):
            return False
    return True


@lru_cache(maxsize=1 << 16)
def _clearance(pos: tuple, vel: tuple, first: int, length: int, v_max: int, cap: int):
    """Deterministic green-phase clearance of one crisp scenario.

    Returns per-vehicle crossing times for ``pos[first:]``; None marks a
    vehicle still upstream when the cap is reached.
    """
    n = len(pos)
    pos = list(pos)
    vel = list(vel)
    times = [None] * n
    remaining = 0
    for j in range(first, n):
        if pos[j] >= length:
            times[j] = 0
        else:
            remaining += 1
    t = 0
    while remaining and t < cap:
        if _free_flowing(pos, vel, v_max):
            # nobody brakes any more: every vehicle keeps v_max to the line
            for j in range(first, n):
                if times[j] is None:
                    tj = t + -(-(length - pos[j]) // v_max)
                    times[j] = tj if tj <= cap else None
            break
        t += 1
        lead_old = None
        for j in range(n):
            old = pos[j]
            v = vel[j] + 1
            if v > v_max:
                v = v_max
            if lead_old is not None:
                gap = lead_old - old - 1
                if v > gap:
                    v = gap
            if v < 0:
                v = 0
            vel[j] = v
            pos[j] = old + v
            lead_old = old
            if times[j] is None and j >= first and pos[j] >= length:
                times[j] = t
                remaining -= 1
    return tuple(times[first:])


def predict(lane: LaneModel, tau: float = 5.0, cap: int = 120) -> Prediction:
    """Fuzzy green time needed to clear the lane and vehicles served in tau + G.

    Each component is an independent crisp simulation of that scenario under
    permanent green.
    """
    if not lane.vehicles:
        return Prediction(_ZERO, _ZERO, False)
    G = [0, 0, 0, 0]
    N = [0, 0, 0, 0]
    capped = False
    for k in range(4):
        pos, vel, first = lane.scenario(k)
        times = _clearance(pos, vel, first, lane.length, lane.v_max, int(cap))
        if any(t is None for t in times):
            capped = True
            g = cap
        else:
            g = max(times)
        G[k] = g
        # a vehicle already past the line in this scenario needs no green
        N[k] = sum(1 for t in times if t is not None and 0 < t <= tau + g)
    return Prediction(normalize(FuzzyNumber(*N)), normalize(FuzzyNumber(*G)), capped)
