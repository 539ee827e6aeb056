"""Uncertainty-driven acquisition policies run by each control node.

* ALG1 queries every vehicle whose position uncertainty exceeds ``ut_pos``.
* ALG2 queries the uncertain vehicles of lanes whose green-time prediction
  is more uncertain than ``ut_pred``.
* ALG3 queries every uncertain vehicle only when the control decision is
  more uncertain than ``ut_dec``, and holds the signals if it still is.

One answered query for one vehicle is one transfer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .belief import LaneModel, model_update, position_uncertainty, predict
from .controller import (
    ControllerState,
    decide,
    decision_uncertainty,
    execute,
    hold,
    refresh_priorities,
    refresh_stabilization,
)
from .fuzzy import normalize, uncertainty
from .vsn import TransferLedger, VSNLink

__all__ = [
    "ALG1",
    "ALG2",
    "ALG3",
    "CollectionPolicy",
    "TransferLedger",
    "StepOutcome",
    "ControlNode",
    "run_step_alg1",
    "run_step_alg2",
    "run_step_alg3",
    "run_step",
]

ALG1, ALG2, ALG3 = 1, 2, 3


@dataclass(frozen=True)
class CollectionPolicy:
    kind: int
    threshold: float = 0.0

    def __post_init__(self):
        if self.kind not in (ALG1, ALG2, ALG3):
            raise ValueError(f"unknown algorithm {self.kind!r}")
        if not self.threshold >= 0:
            raise ValueError("threshold must be >= 0")

    @property
    def label(self) -> str:
        return f"ALG{self.kind}({self.threshold:g})"


@dataclass
class StepOutcome:
    sigma: int
    executed: bool
    uncertainty: float
    acquired: int


class ControlNode:
    """Lane models, controller state and channel endpoint of one intersection."""

    def __init__(self, network, intersection, vsn: VSNLink, v_max: int = 2, t_max: float = 120.0,
                 tau: float = 5.0, tau0: float = 5.0, min_green: int = 0, penalty="tau_sigma",
                 eps: float = 1.0):
        self.index = intersection.index
        self.id = intersection.id
        self.vsn = vsn
        self.lanes = [LaneModel(li, network.links[li].cells, v_max, s)
                      for s, li in enumerate(intersection.streams)]
        for lane in self.lanes:
            vsn.attach(lane)
        self.state = ControllerState.create(len(self.lanes), tau=tau, tau0=tau0, t_max=t_max,
                                            min_green=min_green, penalty=penalty, eps=eps)
        self.shown_green = self.state.green
        self.decisions = 0
        self.holds = 0
        self.last_uncertainty = 0.0

    @property
    def ledger(self) -> TransferLedger:
        return self.vsn.ledgers[self.index]

    def begin_step(self, step: int):
        """Advance every lane over the second that just elapsed."""
        for lane in self.lanes:
            model_update(lane, self.shown_green == lane.index, step=step)

    def acquire(self, vehicle_ids_by_lane, step: int) -> int:
        count = 0
        for lane, ids in zip(self.lanes, vehicle_ids_by_lane):
            if not ids:
                continue
            responses = self.vsn.query_positions(self.index, ids, step)
            measurements = {r.vehicle: (r.link, r.cell, r.velocity) for r in responses}
            model_update(lane, self.shown_green == lane.index, measurements, step=step, advance=False)
            count += len(responses)
        return count

    def predict_all(self):
        cap = int(self.state.t_max)
        for lane, stream in zip(self.lanes, self.state.streams):
            stream.prediction = predict(lane, tau=stream.tau, cap=cap)

    def evaluate(self):
        refresh_stabilization(self.state)
        refresh_priorities(self.state)
        sigma, _ = decide(self.state)
        unc, _, _ = decision_uncertainty(self.state, sigma)
        return sigma, unc

    def finish(self, sigma: int, do_execute: bool):
        if do_execute:
            execute(self.state, sigma)
        else:
            hold(self.state)
            self.holds += 1
        self.decisions += 1
        self.shown_green = self.state.green


def _uncertain(lane: LaneModel, above: float = 0.0) -> list:
    if above <= 0:
        return [v.id for v in lane.vehicles if not v.X.is_crisp]
    return [v.id for v in lane.vehicles if position_uncertainty(v) > above]


def run_step_alg1(node: ControlNode, step: int, ut_pos: float) -> StepOutcome:
    ids = [_uncertain(lane, ut_pos) for lane in node.lanes] if math.isfinite(ut_pos) else []
    acquired = node.acquire(ids, step) if ids else 0
    node.predict_all()
    sigma, unc = node.evaluate()
    node.finish(sigma, True)
    node.last_uncertainty = unc
    return StepOutcome(sigma, True, unc, acquired)


def run_step_alg2(node: ControlNode, step: int, ut_pred: float) -> StepOutcome:
    node.predict_all()
    acquired = 0
    if math.isfinite(ut_pred):
        ids = []
        for lane, stream in zip(node.lanes, node.state.streams):
            stale = uncertainty(normalize(stream.prediction.G)) > ut_pred
            ids.append(_uncertain(lane) if stale else [])
        acquired = node.acquire(ids, step)
        if acquired:
            node.predict_all()
    sigma, unc = node.evaluate()
    node.finish(sigma, True)
    node.last_uncertainty = unc
    return StepOutcome(sigma, True, unc, acquired)


def run_step_alg3(node: ControlNode, step: int, ut_dec: float) -> StepOutcome:
    node.predict_all()
    omega = list(node.state.omega)
    budget = node.state.service_budget
    sigma, unc = node.evaluate()
    acquired = 0
    if unc > ut_dec:
        acquired = node.acquire([_uncertain(lane) for lane in node.lanes], step)
        if acquired:
            # the tentative evaluation must not leave stale omega entries behind
            node.state.omega = omega
            node.state.service_budget = budget
            node.predict_all()
            sigma, unc = node.evaluate()
    executed = unc <= ut_dec
    node.finish(sigma, executed)
    node.last_uncertainty = unc
    return StepOutcome(sigma, executed, unc, acquired)


def run_step(node: ControlNode, policy: CollectionPolicy, step: int) -> StepOutcome:
    if policy.kind == ALG1:
        return run_step_alg1(node, step, policy.threshold)
    if policy.kind == ALG2:
        return run_step_alg2(node, step, policy.threshold)
    return run_step_alg3(node, step, policy.threshold)
