"""Self-organized two-stream signal control.

Every second the controller picks the stream to serve. Streams whose
service interval ``Z = r + tau0 + G`` probably exceeds ``T_max`` are queued
in ``omega`` and served first-in first-out (stabilization); otherwise the
stream with the largest priority ``N / (tau_pen + tau + G)`` wins
(optimization). All predicted quantities are fuzzy, so the controller also
reports how uncertain each decision is.

Switching between streams always passes through ``tau`` seconds of
intergreen during which every face is red.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .belief import Prediction
from .fuzzy import FuzzyNumber, crisp, fmax, fuzzy_argmax, normalize, prob_geq, prob_less

__all__ = [
    "SERVING",
    "INTERGREEN",
    "StreamState",
    "ControllerState",
    "DegenerateDenominatorError",
    "refresh_stabilization",
    "switch_penalty",
    "compute_priority",
    "refresh_priorities",
    "decide",
    "decision_uncertainty",
    "execute",
    "hold",
    "faces",
]

SERVING = "serving"
INTERGREEN = "intergreen"

_EMPTY = Prediction(crisp(0), crisp(0), False)


class DegenerateDenominatorError(ZeroDivisionError):
    pass


@dataclass
class StreamState:
    i: int
    r: int = 0
    tau0: float = 5.0
    tau: float = 5.0
    tau_pen: float = 0.0
    prediction: Prediction = _EMPTY
    Z: FuzzyNumber = field(default_factory=lambda: crisp(0))
    pi: FuzzyNumber = field(default_factory=lambda: crisp(0))

    @property
    def has_demand(self) -> bool:
        return max(self.prediction.N) > 0 or max(self.prediction.G) > 0


@dataclass
class ControllerState:
    streams: list
    t_max: float = 120.0
    sigma: int = 0
    omega: list = field(default_factory=list)
    phase: str = SERVING
    green: int | None = 0
    target: int | None = None
    intergreen_left: int = 0
    green_elapsed: int = 0
    min_green: int = 0
    # green seconds still owed to the head of omega once it is being served
    service_budget: int | None = None
    penalty: object = "tau_sigma"
    eps: float = 1.0

    @classmethod
    def create(cls, n_streams: int = 2, tau: float = 5.0, tau0: float = 5.0, t_max: float = 120.0,
               min_green: int = 0, penalty="tau_sigma", eps: float = 1.0, initial: int = 0):
        streams = [StreamState(i, tau0=tau0, tau=tau) for i in range(n_streams)]
        return cls(streams=streams, t_max=t_max, sigma=initial, green=initial,
                   min_green=min_green, penalty=penalty, eps=eps)

    def p_exceeds(self, i: int) -> float:
        """P(Z_i >= T_max)."""
        return prob_geq(self.streams[i].Z, crisp(self.t_max))


def refresh_stabilization(state: ControllerState) -> ControllerState:
    """Recompute every Z_i and update omega.

    A stream joins when P(Z_i >= T_max) > 0.5, it has vehicles and it is not
    the stream being served. The head of omega leaves once it has had the green
    time predicted for it at green onset, or its lane has emptied.
    """
    for s in state.streams:
        s.Z = normalize(s.prediction.G + (s.r + s.tau0))

    if state.omega and state.phase == SERVING and state.omega[0] == state.green:
        head = state.streams[state.green]
        budget_done = state.service_budget is not None and state.green_elapsed >= state.service_budget
        if budget_done or not head.has_demand:
            state.omega.pop(0)
            state.service_budget = None

    served = state.green if state.phase == SERVING else state.target
    target = crisp(state.t_max)
    for s in state.streams:
        if s.i in state.omega or s.i == served or not s.has_demand:
            continue
        if prob_geq(s.Z, target) > 0.5:
            state.omega.append(s.i)
    return state


def switch_penalty(state: ControllerState, i: int) -> float:
    if i == state.sigma:
        return 0.0
    if state.penalty == "tau_sigma":
        return float(state.streams[state.sigma].tau)
    return float(state.penalty)


def compute_priority(stream: StreamState, sigma: int | None = None, tau_pen: float | None = None,
                     eps: float = 1.0) -> FuzzyNumber:
    """pi_i = N_i / (tau_pen + tau_i + G_i), component-wise.

    Denominator components are floored at ``eps``; with ``eps <= 0`` a
    non-positive component raises :class:`DegenerateDenominatorError`.
    """
    if tau_pen is None:
        tau_pen = stream.tau_pen if sigma is None or sigma != stream.i else 0.0
    N = stream.prediction.N
    den = stream.prediction.G + (tau_pen + stream.tau)
    if eps > 0:
        den = fmax(den, eps)
    elif min(den) <= 0:
        raise DegenerateDenominatorError(f"priority denominator {tuple(den)} of stream {stream.i}")
    return normalize(N / den)


def refresh_priorities(state: ControllerState) -> ControllerState:
    for s in state.streams:
        s.tau_pen = switch_penalty(state, s.i)
        s.pi = compute_priority(s, tau_pen=s.tau_pen, eps=state.eps)
    return state


def decide(state: ControllerState) -> tuple[int, float]:
    """Stream to serve next and the confidence of that choice.

    With an empty omega and no demand anywhere the current stream is kept, and
    so it is when it ties with the best challenger.
    """
    if state.omega:
        return state.omega[0], 1.0
    pis = [s.pi for s in state.streams]
    if all(p.is_crisp and p.q1 == 0 for p in pis):
        return state.sigma, 1.0
    best, conf = fuzzy_argmax(pis)
    cur = state.sigma
    if best != cur and 0 <= cur < len(pis):
        if prob_geq(pis[cur], pis[best]) >= prob_geq(pis[best], pis[cur]) - 1e-12:
            return cur, conf
    return best, conf


def decision_uncertainty(state: ControllerState, sigma: int) -> tuple[float, float, float]:
    """(total, stabilization, optimization) uncertainty of serving ``sigma``."""
    p_stab = state.p_exceeds(sigma)
    if p_stab > 0.5:
        unc_stab = 2.0 * (1.0 - p_stab)
        unc_opt = 0.0
    else:
        unc_stab = 2.0 * p_stab
        pi_sigma = state.streams[sigma].pi
        unc_opt = 0.0
        for s in state.streams:
            if s.i != sigma:
                unc_opt = max(unc_opt, 2.0 * prob_less(pi_sigma, s.pi))
    unc_stab = min(max(unc_stab, 0.0), 1.0)
    unc_opt = min(max(unc_opt, 0.0), 1.0)
    return max(unc_stab, unc_opt), unc_stab, unc_opt


def _tick(state: ControllerState, request: int | None):
    started = False
    if state.phase == INTERGREEN and state.intergreen_left <= 0:
        started = True
        state.phase = SERVING
        state.green = state.target
        state.target = None
        state.green_elapsed = 0
        if state.omega and state.omega[0] == state.green:
            G = state.streams[state.green].prediction.G
            state.service_budget = min(int(math.ceil(max(G))), int(state.t_max))
        else:
            state.service_budget = None
    # a green that starts now is shown for at least this second
    if (request is not None and not started and state.phase == SERVING
            and request != state.green and state.green_elapsed >= state.min_green):
        old = state.green
        if old in state.omega:
            state.omega.remove(old)
        state.phase = INTERGREEN
        state.green = None
        state.target = request
        state.sigma = request
        state.intergreen_left = int(state.streams[old].tau)
        state.service_budget = None
    if state.phase == INTERGREEN:
        state.intergreen_left -= 1
    else:
        state.green_elapsed += 1
    for s in state.streams:
        s.r = 0 if s.i == state.green else s.r + 1


def execute(state: ControllerState, sigma: int) -> tuple:
    """Apply a decision for the coming second and return the faces shown."""
    if not 0 <= sigma < len(state.streams):
        raise IndexError(f"no stream {sigma}")
    _tick(state, sigma)
    return faces(state)


def hold(state: ControllerState) -> tuple:
    """Keep the faces as they are; timers and any running intergreen advance."""
    _tick(state, None)
    return faces(state)


def faces(state: ControllerState) -> tuple:
    if state.phase == INTERGREEN:
        return tuple("intergreen" for _ in state.streams)
    return tuple("green" if s.i == state.green else "red" for s in state.streams)
