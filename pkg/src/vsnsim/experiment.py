"""Scenario configuration, lock-step simulation and saturation sweeps."""

from __future__ import annotations

import csv
import io
import json
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .collection import CollectionPolicy, ControlNode, run_step
from .controller import faces
from .topology import load_topology
from .vsn import VSNLink
from .world import World, measure_delay, saturation_flow_probe

__all__ = [
    "ConfigError",
    "SweepError",
    "ScenarioConfig",
    "RunRecord",
    "CSV_COLUMNS",
    "PRESETS",
    "load_config",
    "config_from_dict",
    "demand_rates",
    "Simulation",
    "run_scenario",
    "run_sweep",
    "sweep_cells",
    "write_csv",
    "records_to_csv",
    "probe_rows",
]

CSV_COLUMNS = ("saturation", "algorithm", "threshold", "avg_delay_s", "transfers_total",
               "transfers_per_vehicle", "vehicles_completed", "seed")

PRESETS = {
    "desk": {"topology": "grid_2x2", "duration": 3600, "warmup": 300},
    "paper": {"topology": "grid_2x2", "duration": 10800, "warmup": 300},
}


class ConfigError(ValueError):
    pass


class SweepError(RuntimeError):
    def __init__(self, failures, records):
        super().__init__(f"{len(failures)} sweep cell(s) failed")
        self.failures = failures
        self.records = records


@dataclass(frozen=True)
class ScenarioConfig:
    topology: object = "grid_2x2"
    duration: int = 3600
    warmup: int = 300
    saturation: float = 0.5
    sweep: tuple | None = None
    policies: tuple = (CollectionPolicy(1, 0.0),)
    v_max: int = 2
    p: float = 0.15
    t_max: float = 120.0
    tau: float = 5.0
    tau0: float = 5.0
    penalty: object = "tau_sigma"
    min_green: int = 0
    saturation_flow: float = 1700.0
    green_share: float = 0.5
    seeds: tuple = (0, 1, 2, 3, 4)
    include_queue_wait: bool = True
    count_hello: bool = False
    ramp: bool = False

    def __post_init__(self):
        if self.duration <= 0:
            raise ConfigError("duration must be positive")
        if self.warmup < 0 or self.warmup >= self.duration:
            raise ConfigError("warmup must lie in [0, duration)")
        if not 0.0 <= self.saturation <= 1.0:
            raise ConfigError("saturation must lie in [0, 1]")
        if self.sweep is not None:
            lo, hi, steps = self.sweep
            if not (0.0 <= lo <= 1.0 and 0.0 <= hi <= 1.0) or steps < 1:
                raise ConfigError("sweep bounds must lie in [0, 1] with steps >= 1")
        if not self.policies:
            raise ConfigError("no policy given")
        if not 0.0 <= self.p <= 1.0 or self.v_max < 1:
            raise ConfigError("invalid nasch parameters: p must lie in [0, 1] and v_max be >= 1")
        if min(self.t_max, self.tau, self.tau0) <= 0:
            raise ConfigError("controller durations t_max, tau and tau0 must be positive")

    @property
    def policy(self) -> CollectionPolicy:
        return self.policies[0]

    def saturations(self) -> list:
        if self.sweep is None:
            return [self.saturation]
        lo, hi, steps = self.sweep
        if steps == 1:
            return [lo]
        return [round(lo + (hi - lo) * k / (steps - 1), 10) for k in range(steps)]


@dataclass(frozen=True)
class RunRecord:
    saturation: float
    algorithm: int
    threshold: float
    avg_delay_s: float
    transfers_total: int
    transfers_per_vehicle: float
    vehicles_completed: int
    seed: int

    def sort_key(self):
        return (self.algorithm, self.threshold, self.saturation, self.seed)

    def row(self) -> list:
        return [getattr(self, c) for c in CSV_COLUMNS]


_THRESHOLD_KEYS = {1: "ut_pos", 2: "ut_pred", 3: "ut_dec"}


def _threshold(value, where):
    if isinstance(value, str):
        if value.strip().lower() in ("inf", "infinity"):
            return math.inf
        raise ConfigError(f"{where}: threshold {value!r} is not a number")
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError(f"{where}: threshold must be a number")
    return float(value)


def _policy(entry, where) -> CollectionPolicy:
    if not isinstance(entry, dict):
        raise ConfigError(f"{where}: policy must be an object")
    unknown = set(entry) - {"algorithm", "threshold", "ut_pos", "ut_pred", "ut_dec"}
    if unknown:
        raise ConfigError(f"{where}: unknown policy key(s) {sorted(unknown)}")
    kind = entry.get("algorithm")
    if kind not in (1, 2, 3):
        raise ConfigError(f"{where}: algorithm must be 1, 2 or 3")
    value = entry.get("threshold", entry.get(_THRESHOLD_KEYS[kind], 0.0))
    try:
        return CollectionPolicy(kind, _threshold(value, where))
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


_TOP_KEYS = {"preset", "topology", "duration", "warmup", "saturation", "sweep", "algorithm",
             "threshold", "ut_pos", "ut_pred", "ut_dec", "policies", "nasch", "controller",
             "demand", "seeds", "seed", "include_queue_wait", "count_hello", "ramp"}


def config_from_dict(data: dict, base_dir: Path | None = None) -> ScenarioConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config key(s) {sorted(unknown)}")
    merged = {}
    if "preset" in data:
        if data["preset"] not in PRESETS:
            raise ConfigError(f"unknown preset {data['preset']!r}")
        merged.update(PRESETS[data["preset"]])
    merged.update({k: v for k, v in data.items() if k != "preset"})
    kw = {}
    topo = merged.get("topology", "grid_2x2")
    if isinstance(topo, str) and base_dir is not None and topo.endswith(".json"):
        path = Path(topo)
        topo = str(path if path.is_absolute() else base_dir / path)
    kw["topology"] = topo
    for key, cast in (("duration", int), ("warmup", int), ("saturation", float)):
        if key in merged:
            kw[key] = cast(merged[key])
    if "sweep" in merged:
        sw = merged["sweep"]
        try:
            kw["sweep"] = (float(sw["from"]), float(sw["to"]), int(sw["steps"]))
        except (KeyError, TypeError, ValueError):
            raise ConfigError("sweep needs numeric 'from', 'to' and 'steps'") from None
    if "policies" in merged:
        kw["policies"] = tuple(_policy(p, f"policies[{i}]") for i, p in enumerate(merged["policies"]))
    elif "algorithm" in merged:
        kw["policies"] = (_policy({k: merged[k] for k in ("algorithm", "threshold", "ut_pos",
                                                          "ut_pred", "ut_dec") if k in merged},
                                  "policy"),)
    nasch = merged.get("nasch", {})
    if set(nasch) - {"v_max", "p"}:
        raise ConfigError(f"unknown nasch key(s) {sorted(set(nasch) - {'v_max', 'p'})}")
    if "v_max" in nasch:
        kw["v_max"] = int(nasch["v_max"])
    if "p" in nasch:
        kw["p"] = float(nasch["p"])
    ctl = merged.get("controller", {})
    allowed = {"t_max", "tau", "tau0", "penalty", "min_green"}
    if set(ctl) - allowed:
        raise ConfigError(f"unknown controller key(s) {sorted(set(ctl) - allowed)}")
    for key in ("t_max", "tau", "tau0"):
        if key in ctl:
            kw[key] = float(ctl[key])
    if "min_green" in ctl:
        kw["min_green"] = int(ctl["min_green"])
    if "penalty" in ctl:
        pen = ctl["penalty"]
        kw["penalty"] = pen if pen == "tau_sigma" else float(pen)
    demand = merged.get("demand", {})
    if set(demand) - {"saturation_flow", "green_share"}:
        raise ConfigError("unknown demand key(s)")
    for key in ("saturation_flow", "green_share"):
        if key in demand:
            kw[key] = float(demand[key])
    if "seeds" in merged:
        kw["seeds"] = tuple(int(s) for s in merged["seeds"])
    elif "seed" in merged:
        kw["seeds"] = (int(merged["seed"]),)
    for key in ("include_queue_wait", "count_hello", "ramp"):
        if key in merged:
            kw[key] = bool(merged[key])
    return ScenarioConfig(**kw)


def load_config(path) -> ScenarioConfig:
    """Read a JSON scenario file; errors carry ``file:line:col`` diagnostics."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    try:
        return config_from_dict(data, path.parent)
    except (ConfigError, TypeError, ValueError) as exc:
        line = _locate(text, str(exc))
        where = f"{path}:{line}" if line else str(path)
        raise ConfigError(f"{where}: {exc}") from None


def _locate(text: str, message: str) -> int | None:
    """Line of the first key named in ``message`` that appears in the JSON text."""
    lines = text.splitlines()
    for word in re.findall(r"[A-Za-z_][A-Za-z0-9_]*", message):
        token = f'"{word}"'
        for n, line in enumerate(lines, 1):
            if token in line:
                return n
    return None


def demand_rates(network, saturation: float, saturation_flow: float = 1700.0,
                 green_share: float = 0.5) -> list:
    """Per-entry Bernoulli arrival probability for a demand-capacity ratio."""
    base = saturation * saturation_flow / 3600.0 * green_share
    return [min(1.0, base * e.weight) for e in network.entries]


@dataclass
class Monitor:
    """Signal safety and stream service bookkeeping of one run."""
    tau: int = 5
    bound: float = 250.0
    dual_green: int = 0
    intergreen_violations: int = 0
    max_wait: float = 0.0
    late_services: list = field(default_factory=list)


class Simulation:
    """World, channel and control nodes stepped in lock-step."""

    def __init__(self, config: ScenarioConfig, seed: int = 0, policy: CollectionPolicy | None = None,
                 saturation: float | None = None, trace=None, keep_log: bool = False,
                 check_containment: bool = False):
        self.config = config
        self.seed = seed
        self.policy = policy or config.policy
        self.saturation = config.saturation if saturation is None else saturation
        self.network = load_topology(config.topology)
        self.world = World(self.network, v_max=config.v_max, p=config.p, seed=seed)
        self.vsn = VSNLink(self.world, trace=trace, keep_log=keep_log)
        self.nodes = [ControlNode(self.network, node, self.vsn, v_max=config.v_max,
                                  t_max=config.t_max, tau=config.tau, tau0=config.tau0,
                                  min_green=config.min_green, penalty=config.penalty)
                      for node in self.network.intersections]
        self.rates = demand_rates(self.network, self.saturation, config.saturation_flow,
                                  config.green_share)
        self.check_containment = check_containment
        self.containment_checks = 0
        self.containment_violations = []
        self.outcomes = 0
        bound = config.t_max + config.tau0 + 120 + config.tau
        self.monitor = Monitor(tau=int(config.tau), bound=bound)
        n = len(self.nodes)
        self._last_green = [node.state.green for node in self.nodes]
        self._last_green_stream = list(self._last_green)
        self._red_run = [0] * n
        self._wait_start = [[None] * len(node.lanes) for node in self.nodes]

    # -- monitors -------------------------------------------------------------
    def _record_signals(self, t: int):
        mon = self.monitor
        lanes = self.world.lanes
        for n, node in enumerate(self.nodes):
            shown = node.state.green
            greens = sum(1 for f in faces(node.state) if f == "green")
            if greens > 1:
                mon.dual_green += 1
            if shown is None:
                self._red_run[n] += 1
            else:
                last = self._last_green_stream[n]
                if shown != last and self._red_run[n] != mon.tau:
                    mon.intergreen_violations += 1
                if shown == last and self._last_green[n] is None and self._red_run[n]:
                    mon.intergreen_violations += 1
                self._red_run[n] = 0
                self._last_green_stream[n] = shown
            self._last_green[n] = shown
            # a stream is timed from red onset, or from its first queued vehicle
            # if it was empty then, until its next green
            inter = self.network.intersections[n]
            for s, li in enumerate(inter.streams):
                if shown == s:
                    start = self._wait_start[n][s]
                    if start is not None:
                        self._note_wait(t - start, n, s, t)
                    self._wait_start[n][s] = None
                elif lanes[li] and self._wait_start[n][s] is None:
                    self._wait_start[n][s] = t

    def _note_wait(self, wait, n, s, t):
        mon = self.monitor
        mon.max_wait = max(mon.max_wait, wait)
        if wait > mon.bound:
            mon.late_services.append((n, s, t, wait))

    def _close_monitors(self):
        t = self.world.t
        for n, starts in enumerate(self._wait_start):
            for s, start in enumerate(starts):
                if start is not None and t - start > self.monitor.bound:
                    self._note_wait(t - start, n, s, t)

    def _containment(self, node: ControlNode, t: int):
        world = self.world
        for lane in node.lanes:
            length = lane.length
            for fv in lane.vehicles:
                veh = world.vehicles.get(fv.id)
                if veh is None:
                    coord = math.inf
                elif veh.link == lane.link:
                    coord = veh.cell
                elif lane.link in veh.route[:veh.leg]:
                    back = veh.route.index(lane.link)
                    coord = length + sum(self.network.links[li].cells
                                         for li in veh.route[back + 1:veh.leg]) + veh.cell
                else:
                    coord = -math.inf
                self.containment_checks += 1
                if not min(fv.X) <= coord <= max(fv.X):
                    self.containment_violations.append((t, node.index, fv.id, tuple(fv.X), coord))

    # -- stepping -------------------------------------------------------------
    def rates_at(self, t: int) -> list:
        if not self.config.ramp:
            return self.rates
        frac = min(1.0, t / self.config.duration)
        return [r * frac for r in self.rates]

    def step(self):
        world = self.world
        t = world.t
        for node in self.nodes:
            node.begin_step(t)
            if self.check_containment:
                self._containment(node, t)
            run_step(node, self.policy, t)
            self.outcomes += 1
        self._record_signals(t)
        events = world.step([node.state.green for node in self.nodes])
        t1 = world.t
        for veh, _, to_link in events.handoffs:
            self.vsn.handoff(veh, to_link, t1)
        for veh in events.exits:
            self.vsn.exited(veh)
        for veh in world.generate_arrivals(self.rates_at(t1)):
            self.vsn.register(veh, t1)

    def run(self) -> RunRecord:
        for _ in range(self.config.duration):
            self.step()
        self._close_monitors()
        return self.record()

    def record(self) -> RunRecord:
        cfg = self.config
        report = measure_delay(self.world, window_start=cfg.warmup,
                               include_queue_wait=cfg.include_queue_wait)
        transfers = self.vsn.total_transfers(since=cfg.warmup, include_hello=cfg.count_hello)
        done = [v for v in self.world.finished if v.arrival_step >= cfg.warmup]
        per_vehicle = sum(v.transfers for v in done) / len(done) if done else 0.0
        return RunRecord(
            saturation=float(self.saturation),
            algorithm=self.policy.kind,
            threshold=float(self.policy.threshold),
            avg_delay_s=round(report.mean, 6),
            transfers_total=int(transfers),
            transfers_per_vehicle=round(per_vehicle, 6),
            vehicles_completed=len(done),
            seed=int(self.seed),
        )


def run_scenario(config: ScenarioConfig, seed: int | None = None, trace=None,
                 policy: CollectionPolicy | None = None, saturation: float | None = None) -> RunRecord:
    """Run one (policy, saturation, seed) cell for ``config.duration`` seconds.

    ``trace`` may be a path or an open text file for the message trace.
    """
    seed = config.seeds[0] if seed is None else seed
    if trace is None or hasattr(trace, "write"):
        return Simulation(config, seed, policy, saturation, trace=trace).run()
    with open(trace, "w") as fh:
        return Simulation(config, seed, policy, saturation, trace=fh).run()


def sweep_cells(config: ScenarioConfig) -> list:
    return [(pol, sat, seed) for pol in config.policies for sat in config.saturations()
            for seed in config.seeds]


def _run_cell(args):
    config, pol, sat, seed = args
    return run_scenario(config, seed=seed, policy=pol, saturation=sat)


def records_to_csv(records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in sorted(records, key=RunRecord.sort_key):
        writer.writerow(rec.row())
    return buf.getvalue()


def write_csv(records, path):
    Path(path).write_text(records_to_csv(records))


def run_sweep(config: ScenarioConfig, out=None, workers: int = 1, order=None) -> list:
    """Run every (policy, saturation, seed) cell and optionally write a CSV.

    Cells are independent; ``workers > 1`` runs them in a process pool and
    ``order`` permutes submission, neither of which changes the output. If
    any cell fails, the successful ones are still written and
    :class:`SweepError` lists the failures.
    """
    cells = sweep_cells(config)
    if order is not None:
        cells = [cells[i] for i in order]
    jobs = [(config, pol, sat, seed) for pol, sat, seed in cells]
    records, failures = [], []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [(cell, pool.submit(_run_cell, job)) for cell, job in zip(cells, jobs)]
            for cell, fut in futures:
                try:
                    records.append(fut.result())
                except Exception as exc:  # reported per cell
                    failures.append((cell, repr(exc)))
    else:
        for cell, job in zip(cells, jobs):
            try:
                records.append(_run_cell(job))
            except Exception as exc:  # reported per cell
                failures.append((cell, repr(exc)))
    records.sort(key=RunRecord.sort_key)
    if out is not None:
        write_csv(records, out)
    if failures:
        raise SweepError(failures, records)
    return records


def probe_rows(seeds=(0, 1, 2, 3, 4), duration: int = 3600, v_max: int = 2,
               ps=(0.15,), demand: float = 1.0) -> list:
    rows = []
    for p in ps:
        for seed in seeds:
            flow = saturation_flow_probe(duration=duration, v_max=v_max, p=p, seed=seed,
                                         demand=demand)
            rows.append({"p": p, "v_max": v_max, "demand": demand, "seed": seed,
                         "duration_s": duration, "veh_per_hour_green": flow})
    return rows


def with_policy(config: ScenarioConfig, policy: CollectionPolicy, **changes) -> ScenarioConfig:
    return replace(config, policies=(policy,), **changes)


def config_fields() -> list:
    return [f.name for f in fields(ScenarioConfig)]
