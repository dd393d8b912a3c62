"""Discrete-event simulation of a proximity cloud running offloaded apps.

Single totally-ordered event queue (time, then scheduling sequence number, so
ties are deterministic).  Devices beacon their presence; a device unseen for
longer than the beacon TTL drops out of the visible neighbour set and is
never considered by decisions.  Application runs walk the call graph in
topological order; before each method the runner either re-runs the colony on
the residual graph (mode `aco`) or consults its decision cache with colony
fallback (modes `cache_local` / `cache_collab`).  Collaborative mode also
exchanges trails according to the configured dissemination policy.

Simulated time accounting per method: decision cost (see OverheadSpec) +
transfer of the hop's bytes + compute on the executor.  If the executor
departs mid-method the method restarts on the runner and the offload counts
as unsuccessful; if it was already gone (stale visibility) the runner pays
the transfer attempt plus a failover timeout.
"""

from __future__ import annotations

import csv
import heapq
import io
import json
import math
import time as _time
from dataclasses import dataclass, field
from pathlib import Path

from .aco import AcoParams, decide_next, eval_units
from .cache import DecisionCache, ExecutionTrail, resolve_placeholder
from .context import ContextSignature, DeviceProfile, Link, SpcTopology, transfer_time
from .expand import MARSHAL_CPU_PER_BYTE
from .graph import topo_order
from .rng import stream_state, uniform
from .scenario import DeviceSpec, ScenarioConfig
from . import context as _ctx

FAILOVER_TIMEOUT_MS = 50.0
BEACON_WIRE_BYTES = 32
REQUEST_WIRE_BYTES = 32
MESSAGE_KINDS = ("beacon", "cache_share", "cache_request", "cache_reply")

CSV_COLUMNS = [
    "run_id", "app", "runner", "rep", "start_ms", "end_ms", "end_to_end_ms",
    "decision_ms", "transfer_ms", "compute_ms", "n_methods", "n_offloaded",
    "n_failures", "cache_hits", "cache_misses",
]


class SimulationError(RuntimeError):
    pass


def trail_wire_bytes(trails) -> int:
    return sum(64 + 4 * len(t.signature.tokens) + 24 * len(t.assignment) for t in trails)


@dataclass
class RunRow:
    run_id: int
    app: str
    runner: str
    rep: int
    start_ms: float
    end_ms: float
    end_to_end_ms: float
    decision_ms: float
    transfer_ms: float
    compute_ms: float
    n_methods: int
    n_offloaded: int
    n_failures: int
    cache_hits: int
    cache_misses: int


@dataclass
class MetricsRecord:
    seed: int
    mode: str
    rows: list[RunRow]
    method_offload_rate: dict[str, float]  # "app:method" -> %
    device_contribution_pct: dict[str, float]
    app_end_to_end_ms: dict[str, float]  # mean per app
    decision_sim_ms_mean: float
    cache_hit_rate_pct: float
    message_counts: dict[str, int]
    n_runs: int
    aborted_runs: int
    offload_failures: int
    horizon_exceeded: bool
    decision_wall_ms_mean: float = 0.0  # measured; reported on stdout only

    def to_json_dict(self) -> dict:
        # wall-clock deliberately excluded: artifacts must be reproducible
        return {
            "seed": self.seed,
            "mode": self.mode,
            "n_runs": self.n_runs,
            "aborted_runs": self.aborted_runs,
            "offload_failures": self.offload_failures,
            "horizon_exceeded": self.horizon_exceeded,
            "decision_sim_ms_mean": round(self.decision_sim_ms_mean, 9),
            "cache_hit_rate_pct": round(self.cache_hit_rate_pct, 6),
            "method_offload_rate": {k: round(v, 6) for k, v in sorted(self.method_offload_rate.items())},
            "device_contribution_pct": {k: round(v, 6) for k, v in sorted(self.device_contribution_pct.items())},
            "app_end_to_end_ms": {k: round(v, 9) for k, v in sorted(self.app_end_to_end_ms.items())},
            "message_counts": dict(sorted(self.message_counts.items())),
            "runs": [
                {
                    "run_id": r.run_id, "app": r.app, "runner": r.runner, "rep": r.rep,
                    "start_ms": round(r.start_ms, 9), "end_ms": round(r.end_ms, 9),
                    "end_to_end_ms": round(r.end_to_end_ms, 9),
                    "decision_ms": round(r.decision_ms, 9),
                    "transfer_ms": round(r.transfer_ms, 9),
                    "compute_ms": round(r.compute_ms, 9),
                    "n_methods": r.n_methods, "n_offloaded": r.n_offloaded,
                    "n_failures": r.n_failures,
                    "cache_hits": r.cache_hits, "cache_misses": r.cache_misses,
                }
                for r in self.rows
            ],
        }

    def runs_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)

        def fmt(x):
            return format(x, ".6f") if isinstance(x, float) else x

        for r in self.rows:
            w.writerow([fmt(getattr(r, c)) for c in CSV_COLUMNS])
        n = max(1, len(self.rows))
        w.writerow([
            "summary", "*", "*", len(self.rows),
            fmt(min((r.start_ms for r in self.rows), default=0.0)),
            fmt(max((r.end_ms for r in self.rows), default=0.0)),
            fmt(sum(r.end_to_end_ms for r in self.rows) / n),
            fmt(sum(r.decision_ms for r in self.rows)),
            fmt(sum(r.transfer_ms for r in self.rows)),
            fmt(sum(r.compute_ms for r in self.rows)),
            sum(r.n_methods for r in self.rows),
            sum(r.n_offloaded for r in self.rows),
            sum(r.n_failures for r in self.rows),
            sum(r.cache_hits for r in self.rows),
            sum(r.cache_misses for r in self.rows),
        ])
        return buf.getvalue()


@dataclass
class _Run:
    run_id: int
    app_id: str
    entry_idx: int
    rep: int
    runner: str
    t_start: float
    loads: dict[str, float]
    order: list[str]
    idx: int = 0
    epoch: int = 0
    executed: list[tuple[str, str]] = field(default_factory=list)
    decided: list[str] = field(default_factory=list)
    decision_ms: float = 0.0
    transfer_ms: float = 0.0
    compute_ms: float = 0.0
    cpu_work: float = 0.0
    hits: int = 0
    misses: int = 0
    failures: int = 0
    signature: ContextSignature | None = None
    inflight_device: str | None = None
    inflight_decided: str | None = None
    inflight_started: float = 0.0
    inflight_overhead: float = 0.0  # decision + transfer charged for the method


class Simulator:
    def __init__(self, config: ScenarioConfig):
        self.cfg = config
        self.base_source = config.source_device().id
        self.graphs = {}
        self.orders = {}
        for app in config.apps:
            if app.app_id not in self.graphs:
                g = app.build_graph(config.base_dir)
                self.graphs[app.app_id] = g
                self.orders[app.app_id] = topo_order(g)

        self.specs: dict[str, DeviceSpec] = {d.id: d for d in config.active_devices()}
        self.alive: dict[str, bool] = {d: True for d in self.specs}
        self.neighbors: dict[str, dict[str, float]] = {d: {} for d in self.specs}
        self.caches: dict[str, DecisionCache] = {
            d: DecisionCache(capacity=config.cache_capacity) for d in self.specs
        }
        self.busy: dict[str, bool] = {d: False for d in self.specs}
        self.queue: dict[str, list] = {d: [] for d in self.specs}

        self.events: list = []
        self.seq = 0
        self.now = 0.0
        self.run_counter = 0
        self.pending_workload = 0
        self.runs: dict[int, _Run] = {}
        self.rows: list[RunRow] = []
        self.msg_counts = {k: 0 for k in MESSAGE_KINDS}
        self.method_exec: dict[tuple[str, str], int] = {}
        self.method_offl: dict[tuple[str, str], int] = {}
        self.contrib: dict[str, int] = {}
        self.decisions = 0
        self.decision_sim_ms = 0.0
        self.decision_wall_ms = 0.0
        self.hits = 0
        self.misses = 0
        self.aborted = 0
        self.failures = 0
        self.horizon_exceeded = False

    # -- plumbing ------------------------------------------------------------

    def _schedule(self, at: float, kind: str, payload: tuple):
        heapq.heappush(self.events, (at, self.seq, kind, payload))
        self.seq += 1

    def _link(self, a: str, b: str) -> Link | None:
        if a == b:
            return _ctx.self_link(a)
        for ls in self.cfg.links:
            if ls.a == a and ls.b == b:
                return Link(a, b, ls.bandwidth, ls.latency)
            if ls.symmetric and ls.a == b and ls.b == a:
                return Link(a, b, ls.bandwidth, ls.latency)
        if self.cfg.default_link is not None:
            return Link(a, b, self.cfg.default_link.bandwidth, self.cfg.default_link.latency)
        return None

    def _visible(self, viewer: str, t: float) -> list[str]:
        table = self.neighbors[viewer]
        fresh = [d for d, seen in table.items() if t - seen <= self.cfg.beacon_ttl_ms and d in self.specs]
        return sorted(set(fresh) | {viewer})

    def _view_topology(self, runner: str, ids, loads) -> SpcTopology:
        """Topology as seen by `runner`: it takes the source role, whoever
        nominally holds it is demoted to a plain member for this view."""
        devices = {}
        for did in ids:
            spec = self.specs[did]
            kind = "source" if did == runner else ("spc_member" if spec.kind == "source" else spec.kind)
            devices[did] = DeviceProfile(
                id=did, speed=spec.speed, load=loads.get(did, spec.load),
                battery=spec.battery, memory=spec.memory, kind=kind,
            )
        links = {}
        for a in ids:
            for b in ids:
                if a != b:
                    link = self._link(a, b)
                    if link is not None:
                        links[(a, b)] = link
        return SpcTopology(devices=devices, links=links)

    def _eff_speed(self, did: str, loads) -> float:
        spec = self.specs[did]
        return spec.speed * (1.0 - loads.get(did, spec.load))

    # -- setup ---------------------------------------------------------------

    def _seed_initial_events(self):
        for did in sorted(self.specs):
            self._schedule(0.0, "beacon", (did,))
        if self.cfg.mode == "cache_collab" and self.cfg.policies.dissemination == "periodic":
            for did in sorted(self.specs):
                self._schedule(self.cfg.policies.dissemination_interval_ms, "cache_tick", (did,))
        for i, app in enumerate(self.cfg.apps):
            self._schedule(app.start_ms, "app_start", (i, 0))
            self.pending_workload += app.repetitions
        for did, at in self.cfg.churn.leaves:
            self._schedule(at, "leave", (did,))
        for spec, at in self.cfg.churn.joins:
            self._schedule(at, "join", (spec,))
        if self.cfg.churn.leave_rate_per_ms > 0:
            self._seed_random_churn()

    def _seed_random_churn(self):
        rate = self.cfg.churn.leave_rate_per_ms
        down = self.cfg.churn.downtime_ms
        for i, did in enumerate(sorted(self.specs)):
            if self.specs[did].kind != "spc_member":
                continue
            state = stream_state(self.cfg.seed, 7000, i)
            t = 0.0
            while True:
                u, state = uniform(state, 0.0, 1.0)
                t += -math.log(max(u, 1e-12)) / rate
                if t > self.cfg.horizon_ms:
                    break
                self._schedule(t, "leave", (did,))
                t += down
                if t > self.cfg.horizon_ms:
                    break
                self._schedule(t, "join", (self.specs[did],))

    # -- event handlers --------------------------------------------------------

    def _on_beacon(self, t: float, did: str):
        if not self.alive.get(did, False):
            return
        sent = False
        for other in sorted(self.specs):
            if other == did:
                continue
            link = self._link(did, other)
            if link is None:
                continue
            sent = True
            delay = transfer_time(BEACON_WIRE_BYTES, link)
            self._schedule(t + delay, "beacon_arrive", (other, did))
        if sent:
            self.msg_counts["beacon"] += 1  # broadcasts count once
        nxt = t + self.cfg.beacon_period_ms
        if nxt <= self.cfg.horizon_ms:
            self._schedule(nxt, "beacon", (did,))

    def _on_beacon_arrive(self, t: float, receiver: str, sender: str):
        if self.alive.get(receiver, False):
            self.neighbors[receiver][sender] = t

    def _on_leave(self, t: float, did: str):
        if not self.alive.get(did, False):
            return
        self.alive[did] = False
        for entry_idx, rep in self.queue[did]:
            self.pending_workload -= self.cfg.apps[entry_idx].repetitions - rep
            self.aborted += 1
        self.queue[did] = []
        for run in list(self.runs.values()):
            if run.runner == did:
                self._abort_run(run)
            elif run.inflight_device == did:
                # executor vanished mid-method: restart locally
                run.epoch += 1
                run.failures += 1
                self.failures += 1
                g = self.graphs[run.app_id]
                work = g.node(run.order[run.idx]).compute_work
                local_ms = work / self._eff_speed(run.runner, run.loads)
                run.inflight_device = run.runner
                run.cpu_work += work
                self._schedule(t + local_ms, "method_done", (run.run_id, run.epoch))

    def _on_join(self, t: float, spec: DeviceSpec):
        did = spec.id
        if did not in self.specs:
            self.specs[did] = spec
            self.neighbors[did] = {}
            self.caches[did] = DecisionCache(capacity=self.cfg.cache_capacity)
            self.busy[did] = False
            self.queue[did] = []
        if self.alive.get(did, False):
            return
        self.alive[did] = True
        self.neighbors[did] = {}
        self._schedule(t, "beacon", (did,))
        if self.cfg.mode == "cache_collab" and self.cfg.policies.dissemination == "periodic":
            self._schedule(t + self.cfg.policies.dissemination_interval_ms, "cache_tick", (did,))

    def _abort_run(self, run: _Run):
        del self.runs[run.run_id]
        self.aborted += 1
        self.pending_workload -= 1
        # remaining reps of this entry never start
        app = self.cfg.apps[run.entry_idx]
        self.pending_workload -= app.repetitions - run.rep - 1

    # -- workload ----------------------------------------------------------------

    def _on_app_start(self, t: float, entry_idx: int, rep: int):
        app = self.cfg.apps[entry_idx]
        runner = app.runner
        if not self.alive.get(runner, False):
            self.aborted += 1
            self.pending_workload -= app.repetitions - rep
            return
        if self.busy[runner]:
            self.queue[runner].append((entry_idx, rep))
            return
        self._begin_run(t, entry_idx, rep)

    def _begin_run(self, t: float, entry_idx: int, rep: int):
        app = self.cfg.apps[entry_idx]
        runner = app.runner
        self.busy[runner] = True
        run_id = self.run_counter
        self.run_counter += 1
        loads = {}
        for i, did in enumerate(sorted(self.specs)):
            spec = self.specs[did]
            if spec.load_jitter > 0:
                state = stream_state(self.cfg.seed, 1000 + run_id, i)
                dlt, _ = uniform(state, -spec.load_jitter, spec.load_jitter)
                loads[did] = min(0.99, max(0.0, spec.load + dlt))
            else:
                loads[did] = spec.load
        run = _Run(
            run_id=run_id, app_id=app.app_id, entry_idx=entry_idx, rep=rep,
            runner=runner, t_start=t, loads=loads, order=self.orders[app.app_id],
        )
        self.runs[run_id] = run
        self._advance(t, run)

    def _advance(self, t: float, run: _Run):
        """Decide and launch the next method of the run."""
        mid = run.order[run.idx]
        g = self.graphs[run.app_id]
        node = g.node(mid)
        device, decision_ms = self._decide(t, run, mid)
        if node.pinned:
            device = run.runner
        run.decided.append(device)

        prev_dev = run.executed[-1][1] if run.executed else run.runner
        prev_node = g.node(run.executed[-1][0]) if run.executed else None
        nbytes = prev_node.out_data.get(mid, 0) if prev_node is not None else 0
        link = self._link(prev_dev, device)
        if link is None:
            raise SimulationError(f"no link {prev_dev} -> {device}")
        tr_ms = transfer_time(nbytes, link)

        if not self.alive.get(device, False) and device != run.runner:
            # stale neighbour entry: pay the attempt, then run locally
            run.failures += 1
            self.failures += 1
            overhead = decision_ms + tr_ms + FAILOVER_TIMEOUT_MS
            compute = node.compute_work / self._eff_speed(run.runner, run.loads)
            run.inflight_device = run.runner
            run.cpu_work += node.compute_work
        else:
            overhead = decision_ms + tr_ms
            compute = node.compute_work / self._eff_speed(device, run.loads)
            run.inflight_device = device
            if device == run.runner:
                run.cpu_work += node.compute_work
            else:
                run.cpu_work += MARSHAL_CPU_PER_BYTE * nbytes
        run.inflight_decided = device
        run.inflight_started = t
        run.inflight_overhead = overhead
        run.decision_ms += decision_ms
        run.transfer_ms += tr_ms
        self._schedule(t + overhead + compute, "method_done", (run.run_id, run.epoch))

    def _on_method_done(self, t: float, run_id: int, epoch: int):
        run = self.runs.get(run_id)
        if run is None or run.epoch != epoch:
            return  # stale completion from before a restart
        mid = run.order[run.idx]
        realized = run.inflight_device
        # whatever the method occupied beyond decision+transfer is compute
        run.compute_ms += (t - run.inflight_started) - run.inflight_overhead
        run.executed.append((mid, realized))
        key = (run.app_id, mid)
        self.method_exec[key] = self.method_exec.get(key, 0) + 1
        if realized != run.runner:
            self.method_offl[key] = self.method_offl.get(key, 0) + 1
            self.contrib[realized] = self.contrib.get(realized, 0) + 1
        run.inflight_device = None
        run.idx += 1
        if run.idx < len(run.order):
            self._advance(t, run)
        else:
            self._finish_run(t, run)

    def _finish_run(self, t: float, run: _Run):
        del self.runs[run.run_id]
        self.pending_workload -= 1
        app = self.cfg.apps[run.entry_idx]
        end_to_end = t - run.t_start
        self.rows.append(
            RunRow(
                run_id=run.run_id, app=run.app_id, runner=run.runner, rep=run.rep,
                start_ms=run.t_start, end_ms=t, end_to_end_ms=end_to_end,
                decision_ms=run.decision_ms, transfer_ms=run.transfer_ms,
                compute_ms=run.compute_ms, n_methods=len(run.order),
                n_offloaded=sum(1 for _, d in run.executed if d != run.runner),
                n_failures=run.failures, cache_hits=run.hits, cache_misses=run.misses,
            )
        )
        if self.cfg.mode != "aco" and run.signature is not None:
            trail = ExecutionTrail(
                app=run.app_id,
                signature=run.signature,
                assignment=dict(run.executed),
                observed_cost=(end_to_end, run.cpu_work),
                weight=1,
                created_at=t,
            )
            changed = self.caches[run.runner].record_trail(trail, self.cfg.policies.merge)
            if changed and self.cfg.mode == "cache_collab" and self.cfg.policies.dissemination == "on_change":
                self._broadcast_cache(t, run.runner)

        self.busy[run.runner] = False
        if run.rep + 1 < app.repetitions:
            self._schedule(t + app.gap_ms, "app_start", (run.entry_idx, run.rep + 1))
        elif self.queue[run.runner]:
            entry_idx, rep = self.queue[run.runner].pop(0)
            self._schedule(t + app.gap_ms, "app_start", (entry_idx, rep))

    # -- decisions ----------------------------------------------------------------

    def _decision_params(self, run: _Run) -> AcoParams:
        a = self.cfg.aco
        return AcoParams(
            n_ants=a.n_ants, n_iterations=a.n_iterations, alpha=a.alpha, beta=a.beta,
            rho=a.rho, q=a.q, seed=stream_state(self.cfg.seed, 2000 + run.run_id, run.idx),
        )

    def _residual_evals(self, run: _Run, n_devices: int, params: AcoParams) -> int:
        g = self.graphs[run.app_id]
        sizes = [1 if g.node(m).pinned else n_devices for m in run.order[run.idx:]]
        return eval_units(sizes, params)

    def _decide(self, t: float, run: _Run, mid: str) -> tuple[str, float]:
        """Returns (device, simulated decision ms) for the next method."""
        visible = self._visible(run.runner, t)
        topo = self._view_topology(run.runner, visible, run.loads)
        params = self._decision_params(run)
        self.decisions += 1
        sim_ms = 0.0
        wall0 = _time.perf_counter()

        if self.cfg.mode == "aco":
            device = decide_next(
                self.graphs[run.app_id], run.executed, topo, params,
                lam=self.cfg.lam, source_id=run.runner,
            )
            if self.cfg.overhead.mode == "modeled":
                sim_ms = self.cfg.overhead.aco_ms(self._residual_evals(run, len(visible), params))
        else:
            sig = _ctx.make_signature(topo, run.app_id, self.cfg.bucketing, source_id=run.runner)
            if run.signature is None:
                run.signature = sig
            cache = self.caches[run.runner]
            dropped = cache.invalidate(self.cfg.policies, t, sig)
            if dropped and self.cfg.mode == "cache_collab" and self.cfg.policies.dissemination == "on_change":
                self._broadcast_cache(t, run.runner)
            ops = cache.scan_ops(run.app_id, sig)
            if self.cfg.overhead.mode == "modeled":
                sim_ms += self.cfg.overhead.match_ms(ops)
            res = cache.lookup(run.app_id, sig, self.cfg.theta, increment_on_hit=False)
            device = None
            if res is not None:
                cand = res.trail.assignment.get(mid)
                if cand in visible:
                    device = cand
                    res.trail.weight += 1  # reuse counts as a decision taken
                    run.hits += 1
                    self.hits += 1
            if device is None:
                run.misses += 1
                self.misses += 1
                if self.cfg.mode == "cache_collab" and self.cfg.policies.dissemination == "on_demand":
                    self._broadcast_request(t, run.runner)
                device = decide_next(
                    self.graphs[run.app_id], run.executed, topo, params,
                    lam=self.cfg.lam, source_id=run.runner,
                )
                if self.cfg.overhead.mode == "modeled":
                    sim_ms += self.cfg.overhead.aco_ms(self._residual_evals(run, len(visible), params))

        wall_ms = (_time.perf_counter() - wall0) * 1000.0
        self.decision_wall_ms += wall_ms
        if self.cfg.overhead.mode == "measured":
            sim_ms = wall_ms
        self.decision_sim_ms += sim_ms
        return device, sim_ms

    # -- cache traffic ---------------------------------------------------------------

    def _broadcast_cache(self, t: float, sender: str):
        trails = self.caches[sender].shareable_trails(sender)
        if not trails:
            return
        size = trail_wire_bytes(trails)
        sent = False
        for other in self._visible(sender, t):
            if other == sender:
                continue
            link = self._link(sender, other)
            if link is None:
                continue
            sent = True
            self._schedule(t + transfer_time(size, link), "deliver_share", (other, trails))
        if sent:
            self.msg_counts["cache_share"] += 1

    def _broadcast_request(self, t: float, sender: str):
        sent = False
        for other in self._visible(sender, t):
            if other == sender:
                continue
            link = self._link(sender, other)
            if link is None:
                continue
            sent = True
            self._schedule(t + transfer_time(REQUEST_WIRE_BYTES, link), "deliver_request", (other, sender))
        if sent:
            self.msg_counts["cache_request"] += 1

    def _on_deliver_share(self, t: float, receiver: str, trails):
        if not self.alive.get(receiver, False) or self.cfg.mode != "cache_collab":
            return
        resolved = resolve_placeholder(trails, receiver)
        # merging received trails never re-triggers on-change sharing
        self.caches[receiver].merge_caches(resolved, self.cfg.policies.merge)

    def _on_deliver_request(self, t: float, receiver: str, requester: str):
        if not self.alive.get(receiver, False) or self.cfg.mode != "cache_collab":
            return
        trails = self.caches[receiver].shareable_trails(receiver)
        if not trails:
            return
        link = self._link(receiver, requester)
        if link is None:
            return
        self.msg_counts["cache_reply"] += 1
        self._schedule(t + transfer_time(trail_wire_bytes(trails), link), "deliver_share", (requester, trails))

    def _on_cache_tick(self, t: float, did: str):
        if self.alive.get(did, False):
            self._broadcast_cache(t, did)
        nxt = t + self.cfg.policies.dissemination_interval_ms
        if nxt <= self.cfg.horizon_ms and self.alive.get(did, False):
            self._schedule(nxt, "cache_tick", (did,))

    # -- main loop -----------------------------------------------------------------

    def _dispatch(self, t: float, kind: str, payload: tuple):
        getattr(self, f"_on_{kind}")(t, *payload)

    def step_until(self, t_stop: float):
        """Process events up to and including time t_stop (test hook)."""
        while self.events and self.events[0][0] <= t_stop:
            t, _, kind, payload = heapq.heappop(self.events)
            self.now = t
            self._dispatch(t, kind, payload)

    def run(self) -> MetricsRecord:
        self._seed_initial_events()
        while self.events and self.pending_workload > 0:
            t, _, kind, payload = heapq.heappop(self.events)
            if t > self.cfg.horizon_ms:
                break
            self.now = t
            self._dispatch(t, kind, payload)
        if self.pending_workload > 0:
            self.horizon_exceeded = True
        return self._metrics()

    def _metrics(self) -> MetricsRecord:
        rates = {}
        for (app, mid), n in sorted(self.method_exec.items()):
            offl = self.method_offl.get((app, mid), 0)
            rates[f"{app}:{mid}"] = 100.0 * offl / n
        total_offl = sum(self.contrib.values())
        contrib = {}
        for did in sorted(self.specs):
            n = self.contrib.get(did, 0)
            contrib[did] = 100.0 * n / total_offl if total_offl else 0.0
        apps = {}
        for app in sorted({r.app for r in self.rows}):
            rs = [r.end_to_end_ms for r in self.rows if r.app == app]
            apps[app] = sum(rs) / len(rs)
        n_dec = max(1, self.decisions)
        looked = self.hits + self.misses
        return MetricsRecord(
            seed=self.cfg.seed,
            mode=self.cfg.mode,
            rows=self.rows,
            method_offload_rate=rates,
            device_contribution_pct=contrib,
            app_end_to_end_ms=apps,
            decision_sim_ms_mean=self.decision_sim_ms / n_dec,
            cache_hit_rate_pct=100.0 * self.hits / looked if looked else 0.0,
            message_counts=dict(self.msg_counts),
            n_runs=len(self.rows),
            aborted_runs=self.aborted,
            offload_failures=self.failures,
            horizon_exceeded=self.horizon_exceeded,
            decision_wall_ms_mean=self.decision_wall_ms / n_dec,
        )


def run_scenario(config: ScenarioConfig) -> MetricsRecord:
    return Simulator(config).run()


def write_artifacts(metrics: MetricsRecord, out_dir: str | Path) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "runs.csv"
    json_path = out / "metrics.json"
    csv_path.write_text(metrics.runs_csv())
    json_path.write_text(json.dumps(metrics.to_json_dict(), indent=2, sort_keys=True) + "\n")
    return csv_path, json_path
