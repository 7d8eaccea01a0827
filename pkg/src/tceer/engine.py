"""Round-based simulation driver.

One ``numpy.random.Generator`` (PCG64, seeded from the config) drives the
whole run and is consumed in this order: node positions (unless a topology
file is given), attacker selection, then per round the source draw followed
by attacker coin flips in packet/hop order.

Round ``r`` (0-based) does:

1. draw ``sources_per_round`` alive, unblocked sources;
2. route one packet from each, debiting transmit/receive energy per hop,
   occupying relay buffers and executing attacker behaviour;
3. debit the per-round idle energy of every alive node;
4. drain every buffer by ``service_rate`` packets;
5. if ``r % trust_interval == 0``, recompute trust and extend the block list;
6. emit a :class:`RoundStats` row.

Nodes die the moment their energy reaches zero, so later packets in the
same round never use them.
"""
from __future__ import annotations

import io
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import SimConfig
from .flc import build_controllers
from .routing import BS, GreedyRouter, Outcome, RouteTrace, TceerRouter, route_packet
from .topology import Topology, deploy, load_topology
from .trust import TrustLedger, update_trust

log = logging.getLogger(__name__)

ROUNDS_HEADER = "round,alive,dead_pct,delivered,dropped_void,dropped_malicious,energy_j,blocked"
TRUST_HEADER = "round,observer,subject,DT,IT,T,classification"
LIFETIME_LEVELS = (1, 50, 100)


@dataclass
class RoundStats:
    round: int
    alive_count: int
    dead_pct: float
    delivered: int = 0
    dropped_void: int = 0
    dropped_malicious: int = 0
    dropped_dead: int = 0
    dropped_overflow: int = 0
    total_energy_consumed: float = 0.0
    blocked_count: int = 0

    def csv_row(self) -> str:
        return (f"{self.round},{self.alive_count},{float(self.dead_pct)!r},{self.delivered},"
                f"{self.dropped_void},{self.dropped_malicious},"
                f"{float(self.total_energy_consumed)!r},{self.blocked_count}")


class Network:
    """Mutable per-node state plus the hooks used by :func:`route_packet`."""

    def __init__(self, cfg: SimConfig, topology: Topology, behavior: list[str],
                 rng: np.random.Generator):
        self.cfg = cfg
        self.topology = topology
        self.rng = rng
        self.n = topology.n
        self.dist = topology.distance_matrix()
        self.dist_bs = topology.bs_distances()
        self.neighbors = topology.neighbor_lists()
        self.neighbor_ids = [[int(j) for j in nb] for nb in self.neighbors]
        self.closer = [nb[self.dist_bs[nb] < self.dist_bs[i]] for i, nb in enumerate(self.neighbors)]
        self.bs_in_range = self.dist_bs <= topology.radio_range
        self.energy = np.full(self.n, cfg.e_initial)
        self.queue = np.zeros(self.n, dtype=int)
        self.alive = np.ones(self.n, dtype=bool)
        self.blocked = np.zeros(self.n, dtype=bool)
        self.behavior = behavior
        self.ledger = TrustLedger(cfg.w_d, cfg.w_i, cfg.t_th)
        self.rx_cost = cfg.e_elec * cfg.packet_bits
        self.frozen = False
        self.consumed = 0.0
        self.death_round: dict[int, int] = {}
        self.death_packet: dict[int, int] = {}
        self.round = 0
        self.packet_id = 0

    def tx_cost(self, d: float) -> float:
        b = self.cfg.packet_bits
        return self.cfg.e_elec * b + self.cfg.eps_amp * b * d * d

    def spend(self, node: int, joules: float) -> bool:
        """Debit ``joules``; False (and the node dies) if it cannot afford them."""
        if self.frozen:
            return True
        e = self.energy[node]
        if e >= joules:
            self.energy[node] = e - joules
            self.consumed += joules
            if self.energy[node] <= 0.0:
                self._kill(node)
            return True
        self.consumed += e
        self.energy[node] = 0.0
        self._kill(node)
        return False

    def drain_idle(self, joules: float) -> None:
        """Debit ``joules`` from every alive node at once."""
        if self.frozen:
            return
        idx = np.flatnonzero(self.alive)
        paid = np.minimum(self.energy[idx], joules)
        self.energy[idx] -= paid
        self.consumed += math.fsum(paid)
        for i in idx[self.energy[idx] <= 0.0]:
            self._kill(int(i))

    def _kill(self, node: int) -> None:
        self.energy[node] = 0.0
        self.alive[node] = False
        self.death_round[node] = self.round
        self.death_packet[node] = self.packet_id

    def enqueue(self, node: int) -> bool:
        if self.frozen:
            return True
        if self.queue[node] >= self.cfg.buffer_capacity:
            return False
        self.queue[node] += 1
        return True

    def behave(self, node: int):
        kind = self.behavior[node]
        if self.frozen or kind == "honest":
            return None
        if kind == "dropper":
            return "drop" if self.rng.random() < self.cfg.p_drop else None
        return "modify" if self.rng.random() < self.cfg.p_modify else None

    def observe(self, observer: int, subject: int, forwarded: bool, modified: bool = False) -> None:
        if not self.frozen:
            self.ledger.observe(observer, subject, forwarded, modified)


def _pick_attackers(cfg: SimConfig, net: Network, rng) -> list[int]:
    """Attacker ids: explicit, random, or drawn from nodes on active routes.

    ``route`` placement draws from the nodes that some out-of-range node
    would pick as its next hop in the initial (all honest, full energy)
    state, so every attacker is positioned to receive traffic. When that set
    is smaller than ``malicious_count`` the rest is drawn from other nodes.
    """
    if cfg.malicious_ids:
        return sorted(cfg.malicious_ids)
    if cfg.malicious_count == 0:
        return []
    if cfg.malicious_placement == "random":
        return sorted(int(i) for i in rng.choice(cfg.n, cfg.malicious_count, replace=False))
    scout = TceerRouter(cfg, *build_controllers(cfg.flc))
    hops = (scout.select_next_hop(net, i) for i in range(net.n) if not net.bs_in_range[i])
    pool = sorted({h for h in hops if h >= 0})
    if len(pool) >= cfg.malicious_count:
        return sorted(int(i) for i in rng.choice(pool, cfg.malicious_count, replace=False))
    rest = [i for i in range(cfg.n) if i not in set(pool)]
    extra = rng.choice(rest, cfg.malicious_count - len(pool), replace=False)
    return sorted(pool + [int(i) for i in extra])


@dataclass
class RunResult:
    config: SimConfig
    router: str
    stats: list[RoundStats]
    traces: list[RouteTrace]
    ledger: list[tuple]
    trust_rows: list[tuple]
    attackers: list[int]
    network: Network = field(repr=False)

    def rounds_csv(self) -> str:
        return "\n".join([ROUNDS_HEADER] + [s.csv_row() for s in self.stats]) + "\n"

    def routes_text(self) -> str:
        return "".join(t.to_line() + "\n" for t in self.traces)

    def trust_csv(self) -> str:
        buf = io.StringIO()
        buf.write(TRUST_HEADER + "\n")
        for r in self.trust_rows:
            buf.write(f"{r[0]},{r[1]},{r[2]},{float(r[3])!r},{float(r[4])!r},{float(r[5])!r},{r[6]}\n")
        return buf.getvalue()

    def lifetime(self) -> dict:
        return lifetime(self.stats)

    @property
    def blocked(self) -> set[int]:
        return set(self.network.ledger.blocked)


class Simulation:
    """One deterministic run of TCEER (``router='tceer'``) or the greedy baseline."""

    def __init__(self, cfg: SimConfig, router: str = "tceer", record_trust: bool = True):
        self.cfg = cfg
        self.rng = np.random.default_rng(cfg.seed)
        if cfg.topology_file:
            topology = load_topology(cfg.topology_file)
            if topology.n != cfg.n:
                from .config import ConfigError
                raise ConfigError("topology_file", f"holds {topology.n} nodes but n = {cfg.n}")
        else:
            topology = deploy(cfg.n, cfg.field_width, cfg.field_height, (cfg.bs_x, cfg.bs_y),
                              radio_range=cfg.radio_range, rng=self.rng)
        behavior = ["honest"] * cfg.n
        self.net = Network(cfg, topology, behavior, self.rng)
        self.attackers = _pick_attackers(cfg, self.net, self.rng)
        for i in self.attackers:
            behavior[i] = cfg.malicious_behavior
        if router == "tceer":
            tcm, edm = build_controllers(cfg.flc)
            self.router = TceerRouter(cfg, tcm, edm)
        elif router == "greedy":
            self.router = GreedyRouter()
        else:
            raise ValueError(f"unknown router {router!r}")
        self.record_trust = record_trust
        self.stats: list[RoundStats] = []
        self.traces: list[RouteTrace] = []
        self.trust_rows: list[tuple] = []
        self.round = 0

    @property
    def topology(self) -> Topology:
        return self.net.topology

    def draw_sources(self) -> list[int]:
        net = self.net
        pool = np.flatnonzero(net.alive & ~net.blocked)
        k = min(self.cfg.sources_per_round, pool.size)
        if k == 0:
            return []
        return [int(i) for i in self.rng.choice(pool, k, replace=False)]

    def send(self, source: int, stats: RoundStats | None = None) -> RouteTrace:
        net = self.net
        net.round = self.round
        trace = route_packet(net, source, self.router, net.packet_id, self.round)
        net.packet_id += 1
        self.traces.append(trace)
        if stats is not None:
            _tally(stats, trace.outcome)
        return trace

    def step_round(self, sources: list[int] | None = None) -> RoundStats:
        cfg, net = self.cfg, self.net
        net.round = self.round
        net.consumed = 0.0
        stats = RoundStats(self.round, 0, 0.0)
        if sources is None:
            sources = self.draw_sources()
        for s in sources:
            if net.alive[s] and not net.blocked[s]:
                self.send(s, stats)
        if cfg.e_idle > 0:
            net.drain_idle(cfg.e_idle)
        np.maximum(net.queue - cfg.service_rate, 0, out=net.queue)
        if self.router.uses_trust and self.round % cfg.trust_interval == 0:
            self.update_trust()
        stats.alive_count = int(net.alive.sum())
        stats.dead_pct = 100.0 * (net.n - stats.alive_count) / net.n
        stats.total_energy_consumed = net.consumed
        stats.blocked_count = int(net.blocked.sum())
        self.stats.append(stats)
        self.round += 1
        return stats

    def update_trust(self) -> set[int]:
        net = self.net
        newly = update_trust(net.ledger, net.neighbor_ids, net.alive, net.energy,
                             self.cfg.e_initial, self.round)
        for j in newly:
            net.blocked[j] = True
        if newly:
            log.debug("round %d: blocked %s", self.round, sorted(newly))
        if self.record_trust:
            self.trust_rows.extend(net.ledger.snapshot(self.round))
        return newly

    def run(self, stop_at_dead_pct: float | None = None) -> RunResult:
        cfg, net = self.cfg, self.net
        while self.round < cfg.rounds and net.alive.any():
            s = self.step_round()
            if stop_at_dead_pct is not None and s.dead_pct >= stop_at_dead_pct:
                break
        return self.result()

    def result(self) -> RunResult:
        return RunResult(self.cfg, self.router.name, self.stats, self.traces,
                         self.net.ledger.snapshot(), self.trust_rows, self.attackers, self.net)


def _tally(stats: RoundStats, outcome: Outcome) -> None:
    if outcome is Outcome.DELIVERED:
        stats.delivered += 1
    elif outcome is Outcome.DROPPED_VOID:
        stats.dropped_void += 1
    elif outcome is Outcome.DROPPED_MALICIOUS:
        stats.dropped_malicious += 1
    elif outcome is Outcome.DROPPED_DEAD:
        stats.dropped_dead += 1
    else:
        stats.dropped_overflow += 1


def run(cfg: SimConfig, stop_at_dead_pct: float | None = None, record_trust: bool = True) -> RunResult:
    return Simulation(cfg, "tceer", record_trust).run(stop_at_dead_pct)


def run_baseline(cfg: SimConfig, stop_at_dead_pct: float | None = None) -> RunResult:
    return Simulation(cfg, "greedy", record_trust=False).run(stop_at_dead_pct)


def lifetime(stats: list[RoundStats], levels=LIFETIME_LEVELS) -> dict:
    """First round at which ``dead_pct >= X`` for each level, else None."""
    if not stats:
        raise ValueError("no round statistics")
    out = {}
    for x in levels:
        out[x] = next((s.round for s in stats if s.dead_pct >= x), None)
    return out


def trace_source(cfg: SimConfig, source: int, packets: int, freeze: bool = False,
                 warmup: int = 0) -> list[RouteTrace]:
    """Route ``packets`` packets back to back from ``source`` in one round.

    Buffers fill as the burst passes, so later packets see congested relays.
    With ``freeze`` no state changes at all (energy, buffers, trust counters,
    attacker actions), so every packet takes the same route. ``warmup``
    ordinary rounds are simulated first.
    """
    sim = Simulation(cfg, "tceer", record_trust=False)
    net = sim.net
    for _ in range(warmup):
        if not net.alive.any():
            break
        sim.step_round()
    net.round = sim.round
    if not 0 <= source < net.n:
        raise ValueError(f"source {source} out of range")
    if not net.alive[source] or net.blocked[source]:
        raise ValueError(f"source {source} is dead or blocked")
    net.frozen = freeze
    return [sim.send(source) for _ in range(packets)]


def energy_balance(result: RunResult) -> float:
    """|initial - final - reported consumption| in joules."""
    cfg, net = result.config, result.network
    spent = math.fsum(cfg.e_initial - e for e in net.energy)
    reported = math.fsum(s.total_energy_consumed for s in result.stats)
    return abs(spent - reported)


def write_outputs(result: RunResult, out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "rounds.csv": result.rounds_csv(),
        "routes.txt": result.routes_text(),
        "trust.csv": result.trust_csv(),
    }
    paths = []
    for name, text in files.items():
        p = out / name
        p.write_text(text)
        paths.append(p)
    return paths
