"""Node-potential scoring and hop-by-hop forwarding toward the base station."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import metrics
from .flc import FuzzyController, default_edm_controller, default_tcm_controller

# Sentinels returned by select_next_hop; node ids are always >= 0.
BS = -1
VOID = -2


class Outcome(enum.Enum):
    DELIVERED = "Delivered"
    DROPPED_VOID = "DroppedVoid"
    DROPPED_MALICIOUS = "DroppedMalicious"
    DROPPED_DEAD = "DroppedDeadNode"
    DROPPED_OVERFLOW = "DroppedOverflow"


@dataclass(frozen=True)
class NodePotentialWeights:
    alpha: float = 0.3
    beta: float = 0.7

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0 or abs(self.alpha + self.beta - 1) > 1e-9:
            raise ValueError("alpha/beta must be non-negative and sum to 1")


def node_potential(edm_value, tcm_value, alpha: float = 0.3, beta: float = 0.7):
    return (alpha * edm_value + beta * tcm_value) / (alpha + beta)


@dataclass
class RouteTrace:
    packet_id: int
    source: int
    round: int
    hops: list = field(default_factory=list)
    outcome: Outcome = Outcome.DROPPED_VOID

    def hop_labels(self) -> list[str]:
        return ["BS" if h == BS else str(h) for h in self.hops]

    def to_line(self) -> str:
        return f"{self.packet_id},{self.outcome.value},{'>'.join(self.hop_labels())}"


class GreedyRouter:
    """Baseline: the alive in-range neighbour nearest the base station.

    Ignores trust, congestion and energy. Only neighbours strictly closer to
    the base station than the current node are eligible, so it cannot loop.
    """

    name = "greedy"
    uses_trust = False

    def eligible_candidates(self, net, current: int) -> np.ndarray:
        c = net.closer[current]
        return c[net.alive[c]]

    def select_next_hop(self, net, current: int) -> int:
        if net.bs_in_range[current]:
            return BS
        c = self.eligible_candidates(net, current)
        if c.size == 0:
            return VOID
        return int(c[np.argmin(net.dist_bs[c])])


class TceerRouter:
    """Highest node-potential forwarding among trusted progress-making neighbours."""

    name = "tceer"
    uses_trust = True

    def __init__(self, cfg=None, tcm_controller: FuzzyController | None = None,
                 edm_controller: FuzzyController | None = None):
        from .config import SimConfig
        cfg = cfg or SimConfig()
        self.congestion = metrics.CongestionParams(cfg.c_th_min, cfg.c_th_max, cfg.epsilon)
        self.weights = metrics.MetricWeights(cfg.omega, cfg.k1, cfg.k2)
        self.np_weights = NodePotentialWeights(cfg.alpha, cfg.beta)
        self.e_initial = cfg.e_initial
        self.radio_range = cfg.radio_range
        self.tcm = tcm_controller or default_tcm_controller()
        self.edm = edm_controller or default_edm_controller()

    def eligible_candidates(self, net, current: int) -> np.ndarray:
        c = net.closer[current]
        return c[net.alive[c] & ~net.blocked[c]]

    def potentials(self, net, current: int, cands: np.ndarray) -> np.ndarray:
        """Node potential of each candidate as seen from ``current``."""
        trust = np.array([net.ledger.trust(current, int(j)) for j in cands])
        cci = metrics.cci(net.queue[cands], self.congestion)
        energy = metrics.effective_residual_energy(
            net.energy[current], net.energy[cands], self.weights.omega, self.e_initial)
        d1 = net.dist[current, cands] / self.radio_range
        d2 = net.dist_bs[cands] / net.dist_bs[current]
        dm = metrics.distance_metric(d1, d2, self.weights.k1, self.weights.k2)
        return node_potential(self.edm.infer_batch(energy, dm), self.tcm.infer_batch(trust, cci),
                              self.np_weights.alpha, self.np_weights.beta)

    def select_next_hop(self, net, current: int) -> int:
        if net.bs_in_range[current]:
            return BS
        cands = self.eligible_candidates(net, current)
        if cands.size == 0:
            return VOID
        if cands.size == 1:
            return int(cands[0])
        # argmax takes the first maximum; cands are sorted, so ties go to the lowest id
        return int(cands[np.argmax(self.potentials(net, current, cands))])


def route_packet(net, source: int, router, packet_id: int = 0, round_no: int = 0) -> RouteTrace:
    """Forward one packet from ``source`` until delivery or a drop.

    ``net`` supplies the mutable state hooks (energy, buffers, attacker
    behaviour and watchdog reports). The upstream sender reports on its
    relay only once the relay either transmits or silently drops; relays
    that die or hit a void are not reported.
    """
    trace = RouteTrace(packet_id, source, round_no, [source])
    cur, upstream, corrupted = source, None, False
    while True:
        nxt = router.select_next_hop(net, cur)
        if nxt == VOID:
            trace.outcome = Outcome.DROPPED_VOID
            break
        d = net.dist_bs[cur] if nxt == BS else net.dist[cur, nxt]
        if not net.spend(cur, net.tx_cost(d)):
            trace.outcome = Outcome.DROPPED_DEAD
            break
        if upstream is not None:
            net.observe(upstream, cur, forwarded=True, modified=corrupted)
        trace.hops.append(nxt)
        if nxt == BS:
            trace.outcome = Outcome.DROPPED_MALICIOUS if corrupted else Outcome.DELIVERED
            break
        if not net.spend(nxt, net.rx_cost):
            trace.outcome = Outcome.DROPPED_DEAD
            break
        if corrupted:
            # receiver spots the rewritten address and discards the packet
            trace.outcome = Outcome.DROPPED_MALICIOUS
            break
        if not net.enqueue(nxt):
            trace.outcome = Outcome.DROPPED_OVERFLOW
            break
        action = net.behave(nxt)
        if action == "drop":
            net.observe(cur, nxt, forwarded=False)
            trace.outcome = Outcome.DROPPED_MALICIOUS
            break
        corrupted = action == "modify"
        upstream, cur = cur, nxt
    return trace
