"""Geometric-mean trust: direct, indirect and overall trust plus blocking."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

NEUTRAL_TRUST = 0.5
ENERGY_TM_FLOOR = 0.01


class Classification(enum.Enum):
    TRUSTED = "Trusted"
    MALICIOUS = "Malicious"


def _geometric_mean(values: Sequence[float]) -> float:
    return math.prod(values) ** (1.0 / len(values))


def direct_trust(tms: Sequence[float]) -> float:
    """Geometric mean of the trust-metric samples (one zero metric zeroes it)."""
    tms = list(tms)
    if not tms:
        raise ValueError("no trust metrics")
    for tm in tms:
        if not 0.0 <= tm <= 1.0:
            raise ValueError(f"trust metric {tm} outside [0, 1]")
    return _geometric_mean(tms)


def indirect_trust(recommendations: Sequence[float]) -> float:
    recommendations = list(recommendations)
    if not recommendations:
        return NEUTRAL_TRUST
    return _geometric_mean(recommendations)


def check_weights(w_d: float, w_i: float, tol: float = 1e-9) -> None:
    if w_d < 0 or w_i < 0 or abs(w_d + w_i - 1.0) > tol:
        raise ValueError(f"w_d/w_i must be non-negative and sum to 1 (got {w_d} + {w_i})")


def overall_trust(dt: float, it: float, w_d: float, w_i: float) -> float:
    check_weights(w_d, w_i)
    return min(1.0, max(0.0, w_d * dt + w_i * it))


def classify(t: float, t_th: float) -> Classification:
    return Classification.TRUSTED if t >= t_th else Classification.MALICIOUS


class TrustMetricSample(NamedTuple):
    forwarded_ratio: float
    address_integrity_ratio: float
    normalized_remaining_energy: float

    @classmethod
    def from_counters(cls, accepted: int, forwarded: int, modified: int,
                      energy: float, e_initial: float) -> "TrustMetricSample":
        fwd = forwarded / accepted if accepted else 1.0
        integrity = 1.0 - modified / forwarded if forwarded else 1.0
        e = min(1.0, max(ENERGY_TM_FLOOR, energy / e_initial))
        return cls(fwd, integrity, e)


@dataclass
class TrustRecord:
    dt: float = 1.0
    it: float = 1.0
    t: float = 1.0
    last_update_round: int = -1


@dataclass
class _Counters:
    accepted: int = 0
    forwarded: int = 0
    modified: int = 0


@dataclass
class TrustLedger:
    """Per directed (observer, subject) trust state and the global block list.

    Blocking is global and permanent: once any observer's overall trust in a
    subject drops below ``t_th`` the subject never routes again.
    """

    w_d: float = 0.7
    w_i: float = 0.3
    t_th: float = 0.5
    records: dict = field(default_factory=dict)
    blocked: set = field(default_factory=set)
    blocked_round: dict = field(default_factory=dict)
    _counters: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        check_weights(self.w_d, self.w_i)

    def trust(self, observer: int, subject: int) -> float:
        rec = self.records.get((observer, subject))
        return 1.0 if rec is None else rec.t

    def record(self, observer: int, subject: int) -> TrustRecord:
        return self.records.get((observer, subject), TrustRecord())

    def observe(self, observer: int, subject: int, forwarded: bool, modified: bool = False) -> None:
        """Watchdog report from ``observer`` about a packet it handed to ``subject``."""
        c = self._counters.get((observer, subject))
        if c is None:
            c = self._counters[(observer, subject)] = _Counters()
        c.accepted += 1
        if forwarded:
            c.forwarded += 1
            if modified:
                c.modified += 1

    def pending(self, observer: int, subject: int) -> tuple[int, int, int]:
        c = self._counters.get((observer, subject), _Counters())
        return c.accepted, c.forwarded, c.modified

    def block(self, node: int, round_no: int) -> None:
        if node not in self.blocked:
            self.blocked.add(node)
            self.blocked_round[node] = round_no

    def snapshot(self, round_no: int | None = None) -> list[tuple]:
        """Rows ``(round, observer, subject, DT, IT, T, classification)``."""
        rows = []
        for (i, j), rec in sorted(self.records.items()):
            if round_no is not None and rec.last_update_round != round_no:
                continue
            rows.append((rec.last_update_round, i, j, rec.dt, rec.it, rec.t,
                         classify(rec.t, self.t_th).value))
        return rows


def update_trust(ledger: TrustLedger, neighbors: Sequence[Sequence[int]], alive: Sequence[bool],
                 energy: Sequence[float], e_initial: float, round_no: int) -> set[int]:
    """Recompute DT, IT and T for every alive observer over its live neighbours.

    Behaviour counters accumulated since the previous update are consumed.
    Recommenders for IT are the observer's other alive, unblocked neighbours
    that also neighbour the subject. Returns the set of newly blocked nodes.
    """
    blocked = ledger.blocked
    counters = ledger._counters
    live = [bool(a) and i not in blocked for i, a in enumerate(alive)]
    # DT of a pair with no traffic this window depends on the subject alone
    idle_dt = {}
    dts = {}
    for i, nb in enumerate(neighbors):
        if not alive[i]:
            continue
        for j in nb:
            if not live[j]:
                continue
            c = counters.get((i, j))
            if c is None:
                dt = idle_dt.get(j)
                if dt is None:
                    dt = idle_dt[j] = direct_trust(
                        TrustMetricSample.from_counters(0, 0, 0, energy[j], e_initial))
            else:
                dt = direct_trust(TrustMetricSample.from_counters(
                    c.accepted, c.forwarded, c.modified, energy[j], e_initial))
            dts[(i, j)] = dt
    counters.clear()

    newly = set()
    w_d, w_i = ledger.w_d, ledger.w_i
    for (i, j), dt in dts.items():
        recs = [dts[(k, j)] for k in neighbors[i]
                if k != j and live[k] and (k, j) in dts]
        it = indirect_trust(recs)
        t = overall_trust(dt, it, w_d, w_i)
        ledger.records[(i, j)] = TrustRecord(dt, it, t, round_no)
        if classify(t, ledger.t_th) is Classification.MALICIOUS:
            newly.add(j)
    for j in sorted(newly):
        ledger.block(j, round_no)
    return newly
