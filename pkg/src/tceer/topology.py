"""Node deployment, Euclidean geometry and radio-range neighbour queries.

Positions are drawn with numpy's PCG64 generator (``np.random.default_rng``):
x then y for each node, in node-id order, as two draws of ``rng.uniform``.
A given seed therefore reproduces the same layout on any build using the
same numpy bit generator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np


class Position(NamedTuple):
    x: float
    y: float


def distance(a, b) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


@dataclass(frozen=True)
class Topology:
    """Static layout of a sensor field.

    Attributes:
        nodes: positions indexed by node id (ids are dense, 0..n-1).
        base_station: sink position.
        radio_range: maximum one-hop distance in metres.
        field_width, field_height: field extent in metres.
    """

    nodes: tuple[Position, ...]
    base_station: Position
    radio_range: float
    field_width: float
    field_height: float

    def __post_init__(self):
        if self.radio_range <= 0:
            raise ValueError("radio_range must be positive")

    @property
    def n(self) -> int:
        return len(self.nodes)

    def coords(self) -> np.ndarray:
        return np.asarray(self.nodes, dtype=float).reshape(-1, 2)

    def distance_matrix(self) -> np.ndarray:
        xy = self.coords()
        diff = xy[:, None, :] - xy[None, :, :]
        return np.sqrt((diff ** 2).sum(axis=-1))

    def bs_distances(self) -> np.ndarray:
        xy = self.coords()
        return np.hypot(xy[:, 0] - self.base_station.x, xy[:, 1] - self.base_station.y)

    def neighbor_lists(self) -> list[np.ndarray]:
        """Sorted one-hop neighbour ids of every node."""
        d = self.distance_matrix()
        within = d <= self.radio_range
        np.fill_diagonal(within, False)
        return [np.flatnonzero(row) for row in within]


def deploy(n: int, width: float, height: float, bs, seed: int | None = None,
           radio_range: float = 50.0, rng: np.random.Generator | None = None) -> Topology:
    """Scatter ``n`` nodes uniformly over a ``width`` x ``height`` field.

    Either ``seed`` or an existing generator ``rng`` may be given; the
    simulator passes its own generator so that a single stream drives the
    whole run.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if width <= 0 or height <= 0:
        raise ValueError("field dimensions must be positive")
    if rng is None:
        rng = np.random.default_rng(seed)
    xs = rng.uniform(0.0, width, size=n)
    ys = rng.uniform(0.0, height, size=n)
    nodes = tuple(Position(float(x), float(y)) for x, y in zip(xs, ys))
    return Topology(nodes, Position(float(bs[0]), float(bs[1])), float(radio_range),
                    float(width), float(height))


def one_hop_neighbors(topology: Topology, node_id: int) -> set[int]:
    me = topology.nodes[node_id]
    return {j for j, p in enumerate(topology.nodes)
            if j != node_id and distance(me, p) <= topology.radio_range}


def dump_topology(topology: Topology, path) -> None:
    """Write ``bs,x,y,range,width,height`` then one ``id,x,y`` line per node."""
    bs = topology.base_station
    lines = [f"bs,{bs.x!r},{bs.y!r},{topology.radio_range!r},"
             f"{topology.field_width!r},{topology.field_height!r}"]
    lines += [f"{i},{p.x!r},{p.y!r}" for i, p in enumerate(topology.nodes)]
    Path(path).write_text("\n".join(lines) + "\n")


def load_topology(path) -> Topology:
    rows = [ln.strip() for ln in Path(path).read_text().splitlines()
            if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows or not rows[0].startswith("bs,"):
        raise ValueError(f"{path}: first line must be 'bs,x,y,range,width,height'")
    _, bx, by, rr, w, h = rows[0].split(",")
    nodes = []
    for expected, row in enumerate(rows[1:]):
        i, x, y = row.split(",")
        if int(i) != expected:
            raise ValueError(f"{path}: node ids must be dense and ordered, got {i}")
        nodes.append(Position(float(x), float(y)))
    return Topology(tuple(nodes), Position(float(bx), float(by)), float(rr), float(w), float(h))
