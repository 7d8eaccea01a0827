"""Crisp inputs to the fuzzy stages: congestion, energy and distance metrics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .topology import distance


@dataclass(frozen=True)
class CongestionParams:
    c_th_min: float = 10.0
    c_th_max: float = 40.0
    epsilon: float = 0.05

    def __post_init__(self):
        if not 0 <= self.c_th_min < self.c_th_max:
            raise ValueError("need 0 <= c_th_min < c_th_max")
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")


@dataclass(frozen=True)
class MetricWeights:
    omega: float = 0.2
    k1: float = 2.0
    k2: float = 3.0

    def __post_init__(self):
        if not 0 <= self.omega <= 1:
            raise ValueError("omega must lie in [0, 1]")
        if self.k1 <= 0 or self.k2 <= 0:
            raise ValueError("k1 and k2 must be positive")


def congestion_index(q_s, params: CongestionParams):
    """Queue-length congestion index in [epsilon, 1]; works on scalars or arrays.

    The linear branch covers the closed interval [c_th_min, c_th_max].
    """
    eps = params.epsilon
    q = np.asarray(q_s, dtype=float)
    lin = (1 - eps) * (q - params.c_th_min) / (params.c_th_max - params.c_th_min) + eps
    out = np.where(q < params.c_th_min, eps, np.where(q > params.c_th_max, 1.0, lin))
    return float(out) if out.ndim == 0 else out


def cci(q_s, params: CongestionParams):
    """Complementary congestion index; high means an uncongested buffer."""
    return 1.0 - congestion_index(q_s, params)


def effective_residual_energy(e_cn, e_pnn, omega: float, e_initial: float):
    """Weighted current/next-node energy, normalised by the initial energy."""
    return (omega * e_cn + (1.0 - omega) * e_pnn) / e_initial


def distance_ratios(current, candidate, bs, radio_range: float) -> tuple[float, float]:
    to_bs = distance(current, bs)
    if to_bs == 0:
        raise ValueError("current node is at base station")
    return distance(current, candidate) / radio_range, distance(candidate, bs) / to_bs


def distance_metric(d1, d2, k1: float, k2: float):
    return (k1 * (1.0 - d1) + k2 * (1.0 - d2)) / (k1 + k2)
