import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tceer.config import SimConfig
from tceer.engine import Simulation
from tceer.flc import edm, tcm
from tceer.metrics import CongestionParams, cci, distance_metric, distance_ratios
from tceer.routing import (BS, VOID, GreedyRouter, Outcome, RouteTrace, TceerRouter,
                           node_potential, route_packet)

CHAIN = [(100, 5), (100, 35), (100, 60)]


def sim_for(layout, points, router="tceer", **kw):
    cfg = SimConfig(n=len(points), topology_file=layout(points), malicious_count=0, **kw)
    return Simulation(cfg, router)


@pytest.mark.parametrize("edm_v, tcm_v, expected", [(0.4, 0.4, 0.4), (1.0, 0.0, 0.3), (0.6, 0.8, 0.74)])
def test_node_potential_examples(edm_v, tcm_v, expected):
    assert node_potential(edm_v, tcm_v, 0.3, 0.7) == pytest.approx(expected, abs=1e-12)


@given(st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)), min_size=2, max_size=10),
       st.floats(0.01, 1), st.floats(0.01, 100))
def test_potential_argmax_survives_weight_scaling(pairs, alpha, scale):
    e, t = np.array(pairs).T
    a, b = alpha, 1 - alpha
    if b <= 0:
        return
    base = node_potential(e, t, a, b)
    scaled = node_potential(e, t, a * scale, b * scale)
    assert np.argmax(scaled) == np.argmax(base) or np.isclose(scaled.max(), base.max())


def test_route_trace_line():
    t = RouteTrace(3, 24, 0, [24, 39, 4, BS], Outcome.DELIVERED)
    assert t.to_line() == "3,Delivered,24>39>4>BS"


def test_bs_in_range_delivers_directly(layout):
    sim = sim_for(layout, [(100, 70), (100, 80)])
    assert sim.router.select_next_hop(sim.net, 0) == BS
    trace = sim.send(0)
    assert trace.hops == [0, BS] and trace.outcome is Outcome.DELIVERED


def test_highest_potential_candidate_wins(layout):
    points = [(100, 10), (100, 40), (130, 35)]
    sim = sim_for(layout, points)
    net, router = sim.net, sim.router
    cands = router.eligible_candidates(net, 0)
    assert cands.tolist() == [1, 2]
    manual = []
    for j in (1, 2):
        d1, d2 = distance_ratios(points[0], points[j], (100, 100), 50)
        e = edm(1.0, distance_metric(d1, d2, 2, 3))
        t = tcm(1.0, cci(0, CongestionParams()))
        manual.append(node_potential(e, t, 0.3, 0.7))
    got = router.potentials(net, 0, cands)
    assert got == pytest.approx(manual, abs=1e-12)
    assert router.select_next_hop(net, 0) == [1, 2][int(np.argmax(manual))]


def test_congestion_shifts_the_choice(layout):
    sim = sim_for(layout, [(100, 10), (100, 40), (130, 35)])
    first = sim.router.select_next_hop(sim.net, 0)
    sim.net.queue[first] = 45
    assert sim.router.select_next_hop(sim.net, 0) == 3 - first


def test_identical_potentials_pick_lowest_id(layout):
    sim = sim_for(layout, [(100, 10), (110, 40), (90, 40)])
    net = sim.net
    p = sim.router.potentials(net, 0, np.array([1, 2]))
    assert p[0] == p[1]
    assert sim.router.select_next_hop(net, 0) == 1


def test_all_neighbours_blocked_is_void(layout):
    sim = sim_for(layout, [(100, 10), (110, 40), (90, 40)])
    sim.net.blocked[[1, 2]] = True
    assert sim.router.eligible_candidates(sim.net, 0).size == 0
    assert sim.router.select_next_hop(sim.net, 0) == VOID
    assert sim.send(0).outcome is Outcome.DROPPED_VOID


def test_single_candidate_is_forced(layout):
    sim = sim_for(layout, CHAIN)
    assert sim.router.eligible_candidates(sim.net, 0).tolist() == [1]
    assert sim.router.select_next_hop(sim.net, 0) == 1


def test_chain_gives_its_only_path(layout):
    sim = sim_for(layout, CHAIN)
    trace = sim.send(0)
    assert trace.hops == [0, 1, 2, BS] and trace.outcome is Outcome.DELIVERED
    assert sim.net.queue.tolist() == [0, 1, 1]


def test_greedy_takes_geometrically_closest(layout):
    sim = sim_for(layout, [(100, 10), (90, 40), (110, 45)], router="greedy")
    assert sim.router.select_next_hop(sim.net, 0) == 2


def test_greedy_ignores_blocking_but_not_death(layout):
    sim = sim_for(layout, [(100, 10), (90, 40), (110, 45)], router="greedy")
    sim.net.blocked[2] = True
    assert sim.router.select_next_hop(sim.net, 0) == 2
    sim.net.alive[2] = False
    assert sim.router.select_next_hop(sim.net, 0) == 1


def test_node_24_candidates_match_brute_force():
    sim = Simulation(SimConfig())
    net = sim.net
    xy = net.topology.coords()
    bs = np.array([100.0, 100.0])
    me = xy[24]
    brute = [j for j in range(50) if j != 24
             and np.hypot(*(xy[j] - me)) <= 50
             and np.hypot(*(xy[j] - bs)) < np.hypot(*(me - bs))]
    assert sim.router.eligible_candidates(net, 24).tolist() == brute


def test_selection_is_deterministic():
    sim = Simulation(SimConfig())
    picks = {sim.router.select_next_hop(sim.net, 24) for _ in range(5)}
    again = Simulation(SimConfig()).router.select_next_hop(Simulation(SimConfig()).net, 24)
    assert picks == {again}


def test_dropping_relay_reported_by_upstream(layout):
    sim = sim_for(layout, CHAIN, malicious_ids=(1,), p_drop=1.0)
    trace = sim.send(0)
    assert trace.outcome is Outcome.DROPPED_MALICIOUS and trace.hops == [0, 1]
    assert sim.net.ledger.pending(0, 1) == (1, 0, 0)


def test_modified_packet_caught_downstream(layout):
    sim = sim_for(layout, CHAIN, malicious_ids=(1,), malicious_behavior="modifier", p_modify=1.0)
    trace = sim.send(0)
    assert trace.outcome is Outcome.DROPPED_MALICIOUS and trace.hops == [0, 1, 2]
    assert sim.net.ledger.pending(0, 1) == (1, 1, 1)


def test_full_buffer_overflows(layout):
    sim = sim_for(layout, CHAIN)
    sim.net.queue[1] = sim.cfg.buffer_capacity
    assert sim.send(0).outcome is Outcome.DROPPED_OVERFLOW


def test_relay_without_receive_energy_dies(layout):
    sim = sim_for(layout, CHAIN)
    sim.net.energy[1] = 1e-6
    trace = sim.send(0)
    assert trace.outcome is Outcome.DROPPED_DEAD
    assert not sim.net.alive[1] and sim.net.energy[1] == 0.0
    assert sim.send(0).outcome is Outcome.DROPPED_VOID


def test_route_packet_with_greedy_router(layout):
    sim = sim_for(layout, CHAIN, router="greedy")
    trace = route_packet(sim.net, 0, GreedyRouter(), 7, 3)
    assert trace.to_line() == "7,Delivered,0>1>2>BS"


def test_router_reads_config_weights():
    r = TceerRouter(SimConfig(alpha=0.5, beta=0.5, omega=0.6))
    assert r.np_weights.alpha == 0.5 and r.weights.omega == 0.6
