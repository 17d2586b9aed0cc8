"""Core semantics: travel tables, workload windows, rest rules, costs, validator."""

import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from truckcrew.model import (
    ContractError,
    Driver,
    InputError,
    Instance,
    Schedule,
    Task,
    Truck,
    check_rest,
    cost_stage1,
    cost_stage2,
    shuttle_cost,
    shuttle_legs,
    travel_dist,
    travel_time,
    validate,
    w_inf,
    work_intervals,
    workload,
)

from conftest import make_plan


# ---------------------------------------------------------------------------
# travel tables


def floyd_warshall(locations, edges):
    """Independent all-pairs oracle for the routing tables."""
    n = len(locations)
    idx = {l: i for i, l in enumerate(locations)}
    dist = [[math.inf] * n for _ in range(n)]
    for i in range(n):
        dist[i][i] = 0.0
    for a, b, km in edges:
        i, j = idx[a], idx[b]
        dist[i][j] = min(dist[i][j], km)
        dist[j][i] = min(dist[j][i], km)
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if dist[i][k] + dist[k][j] < dist[i][j]:
                    dist[i][j] = dist[i][k] + dist[k][j]
    return idx, dist


def random_network(rng, n):
    locs = tuple(f"c{i}" for i in range(n))
    edges = [(f"c{i}", f"c{i+1}", float(rng.randint(50, 800))) for i in range(n - 1)]
    for _ in range(n):
        a, b = rng.sample(range(n), 2)
        edges.append((f"c{a}", f"c{b}", float(rng.randint(50, 800))))
    return locs, tuple(edges)


def bare_instance(locs, edges, horizon=1):
    return Instance(
        horizon_days=horizon,
        locations=locs,
        edges=edges,
        requests=(),
        trucks=(),
        drivers=(Driver("d0", locs[0]),),
    )


def test_travel_time_zero_on_same_location():
    inst = bare_instance(*random_network(random.Random(0), 6))
    assert travel_time(inst, "c0", "c0") == 0.0


def test_travel_time_chain():
    inst = Instance(
        horizon_days=1,
        locations=("A", "B", "C"),
        edges=(("A", "B", 100.0), ("B", "C", 200.0)),
        requests=(),
        trucks=(),
        drivers=(Driver("d0", "A"),),
    )
    assert travel_time(inst, "A", "C") == pytest.approx(300.0 / 90.0)


def test_travel_matches_floyd_warshall_oracle():
    rng = random.Random(7)
    locs, edges = random_network(rng, 15)
    inst = bare_instance(locs, edges)
    idx, dist = floyd_warshall(locs, edges)
    for a in locs:
        for b in locs:
            assert travel_dist(inst, a, b) == pytest.approx(dist[idx[a]][idx[b]])
            assert travel_time(inst, a, b, "shuttle") == pytest.approx(
                dist[idx[a]][idx[b]] / 90.0
            )


def test_travel_time_symmetry_and_triangle():
    rng = random.Random(99)
    locs, edges = random_network(rng, 12)
    inst = bare_instance(locs, edges)
    for _ in range(200):
        a, b, c = (rng.choice(locs) for _ in range(3))
        assert travel_time(inst, a, b) == pytest.approx(travel_time(inst, b, a))
        assert travel_time(inst, a, c) <= travel_time(inst, a, b) + travel_time(inst, b, c) + 1e-9


def test_travel_unknown_location_raises():
    inst = bare_instance(*random_network(random.Random(1), 4))
    with pytest.raises(InputError):
        travel_time(inst, "c0", "nowhere")


def test_disconnected_pair_raises():
    inst = Instance(
        horizon_days=1,
        locations=("A", "B", "X"),
        edges=(("A", "B", 50.0),),
        requests=(),
        trucks=(),
        drivers=(Driver("d0", "A"),),
    )
    with pytest.raises(InputError):
        travel_dist(inst, "A", "X")


def test_disconnected_referenced_locations_rejected():
    with pytest.raises(InputError):
        Instance(
            horizon_days=1,
            locations=("A", "B"),
            edges=(),
            requests=(),
            trucks=(Truck("v0", "A"),),
            drivers=(Driver("d0", "B"),),
        )


def test_shuttle_cost_rule():
    inst = bare_instance(("A", "B"), (("A", "B", 270.0),))
    assert shuttle_cost(inst, "A", "A") == 0.0
    assert shuttle_cost(inst, "A", "B") == pytest.approx(4.0)


# ---------------------------------------------------------------------------
# workload windows


def gamma_reference(intervals, horizon_days):
    """Window-scan oracle: direct overlap sums per integer offset."""
    out = []
    for i in range(24 * horizon_days - 23):
        out.append(
            sum(max(0.0, min(e, i + 24.0) - max(s, float(i))) for s, e in intervals)
        )
    return out


def test_workload_empty_route(two_city):
    inst, plan = two_city
    sched = Schedule(plan=plan, delta=dict(plan.tentative_delta), routes={})
    assert workload(sched, "dA").max() == 0.0


def test_workload_split_shift_scenario(split_shift):
    inst, plan, sched = split_shift
    legs = shuttle_legs(sched, "d1")
    assert [(leg.start, leg.end) for leg in legs] == [(34.0, 40.0)]
    gamma = workload(sched, "d1")
    assert gamma[24] == pytest.approx(14.0)
    assert gamma[23] == pytest.approx(13.0)
    ref = gamma_reference(work_intervals(sched, "d1"), 2)
    assert np.allclose(gamma, ref)


def test_workload_single_block():
    inst = Instance(
        horizon_days=1,
        locations=("A", "B"),
        edges=(("A", "B", 14 * 90.0),),
        requests=(),
        trucks=(Truck("v", "A"),),
        drivers=(Driver("d", "A"),),
    )
    task = Task("t", "trip", "A", "B", 14.0, "v")
    plan = make_plan(inst, [task], {"v": ["t"]}, {"t": 0.0}, {})
    sched = Schedule(plan=plan, delta={"t": 0.0}, routes={"d": ("t",)})
    assert workload(sched, "d")[0] == pytest.approx(14.0)


def test_workload_rejects_broken_route(two_city):
    inst, plan = two_city
    # dB cannot reach t1 (3 h shuttle, start 1)
    sched = Schedule(plan=plan, delta=dict(plan.tentative_delta), routes={"dB": ("t1",)})
    with pytest.raises(ContractError):
        workload(sched, "dB")


def test_workload_additive_under_interval_split():
    # splitting a work interval at any point must not change any window
    rng = random.Random(5)
    inst = Instance(
        horizon_days=2,
        locations=("A", "B", "C"),
        edges=(("A", "B", 360.0), ("B", "C", 360.0)),
        requests=(),
        trucks=(Truck("v", "A"),),
        drivers=(Driver("d", "A"),),
    )
    whole = Task("w", "trip", "A", "C", 8.0, "v")
    plan1 = make_plan(inst, [whole], {"v": ["w"]}, {"w": 3.0}, {})
    s1 = Schedule(plan=plan1, delta={"w": 3.0}, routes={"d": ("w",)})
    part1 = Task("p1", "trip", "A", "B", 4.0, "v")
    part2 = Task("p2", "trip", "B", "C", 4.0, "v")
    plan2 = make_plan(inst, [part1, part2], {"v": ["p1", "p2"]}, {"p1": 3.0, "p2": 7.0}, {})
    s2 = Schedule(plan=plan2, delta={"p1": 3.0, "p2": 7.0}, routes={"d": ("p1", "p2")})
    assert np.allclose(workload(s1, "d"), workload(s2, "d"))


# ---------------------------------------------------------------------------
# rest rules


def _trip_schedule(blocks, horizon_days, gap_km=0.0):
    """One driver working the given (start, hours) blocks, all in place."""
    locs = tuple(f"p{i}" for i in range(len(blocks) + 1))
    edges = tuple((f"p{i}", f"p{i+1}", 90.0 * blocks[i][1]) for i in range(len(blocks)))
    inst = Instance(
        horizon_days=horizon_days,
        locations=locs,
        edges=edges,
        requests=(),
        trucks=tuple(Truck(f"v{i}", f"p{i}") for i in range(len(blocks))),
        drivers=(Driver("d", "p0"),),
    )
    tasks = [
        Task(f"t{i}", "trip", f"p{i}", f"p{i+1}", float(hours), f"v{i}")
        for i, (start, hours) in enumerate(blocks)
    ]
    delta = {f"t{i}": float(start) for i, (start, hours) in enumerate(blocks)}
    plan = make_plan(inst, tasks, {f"v{i}": [f"t{i}"] for i in range(len(blocks))}, delta, {})
    return Schedule(plan=plan, delta=delta, routes={"d": tuple(t.id for t in tasks)})


def test_rest_limits_exactly_met():
    # 12 h on each of six days, day seven off: right at both limits
    blocks = [(24 * d, 12) for d in range(6)]
    sched = _trip_schedule(blocks, 7)
    assert check_rest(sched, "d", "l1") == []


def test_rest_daily_violation_in_split_shift(split_shift):
    _, _, sched = split_shift
    kinds = [v.kind for v in check_rest(sched, "d1", "l1")]
    assert kinds == ["restL1Daily"]
    detail = check_rest(sched, "d1", "l1")[0].detail
    assert "24" in detail and "14" in detail


def test_rest_week_off_violation():
    blocks = [(24 * d, 6) for d in range(7)]
    sched = _trip_schedule(blocks, 7)
    kinds = [v.kind for v in check_rest(sched, "d", "l1")]
    assert kinds == ["restL1WeekOff"]


def test_rest_minimum_break_boundary():
    # gap of exactly 11 h is legal, 10.5 h is not
    ok = _trip_schedule([(0, 8), (19, 4)], 2)
    assert [v.kind for v in check_rest(ok, "d", "l1l3")] == []
    bad = _trip_schedule([(0, 8), (18.5, 4)], 2)
    assert [v.kind for v in check_rest(bad, "d", "l1l3")] == ["restL3"]


def test_rest_weekly_cap():
    # 11 h on six days = 66 h in the first aligned week
    blocks = [(24 * d, 11) for d in range(6)]
    sched = _trip_schedule(blocks, 7)
    assert [v.kind for v in check_rest(sched, "d", "l1")] == []
    assert "restL2" in [v.kind for v in check_rest(sched, "d", "l1l2")]


# ---------------------------------------------------------------------------
# the overwork total


def test_w_inf_zero_for_feasible(two_city):
    inst, plan = two_city
    sched = Schedule(
        plan=plan,
        delta=dict(plan.tentative_delta),
        routes={"dA": ("t1", "t2", "t4"), "dB": ("t3",)},
    )
    assert w_inf(sched) == 0.0
    assert validate(sched) == []


def test_w_inf_split_shift_value(split_shift):
    _, _, sched = split_shift
    assert w_inf(sched) == pytest.approx(3.0)


def test_w_inf_constant_overwork_closed_form():
    # a 13 h block at the start of each day keeps every rolling window at
    # exactly 13 h, so the total is one extra hour per window
    blocks = [(24 * d, 13) for d in range(7)]
    sched = _trip_schedule(blocks, 7)
    gamma = workload(sched, "d")
    assert np.allclose(gamma, 13.0)
    assert w_inf(sched) == pytest.approx((24 * 7 - 23) * 1.0)


# ---------------------------------------------------------------------------
# costs


def test_cost_stage1_no_delay_and_blend(two_city):
    inst, plan = two_city
    z1, z2, z12 = cost_stage1(plan, 0.0)
    assert z1 == 0.0  # delivered on its initial day
    assert z12 == z2
    z1b, z2b, z12b = cost_stage1(plan, 1.0)
    assert z12b == z1b
    with pytest.raises(InputError):
        cost_stage1(plan, 1.5)


def test_cost_stage1_distance_sum(two_city):
    inst, plan = two_city
    _, z2, _ = cost_stage1(plan, 0.25)
    assert z2 == pytest.approx(270.0)  # single trip leg l1->l2


def test_cost_stage2_zero_path(two_city):
    inst, plan = two_city
    sched = Schedule(
        plan=plan,
        delta=dict(plan.tentative_delta),
        routes={"dA": ("t1", "t2", "t4"), "dB": ("t3",)},
    )
    assert cost_stage2(sched) == 0.0


def test_cost_stage2_initial_leg(two_city):
    inst, plan = two_city
    # dB starts at l2 and opens with t2 (origin l1): one 3 h shuttle + 1
    sched = Schedule(
        plan=plan,
        delta=dict(plan.tentative_delta),
        routes={"dA": ("t1",), "dB": ("t2", "t4")},
    )
    assert cost_stage2(sched) == pytest.approx(4.0)


def test_cost_stage2_empty():
    inst = Instance(
        horizon_days=1,
        locations=("A",),
        edges=(),
        requests=(),
        trucks=(),
        drivers=(Driver("d", "A"),),
    )
    plan = make_plan(inst, [], {}, {}, {})
    sched = Schedule(plan=plan, delta={}, routes={"d": ()})
    assert cost_stage2(sched) == 0.0


def test_cost_stage2_ignores_start_times(two_city):
    inst, plan = two_city
    routes = {"dA": ("t1", "t2", "t4"), "dB": ("t3",)}
    a = Schedule(plan=plan, delta=dict(plan.tentative_delta), routes=routes)
    retimed = dict(plan.tentative_delta)
    retimed["t4"] = 10.0  # still a valid path and start-time assignment
    b = Schedule(plan=plan, delta=retimed, routes=routes)
    assert validate(b) == []
    assert cost_stage2(a) == cost_stage2(b)


# ---------------------------------------------------------------------------
# validator


def test_validate_crew_over(two_city):
    inst, plan = two_city
    big = Instance(
        horizon_days=1,
        locations=inst.locations,
        edges=inst.edges,
        requests=inst.requests,
        trucks=inst.trucks,
        drivers=inst.drivers + (Driver("dC", "l2"),),
    )
    plan2 = make_plan(big, plan.tasks, plan.truck_routes, plan.tentative_delta, plan.delivery_day)
    sched = Schedule(
        plan=plan2,
        delta=dict(plan2.tentative_delta),
        routes={"dA": ("t1", "t2", "t4"), "dB": ("t3", "t4"), "dC": ("t3", "t4")},
    )
    kinds = {v.kind for v in validate(sched)}
    assert "crewOver" in kinds


def test_validate_crew_under(two_city):
    inst, plan = two_city
    sched = Schedule(
        plan=plan,
        delta=dict(plan.tentative_delta),
        routes={"dA": ("t1", "t2", "t4")},
    )
    assert {v.kind for v in validate(sched)} == {"crewUnder"}


def test_validate_window_shift(two_city):
    inst, plan = two_city
    delta = dict(plan.tentative_delta)
    delta["t3"] = 26.0  # outside the frozen day-0 delivery window (H=1)
    sched = Schedule(
        plan=plan,
        delta=delta,
        routes={"dA": ("t1", "t2", "t4"), "dB": ("t3",)},
    )
    kinds = {v.kind for v in validate(sched)}
    assert "windowDelivery" in kinds


def test_validate_precedence(two_city):
    inst, plan = two_city
    delta = dict(plan.tentative_delta)
    delta["t2"] = 1.5  # overlaps t1 on the same truck
    sched = Schedule(
        plan=plan,
        delta=delta,
        routes={"dA": ("t1", "t2", "t4"), "dB": ("t3",)},
    )
    kinds = {v.kind for v in validate(sched)}
    assert "precedence" in kinds


def test_validate_is_pure(two_city):
    inst, plan = two_city
    sched = Schedule(
        plan=plan,
        delta=dict(plan.tentative_delta),
        routes={"dA": ("t1", "t2", "t4"), "dB": ("t3",)},
    )
    assert validate(sched) == validate(sched)


# ---------------------------------------------------------------------------
# property: splitting work intervals never changes the windows


@settings(max_examples=60, deadline=None)
@given(
    start=st.floats(min_value=0.0, max_value=20.0),
    hours=st.floats(min_value=0.5, max_value=10.0),
    cut=st.floats(min_value=0.1, max_value=0.9),
)
def test_window_sums_additive(start, hours, cut):
    whole = [(start, start + hours)]
    split = [(start, start + hours * cut), (start + hours * cut, start + hours)]
    assert np.allclose(gamma_reference(whole, 2), gamma_reference(split, 2))
