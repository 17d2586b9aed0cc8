"""Shared fixtures: hand-built scenarios and tiny-instance factories."""

from __future__ import annotations

import random

import pytest

from truckcrew.model import Driver, Instance, Request, Schedule, Task, TaskPlan, Truck
from truckcrew.netgen import RoadNetwork
from truckcrew.stage1 import route_trucks


def chain_network(n: int, km: float = 90.0) -> RoadNetwork:
    """n nodes in a line, consecutive nodes ``km`` apart."""
    locs = tuple(f"n{i}" for i in range(n))
    edges = tuple((f"n{i}", f"n{i+1}", km) for i in range(n - 1))
    return RoadNetwork(locations=locs, edges=edges)


def make_plan(instance, tasks, truck_routes, delta, delivery_day):
    return TaskPlan(
        instance=instance,
        tasks=tuple(tasks),
        truck_routes={k: tuple(v) for k, v in truck_routes.items()},
        tentative_delta=dict(delta),
        delivery_day=dict(delivery_day),
    )


@pytest.fixture
def two_city():
    """Four tasks over two cities three shuttle-hours apart.

    t1 pickup@l1 [1,2], t2 trip l1->l2 [3,6], t3 delivery@l2 [4,5] on a
    second truck, t4 pickup@l2 [8,9].  Drivers start at l1 and l2.
    """
    inst = Instance(
        horizon_days=1,
        locations=("l1", "l2"),
        edges=(("l1", "l2", 270.0),),
        requests=(
            Request("r1", "l1", "l2", (0.0, 24.0), (0.0, 24.0), 0, 0, 1.0),
            Request("r2", "l2", "l1", (0.0, 24.0), (0.0, 24.0), 0, 0, 1.0),
        ),
        trucks=(Truck("vA", "l1"), Truck("vB", "l2")),
        drivers=(Driver("dA", "l1"), Driver("dB", "l2")),
    )
    tasks = [
        Task("t1", "pickup", "l1", "l1", 1.0, "vA", "r1"),
        Task("t2", "trip", "l1", "l2", 3.0, "vA"),
        Task("t3", "delivery", "l2", "l2", 1.0, "vB", "r1"),
        Task("t4", "pickup", "l2", "l2", 1.0, "vA", "r2"),
    ]
    plan = make_plan(
        inst,
        tasks,
        {"vA": ["t1", "t2", "t4"], "vB": ["t3"]},
        {"t1": 1.0, "t2": 3.0, "t3": 4.0, "t4": 8.0},
        {"r1": 0},
    )
    return inst, plan


@pytest.fixture
def split_shift():
    """One driver: 8 h of work, a 6 h shuttle, then 8 h more the next day.

    The shuttle leaves as late as possible ([34, 40]), so the window
    starting at hour 24 carries 14 worked hours.
    """
    inst = Instance(
        horizon_days=2,
        locations=("A", "B", "C", "D"),
        edges=(("A", "B", 720.0), ("B", "C", 540.0), ("C", "D", 720.0)),
        requests=(),
        trucks=(Truck("v1", "A"), Truck("v2", "C")),
        drivers=(Driver("d1", "A"),),
    )
    tasks = [
        Task("T1", "trip", "A", "B", 8.0, "v1"),
        Task("T2", "trip", "C", "D", 8.0, "v2"),
    ]
    plan = make_plan(inst, tasks, {"v1": ["T1"], "v2": ["T2"]}, {"T1": 0.0, "T2": 40.0}, {})
    schedule = Schedule(plan=plan, delta={"T1": 0.0, "T2": 40.0}, routes={"d1": ("T1", "T2")})
    return inst, plan, schedule


@pytest.fixture
def overwork_chain():
    """Driver doing two long trips with a 6 h shuttle in between.

    Inserting the connecting trip into the route replaces the shuttle and
    brings every rolling window back under the cap.
    """
    inst = Instance(
        horizon_days=2,
        locations=("l0", "l1", "l2", "l3"),
        edges=(("l0", "l1", 360.0), ("l1", "l2", 540.0), ("l2", "l3", 720.0)),
        requests=(),
        trucks=(Truck("vA", "l0"), Truck("vB", "l1"), Truck("vC", "l2")),
        drivers=(Driver("dr", "l0"), Driver("d2", "l1")),
    )
    tasks = [
        Task("t1", "trip", "l0", "l1", 4.0, "vA"),
        Task("t2", "trip", "l1", "l2", 6.0, "vB"),
        Task("t3", "trip", "l2", "l3", 8.0, "vC"),
    ]
    plan = make_plan(
        inst,
        tasks,
        {"vA": ["t1"], "vB": ["t2"], "vC": ["t3"]},
        {"t1": 0.0, "t2": 10.0, "t3": 30.0},
        {},
    )
    schedule = Schedule(
        plan=plan,
        delta={"t1": 0.0, "t2": 10.0, "t3": 30.0},
        routes={"dr": ("t1", "t3"), "d2": ("t2",)},
    )
    return inst, plan, schedule


def tiny_instance(seed: int) -> Instance | None:
    """Small random instance whose start-time grid stays enumerable.

    Singleton pickup windows, short trips, and one truck parked at each
    pickup location keep the exhaustive solver fast.  Returns None for
    seeds that draw an awkward combination.
    """
    rng = random.Random(seed)
    n = rng.choice([3, 4])
    net = chain_network(n, 90.0)
    n_req = rng.choice([1, 2])
    requests = []
    trucks = []
    for i in range(n_req):
        while True:
            a, b = rng.sample(range(n), 2)
            if abs(a - b) <= 2:
                break
        pickup_hour = float(rng.randint(2, 8))
        hops = abs(a - b)
        slack = rng.randint(0, 3)
        lo = pickup_hour + 1.0 + hops + slack
        requests.append(
            Request(
                id=f"r{i}",
                pickup_loc=f"n{a}",
                delivery_loc=f"n{b}",
                pickup_window=(pickup_hour, pickup_hour),
                delivery_window=(lo, min(24.0, lo + 2.0)),
                pickup_init_day=0,
                delivery_init_day=0,
                late_penalty=1.0,
            )
        )
        trucks.append(Truck(f"v{i}", f"n{a}"))
    n_drivers = rng.randint(2, 4)
    drivers = tuple(
        Driver(f"d{i}", f"n{rng.randrange(n)}") for i in range(n_drivers)
    )
    return Instance(
        horizon_days=4,
        locations=net.locations,
        edges=net.edges,
        requests=tuple(requests),
        trucks=tuple(trucks),
        drivers=drivers,
    )


def tiny_plans(count: int, start_seed: int = 0, max_tasks: int = 8):
    """First ``count`` seeds whose tiny instance routes into <= max_tasks."""
    out = []
    seed = start_seed
    while len(out) < count:
        seed += 1
        inst = tiny_instance(seed)
        try:
            plan = route_trucks(inst, 0.25, 0.2, seed=seed)
        except Exception:
            continue
        if len(plan.tasks) <= max_tasks:
            out.append((seed, inst, plan))
    return out
