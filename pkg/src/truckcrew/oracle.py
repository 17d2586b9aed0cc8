"""Exhaustive reference solvers for toy-sized problems.

These ground the search results in tests: plain-python enumeration over
integer start-time grids and all crew assignments, written independently
of the engine's incremental machinery.  They refuse anything beyond toy
size rather than grind forever.
"""

from __future__ import annotations

import math
from itertools import combinations, permutations, product

from . import model
from .model import (
    DAILY_WORK_CAP,
    EPS,
    InputError,
    Instance,
    MIN_REST_GAP,
    PICKUP,
    Schedule,
    TaskPlan,
    TRIP,
    WEEKLY_WORK_CAP,
)

MAX_TASKS = 8
MAX_DRIVERS = 4
MAX_DELTA_COMBOS = 200_000
MAX_NODES = 5_000_000


def _window_pieces(plan: TaskPlan, task) -> list[tuple[float, float]]:
    inst = plan.instance
    if task.kind == TRIP:
        return [(0.0, float(24 * inst.horizon_days))]
    req = next(r for r in inst.requests if r.id == task.request)
    if task.kind == PICKUP:
        return model.pickup_window_union(inst, req)
    day = plan.delivery_day[req.id]
    return [model.delivery_window_on(req, day)]


def _route_chains(plan: TaskPlan, route: tuple[str, ...], grid: set[int] | None) -> list[dict[str, float]]:
    """All integer start-time assignments for one truck route."""
    tasks = plan.task_by_id
    pieces = {tid: _window_pieces(plan, tasks[tid]) for tid in route}
    latest: dict[str, float] = {}
    next_latest = math.inf
    for tid in reversed(route):
        hi = max(b for _, b in pieces[tid])
        latest[tid] = min(hi, next_latest - tasks[tid].duration)
        next_latest = latest[tid]
    chains: list[dict[str, float]] = []

    def step(pos: int, ready: float, chosen: dict[str, float]):
        if pos == len(route):
            chains.append(dict(chosen))
            return
        tid = route[pos]
        for a, b in pieces[tid]:
            lo = int(math.ceil(max(a, ready) - EPS))
            hi = int(math.floor(min(b, latest[tid]) + EPS))
            for value in range(lo, hi + 1):
                if grid is not None and value not in grid:
                    continue
                chosen[tid] = float(value)
                step(pos + 1, value + tasks[tid].duration, chosen)
        chosen.pop(tid, None)

    step(0, 0.0, {})
    return chains


class _SimDriver:
    """Pure-python driver timeline used only by the oracle."""

    __slots__ = ("loc", "ready", "intervals")

    def __init__(self, loc: str):
        self.loc = loc
        self.ready = 0.0
        self.intervals: tuple[tuple[float, float], ...] = ()


def _rest_ok(
    intervals: tuple[tuple[float, float], ...],
    horizon_days: int,
    regulation: str,
) -> bool:
    n_windows = 24 * horizon_days - 23
    for i in range(max(n_windows, 0)):
        total = sum(max(0.0, min(e, i + 24.0) - max(s, float(i))) for s, e in intervals)
        if total > DAILY_WORK_CAP + EPS:
            return False
    if horizon_days >= 7:
        worked = [
            any(min(e, 24.0 * (d + 1)) - max(s, 24.0 * d) > EPS for s, e in intervals)
            for d in range(horizon_days)
        ]
        for j in range(horizon_days - 6):
            if all(worked[j : j + 7]):
                return False
    if regulation == "l1l2":
        for w in range((horizon_days + 6) // 7):
            lo, hi = 168.0 * w, 168.0 * (w + 1)
            total = sum(max(0.0, min(e, hi) - max(s, lo)) for s, e in intervals)
            if total > WEEKLY_WORK_CAP + EPS:
                return False
    if regulation == "l1l3":
        for (s1, e1), (s2, e2) in zip(intervals, intervals[1:]):
            gap = s2 - e1
            if EPS < gap < MIN_REST_GAP - EPS:
                return False
    return True


def brute_stage2(
    plan: TaskPlan,
    instance: Instance,
    regulation: str = "l1",
    time_grid: set[int] | None = None,
    crew_max: int = 2,
) -> float | None:
    """Optimal total shuttle cost by full enumeration, or None if infeasible.

    Enumerates every integer start-time assignment consistent with the
    truck routes and service windows, and for each one every crew
    assignment of one or two drivers per task, pruning branches that
    already break a rest rule.  Refuses instances beyond toy size.
    """
    tasks = plan.task_by_id
    if len(tasks) > MAX_TASKS:
        raise InputError(f"refusing enumeration beyond {MAX_TASKS} tasks")
    if len(instance.drivers) > MAX_DRIVERS:
        raise InputError(f"refusing enumeration beyond {MAX_DRIVERS} drivers")
    if crew_max not in (1, 2):
        raise InputError("crews have one or two drivers")

    per_truck = []
    combos = 1
    for vid, route in plan.truck_routes.items():
        if not route:
            continue
        chains = _route_chains(plan, route, time_grid)
        if not chains:
            return None
        combos *= len(chains)
        if combos > MAX_DELTA_COMBOS:
            raise InputError("refusing enumeration: start-time grid too large")
        per_truck.append(chains)

    drivers = list(instance.drivers)
    crews: list[tuple[int, ...]] = [(i,) for i in range(len(drivers))]
    if crew_max == 2:
        crews += [pair for pair in combinations(range(len(drivers)), 2)]

    best = math.inf
    best_solution: tuple[dict[str, float], list[list[str]]] | None = None
    budget = [MAX_NODES]

    def solve_delta(delta: dict[str, float]):
        nonlocal best, best_solution
        order = sorted(tasks, key=lambda tid: (delta[tid], tid))
        sims = [_SimDriver(d.location) for d in drivers]
        routes: list[list[str]] = [[] for _ in drivers]

        def can_take(sim: _SimDriver, task) -> tuple[tuple[tuple[float, float], ...], float] | None:
            start = delta[task.id]
            hop = model.travel_time(instance, sim.loc, task.origin, "shuttle")
            if sim.ready + hop > start + EPS:
                return None
            new = list(sim.intervals)
            cost = 0.0
            if task.origin != sim.loc:
                new.append((start - hop, start))
                cost = model.shuttle_cost(instance, sim.loc, task.origin)
            new.append((start, start + task.duration))
            intervals = tuple(new)
            if not _rest_ok(intervals, instance.horizon_days, regulation):
                return None
            return intervals, cost

        def assign(pos: int, cost: float):
            nonlocal best, best_solution
            budget[0] -= 1
            if budget[0] < 0:
                raise InputError("refusing enumeration: search tree too large")
            if cost >= best - 1e-9:
                return
            if pos == len(order):
                best = cost
                best_solution = (dict(delta), [list(r) for r in routes])
                return
            task = tasks[order[pos]]
            for crew in crews:
                takes = []
                for d in crew:
                    take = can_take(sims[d], task)
                    if take is None:
                        takes = None
                        break
                    takes.append(take)
                if takes is None:
                    continue
                extra = sum(c for _, c in takes)
                saved = [(sims[d].loc, sims[d].ready, sims[d].intervals) for d in crew]
                for d, (intervals, _) in zip(crew, takes):
                    sims[d].intervals = intervals
                    sims[d].loc = task.destination
                    sims[d].ready = delta[task.id] + task.duration
                    routes[d].append(task.id)
                assign(pos + 1, cost + extra)
                for d, (loc, ready, intervals) in zip(crew, saved):
                    sims[d].loc = loc
                    sims[d].ready = ready
                    sims[d].intervals = intervals
                    routes[d].pop()

        assign(0, 0.0)

    if per_truck:
        for combo in product(*per_truck):
            delta: dict[str, float] = {}
            for chain in combo:
                delta.update(chain)
            solve_delta(delta)
    else:
        solve_delta({})

    if best_solution is None:
        return None
    delta, routes = best_solution
    schedule = Schedule(
        plan=plan,
        delta=delta,
        routes={d.id: tuple(routes[i]) for i, d in enumerate(drivers)},
        regulation=regulation,
    )
    leftovers = model.validate(schedule)
    if leftovers:
        raise RuntimeError(f"oracle produced an infeasible optimum: {leftovers[:3]}")
    return best


def _earliest(arrival: float, day0: int, horizon_days: int, window) -> tuple[float, int] | None:
    a, b = window
    for day in range(day0, horizon_days):
        lo, hi = 24.0 * day + a, 24.0 * day + b
        c = max(int(math.ceil(arrival - EPS)), int(math.ceil(lo - EPS)))
        if c <= int(math.floor(hi + EPS)):
            return float(c), day
    return None


def brute_stage1(instance: Instance, lam: float) -> float | None:
    """Optimal blended stage-one cost over every assignment and ordering.

    Timing per ordering is earliest-on-the-hour, which dominates any other
    grid timing for both objectives.  Refuses more than 3 requests or 2
    trucks.
    """
    if len(instance.requests) > 3:
        raise InputError("refusing enumeration beyond 3 requests")
    if len(instance.trucks) > 2:
        raise InputError("refusing enumeration beyond 2 trucks")
    if not (0.0 <= lam <= 1.0):
        raise InputError("lambda must lie in [0, 1]")

    requests = list(instance.requests)
    trucks = list(instance.trucks)
    best = math.inf
    H = instance.horizon_days

    def chain_arrival(start: float, origin: str, destination: str) -> float:
        path = model.shortest_path(instance, origin, destination)
        t = start
        for a, b in zip(path, path[1:]):
            t = int(math.ceil(t - EPS)) + model.travel_time(instance, a, b, "truck")
        return t

    for labels in product(range(len(trucks)), repeat=len(requests)):
        groups = [[r for r, v in zip(requests, labels) if v == k] for k in range(len(trucks))]
        for orders in product(*[permutations(g) for g in groups]):
            z1 = 0.0
            z2 = 0.0
            feasible = True
            for truck, seq in zip(trucks, orders):
                loc, avail = truck.location, 0.0
                for req in seq:
                    arrival = chain_arrival(avail, loc, req.pickup_loc)
                    got = _earliest(arrival, req.pickup_init_day, H, req.pickup_window)
                    if got is None:
                        feasible = False
                        break
                    pickup_start, _ = got
                    arrival_d = chain_arrival(pickup_start + 1.0, req.pickup_loc, req.delivery_loc)
                    got = _earliest(arrival_d, req.delivery_init_day, H, req.delivery_window)
                    if got is None:
                        feasible = False
                        break
                    delivery_start, delivery_day = got
                    z1 += req.late_penalty * (delivery_day - req.delivery_init_day)
                    z2 += model.travel_dist(instance, loc, req.pickup_loc)
                    z2 += model.travel_dist(instance, req.pickup_loc, req.delivery_loc)
                    loc, avail = req.delivery_loc, delivery_start + 1.0
                if not feasible:
                    break
            if feasible:
                best = min(best, lam * z1 + (1.0 - lam) * z2)
    return None if math.isinf(best) else best
