"""Stage one: build valid truck routes and cut them into tasks.

Requests are appended to truck routes one at a time, urgent delivery days
first.  Candidate trucks are ranked by their blended cost increment and
drawn from a restricted candidate list, so distinct seeds give genuinely
different plans.  Deliveries are timed as early as possible and pickups
as late as their windows and the connecting trips allow, which keeps
trucks free and items fresh.  Connecting trips follow shortest road paths
with one task per road segment; their start times are drawn uniformly
from the integer hours that keep the route synchronised.

All service and trip start times land on whole hours.  Durations stay
fractional (distance over speed), so routes simply absorb sub-hour slack.
"""

from __future__ import annotations

import math
import random

from .model import (
    DELIVERY,
    EPS,
    InputError,
    Instance,
    PICKUP,
    Request,
    TRIP,
    Task,
    TaskPlan,
    shortest_path,
    travel_dist,
    travel_time,
)


class Stage1Infeasible(RuntimeError):
    """No truck can serve some request within the horizon."""


def _ceil_h(x: float) -> int:
    return int(math.ceil(x - EPS))


def _floor_h(x: float) -> int:
    return int(math.floor(x + EPS))


def _earliest_service_start(
    arrival: float, request_day: int, horizon_days: int, window: tuple[float, float]
) -> tuple[float, int] | None:
    """Earliest on-grid start at or after ``arrival`` in the daily windows.

    Prefers whole hours; falls back to a fractional start when a window
    holds no integer point (only possible with fractional window data).
    """
    a, b = window
    for day in range(request_day, horizon_days):
        lo, hi = 24.0 * day + a, 24.0 * day + b
        c = max(_ceil_h(arrival), _ceil_h(lo))
        if c <= _floor_h(hi) and c >= arrival - EPS:
            return float(c), day
        frac = max(arrival, lo)
        if frac <= hi + EPS:
            return frac, day
    return None


def _latest_service_start(
    arrival: float,
    upper: float,
    request_day: int,
    horizon_days: int,
    window: tuple[float, float],
) -> float | None:
    """Latest on-grid window start in [arrival, upper], scanning days backwards."""
    a, b = window
    for day in range(horizon_days - 1, request_day - 1, -1):
        lo, hi = 24.0 * day + a, 24.0 * day + b
        hi_c = _floor_h(min(hi, upper))
        lo_c = _ceil_h(max(lo, arrival))
        if hi_c >= lo_c:
            return float(hi_c)
        frac = min(hi, upper)
        if frac >= max(lo, arrival) - EPS and frac <= upper + EPS:
            return frac
    return None


def _forward_chain(start: float, durations: list[float]) -> tuple[list[int], float]:
    """Earliest integer start per segment; returns starts and final arrival."""
    t = start
    starts = []
    for dur in durations:
        s = _ceil_h(t)
        starts.append(s)
        t = s + dur
    return starts, t


def _backward_chain(end: float, durations: list[float]) -> list[int]:
    """Latest integer start per segment so the chain finishes by ``end``."""
    t = end
    starts = [0] * len(durations)
    for k in range(len(durations) - 1, -1, -1):
        s = _floor_h(t - durations[k])
        starts[k] = s
        t = s
    return starts


def _sample_chain(
    rng: random.Random, anchor_start: float, latest: list[int], durations: list[float]
) -> list[int]:
    """Random integer starts between the forward and backward bounds."""
    starts = []
    t = anchor_start
    for k, dur in enumerate(durations):
        lo = _ceil_h(t)
        hi = max(latest[k], lo)
        s = rng.randint(lo, hi)
        starts.append(s)
        t = s + dur
    return starts


class _TruckRoute:
    """Mutable route under construction for one truck."""

    def __init__(self, truck_id: str, location: str):
        self.truck_id = truck_id
        self.loc = location
        self.avail = 0.0
        # committed legs: (kind, origin, destination, duration, start, request)
        self.legs: list[tuple[str, str, str, float, float, str | None]] = []


def _evaluate_append(
    instance: Instance, state: _TruckRoute, request: Request, lam: float
) -> dict | None:
    """Timing and cost increment of serving ``request`` next on this truck."""
    H = instance.horizon_days
    to_pickup = shortest_path(instance, state.loc, request.pickup_loc)
    pick_durs = [
        travel_time(instance, a, b, "truck") for a, b in zip(to_pickup, to_pickup[1:])
    ]
    _, arrival_p = _forward_chain(state.avail, pick_durs)
    found = _earliest_service_start(arrival_p, request.pickup_init_day, H, request.pickup_window)
    if found is None:
        return None
    pickup_earliest, _ = found

    to_delivery = shortest_path(instance, request.pickup_loc, request.delivery_loc)
    del_durs = [
        travel_time(instance, a, b, "truck") for a, b in zip(to_delivery, to_delivery[1:])
    ]
    _, arrival_d = _forward_chain(pickup_earliest + 1.0, del_durs)
    found = _earliest_service_start(
        arrival_d, request.delivery_init_day, H, request.delivery_window
    )
    if found is None:
        return None
    delivery_start, delivery_day = found

    # pull the pickup as close to the delivery as the trip chain allows
    latest_del_chain = _backward_chain(delivery_start, del_durs)
    pickup_upper = (latest_del_chain[0] if del_durs else delivery_start) - 1.0
    pickup_start = _latest_service_start(
        arrival_p, pickup_upper, request.pickup_init_day, H, request.pickup_window
    )
    if pickup_start is None:
        pickup_start = pickup_earliest

    dz1 = request.late_penalty * (delivery_day - request.delivery_init_day)
    dz2 = travel_dist(instance, state.loc, request.pickup_loc) + travel_dist(
        instance, request.pickup_loc, request.delivery_loc
    )
    return {
        "cost": lam * dz1 + (1.0 - lam) * dz2,
        "pickup_path": to_pickup,
        "pickup_durs": pick_durs,
        "pickup_start": pickup_start,
        "delivery_path": to_delivery,
        "delivery_durs": del_durs,
        "delivery_start": delivery_start,
        "delivery_day": delivery_day,
    }


def _commit(rng: random.Random, state: _TruckRoute, request: Request, cand: dict):
    durs = cand["pickup_durs"]
    if durs:
        latest = _backward_chain(cand["pickup_start"], durs)
        starts = _sample_chain(rng, state.avail, latest, durs)
        path = cand["pickup_path"]
        for (a, b), dur, s in zip(zip(path, path[1:]), durs, starts):
            state.legs.append((TRIP, a, b, dur, float(s), None))
    state.legs.append(
        (PICKUP, request.pickup_loc, request.pickup_loc, 1.0, cand["pickup_start"], request.id)
    )
    durs = cand["delivery_durs"]
    if durs:
        latest = _backward_chain(cand["delivery_start"], durs)
        starts = _sample_chain(rng, cand["pickup_start"] + 1.0, latest, durs)
        path = cand["delivery_path"]
        for (a, b), dur, s in zip(zip(path, path[1:]), durs, starts):
            state.legs.append((TRIP, a, b, dur, float(s), None))
    state.legs.append(
        (
            DELIVERY,
            request.delivery_loc,
            request.delivery_loc,
            1.0,
            cand["delivery_start"],
            request.id,
        )
    )
    state.loc = request.delivery_loc
    state.avail = cand["delivery_start"] + 1.0


def route_trucks(
    instance: Instance, lam: float = 0.25, alpha: float = 0.2, seed: int = 0
) -> TaskPlan:
    """Assign every request to a truck and return the segmented plan.

    ``alpha`` controls the restricted candidate list: 0 is pure greedy on
    the cost increment, 1 picks uniformly among all feasible trucks.
    Raises :class:`Stage1Infeasible` when some request fits no truck.
    """
    if not (0.0 <= lam <= 1.0):
        raise InputError("lambda must lie in [0, 1]")
    if not (0.0 <= alpha <= 1.0):
        raise InputError("alpha must lie in [0, 1]")
    rng = random.Random(seed)
    states = {v.id: _TruckRoute(v.id, v.location) for v in instance.trucks}

    order = sorted(
        instance.requests, key=lambda r: (r.delivery_init_day, rng.random())
    )
    delivery_day: dict[str, int] = {}
    for request in order:
        candidates = []
        for truck in instance.trucks:
            cand = _evaluate_append(instance, states[truck.id], request, lam)
            if cand is not None:
                candidates.append((truck.id, cand))
        if not candidates:
            raise Stage1Infeasible(
                f"request {request.id} fits no truck route within the horizon"
            )
        costs = [c["cost"] for _, c in candidates]
        threshold = min(costs) + alpha * (max(costs) - min(costs))
        rcl = [pair for pair in candidates if pair[1]["cost"] <= threshold + EPS]
        truck_id, chosen = rng.choice(rcl)
        _commit(rng, states[truck_id], request, chosen)
        delivery_day[request.id] = chosen["delivery_day"]

    tasks = []
    truck_routes = {}
    tentative = {}
    counter = 0
    for truck in instance.trucks:
        route_ids = []
        for kind, origin, dest, dur, start, req in states[truck.id].legs:
            tid = f"t{counter}"
            counter += 1
            tasks.append(
                Task(
                    id=tid,
                    kind=kind,
                    origin=origin,
                    destination=dest,
                    duration=dur,
                    truck=truck.id,
                    request=req,
                )
            )
            tentative[tid] = start
            route_ids.append(tid)
        truck_routes[truck.id] = tuple(route_ids)

    return TaskPlan(
        instance=instance,
        tasks=tuple(tasks),
        truck_routes=truck_routes,
        tentative_delta=tentative,
        delivery_day=delivery_day,
    )


def segment(plan: TaskPlan):
    """Partition the plan's tasks by kind plus the task-to-request map."""
    pickups = tuple(t for t in plan.tasks if t.kind == PICKUP)
    deliveries = tuple(t for t in plan.tasks if t.kind == DELIVERY)
    trips = tuple(t for t in plan.tasks if t.kind == TRIP)
    req = {t.id: t.request for t in plan.tasks if t.kind != TRIP}
    return pickups, deliveries, trips, req
