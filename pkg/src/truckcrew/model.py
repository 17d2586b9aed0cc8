"""Core domain types and the canonical cost/feasibility semantics.

A planning problem couples a road network, transport requests with daily
recurring service windows, a truck fleet and a driver pool.  Stage one
fixes truck routes and splits them into *tasks* (pickup, delivery, trip
segments); stage two assigns concrete start times and drivers, moving
drivers between cities with paid external shuttles when needed.

Everything here is deliberately straightforward: these functions are the
reference semantics that the search engine, the emitted integer programs
and the brute-force oracles are all checked against.  Times are
real-valued hours counted from the start of the planning horizon; rest
accounting slides a 24 h window over integer offsets only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from heapq import heappop, heappush

import numpy as np

EPS = 1e-9

SERVICE_HOURS = 1.0       # loading or unloading an item takes one hour
DAILY_WORK_CAP = 12.0     # max work in any 24 h window (12 h rest rule)
WEEKLY_WORK_CAP = 60.0    # optional cap per aligned 7-day block
MIN_REST_GAP = 11.0       # optional minimum uninterrupted break length

REGULATIONS = ("l1", "l1l2", "l1l3")

PICKUP = "pickup"
DELIVERY = "delivery"
TRIP = "trip"

VIOLATION_KINDS = (
    "pathBreak",
    "crewUnder",
    "crewOver",
    "restL1Daily",
    "restL1WeekOff",
    "restL2",
    "restL3",
    "windowPickup",
    "windowDelivery",
    "precedence",
)


class InputError(ValueError):
    """Bad argument or malformed problem data."""


class ContractError(ValueError):
    """An operation was invoked on a value that breaks its preconditions."""


# ---------------------------------------------------------------------------
# problem data


@dataclass(frozen=True)
class Request:
    """One item to move from ``pickup_loc`` to ``delivery_loc``.

    Windows are hours of day in [0, 24] and recur daily: the pickup may
    start on any day from ``pickup_init_day`` to the end of the horizon,
    the delivery from ``delivery_init_day`` on.  Delivering d days after
    ``delivery_init_day`` costs ``d * late_penalty``.
    """

    id: str
    pickup_loc: str
    delivery_loc: str
    pickup_window: tuple[float, float]
    delivery_window: tuple[float, float]
    pickup_init_day: int
    delivery_init_day: int
    late_penalty: float = 1.0

    def __post_init__(self):
        if self.pickup_loc == self.delivery_loc:
            raise InputError(f"request {self.id}: pickup equals delivery location")
        for name, (a, b) in (("pickup", self.pickup_window), ("delivery", self.delivery_window)):
            if not (0.0 <= a <= b <= 24.0):
                raise InputError(f"request {self.id}: bad {name} window [{a}, {b}]")
        if not (0 <= self.pickup_init_day <= self.delivery_init_day):
            raise InputError(f"request {self.id}: inconsistent initial days")
        if self.late_penalty < 0:
            raise InputError(f"request {self.id}: negative late penalty")


@dataclass(frozen=True)
class Truck:
    id: str
    location: str


@dataclass(frozen=True)
class Driver:
    id: str
    location: str


@dataclass(frozen=True)
class Instance:
    """A full problem instance over a weighted road network.

    ``edges`` are undirected ``(a, b, km)`` triples; travel times derive
    from shortest-path distances at the given speeds.  All locations
    referenced by requests, trucks or drivers must lie in one connected
    component of the road graph.
    """

    horizon_days: int
    locations: tuple[str, ...]
    edges: tuple[tuple[str, str, float], ...]
    requests: tuple[Request, ...]
    trucks: tuple[Truck, ...]
    drivers: tuple[Driver, ...]
    truck_speed: float = 90.0
    shuttle_speed: float = 90.0

    def __post_init__(self):
        if self.horizon_days < 1:
            raise InputError("horizon must cover at least one day")
        if self.truck_speed <= 0 or self.shuttle_speed <= 0:
            raise InputError("speeds must be positive")
        locs = set(self.locations)
        if len(locs) != len(self.locations):
            raise InputError("duplicate location names")
        for a, b, km in self.edges:
            if a not in locs or b not in locs:
                raise InputError(f"edge ({a}, {b}) references unknown location")
            if km < 0:
                raise InputError(f"edge ({a}, {b}) has negative length")
        referenced = set()
        for r in self.requests:
            if r.delivery_init_day >= self.horizon_days:
                raise InputError(f"request {r.id}: delivery start day beyond horizon")
            referenced.update((r.pickup_loc, r.delivery_loc))
        referenced.update(v.location for v in self.trucks)
        referenced.update(d.location for d in self.drivers)
        unknown = referenced - locs
        if unknown:
            raise InputError(f"unknown locations referenced: {sorted(unknown)}")
        # connectivity over the referenced locations (union-find on edges)
        parent = {l: l for l in self.locations}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a, b, _ in self.edges:
            parent[find(a)] = find(b)
        roots = {find(l) for l in referenced}
        if len(roots) > 1:
            raise InputError("road network is disconnected over the referenced locations")

    # -- derived routing tables (lazy, the instance itself stays a plain value)

    @cached_property
    def loc_index(self) -> dict[str, int]:
        return {l: i for i, l in enumerate(self.locations)}

    @cached_property
    def _adjacency(self) -> list[list[tuple[int, float]]]:
        adj: list[list[tuple[int, float]]] = [[] for _ in self.locations]
        idx = self.loc_index
        for a, b, km in self.edges:
            ia, ib = idx[a], idx[b]
            adj[ia].append((ib, float(km)))
            adj[ib].append((ia, float(km)))
        return adj

    @cached_property
    def _routing(self) -> tuple[np.ndarray, np.ndarray]:
        """All-pairs shortest paths: (distance km, predecessor index)."""
        n = len(self.locations)
        dist = np.full((n, n), math.inf)
        pred = np.full((n, n), -1, dtype=np.int64)
        adj = self._adjacency
        for src in range(n):
            dist[src, src] = 0.0
            heap = [(0.0, src)]
            done = [False] * n
            while heap:
                d, u = heappop(heap)
                if done[u]:
                    continue
                done[u] = True
                for v, km in adj[u]:
                    nd = d + km
                    if nd < dist[src, v] - EPS:
                        dist[src, v] = nd
                        pred[src, v] = u
                        heappush(heap, (nd, v))
        return dist, pred

    @cached_property
    def n_hours(self) -> int:
        return 24 * self.horizon_days


def _loc_pair(instance: Instance, origin: str, destination: str) -> tuple[int, int]:
    idx = instance.loc_index
    try:
        return idx[origin], idx[destination]
    except KeyError as exc:
        raise InputError(f"unknown location {exc.args[0]!r}") from None


def travel_dist(instance: Instance, origin: str, destination: str) -> float:
    """Shortest-path road distance in km (symmetric, 0 on equal endpoints)."""
    i, j = _loc_pair(instance, origin, destination)
    d = float(instance._routing[0][i, j])
    if math.isinf(d):
        raise InputError(f"no road connection between {origin} and {destination}")
    return d


def travel_time(instance: Instance, origin: str, destination: str, mode: str = "truck") -> float:
    """Travel time in hours by the given mode ("truck" or "shuttle")."""
    if mode == "truck":
        speed = instance.truck_speed
    elif mode == "shuttle":
        speed = instance.shuttle_speed
    else:
        raise InputError(f"unknown travel mode {mode!r}")
    return travel_dist(instance, origin, destination) / speed


def shortest_path(instance: Instance, origin: str, destination: str) -> list[str]:
    """Location sequence of a shortest road path, endpoints included."""
    i, j = _loc_pair(instance, origin, destination)
    dist, pred = instance._routing
    if math.isinf(dist[i, j]):
        raise InputError(f"no road connection between {origin} and {destination}")
    if i == j:
        return [origin]
    rev = [j]
    while rev[-1] != i:
        p = int(pred[i, rev[-1]])
        if p < 0:
            raise InputError(f"no road connection between {origin} and {destination}")
        rev.append(p)
    return [instance.locations[k] for k in reversed(rev)]


def shuttle_cost(instance: Instance, origin: str, destination: str) -> float:
    """Cost of relocating one driver: shuttle travel time plus one, 0 if in place."""
    if origin == destination:
        return 0.0
    return travel_time(instance, origin, destination, "shuttle") + 1.0


# ---------------------------------------------------------------------------
# stage outputs


@dataclass(frozen=True)
class Task:
    """Smallest unit of truck work, always manned by a single crew.

    Pickups and deliveries are stationary (origin == destination, one
    service hour); trips cover one road segment and last its truck travel
    time.  ``request`` links pickups/deliveries back to the request.
    """

    id: str
    kind: str
    origin: str
    destination: str
    duration: float
    truck: str
    request: str | None = None

    def __post_init__(self):
        if self.kind not in (PICKUP, DELIVERY, TRIP):
            raise InputError(f"task {self.id}: unknown kind {self.kind!r}")
        if self.kind in (PICKUP, DELIVERY):
            if self.origin != self.destination:
                raise InputError(f"task {self.id}: stationary task must not move")
            if self.request is None:
                raise InputError(f"task {self.id}: service task without request")
        if self.duration <= 0:
            raise InputError(f"task {self.id}: non-positive duration")


@dataclass(frozen=True)
class TaskPlan:
    """Stage-one output: tasks, truck routes over them, tentative timing.

    ``delivery_day`` freezes the day each request is delivered; stage two
    may still slide start times within that day's window.  The plan keeps
    a reference to its instance so downstream checks are self-contained.
    """

    instance: Instance
    tasks: tuple[Task, ...]
    truck_routes: dict[str, tuple[str, ...]]
    tentative_delta: dict[str, float]
    delivery_day: dict[str, int]

    @cached_property
    def task_by_id(self) -> dict[str, Task]:
        return {t.id: t for t in self.tasks}

    def __eq__(self, other):
        if not isinstance(other, TaskPlan):
            return NotImplemented
        return (
            self.instance == other.instance
            and self.tasks == other.tasks
            and self.truck_routes == other.truck_routes
            and self.tentative_delta == other.tentative_delta
            and self.delivery_day == other.delivery_day
        )


@dataclass(frozen=True)
class Schedule:
    """Stage-two state: start times plus one task sequence per driver."""

    plan: TaskPlan
    delta: dict[str, float]
    routes: dict[str, tuple[str, ...]]
    regulation: str = "l1"

    def __post_init__(self):
        if self.regulation not in REGULATIONS:
            raise InputError(f"unknown regulation {self.regulation!r}")


@dataclass(frozen=True)
class Violation:
    kind: str
    subject: str
    detail: str = ""


@dataclass(frozen=True)
class ShuttleLeg:
    """A paid driver relocation, scheduled as late as possible."""

    start: float
    end: float
    origin: str
    destination: str


# ---------------------------------------------------------------------------
# service windows

def pickup_window_union(instance: Instance, request: Request) -> list[tuple[float, float]]:
    """Absolute-hour intervals when the pickup may start, one per open day."""
    a, b = request.pickup_window
    return [
        (24.0 * day + a, 24.0 * day + b)
        for day in range(request.pickup_init_day, instance.horizon_days)
    ]


def delivery_window_on(request: Request, day: int) -> tuple[float, float]:
    a, b = request.delivery_window
    return (24.0 * day + a, 24.0 * day + b)


def _in_any(value: float, windows: list[tuple[float, float]]) -> bool:
    return any(lo - EPS <= value <= hi + EPS for lo, hi in windows)


# ---------------------------------------------------------------------------
# driver timelines

def shuttle_legs(schedule: Schedule, driver_id: str) -> list[ShuttleLeg]:
    """Relocation legs implied by a driver route (latest possible departure).

    A leg appears wherever consecutive route elements sit in different
    locations, including the hop from the driver's initial location to the
    first task.  Each leg ends exactly when its target task starts.
    """
    inst = schedule.plan.instance
    tasks = schedule.plan.task_by_id
    driver = next((d for d in inst.drivers if d.id == driver_id), None)
    if driver is None:
        raise InputError(f"unknown driver {driver_id!r}")
    legs = []
    loc = driver.location
    for tid in schedule.routes.get(driver_id, ()):
        task = tasks.get(tid)
        if task is None:
            continue
        start = schedule.delta.get(tid)
        if start is None:
            continue
        if task.origin != loc:
            tt = travel_time(inst, loc, task.origin, "shuttle")
            legs.append(ShuttleLeg(start - tt, start, loc, task.origin))
        loc = task.destination
    return legs


def work_intervals(schedule: Schedule, driver_id: str) -> list[tuple[float, float]]:
    """Task execution plus shuttle travel, in route order."""
    tasks = schedule.plan.task_by_id
    legs = {leg.end: leg for leg in shuttle_legs(schedule, driver_id)}
    out = []
    for tid in schedule.routes.get(driver_id, ()):
        task = tasks.get(tid)
        if task is None:
            continue
        start = schedule.delta.get(tid)
        if start is None:
            continue
        leg = legs.get(start)
        if leg is not None and leg.destination == task.origin:
            out.append((leg.start, leg.end))
        out.append((start, start + task.duration))
    return out


def route_path_errors(schedule: Schedule, driver_id: str) -> list[str]:
    """Why a driver route is not a valid path: empty when it is."""
    inst = schedule.plan.instance
    tasks = schedule.plan.task_by_id
    driver = next((d for d in inst.drivers if d.id == driver_id), None)
    if driver is None:
        return [f"unknown driver {driver_id!r}"]
    errors = []
    route = schedule.routes.get(driver_id, ())
    seen = set()
    loc = driver.location
    ready = 0.0
    first = True
    for tid in route:
        task = tasks.get(tid)
        if task is None:
            errors.append(f"unknown task {tid!r}")
            continue
        if tid in seen:
            errors.append(f"task {tid} repeated in route")
            continue
        seen.add(tid)
        start = schedule.delta.get(tid)
        if start is None:
            errors.append(f"task {tid} has no start time")
            continue
        hop = travel_time(inst, loc, task.origin, "shuttle")
        if first:
            if hop > start + EPS:
                errors.append(f"cannot reach first task {tid} by {start:g}")
        else:
            if ready + hop > start + EPS:
                errors.append(f"cannot chain into task {tid} starting {start:g}")
        loc = task.destination
        ready = start + task.duration
        first = False
    return errors


def _gamma(schedule: Schedule, driver_id: str) -> np.ndarray:
    """Hours worked inside each rolling window [i, i+24], i = 0 .. 24H-24.

    Straightforward interval intersection per window; the search engine
    keeps its own incremental version and is tested against this one.
    """
    inst = schedule.plan.instance
    intervals = work_intervals(schedule, driver_id)
    n_windows = inst.n_hours - 23
    gamma = np.zeros(max(n_windows, 0))
    for i in range(n_windows):
        lo, hi = float(i), float(i + 24)
        total = 0.0
        for s, e in intervals:
            total += max(0.0, min(e, hi) - max(s, lo))
        gamma[i] = total
    return gamma


def workload(schedule: Schedule, driver_id: str) -> np.ndarray:
    """Per-window worked hours for one driver (index = window offset i).

    Demands a route that is actually drivable: chaining violations raise
    ``ContractError`` because shuttle legs are undefined on broken paths.
    """
    errors = route_path_errors(schedule, driver_id)
    if errors:
        raise ContractError(f"driver {driver_id}: {errors[0]}")
    return _gamma(schedule, driver_id)


def _runs(indices: list[int]) -> list[tuple[int, int]]:
    """Collapse sorted ints into inclusive (start, end) runs."""
    runs = []
    for i in indices:
        if runs and i == runs[-1][1] + 1:
            runs[-1] = (runs[-1][0], i)
        else:
            runs.append((i, i))
    return runs


def _day_worked(intervals: list[tuple[float, float]], day: int) -> bool:
    lo, hi = 24.0 * day, 24.0 * (day + 1)
    return any(min(e, hi) - max(s, lo) > EPS for s, e in intervals)


def check_rest(schedule: Schedule, driver_id: str, regulation: str | None = None) -> list[Violation]:
    """Rest-rule violations for one driver under the given regulation.

    Always enforced: at most 12 h of work in every 24 h window and at
    least one zero-work day in every run of 7 consecutive days.  The
    "l1l2" variant adds a 60 h cap per aligned week, "l1l3" a minimum
    11 h break between consecutive work periods.
    """
    reg = regulation or schedule.regulation
    if reg not in REGULATIONS:
        raise InputError(f"unknown regulation {reg!r}")
    inst = schedule.plan.instance
    out: list[Violation] = []
    gamma = _gamma(schedule, driver_id)
    bad = [i for i in range(len(gamma)) if gamma[i] > DAILY_WORK_CAP + EPS]
    for lo, hi in _runs(bad):
        peak = float(gamma[lo : hi + 1].max())
        out.append(
            Violation(
                "restL1Daily",
                driver_id,
                f"windows {lo}..{hi} exceed {DAILY_WORK_CAP:g} h (peak {peak:g} h)",
            )
        )
    intervals = work_intervals(schedule, driver_id)
    H = inst.horizon_days
    worked = [_day_worked(intervals, day) for day in range(H)]
    bad_spans = [j for j in range(H - 6) if all(worked[j : j + 7])]
    for lo, hi in _runs(bad_spans):
        out.append(
            Violation("restL1WeekOff", driver_id, f"no day off in days {lo}..{hi + 6}")
        )
    if reg == "l1l2":
        n_weeks = (H + 6) // 7
        for w in range(n_weeks):
            lo, hi = 168.0 * w, 168.0 * (w + 1)
            total = sum(max(0.0, min(e, hi) - max(s, lo)) for s, e in intervals)
            if total > WEEKLY_WORK_CAP + EPS:
                out.append(
                    Violation("restL2", driver_id, f"week {w}: {total:g} h worked")
                )
    if reg == "l1l3":
        ordered = sorted(intervals)
        for (s1, e1), (s2, e2) in zip(ordered, ordered[1:]):
            gap = s2 - e1
            if EPS < gap < MIN_REST_GAP - EPS:
                out.append(
                    Violation(
                        "restL3",
                        driver_id,
                        f"break of {gap:g} h between {e1:g} and {s2:g}",
                    )
                )
    return out


def w_inf(schedule: Schedule) -> float:
    """Total overwork: sum over drivers and windows of max(0, worked - 12).

    Zero exactly when every driver respects the 12 h / 24 h rule, which is
    what the repair search descends on.
    """
    total = 0.0
    for driver in schedule.plan.instance.drivers:
        gamma = _gamma(schedule, driver.id)
        over = gamma - DAILY_WORK_CAP
        total += float(over[over > EPS].sum()) if over.size else 0.0
    return total


# ---------------------------------------------------------------------------
# costs

def cost_stage1(plan: TaskPlan, lam: float) -> tuple[float, float, float]:
    """(delay cost Z1, fleet distance Z2, blended Z12 = lam*Z1 + (1-lam)*Z2)."""
    if not (0.0 <= lam <= 1.0):
        raise InputError("lambda must lie in [0, 1]")
    inst = plan.instance
    req_by_id = {r.id: r for r in inst.requests}
    z1 = 0.0
    for rid, day in plan.delivery_day.items():
        req = req_by_id.get(rid)
        if req is None:
            raise InputError(f"delivery day recorded for unknown request {rid!r}")
        z1 += req.late_penalty * (day - req.delivery_init_day)
    z2 = sum(
        travel_dist(inst, t.origin, t.destination) for t in plan.tasks if t.kind == TRIP
    )
    return z1, z2, lam * z1 + (1.0 - lam) * z2


def cost_stage2(schedule: Schedule) -> float:
    """Total shuttle cost over all drivers (start times do not matter)."""
    inst = schedule.plan.instance
    total = 0.0
    for driver in inst.drivers:
        for leg in shuttle_legs(schedule, driver.id):
            total += shuttle_cost(inst, leg.origin, leg.destination)
    return total


# ---------------------------------------------------------------------------
# the validator

def plan_violations(plan: TaskPlan) -> list[str]:
    """Structural problems of a stage-one plan (empty when well formed)."""
    inst = plan.instance
    problems = []
    tasks = plan.task_by_id
    if len(tasks) != len(plan.tasks):
        problems.append("duplicate task ids")
    routed = [tid for route in plan.truck_routes.values() for tid in route]
    if sorted(routed) != sorted(tasks):
        problems.append("truck routes do not cover the task set exactly once")
    truck_by_id = {v.id: v for v in inst.trucks}
    req_by_id = {r.id: r for r in inst.requests}
    for vid, route in plan.truck_routes.items():
        truck = truck_by_id.get(vid)
        if truck is None:
            problems.append(f"route for unknown truck {vid!r}")
            continue
        loc = truck.location
        prev_end = None
        open_pickup: str | None = None
        for tid in route:
            task = tasks.get(tid)
            if task is None:
                problems.append(f"truck {vid}: unknown task {tid!r}")
                continue
            if task.truck != vid:
                problems.append(f"task {tid} routed on foreign truck {vid}")
            if task.origin != loc:
                problems.append(f"truck {vid}: task {tid} starts away from {loc}")
            start = plan.tentative_delta.get(tid)
            if start is None:
                problems.append(f"task {tid} has no tentative start")
            else:
                if prev_end is not None and start < prev_end - EPS:
                    problems.append(f"truck {vid}: task {tid} overlaps its predecessor")
                prev_end = start + task.duration
            if task.kind == PICKUP:
                if open_pickup is not None:
                    problems.append(f"truck {vid}: pickup {tid} before delivering {open_pickup}")
                open_pickup = task.request
            elif task.kind == DELIVERY:
                if task.request != open_pickup:
                    problems.append(f"truck {vid}: delivery {tid} without matching pickup")
                open_pickup = None
            if task.kind == TRIP:
                expected = travel_time(inst, task.origin, task.destination, "truck")
                if abs(task.duration - expected) > 1e-6:
                    problems.append(f"trip {tid}: duration differs from travel time")
            loc = task.destination
        if open_pickup is not None:
            problems.append(f"truck {vid}: request {open_pickup} picked up but never delivered")
    for rid, day in plan.delivery_day.items():
        req = req_by_id.get(rid)
        if req is None:
            problems.append(f"delivery day for unknown request {rid!r}")
        elif day < req.delivery_init_day:
            problems.append(f"request {rid}: delivery day before its window opens")
    return problems


def validate(schedule: Schedule) -> list[Violation]:
    """Every reason the schedule is infeasible; empty list means feasible.

    Checks, in order: start-time assignment rules (truck precedence and
    service windows), each driver route being drivable, crew sizes between
    one and two, and the rest rules of the schedule's regulation.  Never
    raises: arbitrary candidates are accepted and judged.
    """
    plan = schedule.plan
    inst = plan.instance
    tasks = plan.task_by_id
    out: list[Violation] = []

    for vid, route in plan.truck_routes.items():
        prev: Task | None = None
        for tid in route:
            task = tasks.get(tid)
            if task is None:
                out.append(Violation("pathBreak", vid, f"unknown task {tid!r} in truck route"))
                continue
            start = schedule.delta.get(tid)
            if start is None:
                out.append(Violation("precedence", tid, "missing start time"))
                prev = None
                continue
            if prev is not None:
                prev_start = schedule.delta.get(prev.id)
                if prev_start is not None and prev_start + prev.duration > start + EPS:
                    out.append(
                        Violation(
                            "precedence",
                            tid,
                            f"starts {start:g} before {prev.id} ends {prev_start + prev.duration:g}",
                        )
                    )
            prev = task

    req_by_id = {r.id: r for r in inst.requests}
    for task in plan.tasks:
        start = schedule.delta.get(task.id)
        if start is None or task.kind == TRIP:
            continue
        req = req_by_id.get(task.request)
        if req is None:
            kind = "windowPickup" if task.kind == PICKUP else "windowDelivery"
            out.append(Violation(kind, task.id, f"unknown request {task.request!r}"))
            continue
        if task.kind == PICKUP:
            if not _in_any(start, pickup_window_union(inst, req)):
                out.append(
                    Violation("windowPickup", task.id, f"start {start:g} outside daily windows")
                )
        else:
            day = plan.delivery_day.get(req.id)
            if day is None:
                out.append(Violation("windowDelivery", task.id, "no delivery day fixed"))
            elif not _in_any(start, [delivery_window_on(req, day)]):
                out.append(
                    Violation(
                        "windowDelivery",
                        task.id,
                        f"start {start:g} outside day-{day} window",
                    )
                )

    cover: dict[str, int] = {t.id: 0 for t in plan.tasks}
    drivable: list[str] = []
    for driver in inst.drivers:
        errors = route_path_errors(schedule, driver.id)
        for msg in errors:
            out.append(Violation("pathBreak", driver.id, msg))
        if not errors:
            drivable.append(driver.id)
        for tid in schedule.routes.get(driver.id, ()):
            if tid in cover:
                cover[tid] += 1

    for tid, n in cover.items():
        if n < 1:
            out.append(Violation("crewUnder", tid, "no driver covers this task"))
        elif n > 2:
            out.append(Violation("crewOver", tid, f"{n} drivers cover this task"))

    for driver_id in drivable:
        out.extend(check_rest(schedule, driver_id, schedule.regulation))
    return out
