"""Instance generation and file I/O.

Instances, plans and schedules round-trip through UTF-8 JSON files with an
explicit ``schema_version``.  Generation is a pure function of its
parameters and seed: requests are drawn first, then truck locations, then
driver placements, so enlarging only the driver pool keeps the rest of
the instance bit-identical.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from importlib import resources

from .model import (
    Driver,
    InputError,
    Instance,
    Request,
    Schedule,
    Task,
    TaskPlan,
    Truck,
)

SCHEMA_VERSION = 1


class ParseError(ValueError):
    """A data file could not be interpreted; message carries the context."""


@dataclass(frozen=True)
class RoadNetwork:
    locations: tuple[str, ...]
    edges: tuple[tuple[str, str, float], ...]


@dataclass(frozen=True)
class GenParams:
    """Knobs for the random instance generator.

    ``horizon_days`` must be at least 4 (pickup start days are drawn from
    [0, H-4]), and the placement rule assumes at least one driver per
    truck.  ``co_location_prob`` is the chance that a truck starts with a
    driver already at its location.
    """

    horizon_days: int
    num_requests: int
    num_trucks: int
    num_drivers: int
    seed: int
    co_location_prob: float = 0.8

    def __post_init__(self):
        if self.horizon_days < 4:
            raise InputError("generation needs a horizon of at least 4 days")
        if min(self.num_requests, self.num_trucks, self.num_drivers) < 1:
            raise InputError("need at least one request, truck and driver")
        if self.num_drivers < self.num_trucks:
            raise InputError("placement rule assumes at least as many drivers as trucks")
        if not (0.0 <= self.co_location_prob <= 1.0):
            raise InputError("co-location probability must lie in [0, 1]")


def default_network() -> RoadNetwork:
    """The editable 15-city network bundled with the package."""
    raw = json.loads(
        resources.files("truckcrew.data").joinpath("default_network.json").read_text("utf-8")
    )
    return RoadNetwork(
        locations=tuple(raw["locations"]),
        edges=tuple((a, b, float(km)) for a, b, km in raw["edges"]),
    )


def generate(params: GenParams, network: RoadNetwork | None = None) -> Instance:
    """Draw a random instance on the given road network.

    Request windows start at a uniform integer hour in [0, 22] and end at
    a uniform integer hour up to 24; pickup start days leave at least
    four days of slack, delivery start days at least two.  Each truck
    receives a co-located driver with probability ``co_location_prob``
    and the remaining drivers land on uniform random locations.
    """
    net = network or default_network()
    rng = random.Random(params.seed)
    H = params.horizon_days

    def window() -> tuple[float, float]:
        a = rng.randint(0, 22)
        b = rng.randint(a, 24)
        return (float(a), float(b))

    requests = []
    for i in range(params.num_requests):
        origin, destination = rng.sample(net.locations, 2)
        day_p = rng.randint(0, H - 4)
        win_p = window()
        day_d = rng.randint(day_p, H - 2)
        win_d = window()
        requests.append(
            Request(
                id=f"r{i}",
                pickup_loc=origin,
                delivery_loc=destination,
                pickup_window=win_p,
                delivery_window=win_d,
                pickup_init_day=day_p,
                delivery_init_day=day_d,
                late_penalty=1.0,
            )
        )

    trucks = [
        Truck(id=f"v{i}", location=rng.choice(net.locations))
        for i in range(params.num_trucks)
    ]

    driver_locs = []
    for truck in trucks:
        if len(driver_locs) >= params.num_drivers:
            break
        if rng.random() < params.co_location_prob:
            driver_locs.append(truck.location)
        else:
            driver_locs.append(rng.choice(net.locations))
    while len(driver_locs) < params.num_drivers:
        driver_locs.append(rng.choice(net.locations))
    drivers = [Driver(id=f"d{i}", location=loc) for i, loc in enumerate(driver_locs)]

    return Instance(
        horizon_days=H,
        locations=net.locations,
        edges=net.edges,
        requests=tuple(requests),
        trucks=tuple(trucks),
        drivers=tuple(drivers),
    )


# ---------------------------------------------------------------------------
# JSON serialization


def _require(mapping: dict, key: str, where: str):
    if key not in mapping:
        raise ParseError(f"{where}: missing field {key!r}")
    return mapping[key]


def _load_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def _check_version(doc: dict, path: str):
    version = _require(doc, "schema_version", path)
    if version != SCHEMA_VERSION:
        raise ParseError(f"{path}: unsupported schema_version {version!r}")


def instance_to_dict(instance: Instance) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "horizon_days": instance.horizon_days,
        "locations": list(instance.locations),
        "edges": [[a, b, km] for a, b, km in instance.edges],
        "speeds": {"truck": instance.truck_speed, "shuttle": instance.shuttle_speed},
        "requests": [
            {
                "id": r.id,
                "pickup_loc": r.pickup_loc,
                "delivery_loc": r.delivery_loc,
                "pickup_window": list(r.pickup_window),
                "delivery_window": list(r.delivery_window),
                "pickup_init_day": r.pickup_init_day,
                "delivery_init_day": r.delivery_init_day,
                "late_penalty": r.late_penalty,
            }
            for r in instance.requests
        ],
        "trucks": [{"id": v.id, "location": v.location} for v in instance.trucks],
        "drivers": [{"id": d.id, "location": d.location} for d in instance.drivers],
    }


def instance_from_dict(doc: dict, where: str = "instance") -> Instance:
    _check_version(doc, where)
    try:
        requests = tuple(
            Request(
                id=str(r["id"]),
                pickup_loc=r["pickup_loc"],
                delivery_loc=r["delivery_loc"],
                pickup_window=tuple(float(x) for x in r["pickup_window"]),
                delivery_window=tuple(float(x) for x in r["delivery_window"]),
                pickup_init_day=int(r["pickup_init_day"]),
                delivery_init_day=int(r["delivery_init_day"]),
                late_penalty=float(r.get("late_penalty", 1.0)),
            )
            for r in _require(doc, "requests", where)
        )
        speeds = _require(doc, "speeds", where)
        return Instance(
            horizon_days=int(_require(doc, "horizon_days", where)),
            locations=tuple(_require(doc, "locations", where)),
            edges=tuple((a, b, float(km)) for a, b, km in _require(doc, "edges", where)),
            requests=requests,
            trucks=tuple(
                Truck(id=str(v["id"]), location=v["location"])
                for v in _require(doc, "trucks", where)
            ),
            drivers=tuple(
                Driver(id=str(d["id"]), location=d["location"])
                for d in _require(doc, "drivers", where)
            ),
            truck_speed=float(_require(speeds, "truck", f"{where}.speeds")),
            shuttle_speed=float(_require(speeds, "shuttle", f"{where}.speeds")),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, (ParseError, InputError)):
            raise
        raise ParseError(f"{where}: malformed field ({exc})") from exc


def save_instance(instance: Instance, path: str):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(instance_to_dict(instance), fh, indent=1)
        fh.write("\n")


def load_instance(path: str) -> Instance:
    try:
        return instance_from_dict(_load_json(path), path)
    except InputError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def plan_to_dict(plan: TaskPlan) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "tasks": [
            {
                "id": t.id,
                "kind": t.kind,
                "origin": t.origin,
                "destination": t.destination,
                "duration": t.duration,
                "truck": t.truck,
                "request": t.request,
            }
            for t in plan.tasks
        ],
        "truck_routes": {vid: list(route) for vid, route in plan.truck_routes.items()},
        "tentative_delta": dict(plan.tentative_delta),
        "delivery_day": dict(plan.delivery_day),
    }


def plan_from_dict(doc: dict, instance: Instance, where: str = "plan") -> TaskPlan:
    _check_version(doc, where)
    try:
        tasks = tuple(
            Task(
                id=str(t["id"]),
                kind=t["kind"],
                origin=t["origin"],
                destination=t["destination"],
                duration=float(t["duration"]),
                truck=str(t["truck"]),
                request=None if t.get("request") is None else str(t["request"]),
            )
            for t in _require(doc, "tasks", where)
        )
        return TaskPlan(
            instance=instance,
            tasks=tasks,
            truck_routes={
                str(vid): tuple(str(tid) for tid in route)
                for vid, route in _require(doc, "truck_routes", where).items()
            },
            tentative_delta={
                str(tid): float(h)
                for tid, h in _require(doc, "tentative_delta", where).items()
            },
            delivery_day={
                str(rid): int(day)
                for rid, day in _require(doc, "delivery_day", where).items()
            },
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, (ParseError, InputError)):
            raise
        raise ParseError(f"{where}: malformed field ({exc})") from exc


def save_plan(plan: TaskPlan, path: str):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(plan_to_dict(plan), fh, indent=1)
        fh.write("\n")


def load_plan(path: str, instance: Instance) -> TaskPlan:
    try:
        return plan_from_dict(_load_json(path), instance, path)
    except InputError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def schedule_to_dict(schedule: Schedule) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "regulation": schedule.regulation,
        "delta": dict(schedule.delta),
        "routes": {did: list(route) for did, route in schedule.routes.items()},
        "plan": plan_to_dict(schedule.plan),
    }


def schedule_from_dict(doc: dict, instance: Instance, where: str = "schedule") -> Schedule:
    _check_version(doc, where)
    try:
        plan = plan_from_dict(_require(doc, "plan", where), instance, f"{where}.plan")
        return Schedule(
            plan=plan,
            delta={str(tid): float(h) for tid, h in _require(doc, "delta", where).items()},
            routes={
                str(did): tuple(str(tid) for tid in route)
                for did, route in _require(doc, "routes", where).items()
            },
            regulation=str(doc.get("regulation", "l1")),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, (ParseError, InputError)):
            raise
        raise ParseError(f"{where}: malformed field ({exc})") from exc


def save_schedule(schedule: Schedule, path: str):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(schedule_to_dict(schedule), fh, indent=1)
        fh.write("\n")


def load_schedule(path: str, instance: Instance) -> Schedule:
    try:
        return schedule_from_dict(_load_json(path), instance, path)
    except InputError as exc:
        raise ParseError(f"{path}: {exc}") from exc
