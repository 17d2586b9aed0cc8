"""Integer-program emission for both stages, plus an exact checker.

``emit_stage1``/``emit_stage2`` write standard LP text files.  The model
objects keep the rows in structured form so that ``evaluate`` can
substitute a concrete assignment with rational arithmetic and name every
violated row; the heuristic solutions are required to pass this check
with matching objective values, which pins the emitters and the cost
functions to each other.

Stage one routes trucks through request nodes with day/hour variables
per request.  Stage two covers every task with one or two driver paths
over the full arc superset; start-time variables are integers, pickups
choose their day with selector binaries, delivery days stay frozen to
the plan.  Rest rules are deliberately not part of the emitted model;
the validator owns them.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

from .model import (
    EPS,
    InputError,
    Instance,
    PICKUP,
    Schedule,
    TRIP,
    TaskPlan,
    shuttle_cost,
    travel_dist,
    travel_time,
)

SINK = "sink"


def _clean(name) -> str:
    return re.sub(r"[^A-Za-z0-9_]", "_", str(name))


@dataclass(frozen=True)
class LinearRow:
    name: str
    coeffs: dict[str, float]
    sense: str  # "<=", ">=" or "="
    rhs: float


@dataclass(frozen=True)
class MILPModel:
    name: str
    objective: dict[str, float]
    objective_constant: float
    rows: tuple[LinearRow, ...]
    binaries: tuple[str, ...]
    generals: tuple[str, ...]
    bounds: dict[str, tuple[float, float]]

    def variables(self) -> list[str]:
        seen: dict[str, None] = {}
        for name in self.binaries:
            seen.setdefault(name)
        for name in self.generals:
            seen.setdefault(name)
        for name in self.objective:
            seen.setdefault(name)
        for row in self.rows:
            for name in row.coeffs:
                seen.setdefault(name)
        return list(seen)


def _fmt(value: float) -> str:
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(float(value))


def _terms(coeffs: dict[str, float]) -> str:
    parts = []
    for i, (var, coef) in enumerate(coeffs.items()):
        mag = _fmt(abs(coef))
        if i == 0:
            sign = "-" if coef < 0 else ""
            parts.append(f"{sign}{mag} {var}")
        else:
            sign = "-" if coef < 0 else "+"
            parts.append(f"{sign} {mag} {var}")
    return " ".join(parts) if parts else "0 zero_"


def to_lp_text(model: MILPModel) -> str:
    lines = [f"\\ {model.name}", "Minimize"]
    obj = _terms(model.objective)
    if model.objective_constant:
        sign = "-" if model.objective_constant < 0 else "+"
        obj += f" {sign} {_fmt(abs(model.objective_constant))}"
    lines.append(f" obj: {obj}")
    lines.append("Subject To")
    for row in model.rows:
        sense = row.sense if row.sense != "=" else "="
        lines.append(f" {row.name}: {_terms(row.coeffs)} {sense} {_fmt(row.rhs)}")
    if model.bounds:
        lines.append("Bounds")
        for var, (lo, hi) in model.bounds.items():
            hi_txt = "+inf" if math.isinf(hi) else _fmt(hi)
            lines.append(f" {_fmt(lo)} <= {var} <= {hi_txt}")
    if model.generals:
        lines.append("Generals")
        for var in model.generals:
            lines.append(f" {var}")
    if model.binaries:
        lines.append("Binaries")
        for var in model.binaries:
            lines.append(f" {var}")
    lines.append("End")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class EvalResult:
    satisfied: bool
    violated: tuple[str, ...]
    objective: Fraction


def evaluate(model: "MILPModel | Stage1Model | Stage2Model", assignment: dict) -> EvalResult:
    """Substitute an assignment exactly; names every violated row or domain."""
    milp = model.milp if hasattr(model, "milp") else model
    values: dict[str, Fraction] = {}
    for var in milp.variables():
        if var not in assignment:
            raise InputError(f"assignment misses variable {var!r}")
        values[var] = Fraction(assignment[var])
    violated = []
    for var in milp.binaries:
        if values[var] not in (Fraction(0), Fraction(1)):
            violated.append(f"binary:{var}")
    for var in milp.generals:
        if values[var].denominator != 1:
            violated.append(f"integrality:{var}")
    for var, (lo, hi) in milp.bounds.items():
        if values[var] < Fraction(lo) or (not math.isinf(hi) and values[var] > Fraction(hi)):
            violated.append(f"bound:{var}")
    for row in milp.rows:
        lhs = sum((Fraction(c) * values[v] for v, c in row.coeffs.items()), Fraction(0))
        rhs = Fraction(row.rhs)
        ok = (
            lhs <= rhs
            if row.sense == "<="
            else lhs >= rhs
            if row.sense == ">="
            else lhs == rhs
        )
        if not ok:
            violated.append(row.name)
    objective = sum(
        (Fraction(c) * values[v] for v, c in milp.objective.items()),
        Fraction(milp.objective_constant),
    )
    return EvalResult(satisfied=not violated, violated=tuple(violated), objective=objective)


# ---------------------------------------------------------------------------
# stage one


@dataclass(frozen=True)
class Stage1Model:
    milp: MILPModel
    lam: float
    big_m: float
    arcs: tuple[tuple[str, str, float], ...]  # (tail node, head node, weight)
    arc_var: dict[tuple[str, str], str]


def build_stage1(instance: Instance, lam: float) -> Stage1Model:
    if not (0.0 <= lam <= 1.0):
        raise InputError("lambda must lie in [0, 1]")
    H = instance.horizon_days
    requests = instance.requests
    trucks = instance.trucks

    arcs: list[tuple[str, str, float]] = []
    for v in trucks:
        for r in requests:
            w = travel_dist(instance, v.location, r.pickup_loc) + travel_dist(
                instance, r.pickup_loc, r.delivery_loc
            )
            arcs.append((v.id, r.id, w))
    for r1 in requests:
        for r2 in requests:
            if r1.id == r2.id:
                continue
            w = travel_dist(instance, r1.delivery_loc, r2.pickup_loc) + travel_dist(
                instance, r2.pickup_loc, r2.delivery_loc
            )
            arcs.append((r1.id, r2.id, w))
    for v in trucks:
        arcs.append((v.id, SINK, 0.0))
    for r in requests:
        arcs.append((r.id, SINK, 0.0))

    arc_var = {(a, b): f"x_{_clean(a)}_{_clean(b)}" for a, b, _ in arcs}
    big_m = 24.0 * H + sum(w for _, _, w in arcs)

    objective: dict[str, float] = {}
    for r in requests:
        if lam * r.late_penalty != 0.0:
            objective[f"dd_{_clean(r.id)}"] = lam * r.late_penalty
    for a, b, w in arcs:
        coef = (1.0 - lam) * w
        if b != SINK and coef != 0.0:
            objective[arc_var[(a, b)]] = coef
    constant = -lam * sum(r.late_penalty * r.delivery_init_day for r in requests)

    rows: list[LinearRow] = []
    for r in requests:
        coeffs = {arc_var[(a, b)]: 1.0 for a, b, _ in arcs if b == r.id}
        rows.append(LinearRow(f"fulfil_{_clean(r.id)}", coeffs, "=", 1.0))
    for v in trucks:
        coeffs = {arc_var[(a, b)]: 1.0 for a, b, _ in arcs if a == v.id}
        rows.append(LinearRow(f"depart_{_clean(v.id)}", coeffs, "=", 1.0))
    for r in requests:
        rid = _clean(r.id)
        tt = travel_time(instance, r.pickup_loc, r.delivery_loc, "truck")
        rows.append(
            LinearRow(
                f"pair_time_{rid}",
                {f"dp_{rid}": 24.0, f"hp_{rid}": 1.0, f"dd_{rid}": -24.0, f"hd_{rid}": -1.0},
                "<=",
                -(1.0 + tt),
            )
        )
    for v in trucks:
        for r in requests:
            rid = _clean(r.id)
            tt = travel_time(instance, v.location, r.pickup_loc, "truck")
            rows.append(
                LinearRow(
                    f"first_reach_{_clean(v.id)}_{rid}",
                    {
                        f"dp_{rid}": -24.0,
                        f"hp_{rid}": -1.0,
                        arc_var[(v.id, r.id)]: big_m,
                    },
                    "<=",
                    big_m - tt,
                )
            )
    for r1 in requests:
        for r2 in requests:
            if r1.id == r2.id:
                continue
            tt = travel_time(instance, r1.delivery_loc, r2.pickup_loc, "truck")
            rows.append(
                LinearRow(
                    f"chain_time_{_clean(r1.id)}_{_clean(r2.id)}",
                    {
                        f"dd_{_clean(r1.id)}": 24.0,
                        f"hd_{_clean(r1.id)}": 1.0,
                        f"dp_{_clean(r2.id)}": -24.0,
                        f"hp_{_clean(r2.id)}": -1.0,
                        arc_var[(r1.id, r2.id)]: big_m,
                    },
                    "<=",
                    big_m - 1.0 - tt,
                )
            )
    for r in requests:
        coeffs: dict[str, float] = {}
        for a, b, _ in arcs:
            if b == r.id:
                coeffs[arc_var[(a, b)]] = coeffs.get(arc_var[(a, b)], 0.0) + 1.0
        for a, b, _ in arcs:
            if a == r.id:
                coeffs[arc_var[(a, b)]] = coeffs.get(arc_var[(a, b)], 0.0) - 1.0
        rows.append(LinearRow(f"flow_{_clean(r.id)}", coeffs, "=", 0.0))

    bounds = {}
    generals = []
    for r in requests:
        rid = _clean(r.id)
        bounds[f"dp_{rid}"] = (float(r.pickup_init_day), float(H - 1))
        bounds[f"dd_{rid}"] = (float(r.delivery_init_day), float(H - 1))
        bounds[f"hp_{rid}"] = (float(r.pickup_window[0]), float(r.pickup_window[1]))
        bounds[f"hd_{rid}"] = (float(r.delivery_window[0]), float(r.delivery_window[1]))
        generals += [f"dp_{rid}", f"dd_{rid}", f"hp_{rid}", f"hd_{rid}"]

    milp = MILPModel(
        name=f"stage1 lambda={lam:g}",
        objective=objective,
        objective_constant=constant,
        rows=tuple(rows),
        binaries=tuple(arc_var[(a, b)] for a, b, _ in arcs),
        generals=tuple(generals),
        bounds=bounds,
    )
    return Stage1Model(milp=milp, lam=lam, big_m=big_m, arcs=tuple(arcs), arc_var=arc_var)


def emit_stage1(instance: Instance, lam: float) -> str:
    return to_lp_text(build_stage1(instance, lam).milp)


def _split_service_time(start: float, day_lo: int, horizon_days: int, window) -> tuple[int, float]:
    """Decompose an absolute start into (day, hour-of-day) inside the window."""
    a, b = window
    for day in range(day_lo, horizon_days):
        h = start - 24.0 * day
        if a - EPS <= h <= b + EPS:
            return day, h
    raise InputError(f"start {start:g} lies in no service window")


def stage1_assignment(plan: TaskPlan) -> dict[str, float]:
    """Variable values of a plan for checking against the stage-one model."""
    inst = plan.instance
    model_ = build_stage1(inst, 0.0)  # naming only; lambda irrelevant
    values = {var: 0.0 for (_, _), var in model_.arc_var.items()}
    req_by_id = {r.id: r for r in inst.requests}
    for v in inst.trucks:
        seq = [
            plan.task_by_id[tid].request
            for tid in plan.truck_routes.get(v.id, ())
            if plan.task_by_id[tid].kind == PICKUP
        ]
        if not seq:
            values[model_.arc_var[(v.id, SINK)]] = 1.0
            continue
        values[model_.arc_var[(v.id, seq[0])]] = 1.0
        for r1, r2 in zip(seq, seq[1:]):
            values[model_.arc_var[(r1, r2)]] = 1.0
        values[model_.arc_var[(seq[-1], SINK)]] = 1.0
    for task in plan.tasks:
        if task.kind == TRIP:
            continue
        req = req_by_id[task.request]
        rid = _clean(req.id)
        start = plan.tentative_delta[task.id]
        if task.kind == PICKUP:
            day, hour = _split_service_time(start, req.pickup_init_day, inst.horizon_days, req.pickup_window)
            values[f"dp_{rid}"] = float(day)
            values[f"hp_{rid}"] = hour
        else:
            day = plan.delivery_day[req.id]
            values[f"dd_{rid}"] = float(day)
            values[f"hd_{rid}"] = start - 24.0 * day
    return values


# ---------------------------------------------------------------------------
# stage two


@dataclass(frozen=True)
class Stage2Model:
    milp: MILPModel
    big_m: float
    arcs: tuple[tuple[str, str, float], ...]
    arc_y: dict[tuple[str, str], str]
    arc_x: dict[tuple[str, tuple[str, str]], str]  # (driver, arc) -> var


def _arc_name(node: str) -> str:
    return _clean(node)


def build_stage2(instance: Instance, plan: TaskPlan) -> Stage2Model:
    if plan.instance is not instance and plan.instance != instance:
        raise InputError("plan belongs to a different instance")
    H = instance.horizon_days
    tasks = list(plan.tasks)
    task_ids = [t.id for t in tasks]
    req_by_id = {r.id: r for r in instance.requests}
    source_locs = sorted({d.location for d in instance.drivers})

    def src(loc: str) -> str:
        return f"s_{loc}"

    arcs: list[tuple[str, str, float]] = []
    for loc in source_locs:
        for t in tasks:
            arcs.append((src(loc), t.id, shuttle_cost(instance, loc, t.origin)))
    for ti in tasks:
        for tj in tasks:
            if ti.id == tj.id:
                continue
            arcs.append((ti.id, tj.id, shuttle_cost(instance, ti.destination, tj.origin)))
    for loc in source_locs:
        arcs.append((src(loc), SINK, 0.0))
    for t in tasks:
        arcs.append((t.id, SINK, 0.0))

    arc_y = {(a, b): f"y__{_arc_name(a)}__{_arc_name(b)}" for a, b, _ in arcs}

    arc_x: dict[tuple[str, tuple[str, str]], str] = {}
    driver_arcs: dict[str, list[tuple[str, str, float]]] = {}
    for d in instance.drivers:
        own_src = src(d.location)
        usable = [
            (a, b, w)
            for a, b, w in arcs
            if not (a.startswith("s_") and a != own_src)
        ]
        driver_arcs[d.id] = usable
        for a, b, _ in usable:
            arc_x[(d.id, (a, b))] = f"x_{_clean(d.id)}__{_arc_name(a)}__{_arc_name(b)}"

    finite_tt = [
        travel_time(instance, a, b, "shuttle")
        for a in instance.locations
        for b in instance.locations
        if not math.isinf(instance._routing[0][instance.loc_index[a], instance.loc_index[b]])
    ]
    big_m = 24.0 * H + (max(finite_tt) if finite_tt else 0.0)

    objective: dict[str, float] = {}
    for d in instance.drivers:
        for a, b, w in driver_arcs[d.id]:
            if w:
                objective[arc_x[(d.id, (a, b))]] = w

    rows: list[LinearRow] = []
    for t in tasks:
        coeffs = {}
        for d in instance.drivers:
            for a, b, _ in driver_arcs[d.id]:
                if b == t.id:
                    coeffs[arc_x[(d.id, (a, b))]] = 1.0
        rows.append(LinearRow(f"cover_lo_{_clean(t.id)}", dict(coeffs), ">=", 1.0))
        rows.append(LinearRow(f"cover_hi_{_clean(t.id)}", dict(coeffs), "<=", 2.0))
    for d in instance.drivers:
        own_src = src(d.location)
        out_coeffs = {
            arc_x[(d.id, (a, b))]: 1.0 for a, b, _ in driver_arcs[d.id] if a == own_src
        }
        rows.append(LinearRow(f"depart_{_clean(d.id)}", out_coeffs, "=", 1.0))
        in_coeffs = {
            arc_x[(d.id, (a, b))]: 1.0 for a, b, _ in driver_arcs[d.id] if b == SINK
        }
        rows.append(LinearRow(f"arrive_{_clean(d.id)}", in_coeffs, "=", 1.0))
        for t in tasks:
            coeffs = {}
            for a, b, _ in driver_arcs[d.id]:
                if b == t.id:
                    coeffs[arc_x[(d.id, (a, b))]] = coeffs.get(arc_x[(d.id, (a, b))], 0.0) + 1.0
            for a, b, _ in driver_arcs[d.id]:
                if a == t.id:
                    coeffs[arc_x[(d.id, (a, b))]] = coeffs.get(arc_x[(d.id, (a, b))], 0.0) - 1.0
            rows.append(LinearRow(f"flow_{_clean(d.id)}_{_clean(t.id)}", coeffs, "=", 0.0))
    for d in instance.drivers:
        for a, b, _ in driver_arcs[d.id]:
            rows.append(
                LinearRow(
                    f"link_{_clean(d.id)}__{_arc_name(a)}__{_arc_name(b)}",
                    {arc_x[(d.id, (a, b))]: 1.0, arc_y[(a, b)]: -1.0},
                    "<=",
                    0.0,
                )
            )
    for d in instance.drivers:
        own_src = src(d.location)
        for t in tasks:
            tt = travel_time(instance, d.location, t.origin, "shuttle")
            rows.append(
                LinearRow(
                    f"source_time_{_clean(d.id)}_{_clean(t.id)}",
                    {arc_y[(own_src, t.id)]: tt, f"delta_{_clean(t.id)}": -1.0},
                    "<=",
                    0.0,
                )
            )
    truck_of = {}
    for vid, route in plan.truck_routes.items():
        for tid in route:
            truck_of[tid] = vid
        for a, b in zip(route, route[1:]):
            rows.append(
                LinearRow(
                    f"truck_chain_{_clean(a)}_{_clean(b)}",
                    {f"delta_{_clean(a)}": 1.0, f"delta_{_clean(b)}": -1.0},
                    "<=",
                    -plan.task_by_id[a].duration,
                )
            )
    for ti in tasks:
        for tj in tasks:
            if ti.id == tj.id or truck_of.get(ti.id) == truck_of.get(tj.id):
                continue
            tt = travel_time(instance, ti.destination, tj.origin, "shuttle")
            rows.append(
                LinearRow(
                    f"cross_time_{_clean(ti.id)}_{_clean(tj.id)}",
                    {
                        f"delta_{_clean(ti.id)}": 1.0,
                        f"delta_{_clean(tj.id)}": -1.0,
                        arc_y[(ti.id, tj.id)]: big_m,
                    },
                    "<=",
                    big_m - ti.duration - tt,
                )
            )

    bounds: dict[str, tuple[float, float]] = {}
    generals: list[str] = []
    selector_bin: list[str] = []
    for t in tasks:
        var = f"delta_{_clean(t.id)}"
        generals.append(var)
        if t.kind == TRIP:
            bounds[var] = (0.0, 24.0 * H)
        elif t.kind == PICKUP:
            req = req_by_id[t.request]
            a, b = req.pickup_window
            bounds[var] = (24.0 * req.pickup_init_day + a, 24.0 * (H - 1) + b)
            days = list(range(req.pickup_init_day, H))
            sel = {f"z_{_clean(t.id)}_day{day}": 1.0 for day in days}
            rows.append(LinearRow(f"pick_day_{_clean(t.id)}", sel, "=", 1.0))
            lo_coeffs = {f"z_{_clean(t.id)}_day{day}": 24.0 * day + a for day in days}
            lo_coeffs[var] = -1.0
            rows.append(LinearRow(f"pick_lo_{_clean(t.id)}", lo_coeffs, "<=", 0.0))
            hi_coeffs = {var: 1.0}
            for day in days:
                hi_coeffs[f"z_{_clean(t.id)}_day{day}"] = -(24.0 * day + b)
            rows.append(LinearRow(f"pick_hi_{_clean(t.id)}", hi_coeffs, "<=", 0.0))
            selector_bin += [f"z_{_clean(t.id)}_day{day}" for day in days]
        else:
            req = req_by_id[t.request]
            day = plan.delivery_day[req.id]
            a, b = req.delivery_window
            bounds[var] = (24.0 * day + a, 24.0 * day + b)

    binaries = list(arc_y.values())
    for d in instance.drivers:
        for a, b, _ in driver_arcs[d.id]:
            binaries.append(arc_x[(d.id, (a, b))])
    binaries += selector_bin

    milp = MILPModel(
        name="stage2 crew cover",
        objective=objective,
        objective_constant=0.0,
        rows=tuple(rows),
        binaries=tuple(binaries),
        generals=tuple(generals),
        bounds=bounds,
    )
    return Stage2Model(milp=milp, big_m=big_m, arcs=tuple(arcs), arc_y=arc_y, arc_x=arc_x)


def emit_stage2(instance: Instance, plan: TaskPlan) -> str:
    return to_lp_text(build_stage2(instance, plan).milp)


def stage2_assignment(schedule: Schedule) -> dict[str, float]:
    """Variable values of a schedule for checking against the stage-two model."""
    plan = schedule.plan
    inst = plan.instance
    model_ = build_stage2(inst, plan)
    values: dict[str, float] = {var: 0.0 for var in model_.milp.variables()}
    req_by_id = {r.id: r for r in inst.requests}
    for t in plan.tasks:
        values[f"delta_{_clean(t.id)}"] = float(schedule.delta[t.id])
        if t.kind == PICKUP:
            req = req_by_id[t.request]
            day, _ = _split_service_time(
                schedule.delta[t.id], req.pickup_init_day, inst.horizon_days, req.pickup_window
            )
            values[f"z_{_clean(t.id)}_day{day}"] = 1.0
    used: set[tuple[str, str]] = set()
    for d in inst.drivers:
        own_src = f"s_{d.location}"
        route = list(schedule.routes.get(d.id, ()))
        path = [own_src] + route + [SINK]
        for a, b in zip(path, path[1:]):
            values[model_.arc_x[(d.id, (a, b))]] = 1.0
            used.add((a, b))
    for arc in used:
        values[model_.arc_y[arc]] = 1.0
    return values
