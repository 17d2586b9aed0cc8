"""Compatibility digraph between tasks, driver start locations and a sink.

A driver route is exactly a source-to-sink path here: an arc from one
task to another exists when the first can be finished and the driver
shuttled over before the second starts, weighted by the shuttle cost of
that hop.  The graph is usually queried on demand (``arc_exists``) since
start-time moves would invalidate a materialised copy; ``build_graph``
materialises it anyway for fixtures, debugging and the structural tests.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import (
    ContractError,
    EPS,
    InputError,
    Instance,
    Schedule,
    TaskPlan,
    shuttle_cost,
    travel_time,
)

SINK = ("sink",)


def source(location: str) -> tuple:
    return ("src", location)


def task_node(task_id: str) -> tuple:
    return ("task", task_id)


@dataclass(frozen=True)
class GraphContext:
    """A virtual view of the digraph for one (plan, start times) pair."""

    plan: TaskPlan
    delta: dict[str, float]

    @property
    def instance(self) -> Instance:
        return self.plan.instance

    def nodes(self) -> list[tuple]:
        sources = sorted({d.location for d in self.instance.drivers})
        return (
            [source(l) for l in sources]
            + [task_node(t.id) for t in self.plan.tasks]
            + [SINK]
        )


def arc_weight(ctx: GraphContext, u: tuple, v: tuple) -> float:
    """Shuttle cost of the hop the arc represents (0 into the sink)."""
    if v == SINK:
        return 0.0
    inst = ctx.instance
    tasks = ctx.plan.task_by_id
    to_task = tasks[v[1]]
    if u[0] == "src":
        return shuttle_cost(inst, u[1], to_task.origin)
    from_task = tasks[u[1]]
    return shuttle_cost(inst, from_task.destination, to_task.origin)


def arc_exists(ctx: GraphContext, u: tuple, v: tuple) -> bool:
    """Whether a driver can do ``u`` then ``v``, shuttle time included."""
    if u == SINK or v[0] == "src" or u == v:
        return False
    if v == SINK:
        return True
    inst = ctx.instance
    tasks = ctx.plan.task_by_id
    to_task = tasks.get(v[1])
    if to_task is None:
        raise InputError(f"node {v!r} not in the graph")
    start_v = ctx.delta[to_task.id]
    if u[0] == "src":
        if u[1] not in {d.location for d in inst.drivers}:
            raise InputError(f"node {u!r} not in the graph")
        return travel_time(inst, u[1], to_task.origin, "shuttle") <= start_v + EPS
    from_task = tasks.get(u[1])
    if from_task is None:
        raise InputError(f"node {u!r} not in the graph")
    ready = ctx.delta[from_task.id] + from_task.duration
    hop = travel_time(inst, from_task.destination, to_task.origin, "shuttle")
    return ready + hop <= start_v + EPS


@dataclass(frozen=True)
class CompatGraph:
    """Materialised digraph: node list plus arc -> weight mapping."""

    nodes: tuple[tuple, ...]
    arcs: dict[tuple[tuple, tuple], float]

    def successors(self, u: tuple) -> list[tuple]:
        return [v for (a, v) in self.arcs if a == u]

    def __eq__(self, other):
        if not isinstance(other, CompatGraph):
            return NotImplemented
        return self.nodes == other.nodes and self.arcs == other.arcs


def _check_start_times(plan: TaskPlan, delta: dict[str, float]):
    from .model import DELIVERY, PICKUP, _in_any, delivery_window_on, pickup_window_union

    inst = plan.instance
    tasks = plan.task_by_id
    for tid in tasks:
        if tid not in delta:
            raise ContractError(f"task {tid} has no start time")
    for vid, route in plan.truck_routes.items():
        for a, b in zip(route, route[1:]):
            if delta[a] + tasks[a].duration > delta[b] + EPS:
                raise ContractError(f"truck {vid}: {a} overlaps {b} under these start times")
    req_by_id = {r.id: r for r in inst.requests}
    for task in plan.tasks:
        if task.kind == PICKUP:
            req = req_by_id[task.request]
            if not _in_any(delta[task.id], pickup_window_union(inst, req)):
                raise ContractError(f"pickup {task.id} scheduled outside its windows")
        elif task.kind == DELIVERY:
            req = req_by_id[task.request]
            day = plan.delivery_day.get(req.id)
            if day is None or not _in_any(delta[task.id], [delivery_window_on(req, day)]):
                raise ContractError(f"delivery {task.id} scheduled outside its window")


def build_graph(plan: TaskPlan, delta: dict[str, float], instance: Instance) -> CompatGraph:
    """Materialise the full digraph; start times must be consistent."""
    if instance is not plan.instance and instance != plan.instance:
        raise InputError("plan belongs to a different instance")
    _check_start_times(plan, delta)
    ctx = GraphContext(plan=plan, delta=delta)
    nodes = ctx.nodes()
    arcs = {}
    for u in nodes:
        for v in nodes:
            if u == v:
                continue
            if v[0] == "src" or u == SINK:
                continue
            if arc_exists(ctx, u, v):
                arcs[(u, v)] = arc_weight(ctx, u, v)
    return CompatGraph(nodes=tuple(nodes), arcs=arcs)


def check_transitive(graph: CompatGraph) -> bool:
    """True when every two-arc chain is shortcut by a direct arc."""
    succ: dict[tuple, list[tuple]] = {}
    for (u, v) in graph.arcs:
        succ.setdefault(u, []).append(v)
    for u, outs in succ.items():
        for v in outs:
            for w in succ.get(v, ()):
                if w != u and (u, w) not in graph.arcs:
                    return False
    return True


def is_acyclic(graph: CompatGraph) -> bool:
    """Kahn-style topological check over the materialised arcs."""
    indeg = {n: 0 for n in graph.nodes}
    succ: dict[tuple, list[tuple]] = {n: [] for n in graph.nodes}
    for (u, v) in graph.arcs:
        indeg[v] += 1
        succ[u].append(v)
    queue = [n for n, k in indeg.items() if k == 0]
    seen = 0
    while queue:
        u = queue.pop()
        seen += 1
        for v in succ[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                queue.append(v)
    return seen == len(graph.nodes)


def path_cost(graph: CompatGraph, path: list[tuple]) -> float:
    """Sum of arc weights along a node sequence; raises on a missing arc."""
    total = 0.0
    for u, v in zip(path, path[1:]):
        if (u, v) not in graph.arcs:
            raise InputError(f"no arc from {u!r} to {v!r}")
        total += graph.arcs[(u, v)]
    return total


def route_as_path(schedule: Schedule, driver_id: str) -> list[tuple]:
    """The source-to-sink node sequence of one driver's route."""
    inst = schedule.plan.instance
    driver = next((d for d in inst.drivers if d.id == driver_id), None)
    if driver is None:
        raise InputError(f"unknown driver {driver_id!r}")
    return (
        [source(driver.location)]
        + [task_node(tid) for tid in schedule.routes.get(driver_id, ())]
        + [SINK]
    )


def to_dot(graph: CompatGraph) -> str:
    """GraphViz dump; dashed arcs carry a positive shuttle cost."""

    def name(node: tuple) -> str:
        if node == SINK:
            return "sink"
        return f"{node[0]}_{node[1]}"

    lines = ["digraph compat {"]
    for node in graph.nodes:
        lines.append(f'  "{name(node)}";')
    for (u, v), w in sorted(graph.arcs.items(), key=lambda kv: (name(kv[0][0]), name(kv[0][1]))):
        style = "dashed" if w > EPS else "solid"
        lines.append(f'  "{name(u)}" -> "{name(v)}" [style={style}, label="{w:g}"];')
    lines.append("}")
    return "\n".join(lines)
