"""Stage two: assign start times and drivers to the planned tasks.

The search is a GRASP: each iteration builds a randomised solution, makes
it feasible, then descends with a variable neighbourhood of six moves.
Construction may leave drivers over the 12 h/24 h work cap ("relaxed"
solutions); a repair descent minimises the total overwork ``w_inf`` until
it reaches zero or gets stuck.  Feasible solutions are improved on the
shuttle-cost objective ``Z3`` and then recycled: start times are
perturbed at constant cost and the descent rerun, more aggressively the
more often iterations fail.

Moves 1-3 shuffle tasks between driver routes, moves 4-5 grow or shrink
a task's crew (one or two drivers), move 6 slides a task's start time
within the slack left by its truck, its service window and its crews.
Neighbourhoods are explored first-improvement with the cost delta
computed before the full feasibility check.

Internally the engine works on integer task indices with numpy hour
grids per driver; the public functions accept and return the plain
:mod:`truckcrew.model` values.
"""

from __future__ import annotations

import math
import random
import time
from bisect import bisect_left
from dataclasses import dataclass, replace

import numpy as np

from .model import (
    DAILY_WORK_CAP,
    EPS,
    MIN_REST_GAP,
    REGULATIONS,
    WEEKLY_WORK_CAP,
    ContractError,
    DELIVERY,
    InputError,
    Instance,
    PICKUP,
    Schedule,
    TaskPlan,
)
from .taskgraph import _check_start_times

MOVE_RELOCATE = 1
MOVE_SWAP = 2
MOVE_TAIL_SWAP = 3
MOVE_INSERT = 4
MOVE_REMOVE = 5
MOVE_RETIME = 6

IMPROVE_ORDER = (MOVE_INSERT, MOVE_REMOVE, MOVE_RELOCATE, MOVE_SWAP, MOVE_TAIL_SWAP)
REPAIR_ORDER = (MOVE_INSERT, MOVE_REMOVE, MOVE_RETIME, MOVE_RELOCATE, MOVE_SWAP, MOVE_TAIL_SWAP)

_PAD = 48  # grid hours past the horizon; late deliveries spill slightly over


@dataclass(frozen=True)
class SearchConfig:
    """Tuning knobs; the defaults are the reference configuration.

    ``alpha`` widens the construction candidate list (0 greedy, 1 random).
    ``beta_init``/``beta_step_pct`` govern the adaptive overwork threshold
    above which constructed solutions are not worth repairing.  The
    perturbation count per feasible solution is
    ``ceil(perturb_base ** (fails / (iterations + 1)))``.
    """

    alpha: float = 0.2
    beta_init: float = math.inf
    beta_step_pct: float = 1.0
    perturb_base: float = 25.0
    vnd_order_improve: tuple[int, ...] = IMPROVE_ORDER
    vnd_order_repair: tuple[int, ...] = REPAIR_ORDER
    crew_max: int = 2
    time_limit_s: float | None = None
    max_iterations: int | None = None
    seed: int = 0
    regulation: str = "l1"
    semi_feasible: bool = True
    perturbation: bool = True

    def __post_init__(self):
        if not (0.0 <= self.alpha <= 1.0):
            raise InputError("alpha must lie in [0, 1]")
        if self.crew_max not in (1, 2):
            raise InputError("crews have one or two drivers")
        if self.regulation not in REGULATIONS:
            raise InputError(f"unknown regulation {self.regulation!r}")
        if self.beta_step_pct < 0:
            raise InputError("beta step must be nonnegative")
        if self.perturb_base < 1:
            raise InputError("perturbation base must be at least 1")
        for move in self.vnd_order_improve + self.vnd_order_repair:
            if move not in (1, 2, 3, 4, 5, 6):
                raise InputError(f"unknown move {move!r} in neighbourhood order")

    @classmethod
    def for_algorithm(cls, level: int, **kwargs) -> "SearchConfig":
        """Feature ladder: 1 = feasible-only GRASP, 2 = +repair, 3 = +perturbation."""
        if level not in (1, 2, 3):
            raise InputError("algorithm level must be 1, 2 or 3")
        return cls(semi_feasible=level >= 2, perturbation=level >= 3, **kwargs)


@dataclass
class SearchState:
    """Mutable bookkeeping of one search run."""

    iteration: int = 0
    fails: int = 0
    beta: float = math.inf
    best_z3: float | None = None
    best_iteration: int | None = None
    best_time_s: float | None = None

    @property
    def gamma(self) -> float:
        return self.fails / (self.iteration + 1)


@dataclass(frozen=True)
class RunStats:
    """Outcome of one search run; wall-clock fields are not reproducible."""

    iterations: int
    fails: int
    best_z3: float | None
    best_iteration: int | None
    time_to_best_s: float | None
    wall_time_s: float

    @property
    def feasible(self) -> bool:
        return self.best_z3 is not None

    @property
    def fails_rate(self) -> float:
        return self.fails / self.iterations if self.iterations else 0.0


@dataclass(frozen=True)
class MoveRejection:
    """Why a requested move cannot be applied."""

    reason: str
    detail: str = ""


class _DriverCache:
    __slots__ = ("profile", "prefix", "day_sums", "intervals", "excess", "cost")

    def __init__(self, profile, prefix, day_sums, intervals, excess, cost):
        self.profile = profile
        self.prefix = prefix
        self.day_sums = day_sums
        self.intervals = intervals
        self.excess = excess
        self.cost = cost


class _Context:
    """Plan and instance compiled to flat arrays for the search."""

    def __init__(self, plan: TaskPlan, instance: Instance, regulation: str, crew_max: int):
        if plan.instance is not instance and plan.instance != instance:
            raise InputError("plan belongs to a different instance")
        self.plan = plan
        self.instance = instance
        self.regulation = regulation
        self.crew_max = crew_max
        self.H = instance.horizon_days
        self.n_hours = 24 * self.H
        self.n_windows = max(self.n_hours - 23, 0)
        self.grid_size = self.n_hours + _PAD

        self.ids = [t.id for t in plan.tasks]
        self.index = {tid: i for i, tid in enumerate(self.ids)}
        loc = instance.loc_index
        self.orig = [loc[t.origin] for t in plan.tasks]
        self.dest = [loc[t.destination] for t in plan.tasks]
        self.dur = [t.duration for t in plan.tasks]
        self.kind = [t.kind for t in plan.tasks]

        dist = instance._routing[0]
        self.tt_s = dist / instance.shuttle_speed
        self.scost = np.where(np.eye(len(dist), dtype=bool), 0.0, self.tt_s + 1.0)

        n = len(self.ids)
        self.truck_prev = [-1] * n
        self.truck_next = [-1] * n
        self.truck_of = [0] * n
        self.route_pos = [0] * n
        truck_order = {v.id: k for k, v in enumerate(instance.trucks)}
        for vid, route in plan.truck_routes.items():
            for pos, tid in enumerate(route):
                t = self.index[tid]
                self.truck_of[t] = truck_order.get(vid, 0)
                self.route_pos[t] = pos
                if pos > 0:
                    self.truck_prev[t] = self.index[route[pos - 1]]
                if pos + 1 < len(route):
                    self.truck_next[t] = self.index[route[pos + 1]]

        req_by_id = {r.id: r for r in instance.requests}
        self.win_pieces: list[list[tuple[float, float]] | None] = []
        for t in plan.tasks:
            if t.kind == PICKUP:
                req = req_by_id[t.request]
                a, b = req.pickup_window
                self.win_pieces.append(
                    [(24.0 * day + a, 24.0 * day + b) for day in range(req.pickup_init_day, self.H)]
                )
            elif t.kind == DELIVERY:
                req = req_by_id[t.request]
                day = plan.delivery_day.get(req.id)
                if day is None:
                    raise InputError(f"plan fixes no delivery day for request {req.id}")
                a, b = req.delivery_window
                self.win_pieces.append([(24.0 * day + a, 24.0 * day + b)])
            else:
                self.win_pieces.append(None)

        self.driver_ids = [d.id for d in instance.drivers]
        self.driver_loc = [loc[d.location] for d in instance.drivers]
        self.n_drivers = len(self.driver_ids)
        self.need_weekcap = regulation == "l1l2"
        self.need_gap = regulation == "l1l3"


def _ceil_h(x: float) -> int:
    return int(math.ceil(x - EPS))


def _floor_h(x: float) -> int:
    return int(math.floor(x + EPS))


class _State:
    """One candidate solution plus incremental per-driver caches."""

    def __init__(self, ctx: _Context, delta: list[float]):
        self.ctx = ctx
        self.delta = delta
        self.routes: list[list[int]] = [[] for _ in range(ctx.n_drivers)]
        self.route_sets: list[set[int]] = [set() for _ in range(ctx.n_drivers)]
        self.cover: list[list[int]] = [[] for _ in ctx.ids]
        self.cost_d = [0.0] * ctx.n_drivers
        self._caches: list[_DriverCache | None] = [None] * ctx.n_drivers

    @property
    def z3_total(self) -> float:
        # summed fresh from per-route costs so move churn cannot drift it
        return sum(self.cost_d)

    # -- caches ------------------------------------------------------------

    def _add_interval(self, profile: np.ndarray, a: float, b: float):
        lo = max(int(math.floor(a + 1e-12)), 0)
        hi = min(int(math.ceil(b - 1e-12)), len(profile))
        for h in range(lo, hi):
            profile[h] += min(b, h + 1.0) - max(a, float(h))

    def _build_cache(self, d: int, route: list[int], override: dict[int, float] | None = None) -> _DriverCache:
        ctx = self.ctx
        profile = np.zeros(ctx.grid_size)
        intervals: list[tuple[float, float]] = []
        loc = ctx.driver_loc[d]
        cost = 0.0
        for t in route:
            s = self.delta[t] if override is None or t not in override else override[t]
            o = ctx.orig[t]
            if o != loc:
                hop = float(ctx.tt_s[loc, o])
                intervals.append((s - hop, s))
                self._add_interval(profile, s - hop, s)
                cost += float(ctx.scost[loc, o])
            e = s + ctx.dur[t]
            intervals.append((s, e))
            self._add_interval(profile, s, e)
            loc = ctx.dest[t]
        prefix = np.concatenate(([0.0], np.cumsum(profile)))
        if ctx.n_windows:
            gam = prefix[24 : 24 + ctx.n_windows] - prefix[: ctx.n_windows]
            over = gam - DAILY_WORK_CAP
            excess = float(over[over > EPS].sum())
        else:
            excess = 0.0
        day_sums = profile[: ctx.n_hours].reshape(ctx.H, 24).sum(axis=1)
        return _DriverCache(profile, prefix, day_sums, intervals, excess, cost)

    def _cache(self, d: int) -> _DriverCache:
        cache = self._caches[d]
        if cache is None:
            cache = self._build_cache(d, self.routes[d])
            self._caches[d] = cache
        return cache

    def total_excess(self) -> float:
        return sum(self._cache(d).excess for d in range(self.ctx.n_drivers))

    # -- rest rules ----------------------------------------------------------

    def _day_off_ok(self, day_sums: np.ndarray) -> bool:
        H = self.ctx.H
        if H < 7:
            return True
        worked = day_sums > EPS
        run = 0
        for day in range(H):
            run = run + 1 if worked[day] else 0
            if run >= 7:
                return False
        return True

    def _weekcap_ok(self, prefix: np.ndarray) -> bool:
        size = len(prefix) - 1
        for w in range((self.ctx.H + 6) // 7):
            lo = min(168 * w, size)
            hi = min(168 * (w + 1), size)
            if prefix[hi] - prefix[lo] > WEEKLY_WORK_CAP + EPS:
                return False
        return True

    def _gap_ok(self, intervals: list[tuple[float, float]]) -> bool:
        for (s1, e1), (s2, e2) in zip(intervals, intervals[1:]):
            gap = s2 - e1
            if EPS < gap < MIN_REST_GAP - EPS:
                return False
        return True

    def _hard_ok(self, cache: _DriverCache) -> bool:
        """Rules that may never break, even in relaxed solutions."""
        if not self._day_off_ok(cache.day_sums):
            return False
        if self.ctx.need_weekcap and not self._weekcap_ok(cache.prefix):
            return False
        if self.ctx.need_gap and not self._gap_ok(cache.intervals):
            return False
        return True

    def _full_ok(self, cache: _DriverCache) -> bool:
        return cache.excess <= 0.0 and self._hard_ok(cache)

    # -- construction --------------------------------------------------------

    def _append_intervals(self, d: int, t: int) -> list[tuple[float, float]]:
        ctx = self.ctx
        route = self.routes[d]
        if route:
            last = route[-1]
            prev_loc = ctx.dest[last]
        else:
            prev_loc = ctx.driver_loc[d]
        s = self.delta[t]
        out = []
        o = ctx.orig[t]
        if o != prev_loc:
            out.append((s - ctx.tt_s[prev_loc, o], s))
        out.append((s, s + ctx.dur[t]))
        return out

    def _append_check(self, d: int, t: int) -> tuple[bool, bool, float]:
        """(within daily cap, hard rules hold, overwork increase) if appended."""
        ctx = self.ctx
        cache = self._cache(d)
        new_ivs = self._append_intervals(d, t)
        first_start = new_ivs[0][0]
        last_end = new_ivs[-1][1]

        daily_ok = True
        d_excess = 0.0
        if ctx.n_windows:
            lo_i = max(0, int(math.floor(first_start)) - 23)
            hi_i = min(ctx.n_windows - 1, int(math.ceil(last_end)) - 1)
            if lo_i <= hi_i:
                idx = np.arange(lo_i, hi_i + 1)
                gam = cache.prefix[idx + 24] - cache.prefix[idx]
                add = np.zeros(len(idx), dtype=float)
                fidx = idx.astype(float)
                for a, b in new_ivs:
                    add += np.clip(np.minimum(b, fidx + 24.0) - np.maximum(a, fidx), 0.0, None)
                over_new = gam + add - DAILY_WORK_CAP
                over_old = gam - DAILY_WORK_CAP
                exc_new = float(over_new[over_new > EPS].sum())
                exc_old = float(over_old[over_old > EPS].sum())
                d_excess = exc_new - exc_old
                daily_ok = exc_new <= 0.0

        hard_ok = True
        H = ctx.H
        if H >= 7:
            worked = cache.day_sums > EPS
            touched = set()
            for a, b in new_ivs:
                for day in range(max(0, int(a // 24)), min(H - 1, int(math.ceil(b / 24.0)) - 1) + 1):
                    if min(b, 24.0 * (day + 1)) - max(a, 24.0 * day) > EPS:
                        touched.add(day)
            if touched:
                new_worked = worked.copy()
                for day in touched:
                    new_worked[day] = True
                lo_j = max(0, min(touched) - 6)
                hi_j = min(H - 7, max(touched))
                for j in range(lo_j, hi_j + 1):
                    if new_worked[j : j + 7].all():
                        hard_ok = False
                        break
        if hard_ok and ctx.need_weekcap:
            size = len(cache.prefix) - 1
            for w in {int(a // 168) for a, _ in new_ivs} | {int(max(b - 1e-9, 0.0) // 168) for _, b in new_ivs}:
                lo = min(168 * w, size)
                hi = min(168 * (w + 1), size)
                base = cache.prefix[hi] - cache.prefix[lo]
                extra = sum(
                    max(0.0, min(b, 168.0 * (w + 1)) - max(a, 168.0 * w)) for a, b in new_ivs
                )
                if base + extra > WEEKLY_WORK_CAP + EPS:
                    hard_ok = False
                    break
        if hard_ok and ctx.need_gap:
            if cache.intervals:
                gap = first_start - cache.intervals[-1][1]
                if EPS < gap < MIN_REST_GAP - EPS:
                    hard_ok = False
        return daily_ok, hard_ok, d_excess

    def _append(self, d: int, t: int):
        self.routes[d].append(t)
        self.route_sets[d].add(t)
        self.cover[t] = sorted(self.cover[t] + [d])
        cache = self._build_cache(d, self.routes[d])
        self.cost_d[d] = cache.cost
        self._caches[d] = cache

    # -- schedule conversion ---------------------------------------------------

    def to_schedule(self, regulation: str) -> Schedule:
        ctx = self.ctx
        return Schedule(
            plan=ctx.plan,
            delta={tid: float(self.delta[i]) for i, tid in enumerate(ctx.ids)},
            routes={
                ctx.driver_ids[d]: tuple(ctx.ids[t] for t in self.routes[d])
                for d in range(ctx.n_drivers)
            },
            regulation=regulation,
        )

    def snapshot(self) -> tuple[list[float], list[list[int]], float]:
        return (list(self.delta), [list(r) for r in self.routes], self.z3_total)

    # -- shared move helpers ---------------------------------------------------

    def _prev_of(self, d: int, route: list[int], pos: int) -> tuple[float, int]:
        """(ready time, location) of the element before ``pos``."""
        if pos == 0:
            return 0.0, self.ctx.driver_loc[d]
        u = route[pos - 1]
        return self.delta[u] + self.ctx.dur[u], self.ctx.dest[u]

    def _compat(self, ready: float, loc: int, t: int) -> bool:
        return ready + self.ctx.tt_s[loc, self.ctx.orig[t]] <= self.delta[t] + EPS

    def _sc(self, loc: int, t: int | None) -> float:
        """Shuttle cost from a location into task ``t`` (0 into the sink)."""
        if t is None:
            return 0.0
        return float(self.ctx.scost[loc, self.ctx.orig[t]])

    def _sc_t(self, t: int, nxt: int | None) -> float:
        if nxt is None:
            return 0.0
        return float(self.ctx.scost[self.ctx.dest[t], self.ctx.orig[nxt]])

    def _slot(self, route: list[int], t: int) -> int:
        return bisect_left(route, self.delta[t], key=lambda x: self.delta[x])

    def _try_commit(self, changes: list[tuple[int, list[int]]], mode: str) -> bool:
        """Build caches for the changed drivers, check rules, then commit."""
        caches = {}
        for d, new_route in changes:
            caches[d] = self._build_cache(d, new_route)
        if mode == "z3":
            for d, _ in changes:
                if not self._full_ok(caches[d]):
                    return False
        else:
            dobj = sum(caches[d].excess - self._cache(d).excess for d, _ in changes)
            if dobj >= -1e-9:
                return False
            for d, _ in changes:
                if not self._hard_ok(caches[d]):
                    return False
        for d, new_route in changes:
            old_set = self.route_sets[d]
            new_set = set(new_route)
            for t in old_set - new_set:
                self.cover[t].remove(d)
            for t in new_set - old_set:
                self.cover[t] = sorted(self.cover[t] + [d])
            self.cost_d[d] = caches[d].cost
            self.routes[d] = list(new_route)
            self.route_sets[d] = new_set
            self._caches[d] = caches[d]
        return True

    # -- neighbourhood exploration (first improvement) ---------------------------

    def _driver_order(self, mode: str) -> list[int]:
        if mode == "z3":
            return sorted(range(self.ctx.n_drivers), key=lambda d: (-self.cost_d[d], d))
        return sorted(range(self.ctx.n_drivers), key=lambda d: (-self._cache(d).excess, d))

    def _task_order(self) -> list[int]:
        return sorted(range(len(self.ctx.ids)), key=lambda t: (self.delta[t], t))

    def _explore_relocate(self, mode: str, order: list[int]) -> bool:
        for d_src in order:
            route_s = self.routes[d_src]
            for pos in range(len(route_s)):
                t = route_s[pos]
                prev_end, prev_loc = self._prev_of(d_src, route_s, pos)
                nxt_s = route_s[pos + 1] if pos + 1 < len(route_s) else None
                gain = (
                    self._sc(prev_loc, nxt_s)
                    - self._sc(prev_loc, t)
                    - self._sc_t(t, nxt_s)
                )
                for d_dst in range(self.ctx.n_drivers):
                    if d_dst == d_src or t in self.route_sets[d_dst]:
                        continue
                    route_d = self.routes[d_dst]
                    slot = self._slot(route_d, t)
                    p_end, p_loc = self._prev_of(d_dst, route_d, slot)
                    nxt_d = route_d[slot] if slot < len(route_d) else None
                    dz = gain + (
                        self._sc(p_loc, t)
                        + self._sc_t(t, nxt_d)
                        - self._sc(p_loc, nxt_d)
                    )
                    if mode == "z3" and dz >= -1e-9:
                        continue
                    if nxt_s is not None and not self._compat(prev_end, prev_loc, nxt_s):
                        continue
                    if not self._compat(p_end, p_loc, t):
                        continue
                    if nxt_d is not None and not self._compat(
                        self.delta[t] + self.ctx.dur[t], self.ctx.dest[t], nxt_d
                    ):
                        continue
                    new_src = route_s[:pos] + route_s[pos + 1 :]
                    new_dst = route_d[:slot] + [t] + route_d[slot:]
                    if self._try_commit([(d_src, new_src), (d_dst, new_dst)], mode):
                        return True
        return False

    def _explore_swap(self, mode: str, order: list[int]) -> bool:
        n = self.ctx.n_drivers
        for i1 in range(n):
            d1 = order[i1]
            r1 = self.routes[d1]
            for i2 in range(i1 + 1, n):
                d2 = order[i2]
                r2 = self.routes[d2]
                for p1 in range(len(r1)):
                    t1 = r1[p1]
                    e1, l1 = self._prev_of(d1, r1, p1)
                    n1 = r1[p1 + 1] if p1 + 1 < len(r1) else None
                    for p2 in range(len(r2)):
                        t2 = r2[p2]
                        if t1 == t2 or t2 in self.route_sets[d1] or t1 in self.route_sets[d2]:
                            continue
                        e2, l2 = self._prev_of(d2, r2, p2)
                        n2 = r2[p2 + 1] if p2 + 1 < len(r2) else None
                        dz = (
                            self._sc(l1, t2)
                            + self._sc_t(t2, n1)
                            - self._sc(l1, t1)
                            - self._sc_t(t1, n1)
                            + self._sc(l2, t1)
                            + self._sc_t(t1, n2)
                            - self._sc(l2, t2)
                            - self._sc_t(t2, n2)
                        )
                        if mode == "z3" and dz >= -1e-9:
                            continue
                        if not self._compat(e1, l1, t2):
                            continue
                        if n1 is not None and not self._compat(
                            self.delta[t2] + self.ctx.dur[t2], self.ctx.dest[t2], n1
                        ):
                            continue
                        if not self._compat(e2, l2, t1):
                            continue
                        if n2 is not None and not self._compat(
                            self.delta[t1] + self.ctx.dur[t1], self.ctx.dest[t1], n2
                        ):
                            continue
                        new_r1 = list(r1)
                        new_r1[p1] = t2
                        new_r2 = list(r2)
                        new_r2[p2] = t1
                        if self._try_commit([(d1, new_r1), (d2, new_r2)], mode):
                            return True
        return False

    def _explore_tail_swap(self, mode: str, order: list[int]) -> bool:
        n = self.ctx.n_drivers
        for i1 in range(n):
            d1 = order[i1]
            r1 = self.routes[d1]
            for i2 in range(i1 + 1, n):
                d2 = order[i2]
                r2 = self.routes[d2]
                if not r1 and not r2:
                    continue
                head1: set[int] = set()
                for p1 in range(len(r1)):
                    t1 = r1[p1]
                    e1, l1 = self._prev_of(d1, r1, p1)
                    for p2 in range(len(r2)):
                        t2 = r2[p2]
                        e2, l2 = self._prev_of(d2, r2, p2)
                        dz = (
                            self._sc(l1, t2)
                            + self._sc(l2, t1)
                            - self._sc(l1, t1)
                            - self._sc(l2, t2)
                        )
                        if mode == "z3" and dz >= -1e-9:
                            continue
                        if not self._compat(e1, l1, t2) or not self._compat(e2, l2, t1):
                            continue
                        tail2 = r2[p2:]
                        if not head1.isdisjoint(tail2):
                            continue
                        if not set(r2[:p2]).isdisjoint(r1[p1:]):
                            continue
                        new_r1 = r1[:p1] + tail2
                        new_r2 = r2[:p2] + r1[p1:]
                        if self._try_commit([(d1, new_r1), (d2, new_r2)], mode):
                            return True
                    head1.add(t1)
        return False

    def _explore_insert(self, mode: str, order: list[int]) -> bool:
        if self.ctx.crew_max < 2:
            return False
        tasks = self._task_order()
        for d in order:
            route = self.routes[d]
            members = self.route_sets[d]
            for t in tasks:
                if len(self.cover[t]) != 1 or t in members:
                    continue
                slot = self._slot(route, t)
                p_end, p_loc = self._prev_of(d, route, slot)
                nxt = route[slot] if slot < len(route) else None
                dz = self._sc(p_loc, t) + self._sc_t(t, nxt) - self._sc(p_loc, nxt)
                if mode == "z3" and dz >= -1e-9:
                    continue
                if not self._compat(p_end, p_loc, t):
                    continue
                if nxt is not None and not self._compat(
                    self.delta[t] + self.ctx.dur[t], self.ctx.dest[t], nxt
                ):
                    continue
                new_route = route[:slot] + [t] + route[slot:]
                if self._try_commit([(d, new_route)], mode):
                    return True
        return False

    def _explore_remove(self, mode: str, order: list[int]) -> bool:
        if self.ctx.crew_max < 2:
            return False
        for d in order:
            route = self.routes[d]
            for pos in range(len(route)):
                t = route[pos]
                if len(self.cover[t]) != 2:
                    continue
                p_end, p_loc = self._prev_of(d, route, pos)
                nxt = route[pos + 1] if pos + 1 < len(route) else None
                dz = self._sc(p_loc, nxt) - self._sc(p_loc, t) - self._sc_t(t, nxt)
                if mode == "z3" and dz >= -1e-9:
                    continue
                if nxt is not None and not self._compat(p_end, p_loc, nxt):
                    continue
                new_route = route[:pos] + route[pos + 1 :]
                if self._try_commit([(d, new_route)], mode):
                    return True
        return False

    # -- start-time moves -------------------------------------------------------

    def retime_bounds(self, t: int) -> tuple[float, float]:
        """Feasible start range for task ``t`` given truck and crew chains."""
        ctx = self.ctx
        lo, hi = 0.0, math.inf
        tp, tn = ctx.truck_prev[t], ctx.truck_next[t]
        if tp >= 0:
            lo = max(lo, self.delta[tp] + ctx.dur[tp])
        if tn >= 0:
            hi = min(hi, self.delta[tn] - ctx.dur[t])
        for d in self.cover[t]:
            route = self.routes[d]
            pos = route.index(t)
            if pos == 0:
                lo = max(lo, float(ctx.tt_s[ctx.driver_loc[d], ctx.orig[t]]))
            else:
                u = route[pos - 1]
                lo = max(
                    lo,
                    self.delta[u] + ctx.dur[u] + float(ctx.tt_s[ctx.dest[u], ctx.orig[t]]),
                )
            if pos + 1 < len(route):
                v = route[pos + 1]
                hi = min(
                    hi,
                    self.delta[v] - ctx.dur[t] - float(ctx.tt_s[ctx.dest[t], ctx.orig[v]]),
                )
        return lo, hi

    def retime_candidates(self, t: int) -> list[float]:
        """Whole-hour alternative start times inside the feasible range."""
        lo, hi = self.retime_bounds(t)
        hi = min(hi, float(self.ctx.n_hours))  # keep unbounded trips on the horizon
        lo = max(lo, 0.0)
        if hi < lo - EPS:
            return []
        pieces = self.ctx.win_pieces[t]
        if pieces is None:
            pieces = [(lo, hi)]
        out = []
        for a, b in pieces:
            a2, b2 = max(a, lo), min(b, hi)
            if b2 < a2 - EPS:
                continue
            for i in range(_ceil_h(a2), _floor_h(b2) + 1):
                if abs(i - self.delta[t]) > EPS:
                    out.append(float(i))
        return out

    def _retime_caches(self, t: int, value: float) -> dict[int, _DriverCache]:
        return {
            d: self._build_cache(d, self.routes[d], override={t: value})
            for d in self.cover[t]
        }

    def _commit_retime(self, t: int, value: float, caches: dict[int, _DriverCache]):
        self.delta[t] = value
        for d, cache in caches.items():
            self.cost_d[d] = cache.cost
            self._caches[d] = cache

    def _explore_retime(self, order: list[int]) -> bool:
        seen: set[int] = set()
        for d in order:
            for t in list(self.routes[d]):
                if t in seen:
                    continue
                seen.add(t)
                for value in self.retime_candidates(t):
                    caches = self._retime_caches(t, value)
                    dobj = sum(
                        caches[dd].excess - self._cache(dd).excess for dd in caches
                    )
                    if dobj >= -1e-9:
                        continue
                    if not all(self._hard_ok(c) for c in caches.values()):
                        continue
                    self._commit_retime(t, value, caches)
                    return True
        return False

    def _explore(self, move: int, mode: str) -> bool:
        order = self._driver_order(mode)
        if move == MOVE_RELOCATE:
            return self._explore_relocate(mode, order)
        if move == MOVE_SWAP:
            return self._explore_swap(mode, order)
        if move == MOVE_TAIL_SWAP:
            return self._explore_tail_swap(mode, order)
        if move == MOVE_INSERT:
            return self._explore_insert(mode, order)
        if move == MOVE_REMOVE:
            return self._explore_remove(mode, order)
        if move == MOVE_RETIME:
            if mode == "z3":
                return False  # start times never change the shuttle cost
            return self._explore_retime(order)
        raise InputError(f"unknown move {move!r}")

    def vnd(self, mode: str, order: tuple[int, ...]):
        k = 0
        while k < len(order):
            if mode == "winf" and self.total_excess() <= 0.0:
                break
            if self._explore(order[k], mode):
                k = 0
            else:
                k += 1

    # -- perturbation ----------------------------------------------------------

    def perturb(self, rng: random.Random):
        tasks = list(range(len(self.ctx.ids)))
        rng.shuffle(tasks)
        for t in tasks:
            if not self.cover[t]:
                continue
            feasible = []
            for value in self.retime_candidates(t):
                caches = self._retime_caches(t, value)
                if all(self._full_ok(c) for c in caches.values()):
                    feasible.append((value, caches))
            if feasible:
                value, caches = feasible[rng.randrange(len(feasible))]
                self._commit_retime(t, value, caches)


# ---------------------------------------------------------------------------
# construction


def _construct(
    ctx: _Context,
    delta: list[float],
    rng: random.Random | None,
    alpha: float,
    allow_relaxed: bool,
) -> _State | None:
    state = _State(ctx, list(delta))
    order = sorted(
        range(len(ctx.ids)),
        key=lambda t: (state.delta[t], ctx.truck_of[t], ctx.route_pos[t]),
    )
    for t in order:
        cl: list[tuple[int, float]] = []
        cl_inf: list[tuple[int, float]] = []
        for d in range(ctx.n_drivers):
            route = state.routes[d]
            if route:
                last = route[-1]
                ready, loc = state.delta[last] + ctx.dur[last], ctx.dest[last]
            else:
                ready, loc = 0.0, ctx.driver_loc[d]
            if not state._compat(ready, loc, t):
                continue
            daily_ok, hard_ok, d_excess = state._append_check(d, t)
            if daily_ok and hard_ok:
                cl.append((d, float(ctx.scost[loc, ctx.orig[t]])))
            elif hard_ok and allow_relaxed:
                cl_inf.append((d, d_excess))
        if cl:
            costs = [c for _, c in cl]
            threshold = min(costs) + alpha * (max(costs) - min(costs)) + EPS
            rcl = [d for d, c in cl if c <= threshold]
            chosen = rcl[0] if rng is None else rcl[rng.randrange(len(rcl))]
        elif cl_inf:
            best = min(x for _, x in cl_inf)
            ties = [d for d, x in cl_inf if x <= best + 1e-9]
            chosen = ties[0] if rng is None else ties[rng.randrange(len(ties))]
        else:
            return None
        state._append(chosen, t)
    return state


# ---------------------------------------------------------------------------
# public operations


def _make_context(plan: TaskPlan, regulation: str, crew_max: int) -> _Context:
    return _Context(plan, plan.instance, regulation, crew_max)


def _state_from_schedule(schedule: Schedule, crew_max: int = 2) -> _State:
    ctx = _make_context(schedule.plan, schedule.regulation, crew_max)
    delta = []
    for tid in ctx.ids:
        if tid not in schedule.delta:
            raise ContractError(f"schedule has no start time for task {tid}")
        delta.append(float(schedule.delta[tid]))
    state = _State(ctx, delta)
    for d, did in enumerate(ctx.driver_ids):
        route = []
        for tid in schedule.routes.get(did, ()):
            if tid not in ctx.index:
                raise ContractError(f"route of {did} references unknown task {tid!r}")
            route.append(ctx.index[tid])
        prev_ready, prev_loc = 0.0, ctx.driver_loc[d]
        for t in route:
            if not state._compat(prev_ready, prev_loc, t):
                raise ContractError(f"route of {did} is not a drivable path")
            prev_ready, prev_loc = state.delta[t] + ctx.dur[t], ctx.dest[t]
        state.routes[d] = route
        state.route_sets[d] = set(route)
        cache = state._build_cache(d, route)
        state.cost_d[d] = cache.cost
        state._caches[d] = cache
        for t in route:
            state.cover[t] = sorted(state.cover[t] + [d])
    return state


def greedy_construct(
    plan: TaskPlan,
    delta: dict[str, float],
    instance: Instance,
    regulation: str = "l1",
    rng: random.Random | None = None,
) -> Schedule | None:
    """Insert tasks in start-time order, each onto the cheapest rest-feasible
    driver; ``None`` when some task has no feasible driver.

    With an ``rng`` given, cost ties are broken uniformly at random, which
    makes the trajectory identical to the randomised construction at
    alpha 0 under the same generator.
    """
    _check_start_times(plan, delta)
    ctx = _Context(plan, instance, regulation, crew_max=2)
    state = _construct(ctx, [delta[tid] for tid in ctx.ids], rng, 0.0, allow_relaxed=False)
    return None if state is None else state.to_schedule(regulation)


def semi_greedy_construct(
    plan: TaskPlan,
    delta: dict[str, float],
    instance: Instance,
    config: SearchConfig,
    rng: random.Random,
) -> Schedule | None:
    """Randomised construction that may overload drivers when cornered.

    Candidates within ``alpha`` of the cheapest extension are drawn
    uniformly; when no fully rest-feasible driver exists the least
    overwork increase wins instead (the hard rules still always hold).
    Returns ``None`` only when not even a relaxed extension exists.
    """
    _check_start_times(plan, delta)
    ctx = _Context(plan, instance, config.regulation, config.crew_max)
    state = _construct(
        ctx,
        [delta[tid] for tid in ctx.ids],
        rng,
        config.alpha,
        allow_relaxed=config.semi_feasible,
    )
    return None if state is None else state.to_schedule(config.regulation)


def vnd(
    schedule: Schedule,
    objective: str = "z3",
    order: tuple[int, ...] | None = None,
    config: SearchConfig | None = None,
) -> Schedule:
    """First-improvement descent to a local optimum of ``z3`` or ``w_inf``."""
    cfg = config or SearchConfig(regulation=schedule.regulation)
    if objective not in ("z3", "w_inf", "winf"):
        raise InputError("objective must be 'z3' or 'w_inf'")
    mode = "z3" if objective == "z3" else "winf"
    state = _state_from_schedule(schedule, cfg.crew_max)
    state.vnd(mode, order or (cfg.vnd_order_improve if mode == "z3" else cfg.vnd_order_repair))
    return state.to_schedule(schedule.regulation)


def repair(schedule: Schedule, config: SearchConfig | None = None) -> Schedule | None:
    """Descend on total overwork until it hits zero; ``None`` when stuck.

    Already-feasible schedules come back unchanged.  The hard rest rules
    (day off, and the weekly cap or minimum break when active) are
    preserved throughout.
    """
    cfg = config or SearchConfig(regulation=schedule.regulation)
    state = _state_from_schedule(schedule, cfg.crew_max)
    if state.total_excess() <= 0.0:
        return schedule
    state.vnd("winf", cfg.vnd_order_repair)
    if state.total_excess() > 0.0:
        return None
    return state.to_schedule(schedule.regulation)


def perturb(schedule: Schedule, rng: random.Random) -> Schedule:
    """Re-draw start times at random without losing feasibility or cost."""
    state = _state_from_schedule(schedule)
    state.perturb(rng)
    return state.to_schedule(schedule.regulation)


def apply_move(
    schedule: Schedule, move: int, args: dict, config: SearchConfig | None = None
) -> Schedule | MoveRejection:
    """Apply one named move to a schedule, or say why it cannot be done.

    Route moves (1-5) must leave every touched driver fully rest-feasible;
    the start-time move (6) only needs the hard rules since it exists to
    repair overwork.  Rejections name the violated condition:
    ``pathBreak``, ``crewUnder``, ``crewOver``, ``rest`` or ``interval``.
    """
    cfg = config or SearchConfig(regulation=schedule.regulation)
    state = _state_from_schedule(schedule, cfg.crew_max)
    ctx = state.ctx

    def task_index(key: str) -> int:
        tid = args[key]
        if tid not in ctx.index:
            raise InputError(f"unknown task {tid!r}")
        return ctx.index[tid]

    def driver_index(key: str) -> int:
        did = args[key]
        if did not in ctx.driver_ids:
            raise InputError(f"unknown driver {did!r}")
        return ctx.driver_ids.index(did)

    if move == MOVE_RETIME:
        t = task_index("task")
        value = float(args["start"])
        lo, hi = state.retime_bounds(t)
        pieces = ctx.win_pieces[t] or [(lo, hi)]
        inside = any(
            max(a, lo) - EPS <= value <= min(b, hi) + EPS for a, b in pieces
        )
        if not inside:
            return MoveRejection("interval", f"start {value:g} outside [{lo:g}, {hi:g}] and windows")
        caches = state._retime_caches(t, value)
        if not all(state._hard_ok(c) for c in caches.values()):
            return MoveRejection("rest", "hard rest rules broken by the new start")
        state._commit_retime(t, value, caches)
        return state.to_schedule(schedule.regulation)

    if move == MOVE_REMOVE:
        d = driver_index("driver")
        t = task_index("task")
        if t not in state.route_sets[d]:
            return MoveRejection("pathBreak", "task not on that driver's route")
        if len(state.cover[t]) != 2:
            return MoveRejection("crewUnder", "removing the only crew member")
        pos = state.routes[d].index(t)
        route = state.routes[d]
        p_end, p_loc = state._prev_of(d, route, pos)
        nxt = route[pos + 1] if pos + 1 < len(route) else None
        if nxt is not None and not state._compat(p_end, p_loc, nxt):
            return MoveRejection("pathBreak", "route does not reconnect")
        if not state._try_commit([(d, route[:pos] + route[pos + 1 :])], "z3"):
            return MoveRejection("rest", "rest rules broken")
        return state.to_schedule(schedule.regulation)

    if move == MOVE_INSERT:
        d = driver_index("driver")
        t = task_index("task")
        if cfg.crew_max < 2:
            return MoveRejection("crewOver", "single-driver crews configured")
        if t in state.route_sets[d]:
            return MoveRejection("pathBreak", "driver already covers the task")
        if len(state.cover[t]) >= 2:
            return MoveRejection("crewOver", "task already has a full crew")
        route = state.routes[d]
        slot = state._slot(route, t)
        p_end, p_loc = state._prev_of(d, route, slot)
        nxt = route[slot] if slot < len(route) else None
        if not state._compat(p_end, p_loc, t) or (
            nxt is not None
            and not state._compat(state.delta[t] + ctx.dur[t], ctx.dest[t], nxt)
        ):
            return MoveRejection("pathBreak", "task does not fit the route timing")
        if not state._try_commit([(d, route[:slot] + [t] + route[slot:])], "z3"):
            return MoveRejection("rest", "rest rules broken")
        return state.to_schedule(schedule.regulation)

    if move in (MOVE_RELOCATE, MOVE_SWAP, MOVE_TAIL_SWAP):
        d1 = driver_index("driver_a" if "driver_a" in args else "from_driver")
        d2 = driver_index("driver_b" if "driver_b" in args else "to_driver")
        if d1 == d2:
            return MoveRejection("pathBreak", "needs two distinct drivers")
        if move == MOVE_RELOCATE:
            t = task_index("task")
            if t not in state.route_sets[d1]:
                return MoveRejection("pathBreak", "task not on the source route")
            if t in state.route_sets[d2]:
                return MoveRejection("crewOver", "target driver already covers the task")
            r1, r2 = state.routes[d1], state.routes[d2]
            pos = r1.index(t)
            prev_end, prev_loc = state._prev_of(d1, r1, pos)
            nxt_s = r1[pos + 1] if pos + 1 < len(r1) else None
            slot = state._slot(r2, t)
            p_end, p_loc = state._prev_of(d2, r2, slot)
            nxt_d = r2[slot] if slot < len(r2) else None
            if (
                (nxt_s is not None and not state._compat(prev_end, prev_loc, nxt_s))
                or not state._compat(p_end, p_loc, t)
                or (
                    nxt_d is not None
                    and not state._compat(state.delta[t] + ctx.dur[t], ctx.dest[t], nxt_d)
                )
            ):
                return MoveRejection("pathBreak", "routes do not reconnect")
            changes = [
                (d1, r1[:pos] + r1[pos + 1 :]),
                (d2, r2[:slot] + [t] + r2[slot:]),
            ]
            if not state._try_commit(changes, "z3"):
                return MoveRejection("rest", "rest rules broken")
            return state.to_schedule(schedule.regulation)
        if move == MOVE_SWAP:
            t1, t2 = task_index("task_a"), task_index("task_b")
            r1, r2 = state.routes[d1], state.routes[d2]
            if t1 not in state.route_sets[d1] or t2 not in state.route_sets[d2]:
                return MoveRejection("pathBreak", "tasks not on the named routes")
            if t1 == t2 or t2 in state.route_sets[d1] or t1 in state.route_sets[d2]:
                return MoveRejection("crewOver", "swap would duplicate a task on a route")
            p1, p2 = r1.index(t1), r2.index(t2)
            e1, l1 = state._prev_of(d1, r1, p1)
            n1 = r1[p1 + 1] if p1 + 1 < len(r1) else None
            e2, l2 = state._prev_of(d2, r2, p2)
            n2 = r2[p2 + 1] if p2 + 1 < len(r2) else None
            ok = (
                state._compat(e1, l1, t2)
                and (
                    n1 is None
                    or state._compat(state.delta[t2] + ctx.dur[t2], ctx.dest[t2], n1)
                )
                and state._compat(e2, l2, t1)
                and (
                    n2 is None
                    or state._compat(state.delta[t1] + ctx.dur[t1], ctx.dest[t1], n2)
                )
            )
            if not ok:
                return MoveRejection("pathBreak", "routes do not reconnect")
            new_r1, new_r2 = list(r1), list(r2)
            new_r1[p1], new_r2[p2] = t2, t1
            if not state._try_commit([(d1, new_r1), (d2, new_r2)], "z3"):
                return MoveRejection("rest", "rest rules broken")
            return state.to_schedule(schedule.regulation)
        t1, t2 = task_index("task_a"), task_index("task_b")
        r1, r2 = state.routes[d1], state.routes[d2]
        if t1 not in state.route_sets[d1] or t2 not in state.route_sets[d2]:
            return MoveRejection("pathBreak", "tasks not on the named routes")
        p1, p2 = r1.index(t1), r2.index(t2)
        e1, l1 = state._prev_of(d1, r1, p1)
        e2, l2 = state._prev_of(d2, r2, p2)
        if not (state._compat(e1, l1, t2) and state._compat(e2, l2, t1)):
            return MoveRejection("pathBreak", "routes do not reconnect")
        if not set(r1[:p1]).isdisjoint(r2[p2:]) or not set(r2[:p2]).isdisjoint(r1[p1:]):
            return MoveRejection("crewOver", "tail swap would duplicate a task on a route")
        changes = [(d1, r1[:p1] + r2[p2:]), (d2, r2[:p2] + r1[p1:])]
        if not state._try_commit(changes, "z3"):
            return MoveRejection("rest", "rest rules broken")
        return state.to_schedule(schedule.regulation)

    raise InputError(f"unknown move {move!r}")


# ---------------------------------------------------------------------------
# the outer loop


def perturbation_rounds(base: float, fails: int, iteration: int) -> int:
    """How often to recycle a feasible solution: ceil(base ** (fails/(it+1)))."""
    return int(math.ceil(base ** (fails / (iteration + 1))))


def grasp(
    plan: TaskPlan, instance: Instance, config: SearchConfig
) -> tuple[Schedule | None, RunStats]:
    """Full randomised search; returns the best feasible schedule and stats.

    Stops on the time limit or the iteration cap, whichever comes first
    (at least one must be set).  With only the iteration cap active, runs
    are bit-reproducible for a fixed seed.
    """
    if config.time_limit_s is None and config.max_iterations is None:
        raise InputError("set a time limit, an iteration cap, or both")
    _check_start_times(plan, plan.tentative_delta)
    ctx = _Context(plan, instance, config.regulation, config.crew_max)
    rng = random.Random(config.seed)
    t_start = time.perf_counter()
    deadline = None if config.time_limit_s is None else t_start + config.time_limit_s
    step = config.beta_step_pct / 100.0
    search = SearchState(beta=config.beta_init)
    best: tuple[list[float], list[list[int]], float] | None = None
    base_delta = [plan.tentative_delta[tid] for tid in ctx.ids]

    def out_of_time() -> bool:
        return deadline is not None and time.perf_counter() >= deadline

    def note_best(state: _State):
        nonlocal best
        if best is None or state.z3_total < best[2] - 1e-9:
            best = state.snapshot()
            search.best_z3 = float(state.z3_total)
            search.best_iteration = search.iteration
            search.best_time_s = time.perf_counter() - t_start

    while True:
        if out_of_time():
            break
        if config.max_iterations is not None and search.iteration >= config.max_iterations:
            break
        search.iteration += 1
        state = _construct(ctx, base_delta, rng, config.alpha, config.semi_feasible)
        if state is None:
            search.fails += 1
            continue
        overwork = state.total_excess()
        if overwork > EPS:
            if overwork > search.beta + EPS:
                search.beta *= 1.0 + step
                search.fails += 1
                continue
            if math.isfinite(search.beta):
                search.beta *= 1.0 - step
            state.vnd("winf", config.vnd_order_repair)
            if state.total_excess() > 0.0:
                search.fails += 1
                continue
            if not math.isfinite(search.beta):
                search.beta = overwork
        else:
            if math.isfinite(search.beta):
                search.beta *= 1.0 - step
        state.vnd("z3", config.vnd_order_improve)
        note_best(state)
        if config.perturbation:
            rounds = perturbation_rounds(config.perturb_base, search.fails, search.iteration)
            for _ in range(rounds):
                if out_of_time():
                    break
                state.perturb(rng)
                state.vnd("z3", config.vnd_order_improve)
                note_best(state)

    wall = time.perf_counter() - t_start
    stats = RunStats(
        iterations=search.iteration,
        fails=search.fails,
        best_z3=search.best_z3,
        best_iteration=search.best_iteration,
        time_to_best_s=search.best_time_s,
        wall_time_s=wall,
    )
    if best is None:
        return None, stats
    delta, routes, _ = best
    final = _State(ctx, delta)
    final.routes = routes
    return final.to_schedule(config.regulation), stats


def run_restarts(
    plan: TaskPlan, instance: Instance, config: SearchConfig, restarts: int
) -> tuple[Schedule | None, list[RunStats]]:
    """Independent seeded runs; the cheapest feasible result wins."""
    best_schedule = None
    best_z3 = math.inf
    all_stats = []
    for k in range(restarts):
        schedule, stats = grasp(plan, instance, replace(config, seed=config.seed + k))
        all_stats.append(stats)
        if schedule is not None and stats.best_z3 is not None and stats.best_z3 < best_z3 - 1e-9:
            best_schedule, best_z3 = schedule, stats.best_z3
    return best_schedule, all_stats


def aggregate_stats(runs: list[RunStats]) -> dict:
    """Fold restart results into the report record.

    ``z3_min/avg/max`` range over the feasible restarts; ``time_to_best_s``
    is taken from the restart that achieved the minimum.
    """
    iterations = sum(r.iterations for r in runs)
    fails = sum(r.fails for r in runs)
    feas = [r for r in runs if r.best_z3 is not None]
    z3s = [r.best_z3 for r in feas]
    best_run = min(feas, key=lambda r: r.best_z3) if feas else None
    return {
        "iterations": iterations,
        "fails": fails,
        "fails_rate": fails / iterations if iterations else 0.0,
        "z3_min": min(z3s) if z3s else None,
        "z3_avg": sum(z3s) / len(z3s) if z3s else None,
        "z3_max": max(z3s) if z3s else None,
        "time_to_best_s": best_run.time_to_best_s if best_run else None,
    }
