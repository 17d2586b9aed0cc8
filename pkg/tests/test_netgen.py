"""Instance generation and file round trips."""

import json

import pytest

from truckcrew.model import InputError
from truckcrew.netgen import (
    GenParams,
    ParseError,
    default_network,
    generate,
    load_instance,
    load_plan,
    load_schedule,
    save_instance,
    save_plan,
    save_schedule,
)
from truckcrew.stage1 import route_trucks
from truckcrew.stage2 import SearchConfig, grasp

from conftest import chain_network


def test_default_network_shape():
    net = default_network()
    assert len(net.locations) == 15
    assert len(net.edges) >= 14


def test_generation_is_deterministic(tmp_path):
    params = GenParams(horizon_days=7, num_requests=8, num_trucks=3, num_drivers=6, seed=123)
    a, b = generate(params), generate(params)
    assert a == b
    pa, pb = tmp_path / "a.json", tmp_path / "b.json"
    save_instance(a, str(pa))
    save_instance(b, str(pb))
    assert pa.read_bytes() == pb.read_bytes()


def test_generation_h4_start_days_degenerate():
    params = GenParams(horizon_days=4, num_requests=20, num_trucks=2, num_drivers=4, seed=9)
    inst = generate(params)
    assert all(r.pickup_init_day == 0 for r in inst.requests)
    assert all(0 <= r.delivery_init_day <= 2 for r in inst.requests)


def test_generation_window_shapes():
    params = GenParams(horizon_days=10, num_requests=50, num_trucks=4, num_drivers=8, seed=77)
    inst = generate(params)
    for r in inst.requests:
        assert r.pickup_loc != r.delivery_loc
        for a, b in (r.pickup_window, r.delivery_window):
            assert 0 <= a <= b <= 24
            assert a == int(a) and b == int(b)
            assert a <= 22


def test_generation_rejects_short_horizon():
    with pytest.raises(InputError):
        GenParams(horizon_days=3, num_requests=1, num_trucks=1, num_drivers=1, seed=0)


def test_generation_rejects_driver_shortage():
    with pytest.raises(InputError):
        GenParams(horizon_days=5, num_requests=1, num_trucks=3, num_drivers=2, seed=0)


def test_co_location_rate():
    # on a 100-city network random coincidence is negligible, so the rate
    # of drivers starting at their truck's location estimates the knob
    net = chain_network(100, 60.0)
    params = GenParams(
        horizon_days=5, num_requests=1, num_trucks=10000, num_drivers=10000, seed=42
    )
    inst = generate(params, net)
    hits = sum(
        1 for v, d in zip(inst.trucks, inst.drivers) if v.location == d.location
    )
    assert 0.78 <= hits / 10000 <= 0.82


def test_driver_tail_does_not_disturb_requests():
    # drawing extra drivers must keep requests and trucks identical
    base = GenParams(horizon_days=7, num_requests=6, num_trucks=3, num_drivers=6, seed=5)
    more = GenParams(horizon_days=7, num_requests=6, num_trucks=3, num_drivers=9, seed=5)
    a, b = generate(base), generate(more)
    assert a.requests == b.requests
    assert a.trucks == b.trucks
    assert a.drivers == b.drivers[: len(a.drivers)]


def test_instance_round_trip(tmp_path):
    params = GenParams(horizon_days=6, num_requests=5, num_trucks=2, num_drivers=4, seed=31)
    inst = generate(params)
    path = tmp_path / "inst.json"
    save_instance(inst, str(path))
    assert load_instance(str(path)) == inst


def test_plan_and_schedule_round_trip(tmp_path):
    params = GenParams(horizon_days=6, num_requests=3, num_trucks=2, num_drivers=4, seed=8)
    inst = generate(params)
    plan = route_trucks(inst, 0.25, 0.2, seed=4)
    ppath = tmp_path / "plan.json"
    save_plan(plan, str(ppath))
    assert load_plan(str(ppath), inst) == plan
    sched, _ = grasp(plan, inst, SearchConfig(seed=0, max_iterations=10))
    assert sched is not None
    spath = tmp_path / "sched.json"
    save_schedule(sched, str(spath))
    assert load_schedule(str(spath), inst) == sched


def test_truncated_file_is_a_parse_error(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"schema_version": 1, "horizon')
    with pytest.raises(ParseError) as err:
        load_instance(str(path))
    assert "line" in str(err.value)


def test_missing_field_is_a_parse_error(tmp_path):
    path = tmp_path / "nofield.json"
    path.write_text(json.dumps({"schema_version": 1, "horizon_days": 5}))
    with pytest.raises(ParseError) as err:
        load_instance(str(path))
    assert "missing field" in str(err.value)


def test_wrong_schema_version(tmp_path):
    path = tmp_path / "v9.json"
    path.write_text(json.dumps({"schema_version": 9}))
    with pytest.raises(ParseError):
        load_instance(str(path))


def test_handwritten_minimal_instance(tmp_path):
    doc = {
        "schema_version": 1,
        "horizon_days": 4,
        "locations": ["x", "y"],
        "edges": [["x", "y", 180]],
        "speeds": {"truck": 90, "shuttle": 90},
        "requests": [
            {
                "id": "r0",
                "pickup_loc": "x",
                "delivery_loc": "y",
                "pickup_window": [8, 12],
                "delivery_window": [10, 16],
                "pickup_init_day": 0,
                "delivery_init_day": 0,
            }
        ],
        "trucks": [{"id": "v0", "location": "x"}],
        "drivers": [{"id": "d0", "location": "x"}, {"id": "d1", "location": "y"}],
    }
    path = tmp_path / "mini.json"
    path.write_text(json.dumps(doc))
    inst = load_instance(str(path))
    plan = route_trucks(inst, 0.25, 0.0, seed=0)
    assert len(plan.tasks) == 3  # pickup, one trip segment, delivery
    from truckcrew.model import plan_violations

    assert plan_violations(plan) == []


def test_generated_instances_route_cleanly():
    from truckcrew.model import plan_violations

    for seed in range(12):
        params = GenParams(
            horizon_days=7, num_requests=6, num_trucks=3, num_drivers=6, seed=seed
        )
        inst = generate(params)
        plan = route_trucks(inst, 0.25, 0.2, seed=seed)
        assert plan_violations(plan) == []
