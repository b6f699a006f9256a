from dataclasses import replace

import pytest

from racreach.automaton import (
    Interval,
    Jump,
    Location,
    ModelError,
    Rac,
    activity,
    unroll,
    validate,
)
from racreach.modelio import parse_model
from racreach.stochastics import Exponential

U = Interval()
ZERO = Interval.point(0)


def m1(**changes) -> Rac:
    a = Location("A", (Interval(0, None),), (Interval.point(1),), (ZERO,))
    b = Location("B", (U,), (Interval.point(1),))
    jump = Jump("A", "B", (U,), (None,), "r")
    base = Rac(("x",), (a, b), (jump,), ("r",), {"r": Exponential(1.0)})
    return replace(base, **changes)


def errors(m):
    return [v for v in validate(m) if v.severity == "error"]


def test_interval_helpers():
    iv = Interval(0, 4)
    assert iv.contains(Interval(1, 2)) and not iv.contains(Interval(1, None))
    assert iv.contains(Interval(3, 1))  # empty set is contained in everything
    assert Interval(2, 1).is_empty() and U.is_universal()
    assert iv.intersect(Interval(2, None)) == Interval(2, 4)
    assert str(Interval(None, "1/2")) == "[-inf, 1/2]"


def test_m1_is_valid():
    assert validate(m1()) == []


def test_stochastic_guard_must_be_universal():
    bad = m1(jumps=(Jump("A", "B", (Interval(5, None),), (None,), "r"),))
    assert any("stochastic jump guard not universal" in v.message for v in errors(bad))


def test_init_outside_invariant():
    a = Location("A", (Interval(0, 4),), (Interval.point(1),), (Interval(5, 6),))
    m = m1(locations=(a, m1().locations[1]))
    assert any("not contained in the invariant" in v.message for v in errors(m))


@pytest.mark.parametrize(
    "changes,fragment",
    [
        (dict(clocks=("r", "r")), "duplicate clock"),
        (dict(clocks=("x",), distributions={"x": Exponential(1.0)}), "both as variable and clock"),
        (dict(distributions={}), "no distribution"),
        (dict(jumps=(Jump("A", "Z", (U,), (None,), "r"),)), "unknown source or target"),
        (dict(jumps=(Jump("A", "B", (U,), (None,), "q"),)), "not a declared clock"),
        (dict(jumps=(Jump("A", "B", (Interval(3, 1),), (None,)),)), "guard interval of x is empty"),
        (dict(jumps=(Jump("A", "B", (U,), (Interval(2, 1),), "r"),)), "reset interval of x is empty"),
    ],
)
def test_violations(changes, fragment):
    assert any(fragment in str(v) for v in errors(m1(**changes)))


def test_reset_must_land_in_target_invariant():
    b = Location("B", (Interval(0, 1),), (Interval.point(1),))
    m = m1(locations=(m1().locations[0], b), jumps=(Jump("A", "B", (U,), (Interval(0, 5),), "r"),))
    assert any("not inside the target invariant" in v.message for v in errors(m))


def test_blocking_face_is_a_warning():
    a = Location("A", (Interval(0, 4),), (Interval.point(1),), (ZERO,))
    m = m1(locations=(a, m1().locations[1]))
    found = validate(m)
    assert found and all(v.severity == "warning" for v in found)
    assert "upper face" in found[0].message


def test_activity_bits():
    bits = activity(m1())
    assert bits.active("A", "r") and not bits.active("B", "r")
    race = parse_model("race").rac
    ab = activity(race)
    assert ab.bits["A"] == (1, 1) and ab.bits["B"] == (0, 0) and ab.bits["C"] == (0, 0)


def test_unroll_copies_and_timer():
    u = unroll(m1(), 2)
    assert [c.name for c in u.copies] == ["r_0", "r_1", "r_2"]
    assert u.stochastic_dim == 3 and u.rac.variables == ("x", "T")
    assert all(d == Exponential(1.0) for d in u.distributions)
    assert len(u.rac.locations) == 2 and u.roots == ("A#0",)
    assert u.rac.jumps[0].event == "r_0"
    assert u.active_bits("A#0") == (1, 0, 0)
    assert u.active_bits("B#1") == (0, 0, 0)


def test_unroll_consumes_fresh_copies_on_loops():
    car = parse_model("car_like").rac
    u = unroll(car, 4)
    for j in u.rac.jumps:
        if j.event is None:
            continue
        src_path = u.path[j.source]
        used = sum(1 for name in src_path[1:] if name == "drive")
        # each entry into drive consumed one copy before this one
        assert j.event == f"c_{used}"
    # a copy is consumed at most once along every root-to-leaf path
    for loc in u.rac.locations:
        events, cur = [], loc.name
        while True:
            inc = [j for j in u.rac.jumps if j.target == cur]
            if not inc:
                break
            if inc[0].event:
                events.append(inc[0].event)
            cur = inc[0].source
        assert len(events) == len(set(events))


def test_unrolled_model_is_valid():
    for name in ("single_delay", "race", "window", "car_like"):
        u = unroll(parse_model(name).rac, 2)
        assert errors(u.rac) == []


def test_unroll_without_stochastic_jumps():
    a = Location("A", (U,), (Interval.point(1),), (ZERO,))
    b = Location("B", (U,), (Interval.point(1),))
    m = Rac(("x",), (a, b), (Jump("A", "B", (U,), (None,)), Jump("B", "A", (U,), (None,))))
    u = unroll(m, 3)
    assert u.stochastic_dim == 0 and len(u.rac.locations) == 4


def test_unroll_rejects_invalid_models():
    with pytest.raises(ModelError):
        unroll(m1(distributions={}), 1)
    with pytest.raises(ValueError):
        unroll(m1(), -1)


def test_jmp_zero_keeps_only_roots():
    u = unroll(m1(), 0)
    assert len(u.rac.locations) == 1 and not u.rac.jumps
