import pytest

from nightsched.model import Instance, Observation, validate_schedule
from nightsched.oracle import (
    OracleGuardError,
    brute_force_etg,
    brute_force_reactive,
    exhaustive_night,
)

from conftest import counterexample_instance


def test_exhaustive_night_counterexample():
    inst = counterexample_instance()
    plan = exhaustive_night([inst.by_id["C"], inst.by_id["D"]])
    assert sorted(plan.ids) == ["C", "D"]
    assert exhaustive_night([inst.by_id["A"], inst.by_id["B"]]) is None
    assert exhaustive_night([]).placements == ()


def test_brute_force_counterexample():
    value, schedule = brute_force_etg(counterexample_instance())
    assert value == 6.0
    assert validate_schedule(counterexample_instance(), schedule).ok
    assert [sorted(n.ids) for n in schedule.nights] == [["A", "D"], ["B", "C"], []]


def test_brute_force_half_half():
    value, _ = brute_force_etg(counterexample_instance((0.0, 0.5, 0.5, 0.0)))
    assert value == pytest.approx(4.5)


def test_guards():
    many = tuple(Observation(f"x{j}", 0, 4, 1, 1) for j in range(9))
    with pytest.raises(OracleGuardError):
        brute_force_etg(Instance(1, many, (0.0, 1.0)))
    wide = (Observation("w", 0, 9, 1, 1),)
    with pytest.raises(OracleGuardError):
        brute_force_etg(Instance(1, wide, (0.0, 1.0)))
    with pytest.raises(OracleGuardError):
        brute_force_reactive(counterexample_instance().observations, 4, 0.5)


def test_reactive_endpoints():
    obs = counterexample_instance().observations
    assert brute_force_reactive(obs, 3, 0.0) == 0.0
    assert brute_force_reactive(obs, 3, 1.0) == pytest.approx(6.0)
