import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nightsched.model import (
    Instance,
    NightPlan,
    Observation,
    PlacedObservation,
    Schedule,
    etg_from_gains,
    etg_from_tails,
    expected_total_gain,
    gain_curve,
    night_gain,
    tail_probabilities,
    validate_instance,
    validate_schedule,
)

from conftest import probability_vectors, counterexample_instance


def plan(*pairs):
    return NightPlan(tuple(PlacedObservation(i, s) for i, s in pairs))


GREEDY = Schedule((plan(("C", 0), ("D", 1)), plan(("A", 0)), plan(("B", 1))))
ALTERNATIVE = Schedule((plan(("C", 0), ("B", 1)), plan(("A", 0), ("D", 2)), NightPlan()))


def test_counterexample_instance_is_valid(counterexample):
    assert validate_instance(counterexample).ok


def test_release_not_before_deadline_is_reported():
    inst = Instance(1, (Observation("x", 2, 2, 1, 1),), (0.0, 1.0))
    report = validate_instance(inst)
    assert not report.ok
    assert "window" in report.kinds()
    assert report.violations[0].observation_id == "x"


def test_probability_sum_is_reported():
    inst = Instance(1, (), (0.5, 0.48))
    assert "probability_sum" in validate_instance(inst).kinds()


def test_other_instance_violations():
    inst = Instance(2, (Observation("a", 0, 2, 3, 0), Observation("a", 0, 1, 1, 1)), (0.5, 0.5))
    kinds = validate_instance(inst).kinds()
    assert {"processing", "gain", "duplicate_id", "probability_length"} <= kinds


def test_greedy_night_one_is_valid(counterexample):
    sched = Schedule((plan(("C", 0), ("D", 1)), NightPlan(), NightPlan()))
    assert validate_schedule(counterexample, sched).ok


def test_overlap_is_reported(counterexample):
    sched = Schedule((plan(("A", 0), ("C", 1)), NightPlan(), NightPlan()))
    assert "overlap" in validate_schedule(counterexample, sched).kinds()


def test_duplicate_across_nights_is_reported(counterexample):
    sched = Schedule((plan(("C", 0)), plan(("C", 0)), NightPlan()))
    assert "duplicate" in validate_schedule(counterexample, sched).kinds()


def test_unknown_id_is_its_own_kind(counterexample):
    sched = Schedule((plan(("Z", 0)), NightPlan(), NightPlan()))
    assert validate_schedule(counterexample, sched).kinds() == {"unknown_id"}


def test_window_violations(counterexample):
    sched = Schedule((plan(("B", 0)), plan(("C", 1), ("D", 2)), plan(("A", 2))))
    kinds = validate_schedule(counterexample, sched).kinds()
    assert {"release", "deadline"} <= kinds


@pytest.mark.parametrize("night, expected", [
    (plan(("C", 0), ("D", 1)), 4),
    (NightPlan(), 0),
    (plan(("C", 0), ("B", 1)), 3),
])
def test_night_gain(counterexample, night, expected):
    assert night_gain(night, counterexample) == expected


def test_etg_counterexample():
    assert expected_total_gain(counterexample_instance(), ALTERNATIVE) == 6.0
    assert expected_total_gain(counterexample_instance((1.0, 0.0, 0.0, 0.0)), GREEDY) == 0.0
    half = counterexample_instance((0.0, 0.5, 0.5, 0.0))
    assert expected_total_gain(half, GREEDY) == pytest.approx(4.5)


@pytest.mark.parametrize("pi, expected", [
    ((0.1, 0.3, 0.2, 0.2, 0.2), (0.9, 0.6, 0.4, 0.2)),
    ((0.0, 0.0, 0.0, 1.0), (1.0, 1.0, 1.0)),
    ((1.0, 0.0, 0.0), (0.0, 0.0)),
])
def test_tail_probabilities(pi, expected):
    assert tail_probabilities(pi) == pytest.approx(expected, abs=1e-12)


def test_gain_curve_examples(counterexample):
    assert gain_curve(counterexample, [4, 1, 1]).cumulative == (0, 4, 5, 6)
    assert gain_curve(counterexample, [0, 0, 0]).cumulative == (0, 0, 0, 0)
    assert gain_curve(counterexample, [3, 3, 0]).cumulative == (0, 3, 6, 6)
    assert gain_curve(counterexample, [3, 3, 0]).area() == 6.0


def test_gain_curve_rejects_wrong_length(counterexample):
    with pytest.raises(ValueError):
        gain_curve(counterexample, [1, 2])


@st.composite
def gains_and_pi(draw):
    nights = draw(st.integers(1, 6))
    gains = draw(st.lists(st.integers(0, 30), min_size=nights, max_size=nights))
    return gains, draw(probability_vectors(nights))


@given(gains_and_pi())
def test_double_sum_equals_tail_form(data):
    gains, pi = data
    assert etg_from_gains(gains, pi) == pytest.approx(
        etg_from_tails(gains, tail_probabilities(pi)), abs=1e-9)


@given(gains_and_pi())
def test_curve_monotone_and_area_identity(data):
    gains, pi = data
    inst = Instance(len(gains), (), pi)
    curve = gain_curve(inst, gains)
    assert all(a <= b for a, b in zip(curve.cumulative, curve.cumulative[1:]))
    assert curve.area() == pytest.approx(etg_from_gains(gains, pi), abs=1e-9)


@given(st.permutations(range(3)))
@settings(max_examples=10)
def test_night_permutation_keeps_placed_set(order):
    inst = counterexample_instance((0.0, 0.2, 0.3, 0.5))
    permuted = Schedule(tuple(GREEDY.nights[i] for i in order))
    assert sorted(permuted.placed_ids()) == sorted(GREEDY.placed_ids())
    gains = [night_gain(GREEDY.nights[i], inst) for i in order]
    assert expected_total_gain(inst, permuted) == pytest.approx(
        etg_from_gains(gains, inst.probabilities))
