"""Acceptance checks; each prints one PASS/FAIL line in the terminal summary."""

import statistics
import time
from collections import Counter
from itertools import product

import numpy as np
import pytest
from scipy.stats import chisquare

from nightsched.campaign import run_campaign
from nightsched.generator import (
    GenParams,
    derive_seed,
    generate_instance,
    generate_observations,
    make_rng,
)
from nightsched.io import dumps_instance
from nightsched.model import expected_total_gain, validate_probabilities
from nightsched.oracle import brute_force_etg, brute_force_reactive
from nightsched.reactive import simulate_reactive, sweep_binomial
from nightsched.solver import (
    SolverConfig,
    check_decreasing_gain,
    normalize_night_order,
    solve_stochastic,
)
from nightsched.strategies import greedy_schedule, omniscient_curve, stochastic_outcome

from conftest import counterexample_instance

TOL = 1e-9
CONFIGS = [SolverConfig(use_dg=dg, use_bo=bo, use_icg=icg)
           for dg, bo, icg in product((True, False), repeat=3)]


def small_instances(count, master, max_nights=3, max_obs=6, max_len=4, model="uniform_normalized"):
    out = []
    for i in range(count):
        seed = derive_seed(master, i)
        rng = make_rng(seed)
        params = GenParams(int(rng.integers(1, max_nights, endpoint=True)),
                           int(rng.integers(1, max_obs, endpoint=True)),
                           int(rng.integers(1, max_len, endpoint=True)), 10, seed, model)
        out.append(generate_instance(params))
    return out


@pytest.mark.criterion(1, "counterexample golden values")
def test_counterexample_golden():
    start = time.perf_counter()
    inst = counterexample_instance()
    greedy = greedy_schedule(inst)
    omni = omniscient_curve(inst)
    stoch = stochastic_outcome(inst)
    assert omni.cumulative == (4, 6, 6)
    assert greedy.cumulative == (4, 5, 6)
    assert stoch.etg == 6.0
    assert greedy.etg == 5.0
    assert stoch.proven_optimal
    assert time.perf_counter() - start < 1.0


@pytest.mark.criterion(2, "solver matches brute force on 200 small instances")
def test_oracle_equivalence():
    instances = small_instances(200, 11)
    for inst in instances:
        result = solve_stochastic(inst)
        assert result.proven_optimal
        expected, _ = brute_force_etg(inst)
        assert abs(result.etg - expected) <= TOL, dumps_instance(inst)


@pytest.mark.criterion(3, "all 8 constraint toggles agree at M=3, S=12")
def test_toggle_equivalence(capsys):
    nodes = {i: [] for i in range(len(CONFIGS))}
    for i in range(50):
        inst = generate_instance(GenParams(3, 12, 4, 10, derive_seed(33, i)))
        values = []
        for k, cfg in enumerate(CONFIGS):
            result = solve_stochastic(inst, cfg)
            assert result.proven_optimal
            values.append(result.etg)
            nodes[k].append(result.nodes_explored)
        assert max(values) - min(values) <= TOL
    with capsys.disabled():
        print()
        for k, cfg in enumerate(CONFIGS):
            print(f"  DG={cfg.use_dg:d} BO={cfg.use_bo:d} ICG={cfg.use_icg:d} "
                  f"total nodes={sum(nodes[k])}")


@pytest.mark.criterion(4, "night reordering never lowers ETG; DG schedules have decreasing gains")
def test_dominance_and_ordering():
    instances = small_instances(100, 44) + [
        generate_instance(GenParams(3, 12, 4, 10, derive_seed(45, i))) for i in range(30)]
    for inst in instances:
        for cfg in (SolverConfig(), SolverConfig(use_dg=False)):
            result = solve_stochastic(inst, cfg)
            normalized = normalize_night_order(result.schedule, inst)
            assert expected_total_gain(inst, normalized) >= result.etg - TOL
            if cfg.use_dg:
                assert check_decreasing_gain(result.schedule, inst)


@pytest.mark.criterion(5, "greedy/stochastic/omniscient curve properties on 100 instances")
def test_curve_properties():
    instances = small_instances(60, 55) + [
        generate_instance(GenParams(3, 10, 4, 10, derive_seed(56, i))) for i in range(40)]
    for inst in instances:
        greedy = greedy_schedule(inst)
        stoch = stochastic_outcome(inst)
        omni = omniscient_curve(inst)
        assert greedy.etg <= stoch.etg + TOL
        assert stoch.etg <= omni.etg + TOL
        assert greedy.per_night_gains[0] == omni.per_night_gains[0]
        for outcome in (greedy, stoch, omni):
            cum = outcome.cumulative
            assert all(a <= b for a, b in zip(cum, cum[1:]))
            assert all(a <= b for a, b in zip(cum, omni.cumulative))
            area = sum(w * g for w, g in zip(inst.probabilities[1:], cum))
            assert abs(area - outcome.etg) <= TOL
            assert abs(outcome.curve(inst).area() - outcome.etg) <= TOL


@pytest.mark.criterion(6, "median nodes for all-nights-clear exceed one-night-clear at M=4, S=20")
def test_probability_difficulty(capsys):
    late, early = [], []
    for i in range(20):
        inst = generate_instance(GenParams(4, 20, 5, 10, derive_seed(66, i)))
        late.append(solve_stochastic(inst.with_probabilities((0, 0, 0, 0, 1))).nodes_explored)
        early.append(solve_stochastic(inst.with_probabilities((0, 1, 0, 0, 0))).nodes_explored)
    with capsys.disabled():
        print(f"\n  median nodes: pi=e4 {statistics.median(late)}, pi=e1 "
              f"{statistics.median(early)}")
    assert statistics.median(late) > statistics.median(early)


@pytest.mark.criterion(7, "reactive matches brute-force scenario walk on 60 instances")
def test_reactive_correctness():
    instances = small_instances(60, 77, max_obs=5, model="binomial")
    for inst in instances:
        result = simulate_reactive(inst.observations, inst.nights, inst.p_clear)
        expected = brute_force_reactive(inst.observations, inst.nights, inst.p_clear)
        assert abs(result.expected_gain - expected) <= TOL
        assert len(result.scenarios) == 2 ** inst.nights
        assert abs(sum(s.probability for s in result.scenarios) - 1.0) <= TOL
        assert result.expected_gain >= result.static_expected_gain - TOL
        assert abs(result.static_expected_gain - result.root.etg) <= TOL
        assert result.solver_calls <= 2 ** inst.nights - 1
        for point in sweep_binomial(inst.observations, inst.nights, [0.0, 1.0]):
            assert point.upgrade == 0.0


@pytest.mark.criterion(8, "desk-scale campaign shows each kind of gap")
def test_campaign_plausibility(capsys):
    instances = []
    for i in range(100):
        seed = derive_seed(2024, i)
        instances.append((f"instance_{i:04d}",
                          generate_instance(GenParams(3, 12, 4, 10, seed, "binomial")), seed))
    stats = run_campaign(instances, ["greedy", "stochastic", "omniscient", "reactive"],
                         SolverConfig(), workers=1)
    assert stats.n_unproven == 0
    pairs = stats.pairs
    with capsys.disabled():
        print()
        for key, p in pairs.items():
            print(f"  {key}: nonzero gap on {p.n_nonzero_gap}/100, "
                  f"mean improvement {p.mean_improvement}, mean upgrade {p.mean_upgrade}")
    assert pairs["stochastic_vs_greedy"].n_nonzero_gap > 0
    assert pairs["omniscient_vs_stochastic"].n_nonzero_gap > 0
    for r in stats.records:
        assert r.etg["reactive"] >= r.etg["stochastic"] - TOL
    assert pairs["reactive_vs_stochastic"].n_nonzero_gap > 0


@pytest.mark.criterion(9, "generator uniformity, valid probabilities, reproducible bytes")
def test_generator_statistics():
    for len_night in (4, 6):
        obs = generate_observations(10_000, len_night, 10, make_rng(9 + len_night))
        counts = Counter((o.release, o.deadline) for o in obs)
        cells = [(r, d) for r in range(len_night + 1) for d in range(r + 1, len_night + 1)]
        assert set(counts) <= set(cells)
        observed = np.array([counts[c] for c in cells])
        assert chisquare(observed).pvalue > 0.001

    for i in range(300):
        model = "binomial" if i % 2 else "uniform_normalized"
        params = GenParams(1 + i % 5, 5, 4, 10, derive_seed(99, i), model)
        inst = generate_instance(params)
        assert validate_probabilities(inst.probabilities).ok
        assert dumps_instance(inst) == dumps_instance(generate_instance(params))
