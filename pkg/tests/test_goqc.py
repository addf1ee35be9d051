import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from contrast_subgraph.errors import GraphFormatError, SolverDivergence
from contrast_subgraph.goqc import (
    GoqcInstance,
    SolverConfig,
    edge_surplus,
    goqc_objective,
    hyperplane_round,
    local_search,
    rounding_probabilities,
    sdp_relaxation_value,
    sdp_solve,
    solve,
)
from contrast_subgraph.graphs import ObservationGraph, edge_count_induced
from contrast_subgraph.synth import PlantedSpec, brute_force, planted_dataset
from contrast_subgraph.summarize import build_difference, build_summary

from conftest import f2_instance, lab, random_instance


@pytest.mark.parametrize(
    "alpha,labels,expected",
    [(0.8, (1, 2, 4), 0.6), (0.8, (1, 2, 4, 5), 0.2), (0.5, (1, 2, 4, 5, 6), 2.0)],
)
def test_objective_fixture(alpha, labels, expected):
    assert goqc_objective(f2_instance("A-B", alpha), lab(*labels)) == pytest.approx(expected, abs=1e-9)


def test_objective_small_sets():
    inst = random_instance(0, 6)
    assert goqc_objective(inst, set()) == 0
    for v in range(6):
        assert goqc_objective(inst, {v}) == 0
    with pytest.raises(GraphFormatError):
        goqc_objective(inst, {6})


def test_edge_surplus():
    assert edge_surplus(3, 3, 0.8) == pytest.approx(0.6)
    assert edge_surplus(5, 0, 0.8) == 0
    assert edge_surplus(0, 2, 0.5) == -0.5


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 8), st.integers(0, 10_000), st.floats(0.05, 0.95))
def test_edge_surplus_matches_objective_on_indicator(n, seed, alpha):
    rng = np.random.default_rng(seed)
    a = np.triu(rng.random((n, n)) < 0.5, 1).astype(float)
    a = a + a.T
    g = ObservationGraph.from_adjacency(a)
    inst = GoqcInstance(a, alpha)
    s = set(np.flatnonzero(rng.random(n) < 0.5).tolist())
    assert edge_surplus(edge_count_induced(g, s), len(s), alpha) == pytest.approx(goqc_objective(inst, s))


def test_instance_validation():
    with pytest.raises(ValueError, match="symmetric"):
        GoqcInstance(np.array([[0, 1.0], [0, 0]]))
    with pytest.raises(ValueError, match="non-finite"):
        GoqcInstance(np.array([[0, np.nan], [np.nan, 0]]))
    inst = GoqcInstance(np.ones((3, 3)), 0.5)
    assert not np.any(np.diag(inst.w)) and not np.any(np.diag(inst.alpha))
    assert inst.alpha[0, 1] == 0.5


def test_local_search_all_negative():
    inst = GoqcInstance(np.zeros((6, 6)), 0.7)
    s, v = local_search(inst, None, SolverConfig(), np.random.default_rng(1))
    assert v == 0 and len(s) <= 1


def test_local_search_fixture_restarts():
    inst = f2_instance("A-B", 0.8)
    bf, _ = brute_force(inst)
    assert bf == pytest.approx(0.6)
    cfg = SolverConfig(restarts=20, method="local-search", rng_seed=0)
    _, value, _ = solve(inst, cfg)
    assert value == pytest.approx(0.6, abs=1e-9)


def test_local_search_planted_n14():
    hits = 0
    for seed in range(100):
        a, b = planted_dataset(PlantedSpec(n=14, k=5, rng_seed=seed))
        inst = GoqcInstance(build_difference(build_summary(a), build_summary(b)).d, 0.4)
        best, _ = brute_force(inst)
        _, v = local_search(inst, None, SolverConfig(), np.random.default_rng(seed))
        hits += v >= best - 0.01 * abs(best)
    assert hits >= 95


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 9), st.integers(0, 10_000))
def test_local_search_nonnegative_from_singleton(n, seed):
    inst = random_instance(seed, n)
    s, v = local_search(inst, None, SolverConfig(local_search_max_passes=5), np.random.default_rng(seed))
    assert v >= 0
    assert v == pytest.approx(goqc_objective(inst, s), abs=1e-9)


def test_local_search_from_start():
    inst = f2_instance("A-B", 0.8)
    s, v = local_search(inst, lab(1, 2, 4), SolverConfig(), np.random.default_rng(0))
    assert v == pytest.approx(0.6)


def test_sdp_zero_instance_terminates_at_once():
    inst = GoqcInstance(np.zeros((5, 5)), 0.0)
    V, it = sdp_solve(inst, SolverConfig(), return_iterations=True)
    assert it == 1
    np.testing.assert_allclose(np.linalg.norm(V, axis=1), 1.0)


def _pair_term(V):
    return (1 + V[1] @ V[0] + V[2] @ V[0] + V[1] @ V[2]) / 4


def test_sdp_positive_pair_aligns():
    inst = GoqcInstance(np.array([[0, 1.0], [1.0, 0]]), 0.0)
    V = sdp_solve(inst, SolverConfig(sdp_tol=1e-10, sdp_max_iters=2000))
    assert V.shape == (3, 3)
    assert _pair_term(V) >= 0.99


def test_sdp_negative_pair_vanishes():
    inst = GoqcInstance(np.array([[0, 0.5], [0.5, 0]]), 1.5)
    V = sdp_solve(inst, SolverConfig(sdp_tol=1e-10, sdp_max_iters=2000))
    assert _pair_term(V) <= 0.01


def test_sdp_rows_unit_and_relaxation_bounds_integer_optimum():
    inst = random_instance(4, 10)
    V = sdp_solve(inst, SolverConfig(rng_seed=3))
    np.testing.assert_allclose(np.linalg.norm(V, axis=1), 1.0, atol=1e-12)
    best, _ = brute_force(inst)
    # the relaxation is a maximization over a superset of the integer points
    assert sdp_relaxation_value(V, inst) >= best - 1e-6


def test_sdp_rank_default():
    cfg = SolverConfig()
    assert cfg.rank_for(12) == min(13, math.ceil(math.sqrt(26)) + 2)
    assert SolverConfig(sdp_rank=50).rank_for(3) == 4


def test_sdp_divergence_reported(monkeypatch):
    import contrast_subgraph.goqc as goqc

    real = goqc._sdp_value_grad
    calls = {"n": 0}

    def broken(*args):
        calls["n"] += 1
        value, grad = real(*args)
        return (np.nan if calls["n"] > 1 else value), grad

    monkeypatch.setattr(goqc, "_sdp_value_grad", broken)
    with pytest.raises(SolverDivergence, match="iteration 1"):
        sdp_solve(random_instance(0, 5))


def test_rounding_small_n_is_exhaustive():
    inst = GoqcInstance(np.array([[0, 1.0], [1.0, 0]]), 0.2)
    assert hyperplane_round(None, inst, 5) == {0, 1}
    assert hyperplane_round(None, GoqcInstance(np.zeros((1, 1))), 5) == frozenset()


def test_rounding_symmetric_when_vectors_equal():
    n = 6
    V = np.tile(np.array([1.0, 0.0, 0.0]), (n + 1, 1))
    r = np.array([0.3, -1.2, 0.4])
    p = rounding_probabilities(V, r)
    assert np.all(p == p[0])


def test_rounding_probability_monte_carlo():
    rng = np.random.default_rng(11)
    n, k = 9, 4
    V = rng.standard_normal((n + 1, k))
    V /= np.linalg.norm(V, axis=1, keepdims=True)
    r = rng.standard_normal(k) * 2.5
    expected = np.clip(V[1:] @ r / math.sqrt(4 * math.log(n)), -1, 1)
    expected = (1 + expected) / 2
    np.testing.assert_allclose(rounding_probabilities(V, r), expected)
    draws = 100_000
    freq = (rng.random((draws, n)) < rounding_probabilities(V, r)).mean(axis=0)
    sigma = np.sqrt(expected * (1 - expected) / draws)
    assert np.all(np.abs(freq - expected) <= 3 * sigma + 1e-12)


def test_rounding_then_local_search_fixture():
    inst = f2_instance("A-B", 0.8)
    cfg = SolverConfig(rounding_samples=50, restarts=20, method="sdp+local-search")
    s, v, _ = solve(inst, cfg)
    assert v == pytest.approx(0.6, abs=1e-9)


def test_solve_determinism():
    inst = random_instance(5, 10)
    for method in ("local-search", "sdp", "sdp+local-search"):
        cfg = SolverConfig(restarts=1, rng_seed=42, method=method)
        first, second = solve(inst, cfg), solve(inst, cfg)
        assert first[0] == second[0] and first[1] == second[1]
        assert first[2].to_dict() == second[2].to_dict()


def test_solve_parallel_matches_serial(monkeypatch):
    inst = random_instance(6, 12)
    cfg = SolverConfig(restarts=8, rng_seed=9)
    serial = solve(inst, cfg)
    monkeypatch.setenv("CS_THREADS", "4")
    parallel = solve(inst, cfg)
    assert serial[0] == parallel[0] and serial[2].to_dict() == parallel[2].to_dict()


def test_solve_fixture_b_minus_a():
    s, v, _ = solve(f2_instance("B-A", 0.8), SolverConfig(rng_seed=1))
    assert v == pytest.approx(0.2, abs=1e-9)
    assert s in {lab(1, 8), lab(1, 3), lab(2, 3)}


def test_solve_matches_brute_force_n12():
    hits = sum(
        abs(solve(random_instance(seed), SolverConfig(rng_seed=seed))[1] - brute_force(random_instance(seed))[0]) <= 1e-9
        for seed in range(10)
    )
    assert hits >= 9


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 10), st.integers(0, 10_000), st.sampled_from(["local-search", "sdp", "sdp+local-search"]))
def test_trace_invariants_and_oracle_dominance(n, seed, method):
    inst = random_instance(seed, n)
    s, v, trace = solve(inst, SolverConfig(restarts=3, rng_seed=seed, method=method))
    assert trace.best_value == max(trace.restart_values) == v
    assert goqc_objective(inst, s) == pytest.approx(v, abs=1e-9)
    assert brute_force(inst)[0] >= v - 1e-9


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(method="magic")
    with pytest.raises(ValueError):
        SolverConfig(restarts=0)
    with pytest.raises(ValueError):
        SolverConfig(sdp_rank=1)
