import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from states import perturbed_states
from conftest import fixture_graph
from pvbqc.errors import DomainMismatch, OddBatch, ThresholdOutOfRange
from pvbqc.graph import build_colored_graph, standard_graph
from pvbqc.stabsim import Ensemble, PauliString, StabilizerTableau, apply_pauli, fidelity_oracle, prepare_graph_state
from pvbqc.witness import (
    SettingOutcome,
    compute_Mj,
    fidelity_from_witness,
    measure_setting,
    pass_probability,
    run_verification,
    setting_for_color,
    witness_expectation,
)


def exact_trace_W(g, psi_list, weights):
    W = oracles.witness_matrix(g.n, g.edges, g.s1, g.s2)
    return sum(w * np.vdot(p, W @ p).real for w, p in zip(weights, psi_list))


def z_on(g, vertex):
    return apply_pauli(prepare_graph_state(g), PauliString.single(g.n, vertex - 1, "Z"))


# settings ------------------------------------------------------------------


def test_setting_examples():
    s = setting_for_color(standard_graph("path", 3), 2)
    assert s.basis_map == {1: "Z", 2: "X", 3: "Z"}
    s = setting_for_color(standard_graph("even_cycle", 6), 1)
    assert s.x_vertices == {1, 3, 5} and s.local_measurements == 6
    s = setting_for_color(build_colored_graph(1, []), 1)
    assert s.basis_map == {1: "X"}


def test_honest_outcomes_satisfy_stabilizers(fixture, rng):
    g = fixture
    for j in (1, 2):
        for _ in range(30):
            out = measure_setting(prepare_graph_state(g), setting_for_color(g, j), rng)
            assert set(out.x) == g.color_class(j)
            assert compute_Mj(g, out) == 1


def test_z_error_fails_deterministically(rng):
    g = standard_graph("even_cycle", 6)
    for _ in range(30):
        out = measure_setting(z_on(g, 1), setting_for_color(g, 1), rng)
        assert out.x[1] * out.z[2] * out.z[6] == -1
        assert compute_Mj(g, out) == 0


def test_product_zero_x_outcomes_are_uniform():
    g = standard_graph("even_cycle", 6)
    rng = np.random.default_rng(11)
    xs = np.array([list(measure_setting(StabilizerTableau.zero_state(6), setting_for_color(g, 1), rng).x.values()) for _ in range(4000)])
    assert np.all(np.abs(xs.mean(axis=0)) < 3 / np.sqrt(4000))


def test_compute_Mj_examples():
    g = standard_graph("path", 3)
    ones = SettingOutcome(1, {1: 1, 3: 1}, {2: 1})
    assert compute_Mj(g, ones) == 1
    assert compute_Mj(g, SettingOutcome(1, {1: -1, 3: 1}, {2: 1})) == 0
    # z_2 = -1 flips both factors, so the product survives
    assert compute_Mj(g, SettingOutcome(1, {1: -1, 3: -1}, {2: -1})) == 1
    with pytest.raises(DomainMismatch):
        compute_Mj(g, SettingOutcome(1, {1: 1}, {2: 1, 3: 1}))
    with pytest.raises(DomainMismatch):
        compute_Mj(g, SettingOutcome(2, {1: 1, 3: 1}, {2: 1}))


# witness -------------------------------------------------------------------


def test_witness_on_graph_state(fixture):
    g = fixture
    assert witness_expectation(prepare_graph_state(g), g) == pytest.approx(-1.0, abs=1e-9)
    psi = oracles.graph_state(g.n, g.edges)
    assert exact_trace_W(g, [psi], [1.0]) == pytest.approx(-1.0, abs=1e-9)


def test_witness_maximally_mixed():
    g = build_colored_graph(2, [(1, 2)])
    assert witness_expectation(Ensemble.maximally_mixed(2), g) == pytest.approx(1.0)
    g6 = standard_graph("even_cycle", 6)
    expected = 3 - 2 * (2.0**-3 + 2.0**-3)
    assert witness_expectation(Ensemble.maximally_mixed(6), g6) == pytest.approx(expected)


def test_witness_x_error_on_p3():
    g = standard_graph("path", 3)
    bad = apply_pauli(prepare_graph_state(g), PauliString.single(3, 0, "X"))
    # X_1 anticommutes with g_2 = Z_1 X_2 Z_3 (vertex 2 is in S_2), commutes with g_1, g_3
    assert pass_probability(bad, g, 1) == pytest.approx(1.0)
    assert pass_probability(bad, g, 2) == pytest.approx(0.0, abs=1e-12)
    assert witness_expectation(bad, g) == pytest.approx(1.0)


@pytest.mark.parametrize("trW,bound", [(-1, 1), (1, 0), (0, 0.5)])
def test_fidelity_from_witness(trW, bound):
    assert fidelity_from_witness(trW) == bound


def test_witness_matches_dense_W_matrix(fixture):
    g = fixture
    rng = np.random.default_rng(5)
    for s in perturbed_states(g, rng, 24):
        assert witness_expectation(s, g) == pytest.approx(exact_trace_W(g, [s.amplitudes], [1.0]), abs=1e-9)


@st.composite
def ensembles(draw):
    name = draw(st.sampled_from(["P3", "C6", "grid2x3"]))
    g = fixture_graph(name)
    seed = draw(st.integers(0, 2**32 - 1))
    size = draw(st.integers(1, 3))
    rng = np.random.default_rng(seed)
    states = perturbed_states(g, rng, 4)
    picks = [states[i] for i in rng.integers(4, size=size)]
    w = rng.dirichlet(np.ones(size))
    return g, Ensemble(picks, list(w / w.sum()))


@given(ensembles())
@settings(max_examples=150, deadline=None)
def test_witness_bound_is_sound(case):
    g, ens = case
    trW = witness_expectation(ens, g)
    assert fidelity_from_witness(trW) <= fidelity_oracle(ens, g) + 1e-9


def test_mean_Mj_matches_projector(rng):
    g = standard_graph("path", 3)
    # half the copies carry X on vertex 2 (fails setting 1 only)
    ens = Ensemble([prepare_graph_state(g), apply_pauli(prepare_graph_state(g), PauliString.single(3, 1, "X"))], [0.5, 0.5])
    for j in (1, 2):
        expect = pass_probability(ens, g, j)
        shots = 3000
        ms = []
        for _ in range(shots):
            state = ens.states[int(rng.random() < 0.5)].copy()
            ms.append(compute_Mj(g, measure_setting(state, setting_for_color(g, j), rng)))
        se = np.sqrt(max(expect * (1 - expect), 1e-12) / shots)
        assert abs(np.mean(ms) - expect) <= 3 * se + 1e-12


# batch verification --------------------------------------------------------


def test_honest_batch_accepted(rng):
    g = standard_graph("even_cycle", 6)
    for C in (0, 0.5, 5):
        v = run_verification([prepare_graph_state(g) for _ in range(20)], g, C, rng)
        assert (v.K1, v.K2, v.accepted) == (0, 0, True)
        assert len(v.group1) == len(v.group2) == 10
        assert sorted(v.group1 + v.group2) == list(range(20))


def test_z_errors_fail_group_one(rng):
    g = standard_graph("path", 3)
    K = 8
    v = run_verification([z_on(g, 1) for _ in range(2 * K)], g, K - 0.5, rng)
    assert v.K1 == K and v.K2 == 0 and not v.accepted


def test_single_pair_always_accepted(rng):
    g = standard_graph("path", 3)
    for _ in range(20):
        assert run_verification([StabilizerTableau.zero_state(3) for _ in range(2)], g, 2, rng).accepted


def test_batch_errors(rng):
    g = standard_graph("path", 3)
    with pytest.raises(OddBatch):
        run_verification([prepare_graph_state(g) for _ in range(3)], g, 1, rng)
    with pytest.raises(OddBatch):
        run_verification([], g, 0, rng)
    with pytest.raises(ThresholdOutOfRange):
        run_verification([prepare_graph_state(g) for _ in range(4)], g, 5, rng)
    with pytest.raises(ThresholdOutOfRange):
        run_verification([prepare_graph_state(g) for _ in range(4)], g, -1, rng)


@given(st.lists(st.booleans(), min_size=2, max_size=24).filter(lambda b: len(b) % 2 == 0), st.integers(0, 2**32 - 1), st.randoms())
@settings(max_examples=60, deadline=None)
def test_permutation_invariance(bad, seed, pyrandom):
    """Shuffling registers within each group leaves K1, K2 unchanged."""
    g = standard_graph("path", 3)
    make = lambda b: z_on(g, 1) if b else prepare_graph_state(g)  # noqa: E731
    v = run_verification([make(b) for b in bad], g, len(bad), np.random.default_rng(seed))
    order = list(range(len(bad)))
    g1, g2 = list(v.group1), list(v.group2)
    s1, s2 = g1[:], g2[:]
    pyrandom.shuffle(s1)
    pyrandom.shuffle(s2)
    for a, b in zip(g1 + g2, s1 + s2):
        order[a] = b
    w = run_verification([make(bad[i]) for i in order], g, len(bad), np.random.default_rng(seed))
    assert w.group1 == v.group1
    assert (w.K1, w.K2) == (v.K1, v.K2)


@given(st.integers(0, 2**32 - 1), st.floats(0, 12), st.floats(0, 12))
@settings(max_examples=60, deadline=None)
def test_threshold_monotone(seed, c1, c2):
    g = standard_graph("path", 3)
    regs = [StabilizerTableau.zero_state(3) for _ in range(12)]
    v = run_verification(regs, g, min(c1, c2), np.random.default_rng(seed))
    if v.accepted:
        assert v.accepts(max(c1, c2))
    assert v.accepted == (v.K1 + v.K2 <= v.C)
    assert 0 <= v.K1 <= 6 and 0 <= v.K2 <= 6


def test_verdict_record(rng):
    g = standard_graph("path", 3)
    v = run_verification([z_on(g, 1) for _ in range(4)], g, 4, rng, seed=99)
    rec = v.to_record()
    assert rec["group_sizes"] == [2, 2] and rec["seed"] == 99
    assert sorted(rec["failed"]) == sorted(v.group1)
