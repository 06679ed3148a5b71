"""Oracle tests.

The CHSH-style query table g(r,s,a,b) = (2r-1)(2s-1)(-1)^{ab} and the PR box
recur throughout; both have small enough scenarios to enumerate exactly.
"""

from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from localdist import (
    Behavior,
    BehaviorDims,
    EnumerationCapExceeded,
    MeasurementWeights,
    OracleConfig,
    StrategyPair,
    block_maximize,
    brute_force_oracle,
    multistart_oracle,
    oracle_value,
    pr_box,
)
from localdist.oracle import sweep_alice, sweep_bob

D2 = BehaviorDims(2, 2, 2, 2)
W2 = MeasurementWeights.uniform(D2)


def chsh_query() -> Behavior:
    t = np.zeros((2, 2, 2, 2))
    for r, s, a, b in product(range(2), repeat=4):
        t[r, s, a, b] = (2 * r - 1) * (2 * s - 1) * (-1) ** (a * b)
    return Behavior(D2, t)


def zero_query(dims=D2) -> Behavior:
    return Behavior(dims, np.zeros(dims.shape))


def random_query(dims, seed) -> Behavior:
    # dyadic entries so sweep sums stay exact under permutation of terms
    rng = np.random.default_rng(seed)
    t = rng.integers(-8, 9, size=dims.shape) / 8.0
    return Behavior(dims, t)


class TestOracleValue:
    def test_zero_query(self):
        assert oracle_value(zero_query(), StrategyPair((0, 1), (1, 0)), W2) == 0.0

    def test_chsh_example(self):
        g = chsh_query()
        assert oracle_value(g, StrategyPair((1, 1), (1, 0)), W2) == 0.5

    def test_indicator_query(self):
        t = np.zeros((2, 2, 2, 2))
        t[:, 1, :, :] = 1.0  # rewards s = 1 regardless of anything else
        g = Behavior(D2, t)
        assert oracle_value(g, StrategyPair((0, 0), (1, 1)), W2) == 1.0
        assert oracle_value(g, StrategyPair((0, 0), (0, 0)), W2) == 0.0

    def test_matches_vertex_inner_product(self):
        g = random_query(BehaviorDims(2, 3, 3, 2), 11)
        W = MeasurementWeights.uniform(g.dims)
        from localdist import vertex_behavior

        sp = StrategyPair((2, 0), (1, 0, 1))
        direct = float(np.dot(g.flat, vertex_behavior(sp, g.dims).flat)) * W.value
        assert oracle_value(g, sp, W) == pytest.approx(direct, abs=1e-16)


class TestSweeps:
    def test_bob_zero_query_prefers_lowest(self):
        assert list(sweep_bob(zero_query(), (0, 0), W2)) == [0, 0]

    def test_bob_indicator(self):
        t = np.zeros((2, 2, 2, 2))
        t[:, 1, :, :] = 1.0
        assert list(sweep_bob(Behavior(D2, t), (0, 0), W2)) == [1, 1]

    def test_bob_chsh_tie_break(self):
        # for r = (1,1) the b = 1 column ties at zero, so the lower outcome wins
        assert list(sweep_bob(chsh_query(), (1, 1), W2)) == [1, 0]

    def test_alice_mirror(self):
        assert list(sweep_alice(chsh_query(), (1, 1), W2)) == [1, 0]

    def test_sweep_is_exact_best_reply(self):
        g = random_query(BehaviorDims(2, 2, 3, 3), 4)
        W = MeasurementWeights.uniform(g.dims)
        for r in product(range(3), repeat=2):
            s_star = tuple(int(v) for v in sweep_bob(g, r, W))
            best = max(
                (oracle_value(g, StrategyPair(r, s), W), s)
                for s in product(range(3), repeat=2)
            )
            assert oracle_value(g, StrategyPair(r, s_star), W) == pytest.approx(
                best[0], abs=1e-15
            )


class TestBlockMaximize:
    def test_zero_query_one_round(self):
        ans = block_maximize(zero_query(), (0, 0), W2)
        assert ans.value == 0.0
        assert ans.strategy == StrategyPair((0, 0), (0, 0))
        assert ans.sweeps == 1

    @pytest.mark.parametrize("seed_r", list(product(range(2), repeat=2)))
    def test_chsh_all_seeds_reach_optimum(self, seed_r):
        ans = block_maximize(chsh_query(), seed_r, W2)
        assert ans.value == 0.5

    def test_value_recomputed_from_strategy(self):
        g = random_query(D2, 9)
        ans = block_maximize(g, (1, 0), W2)
        assert ans.value == oracle_value(g, ans.strategy, W2)

    def test_sweep_limit_reported(self):
        ans = block_maximize(chsh_query(), (1, 1), W2, sweep_limit=1)
        assert ans.sweeps == 1
        assert ans.value == 0.5

    def test_monotone_in_rounds(self):
        g = random_query(BehaviorDims(3, 3, 2, 2), 21)
        W = MeasurementWeights.uniform(g.dims)
        prev = -np.inf
        for limit in (1, 2, 3, 5):
            val = block_maximize(g, (0, 0, 0), W, sweep_limit=limit).value
            assert val >= prev - 1e-16
            prev = val


class TestMultistart:
    def test_zero_query(self):
        ans = multistart_oracle(zero_query(), W2, OracleConfig(seed=0))
        assert ans.value == 0.0

    def test_pr_box_query(self):
        ans = multistart_oracle(pr_box(), W2, OracleConfig(seed=0))
        assert ans.value == pytest.approx(0.375, abs=1e-16)

    def test_trials_default_is_ns_dimension(self):
        assert OracleConfig().resolve_trials(D2) == 8
        assert OracleConfig(trials=3).resolve_trials(D2) == 3

    def test_config_validation(self):
        with pytest.raises(ValueError):
            OracleConfig(trials=0)
        with pytest.raises(ValueError):
            OracleConfig(sweep_limit=0)

    def test_deterministic_given_seed(self):
        g = random_query(BehaviorDims(3, 3, 2, 2), 2)
        W = MeasurementWeights.uniform(g.dims)
        a = multistart_oracle(g, W, OracleConfig(seed=42))
        b = multistart_oracle(g, W, OracleConfig(seed=42))
        assert a.strategy == b.strategy and a.value == b.value

    def test_exhausting_seeds_matches_brute_force(self):
        g = random_query(D2, 17)
        best = max(
            block_maximize(g, seed_r, W2).value
            for seed_r in product(range(2), repeat=2)
        )
        assert best == brute_force_oracle(g, W2).value


class TestBruteForce:
    def test_chsh(self):
        ans = brute_force_oracle(chsh_query(), W2)
        assert ans.value == 0.5

    def test_pr_box(self):
        ans = brute_force_oracle(pr_box(), W2)
        assert ans.value == pytest.approx(0.375, abs=1e-16)
        assert ans.strategy == StrategyPair((0, 0), (0, 0))  # first optimum in scan order

    def test_zero_query_tie_break(self):
        ans = brute_force_oracle(zero_query(), W2)
        assert ans.strategy == StrategyPair((0, 0), (0, 0))

    def test_cap(self):
        big = BehaviorDims(16, 16, 4, 4)
        g = Behavior(big, np.zeros(big.shape))
        with pytest.raises(EnumerationCapExceeded):
            brute_force_oracle(g, MeasurementWeights.uniform(big), cap=1 << 20)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from([(2, 2, 2, 2), (1, 3, 2, 2), (2, 2, 3, 2)]))
def test_multistart_never_beats_brute_force(seed, dims_tuple):
    dims = BehaviorDims(*dims_tuple)
    g = random_query(dims, seed)
    W = MeasurementWeights.uniform(dims)
    ms = multistart_oracle(g, W, OracleConfig(seed=seed))
    bf = brute_force_oracle(g, W)
    assert ms.value <= bf.value + 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31))
def test_shift_invariance(seed):
    # adding a constant to every entry shifts the optimum by that constant
    # and leaves the argmax alone (entries and shift are exactly representable)
    dims = BehaviorDims(2, 2, 2, 2)
    g = random_query(dims, seed)
    shifted = Behavior(dims, g.table + 0.5)
    W = MeasurementWeights.uniform(dims)
    a = brute_force_oracle(g, W)
    b = brute_force_oracle(shifted, W)
    assert b.strategy == a.strategy
    assert b.value == a.value + 0.5
