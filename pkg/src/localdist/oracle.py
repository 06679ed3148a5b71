"""Best-vertex oracle: maximize G(r, s) = sum_ab g(r_a, s_b; a, b) W(a, b).

Over deterministic strategies this is the classical bound of the Bell
functional with coefficients g * W.  The heuristic alternates per-setting
argmax sweeps over Bob's and Alice's assignments from random seeds; the
exact oracle enumerates Alice's assignments and gives Bob his analytic
best reply, so its cost is R^A * S * A * B rather than R^A * S^B.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .behavior import Behavior, MeasurementWeights, ns_dimension
from .errors import DimensionMismatch, EnumerationCapExceeded
from .strategies import StrategyPair

__all__ = [
    "OracleConfig",
    "OracleAnswer",
    "oracle_value",
    "sweep_bob",
    "sweep_alice",
    "block_maximize",
    "multistart_oracle",
    "brute_force_oracle",
]

DEFAULT_ENUMERATION_CAP = 1 << 30


@dataclass(frozen=True)
class OracleConfig:
    """Multistart parameters.  trials=None means one trial per nonsignaling dimension."""

    trials: int | None = None
    seed: int = 0
    sweep_limit: int = 100

    def __post_init__(self) -> None:
        if self.trials is not None and self.trials < 1:
            raise ValueError("trials must be positive")
        if self.sweep_limit < 1:
            raise ValueError("sweep_limit must be positive")

    def resolve_trials(self, dims) -> int:
        return self.trials if self.trials is not None else ns_dimension(dims)


@dataclass(frozen=True)
class OracleAnswer:
    """Best strategy found and its functional value, recomputed exactly.

    sweeps counts full block-maximization rounds; a value equal to the sweep
    limit means the search was cut off rather than converged.
    """

    strategy: StrategyPair
    value: float
    sweeps: int = 0


def oracle_value(g: Behavior, sp: StrategyPair, W: MeasurementWeights) -> float:
    """G(r, s) for one strategy pair, as a direct weighted gather sum."""
    sp.check_dims(g.dims)
    A, B = g.dims.A, g.dims.B
    r = np.asarray(sp.r)
    s = np.asarray(sp.s)
    block = g.table[r[:, None], s[None, :], np.arange(A)[:, None], np.arange(B)[None, :]]
    return W.value * float(block.sum())


def _bob_table(g: Behavior) -> np.ndarray:
    # (A, R, S, B): contiguous gather target for fixed Alice assignments
    return np.ascontiguousarray(g.table.transpose(2, 0, 1, 3))


def _alice_table(g: Behavior) -> np.ndarray:
    # (B, S, R, A): contiguous gather target for fixed Bob assignments
    return np.ascontiguousarray(g.table.transpose(3, 1, 0, 2))


def _sweep_bob_batch(gT: np.ndarray, rbatch: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-b argmax replies for a batch of Alice assignments.

    Returns (sbatch, tab) where tab[n, s, b] = sum_a g(r_a, s, a, b).
    """
    A = gT.shape[0]
    tab = gT[np.arange(A)[None, :], rbatch].sum(axis=1)  # (N, S, B)
    return tab.argmax(axis=1), tab


def _sweep_alice_batch(gB: np.ndarray, sbatch: np.ndarray) -> np.ndarray:
    B = gB.shape[0]
    tab = gB[np.arange(B)[None, :], sbatch].sum(axis=1)  # (N, R, A)
    return tab.argmax(axis=1)


def _batch_values(tab: np.ndarray, sbatch: np.ndarray, w: float) -> np.ndarray:
    picked = np.take_along_axis(tab, sbatch[:, None, :], axis=1)[:, 0, :]
    return w * picked.sum(axis=1)


def sweep_bob(g: Behavior, r, W: MeasurementWeights) -> np.ndarray:
    """Optimal s_b = argmax_s sum_a g(r_a, s; a, b) W(a, b), ties to the lowest index."""
    r = np.asarray(r, dtype=np.int64)
    if r.shape != (g.dims.A,) or r.min(initial=0) < 0 or r.max(initial=0) >= g.dims.R:
        raise DimensionMismatch("Alice assignment does not match dims")
    s, _ = _sweep_bob_batch(_bob_table(g), r[None, :])
    return s[0]


def sweep_alice(g: Behavior, s, W: MeasurementWeights) -> np.ndarray:
    """Optimal r_a = argmax_r sum_b g(r, s_b; a, b) W(a, b), ties to the lowest index."""
    s = np.asarray(s, dtype=np.int64)
    if s.shape != (g.dims.B,) or s.min(initial=0) < 0 or s.max(initial=0) >= g.dims.S:
        raise DimensionMismatch("Bob assignment does not match dims")
    return _sweep_alice_batch(_alice_table(g), s[None, :])[0]


def _block_maximize_batch(
    g: Behavior, W: MeasurementWeights, rbatch: np.ndarray, sweep_limit: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray, int]:
    """Run alternating sweeps on a batch of seeds until no value changes.

    Values are compared exactly; converged trials are swept along (sweeps
    are idempotent at a fixed point).  Returns (r, s, values, rounds).
    """
    gT = _bob_table(g)
    gB = _alice_table(g)
    w = W.value
    r = rbatch
    s, tab = _sweep_bob_batch(gT, r)
    v = _batch_values(tab, s, w)
    rounds = 0
    while rounds < sweep_limit:
        r2 = _sweep_alice_batch(gB, s)
        s2, tab = _sweep_bob_batch(gT, r2)
        v2 = _batch_values(tab, s2, w)
        rounds += 1
        stable = np.array_equal(v2, v)
        r, s, v = r2, s2, v2
        if stable:
            break
    return r, s, v, rounds


def block_maximize(
    g: Behavior, seed_r, W: MeasurementWeights, sweep_limit: int = 100
) -> OracleAnswer:
    """Alternating per-setting maximization from one Alice seed (Bob sweeps first)."""
    seed = np.asarray(seed_r, dtype=np.int64)
    if seed.shape != (g.dims.A,):
        raise DimensionMismatch("seed length does not match Alice settings")
    r, s, _, rounds = _block_maximize_batch(g, W, seed[None, :], sweep_limit)
    sp = StrategyPair(tuple(r[0]), tuple(s[0]))
    return OracleAnswer(sp, oracle_value(g, sp, W), rounds)


def multistart_oracle(
    g: Behavior,
    W: MeasurementWeights,
    cfg: OracleConfig = OracleConfig(),
    rng: np.random.Generator | None = None,
) -> OracleAnswer:
    """Best block-maximization answer over independently seeded trials.

    Deterministic given the seed (or a caller-owned generator); ties are
    broken by the lowest trial index.  The returned value is recomputed
    exactly for the winning strategy.
    """
    dims = g.dims
    trials = cfg.resolve_trials(dims)
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    rbatch = rng.integers(0, dims.R, size=(trials, dims.A))
    r, s, values, rounds = _block_maximize_batch(g, W, rbatch, cfg.sweep_limit)
    k = int(values.argmax())
    sp = StrategyPair(tuple(r[k]), tuple(s[k]))
    return OracleAnswer(sp, oracle_value(g, sp, W), rounds)


def brute_force_oracle(
    g: Behavior, W: MeasurementWeights, cap: int = DEFAULT_ENUMERATION_CAP
) -> OracleAnswer:
    """Exact maximum by enumerating Alice assignments with Bob's best reply.

    Ties resolve to the first strategy in enumeration order (lexicographic
    Alice assignment, then lowest Bob outcome per setting).
    """
    dims = g.dims
    R, S, A, B = dims.shape
    n_alice = R**A
    if n_alice * (S**B) > cap:
        raise EnumerationCapExceeded(
            f"R^A * S^B = {n_alice * S**B} exceeds enumeration cap {cap}"
        )
    gT = _bob_table(g)
    w = W.value
    # keep batch work around a few million gathered elements
    batch = max(1, min(n_alice, (1 << 22) // max(1, A * S * B)))
    best_v = -np.inf
    best_r: np.ndarray | None = None
    best_s: np.ndarray | None = None
    for lo in range(0, n_alice, batch):
        hi = min(lo + batch, n_alice)
        rbatch = np.stack(
            np.unravel_index(np.arange(lo, hi), (R,) * A), axis=1
        ).astype(np.int64)
        s, tab = _sweep_bob_batch(gT, rbatch)
        v = _batch_values(tab, s, w)
        k = int(v.argmax())
        if v[k] > best_v:
            best_v = float(v[k])
            best_r = rbatch[k]
            best_s = s[k]
    sp = StrategyPair(tuple(best_r), tuple(best_s))
    return OracleAnswer(sp, oracle_value(g, sp, W), 0)
