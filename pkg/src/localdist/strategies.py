"""Deterministic strategies and the local cone they generate.

A deterministic strategy pair assigns one outcome per setting on each side.
Its behavior table V(r, s | a, b) = [r == r_a][s == s_b] is a vertex of the
local polytope; nonnegative mixtures of vertices form the local cone.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .behavior import Behavior, BehaviorDims
from .errors import DimensionMismatch

__all__ = [
    "StrategyPair",
    "WeightedVertexSet",
    "vertex_behavior",
    "local_mixture",
    "strategies_rank",
]


@dataclass(frozen=True)
class StrategyPair:
    """Outcome assignments r_a for Alice and s_b for Bob, one per setting."""

    r: tuple[int, ...]
    s: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "r", tuple(int(v) for v in self.r))
        object.__setattr__(self, "s", tuple(int(v) for v in self.s))

    def check_dims(self, dims: BehaviorDims) -> None:
        if len(self.r) != dims.A or len(self.s) != dims.B:
            raise DimensionMismatch(
                f"strategy lengths ({len(self.r)}, {len(self.s)}) do not match "
                f"settings ({dims.A}, {dims.B})"
            )
        if any(v < 0 or v >= dims.R for v in self.r) or any(
            v < 0 or v >= dims.S for v in self.s
        ):
            raise DimensionMismatch("strategy outcome out of range")

    def to_json_dict(self) -> dict:
        return {"r": list(self.r), "s": list(self.s)}


def vertex_behavior(sp: StrategyPair, dims: BehaviorDims) -> Behavior:
    """Deterministic behavior V(r, s | a, b) = [r == r_a][s == s_b]."""
    sp.check_dims(dims)
    t = np.zeros(dims.shape)
    r = np.asarray(sp.r)
    s = np.asarray(sp.s)
    aa = np.arange(dims.A)[:, None]
    bb = np.arange(dims.B)[None, :]
    t[r[:, None], s[None, :], aa, bb] = 1.0
    return Behavior(dims, t)


def gather_indices(pairs, dims: BehaviorDims) -> np.ndarray:
    """Flat table indices of the single nonzero per (a, b) block, per strategy.

    Returns an int array of shape (K, A*B); row k lists, for each setting
    pair, the flat position of (r_a, s_b, a, b) in the dense table.  This is
    the hot-path representation used for mixtures and functional gathers.
    """
    R, S, A, B = dims.shape
    r_arr = np.empty((len(pairs), A), dtype=np.int64)
    s_arr = np.empty((len(pairs), B), dtype=np.int64)
    for k, sp in enumerate(pairs):
        sp.check_dims(dims)
        r_arr[k] = sp.r
        s_arr[k] = sp.s
    aa = np.arange(A)[None, :, None]
    bb = np.arange(B)[None, None, :]
    idx = ((r_arr[:, :, None] * S + s_arr[:, None, :]) * A + aa) * B + bb
    return idx.reshape(len(pairs), A * B)


def mixture_flat(idx: np.ndarray, weights: np.ndarray, dims: BehaviorDims) -> np.ndarray:
    """Flat table of sum_k weights[k] * V_k given gather indices for the V_k."""
    if idx.shape[0] != weights.shape[0]:
        raise DimensionMismatch("weights length does not match strategy count")
    if idx.shape[0] == 0:
        return np.zeros(dims.table_size)
    per_entry = np.repeat(np.asarray(weights, dtype=np.float64), idx.shape[1])
    return np.bincount(idx.reshape(-1), weights=per_entry, minlength=dims.table_size)


@dataclass(frozen=True)
class WeightedVertexSet:
    """An ordered set of distinct strategy pairs with nonnegative weights."""

    dims: BehaviorDims
    pairs: tuple[StrategyPair, ...]
    weights: np.ndarray = field(compare=False)

    def __post_init__(self) -> None:
        pairs = tuple(self.pairs)
        w = np.array(self.weights, dtype=np.float64)
        if w.shape != (len(pairs),):
            raise DimensionMismatch("weights length does not match strategy count")
        if len(set(pairs)) != len(pairs):
            raise DimensionMismatch("duplicate strategy pair in vertex set")
        for sp in pairs:
            sp.check_dims(self.dims)
        if w.size and w.min() < 0.0:
            raise DimensionMismatch("negative weight in vertex set")
        w.flags.writeable = False
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return len(self.pairs)

    def __contains__(self, sp: StrategyPair) -> bool:
        return sp in set(self.pairs)

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    def with_weights(self, weights) -> "WeightedVertexSet":
        return WeightedVertexSet(self.dims, self.pairs, weights)

    def support(self, threshold: float = 0.0) -> "WeightedVertexSet":
        keep = self.weights > threshold
        return WeightedVertexSet(
            self.dims,
            tuple(sp for sp, k in zip(self.pairs, keep) if k),
            self.weights[keep],
        )

    def add(self, sp: StrategyPair, weight: float = 0.0) -> "WeightedVertexSet":
        return WeightedVertexSet(
            self.dims, self.pairs + (sp,), np.append(self.weights, weight)
        )

    def mixture(self) -> Behavior:
        return local_mixture(self)

    def to_json_list(self) -> list:
        return [
            {"r": list(sp.r), "s": list(sp.s), "weight": float(w)}
            for sp, w in zip(self.pairs, self.weights)
        ]


def local_mixture(vs: WeightedVertexSet) -> Behavior:
    """Weighted vertex sum sum_k chi_k V_k; a point of the local cone.

    The result is normalized only when the weights sum to one; an empty set
    gives the zero table.
    """
    idx = gather_indices(vs.pairs, vs.dims)
    flat = mixture_flat(idx, vs.weights, vs.dims)
    return Behavior.from_flat(vs.dims, flat)


def strategies_rank(pairs, dims: BehaviorDims, pivot_tol: float = 1e-10) -> int:
    """Linear rank of the vertex behaviors, by modified Gram-Schmidt.

    Columns whose residual norm after projection falls below pivot_tol are
    treated as dependent.  Desk-scale helper; cost is O(K^2 * table).
    """
    basis: list[np.ndarray] = []
    for sp in pairs:
        v = vertex_behavior(sp, dims).flat.copy()
        for q in basis:
            v -= np.dot(q, v) * q
        nrm = float(np.linalg.norm(v))
        if nrm > pivot_tol:
            basis.append(v / nrm)
    return len(basis)
