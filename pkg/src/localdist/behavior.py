"""Bipartite behavior tables and the weighted least-squares objective.

A behavior is the conditional distribution P(r, s | a, b) of a bipartite box:
Alice chooses setting a and gets outcome r, Bob chooses b and gets s.  Tables
are stored dense as float64 arrays of shape (R, S, A, B), C order, so the flat
layout is r-major, then s, then a, then b.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, SchemaError

__all__ = [
    "BehaviorDims",
    "Behavior",
    "MeasurementWeights",
    "ValidationReport",
    "ns_dimension",
    "validate_behavior",
    "functional_value",
    "residual",
]


@dataclass(frozen=True)
class BehaviorDims:
    """Scenario dimensions: settings A, B and outcome counts R, S."""

    A: int
    B: int
    R: int
    S: int

    def __post_init__(self) -> None:
        for name in ("A", "B", "R", "S"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise DimensionMismatch(f"{name} must be a positive integer, got {v!r}")
        if self.R * self.S * self.A * self.B >= 2**62:
            raise DimensionMismatch("table size exceeds the supported index range")

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return (self.R, self.S, self.A, self.B)

    @property
    def table_size(self) -> int:
        return self.R * self.S * self.A * self.B


def ns_dimension(dims: BehaviorDims) -> int:
    """Affine dimension of the nonsignaling polytope for this scenario."""
    A, B, R, S = dims.A, dims.B, dims.R, dims.S
    return A * B * (R - 1) * (S - 1) + A * (R - 1) + B * (S - 1)


@dataclass(frozen=True)
class MeasurementWeights:
    """Per-setting-pair weights W(a, b).  Only the uniform weight 1/(A*B) is supported."""

    dims: BehaviorDims
    value: float

    @classmethod
    def uniform(cls, dims: BehaviorDims) -> "MeasurementWeights":
        return cls(dims, 1.0 / (dims.A * dims.B))


class Behavior:
    """A dense conditional table over a fixed scenario.

    The container carries no probability invariants of its own; residual
    tables (differences of behaviors) reuse it.  Use ``validate_behavior``
    to check normalization, nonnegativity, and nonsignaling.
    """

    __slots__ = ("dims", "table")

    def __init__(self, dims: BehaviorDims, table: np.ndarray):
        table = np.asarray(table, dtype=np.float64)
        if table.shape != dims.shape:
            raise DimensionMismatch(
                f"table shape {table.shape} does not match dims {dims.shape}"
            )
        table = np.ascontiguousarray(table)
        table.flags.writeable = False
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "table", table)

    def __setattr__(self, name, value):  # immutable value object
        raise AttributeError("Behavior is immutable")

    @classmethod
    def from_flat(cls, dims: BehaviorDims, flat) -> "Behavior":
        flat = np.asarray(flat, dtype=np.float64)
        if flat.size != dims.table_size:
            raise DimensionMismatch(
                f"flat table has {flat.size} entries, expected {dims.table_size}"
            )
        return cls(dims, flat.reshape(dims.shape))

    @property
    def flat(self) -> np.ndarray:
        return self.table.reshape(-1)

    def to_json_dict(self) -> dict:
        d = self.dims
        return {"A": d.A, "B": d.B, "R": d.R, "S": d.S, "p": self.flat.tolist()}

    @classmethod
    def from_json_dict(cls, doc: dict) -> "Behavior":
        try:
            dims = BehaviorDims(int(doc["A"]), int(doc["B"]), int(doc["R"]), int(doc["S"]))
            flat = doc["p"]
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"behavior document missing or malformed field: {exc}") from exc
        if not isinstance(flat, (list, tuple)):
            raise SchemaError("field 'p' must be a flat list of reals")
        try:
            return cls.from_flat(dims, np.asarray(flat, dtype=np.float64))
        except (ValueError, DimensionMismatch) as exc:
            raise SchemaError(str(exc)) from exc

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Behavior)
            and self.dims == other.dims
            and np.array_equal(self.table, other.table)
        )

    def __repr__(self) -> str:
        d = self.dims
        return f"Behavior(A={d.A}, B={d.B}, R={d.R}, S={d.S})"


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of the three behavior checks, with the worst violation of each."""

    normalized: bool
    nonnegative: bool
    nonsignaling: bool
    worst_normalization: float
    worst_negativity: float
    worst_signaling: float

    @property
    def ok(self) -> bool:
        return self.normalized and self.nonnegative and self.nonsignaling


def validate_behavior(P: Behavior, tol: float = 1e-9) -> ValidationReport:
    """Check normalization, nonnegativity, and both nonsignaling conditions.

    Alice's marginal sum_s P(r, s | a, b) must not depend on b, and
    symmetrically for Bob.  Violations are reported as absolute worst cases;
    each flag is monotone in tol.
    """
    t = P.table
    norms = t.sum(axis=(0, 1))  # (A, B)
    worst_norm = float(np.abs(norms - 1.0).max())
    worst_neg = float(max(0.0, -t.min()))
    marg_a = t.sum(axis=1)  # (R, A, B), must be constant in b
    marg_b = t.sum(axis=0)  # (S, A, B), must be constant in a
    worst_a = float((marg_a.max(axis=2) - marg_a.min(axis=2)).max()) if P.dims.B > 1 else 0.0
    worst_b = float((marg_b.max(axis=1) - marg_b.min(axis=1)).max()) if P.dims.A > 1 else 0.0
    worst_sig = max(worst_a, worst_b)
    return ValidationReport(
        normalized=worst_norm <= tol,
        nonnegative=worst_neg <= tol,
        nonsignaling=worst_sig <= tol,
        worst_normalization=worst_norm,
        worst_negativity=worst_neg,
        worst_signaling=worst_sig,
    )


def _check_same_dims(P: Behavior, rho: Behavior) -> None:
    if P.dims != rho.dims:
        raise DimensionMismatch(f"dims differ: {P.dims} vs {rho.dims}")


def functional_value(P: Behavior, rho: Behavior, W: MeasurementWeights) -> float:
    """Objective F = (1/2) sum_{r,s,a,b} [P - rho]^2 W(a, b)."""
    _check_same_dims(P, rho)
    diff = P.table - rho.table
    return 0.5 * W.value * float(np.dot(diff.reshape(-1), diff.reshape(-1)))


def residual(P: Behavior, rho: Behavior) -> Behavior:
    """Residual table g = P - rho.  Not a probability table; never validated."""
    _check_same_dims(P, rho)
    return Behavior(P.dims, P.table - rho.table)
