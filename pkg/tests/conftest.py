"""Shared fixtures: a bank of certified solves reused across test modules.

Solving is the expensive part, so the bank is session-scoped; individual
tests pick the cases they need by name.
"""

import math
from dataclasses import dataclass

import pytest

from localdist import (
    Behavior,
    BehaviorDims,
    SolveOptions,
    SolveReport,
    compute_distance,
    planar_family,
    pr_box,
    qubit_behavior,
    random_local_mixture,
    reference_distance,
    TwoQubitState,
)

# keep exact enumeration feasible inside the fixture budget
REFERENCE_VERTEX_CAP = 10_000


@dataclass(frozen=True)
class SolvedCase:
    name: str
    behavior: Behavior
    opts: SolveOptions
    report: SolveReport
    vertex_count: int
    f_reference: float | None


def _quantum(gamma, m, plane, kind="pure"):
    state = TwoQubitState.pure(gamma) if kind == "pure" else TwoQubitState.werner(gamma)
    alice = planar_family(m, plane)
    bob = planar_family(m, plane, offset=math.pi / (2 * m))
    return qubit_behavior(state, alice, bob)


def _case_specs():
    yield "pr-box", pr_box(), SolveOptions(eps=1e-6, oracle_mode="certify")
    yield (
        "pure-1.0-m4-xy",
        _quantum(1.0, 4, "xy"),
        SolveOptions(eps=1e-5, oracle_mode="certify"),
    )
    yield (
        "pure-0.8-m3-xz",
        _quantum(0.8, 3, "xz"),
        SolveOptions(eps=1e-5, oracle_mode="certify"),
    )
    yield (
        "werner-0.9-m2-xy",
        _quantum(0.9, 2, "xy", kind="werner"),
        SolveOptions(eps=1e-6, oracle_mode="certify"),
    )
    yield (
        "werner-0.5-m2-xy",
        _quantum(0.5, 2, "xy", kind="werner"),
        SolveOptions(eps=1e-6, oracle_mode="certify"),
    )
    yield (
        "mixture-3322-k4",
        random_local_mixture(BehaviorDims(3, 3, 2, 2), 4, 5),
        SolveOptions(eps=1e-6, oracle_mode="certify"),
    )
    yield (
        "pure-0.5-m10-xy",
        _quantum(0.5, 10, "xy"),
        SolveOptions(eps=1e-5, oracle_mode="certify"),
    )


@pytest.fixture(scope="session")
def solved_cases() -> tuple[SolvedCase, ...]:
    bank = []
    for name, P, opts in _case_specs():
        d = P.dims
        n_vertices = d.R**d.A * d.S**d.B
        report = compute_distance(P, opts)
        f_ref = reference_distance(P) if n_vertices <= REFERENCE_VERTEX_CAP else None
        bank.append(SolvedCase(name, P, opts, report, n_vertices, f_ref))
    return tuple(bank)


@pytest.fixture(scope="session")
def harvested_queries():
    """Residual tables sent to the oracle during real solves, for replay tests."""
    queries = []
    for gamma, m in ((1.0, 10), (0.7, 8)):
        P = _quantum(gamma, m, "xy")
        report = compute_distance(P, SolveOptions(eps=1e-5, keep_queries=True))
        queries.extend(report.queries)
        if len(queries) >= 100:
            break
    return tuple(queries[:100])
