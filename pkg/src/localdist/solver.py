"""Distance from the local polytope by iterative vertex generation.

The outer loop alternates a restricted least-squares fit over the current
vertex set with an oracle consult on the residual: the best vertex found
enters the set, zero-weight vertices leave, and the oracle value alpha
yields a dual lower bound on the optimal F.  Iteration stops once the
bound gap falls below the requested accuracy or the fit is numerically
zero (the input is local).  The reported distance is sqrt(2 F+) on the
local cone; the final weights are not renormalized.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .behavior import Behavior, MeasurementWeights, ns_dimension, residual
from .errors import DimensionMismatch, EnumerationCapExceeded
from .oracle import (
    DEFAULT_ENUMERATION_CAP,
    OracleAnswer,
    OracleConfig,
    block_maximize,
    brute_force_oracle,
    multistart_oracle,
    oracle_value,
)
from .restricted import (
    RestrictedSolveParams,
    certify_zero_weight,
    outer_stop_satisfied,
    solve_restricted,
)
from .strategies import StrategyPair, WeightedVertexSet, gather_indices

__all__ = [
    "SolveOptions",
    "TraceRow",
    "SolveReport",
    "compute_distance",
    "global_lower_bound",
    "duality_gap",
    "reference_distance",
]

ORACLE_MODES = ("heuristic", "exact", "certify")
# cleanup drops weights at or below this fraction of the total weight
CLEANUP_REL_TOL = 1e-12

TRACE_CSV_HEADER = "iter,F_plus,F_minus,gap,alpha,beta,omega_size,millis"


@dataclass(frozen=True)
class SolveOptions:
    """Accuracy, oracle mode, and iteration limits for compute_distance.

    eps is the requested accuracy on F (the bound gap).  oracle_mode is one
    of "heuristic", "exact", "certify"; certify runs the heuristic oracle
    throughout and re-derives the final bound from the exact one.  zero_tol
    is the numerically-zero threshold on F below which the input is declared
    local without consulting the oracle; None means min(eps, 1e-12).
    """

    eps: float = 1e-5
    gamma: float = 0.5
    seed: int = 0
    oracle_mode: str = "heuristic"
    trials: int | None = None
    sweep_limit: int = 100
    max_outer: int = 2000
    inner_tol: float = 1e-12
    max_inner: int = 10_000
    zero_tol: float | None = None
    enumeration_cap: int = DEFAULT_ENUMERATION_CAP
    keep_queries: bool = False
    strict_support: bool = False

    def __post_init__(self) -> None:
        if self.eps <= 0.0:
            raise ValueError("eps must be positive")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie in (0, 1)")
        if self.oracle_mode == "heuristic-with-exact-final":
            object.__setattr__(self, "oracle_mode", "certify")
        if self.oracle_mode not in ORACLE_MODES:
            raise ValueError(f"oracle_mode must be one of {ORACLE_MODES}")
        if self.max_outer < 1:
            raise ValueError("max_outer must be positive")


@dataclass(frozen=True)
class TraceRow:
    """One outer iteration: bounds, oracle outcome, and set sizes.

    omega_before is the vertex-set size used by this iteration's restricted
    solve; omega_after the size after cleanup and insertion.  f_minus is this
    iteration's dual bound, gap the difference of f_plus and the best bound
    seen so far.
    """

    iter: int
    f_plus: float
    f_minus: float
    gap: float
    alpha: float
    beta: float
    omega_before: int
    omega_after: int
    oracle_sweeps: int
    millis: float


@dataclass(frozen=True)
class SolveReport:
    """Final bounds, the closest local model found, and the iteration trace."""

    dims: object
    distance: float
    f_plus: float
    f_minus: float
    gap: float
    certified: bool
    termination: str
    iterations: int
    oracle_calls: int
    eps: float
    gamma: float
    seed: int
    oracle_mode: str
    vertices: WeightedVertexSet
    trace: tuple[TraceRow, ...]
    total_millis: float
    queries: tuple[Behavior, ...] = field(default=(), repr=False)

    @property
    def converged(self) -> bool:
        return self.termination in ("gap", "local")

    def to_json_dict(self) -> dict:
        d = self.dims
        return {
            "schema": 1,
            "dims": {"A": d.A, "B": d.B, "R": d.R, "S": d.S},
            "distance": float(self.distance),
            "F_plus": float(self.f_plus),
            "F_minus": float(self.f_minus),
            "gap": float(self.gap),
            "certified": bool(self.certified),
            "termination": self.termination,
            "iterations": int(self.iterations),
            "oracle_calls": int(self.oracle_calls),
            "eps": float(self.eps),
            "gamma": float(self.gamma),
            "seed": int(self.seed),
            "oracle_mode": self.oracle_mode,
            "strategies": self.vertices.to_json_list(),
            "trace": [
                {
                    "iter": r.iter,
                    "F_plus": r.f_plus,
                    "F_minus": r.f_minus,
                    "gap": r.gap,
                    "alpha": r.alpha,
                    "beta": r.beta,
                    "omega_before": r.omega_before,
                    "omega_after": r.omega_after,
                    "oracle_sweeps": r.oracle_sweeps,
                    "millis": r.millis,
                }
                for r in self.trace
            ],
            "total_millis": float(self.total_millis),
        }

    def trace_csv(self) -> str:
        lines = [TRACE_CSV_HEADER]
        for r in self.trace:
            lines.append(
                f"{r.iter},{r.f_plus!r},{r.f_minus!r},{r.gap!r},"
                f"{r.alpha!r},{r.beta!r},{r.omega_before},{r.millis:.3f}"
            )
        return "\n".join(lines) + "\n"


def global_lower_bound(
    P: Behavior, rho: Behavior, alpha: float, W: MeasurementWeights
) -> float:
    """Dual bound (1/2) sum {P^2 - (rho + alpha)^2} W on the optimal F.

    Valid whenever alpha is at least the true maximum of the residual
    functional over all strategies; a heuristic alpha can understate that
    maximum and inflate the bound.
    """
    Pf = P.flat
    shifted = rho.flat + alpha
    return 0.5 * W.value * (float(np.dot(Pf, Pf)) - float(np.dot(shifted, shifted)))


def duality_gap(P: Behavior, rho: Behavior, alpha: float, W: MeasurementWeights) -> float:
    """Bound gap (RS/2) alpha^2 + sum rho (alpha - g) W, with g = P - rho.

    Algebraically identical to functional_value - global_lower_bound for any
    rho; with slackness-rescaled rho it reduces to
    (RS/2) alpha^2 + alpha sum rho W.
    """
    RS = P.dims.R * P.dims.S
    rho_f = rho.flat
    g_f = P.flat - rho_f
    return 0.5 * RS * alpha * alpha + W.value * (
        alpha * float(rho_f.sum()) - float(np.dot(rho_f, g_f))
    )


def _support_argmax(g: Behavior, omega: WeightedVertexSet, W: MeasurementWeights) -> int:
    idx = gather_indices(omega.pairs, g.dims)
    vals = g.flat[idx].sum(axis=1)
    return int(vals.argmax())


def compute_distance(P: Behavior, opts: SolveOptions = SolveOptions()) -> SolveReport:
    """Distance of a nonsignaling behavior from the local polytope.

    The caller is responsible for validating P (see validate_behavior).
    Deterministic given opts.seed.  Termination is "gap" (bound gap at or
    below eps), "local" (F numerically zero), "iteration-limit", or
    "stalled"; only the first two count as convergence.
    """
    dims = P.dims
    W = MeasurementWeights.uniform(dims)
    rng = np.random.default_rng(opts.seed)
    ocfg = OracleConfig(trials=opts.trials, seed=opts.seed, sweep_limit=opts.sweep_limit)
    params = RestrictedSolveParams(
        gamma=opts.gamma, inner_tol=opts.inner_tol, max_inner=opts.max_inner
    )
    zero_tol = opts.zero_tol if opts.zero_tol is not None else min(opts.eps, 1e-12)
    exact_every = opts.oracle_mode == "exact"

    t_start = time.perf_counter()
    calls = 0

    def consult(g: Behavior, support: WeightedVertexSet | None) -> OracleAnswer:
        nonlocal calls
        calls += 1
        if exact_every:
            return brute_force_oracle(g, W, opts.enumeration_cap)
        ans = multistart_oracle(g, W, ocfg, rng)
        if support is not None and len(support) > 0:
            # one extra trial seeded from the best current member keeps the
            # answer from falling below the restricted maximum
            k = _support_argmax(g, support, W)
            seeded = block_maximize(g, support.pairs[k].r, W, opts.sweep_limit)
            if seeded.value > ans.value:
                ans = seeded
        return ans

    queries: list[Behavior] = []
    ans0 = consult(P, None)
    if opts.keep_queries:
        queries.append(P)
    omega = WeightedVertexSet(dims, (ans0.strategy,), np.zeros(1))

    trace: list[TraceRow] = []
    best_fm = -math.inf
    latest_alpha: float | None = None
    tighten = 1.0
    guard_count = 0
    termination = "iteration-limit"
    certified = False
    sol = None
    f_plus = math.inf
    n = 0

    def add_row(f_plus, fm, gap, alpha, beta, size_used, omega_after, sweeps, tic) -> None:
        trace.append(
            TraceRow(
                iter=n,
                f_plus=f_plus,
                f_minus=fm,
                gap=gap,
                alpha=alpha,
                beta=beta,
                omega_before=size_used,
                omega_after=omega_after,
                oracle_sweeps=sweeps,
                millis=(time.perf_counter() - tic) * 1e3,
            )
        )

    while n < opts.max_outer:
        tic = time.perf_counter()
        size_used = len(omega)
        p = params if tighten == 1.0 else replace(params, inner_tol=params.inner_tol * tighten)
        sol = solve_restricted(P, omega, p, latest_alpha)
        g = residual(P, sol.rho)
        f_plus = sol.F

        if f_plus <= zero_tol:
            # F >= 0 holds unconditionally, so zero is a certified bound
            best_fm = max(best_fm, 0.0)
            gap = f_plus - best_fm
            add_row(f_plus, 0.0, gap, 0.0, sol.beta, size_used,
                    len(sol.chi.support()), 0, tic)
            termination = "local"
            certified = True
            break

        ans = consult(g, omega)
        if opts.keep_queries:
            queries.append(g)
        alpha = max(ans.value, 0.0)

        # the descent certificate must hold against the fresh alpha; if the
        # inner solve stopped early on a stale one, resume it
        refine = 0
        while (
            sol.termination == "strong-condition"
            and refine < 3
            and not outer_stop_satisfied(alpha, sol.beta, sol.rho, g, W, opts.gamma)
        ):
            sol = solve_restricted(P, omega.with_weights(sol.chi.weights), p, alpha)
            g = residual(P, sol.rho)
            f_plus = sol.F
            ans = consult(g, omega)
            if opts.keep_queries:
                queries.append(g)
            alpha = max(ans.value, 0.0)
            refine += 1

        fm = global_lower_bound(P, sol.rho, alpha, W)
        best_fm = max(best_fm, fm)
        gap = f_plus - best_fm

        if gap <= opts.eps:
            if opts.oracle_mode == "certify" and not exact_every:
                exact = brute_force_oracle(g, W, opts.enumeration_cap)
                calls += 1
                alpha_exact = max(exact.value, 0.0)
                fm_exact = global_lower_bound(P, sol.rho, alpha_exact, W)
                gap_exact = f_plus - fm_exact
                if gap_exact <= opts.eps:
                    best_fm = fm_exact
                    add_row(f_plus, fm_exact, gap_exact, alpha_exact, sol.beta,
                            size_used, len(sol.chi.support()), exact.sweeps, tic)
                    termination = "gap"
                    certified = True
                    break
                # the heuristic understated the maximum: adopt the exact answer
                ans, alpha = exact, alpha_exact
                fm = fm_exact
                gap = gap_exact
            else:
                add_row(f_plus, fm, gap, alpha, sol.beta,
                        size_used, len(sol.chi.support()), ans.sweeps, tic)
                termination = "gap"
                certified = exact_every
                break

        # cleanup: drop numerically zero weights, insert the oracle's vertex
        total = sol.chi.total_weight
        kept = sol.chi.support(CLEANUP_REL_TOL * total)
        if opts.strict_support and len(kept) > 1:
            surviving = [
                sp
                for sp in kept.pairs
                if not certify_zero_weight(sp, g, sol.beta, sol.rho, W)
            ]
            if len(surviving) < len(kept):
                sel = [kept.pairs.index(sp) for sp in surviving]
                kept = WeightedVertexSet(
                    dims, tuple(surviving), kept.weights[sel]
                )
        if ans.strategy in kept:
            # numerical re-add: tighten the restricted solve instead of duplicating
            guard_count += 1
            if guard_count > 3:
                add_row(f_plus, fm, gap, alpha, sol.beta, size_used,
                        len(kept), ans.sweeps, tic)
                termination = "stalled"
                break
            tighten *= 1e-3
            omega = kept
            latest_alpha = None
            continue
        guard_count = 0
        tighten = 1.0
        omega = kept.add(ans.strategy, 0.0)
        add_row(f_plus, fm, gap, alpha, sol.beta, size_used, len(omega), ans.sweeps, tic)
        latest_alpha = alpha
        n += 1

    if sol is None:  # max_outer < 1 is rejected earlier; defensive
        raise RuntimeError("no restricted solve performed")

    if termination == "iteration-limit" and opts.oracle_mode == "certify":
        # keep the mode's promise: the reported bound comes from the exact oracle
        g = residual(P, sol.rho)
        exact = brute_force_oracle(g, W, opts.enumeration_cap)
        calls += 1
        best_fm = global_lower_bound(P, sol.rho, max(exact.value, 0.0), W)
        certified = True

    f_minus = max(best_fm, 0.0) if termination == "local" else best_fm
    if not math.isfinite(f_minus):
        f_minus = 0.0 if termination == "local" else -math.inf
    support = sol.chi.support()
    return SolveReport(
        dims=dims,
        distance=math.sqrt(2.0 * max(f_plus, 0.0)),
        f_plus=f_plus,
        f_minus=f_minus,
        gap=f_plus - f_minus,
        certified=certified,
        termination=termination,
        iterations=len(trace),
        oracle_calls=calls,
        eps=opts.eps,
        gamma=opts.gamma,
        seed=opts.seed,
        oracle_mode=opts.oracle_mode,
        vertices=support,
        trace=tuple(trace),
        total_millis=(time.perf_counter() - t_start) * 1e3,
        queries=tuple(queries),
    )


def reference_distance(P: Behavior, cap: int = 10**6) -> float:
    """Exact optimal F by a dense nonnegative least-squares fit over all vertices.

    Enumerates every deterministic strategy pair (R^A * S^B of them, capped)
    and solves min ||P - V chi|| over chi >= 0 with the Lawson-Hanson
    active-set method, independent of the iterative path.  Verification
    helper; memory grows with the vertex count.
    """
    dims = P.dims
    R, S, A, B = dims.shape
    n_vertices = (R**A) * (S**B)
    if n_vertices > cap:
        raise EnumerationCapExceeded(
            f"R^A * S^B = {n_vertices} exceeds reference cap {cap}"
        )
    from scipy.optimize import nnls

    r_grid = np.stack(np.unravel_index(np.arange(R**A), (R,) * A), axis=1)
    s_grid = np.stack(np.unravel_index(np.arange(S**B), (S,) * B), axis=1)
    r_all = np.repeat(r_grid, S**B, axis=0)
    s_all = np.tile(s_grid, (R**A, 1))
    aa = np.arange(A)[None, :, None]
    bb = np.arange(B)[None, None, :]
    idx = (((r_all[:, :, None] * S + s_all[:, None, :]) * A + aa) * B + bb).reshape(
        n_vertices, A * B
    )
    M = np.zeros((dims.table_size, n_vertices))
    M[idx.reshape(-1), np.repeat(np.arange(n_vertices), A * B)] = 1.0
    _, rnorm = nnls(M, np.asarray(P.flat, dtype=np.float64))
    w = 1.0 / (A * B)
    return 0.5 * w * rnorm * rnorm
