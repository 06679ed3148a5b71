"""Restricted least-squares fit over a fixed vertex set.

Minimizes F[chi] = (1/2) sum [P - sum_k chi_k V_k]^2 W over chi >= 0 by a
conjugate-gradient method adapted to the nonnegativity constraint: exact
line searches clipped at the boundary, weights pinned at zero while their
gradient pushes them negative, and the search direction reset to the
projected gradient whenever the active set changes.  The per-iteration
cost is O(K * A * B) plus one table pass, using the single-nonzero-per-
setting-pair structure of the vertices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .behavior import Behavior, MeasurementWeights
from .errors import DimensionMismatch
from .oracle import oracle_value
from .strategies import StrategyPair, WeightedVertexSet, gather_indices, mixture_flat

__all__ = [
    "RestrictedSolveParams",
    "RestrictedSolution",
    "solve_restricted",
    "rescale_slackness",
    "restricted_beta",
    "restricted_lower_bound",
    "outer_stop_satisfied",
    "certify_zero_weight",
]

# weights at or below this are treated as sitting on the boundary
PIN_TOL = 1e-14
# refresh the running mixture this often to cancel drift
_REFRESH_EVERY = 64


@dataclass(frozen=True)
class RestrictedSolveParams:
    gamma: float = 0.5
    inner_tol: float = 1e-12
    max_inner: int = 10_000

    def __post_init__(self) -> None:
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie in (0, 1)")
        if self.inner_tol <= 0.0 or self.max_inner < 1:
            raise ValueError("inner_tol must be positive and max_inner >= 1")


@dataclass(frozen=True)
class RestrictedSolution:
    """Solver output: rescaled weights, their mixture, and bound ingredients.

    termination is one of "strong-condition", "inner-tolerance",
    "iteration-cap".  active lists the strategies left at weight zero.
    """

    chi: WeightedVertexSet
    rho: Behavior
    F: float
    beta: float
    active: tuple[StrategyPair, ...]
    termination: str
    inner_iterations: int
    events: tuple[dict, ...] = ()


def _slackness_scale(Pf: np.ndarray, rho_f: np.ndarray) -> float:
    nr2 = float(np.dot(rho_f, rho_f))
    if nr2 <= 0.0:
        return 1.0
    return max(0.0, float(np.dot(Pf, rho_f)) / nr2)


def rescale_slackness(chi: WeightedVertexSet, P: Behavior) -> WeightedVertexSet:
    """Scale all weights by t = sum(rho P W) / sum(rho^2 W), zeroing the slackness term.

    The scaling is the exact minimizer of F along the ray t * chi, so F never
    increases.  A zero mixture is returned unchanged.
    """
    if chi.dims != P.dims:
        raise DimensionMismatch("vertex set and behavior dims differ")
    rho_f = chi.mixture().flat
    t = _slackness_scale(P.flat, rho_f)
    if t == 1.0:
        return chi
    return chi.with_weights(chi.weights * t)


def restricted_beta(omega: WeightedVertexSet, g: Behavior, W: MeasurementWeights) -> float:
    """Largest functional value over the members of omega (all of them, not just the support)."""
    return max(oracle_value(g, sp, W) for sp in omega.pairs)


def restricted_lower_bound(
    P: Behavior, rho: Behavior, beta: float, W: MeasurementWeights
) -> float:
    """Restricted dual bound (1/2) sum {P^2 - (rho + beta)^2} W.

    Valid for the optimum over the vertex set on which beta was maximized;
    requires the slackness-rescaled rho.
    """
    Pf = P.flat
    shifted = rho.flat + beta
    return 0.5 * W.value * (float(np.dot(Pf, Pf)) - float(np.dot(shifted, shifted)))


def _strong_rhs(
    rho_f: np.ndarray, g_f: np.ndarray, beta: float, w: float, RS: int
) -> float:
    # RS beta^2 + 2 sum (beta - g) rho W
    return RS * beta * beta + 2.0 * (
        beta * w * float(rho_f.sum()) - w * float(np.dot(g_f, rho_f))
    )


def outer_stop_satisfied(
    alpha: float,
    beta: float,
    rho: Behavior,
    g: Behavior,
    W: MeasurementWeights,
    gamma: float,
) -> bool:
    """Descent certificate gamma alpha^2 >= RS beta^2 + 2 sum (beta - g) rho W.

    alpha is the latest oracle value at rho, beta the restricted maximum;
    rho must be slackness-rescaled.  When this holds, stopping the restricted
    solve preserves a guaranteed per-iteration decrease of the outer loop.
    """
    RS = rho.dims.R * rho.dims.S
    rhs = _strong_rhs(rho.flat, g.flat, beta, W.value, RS)
    return gamma * alpha * alpha >= rhs


def certify_zero_weight(
    sp: StrategyPair,
    g: Behavior,
    beta: float,
    rho: Behavior,
    W: MeasurementWeights,
    tol: float = 1e-12,
) -> bool:
    """Sufficient condition for the restricted optimum to give sp zero weight.

    If the functional value of sp at the current residual lies below
    -sqrt(RS beta^2 + 2 sum (beta - g) rho W), no optimal weight vector on
    this vertex set uses sp.  The margin tol keeps the test conservative;
    the condition is sufficient only, so False is not a support claim.
    """
    RS = rho.dims.R * rho.dims.S
    radicand = max(0.0, _strong_rhs(rho.flat, g.flat, beta, W.value, RS))
    return oracle_value(g, sp, W) <= -math.sqrt(radicand) - tol


def solve_restricted(
    P: Behavior,
    omega: WeightedVertexSet,
    params: RestrictedSolveParams = RestrictedSolveParams(),
    latest_alpha: float | None = None,
    record_events: bool = False,
) -> RestrictedSolution:
    """Minimize F over nonnegative weights on the given vertex set.

    Warm-starts from omega's weights; a vertex entering at weight zero with
    positive gradient first receives one exact coordinate step (the alpha
    step), which alone guarantees a decrease of half its squared functional
    value.  The iteration then stops on whichever comes first:

    * the descent certificate against latest_alpha (see outer_stop_satisfied),
    * projected-gradient norm <= inner_tol * (1 + F),
    * the iteration cap (reported, not an error).

    The returned weights are slackness-rescaled.
    """
    if P.dims != omega.dims:
        raise DimensionMismatch("vertex set and behavior dims differ")
    if len(omega) == 0:
        raise DimensionMismatch("vertex set is empty")

    dims = P.dims
    W = MeasurementWeights.uniform(dims)
    w = W.value
    RS = dims.R * dims.S
    K = len(omega)
    AB = dims.A * dims.B
    gamma = params.gamma

    idx = gather_indices(omega.pairs, dims)
    Pf = np.asarray(P.flat, dtype=np.float64)
    x = omega.weights.copy()

    scratch = np.empty((K, AB))
    Gbuf = np.empty(K)

    def gvals(gf: np.ndarray) -> np.ndarray:
        np.take(gf, idx, out=scratch)
        scratch.sum(axis=1, out=Gbuf)
        return w * Gbuf

    def mixture(vec: np.ndarray) -> np.ndarray:
        return mixture_flat(idx, vec, dims)

    events: list[dict] | None = [] if record_events else None

    def log_event(kind: str, it: int, pg: np.ndarray, d: np.ndarray) -> None:
        if events is not None:
            events.append({"iter": it, "kind": kind, "pg": pg.copy(), "d": d.copy()})

    rho_f = mixture(x)
    g_f = Pf - rho_f
    G = gvals(g_f).copy()

    # alpha step: activate the best zero-weight coordinate with positive gradient
    fresh = (x <= PIN_TOL) & (G > 0.0)
    if fresh.any():
        k = int(np.where(fresh, G, -np.inf).argmax())
        step = G[k]
        x[k] += step
        rho_f[idx[k]] += step
        g_f = Pf - rho_f
        G = gvals(g_f).copy()
        if events is not None:
            events.append({"iter": 0, "kind": "kick", "index": k, "step": step})

    alpha2 = (
        latest_alpha * latest_alpha
        if latest_alpha is not None and latest_alpha > 0.0
        else None
    )

    def strong_condition_holds() -> bool:
        t = _slackness_scale(Pf, rho_f)
        rho_t = t * rho_f
        g_t = Pf - rho_t
        beta_t = float(gvals(g_t).max())
        rhs = _strong_rhs(rho_t, g_t, beta_t, w, RS)
        return gamma * alpha2 >= rhs

    free = (x > PIN_TOL) | (G > 0.0)
    pg = np.where(free, G, 0.0)
    pg_dot = float(np.dot(pg, pg))
    d = pg.copy()
    rho_d = mixture(d)
    steps_since_reset = 0
    iters = 0
    termination = "iteration-cap"

    while True:
        F = 0.5 * w * float(np.dot(g_f, g_f))
        if math.sqrt(pg_dot) <= params.inner_tol * (1.0 + F):
            termination = "inner-tolerance"
            break
        if alpha2 is not None and strong_condition_holds():
            termination = "strong-condition"
            break
        if iters >= params.max_inner:
            termination = "iteration-cap"
            break
        iters += 1

        denom = w * float(np.dot(rho_d, rho_d))
        num = w * float(np.dot(g_f, rho_d))
        if denom <= 0.0 or num <= 0.0:
            # degenerate or non-descent direction
            if steps_since_reset == 0:
                termination = "inner-tolerance"
                break
            d = pg.copy()
            rho_d = mixture(d)
            steps_since_reset = 0
            log_event("restart", iters, pg, d)
            continue

        t = num / denom
        neg = d < 0.0
        t_max = float((x[neg] / -d[neg]).min()) if neg.any() else math.inf

        if t >= t_max:
            # boundary step: some weight reaches zero, active set changes
            x += t_max * d
            x[neg & (x <= PIN_TOL)] = 0.0
            np.maximum(x, 0.0, out=x)
            rho_f = mixture(x)
            g_f = Pf - rho_f
            G = gvals(g_f).copy()
            free = (x > PIN_TOL) | (G > 0.0)
            pg = np.where(free, G, 0.0)
            pg_dot = float(np.dot(pg, pg))
            d = pg.copy()
            rho_d = mixture(d)
            steps_since_reset = 0
            log_event("clip", iters, pg, d)
            continue

        x += t * d
        rho_f += t * rho_d
        if iters % _REFRESH_EVERY == 0:
            rho_f = mixture(x)
        g_f = Pf - rho_f
        G = gvals(g_f).copy()

        free_new = (x > PIN_TOL) | (G > 0.0)
        pg_new = np.where(free_new, G, 0.0)
        pg_dot_new = float(np.dot(pg_new, pg_new))
        if not np.array_equal(free_new, free):
            free = free_new
            pg = pg_new
            pg_dot = pg_dot_new
            d = pg.copy()
            rho_d = mixture(d)
            steps_since_reset = 0
            log_event("mask-change", iters, pg, d)
            continue

        steps_since_reset += 1
        if steps_since_reset >= max(16, int(free.sum())):
            pg = pg_new
            pg_dot = pg_dot_new
            d = pg.copy()
            rho_d = mixture(d)
            steps_since_reset = 0
            log_event("restart", iters, pg, d)
            continue

        beta_cg = pg_dot_new / pg_dot if pg_dot > 0.0 else 0.0
        d = pg_new + beta_cg * d
        rho_d = mixture(pg_new) + beta_cg * rho_d
        pg = pg_new
        pg_dot = pg_dot_new

    # finalize: snap boundary weights, rescale slackness, recompute exactly
    x[x <= PIN_TOL] = 0.0
    rho_f = mixture(x)
    t = _slackness_scale(Pf, rho_f)
    x *= t
    rho_f *= t
    g_f = Pf - rho_f
    G = gvals(g_f)
    F = 0.5 * w * float(np.dot(g_f, g_f))
    beta = float(G.max())
    chi = omega.with_weights(x)
    active = tuple(sp for sp, v in zip(omega.pairs, x) if v == 0.0)
    return RestrictedSolution(
        chi=chi,
        rho=Behavior.from_flat(dims, rho_f),
        F=F,
        beta=beta,
        active=active,
        termination=termination,
        inner_iterations=iters,
        events=tuple(events) if events is not None else (),
    )
