"""Test-behavior generators: two-qubit states, planar measurements, PR box.

Outcome index 0 maps to the +1 eigenvalue and index 1 to -1 throughout, so
a correlation table P(r,s|a,b) is assembled from single-party biases m, n
and the joint correlator K as P = (1/4)(1 + rhat m_a + shat n_b + rhat shat K_ab).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .behavior import Behavior, BehaviorDims

__all__ = [
    "TwoQubitState",
    "MeasurementFamily",
    "planar_family",
    "qubit_behavior",
    "pr_box",
    "random_local_mixture",
]

_PLANES = ("xy", "xz")


@dataclass(frozen=True)
class TwoQubitState:
    """A pure partially entangled state or a Werner state.

    pure(gamma) is (|00> + gamma |11>) / sqrt(1 + gamma^2): product at
    gamma = 0, maximally entangled at gamma = 1.  werner(p) mixes the
    singlet with white noise at visibility p.
    """

    kind: str
    param: float

    def __post_init__(self) -> None:
        if self.kind not in ("pure", "werner"):
            raise ValueError("kind must be 'pure' or 'werner'")
        p = float(self.param)
        if not 0.0 <= p <= 1.0:
            raise ValueError("state parameter must lie in [0, 1]")
        object.__setattr__(self, "param", p)

    @classmethod
    def pure(cls, gamma: float) -> "TwoQubitState":
        return cls("pure", gamma)

    @classmethod
    def werner(cls, p: float) -> "TwoQubitState":
        return cls("werner", p)

    def bloch_bias(self) -> float:
        """z-bias of either reduced state: (1-g^2)/(1+g^2) for pure, 0 for werner."""
        if self.kind == "werner":
            return 0.0
        g = self.param
        return (1.0 - g * g) / (1.0 + g * g)

    def correlation_matrix(self) -> np.ndarray:
        """3x3 matrix T with K_ab = a . T . b for unit measurement axes."""
        if self.kind == "werner":
            return -self.param * np.eye(3)
        g = self.param
        s = 2.0 * g / (1.0 + g * g)
        return np.diag([s, -s, 1.0])


@dataclass(frozen=True)
class MeasurementFamily:
    """Projective qubit measurements along coplanar Bloch directions."""

    angles: tuple[float, ...]
    plane: str

    def __post_init__(self) -> None:
        if self.plane not in _PLANES:
            raise ValueError(f"plane must be one of {_PLANES}")
        if len(self.angles) < 1:
            raise ValueError("at least one measurement angle is required")
        object.__setattr__(self, "angles", tuple(float(t) for t in self.angles))

    def __len__(self) -> int:
        return len(self.angles)

    def directions(self) -> np.ndarray:
        """Unit vectors, one row per setting.

        xy-plane angles count from the x-axis; xz-plane angles count from
        the z-axis, so theta = 0 is the Bloch-vector direction z.
        """
        t = np.asarray(self.angles, dtype=np.float64)
        out = np.zeros((len(t), 3))
        if self.plane == "xy":
            out[:, 0] = np.cos(t)
            out[:, 1] = np.sin(t)
        else:
            out[:, 0] = np.sin(t)
            out[:, 2] = np.cos(t)
        return out


def planar_family(M: int, plane: str, offset: float = 0.0) -> MeasurementFamily:
    """M equally spaced directions theta_k = k pi / M + offset in the given plane."""
    if M < 1:
        raise ValueError("M must be at least 1")
    return MeasurementFamily(
        tuple(k * math.pi / M + offset for k in range(M)), plane
    )


def qubit_behavior(
    state: TwoQubitState, alice: MeasurementFamily, bob: MeasurementFamily
) -> Behavior:
    """Behavior of the state under projective measurements along the two families.

    With the index-to-sign map above, the table is
    P(r,s|a,b) = (1/4)(1 + rhat m_a + shat n_b + rhat shat K_ab) where
    m_a, n_b are the measured single-party biases and K the correlator.
    """
    a_dirs = alice.directions()
    b_dirs = bob.directions()
    bias = state.bloch_bias()
    m = bias * a_dirs[:, 2]
    n = bias * b_dirs[:, 2]
    K = a_dirs @ state.correlation_matrix() @ b_dirs.T
    sign = np.array([1.0, -1.0])
    table = 0.25 * (
        1.0
        + sign[:, None, None, None] * m[None, None, :, None]
        + sign[None, :, None, None] * n[None, None, None, :]
        + sign[:, None, None, None] * sign[None, :, None, None] * K[None, None, :, :]
    )
    dims = BehaviorDims(A=len(alice), B=len(bob), R=2, S=2)
    return Behavior(dims, table)


def pr_box() -> Behavior:
    """The extremal nonsignaling box: r xor s = a and b, each at probability 1/2."""
    dims = BehaviorDims(A=2, B=2, R=2, S=2)
    t = np.zeros(dims.shape)
    for a in range(2):
        for b in range(2):
            for r in range(2):
                s = r ^ (a & b)
                t[r, s, a, b] = 0.5
    return Behavior(dims, t)


def random_local_mixture(dims: BehaviorDims, k: int, rng) -> Behavior:
    """Convex mixture of k uniformly random deterministic strategies.

    Local by construction, so the computed distance must vanish.  rng is a
    seed or a numpy Generator; a fixed seed fixes the table.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    gen = np.random.default_rng(rng)
    A, B, R, S = dims.A, dims.B, dims.R, dims.S
    r_all = gen.integers(0, R, size=(k, A))
    s_all = gen.integers(0, S, size=(k, B))
    weights = gen.dirichlet(np.ones(k))
    aa = np.arange(A)[None, :, None]
    bb = np.arange(B)[None, None, :]
    idx = (((r_all[:, :, None] * S + s_all[:, None, :]) * A + aa) * B + bb).reshape(
        k, A * B
    )
    flat = np.bincount(
        idx.reshape(-1),
        weights=np.repeat(weights, A * B),
        minlength=dims.table_size,
    )
    return Behavior.from_flat(dims, flat)
