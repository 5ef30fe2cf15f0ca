"""Streaming update engines.

Base updates (block power, block Oja, momentum block power), the
projection-based acceleration wrapper, the coupled learning-rate schedule
eta(t) = (a*c_t + 1)/t with alpha_t = 1/eta(t), and the alignment
objective tracked between consecutive estimates.
"""

from __future__ import annotations

import logging
from typing import NamedTuple

import numpy as np

from . import _backend
from .errors import DimensionMismatch, InvalidDims, NearZeroVector
from .linalg import DataBlock, gram_apply, normalize, orthonormalize

logger = logging.getLogger(__name__)

BLOCK_POWER = "block-power"
BLOCK_OJA = "oja"
MOMENTUM_BLOCK_POWER = "momentum"
METHODS = (BLOCK_POWER, BLOCK_OJA, MOMENTUM_BLOCK_POWER)


class LearningRateSchedule:
    """Randomized decaying rate: eta(t) = (a*c_t + 1)/t, alpha_t = 1/eta(t).

    One uniform c_t on [0, 1) is drawn per update and consumed by both
    rates, so eta * alpha == 1 up to rounding. ``t`` starts at 1 and
    advances by exactly one per draw; ``draws`` counts completed draws.
    """

    def __init__(self, a=2.0, rng=None):
        if a < 0:
            raise ValueError(f"schedule amplitude must be >= 0, got {a}")
        self.a = float(a)
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.t = 1
        self.draws = 0

    def draw(self):
        """Return (eta, alpha) for the current update and advance t."""
        c = self.rng.uniform()
        eta = (self.a * c + 1.0) / self.t
        alpha = 1.0 / eta
        self.t += 1
        self.draws += 1
        return eta, alpha


def init_basis(d, k, seed):
    """Shared random starting basis: i.i.d. normal columns, orthonormalized.

    Deterministic in ``seed`` (an int or numpy SeedSequence), so every
    method in a comparison run can start from the same point on the sphere.
    """
    if not 1 <= k <= d:
        raise InvalidDims(f"need 1 <= k <= d, got k={k}, d={d}")
    rng = np.random.default_rng(seed)
    return orthonormalize(rng.standard_normal((d, k)), on_deficient="replace",
                          rng=rng)


def block_power_base(W, block):
    """Block power update: X (Xᵀ W) / B, unnormalized."""
    return gram_apply(block, W)


def oja_block_base(W, block, eta):
    """Block Oja update: W + eta * X (Xᵀ W) / B."""
    if eta < 0:
        raise ValueError(f"eta must be >= 0, got {eta}")
    return W + eta * gram_apply(block, W)


def momentum_block_power_base(W, W_prev, block, beta):
    """Heavy-ball block power: X (Xᵀ W) / B − beta * W_prev.

    Bootstraps as plain block power on the first update (no W_prev yet).
    """
    out = gram_apply(block, W)
    if W_prev is None:
        return out
    if W_prev.shape != out.shape:
        raise DimensionMismatch(
            f"previous basis shape {W_prev.shape} != {out.shape}")
    return out - beta * W_prev


def accelerate(W_tilde, W, alpha):
    """Pull each updated component back toward its previous estimate.

    Column i of the result is ``w~_i + alpha * (w_i · w~_i) * w_i``: the
    self-projection ascent step applied per component, which for a single
    component is exactly ``w~ + alpha * w (wᵀ w~)``. Cost O(dk); nothing
    d×d is formed.
    """
    W_tilde = np.ascontiguousarray(W_tilde, dtype=np.float64)
    W = np.ascontiguousarray(W, dtype=np.float64)
    if W_tilde.shape != W.shape:
        raise DimensionMismatch(
            f"update shape {W_tilde.shape} != basis shape {W.shape}")
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    return _backend.active().accelerate(W_tilde, W, alpha)


def alignment_objective(W_next, W):
    """Alignment between consecutive orthonormal bases, in [0, 1].

    ||Wᵀ W_next||²_F / k: equals (wᵀ w_next)² for a single component and 1
    when the spans coincide. Symmetric and invariant to per-column sign
    flips on either argument.
    """
    W_next = np.asarray(W_next, dtype=np.float64)
    W = np.asarray(W, dtype=np.float64)
    if W_next.shape != W.shape:
        raise DimensionMismatch(
            f"shapes differ: {W_next.shape} vs {W.shape}")
    k = W.shape[1]
    return float(np.sum((W.T @ W_next) ** 2)) / k


class StepResult(NamedTuple):
    g_value: float
    eta: float
    alpha: float


class StreamingEstimator:
    """Single-pass top-k eigenbasis tracker.

    Owns the evolving orthonormal basis, applies one base update per data
    block, optionally wraps it in the acceleration pullback, and
    re-orthonormalizes. The schedule is advanced exactly once per step for
    every method, so method comparisons stay rng-aligned.

    Degenerate updates follow the retention policy: a near-zero update for
    a single component keeps the current vector for that step; a deficient
    column for k > 1 is refilled from the current basis (falling back to a
    random direction). ``strict=True`` raises instead.
    """

    def __init__(self, basis, *, method=BLOCK_POWER, accelerated=True,
                 schedule=None, beta=0.1, strict=False, rng=None):
        if method not in METHODS:
            raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
        basis = np.array(basis, dtype=np.float64, order="C", copy=True)
        if basis.ndim != 2:
            raise DimensionMismatch(f"basis must be 2-d, got {basis.shape}")
        self._W = basis
        self._W_prev = None
        self.method = method
        self.accelerated = bool(accelerated)
        self.schedule = schedule if schedule is not None else LearningRateSchedule()
        self.beta = float(beta)
        self.strict = bool(strict)
        self._rng = rng if rng is not None else np.random.default_rng(0)
        self.updates = 0
        self.samples_seen = 0

    @property
    def d(self):
        return self._W.shape[0]

    @property
    def k(self):
        return self._W.shape[1]

    @property
    def basis(self):
        """The current orthonormal estimate (live array; copy to keep)."""
        return self._W

    def step(self, block):
        """Consume one data block and return (g_value, eta, alpha)."""
        X = block.samples if isinstance(block, DataBlock) else np.asarray(block)
        if X.shape[0] != self.d:
            raise DimensionMismatch(
                f"block dimension {X.shape[0]} != basis dimension {self.d}")
        eta, alpha = self.schedule.draw()

        W = self._W
        if self.method == BLOCK_POWER:
            W_tilde = block_power_base(W, X)
        elif self.method == BLOCK_OJA:
            W_tilde = oja_block_base(W, X, eta)
        else:
            W_tilde = momentum_block_power_base(W, self._W_prev, X, self.beta)

        if self.accelerated:
            W_tilde = accelerate(W_tilde, W, alpha)

        if self.k == 1:
            try:
                W_next = np.ascontiguousarray(
                    normalize(W_tilde[:, 0]).reshape(self.d, 1))
            except NearZeroVector:
                if self.strict:
                    raise
                logger.warning("near-zero update at step %d; estimate retained",
                               self.updates + 1)
                W_next = W
        else:
            W_next = orthonormalize(
                W_tilde,
                on_deficient="error" if self.strict else "replace",
                fallback=W, rng=self._rng)

        if self.method == MOMENTUM_BLOCK_POWER:
            self._W_prev = W
        self._W = W_next
        self.updates += 1
        self.samples_seen += X.shape[1]
        return StepResult(alignment_objective(W_next, W), eta, alpha)
