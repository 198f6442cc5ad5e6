"""Constant-modulus adaptive spatial filter.

The filter output is ``y = w^H x`` and the instantaneous cost
``J = (|y|^2 - 1)^2 / 4``. Writing ``e = (1 - |y|^2) y`` the stochastic
gradient step becomes the LMS-like ``w <- w + gamma x e*``; flipping the
sign turns descent into ascent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from .array_model import _as_snapshots
from .errors import DivergedError, DomainError, ReinitializationError

Direction = Literal["descent", "ascent"]

DEFAULT_DESCENT_GAMMA = 1e-3
DEFAULT_ASCENT_GAMMA = 1e-4
DEFAULT_ALPHA = 0.99
RUNAWAY_MODULUS = 1e6


def all_pass(M: int) -> np.ndarray:
    w = np.zeros(M, dtype=complex)
    w[0] = 1.0
    return w


@dataclass
class CmaState:
    weights: np.ndarray
    step_gamma: float = DEFAULT_DESCENT_GAMMA
    iteration: int = 0

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=complex)
        if not np.any(self.weights):
            raise DomainError("CMA weights must not be all-zero")
        if not self.step_gamma >= 0:
            raise DomainError(f"step size must be non-negative, got {self.step_gamma}")


@dataclass
class RlsState:
    """Inverse weighted correlation ``P`` and forgetting factor ``alpha``."""

    P: np.ndarray
    alpha: float = DEFAULT_ALPHA

    @classmethod
    def initial(cls, M: int, sigma2: float = 1.0, alpha: float = DEFAULT_ALPHA) -> "RlsState":
        # correlation starts at sigma^2 I, so its inverse is I / sigma^2
        if sigma2 <= 0:
            raise DomainError("sigma^2 must be positive")
        return cls(np.eye(M, dtype=complex) / sigma2, alpha)

    def __post_init__(self):
        self.P = np.asarray(self.P, dtype=complex)
        if not 0 < self.alpha <= 1:
            raise DomainError(f"forgetting factor must lie in (0, 1], got {self.alpha}")


@dataclass
class AscentRunResult:
    v: np.ndarray
    modulus_history: np.ndarray
    converged_iteration: int | None = None


@dataclass
class EqualizerResult:
    weights: np.ndarray
    avg_output_modulus: float
    avg_cost: float
    modulus_history: np.ndarray = field(repr=False)
    cost_history: np.ndarray = field(repr=False)


def cma_output(state, x) -> complex:
    w = state.weights if isinstance(state, CmaState) else np.asarray(state)
    x = np.asarray(x)
    if w.shape != x.shape:
        raise DomainError(f"weight shape {w.shape} does not match input {x.shape}")
    return complex(np.vdot(w, x))


def cma_cost_instant(y) -> float:
    return (abs(y) ** 2 - 1) ** 2 / 4


def cma_error(y):
    return (1 - abs(y) ** 2) * y


def cma_gradient(weights, x) -> np.ndarray:
    """Instantaneous gradient ``(|y|^2 - 1) x y*``.

    Equals ``dJ/dRe(w) + i dJ/dIm(w)`` of :func:`cma_cost_instant`.
    """
    x = np.asarray(x, dtype=complex)
    y = np.vdot(weights, x)
    return (abs(y) ** 2 - 1) * x * np.conj(y)


def _sign(direction: Direction) -> float:
    if direction == "descent":
        return 1.0
    if direction == "ascent":
        return -1.0
    raise DomainError(f"direction must be 'descent' or 'ascent', got {direction!r}")


def _check(w, y, last, iteration):
    if not (np.all(np.isfinite(w)) and math.isfinite(abs(y)) and abs(y) <= RUNAWAY_MODULUS):
        raise DivergedError(f"CMA update diverged at iteration {iteration}", state=last)


def cma_step(state: CmaState, x, direction: Direction = "descent") -> CmaState:
    """One stochastic-gradient update; returns a new state."""
    sgn = _sign(direction)
    y = cma_output(state, x)
    w = state.weights + sgn * state.step_gamma * np.asarray(x) * np.conj(cma_error(y))
    _check(w, y, state, state.iteration)
    return replace(state, weights=w, iteration=state.iteration + 1)


def rls_gain(rls: RlsState, x) -> tuple[np.ndarray, RlsState]:
    """Matrix step ``P x`` normalisation and the rank-one update of ``P``.

    Returns ``(gamma_n, new_state)`` where ``gamma_n = P(n-1) / (alpha + x^H P(n-1) x)``.
    """
    x = np.asarray(x, dtype=complex)
    P = rls.P
    Px = P @ x
    denom = rls.alpha + np.vdot(x, Px).real
    if not denom > 0:
        raise ReinitializationError("RLS denominator is not positive; reinitialise P")
    gain = P / denom
    P_new = (P - np.outer(Px, Px.conj()) / denom) / rls.alpha
    P_new = (P_new + P_new.conj().T) / 2
    if not np.all(np.isfinite(P_new)) or np.any(np.diag(P_new).real <= 0):
        raise ReinitializationError("RLS matrix lost positive definiteness")
    return gain, replace(rls, P=P_new)


def cma_step_rls(state: CmaState, rls: RlsState, x, direction: Direction = "descent"):
    """CMA update with the RLS matrix step in place of the scalar ``gamma``."""
    sgn = _sign(direction)
    x = np.asarray(x, dtype=complex)
    y = cma_output(state, x)
    gain, rls = rls_gain(rls, x)
    w = state.weights + sgn * (gain @ x) * np.conj(cma_error(y))
    _check(w, y, state, state.iteration)
    return replace(state, weights=w, iteration=state.iteration + 1), rls


def run_ascent_normalized(
    X,
    D: int,
    gamma: float = DEFAULT_ASCENT_GAMMA,
    iters: int | None = None,
    init=None,
    tol: float = 1e-9,
) -> AscentRunResult:
    """Gradient ascent with unit-norm weights, rescaled to ``sqrt(D^2 + D(M-1))``.

    The rescaled vector has the norm of a sum of D phase-related steering
    vectors. Snapshots are consumed in column order and reused cyclically
    when ``iters`` exceeds N. ``converged_iteration`` is the first
    iteration whose normalized update moved the weights by less than ``tol``.
    """
    X = _as_snapshots(X)
    M, N = X.shape
    if not 1 <= D <= M - 1:
        raise DomainError(f"need 1 <= D <= M-1, got D = {D}")
    iters = N if iters is None else iters
    w = all_pass(M) if init is None else np.asarray(init, dtype=complex)
    w = w / np.linalg.norm(w)
    moduli = np.empty(iters)
    converged = None
    for n in range(iters):
        x = X[:, n % N]
        y = np.vdot(w, x)
        w_new = w - gamma * x * np.conj((1 - abs(y) ** 2) * y)
        norm = np.linalg.norm(w_new)
        if not (math.isfinite(norm) and norm > 0 and abs(y) <= RUNAWAY_MODULUS):
            raise DivergedError(f"ascent diverged at iteration {n}", state=CmaState(w, gamma, n))
        w_new /= norm
        if converged is None and np.linalg.norm(w_new - w) < tol:
            converged = n
        w = w_new
        moduli[n] = abs(y)
    v = w * math.sqrt(D * D + D * (M - 1))
    return AscentRunResult(v, moduli, converged)


def run_descent_equalizer(
    X,
    gamma: float = DEFAULT_DESCENT_GAMMA,
    iters: int | None = None,
    init=None,
    window: float = 0.25,
) -> EqualizerResult:
    """Plain CMA descent from ``init`` (all-pass by default).

    ``avg_output_modulus`` and ``avg_cost`` are means over the final
    ``window`` fraction of iterations.
    """
    X = _as_snapshots(X)
    M, N = X.shape
    iters = N if iters is None else iters
    state = CmaState(all_pass(M) if init is None else init, gamma)
    w = state.weights.copy()
    moduli = np.empty(iters)
    costs = np.empty(iters)
    for n in range(iters):
        x = X[:, n % N]
        y = np.vdot(w, x)
        w_new = w + gamma * x * np.conj((1 - abs(y) ** 2) * y)
        _check(w_new, y, CmaState(w, gamma, n), n)
        w = w_new
        moduli[n] = abs(y)
        costs[n] = (abs(y) ** 2 - 1) ** 2 / 4
    start = iters - max(1, int(round(window * iters))) if iters else 0
    avg_mod = float(moduli[start:].mean()) if iters else float("nan")
    avg_cost = float(costs[start:].mean()) if iters else float("nan")
    return EqualizerResult(w, avg_mod, avg_cost, moduli, costs)
