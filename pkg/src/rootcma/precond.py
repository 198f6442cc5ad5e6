"""Pinned-weight LMS predictor of the first array element.

The filter ``u`` starts at zero and only ``u[1:]`` adapts, so it predicts
``x_0(n)`` from the remaining M-1 elements rather than collapsing to the
all-pass response. In the noise-free limit ``u^H a_d = 1`` at every
source, which puts the source directions on the unit circle as roots of
the prediction-error polynomial (see :mod:`rootcma.roots`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .array_model import _as_snapshots
from .errors import DivergedError, DomainError, RankDeficiencyError, UndefinedBoundError
from .numerics import condition_number, hpd_solve

STEP_EPS = 1e-6
MAX_CONDITION = 1e12


@dataclass
class PrecondState:
    u: np.ndarray
    iteration: int = 0
    mse_history: list = field(default_factory=list, repr=False)

    @classmethod
    def initial(cls, M: int) -> "PrecondState":
        return cls(np.zeros(M, dtype=complex))

    def converged_iteration(self, tol: float = 1e-6) -> int | None:
        """First iteration from which every squared error stays below ``tol``."""
        mse = np.asarray(self.mse_history)
        if mse.size == 0 or mse[-1] >= tol:
            return None
        above = np.flatnonzero(mse >= tol)
        return int(above[-1] + 1) if above.size else 0


def step_bound(x, eps: float = STEP_EPS) -> float:
    """Largest stable step ``2 / ||x||^2`` minus ``eps``."""
    energy = float(np.vdot(x, x).real)
    if energy == 0.0:
        raise UndefinedBoundError("step bound undefined for a zero input vector")
    return 2.0 / energy - eps


def precond_step(state: PrecondState, x, gamma: float) -> PrecondState:
    x = np.asarray(x, dtype=complex)
    y = np.vdot(state.u, x)
    e = x[0] - y
    u = state.u + gamma * x * np.conj(e)
    u[0] = 0.0
    if not (np.all(np.isfinite(u)) and math.isfinite(abs(e))):
        raise DivergedError(f"preprocessor diverged at iteration {state.iteration}", state=state)
    return PrecondState(u, state.iteration + 1, state.mse_history + [float(abs(e) ** 2)])


def run_preprocessor(
    X,
    gamma_mode: Literal["fixed", "adaptive"] = "adaptive",
    iters: int | None = None,
    gamma: float | None = None,
    eps: float = STEP_EPS,
) -> PrecondState:
    """Run the LMS predictor over the snapshots (cycling if ``iters > N``).

    ``gamma_mode="adaptive"`` uses ``step_bound(x(n))`` each iteration;
    ``"fixed"`` uses the constant ``gamma``. A zero snapshot leaves the
    state untouched in adaptive mode.
    """
    X = _as_snapshots(X)
    M, N = X.shape
    iters = N if iters is None else iters
    if gamma_mode == "fixed":
        if gamma is None or not gamma > 0:
            raise DomainError("fixed step mode needs a positive gamma")
    elif gamma_mode != "adaptive":
        raise DomainError(f"unknown gamma mode {gamma_mode!r}")
    u = np.zeros(M, dtype=complex)
    mse = np.empty(iters)
    with np.errstate(over="ignore", invalid="ignore"):
        return _lms_loop(X, u, mse, iters, gamma_mode, gamma, eps)


def _lms_loop(X, u, mse, iters, gamma_mode, gamma, eps) -> PrecondState:
    N = X.shape[1]
    for n in range(iters):
        x = X[:, n % N]
        e = x[0] - np.vdot(u, x)
        mse[n] = abs(e) ** 2
        if gamma_mode == "adaptive":
            energy = np.vdot(x, x).real
            if energy == 0.0:
                continue
            g = 2.0 / energy - eps
        else:
            g = gamma
        u = u + g * x * np.conj(e)
        u[0] = 0.0
        if not np.all(np.isfinite(u)):
            raise DivergedError(
                f"preprocessor diverged at iteration {n}", state=PrecondState(u, n, list(mse[:n]))
            )
    return PrecondState(u, iters, mse.tolist())


def ols_fit(X, min_norm: bool = False, rcond: float = 1e-10) -> np.ndarray:
    """Least-squares predictor of row 0 from rows 1..M-1.

    Solves the normal equations ``(X1 X1^H) w = X1 x0^H`` with a Cholesky
    solve. With noise-free data and fewer than M-1 sources the Gram matrix
    is exactly singular; ``min_norm=True`` then returns the minimum-norm
    least-squares solution (the limit of LMS started from zero) instead of
    raising.

    Raises
    ------
    RankDeficiencyError
        If the Gram matrix condition number exceeds 1e12 (strict mode) or
        the predictor rows carry no energy at all.
    """
    X = _as_snapshots(X)
    M, N = X.shape
    if N < M - 1:
        raise RankDeficiencyError(f"need at least M-1 = {M - 1} snapshots, got {N}")
    X1 = X[1:]
    x0 = X[0]
    if not np.any(X1):
        raise RankDeficiencyError("predictor rows are all zero")
    G = X1 @ X1.conj().T
    r = X1 @ x0.conj()
    if min_norm:
        w, *_ = np.linalg.lstsq(X1.conj().T, x0.conj(), rcond=rcond)
        return w
    cond = condition_number(G)
    if cond > MAX_CONDITION:
        raise RankDeficiencyError(f"Gram matrix is rank deficient (condition {cond:.3g})")
    return hpd_solve(G, r)
