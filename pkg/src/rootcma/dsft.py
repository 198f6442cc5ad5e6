"""Discrete-space Fourier transform of finite weight sequences.

Beam response of a ULA and the DSFT of its weights are complex conjugates
of each other: ``b(mu) = w^H a(mu) = conj(W(e^{i mu}))``. The helpers here
evaluate both routes, the closed-form Dirichlet kernel of a single steering
vector, and sums of kernels for several modes.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .array_model import ArrayGeometry
from .errors import DomainError, InvalidScenarioError

SINGULAR_TOL = 1e-9
DEFAULT_GRID = 1024


def wrap_angle(mu):
    """Map angular frequencies into ``[-pi, pi)``."""
    return np.mod(np.asarray(mu, dtype=float) + np.pi, 2 * np.pi) - np.pi


def mu_grid(n: int = DEFAULT_GRID) -> np.ndarray:
    """``n`` uniformly spaced points on ``[-pi, pi)``."""
    return -np.pi + 2 * np.pi * np.arange(n) / n


@dataclass(frozen=True)
class ModeSet:
    """Distinct angular frequencies of D superposed steering vectors."""

    mus: tuple[float, ...]

    def __post_init__(self):
        mus = tuple(float(m) for m in np.atleast_1d(self.mus))
        object.__setattr__(self, "mus", mus)
        if not mus:
            raise InvalidScenarioError("mode set is empty")
        if any(not (-math.pi <= m < math.pi) for m in mus):
            raise InvalidScenarioError(f"modes must lie in [-pi, pi), got {mus}")
        if len(set(mus)) != len(mus):
            raise InvalidScenarioError(f"modes must be distinct, got {mus}")

    def __len__(self):
        return len(self.mus)

    def validate_for(self, M: int) -> None:
        if len(self) > M - 1:
            raise InvalidScenarioError(f"at most M-1 = {M - 1} modes allowed, got {len(self)}")

    def steering_sum(self, M: int) -> np.ndarray:
        m = np.arange(M)
        return np.exp(1j * np.outer(m, self.mus)).sum(axis=1)


def phase_related_modes(M: int, D: int, k: int = 1, mu0: float = 0.0) -> ModeSet:
    """Modes spaced ``2*pi*k/(M-1)`` apart, starting at ``mu0``.

    Raises InvalidScenarioError when the spacing wraps onto an existing
    mode (``(M-1)/gcd(k, M-1) < D``).
    """
    steps = [(k * d) % (M - 1) for d in range(D)]
    if len(set(steps)) != D:
        raise InvalidScenarioError(f"k={k} wraps onto an existing mode for M={M}, D={D}")
    return ModeSet(tuple(wrap_angle(mu0 + 2 * np.pi * np.array(steps) / (M - 1))))


@dataclass
class BeamResponseGrid:
    mu_values: np.ndarray
    response: np.ndarray
    weights: np.ndarray
    spacing_ratio: float = 0.5

    def __post_init__(self):
        self.mu_values = np.asarray(self.mu_values, dtype=float)
        self.response = np.asarray(self.response, dtype=complex)
        if self.mu_values.shape != self.response.shape:
            raise DomainError("grid and response lengths differ")
        if np.any(np.diff(self.mu_values) <= 0):
            raise DomainError("grid must be strictly increasing")

    @property
    def theta_deg(self) -> np.ndarray:
        """Angle per grid point; NaN outside the visible region."""
        s = self.mu_values / (2 * np.pi * self.spacing_ratio)
        out = np.full(s.shape, np.nan)
        ok = np.abs(s) <= 1
        out[ok] = np.degrees(np.arcsin(s[ok]))
        return out

    def rows(self) -> Iterable[tuple]:
        for mu, th, r in zip(self.mu_values, self.theta_deg, self.response):
            yield (repr(float(mu)), repr(float(th)), repr(float(r.real)), repr(float(r.imag)), repr(float(abs(r))))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["mu", "theta_deg", "re", "im", "abs"])
            w.writerows(self.rows())


def dsft_eval(sequence, mu):
    """``sum_m x(m) exp(-i mu m)`` over ``m = 0..M-1``; ``mu`` may be an array."""
    x = np.asarray(sequence, dtype=complex)
    mu_arr = np.asarray(mu, dtype=float)
    kernel = np.exp(-1j * np.multiply.outer(mu_arr, np.arange(x.size)))
    return kernel @ x


def dirichlet_response(M: int, mu, mu0: float):
    """Closed-form DSFT of the steering vector at ``mu0`` (causal Dirichlet kernel).

    Near the removable singularity (``|mu - mu0| < 1e-9`` modulo 2*pi) a
    second-order Taylor expansion of the ratio of sines is used instead.
    """
    if M < 2:
        raise DomainError("Dirichlet kernel needs M >= 2")
    x = wrap_angle(np.asarray(mu, dtype=float) - mu0)
    phase = np.exp(-1j * x * (M - 1) / 2)
    small = np.abs(x) < SINGULAR_TOL
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(small, 0.0, np.sin(M * x / 2) / np.sin(x / 2))
    ratio = np.where(small, M * (1 - (M * M - 1) * x * x / 24), ratio)
    out = phase * ratio
    return out if out.ndim else complex(out)


def beam_response(weights, mu):
    """``w^H a(mu)``, computed as the conjugate DSFT of the weights."""
    return np.conj(dsft_eval(weights, mu))


def sum_mode_response(modes: ModeSet, M: int, mu):
    """Sum of Dirichlet kernels centred on each mode."""
    return sum(dirichlet_response(M, mu, m) for m in modes.mus)


def sum_norm_squared(modes: ModeSet, M: int) -> float:
    """``||sum_d a_d||^2`` via the unfolded double sum over mode pairs."""
    mus = np.asarray(modes.mus)
    D = mus.size
    m = np.arange(1, M)
    total = D * D + D * (M - 1)
    for i in range(D):
        for d in range(i + 1, D):
            total += 2 * np.sum(np.cos((mus[i] - mus[d]) * m))
    return float(total)


def impact_factor(modes: ModeSet, M: int, i: int) -> float:
    """Relative deviation of ``|A(e^{i mu_i})|`` from ``||a||^2 / D``."""
    D = len(modes)
    if not 0 <= i < D:
        raise DomainError(f"mode index {i} out of range for D = {D}")
    A_i = sum_mode_response(modes, M, modes.mus[i])
    return D * abs(A_i) / sum_norm_squared(modes, M) - 1


def phase_related_angles(
    theta_i_deg: float,
    geometry: ArrayGeometry,
    k_list: Sequence[int] = (1,),
    branch: str = "minus",
) -> list[float]:
    """Angles whose spatial frequency differs from ``theta_i`` by ``k*2*pi/(M-1)``.

    ``branch`` is ``"minus"``, ``"plus"`` or ``"both"``. Candidates whose
    sine falls outside [-1, 1] are dropped with a ``RuntimeWarning``.
    """
    signs = {"minus": (-1,), "plus": (1,), "both": (-1, 1)}.get(branch)
    if signs is None:
        raise DomainError(f"unknown branch {branch!r}")
    step = 1.0 / (geometry.spacing_ratio * (geometry.num_elements - 1))
    base = math.sin(math.radians(theta_i_deg))
    out, dropped = [], []
    for k in k_list:
        for sgn in signs if k else (1,):
            s = base + sgn * k * step
            if abs(s) <= 1:
                out.append(math.degrees(math.asin(s)))
            else:
                dropped.append(sgn * k)
    if dropped:
        warnings.warn(f"phase-related offsets {dropped} leave the visible region", RuntimeWarning, stacklevel=2)
    if not out:
        raise DomainError("no phase-related angle lies in the visible region")
    return out
