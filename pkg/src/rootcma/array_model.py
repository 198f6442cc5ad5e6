"""Uniform linear array measurement model ``X = A diag(c) S^H + N``.

Angles are given in degrees at the API boundary and converted to radians
internally. The first element is the phase reference at the origin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError, InvalidScenarioError

QPSK = np.exp(1j * (np.pi / 4 + np.pi / 2 * np.arange(4)))


@dataclass(frozen=True)
class ArrayGeometry:
    """ULA with ``num_elements`` sensors spaced ``spacing_ratio`` wavelengths apart."""

    num_elements: int
    spacing_ratio: float = 0.5

    def __post_init__(self):
        if int(self.num_elements) != self.num_elements or self.num_elements < 2:
            raise InvalidScenarioError(f"num_elements must be an integer >= 2, got {self.num_elements}")
        if not (math.isfinite(self.spacing_ratio) and self.spacing_ratio > 0):
            raise InvalidScenarioError(f"spacing_ratio must be finite and positive, got {self.spacing_ratio}")


@dataclass(frozen=True)
class SourceConfig:
    angle_deg: float
    amplitude: float = 1.0

    def __post_init__(self):
        if not abs(self.angle_deg) < 90:
            raise InvalidScenarioError(f"source angle must lie in (-90, 90) deg, got {self.angle_deg}")
        if not (math.isfinite(self.amplitude) and self.amplitude > 0):
            raise InvalidScenarioError(f"source amplitude must be positive, got {self.amplitude}")


@dataclass(frozen=True)
class Scenario:
    """Everything needed to draw one synthetic dataset.

    ``snr_db = inf`` disables noise. The SNR is referenced to the strongest
    source: ``sigma^2 = c_max^2 / 10^(snr_db/10)``.
    """

    geometry: ArrayGeometry
    sources: tuple[SourceConfig, ...]
    snr_db: float = math.inf
    num_snapshots: int = 8000
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(self.sources))
        M = self.geometry.num_elements
        D = len(self.sources)
        if not 1 <= D <= M - 1:
            raise InvalidScenarioError(f"need 1 <= D <= M-1 = {M - 1} sources, got {D}")
        if self.num_snapshots < 10 * M:
            raise InvalidScenarioError(
                f"num_snapshots must be at least 10*M = {10 * M}, got {self.num_snapshots}"
            )
        angles = [s.angle_deg for s in self.sources]
        if len(set(angles)) != len(angles):
            raise InvalidScenarioError(f"source angles must be distinct, got {angles}")
        if math.isnan(self.snr_db):
            raise InvalidScenarioError("snr_db is NaN")

    @property
    def noise_free(self) -> bool:
        return math.isinf(self.snr_db) and self.snr_db > 0

    @property
    def angles_deg(self) -> np.ndarray:
        return np.array([s.angle_deg for s in self.sources])

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([s.amplitude for s in self.sources])

    @property
    def noise_variance(self) -> float:
        if self.noise_free:
            return 0.0
        return float(self.amplitudes.max() ** 2 / 10 ** (self.snr_db / 10))


@dataclass(frozen=True)
class SignalMatrix:
    """N x D unit-modulus symbols, one column per source."""

    entries: np.ndarray

    @property
    def num_sources(self) -> int:
        return self.entries.shape[1]


@dataclass(frozen=True)
class SnapshotMatrix:
    """M x N array measurements together with the draw that produced them."""

    entries: np.ndarray
    scenario: Scenario | None = None
    signals: SignalMatrix | None = field(default=None, repr=False)

    def __post_init__(self):
        X = np.asarray(self.entries)
        if X.ndim != 2:
            raise InvalidScenarioError("snapshot matrix must be two-dimensional")
        if self.scenario is not None:
            expect = (self.scenario.geometry.num_elements, self.scenario.num_snapshots)
            if X.shape != expect:
                raise InvalidScenarioError(f"snapshot matrix shape {X.shape} != {expect}")
        if not np.all(np.isfinite(X)):
            raise InvalidScenarioError("snapshot matrix contains non-finite entries")

    @property
    def shape(self):
        return self.entries.shape


def _as_snapshots(X) -> np.ndarray:
    return np.asarray(X.entries if isinstance(X, SnapshotMatrix) else X, dtype=complex)


def spatial_frequency(geometry: ArrayGeometry, angle_deg: float) -> float:
    """``xi = (Delta/lambda) sin(theta)``; multiply by 2*pi for ``mu``."""
    if not abs(angle_deg) < 90:
        raise DomainError(f"angle must lie in (-90, 90) deg, got {angle_deg}")
    return geometry.spacing_ratio * math.sin(math.radians(angle_deg))


def angular_frequency(geometry: ArrayGeometry, angle_deg: float) -> float:
    return 2 * math.pi * spatial_frequency(geometry, angle_deg)


def steering_vector(geometry: ArrayGeometry | int, mu: float) -> np.ndarray:
    """Vandermonde column ``[1, z, ..., z^(M-1)]`` with ``z = exp(i mu)``."""
    M = geometry if isinstance(geometry, (int, np.integer)) else geometry.num_elements
    return np.exp(1j * mu * np.arange(M))


def steering_matrix(geometry: ArrayGeometry, angles_deg: Sequence[float]) -> np.ndarray:
    """M x D matrix whose columns are the steering vectors of ``angles_deg``."""
    angles = list(angles_deg)
    if len(set(angles)) != len(angles):
        raise InvalidScenarioError(f"steering angles must be distinct, got {angles}")
    mus = [angular_frequency(geometry, a) for a in angles]
    return np.column_stack([steering_vector(geometry, mu) for mu in mus]).reshape(
        geometry.num_elements, len(mus)
    )


def trial_seed_sequence(seed: int, trial: int = 0) -> np.random.SeedSequence:
    """Independent stream per (seed, trial) pair."""
    return np.random.SeedSequence([int(seed), int(trial)])


def generate_cm_signals(D: int, N: int, seed=0) -> SignalMatrix:
    """I.i.d. QPSK symbols ``(+-1 +- i)/sqrt(2)``, shape N x D.

    ``seed`` may be an int, a ``SeedSequence`` or a ``Generator``.
    """
    if N < 1 or D < 1:
        raise DomainError("need N >= 1 and D >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return SignalMatrix(QPSK[rng.integers(0, 4, size=(N, D))])


def synthesize(scenario: Scenario, trial: int = 0) -> SnapshotMatrix:
    """Draw ``X = A diag(c) S^H + N`` for one Monte Carlo trial.

    Symbols and noise come from separate child streams, so toggling the
    noise leaves the symbols unchanged.
    """
    geo = scenario.geometry
    sig_ss, noise_ss = trial_seed_sequence(scenario.seed, trial).spawn(2)
    S = generate_cm_signals(len(scenario.sources), scenario.num_snapshots, sig_ss)
    A = steering_matrix(geo, scenario.angles_deg)
    X = A @ np.diag(scenario.amplitudes) @ S.entries.conj().T
    if not scenario.noise_free:
        rng = np.random.default_rng(noise_ss)
        shape = (geo.num_elements, scenario.num_snapshots)
        scale = math.sqrt(scenario.noise_variance / 2)
        X = X + scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    return SnapshotMatrix(X, scenario, S)
