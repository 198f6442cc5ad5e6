"""Root polynomial, model-order selection, DOA and pseudoinverse steering.

A weight vector ``v`` defines ``P(z) = sum_m conj(v_m) z^m - C``, i.e. the
beam response ``v^H a(mu)`` minus a target level ``C`` evaluated on
``z = exp(i mu)``. Sources sit where the response hits the target, so
their directions are the arguments of the roots on (or nearest to) the
unit circle. For a steering-vector sum the target is ``M + D - 1``; for
the LMS predictor it is 1.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Literal, Sequence

import numpy as np

from .array_model import ArrayGeometry, steering_matrix
from .dsft import beam_response
from .errors import (
    DegenerateInputError,
    DegeneratePolynomialError,
    DomainError,
    EmptyModelError,
    IllConditionedError,
    NoValidAngleError,
)
from .numerics import companion_eigenvalues, condition_number, hpd_solve, simultaneous_roots

LEADING_TOL = 1e-12
MAX_CONDITION = 1e12
MERGE_DEG = 0.1

SelectionMode = Literal["unit_distance", "beam_response"]


@dataclass(frozen=True)
class RootPolynomial:
    """Monic polynomial, ascending powers, built from weights and a target."""

    coefficients: np.ndarray
    target: float

    @property
    def degree(self) -> int:
        return self.coefficients.size - 1

    def __call__(self, z):
        acc = np.zeros_like(np.asarray(z, dtype=complex))
        for c in self.coefficients[::-1]:
            acc = acc * z + c
        return acc


@dataclass(frozen=True)
class RootSet:
    roots: np.ndarray
    unit_distance: np.ndarray
    beam_score: np.ndarray
    selected: np.ndarray

    @classmethod
    def from_roots(cls, roots) -> "RootSet":
        roots = np.asarray(roots, dtype=complex)
        # stable order: by argument, then modulus
        order = np.lexsort((np.abs(roots), np.angle(roots)))
        roots = roots[order]
        n = roots.size
        return cls(roots, np.abs(roots) - 1, np.full(n, np.nan), np.zeros(n, dtype=bool))

    @property
    def model_order(self) -> int:
        return int(self.selected.sum())

    @property
    def selected_roots(self) -> np.ndarray:
        return self.roots[self.selected]

    def rows(self):
        for z, dist, score, sel in zip(self.roots, self.unit_distance, self.beam_score, self.selected):
            yield (repr(float(z.real)), repr(float(z.imag)), repr(float(dist)), repr(float(score)), int(sel))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["re", "im", "abs_minus_1", "beam_score", "selected"])
            w.writerows(self.rows())


@dataclass
class DoaEstimate:
    angles_deg: np.ndarray
    model_order: int
    response_matrix: np.ndarray = field(repr=False)
    steering_weights: np.ndarray = field(repr=False)

    def to_record(self) -> dict:
        return {
            "model_order": self.model_order,
            "angles_deg": [float(a) for a in self.angles_deg],
        }


def build_polynomial(v, C: float) -> RootPolynomial:
    """``conj(v)`` with ``C`` subtracted from the constant term, made monic.

    Raises DegeneratePolynomialError when ``|v_{M-1}| <= 1e-12``.
    """
    v = np.asarray(v, dtype=complex)
    if v.size < 2:
        raise DomainError("need at least two weights")
    lead = np.conj(v[-1])
    if abs(lead) <= LEADING_TOL:
        raise DegeneratePolynomialError("leading weight vanishes; deflate the degree first")
    c = np.conj(v)
    c[0] -= C
    return RootPolynomial(c / lead, float(C))


def precond_polynomial(u) -> RootPolynomial:
    """Prediction-error polynomial of an LMS predictor (``u_0`` pinned to 0)."""
    u = np.array(u, dtype=complex)
    u[0] = 0.0
    return build_polynomial(u, 1.0)


def find_roots(p: RootPolynomial, method: Literal["aberth", "companion"] = "companion") -> RootSet:
    """All roots of ``p``.

    ``companion`` (eigenvalues of the companion matrix) is backward stable
    even for clustered roots; ``aberth`` is an independent simultaneous
    iteration used to cross-check it.
    """
    if p.degree < 1:
        raise DomainError("polynomial must have degree >= 1")
    if method == "aberth":
        z = simultaneous_roots(p)
    elif method == "companion":
        z = companion_eigenvalues(p)
    else:
        raise DomainError(f"unknown root method {method!r}")
    return RootSet.from_roots(z)


def analytic_roots_two_sources(v1: complex) -> tuple[complex, complex]:
    """Closed-form roots for two equal-amplitude sources.

    ``v1`` is element 1 of the steering-vector sum, ``e^{i mu1} + e^{i mu2}``.
    The product term is rebuilt as ``cos(mu1+mu2) + i sin(arccos(...))``,
    which takes the non-negative sine branch and so assumes
    ``mu1 + mu2`` lies in ``[0, pi]`` modulo ``2*pi``.
    """
    v1 = complex(v1)
    mag2 = abs(v1) ** 2
    if mag2 == 0.0:
        raise DegenerateInputError("v1 = 0: antipodal modes leave the product undetermined")
    re_q0 = (v1.real ** 2 - v1.imag ** 2) / mag2
    re_q0 = min(1.0, max(-1.0, re_q0))
    q0 = complex(re_q0, math.sin(math.acos(re_q0)))
    q1 = -v1
    disc = np.sqrt(complex(q1 * q1 / 4 - q0))
    return complex(-q1 / 2 + disc), complex(-q1 / 2 - disc)


def root_angles(roots, geometry: ArrayGeometry) -> np.ndarray:
    """Arrival angle per root; NaN where ``|arg z / (2 pi Delta/lambda)| > 1``."""
    s = np.angle(np.asarray(roots, dtype=complex)) / (2 * np.pi * geometry.spacing_ratio)
    out = np.full(s.shape, np.nan)
    ok = np.abs(s) <= 1
    out[ok] = np.degrees(np.arcsin(s[ok]))
    return out


def score_roots(rs: RootSet, weights) -> RootSet:
    """Fill ``beam_score`` with ``Re(w^H a(arg z))`` for every root."""
    scores = np.real(beam_response(weights, np.angle(rs.roots)))
    return replace(rs, beam_score=np.atleast_1d(scores).astype(float))


def select_roots(
    rs: RootSet,
    weights,
    mode: SelectionMode = "beam_response",
    threshold: float | None = None,
    count: int | None = None,
) -> RootSet:
    """Flag the signal roots and return the updated set.

    ``unit_distance`` keeps roots with ``||z| - 1| < threshold`` (default
    1e-3). ``beam_response`` keeps roots whose real beam score exceeds
    ``threshold`` times the largest score (default 0.5). With ``count``
    given, the ``count`` best roots under the chosen criterion are kept
    instead of thresholding. ``model_order`` on the result is the
    estimated number of sources.

    Raises EmptyModelError when nothing is selected.
    """
    rs = score_roots(rs, weights)
    if mode == "unit_distance":
        merit = -np.abs(rs.unit_distance)
        threshold = 1e-3 if threshold is None else threshold
        keep = np.abs(rs.unit_distance) < threshold
    elif mode == "beam_response":
        merit = rs.beam_score
        threshold = 0.5 if threshold is None else threshold
        top = merit.max()
        keep = merit > threshold * top if top > 0 else np.zeros(merit.size, dtype=bool)
    else:
        raise DomainError(f"unknown selection mode {mode!r}")
    if count is not None:
        if not 1 <= count <= rs.roots.size:
            raise DomainError(f"count must lie in 1..{rs.roots.size}")
        keep = np.zeros(rs.roots.size, dtype=bool)
        keep[np.argsort(-merit, kind="stable")[:count]] = True
    if not keep.any():
        raise EmptyModelError(f"no root passes the {mode} criterion")
    return replace(rs, selected=keep)


def doa_from_roots(rs, geometry: ArrayGeometry) -> list[float]:
    """Angles of the selected roots; roots outside the visible region are skipped."""
    roots = rs.selected_roots if isinstance(rs, RootSet) else np.asarray(rs, dtype=complex)
    angles = root_angles(roots, geometry)
    valid = angles[~np.isnan(angles)]
    if valid.size == 0:
        raise NoValidAngleError("no selected root maps to a visible direction")
    return sorted(float(a) for a in valid)


def merge_close_angles(angles_deg: Sequence[float], min_sep: float = MERGE_DEG) -> list[float]:
    """Average runs of sorted angles closer than ``min_sep`` degrees."""
    out: list[list[float]] = []
    for a in sorted(angles_deg):
        if out and a - out[-1][-1] < min_sep:
            out[-1].append(a)
        else:
            out.append([a])
    return [float(np.mean(g)) for g in out]


def reconstruct_and_precondition(angles_deg: Sequence[float], geometry: ArrayGeometry) -> DoaEstimate:
    """Steering matrix ``A`` of the estimates and ``W = A (A^H A)^{-1}``.

    ``W^H A = I``, so column d of ``W`` passes source d with unit gain and
    nulls the others.
    """
    angles = merge_close_angles(angles_deg)
    if not angles:
        raise DomainError("no angles given")
    if len(angles) > geometry.num_elements:
        raise IllConditionedError("more directions than array elements")
    A = steering_matrix(geometry, angles)
    G = A.conj().T @ A
    cond = condition_number(G)
    if cond > MAX_CONDITION:
        raise IllConditionedError(f"steering matrix is rank deficient (condition {cond:.3g})")
    W = hpd_solve(G, A.conj().T).conj().T
    return DoaEstimate(np.array(angles), len(angles), A, W)
