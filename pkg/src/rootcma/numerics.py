"""Small dense complex numerics: HPD solves and two polynomial root finders.

Polynomials are passed as coefficient vectors in ascending powers
(constant term first). Anything with a ``coefficients`` attribute is
accepted as well, so :class:`rootcma.roots.RootPolynomial` can be handed in
directly.
"""

from __future__ import annotations

import numpy as np
from scipy import linalg

from .errors import (
    DegeneratePolynomialError,
    DomainError,
    NotPositiveDefiniteError,
    NumericFailureError,
)

HERMITIAN_TOL = 1e-10
EPS = np.finfo(float).eps


def _coefficients(p) -> np.ndarray:
    c = np.asarray(getattr(p, "coefficients", p), dtype=complex)
    if c.ndim != 1:
        raise DomainError("coefficient vector must be one-dimensional")
    return c


def monic(p) -> np.ndarray:
    """Return ascending coefficients scaled so the leading one equals 1.

    Trailing (highest-power) zeros are stripped first.
    """
    c = _coefficients(p)
    nz = np.flatnonzero(c)
    if nz.size == 0:
        raise DegeneratePolynomialError("zero polynomial has no roots")
    c = c[: nz[-1] + 1]
    if c.size < 2:
        raise DegeneratePolynomialError("constant polynomial has no roots")
    return c / c[-1]


def polyval(p, z):
    """Evaluate an ascending-coefficient polynomial with Horner's rule."""
    c = _coefficients(p)
    z = np.asarray(z, dtype=complex)
    acc = np.zeros_like(z)
    for a in c[::-1]:
        acc = acc * z + a
    return acc


def expand_roots(roots) -> np.ndarray:
    """Monic ascending coefficients of prod(z - z_m)."""
    c = np.array([1.0 + 0j])
    for r in np.asarray(roots, dtype=complex):
        # multiply by (z - r): shift up one power, subtract r * c
        c = np.concatenate(([0j], c)) - r * np.concatenate((c, [0j]))
    return c


def is_hermitian(G, tol: float = HERMITIAN_TOL) -> bool:
    G = np.asarray(G)
    return G.ndim == 2 and G.shape[0] == G.shape[1] and np.max(np.abs(G - G.conj().T), initial=0.0) <= tol


def condition_number(G) -> float:
    """2-norm condition estimate; ``inf`` for exactly singular input."""
    s = np.linalg.svd(np.asarray(G, dtype=complex), compute_uv=False)
    if s.size == 0 or s[-1] == 0:
        return float("inf")
    return float(s[0] / s[-1])


def hpd_solve(G, b) -> np.ndarray:
    """Solve ``G x = b`` for Hermitian positive-definite ``G`` via Cholesky.

    Raises
    ------
    NotPositiveDefiniteError
        If ``G`` is not Hermitian (within 1e-10) or a Cholesky pivot is
        non-positive.
    """
    G = np.asarray(G, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if not is_hermitian(G):
        raise NotPositiveDefiniteError("matrix is not Hermitian")
    try:
        factor = linalg.cho_factor(G, lower=True, check_finite=True)
    except linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(str(exc)) from exc
    return linalg.cho_solve(factor, b)


def companion_matrix(p) -> np.ndarray:
    """Companion matrix of a polynomial, in MATLAB ``roots`` layout.

    The first row holds the negated normalized coefficients from the
    second-highest power down to the constant term; ones fill the
    subdiagonal.
    """
    c = monic(p)
    n = c.size - 1
    C = np.zeros((n, n), dtype=complex)
    C[0, :] = -c[n - 1 :: -1]
    C[np.arange(1, n), np.arange(n - 1)] = 1.0
    return C


def companion_eigenvalues(p) -> np.ndarray:
    """Roots as eigenvalues of :func:`companion_matrix` (LAPACK QR)."""
    C = companion_matrix(p)
    try:
        return np.linalg.eigvals(C)
    except np.linalg.LinAlgError as exc:
        raise NumericFailureError(f"companion eigen-iteration failed: {exc}") from exc


def root_radius_bound(c) -> float:
    """Fujiwara's upper bound on root moduli of a monic polynomial."""
    c = monic(c)
    n = c.size - 1
    terms = [abs(c[n - k]) ** (1.0 / k) for k in range(1, n)]
    terms.append(abs(c[0] / 2) ** (1.0 / n))
    return 2.0 * max(terms, default=0.0)


def _initial_guesses(c: np.ndarray) -> np.ndarray:
    """Newton-polygon starting points (one circle per upper-hull edge)."""
    n = c.size - 1
    with np.errstate(divide="ignore"):
        logs = np.log(np.abs(c))
    pts = [k for k in range(n + 1) if np.isfinite(logs[k])]
    hull: list[int] = []
    for k in pts:
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            # drop b when it lies on or below the chord a -> k
            if (logs[b] - logs[a]) * (k - a) <= (logs[k] - logs[a]) * (b - a):
                hull.pop()
            else:
                break
        hull.append(k)
    z = np.empty(n, dtype=complex)
    pos = 0
    if hull[0] > 0:
        # zero trailing coefficients: roots at the origin, start them small
        z[: hull[0]] = 1e-3 * np.exp(1j * (2 * np.pi * np.arange(hull[0]) / hull[0] + 0.4))
        pos = hull[0]
    for a, b in zip(hull[:-1], hull[1:]):
        m = b - a
        radius = np.exp((logs[a] - logs[b]) / m)
        z[pos : pos + m] = radius * np.exp(1j * (2 * np.pi * np.arange(m) / m + 0.4 + 2 * np.pi * a / n))
        pos += m
    return z


def simultaneous_roots(p, tol: float = 1e-12, max_sweeps: int = 200) -> np.ndarray:
    """All roots at once by Aberth-Ehrlich iteration.

    Starting points come from the Newton polygon of ``log|c_k|``: one
    circle per hull edge, rotated off the real axis so conjugate-symmetric
    inputs do not stall.

    A root is frozen once its Newton-Aberth correction drops below
    ``tol * max(1, |z|)`` or its residual reaches the rounding floor of
    Horner's rule, whichever comes first. The second test lets multiple
    roots, where convergence is only linear, terminate cleanly.

    Raises
    ------
    NumericFailureError
        After ``max_sweeps`` sweeps without convergence; ``partial`` holds
        the current iterates.
    """
    c = monic(p)
    n = c.size - 1
    if n == 1:
        return np.array([-c[0]])
    z = _initial_guesses(c)
    dc = c[1:] * np.arange(1, n + 1)
    abs_c = np.abs(c)
    active = np.ones(n, dtype=bool)
    for _ in range(max_sweeps):
        for i in np.flatnonzero(active):
            zi = z[i]
            pv = polyval(c, zi)
            floor = 4 * n * EPS * polyval(abs_c, abs(zi)).real
            if abs(pv) <= floor:
                active[i] = False
                continue
            dp = polyval(dc, zi)
            diff = zi - np.delete(z, i)
            if np.any(diff == 0):
                # coincident iterates: nudge apart and retry next sweep
                z[i] = zi + tol * (1 + abs(zi)) * (1 + 1j)
                continue
            ratio = pv / dp if dp != 0 else pv / (tol * (1 + abs(zi)))
            step = ratio / (1.0 - ratio * np.sum(1.0 / diff))
            z[i] = zi - step
            if abs(step) <= tol * max(1.0, abs(z[i])):
                active[i] = False
        if not active.any():
            return _polish_clusters(c, z)
    raise NumericFailureError(
        f"Aberth iteration did not converge in {max_sweeps} sweeps", partial=z.copy()
    )


def _derivative(c: np.ndarray, order: int) -> np.ndarray:
    for _ in range(order):
        c = c[1:] * np.arange(1, c.size)
    return c


def _clusters(z: np.ndarray, radius: float) -> list[np.ndarray]:
    """Single-linkage groups of iterates closer than ``radius * max(1, |z|)``."""
    n = z.size
    label = np.arange(n)
    for i in range(n):
        for j in range(i + 1, n):
            if abs(z[i] - z[j]) < radius * max(1.0, abs(z[i])):
                label[label == label[j]] = label[i]
    return [np.flatnonzero(label == g) for g in np.unique(label)]


def _polish_clusters(c: np.ndarray, z: np.ndarray, radius: float = 1e-4) -> np.ndarray:
    """Re-centre tight clusters on the simple root of ``p^(m-1)`` they surround.

    Iterates of an m-fold root scatter by about ``eps^(1/m)`` and so does
    their mean, which spoils the rebuilt coefficients. The m-1'th
    derivative has a simple, well-conditioned root there; the cluster is
    shifted onto it when that does not raise any residual above the
    rounding floor.
    """
    n = c.size - 1
    abs_c = np.abs(c)
    z = z.copy()
    for idx in _clusters(z, radius):
        m = idx.size
        if m < 2:
            continue
        d = _derivative(c, m - 1)
        dd = _derivative(d, 1)
        centre = z[idx].mean()
        r = centre
        for _ in range(20):
            slope = polyval(dd, r)
            if slope == 0:
                break
            step = polyval(d, r) / slope
            r = r - step
            if abs(step) <= EPS * max(1.0, abs(r)):
                break
        moved = z[idx] + (r - centre)
        floor = 4 * n * EPS * np.array([polyval(abs_c, abs(v)).real for v in moved])
        before = np.abs([polyval(c, v) for v in z[idx]])
        after = np.abs([polyval(c, v) for v in moved])
        if np.all(after <= np.maximum(before, floor)):
            z[idx] = moved
    return z


def pair_roots(a, b) -> tuple[np.ndarray, float]:
    """Greedy nearest-neighbour pairing of two root sets.

    Returns the permutation of ``b`` aligned to ``a`` and the largest
    paired distance.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise DomainError("root sets differ in size")
    dist = np.abs(a[:, None] - b[None, :])
    order = np.full(a.size, -1)
    used_a = np.zeros(a.size, dtype=bool)
    used_b = np.zeros(b.size, dtype=bool)
    for flat in np.argsort(dist, axis=None):
        i, j = divmod(int(flat), b.size)
        if used_a[i] or used_b[j]:
            continue
        order[i] = j
        used_a[i] = used_b[j] = True
    worst = float(np.max(dist[np.arange(a.size), order], initial=0.0))
    return b[order], worst
