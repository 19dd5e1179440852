"""Exact minimization of a quadratic model over a Euclidean ball.

The solver characterizes the global minimizer of
``g @ s + 0.5 * s @ B @ s`` on ``||s|| <= radius`` through its optimality
system: ``(B + lam I) s = -g`` with ``lam >= max(0, -lambda_min(B))`` and
``lam * (radius - ||s||) = 0``.  A full symmetric eigendecomposition makes
the boundary equation one-dimensional (safeguarded Newton on the secular
equation), and the degenerate case where the gradient is orthogonal to
the lowest eigenspace is closed with an explicit eigenvector correction.
A sampling-based verifier provides an independent check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import jacobi_eigendecomposition

_SYMMETRY_TOL = 1e-12
_UNIT_TOL = 1e-12
_HARD_CASE_TOL = 1e-12
_BOUNDARY_RTOL = 1e-10
_MAX_NEWTON = 100


@dataclass(frozen=True)
class QuadraticModel:
    """Unit model gradient ``g``, symmetric matrix ``B``, ball radius."""

    g: np.ndarray
    B: np.ndarray
    radius: float

    def __post_init__(self) -> None:
        g = np.asarray(self.g, dtype=float)
        b = np.asarray(self.B, dtype=float)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "B", b)
        if g.ndim != 1:
            raise ValueError("model gradient must be a vector")
        n = g.shape[0]
        if b.shape != (n, n):
            raise ValueError(f"matrix shape {b.shape} does not match gradient length {n}")
        if not np.all(np.isfinite(g)) or not np.all(np.isfinite(b)):
            raise ValueError("model entries must be finite")
        if not math.isfinite(self.radius) or self.radius <= 0.0:
            raise ValueError("radius must be positive and finite")
        if np.max(np.abs(b - b.T)) > _SYMMETRY_TOL:
            raise ValueError("matrix must be symmetric within 1e-12 elementwise")
        if abs(np.linalg.norm(g) - 1.0) > _UNIT_TOL:
            raise ValueError("model gradient must have unit norm within 1e-12")


@dataclass(frozen=True)
class SubproblemSolution:
    s: np.ndarray
    multiplier: float
    on_boundary: bool
    model_decrease: float


def model_value(model: QuadraticModel, s: np.ndarray) -> float:
    s = np.asarray(s, dtype=float)
    return float(model.g @ s + 0.5 * (s @ (model.B @ s)))


def _shifted_norm(a: np.ndarray, w: np.ndarray, lam: float) -> float:
    """||s(lam)|| for s(lam) = -(B + lam I)^-1 g in the eigenbasis."""
    denom = w + lam
    total = 0.0
    for ai, di in zip(a, denom):
        if di == 0.0:
            if ai != 0.0:
                return math.inf
            continue
        term = ai / di
        total += term * term
    return math.sqrt(total)


def solve_exact(model: QuadraticModel) -> SubproblemSolution:
    """Global minimizer of the model over the ball.

    Satisfies the optimality certificate: ``||s|| <= radius``,
    ``(B + lam I)`` positive semidefinite, and ``lam (radius - ||s||) = 0``
    to the documented tolerances.
    """
    g = model.g
    radius = model.radius
    n = g.shape[0]

    if not model.B.any():
        # Linear model: the minimizer is exactly -radius * g on the boundary.
        s = -radius * g
        return SubproblemSolution(
            s=s,
            multiplier=float(np.linalg.norm(g)) / radius,
            on_boundary=True,
            model_decrease=model_value(model, s),
        )

    w, q = jacobi_eigendecomposition(model.B)
    a = q.T @ g
    w_min = float(w[0])

    if w_min > 0.0:
        newton_coef = -a / w
        newton_norm = float(np.linalg.norm(newton_coef))
        if newton_norm <= radius:
            s = q @ newton_coef
            return SubproblemSolution(
                s=s,
                multiplier=0.0,
                on_boundary=newton_norm >= radius * (1.0 - _BOUNDARY_RTOL),
                model_decrease=model_value(model, s),
            )

    lam_floor = max(0.0, -w_min)
    spread = max(1.0, abs(w_min), abs(float(w[-1])))
    lowest = w <= w_min + 1e-10 * spread
    lowest_mass = float(np.linalg.norm(a[lowest]))

    if w_min <= 0.0 and lowest_mass <= _HARD_CASE_TOL:
        # Gradient (numerically) orthogonal to the lowest eigenspace: the
        # shifted system at lam = max(0, -lambda_min) may have a short
        # solution.  For a strictly negative lowest eigenvalue the
        # multiplier is positive, so complementarity forces the boundary
        # and a lowest-eigenvector component reaches it; for a singular
        # positive-semidefinite matrix the short solution is already
        # optimal with zero multiplier.
        coef = np.zeros(n)
        rest = ~lowest
        coef[rest] = -a[rest] / (w[rest] + lam_floor)
        part_norm = float(np.linalg.norm(coef))
        if part_norm <= radius:
            if lam_floor > 0.0:
                bump = math.sqrt(max(0.0, radius * radius - part_norm * part_norm))
                coef[int(np.argmax(lowest))] = bump
                s = q @ coef
                return SubproblemSolution(
                    s=s,
                    multiplier=lam_floor,
                    on_boundary=True,
                    model_decrease=model_value(model, s),
                )
            s = q @ coef
            return SubproblemSolution(
                s=s,
                multiplier=0.0,
                on_boundary=part_norm >= radius * (1.0 - _BOUNDARY_RTOL),
                model_decrease=model_value(model, s),
            )

    # Boundary root of 1/||s(lam)|| = 1/radius on (lam_floor, hi].
    a_norm = float(np.linalg.norm(a))
    lo = lam_floor
    hi = lam_floor + a_norm / radius
    lam = 0.5 * (lo + hi)
    for _ in range(_MAX_NEWTON):
        nrm = _shifted_norm(a, w, lam)
        if nrm == math.inf:
            lo = lam
            lam = 0.5 * (lo + hi)
            continue
        if abs(nrm - radius) <= _BOUNDARY_RTOL * radius:
            break
        phi = 1.0 / nrm - 1.0 / radius
        if phi < 0.0:
            lo = lam
        else:
            hi = lam
        denom = w + lam
        dphi = float(np.sum((a * a) / (denom * denom * denom))) / nrm**3
        step = -phi / dphi if dphi > 0.0 else math.nan
        candidate = lam + step
        if not math.isfinite(candidate) or not lo < candidate < hi:
            candidate = 0.5 * (lo + hi)
        lam = candidate

    coef = -a / (w + lam)
    s = q @ coef
    norm_s = float(np.linalg.norm(s))
    if norm_s > 0.0:
        s = s * (radius / norm_s)
    return SubproblemSolution(
        s=s,
        multiplier=lam,
        on_boundary=True,
        model_decrease=model_value(model, s),
    )


def brute_force_min(
    model: QuadraticModel,
    n_samples: int,
    seed: int = 0,
    include_candidates: bool = True,
) -> tuple[np.ndarray, float]:
    """Independent sampling-based verifier for :func:`solve_exact`.

    Evaluates the model at ``n_samples`` points uniform in the ball, at the
    center, at ``+/- radius`` times each eigenvector, and at the Newton
    point projected into the ball; returns the best point and value found.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    n = model.g.shape[0]
    radius = model.radius
    rng = np.random.default_rng(seed)

    candidates = [np.zeros(n)]
    if include_candidates:
        w, q = jacobi_eigendecomposition(model.B)
        for i in range(n):
            candidates.append(radius * q[:, i])
            candidates.append(-radius * q[:, i])
        a = q.T @ model.g
        scale = max(1.0, float(np.max(np.abs(w))))
        invertible = np.abs(w) > 1e-12 * scale
        if np.all(invertible):
            newton = q @ (-a / w)
            norm_newton = float(np.linalg.norm(newton))
            if norm_newton > radius:
                newton = newton * (radius / norm_newton)
            candidates.append(newton)

    z = rng.standard_normal((n_samples, n))
    norms = np.linalg.norm(z, axis=1)
    norms[norms == 0.0] = 1.0
    radii = radius * rng.random(n_samples) ** (1.0 / n)
    points = z * (radii / norms)[:, None]

    all_points = np.vstack([np.asarray(candidates), points])
    values = all_points @ model.g + 0.5 * np.einsum(
        "ij,ij->i", all_points @ model.B, all_points
    )
    best = int(np.argmin(values))
    return all_points[best].copy(), float(values[best])


def kkt_residuals(model: QuadraticModel, sol: SubproblemSolution) -> dict[str, float]:
    """Optimality-certificate residuals (all should be <= small tolerances)."""
    s = sol.s
    lam = sol.multiplier
    norm_s = float(np.linalg.norm(s))
    w, _ = jacobi_eigendecomposition(model.B)
    return {
        "norm_excess": norm_s - model.radius,
        "psd_margin": float(w[0]) + lam,
        "complementarity": lam * (model.radius - norm_s),
        "stationarity": float(np.linalg.norm(model.B @ s + lam * s + model.g)),
    }
