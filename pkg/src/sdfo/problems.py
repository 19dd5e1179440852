"""Benchmark objectives with known optima for experiments and diagnostics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class TestProblem:
    """A deterministic objective used as the ground truth behind a noisy oracle.

    ``eval_true`` must be deterministic.  ``optimum_value`` and
    ``stationary_points`` are populated for benchmark problems where they
    are known; diagnostics that need them raise otherwise.
    """

    dimension: int
    eval_true: Callable[[np.ndarray], float]
    optimum_value: float | None = None
    lipschitz_hint: float | None = None
    name: str = ""
    stationary_points: tuple[tuple[float, ...], ...] | None = None

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dimension}")

    def check_point(self, x) -> np.ndarray:
        pt = np.asarray(x, dtype=float)
        if pt.shape != (self.dimension,):
            raise ValueError(
                f"point has shape {pt.shape}, expected ({self.dimension},)"
            )
        return pt


def _sphere(x: np.ndarray) -> float:
    return float(x @ x)


def _rosenbrock(x: np.ndarray) -> float:
    return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2))


def _l1norm(x: np.ndarray) -> float:
    return float(np.sum(np.abs(x)))


def _max_quadratics(x: np.ndarray) -> float:
    # Three convex quadratics whose pointwise max has a kink through the
    # origin; the global minimizer is exactly 0 with value 0.
    sq = float(x @ x)
    j = 1 if x.shape[0] >= 2 else 0
    q1 = 0.5 * sq + float(x[0])
    q2 = 0.5 * sq - float(x[0])
    q3 = sq + 0.3 * float(x[j])
    return max(q1, q2, q3)


def _piecewise_linear(x: np.ndarray) -> float:
    # max_i(+/- x_i - 1) = ||x||_inf - 1: piecewise linear, minimum -1 at 0.
    return float(np.max(np.abs(x))) - 1.0


def make_sphere(dimension: int) -> TestProblem:
    return TestProblem(
        dimension=dimension,
        eval_true=_sphere,
        optimum_value=0.0,
        lipschitz_hint=None,
        name="sphere",
        stationary_points=(tuple([0.0] * dimension),),
    )


def make_rosenbrock(dimension: int) -> TestProblem:
    if dimension < 2:
        raise ValueError("rosenbrock requires dimension >= 2")
    return TestProblem(
        dimension=dimension,
        eval_true=_rosenbrock,
        optimum_value=0.0,
        name="rosenbrock",
        stationary_points=(tuple([1.0] * dimension),),
    )


def make_l1norm(dimension: int) -> TestProblem:
    return TestProblem(
        dimension=dimension,
        eval_true=_l1norm,
        optimum_value=0.0,
        lipschitz_hint=float(np.sqrt(dimension)),
        name="l1norm",
        stationary_points=(tuple([0.0] * dimension),),
    )


def make_max_quadratics(dimension: int) -> TestProblem:
    return TestProblem(
        dimension=dimension,
        eval_true=_max_quadratics,
        optimum_value=0.0,
        name="max_quadratics",
        stationary_points=(tuple([0.0] * dimension),),
    )


def make_piecewise_linear(dimension: int) -> TestProblem:
    return TestProblem(
        dimension=dimension,
        eval_true=_piecewise_linear,
        optimum_value=-1.0,
        lipschitz_hint=1.0,
        name="piecewise_linear",
        stationary_points=(tuple([0.0] * dimension),),
    )


PROBLEM_BUILDERS: dict[str, Callable[[int], TestProblem]] = {
    "sphere": make_sphere,
    "rosenbrock": make_rosenbrock,
    "l1norm": make_l1norm,
    "max_quadratics": make_max_quadratics,
    "piecewise_linear": make_piecewise_linear,
}


def list_problems() -> tuple[str, ...]:
    return tuple(sorted(PROBLEM_BUILDERS))


def get_problem(name: str, dimension: int) -> TestProblem:
    try:
        builder = PROBLEM_BUILDERS[name]
    except KeyError:
        known = ", ".join(list_problems())
        raise ValueError(f"unknown problem {name!r}; registry contains: {known}") from None
    return builder(dimension)
