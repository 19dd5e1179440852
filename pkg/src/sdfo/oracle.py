"""Noisy function oracles and sample-average estimate construction.

An oracle returns ``f(x) + xi`` for zero-mean noise ``xi``.  Estimates are
built by averaging i.i.d. draws; ``required_samples`` and
``moment_oracle_samples`` give averaging counts under which the estimate
error of the decrease ``f(x) - f(y)`` obeys the tail bounds that the
optimizers assume (finite-variance and finite-moment noise respectively).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .problems import TestProblem

NOISE_KINDS = ("none", "gaussian", "student_t", "pareto_symmetric")


@dataclass(frozen=True)
class NoiseModel:
    """Zero-mean noise attached to a true objective, with declared statistics.

    ``declared_variance`` is an upper bound on the per-sample variance when
    finite.  ``declared_moment`` is a pair ``(r, bound)`` with
    ``E|xi|^r <= bound`` for some ``r`` in (1, 2]; it is mandatory for noise
    whose variance may be infinite (Student-t with df <= 2 and the symmetric
    Pareto construction) and is filled in automatically by the constructors
    below.
    """

    kind: str
    declared_variance: float | None = None
    declared_moment: tuple[float, float] | None = None
    scale: float = 1.0
    df: float | None = None
    tail_index: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}; expected one of {NOISE_KINDS}")
        if self.scale <= 0.0:
            raise ValueError("scale must be positive")
        if self.declared_variance is not None and self.declared_variance <= 0.0:
            raise ValueError("declared_variance must be positive")
        if self.declared_moment is not None:
            r, bound = self.declared_moment
            if not 1.0 < r <= 2.0:
                raise ValueError(f"declared moment order must lie in (1, 2], got {r}")
            if bound <= 0.0:
                raise ValueError("declared moment bound must be positive")
        if self.kind == "gaussian" and self.declared_variance is None:
            raise ValueError("gaussian noise requires a declared variance")
        if self.kind == "student_t":
            if self.df is None or self.df <= 1.0:
                raise ValueError("student_t noise requires df > 1")
            if self.df <= 2.0 and self.declared_moment is None:
                raise ValueError("student_t with df <= 2 must declare a finite r-th moment")
        if self.kind == "pareto_symmetric":
            if self.tail_index is None:
                raise ValueError("pareto_symmetric noise requires a tail index")
            if not 1.0 < self.tail_index <= 2.0:
                raise ValueError("pareto tail index must lie in (1, 2]")
            if self.declared_moment is None:
                raise ValueError("pareto_symmetric must declare a finite r-th moment")

    @staticmethod
    def none() -> "NoiseModel":
        return NoiseModel(kind="none")

    @staticmethod
    def gaussian(variance: float) -> "NoiseModel":
        return NoiseModel(kind="gaussian", declared_variance=float(variance))

    @staticmethod
    def student_t(df: float, scale: float = 1.0) -> "NoiseModel":
        df = float(df)
        scale = float(scale)
        if df > 2.0:
            variance = scale * scale * df / (df - 2.0)
            return NoiseModel(kind="student_t", declared_variance=variance, scale=scale, df=df)
        # Infinite variance: declare the exact r-th absolute moment for an
        # order strictly between 1 and df.
        r = 0.5 * (1.0 + df)
        moment = (
            df ** (r / 2.0)
            * math.gamma((r + 1.0) / 2.0)
            * math.gamma((df - r) / 2.0)
            / (math.sqrt(math.pi) * math.gamma(df / 2.0))
        )
        return NoiseModel(
            kind="student_t",
            declared_moment=(r, moment * scale**r),
            scale=scale,
            df=df,
        )

    @staticmethod
    def pareto_symmetric(r: float, scale: float = 1.0) -> "NoiseModel":
        """Symmetric heavy-tailed noise with finite r-th moment, r in (1, 2].

        Draws are ``sign * (P - E[P]) * scale`` with ``P`` classical Pareto of
        shape ``r + 0.5``, so the variance is infinite for r <= 1.5 while the
        r-th absolute moment stays finite.  The declared bound uses
        ``E|P - mu|^r <= 2^(r-1) (E[P^r] + mu^r)``.
        """
        r = float(r)
        scale = float(scale)
        if not 1.0 < r <= 2.0:
            raise ValueError(f"tail index must lie in (1, 2], got {r}")
        shape = r + 0.5
        mean = shape / (shape - 1.0)
        raw_moment = shape / (shape - r)
        bound = 2.0 ** (r - 1.0) * (raw_moment + mean**r) * scale**r
        variance = None
        if shape > 2.0:
            # Finite variance regime (r > 1.5): Var[P] = a / ((a-1)^2 (a-2)).
            variance = scale * scale * shape / ((shape - 1.0) ** 2 * (shape - 2.0))
        return NoiseModel(
            kind="pareto_symmetric",
            declared_variance=variance,
            declared_moment=(r, bound),
            scale=scale,
            tail_index=r,
        )

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """n zero-mean noise draws from the given generator."""
        if self.kind == "none":
            return np.zeros(n)
        if self.kind == "gaussian":
            return rng.normal(0.0, math.sqrt(self.declared_variance), n)
        if self.kind == "student_t":
            return self.scale * rng.standard_t(self.df, n)
        shape = self.tail_index + 0.5
        pareto = 1.0 + rng.pareto(shape, n)
        signs = 2.0 * rng.integers(0, 2, n) - 1.0
        return self.scale * signs * (pareto - shape / (shape - 1.0))


@dataclass(frozen=True)
class EstimatePair:
    """The two per-iteration estimates used by an acceptance test."""

    est_current: float
    est_trial: float
    samples_current: int
    samples_trial: int

    def __post_init__(self) -> None:
        if self.samples_current < 1 or self.samples_trial < 1:
            raise ValueError("sample counts must be >= 1")


class StochasticOracle:
    """Seeded source of noisy samples ``f(x) + xi`` for a test problem.

    A single instance owns its random stream and is therefore single-owner;
    use :meth:`spawn` to derive independently seeded oracles for parallel or
    per-cell work.  Two oracles built with the same seed produce identical
    sample sequences.
    """

    def __init__(
        self,
        problem: TestProblem,
        noise: NoiseModel,
        seed: int = 0,
        _spawn_key: tuple[int, ...] = (),
    ) -> None:
        self.problem = problem
        self.noise = noise
        self._entropy = int(seed)
        self._spawn_key = tuple(int(k) for k in _spawn_key)
        self._rng = np.random.default_rng(
            np.random.SeedSequence(entropy=self._entropy, spawn_key=self._spawn_key)
        )
        self.draws = 0

    def spawn(self, *key: int) -> "StochasticOracle":
        """A fresh oracle on an independent substream derived from this seed."""
        return StochasticOracle(
            self.problem, self.noise, self._entropy, self._spawn_key + tuple(key)
        )


def sample_estimate(oracle: StochasticOracle, x, n: int) -> float:
    """Arithmetic mean of ``n`` raw oracle samples at ``x``.

    Advances the oracle stream by exactly ``n`` draws.  With noiseless
    oracles the true value is returned exactly, independent of ``n``.
    """
    if n < 1:
        raise ValueError(f"sample count must be >= 1, got {n}")
    point = oracle.problem.check_point(x)
    value = float(oracle.problem.eval_true(point))
    oracle.draws += n
    if oracle.noise.kind == "none":
        return value
    draws = oracle.noise.draw(oracle._rng, n)
    return float(np.mean(value + draws))


def estimate_pair(
    oracle: StochasticOracle,
    x_current,
    x_trial,
    n_current: int,
    n_trial: int,
) -> EstimatePair:
    """Independent sample means at the current and trial points.

    The two means consume disjoint consecutive segments of the oracle
    stream, so they are independent by construction.
    """
    est_current = sample_estimate(oracle, x_current, n_current)
    est_trial = sample_estimate(oracle, x_trial, n_trial)
    return EstimatePair(
        est_current=est_current,
        est_trial=est_trial,
        samples_current=n_current,
        samples_trial=n_trial,
    )


def required_samples(variance: float, k_f: float, delta: float) -> int:
    """Averaging count that keeps the estimator variance below k_f^2 delta^4.

    With this many i.i.d. samples the variance of the mean satisfies
    ``V/n <= k_f^2 delta^4``, which makes the decrease-estimate error obey
    the first-moment tail bound with constant ``2 k_f`` and the quadratic
    one with ``4 k_f^2``.
    """
    if variance <= 0.0 or k_f <= 0.0 or delta <= 0.0:
        raise ValueError("variance, k_f and delta must all be positive")
    return max(1, math.ceil(variance / (k_f * k_f * delta**4)))


def moment_oracle_samples(
    bound: float, r: float, delta: float, h: float, eps_q: float
) -> int:
    """Averaging count for finite r-th moment oracles, r in (1, 2].

    Returns ``n`` such that the decrease-estimate error built from two
    n-sample means satisfies, for every ``alpha >= eps_q``,

        P(|error| >= alpha * delta^h) <= eps_q / alpha^(2/(h-1)).

    The count comes from a Markov bound at moment order ``r`` together with
    the von Bahr-Esseen inequality (constant 2); ``r`` must be at least the
    exponent ``2/(h-1)`` for the bound to close.  The count is monotone
    nonincreasing in ``delta``.
    """
    if bound <= 0.0 or delta <= 0.0 or eps_q <= 0.0:
        raise ValueError("bound, delta and eps_q must be positive")
    if h < 2.0:
        raise ValueError(f"h must be >= 2, got {h}")
    if not 1.0 < r <= 2.0:
        raise ValueError(f"moment order r must lie in (1, 2], got {r}")
    r_h = 2.0 / (h - 1.0)
    if r < r_h - 1e-12:
        raise ValueError(
            f"moment order r={r} is too small for h={h}: need r >= 2/(h-1) = {r_h}"
        )
    count = (2.0 * bound / (eps_q ** (1.0 + r - r_h) * delta ** (h * r))) ** (
        1.0 / (r - 1.0)
    )
    return max(1, math.ceil(count))


# --- sample-count policies ----------------------------------------------
#
# A policy maps the scale the acceptance test works at (stepsize or step
# norm) to the number of averaged samples per estimate.

SamplePolicy = Callable[[float], int]


def fixed_sample_policy(n: int) -> SamplePolicy:
    if n < 1:
        raise ValueError("fixed sample count must be >= 1")

    def policy(delta: float) -> int:
        return n

    return policy


def variance_sample_policy(variance: float, k_f: float) -> SamplePolicy:
    def policy(delta: float) -> int:
        return required_samples(variance, k_f, delta)

    return policy


def moment_sample_policy(bound: float, r: float, h: float, eps_q: float) -> SamplePolicy:
    def policy(delta: float) -> int:
        return moment_oracle_samples(bound, r, delta, h, eps_q)

    return policy


def default_sample_policy(noise: NoiseModel, k_f: float, eps_q: float | None = None) -> SamplePolicy:
    """Policy matching the declared noise statistics.

    Finite-variance noise gets the variance rule with the given ``k_f``;
    moment-only noise gets the finite-moment rule with ``eps_q`` defaulting
    to ``4 k_f^2``; noiseless oracles need a single sample.
    """
    if noise.kind == "none":
        return fixed_sample_policy(1)
    if noise.declared_variance is not None:
        return variance_sample_policy(noise.declared_variance, k_f)
    if noise.declared_moment is not None:
        r, bound = noise.declared_moment
        h = 1.0 + 2.0 / r
        if eps_q is None:
            eps_q = 4.0 * k_f * k_f
        return moment_sample_policy(bound, r, h, eps_q)
    raise ValueError("noise model declares neither a variance nor a moment bound")
