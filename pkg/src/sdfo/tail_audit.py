"""Empirical verification of the tail-bound conditions an estimator must obey.

For a fixed point, direction and scale the auditor repeatedly rebuilds the
decrease estimate, measures how often its error exceeds the condition's
threshold, and compares a one-sided Wilson upper confidence bound on that
frequency against the admissible probability.  Using the confidence bound
rather than the raw frequency keeps sampling noise from failing a
condition that actually holds.

Audited conditions, with err = (est_current - est_trial) - (f(x) - f(y)):

* first-moment tail:   P(|err| >= (eps_f / p) delta^2)      <= p
* second-moment tail:  P(|err| >= sqrt(eps_q / p) delta^2)  <= p
* variance condition:  E[(estimate - truth)^2]              <= k_f^2 delta^4
* generalized tail:    P(|err| >= alpha delta^h)            <= eps_q / alpha^(2/(h-1))
                       for every alpha >= eps_q
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping

import numpy as np

from .oracle import EstimatePair, SamplePolicy, StochasticOracle, estimate_pair
from .stats import wilson_upper
from .trace import format_float

# Estimator: (oracle, x_current, x_trial, delta) -> EstimatePair
Estimator = Callable[[StochasticOracle, np.ndarray, np.ndarray, float], EstimatePair]

_CONDITION_CODES = {"a1": 1, "a2": 2, "a2h": 3, "variance": 4}


def sampler_estimator(sampler: SamplePolicy) -> Estimator:
    """Estimator that averages ``sampler(delta)`` draws at each point."""

    def estimator(oracle, x_current, x_trial, delta):
        n = sampler(delta)
        return estimate_pair(oracle, x_current, x_trial, n, n)

    return estimator


def tail_order(h: float) -> float:
    """Exponent 2/(h-1) attached to the generalized tail condition."""
    if h < 2.0:
        raise ValueError(f"h must be >= 2, got {h}")
    return 2.0 / (h - 1.0)


@dataclass(frozen=True)
class TailAuditSpec:
    """Grid and budget for an audit run."""

    eps_f: float = 1.0
    eps_q: float = 1.0
    p_grid: tuple[float, ...] = (0.5, 0.25, 0.1, 0.05)
    delta_grid: tuple[float, ...] = (1.0, 0.5, 0.25)
    trials: int = 100_000
    confidence: float = 0.99
    h: float = 2.0
    alpha_grid: tuple[float, ...] | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.eps_f <= 0.0 or self.eps_q <= 0.0:
            raise ValueError("eps_f and eps_q must be positive")
        if not self.p_grid or not self.delta_grid:
            raise ValueError("probability and delta grids must be nonempty")
        if any(not 0.0 < p <= 1.0 for p in self.p_grid):
            raise ValueError("p_grid entries must lie in (0, 1]")
        if any(d <= 0.0 for d in self.delta_grid):
            raise ValueError("delta_grid entries must be positive")
        if self.trials < 1000:
            raise ValueError("trials must be at least 1000")
        if not 0.0 < self.confidence < 1.0:
            raise ValueError("confidence must lie strictly in (0, 1)")
        if self.h < 2.0:
            raise ValueError("h must be >= 2")


@dataclass(frozen=True)
class ExceedanceCell:
    """One (threshold, scale) cell of an exceedance audit."""

    condition: str
    p: float | None
    alpha: float | None
    delta: float
    threshold: float
    bound: float
    samples_per_estimate: int
    trials: int
    exceedances: int
    frequency: float
    wilson_upper: float
    passed: bool


@dataclass(frozen=True)
class MomentCell:
    """One (estimate, scale) cell of the variance-condition audit."""

    which: str
    delta: float
    samples_per_estimate: int
    trials: int
    bound: float
    empirical_moment: float
    slack: float
    passed: bool


@dataclass(frozen=True)
class AuditReport:
    condition: str
    cells: tuple
    passed: bool


def _unit_direction(g, dimension: int) -> np.ndarray:
    vec = np.asarray(g, dtype=float)
    if vec.shape != (dimension,):
        raise ValueError(f"direction has shape {vec.shape}, expected ({dimension},)")
    if abs(np.linalg.norm(vec) - 1.0) > 1e-10:
        raise ValueError("direction must be a unit vector")
    return vec


def _collect_errors(
    oracle: StochasticOracle,
    estimator: Estimator,
    x: np.ndarray,
    g: np.ndarray,
    delta: float,
    trials: int,
    key: tuple[int, ...],
) -> tuple[np.ndarray, np.ndarray, np.ndarray, int]:
    """Errors of `trials` fresh estimate pairs at a fixed (x, g, delta).

    Returns the decrease-estimate errors, the two per-point estimate
    errors, and the per-estimate sample count used.  Each cell runs on its
    own oracle substream, so reports are reproducible and independent of
    any outer scheduling.
    """
    cell_oracle = oracle.spawn(*key)
    y = x + delta * g
    f_x = float(oracle.problem.eval_true(x))
    f_y = float(oracle.problem.eval_true(y))
    true_diff = f_x - f_y
    diff_errors = np.empty(trials)
    cur_errors = np.empty(trials)
    trial_errors = np.empty(trials)
    samples = 0
    for t in range(trials):
        pair = estimator(cell_oracle, x, y, delta)
        diff_errors[t] = (pair.est_current - pair.est_trial) - true_diff
        cur_errors[t] = pair.est_current - f_x
        trial_errors[t] = pair.est_trial - f_y
        samples = pair.samples_current
    return diff_errors, cur_errors, trial_errors, samples


def _exceedance_audit(
    condition: str,
    oracle: StochasticOracle,
    estimator: Estimator,
    x,
    g,
    spec: TailAuditSpec,
    threshold_of: Callable[[float, float], float],
    bound_of: Callable[[float], float],
    outer_grid: tuple[float, ...],
    outer_is_alpha: bool,
) -> AuditReport:
    point = oracle.problem.check_point(x)
    direction = _unit_direction(g, oracle.problem.dimension)
    code = _CONDITION_CODES[condition]
    cells = []
    for i_delta, delta in enumerate(spec.delta_grid):
        for i_outer, outer in enumerate(outer_grid):
            errors, _, _, samples = _collect_errors(
                oracle, estimator, point, direction, delta, spec.trials,
                (code, i_delta, i_outer, spec.seed),
            )
            threshold = threshold_of(outer, delta)
            bound = bound_of(outer)
            exceed = int(np.count_nonzero(np.abs(errors) >= threshold))
            freq = exceed / spec.trials
            upper = wilson_upper(exceed, spec.trials, spec.confidence)
            cells.append(
                ExceedanceCell(
                    condition=condition,
                    p=None if outer_is_alpha else outer,
                    alpha=outer if outer_is_alpha else None,
                    delta=delta,
                    threshold=threshold,
                    bound=bound,
                    samples_per_estimate=samples,
                    trials=spec.trials,
                    exceedances=exceed,
                    frequency=freq,
                    wilson_upper=upper,
                    passed=upper <= bound,
                )
            )
    cells = tuple(cells)
    return AuditReport(condition=condition, cells=cells, passed=all(c.passed for c in cells))


def audit_a1(oracle: StochasticOracle, estimator: Estimator, x, g, spec: TailAuditSpec) -> AuditReport:
    """First-moment tail audit: P(|err| >= (eps_f/p) delta^2) <= p per cell."""
    return _exceedance_audit(
        "a1", oracle, estimator, x, g, spec,
        threshold_of=lambda p, delta: (spec.eps_f / p) * delta * delta,
        bound_of=lambda p: p,
        outer_grid=tuple(spec.p_grid),
        outer_is_alpha=False,
    )


def audit_a2(oracle: StochasticOracle, estimator: Estimator, x, g, spec: TailAuditSpec) -> AuditReport:
    """Second-moment tail audit: P(|err| >= sqrt(eps_q/p) delta^2) <= p per cell."""
    return _exceedance_audit(
        "a2", oracle, estimator, x, g, spec,
        threshold_of=lambda p, delta: math.sqrt(spec.eps_q / p) * delta * delta,
        bound_of=lambda p: p,
        outer_grid=tuple(spec.p_grid),
        outer_is_alpha=False,
    )


def audit_generalized(oracle: StochasticOracle, estimator: Estimator, x, g, spec: TailAuditSpec) -> AuditReport:
    """Generalized tail audit with threshold alpha * delta^h.

    The condition is only quantified over ``alpha >= eps_q``; smaller grid
    points are excluded.  The oracle must declare a finite r-th moment with
    ``r >= 2/(h-1)``.
    """
    if spec.alpha_grid is None:
        raise ValueError("audit_generalized requires an alpha grid in the spec")
    r_h = tail_order(spec.h)
    noise = oracle.noise
    if noise.kind != "none" and noise.declared_variance is None:
        # A declared variance bounds every moment order up to 2 >= r(h).
        if noise.declared_moment is None:
            raise ValueError("generalized audit requires noise with a declared moment")
        if noise.declared_moment[0] < r_h - 1e-12:
            raise ValueError(
                f"declared moment order {noise.declared_moment[0]} is inconsistent "
                f"with h={spec.h}: need r >= 2/(h-1) = {r_h}"
            )
    alphas = tuple(a for a in spec.alpha_grid if a >= spec.eps_q)
    if not alphas:
        raise ValueError("all alpha grid points fall below eps_q; nothing to audit")
    return _exceedance_audit(
        "a2h", oracle, estimator, x, g, spec,
        threshold_of=lambda alpha, delta: alpha * delta**spec.h,
        bound_of=lambda alpha: min(1.0, spec.eps_q / alpha**r_h),
        outer_grid=alphas,
        outer_is_alpha=True,
    )


def audit_variance_condition(
    oracle: StochasticOracle,
    estimator: Estimator,
    x,
    g,
    k_f: float,
    delta_grid=(1.0, 0.5, 0.25),
    trials: int = 100_000,
    seed: int = 0,
) -> AuditReport:
    """Second-moment audit of each estimate's error against k_f^2 delta^4.

    A cell passes when the empirical second moment does not exceed the
    bound by more than three standard errors of the moment estimator.
    """
    if k_f <= 0.0:
        raise ValueError("k_f must be positive")
    if trials < 1000:
        raise ValueError("trials must be at least 1000")
    delta_grid = tuple(delta_grid)
    if not delta_grid or any(d <= 0.0 for d in delta_grid):
        raise ValueError("delta grid must be nonempty with positive entries")
    point = oracle.problem.check_point(x)
    direction = _unit_direction(g, oracle.problem.dimension)
    code = _CONDITION_CODES["variance"]
    cells = []
    for i_delta, delta in enumerate(delta_grid):
        _, cur_errors, trial_errors, samples = _collect_errors(
            oracle, estimator, point, direction, delta, trials, (code, i_delta, seed)
        )
        bound = k_f * k_f * delta**4
        for which, errors in (("current", cur_errors), ("trial", trial_errors)):
            squared = errors * errors
            moment = float(np.mean(squared))
            slack = float(np.std(squared, ddof=1) / math.sqrt(trials))
            cells.append(
                MomentCell(
                    which=which,
                    delta=delta,
                    samples_per_estimate=samples,
                    trials=trials,
                    bound=bound,
                    empirical_moment=moment,
                    slack=slack,
                    passed=moment <= bound + 3.0 * slack,
                )
            )
    cells = tuple(cells)
    return AuditReport(condition="variance", cells=cells, passed=all(c.passed for c in cells))


def write_report_csv(path, report: AuditReport, metadata: Mapping[str, object] | None = None) -> None:
    """Cell-per-row CSV: p, delta, threshold, freq, wilson_upper, pass.

    Variance reports use their own column set (delta, bound, moment,
    slack, pass per estimate).
    """
    lines = []
    if metadata:
        lines.extend(f"# {k}={v}" for k, v in metadata.items())
    if report.condition == "variance":
        lines.append("which,delta,samples,trials,bound,moment,slack,pass")
        for cell in report.cells:
            lines.append(
                ",".join(
                    (
                        cell.which,
                        format_float(cell.delta),
                        str(cell.samples_per_estimate),
                        str(cell.trials),
                        format_float(cell.bound),
                        format_float(cell.empirical_moment),
                        format_float(cell.slack),
                        "1" if cell.passed else "0",
                    )
                )
            )
    else:
        lines.append("p,delta,threshold,freq,wilson_upper,pass")
        for cell in report.cells:
            target = cell.p if cell.p is not None else cell.bound
            lines.append(
                ",".join(
                    (
                        format_float(target),
                        format_float(cell.delta),
                        format_float(cell.threshold),
                        format_float(cell.frequency),
                        format_float(cell.wilson_upper),
                        "1" if cell.passed else "0",
                    )
                )
            )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def format_report(report: AuditReport) -> str:
    """Human-readable cell-by-cell summary of an audit report."""
    lines = [f"tail audit [{report.condition}]: {'PASS' if report.passed else 'FAIL'}"]
    for cell in report.cells:
        if isinstance(cell, MomentCell):
            lines.append(
                f"  delta={cell.delta:g} {cell.which:>7}: moment={cell.empirical_moment:.6g} "
                f"bound={cell.bound:.6g} slack={cell.slack:.3g} n={cell.samples_per_estimate} "
                f"-> {'pass' if cell.passed else 'FAIL'}"
            )
        else:
            label = f"p={cell.p:g}" if cell.p is not None else f"alpha={cell.alpha:g}"
            lines.append(
                f"  delta={cell.delta:g} {label}: freq={cell.frequency:.5f} "
                f"wilson={cell.wilson_upper:.5f} bound={cell.bound:g} "
                f"n={cell.samples_per_estimate} -> {'pass' if cell.passed else 'FAIL'}"
            )
    return "\n".join(lines)
