"""Command-line harness: seed batches, audits, CSV traces and summaries.

Runs are deterministic given the config file, so repeated invocations
produce byte-identical outputs; seed-level work may run in parallel with
``--jobs`` because every run writes only its own files.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import diagnostics
from .config import (
    ConfigError,
    ExperimentConfig,
    SCHEMA_VERSION,
    config_from_dict,
    config_to_dict,
    load_config,
)
from .direct_search import DirectSearchConfig, ds_run, validate_theta
from .directions import DirectionGenerator, QuasiRandomSphere
from .oracle import StochasticOracle
from .problems import get_problem, list_problems
from .tail_audit import (
    audit_a1,
    audit_a2,
    audit_generalized,
    audit_variance_condition,
    format_report,
    sampler_estimator,
    write_report_csv,
)
from .trace import write_trace_csv
from .trust_region import tr_run, validate_theta_tr

ENV_OUT_DIR = "SDFO_OUT"


def _resolve_out_dir(cfg: ExperimentConfig, override: str | None) -> Path:
    if override:
        return Path(override)
    env = os.environ.get(ENV_OUT_DIR)
    if env:
        return Path(env)
    return Path(cfg.out_dir)


def _print_theta_warnings(cfg: ExperimentConfig) -> None:
    algo = cfg.algo
    if algo is None or algo.eps_f_hint is None:
        return
    verdict = (
        validate_theta(algo)
        if isinstance(algo, DirectSearchConfig)
        else validate_theta_tr(algo)
    )
    if not verdict.ok:
        print(f"warning: {verdict.message}", file=sys.stderr)


def _run_one_seed(payload: dict) -> dict:
    """Run a single seed; executed in-process or in a worker process."""
    cfg = config_from_dict(payload["config"])
    seed = payload["seed"]
    out_dir = Path(payload["out_dir"])
    problem = get_problem(cfg.problem, cfg.dimension)
    gen = DirectionGenerator(cfg.dimension, QuasiRandomSphere())
    sampler = cfg.sampler.build(cfg.noise)
    run = ds_run if cfg.algorithm == "direct_search" else tr_run
    _, records = run(
        cfg.algo,
        problem,
        cfg.noise,
        gen,
        cfg.x0,
        seed=seed,
        sampler=sampler,
        delta_floor=cfg.delta_floor,
    )
    trace_path = None
    if cfg.write_trace and records:
        trace_path = out_dir / f"{cfg.algorithm}_{cfg.problem}_seed{seed}.csv"
        write_trace_csv(
            trace_path,
            records,
            metadata={
                "schema_version": SCHEMA_VERSION,
                "algorithm": cfg.algorithm,
                "problem": cfg.problem,
                "dimension": cfg.dimension,
                "noise": cfg.noise.kind,
                "seed": seed,
            },
        )
    summary = diagnostics.summarize(records, seed=seed, f_star=problem.optimum_value) if records else None
    return {"seed": seed, "summary": summary, "trace": trace_path}


def run_experiment(
    cfg: ExperimentConfig,
    out_dir: str | None = None,
    jobs: int = 1,
    seed_offset: int = 0,
) -> list[Path]:
    """Run the configured seed batch; returns the paths written."""
    directory = _resolve_out_dir(cfg, out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    _print_theta_warnings(cfg)
    seeds = [s + seed_offset for s in cfg.seeds]
    payloads = [
        {"config": config_to_dict(cfg), "seed": seed, "out_dir": str(directory)}
        for seed in seeds
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_one_seed, payloads))
    else:
        results = [_run_one_seed(p) for p in payloads]
    results.sort(key=lambda r: r["seed"])

    written = [r["trace"] for r in results if r["trace"] is not None]
    if cfg.write_summary:
        summary_path = directory / f"{cfg.algorithm}_{cfg.problem}_summary.csv"
        diagnostics.write_summary_csv(
            summary_path,
            [r["summary"] for r in results if r["summary"] is not None],
            metadata={
                "schema_version": SCHEMA_VERSION,
                "algorithm": cfg.algorithm,
                "problem": cfg.problem,
                "seeds": ",".join(str(s) for s in seeds),
            },
        )
        written.append(summary_path)
    return written


def run_audit(cfg: ExperimentConfig, out_dir: str | None = None) -> tuple[list[Path], bool]:
    """Run the configured audits; returns written paths and the overall verdict."""
    directory = _resolve_out_dir(cfg, out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    audit = cfg.audit
    problem = get_problem(cfg.problem, cfg.dimension)
    oracle = StochasticOracle(problem, cfg.noise, seed=audit.spec.seed)
    sampler = cfg.sampler.build(cfg.noise)
    if sampler is None:
        from .oracle import default_sample_policy

        sampler = default_sample_policy(cfg.noise, audit.k_f, eps_q=audit.spec.eps_q)
    estimator = sampler_estimator(sampler)

    runners = {
        "a1": lambda: audit_a1(oracle, estimator, audit.x, audit.direction, audit.spec),
        "a2": lambda: audit_a2(oracle, estimator, audit.x, audit.direction, audit.spec),
        "a2h": lambda: audit_generalized(oracle, estimator, audit.x, audit.direction, audit.spec),
        "variance": lambda: audit_variance_condition(
            oracle,
            estimator,
            audit.x,
            audit.direction,
            audit.k_f,
            delta_grid=audit.spec.delta_grid,
            trials=audit.spec.trials,
            seed=audit.spec.seed,
        ),
    }
    written: list[Path] = []
    texts: list[str] = []
    all_pass = True
    for condition in audit.conditions:
        report = runners[condition]()
        all_pass = all_pass and report.passed
        csv_path = directory / f"audit_{condition}_{cfg.problem}.csv"
        write_report_csv(
            csv_path,
            report,
            metadata={
                "schema_version": SCHEMA_VERSION,
                "condition": condition,
                "problem": cfg.problem,
                "noise": cfg.noise.kind,
                "trials": audit.spec.trials,
                "seed": audit.spec.seed,
            },
        )
        written.append(csv_path)
        texts.append(format_report(report))
    text_path = directory / f"audit_{cfg.problem}_summary.txt"
    text_path.write_text("\n\n".join(texts) + "\n", encoding="utf-8")
    written.append(text_path)
    print("\n\n".join(texts))
    return written, all_pass


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sdfo",
        description="Stochastic derivative-free optimization harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a seed batch from a config file")
    run_p.add_argument("config", help="path to a JSON experiment config")
    run_p.add_argument("--jobs", type=int, default=1, help="parallel seed workers")
    run_p.add_argument("--out", default=None, help="output directory override")
    run_p.add_argument("--seed-offset", type=int, default=0, help="shift all seeds by K")

    audit_p = sub.add_parser("audit", help="run tail-bound audits from a config file")
    audit_p.add_argument("config", help="path to a JSON audit config")
    audit_p.add_argument("--out", default=None, help="output directory override")

    sub.add_parser("list-problems", help="list registered benchmark problems")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "list-problems":
        for name in list_problems():
            print(name)
        return 0
    try:
        cfg = load_config(args.config)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        if args.command == "run":
            if cfg.algorithm == "audit":
                print("error: config declares an audit; use the audit subcommand", file=sys.stderr)
                return 2
            written = run_experiment(
                cfg, out_dir=args.out, jobs=args.jobs, seed_offset=args.seed_offset
            )
            for path in written:
                print(path)
            return 0
        if cfg.algorithm != "audit":
            print("error: config declares an optimizer run; use the run subcommand", file=sys.stderr)
            return 2
        written, _ = run_audit(cfg, out_dir=args.out)
        for path in written:
            print(path)
        return 0
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
