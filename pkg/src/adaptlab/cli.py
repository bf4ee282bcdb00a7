"""Command-line surface: bound calculator, experiment runner, SMC self-test.

Three subcommands:

- ``bounds``: evaluate the decision-error bound for explicit parameters
  and print every field as JSON.
- ``run``: execute a full adaptation experiment from a JSON config file,
  writing a per-cycle CSV and printing a JSON summary.
- ``smc-selftest``: run the model checker's coverage experiment against a
  known-mean Bernoulli model.

Every command is deterministic given its flags/config/seed. Numbers are
serialized with 12 significant digits. Exit codes: 0 success, 1 statistical
self-test failure, 2 usage or validation error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass

from .bounds import (
    DecisionErrorBound,
    Goal,
    QualityDomain,
    RiskBoundInputs,
    decision_error_bound,
)
from .engine import CycleRecord, EngineConfig, run_experiment
from .netsim import TOPOLOGY_PRESETS, EnvironmentWalk
from .smc import SmcConfig, coverage_experiment

CSV_HEADER = (
    "cycle,reduced_size,cutoff,b_hat_w,selected_id,B_r,B_w,"
    "measured_error,error_bound,min_probability,empirical_risk,bound_holds"
)


def _sig(value: float) -> float:
    """Round to 12 significant digits for stable serialization."""
    return float(format(value, ".12g"))


def _cell(value: float | None) -> str:
    return "" if value is None else format(value, ".12g")


# -- bounds --------------------------------------------------------------


def _bound_as_dict(bound: DecisionErrorBound) -> dict:
    return {
        "confidence_term": _sig(bound.confidence_term),
        "risk_margin": _sig(bound.risk_margin),
        "adjusted_risk_margin": _sig(bound.adjusted_risk_margin),
        "expected_risk_upper": _sig(bound.expected_risk_upper),
        "survival_prob": _sig(bound.survival_prob),
        "n_feasible": bound.n_feasible,
        "best_prediction": _sig(bound.best_prediction),
        "cutoff": _sig(bound.cutoff),
        "error_bound": _sig(bound.error_bound),
        "min_probability": _sig(bound.min_probability),
    }


def cmd_bounds(args: argparse.Namespace) -> int:
    domain = QualityDomain(lower=args.l_q, upper=args.u_q, goal=Goal.MINIMIZE)
    inputs = RiskBoundInputs(
        m=args.m,
        vc_dim=args.d,
        eta=args.eta,
        empirical_risk=args.empirical_risk,
        kappa=args.kappa_scale * args.epsilon,
        alpha=args.alpha,
    )
    bound = decision_error_bound(inputs, domain, args.cutoff, args.b_hat_w, args.n)
    print(json.dumps(_bound_as_dict(bound), indent=2))
    return 0


# -- run -----------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentSpec:
    """A validated experiment config file."""

    topology: str
    seed: int
    output_csv: str
    output_summary: str | None
    engine: EngineConfig
    walk: EnvironmentWalk


_TOP_KEYS = {"topology", "seed", "output_csv", "output_summary", "engine", "smc", "walk"}
_ENGINE_KEYS = {"warmup_cycles", "total_cycles", "eta", "evaluation_mode", "window_factor", "workers"}
_SMC_KEYS = {"epsilon", "alpha", "kappa_scale"}
_WALK_KEYS = {"interference_step", "load_step", "interference_min", "interference_max", "load_min", "load_max"}


def _check_keys(section: dict, allowed: set[str], where: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ValueError(f"unknown {where} keys: {', '.join(sorted(unknown))}")


def _as_int(section: dict, key: str, where: str) -> dict:
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(f"{where}.{key} must be an integer")
    return section


def load_experiment_config(path: str) -> ExperimentSpec:
    try:
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
    except OSError as exc:
        raise ValueError(f"cannot read config file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValueError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ValueError("config root must be a JSON object")
    _check_keys(data, _TOP_KEYS, "config")

    for key in ("topology", "seed", "output_csv"):
        if key not in data:
            raise ValueError(f"config is missing required key: {key}")
    topology = data["topology"]
    if topology not in TOPOLOGY_PRESETS:
        raise ValueError(f"unknown topology preset: {topology!r} (choose from {sorted(TOPOLOGY_PRESETS)})")
    seed = data["seed"]
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise ValueError("seed must be an integer in [0, 2^64)")
    output_csv = data["output_csv"]
    if not isinstance(output_csv, str) or not output_csv:
        raise ValueError("output_csv must be a nonempty path string")
    output_summary = data.get("output_summary")
    if output_summary is not None and (not isinstance(output_summary, str) or not output_summary):
        raise ValueError("output_summary must be a nonempty path string when given")

    smc_section = data.get("smc", {})
    if not isinstance(smc_section, dict):
        raise ValueError("smc section must be an object")
    _check_keys(smc_section, _SMC_KEYS, "smc")
    smc = SmcConfig(
        epsilon=float(smc_section.get("epsilon", 0.01)),
        alpha=float(smc_section.get("alpha", 0.1)),
        kappa_scale=float(smc_section.get("kappa_scale", 100.0)),
    )

    engine_section = data.get("engine", {})
    if not isinstance(engine_section, dict):
        raise ValueError("engine section must be an object")
    _check_keys(engine_section, _ENGINE_KEYS, "engine")
    for key in ("warmup_cycles", "total_cycles", "window_factor", "workers"):
        if key in engine_section:
            _as_int(engine_section, key, "engine")
    if "evaluation_mode" in engine_section and not isinstance(engine_section["evaluation_mode"], bool):
        raise ValueError("engine.evaluation_mode must be a boolean")
    engine = EngineConfig(
        warmup_cycles=engine_section.get("warmup_cycles", 30),
        total_cycles=engine_section.get("total_cycles", 200),
        eta=float(engine_section.get("eta", 0.05)),
        smc=smc,
        evaluation_mode=engine_section.get("evaluation_mode", True),
        window_factor=engine_section.get("window_factor", 10),
        workers=engine_section.get("workers", 1),
    )

    walk_section = data.get("walk", {})
    if not isinstance(walk_section, dict):
        raise ValueError("walk section must be an object")
    _check_keys(walk_section, _WALK_KEYS, "walk")
    walk = EnvironmentWalk(
        interference_step=float(walk_section.get("interference_step", 0.5)),
        load_step=float(walk_section.get("load_step", 0.1)),
        interference_min=float(walk_section.get("interference_min", 0.0)),
        interference_max=float(walk_section.get("interference_max", 6.0)),
        load_min=float(walk_section.get("load_min", 0.5)),
        load_max=float(walk_section.get("load_max", 2.0)),
    )

    return ExperimentSpec(
        topology=topology,
        seed=seed,
        output_csv=output_csv,
        output_summary=output_summary,
        engine=engine,
        walk=walk,
    )


def _record_row(record: CycleRecord) -> list[str]:
    bound = record.bound
    return [
        str(record.cycle),
        str(record.reduced_size),
        _cell(record.cutoff),
        _cell(record.b_hat_w),
        str(record.selected_id),
        _cell(record.b_r),
        _cell(record.b_w),
        _cell(record.measured_error),
        _cell(bound.error_bound if bound else None),
        _cell(bound.min_probability if bound else None),
        _cell(record.empirical_risk),
        "" if record.bound_holds is None else ("true" if record.bound_holds else "false"),
    ]


def write_records_csv(records: list[CycleRecord], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_HEADER.split(","))
        for record in records:
            writer.writerow(_record_row(record))


def summarize_records(records: list[CycleRecord], warmup_cycles: int) -> dict:
    post = [r for r in records if r.cycle > warmup_cycles]
    errors = [r.measured_error for r in post if r.measured_error is not None]
    with_bound = [r for r in post if r.bound_holds is not None]
    summary: dict = {
        "cycles": len(records),
        "warmup_cycles": warmup_cycles,
        "post_warmup_cycles": len(post),
        "bound_applicable_cycles": len(with_bound),
    }
    if errors:
        mean = math.fsum(errors) / len(errors)
        variance = math.fsum((e - mean) ** 2 for e in errors) / len(errors)
        summary.update(
            min_measured_error=_sig(min(errors)),
            max_measured_error=_sig(max(errors)),
            mean_measured_error=_sig(mean),
            std_measured_error=_sig(math.sqrt(variance)),
        )
    else:
        summary.update(
            min_measured_error=None,
            max_measured_error=None,
            mean_measured_error=None,
            std_measured_error=None,
        )
    if with_bound:
        holds = sum(1 for r in with_bound if r.bound_holds)
        probs = [r.bound.min_probability for r in with_bound]
        summary["bound_holds_fraction"] = _sig(holds / len(with_bound))
        summary["mean_min_probability"] = _sig(math.fsum(probs) / len(probs))
    else:
        summary["bound_holds_fraction"] = None
        summary["mean_min_probability"] = None
    return summary


def cmd_run(args: argparse.Namespace) -> int:
    spec = load_experiment_config(args.config)
    topology = TOPOLOGY_PRESETS[spec.topology]()
    records = run_experiment(topology, spec.engine, spec.walk, spec.seed)
    summary = summarize_records(records, spec.engine.warmup_cycles)
    try:
        write_records_csv(records, spec.output_csv)
        if spec.output_summary is not None:
            with open(spec.output_summary, "w", encoding="utf-8") as handle:
                json.dump(summary, handle, indent=2)
                handle.write("\n")
    except BaseException:
        # never leave a partial output file behind
        for path in (spec.output_csv, spec.output_summary):
            if path is not None:
                try:
                    os.unlink(path)
                except OSError:
                    pass
        raise
    print(json.dumps(summary, indent=2))
    return 0


# -- smc-selftest ---------------------------------------------------------


def cmd_smc_selftest(args: argparse.Namespace) -> int:
    if args.repetitions < 1:
        raise ValueError("repetitions must be a positive integer")
    if not 0.0 <= args.mean <= 1.0:
        raise ValueError("mean must lie in [0, 1]")
    config = SmcConfig(epsilon=args.epsilon, alpha=args.alpha, kappa_scale=args.kappa_scale)
    report = coverage_experiment(args.mean, config, args.repetitions, args.seed)
    formatted = {k: (_sig(v) if isinstance(v, float) else v) for k, v in report.items()}
    print(json.dumps(formatted, indent=2))
    return 0 if report["passed"] else 1


# -- parser ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adaptlab",
        description="Adaptation-space reduction laboratory: bound calculator, "
        "experiment runner, and SMC self-test.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    bounds = sub.add_parser("bounds", help="evaluate the decision-error bound for explicit parameters")
    bounds.add_argument("--m", type=int, required=True, help="training-window sample count")
    bounds.add_argument("--d", type=int, required=True, help="VC dimension of the learner")
    bounds.add_argument("--eta", type=float, default=0.05, help="risk-bound significance (default 0.05)")
    bounds.add_argument("--epsilon", type=float, default=0.01, help="SMC approximation half-width (default 0.01)")
    bounds.add_argument("--alpha", type=float, default=0.1, help="SMC significance (default 0.1)")
    bounds.add_argument("--kappa-scale", type=float, default=100.0, help="quality units per unit epsilon (default 100)")
    bounds.add_argument("--l-q", type=float, default=0.0, help="quality domain lower bound (default 0)")
    bounds.add_argument("--u-q", type=float, default=100.0, help="quality domain upper bound (default 100)")
    bounds.add_argument("--empirical-risk", type=float, required=True, help="training MSE of the model")
    bounds.add_argument("--cutoff", type=float, required=True, help="reduction threshold")
    bounds.add_argument("--b-hat-w", type=float, required=True, help="minimum predicted quality")
    bounds.add_argument("--n", type=int, required=True, help="number of feasible options")
    bounds.set_defaults(func=cmd_bounds)

    run = sub.add_parser("run", help="run an adaptation experiment from a JSON config file")
    run.add_argument("config", help="path to the experiment config (JSON)")
    run.set_defaults(func=cmd_run)

    selftest = sub.add_parser("smc-selftest", help="coverage experiment against a known-mean model")
    selftest.add_argument("--epsilon", type=float, default=0.02, help="approximation half-width (default 0.02)")
    selftest.add_argument("--alpha", type=float, default=0.05, help="significance (default 0.05)")
    selftest.add_argument("--kappa-scale", type=float, default=100.0, help="quality scaling (default 100)")
    selftest.add_argument("--mean", type=float, default=0.5, help="true mean of the test model (default 0.5)")
    selftest.add_argument("--repetitions", type=int, default=500, help="independent estimates to run (default 500)")
    selftest.add_argument("--seed", type=int, default=0, help="base seed (default 0)")
    selftest.set_defaults(func=cmd_smc_selftest)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
