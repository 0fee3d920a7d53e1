"""Command-line front end.

One JSON config describes an experiment end to end: the space, the problem
instance, the algorithm and its step schedule, the ensemble size, and the
audit request.  Four subcommands consume it:

  fejerlab validate --config cfg.json            geometry suites, exit 0/2
  fejerlab run      --config cfg.json --out p_   ensemble + curves CSV
  fejerlab audit    --config cfg.json --out p_   certificate audit + JSON
  fejerlab report   --config cfg.json --out p_   human-readable summary

Exit codes are a stable contract: 0 pass, 1 input error, 2 geometry
failure, 3 runtime failure, 4 audit failure, 5 no known regularity modulus
for the instance shape.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from .algorithms import (
    certificate_sb,
    certificate_skm,
    certificate_sppa,
    fast_certificate_skm,
    fejer_budget,
    liminf_bound_sb,
    liminf_bound_skm,
    liminf_bound_sppa,
)
from .harness import (
    AuditRecord,
    AuditReport,
    EnsembleStats,
    _validate_run,
    certificate_audit,
    export_results,
    fast_audit,
    liminf_witness_check,
    load_curves,
    run_ensemble,
    stats_from_curves,
)
from .moduli import (
    StepSchedule,
    schedule_from_spec,
    schedule_square_sum_bound,
)
from .problems import (
    HALF_SQUARED,
    MeanMinProblem,
    NoModulusKnownError,
    Problem,
    problem_from_spec,
)
from .spaces import Point, distance, geometry_suite, point_from_spec, space_of

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_GEOMETRY = 2
EXIT_RUNTIME = 3
EXIT_AUDIT = 4
EXIT_NO_MODULUS = 5

_SPACES = ("euclidean", "tripod", "halfplane")
_ALGORITHMS = ("sppa", "skm", "sb")

_CHECK_NAMES = {
    "mean": "mean-rate certificate check",
    "almost_sure": "almost-sure tail check",
    "fast_mean_envelope": "fast-rate envelope check",
    "fast_tail": "fast-rate tail check",
    "gap_window": "gap-window (liminf) check",
}

# Default budget cushions, matching the certificate builders.
_CUSHIONS = {"sppa": 0.1, "skm": 0.5, "sb": 0.1}


class ConfigError(ValueError):
    """Input error traced to a config field; message names the field path."""


# ---------------------------------------------------------------------------
# Config parsing
# ---------------------------------------------------------------------------


def _need(doc: dict, key: str, path: str):
    if key not in doc:
        raise ConfigError(f"{path}.{key}: required field missing")
    return doc[key]


def _as_dict(v, path: str) -> dict:
    if not isinstance(v, dict):
        raise ConfigError(f"{path}: expected an object, got {type(v).__name__}")
    return v


def _as_int(v, path: str, lo: int | None = None, hi: int | None = None) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{path}: expected an integer, got {v!r}")
    if lo is not None and v < lo:
        raise ConfigError(f"{path}: must be >= {lo}, got {v}")
    if hi is not None and v > hi:
        raise ConfigError(f"{path}: must be <= {hi}, got {v}")
    return v


def _as_float(v, path: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {v!r}")
    return float(v)


def _no_extras(doc: dict, allowed, path: str) -> None:
    extras = set(doc) - set(allowed)
    if extras:
        raise ConfigError(f"{path}: unknown field(s) {sorted(extras)}")


@dataclass
class Experiment:
    space: str
    problem: Problem
    algorithm: str
    sched: StepSchedule
    x0: Point
    paths: int
    horizon: int
    seed: int
    threads: int
    epsilons: tuple[float, ...]
    lam: float | None
    fast: dict | None
    liminf: dict | None


def parse_experiment(doc, seed_override: int | None = None) -> Experiment:
    """Validate the raw JSON config and build the experiment objects.

    Every violation raises ConfigError naming the offending field path.
    """
    top = _as_dict(doc, "config")
    _no_extras(
        top,
        ("space", "problem", "algorithm", "x0", "schedule", "ensemble", "audit"),
        "config",
    )

    space = _need(top, "space", "config")
    if space not in _SPACES:
        raise ConfigError(f"config.space: expected one of {_SPACES}, got {space!r}")

    try:
        problem = problem_from_spec(_as_dict(_need(top, "problem", "config"), "config.problem"))
    except ConfigError:
        raise
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"config.problem: {exc}") from exc
    if problem.space != space:
        raise ConfigError(
            f"config.space: {space!r} does not match the problem's space {problem.space!r}"
        )

    algorithm = _need(top, "algorithm", "config")
    if algorithm not in _ALGORITHMS:
        raise ConfigError(
            f"config.algorithm: expected one of {_ALGORITHMS}, got {algorithm!r}"
        )

    try:
        x0 = point_from_spec(_as_dict(_need(top, "x0", "config"), "config.x0"))
    except ConfigError:
        raise
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"config.x0: {exc}") from exc
    if space_of(x0) != space:
        raise ConfigError(
            f"config.x0: point lies in {space_of(x0)!r}, config.space is {space!r}"
        )

    try:
        sched = schedule_from_spec(
            _as_dict(_need(top, "schedule", "config"), "config.schedule")
        )
    except ConfigError:
        raise
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"config.schedule: {exc}") from exc

    ens = _as_dict(_need(top, "ensemble", "config"), "config.ensemble")
    _no_extras(ens, ("paths", "horizon", "seed", "threads"), "config.ensemble")
    paths = _as_int(_need(ens, "paths", "config.ensemble"), "config.ensemble.paths", lo=1)
    horizon = _as_int(
        _need(ens, "horizon", "config.ensemble"), "config.ensemble.horizon", lo=0
    )
    seed = _as_int(
        _need(ens, "seed", "config.ensemble"), "config.ensemble.seed", lo=0, hi=2**64 - 1
    )
    threads = _as_int(ens.get("threads", 1), "config.ensemble.threads", lo=1)

    epsilons: tuple[float, ...] = ()
    lam = None
    fast = None
    liminf = None
    if "audit" in top:
        aud = _as_dict(top["audit"], "config.audit")
        _no_extras(aud, ("epsilons", "lambda", "fast", "liminf"), "config.audit")
        raw_eps = _need(aud, "epsilons", "config.audit")
        if not isinstance(raw_eps, list):
            raise ConfigError("config.audit.epsilons: expected a list of numbers")
        epsilons = tuple(
            _as_float(e, f"config.audit.epsilons[{i}]") for i, e in enumerate(raw_eps)
        )
        if any(not e > 0.0 for e in epsilons):
            raise ConfigError("config.audit.epsilons: thresholds must be > 0")
        if len(set(epsilons)) != len(epsilons):
            raise ConfigError("config.audit.epsilons: thresholds must be distinct")
        if "lambda" in aud:
            lam = _as_float(aud["lambda"], "config.audit.lambda")
            if not 0.0 < lam < 1.0:
                raise ConfigError(
                    f"config.audit.lambda: must lie in (0,1), got {lam}"
                )
        if "fast" in aud:
            fd = _as_dict(aud["fast"], "config.audit.fast")
            _no_extras(fd, ("c", "r"), "config.audit.fast")
            fast = {
                "c": _as_float(_need(fd, "c", "config.audit.fast"), "config.audit.fast.c"),
                "r": _as_int(_need(fd, "r", "config.audit.fast"), "config.audit.fast.r", lo=1),
            }
            if not fast["c"] > 1.0:
                raise ConfigError(f"config.audit.fast.c: must be > 1, got {fast['c']}")
            if algorithm != "skm":
                raise ConfigError(
                    "config.audit.fast: fast-rate audits are defined for algorithm 'skm'"
                )
        if "liminf" in aud:
            ld = _as_dict(aud["liminf"], "config.audit.liminf")
            _no_extras(ld, ("epsilon", "start"), "config.audit.liminf")
            eps_l = _as_float(
                _need(ld, "epsilon", "config.audit.liminf"), "config.audit.liminf.epsilon"
            )
            if not eps_l > 0.0:
                raise ConfigError(
                    f"config.audit.liminf.epsilon: must be > 0, got {eps_l}"
                )
            start = _as_int(
                _need(ld, "start", "config.audit.liminf"),
                "config.audit.liminf.start",
                lo=0,
            )
            liminf = {"epsilon": eps_l, "start": start}
        if fast is not None and liminf is not None:
            raise ConfigError("config.audit: choose at most one of 'fast' and 'liminf'")

    if seed_override is not None:
        if not 0 <= seed_override < 2**64:
            raise ConfigError(
                f"--seed-override: must be an unsigned 64-bit integer, got {seed_override}"
            )
        seed = seed_override

    # Cross-field validity (algorithm/problem/schedule/start point).
    try:
        _validate_run(problem, algorithm, sched, x0)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"config: {exc}") from exc

    return Experiment(
        space=space,
        problem=problem,
        algorithm=algorithm,
        sched=sched,
        x0=x0,
        paths=paths,
        horizon=horizon,
        seed=seed,
        threads=threads,
        epsilons=epsilons,
        lam=lam,
        fast=fast,
        liminf=liminf,
    )


# ---------------------------------------------------------------------------
# Experiment assembly helpers
# ---------------------------------------------------------------------------


def _fast_parts(exp: Experiment):
    """Fast-rate certificate and its tailored root schedule."""
    try:
        return fast_certificate_skm(exp.problem, exp.fast["c"], exp.fast["r"], exp.x0)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"config.audit.fast: {exc}") from exc


def _run_plan(exp: Experiment):
    """The (schedule, tail thresholds) actually used for ensemble runs.

    A fast-rate audit replaces the configured schedule with the tailored
    root schedule and tracks tails at sqrt(eps) for each audited eps
    (the fast tail bound controls dist^2 >= eps, i.e. dist >= sqrt(eps)).
    """
    if exp.fast is not None:
        _, root = _fast_parts(exp)
        return root, tuple(math.sqrt(e) for e in exp.epsilons)
    return exp.sched, exp.epsilons


def _run_stats(exp: Experiment) -> EnsembleStats:
    sched, thresholds = _run_plan(exp)
    return run_ensemble(
        exp.problem,
        exp.algorithm,
        sched,
        exp.x0,
        exp.paths,
        exp.horizon,
        exp.seed,
        thresholds,
        threads=exp.threads,
    )


def _sppa_lipschitz(problem: MeanMinProblem) -> float:
    if problem.cost_kind == HALF_SQUARED:
        anchor = problem.solution_anchor
        return max(
            problem.region_bound + distance(a, anchor) for a, _ in problem.atoms
        )
    return 1.0


def _index_label(idx: int) -> str:
    """Astronomically large witness indices are printed as magnitudes."""
    if idx >= 10**12:
        return f"~1e{len(str(idx)) - 1}"
    return str(idx)


def _liminf_report(exp: Experiment, stats: EnsembleStats) -> AuditReport:
    """Gap-window audit: the certified window [N, phi(eps, N)] must contain
    an iterate whose mean optimality gap is below eps."""
    eps = exp.liminf["epsilon"]
    start = exp.liminf["start"]
    b = fejer_budget(exp.x0, exp.problem.solution_anchor, _CUSHIONS[exp.algorithm])
    if exp.algorithm == "sppa":
        L = _sppa_lipschitz(exp.problem)
        phi = liminf_bound_sppa(exp.sched, b, L, schedule_square_sum_bound(exp.sched))
    elif exp.algorithm == "skm":
        phi = liminf_bound_skm(exp.sched, b)
    else:
        L = exp.problem.lipschitz_cap
        phi = liminf_bound_sb(exp.sched, b, L, schedule_square_sum_bound(exp.sched))
    bound_idx = phi(eps, start)
    witness = liminf_witness_check(stats, eps, start, bound_idx)
    window = f"window [{start}, {_index_label(bound_idx)}]"
    caveat = (
        "full rate-certificate indices rho(eps) at small eps are astronomically "
        "large under harmonic schedules (the divergence witness grows exponentially "
        "in the budget); they are certified by the geometry, recursion, one-step "
        "inequality, and modulus-soundness checks rather than by simulation"
    )
    if witness is not None:
        observed = float(stats.mean_gap[witness])
        record = AuditRecord(
            epsilon=eps,
            criterion="gap_window",
            predicted_index=bound_idx,
            observed_value_at_index=observed,
            bound_satisfied=True,
            mc_margin=eps - observed,
            note=(
                f"{window}: witness at n={witness} with mean gap "
                f"{observed:.6g} < {eps:g}; {caveat}"
            ),
        )
    elif bound_idx > stats.horizon:
        record = AuditRecord(
            epsilon=eps,
            criterion="gap_window",
            predicted_index=bound_idx,
            observed_value_at_index=None,
            bound_satisfied=None,
            mc_margin=None,
            note=(
                f"unchecked: {window} extends beyond horizon {stats.horizon} "
                f"and no witness was observed up to the horizon; {caveat}"
            ),
        )
    else:
        observed = float(np.min(stats.mean_gap[start : bound_idx + 1]))
        record = AuditRecord(
            epsilon=eps,
            criterion="gap_window",
            predicted_index=bound_idx,
            observed_value_at_index=observed,
            bound_satisfied=False,
            mc_margin=eps - observed,
            note=(
                f"{window}: no iterate with mean gap below {eps:g} "
                f"(minimum {observed:.6g}); {caveat}"
            ),
        )
    return AuditReport(
        kind="liminf",
        algorithm=exp.algorithm,
        paths=stats.paths,
        horizon=stats.horizon,
        lam=None,
        records=[record],
    )


def _print_records(report: AuditReport) -> None:
    for r in report.records:
        status = {True: "PASS", False: "FAIL", None: "UNCHECKED"}[r.bound_satisfied]
        name = _CHECK_NAMES.get(r.criterion, r.criterion)
        obs = "n/a" if r.observed_value_at_index is None else f"{r.observed_value_at_index:.6g}"
        margin = "n/a" if r.mc_margin is None else f"{r.mc_margin:.6g}"
        print(
            f"[{status}] {name}: eps={r.epsilon:g} "
            f"index={_index_label(r.predicted_index)} observed={obs} margin={margin}"
        )
        print(f"    {r.note}")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_validate(exp: Experiment) -> int:
    """Run the geometry suites for the configured space; exit 0/2."""
    summary = geometry_suite(exp.space, seed=exp.seed)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return EXIT_OK if summary["pass"] else EXIT_GEOMETRY


def cmd_run(exp: Experiment, out_prefix: str) -> int:
    stats = _run_stats(exp)
    for path in export_results(stats, None, out_prefix):
        print(f"wrote {path}")
    return EXIT_OK


def cmd_audit(exp: Experiment, out_prefix: str, curves_path: str | None = None) -> int:
    # Build the certificate first: a missing modulus must fail fast (exit 5)
    # before any expensive ensemble work.
    cert = None
    if exp.fast is not None:
        cert, _ = _fast_parts(exp)
    elif exp.liminf is None:
        if exp.lam is None:
            raise ConfigError("config.audit.lambda: required for certificate audits")
        if not exp.epsilons:
            raise ConfigError("config.audit.epsilons: at least one threshold required")
        try:
            if exp.algorithm == "sppa":
                cert = certificate_sppa(exp.problem, exp.sched, exp.x0)
            elif exp.algorithm == "skm":
                cert = certificate_skm(exp.problem, exp.sched, exp.x0)
            else:
                cert = certificate_sb(exp.problem, exp.sched, exp.x0)
        except NoModulusKnownError:
            raise
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"config: {exc}") from exc

    if curves_path is not None:
        try:
            cols = load_curves(curves_path)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"--curves {curves_path}: {exc}") from exc
        stats = stats_from_curves(
            cols, exp.algorithm, exp.space, exp.paths, exp.seed
        )
        _, thresholds = _run_plan(exp)
        missing = [t for t in thresholds if t not in stats.tail]
        if missing:
            raise ConfigError(
                f"--curves {curves_path}: missing tail thresholds {missing}; "
                f"file tracks {sorted(stats.tail)}"
            )
    else:
        stats = _run_stats(exp)

    if exp.fast is not None:
        report = fast_audit(stats, cert, exp.epsilons)
    elif exp.liminf is not None:
        report = _liminf_report(exp, stats)
    else:
        report = certificate_audit(stats, cert, exp.epsilons, exp.lam)

    if curves_path is None:
        written = export_results(stats, report, out_prefix)
    else:
        audit_path = f"{out_prefix}audit.json"
        with open(audit_path, "w") as fh:
            json.dump(report.to_json_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        written = [audit_path]

    _print_records(report)
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK if report.all_pass else EXIT_AUDIT


def cmd_report(out_prefix: str) -> int:
    """Juxtapose the audit's predicted indices with the observed curves."""
    audit_path = f"{out_prefix}audit.json"
    curves_path = f"{out_prefix}curves.csv"
    with open(audit_path) as fh:
        report = AuditReport.from_json_dict(json.load(fh))
    cols = load_curves(curves_path)
    horizon = len(cols["n"]) - 1

    header = (
        f"fejerlab report: kind={report.kind} algorithm={report.algorithm} "
        f"paths={report.paths} horizon={report.horizon}"
    )
    if report.lam is not None:
        header += f" lambda={report.lam:g}"
    print(header)
    if not report.records:
        return EXIT_OK

    counts = {"PASS": 0, "FAIL": 0, "UNCHECKED": 0}
    for r in report.records:
        status = {True: "PASS", False: "FAIL", None: "UNCHECKED"}[r.bound_satisfied]
        counts[status] += 1
        name = _CHECK_NAMES.get(r.criterion, r.criterion)
        line = (
            f"[{status}] {name}: eps={r.epsilon:g} "
            f"predicted index {_index_label(r.predicted_index)}"
        )
        if r.predicted_index <= horizon:
            idx = r.predicted_index
            if r.criterion in ("mean", "fast_mean_envelope"):
                curve = cols["mean_dist" if r.criterion == "mean" else "mean_sq_dist"][idx]
                line += f" | curve value there {curve:.6g}"
            elif r.criterion == "gap_window":
                line += f" | mean gap at window end {cols['mean_gap'][idx]:.6g}"
        if r.observed_value_at_index is not None:
            line += f" | audited value {r.observed_value_at_index:.6g}"
        if r.mc_margin is not None:
            line += f" | margin {r.mc_margin:.6g}"
        print(line)
        print(f"    {r.note}")
    print(
        f"checks: {counts['PASS']} passed, {counts['FAIL']} failed, "
        f"{counts['UNCHECKED']} unchecked"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fejerlab",
        description="Stochastic splitting algorithms on geodesic spaces: "
        "run ensembles and audit convergence-rate certificates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, doc in (
        ("validate", "run the geometry suites for the configured space"),
        ("run", "run the ensemble and write the curves CSV"),
        ("audit", "build the certificate and audit it against an ensemble"),
        ("report", "summarize audit.json next to curves.csv"),
    ):
        p = sub.add_parser(name, help=doc)
        p.add_argument("--config", required=True, help="experiment JSON config")
        p.add_argument("--out", default="", help="output path prefix")
        p.add_argument(
            "--seed-override", type=int, default=None, help="replace the config seed"
        )
        if name == "audit":
            p.add_argument(
                "--curves",
                default=None,
                help="audit a previously written curves CSV instead of running",
            )
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)

    try:
        with open(args.config) as fh:
            doc = json.load(fh)
    except OSError as exc:
        print(f"config error: cannot read {args.config}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except json.JSONDecodeError as exc:
        print(
            f"config error: {args.config} is not valid JSON "
            f"(line {exc.lineno}, column {exc.colno}): {exc.msg}",
            file=sys.stderr,
        )
        return EXIT_INPUT

    try:
        exp = parse_experiment(doc, seed_override=args.seed_override)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    if args.command == "validate":
        return cmd_validate(exp)
    if args.command == "run":
        try:
            return cmd_run(exp, args.out)
        except Exception as exc:  # noqa: BLE001 - contract: runtime failure -> 3
            print(f"runtime error: {exc}", file=sys.stderr)
            return EXIT_RUNTIME
    if args.command == "audit":
        try:
            return cmd_audit(exp, args.out, curves_path=args.curves)
        except NoModulusKnownError as exc:
            print(f"no modulus known: {exc}", file=sys.stderr)
            return EXIT_NO_MODULUS
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_INPUT
        except Exception as exc:  # noqa: BLE001
            print(f"runtime error: {exc}", file=sys.stderr)
            return EXIT_RUNTIME
    # report
    try:
        return cmd_report(args.out)
    except (OSError, ValueError, KeyError) as exc:
        print(f"report input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
