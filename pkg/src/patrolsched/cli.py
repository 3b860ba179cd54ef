"""Command-line frontend.

    patrolsched generate --config CFG.json --out SCHEDULE.json [--seed N]
    patrolsched analyze SCHEDULE.json --out ANALYSIS.json [--csv GAPS.csv]
    patrolsched table [--csv TABLE.csv]

Exit codes: 0 success, 2 input error, 3 internal failure.
Artifacts are written with sorted keys and no timestamps, so the same
config and seed always give byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from patrolsched import __version__
from patrolsched.attacker import best_response, iid_trajectory
from patrolsched.core import (
    GapDistribution,
    InvalidValuesError,
    PeriodicSequence,
    ValueVector,
    empirical_gap_distribution,
    gap_cdf,
    mix_gap_distributions,
    to_fraction,
    trajectory_gap_distribution,
)
from patrolsched.dyadic import build_optimal_sampler
from patrolsched.golden import GoldenState
from patrolsched.matching import DEFAULT_RETRIES, MatchingFailedError, matching_precondition, run_matching
from patrolsched.rng import GENERATOR_NAME, GOLDEN_PHASE, IID, ROUNDING, SHIFT, make_rng
from patrolsched.verifier import quasi_regularity, ratio_table

STRATEGIES = ("dyadic", "golden", "matching", "iid")
EXACT_STRATEGIES = ("dyadic", "golden", "matching")
DEFAULT_STEPS = 10_000
EXIT_OK, EXIT_INPUT, EXIT_INTERNAL = 0, 2, 3
CSV_HEADER = ("target", "gap", "count", "probability")


class InputError(Exception):
    """Bad config, values or artifact: exit code 2."""


def _number(x):
    """JSON form of a number: exact rationals as "a/b" strings."""
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    return float(x)


def _parse_values(raw, strategy: str) -> ValueVector:
    if not isinstance(raw, list) or not raw:
        raise InputError("'values' must be a non-empty list")
    parsed = []
    for v in raw:
        if isinstance(v, float):
            if strategy in EXACT_STRATEGIES:
                raise InputError(f"strategy {strategy!r} needs exact values like \"1/3\", got {v}")
            v = str(v)
        try:
            parsed.append(to_fraction(v))
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise InputError(f"bad value {v!r}: {exc}") from None
    try:
        return ValueVector(parsed)
    except InvalidValuesError as exc:
        raise InputError(str(exc)) from None


def _int_field(config: dict, name: str, default: int | None, minimum: int = 0) -> int | None:
    value = config.get(name, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise InputError(f"'{name}' must be an integer >= {minimum}")
    return value


def load_config(path: Path, seed_override: int | None = None) -> dict:
    try:
        config = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read config {path}: {exc}") from None
    if not isinstance(config, dict):
        raise InputError("config must be a JSON object")
    strategy = config.get("strategy")
    if strategy not in STRATEGIES:
        raise InputError(f"'strategy' must be one of {', '.join(STRATEGIES)}")
    if seed_override is not None:
        config["seed"] = seed_override
    _int_field(config, "seed", None)
    if "seed" not in config:
        raise InputError("'seed' is required")
    config["values"] = _parse_values(config.get("values"), strategy)
    if config.get("mixture_mode", "exact") not in ("exact", "sampled"):
        raise InputError("'mixture_mode' must be 'exact' or 'sampled'")
    eps = config.get("epsilon")
    if eps is not None and (isinstance(eps, bool) or not isinstance(eps, (int, float)) or eps <= 0):
        raise InputError("'epsilon' must be a positive number")
    return config


def _gap_stats(gaps_by_target: dict[int, list[int]]) -> dict:
    return {
        str(i): {"min": min(g), "max": max(g), "count": len(g)} if g else {"min": None, "max": None, "count": 0}
        for i, g in gaps_by_target.items()
    }


def _periodic_record(seq: PeriodicSequence, weight) -> dict:
    return {"weight": _number(weight), "period": seq.period, "sequence": list(seq.entries)}


def generate(config: dict) -> dict:
    """Build the schedule artifact for a validated config."""
    strategy, values, seed = config["strategy"], config["values"], config["seed"]
    artifact = {
        "format": "patrolsched-schedule/1",
        "version": __version__,
        "generator": GENERATOR_NAME,
        "strategy": strategy,
        "values": values.as_strings(),
        "seed": seed,
    }
    n = values.n
    if strategy == "dyadic":
        sampler = build_optimal_sampler(values)
        mode = config.get("mixture_mode", "exact")
        if mode == "exact":
            mixture = sampler.mixture()
        else:
            samples = _int_field(config, "samples", 1, minimum=1)
            draws = [
                sampler.draw(make_rng(seed, ROUNDING, s), make_rng(seed, SHIFT, s))[1] for s in range(samples)
            ]
            mixture = [(Fraction(1, samples), seq) for seq in draws]
        artifact["mixture_mode"] = mode
        artifact["mixture"] = [_periodic_record(seq, w) for w, seq in mixture]
        artifact["K"] = _number(max(quasi_regularity(seq)[0] for _, seq in mixture))
        gaps = {i: [g for _, seq in mixture for g in seq.cyclic_gaps(i)] for i in range(n)}
    elif strategy == "matching":
        retries = _int_field(config, "max_retries", DEFAULT_RETRIES, minimum=1)
        result = run_matching(values, seed, retries)
        seq = result.sequence
        eps = config.get("epsilon")
        artifact["attempts"] = result.attempts
        if eps is not None:
            artifact["epsilon"] = eps
            artifact["precondition"] = matching_precondition(values, eps)
            if artifact["precondition"]:
                for i in range(n):
                    g = seq.cyclic_gaps(i)
                    if max(g) > (1 + eps) * min(g):
                        raise AssertionError(f"target {i} gap ratio exceeds 1 + epsilon")
        artifact["mixture"] = [_periodic_record(seq, Fraction(1))]
        artifact["K"] = _number(quasi_regularity(seq)[0])
        gaps = {i: seq.cyclic_gaps(i) for i in range(n)}
    else:
        steps = _int_field(config, "steps", DEFAULT_STEPS, minimum=1)
        if strategy == "golden":
            state = GoldenState(values, make_rng(seed, GOLDEN_PHASE))
            entries = state.run(steps)
            artifact["lambda_bits"] = state.lambda_bits
        else:
            entries = iid_trajectory(values, steps, make_rng(seed, IID))
        artifact["steps"] = steps
        artifact["sequence"] = [int(e) for e in entries]
        gaps = {i: np.diff(np.flatnonzero(entries == i)).tolist() for i in range(n)}
        artifact["frequencies"] = [float(np.mean(entries == i)) for i in range(n)]
        recurring = all(len(g) > 0 for g in gaps.values())
        artifact["K"] = _number(quasi_regularity(entries, n)[0]) if recurring else None
    artifact["gap_stats"] = _gap_stats(gaps)
    return artifact


def _load_artifact(path: Path) -> dict:
    try:
        artifact = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read schedule {path}: {exc}") from None
    if not isinstance(artifact, dict) or artifact.get("strategy") not in STRATEGIES:
        raise InputError("not a schedule artifact")
    return artifact


def _target_distributions(artifact: dict, values: ValueVector) -> tuple[list[GapDistribution], object]:
    n = values.n
    try:
        if "mixture" in artifact:
            mixture = artifact["mixture"]
            if not mixture:
                raise InputError("empty schedule")
            parts = []
            for rec in mixture:
                if not rec.get("sequence"):
                    raise InputError("empty schedule")
                parts.append((to_fraction(str(rec["weight"])), PeriodicSequence(tuple(rec["sequence"]), n)))
            if sum(w for w, _ in parts) != 1:
                raise InputError("mixture weights do not sum to 1")
            dists = [mix_gap_distributions((w, empirical_gap_distribution(s, i)) for w, s in parts) for i in range(n)]
            k = max(quasi_regularity(s)[0] for _, s in parts)
            return dists, k
        entries = artifact.get("sequence")
        if not entries:
            raise InputError("empty schedule")
        entries = np.asarray(entries, dtype=np.int64)
        if entries.min() < 0 or entries.max() >= n:
            raise InputError("sequence entry out of range")
        dists = [trajectory_gap_distribution(entries, i).as_floats() for i in range(n)]
        return dists, quasi_regularity(entries, n)[0]
    except (InvalidValuesError, KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"malformed schedule: {exc}") from None


def analyze(artifact: dict) -> tuple[dict, list[tuple]]:
    """Per-target gap laws and best responses; returns (analysis, csv rows)."""
    strategy = artifact["strategy"]
    values = _parse_values(artifact.get("values"), strategy)
    dists, k = _target_distributions(artifact, values)
    targets, rows = [], []
    for i, (alpha, d) in enumerate(zip(values, dists)):
        a = alpha if d.is_exact else float(alpha)
        resp = best_response(a, gap_cdf(d), target=i)
        counts = d.counts or (None,) * len(d.support)
        targets.append(
            {
                "target": i,
                "value": str(alpha),
                "frequency": _number(d.frequency),
                "gaps": [
                    {"gap": int(x), "count": c, "probability": _number(p)}
                    for x, c, p in zip(d.support, counts, d.probabilities)
                ],
                "best_response": {
                    "t_star": _number(resp.t_star),
                    "utility": float(resp.utility),
                    "utility_exact": str(resp.utility) if d.is_exact else None,
                    "ratio_to_quarter": float(resp.ratio_to_quarter),
                    "exact": d.is_exact,
                },
            }
        )
        rows.extend((i, int(x), c if c is not None else "", repr(float(p))) for x, c, p in zip(d.support, counts, d.probabilities))
    analysis = {
        "strategy": strategy,
        "values": values.as_strings(),
        "K": _number(k),
        "max_ratio_to_quarter": max(t["best_response"]["ratio_to_quarter"] for t in targets),
        "targets": targets,
    }
    return analysis, rows


def _dump_json(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _write_csv(rows, header, path: Path | None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    if path is not None:
        path.write_text(buf.getvalue())
    return buf.getvalue()


def cmd_generate(args) -> int:
    config = load_config(Path(args.config), args.seed)
    artifact = generate(config)
    _dump_json(artifact, Path(args.out))
    if not args.quiet:
        length = artifact.get("steps") or sum(r["period"] for r in artifact["mixture"])
        print(f"{config['strategy']}: wrote {args.out} ({length} entries, K={artifact.get('K', '-')})")
    return EXIT_OK


def cmd_analyze(args) -> int:
    analysis, rows = analyze(_load_artifact(Path(args.schedule)))
    if args.out:
        _dump_json(analysis, Path(args.out))
    _write_csv(rows, CSV_HEADER, Path(args.csv) if args.csv else None)
    if not args.quiet:
        print(f"K = {analysis['K']}")
        for t in analysis["targets"]:
            br = t["best_response"]
            print(f"target {t['target']}: t* = {br['t_star']}, utility = {br['utility']:.6f}, "
                  f"ratio = {br['ratio_to_quarter']:.6f}")
    return EXIT_OK


def cmd_table(args) -> int:
    table = ratio_table()
    if not args.quiet:
        width = max(len(r.strategy) for r in table)
        print(f"{'strategy':<{width}}  {'ratio':>6}  worst case")
        for r in table:
            print(f"{r.strategy:<{width}}  {r.ratio:6.4f}  {r.argument}")
        print()
    text = _write_csv(
        ((r.strategy, f"{r.ratio:.4f}", r.argument) for r in table),
        ("strategy", "ratio", "argument"),
        Path(args.csv) if args.csv else None,
    )
    print(text, end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="patrolsched", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="build a schedule artifact from a JSON config")
    gen.add_argument("--config", required=True)
    gen.add_argument("--out", required=True)
    gen.add_argument("--seed", type=int, help="overrides the config seed")
    gen.add_argument("--quiet", action="store_true")
    gen.set_defaults(func=cmd_generate)

    ana = sub.add_parser("analyze", help="gap laws and attacker best responses of an artifact")
    ana.add_argument("schedule")
    ana.add_argument("--out", help="analysis JSON path")
    ana.add_argument("--csv", help="gap histogram CSV path")
    ana.add_argument("--quiet", action="store_true")
    ana.set_defaults(func=cmd_analyze)

    tab = sub.add_parser("table", help="worst-case approximation ratios per strategy")
    tab.add_argument("--csv", help="also write the table as CSV")
    tab.add_argument("--quiet", action="store_true", help="print only the CSV")
    tab.set_defaults(func=cmd_table)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except MatchingFailedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except AssertionError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
