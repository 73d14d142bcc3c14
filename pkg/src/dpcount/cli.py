"""Command-line frontend.

Exit codes: 0 for a positive verdict, 1 for a negative verdict, 2 for bad
invocations or invalid inputs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .derivability import NotPrivateError, check_derivable
from .exactnum import DimensionError, RMatrix, format_rational, parse_rational
from .mechanism import (
    LOSSES,
    ConsumerProfile,
    LossNotMonotoneError,
    Mechanism,
    check_dp,
    geometric_full_pmf,
    geometric_restricted,
    named_loss,
    sample,
)
from .multilevel import build_ladder, collusion_audit, release
from .oblivious import DbMechanism, reduction_audit
from .optimizer import optimal_interaction, optimal_mechanism, row_pattern_diagnostic

SEED_ENV = "DPCOUNT_SEED"

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def rational_arg(text: str):
    try:
        return parse_rational(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def rational_list(text: str):
    return [rational_arg(part) for part in text.split(",") if part.strip()]


def parse_side(text: str, n: int) -> tuple[int, ...]:
    """``"a..b"`` (inclusive) or ``"a,b,c"``."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            side = tuple(range(int(lo), int(hi) + 1))
        else:
            side = tuple(int(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise UsageError(f"bad side-information spec {text!r}") from None
    if not side:
        raise UsageError(f"side-information spec {text!r} is empty")
    if any(not 0 <= s <= n for s in side):
        raise UsageError(f"side information {text!r} leaves 0..{n}")
    return side


def _read_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None


def load_profile(loss_spec: str, side_spec, n: int) -> ConsumerProfile:
    if loss_spec.startswith("@"):
        obj = _read_json(loss_spec[1:])
        loss = RMatrix.from_json(obj["loss"] if "loss" in obj else obj)
        file_side = obj.get("side_info")
    else:
        if loss_spec not in LOSSES:
            raise UsageError(f"unknown loss {loss_spec!r}; use one of {sorted(LOSSES)} or @file")
        loss = named_loss(loss_spec, n)
        file_side = None
    if loss.rows != n + 1:
        raise DimensionError(f"loss matrix is {loss.rows}x{loss.cols}, expected {n + 1}x{n + 1}")
    side = parse_side(side_spec, n) if side_spec else tuple(file_side or range(n + 1))
    return ConsumerProfile(loss, side)


def load_mechanism(path: str) -> Mechanism:
    return Mechanism.from_json(_read_json(path))


def emit(obj, out: str | None) -> None:
    text = json.dumps(obj, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV, "0")
    try:
        return int(raw, 0)
    except ValueError:
        raise UsageError(f"{SEED_ENV}={raw!r} is not an integer") from None


def cmd_gen(args) -> int:
    a = args.alpha
    if args.form == "restricted":
        if not 0 <= a <= 1:
            raise UsageError(f"--alpha must lie in [0, 1], got {a}")
        emit(geometric_restricted(args.n, a).to_json(), args.out)
    else:
        if not 0 < a < 1:
            raise UsageError(f"--alpha must lie strictly between 0 and 1 for full-pmf, got {a}")
        pmf = {str(z): format_rational(geometric_full_pmf(a, z)) for z in range(-args.bound, args.bound + 1)}
        emit({"alpha": format_rational(a), "bound": args.bound, "pmf": pmf}, args.out)
    return EXIT_OK


def cmd_check(args) -> int:
    m = load_mechanism(args.mechanism)
    if args.kind == "dp":
        verdict = check_dp(m, args.alpha)
        emit(verdict.to_json(), args.out)
        return EXIT_OK if verdict.ok else EXIT_NEGATIVE
    try:
        report = check_derivable(m, args.alpha)
    except NotPrivateError as exc:
        # anything derived from the geometric mechanism is private, so this is a "no"
        emit({"derivable": False, "alpha": format_rational(args.alpha), "reason": str(exc)}, args.out)
        return EXIT_NEGATIVE
    emit(report.to_json(), args.out)
    return EXIT_OK if report.derivable else EXIT_NEGATIVE


def cmd_optimize(args) -> int:
    if not 0 < args.alpha < 1:
        raise UsageError(f"--alpha must lie strictly between 0 and 1, got {args.alpha}")
    profile = load_profile(args.loss, args.side, args.n)
    result = optimal_mechanism(args.n, args.alpha, profile, secondary=args.tiebreak)
    obj = result.to_json()
    if args.patterns:
        obj["row_patterns"] = [p.to_json() for p in row_pattern_diagnostic(result.mechanism, args.alpha)]
    emit(obj, args.out)
    return EXIT_OK


def cmd_interact(args) -> int:
    m = load_mechanism(args.mechanism)
    profile = load_profile(args.loss, args.side, m.n)
    emit(optimal_interaction(m, profile).to_json(), args.out)
    return EXIT_OK


def cmd_sample(args) -> int:
    m = load_mechanism(args.mechanism)
    seed = default_seed() if args.seed is None else args.seed
    emit(sample(m, args.true_result, seed).to_json(), args.out)
    return EXIT_OK


def cmd_release(args) -> int:
    ladder = build_ladder(args.n, args.alphas)
    seed = default_seed() if args.seed is None else args.seed
    emit(release(ladder, args.true_result, seed).to_json(), args.out)
    return EXIT_OK


def cmd_audit(args) -> int:
    report = collusion_audit(build_ladder(args.n, args.alphas))
    obj = {"verdict": report.describe(), **report.to_json()}
    emit(obj, args.out)
    return EXIT_OK if report.ok else EXIT_NEGATIVE


def cmd_reduce(args) -> int:
    m = DbMechanism.from_json(_read_json(args.mechanism))
    profile = load_profile(args.loss, args.side, m.space.n)
    report = reduction_audit(m, args.alpha, profile)
    emit(report.to_json(), args.out)
    return EXIT_OK if report.ok else EXIT_NEGATIVE


def cmd_verify(args) -> int:
    from .acceptance import CRITERIA, run_all

    selected = None
    if args.criteria:
        try:
            selected = [int(p) for p in args.criteria.split(",")]
        except ValueError:
            raise UsageError(f"bad criteria list {args.criteria!r}") from None
        unknown = [k for k in selected if k not in CRITERIA]
        if unknown:
            raise UsageError(f"unknown criteria {unknown}; known: {sorted(CRITERIA)}")
    results = run_all(selected)
    for r in results:
        print(r.line(), flush=True)
    return EXIT_OK if all(r.passed for r in results) else EXIT_NEGATIVE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dpcount", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def out_flag(p):
        p.add_argument("--out", help="write JSON here instead of stdout")

    def profile_flags(p):
        p.add_argument("--loss", default="abs", help="abs | square | zero_one | @path.json")
        p.add_argument("--side", help='side information, "a..b" or "a,b,c" (default: all results)')

    p = sub.add_parser("gen", help="generate a geometric mechanism or pmf listing")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--alpha", type=rational_arg, required=True)
    p.add_argument("--form", choices=("restricted", "full-pmf"), default="restricted")
    p.add_argument("--bound", type=int, default=10, help="|z| bound for full-pmf listings")
    out_flag(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("check", help="check differential privacy or derivability")
    p.add_argument("kind", choices=("dp", "derivable"))
    p.add_argument("mechanism")
    p.add_argument("--alpha", type=rational_arg, required=True)
    out_flag(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("optimize", help="optimal DP mechanism for a consumer")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=rational_arg, required=True)
    profile_flags(p)
    p.add_argument("--tiebreak", action="store_true", help="break ties by total distance sum x|i-r|")
    p.add_argument("--patterns", action="store_true", help="include the adjacent-row pattern report")
    out_flag(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("interact", help="optimal post-processing of a deployed mechanism")
    p.add_argument("mechanism")
    profile_flags(p)
    out_flag(p)
    p.set_defaults(func=cmd_interact)

    p = sub.add_parser("sample", help="draw one seeded output from a mechanism")
    p.add_argument("mechanism")
    p.add_argument("--true-result", type=int, required=True)
    p.add_argument("--seed", type=lambda s: int(s, 0))
    out_flag(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("release", help="correlated multi-level release")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alphas", type=rational_list, required=True)
    p.add_argument("--true-result", type=int, required=True)
    p.add_argument("--seed", type=lambda s: int(s, 0))
    out_flag(p)
    p.set_defaults(func=cmd_release)

    p = sub.add_parser("audit", help="exact collusion audit of a release ladder")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alphas", type=rational_list, required=True)
    out_flag(p)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("reduce", help="oblivious reduction audit of a database mechanism")
    p.add_argument("mechanism")
    p.add_argument("--alpha", type=rational_arg, required=True)
    profile_flags(p)
    out_flag(p)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("verify", help="run the acceptance checks")
    p.add_argument("--criteria", help="comma-separated criterion numbers (default: all)")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, LossNotMonotoneError, DimensionError, ValueError, KeyError) as exc:
        print(f"dpcount {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
