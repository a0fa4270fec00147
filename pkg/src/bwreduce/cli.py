"""Batch command-line surface.

Subcommands: ``reduce`` (instance transformations), ``solve`` (budgeted
witness search), ``verify`` (exact certificate checking), ``roundtrip``
(reduce → solve → back-translate → verify with a trace report), ``embed``
(middle-third utilities).

Exit codes: 0 pass, 1 verification failure, 2 budget exhaustion (with a
machine-readable JSON reason on stderr), 3 malformed input or usage, 4
unsupported request.  Every command is deterministic in its flags and input
bytes.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import replace
from typing import Any, Callable

from . import reductions, solvers
from .certificates import (
    BranchPrefix,
    Budget,
    CauchyCertificate,
    CohesiveWitness,
    SeparatorSet,
)
from .core import (
    CantorPoint,
    cantor_dist_exact,
    embed_point_exact,
    format_bits,
    format_rational,
    parse_bits,
)
from .errors import (
    BudgetError,
    ExactValueUnavailableError,
    InstanceFormatError,
    InvalidCertificateError,
    NonMonotoneSelectorError,
    NotANodeError,
    NotGroundTruthError,
    SchemaViolationError,
    SeparatorUndefinedError,
    UnserializableError,
    UnsupportedEdgeError,
    WitnessExhaustedError,
)
from .instances import (
    RationalSequence,
    SeparationInstance,
    SetFamily,
    SigmaTree,
    parse_instance,
    serialize_instance,
)

EDGES = {
    ("bw", "swkl"),
    ("swkl", "separation"),
    ("separation", "bw"),
    ("bwweak", "stcoh"),
    ("stcoh", "bwweak"),
}

_KIND_TYPES = {
    "bw": RationalSequence,
    "bwweak": RationalSequence,
    "swkl": SigmaTree,
    "separation": SeparationInstance,
    "stcoh": SetFamily,
}


class _UsageError(Exception):
    """Bad flags; rerouted to exit 3 instead of argparse's exit 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> Any:  # type: ignore[override]
        raise _UsageError(message)


# ---------------------------------------------------------------------------
# plumbing
# ---------------------------------------------------------------------------


def _load(path: str) -> Any:
    with open(path, "rb") as fh:
        return parse_instance(fh.read())


def _emit(path: str | None, data: bytes) -> None:
    if path is None:
        sys.stdout.write(data.decode("utf-8"))
    else:
        with open(path, "wb") as fh:
            fh.write(data)


def _budget(args: argparse.Namespace) -> Budget:
    return Budget(
        horizon=args.horizon,
        depth=args.depth,
        stage=args.stage,
        code_budget=args.code_budget,
        threshold=args.threshold,
    )


def _require(obj: Any, cls: type, what: str) -> Any:
    if not isinstance(obj, cls):
        raise SchemaViolationError(
            f"{what} needs a {cls.__name__} instance, got {type(obj).__name__}"
        )
    return obj


def _digest(obj: Any) -> str:
    return hashlib.sha256(serialize_instance(obj)).hexdigest()[:16]


def _selector_line(values: tuple[int, ...]) -> str:
    return "selector " + " ".join(str(v) for v in values)


# ---------------------------------------------------------------------------
# reduce
# ---------------------------------------------------------------------------


def cmd_reduce(args: argparse.Namespace) -> int:
    edge = (args.src, args.dst)
    if edge not in EDGES:
        raise UnsupportedEdgeError(
            f"no reduction from {args.src} to {args.dst}; supported: "
            + ", ".join(sorted(f"{a}-{b}" for a, b in EDGES))
        )
    obj = _require(_load(args.input), _KIND_TYPES[args.src], f"--from {args.src}")
    if edge == ("bw", "swkl"):
        out: Any = reductions.bw_to_swkl(obj)
    elif edge == ("swkl", "separation"):
        out = reductions.swkl_to_separation(obj)
    elif edge == ("separation", "bw"):
        out = reductions.separation_to_bw(obj, args.code_budget)
    elif edge == ("bwweak", "stcoh"):
        out = reductions.bwweak_to_stcoh(obj, args.convention)
    else:
        out = reductions.stcoh_to_bwweak(obj)
    _emit(args.output, serialize_instance(out))
    return 0


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------


def cmd_solve(args: argparse.Namespace) -> int:
    obj = _load(args.input)
    budget = _budget(args)
    if args.problem == "accumulation":
        x = _require(obj, RationalSequence, "accumulation")
        res = solvers.find_accumulation_real(x, budget)
        print(f"approx {format_rational(res.approx)}")
        artifact: Any = res
    elif args.problem == "branch":
        tree = _require(obj, SigmaTree, "branch")
        br = solvers.find_branch(tree, budget)
        print(format_bits(br.bits))
        artifact = br
    elif args.problem == "cohesive":
        family = _require(obj, SetFamily, "cohesive")
        witness = solvers.build_strongly_cohesive(family, budget.depth, budget)
        print(_selector_line(witness.selector.values))
        artifact = witness
    elif args.problem == "slow-cauchy":
        x = _require(obj, RationalSequence, "slow-cauchy")
        cert = solvers.extract_slow_cauchy(x, budget)
        print(_selector_line(cert.selector.values))
        artifact = cert
    else:  # fast-cauchy
        x = _require(obj, RationalSequence, "fast-cauchy")
        slow = solvers.extract_slow_cauchy(x, budget)
        cert = solvers.thin_to_fast(slow, x, budget)
        print(_selector_line(cert.selector.values))
        artifact = cert
    if args.output is not None:
        _emit(args.output, serialize_instance(artifact))
    return 0


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def cmd_verify(args: argparse.Namespace) -> int:
    inst = _load(args.input)
    cert = _load(args.certificate)
    if isinstance(cert, CauchyCertificate) and isinstance(inst, RationalSequence):
        bad: Any = solvers.verify_cauchy(cert, inst)
        where = None if bad is None else f"(n={bad.n},v={bad.v},w={bad.w})"
    elif isinstance(cert, CohesiveWitness) and isinstance(inst, SetFamily):
        bad = solvers.verify_cohesive(cert, inst)
        where = None if bad is None else f"(i={bad.i},j={bad.j})"
    elif isinstance(cert, SeparatorSet) and isinstance(inst, SeparationInstance):
        bad = solvers.verify_separator(cert, inst, args.depth, _budget(args))
        where = None if bad is None else f"(n={bad.n})"
    elif isinstance(cert, BranchPrefix) and isinstance(inst, SigmaTree):
        bad = solvers.verify_branch(cert, inst)
        where = None if bad is None else f"(prefix_length={bad.prefix_length})"
    else:
        raise SchemaViolationError(
            f"certificate kind {type(cert).__name__} does not verify against "
            f"instance kind {type(inst).__name__}"
        )
    if bad is None:
        print("pass")
        return 0
    print(f"counterexample {where}", file=sys.stderr)
    return 1


# ---------------------------------------------------------------------------
# roundtrip
# ---------------------------------------------------------------------------


def _roundtrip_bw_swkl(x: RationalSequence, budget: Budget, notes: list[str]):
    tree = reductions.bw_to_swkl(x)
    br = solvers.find_branch(tree, budget)
    bp = reductions.branch_to_point(x, br.bits, budget.stage)
    cert = CauchyCertificate(
        bp.selector, tuple((n, n) for n in range(len(bp.selector))), "fast"
    )
    stages = [("reduce", _digest(tree)), ("solve", _digest(br)), ("back", _digest(cert))]
    bad = solvers.verify_branch(br, tree) or solvers.verify_cauchy(cert, x)
    return stages, bad


def _roundtrip_swkl_separation(y: SigmaTree, budget: Budget, notes: list[str]):
    p = reductions.swkl_to_separation(y)
    s = reductions.exact_separator(y, budget.depth)
    bits = reductions.separator_to_branch(s, y, budget.depth, budget.stage)
    br = BranchPrefix(bits, budget.stage)
    stages = [("reduce", _digest(p)), ("solve", _digest(s)), ("back", _digest(br))]
    return stages, solvers.verify_branch(br, y)


def _roundtrip_separation_bw(p: SeparationInstance, budget: Budget, notes: list[str]):
    rng = budget.depth
    x = reductions.separation_to_bw(p, budget.code_budget)
    kstar = max(
        solvers.stabilization_bound(p, n, budget.code_budget) for n in range(rng)
    )
    notes.append(f"stabilization bound {kstar}")
    window = max(budget.threshold, 1)
    finder_budget = replace(budget, horizon=window, threshold=window)
    bits = solvers.find_accumulation_cantor(
        lambda k: x.point(kstar + k), finder_budget
    )
    if tuple(x.point(kstar).bits(rng)) != tuple(x.point(kstar + window).bits(rng)):
        notes.append("stabilization check failed")  # unreachable for ground truth
    s = reductions.point_to_separator(bits)
    stages = [("reduce", _digest(x)), ("solve", _digest(s))]
    return stages, solvers.verify_separator(s, p, rng, budget)


def _roundtrip_bwweak_stcoh(
    x: RationalSequence, budget: Budget, notes: list[str], convention: str
):
    family = reductions.bwweak_to_stcoh(x, convention)
    levels = budget.depth
    full = [
        i
        for i in range(levels)
        if (pat := family.row_pattern(i)) is not None and pat.is_full()
    ]
    if len(full) == levels:
        notes.append(f"R_i = N for all i < {levels}")
    elif full:
        notes.append("R_i = N for i in {" + ", ".join(map(str, full)) + "}")
    witness = solvers.build_strongly_cohesive(family, levels, budget)
    selector = reductions.subsequence_from_cohesive(witness.selector, x)
    cert = CauchyCertificate(
        selector, tuple((n, 0) for n in range(budget.depth + 1)), "slow"
    )
    stages = [
        ("reduce", _digest(family)),
        ("solve", _digest(witness)),
        ("back", _digest(cert)),
    ]
    bad = solvers.verify_cohesive(witness, family, strong_levels=levels)
    return stages, bad or solvers.verify_cauchy(cert, x)


def _roundtrip_stcoh_bwweak(family: SetFamily, budget: Budget, notes: list[str]):
    x = reductions.stcoh_to_bwweak(family)
    levels = budget.depth
    cauchy_depth = 0
    while 2**cauchy_depth <= 3**levels:
        cauchy_depth += 1
    notes.append(f"slow-cauchy depth {cauchy_depth} for {levels} levels")
    cert = solvers.extract_slow_cauchy(x, replace(budget, depth=cauchy_depth))
    witness = solvers.witness_from_selector(cert.selector, family, levels)
    stages = [
        ("reduce", _digest(x)),
        ("solve", _digest(cert)),
        ("back", _digest(witness)),
    ]
    bad = solvers.verify_cauchy(cert, x)
    return stages, bad or solvers.verify_cohesive(witness, family, strong_levels=levels)


def _violation_text(bad: Any) -> str:
    if isinstance(bad, solvers.CauchyViolation):
        return f"fail (n={bad.n},v={bad.v},w={bad.w})"
    if isinstance(bad, solvers.CohesiveViolation):
        return f"fail (i={bad.i},j={bad.j})"
    if isinstance(bad, solvers.SeparatorViolation):
        return f"fail (n={bad.n})"
    return f"fail (prefix_length={bad.prefix_length})"


def cmd_roundtrip(args: argparse.Namespace) -> int:
    budget = _budget(args)
    obj = _load(args.input)
    notes: list[str] = []
    pair = args.pair
    if pair == "bw-swkl":
        x = _require(obj, RationalSequence, pair)
        stages, bad = _roundtrip_bw_swkl(x, budget, notes)
    elif pair == "swkl-separation":
        y = _require(obj, SigmaTree, pair)
        stages, bad = _roundtrip_swkl_separation(y, budget, notes)
    elif pair == "separation-bw":
        p = _require(obj, SeparationInstance, pair)
        stages, bad = _roundtrip_separation_bw(p, budget, notes)
    elif pair == "bwweak-stcoh":
        x = _require(obj, RationalSequence, pair)
        stages, bad = _roundtrip_bwweak_stcoh(x, budget, notes, args.convention)
    else:  # stcoh-bwweak
        family = _require(obj, SetFamily, pair)
        stages, bad = _roundtrip_stcoh_bwweak(family, budget, notes)

    verifier = "pass" if bad is None else _violation_text(bad)
    verdict = "pass" if bad is None else "fail"
    rows = [(step, digest, "-") for step, digest in stages] + [("verify", "-", verifier)]
    report = {
        "pair": pair,
        "budget": budget.to_repr(),
        "convention": args.convention,
        "stages": [
            {"step": step, "digest": digest, "verifier": check}
            for step, digest, check in rows
        ],
        "notes": notes,
        "verdict": verdict,
    }
    if args.report is not None:
        data = (json.dumps(report, sort_keys=True, indent=2) + "\n").encode("utf-8")
        with open(args.report, "wb") as fh:
            fh.write(data)

    print(f"{'pair':<10} {pair}")
    print(f"{'verdict':<10} {verdict}")
    print(f"{'step':<10} {'digest':<18} verifier")
    for step, digest, check in rows:
        print(f"{step:<10} {digest:<18} {check}")
    for note in notes:
        print(f"note: {note}")
    return 0 if bad is None else 1


# ---------------------------------------------------------------------------
# embed
# ---------------------------------------------------------------------------


def _parse_point(text: str) -> CantorPoint:
    t = text.strip()
    if "(" in t:
        head, _, rest = t.partition("(")
        head = head.rstrip(",")
        if not rest.endswith(")") or "(" in rest:
            raise ValueError(f"bad point syntax {text!r}")
        period = rest[:-1]
        if not period:
            raise ValueError(f"empty period in {text!r}")
        return CantorPoint.periodic(parse_bits(head), parse_bits(period))
    return CantorPoint.periodic(parse_bits(t), (0,))


def cmd_embed(args: argparse.Namespace) -> int:
    if args.direction == "to-real":
        if len(args.points) != 1:
            raise _UsageError("to-real takes exactly one point")
        print(format_rational(embed_point_exact(_parse_point(args.points[0]))))
        return 0
    if len(args.points) != 2:
        raise _UsageError("dist takes exactly two points")
    a = _parse_point(args.points[0])
    b = _parse_point(args.points[1])
    print(f"cantor {format_rational(cantor_dist_exact(a, b))}")
    print(
        "real "
        + format_rational(abs(embed_point_exact(a) - embed_point_exact(b)))
    )
    return 0


# ---------------------------------------------------------------------------
# parser / entry points
# ---------------------------------------------------------------------------


def _add_budget_flags(sub: argparse.ArgumentParser) -> None:
    defaults = Budget()
    sub.add_argument("--horizon", type=int, default=defaults.horizon)
    sub.add_argument("--depth", type=int, default=defaults.depth)
    sub.add_argument("--stage", type=int, default=defaults.stage)
    sub.add_argument("--threshold", type=int, default=defaults.threshold)
    sub.add_argument("--code-budget", type=int, default=defaults.code_budget)


def _build_parser() -> _Parser:
    parser = _Parser(prog="bwreduce", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    reduce_p = subs.add_parser("reduce", help="transform an instance along an edge")
    reduce_p.add_argument("--from", dest="src", required=True)
    reduce_p.add_argument("--to", dest="dst", required=True)
    reduce_p.add_argument("-i", "--input", required=True)
    reduce_p.add_argument("-o", "--output")
    reduce_p.add_argument(
        "--convention", choices=("corrected", "paper-literal"), default="corrected"
    )
    _add_budget_flags(reduce_p)
    reduce_p.set_defaults(fn=cmd_reduce)

    solve_p = subs.add_parser("solve", help="search for a witness under a budget")
    solve_p.add_argument(
        "--problem",
        required=True,
        choices=("accumulation", "branch", "cohesive", "slow-cauchy", "fast-cauchy"),
    )
    solve_p.add_argument("-i", "--input", required=True)
    solve_p.add_argument("-o", "--output")
    _add_budget_flags(solve_p)
    solve_p.set_defaults(fn=cmd_solve)

    verify_p = subs.add_parser("verify", help="re-check a certificate exactly")
    verify_p.add_argument("-i", "--input", required=True)
    verify_p.add_argument("--certificate", required=True)
    _add_budget_flags(verify_p)
    verify_p.set_defaults(fn=cmd_verify)

    rt_p = subs.add_parser("roundtrip", help="reduce, solve, translate back, verify")
    rt_p.add_argument(
        "--pair",
        required=True,
        choices=(
            "bw-swkl",
            "swkl-separation",
            "separation-bw",
            "bwweak-stcoh",
            "stcoh-bwweak",
        ),
    )
    rt_p.add_argument("-i", "--input", required=True)
    rt_p.add_argument("--report")
    rt_p.add_argument(
        "--convention", choices=("corrected", "paper-literal"), default="corrected"
    )
    _add_budget_flags(rt_p)
    rt_p.set_defaults(fn=cmd_roundtrip)

    embed_p = subs.add_parser("embed", help="middle-third embedding utilities")
    embed_p.add_argument("--direction", required=True, choices=("to-real", "dist"))
    embed_p.add_argument("points", nargs="*")
    embed_p.set_defaults(fn=cmd_embed)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.fn(args)
    except _UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 3
    except InstanceFormatError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except (
        NotANodeError,
        SeparatorUndefinedError,
        NonMonotoneSelectorError,
        ValueError,
        OSError,
    ) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except BudgetError as e:
        payload = {"error": "budget", "kind": type(e).__name__, "reason": e.reason}
        print(json.dumps(payload, sort_keys=True), file=sys.stderr)
        return 2
    except WitnessExhaustedError as e:
        payload = {"error": "budget", "kind": type(e).__name__, "reason": str(e)}
        print(json.dumps(payload, sort_keys=True), file=sys.stderr)
        return 2
    except InvalidCertificateError as e:
        print(f"fail: {e}", file=sys.stderr)
        return 1
    except (
        UnsupportedEdgeError,
        NotGroundTruthError,
        ExactValueUnavailableError,
        UnserializableError,
    ) as e:
        print(f"error: {e}", file=sys.stderr)
        return 4


def app() -> None:
    sys.exit(main())
