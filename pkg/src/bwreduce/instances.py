"""Problem instances and their file format.

Four instance kinds, all closed unions of finitely-describable forms plus
caller-supplied evaluator callbacks (API only, never serialized):

* rational sequences in [0, 1] (accumulation-point search),
* stagewise-enumerated binary trees, downward closed by membership semantics
  (branch search),
* separation problems given by two decidable three-place predicates
  B_i(x, y; n) whose limit behaviour carves out disjoint sets A_0, A_1,
* countable set families R_0, R_1, ... over the naturals (cohesion).

Files use one JSON envelope ``{"kind": ..., "repr": ..., "meta": ...}``;
parsing reports malformed syntax, schema violations and invariant violations
separately, each with a dotted location.  Serialization is canonical (sorted
keys, two-space indent, trailing newline) and ``serialize ∘ parse`` is the
identity on canonical bytes.  Derived instances (built by reductions) carry
their source and are re-derived on parse, so round trips are replayable.
"""

from __future__ import annotations

import json
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Any, Callable, Mapping, Sequence

from .certificates import (
    AccumulationResult,
    BranchPrefix,
    CauchyCertificate,
    CohesiveWitness,
    Selector,
    SeparatorSet,
)
from .core import (
    Bits,
    CantorPoint,
    DyadicInterval,
    embed_point,
    embed_point_exact,
    format_bits,
    format_rational,
    is_prefix,
    parse_bits,
    parse_rational,
    seq_decode,
    string_decode,
    unpair,
)
from .errors import (
    ExactValueUnavailableError,
    InvariantViolationError,
    MalformedSyntaxError,
    NotGroundTruthError,
    SchemaViolationError,
    UnserializableError,
)

_UNIT = (Fraction(0), Fraction(1))


def _check_unit(q: Fraction, what: str) -> Fraction:
    if not _UNIT[0] <= q <= _UNIT[1]:
        raise ValueError(f"{what} {format_rational(q)} outside [0, 1]")
    return q


@dataclass(frozen=True)
class Provenance:
    """How a derived instance was produced: reduction name, source instance,
    and any convention/budget parameters needed to replay it."""

    derived_by: str
    source: Any
    params: tuple[tuple[str, Any], ...] = ()

    def to_repr(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "form": "derived",
            "derived_by": self.derived_by,
            "source": _envelope_dict(self.source),
        }
        out.update(dict(self.params))
        return out


# ---------------------------------------------------------------------------
# rational sequences
# ---------------------------------------------------------------------------


class RationalSequence:
    """Base class: a total map i -> exact rational in [0, 1].

    ``term`` is exact; representations that can only be approximated (embedded
    sequences over rule-backed points) raise ExactValueUnavailableError from
    ``term`` and support ``term_approx`` instead.
    """

    kind = "rational_sequence"
    form: str = ""

    def __init__(self, meta: Mapping[str, Any] | None = None):
        self.meta: dict[str, Any] = dict(meta or {})

    def term(self, i: int) -> Fraction:
        raise NotImplementedError

    def term_approx(self, i: int, precision: int) -> tuple[Fraction, Fraction]:
        """(value, error-bound); exact representations return error 0."""
        return self.term(i), Fraction(0)

    def periodic_structure(self) -> tuple[int, int] | None:
        """(prefix length, period length) when i -> term(i) is eventually
        periodic by construction, else None."""
        return None

    def to_repr(self) -> dict[str, Any]:
        raise UnserializableError(f"{self.form or type(self).__name__} has no file form")


class PeriodicSequence(RationalSequence):
    """Explicit eventually periodic list of rationals."""

    form = "periodic"

    def __init__(
        self,
        prefix: Sequence[Fraction],
        period: Sequence[Fraction],
        meta: Mapping[str, Any] | None = None,
    ):
        super().__init__(meta)
        if len(period) == 0:
            raise ValueError("period must be non-empty")
        self.prefix = tuple(_check_unit(Fraction(q), "term") for q in prefix)
        self.period = tuple(_check_unit(Fraction(q), "term") for q in period)

    def term(self, i: int) -> Fraction:
        if i < len(self.prefix):
            return self.prefix[i]
        return self.period[(i - len(self.prefix)) % len(self.period)]

    def periodic_structure(self) -> tuple[int, int]:
        return len(self.prefix), len(self.period)

    def to_repr(self) -> dict[str, Any]:
        return {
            "form": "periodic",
            "prefix": [format_rational(q) for q in self.prefix],
            "period": [format_rational(q) for q in self.period],
        }


class ConstantSequence(RationalSequence):
    form = "constant"

    def __init__(self, value: Fraction, meta: Mapping[str, Any] | None = None):
        super().__init__(meta)
        self.value = _check_unit(Fraction(value), "constant value")

    def term(self, i: int) -> Fraction:
        return self.value

    def periodic_structure(self) -> tuple[int, int]:
        return 0, 1

    def to_repr(self) -> dict[str, Any]:
        return {"form": "constant", "value": format_rational(self.value)}


class HarmonicSequence(RationalSequence):
    """term(i) = 1/(i+1)."""

    form = "harmonic"

    def term(self, i: int) -> Fraction:
        return Fraction(1, i + 1)

    def to_repr(self) -> dict[str, Any]:
        return {"form": "harmonic"}


class AlternatingSequence(RationalSequence):
    """term(2i) = a, term(2i+1) = b."""

    form = "alternating"

    def __init__(self, a: Fraction, b: Fraction, meta: Mapping[str, Any] | None = None):
        super().__init__(meta)
        self.a = _check_unit(Fraction(a), "term")
        self.b = _check_unit(Fraction(b), "term")

    def term(self, i: int) -> Fraction:
        return self.a if i % 2 == 0 else self.b

    def periodic_structure(self) -> tuple[int, int]:
        return 0, 2

    def to_repr(self) -> dict[str, Any]:
        return {
            "form": "alternating",
            "a": format_rational(self.a),
            "b": format_rational(self.b),
        }


class BinaryWalkSequence(RationalSequence):
    """Dyadic approximations from below: term(i) = floor(value * 2^i) / 2^i.

    Converges to ``value``; eventually constant exactly when ``value`` is
    dyadic.
    """

    form = "binary_walk"

    def __init__(self, value: Fraction, meta: Mapping[str, Any] | None = None):
        super().__init__(meta)
        self.value = _check_unit(Fraction(value), "walk target")

    def term(self, i: int) -> Fraction:
        scale = 2**i
        return Fraction(int(self.value * scale), scale)

    def periodic_structure(self) -> tuple[int, int] | None:
        d = self.value.denominator
        if d & (d - 1) == 0:  # dyadic target: constant from level log2(d)
            return d.bit_length() - 1, 1
        return None

    def to_repr(self) -> dict[str, Any]:
        return {"form": "binary_walk", "value": format_rational(self.value)}


class TableSequence(RationalSequence):
    """Finitely many listed terms, a fixed default everywhere else."""

    form = "table"

    def __init__(
        self,
        entries: Mapping[int, Fraction],
        default: Fraction,
        meta: Mapping[str, Any] | None = None,
    ):
        super().__init__(meta)
        self.entries = {
            int(i): _check_unit(Fraction(q), "term") for i, q in sorted(entries.items())
        }
        if any(i < 0 for i in self.entries):
            raise ValueError("table indices must be naturals")
        self.default = _check_unit(Fraction(default), "default term")

    def term(self, i: int) -> Fraction:
        return self.entries.get(i, self.default)

    def periodic_structure(self) -> tuple[int, int]:
        bound = max(self.entries) + 1 if self.entries else 0
        return bound, 1

    def to_repr(self) -> dict[str, Any]:
        return {
            "form": "table",
            "entries": [
                {"index": i, "value": format_rational(q)} for i, q in self.entries.items()
            ],
            "default": format_rational(self.default),
        }


class EmbeddedSequence(RationalSequence):
    """Image of a sequence of Cantor points under the middle-third embedding.

    term(i) is exact whenever the i-th point is eventually periodic; points
    are produced lazily and memoized (the memo behaves as if absent).
    """

    form = "embedded"

    def __init__(
        self,
        points: Callable[[int], CantorPoint] | Sequence[CantorPoint],
        provenance: Provenance | None = None,
        structure: tuple[int, int] | None = None,
        label: str = "embedded",
        meta: Mapping[str, Any] | None = None,
    ):
        super().__init__(meta)
        if callable(points):
            self._points_fn = points
        else:
            seq = list(points)

            def _points_fn(i: int, _seq=seq) -> CantorPoint:
                return _seq[i]

            self._points_fn = _points_fn
        self.provenance = provenance
        self._structure = structure
        self.label = label
        self._memo: dict[int, CantorPoint] = {}
        self._values: dict[int, Fraction] = {}

    def point(self, i: int) -> CantorPoint:
        pt = self._memo.get(i)
        if pt is None:
            pt = self._points_fn(i)
            self._memo[i] = pt
        return pt

    def term(self, i: int) -> Fraction:
        value = self._values.get(i)
        if value is None:
            pt = self.point(i)
            if not pt.is_periodic:
                raise ExactValueUnavailableError(
                    f"term {i} of {self.label} is rule-backed; use term_approx"
                )
            value = embed_point_exact(pt)
            self._values[i] = value
        return value

    def term_approx(self, i: int, precision: int) -> tuple[Fraction, Fraction]:
        return embed_point(self.point(i), precision)

    def periodic_structure(self) -> tuple[int, int] | None:
        return self._structure

    def to_repr(self) -> dict[str, Any]:
        if self.provenance is None:
            raise UnserializableError("embedded sequence without provenance has no file form")
        return self.provenance.to_repr()


def embed_sequence(
    points: Callable[[int], CantorPoint] | Sequence[CantorPoint],
    *,
    provenance: Provenance | None = None,
    structure: tuple[int, int] | None = None,
    label: str = "embedded",
) -> EmbeddedSequence:
    """Lift a sequence of Cantor points to its middle-third rational sequence."""
    return EmbeddedSequence(points, provenance, structure, label)


def eval_sequence(x: RationalSequence, i: int) -> Fraction:
    """Exact i-th term (see :meth:`RationalSequence.term`)."""
    if i < 0:
        raise ValueError("term indices are naturals")
    return x.term(i)


# ---------------------------------------------------------------------------
# stagewise-enumerated binary trees
# ---------------------------------------------------------------------------


class SigmaTree:
    """A binary tree enumerated in stages.

    The denoted tree at stage s is the downward closure of the nodes
    enumerated by stage s; enumeration is monotone in s.  ``member_at_stage``
    and ``has_extension`` are total and decidable for every representation;
    ``limit_heights`` is the ground-truth view (maximal length of a limit
    node extending each child, None meaning unbounded) and exists only for
    representations whose limit is decidable.
    """

    kind = "sigma_tree"
    form: str = ""

    def __init__(self, meta: Mapping[str, Any] | None = None):
        self.meta: dict[str, Any] = dict(meta or {})

    def member_at_stage(self, bits: Bits, stage: int) -> bool:
        raise NotImplementedError

    def has_extension(self, bits: Bits, length: int, stage: int) -> bool:
        """Is some member of exactly ``length`` bits, extending ``bits``,
        present at ``stage``?  (False whenever length < len(bits).)"""
        raise NotImplementedError

    def limit_heights(self, bits: Bits) -> tuple[int | None, int | None]:
        """Ground truth per child c: the largest length of a limit node
        extending bits⌢c (len(bits) when that side is immediately dead,
        None when unbounded)."""
        raise NotGroundTruthError(f"{self.form} tree has no decidable limit view")

    def limit_has_extension(self, bits: Bits, length: int) -> bool:
        raise NotGroundTruthError(f"{self.form} tree has no decidable limit view")

    def to_repr(self) -> dict[str, Any]:
        raise UnserializableError(f"{self.form or type(self).__name__} has no file form")


class FullBinaryTree(SigmaTree):
    form = "full_binary"

    def member_at_stage(self, bits: Bits, stage: int) -> bool:
        return True

    def has_extension(self, bits: Bits, length: int, stage: int) -> bool:
        return length >= len(bits)

    def limit_heights(self, bits: Bits) -> tuple[int | None, int | None]:
        return None, None

    def limit_has_extension(self, bits: Bits, length: int) -> bool:
        return length >= len(bits)

    def to_repr(self) -> dict[str, Any]:
        return {"form": "full_binary"}


def _point_repr(pt: CantorPoint) -> dict[str, str]:
    if not pt.is_periodic:
        raise UnserializableError("rule-backed branch point has no file form")
    return {"prefix": format_bits(pt.prefix), "period": format_bits(pt.period)}


def _point_from_repr(obj: Any, path: str) -> CantorPoint:
    if not isinstance(obj, Mapping):
        raise SchemaViolationError("point must be an object", path)
    prefix = parse_bits(obj.get("prefix", ""), location=f"{path}.prefix")
    period = parse_bits(obj.get("period", None), location=f"{path}.period")
    if len(period) == 0:
        raise InvariantViolationError("period must be non-empty", f"{path}.period")
    return CantorPoint.periodic(prefix, period)


class SingleBranchTree(SigmaTree):
    """Exactly one infinite branch; members are its prefixes at every stage."""

    form = "single_branch"

    def __init__(self, point: CantorPoint, meta: Mapping[str, Any] | None = None):
        super().__init__(meta)
        self.point = point

    def _on_branch(self, bits: Bits) -> bool:
        return all(b == self.point.bit(i) for i, b in enumerate(bits))

    def member_at_stage(self, bits: Bits, stage: int) -> bool:
        return self._on_branch(bits)

    def has_extension(self, bits: Bits, length: int, stage: int) -> bool:
        return length >= len(bits) and self._on_branch(bits)

    def limit_heights(self, bits: Bits) -> tuple[int | None, int | None]:
        return tuple(
            None if self._on_branch(bits + (c,)) else len(bits) for c in (0, 1)
        )  # type: ignore[return-value]

    def limit_has_extension(self, bits: Bits, length: int) -> bool:
        return length >= len(bits) and self._on_branch(bits)

    def to_repr(self) -> dict[str, Any]:
        return {"form": "single_branch", "point": _point_repr(self.point)}


class BranchUnionTree(SigmaTree):
    """Union of finitely many infinite branches."""

    form = "branch_union"

    def __init__(self, points: Sequence[CantorPoint], meta: Mapping[str, Any] | None = None):
        super().__init__(meta)
        if len(points) == 0:
            raise ValueError("branch union needs at least one branch")
        self.points = tuple(points)

    def _on_some_branch(self, bits: Bits) -> bool:
        return any(
            all(b == pt.bit(i) for i, b in enumerate(bits)) for pt in self.points
        )

    def member_at_stage(self, bits: Bits, stage: int) -> bool:
        return self._on_some_branch(bits)

    def has_extension(self, bits: Bits, length: int, stage: int) -> bool:
        return length >= len(bits) and self._on_some_branch(bits)

    def limit_heights(self, bits: Bits) -> tuple[int | None, int | None]:
        return tuple(
            None if self._on_some_branch(bits + (c,)) else len(bits) for c in (0, 1)
        )  # type: ignore[return-value]

    def limit_has_extension(self, bits: Bits, length: int) -> bool:
        return length >= len(bits) and self._on_some_branch(bits)

    def to_repr(self) -> dict[str, Any]:
        return {"form": "branch_union", "points": [_point_repr(pt) for pt in self.points]}


class StageListTree(SigmaTree):
    """Explicit per-stage snapshots of the enumerated node set.

    Entries (stage, node) list the full snapshot at each mentioned stage;
    snapshots must be inclusion-increasing, membership between mentioned
    stages uses the latest one at or below the query.
    """

    form = "stage_list"

    def __init__(
        self, entries: Sequence[tuple[int, Bits]], meta: Mapping[str, Any] | None = None
    ):
        super().__init__(meta)
        snapshots: dict[int, set[Bits]] = {}
        for stage, node in entries:
            if stage < 0:
                raise ValueError("stages are naturals")
            snapshots.setdefault(stage, set()).add(tuple(node))
        self.stages = tuple(sorted(snapshots))
        self.snapshots = {s: frozenset(snapshots[s]) for s in self.stages}
        for earlier, later in zip(self.stages, self.stages[1:]):
            missing = self.snapshots[earlier] - self.snapshots[later]
            if missing:
                node = min(missing)
                raise ValueError(
                    f"node {format_bits(node)!r} enumerated at stage {earlier} "
                    f"is absent at stage {later}"
                )

    def snapshot(self, stage: int) -> frozenset[Bits]:
        best: frozenset[Bits] = frozenset()
        for s in self.stages:
            if s > stage:
                break
            best = self.snapshots[s]
        return best

    def member_at_stage(self, bits: Bits, stage: int) -> bool:
        return any(is_prefix(bits, node) for node in self.snapshot(stage))

    def has_extension(self, bits: Bits, length: int, stage: int) -> bool:
        if length < len(bits):
            return False
        return any(
            len(node) >= length and is_prefix(bits, node) for node in self.snapshot(stage)
        )

    def _limit(self) -> frozenset[Bits]:
        return self.snapshots[self.stages[-1]] if self.stages else frozenset()

    def limit_heights(self, bits: Bits) -> tuple[int | None, int | None]:
        out: list[int | None] = []
        for c in (0, 1):
            child = bits + (c,)
            best = len(bits)
            for node in self._limit():
                if is_prefix(child, node):
                    best = max(best, len(node))
            out.append(best)
        return out[0], out[1]

    def limit_has_extension(self, bits: Bits, length: int) -> bool:
        if length < len(bits):
            return False
        return any(len(node) >= length and is_prefix(bits, node) for node in self._limit())

    def to_repr(self) -> dict[str, Any]:
        entries = [
            {"stage": s, "node": format_bits(node)}
            for s in self.stages
            for node in sorted(self.snapshots[s])
        ]
        return {"form": "stage_list", "entries": entries}


class DerivedTree(SigmaTree):
    """Tree derived from a rational sequence: the node of bits b (depth d) is
    enumerated at stage s iff d distinct indices j <= s have term(j) inside
    the closed dyadic cell of b.  The enumerated set is downward closed and
    stage-monotone by construction."""

    form = "derived"

    def __init__(self, source: RationalSequence, meta: Mapping[str, Any] | None = None):
        super().__init__(meta)
        self.source = source
        self.provenance = Provenance("bw_to_swkl", source)
        self._sorted: dict[int, list[Fraction]] = {}

    def _terms_sorted(self, stage: int) -> list[Fraction]:
        cached = self._sorted.get(stage)
        if cached is None:
            cached = sorted(self.source.term(j) for j in range(stage + 1))
            self._sorted[stage] = cached
        return cached

    def witness_count(self, bits: Bits, stage: int) -> int:
        cell = DyadicInterval.from_bits(bits)
        terms = self._terms_sorted(stage)
        return bisect_right(terms, cell.upper) - bisect_left(terms, cell.lower)

    def member_at_stage(self, bits: Bits, stage: int) -> bool:
        if stage < 0:
            return False
        return self.witness_count(bits, stage) >= len(bits)

    def has_extension(self, bits: Bits, length: int, stage: int) -> bool:
        if length < len(bits) or not self.member_at_stage(bits, stage):
            return False
        if length == len(bits):
            return True
        return any(
            self.has_extension(bits + (c,), length, stage) for c in (0, 1)
        )

    def to_repr(self) -> dict[str, Any]:
        return self.provenance.to_repr()


def tree_member_at_stage(tree: SigmaTree, bits: Bits, stage: int) -> bool:
    """Is ``bits`` in the downward closure of the nodes enumerated by ``stage``?"""
    if stage < 0:
        raise ValueError("stages are naturals")
    return tree.member_at_stage(tuple(bits), stage)


# ---------------------------------------------------------------------------
# separation instances
# ---------------------------------------------------------------------------


def make_unique_minimal(b: Callable[[int, int, int], bool]) -> Callable[[int, int, int], bool]:
    """Minimize witnesses: B'(x, y; n) holds iff y is the least witness of x.

    After the wrapper, at most one y satisfies B' for each (x, n).
    """

    def b_min(x: int, y: int, n: int) -> bool:
        return b(x, y, n) and not any(b(x, yy, n) for yy in range(y))

    return b_min


@dataclass(frozen=True)
class Cond:
    """A decidable condition on the parameter n, from a closed menu."""

    test: str  # always|never|even|odd|mod|lt|ge|in|not_in
    modulus: int | None = None
    residues: tuple[int, ...] = ()
    bound: int | None = None
    values: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.test not in ("always", "never", "even", "odd", "mod", "lt", "ge", "in", "not_in"):
            raise ValueError(f"unknown condition test {self.test!r}")
        if self.test == "mod" and (self.modulus is None or self.modulus < 1):
            raise ValueError("mod condition needs modulus >= 1")
        if self.test in ("lt", "ge") and self.bound is None:
            raise ValueError(f"{self.test} condition needs a bound")

    def holds(self, n: int) -> bool:
        if self.test == "always":
            return True
        if self.test == "never":
            return False
        if self.test == "even":
            return n % 2 == 0
        if self.test == "odd":
            return n % 2 == 1
        if self.test == "mod":
            return n % self.modulus in self.residues
        if self.test == "lt":
            return n < self.bound
        if self.test == "ge":
            return n >= self.bound
        if self.test == "in":
            return n in self.values
        return n not in self.values

    def to_repr(self) -> dict[str, Any]:
        out: dict[str, Any] = {"test": self.test}
        if self.test == "mod":
            out["modulus"] = self.modulus
            out["residues"] = sorted(self.residues)
        elif self.test in ("lt", "ge"):
            out["bound"] = self.bound
        elif self.test in ("in", "not_in"):
            out["values"] = sorted(self.values)
        return out

    @staticmethod
    def from_repr(obj: Any, path: str) -> "Cond":
        if not isinstance(obj, Mapping) or "test" not in obj:
            raise SchemaViolationError("condition must be an object with a test", path)
        test = obj["test"]
        try:
            return Cond(
                test,
                modulus=obj.get("modulus"),
                residues=tuple(obj.get("residues", ())),
                bound=obj.get("bound"),
                values=tuple(obj.get("values", ())),
            )
        except ValueError as e:
            raise SchemaViolationError(str(e), path) from e


@dataclass(frozen=True)
class RulePredicate:
    """A decidable B(x, y; n) from a closed rule menu plus finite overrides.

    Rules: ``never``, ``always``, ``y_eq_x`` (y = x), ``y_eq_x_if`` (cond(n)
    and y = x), ``y_eq_const`` (cond(n) and y = value), ``y_eq_x_below``
    (x < bound and y = x).  ``overrides`` pins individual (x, y, n) triples.
    The closed menu keeps witness structure — and hence totality of
    ∀x∃y B(x, y; n) — exactly decidable, which is what ground-truth
    verification needs.
    """

    rule: str
    cond: Cond = Cond("always")
    value: int | None = None
    bound: int | None = None
    overrides: tuple[tuple[int, int, int, bool], ...] = ()

    def __post_init__(self) -> None:
        if self.rule not in ("never", "always", "y_eq_x", "y_eq_x_if", "y_eq_const", "y_eq_x_below"):
            raise ValueError(f"unknown predicate rule {self.rule!r}")
        if self.rule == "y_eq_const" and (self.value is None or self.value < 0):
            raise ValueError("y_eq_const needs a natural value")
        if self.rule == "y_eq_x_below" and (self.bound is None or self.bound < 0):
            raise ValueError("y_eq_x_below needs a natural bound")
        norm = tuple(sorted(set((int(x), int(y), int(n), bool(v)) for x, y, n, v in self.overrides)))
        if any(x < 0 or y < 0 or n < 0 for x, y, n, _ in norm):
            raise ValueError("override coordinates must be naturals")
        seen: set[tuple[int, int, int]] = set()
        for x, y, n, _ in norm:
            if (x, y, n) in seen:
                raise ValueError(f"conflicting overrides at ({x}, {y}, {n})")
            seen.add((x, y, n))
        object.__setattr__(self, "overrides", norm)

    # -- raw evaluation ------------------------------------------------------

    def _override(self, x: int, y: int, n: int) -> bool | None:
        for ox, oy, on, ov in self.overrides:
            if (ox, oy, on) == (x, y, n):
                return ov
        return None

    def _rule_holds(self, x: int, y: int, n: int) -> bool:
        if self.rule == "never":
            return False
        if self.rule == "always":
            return True
        if self.rule == "y_eq_x":
            return y == x
        if self.rule == "y_eq_x_if":
            return self.cond.holds(n) and y == x
        if self.rule == "y_eq_const":
            return self.cond.holds(n) and y == self.value
        return x < self.bound and y == x  # y_eq_x_below

    def evaluate(self, x: int, y: int, n: int) -> bool:
        ov = self._override(x, y, n)
        return ov if ov is not None else self._rule_holds(x, y, n)

    # -- exact witness structure ----------------------------------------------

    def _rule_witness(self, x: int, n: int) -> int | None:
        """The unique rule witness y for (x, n), ignoring overrides
        ("always" is handled separately)."""
        if self.rule == "never" or self.rule == "always":
            return None
        if self.rule == "y_eq_x":
            return x
        if self.rule == "y_eq_x_if":
            return x if self.cond.holds(n) else None
        if self.rule == "y_eq_const":
            return self.value if self.cond.holds(n) else None
        return x if x < self.bound else None

    def minimal_witness(self, x: int, n: int) -> int | None:
        """Least y with B(x, y; n), or None when there is none."""
        cands = [oy for ox, oy, on, ov in self.overrides if ov and (ox, on) == (x, n)]
        if self.rule == "always":
            y = 0
            while self._override(x, y, n) is False:
                y += 1
            cands.append(y)
        else:
            w = self._rule_witness(x, n)
            if w is not None and self._override(x, w, n) is not False:
                cands.append(w)
        return min(cands) if cands else None

    def first_failure(self, n: int) -> int | None:
        """Least x with no witness at all, or None when ∀x∃y B(x, y; n)."""
        scan_end = max(
            [ox for ox, _, on, _ in self.overrides if on == n] + [self.bound or 0]
        ) + 1
        for x in range(scan_end + 1):
            if self.minimal_witness(x, n) is None:
                return x
        # x = scan_end is already in the pure-rule regime and has a witness;
        # witness existence there is constant in x, so all larger x do too.
        return None

    def tail_shape(self, n: int) -> tuple[Any, ...] | None:
        """Shape of the minimal witness beyond all overrides (total rules)."""
        if self.rule == "always":
            return ("const", 0)
        if self.rule == "y_eq_x" or (self.rule == "y_eq_x_if" and self.cond.holds(n)):
            return ("ident",)
        if self.rule == "y_eq_const" and self.cond.holds(n):
            return ("const", self.value)
        return None

    def to_repr(self) -> dict[str, Any]:
        out: dict[str, Any] = {"rule": self.rule}
        if self.rule in ("y_eq_x_if", "y_eq_const"):
            out["cond"] = self.cond.to_repr()
        if self.rule == "y_eq_const":
            out["value"] = self.value
        if self.rule == "y_eq_x_below":
            out["bound"] = self.bound
        if self.overrides:
            out["overrides"] = [
                {"x": x, "y": y, "n": n, "value": v} for x, y, n, v in self.overrides
            ]
        return out

    @staticmethod
    def from_repr(obj: Any, path: str) -> "RulePredicate":
        if not isinstance(obj, Mapping) or "rule" not in obj:
            raise SchemaViolationError("predicate must be an object with a rule", path)
        cond = Cond("always")
        if "cond" in obj:
            cond = Cond.from_repr(obj["cond"], f"{path}.cond")
        overrides = []
        raw = obj.get("overrides", [])
        if not isinstance(raw, list):
            raise SchemaViolationError("overrides must be an array", f"{path}.overrides")
        for i, entry in enumerate(raw):
            if not isinstance(entry, Mapping):
                raise SchemaViolationError(
                    "override must be an object", f"{path}.overrides[{i}]"
                )
            overrides.append(
                (entry.get("x"), entry.get("y"), entry.get("n"), entry.get("value"))
            )
        try:
            return RulePredicate(
                obj["rule"],
                cond=cond,
                value=obj.get("value"),
                bound=obj.get("bound"),
                overrides=tuple(overrides),
            )
        except (ValueError, TypeError) as e:
            raise InvariantViolationError(str(e), path) from e


class CallbackPredicate:
    """Caller-supplied decidable B(x, y; n); API only, never serialized."""

    def __init__(self, fn: Callable[[int, int, int], bool], label: str = "callback"):
        self.fn = fn
        self.label = label

    def evaluate(self, x: int, y: int, n: int) -> bool:
        return bool(self.fn(x, y, n))


class TreeSidePredicate:
    """The separation predicate of a stagewise tree, for one child side.

    With σ the string coded by n and x = ⟨ℓ, s0⟩, B(x, y; n) denies the
    conjunction "no length-ℓ member extends σ⌢side at stage y" and "some
    length-ℓ member extends σ⌢(1-side) by stage s0"; the least refuting y is
    the first stage at which the σ⌢side part reaches length ℓ.
    """

    def __init__(self, tree: SigmaTree, side: int):
        if side not in (0, 1):
            raise ValueError("side must be 0 or 1")
        self.tree = tree
        self.side = side

    def evaluate(self, x: int, y: int, n: int) -> bool:
        sigma = string_decode(n)
        ell, s0 = unpair(x)
        dead_here = not self.tree.has_extension(sigma + (self.side,), ell, y)
        alive_other = self.tree.has_extension(sigma + (1 - self.side,), ell, s0)
        return not (dead_here and alive_other)


Predicate = RulePredicate | CallbackPredicate | TreeSidePredicate


class SeparationInstance:
    """Two decidable predicates B_0, B_1 with the promise that the limit sets
    A_i = {n : ¬∀x∃y B_i(x, y; n)} are disjoint; a separator S must satisfy
    A_0 ⊆ S ⊆ complement(A_1)."""

    kind = "separation"

    def __init__(
        self,
        b0: Predicate,
        b1: Predicate,
        disjointness_promise: bool = True,
        provenance: Provenance | None = None,
        meta: Mapping[str, Any] | None = None,
    ):
        self.predicates: tuple[Predicate, Predicate] = (b0, b1)
        self.disjointness_promise = bool(disjointness_promise)
        self.provenance = provenance
        self.meta: dict[str, Any] = dict(meta or {})
        self._unique: dict[int, Callable[[int, int, int], bool]] = {}
        self._codes: dict[tuple[int, int], tuple[list[int], int]] = {}

    def evaluate(self, i: int, x: int, y: int, n: int) -> bool:
        return self.predicates[i].evaluate(x, y, n)

    def unique(self, i: int) -> Callable[[int, int, int], bool]:
        """B'_i with witnesses minimized (at most one y per (x, n))."""
        fn = self._unique.get(i)
        if fn is None:
            pred = self.predicates[i]
            if isinstance(pred, RulePredicate):

                def fn(x: int, y: int, n: int, _p=pred) -> bool:
                    return _p.minimal_witness(x, n) == y

            else:
                fn = make_unique_minimal(pred.evaluate)
            self._unique[i] = fn
        return fn

    # -- valid-code bookkeeping (shared by the f/g/h machinery) ---------------

    def valid_codes_below(self, i: int, n: int, k: int) -> list[int]:
        """Sorted codes s < k whose decoded sequence satisfies B'_i at every
        position.  Incrementally extended and memoized per (i, n)."""
        codes, high = self._codes.get((i, n), ([1], 2))  # 1 = empty sequence, always valid
        if k > high:
            bprime = self.unique(i)
            for s in range(high, k):
                vals = seq_decode(s)
                if vals is None:
                    continue
                if all(bprime(x, v, n) for x, v in enumerate(vals)):
                    codes.append(s)
            high = k
            self._codes[(i, n)] = (codes, high)
        return codes if k >= high else [s for s in codes if s < k]

    # -- ground truth (closed rule forms only) --------------------------------

    def has_ground_truth(self) -> bool:
        return all(isinstance(p, RulePredicate) for p in self.predicates)

    def _rule(self, i: int) -> RulePredicate:
        pred = self.predicates[i]
        if not isinstance(pred, RulePredicate):
            raise NotGroundTruthError(
                "totality oracle exists only for closed rule predicates"
            )
        return pred

    def totality(self, i: int, n: int) -> bool:
        """Ground truth for ∀x∃y B_i(x, y; n) (iff rng(g_i(n, ·)) = ℕ)."""
        return self._rule(i).first_failure(n) is None

    def first_failure(self, i: int, n: int) -> int | None:
        return self._rule(i).first_failure(n)

    def choice_values(self, i: int, n: int, count: int) -> list[int]:
        """Minimal witnesses for x < count (requires totality through count)."""
        rule = self._rule(i)
        out = []
        for x in range(count):
            w = rule.minimal_witness(x, n)
            if w is None:
                raise NotGroundTruthError(f"side {i} has no witness at x = {x}, n = {n}")
            out.append(w)
        return out

    def to_repr(self) -> dict[str, Any]:
        if self.provenance is not None:
            return self.provenance.to_repr()
        b0, b1 = self.predicates
        if not (isinstance(b0, RulePredicate) and isinstance(b1, RulePredicate)):
            raise UnserializableError("callback predicates have no file form")
        return {
            "form": "rules",
            "b0": b0.to_repr(),
            "b1": b1.to_repr(),
            "disjointness_promise": self.disjointness_promise,
        }


# ---------------------------------------------------------------------------
# set families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RowPattern:
    """One set of naturals as an eventually periodic characteristic pattern."""

    prefix: Bits
    period: Bits

    def __post_init__(self) -> None:
        if len(self.period) == 0:
            raise ValueError("row period must be non-empty")
        if any(b not in (0, 1) for b in self.prefix + self.period):
            raise ValueError("row bits must be 0/1")

    def member(self, j: int) -> bool:
        if j < len(self.prefix):
            return self.prefix[j] == 1
        return self.period[(j - len(self.prefix)) % len(self.period)] == 1

    def is_full(self) -> bool:
        """Does this pattern denote all of ℕ?"""
        return all(b == 1 for b in self.prefix + self.period)

    def to_repr(self) -> dict[str, str]:
        return {"prefix": format_bits(self.prefix), "period": format_bits(self.period)}

    @staticmethod
    def from_repr(obj: Any, path: str) -> "RowPattern":
        if not isinstance(obj, Mapping):
            raise SchemaViolationError("row pattern must be an object", path)
        prefix = parse_bits(obj.get("prefix", ""), location=f"{path}.prefix")
        period = parse_bits(obj.get("period", None), location=f"{path}.period")
        try:
            return RowPattern(prefix, period)
        except ValueError as e:
            raise InvariantViolationError(str(e), path) from e


class SetFamily:
    """A countable family (R_n) of decidable sets of naturals."""

    kind = "set_family"
    form: str = ""

    def __init__(self, meta: Mapping[str, Any] | None = None):
        self.meta: dict[str, Any] = dict(meta or {})

    def member(self, n: int, j: int) -> bool:
        raise NotImplementedError

    def row_pattern(self, n: int) -> RowPattern | None:
        """Eventually periodic view of row n when available."""
        return None

    def periodic_structure(self, levels: int) -> tuple[int, int] | None:
        """(J0, Q) such that, jointly for rows n < levels, membership of j is
        periodic in j with period Q beyond J0; None when unknown."""
        rows = [self.row_pattern(n) for n in range(levels)]
        if any(r is None for r in rows):
            return None
        j0 = max((len(r.prefix) for r in rows), default=0)
        q = lcm(*(len(r.period) for r in rows)) if rows else 1
        return j0, q

    def column_point(self, i: int) -> CantorPoint:
        """The Cantor point n -> [i ∈ R_n]."""
        raise NotImplementedError

    def column_structure(self) -> tuple[int, int] | None:
        """(prefix, period) such that column_point(i) is periodic in i beyond
        the prefix; None when the columns have no known structure."""
        return None

    def to_repr(self) -> dict[str, Any]:
        raise UnserializableError(f"{self.form or type(self).__name__} has no file form")


class PeriodicRowsFamily(SetFamily):
    """Rows cycle through finitely many patterns beyond a finite prefix."""

    form = "periodic_rows"

    def __init__(
        self,
        row_prefix: Sequence[RowPattern],
        row_period: Sequence[RowPattern],
        meta: Mapping[str, Any] | None = None,
    ):
        super().__init__(meta)
        if len(row_period) == 0:
            raise ValueError("row period must be non-empty")
        self.row_prefix = tuple(row_prefix)
        self.row_period = tuple(row_period)

    def row(self, n: int) -> RowPattern:
        if n < len(self.row_prefix):
            return self.row_prefix[n]
        return self.row_period[(n - len(self.row_prefix)) % len(self.row_period)]

    def member(self, n: int, j: int) -> bool:
        return self.row(n).member(j)

    def row_pattern(self, n: int) -> RowPattern:
        return self.row(n)

    def column_point(self, i: int) -> CantorPoint:
        prefix = tuple(1 if r.member(i) else 0 for r in self.row_prefix)
        period = tuple(1 if r.member(i) else 0 for r in self.row_period)
        return CantorPoint.periodic(prefix, period)

    def column_structure(self) -> tuple[int, int]:
        rows = self.row_prefix + self.row_period
        j0 = max((len(r.prefix) for r in rows), default=0)
        return j0, lcm(*(len(r.period) for r in rows))

    def to_repr(self) -> dict[str, Any]:
        return {
            "form": "periodic_rows",
            "row_prefix": [r.to_repr() for r in self.row_prefix],
            "row_period": [r.to_repr() for r in self.row_period],
        }


class TableRowsFamily(SetFamily):
    """Finitely many listed rows, a fixed default row everywhere else."""

    form = "table_rows"

    def __init__(
        self,
        entries: Mapping[int, RowPattern],
        default: RowPattern,
        meta: Mapping[str, Any] | None = None,
    ):
        super().__init__(meta)
        self.entries = {int(n): r for n, r in sorted(entries.items())}
        if any(n < 0 for n in self.entries):
            raise ValueError("row indices must be naturals")
        self.default = default

    def row(self, n: int) -> RowPattern:
        return self.entries.get(n, self.default)

    def member(self, n: int, j: int) -> bool:
        return self.row(n).member(j)

    def row_pattern(self, n: int) -> RowPattern:
        return self.row(n)

    def column_point(self, i: int) -> CantorPoint:
        bound = max(self.entries) + 1 if self.entries else 0
        prefix = tuple(1 if self.row(n).member(i) else 0 for n in range(bound))
        period = (1 if self.default.member(i) else 0,)
        return CantorPoint.periodic(prefix, period)

    def column_structure(self) -> tuple[int, int]:
        rows = list(self.entries.values()) + [self.default]
        j0 = max((len(r.prefix) for r in rows), default=0)
        return j0, lcm(*(len(r.period) for r in rows))

    def to_repr(self) -> dict[str, Any]:
        return {
            "form": "table_rows",
            "entries": [
                {"index": n, "row": r.to_repr()} for n, r in self.entries.items()
            ],
            "default": self.default.to_repr(),
        }


def _binary_digit_point(r: Fraction, paper_literal: bool) -> CantorPoint:
    """Eventually periodic membership stream from binary-digit parities.

    Corrected convention (r = x/2 < 1): bit(n) = 1 iff floor(r·2^n) is even,
    which for n >= 1 is 1 - (n-th binary digit of r); bit(0) = 1.
    Paper-literal (r = x <= 1): bit(n) = 1 iff r·2^n is an integer or
    floor(r·2^n) is even.
    """
    if r == 1:  # only reachable in the paper-literal mode
        return CantorPoint.constant(1)
    bits = [1]  # n = 0: floor(r) = 0 is even
    seen: dict[Fraction, int] = {}
    f = r
    while f not in seen:
        seen[f] = len(bits)
        f *= 2
        digit = 1 if f >= 1 else 0
        if digit:
            f -= 1
        if paper_literal:
            bits.append(1 if f == 0 or digit == 0 else 0)
        else:
            bits.append(1 - digit)
    start = seen[f]
    return CantorPoint.periodic(tuple(bits[:start]), tuple(bits[start:]))


class DerivedFamily(SetFamily):
    """Family derived from a rational sequence by dyadic-cell parities.

    corrected: j ∈ R_n iff floor((term(j)/2)·2^n) is even (half-open cells of
    the scaled value — parities read off binary digits, so a shared pattern
    through level L confines the terms to within 2^-(L-2) of each other).
    paper-literal: j ∈ R_n iff term(j) lies in some closed cell
    [k/2^n, (k+1)/2^n] with k even — every boundary point qualifies, which is
    the known defect (e.g. both 0 and 1 land in every R_n).
    """

    form = "derived"
    conventions = ("corrected", "paper-literal")

    def __init__(
        self,
        source: RationalSequence,
        convention: str = "corrected",
        meta: Mapping[str, Any] | None = None,
    ):
        super().__init__(meta)
        if convention not in self.conventions:
            raise ValueError(f"unknown convention {convention!r}")
        self.source = source
        self.convention = convention
        self.provenance = Provenance(
            "bwweak_to_stcoh", source, (("convention", convention),)
        )
        self._columns: dict[int, CantorPoint] = {}

    def member(self, n: int, j: int) -> bool:
        q = self.source.term(j)
        if self.convention == "corrected":
            t = q * 2**n / 2
            return (t.numerator // t.denominator) % 2 == 0
        t = q * 2**n
        whole, frac_num = divmod(t.numerator, t.denominator)
        return frac_num == 0 or whole % 2 == 0

    def row_pattern(self, n: int) -> RowPattern | None:
        struct = self.source.periodic_structure()
        if struct is None:
            return None
        j0, q = struct
        prefix = tuple(1 if self.member(n, j) else 0 for j in range(j0))
        period = tuple(1 if self.member(n, j) else 0 for j in range(j0, j0 + q))
        return RowPattern(prefix, period)

    def periodic_structure(self, levels: int) -> tuple[int, int] | None:
        return self.source.periodic_structure()

    def column_structure(self) -> tuple[int, int] | None:
        return self.source.periodic_structure()

    def column_point(self, i: int) -> CantorPoint:
        pt = self._columns.get(i)
        if pt is None:
            q = self.source.term(i)
            if self.convention == "corrected":
                pt = _binary_digit_point(q / 2, paper_literal=False)
            else:
                pt = _binary_digit_point(q, paper_literal=True)
            self._columns[i] = pt
        return pt

    def to_repr(self) -> dict[str, Any]:
        return self.provenance.to_repr()


def family_member(family: SetFamily, n: int, j: int) -> bool:
    """Is j in the n-th row of the family?"""
    if n < 0 or j < 0:
        raise ValueError("row and element indices are naturals")
    return family.member(n, j)


# ---------------------------------------------------------------------------
# parsing / serialization
# ---------------------------------------------------------------------------

_CERTIFICATE_TYPES = {
    "selector": Selector,
    "cauchy_certificate": CauchyCertificate,
    "cohesive_witness": CohesiveWitness,
    "branch_prefix": BranchPrefix,
    "separator_set": SeparatorSet,
    "accumulation_point": AccumulationResult,
}

_KINDS = {"rational_sequence", "sigma_tree", "separation", "set_family"} | set(
    _CERTIFICATE_TYPES
)


def _envelope_dict(obj: Any) -> dict[str, Any]:
    meta = getattr(obj, "meta", {}) or {}
    return {"kind": obj.kind, "repr": obj.to_repr(), "meta": dict(meta)}


def serialize_instance(obj: Any) -> bytes:
    """Canonical UTF-8 bytes of the instance/certificate envelope."""
    text = json.dumps(_envelope_dict(obj), sort_keys=True, indent=2)
    return (text + "\n").encode("utf-8")


def _rationals(raw: Any, path: str) -> tuple[Fraction, ...]:
    if not isinstance(raw, list):
        raise SchemaViolationError("expected an array of rationals", path)
    return tuple(parse_rational(v, location=f"{path}[{i}]") for i, v in enumerate(raw))


def _parse_sequence(repr_obj: Mapping[str, Any], meta: dict[str, Any], path: str) -> RationalSequence:
    form = repr_obj.get("form")
    try:
        if form == "periodic":
            return PeriodicSequence(
                _rationals(repr_obj.get("prefix", []), f"{path}.prefix"),
                _rationals(repr_obj.get("period"), f"{path}.period"),
                meta,
            )
        if form == "constant":
            return ConstantSequence(
                parse_rational(repr_obj.get("value"), location=f"{path}.value"), meta
            )
        if form == "harmonic":
            return HarmonicSequence(meta)
        if form == "alternating":
            return AlternatingSequence(
                parse_rational(repr_obj.get("a"), location=f"{path}.a"),
                parse_rational(repr_obj.get("b"), location=f"{path}.b"),
                meta,
            )
        if form == "binary_walk":
            return BinaryWalkSequence(
                parse_rational(repr_obj.get("value"), location=f"{path}.value"), meta
            )
        if form == "table":
            raw = repr_obj.get("entries")
            if not isinstance(raw, list):
                raise SchemaViolationError("entries must be an array", f"{path}.entries")
            entries: dict[int, Fraction] = {}
            for i, entry in enumerate(raw):
                if not isinstance(entry, Mapping) or not isinstance(entry.get("index"), int):
                    raise SchemaViolationError(
                        "table entry needs an integer index", f"{path}.entries[{i}]"
                    )
                idx = entry["index"]
                if idx in entries:
                    raise InvariantViolationError(
                        f"duplicate table index {idx}", f"{path}.entries[{i}]"
                    )
                entries[idx] = parse_rational(
                    entry.get("value"), location=f"{path}.entries[{i}].value"
                )
            return TableSequence(
                entries,
                parse_rational(repr_obj.get("default"), location=f"{path}.default"),
                meta,
            )
        if form == "derived":
            return _parse_derived(repr_obj, meta, path, expected_kind="rational_sequence")
    except ValueError as e:
        raise InvariantViolationError(str(e), path) from e
    raise SchemaViolationError(f"unknown sequence form {form!r}", f"{path}.form")


def _parse_tree(repr_obj: Mapping[str, Any], meta: dict[str, Any], path: str) -> SigmaTree:
    form = repr_obj.get("form")
    if form == "full_binary":
        return FullBinaryTree(meta)
    if form == "single_branch":
        return SingleBranchTree(_point_from_repr(repr_obj.get("point"), f"{path}.point"), meta)
    if form == "branch_union":
        raw = repr_obj.get("points")
        if not isinstance(raw, list):
            raise SchemaViolationError("points must be an array", f"{path}.points")
        points = [_point_from_repr(p, f"{path}.points[{i}]") for i, p in enumerate(raw)]
        try:
            return BranchUnionTree(points, meta)
        except ValueError as e:
            raise InvariantViolationError(str(e), f"{path}.points") from e
    if form == "stage_list":
        raw = repr_obj.get("entries")
        if not isinstance(raw, list):
            raise SchemaViolationError("entries must be an array", f"{path}.entries")
        entries = []
        for i, entry in enumerate(raw):
            if not isinstance(entry, Mapping) or not isinstance(entry.get("stage"), int):
                raise SchemaViolationError(
                    "stage entry needs an integer stage", f"{path}.entries[{i}]"
                )
            entries.append(
                (
                    entry["stage"],
                    parse_bits(entry.get("node", None), location=f"{path}.entries[{i}].node"),
                )
            )
        try:
            return StageListTree(entries, meta)
        except ValueError as e:
            raise InvariantViolationError(str(e), f"{path}.entries") from e
    if form == "derived":
        return _parse_derived(repr_obj, meta, path, expected_kind="sigma_tree")
    raise SchemaViolationError(f"unknown tree form {form!r}", f"{path}.form")


def _parse_separation(
    repr_obj: Mapping[str, Any], meta: dict[str, Any], path: str
) -> SeparationInstance:
    form = repr_obj.get("form")
    if form == "rules":
        promise = repr_obj.get("disjointness_promise", True)
        if not isinstance(promise, bool):
            raise SchemaViolationError(
                "disjointness_promise must be a boolean", f"{path}.disjointness_promise"
            )
        return SeparationInstance(
            RulePredicate.from_repr(repr_obj.get("b0"), f"{path}.b0"),
            RulePredicate.from_repr(repr_obj.get("b1"), f"{path}.b1"),
            promise,
            meta=meta,
        )
    if form == "derived":
        return _parse_derived(repr_obj, meta, path, expected_kind="separation")
    raise SchemaViolationError(f"unknown separation form {form!r}", f"{path}.form")


def _parse_family(repr_obj: Mapping[str, Any], meta: dict[str, Any], path: str) -> SetFamily:
    form = repr_obj.get("form")
    try:
        if form == "periodic_rows":
            raw_prefix = repr_obj.get("row_prefix", [])
            raw_period = repr_obj.get("row_period")
            if not isinstance(raw_prefix, list) or not isinstance(raw_period, list):
                raise SchemaViolationError("row lists must be arrays", path)
            return PeriodicRowsFamily(
                [RowPattern.from_repr(r, f"{path}.row_prefix[{i}]") for i, r in enumerate(raw_prefix)],
                [RowPattern.from_repr(r, f"{path}.row_period[{i}]") for i, r in enumerate(raw_period)],
                meta,
            )
        if form == "table_rows":
            raw = repr_obj.get("entries")
            if not isinstance(raw, list):
                raise SchemaViolationError("entries must be an array", f"{path}.entries")
            entries: dict[int, RowPattern] = {}
            for i, entry in enumerate(raw):
                if not isinstance(entry, Mapping) or not isinstance(entry.get("index"), int):
                    raise SchemaViolationError(
                        "row entry needs an integer index", f"{path}.entries[{i}]"
                    )
                idx = entry["index"]
                if idx in entries:
                    raise InvariantViolationError(
                        f"duplicate row index {idx}", f"{path}.entries[{i}]"
                    )
                entries[idx] = RowPattern.from_repr(entry.get("row"), f"{path}.entries[{i}].row")
            return TableRowsFamily(
                entries, RowPattern.from_repr(repr_obj.get("default"), f"{path}.default"), meta
            )
        if form == "derived":
            return _parse_derived(repr_obj, meta, path, expected_kind="set_family")
    except ValueError as e:
        raise InvariantViolationError(str(e), path) from e
    raise SchemaViolationError(f"unknown family form {form!r}", f"{path}.form")


_DERIVATIONS = {
    # derived_by -> (expected source kind, result kind)
    "bw_to_swkl": ("rational_sequence", "sigma_tree"),
    "swkl_to_separation": ("sigma_tree", "separation"),
    "separation_to_bw": ("separation", "rational_sequence"),
    "bwweak_to_stcoh": ("rational_sequence", "set_family"),
    "stcoh_to_bwweak": ("set_family", "rational_sequence"),
}


def _parse_derived(
    repr_obj: Mapping[str, Any], meta: dict[str, Any], path: str, expected_kind: str
) -> Any:
    from . import reductions  # deferred: reductions imports this module

    derived_by = repr_obj.get("derived_by")
    if derived_by not in _DERIVATIONS:
        raise SchemaViolationError(
            f"unknown derivation {derived_by!r}", f"{path}.derived_by"
        )
    source_kind, result_kind = _DERIVATIONS[derived_by]
    if result_kind != expected_kind:
        raise SchemaViolationError(
            f"{derived_by} derives a {result_kind}, not a {expected_kind}",
            f"{path}.derived_by",
        )
    source = _parse_envelope(repr_obj.get("source"), f"{path}.source")
    if source.kind != source_kind:
        raise SchemaViolationError(
            f"{derived_by} needs a {source_kind} source, got {source.kind}",
            f"{path}.source.kind",
        )
    if derived_by == "bw_to_swkl":
        out = reductions.bw_to_swkl(source)
    elif derived_by == "swkl_to_separation":
        out = reductions.swkl_to_separation(source)
    elif derived_by == "separation_to_bw":
        budget = repr_obj.get("code_budget", 10**6)
        if not isinstance(budget, int) or budget < 1:
            raise SchemaViolationError(
                "code_budget must be a positive integer", f"{path}.code_budget"
            )
        out = reductions.separation_to_bw(source, code_budget=budget)
    elif derived_by == "bwweak_to_stcoh":
        convention = repr_obj.get("convention", "corrected")
        if convention not in DerivedFamily.conventions:
            raise SchemaViolationError(
                f"unknown convention {convention!r}", f"{path}.convention"
            )
        out = reductions.bwweak_to_stcoh(source, convention=convention)
    else:
        out = reductions.stcoh_to_bwweak(source)
    out.meta = meta
    return out


_INSTANCE_PARSERS = {
    "rational_sequence": _parse_sequence,
    "sigma_tree": _parse_tree,
    "separation": _parse_separation,
    "set_family": _parse_family,
}


def _parse_envelope(doc: Any, path: str) -> Any:
    if not isinstance(doc, Mapping):
        raise SchemaViolationError("envelope must be an object", path)
    kind = doc.get("kind")
    if kind not in _KINDS:
        raise SchemaViolationError(f"unknown kind {kind!r}", f"{path}.kind")
    repr_obj = doc.get("repr")
    if not isinstance(repr_obj, Mapping):
        raise SchemaViolationError("repr must be an object", f"{path}.repr")
    meta = doc.get("meta", {})
    if not isinstance(meta, Mapping):
        raise SchemaViolationError("meta must be an object", f"{path}.meta")
    meta = dict(meta)
    repr_path = f"{path}.repr"
    if kind in _CERTIFICATE_TYPES:
        try:
            obj = _CERTIFICATE_TYPES[kind].from_repr(repr_obj, repr_path)
        except ValueError as e:
            raise InvariantViolationError(str(e), repr_path) from e
        # certificates are frozen dataclasses; meta rides along unfrozen
        object.__setattr__(obj, "meta", meta)
        return obj
    return _INSTANCE_PARSERS[kind](repr_obj, meta, repr_path)


def parse_instance(data: bytes | str) -> Any:
    """Parse one instance or certificate file.

    Raises MalformedSyntaxError (not JSON), SchemaViolationError (JSON of the
    wrong shape) or InvariantViolationError (denoted object is broken), each
    carrying a dotted location.
    """
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as e:
            raise MalformedSyntaxError(f"not UTF-8: {e}", "$") from e
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as e:
        raise MalformedSyntaxError(
            f"invalid JSON: {e.msg}", f"$ (line {e.lineno} col {e.colno})"
        ) from e
    return _parse_envelope(doc, "$")
