"""Instance-wise reductions between the four principles, in both directions.

Forward translations build derived instances (sequence -> tree -> separation,
sequence -> set family, set family -> sequence, separation -> sequence);
backward translations turn a witness for the derived instance into a witness
for the original (branch -> accumulation point, separator -> branch,
accumulation prefix -> separator, cohesive selector -> Cauchy subsequence).
All arithmetic is exact; search is bounded by explicit arguments and fails
loudly (budget-exceeded, witness-exhausted) rather than degrading.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

from .certificates import Selector, SeparatorSet
from .core import (
    Bits,
    CantorPoint,
    DyadicInterval,
    format_bits,
    seq_len,
    string_code,
    string_decode,
)
from .errors import BudgetExceededError, NotANodeError, WitnessExhaustedError
from .instances import (
    DerivedFamily,
    DerivedTree,
    EmbeddedSequence,
    Provenance,
    RationalSequence,
    SeparationInstance,
    SetFamily,
    SigmaTree,
    TreeSidePredicate,
)


@dataclass(frozen=True)
class CellPattern:
    """Membership pattern over rows 0..|y|-1: the cell R^y is the set of j
    with j ∈ R_i exactly when y_i = 0."""

    y: Bits

    def __post_init__(self) -> None:
        if any(b not in (0, 1) for b in self.y):
            raise ValueError("cell pattern bits must be 0/1")

    def matches(self, family: SetFamily, j: int) -> bool:
        return all(
            family.member(i, j) == (self.y[i] == 0) for i in range(len(self.y))
        )


class BranchPoint(NamedTuple):
    """Accumulation data recovered from a tree branch."""

    approx: Fraction
    err: Fraction
    selector: Selector


# ---------------------------------------------------------------------------
# sequence -> tree -> sequence
# ---------------------------------------------------------------------------


def bw_to_swkl(x: RationalSequence) -> SigmaTree:
    """Derived tree whose depth-d nodes need d distinct term indices inside
    their closed dyadic cell; infinite for every total sequence, and each
    infinite branch pins an accumulation point (see DerivedTree)."""
    return DerivedTree(x)


def branch_to_point(x: RationalSequence, bits: Bits, stage: int) -> BranchPoint:
    """Back-translate a verified branch prefix into an accumulation point.

    Returns the left endpoint of the final cell with error 2^-|bits|, plus a
    strictly increasing selector j_0 < ... < j_{|bits|-2} with
    term(j_t) inside the cell of bits[:t+1]; consecutive cells nest, so
    |term(selector(v)) - term(selector(w))| <= 2^-(min(v,w)+1).
    """
    bits = tuple(bits)
    tree = DerivedTree(x)
    if not tree.member_at_stage(bits, stage):
        raise NotANodeError(
            f"{format_bits(bits)!r} is not a tree node at stage {stage}"
        )
    picks: list[int] = []
    j = -1
    for t in range(len(bits) - 1):
        cell = DyadicInterval.from_bits(bits[: t + 1])
        j += 1
        while j <= stage and not cell.contains(x.term(j)):
            j += 1
        if j > stage:
            raise WitnessExhaustedError(
                f"stage {stage} holds no witness for cell {t + 1} of {format_bits(bits)!r}"
            )
        picks.append(j)
    cell = DyadicInterval.from_bits(bits)
    return BranchPoint(cell.lower, cell.width, Selector(tuple(picks)))


# ---------------------------------------------------------------------------
# tree <-> separation
# ---------------------------------------------------------------------------


def swkl_to_separation(y: SigmaTree) -> SeparationInstance:
    """Separation instance whose limit sets record which child side of each
    coded string dies first (A_0: the 0-side dies while the 1-side still
    reaches the same length; A_1 symmetric); disjoint by the dies-first
    argument."""
    return SeparationInstance(
        TreeSidePredicate(y, 0),
        TreeSidePredicate(y, 1),
        disjointness_promise=True,
        provenance=Provenance("swkl_to_separation", y),
    )


def exact_separator(y: SigmaTree, depth: int) -> SeparatorSet:
    """Brute-force separator over all string codes of length < depth, from
    the tree's decidable limit view: code(σ) is in iff the 0-side below σ
    dies strictly before the 1-side."""
    if depth < 1:
        raise ValueError("depth must be at least 1")
    bits = []
    for n in range(2**depth - 1):
        sigma = string_decode(n)
        h0, h1 = y.limit_heights(sigma)
        dead0 = h0 is not None and (h1 is None or h0 < h1)
        bits.append(1 if dead0 else 0)
    return SeparatorSet(tuple(bits))


def separator_to_branch(
    s: SeparatorSet, y: SigmaTree, depth: int, stage: int
) -> Bits:
    """Walk the separator down the tree: from the root, go right when the
    current node's code is in S, else left.  Each visited prefix is checked
    for membership at the given stage (the decidable part of extendibility).
    """
    branch: Bits = ()
    for _ in range(depth):
        bit = 1 if s.member(string_code(branch)) else 0
        branch = branch + (bit,)
        if not y.member_at_stage(branch, stage):
            raise NotANodeError(
                f"separator steered into non-member {format_bits(branch)!r} "
                f"at stage {stage}"
            )
    return branch


# ---------------------------------------------------------------------------
# separation -> sequence (the f/g/h machinery)
# ---------------------------------------------------------------------------


def f_code(p: SeparationInstance, i: int, n: int, k: int, code_budget: int) -> int:
    """Largest valid code below k for side i at parameter n.

    A code is valid when it decodes and every decoded position x satisfies
    the minimized predicate B'_i(x, ·; n).  Returns 1 (the empty sequence,
    vacuously valid) when no valid code < k exists, so the result is total
    and monotone nondecreasing in k.
    """
    if k > code_budget:
        raise BudgetExceededError(f"k = {k} exceeds code budget {code_budget}")
    valid = p.valid_codes_below(i, n, k)
    return valid[-1] if valid else 1


def g_len(p: SeparationInstance, i: int, n: int, k: int, code_budget: int) -> int:
    """Length of the largest valid code below k (0 when only the empty
    sequence is valid); its range over all k is all of ℕ exactly when
    ∀x∃y B_i(x, y; n)."""
    return seq_len(f_code(p, i, n, k, code_budget))


def h_bit(p: SeparationInstance, k: int, n: int, code_budget: int) -> int:
    """0 when side 0's valid-prefix length is >= side 1's at cutoff k (ties
    to 0), else 1; as k grows this stabilizes to the separator bit of n."""
    g0 = g_len(p, 0, n, k, code_budget)
    g1 = g_len(p, 1, n, k, code_budget)
    return 0 if g0 >= g1 else 1


def separation_to_bw(
    p: SeparationInstance, code_budget: int = 10**6
) -> EmbeddedSequence:
    """The sequence of embedded h_k points; accumulation points of it decode
    (via point_to_separator) to separating sets.  Lazy: budget errors surface
    when terms are evaluated."""

    def points(k: int) -> CantorPoint:
        return CantorPoint.from_rule(
            lambda n, _k=k: h_bit(p, _k, n, code_budget), label=f"h_{k}"
        )

    return EmbeddedSequence(
        points,
        provenance=Provenance("separation_to_bw", p, (("code_budget", code_budget),)),
        structure=None,
        label="h-stream",
    )


def point_to_separator(hpt: Bits) -> SeparatorSet:
    """Read a Cantor-space accumulation prefix as a separating set on [0, D)."""
    return SeparatorSet(tuple(hpt))


# ---------------------------------------------------------------------------
# sequence <-> set family
# ---------------------------------------------------------------------------


def bwweak_to_stcoh(x: RationalSequence, convention: str = "corrected") -> SetFamily:
    """Dyadic-cell membership family of the sequence (see DerivedFamily for
    the two cell conventions)."""
    return DerivedFamily(x, convention)


def subsequence_from_cohesive(
    f: Selector | Sequence[int], x: RationalSequence
) -> Selector:
    """A strictly increasing enumeration of a strongly cohesive set for the
    derived family of ``x`` is already the desired Cauchy subsequence; this
    validates monotonicity and passes the selector through unchanged (the
    Cauchy claim itself is checked by verify_cauchy)."""
    if isinstance(f, Selector):
        return f
    return Selector(tuple(f))


def stcoh_to_bwweak(r: SetFamily) -> EmbeddedSequence:
    """Embed the membership columns: term(i) is the real coding the 0/1
    column n -> [i ∈ R_n].  A selector that is slow-Cauchy for this sequence
    at precision n+1 must agree on membership in R_0..R_{n-1} from its
    settle point on."""
    return EmbeddedSequence(
        r.column_point,
        provenance=Provenance("stcoh_to_bwweak", r),
        structure=r.column_structure(),
        label="membership columns",
    )
