"""Tests for the instance-wise reductions and witness back-translations."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bwreduce import catalog
from bwreduce.certificates import Budget, Selector, SeparatorSet
from bwreduce.core import DyadicInterval, seq_code, string_code
from bwreduce.errors import (
    BudgetExceededError,
    ExactValueUnavailableError,
    NotANodeError,
)
from bwreduce.instances import (
    AlternatingSequence,
    ConstantSequence,
    PeriodicSequence,
    RulePredicate,
    SeparationInstance,
    SingleBranchTree,
)
from bwreduce.core import CantorPoint
from bwreduce.reductions import (
    CellPattern,
    branch_to_point,
    bw_to_swkl,
    bwweak_to_stcoh,
    exact_separator,
    f_code,
    g_len,
    h_bit,
    point_to_separator,
    separation_to_bw,
    separator_to_branch,
    stcoh_to_bwweak,
    subsequence_from_cohesive,
    swkl_to_separation,
)
from bwreduce.solvers import find_branch

# --- sequence -> tree -> point ------------------------------------------------------


def test_branch_to_point_on_constant_zero():
    x = ConstantSequence(Fraction(0))
    bp = branch_to_point(x, (0,) * 5, stage=16)
    assert bp.approx == 0
    assert bp.err == Fraction(1, 32)
    assert bp.selector.values == (0, 1, 2, 3)


def test_branch_to_point_on_constant_third():
    x = ConstantSequence(Fraction(1, 3))
    bp = branch_to_point(x, (0, 1, 0, 1), stage=16)
    assert bp.approx == Fraction(5, 16)
    assert bp.err == Fraction(1, 16)
    assert bp.selector.values == (0, 1, 2)


def test_branch_to_point_skips_terms_outside_cells():
    x = AlternatingSequence(Fraction(0), Fraction(1))
    bp = branch_to_point(x, (1, 1, 1, 1), stage=7)
    assert bp.selector.values == (1, 3, 5)
    assert bp.approx == Fraction(15, 16)


def test_branch_to_point_rejects_non_nodes():
    x = ConstantSequence(Fraction(0))
    with pytest.raises(NotANodeError):
        branch_to_point(x, (1,), stage=100)


@given(
    st.lists(
        st.fractions(min_value=0, max_value=1, max_denominator=16),
        min_size=1,
        max_size=4,
    ),
    st.integers(1, 4),
)
def test_branch_to_point_postconditions(period, depth):
    """Any node reached by majority descent back-translates cleanly.

    The recovered selector is strictly increasing and its t-th term lies in
    the cell of the branch prefix of length t+1, giving the claimed pairwise
    bound |term(j_v) - term(j_w)| <= 2^-(min(v,w)+1).
    """
    x = PeriodicSequence([], period)
    stage = 2 * depth * 2**depth
    bits: tuple[int, ...] = ()
    tree = bw_to_swkl(x)
    for _ in range(depth):
        counts = [tree.witness_count(bits + (c,), stage) for c in (0, 1)]
        bits = bits + (0 if counts[0] >= counts[1] else 1,)
    assert tree.member_at_stage(bits, stage)
    bp = branch_to_point(x, bits, stage)
    values = bp.selector.values
    assert all(a < b for a, b in zip(values, values[1:]))
    for t, j in enumerate(values):
        assert DyadicInterval.from_bits(bits[: t + 1]).contains(x.term(j))
    for v in range(len(values)):
        for w in range(v + 1, len(values)):
            gap = abs(x.term(values[v]) - x.term(values[w]))
            assert gap <= Fraction(1, 2 ** (v + 1))


def test_derived_tree_always_has_deep_members():
    # 4097 terms meet 256 depth-8 cells, so some cell collects >= 17 distinct
    # indices, comfortably past the 8 witnesses a depth-8 node needs.
    for name, x in sorted(catalog.SEQUENCES.items()):
        tree = bw_to_swkl(x)
        for depth in (1, 4, 8):
            stage = depth * 2**depth
            assert tree.has_extension((), depth, stage), (name, depth)


def test_derived_tree_pigeonhole_cell_is_a_member():
    for name, x in sorted(catalog.SEQUENCES.items()):
        stage = 8 * 2**8
        counts = [0] * 256
        for j in range(stage + 1):
            counts[min(int(x.term(j) * 256), 255)] += 1
        best = max(range(256), key=lambda c: counts[c])
        assert counts[best] >= 8, name
        bits = tuple(int(b) for b in format(best, "08b"))
        assert bw_to_swkl(x).member_at_stage(bits, stage), name


# --- tree <-> separation --------------------------------------------------------------


def test_tree_side_predicates_on_full_tree():
    p = swkl_to_separation(catalog.TREES["full"])
    # nothing ever dies in the full tree: both sides are total everywhere
    for n in range(7):
        for x in range(6):
            for i in (0, 1):
                assert any(p.evaluate(i, x, y, n) for y in range(4))


def test_exact_separator_walks_to_the_true_branch():
    y = SingleBranchTree(CantorPoint.periodic((1,), (0,)))
    s = exact_separator(y, 8)
    assert separator_to_branch(s, y, 8, stage=0) == (1, 0, 0, 0, 0, 0, 0, 0)


def test_exact_separator_rejects_zero_depth():
    with pytest.raises(ValueError):
        exact_separator(catalog.TREES["full"], 0)


def test_separator_walk_matches_leftmost_infinite_branch():
    """Steering by dies-first separators lands on the leftmost live branch."""
    budget = Budget()
    for name, tree in sorted(catalog.TREES.items()):
        s = exact_separator(tree, budget.depth)
        walked = separator_to_branch(s, tree, budget.depth, budget.stage)
        found = find_branch(tree, budget)
        assert walked == found.bits, name


def test_separator_walk_rejects_dead_turns():
    y = SingleBranchTree(CantorPoint.constant(0))
    all_in = SeparatorSet((), extension="all")
    with pytest.raises(NotANodeError):
        separator_to_branch(all_in, y, 4, stage=0)


def test_point_to_separator_reads_bits():
    s = point_to_separator((0, 1, 1))
    assert not s.member(0)
    assert s.member(1)
    assert s.member(2)


# --- separation -> sequence (f/g/h) ----------------------------------------------------


def _identity_side() -> SeparationInstance:
    return SeparationInstance(RulePredicate("y_eq_x"), RulePredicate("never"))


def test_f_code_examples():
    p = _identity_side()
    n, budget = 0, 10**6
    assert f_code(p, 0, n, 0, budget) == 1
    assert f_code(p, 0, n, 1, budget) == 1
    assert f_code(p, 0, n, 3, budget) == 2
    assert f_code(p, 0, n, 19, budget) == 18
    assert g_len(p, 0, n, 19, budget) == 2
    assert f_code(p, 1, n, 500, budget) == 1  # "never" side: only the empty code


def test_f_code_monotone_and_budgeted():
    p = _identity_side()
    last = 0
    for k in range(0, 120):
        code = f_code(p, 0, 0, k, 10**6)
        assert code >= last
        last = code
    with pytest.raises(BudgetExceededError):
        f_code(p, 0, 0, 101, code_budget=100)


def test_valid_codes_are_exactly_course_of_values_prefixes():
    """The valid codes below k are the codes of initial segments of the
    minimal-witness stream, and nothing else (checked by brute force)."""
    inst = catalog.SEPARATIONS["odds-vs-evens"]
    bound = 2000
    for i, n in ((0, 0), (0, 1), (1, 1), (1, 4)):
        pred = inst.predicates[i]
        stream = []
        x = 0
        while True:
            w = pred.minimal_witness(x, n)
            if w is None or seq_code([v for v in stream] + [w]) > bound:
                break
            stream.append(w)
            x += 1
        expected = sorted(
            c
            for c in (seq_code(stream[:length]) for length in range(len(stream) + 1))
            if c < bound
        )
        assert inst.valid_codes_below(i, n, bound) == expected


def test_course_of_values_identity():
    p = _identity_side()
    stream = [0, 1, 2, 3]
    for m in range(4):
        fbar = seq_code(stream[:m])
        assert f_code(p, 0, 0, fbar + 1, 10**6) == fbar


@given(st.integers(0, 250), st.integers(0, 250))
def test_g_len_monotone_in_cutoff(k1, k2):
    p = catalog.SEPARATIONS["mod-three"]
    for i in (0, 1):
        for n in range(3):
            lo, hi = sorted((k1, k2))
            assert g_len(p, i, n, lo, 10**6) <= g_len(p, i, n, hi, 10**6)


def test_h_bit_stabilizes_to_separator_bit():
    p = catalog.SEPARATIONS["odds-vs-evens"]
    # even n: side 0 total, side 1 empty -> 0; odd n: the reverse -> 1
    for n in range(6):
        assert h_bit(p, 2500, n, 10**6) == n % 2
    # small cutoffs have not seen any non-empty valid code yet: ties give 0
    assert h_bit(p, 0, 1, 10**6) == 0
    assert h_bit(p, 2, 1, 10**6) == 0
    assert h_bit(p, 3, 1, 10**6) == 1


def test_h_bit_tie_rule_is_zero():
    p = SeparationInstance(RulePredicate("y_eq_x"), RulePredicate("y_eq_x"))
    for k in (0, 5, 100, 2500):
        for n in range(4):
            assert h_bit(p, k, n, 10**6) == 0


def test_separation_to_bw_stream():
    p = catalog.SEPARATIONS["odds-vs-evens"]
    x = separation_to_bw(p)
    assert x.point(0).bits(4) == (0, 0, 0, 0)
    assert x.point(3).bits(4) == (0, 1, 0, 1)
    with pytest.raises(ExactValueUnavailableError):
        x.term(3)  # h-stream points are rule-backed
    approx, err = x.term_approx(3, 8)
    assert abs(approx + err / 2 - Fraction(1, 4)) <= err / 2


def test_separation_to_bw_respects_code_budget():
    p = catalog.SEPARATIONS["odds-vs-evens"]
    x = separation_to_bw(p, code_budget=10)
    with pytest.raises(BudgetExceededError):
        x.point(11).bit(0)


# --- sequence <-> set family ------------------------------------------------------------


def test_closed_cells_cannot_separate_endpoints():
    # With closed cells at the sequence's own scale, both endpoint values 0
    # and 1 sit in an even cell at every level, so the alternating sequence
    # yields full rows everywhere and the family forgets the sequence.
    literal = bwweak_to_stcoh(
        AlternatingSequence(Fraction(0), Fraction(1)), convention="paper-literal"
    )
    for n in range(10):
        for j in range(10):
            assert literal.member(n, j)
        assert literal.row_pattern(n).is_full()


def test_halfopen_scaled_cells_do_separate_endpoints():
    corrected = bwweak_to_stcoh(
        AlternatingSequence(Fraction(0), Fraction(1)), convention="corrected"
    )
    assert corrected.member(1, 0)  # term 0 at level 1
    assert not corrected.member(1, 1)  # term 1 at level 1
    assert [corrected.member(0, j) for j in range(4)] == [True, True, True, True]


def test_cell_pattern_matches():
    fam = bwweak_to_stcoh(AlternatingSequence(Fraction(0), Fraction(1)))
    evens_pattern = CellPattern((0, 0))  # in R_0 and in R_1
    odds_pattern = CellPattern((0, 1))
    assert evens_pattern.matches(fam, 0)
    assert not evens_pattern.matches(fam, 1)
    assert odds_pattern.matches(fam, 1)
    with pytest.raises(ValueError):
        CellPattern((0, 2))


def test_subsequence_from_cohesive_passthrough():
    sel = Selector((0, 2, 4))
    assert subsequence_from_cohesive(sel, ConstantSequence(Fraction(0))) is sel
    assert subsequence_from_cohesive([1, 5, 9], ConstantSequence(Fraction(0))).values == (1, 5, 9)
    from bwreduce.errors import NonMonotoneSelectorError

    with pytest.raises(NonMonotoneSelectorError):
        subsequence_from_cohesive([3, 3], ConstantSequence(Fraction(0)))


def test_stcoh_to_bwweak_embeds_membership_columns():
    from bwreduce.instances import PeriodicRowsFamily, RowPattern

    fam = PeriodicRowsFamily(
        [], [RowPattern((), (1, 0)), RowPattern((), (1,))]
    )  # R_even = evens-style rows, R_odd = everything
    x = stcoh_to_bwweak(fam)
    assert x.term(0) == 1  # column (1,1,1,...) embeds to 1
    assert x.term(1) == Fraction(1, 4)  # column (0,1,0,1,...)
    assert x.term(2) == 1
    assert x.periodic_structure() == (0, 2)


@settings(max_examples=60)
@given(
    st.lists(
        st.fractions(min_value=0, max_value=1, max_denominator=32),
        min_size=1,
        max_size=3,
    ),
    st.integers(0, 6),
    st.integers(0, 8),
)
def test_derived_family_round_trip_recovers_membership(period, n, i):
    """stcoh ∘ bwweak columns carry exactly the membership information."""
    fam = bwweak_to_stcoh(PeriodicSequence([], period))
    x = stcoh_to_bwweak(fam)
    pt = x.point(i)
    assert (pt.bit(n) == 1) == fam.member(n, i)
