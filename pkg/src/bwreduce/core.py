"""Exact numeric kernel.

Rationals, dyadic intervals, finite bit strings, points of Cantor space, the
middle-third embedding of Cantor space into [0, 1], and a prime-power coding
of finite natural-number sequences.  Everything is exact — no floats — and
every value is immutable after construction, so the module is safe to use
from concurrent verifiers.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt, lcm
from typing import Callable, Iterable, Sequence

#: A finite binary string; () is the root/empty string.
Bits = tuple[int, ...]

_RATIONAL_RE = re.compile(r"^(-?\d+)/(\d+)$")


def parse_rational(text: str, *, location: str = "$") -> Fraction:
    """Parse the canonical ``p/q`` spelling into an always-reduced rational."""
    from .errors import SchemaViolationError

    if not isinstance(text, str):
        raise SchemaViolationError(f"expected rational string, got {text!r}", location)
    m = _RATIONAL_RE.match(text)
    if m is None:
        raise SchemaViolationError(f"not a p/q rational: {text!r}", location)
    num, den = int(m.group(1)), int(m.group(2))
    if den == 0:
        raise SchemaViolationError("zero denominator", location)
    return Fraction(num, den)


def format_rational(q: Fraction) -> str:
    """Canonical ``p/q`` spelling (denominator always present: 0 -> ``0/1``)."""
    return f"{q.numerator}/{q.denominator}"


# --- bit strings -------------------------------------------------------------


def parse_bits(text: str, *, location: str = "$") -> Bits:
    """Parse a string of 0s and 1s ("" denotes the empty string)."""
    from .errors import SchemaViolationError

    if not isinstance(text, str) or any(c not in "01" for c in text):
        raise SchemaViolationError(f"not a bit string: {text!r}", location)
    return tuple(int(c) for c in text)


def format_bits(bits: Bits) -> str:
    return "".join(str(b) for b in bits)


def is_prefix(p: Bits, q: Bits) -> bool:
    """True when ``p`` is an initial segment of ``q`` (including p == q)."""
    return len(p) <= len(q) and q[: len(p)] == p


def string_code(bits: Bits) -> int:
    """Level-lexicographic code of a finite binary string.

    "" -> 0, "0" -> 1, "1" -> 2, "00" -> 3, ...; strings of length L occupy
    the contiguous block [2^L - 1, 2^(L+1) - 2].
    """
    n = 1
    for b in bits:
        n = (n << 1) | b
    return n - 1


def string_decode(code: int) -> Bits:
    """Inverse of :func:`string_code`."""
    if code < 0:
        raise ValueError("string codes are naturals")
    n = code + 1
    return tuple(int(c) for c in bin(n)[3:])


# --- diagonal pairing ---------------------------------------------------------


def pair(a: int, b: int) -> int:
    """Cantor diagonal pairing ⟨a, b⟩ = (a+b)(a+b+1)/2 + b."""
    s = a + b
    return s * (s + 1) // 2 + b


def unpair(z: int) -> tuple[int, int]:
    """Inverse of :func:`pair`."""
    if z < 0:
        raise ValueError("pair codes are naturals")
    w = (isqrt(8 * z + 1) - 1) // 2
    b = z - w * (w + 1) // 2
    return w - b, b


# --- dyadic intervals ---------------------------------------------------------


@dataclass(frozen=True)
class DyadicInterval:
    """The closed interval [index/2^level, (index+1)/2^level]."""

    level: int
    index: int

    def __post_init__(self) -> None:
        if self.level < 0 or self.index < 0:
            raise ValueError("level and index must be naturals")

    @property
    def lower(self) -> Fraction:
        return Fraction(self.index, 2**self.level)

    @property
    def upper(self) -> Fraction:
        return Fraction(self.index + 1, 2**self.level)

    @property
    def width(self) -> Fraction:
        return Fraction(1, 2**self.level)

    def contains(self, q: Fraction) -> bool:
        """Closed membership: lower <= q <= upper."""
        return self.lower <= q <= self.upper

    def contains_halfopen(self, q: Fraction) -> bool:
        """Half-open variant: lower <= q < upper."""
        return self.lower <= q < self.upper

    def child(self, b: int) -> "DyadicInterval":
        return DyadicInterval(self.level + 1, 2 * self.index + b)

    @staticmethod
    def from_bits(bits: Bits) -> "DyadicInterval":
        """Cell of the binary prefix ``bits``: left endpoint Σ bits[i]·2^-(i+1)."""
        idx = 0
        for b in bits:
            idx = (idx << 1) | b
        return DyadicInterval(len(bits), idx)


def dyadic_interval(level: int, index: int) -> DyadicInterval:
    return DyadicInterval(level, index)


# --- points of Cantor space ---------------------------------------------------


class CantorPoint:
    """An infinite binary sequence.

    Two representations: eventually periodic (finite prefix + non-empty
    period, supporting exact equality and exact embedding values) and
    rule-backed (a total evaluator n -> {0,1}; only finitely many bits are
    ever observable, so equality and distance answers on these carry a budget
    marker).
    """

    __slots__ = ("prefix", "period", "_rule", "label")

    def __init__(
        self,
        prefix: Bits | None,
        period: Bits | None,
        rule: Callable[[int], int] | None,
        label: str = "",
    ):
        if rule is None:
            if period is None or len(period) == 0:
                raise ValueError("periodic point needs a non-empty period")
            if any(b not in (0, 1) for b in (prefix or ()) + period):
                raise ValueError("bits must be 0/1")
        self.prefix: Bits | None = prefix
        self.period: Bits | None = period
        self._rule = rule
        self.label = label

    @staticmethod
    def periodic(prefix: Iterable[int], period: Iterable[int]) -> "CantorPoint":
        return CantorPoint(tuple(prefix), tuple(period), None)

    @staticmethod
    def constant(bit: int) -> "CantorPoint":
        return CantorPoint((), (bit,), None)

    @staticmethod
    def from_rule(rule: Callable[[int], int], label: str = "rule") -> "CantorPoint":
        return CantorPoint(None, None, rule, label)

    @property
    def is_periodic(self) -> bool:
        return self._rule is None

    def bit(self, n: int) -> int:
        if n < 0:
            raise ValueError("bit positions are naturals")
        if self._rule is not None:
            b = self._rule(n)
            if b not in (0, 1):
                raise ValueError(f"rule produced non-bit {b!r} at {n}")
            return b
        assert self.prefix is not None and self.period is not None
        if n < len(self.prefix):
            return self.prefix[n]
        return self.period[(n - len(self.prefix)) % len(self.period)]

    def bits(self, count: int) -> Bits:
        return tuple(self.bit(n) for n in range(count))

    def __repr__(self) -> str:  # debugging aid only
        if self.is_periodic:
            return f"CantorPoint({format_bits(self.prefix)},({format_bits(self.period)}))"
        return f"CantorPoint<rule:{self.label}>"


def _equality_bound(x: CantorPoint, y: CantorPoint) -> int:
    """Positions to compare so agreement implies equality (periodic pair)."""
    assert x.is_periodic and y.is_periodic
    return max(len(x.prefix), len(y.prefix)) + lcm(len(x.period), len(y.period))


def periodic_equal(x: CantorPoint, y: CantorPoint) -> bool:
    """Decide equality of two eventually periodic points exactly."""
    bound = _equality_bound(x, y)
    return all(x.bit(n) == y.bit(n) for n in range(bound))


class _AgreeUpToBudget:
    """Marker: the two points agree on every index below the inspected budget."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "agree-up-to-budget"


AGREE_UP_TO_BUDGET = _AgreeUpToBudget()


def cantor_dist(
    x: CantorPoint, y: CantorPoint, budget: int
) -> Fraction | _AgreeUpToBudget:
    """Distance 2^-m at the first disagreement index m, if m < budget.

    Returns exact 0 when both points are eventually periodic and provably
    equal, and the AGREE_UP_TO_BUDGET marker otherwise (including periodic
    pairs whose first disagreement lies at or beyond the budget — the caller
    can retry with a larger budget, or use :func:`cantor_dist_exact`).
    """
    if budget < 0:
        raise ValueError("budget must be a natural")
    for m in range(budget):
        if x.bit(m) != y.bit(m):
            return Fraction(1, 2**m)
    if x.is_periodic and y.is_periodic and periodic_equal(x, y):
        return Fraction(0)
    return AGREE_UP_TO_BUDGET


def cantor_dist_exact(x: CantorPoint, y: CantorPoint) -> Fraction:
    """Exact distance of two eventually periodic points (no budget needed)."""
    from .errors import ExactValueUnavailableError

    if not (x.is_periodic and y.is_periodic):
        raise ExactValueUnavailableError(
            "exact Cantor distance needs eventually periodic points"
        )
    for m in range(_equality_bound(x, y)):
        if x.bit(m) != y.bit(m):
            return Fraction(1, 2**m)
    return Fraction(0)


# --- middle-third embedding ----------------------------------------------------
#
# h(x) = Σ_i 2·x(i)/3^(i+1) sends Cantor space onto the middle-third set in
# [0, 1].  Key exact facts used throughout (and pinned in tests): if x and y
# first disagree at index m then 3^-(m+1) <= |h(x)-h(y)| <= 3^-m, whence the
# corrected correspondence pair
#   (a) cantor_dist(x,y) < 2^-n  =>  |h(x)-h(y)| <= 3^-(n+1)
#   (b) |h(x)-h(y)| < 3^-(n+1)   =>  cantor_dist(x,y) < 2^-n
# (the two-sided strict version fails on tail boundaries: σ⌢0⌢0^ω vs σ⌢1⌢1^ω
# attains 3^-(n+1) exactly).


def embed_point(x: CantorPoint, precision: int) -> tuple[Fraction, Fraction]:
    """Partial sum of h(x) over the first ``precision`` bits, with error bound.

    Returns (approx, err) with |h(x) - approx| <= err = 3^-precision; approx
    underestimates (tail bits only add).
    """
    if precision < 0:
        raise ValueError("precision must be a natural")
    acc = Fraction(0)
    for i in range(precision):
        if x.bit(i):
            acc += Fraction(2, 3 ** (i + 1))
    return acc, Fraction(1, 3**precision)


def embed_point_exact(x: CantorPoint) -> Fraction:
    """Exact h(x) for an eventually periodic point (geometric series)."""
    from .errors import ExactValueUnavailableError

    if not x.is_periodic:
        raise ExactValueUnavailableError("exact embedding needs a periodic point")
    assert x.prefix is not None and x.period is not None
    p, q = len(x.prefix), len(x.period)
    head = Fraction(0)
    for i, b in enumerate(x.prefix):
        if b:
            head += Fraction(2, 3 ** (i + 1))
    cycle = Fraction(0)
    for j, b in enumerate(x.period):
        if b:
            cycle += Fraction(2, 3 ** (j + 1))
    # tail from index p onward: 3^-p * cycle * 3^q/(3^q - 1)
    return head + Fraction(1, 3**p) * cycle * Fraction(3**q, 3**q - 1)


# --- sequence coding ------------------------------------------------------------
#
# A finite sequence ⟨v_0, ..., v_{L-1}⟩ is coded as Π_x p_x^(v_x + 1) with
# p_0 = 2 < p_1 = 3 < ... the primes; the empty sequence is 1.  Valid codes
# are exactly the positive integers whose prime support is a contiguous
# initial segment of the primes.  The coding is strictly monotone under
# extension and monotone in each component.

_PRIMES: list[int] = [2, 3, 5, 7, 11, 13]


def _prime(i: int) -> int:
    """The i-th prime (0-based), growing the cache on demand."""
    while len(_PRIMES) <= i:
        c = _PRIMES[-1] + 2
        while any(c % p == 0 for p in _PRIMES if p * p <= c):
            c += 2
        _PRIMES.append(c)
    return _PRIMES[i]


def seq_code(values: Sequence[int]) -> int:
    """Code of a finite sequence of naturals (empty sequence -> 1)."""
    n = 1
    for x, v in enumerate(values):
        if v < 0:
            raise ValueError("sequence entries must be naturals")
        n *= _prime(x) ** (v + 1)
    return n


def seq_decode(n: int) -> tuple[int, ...] | None:
    """Decode a code back to its sequence; None when ``n`` codes nothing."""
    if n <= 0:
        return None
    out: list[int] = []
    m = n
    x = 0
    while m > 1:
        p = _prime(x)
        if p * p > m and m != p:
            # every untried prime factor is >= p, so m is prime; unless it is
            # exactly p the support skips a prime and n codes nothing.
            return None
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        if e == 0:
            return None  # support skips p: not contiguous
        out.append(e - 1)
        x += 1
    return tuple(out)


def seq_len(n: int) -> int | None:
    """Length of the sequence coded by ``n`` (None when invalid)."""
    s = seq_decode(n)
    return None if s is None else len(s)
