"""Finite evidence objects produced by solvers and checked by verifiers.

Each type is a frozen dataclass with a canonical JSON representation
(``kind`` + ``to_repr``/``from_repr``); parsing of whole files lives in
:mod:`bwreduce.instances`.  Construction normalizes (sorts, dedupes) so that
serialize ∘ parse is the identity on canonical bytes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping

from .core import Bits, DyadicInterval, format_bits, format_rational, parse_bits, parse_rational
from .errors import NonMonotoneSelectorError, SchemaViolationError


def _expect_nat(value: Any, path: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value < 0:
        raise SchemaViolationError(f"expected a natural, got {value!r}", path)
    return value


@dataclass(frozen=True)
class Budget:
    """Resource bounds shared by every solver.

    horizon: how many sequence terms / set elements are inspected;
    depth: target bit/interval depth; stage: enumeration stage for trees;
    code_budget: largest sequence code ever decoded; threshold: how many
    witnesses a cell needs before a heuristic search trusts it.
    """

    horizon: int = 4096
    depth: int = 8
    stage: int = 4096
    code_budget: int = 10**6
    threshold: int = 8

    def __post_init__(self) -> None:
        for name in ("horizon", "depth", "stage", "code_budget", "threshold"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 0:
                raise ValueError(f"budget field {name} must be a natural")

    def to_repr(self) -> dict[str, int]:
        return {
            "horizon": self.horizon,
            "depth": self.depth,
            "stage": self.stage,
            "code_budget": self.code_budget,
            "threshold": self.threshold,
        }


@dataclass(frozen=True)
class Selector:
    """A finite strictly increasing list of naturals, optionally extended
    beyond its stored values by a fixed arithmetic step."""

    values: tuple[int, ...]
    extension_step: int | None = None

    kind = "selector"

    def __post_init__(self) -> None:
        if any((not isinstance(v, int)) or v < 0 for v in self.values):
            raise NonMonotoneSelectorError("selector values must be naturals")
        if any(a >= b for a, b in zip(self.values, self.values[1:])):
            raise NonMonotoneSelectorError("selector values must strictly increase")
        if self.extension_step is not None and self.extension_step < 1:
            raise NonMonotoneSelectorError("extension step must be >= 1")

    def __len__(self) -> int:
        return len(self.values)

    def value(self, t: int) -> int:
        """The t-th selected index (uses the extension rule past the list)."""
        if t < len(self.values):
            return self.values[t]
        if self.extension_step is None:
            raise IndexError(f"selector has only {len(self.values)} stored values")
        if not self.values:
            raise IndexError("extension rule needs at least one stored value")
        return self.values[-1] + self.extension_step * (t - len(self.values) + 1)

    def to_repr(self) -> dict[str, Any]:
        return {"values": list(self.values), "extension_step": self.extension_step}

    @staticmethod
    def from_repr(obj: Mapping[str, Any], path: str = "repr") -> "Selector":
        if not isinstance(obj, Mapping):
            raise SchemaViolationError("selector must be an object", path)
        raw = obj.get("values")
        if not isinstance(raw, list):
            raise SchemaViolationError("selector.values must be an array", f"{path}.values")
        values = tuple(_expect_nat(v, f"{path}.values[{i}]") for i, v in enumerate(raw))
        step = obj.get("extension_step")
        if step is not None:
            step = _expect_nat(step, f"{path}.extension_step")
        return Selector(values, step)


@dataclass(frozen=True)
class CauchyCertificate:
    """Evidence that a selected subsequence is Cauchy at recorded rates.

    Each modulus (n, s) claims |y_f(v) - y_f(w)| < 2^-n for all positions
    v, w with s <= v, w < len(selector); ``fast`` additionally pins s = n.
    """

    selector: Selector
    moduli: tuple[tuple[int, int], ...]
    rate: str

    kind = "cauchy_certificate"

    def __post_init__(self) -> None:
        if self.rate not in ("slow", "fast"):
            raise ValueError(f"rate must be slow|fast, got {self.rate!r}")
        norm = tuple(sorted(set((int(n), int(s)) for n, s in self.moduli)))
        if any(n < 0 or s < 0 for n, s in norm):
            raise ValueError("moduli entries must be naturals")
        if self.rate == "fast" and any(s != n for n, s in norm):
            raise ValueError("fast certificates require s = n in every modulus")
        object.__setattr__(self, "moduli", norm)

    def to_repr(self) -> dict[str, Any]:
        return {
            "selector": self.selector.to_repr(),
            "moduli": [{"n": n, "s": s} for n, s in self.moduli],
            "rate": self.rate,
        }

    @staticmethod
    def from_repr(obj: Mapping[str, Any], path: str = "repr") -> "CauchyCertificate":
        sel = Selector.from_repr(obj.get("selector", {}), f"{path}.selector")
        raw = obj.get("moduli")
        if not isinstance(raw, list):
            raise SchemaViolationError("moduli must be an array", f"{path}.moduli")
        moduli = []
        for i, entry in enumerate(raw):
            if not isinstance(entry, Mapping):
                raise SchemaViolationError("modulus must be an object", f"{path}.moduli[{i}]")
            moduli.append(
                (
                    _expect_nat(entry.get("n"), f"{path}.moduli[{i}].n"),
                    _expect_nat(entry.get("s"), f"{path}.moduli[{i}].s"),
                )
            )
        rate = obj.get("rate")
        if rate not in ("slow", "fast"):
            raise SchemaViolationError(f"rate must be slow|fast, got {rate!r}", f"{path}.rate")
        return CauchyCertificate(sel, tuple(moduli), rate)


@dataclass(frozen=True)
class CohesiveWitness:
    """Evidence that a selector settles into one side of each listed row.

    Each settle triple (level, s, side) claims every selector value j >= s
    lies in row ``level`` (side "in") or in its complement (side "out").
    """

    selector: Selector
    settle: tuple[tuple[int, int, str], ...]

    kind = "cohesive_witness"

    def __post_init__(self) -> None:
        norm = []
        for level, s, side in self.settle:
            if side not in ("in", "out"):
                raise ValueError(f"settle side must be in|out, got {side!r}")
            if level < 0 or s < 0:
                raise ValueError("settle level and point must be naturals")
            norm.append((int(level), int(s), side))
        object.__setattr__(self, "settle", tuple(sorted(set(norm))))

    def to_repr(self) -> dict[str, Any]:
        return {
            "selector": self.selector.to_repr(),
            "settle": [{"level": i, "s": s, "side": side} for i, s, side in self.settle],
        }

    @staticmethod
    def from_repr(obj: Mapping[str, Any], path: str = "repr") -> "CohesiveWitness":
        sel = Selector.from_repr(obj.get("selector", {}), f"{path}.selector")
        raw = obj.get("settle")
        if not isinstance(raw, list):
            raise SchemaViolationError("settle must be an array", f"{path}.settle")
        settle = []
        for i, entry in enumerate(raw):
            if not isinstance(entry, Mapping):
                raise SchemaViolationError("settle entry must be an object", f"{path}.settle[{i}]")
            side = entry.get("side")
            if side not in ("in", "out"):
                raise SchemaViolationError(
                    f"side must be in|out, got {side!r}", f"{path}.settle[{i}].side"
                )
            settle.append(
                (
                    _expect_nat(entry.get("level"), f"{path}.settle[{i}].level"),
                    _expect_nat(entry.get("s"), f"{path}.settle[{i}].s"),
                    side,
                )
            )
        return CohesiveWitness(sel, tuple(settle))


@dataclass(frozen=True)
class BranchPrefix:
    """A finite branch prefix together with the stage it was verified at."""

    bits: Bits
    verified_at_stage: int

    kind = "branch_prefix"

    def __post_init__(self) -> None:
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("branch bits must be 0/1")
        if self.verified_at_stage < 0:
            raise ValueError("stage must be a natural")

    def to_repr(self) -> dict[str, Any]:
        return {"bits": format_bits(self.bits), "verified_at_stage": self.verified_at_stage}

    @staticmethod
    def from_repr(obj: Mapping[str, Any], path: str = "repr") -> "BranchPrefix":
        bits = parse_bits(obj.get("bits", None), location=f"{path}.bits")
        stage = _expect_nat(obj.get("verified_at_stage"), f"{path}.verified_at_stage")
        return BranchPrefix(bits, stage)


@dataclass(frozen=True)
class SeparatorSet:
    """A set of naturals given by a finite characteristic prefix plus an
    optional total extension rule ("all" or "none")."""

    bits: Bits
    extension: str | None = None

    kind = "separator_set"

    def __post_init__(self) -> None:
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("separator bits must be 0/1")
        if self.extension not in (None, "all", "none"):
            raise ValueError(f"extension must be all|none, got {self.extension!r}")

    def member(self, n: int) -> bool:
        from .errors import SeparatorUndefinedError

        if n < 0:
            raise ValueError("set elements are naturals")
        if n < len(self.bits):
            return self.bits[n] == 1
        if self.extension == "all":
            return True
        if self.extension == "none":
            return False
        raise SeparatorUndefinedError(
            f"separator defined only below {len(self.bits)}, queried at {n}"
        )

    def to_repr(self) -> dict[str, Any]:
        return {"bits": format_bits(self.bits), "extension": self.extension}

    @staticmethod
    def from_repr(obj: Mapping[str, Any], path: str = "repr") -> "SeparatorSet":
        bits = parse_bits(obj.get("bits", None), location=f"{path}.bits")
        ext = obj.get("extension")
        if ext not in (None, "all", "none"):
            raise SchemaViolationError(f"extension must be all|none, got {ext!r}", f"{path}.extension")
        return SeparatorSet(bits, ext)


@dataclass(frozen=True)
class AccumulationResult:
    """Output of accumulation-point search: a nested dyadic chain and the
    approximant (exact accumulation value when ``exact``)."""

    chain: tuple[DyadicInterval, ...]
    approx: Fraction
    exact: bool

    kind = "accumulation_point"

    def to_repr(self) -> dict[str, Any]:
        return {
            "chain": [{"level": c.level, "index": c.index} for c in self.chain],
            "approx": format_rational(self.approx),
            "exact": self.exact,
        }

    @staticmethod
    def from_repr(obj: Mapping[str, Any], path: str = "repr") -> "AccumulationResult":
        raw = obj.get("chain")
        if not isinstance(raw, list):
            raise SchemaViolationError("chain must be an array", f"{path}.chain")
        chain = []
        for i, entry in enumerate(raw):
            if not isinstance(entry, Mapping):
                raise SchemaViolationError("chain entry must be an object", f"{path}.chain[{i}]")
            chain.append(
                DyadicInterval(
                    _expect_nat(entry.get("level"), f"{path}.chain[{i}].level"),
                    _expect_nat(entry.get("index"), f"{path}.chain[{i}].index"),
                )
            )
        approx = parse_rational(obj.get("approx"), location=f"{path}.approx")
        exact = obj.get("exact")
        if not isinstance(exact, bool):
            raise SchemaViolationError("exact must be a boolean", f"{path}.exact")
        return AccumulationResult(tuple(chain), approx, exact)
