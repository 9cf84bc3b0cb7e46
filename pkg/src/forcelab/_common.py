"""Shared plumbing: violation records, errors, rationals, seeds."""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field
from fractions import Fraction


class ForcelabError(Exception):
    """Base class for all errors raised by this package."""


class FormatError(ForcelabError, ValueError):
    """Malformed input (bad rational, unknown kind, schema mismatch)."""


class PreconditionError(ForcelabError, ValueError):
    """An operation was called outside its contract."""


class ConstructionError(ForcelabError):
    """A constructive tactic could not produce a valid condition.

    `code` is a short machine-readable tag; `violations` carries the
    validator output when the failure was detected by re-validation.
    """

    def __init__(self, code: str, message: str = "", violations=()):
        self.code = code
        self.violations = list(violations)
        super().__init__(f"{code}: {message}" if message else code)


@dataclass(frozen=True)
class Violation:
    clause: str
    kind: str
    witnesses: tuple = ()
    message: str = ""

    def to_record(self) -> dict:
        return {
            "clause": self.clause,
            "kind": self.kind,
            "witnesses": [str(w) for w in self.witnesses],
            "message": self.message,
        }


def clauses(violations) -> set[str]:
    return {v.clause for v in violations}


def parse_rational(text) -> Fraction:
    """Parse "num/den" (or a bare integer) into a Fraction."""
    if isinstance(text, bool):
        raise FormatError(f"not a rational: {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise FormatError(f"not a rational: {text!r}")
    num, sep, den = text.strip().partition("/")
    try:
        n = int(num)
        d = int(den) if sep else 1
    except ValueError:
        raise FormatError(f"not a rational: {text!r}") from None
    if d == 0:
        raise FormatError(f"zero denominator: {text!r}")
    return Fraction(n, d)


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def derive_seed(seed: int, *labels) -> int:
    """Child seed for a named sub-computation; stable across runs and platforms."""
    h = hashlib.sha256(repr((int(seed),) + tuple(labels)).encode())
    return int.from_bytes(h.digest()[:8], "big")


def rng_for(seed: int, *labels) -> random.Random:
    return random.Random(derive_seed(seed, *labels))


@dataclass(frozen=True)
class Policy:
    """Tactic policy: children per old top node, and the seed for label choice."""

    fanout: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.fanout < 1:
            raise PreconditionError("fanout must be >= 1")

    def child(self, *labels) -> "Policy":
        return Policy(self.fanout, derive_seed(self.seed, *labels))


@dataclass
class UnionFind:
    parent: dict = field(default_factory=dict)

    def find(self, x):
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra

    def groups(self) -> list[list]:
        out: dict = {}
        for x in self.parent:
            out.setdefault(self.find(x), []).append(x)
        return list(out.values())
