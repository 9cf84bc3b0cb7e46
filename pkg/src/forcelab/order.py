"""Finite linear orders, order-type terms, ladder orders and gap quotients."""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

from ._common import FormatError, PreconditionError

LESS, EQUAL, GREATER = -1, 0, 1


@dataclass(frozen=True)
class LinOrder:
    """A finite linear order; element ids are ordered by their rational position."""

    elements: tuple[tuple[str, Fraction], ...]

    def __post_init__(self):
        ids = [e for e, _ in self.elements]
        pos = [p for _, p in self.elements]
        if len(set(ids)) != len(ids):
            raise PreconditionError("element ids must be distinct")
        if len(set(pos)) != len(pos):
            raise PreconditionError("positions must be distinct")

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, object]]) -> "LinOrder":
        return cls(tuple((str(e), Fraction(p)) for e, p in pairs))

    @classmethod
    def from_positions(cls, positions: Iterable[object]) -> "LinOrder":
        return cls.from_pairs((str(Fraction(p)), p) for p in positions)

    @property
    def ids(self) -> list[str]:
        return [e for e, _ in sorted(self.elements, key=lambda e: e[1])]

    @property
    def positions(self) -> list[Fraction]:
        return sorted(p for _, p in self.elements)

    def pos(self, element: str) -> Fraction:
        for e, p in self.elements:
            if e == element:
                return p
        raise KeyError(element)

    def __contains__(self, element) -> bool:
        return any(e == element for e, _ in self.elements)

    def __len__(self) -> int:
        return len(self.elements)


# -- ladders ---------------------------------------------------------------


@dataclass(frozen=True)
class LadderOrder:
    ladders: tuple[tuple[int, tuple[int, ...]], ...]

    @classmethod
    def from_dict(cls, ladders: dict) -> "LadderOrder":
        return cls(tuple(sorted((int(k), tuple(v)) for k, v in ladders.items())))

    def as_dict(self) -> dict[int, tuple[int, ...]]:
        return dict(self.ladders)

    def violations(self) -> list[str]:
        out = []
        for index, ladder in self.ladders:
            if any(a >= b for a, b in zip(ladder, ladder[1:])):
                out.append(f"ladder at {index} is not strictly increasing")
            if any(x >= index for x in ladder):
                out.append(f"ladder at {index} has an entry >= {index}")
        return out


def ladder_lex_compare(a: Sequence[int], b: Sequence[int]) -> int:
    for x, y in zip(a, b):
        if x != y:
            return LESS if x < y else GREATER
    if len(a) == len(b):
        return EQUAL
    return LESS if len(a) < len(b) else GREATER


def make_baumgartner(ladders: LadderOrder) -> LinOrder:
    """Position the limit indexes by the lexicographic order of their ladders."""
    bad = ladders.violations()
    if bad:
        raise PreconditionError("; ".join(bad))
    seen: dict[tuple[int, ...], int] = {}
    for index, ladder in ladders.ladders:
        if ladder in seen:
            raise PreconditionError(
                f"duplicate ladder {list(ladder)} at indexes {seen[ladder]} and {index}"
            )
        seen[ladder] = index
    # the prefix rule makes plain tuple comparison coincide with ladder_lex_compare
    ordered = sorted(ladders.ladders, key=lambda item: item[1])
    return LinOrder(tuple((str(index), Fraction(i)) for i, (index, _) in enumerate(ordered)))


# -- order-type terms --------------------------------------------------------


@dataclass(frozen=True)
class Fin:
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise PreconditionError("Fin(n) requires n >= 1")


@dataclass(frozen=True)
class Omega:
    pass


@dataclass(frozen=True)
class OmegaStar:
    pass


@dataclass(frozen=True)
class Eta:
    pass


@dataclass(frozen=True)
class Sum:
    children: tuple["OrderTerm", ...]

    def __post_init__(self):
        if not self.children:
            raise PreconditionError("Sum needs at least one child")


@dataclass(frozen=True)
class OmegaSum:
    body: "OrderTerm"


@dataclass(frozen=True)
class OmegaStarSum:
    body: "OrderTerm"


OrderTerm = Union[Fin, Omega, OmegaStar, Eta, Sum, OmegaSum, OmegaStarSum]


def is_scattered(t: OrderTerm) -> bool:
    if isinstance(t, Eta):
        return False
    if isinstance(t, Sum):
        return all(is_scattered(c) for c in t.children)
    if isinstance(t, (OmegaSum, OmegaStarSum)):
        return is_scattered(t.body)
    return True


def hausdorff_rank(t: OrderTerm) -> int:
    if not is_scattered(t):
        raise PreconditionError("hausdorff_rank is defined for scattered terms only")
    return _rank(t)


def _rank(t: OrderTerm) -> int:
    if isinstance(t, Fin):
        return 0
    if isinstance(t, (Omega, OmegaStar)):
        return 1
    if isinstance(t, Sum):
        return max(_rank(c) for c in t.children)
    return _rank(t.body) + 1


def format_term(t: OrderTerm) -> str:
    if isinstance(t, Fin):
        return f"fin({t.n})"
    if isinstance(t, Omega):
        return "omega"
    if isinstance(t, OmegaStar):
        return "omega*"
    if isinstance(t, Eta):
        return "eta"
    if isinstance(t, Sum):
        return "sum(" + ",".join(format_term(c) for c in t.children) + ")"
    if isinstance(t, OmegaSum):
        return f"wsum({format_term(t.body)})"
    if isinstance(t, OmegaStarSum):
        return f"w*sum({format_term(t.body)})"
    raise TypeError(f"not an order term: {t!r}")


_TOKEN = re.compile(r"\s*(w\*sum|wsum|sum|fin|omega\*|omega|eta|\d+|[(),])")


def parse_term(text: str) -> OrderTerm:
    tokens = []
    i = 0
    text = text.strip()
    while i < len(text):
        m = _TOKEN.match(text, i)
        if not m:
            raise FormatError(f"unexpected input at {i}: {text[i:]!r}")
        tokens.append(m.group(1))
        i = m.end()
        while i < len(text) and text[i].isspace():
            i += 1
    term, rest = _parse(tokens, 0)
    if rest != len(tokens):
        raise FormatError(f"trailing tokens in {text!r}")
    return term


def _expect(tokens, i, tok):
    if i >= len(tokens) or tokens[i] != tok:
        raise FormatError(f"expected {tok!r} at token {i}")
    return i + 1


def _parse(tokens, i):
    if i >= len(tokens):
        raise FormatError("unexpected end of term")
    tok = tokens[i]
    if tok == "omega":
        return Omega(), i + 1
    if tok == "omega*":
        return OmegaStar(), i + 1
    if tok == "eta":
        return Eta(), i + 1
    if tok == "fin":
        i = _expect(tokens, i + 1, "(")
        if i >= len(tokens) or not tokens[i].isdigit():
            raise FormatError("fin expects a positive integer")
        n = int(tokens[i])
        if n < 1:
            raise FormatError("fin(n) requires n >= 1")
        return Fin(n), _expect(tokens, i + 1, ")")
    if tok in ("wsum", "w*sum"):
        i = _expect(tokens, i + 1, "(")
        body, i = _parse(tokens, i)
        i = _expect(tokens, i, ")")
        return (OmegaSum(body) if tok == "wsum" else OmegaStarSum(body)), i
    if tok == "sum":
        i = _expect(tokens, i + 1, "(")
        children = []
        while True:
            child, i = _parse(tokens, i)
            children.append(child)
            if i < len(tokens) and tokens[i] == ",":
                i += 1
                continue
            break
        return Sum(tuple(children)), _expect(tokens, i, ")")
    raise FormatError(f"unexpected token {tok!r}")


# -- gap quotient ---------------------------------------------------------------


def gap_quotient(ambient: LinOrder, sub: Iterable[str], k: int) -> list[list[str]]:
    """Convex classes of `sub`: closure of "at most k ambient points strictly between".

    For x < y < z in sub, the count between x and z bounds the counts between
    neighbours, so the closure is generated by consecutive pairs.
    """
    order = ambient.ids
    rank = {e: i for i, e in enumerate(order)}
    members = set(sub)
    missing = members - rank.keys()
    if missing:
        raise PreconditionError(f"sub is not contained in ambient: {sorted(missing)}")
    chain = sorted(members, key=rank.__getitem__)
    classes: list[list[str]] = []
    for x in chain:
        if classes and rank[x] - rank[classes[-1][-1]] - 1 <= k:
            classes[-1].append(x)
        else:
            classes.append([x])
    return classes


def select_transversal(classes: Sequence[Sequence[str]], rule: str = "first") -> list[str]:
    if rule not in ("first", "last"):
        raise PreconditionError(f"unknown rule {rule!r}")
    out = []
    for c in classes:
        if not c:
            raise PreconditionError("empty class")
        out.append(c[0] if rule == "first" else c[-1])
    return out
