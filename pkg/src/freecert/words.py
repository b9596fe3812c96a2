"""Reduced-word arithmetic for free groups, free products of finite cyclic
groups, and direct products of two such groups.

Words are immutable and hashable; all operations return reduced words.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

__all__ = [
    "GroupSpec",
    "Word",
    "free_group",
    "cyclic_free_product",
    "direct_product",
    "unit",
    "generator",
    "pair_word",
    "multiply",
    "inverse",
    "conjugacy_canonical",
    "word_length",
    "drop_first",
    "first_letter",
    "sort_key",
    "format_word",
    "parse_word",
]

FREE = "free"
CYCLIC = "cyclic_free_product"
PRODUCT = "direct_product"


@dataclass(frozen=True)
class GroupSpec:
    """Describes the ambient group: F_d, Z_m^{*d}, or a direct product of two
    non-product specs."""

    kind: str
    d: int = 0
    m: int = 0
    left: "GroupSpec | None" = None
    right: "GroupSpec | None" = None

    def __post_init__(self):
        if self.kind == FREE:
            if self.d < 1:
                raise ValueError("free group needs d >= 1")
        elif self.kind == CYCLIC:
            if self.d < 1:
                raise ValueError("cyclic free product needs d >= 1")
            if self.m < 2:
                raise ValueError("cyclic order must be >= 2")
        elif self.kind == PRODUCT:
            if self.left is None or self.right is None:
                raise ValueError("direct product needs two factors")
            if self.left.kind == PRODUCT or self.right.kind == PRODUCT:
                raise ValueError("direct products nest at most one level")
        else:
            raise ValueError(f"unknown group kind {self.kind!r}")

    @property
    def is_product(self) -> bool:
        return self.kind == PRODUCT

    def to_json(self) -> dict:
        if self.kind == PRODUCT:
            return {"kind": PRODUCT, "left": self.left.to_json(),
                    "right": self.right.to_json()}
        if self.kind == CYCLIC:
            return {"kind": CYCLIC, "d": self.d, "m": self.m}
        return {"kind": FREE, "d": self.d}

    @staticmethod
    def from_json(obj: dict) -> "GroupSpec":
        kind = obj.get("kind")
        if kind == PRODUCT:
            return direct_product(GroupSpec.from_json(obj["left"]),
                                  GroupSpec.from_json(obj["right"]))
        if kind == CYCLIC:
            return cyclic_free_product(int(obj["d"]), int(obj["m"]))
        if kind == FREE:
            return free_group(int(obj["d"]))
        raise ValueError(f"unknown group kind {kind!r}")


def free_group(d: int) -> GroupSpec:
    return GroupSpec(FREE, d=d)


def cyclic_free_product(d: int, m: int) -> GroupSpec:
    return GroupSpec(CYCLIC, d=d, m=m)


def direct_product(left: GroupSpec, right: GroupSpec) -> GroupSpec:
    return GroupSpec(PRODUCT, left=left, right=right)


def _reduce(letters, spec: GroupSpec):
    """Stack reduction of a letter sequence; cyclic exponents normalize to
    1..m-1, free exponents to nonzero integers."""
    m = spec.m if spec.kind == CYCLIC else 0
    out: list[tuple[int, int]] = []
    for g, e in letters:
        if not 1 <= g <= spec.d:
            raise ValueError(f"generator index {g} out of range 1..{spec.d}")
        if m:
            e %= m
        if e == 0:
            continue
        if out and out[-1][0] == g:
            merged = out[-1][1] + e
            if m:
                merged %= m
            out.pop()
            if merged != 0:
                out.append((g, merged))
        else:
            out.append((g, e))
    return tuple(out)


@dataclass(frozen=True)
class Word:
    """A reduced word. Base-group words carry a letter tuple of
    (generator, exponent) runs; direct-product words carry a component pair."""

    spec: GroupSpec
    letters: tuple[tuple[int, int], ...] = ()
    pair: "tuple[Word, Word] | None" = field(default=None)

    def __post_init__(self):
        if self.spec.is_product:
            if self.pair is None or self.letters:
                raise ValueError("product words are component pairs")
            lw, rw = self.pair
            if lw.spec != self.spec.left or rw.spec != self.spec.right:
                raise ValueError("component spec mismatch")
        else:
            if self.pair is not None:
                raise ValueError("only product words carry a pair")
            reduced = _reduce(self.letters, self.spec)
            if reduced != self.letters:
                object.__setattr__(self, "letters", reduced)

    @property
    def is_unit(self) -> bool:
        if self.spec.is_product:
            return self.pair[0].is_unit and self.pair[1].is_unit
        return not self.letters

    def __mul__(self, other: "Word") -> "Word":
        return multiply(self, other)

    def __invert__(self) -> "Word":
        return inverse(self)

    def __str__(self) -> str:
        return format_word(self)

    def __repr__(self) -> str:
        return f"Word({format_word(self)!r})"


def unit(spec: GroupSpec) -> Word:
    if spec.is_product:
        return Word(spec, pair=(unit(spec.left), unit(spec.right)))
    return Word(spec)


def generator(spec: GroupSpec, i: int, e: int = 1) -> Word:
    """The word g_i^e in a base (non-product) group."""
    if spec.is_product:
        raise ValueError("use pair_word for direct products")
    return Word(spec, ((i, e),))


def pair_word(spec: GroupSpec, left: Word, right: Word) -> Word:
    if not spec.is_product:
        raise ValueError("pair_word needs a direct-product spec")
    return Word(spec, pair=(left, right))


def _check_specs(a: Word, b: Word):
    if a.spec != b.spec:
        raise ValueError("words live in different groups")


def multiply(a: Word, b: Word) -> Word:
    _check_specs(a, b)
    if a.spec.is_product:
        return Word(a.spec, pair=(multiply(a.pair[0], b.pair[0]),
                                  multiply(a.pair[1], b.pair[1])))
    return Word(a.spec, a.letters + b.letters)


def inverse(a: Word) -> Word:
    if a.spec.is_product:
        return Word(a.spec, pair=(inverse(a.pair[0]), inverse(a.pair[1])))
    m = a.spec.m if a.spec.kind == CYCLIC else 0
    inv = tuple((g, (m - e) if m else -e) for g, e in reversed(a.letters))
    return Word(a.spec, inv)


def conjugacy_canonical(a: Word) -> Word:
    """Canonical representative of a's conjugacy class: cyclically reduce,
    then take the lexicographically least rotation under the (generator,
    exponent) letter order."""
    if a.spec.is_product:
        raise ValueError("conjugacy classes supported for base groups only")
    m = a.spec.m if a.spec.kind == CYCLIC else 0
    letters = list(a.letters)
    # cyclic reduction: merge matching first/last generators via rotation
    while len(letters) >= 2 and letters[0][0] == letters[-1][0]:
        g = letters[0][0]
        e = letters[0][1] + letters[-1][1]
        if m:
            e %= m
        letters = letters[1:-1]
        if e != 0:
            letters.append((g, e))
    if len(letters) <= 1:
        return Word(a.spec, tuple(letters))
    best = min(tuple(letters[i:] + letters[:i]) for i in range(len(letters)))
    return Word(a.spec, best)


def word_length(a: Word) -> int:
    """Generator word length: sum of |exponent| over letters (cyclic
    exponents count as stored, 1..m-1)."""
    if a.spec.is_product:
        return word_length(a.pair[0]) + word_length(a.pair[1])
    return sum(abs(e) for _, e in a.letters)


def first_letter(a: Word) -> tuple[int, int]:
    """(generator, sign) of the leading single-generator symbol of a free
    word."""
    if a.spec.kind != FREE:
        raise ValueError("first_letter is defined for free groups")
    if a.is_unit:
        raise ValueError("the unit has no first letter")
    g, e = a.letters[0]
    return g, (1 if e > 0 else -1)


def drop_first(a: Word) -> Word:
    """Remove one leading generator symbol (the Cayley-tree parent step)."""
    if a.spec.kind != FREE:
        raise ValueError("drop_first is defined for free groups")
    if a.is_unit:
        raise ValueError("cannot drop a letter from the unit")
    g, e = a.letters[0]
    rest = a.letters[1:]
    if abs(e) > 1:
        rest = ((g, e - (1 if e > 0 else -1)),) + rest
    return Word(a.spec, rest)


def _atoms(a: Word):
    out = []
    for g, e in a.letters:
        step = 1 if e > 0 else -1
        out.extend((g, step) for _ in range(abs(e)))
    return tuple(out)


def sort_key(a: Word):
    """Deterministic (length, lexicographic) key shared by every ordered
    word collection in this package."""
    if a.spec.is_product:
        kl, kr = sort_key(a.pair[0]), sort_key(a.pair[1])
        return (kl[0] + kr[0], (kl[1], kr[1]))
    return (word_length(a), _atoms(a))


_TOKEN = re.compile(r"^g(\d+)(?:\^(-?\d+))?$")


def format_word(a: Word) -> str:
    if a.spec.is_product:
        return f"({format_word(a.pair[0])})x({format_word(a.pair[1])})"
    if a.is_unit:
        return "e"
    return " ".join(f"g{g}^{e}" for g, e in a.letters)


def parse_word(spec: GroupSpec, text: str) -> Word:
    """Parse the textual word form: space-separated g<i>^<e> tokens, "e" for
    the unit, "(<left>)x(<right>)" for direct products. "^1" may be omitted
    on input."""
    text = text.strip()
    if spec.is_product:
        match = re.match(r"^\((.*)\)x\((.*)\)$", text)
        if not match:
            raise ValueError(f"malformed product word {text!r}")
        return Word(spec, pair=(parse_word(spec.left, match.group(1)),
                                parse_word(spec.right, match.group(2))))
    if text == "e":
        return unit(spec)
    letters = []
    for token in text.split():
        m = _TOKEN.match(token)
        if not m:
            raise ValueError(f"malformed word token {token!r}")
        g = int(m.group(1))
        e = int(m.group(2)) if m.group(2) is not None else 1
        letters.append((g, e))
    return Word(spec, tuple(letters))
