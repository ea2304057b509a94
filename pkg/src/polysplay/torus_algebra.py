"""The torus algebra over F2 and its h-fold idempotent tuples.

Elements are stored as 8-bit masks over the generators, so addition is xor
and equality needs no normalisation step.
"""

from __future__ import annotations

from typing import Iterable, Sequence

GENERATORS = ("im", "il", "r1", "r2", "r3", "r12", "r23", "r123")
IDEMPOTENTS = ("im", "il")
CHORDS = ("r1", "r2", "r3", "r12", "r23", "r123")
JUMPING = ("r1", "r2", "r3", "r123")

_BIT = {g: 1 << i for i, g in enumerate(GENERATORS)}

# (start, end) idempotent letter of each chord
_ENDS = {
    "r1": ("m", "l"),
    "r2": ("l", "m"),
    "r3": ("m", "l"),
    "r12": ("m", "m"),
    "r23": ("l", "l"),
    "r123": ("m", "l"),
}

_CHORD_PRODUCTS = {
    ("r1", "r2"): "r12",
    ("r2", "r3"): "r23",
    ("r1", "r23"): "r123",
    ("r12", "r3"): "r123",
}

_HOMOLOGY = {
    "r1": (1, 0, 0),
    "r2": (0, 1, 0),
    "r3": (0, 0, 1),
    "r12": (1, 1, 0),
    "r23": (0, 1, 1),
    "r123": (1, 1, 1),
}


def _check_chord(rho: str) -> None:
    if rho not in _ENDS:
        if rho in IDEMPOTENTS:
            raise ValueError(f"{rho} is an idempotent, not a Reeb chord")
        raise ValueError(f"unknown torus algebra generator {rho!r}")


def generator_product(a: str, b: str) -> str | None:
    """Product of two generators, or None when it vanishes."""
    for g in (a, b):
        if g not in _BIT:
            raise ValueError(f"unknown torus algebra generator {g!r}")
    if a in IDEMPOTENTS and b in IDEMPOTENTS:
        return a if a == b else None
    if a in IDEMPOTENTS:
        return b if _ENDS[b][0] == a[1] else None
    if b in IDEMPOTENTS:
        return a if _ENDS[a][1] == b[1] else None
    return _CHORD_PRODUCTS.get((a, b))


class TorusElement:
    """An F2 combination of torus algebra generators."""

    __slots__ = ("mask",)

    def __init__(self, gens: Iterable[str] | int = ()):
        if isinstance(gens, int):
            if not 0 <= gens < 256:
                raise ValueError("mask out of range")
            object.__setattr__(self, "mask", gens)
            return
        mask = 0
        for g in gens:
            if g not in _BIT:
                raise ValueError(f"unknown torus algebra generator {g!r}")
            mask ^= _BIT[g]
        object.__setattr__(self, "mask", mask)

    def __setattr__(self, name, value):
        raise AttributeError("TorusElement is immutable")

    @classmethod
    def parse(cls, text: str) -> "TorusElement":
        text = text.strip()
        if text in ("", "0"):
            return cls()
        return cls(t.strip() for t in text.split("+"))

    @property
    def support(self) -> tuple[str, ...]:
        return tuple(g for g in GENERATORS if self.mask & _BIT[g])

    def __bool__(self) -> bool:
        return self.mask != 0

    def __eq__(self, other) -> bool:
        if isinstance(other, str):
            other = TorusElement([other])
        return isinstance(other, TorusElement) and self.mask == other.mask

    def __hash__(self) -> int:
        return hash(self.mask)

    def __add__(self, other: "TorusElement") -> "TorusElement":
        return TorusElement(self.mask ^ other.mask)

    def __mul__(self, other: "TorusElement") -> "TorusElement":
        return multiply(self, other)

    def __str__(self) -> str:
        if not self.mask:
            return "0"
        return "+".join(sorted(self.support))

    def __repr__(self) -> str:
        return f"TorusElement({str(self)!r})"


ONE = TorusElement(IDEMPOTENTS)
ZERO = TorusElement()


def multiply(a: TorusElement | str, b: TorusElement | str) -> TorusElement:
    """Bilinear product on F2 combinations (strings are single generators)."""
    if isinstance(a, str):
        a = TorusElement([a])
    if isinstance(b, str):
        b = TorusElement([b])
    mask = 0
    for x in a.support:
        for y in b.support:
            p = generator_product(x, y)
            if p is not None:
                mask ^= _BIT[p]
    return TorusElement(mask)


def start_idempotent(rho: str) -> str:
    """Letter 'm' or 'l' of the idempotent on the left of rho."""
    _check_chord(rho)
    return _ENDS[rho][0]


def end_idempotent(rho: str) -> str:
    _check_chord(rho)
    return _ENDS[rho][1]


def is_jumping(rho: str) -> bool:
    _check_chord(rho)
    s, e = _ENDS[rho]
    return s != e


def chord_homology(rho: str) -> tuple[int, int, int]:
    """Multiplicities of rho over the three arcs of the boundary circle."""
    _check_chord(rho)
    return _HOMOLOGY[rho]


def chord_product(a: str, b: str) -> str | None:
    """Product of two Reeb chords as a chord name, or None."""
    _check_chord(a)
    _check_chord(b)
    return _CHORD_PRODUCTS.get((a, b))


def sequence_homology(chords: Sequence[str]) -> tuple[int, int, int]:
    total = [0, 0, 0]
    for rho in chords:
        for i, v in enumerate(chord_homology(rho)):
            total[i] += v
    return tuple(total)


def multiply_tuples(a: Sequence[str], b: Sequence[str]) -> tuple[str, ...] | None:
    """Product of two idempotent tuples over 𝓘^h: the tuple if equal, else zero."""
    a, b = tuple(a), tuple(b)
    if len(a) != len(b) or not a:
        raise ValueError("idempotent tuples must have equal positive length")
    for t in a + b:
        if t not in ("m", "l"):
            raise ValueError(f"idempotent letter must be m or l, got {t!r}")
    return a if a == b else None


def product_table() -> dict[tuple[str, str], str]:
    """All nonzero generator products as a dict, for reports."""
    out = {}
    for a in GENERATORS:
        for b in GENERATORS:
            p = generator_product(a, b)
            if p is not None:
                out[(a, b)] = p
    return out
