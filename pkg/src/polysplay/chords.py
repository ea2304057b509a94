"""Reeb chord sequences, their reductions, and the splicing calculus.

A splicing of h chord sequences is stored by its shape only: a tuple of
columns, each column the sorted tuple of boundary indices whose part is
nonempty there.  The k-th column containing boundary j holds the k-th
jumping chord of sequence j, so the chords themselves never need copying.
Boundary and column indices are 0-based in the Python API and 1-based in
the text format.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from typing import Iterator, Sequence

from . import torus_algebra as ta

Chords = tuple[str, ...]
ChordSet = tuple[Chords, ...]

MAX_SEQUENCE_LENGTH = int(os.environ.get("POLYSPLAY_MAX_SEQUENCE", "64"))


# ----------------------------------------------------------------------
# parsing and formatting


def parse_sequence(text: str) -> Chords:
    text = text.strip()
    if text in ("", "-", "()"):
        return ()
    chords = tuple(t.strip() for t in text.split("."))
    for rho in chords:
        if rho not in ta.CHORDS:
            raise ValueError(f"not a Reeb chord: {rho!r}")
    return chords


def parse_chord_set(text: str) -> ChordSet:
    """Parse 'r1.r23 | r2' into (('r1', 'r23'), ('r2',))."""
    return tuple(parse_sequence(part) for part in text.split("|"))


def format_sequence(s: Sequence[str]) -> str:
    return ".".join(s) if s else "-"


def format_chord_set(rho: Sequence[Sequence[str]]) -> str:
    return "|".join(format_sequence(s) for s in rho)


def as_chord_set(rho) -> ChordSet:
    if isinstance(rho, str):
        return parse_chord_set(rho)
    return tuple(tuple(s) for s in rho)


# ----------------------------------------------------------------------
# single sequences


def jump_subsequence(s: Sequence[str]) -> Chords:
    return tuple(rho for rho in s if ta.is_jumping(rho))


def jump_positions(s: Sequence[str]) -> list[int]:
    return [i for i, rho in enumerate(s) if ta.is_jumping(rho)]


def is_coherent(s: Sequence[str]) -> bool:
    """True when consecutive chords have matching end/start idempotents."""
    return all(ta.end_idempotent(a) == ta.start_idempotent(b) for a, b in zip(s, s[1:]))


def _contract(s: Sequence[str], allowed) -> Chords:
    out = list(s)
    i = 0
    while i < len(out) - 1:
        p = ta.chord_product(out[i], out[i + 1])
        if p is not None and allowed(p):
            out[i : i + 2] = [p]
            i = max(i - 1, 0)
        else:
            i += 1
    return tuple(out)


def reduce(s: Sequence[str]) -> Chords:
    """Compose adjacent composable chords until none remain."""
    return _contract(s, lambda p: True)


def reduce_123(s: Sequence[str]) -> Chords:
    """Compose only adjacent pairs whose product is r123."""
    return _contract(s, lambda p: p == "r123")


def composable_equivalent(s: Sequence[str], t: Sequence[str]) -> bool:
    return reduce(s) == reduce(t)


def equivalent_123(s: Sequence[str], t: Sequence[str]) -> bool:
    return reduce_123(s) == reduce_123(t)


def truncate_low(s: Sequence[str], k: int) -> Chords:
    """T_k: the first k chords."""
    if not 0 <= k <= len(s):
        raise ValueError(f"truncation index {k} out of range for length {len(s)}")
    return tuple(s[:k])


def truncate_high(s: Sequence[str], k: int) -> Chords:
    """T^k: the chords after the first k, so that T_k(s) + T^k(s) == s."""
    if not 0 <= k <= len(s):
        raise ValueError(f"truncation index {k} out of range for length {len(s)}")
    return tuple(s[k:])


# ----------------------------------------------------------------------
# chord sets


def star(a: Sequence[Sequence[str]], b: Sequence[Sequence[str]]) -> ChordSet:
    if len(a) != len(b):
        raise ValueError(f"cannot concatenate chord sets with h={len(a)} and h={len(b)}")
    return tuple(tuple(x) + tuple(y) for x, y in zip(a, b))


def jump_profile(rho: ChordSet) -> tuple[int, ...]:
    return tuple(len(jump_subsequence(s)) for s in rho)


def mu_bar(rho: ChordSet, j: int, k: int) -> ChordSet | None:
    """Multiply chords k and k+1 of sequence j; None when the product vanishes."""
    s = rho[j]
    if not 0 <= k < len(s) - 1:
        raise ValueError(f"no adjacent pair at position {k} of sequence {j}")
    p = ta.chord_product(s[k], s[k + 1])
    if p is None:
        return None
    new = s[:k] + (p,) + s[k + 2 :]
    return rho[:j] + (new,) + rho[j + 1 :]


# ----------------------------------------------------------------------
# splicings


@dataclass(frozen=True, order=True)
class Splicing:
    cols: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        cols = tuple(tuple(sorted(set(c))) for c in self.cols)
        object.__setattr__(self, "cols", cols)

    def __len__(self) -> int:
        return len(self.cols)

    @property
    def m(self) -> int:
        return len(self.cols)

    def count(self, j: int) -> int:
        return sum(1 for c in self.cols if j in c)

    def is_interleaved(self) -> bool:
        return col(self) == 0

    def parts(self, rho: ChordSet) -> list[list[str | None]]:
        """P^i_j as a table indexed [j][i], with None for empty parts."""
        jumps = [jump_subsequence(s) for s in rho]
        seen = [0] * len(rho)
        table: list[list[str | None]] = [[None] * self.m for _ in rho]
        for i, c in enumerate(self.cols):
            for j in c:
                table[j][i] = jumps[j][seen[j]]
                seen[j] += 1
        return table

    def __str__(self) -> str:
        seen: dict[int, int] = {}
        cols = []
        for c in self.cols:
            entries = []
            for j in c:
                seen[j] = seen.get(j, 0) + 1
                entries.append(f"{j + 1}:{seen[j]}")
            cols.append("+".join(entries))
        return "[" + ",".join(cols) + "]"

    @classmethod
    def parse(cls, text: str) -> "Splicing":
        text = text.strip()
        if not (text.startswith("[") and text.endswith("]")):
            raise ValueError(f"splicing must be bracketed: {text!r}")
        body = text[1:-1].strip()
        if not body:
            return cls(())
        cols = []
        seen: dict[int, int] = {}
        for chunk in body.split(","):
            col_js = []
            for entry in chunk.split("+"):
                j_txt, _, k_txt = entry.strip().partition(":")
                j = int(j_txt) - 1
                if j < 0:
                    raise ValueError(f"bad boundary index in {entry!r}")
                seen[j] = seen.get(j, 0) + 1
                if k_txt and int(k_txt) != seen[j]:
                    raise ValueError(f"jump index out of order in {entry!r}")
                col_js.append(j)
            if len(set(col_js)) != len(col_js):
                raise ValueError(f"boundary repeated in column {chunk!r}")
            cols.append(tuple(col_js))
        return cls(tuple(cols))


EMPTY_SPLICING = Splicing(())


def splices(sigma: Splicing, rho: ChordSet) -> bool:
    """Does sigma describe a valid splicing of rho?"""
    h = len(rho)
    for c in sigma.cols:
        if not c or any(not 0 <= j < h for j in c):
            return False
    return all(sigma.count(j) == n for j, n in enumerate(jump_profile(rho)))


def col(sigma: Splicing) -> int:
    return sum(1 for c in sigma.cols if len(c) >= 2)


def star_splicing(s1: Splicing, s2: Splicing) -> Splicing:
    return Splicing(s1.cols + s2.cols)


def _check_length(rho: ChordSet) -> None:
    for s in rho:
        if len(s) > MAX_SEQUENCE_LENGTH:
            raise ValueError(f"sequence longer than the enumeration cap {MAX_SEQUENCE_LENGTH}")


def enumerate_splicings(rho: ChordSet, m: int) -> list[Splicing]:
    """All m-splicings of rho, in lexicographic order of their column tables."""
    _check_length(rho)
    profile = jump_profile(rho)
    if m < 0 or (m == 0 and sum(profile) > 0):
        return []
    if m == 0:
        return [EMPTY_SPLICING]
    choices = [list(itertools.combinations(range(m), n)) for n in profile]
    out = []
    for pick in itertools.product(*choices):
        cols: list[list[int]] = [[] for _ in range(m)]
        for j, positions in enumerate(pick):
            for i in positions:
                cols[i].append(j)
        if all(cols):
            out.append(Splicing(tuple(tuple(c) for c in cols)))
    return sorted(set(out))


def _interleavings(counts: list[int]) -> Iterator[tuple[tuple[int, ...], ...]]:
    if not any(counts):
        yield ()
        return
    for j, n in enumerate(counts):
        if n:
            counts[j] -= 1
            for rest in _interleavings(counts):
                yield ((j,),) + rest
            counts[j] += 1


def enumerate_interleavings(rho: ChordSet) -> list[Splicing]:
    _check_length(rho)
    return [Splicing(c) for c in _interleavings(list(jump_profile(rho)))]


# ----------------------------------------------------------------------
# idempotents


def idempotents_of(
    sigma: Splicing, rho: ChordSet, base: Sequence[str] | None = None
) -> list[tuple[str, ...]]:
    """The m+1 idempotent tuples of a splicing.

    Slots whose sequence is jump free keep the idempotent of their chords,
    or of ``base`` when the sequence is empty.
    """
    if not splices(sigma, rho):
        raise ValueError(f"{sigma} does not splice {format_chord_set(rho)}")
    current = []
    jumps = [jump_subsequence(s) for s in rho]
    for j, s in enumerate(rho):
        if jumps[j]:
            current.append(ta.start_idempotent(jumps[j][0]))
        elif s:
            current.append(ta.start_idempotent(s[0]))
        elif base is not None:
            current.append(base[j])
        else:
            raise ValueError(f"slot {j + 1} is empty; pass a base idempotent")
    out = [tuple(current)]
    seen = [0] * len(rho)
    for c in sigma.cols:
        for j in c:
            current[j] = ta.end_idempotent(jumps[j][seen[j]])
            seen[j] += 1
        out.append(tuple(current))
    return out


def splicing_from(rho: ChordSet, iotas: Sequence[Sequence[str]]) -> Splicing:
    """Inverse of idempotents_of: columns are where some slot changes."""
    iotas = [tuple(t) for t in iotas]
    if not iotas:
        raise ValueError("need at least one idempotent tuple")
    h = len(rho)
    if any(len(t) != h for t in iotas):
        raise ValueError("idempotent tuples must have one slot per sequence")
    jumps = [jump_subsequence(s) for s in rho]
    for j in range(h):
        changes = [i for i in range(1, len(iotas)) if iotas[i][j] != iotas[i - 1][j]]
        if len(changes) != len(jumps[j]):
            raise ValueError(
                f"slot {j + 1}: {len(changes)} idempotent changes but {len(jumps[j])} jumping chords"
            )
        for n, i in enumerate(changes):
            rho_k = jumps[j][n]
            if (iotas[i - 1][j], iotas[i][j]) != (ta.start_idempotent(rho_k), ta.end_idempotent(rho_k)):
                raise ValueError(f"slot {j + 1}: change at column {i} does not match chord {rho_k}")
    cols = []
    for i in range(1, len(iotas)):
        c = tuple(j for j in range(h) if iotas[i][j] != iotas[i - 1][j])
        if not c:
            raise ValueError(f"column {i} has no idempotent change")
        cols.append(c)
    return Splicing(tuple(cols))


# ----------------------------------------------------------------------
# compositions and collisions


def _column_of_jump(sigma: Splicing, j: int, n: int) -> int:
    """Column index holding the n-th (0-based) jump of sequence j."""
    seen = 0
    for i, c in enumerate(sigma.cols):
        if j in c:
            if seen == n:
                return i
            seen += 1
    raise ValueError(f"sequence {j} has no jump number {n}")


def compatibility_case(rho: ChordSet, sigma: Splicing, i: int, j: int) -> int | None:
    """Which of the three compatibility cases (i, i+1) on sequence j falls in.

    Returns 1, 2 or 3, or None when the pair is not compatible.
    """
    if not sigma.is_interleaved() or not splices(sigma, rho):
        raise ValueError("compatibility is defined for interleavings only")
    s = rho[j]
    if not 0 <= i < len(s) - 1:
        raise ValueError(f"no adjacent pair at position {i} of sequence {j}")
    a, b = s[i], s[i + 1]
    if ta.chord_product(a, b) is None:
        return 1
    ja, jb = ta.is_jumping(a), ta.is_jumping(b)
    if ja != jb:
        return 2
    if ja and jb:
        n = len(jump_subsequence(s[:i]))
        if _column_of_jump(sigma, j, n + 1) == _column_of_jump(sigma, j, n) + 1:
            return 3
    return None


def compatible(rho: ChordSet, sigma: Splicing, i: int, j: int) -> bool:
    return compatibility_case(rho, sigma, i, j) is not None


def compose_at(rho: ChordSet, sigma: Splicing, i: int, j: int) -> tuple[ChordSet, Splicing]:
    """The pair (mu_bar^i_j(rho), sigma^i_j) for a case 2 or 3 pair."""
    case = compatibility_case(rho, sigma, i, j)
    if case is None:
        raise ValueError(f"pair {i} on sequence {j} is not compatible")
    if case == 1:
        raise ValueError("the product vanishes, so there is nothing to compose")
    new_rho = mu_bar(rho, j, i)
    assert new_rho is not None
    if case == 2:
        # the product of a jumping and a non-jumping chord is r123, which jumps
        # again and takes over the same part
        if not ta.is_jumping(new_rho[j][i]):
            raise ValueError("composed chord is not jumping")
        return new_rho, sigma
    n = len(jump_subsequence(rho[j][:i]))
    k = _column_of_jump(sigma, j, n)
    return new_rho, Splicing(sigma.cols[:k] + sigma.cols[k + 2 :])


def collidable(sigma: Splicing, k: int) -> bool:
    """Columns k and k+1 (0-based) share no boundary index."""
    if not 0 <= k < sigma.m - 1:
        raise ValueError(f"collision index {k} out of range for {sigma.m} columns")
    return not set(sigma.cols[k]) & set(sigma.cols[k + 1])


def collide(sigma: Splicing, k: int) -> Splicing:
    if not collidable(sigma, k):
        raise ValueError(f"columns {k} and {k + 1} are not collidable")
    merged = sigma.cols[k] + sigma.cols[k + 1]
    return Splicing(sigma.cols[:k] + (merged,) + sigma.cols[k + 2 :])


# ----------------------------------------------------------------------
# splits and shippings


def splits(rho: ChordSet, sigma: Splicing) -> list[tuple[ChordSet, Splicing, ChordSet, Splicing]]:
    """All (lam, s1, delta, s2) with lam * delta = rho and s1 * s2 = sigma."""
    if not splices(sigma, rho):
        raise ValueError(f"{sigma} does not splice {format_chord_set(rho)}")
    out = []
    positions = [jump_positions(s) for s in rho]
    for c in range(sigma.m + 1):
        s1 = Splicing(sigma.cols[:c])
        s2 = Splicing(sigma.cols[c:])
        ranges = []
        for j, s in enumerate(rho):
            n = s1.count(j)
            lo = positions[j][n - 1] + 1 if n > 0 else 0
            hi = positions[j][n] if n < len(positions[j]) else len(s)
            ranges.append(range(lo, hi + 1))
        for cuts in itertools.product(*ranges):
            lam = tuple(s[:a] for s, a in zip(rho, cuts))
            delta = tuple(s[a:] for s, a in zip(rho, cuts))
            out.append((lam, s1, delta, s2))
    return out


@dataclass(frozen=True)
class Shipping:
    boat: ChordSet
    boat_splicing: Splicing
    anchor: ChordSet
    anchor_splicing: Splicing
    k: int
    padded: int  # k' = max(total anchor jumps, k)

    def reassemble(self) -> tuple[ChordSet, Splicing]:
        return star(self.boat, self.anchor), star_splicing(self.boat_splicing, self.anchor_splicing)


def enumerate_shippings(rho: ChordSet, sigma: Splicing, k: int) -> list[Shipping]:
    """The k-shippings of an interleaved (rho, sigma).

    The anchor carries the last min(k, m) columns of sigma.  When that is no
    columns at all there is exactly one shipping, with an empty anchor.
    Otherwise some anchor sequence has to begin with a jumping chord.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    if not sigma.is_interleaved() or not splices(sigma, rho):
        raise ValueError("shippings are defined for interleavings only")
    h = len(rho)
    c = min(k, sigma.m)
    if c == 0:
        empty = tuple(() for _ in range(h))
        return [Shipping(tuple(rho), sigma, empty, EMPTY_SPLICING, k, k)]
    out = []
    for lam, s1, delta, s2 in splits(rho, sigma):
        if s2.m != c:
            continue
        if not any(d and ta.is_jumping(d[0]) for d in delta):
            continue
        out.append(Shipping(lam, s1, delta, s2, k, max(sum(jump_profile(delta)), k)))
    return out


def splays(lower: Shipping, upper: Shipping) -> bool:
    """True when upper is a (k+1)-shipping and lower a k-shipping of the same data."""
    if upper.k != lower.k + 1:
        return False
    if lower.reassemble() != upper.reassemble():
        return False
    rho, sigma = lower.reassemble()
    return lower in enumerate_shippings(rho, sigma, lower.k) and upper in enumerate_shippings(
        rho, sigma, upper.k
    )
