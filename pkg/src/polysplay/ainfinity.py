"""Finite A-infinity multi-modules over the h-fold torus algebra.

Coefficients are F2 throughout, so a module element is a frozenset of
generator labels and addition is symmetric difference.  Structure maps are
sparse tables; a missing key means the map vanishes there.

Besides the evaluating checkers, both relations can be expanded into
formal terms.  That is what the cancellation tests work with, since a
residual of zero can hide a term that shows up twice.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from . import chords as ch
from .chords import ChordSet, Splicing

Combo = frozenset


def add(a: Iterable[str], b: Iterable[str]) -> frozenset:
    return frozenset(a) ^ frozenset(b)


def format_combo(c: Iterable[str]) -> str:
    c = sorted(c)
    return "+".join(c) if c else "0"


def parse_combo(text: str) -> frozenset:
    text = text.strip()
    if text in ("", "0"):
        return frozenset()
    out: frozenset = frozenset()
    for t in text.split("+"):
        out = out ^ {t.strip()}
    return out


def zero_dbar(rho: ChordSet) -> list[ChordSet]:
    """Differential hook on input sequences; the torus algebra has d = 0."""
    return []


@dataclass
class MultiModule:
    generators: tuple[str, ...]
    idempotents: dict[str, tuple[str, ...]]
    maps: dict[tuple[str, ChordSet], frozenset] = field(default_factory=dict)

    def m(self, x: str, rho: ChordSet) -> frozenset:
        return self.maps.get((x, rho), frozenset())

    def apply(self, combo: Iterable[str], rho: ChordSet) -> frozenset:
        out: frozenset = frozenset()
        for x in combo:
            out = out ^ self.m(x, rho)
        return out

    @property
    def h(self) -> int:
        if self.idempotents:
            return len(next(iter(self.idempotents.values())))
        for _, rho in self.maps:
            return len(rho)
        return 0


@dataclass
class PartialMaps:
    generators: tuple[str, ...]
    idempotents: dict[str, tuple[str, ...]]
    n: dict[tuple[str, ChordSet, Splicing], frozenset] = field(default_factory=dict)

    def value(self, x: str, rho: ChordSet, sigma: Splicing) -> frozenset:
        return self.n.get((x, rho, sigma), frozenset())

    def apply(self, combo: Iterable[str], rho: ChordSet, sigma: Splicing) -> frozenset:
        out: frozenset = frozenset()
        for x in combo:
            out = out ^ self.value(x, rho, sigma)
        return out

    def validate(self) -> None:
        for (x, rho, sigma) in self.n:
            if not ch.splices(sigma, rho):
                raise ValueError(f"entry for {x}: {sigma} does not splice {ch.format_chord_set(rho)}")


# ----------------------------------------------------------------------
# the ordinary relation


def truncation_pairs(rho: ChordSet) -> Iterable[tuple[ChordSet, ChordSet]]:
    for cuts in itertools.product(*(range(len(s) + 1) for s in rho)):
        lam = tuple(ch.truncate_low(s, a) for s, a in zip(rho, cuts))
        delta = tuple(ch.truncate_high(s, a) for s, a in zip(rho, cuts))
        yield lam, delta


def mu_bar_terms(rho: ChordSet) -> list[ChordSet]:
    out = []
    for j, s in enumerate(rho):
        for k in range(len(s) - 1):
            new = ch.mu_bar(rho, j, k)
            if new is not None:
                out.append(new)
    return out


def expand_ainfinity(rho: ChordSet) -> list[tuple]:
    """Formal terms of the relation: ('mm', lam, delta) and ('m', rho')."""
    terms: list[tuple] = [("mm", lam, delta) for lam, delta in truncation_pairs(rho)]
    terms += [("m", new) for new in mu_bar_terms(rho)]
    terms += [("m", new) for new in zero_dbar(rho)]
    return terms


def check_ainfinity(M: MultiModule, x: str, rho) -> frozenset:
    """Residual of the A-infinity relation at (x, rho); zero means it holds."""
    rho = ch.as_chord_set(rho)
    out: frozenset = frozenset()
    for term in expand_ainfinity(rho):
        if term[0] == "mm":
            out = out ^ M.apply(M.m(x, term[1]), term[2])
        else:
            out = out ^ M.m(x, term[1])
    return out


# ----------------------------------------------------------------------
# the partial relation


def expand_partial(rho: ChordSet, sigma: Splicing) -> list[tuple]:
    """Formal terms of the partial relation at an interleaving sigma.

    ('nn', lam, s1, delta, s2) for the two-story terms, ('mu', rho', s')
    for compositions and ('coll', rho, s(k)) for collisions.
    """
    if not sigma.is_interleaved() or not ch.splices(sigma, rho):
        raise ValueError(f"{sigma} is not an interleaving of {ch.format_chord_set(rho)}")
    terms: list[tuple] = [("nn",) + split for split in ch.splits(rho, sigma)]
    for j, s in enumerate(rho):
        for i in range(len(s) - 1):
            case = ch.compatibility_case(rho, sigma, i, j)
            if case in (2, 3):
                new_rho, new_sigma = ch.compose_at(rho, sigma, i, j)
                terms.append(("mu", new_rho, new_sigma))
    for k in range(sigma.m - 1):
        if ch.collidable(sigma, k):
            terms.append(("coll", rho, ch.collide(sigma, k)))
    return terms


def evaluate_partial_terms(N: PartialMaps, x: str, terms: Iterable[tuple]) -> frozenset:
    out: frozenset = frozenset()
    for term in terms:
        if term[0] == "nn":
            _, lam, s1, delta, s2 = term
            out = out ^ N.apply(N.value(x, lam, s1), delta, s2)
        else:
            out = out ^ N.value(x, term[1], term[2])
    return out


def check_partial(N: PartialMaps, x: str, rho, sigma: Splicing) -> frozenset:
    """Residual of the partial relation at (x, rho, sigma)."""
    rho = ch.as_chord_set(rho)
    return evaluate_partial_terms(N, x, expand_partial(rho, sigma))


def assemble_m_from_n(N: PartialMaps) -> MultiModule:
    """m(x, rho) = sum of n(x, rho, sigma) over interleavings sigma."""
    maps: dict[tuple[str, ChordSet], frozenset] = {}
    for (x, rho, sigma), val in N.n.items():
        if sigma.is_interleaved():
            key = (x, rho)
            maps[key] = maps.get(key, frozenset()) ^ val
    maps = {k: v for k, v in maps.items() if v}
    return MultiModule(N.generators, dict(N.idempotents), maps)


# ----------------------------------------------------------------------
# the summation identity as a statement about formal terms


def _n_level_ainfinity(rho: ChordSet) -> Counter:
    """Expand the relation for m = sum_sigma n into n-level formal terms."""
    out: Counter = Counter()
    for term in expand_ainfinity(rho):
        if term[0] == "mm":
            _, lam, delta = term
            for s1 in ch.enumerate_interleavings(lam):
                for s2 in ch.enumerate_interleavings(delta):
                    out[("nn", lam, s1, delta, s2)] += 1
        else:
            for tau in ch.enumerate_interleavings(term[1]):
                out[("n", term[1], tau)] += 1
    return out


def _n_level_partial(rho: ChordSet) -> tuple[Counter, Counter]:
    """Sum the partial relation over all interleavings of rho.

    Returns the non-collision terms and the collision terms separately.
    """
    main: Counter = Counter()
    coll: Counter = Counter()
    for sigma in ch.enumerate_interleavings(rho):
        for term in expand_partial(rho, sigma):
            if term[0] == "nn":
                main[term] += 1
            elif term[0] == "mu":
                main[("n", term[1], term[2])] += 1
            else:
                coll[("n", term[1], term[2])] += 1
    return main, coll


@dataclass
class SummationReport:
    rho: ChordSet
    collision_two_to_one: bool
    mismatched: dict  # term -> (partial multiplicity, A-infinity multiplicity)

    @property
    def holds(self) -> bool:
        return self.collision_two_to_one and not self.mismatched


def summation_identity(rho) -> SummationReport:
    """Compare the summed partial relation with the relation for the sums.

    Collision terms must occur exactly twice each.  Every other term must
    occur with the same parity on both sides.
    """
    rho = ch.as_chord_set(rho)
    main, coll = _n_level_partial(rho)
    two_to_one = all(v == 2 for v in coll.values())
    target = _n_level_ainfinity(rho)
    mismatched = {}
    for term in set(main) | set(target):
        a, b = main.get(term, 0), target.get(term, 0)
        if a % 2 != b % 2:
            mismatched[term] = (a, b)
    return SummationReport(rho, two_to_one, mismatched)


def all_chord_sets(max_total: int, h: int, alphabet=None) -> Iterable[ChordSet]:
    """Every h-tuple of chord sequences of total length at most max_total."""
    from .torus_algebra import CHORDS

    alphabet = alphabet or CHORDS
    for lengths in itertools.product(range(max_total + 1), repeat=h):
        if sum(lengths) > max_total:
            continue
        pools = [itertools.product(alphabet, repeat=n) for n in lengths]
        for combo in itertools.product(*[list(p) for p in pools]):
            yield tuple(tuple(s) for s in combo)


# ----------------------------------------------------------------------
# idempotent bookkeeping


def expected_idempotents(iota: tuple[str, ...], rho: ChordSet) -> tuple[tuple[str, ...], tuple[str, ...]] | None:
    """(required start, resulting end) idempotents of x and m(x, rho)."""
    from .torus_algebra import end_idempotent, start_idempotent

    if len(iota) != len(rho):
        return None
    end = []
    for letter, s in zip(iota, rho):
        if not s:
            end.append(letter)
            continue
        if start_idempotent(s[0]) != letter or not ch.is_coherent(s):
            return None
        end.append(end_idempotent(s[-1]))
    return iota, tuple(end)


def idempotent_violations(M: MultiModule) -> list[tuple[str, ChordSet, str]]:
    """Entries y of m(x, rho) that break idempotent coherence."""
    bad = []
    for (x, rho), ys in sorted(M.maps.items(), key=lambda kv: (kv[0][0], kv[0][1])):
        exp = expected_idempotents(M.idempotents[x], rho)
        for y in sorted(ys):
            if exp is None or M.idempotents.get(y) != exp[1]:
                bad.append((x, rho, y))
    return bad


# ----------------------------------------------------------------------
# table files


def _records(text: str) -> Iterable[tuple[int, list[str]]]:
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, [f.strip() for f in line.split(";")]


def _read_header(fields: list[str], gens: list, idem: dict, lineno: int) -> bool:
    if fields[0].startswith("gen "):
        label = fields[0][4:].strip()
        if len(fields) != 2:
            raise ValueError(f"line {lineno}: expected 'gen x ; idempotents'")
        gens.append(label)
        idem[label] = tuple(fields[1].replace(",", " ").split())
        return True
    return False


def parse_partial_table(text: str, source: str = "<table>") -> PartialMaps:
    """Read 'gen x ; m l' lines and 'x ; rho ; [splicing] ; y1+y2' records."""
    gens: list[str] = []
    idem: dict[str, tuple[str, ...]] = {}
    table: dict = {}
    for lineno, fields in _records(text):
        try:
            if _read_header(fields, gens, idem, lineno):
                continue
            if len(fields) != 4:
                raise ValueError("expected four ';'-separated fields")
            x, rho_txt, sig_txt, y_txt = fields
            key = (x, ch.parse_chord_set(rho_txt), Splicing.parse(sig_txt))
            table[key] = table.get(key, frozenset()) ^ parse_combo(y_txt)
        except ValueError as exc:
            raise ValueError(f"{source}:{lineno}: {exc}") from None
    N = PartialMaps(tuple(gens), idem, {k: v for k, v in table.items() if v})
    N.validate()
    return N


def parse_module_table(text: str, source: str = "<table>") -> MultiModule:
    gens: list[str] = []
    idem: dict[str, tuple[str, ...]] = {}
    table: dict = {}
    for lineno, fields in _records(text):
        try:
            if _read_header(fields, gens, idem, lineno):
                continue
            if len(fields) != 3:
                raise ValueError("expected three ';'-separated fields")
            x, rho_txt, y_txt = fields
            key = (x, ch.parse_chord_set(rho_txt))
            table[key] = table.get(key, frozenset()) ^ parse_combo(y_txt)
        except ValueError as exc:
            raise ValueError(f"{source}:{lineno}: {exc}") from None
    return MultiModule(tuple(gens), idem, {k: v for k, v in table.items() if v})


def format_partial_table(N: PartialMaps) -> str:
    lines = [f"gen {x} ; {' '.join(N.idempotents[x])}" for x in N.generators]
    for (x, rho, sigma), ys in sorted(N.n.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2])):
        lines.append(f"{x} ; {ch.format_chord_set(rho)} ; {sigma} ; {format_combo(ys)}")
    return "\n".join(lines) + "\n"


def format_module_table(M: MultiModule) -> str:
    lines = [f"gen {x} ; {' '.join(M.idempotents[x])}" for x in M.generators]
    for (x, rho), ys in sorted(M.maps.items(), key=lambda kv: (kv[0][0], kv[0][1])):
        lines.append(f"{x} ; {ch.format_chord_set(rho)} ; {format_combo(ys)}")
    return "\n".join(lines) + "\n"


def reachable_inputs(N: PartialMaps, max_length: int) -> list[tuple[str, ChordSet]]:
    """(x, rho) pairs worth checking: rho built from chords the table uses."""
    from .torus_algebra import chord_product, CHORDS

    used = {c for (_, rho, _) in N.n for s in rho for c in s}
    # a chord outside the table can still matter when it composes into one inside
    grown = True
    while grown:
        grown = False
        for a in CHORDS:
            for b in CHORDS:
                if chord_product(a, b) in used and not {a, b} <= used:
                    used |= {a, b}
                    grown = True
    h = len(next(iter(N.idempotents.values()))) if N.idempotents else 0
    if not used or h == 0:
        return [(x, tuple(() for _ in range(h))) for x in N.generators]
    out = []
    for rho in all_chord_sets(max_length, h, tuple(sorted(used))):
        for x in N.generators:
            out.append((x, rho))
    return out
