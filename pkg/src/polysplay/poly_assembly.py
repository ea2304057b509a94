"""Structure maps of Poly_k assembled from curve counts.

Holomorphic counts are inputs here.  Local model counts near east infinity
come from :func:`classify_easterly` and :func:`model_count_anchor`; all
other counts are read from count tables, one line per moduli space:

    x ; y ; domain=R1:1,R9:1 ; boat=r1|- ; anchor=- ; sboat=[1:1] ; sanchor=[] ; chiS=2 ; 1

Generators are written as comma-separated intersection points.  The last
field is the count mod 2.  An optional ``embedded=yes|no`` field before it
records whether chiS is the embedded Euler characteristic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from . import ainfinity as ai
from . import chords as ch
from . import diagram as dg
from . import lattice
from . import splaying as sp
from . import torus_algebra as ta
from .chords import ChordSet, Splicing
from .diagram import Diagram, Domain


class PolyError(ValueError):
    pass


# ----------------------------------------------------------------------
# easterly domains


COMPOSITION_KINDS = ("rho1rho2_composition", "rho2rho3_composition")
EASTERLY_KINDS = COMPOSITION_KINDS + ("collision", "none")

# letters of one handle along three consecutive tiers
PIECES = {
    ("m", "l", "m"): "rho1rho2",
    ("l", "m", "l"): "rho2rho3",
    ("m", "m", "l"): "pre",
    ("l", "l", "m"): "pre",
    ("m", "l", "l"): "post",
    ("l", "m", "m"): "post",
}


@dataclass(frozen=True)
class EasterlyClass:
    kind: str
    handle: int | None = None  # 1-based; set for composition classes only

    def __post_init__(self):
        if self.kind not in EASTERLY_KINDS:
            raise ValueError(f"unknown easterly kind {self.kind!r}")
        if (self.kind in COMPOSITION_KINDS) != (self.handle is not None):
            raise ValueError("composition classes carry a handle, the others do not")

    def __str__(self) -> str:
        return f"{self.kind}({self.handle})" if self.handle is not None else self.kind


NONE = EasterlyClass("none")


def piece_kind(letters: Sequence[str]) -> str:
    """'passive', 'rho1rho2', 'rho2rho3', 'pre', 'post' or 'jump' for one handle."""
    letters = tuple(letters)
    if any(c not in ("m", "l") for c in letters):
        raise ValueError(f"tier letters must be m or l, got {letters}")
    if len(set(letters)) == 1:
        return "passive"
    if len(letters) == 3:
        return PIECES[letters]
    return "jump"


def _single_jump(s: Sequence[str]) -> str | None:
    if len(s) == 1 and ta.is_jumping(s[0]):
        return s[0]
    return None


def classify_pieces(patterns: Sequence[Sequence[str]], lam: int, rho_E=None) -> EasterlyClass:
    """Classify an easterly domain from the tier letters at each handle.

    patterns[j] lists the letters of handle j+1 on the lam consecutive
    tiers; rho_E gives the boat chords at each boundary (empty by default).
    For lam = 3 one composition piece gives a composition class when its
    partner is a collision piece or every other handle is passive, and a
    pre-collision piece together with a post-collision piece gives a
    collision.  For lam = 2 a handle changing
    letter a -> b combines with a single boat chord: at the same handle
    (m, l) + r2 and (l, m) + r3 are compositions, at a passive handle the
    pair is a collision.
    """
    if lam not in (2, 3):
        raise ValueError(f"easterly domains have lambda 2 or 3, got {lam}")
    patterns = [tuple(p) for p in patterns]
    for p in patterns:
        if len(p) != lam:
            raise ValueError(f"pattern {p} does not have {lam} tiers")
    h = len(patterns)
    rho_E = ch.as_chord_set(rho_E) if rho_E is not None else tuple(() for _ in range(h))
    if len(rho_E) != h:
        raise ValueError(f"need {h} boat sequences, got {len(rho_E)}")
    kinds = [piece_kind(p) for p in patterns]
    active = [(j + 1, k) for j, k in enumerate(kinds) if k != "passive"]

    if lam == 3:
        if any(rho_E):
            return NONE
        comps = [(j, k) for j, k in active if k in ("rho1rho2", "rho2rho3")]
        partners = [k for _, k in active if k not in ("rho1rho2", "rho2rho3")]
        if len(comps) == 1 and len(partners) <= 1 and all(k in ("pre", "post") for k in partners):
            j, k = comps[0]
            return EasterlyClass(f"{k}_composition", j)
        if len(active) == 2 and sorted(k for _, k in active) == ["post", "pre"]:
            return EasterlyClass("collision")
        return NONE

    # lam == 2
    carrying = [j + 1 for j, s in enumerate(rho_E) if s]
    if len(active) != 1 or len(carrying) != 1:
        return NONE
    j, c = active[0][0], carrying[0]
    chord = _single_jump(rho_E[c - 1])
    if chord is None:
        return NONE
    a, b = patterns[j - 1]
    if c == j:
        if (a, b, chord) == ("m", "l", "r2"):
            return EasterlyClass("rho1rho2_composition", j)
        if (a, b, chord) == ("l", "m", "r3"):
            return EasterlyClass("rho2rho3_composition", j)
        return NONE
    if ta.start_idempotent(chord) != patterns[c - 1][0]:
        return NONE
    return EasterlyClass("collision")


def easterly_support(S: sp.Splayed, handles: Iterable[int]) -> set[str]:
    """Regions an easterly domain may use: approximation regions plus the
    regions at the crossings of the given handles."""
    D = S.diagram
    allowed = set(D.tagged("approx"))
    for j in handles:
        allowed |= set(D.tagged(f"N{j}"))
    return allowed


def classify_easterly(S: sp.Splayed, B_E: Domain, systems: Sequence[int], rho_E=None) -> EasterlyClass:
    """Classify a domain on the consecutive closed tiers ``systems`` of a splay."""
    systems = list(systems)
    lam = len(systems)
    if lam not in (2, 3):
        raise ValueError(f"easterly domains have lambda 2 or 3, got {lam}")
    if systems != list(range(systems[0], systems[0] + lam)):
        raise ValueError("easterly systems must be consecutive")
    rows = sp._system_rows(S)
    for s in systems:
        if rows.get(s) is None:
            raise ValueError(f"system {s} is not a closed tier of the splay")
    D = S.diagram
    if tuple(B_E.names) != tuple(D.region_names):
        raise ValueError("domain is not on this splayed diagram")
    if not B_E or not B_E.is_nonnegative():
        return NONE
    patterns = [tuple(rows[s][j] for s in systems) for j in range(D.h)]  # type: ignore[index]
    rho = ch.as_chord_set(rho_E) if rho_E is not None else tuple(() for _ in range(D.h))
    active = [j + 1 for j, p in enumerate(patterns) if len(set(p)) > 1 or rho[j]]
    allowed = easterly_support(S, active)
    if any(r not in allowed for r in B_E.support()):
        return NONE
    return classify_pieces(patterns, lam, rho)


def model_count_easterly(cls: EasterlyClass) -> int:
    return 0 if cls.kind == "none" else 1


def model_count_anchor(rho: str) -> int:
    """Each anchor moduli space with a single chord holds exactly one curve."""
    if rho not in ta.CHORDS:
        raise ValueError(f"not a Reeb chord: {rho!r}")
    return 1


# ----------------------------------------------------------------------
# count tables


@dataclass(frozen=True)
class CountEntry:
    x: str
    y: str
    domain: Domain
    boat: ChordSet
    anchor: ChordSet
    sboat: Splicing
    sanchor: Splicing
    chi_S: int
    count: int
    embedded: bool | None = None
    line: int = 0

    @property
    def rho(self) -> ChordSet:
        return ch.star(self.boat, self.anchor)

    @property
    def sigma(self) -> Splicing:
        return ch.star_splicing(self.sboat, self.sanchor)

    def format(self) -> str:
        fields = [
            self.x,
            self.y,
            f"domain={self.domain}",
            f"boat={ch.format_chord_set(self.boat)}",
            f"anchor={ch.format_chord_set(self.anchor)}",
            f"sboat={self.sboat}",
            f"sanchor={self.sanchor}",
            f"chiS={self.chi_S}",
        ]
        if self.embedded is not None:
            fields.append(f"embedded={'yes' if self.embedded else 'no'}")
        fields.append(str(self.count))
        return " ; ".join(fields)


@dataclass
class CountTable:
    diagram: Diagram
    k: int
    entries: list[CountEntry] = field(default_factory=list)

    def format(self) -> str:
        return "".join(e.format() + "\n" for e in self.entries)


def generator_labels(D: Diagram) -> dict[str, frozenset]:
    """Generators of a bordered diagram keyed by their printed form."""
    gens = dg.enumerate_generators(D, 0, 1)
    return {dg.format_generator(x): x for x in sorted(gens, key=dg.format_generator)}


def cut_count(anchor: ChordSet) -> int:
    return sum(s.count("r123") for s in anchor)


def entry_index(D: Diagram, B: Domain, chi_S: int, boat, anchor, sboat: Splicing, k: int) -> int:
    """Index of the data (B, S, boat, anchor, sboat) at level k.

    For k >= 2 this is the cut index of a (k + 1)-gon.  For k = 0, 1 there is no
    polygon to speak of and the bigon index takes its place, with the same
    Col and 123-cut corrections.
    """
    boat, anchor = ch.as_chord_set(boat), ch.as_chord_set(anchor)
    rho = ch.star(boat, anchor)
    cuts = cut_count(anchor)
    if k >= 2:
        return dg.index(D, B, chi_S, rho, sboat, cuts, mode="cut", k=k)
    return dg.index(D, B, chi_S, rho, mode="bigon") - ch.col(sboat) - cuts


def is_k_shipping(boat: ChordSet, sboat: Splicing, anchor: ChordSet, sanchor: Splicing, k: int) -> bool:
    rho, sigma = ch.star(boat, anchor), ch.star_splicing(sboat, sanchor)
    if not sigma.is_interleaved():
        # collision splicings only occur with the anchor empty
        return not any(anchor) and not sanchor.cols and (k == 0 or sigma.m == 0)
    key = (boat, sboat, anchor, sanchor)
    return any(
        (s.boat, s.boat_splicing, s.anchor, s.anchor_splicing) == key for s in ch.enumerate_shippings(rho, sigma, k)
    )


def _kv_fields(fields: list[str]) -> dict[str, str]:
    out = {}
    for f in fields:
        key, eq, value = f.partition("=")
        if not eq:
            raise ValueError(f"expected key=value, got {f!r}")
        key = key.strip()
        if key in out:
            raise ValueError(f"field {key} given twice")
        out[key] = value.strip()
    return out


REQUIRED = ("domain", "boat", "anchor", "sboat", "sanchor", "chiS")


def parse_entry(D: Diagram, fields: list[str], gens: dict[str, frozenset], k: int, line: int = 0) -> CountEntry:
    if len(fields) < 3:
        raise ValueError("expected 'x ; y ; key=value ... ; count'")
    x_txt, y_txt, *middle, count_txt = fields
    x = dg.format_generator(dg.parse_generator(x_txt))
    y = dg.format_generator(dg.parse_generator(y_txt))
    for g in (x, y):
        if g not in gens:
            raise ValueError(f"{g} is not a generator of the diagram")
    kv = _kv_fields(middle)
    missing = [f for f in REQUIRED if f not in kv]
    unknown = sorted(set(kv) - set(REQUIRED) - {"embedded"})
    if missing:
        raise ValueError(f"missing fields: {', '.join(missing)}")
    if unknown:
        raise ValueError(f"unknown fields: {', '.join(unknown)}")
    B = Domain.parse(D.region_names, kv["domain"])
    boat, anchor = ch.parse_chord_set(kv["boat"]), ch.parse_chord_set(kv["anchor"])
    sboat, sanchor = Splicing.parse(kv["sboat"]), Splicing.parse(kv["sanchor"])
    chi_S = int(kv["chiS"])
    embedded = None
    if "embedded" in kv:
        if kv["embedded"] not in ("yes", "no"):
            raise ValueError("embedded must be yes or no")
        embedded = kv["embedded"] == "yes"
    count = int(count_txt)
    if count not in (0, 1):
        raise ValueError(f"counts are mod 2, got {count}")
    for rho in (boat, anchor):
        if len(rho) != D.h:
            raise ValueError(f"need {D.h} chord sequences, got {len(rho)}")
    if not ch.splices(sboat, boat) or not ch.splices(sanchor, anchor):
        raise ValueError("splicings do not match the chord sequences")
    if not is_k_shipping(boat, sboat, anchor, sanchor, k):
        raise ValueError(f"boat and anchor do not form a {k}-shipping")
    if not dg.in_pi2(D, B, [gens[x], gens[y]]):
        raise ValueError(f"domain is not in pi_2({x}, {y})")
    rho = ch.star(boat, anchor)
    if not dg.is_rho_compatible(D, B, rho):
        raise ValueError("boundary of the domain does not match the chords")
    exp = ai.expected_idempotents(dg.idempotent_of(D, gens[x]), rho)
    if exp is None or exp[1] != dg.idempotent_of(D, gens[y]):
        raise ValueError("chords are not compatible with the idempotents of x and y")
    ind = entry_index(D, B, chi_S, boat, anchor, sboat, k)
    if ind != 2 - k:
        raise ValueError(f"index {ind} does not equal 2 - k = {2 - k}")
    return CountEntry(x, y, B, boat, anchor, sboat, sanchor, chi_S, count, embedded, line)


def parse_count_table(text: str, D: Diagram, k: int, source: str = "<counts>") -> CountTable:
    """Read and validate a count table; any bad entry is an error."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if D.kind != "bordered":
        raise PolyError("count tables live on bordered diagrams")
    gens = generator_labels(D)
    entries = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            entries.append(parse_entry(D, [f.strip() for f in line.split(";")], gens, k, lineno))
        except (ValueError, dg.DiagramError) as exc:
            raise PolyError(f"{source}:{lineno}: {exc}") from None
    return CountTable(D, k, entries)


def load_count_table(path, D: Diagram, k: int) -> CountTable:
    with open(path) as fh:
        return parse_count_table(fh.read(), D, k, str(path))


# ----------------------------------------------------------------------
# assembly


def _check_admissible(D: Diagram) -> None:
    cert = dg.admissibility_certificate(D, provincial=True)
    if cert is not None:
        raise PolyError(f"diagram is not provincially admissible; periodic domain {cert}")


def assemble_poly_k(D: Diagram, k: int, table: CountTable) -> tuple[ai.PartialMaps, ai.MultiModule]:
    """n^k(x, rho, sigma) from the counts, then m^k as the sum over interleavings."""
    if table.diagram is not D and table.diagram.region_names != D.region_names:
        raise PolyError("count table belongs to a different diagram")
    if table.k != k:
        raise PolyError(f"count table was validated at level {table.k}, not {k}")
    _check_admissible(D)
    gens = generator_labels(D)
    idem = {label: dg.idempotent_of(D, x) for label, x in gens.items()}
    n: dict = {}
    for e in table.entries:
        if e.count % 2 == 0:
            continue
        key = (e.x, e.rho, e.sigma)
        n[key] = n.get(key, frozenset()) ^ {e.y}
    N = ai.PartialMaps(tuple(gens), idem, {key: v for key, v in n.items() if v})
    N.validate()
    return N, ai.assemble_m_from_n(N)


@dataclass(frozen=True)
class Residual:
    x: str
    rho: ChordSet
    sigma: Splicing
    value: frozenset

    def format(self) -> str:
        return f"{self.x} ; {ch.format_chord_set(self.rho)} ; {self.sigma} ; {ai.format_combo(self.value)}"


@dataclass
class PolyReport:
    checked: int
    residuals: list[Residual]

    @property
    def ok(self) -> bool:
        return not self.residuals


def verify_poly(N: ai.PartialMaps, max_length: int) -> PolyReport:
    """Check the partial relation at every interleaving of every reachable input."""
    checked = 0
    bad = []
    for x, rho in ai.reachable_inputs(N, max_length):
        for sigma in ch.enumerate_interleavings(rho):
            checked += 1
            r = ai.check_partial(N, x, rho, sigma)
            if r:
                bad.append(Residual(x, rho, sigma, r))
    bad.sort(key=lambda r: (r.x, r.rho, r.sigma))
    return PolyReport(checked, bad)


# ----------------------------------------------------------------------
# the bound kappa


def boundary_weight(D: Diagram) -> list[int]:
    """Per region, the number of boundary segments a1a2, a2a3, a3a4 it holds."""
    w = [0] * len(D.regions)
    for i, r in enumerate(D.regions):
        w[i] = sum(1 for (_, k) in r.arcs if k in (1, 2, 3))
    return w


def kappa_bound(D: Diagram) -> int:
    """An upper bound for the total boundary multiplicity of a nonnegative
    domain between two generators.

    Every chord adds at least one to the boundary multiplicity, so no map
    with more than kappa input chords can be nonzero.  The bound is the
    rational maximum over each polytope pi_2(x, y) >= 0, rounded down.
    """
    if dg.admissibility_certificate(D) is not None:
        raise PolyError("kappa needs an admissible diagram")
    if D.kind != "bordered":
        return 0
    w = boundary_weight(D)
    if not any(w):
        return 0
    gens = list(generator_labels(D).values())
    n = len(D.regions)
    rows0, _ = dg.pi2_system(D, [gens[0], gens[0]])
    K = lattice.integer_kernel(rows0, n)
    best = 0
    for x in gens:
        for y in gens:
            P = dg.particular_domain(D, [x, y])
            if P is None:
                continue
            base = sum(a * b for a, b in zip(w, P.coeffs))
            if not K:
                if P.is_nonnegative():
                    best = max(best, base)
                continue
            cons = [[Fraction(v[t]) for v in K] + [Fraction(-P.coeffs[t])] for t in range(n)]
            obj = [Fraction(sum(a * b for a, b in zip(w, v))) for v in K]
            top = lattice.fm_maximum(cons, len(K), obj)
            if top is not None:
                best = max(best, base + math.floor(top))
    return best


def vanishes_above(M: ai.MultiModule, bound: int) -> bool:
    return all(sum(len(s) for s in rho) <= bound for (_, rho) in M.maps)
