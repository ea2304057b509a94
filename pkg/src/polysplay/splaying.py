"""Handles, stabilisation data and the bordered / stabilised / splayed diagrams.

The constructions run on a ribbon built from a basic diagram: the two
connecting paths of every basepoint pair are drawn, a tube is glued at their
ends, and the resulting curves are then cut open at e^inf (bordering),
thinned to one curve per handle (closed stabilisation) or copied into tiers
(splaying).

Tiers are symbolic: the copy for level i lies to the right of the copy for
level i - 1, and neighbouring copies of one curve cross twice, in two swap
zones.  The basepoints of a closed or splayed diagram sit in the quadrant Q0
at e^inf, which is also the side of b in the bordered diagram.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from . import chords as ch
from . import lattice
from . import ribbon as rb
from . import torus_algebra as ta
from .diagram import Diagram, DiagramError, Domain, delta, natural_key, subdiagram, subdiagram_map

LETTERS = ("m", "l")


class StabilisationError(ValueError):
    pass


@dataclass(frozen=True)
class Handle:
    """One handle of a stabilised diagram, with the names of its curves."""

    index: int
    kind: str = "closed"  # closed | bordered
    twist: int = 0

    @property
    def meridian(self) -> str:
        return f"am{self.index}"

    @property
    def longitude(self) -> str:
        return f"al{self.index}"

    @property
    def beta(self) -> str:
        return f"bH{self.index}"

    @property
    def basepoints(self) -> tuple[str, ...]:
        if self.kind == "bordered":
            return (f"b{self.index}",)
        return (f"w{self.index}", f"z{self.index}")

    def curve(self, letter: str) -> str:
        if letter not in LETTERS:
            raise StabilisationError(f"idempotent letter must be m or l, got {letter!r}")
        return self.meridian if letter == "m" else self.longitude


@dataclass(frozen=True)
class PairPaths:
    pair: int
    wz: tuple[str, ...]  # from w to z, avoiding alpha
    zw: tuple[str, ...]  # from z to w, avoiding beta
    twist: int = 0


@dataclass(frozen=True)
class StabilisationData:
    pairs: tuple[PairPaths, ...]
    iotas: tuple[tuple[str, ...], ...] = ()

    def with_iotas(self, iotas) -> "StabilisationData":
        return StabilisationData(self.pairs, normalise_iotas(iotas, len(self.pairs)))


def normalise_iotas(iotas, h: int) -> tuple[tuple[str, ...], ...]:
    """Accept rows as strings ("ml") or tuples and check their shape."""
    rows = []
    for row in iotas:
        row = tuple(row)
        if len(row) != h:
            raise StabilisationError(f"idempotent row {''.join(row)!r} should have {h} letters")
        for t in row:
            if t not in LETTERS:
                raise StabilisationError(f"idempotent letter must be m or l, got {t!r}")
        rows.append(row)
    return tuple(rows)


def parse_stab(D: Diagram) -> StabilisationData:
    """Read the STAB section of a basic diagram.

    Lines are ``pair <j> wz=<r>,<r>.. zw=<r>,.. [twist=<n>]`` and
    ``iota <row> <row> ..`` with rows over the letters m and l.
    """
    pairs = {}
    iotas: list[str] = []
    for lineno, line in D.extra.get("STAB", []):
        tokens = line.split()
        where = f"{D.source}:{lineno}"
        try:
            if tokens[0] == "pair":
                j = int(tokens[1])
                kv = dict(t.split("=", 1) for t in tokens[2:])
                pairs[j] = PairPaths(
                    j,
                    tuple(kv["wz"].split(",")),
                    tuple(kv["zw"].split(",")),
                    int(kv.get("twist", 0)),
                )
            elif tokens[0] == "iota":
                iotas.extend(tokens[1:])
            else:
                raise ValueError(f"unknown STAB entry {tokens[0]!r}")
        except (ValueError, KeyError, IndexError) as exc:
            raise DiagramError(f"{where}: bad STAB line ({exc})") from None
    if sorted(pairs) != list(range(1, D.h + 1)):
        raise DiagramError(f"{D.source}: STAB needs one pair line for each of 1..{D.h}")
    data = StabilisationData(tuple(pairs[j] for j in sorted(pairs)))
    try:
        return data.with_iotas(iotas)
    except StabilisationError as exc:
        raise DiagramError(f"{D.source}: {exc}") from None


def check_stab(D: Diagram, d: StabilisationData) -> None:
    """The region paths must start and end at the right basepoints and step
    across beta edges only (w to z) or alpha edges only (z to w)."""
    if D.kind != "closed":
        raise StabilisationError("stabilisation data belongs to a basic closed diagram")
    if len(d.pairs) != D.h:
        raise StabilisationError(f"need {D.h} pairs of paths, got {len(d.pairs)}")
    adjacent: dict[int, set] = {0: set(), 1: set()}
    for e in D.edges:
        s = D.curves[e.curve].system
        adjacent.setdefault(s, set()).update({(e.left, e.right), (e.right, e.left)})
    for p in d.pairs:
        w, z = D.basepoints[f"w{p.pair}"], D.basepoints[f"z{p.pair}"]
        for path, ends, system, name in ((p.wz, (w, z), 0, "wz"), (p.zw, (z, w), 1, "zw")):
            if (path[0], path[-1]) != ends:
                raise StabilisationError(
                    f"pair {p.pair}: path {name} must run from {ends[0]} to {ends[1]}, got {path[0]}..{path[-1]}"
                )
            for r in path:
                if r not in D.region:
                    raise StabilisationError(f"pair {p.pair}: unknown region {r}")
            for a, b in zip(path, path[1:]):
                if (a, b) not in adjacent[system]:
                    kind = "beta" if system == 0 else "alpha"
                    raise StabilisationError(f"pair {p.pair}: {a} and {b} are not separated by an {kind} edge")
        if p.twist != 0:
            raise StabilisationError(f"pair {p.pair}: only untwisted handles are supported")


# ----------------------------------------------------------------------
# the ribbon with handles


@dataclass
class Stabilised:
    ribbon: rb.Ribbon
    genus: int
    h: int
    alpha: list[str]
    beta: list[str]
    e: dict[int, int]  # e^inf vertex of handle j (1-based)
    q: dict[int, int]
    source: str
    handles: list[Handle] = field(default_factory=list)


def stabilised_ribbon(D: Diagram, d: StabilisationData) -> Stabilised:
    check_stab(D, d)
    R = rb.from_diagram(D)
    alpha = sorted((c.name for c in D.curves_of(1)), key=natural_key)
    beta = sorted((c.name for c in D.curves_of(0)), key=natural_key)
    blocked_a, blocked_b = set(alpha), set(beta)
    ends = {}
    for p in d.pairs:
        j = p.pair
        H = Handle(j)
        W, Z, da = R.draw_path(H.longitude, blocked_a, list(p.wz), None, None, f"x{j}")
        blocked_a.add(H.longitude)
        _, _, db = R.draw_path(H.beta, blocked_b, list(p.zw), Z, W, f"y{j}")
        blocked_b.add(H.beta)
        ends[j] = (da[0], R.twin[db[-1]], R.twin[da[-1]], db[0])
    e, q = {}, {}
    for j, (a, b, c, dd) in ends.items():
        H = Handle(j)
        e[j], q[j] = R.add_handle(a, b, c, dd, H.meridian, (f"e{j}", f"q{j}"))
    genus = D.genus + D.h
    if R.euler() != 2 - 2 * genus:
        raise StabilisationError("handle attachment produced the wrong Euler characteristic")
    handles = [Handle(p.pair, twist=p.twist) for p in d.pairs]
    return Stabilised(R, genus, D.h, alpha, beta, e, q, D.source, handles)


def _q0_dart(S: Stabilised, j: int) -> int:
    """A dart whose left face is the quadrant Q0 at e^inf_j."""
    return S.ribbon.rot[S.e[j]][1]


def _beta_specs(S: Stabilised) -> dict[str, rb.CurveSpec]:
    specs = {b: rb.CurveSpec(0) for b in S.beta}
    for H in S.handles:
        specs[H.beta] = rb.CurveSpec(0)
    return specs


def border(D: Diagram, d: StabilisationData | None = None) -> Diagram:
    """The bordering: a bordered handle glued in at every basepoint pair."""
    d = d or parse_stab(D)
    S = stabilised_ribbon(D, d)
    R = S.ribbon
    specs = _beta_specs(S)
    for a in S.alpha:
        specs[a] = rb.CurveSpec(1)
    for H in S.handles:
        j0 = H.index - 1
        specs[H.meridian] = rb.CurveSpec(1, "arc", "m", j0)
        specs[H.longitude] = rb.CurveSpec(1, "arc", "l", j0)
        R.cut_hole(S.e[H.index], j0)
    return rb.to_diagram(R, S.genus, S.h, specs, source=f"border({D.source})").diagram


def closed_stabilisation(D: Diagram, iota, d: StabilisationData | None = None) -> Diagram:
    """The closed diagram keeping alpha(iota_j) in handle j."""
    d = d or parse_stab(D)
    return splay(D, d.with_iotas([iota]))


# ----------------------------------------------------------------------
# splaying


@dataclass
class Splayed:
    """A splayed or partially splayed diagram with its construction data."""

    diagram: Diagram
    iotas: tuple[tuple[str, ...], ...]
    partial: bool
    levels: dict[str, list[int]]  # original curve -> levels it appears in
    thetas: dict[tuple[str, int, int], tuple[str, str]]  # (curve, i, i') -> zone A and B points
    export: rb.Export = field(repr=False, default=None)  # type: ignore[assignment]

    @property
    def systems(self) -> list[int]:
        return self.diagram.systems

    def copy_name(self, curve: str, level: int) -> str:
        return f"{curve}_{level}"


def _zone_segment(R: rb.Ribbon, strand: list[int]) -> int:
    """The segment of a strand holding the swap zones, away from e^inf when possible.

    Both zones sit in one segment: between two transversals the order of
    the copies must be the same everywhere, so the copies are reversed and
    then restored before the next crossing.
    """
    r = len(strand)

    def near(k):
        return R.vbase[R.origin[strand[k % r]]].startswith("e")

    cand = [k for k in range(r) if not near(k) and not near(k + 1)]
    return cand[0] if cand else 0


def _tier_curve(R: rb.Ribbon, strand: list[int], curve: str, levels: list[int]) -> list[tuple[int, int]]:
    """Relabel a strand as its first level, add copies for the others and
    let every pair of copies cross twice.  Returns the level pairs."""
    first = f"{curve}_{levels[0]}"
    for dd in strand:
        R.label[dd] = R.label[R.twin[dd]] = first
    lanes = [list(strand)]
    for lv in levels[1:]:
        lanes.append(R.copy_right(lanes[-1], f"{curve}_{lv}"))
    n = len(lanes)
    k = _zone_segment(R, strand)
    cur = [lane[k] for lane in lanes]
    pairs = []
    for zone in "AB":
        order = list(range(n))
        for i in range(n):
            for p in range(n - 1 - i):
                left, right = order[p], order[p + 1]
                if zone == "B":
                    left, right = right, left
                cur[left], cur[right] = R.swap_lanes(cur[left], cur[right], f"t{curve}{zone}")
                order[p], order[p + 1] = order[p + 1], order[p]
                if zone == "A":
                    pairs.append((levels[min(left, right)], levels[max(left, right)]))
    return pairs


def _level_plan(S: Stabilised, iotas, partial: bool) -> dict[str, list[int]]:
    shift = 1 if partial else 0
    plan: dict[str, list[int]] = {}
    count = len(iotas) + shift
    for a in S.alpha:
        plan[a] = list(range(1, count + 1))
    for H in S.handles:
        for letter in LETTERS:
            lv = [1] if partial else []
            lv += [i + 1 + shift for i, row in enumerate(iotas) if row[H.index - 1] == letter]
            plan[H.curve(letter)] = lv
    return plan


def _approx_tagger(R: rb.Ribbon, family: dict[str, str]):
    fam_at = {}
    for v, r in R.rot.items():
        fam_at[v] = {family[R.label[x]] for x in r if R.label[x] in family}

    def allowed(dd):
        s = set(fam_at[R.origin[dd]] & fam_at[R.head(dd)])
        if R.label[dd] in family:
            s.add(family[R.label[dd]])
        return s

    def tags(orbit):
        common = None
        for dd in orbit:
            a = allowed(dd)
            common = a if common is None else common & a
            if not common:
                return set()
        return {"approx"}

    return tags


def _grid_tagger(R: rb.Ribbon, family: dict[str, str], handles: list[Handle]):
    pairs = {frozenset((H.meridian, H.longitude)): f"N{H.index}" for H in handles}

    def tags(v):
        fams = frozenset(family.get(R.label[x]) for x in R.rot[v])
        t = pairs.get(fams)
        return {t} if t else set()

    return tags


def _build_splayed(D: Diagram, d: StabilisationData, partial: bool) -> Splayed:
    iotas = d.iotas
    if not iotas:
        raise StabilisationError("splaying needs at least one idempotent row")
    S = stabilised_ribbon(D, d)
    R = S.ribbon
    plan = _level_plan(S, iotas, partial)
    specs = _beta_specs(S)
    family: dict[str, str] = {}
    thetas: dict[tuple[str, int, int], tuple[str, str]] = {}
    order = list(S.alpha)
    for H in S.handles:
        order += [H.meridian, H.longitude]
    starts = {}
    for H in S.handles:
        starts[H.meridian] = R.rot[S.e[H.index]][1]
        starts[H.longitude] = R.rot[S.e[H.index]][0]
    for c in order:
        levels = plan[c]
        if not levels:
            continue
        d0 = starts.get(c)
        if d0 is None:
            d0 = min(x for x in R.darts() if R.label[x] == c and R.forward[x])
        strand = R.strand(d0)
        for i, i2 in _tier_curve(R, strand, c, levels):
            thetas[(c, i, i2)] = (f"t{c}A_{i}_{i2}", f"t{c}B_{i}_{i2}")
        for lv in levels:
            name = f"{c}_{lv}"
            family[name] = c
            if partial and lv == 1 and c not in S.alpha:
                H = next(H for H in S.handles if c in (H.meridian, H.longitude))
                specs[name] = rb.CurveSpec(1, "arc", "m" if c == H.meridian else "l", H.index - 1, lv, c)
            else:
                specs[name] = rb.CurveSpec(lv, level=lv, family=c)
    basepoints = {}
    if partial:
        for H in S.handles:
            R.cut_hole(S.e[H.index], H.index - 1)
    else:
        for H in S.handles:
            basepoints[f"w{H.index}"] = _q0_dart(S, H.index)
            basepoints[f"z{H.index}"] = _q0_dart(S, H.index)
    kind = "partial_splay" if partial else "splay"
    rows = " ".join("".join(r) for r in iotas)
    exp = rb.to_diagram(
        R,
        S.genus,
        S.h,
        specs,
        basepoints,
        face_tags=_approx_tagger(R, family),
        point_tags=_grid_tagger(R, family, S.handles),
        source=f"{kind}({D.source}; {rows})",
    )
    return Splayed(exp.diagram, iotas, partial, plan, thetas, exp)


def splay(D: Diagram, d: StabilisationData | None = None) -> Diagram:
    return splay_full(D, d).diagram


def splay_full(D: Diagram, d: StabilisationData | None = None) -> Splayed:
    """Splayed diagram with one alpha-type system per idempotent row."""
    return _build_splayed(D, d or parse_stab(D), partial=False)


def partial_splay(D: Diagram, d: StabilisationData | None = None) -> Diagram:
    return partial_splay_full(D, d).diagram


def partial_splay_full(D: Diagram, d: StabilisationData | None = None) -> Splayed:
    """Bordered alpha curves in system 1, closed tiers 2.. for the idempotent rows."""
    return _build_splayed(D, d or parse_stab(D), partial=True)


# ----------------------------------------------------------------------
# distinguished generators and nearest points


def _system_rows(S: Splayed) -> dict[int, tuple[str, ...] | None]:
    """Idempotent row of each alpha-type system; None for the bordered level."""
    shift = 2 if S.partial else 1
    rows: dict[int, tuple[str, ...] | None] = {1: None} if S.partial else {}
    for i, row in enumerate(S.iotas):
        rows[i + shift] = row
    return rows


def _partner(S: Splayed, c: str) -> str:
    for j in range(1, S.diagram.h + 1):
        H = Handle(j)
        if c in (H.meridian, H.longitude):
            return H.longitude if c == H.meridian else H.meridian
    raise StabilisationError(f"{c} is not a handle curve")


def _point_between(D: Diagram, c1: str, c2: str) -> list[str]:
    pair = {c1, c2}
    return sorted((p for p, pt in D.points.items() if {pt.lower, pt.upper} == pair), key=natural_key)


def theta_plus(S: Splayed) -> list[frozenset]:
    """The distinguished generator of every consecutive pair of alpha-type systems.

    On a curve present at both levels the point comes from the second swap
    zone (B); where handle j changes letter between the levels the slot is
    the single crossing of the two handle curves.
    """
    D = S.diagram
    out = []
    systems = [s for s in D.systems if s >= 1]
    for i, i2 in zip(systems, systems[1:]):
        pts = []
        for c, levels in S.levels.items():
            if i2 not in levels:
                continue
            if i in levels:
                pts.append(S.thetas[(c, i, i2)][1])
                continue
            # c is a handle curve and the other curve of its handle sits at level i
            other = _partner(S, c)
            hits = _point_between(D, f"{other}_{i}", f"{c}_{i2}")
            if len(hits) != 1:
                raise StabilisationError(f"expected one point between {other}_{i} and {c}_{i2}, got {len(hits)}")
            pts.append(hits[0])
        out.append(frozenset(pts))
    return out


def _split_name(p: str) -> tuple[str, int]:
    base, _, lv = p.rpartition("_")
    if not base or not lv.isdigit():
        raise StabilisationError(f"point {p} carries no level")
    return base, int(lv)


def nearest_point(S: Splayed, x, level: int) -> frozenset:
    """Move a generator of (beta, gamma^i) to the nearest copies at another level."""
    D = S.diagram
    out = []
    for p in x:
        base, _ = _split_name(p)
        q = f"{base}_{level}"
        if q not in D.points or D.system_of_point(q) != (0, level):
            raise StabilisationError(f"point {p} has no nearest point at level {level}")
        out.append(q)
    return frozenset(out)


# ----------------------------------------------------------------------
# regularisation and transport of domains


def renumber_systems(D: Diagram, order: list[int]) -> Diagram:
    """Renumber the alpha-type systems so that order[k] becomes k + 1."""
    new = {0: 0}
    new.update({s: k + 1 for k, s in enumerate(order)})
    curves = {}
    for name, c in D.curves.items():
        curves[name] = replace(c, system=new[c.system])
    return Diagram(
        D.genus, D.kind, D.h, curves, dict(D.points), list(D.regions), dict(D.basepoints), {}, D.source
    )


def regular_systems(S: Splayed, systems) -> list[int]:
    """Drop every system whose row repeats the row of the previous kept one."""
    rows = _system_rows(S)
    kept: list[int] = []
    for s in sorted(systems):
        if s not in rows:
            raise StabilisationError(f"no alpha-type system {s}")
        if kept and rows[s] is not None and rows[kept[-1]] == rows[s]:
            continue
        kept.append(s)
    return kept


def regularise(S: Splayed, systems=None) -> Diagram:
    """The subdiagram on the given systems with duplicated tiers removed and
    the remaining tiers renumbered 1, 2, .."""
    systems = list(S.systems[1:] if systems is None else systems)
    kept = regular_systems(S, systems)
    if S.diagram.kind == "bordered" and 1 not in kept:
        raise StabilisationError("a partially splayed subdiagram must keep the bordered level")
    sub = subdiagram(S.diagram, [0] + kept)
    return renumber_systems(sub, kept)


def splay_domain(S: Splayed, B: Domain, drop: int) -> tuple[Diagram, Domain]:
    """Forget the tier ``drop`` (an approximation of its neighbour).

    Multiplicities are read off the regions outside the approximation
    region; merged regions lying entirely inside it are filled in so that
    the corner conditions at the surviving points are unchanged.
    """
    D = S.diagram
    rows = _system_rows(S)
    if drop not in rows or rows[drop] is None:
        raise StabilisationError(f"system {drop} is not a closed tier")
    nbrs = [s for s in (drop - 1, drop + 1) if s in rows and rows[s] == rows[drop]]
    if not nbrs:
        raise StabilisationError(f"system {drop} is not an approximation of a neighbouring tier")
    keep = [s for s in D.systems if s != drop]
    sub, rep = subdiagram_map(D, keep)
    approx = set(D.tagged("approx"))
    known: dict[str, int] = {}
    for r, c in zip(B.names, B.coeffs):
        if r in approx:
            continue
        t = rep[r]
        if known.setdefault(t, c) != c:
            raise StabilisationError(f"no consistent transport: region {t} gets {known[t]} and {c}")
    free = [t for t in sub.region_names if t not in known]
    if free:
        # corner conditions at surviving points pin the remaining regions
        target = {p: delta(D, B, p) for p in sub.points}
        rows_, rhs = [], []
        idx = {t: k for k, t in enumerate(free)}
        for p, pt in sub.points.items():
            row = [0] * len(free)
            fixed = 0
            for k, r in enumerate(pt.quads):
                s = 1 if k in (1, 3) else -1
                if r in idx:
                    row[idx[r]] += s
                else:
                    fixed += s * known[r]
            if any(row):
                rows_.append(row)
                rhs.append(target[p] - fixed)
        sol = lattice.solve_integer(rows_, rhs, len(free)) if rows_ else [0] * len(free)
        if sol is None:
            raise StabilisationError("no consistent extension across the approximation region")
        known.update({t: v for t, v in zip(free, sol)})
    return sub, Domain.from_dict(sub.region_names, known)


def splays(S: Splayed, B_prime: Domain, drop: int, B: Domain) -> bool:
    """Does B' on the larger diagram transport to B?"""
    _, image = splay_domain(S, B_prime, drop)
    return image.names == B.names and image.coeffs == B.coeffs


# ----------------------------------------------------------------------
# the local model near e^inf
#
# After removing repeated letters, the tiers of one boundary alternate
# between meridional and longitudinal.  Meridional tiers are vertical lines
# x = t and longitudinal tiers horizontal lines y = t (t the tier index), so
# later tiers lie to the north-east and the boundary point sits south-west
# of every crossing.  At a crossing the quadrants are Q0 = SW (the side of
# the boundary point), Q1 = SE, Q2 = NE and Q3 = NW: B(r1), B(r2), B(r3)
# are single quadrants, B(r12) is the half plane east of the meridional
# tier and B(r23) the half plane north of the longitudinal one.


class DecompositionError(ValueError):
    pass


_QUADRANT = {"r1": (1,), "r2": (2,), "r3": (3,), "r123": (1, 2, 3)}
_NONJUMP = {"m": "r12", "l": "r23"}


def tier_letters(iotas, j: int) -> tuple[str, ...]:
    """Letters of handle j along the rows, repeated letters removed."""
    out: list[str] = []
    for row in iotas:
        if not out or out[-1] != row[j]:
            out.append(row[j])
    return tuple(out)


@dataclass(frozen=True)
class ReebDomainSequence:
    """D^1, B^1, .., B^k, D^{k+1}: repeated non-jumping blocks around jumps."""

    letters: tuple[str, ...]
    blocks: tuple[int, ...]  # n_t, the multiplicity of D^t
    jumps: tuple[str, ...]

    def __post_init__(self):
        if len(self.blocks) != len(self.letters) or len(self.jumps) != len(self.letters) - 1:
            raise DecompositionError("a sequence with k jumps needs k + 1 blocks and k + 1 tiers")
        for t, rho in enumerate(self.jumps):
            if ta.start_idempotent(rho) != self.letters[t] or ta.end_idempotent(rho) != self.letters[t + 1]:
                raise DecompositionError(f"chord {rho} does not run from tier {t + 1} to tier {t + 2}")
        if any(n < 0 for n in self.blocks):
            raise DecompositionError("block multiplicities must be nonnegative")

    def chords(self) -> tuple[str, ...]:
        out: list[str] = []
        for t, n in enumerate(self.blocks):
            out += [_NONJUMP[self.letters[t]]] * n
            if t < len(self.jumps):
                out.append(self.jumps[t])
        return tuple(out)

    @classmethod
    def from_chords(cls, chords, start: str | None = None) -> "ReebDomainSequence":
        """Read a coherent chord sequence as a sequence of Reeb domains."""
        chords = tuple(chords)
        if not chords:
            if start is None:
                raise DecompositionError("an empty sequence needs a starting letter")
            return cls((start,), (0,), ())
        letter = ta.start_idempotent(chords[0])
        if start is not None and start != letter:
            raise DecompositionError(f"sequence starts at {letter}, expected {start}")
        letters, blocks, jumps = [letter], [0], []
        for rho in chords:
            if ta.start_idempotent(rho) != letters[-1]:
                raise DecompositionError(f"chord {rho} does not start at idempotent {letters[-1]}")
            if ta.is_jumping(rho):
                jumps.append(rho)
                letters.append(ta.end_idempotent(rho))
                blocks.append(0)
            else:
                blocks[-1] += 1
        return cls(tuple(letters), tuple(blocks), tuple(jumps))

    def canonical(self) -> "ReebDomainSequence":
        """U(S): fold (r12, r3) and (r1, r23) into r123 wherever possible."""
        blocks, jumps = list(self.blocks), list(self.jumps)
        for t, rho in enumerate(jumps):
            if rho == "r3" and blocks[t] > 0:
                blocks[t] -= 1
                jumps[t] = "r123"
            elif rho == "r1" and blocks[t + 1] > 0:
                blocks[t + 1] -= 1
                jumps[t] = "r123"
        return ReebDomainSequence(self.letters, tuple(blocks), tuple(jumps))


class LocalGrid:
    """Cells of a neighbourhood of e^inf cut by alternating tiers."""

    def __init__(self, letters):
        letters = tuple(letters)
        if not letters:
            raise DecompositionError("need at least one tier")
        for t in range(len(letters) - 1):
            if letters[t] == letters[t + 1]:
                raise DecompositionError("consecutive tiers must alternate; regularise first")
        if any(c not in LETTERS for c in letters):
            raise DecompositionError(f"tier letters must be m or l, got {letters}")
        self.letters = letters
        self.rank: dict[int, int] = {}
        nv = nh = 0
        for t, c in enumerate(letters):
            if c == "m":
                self.rank[t], nv = nv, nv + 1
            else:
                self.rank[t], nh = nh, nh + 1
        self.cells = [(x, y) for x in range(nv + 1) for y in range(nh + 1)]
        self.index = {c: i for i, c in enumerate(self.cells)}

    @property
    def k(self) -> int:
        return len(self.letters) - 1

    def zero(self) -> list[int]:
        return [0] * len(self.cells)

    def _crossing(self, t: int) -> tuple[int, int]:
        """(vertical rank, horizontal rank) of the lines meeting at crossing t."""
        a, b = t, t + 1
        if self.letters[a] == "l":
            a, b = b, a
        return self.rank[a], self.rank[b]

    def half(self, t: int) -> list[int]:
        r = self.rank[t]
        axis = 0 if self.letters[t] == "m" else 1
        return [int(c[axis] > r) for c in self.cells]

    def quadrant(self, t: int, q: int) -> list[int]:
        v, hz = self._crossing(t)
        east, north = q in (1, 2), q in (2, 3)
        return [int((c[0] > v) == east and (c[1] > hz) == north) for c in self.cells]

    def jump_piece(self, t: int, rho: str) -> list[int]:
        out = self.zero()
        for q in _QUADRANT[rho]:
            out = [a + b for a, b in zip(out, self.quadrant(t, q))]
        return out

    def local(self, vec, t: int) -> tuple[int, int, int, int]:
        """Multiplicities in Q0..Q3 at crossing t."""
        v, hz = self._crossing(t)
        cells = ((v, hz), (v + 1, hz), (v + 1, hz + 1), (v, hz + 1))
        return tuple(vec[self.index[c]] for c in cells)  # type: ignore[return-value]

    def total(self, S: ReebDomainSequence) -> tuple[int, ...]:
        if S.letters != self.letters:
            raise DecompositionError("sequence and grid have different tiers")
        out = self.zero()
        for t, n in enumerate(S.blocks):
            out = [a + n * b for a, b in zip(out, self.half(t))]
        for t, rho in enumerate(S.jumps):
            out = [a + b for a, b in zip(out, self.jump_piece(t, rho))]
        return tuple(out)

    def jumps_across(self, vec, t: int) -> set[int]:
        """Multiplicity differences across tier t along its length."""
        r = self.rank[t]
        axis = 0 if self.letters[t] == "m" else 1
        diffs = set()
        for c in self.cells:
            if c[axis] == r:
                other = (c[0] + 1, c[1]) if axis == 0 else (c[0], c[1] + 1)
                diffs.add(vec[self.index[other]] - vec[self.index[c]])
        return diffs


def decompose_reeb_domains(grid: LocalGrid, vec) -> ReebDomainSequence:
    """Split a local class into Reeb domains, one crossing at a time.

    At crossing t with local multiplicities n1, n2, n3 in Q1..Q3:
    a meridional next tier gives D = n3 B(r23) and B = B(r2); otherwise
    n1 > n2 gives D = n2 B(r12), B = B(r1) and n1 <= n2 gives
    D = n1 B(r12), B = B(r3).  What is left has no jump across tier t.
    The result is returned in canonical (123-reduced) form.
    """
    rest = list(vec)
    if len(rest) != len(grid.cells):
        raise DecompositionError(f"expected {len(grid.cells)} cell multiplicities, got {len(rest)}")
    if rest[grid.index[(0, 0)]] != 0:
        raise DecompositionError("the cell of the boundary point must have multiplicity zero")
    blocks, jumps = [], []
    for t in range(grid.k):
        _, n1, n2, n3 = grid.local(rest, t)
        if grid.letters[t + 1] == "m":
            n, rho = n3, "r2"
        elif n1 > n2:
            n, rho = n2, "r1"
        else:
            n, rho = n1, "r3"
        if n < 0:
            raise DecompositionError(f"negative block at tier {t + 1}")
        piece = [n * a + b for a, b in zip(grid.half(t), grid.jump_piece(t, rho))]
        rest = [a - b for a, b in zip(rest, piece)]
        if grid.jumps_across(rest, t) != {0}:
            raise DecompositionError(f"inconsistent local multiplicities at crossing {t + 1}")
        blocks.append(n)
        jumps.append(rho)
    diffs = grid.jumps_across(rest, grid.k)
    if len(diffs) != 1:
        raise DecompositionError("the last tier does not carry a single non-jumping block")
    n = diffs.pop()
    if n < 0 or tuple(rest) != tuple(n * a for a in grid.half(grid.k)):
        raise DecompositionError("the remainder is not a nonnegative non-jumping block")
    blocks.append(n)
    return ReebDomainSequence(grid.letters, tuple(blocks), tuple(jumps)).canonical()


def composable_equivalent_domains(S: ReebDomainSequence, T: ReebDomainSequence) -> bool:
    """Same total class in the local grid."""
    if S.letters != T.letters:
        return False
    grid = LocalGrid(S.letters)
    return grid.total(S) == grid.total(T)


@dataclass(frozen=True)
class LocalDomain:
    """A local class at one boundary: tier letters and cell multiplicities."""

    letters: tuple[str, ...]
    cells: tuple[int, ...]

    @classmethod
    def of(cls, S: ReebDomainSequence) -> "LocalDomain":
        return cls(S.letters, LocalGrid(S.letters).total(S))


def local_domain(S: Splayed, B: Domain, j: int) -> LocalDomain:
    """Read the local class of B at handle j (1-based) off a splayed diagram.

    Each crossing of consecutive tiers contributes its four quadrants; a
    boundary without crossings is read across its single tier next to the
    basepoint region.
    """
    if S.partial:
        raise StabilisationError("local classes are read off closed splayed diagrams")
    D = S.diagram
    rows = _system_rows(S)
    systems = sorted(rows)
    letters = tier_letters([rows[s] for s in systems], j - 1)
    grid = LocalGrid(letters)
    vec: list[int | None] = [None] * len(grid.cells)

    def put(cell, value):
        i = grid.index[cell]
        if vec[i] is not None and vec[i] != value:
            raise DecompositionError(f"handle {j}: local multiplicities disagree at cell {cell}")
        vec[i] = value

    t = 0
    for s, s2 in zip(systems, systems[1:]):
        a, b = rows[s][j - 1], rows[s2][j - 1]  # type: ignore[index]
        if a == b:
            continue
        c1, c2 = f"a{a}{j}_{s}", f"a{b}{j}_{s2}"
        hits = _point_between(D, c1, c2)
        if len(hits) != 1:
            raise StabilisationError(f"expected one crossing of {c1} and {c2}")
        pt = D.points[hits[0]]
        lower_letter = D.curves[pt.lower].name[1]
        mult = [B[r] for r in pt.quads]
        if lower_letter == "m":
            if pt.sign != -1:
                raise StabilisationError(f"unexpected orientation at {hits[0]}")
            q = (mult[0], mult[3], mult[2], mult[1])
        else:
            if pt.sign != 1:
                raise StabilisationError(f"unexpected orientation at {hits[0]}")
            q = (mult[1], mult[0], mult[3], mult[2])
        v, hz = grid._crossing(t)
        for cell, value in zip(((v, hz), (v + 1, hz), (v + 1, hz + 1), (v, hz + 1)), q):
            put(cell, value)
        t += 1
    if grid.k == 0:
        w = D.basepoints[f"w{j}"]
        c = f"a{letters[0]}{j}_{systems[0]}"
        other = None
        for e in D.edges:
            if e.curve == c and w in (e.left, e.right):
                other = e.right if e.left == w else e.left
                break
        if other is None:
            raise StabilisationError(f"basepoint region of handle {j} does not meet {c}")
        put((0, 0), B[w])
        put((1, 0) if letters[0] == "m" else (0, 1), B[other])
    if any(x is None for x in vec):
        raise DecompositionError(f"handle {j}: some local cells were not read")
    return LocalDomain(letters, tuple(vec))  # type: ignore[arg-type]


def _as_local(B) -> LocalDomain:
    if isinstance(B, LocalDomain):
        return B
    if isinstance(B, ReebDomainSequence):
        return LocalDomain.of(B)
    raise TypeError(f"expected a local domain, got {type(B).__name__}")


def rho_of_domain(locals_) -> tuple[tuple[str, ...], ...]:
    """The 123-reduced chord sequences of the per-boundary local classes."""
    out = []
    for B in locals_:
        L = _as_local(B)
        S = decompose_reeb_domains(LocalGrid(L.letters), L.cells)
        out.append(ch.reduce_123(S.chords()))
    return tuple(out)


def sigma_of_domain(locals_, iotas) -> ch.Splicing:
    """The splicing read off the jumps of rho(B) and the idempotent rows."""
    return ch.splicing_from(rho_of_domain(locals_), [tuple(r) for r in iotas])
