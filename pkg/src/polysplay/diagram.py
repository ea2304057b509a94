"""Combinatorial Heegaard diagrams and multi-diagrams.

A diagram is stored as curves with ordered intersection points, a quadrant
table at every point and a list of regions.  Nothing geometric is kept:
orientations, edge sides and corner counts are all read off the quadrant
tables, and the parser cross-checks them.

Conventions used throughout:

* system 0 holds the beta curves, system 1 the alpha curves (with arcs in
  the bordered case), systems 2.. further alpha-type systems;
* at a point, q0..q3 are the four sectors in counterclockwise order, q0
  being the sector just counterclockwise of the outgoing ray of the lower
  curve (the curve of the smaller system);
* a boundary circle carries the arc endpoints a1..a4 in boundary order
  (surface on the left) and four segments: 0 contains b, k = 1..3 runs
  from a_k to a_{k+1};
* alpha^m runs from a1 to a3, alpha^l from a2 to a4.
"""

from __future__ import annotations

import itertools
import os
import re
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from . import chords as ch
from . import lattice
from . import torus_algebra as ta

SECTIONS = ("SURFACE", "CURVES", "POINTS", "REGIONS", "BASEPOINTS", "STAB")


class DiagramError(ValueError):
    pass


def natural_key(name: str):
    return [int(t) if t.isdigit() else t for t in re.split(r"(\d+)", name)]


@dataclass(frozen=True)
class Curve:
    name: str
    system: int
    kind: str  # "closed" or "arc"
    label: str | None = None  # "m" or "l" for arcs
    boundary: int | None = None  # 0-based boundary index for arcs
    points: tuple[str, ...] = ()
    sides: tuple[str, str] | None = None  # (left, right) of a point-free closed curve


@dataclass(frozen=True)
class Point:
    name: str
    lower: str
    upper: str
    quads: tuple[str, str, str, str]
    sign: int


@dataclass(frozen=True)
class Region:
    name: str
    chi: int
    corners: int
    arcs: tuple[tuple[int, int], ...] = ()  # (boundary, segment)
    tags: frozenset = frozenset()


@dataclass(frozen=True)
class Edge:
    curve: str
    index: int
    tail: str | tuple
    head: str | tuple
    left: str
    right: str


Generator = frozenset


def format_generator(x: Iterable[str]) -> str:
    return ",".join(sorted(x, key=natural_key)) or "-"


def parse_generator(text: str) -> Generator:
    text = text.strip().strip("{}")
    if text in ("", "-"):
        return frozenset()
    return frozenset(t.strip() for t in text.split(","))


# ----------------------------------------------------------------------
# domains


class Domain:
    """Integer multiplicities over the regions of a fixed diagram."""

    __slots__ = ("names", "coeffs")

    def __init__(self, names: Sequence[str], coeffs: Sequence[int]):
        if len(names) != len(coeffs):
            raise ValueError("domain length does not match the region count")
        self.names = tuple(names)
        self.coeffs = tuple(int(c) for c in coeffs)

    @classmethod
    def zero(cls, names: Sequence[str]) -> "Domain":
        return cls(names, [0] * len(names))

    @classmethod
    def from_dict(cls, names: Sequence[str], mult: dict) -> "Domain":
        index = {r: i for i, r in enumerate(names)}
        coeffs = [0] * len(names)
        for r, v in mult.items():
            if r not in index:
                raise ValueError(f"unknown region {r!r}")
            coeffs[index[r]] += v
        return cls(names, coeffs)

    @classmethod
    def parse(cls, names: Sequence[str], text: str) -> "Domain":
        text = text.strip()
        mult: dict[str, int] = defaultdict(int)
        if text not in ("", "0"):
            for item in text.split(","):
                r, _, v = item.strip().partition(":")
                mult[r.strip()] += int(v) if v else 1
        return cls.from_dict(names, mult)

    def __getitem__(self, region: str) -> int:
        return self.coeffs[self.names.index(region)]

    def as_dict(self) -> dict[str, int]:
        return {r: c for r, c in zip(self.names, self.coeffs) if c}

    def _check(self, other: "Domain") -> None:
        if self.names != other.names:
            raise ValueError("domains live on different diagrams")

    def __add__(self, other: "Domain") -> "Domain":
        self._check(other)
        return Domain(self.names, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other: "Domain") -> "Domain":
        self._check(other)
        return Domain(self.names, [a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self) -> "Domain":
        return Domain(self.names, [-a for a in self.coeffs])

    def __rmul__(self, k: int) -> "Domain":
        return Domain(self.names, [k * a for a in self.coeffs])

    def __eq__(self, other) -> bool:
        return isinstance(other, Domain) and self.names == other.names and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash((self.names, self.coeffs))

    def __bool__(self) -> bool:
        return any(self.coeffs)

    def is_nonnegative(self) -> bool:
        return all(c >= 0 for c in self.coeffs)

    def support(self) -> list[str]:
        return [r for r, c in zip(self.names, self.coeffs) if c]

    def __str__(self) -> str:
        items = [f"{r}:{c}" for r, c in zip(self.names, self.coeffs) if c]
        return ",".join(items) if items else "0"

    def __repr__(self) -> str:
        return f"Domain({str(self)!r})"


# ----------------------------------------------------------------------
# the diagram


@dataclass
class Diagram:
    genus: int
    kind: str  # "closed" or "bordered"
    h: int
    curves: dict[str, Curve]
    points: dict[str, Point]
    regions: list[Region]
    basepoints: dict[str, str] = field(default_factory=dict)  # name -> region
    extra: dict[str, list[tuple[int, str]]] = field(default_factory=dict)
    source: str = "<diagram>"
    lines: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        self.region_names = tuple(r.name for r in self.regions)
        self.region = {r.name: r for r in self.regions}
        self.region_index = {r.name: i for i, r in enumerate(self.regions)}
        self._validate()

    # -- helpers ---------------------------------------------------------

    def where(self, name: str | None = None) -> str:
        if name is not None and name in self.lines:
            return f"{self.source}:{self.lines[name]}"
        return self.source

    def fail(self, msg: str, name: str | None = None):
        raise DiagramError(f"{self.where(name)}: {msg}")

    @property
    def systems(self) -> list[int]:
        return sorted({c.system for c in self.curves.values()})

    def curves_of(self, system: int) -> list[Curve]:
        return [c for c in self.curves.values() if c.system == system]

    def system_of_point(self, p: str) -> tuple[int, int]:
        pt = self.points[p]
        return self.curves[pt.lower].system, self.curves[pt.upper].system

    @property
    def boundary_count(self) -> int:
        return self.h if self.kind == "bordered" else 0

    @property
    def g_prime(self) -> int:
        """Size of a generator: genus plus h minus one."""
        return self.genus + self.h - 1

    def zero(self) -> Domain:
        return Domain.zero(self.region_names)

    def domain(self, mult: dict | str) -> Domain:
        if isinstance(mult, str):
            return Domain.parse(self.region_names, mult)
        return Domain.from_dict(self.region_names, mult)

    def unit(self, region: str) -> Domain:
        return Domain.from_dict(self.region_names, {region: 1})

    def tagged(self, tag: str) -> list[str]:
        return [r.name for r in self.regions if tag in r.tags]

    def segment_region(self, j: int, k: int) -> str:
        return self._segment[(j, k)]

    def basepoint_regions(self) -> set[str]:
        return set(self.basepoints.values())

    def boundary_regions(self) -> set[str]:
        return {r.name for r in self.regions if r.arcs}

    # -- sides and edges -------------------------------------------------

    def out_sides(self, p: str, curve: str) -> tuple[str, str]:
        pt = self.points[p]
        q = pt.quads
        if curve == pt.lower:
            return q[0], q[3]
        if pt.sign > 0:
            return q[1], q[0]
        return q[3], q[2]

    def in_sides(self, p: str, curve: str) -> tuple[str, str]:
        pt = self.points[p]
        q = pt.quads
        if curve == pt.lower:
            return q[1], q[2]
        if pt.sign > 0:
            return q[2], q[3]
        return q[0], q[1]

    def _endpoint_sides(self, j: int, a: int, outgoing: bool) -> tuple[str, str]:
        after = self._segment.get((j, a % 4))
        before = self._segment.get((j, a - 1))
        if after is None or before is None:
            self.fail(f"boundary {j + 1} has an uncovered segment next to a{a}")
        return (before, after) if outgoing else (after, before)

    def _curve_edges(self, c: Curve) -> list[Edge]:
        pts = list(c.points)
        edges = []
        if c.kind == "closed":
            if not pts:
                if c.sides is None:
                    self.fail(f"point-free closed curve {c.name} needs sides=", c.name)
                return []
            for i, p in enumerate(pts):
                q = pts[(i + 1) % len(pts)]
                left, right = self.out_sides(p, c.name)
                l2, r2 = self.in_sides(q, c.name)
                if (left, right) != (l2, r2):
                    self.fail(
                        f"curve {c.name}: sides leaving {p} are {left}/{right} "
                        f"but sides entering {q} are {l2}/{r2}",
                        c.name,
                    )
                edges.append(Edge(c.name, i, p, q, left, right))
            return edges
        j = c.boundary
        start, end = (1, 3) if c.label == "m" else (2, 4)
        nodes: list = [("bd", j, start)] + pts + [("bd", j, end)]
        for i in range(len(nodes) - 1):
            u, v = nodes[i], nodes[i + 1]
            if isinstance(u, tuple):
                left, right = self._endpoint_sides(j, start, True)
            else:
                left, right = self.out_sides(u, c.name)
            if isinstance(v, tuple):
                l2, r2 = self._endpoint_sides(j, end, False)
            else:
                l2, r2 = self.in_sides(v, c.name)
            if (left, right) != (l2, r2):
                self.fail(
                    f"arc {c.name}: side mismatch on edge {i} ({left}/{right} vs {l2}/{r2})",
                    c.name,
                )
            edges.append(Edge(c.name, i, u, v, left, right))
        return edges

    # -- validation ------------------------------------------------------

    def _validate(self) -> None:
        if self.kind not in ("closed", "bordered"):
            self.fail(f"surface kind must be closed or bordered, not {self.kind!r}")
        if self.genus < 0 or self.h < 1:
            self.fail("need g >= 0 and h >= 1")
        if len(set(self.region_names)) != len(self.region_names):
            self.fail("duplicate region names")
        nb = self.boundary_count

        # boundary segments
        self._segment: dict[tuple[int, int], str] = {}
        for r in self.regions:
            for j, k in r.arcs:
                if not (0 <= j < nb and 0 <= k < 4):
                    self.fail(f"region {r.name}: boundary arc {j + 1}:{k} out of range", r.name)
                if (j, k) in self._segment:
                    self.fail(
                        f"boundary arc {j + 1}:{k} covered by both {self._segment[(j, k)]} and {r.name}",
                        r.name,
                    )
                self._segment[(j, k)] = r.name
        for j in range(nb):
            for k in range(4):
                if (j, k) not in self._segment:
                    self.fail(f"boundary arc {j + 1}:{k} is not covered by any region")

        # curves and points
        on_curve: dict[str, list[str]] = defaultdict(list)
        for c in self.curves.values():
            if c.kind not in ("closed", "arc"):
                self.fail(f"curve {c.name}: kind must be closed or arc", c.name)
            if c.kind == "arc":
                if self.kind != "bordered":
                    self.fail(f"arc {c.name} in a closed diagram", c.name)
                if c.system != 1:
                    self.fail(f"arc {c.name} must belong to system 1", c.name)
                if c.label not in ("m", "l") or c.boundary is None or not 0 <= c.boundary < nb:
                    self.fail(f"arc {c.name} needs label m|l and a valid boundary", c.name)
            if len(set(c.points)) != len(c.points):
                self.fail(f"curve {c.name} passes through a point twice", c.name)
            for p in c.points:
                if p not in self.points:
                    self.fail(f"curve {c.name} lists unknown point {p}", c.name)
                on_curve[p].append(c.name)
            if c.sides is not None:
                for r in c.sides:
                    if r not in self.region:
                        self.fail(f"curve {c.name}: unknown region {r}", c.name)
        for p, pt in self.points.items():
            for cname in (pt.lower, pt.upper):
                if cname not in self.curves:
                    self.fail(f"point {p} names unknown curve {cname}", p)
            a, b = self.curves[pt.lower].system, self.curves[pt.upper].system
            if a >= b:
                self.fail(f"point {p}: lower curve must be in a smaller system than the upper", p)
            if sorted(on_curve[p]) != sorted([pt.lower, pt.upper]):
                self.fail(f"point {p} is not listed exactly on {pt.lower} and {pt.upper}", p)
            for r in pt.quads:
                if r not in self.region:
                    self.fail(f"point {p}: unknown region {r}", p)
            if pt.sign not in (1, -1):
                self.fail(f"point {p}: sign must be + or -", p)

        # curve counts
        gp = self.g_prime
        for s in self.systems:
            cs = self.curves_of(s)
            closed = sum(1 for c in cs if c.kind == "closed")
            arcs = [c for c in cs if c.kind == "arc"]
            if self.kind == "bordered" and s == 1:
                want = (self.genus - 1, 2 * nb)
                labels = sorted((c.boundary, c.label) for c in arcs)
                if labels != sorted((j, t) for j in range(nb) for t in "lm"):
                    self.fail("system 1 needs one m-arc and one l-arc per boundary")
                if (closed, len(arcs)) != want:
                    self.fail(f"system 1 has {closed} closed curves and {len(arcs)} arcs, expected {want}")
            elif closed != gp or arcs:
                self.fail(f"system {s} has {closed} closed curves, expected {gp}")

        # edges
        self.edges: list[Edge] = []
        touched = set()
        for c in self.curves.values():
            es = self._curve_edges(c)
            self.edges.extend(es)
            for e in es:
                touched.update((e.left, e.right))
            if c.sides:
                touched.update(c.sides)
        for r in self.regions:
            if r.name not in touched and len(self.regions) > 1:
                self.fail(f"region {r.name} touches no curve", r.name)

        # corners and Euler characteristic
        slots: dict[str, int] = defaultdict(int)
        for pt in self.points.values():
            for r in pt.quads:
                slots[r] += 1
        for r in self.regions:
            want = slots[r.name] + 2 * len(r.arcs)
            if r.corners != want:
                self.fail(f"region {r.name} declares {r.corners} corners, tables give {want}", r.name)
        n_arcs = sum(1 for c in self.curves.values() if c.kind == "arc")
        chi = sum(r.chi for r in self.regions) - len(self.points) - n_arcs
        if chi != 2 - 2 * self.genus - nb:
            self.fail(f"Euler characteristic {chi} does not match g={self.genus} with {nb} boundary circles")

        # basepoints
        for name, r in self.basepoints.items():
            if r not in self.region:
                self.fail(f"basepoint {name} sits in unknown region {r}", name)
            if name[0] not in "wzb" or not name[1:].isdigit():
                self.fail(f"basepoint name {name!r} must be w<j>, z<j> or b<j>", name)
        if self.kind == "bordered":
            for j in range(nb):
                b = f"b{j + 1}"
                seg0 = self._segment[(j, 0)]
                if self.basepoints.setdefault(b, seg0) != seg0:
                    self.fail(f"{b} must lie in {seg0}, the region containing boundary arc {j + 1}:0", b)
            extra = [n for n in self.basepoints if n[0] != "b"]
            if extra:
                self.fail(f"bordered diagrams carry only b basepoints, found {extra}")
        else:
            want = {f"{t}{j + 1}" for j in range(self.h) for t in "wz"}
            if set(self.basepoints) != want:
                self.fail(f"closed diagram needs basepoints {sorted(want, key=natural_key)}")

    # -- derived data ----------------------------------------------------

    def merge_components(self, keep_curves: Iterable[str]) -> dict[str, str]:
        """Map each region to a representative of its component in the
        complement of the given curves (all other curves are ignored)."""
        keep = set(keep_curves)
        parent = {r: r for r in self.region_names}

        def find(r):
            while parent[r] != r:
                parent[r] = parent[parent[r]]
                r = parent[r]
            return r

        def union(a, b):
            ra, rb = find(a), find(b)
            if ra != rb:
                if self.region_index[ra] < self.region_index[rb]:
                    parent[rb] = ra
                else:
                    parent[ra] = rb

        for e in self.edges:
            if e.curve not in keep:
                union(e.left, e.right)
        for c in self.curves.values():
            if c.sides and c.name not in keep:
                union(*c.sides)
        return {r: find(r) for r in self.region_names}

    def homologically_independent(self) -> bool:
        """Every component of the complement of each system meets a basepoint."""
        marked = self.basepoint_regions()
        for s in self.systems:
            comp = self.merge_components(c.name for c in self.curves_of(s))
            hit = {comp[r] for r in marked}
            if set(comp.values()) - hit:
                return False
        return True


# ----------------------------------------------------------------------
# parsing and formatting


def _kv(tokens: Iterable[str]) -> dict[str, str]:
    out = {}
    for t in tokens:
        k, sep, v = t.partition("=")
        if not sep:
            raise ValueError(f"expected key=value, got {t!r}")
        out[k] = v
    return out


def _split_list(v: str) -> list[str]:
    return [t for t in (s.strip() for s in v.split(",")) if t]


def parse_diagram(text: str, source: str = "<diagram>") -> Diagram:
    section = None
    surface = None
    curves: dict[str, Curve] = {}
    points: dict[str, Point] = {}
    regions: list[Region] = []
    basepoints: dict[str, str] = {}
    extra: dict[str, list[tuple[int, str]]] = defaultdict(list)
    lines: dict[str, int] = {}

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line in SECTIONS:
            section = line
            continue
        where = f"{source}:{lineno}"
        tokens = line.split()
        try:
            if section is None:
                raise ValueError("content before the first section header")
            if section == "SURFACE":
                kv = _kv(tokens)
                surface = (int(kv["g"]), int(kv["h"]), kv.get("kind", "closed"))
            elif section == "CURVES":
                if len(tokens) < 3:
                    raise ValueError("expected '<system> <id> closed|arc:m|arc:l ...'")
                system, name, kind = int(tokens[0]), tokens[1], tokens[2]
                if name in curves:
                    raise ValueError(f"duplicate curve {name}")
                rest = tokens[3:]
                boundary = None
                if kind.startswith("arc:"):
                    if not rest or "=" in rest[0]:
                        raise ValueError("arc needs a boundary index")
                    boundary = int(rest[0]) - 1
                    rest = rest[1:]
                kv = _kv(rest)
                label = kind[4:] if kind.startswith("arc:") else None
                kind = "arc" if label else kind
                if kind not in ("closed", "arc"):
                    raise ValueError(f"unknown curve kind {tokens[2]!r}")
                sides = None
                if "sides" in kv:
                    left, _, right = kv["sides"].partition("/")
                    sides = (left, right)
                curves[name] = Curve(
                    name, system, kind, label, boundary, tuple(_split_list(kv.get("points", ""))), sides
                )
                lines[name] = lineno
            elif section == "POINTS":
                if len(tokens) != 5:
                    raise ValueError("expected '<id> <lower> <upper> q0,q1,q2,q3 +|-'")
                name, lower, upper, quads, sign = tokens
                q = _split_list(quads)
                if len(q) != 4:
                    raise ValueError("a point needs four quadrant regions")
                if sign not in "+-":
                    raise ValueError("sign must be + or -")
                if name in points:
                    raise ValueError(f"duplicate point {name}")
                points[name] = Point(name, lower, upper, tuple(q), 1 if sign == "+" else -1)
                lines[name] = lineno
            elif section == "REGIONS":
                name = tokens[0]
                kv = _kv(tokens[1:])
                arcs = []
                for item in _split_list(kv.get("arcs", "")):
                    j, _, k = item.partition(":")
                    arcs.append((int(j) - 1, int(k)))
                regions.append(
                    Region(
                        name,
                        int(kv["chi"]),
                        int(kv["corners"]),
                        tuple(arcs),
                        frozenset(_split_list(kv.get("tags", ""))),
                    )
                )
                lines[name] = lineno
            elif section == "BASEPOINTS":
                if len(tokens) != 2:
                    raise ValueError("expected '<name> <region>'")
                basepoints[tokens[0]] = tokens[1]
                lines[tokens[0]] = lineno
            else:
                extra[section].append((lineno, line))
        except (ValueError, KeyError) as exc:
            msg = f"missing field {exc}" if isinstance(exc, KeyError) else str(exc)
            raise DiagramError(f"{where}: {msg}") from None
    if surface is None:
        raise DiagramError(f"{source}: missing SURFACE section")
    g, h, kind = surface
    return Diagram(g, kind, h, curves, points, regions, basepoints, dict(extra), source, lines)


def load_diagram(path) -> Diagram:
    with open(path) as fh:
        return parse_diagram(fh.read(), str(path))


def format_diagram(D: Diagram) -> str:
    out = ["SURFACE", f"g={D.genus} h={D.h} kind={D.kind}", "CURVES"]
    for c in sorted(D.curves.values(), key=lambda c: (c.system, natural_key(c.name))):
        kind = f"arc:{c.label} {c.boundary + 1}" if c.kind == "arc" else "closed"
        line = f"{c.system} {c.name} {kind}"
        if c.points:
            line += " points=" + ",".join(c.points)
        if c.sides:
            line += f" sides={c.sides[0]}/{c.sides[1]}"
        out.append(line)
    out.append("POINTS")
    for p in sorted(D.points.values(), key=lambda p: natural_key(p.name)):
        out.append(f"{p.name} {p.lower} {p.upper} {','.join(p.quads)} {'+' if p.sign > 0 else '-'}")
    out.append("REGIONS")
    for r in D.regions:
        line = f"{r.name} chi={r.chi} corners={r.corners}"
        if r.arcs:
            line += " arcs=" + ",".join(f"{j + 1}:{k}" for j, k in r.arcs)
        if r.tags:
            line += " tags=" + ",".join(sorted(r.tags))
        out.append(line)
    bps = {n: r for n, r in D.basepoints.items() if not (D.kind == "bordered" and n[0] == "b")}
    if bps:
        out.append("BASEPOINTS")
        for n in sorted(bps, key=natural_key):
            out.append(f"{n} {bps[n]}")
    for sec, body in D.extra.items():
        out.append(sec)
        out.extend(line for _, line in body)
    return "\n".join(out) + "\n"


# ----------------------------------------------------------------------
# generators


def _curve_of(D: Diagram, p: str, system: int) -> str:
    pt = D.points[p]
    return pt.lower if D.curves[pt.lower].system == system else pt.upper


def enumerate_generators(D: Diagram, i: int, j: int) -> list[Generator]:
    """All generators between systems i and j, in a fixed order."""
    a, b = sorted((i, j))
    if a == b:
        raise ValueError("a generator needs two different curve systems")
    cand = [p for p in D.points if D.system_of_point(p) == (a, b)]
    by_curve: dict[str, list[str]] = defaultdict(list)
    for p in sorted(cand, key=natural_key):
        by_curve[_curve_of(D, p, a)].append(p)
    lower = sorted(D.curves_of(a), key=lambda c: (c.kind != "closed", natural_key(c.name)))
    out = []

    def arcs_ok(used_curves: set[str]) -> bool:
        for s in (a, b):
            for bd in range(D.boundary_count):
                arcs = [c.name for c in D.curves_of(s) if c.kind == "arc" and c.boundary == bd]
                if arcs and sum(1 for c in arcs if c in used_curves) != 1:
                    return False
        return True

    def walk(k: int, chosen: list[str], used: set[str], used_lower: set[str]):
        if k == len(lower):
            closed_b = {c.name for c in D.curves_of(b) if c.kind == "closed"}
            if closed_b <= used and arcs_ok(used | used_lower):
                out.append(frozenset(chosen))
            return
        c = lower[k]
        if c.kind == "arc":
            walk(k + 1, chosen, used, used_lower)
        for p in by_curve.get(c.name, ()):
            other = _curve_of(D, p, b)
            if other in used:
                continue
            chosen.append(p)
            walk(k + 1, chosen, used | {other}, used_lower | {c.name})
            chosen.pop()

    walk(0, [], set(), set())
    out.sort(key=lambda x: [natural_key(p) for p in sorted(x, key=natural_key)])
    return out


def idempotent_of(D: Diagram, x: Iterable[str]) -> tuple[str, ...]:
    """Slot j is the label of the arc at boundary j that carries a point of x."""
    if D.kind != "bordered":
        raise ValueError("idempotents are only defined for bordered diagrams")
    slots: list[str | None] = [None] * D.h
    for p in x:
        pt = D.points[p]
        for cname in (pt.lower, pt.upper):
            c = D.curves[cname]
            if c.kind == "arc":
                if slots[c.boundary] is not None:
                    raise ValueError(f"generator occupies both arcs at boundary {c.boundary + 1}")
                slots[c.boundary] = c.label
    if None in slots:
        raise ValueError("generator misses an arc pair")
    return tuple(slots)  # type: ignore[return-value]


# ----------------------------------------------------------------------
# the linear conditions behind pi_2


def delta(D: Diagram, B: Domain, p: str) -> int:
    """Coefficient of p in the boundary of the lower-curve part of dB."""
    n = [B.coeffs[D.region_index[r]] for r in D.points[p].quads]
    return n[1] + n[3] - n[0] - n[2]


def _delta_row(D: Diagram, p: str) -> list[int]:
    row = [0] * len(D.regions)
    for k, r in enumerate(D.points[p].quads):
        row[D.region_index[r]] += 1 if k in (1, 3) else -1
    return row


def _jump_row(D: Diagram, left: str, right: str) -> list[int]:
    row = [0] * len(D.regions)
    row[D.region_index[left]] += 1
    row[D.region_index[right]] -= 1
    return row


def _base_rows(D: Diagram, systems: Sequence[int] | None, provincial: bool = False) -> list[list[int]]:
    rows = []
    S = set(D.systems if systems is None else systems)
    for p in sorted(D.points, key=natural_key):
        rows.append(_delta_row(D, p))
    for e in D.edges:
        if D.curves[e.curve].system not in S:
            rows.append(_jump_row(D, e.left, e.right))
    for c in D.curves.values():
        if c.sides and c.system not in S:
            rows.append(_jump_row(D, *c.sides))
    zero_regions = set(D.basepoint_regions())
    if provincial:
        zero_regions |= D.boundary_regions()
    for r in sorted(zero_regions, key=D.region_index.get):
        row = [0] * len(D.regions)
        row[D.region_index[r]] = 1
        rows.append(row)
    return rows


def _default_systems(gens: Sequence) -> tuple[int, ...]:
    return (0, 1) if len(gens) == 2 else tuple(range(len(gens)))


def _targets(D: Diagram, gens: Sequence[Iterable[str]], systems: Sequence[int]) -> dict[str, int]:
    if len(gens) != len(systems):
        raise ValueError("need one generator per curve system in the cycle")
    target: dict[str, int] = defaultdict(int)
    n = len(systems)
    for k, x in enumerate(gens):
        u, v = systems[k], systems[(k + 1) % n]
        for p in x:
            if p not in D.points:
                raise ValueError(f"unknown point {p}")
            if D.system_of_point(p) != tuple(sorted((u, v))):
                raise ValueError(f"point {p} does not lie between systems {u} and {v}")
            target[p] += 1 if u < v else -1
    return target


def pi2_system(
    D: Diagram, gens: Sequence[Iterable[str]], systems: Sequence[int] | None = None
) -> tuple[list[list[int]], list[int]]:
    """Rows and right-hand side of the linear system cutting out pi_2."""
    systems = tuple(systems) if systems is not None else _default_systems(gens)
    target = _targets(D, gens, systems)
    rows = _base_rows(D, systems)
    pts = sorted(D.points, key=natural_key)
    rhs = [target.get(p, 0) for p in pts] + [0] * (len(rows) - len(pts))
    return rows, rhs


def in_pi2(D: Diagram, B: Domain, gens: Sequence[Iterable[str]], systems: Sequence[int] | None = None) -> bool:
    """Is B a domain connecting the generator cycle gens?

    gens[k] connects systems[k] to systems[k+1] (cyclically); with two
    generators (x, y) and the default systems this is pi_2(x, y).
    """
    rows, rhs = pi2_system(D, gens, systems)
    return all(sum(a * b for a, b in zip(row, B.coeffs)) == t for row, t in zip(rows, rhs))


def particular_domain(
    D: Diagram, gens: Sequence[Iterable[str]], systems: Sequence[int] | None = None
) -> Domain | None:
    """Some element of pi_2(gens), or None when the class set is empty."""
    rows, rhs = pi2_system(D, gens, systems)
    sol = lattice.solve_integer(rows, rhs, len(D.regions))
    return None if sol is None else Domain(D.region_names, sol)


# ----------------------------------------------------------------------
# periodic domains and admissibility


def periodic_domain_basis(D: Diagram, systems: Sequence[int] | None = None, provincial: bool = False) -> list[Domain]:
    rows = _base_rows(D, systems, provincial)
    return [Domain(D.region_names, v) for v in lattice.integer_kernel(rows, len(D.regions))]


def is_periodic(D: Diagram, B: Domain, systems: Sequence[int] | None = None) -> bool:
    rows = _base_rows(D, systems)
    return all(sum(a * b for a, b in zip(row, B.coeffs)) == 0 for row in rows)


def is_provincial(D: Diagram, B: Domain) -> bool:
    """Zero on every region that meets the boundary."""
    return all(B[r] == 0 for r in D.boundary_regions())


def admissibility_certificate(
    D: Diagram, provincial: bool = False, systems: Sequence[int] | None = None
) -> Domain | None:
    """A nonzero nonnegative (provincial) periodic domain, or None."""
    basis = periodic_domain_basis(D, systems, provincial)
    coeffs = lattice.nonnegative_combination([b.coeffs for b in basis])
    if coeffs is None:
        return None
    return Domain(D.region_names, lattice.combine([b.coeffs for b in basis], coeffs))


def is_admissible(D: Diagram, systems: Sequence[int] | None = None) -> bool:
    return admissibility_certificate(D, False, systems) is None


def is_provincially_admissible(D: Diagram) -> bool:
    return admissibility_certificate(D, True) is None


def brute_force_admissible(D: Diagram, provincial: bool = False, bound: int = 5) -> bool:
    """Box search over basis coefficients; an independent check of the above."""
    basis = [b.coeffs for b in periodic_domain_basis(D, None, provincial)]
    return lattice.brute_force_nonnegative(basis, bound) is None


DOMAIN_BOX = int(os.environ.get("POLYSPLAY_DOMAIN_BOX", "4"))


def nonnegative_domains(
    D: Diagram,
    gens: Sequence[Iterable[str]],
    systems: Sequence[int] | None = None,
    max_total: int | None = None,
    box: int | None = None,
) -> list[Domain]:
    """Nonnegative elements of pi_2(gens) found in a box of periodic coefficients.

    The search covers particular + sum c_i P_i with |c_i| <= box (default
    POLYSPLAY_DOMAIN_BOX).  Results are sorted by total multiplicity.
    """
    P = particular_domain(D, gens, systems)
    if P is None:
        return []
    basis = [b.coeffs for b in periodic_domain_basis(D, systems)]
    box = DOMAIN_BOX if box is None else box
    found = set()
    for c in itertools.product(range(-box, box + 1), repeat=len(basis)):
        v = [a + b for a, b in zip(P.coeffs, lattice.combine(basis, c))] if basis else list(P.coeffs)
        if min(v, default=0) < 0:
            continue
        if max_total is not None and sum(v) > max_total:
            continue
        found.add(tuple(v))
    return [Domain(D.region_names, v) for v in sorted(found, key=lambda v: (sum(v), v))]


# ----------------------------------------------------------------------
# measures and indices


def region_euler(D: Diagram, region: str) -> Fraction:
    r = D.region[region]
    return Fraction(r.chi) - Fraction(r.corners, 4)


def euler_measure(D: Diagram, B: Domain) -> Fraction:
    return sum((c * region_euler(D, r) for r, c in zip(B.names, B.coeffs)), Fraction(0))


def point_measure(D: Diagram, B: Domain, x: Iterable[str]) -> Fraction:
    """n_x(B): the average of the four quadrant multiplicities, summed over x."""
    total = Fraction(0)
    for p in x:
        total += Fraction(sum(B[r] for r in D.points[p].quads), 4)
    return total


def embedded_chi_bigon(D: Diagram, B: Domain, x: Iterable[str], y: Iterable[str]) -> Fraction:
    """Source Euler characteristic of an embedded bigon with no east punctures."""
    return D.g_prime + euler_measure(D, B) - point_measure(D, B, x) - point_measure(D, B, y)


def embedded_chi(D: Diagram, B: Domain, gens: Sequence[Iterable[str]]) -> Fraction:
    """Embedded Euler characteristic of an n-gon with the given corners.

    (4 - n)/2 g' + e(B) - sum of n_x(B) over the corners; for n = 2 this
    is the bigon formula above.
    """
    n = len(gens)
    total = Fraction(4 - n, 2) * D.g_prime + euler_measure(D, B)
    for x in gens:
        total -= point_measure(D, B, x)
    return total


def boundary_class(D: Diagram, B: Domain, j: int) -> tuple[int, int, int]:
    """Multiplicities of B along a1a2, a2a3, a3a4 of boundary j (0-based)."""
    if D.kind != "bordered":
        raise ValueError("boundary classes need a bordered diagram")
    return tuple(B[D.segment_region(j, k)] for k in (1, 2, 3))  # type: ignore[return-value]


def is_rho_compatible(D: Diagram, B: Domain, rho) -> bool:
    rho = ch.as_chord_set(rho)
    if len(rho) != D.h:
        raise ValueError(f"need {D.h} chord sequences, got {len(rho)}")
    return all(boundary_class(D, B, j) == ta.sequence_homology(s) for j, s in enumerate(rho))


INDEX_MODES = ("bigon", "polygon", "bordered", "cut")


def index(
    D: Diagram,
    B: Domain,
    chi_S: int,
    rho=None,
    sigma: ch.Splicing | None = None,
    cut_count: int = 0,
    mode: str = "bigon",
    k: int = 1,
) -> int:
    """Expected dimension from the index formulas, with g' = g + h - 1.

    bigon:    g' - chi + 2e + |rho|
    polygon:  (3 - k)/2 g' - chi + 2e             (k + 1 corners)
    bordered: polygon + |rho| - Col(sigma)
    cut:      bordered - cut_count

    So k = 1 is a bigon and k = 2 a triangle.
    """
    if mode not in INDEX_MODES:
        raise ValueError(f"mode must be one of {INDEX_MODES}")
    rho = ch.as_chord_set(rho) if rho is not None else ()
    length = sum(len(s) for s in rho)
    e2 = 2 * euler_measure(D, B)
    gp = D.g_prime
    if mode == "bigon":
        value = gp - chi_S + e2 + length
    else:
        value = Fraction(3 - k, 2) * gp - chi_S + e2
        if mode in ("bordered", "cut"):
            value += length - (ch.col(sigma) if sigma is not None else 0)
        if mode == "cut":
            value -= cut_count
    value = Fraction(value)
    if value.denominator != 1:
        raise ValueError(f"index {value} is not an integer; corner data is inconsistent")
    return int(value)


# ----------------------------------------------------------------------
# subdiagrams


def subdiagram_map(D: Diagram, systems: Iterable[int]) -> tuple[Diagram, dict[str, str]]:
    """Restrict to the given curve systems, merging regions across the rest.

    Returns the new diagram and the map from old to new region names.
    """
    S = set(systems)
    if not S:
        raise ValueError("a subdiagram needs at least one curve system")
    if D.kind == "bordered" and 1 not in S:
        raise ValueError("a bordered subdiagram must keep the arc system 1")
    unknown = S - set(D.systems)
    if unknown:
        raise ValueError(f"no curve systems {sorted(unknown)}")
    keep = {c.name for c in D.curves.values() if c.system in S}
    rep = D.merge_components(keep)
    kept_points = {p for p, pt in D.points.items() if pt.lower in keep and pt.upper in keep}

    chi: dict[str, int] = defaultdict(int)
    arcs: dict[str, list] = defaultdict(list)
    tags: dict[str, set] = defaultdict(set)
    for r in D.regions:
        t = rep[r.name]
        chi[t] += r.chi
        arcs[t].extend(r.arcs)
        tags[t] |= r.tags
    for e in D.edges:
        if e.curve not in keep:
            chi[rep[e.left]] -= 1
    for pt in D.points.values():
        if pt.lower not in keep and pt.upper not in keep:
            chi[rep[pt.quads[0]]] += 1

    corners: dict[str, int] = defaultdict(int)
    for p in kept_points:
        for r in D.points[p].quads:
            corners[rep[r]] += 1
    order = [r.name for r in D.regions if rep[r.name] == r.name]
    regions = [
        Region(t, chi[t], corners[t] + 2 * len(arcs[t]), tuple(sorted(arcs[t])), frozenset(tags[t]))
        for t in order
    ]
    curves = {}
    for name in keep:
        c = D.curves[name]
        pts = tuple(p for p in c.points if p in kept_points)
        sides = c.sides
        if not pts and c.kind == "closed":
            if c.points:
                e = next(e for e in D.edges if e.curve == name)
                sides = (rep[e.left], rep[e.right])
            else:
                sides = (rep[c.sides[0]], rep[c.sides[1]])
        else:
            sides = None
        curves[name] = Curve(c.name, c.system, c.kind, c.label, c.boundary, pts, sides)
    points = {
        p: Point(p, pt.lower, pt.upper, tuple(rep[r] for r in pt.quads), pt.sign)  # type: ignore[arg-type]
        for p, pt in D.points.items()
        if p in kept_points
    }
    basepoints = {n: rep[r] for n, r in D.basepoints.items()}
    if D.kind == "bordered":
        basepoints = {}
    sub = Diagram(D.genus, D.kind, D.h, curves, points, regions, basepoints, {}, D.source + "[sub]")
    return sub, rep


def subdiagram(D: Diagram, systems: Iterable[int]) -> Diagram:
    return subdiagram_map(D, systems)[0]


def restrict_domain(D: Diagram, sub: Diagram, rep: dict[str, str], B: Domain) -> Domain:
    """Push a domain with no jumps across dropped curves to the subdiagram."""
    mult: dict[str, int] = {}
    for r, c in zip(B.names, B.coeffs):
        t = rep[r]
        if t in mult and mult[t] != c:
            raise ValueError(f"domain jumps inside merged region {t}")
        mult[t] = c
    return Domain.from_dict(sub.region_names, mult)
