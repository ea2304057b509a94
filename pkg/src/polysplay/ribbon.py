"""Half-edge surfaces used to build stabilised and splayed diagrams.

A ribbon stores darts (half-edges) with an origin vertex, a twin and a
counterclockwise rotation at every vertex.  Faces are the orbits of
d -> sigma^-1(twin(d)), so the face of a dart is the one on its left, and
the face of rotation slot k at a vertex is the sector between slots k and
k + 1.

Every edge carries a strand label: the name of a curve, None for a blank
strand (ignored when regions are formed) or BOUNDARY.  Strands pass straight
through degree four vertices, which is how curves are traced.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Callable

from .diagram import Curve, Diagram, DiagramError, Point, Region, natural_key

BOUNDARY = "#boundary"


class RibbonError(ValueError):
    pass


@dataclass
class Hole:
    """A boundary circle cut out around a vertex.

    ``segments[k]`` is a dart whose left face covers boundary segment k and
    ``ends[i]`` the dart leaving endpoint a_{i+1}.
    """

    segments: tuple[int, int, int, int]
    ends: tuple[int, int, int, int]


class Ribbon:
    def __init__(self):
        self.origin: list[int] = []
        self.twin: list[int] = []
        self.label: list[str | None] = []
        self.forward: list[bool] = []
        self.base: list[str | None] = []
        self.rot: dict[int, list[int]] = {}
        self.vbase: dict[int, str] = {}
        self.holes: dict[int, Hole] = {}
        self._next = 0

    # -- construction ------------------------------------------------------

    def add_vertex(self, base: str) -> int:
        v = self._next
        self._next += 1
        self.rot[v] = []
        self.vbase[v] = base
        return v

    def add_edge(self, label: str | None, base: tuple = (None, None)) -> tuple[int, int]:
        """A new edge as (forward dart, backward dart), both unattached."""
        d = len(self.origin)
        for k in (0, 1):
            self.origin.append(-1)
            self.twin.append(d + 1 - k)
            self.label.append(label)
            self.forward.append(k == 0)
            self.base.append(base[k])
        return d, d + 1

    def attach(self, d: int, v: int, after: int | None = None) -> None:
        self.origin[d] = v
        r = self.rot[v]
        if after is None:
            r.append(d)
        else:
            r.insert(r.index(after) + 1, d)

    def remove_vertex(self, v: int) -> None:
        del self.rot[v]
        del self.vbase[v]

    def split(self, h: int, base: str) -> tuple[int, int, int]:
        """Subdivide the edge of h by a new vertex w.

        h keeps its origin and now ends at w.  Returns (w, back, ahead): back
        runs from w to the origin of h, ahead from w to the old head.  The
        rotation at w is left empty for the caller.
        """
        t = self.twin[h]
        w = self.add_vertex(base)
        lab = self.label[h]
        back, ahead = len(self.origin), len(self.origin) + 1
        for _ in range(2):
            self.origin.append(w)
            self.label.append(lab)
        self.twin.extend([h, t])
        self.twin[h], self.twin[t] = back, ahead
        self.forward.extend([self.forward[t], self.forward[h]])
        self.base.extend([self.base[t], self.base[h]])
        return w, back, ahead

    # -- navigation --------------------------------------------------------

    def head(self, d: int) -> int:
        return self.origin[self.twin[d]]

    def sigma(self, d: int) -> int:
        r = self.rot[self.origin[d]]
        return r[(r.index(d) + 1) % len(r)]

    def sigma_inv(self, d: int) -> int:
        r = self.rot[self.origin[d]]
        return r[(r.index(d) - 1) % len(r)]

    def darts(self) -> list[int]:
        return [d for v in sorted(self.rot) for d in self.rot[v]]

    def straight(self, d: int) -> int | None:
        """The dart continuing the strand of d through its head, if any."""
        v = self.head(d)
        r = self.rot[v]
        t = self.twin[d]
        if len(r) == 4:
            return r[(r.index(t) + 2) % 4]
        if len(r) == 2:
            return r[1 - r.index(t)]
        return None

    def strand(self, d0: int) -> list[int]:
        """Darts of the strand starting with d0, up to a dead end or back to d0."""
        out = [d0]
        while True:
            nxt = self.straight(out[-1])
            if nxt is None or nxt == d0:
                return out
            if self.label[nxt] != self.label[d0]:
                raise RibbonError(f"strand {self.label[d0]} runs into {self.label[nxt]}")
            out.append(nxt)

    def faces(self) -> tuple[dict[int, int], list[list[int]]]:
        face_of: dict[int, int] = {}
        orbits: list[list[int]] = []
        for d in self.darts():
            if d in face_of:
                continue
            orbit = []
            x = d
            while x not in face_of:
                face_of[x] = len(orbits)
                orbit.append(x)
                x = self.sigma_inv(self.twin[x])
            orbits.append(orbit)
        return face_of, orbits

    def euler(self) -> int:
        ndarts = sum(len(r) for r in self.rot.values())
        return len(self.rot) - ndarts // 2 + len(self.faces()[1])

    def check(self) -> None:
        for v, r in self.rot.items():
            for d in r:
                if self.origin[d] != v:
                    raise RibbonError(f"dart {d} listed at vertex {v} but rooted at {self.origin[d]}")
                if self.origin[self.twin[d]] not in self.rot:
                    raise RibbonError(f"dart {d} leads to a deleted vertex")

    # -- operations used by the constructions --------------------------------

    def draw_path(
        self,
        label: str,
        blocked: set,
        stages: list[str],
        start: int | None,
        end: int | None,
        names: str,
    ) -> tuple[int, int, list[int]]:
        """Draw a new strand through the regions listed in ``stages``.

        ``start`` and ``end`` are existing vertices or None for a fresh
        endpoint in the face of the first (last) stage region.  Edges whose
        label is in ``blocked`` are never crossed.  Returns the two endpoint
        vertices and the forward darts of the new strand.
        """
        face_of, orbits = self.faces()
        fbase = []
        for orbit in orbits:
            bases = {self.base[d] for d in orbit} - {None}
            fbase.append(bases.pop() if len(bases) == 1 else None)

        def endpoint_faces(v, region):
            if v is not None:
                return sorted({face_of[d] for d in self.rot[v]})
            found = [f for f, b in enumerate(fbase) if b == region]
            if len(found) != 1:
                raise RibbonError(f"cannot place an endpoint in region {region}: {len(found)} candidate faces")
            return found

        first = [f for f in endpoint_faces(start, stages[0]) if fbase[f] == stages[0]]
        last = set(f for f in endpoint_faces(end, stages[-1]) if fbase[f] == stages[-1])
        goal = len(stages) - 1
        prev: dict[tuple[int, int], tuple | None] = {(f, 0): None for f in first}
        queue = deque(prev)
        found = None
        while queue:
            f, t = queue.popleft()
            if t == goal and f in last:
                found = (f, t)
                break
            for h in orbits[f]:
                lab = self.label[h]
                if lab in blocked or lab == BOUNDARY:
                    continue
                g = face_of[self.twin[h]]
                if g == f:
                    continue
                for t2 in (t, t + 1):
                    if t2 <= goal and fbase[g] == stages[t2] and (g, t2) not in prev:
                        prev[(g, t2)] = (f, t, h)
                        queue.append((g, t2))
        if found is None:
            raise RibbonError(f"no route for {label} through {','.join(stages)}")
        crossings = []
        faces_on_path = [found[0]]
        state = found
        while prev[state] is not None:
            f, t, h = prev[state]
            crossings.append(h)
            faces_on_path.append(f)
            state = (f, t)
        crossings.reverse()
        faces_on_path.reverse()

        edges = [self.add_edge(label, (fbase[f], fbase[f])) for f in faces_on_path]
        for i, h in enumerate(crossings):
            w, back, ahead = self.split(h, f"{names}.{i + 1}")
            entry, exit_ = edges[i][1], edges[i + 1][0]
            self.rot[w] = [ahead, entry, back, exit_]
            self.origin[entry] = w
            self.origin[exit_] = w

        def place(v, d, f):
            if v is None:
                v = self.add_vertex(names)
                self.attach(d, v)
                return v
            anchor = next(x for x in self.rot[v] if face_of[x] == f)
            self.attach(d, v, after=anchor)
            return v

        v0 = place(start, edges[0][0], faces_on_path[0])
        v1 = place(end, edges[-1][1], faces_on_path[-1])
        return v0, v1, [e[0] for e in edges]

    def add_handle(self, a: int, b: int, c: int, d: int, meridian: str, names: tuple[str, str]) -> tuple[int, int]:
        """Glue a tube between the endpoints of two paths.

        a leaves W along the future longitude, b arrives at W along the
        future beta curve (as its dart at W), c is the longitude's dart at Z
        and d the beta curve's dart leaving Z.  W and Z are removed; the new
        vertices e (longitude x meridian) and q (beta x meridian) are
        returned.
        """
        W, Z = self.origin[a], self.origin[c]
        if sorted(self.rot[W]) != sorted((a, b)) or sorted(self.rot[Z]) != sorted((c, d)):
            raise RibbonError("handle endpoints must have exactly the two path darts")
        e = self.add_vertex(names[0])
        q = self.add_vertex(names[1])
        e1_e, e1_q = self.add_edge(meridian)
        e2_q, e2_e = self.add_edge(meridian)
        for x, v in ((a, e), (c, e), (e1_e, e), (e2_e, e), (b, q), (d, q), (e1_q, q), (e2_q, q)):
            self.origin[x] = v
        self.rot[e] = [a, e1_e, c, e2_e]
        self.rot[q] = [b, e2_q, d, e1_q]
        self.remove_vertex(W)
        self.remove_vertex(Z)
        return e, q

    def cut_hole(self, e: int, j: int) -> None:
        """Replace the degree four vertex e = (l->W, m+, l->Z, m-) by a boundary circle."""
        d = list(self.rot[e])
        if len(d) != 4:
            raise RibbonError("only a crossing can be replaced by a boundary circle")
        base = self.vbase[e]
        A = [self.add_vertex(f"{base}.{k}") for k in range(4)]
        ccw = []
        for k in range(4):
            fwd, bwd = self.add_edge(BOUNDARY)
            # fwd runs clockwise (surface on its left), from A[k+1] to A[k]
            ccw.append(bwd)
            self.origin[bwd] = A[k]
            self.origin[fwd] = A[(k + 1) % 4]
        for k in range(4):
            cw = self.twin[ccw[(k - 1) % 4]]
            self.origin[d[k]] = A[k]
            self.rot[A[k]] = [d[k], ccw[k], cw]
        self.remove_vertex(e)
        # a1 = m+, a2 = l->W, a3 = m-, a4 = l->Z; segment k follows a_k
        self.holes[j] = Hole((d[1], d[0], d[3], d[2]), (d[1], d[0], d[3], d[2]))

    def copy_right(self, strand: list[int], label: str) -> list[int | None]:
        """Push a parallel copy of a closed strand off to its right.

        Returns, for every dart of the strand, the forward dart of the copy
        leaving the matching copy vertex (None where the strand vertex has
        degree two and no copy vertex was made).
        """
        made = []
        for k, s in enumerate(strand):
            v = self.origin[s]
            if len(self.rot[v]) == 2:
                made.append(None)
                continue
            if len(self.rot[v]) != 4:
                raise RibbonError("only closed strands through crossings can be copied")
            right = self.sigma_inv(s)
            w, back, ahead = self.split(right, self.vbase[v])
            made.append((k, w, back, ahead))
        kept = [m for m in made if m is not None]
        if not kept:
            raise RibbonError("cannot copy a strand without crossings")
        edges = [self.add_edge(label) for _ in kept]
        out: list[int | None] = [None] * len(strand)
        for i, (k, w, back, ahead) in enumerate(kept):
            out_d = edges[i][0]
            in_d = edges[i - 1][1]
            self.origin[out_d] = w
            self.origin[in_d] = w
            self.rot[w] = [out_d, back, in_d, ahead]
            out[k] = out_d
        return out

    def swap_lanes(self, left: int, right: int, base: str) -> tuple[int, int]:
        """Make two parallel neighbouring lanes cross once.

        ``left`` and ``right`` are forward darts of the two lanes bounding a
        common face (left lane on the left).  Returns the darts continuing
        the old left and right lanes beyond the new crossing.
        """
        x, xb, xa = self.split(right, base)
        y, yb, ya = self.split(left, base)
        z = self.add_vertex(base)
        for dd in (xb, xa, yb, ya):
            self.origin[dd] = z
        self.rot[z] = [xa, yb, xb, ya]
        self.remove_vertex(x)
        self.remove_vertex(y)
        return ya, xa


# ----------------------------------------------------------------------
# conversion from and to diagrams


def from_diagram(D: Diagram) -> Ribbon:
    """The ribbon of a closed diagram whose regions are all discs."""
    if D.kind != "closed":
        raise RibbonError("only closed diagrams can be converted")
    R = Ribbon()
    vid = {p: R.add_vertex(p) for p in sorted(D.points, key=natural_key)}
    slots = {p: [None] * 4 for p in D.points}
    for c in D.curves.values():
        if not c.points:
            raise RibbonError(f"curve {c.name} has no intersection points")
    for e in D.edges:
        pt_t, pt_h = D.points[e.tail], D.points[e.head]
        d, t = R.add_edge(e.curve, (e.left, e.right))
        slots[e.tail][_slot(pt_t, e.curve, True)] = d
        slots[e.head][_slot(pt_h, e.curve, False)] = t
        R.origin[d] = vid[e.tail]
        R.origin[t] = vid[e.head]
    for p, s in slots.items():
        if None in s:
            raise RibbonError(f"point {p} is missing a ray")
        R.rot[vid[p]] = list(s)
    face_of, orbits = R.faces()
    seen = {}
    for i, orbit in enumerate(orbits):
        bases = {R.base[d] for d in orbit}
        if len(bases) != 1:
            raise RibbonError(f"face spans regions {sorted(bases)}")
        r = bases.pop()
        if r in seen:
            raise RibbonError(f"region {r} is not a disc")
        seen[r] = i
    for r in D.regions:
        if r.chi != 1 or r.name not in seen:
            raise RibbonError(f"region {r.name} is not a disc")
    if R.euler() != 2 - 2 * D.genus:
        raise RibbonError("ribbon Euler characteristic does not match the genus")
    return R


def _slot(pt: Point, curve: str, outgoing: bool) -> int:
    if curve == pt.lower:
        return 0 if outgoing else 2
    if pt.sign > 0:
        return 1 if outgoing else 3
    return 3 if outgoing else 1


@dataclass
class CurveSpec:
    system: int
    kind: str = "closed"
    label: str | None = None
    boundary: int | None = None
    level: int | None = None
    family: str | None = None


@dataclass
class Export:
    diagram: Diagram
    region_of_dart: dict[int, str]
    point_of_vertex: dict[int, str]
    vertex_of_point: dict[str, int] = field(default_factory=dict)


def to_diagram(
    R: Ribbon,
    genus: int,
    h: int,
    specs: dict[str, CurveSpec],
    basepoints: dict[str, int] | None = None,
    face_tags: Callable[[list[int]], set] | None = None,
    point_tags: Callable[[int], set] | None = None,
    source: str = "<ribbon>",
    extra: dict | None = None,
) -> Export:
    """Read a diagram off the ribbon.

    Labels missing from ``specs`` are treated as blank.  ``basepoints`` maps
    names to darts whose left face holds them.
    """
    R.check()
    lab = [x if (x in specs or x == BOUNDARY) else None for x in R.label]
    face_of, orbits = R.faces()
    hole_faces = {i for i, o in enumerate(orbits) if all(lab[d] == BOUNDARY for d in o)}
    if len(hole_faces) != len(R.holes):
        raise RibbonError("boundary circles do not bound single faces")

    parent = list(range(len(orbits)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    blank_edges = []
    for d in R.darts():
        if lab[d] is None and d < R.twin[d]:
            blank_edges.append(d)
            a, b = find(face_of[d]), find(face_of[R.twin[d]])
            if a != b:
                parent[max(a, b)] = min(a, b)
    groups: dict[int, list[int]] = defaultdict(list)
    for f in range(len(orbits)):
        if f not in hole_faces:
            groups[find(f)].append(f)
    order = sorted(groups, key=lambda g: min(min(orbits[f]) for f in groups[g]))
    gname = {g: f"R{i + 1}" for i, g in enumerate(order)}

    def region(d):
        return gname[find(face_of[d])]

    chi = {gname[g]: len(fs) for g, fs in groups.items()}
    for d in blank_edges:
        chi[region(d)] -= 1
    for v, r in R.rot.items():
        if r and all(lab[d] is None for d in r):
            chi[region(r[0])] += 1

    # points
    point_of_vertex = {}
    corners: dict[str, int] = defaultdict(int)
    points = {}
    ptags: dict[str, set] = defaultdict(set)
    for v in sorted(R.rot):
        r = R.rot[v]
        if len(r) != 4 or any(lab[d] in (None, BOUNDARY) for d in r):
            continue
        if lab[r[0]] != lab[r[2]] or lab[r[1]] != lab[r[3]] or lab[r[0]] == lab[r[1]]:
            raise RibbonError(f"vertex {R.vbase[v]} is not a transverse crossing")
        s0, s1 = specs[lab[r[0]]], specs[lab[r[1]]]
        if s0.system == s1.system:
            raise RibbonError(f"curves {lab[r[0]]} and {lab[r[1]]} of one system meet at {R.vbase[v]}")
        lower = lab[r[0]] if s0.system < s1.system else lab[r[1]]
        upper = lab[r[1]] if lower == lab[r[0]] else lab[r[0]]
        i0 = next(i for i in range(4) if lab[r[i]] == lower and R.forward[r[i]])
        quads = tuple(region(r[(i0 + k) % 4]) for k in range(4))
        sign = 1 if R.forward[r[(i0 + 1) % 4]] else -1
        levels = [specs[x].level for x in (lower, upper) if specs[x].level is not None]
        name = "_".join([R.vbase[v]] + [str(x) for x in levels])
        if name in points:
            raise RibbonError(f"duplicate point name {name}")
        points[name] = Point(name, lower, upper, quads, sign)
        point_of_vertex[v] = name
        for q in quads:
            corners[q] += 1
        if point_tags is not None:
            for q in quads:
                ptags[q] |= point_tags(v)

    # boundary segments
    arcs: dict[str, list] = defaultdict(list)
    for j, hole in sorted(R.holes.items()):
        for k, d in enumerate(hole.segments):
            arcs[region(d)].append((j, k))
            corners[region(d)] += 2

    # curves
    by_label: dict[str, list[int]] = defaultdict(list)
    for d in R.darts():
        if lab[d] not in (None, BOUNDARY) and R.forward[d]:
            by_label[lab[d]].append(d)
    curves = {}
    for name, spec in specs.items():
        if name not in by_label:
            continue
        if spec.kind == "arc":
            hole = R.holes[spec.boundary]
            d0 = hole.ends[0] if spec.label == "m" else hole.ends[1]
        else:
            d0 = min(by_label[name])
        path = R.strand(d0)
        if len(path) != len(by_label[name]):
            raise RibbonError(f"curve {name} is not a single strand")
        pts = tuple(point_of_vertex[R.head(d)] for d in path if R.head(d) in point_of_vertex)
        if spec.kind == "closed" and pts:
            # start the list at the first point met
            k = next(i for i, d in enumerate(path) if R.origin[d] in point_of_vertex)
            rot = path[k:] + path[:k]
            pts = tuple(point_of_vertex[R.origin[d]] for d in rot if R.origin[d] in point_of_vertex)
        sides = None
        if spec.kind == "closed" and not pts:
            sides = (region(d0), region(R.twin[d0]))
        curves[name] = Curve(name, spec.system, spec.kind, spec.label, spec.boundary, pts, sides)

    regions = []
    for g in order:
        nm = gname[g]
        tags: set = set()
        if face_tags is not None:
            per_face = [face_tags(orbits[f]) for f in groups[g]]
            tags = set.intersection(*per_face) if per_face else set()
        tags |= ptags.get(nm, set())
        regions.append(Region(nm, chi[nm], corners[nm], tuple(arcs.get(nm, ())), frozenset(tags)))

    bps = {n: region(d) for n, d in (basepoints or {}).items()}
    kind = "bordered" if R.holes else "closed"
    try:
        D = Diagram(genus, kind, h, curves, points, regions, bps, dict(extra or {}), source)
    except DiagramError as exc:
        raise RibbonError(f"constructed diagram is invalid: {exc}") from None
    region_of_dart = {d: region(d) for d in R.darts() if face_of[d] not in hole_faces}
    return Export(D, region_of_dart, point_of_vertex, {p: v for v, p in point_of_vertex.items()})
