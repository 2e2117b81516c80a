"""Van Kampen diagrams on closed oriented surfaces.

A diagram document is JSON::

    {"relator": "abAB", "power": 1,
     "edges": [{"id": 1, "letter": "a"}, ...],
     "disks": [{"degree": 1, "boundary": [{"edge": 1, "reversed": false}, ...]}]}

Boundaries are read counterclockwise.  Edge labels may be longer words;
validation subdivides them into single-letter edges.  Vertices are never
stored: they are the orbits of the corner permutation
``corner (D, p) -> (D', q)`` where ``q`` is the side glued to side ``p+1``
of ``D``.
"""

from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .errors import (DegreeOneVertex, DiagramError, EdgePairingError, LabelMismatch,
                     NotCancelling, NotReduced, ZeroDegreeDisk, ZeroTotalDegree)
from .pods import Rectangle
from .words import Word, letter_text, parse_letters, primitive_root, render


@dataclass(frozen=True)
class Side:
    disk: int
    index: int
    letter: int
    position: int       # 1-based position in the root
    sign: int           # sign of the disk degree
    edge: int           # id of the single-letter edge
    reversed: bool


@dataclass
class VanKampenDiagram:
    relator_root: Word
    power: int
    edge_letters: dict                  # single-letter edge id -> letter
    degrees: list                       # n(D) per disk
    sides: list                         # per disk: list of Side, counterclockwise
    offsets: list = field(default_factory=list)
    partner: dict = field(default_factory=dict)     # (disk, index) -> (disk, index)
    vertices: list = field(default_factory=list)    # corner orbits
    vertex_of: dict = field(default_factory=dict)   # corner -> vertex id
    components: list = field(default_factory=list)  # lists of disk indices
    source_edges: dict = field(default_factory=dict)  # single-letter edge -> (source id, offset)

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_edges(self) -> int:
        return len(self.edge_letters)

    @property
    def num_disks(self) -> int:
        return len(self.degrees)

    def vertex_degree(self, v: int) -> int:
        return len(self.vertices[v])

    def side(self, corner) -> Side:
        return self.sides[corner[0]][corner[1]]

    def rectangle(self, edge: int) -> Rectangle:
        """Rectangle of ``edge`` oriented along its letter (left disk reads the letter)."""
        fwd, rev = self._edge_sides[edge]
        a, b = self.side(fwd), self.side(rev)
        return Rectangle(a.position, a.sign, b.position, b.sign)

    @property
    def _edge_sides(self):
        cache = self.__dict__.get("_edge_sides_cache")
        if cache is None:
            cache = {}
            for d, ss in enumerate(self.sides):
                for s in ss:
                    slot = cache.setdefault(s.edge, [None, None])
                    slot[1 if s.reversed else 0] = (d, s.index)
            self.__dict__["_edge_sides_cache"] = cache
        return cache

    def genus(self) -> list:
        out = []
        for comp in self.components:
            out.append((2 - component_chi(self, comp)) // 2)
        return out

    def to_document(self) -> dict:
        """Single-letter JSON document describing this diagram."""
        k = self.relator_root.alphabet_size
        return {
            "relator": render(self.relator_root),
            "power": self.power,
            "edges": [{"id": e, "letter": letter_text(x, k)} for e, x in sorted(self.edge_letters.items())],
            "disks": [{"degree": n, "boundary": [{"edge": s.edge, "reversed": s.reversed} for s in ss]}
                      for n, ss in zip(self.degrees, self.sides)],
        }


# --- validation -----------------------------------------------------------------

def load_document(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _cyclic_offset(labels: list, r: tuple, sign: int):
    """Offset ``o`` with labels[p] == x_{pos(p)}^sign, or (None, first mismatch)."""
    n = len(r)
    best = (-1, 0)
    for o in range(n):
        ok = True
        for p, x in enumerate(labels):
            i = (o + p) % n if sign > 0 else (o - p) % n
            if r[i] * sign != x:
                if p > best[0]:
                    best = (p, o)
                ok = False
                break
        if ok:
            return o, None
    return None, best[0]


def validate_diagram(doc) -> VanKampenDiagram:
    """Check a diagram document and derive its vertices and components."""
    if isinstance(doc, (str, Path)):
        doc = load_document(doc)
    try:
        alphabet = int(doc.get("alphabet_size", 0)) or None
        rel_text = doc["relator"]
        power = int(doc.get("power", 1))
        edges_in = doc["edges"]
        disks_in = doc["disks"]
    except (KeyError, TypeError, ValueError) as exc:
        raise DiagramError(f"malformed diagram document: {exc}") from None
    if alphabet is None:
        alphabet = max([2] + [abs(x) for x in parse_letters(rel_text, 26)])
    relator = Word(tuple(parse_letters(rel_text, alphabet)), alphabet)
    if not relator or not relator.is_cyclically_reduced():
        raise DiagramError(f"relator {rel_text!r} must be non-empty and cyclically reduced")
    if power < 1:
        raise DiagramError("power must be positive")
    dec = primitive_root(relator)
    root, power = dec.root, power * dec.exponent
    r = root.letters
    n = len(r)

    # subdivide edges into single letters
    sub = {}
    edge_letters = {}
    source = {}
    next_id = 0
    for e in edges_in:
        eid = e["id"]
        if eid in sub:
            raise EdgePairingError(f"edge id {eid} declared twice")
        raw = parse_letters(e["letter"], alphabet)
        if not raw or Word(tuple(raw), alphabet).letters != tuple(raw):
            raise DiagramError(f"edge {eid} label {e['letter']!r} must be a non-empty reduced word")
        ids = []
        for k, x in enumerate(raw):
            edge_letters[next_id] = x
            source[next_id] = (eid, k)
            ids.append(next_id)
            next_id += 1
        sub[eid] = ids

    uses = Counter()
    degrees, sides, offsets = [], [], []
    for d, disk in enumerate(disks_in):
        deg = int(disk["degree"])
        if deg == 0:
            raise ZeroDegreeDisk(f"disk {d} has degree 0")
        seq = []
        for entry in disk["boundary"]:
            eid, rev = entry["edge"], bool(entry.get("reversed", False))
            if eid not in sub:
                raise EdgePairingError(f"disk {d} uses undeclared edge {eid}")
            uses[(eid, rev)] += 1
            ids = sub[eid]
            if rev:
                seq.extend((i, True, -edge_letters[i]) for i in reversed(ids))
            else:
                seq.extend((i, False, edge_letters[i]) for i in ids)
        sign = 1 if deg > 0 else -1
        expected = abs(deg) * power * n
        labels = [x for _, _, x in seq]
        if len(labels) != expected:
            raise LabelMismatch(f"disk {d} has boundary length {len(labels)}, expected {expected} "
                                f"for degree {deg}", disk=d, position=min(len(labels), expected))
        o, bad = _cyclic_offset(labels, r, sign)
        if o is None:
            raise LabelMismatch(f"disk {d} boundary {render(Word(tuple(labels), alphabet)) if labels else '1'} "
                                f"is not a rotation of the relator power; first mismatch at {bad}",
                                disk=d, position=bad)
        ss = []
        for p, (eid, rev, x) in enumerate(seq):
            i = (o + p) % n if sign > 0 else (o - p) % n
            ss.append(Side(d, p, x, i + 1, sign, eid, rev))
        degrees.append(deg)
        sides.append(ss)
        offsets.append(o)
    for eid in sub:
        if uses[(eid, False)] != 1 or uses[(eid, True)] != 1:
            raise EdgePairingError(f"edge {eid} used {uses[(eid, False)]} times forward and "
                                   f"{uses[(eid, True)]} times reversed; expected once each")

    D = VanKampenDiagram(root, power, edge_letters, degrees, sides, offsets, source_edges=source)
    _derive(D)
    return D


def _derive(D: VanKampenDiagram):
    ends = {}
    for d, ss in enumerate(D.sides):
        for s in ss:
            ends.setdefault(s.edge, []).append((d, s.index))
    partner = {}
    for eid, pair in ends.items():
        if len(pair) != 2:
            raise EdgePairingError(f"edge {eid} has {len(pair)} sides")
        a, b = pair
        partner[a] = b
        partner[b] = a
    D.partner = partner

    def nxt(corner):
        d, p = corner
        return partner[(d, (p + 1) % len(D.sides[d]))]

    seen = {}
    vertices = []
    for d, ss in enumerate(D.sides):
        for p in range(len(ss)):
            c = (d, p)
            if c in seen:
                continue
            orbit = []
            while c not in seen:
                seen[c] = len(vertices)
                orbit.append(c)
                c = nxt(c)
            vertices.append(orbit)
    D.vertices = vertices
    D.vertex_of = seen
    for v, orbit in enumerate(vertices):
        if len(orbit) < 2:
            raise DegreeOneVertex(f"vertex {v} at corner {orbit[0]} has degree 1")

    parent = list(range(D.num_disks))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for (d1, _), (d2, _) in partner.items():
        parent[find(d1)] = find(d2)
    comps = defaultdict(list)
    for d in range(D.num_disks):
        comps[find(d)].append(d)
    D.components = sorted(comps.values())


# --- metrics ------------------------------------------------------------------------

def component_chi(D: VanKampenDiagram, comp) -> int:
    disks = set(comp)
    verts = {D.vertex_of[(d, p)] for d in disks for p in range(len(D.sides[d]))}
    edges = {s.edge for d in disks for s in D.sides[d]}
    return len(verts) - len(edges) + len(disks)


def curvature(D: VanKampenDiagram, d: int) -> Fraction:
    total = Fraction(1)
    for p in range(len(D.sides[d])):
        deg = D.vertex_degree(D.vertex_of[(d, p)])
        total += Fraction(1, deg) - Fraction(1, 2)
    return total


def branch_count(D: VanKampenDiagram, d: int) -> int:
    return sum(1 for p in range(len(D.sides[d])) if D.vertex_degree(D.vertex_of[(d, p)]) >= 3)


def offending_rectangles(D: VanKampenDiagram) -> list:
    return [(e, D.rectangle(e)) for e in sorted(D.edge_letters) if D.rectangle(e).i == D.rectangle(e).j]


@dataclass(frozen=True)
class DiagramMetrics:
    vertices: int
    edges: int
    faces: int
    chi: int
    chi_minus: int
    total_degree: int
    absolute_degree: int
    curvature_per_disk: tuple
    branch_counts: tuple
    reduced: bool
    offending_rectangles: tuple
    genus: tuple

    def as_dict(self) -> dict:
        return {
            "V": self.vertices, "E": self.edges, "F": self.faces,
            "chi": self.chi, "chi_minus": self.chi_minus,
            "degree": self.total_degree, "absolute_degree": self.absolute_degree,
            "curvature": [str(k) for k in self.curvature_per_disk],
            "branch_counts": list(self.branch_counts),
            "reduced": self.reduced,
            "offending_rectangles": [[e, str(R)] for e, R in self.offending_rectangles],
            "genus": list(self.genus),
        }


def metrics(D: VanKampenDiagram) -> DiagramMetrics:
    chi = D.num_vertices - D.num_edges + D.num_disks
    kappas = tuple(curvature(D, d) for d in range(D.num_disks))
    if sum(kappas, Fraction(0)) != chi:
        raise AssertionError(f"Gauss-Bonnet mismatch: V-E+F = {chi}, sum of curvatures = {sum(kappas)}")
    chi_minus = sum(min(0, component_chi(D, c)) for c in D.components)
    bad = tuple(offending_rectangles(D))
    return DiagramMetrics(
        D.num_vertices, D.num_edges, D.num_disks, chi, chi_minus,
        sum(D.degrees), sum(abs(n) for n in D.degrees), kappas,
        tuple(branch_count(D, d) for d in range(D.num_disks)), not bad, bad, tuple(D.genus()))


def volume_upper_bound(D: VanKampenDiagram) -> Fraction:
    """-2 chi^- / |total degree|, an upper bound for the simplicial volume of <S | r^M>."""
    m = metrics(D)
    if m.total_degree == 0:
        raise ZeroTotalDegree("total degree is zero")
    return Fraction(-2 * m.chi_minus, abs(m.total_degree))


def lallop_ratio(D: VanKampenDiagram) -> Fraction:
    """(-2 chi + 2 sum(1 - |n(D)|)) / sum n(D)."""
    m = metrics(D)
    if m.total_degree == 0:
        raise ZeroTotalDegree("total degree is zero")
    return Fraction(-2 * m.chi + 2 * sum(1 - abs(n) for n in D.degrees), m.total_degree)


# --- Phi -------------------------------------------------------------------------------

def vertex_pod(D: VanKampenDiagram, v: int) -> tuple:
    """Rectangles of the edges pointing toward ``v``, in clockwise order."""
    rects = []
    for (d, p) in D.vertices[v]:
        q = (d, (p + 1) % len(D.sides[d]))
        left = D.side(D.partner[q])
        right = D.side(q)
        rects.append(Rectangle(left.position, left.sign, right.position, right.sign))
    return tuple(rects)


def phi_of_diagram(D: VanKampenDiagram) -> Counter:
    if offending_rectangles(D):
        raise NotReduced("diagram has rectangles pairing a position with itself")
    return Counter(vertex_pod(D, v) for v in range(D.num_vertices))


# --- elimination -------------------------------------------------------------------------

def eliminate_cancelling_pair(D: VanKampenDiagram, edge: int) -> Optional[VanKampenDiagram]:
    """Remove the opposite-sign disk pair along a cancelling edge and fold their boundaries.

    ``edge`` is a single-letter edge id of the validated diagram.  Returns the
    new diagram, or None when no disks remain.
    """
    R = D.rectangle(edge)
    if R.i != R.j:
        raise NotCancelling(f"edge {edge} has rectangle {R} with distinct positions")
    fwd, rev = D._edge_sides[edge]
    d1, p1 = fwd
    d2, p2 = rev
    L1, L2 = len(D.sides[d1]), len(D.sides[d2])
    side1 = lambda k: (d1, (p1 + k) % L1)
    side2 = lambda k: (d2, (p2 + k) % L2)
    mirror = {side1(0): side2(0), side2(0): side1(0)}
    for k in range(1, min(L1, L2)):
        a, b = side1(k), side2(-k)
        mirror[a] = b
        mirror[b] = a
    if L1 > L2:
        leftover = [side1(k) for k in range(L2, L1)]
        new_degree = D.degrees[d1] + D.degrees[d2]
    elif L2 > L1:
        leftover = [side2(k) for k in range(1, L2 - L1 + 1)]
        new_degree = D.degrees[d1] + D.degrees[d2]
    else:
        leftover = []
        new_degree = 0

    def resolve(x):
        """Follow gluings through folded sides until a kept side is reached."""
        z = D.partner[x]
        steps = 0
        while z in mirror:
            z = D.partner[mirror[z]]
            steps += 1
            if steps > 4 * (L1 + L2):
                return None
        return z

    kept_disks = [d for d in range(D.num_disks) if d not in (d1, d2)]
    boundaries = [(D.degrees[d], [(d, p) for p in range(len(D.sides[d]))]) for d in kept_disks]
    if leftover:
        boundaries.append((new_degree, leftover))
    # assign fresh edge ids to glued pairs of kept sides
    edge_of = {}
    letters = {}
    next_id = 0
    doc_disks = []
    for deg, corners in boundaries:
        entries = []
        for c in corners:
            if c not in edge_of:
                other = resolve(c)
                if other is None:
                    raise DiagramError("folding produced a closed loop of cancelling sides")
                s = D.side(c)
                eid = next_id
                next_id += 1
                edge_of[c] = (eid, False)
                edge_of[other] = (eid, True)
                letters[eid] = s.letter
            eid, rev = edge_of[c]
            entries.append({"edge": eid, "reversed": rev})
        doc_disks.append({"degree": deg, "boundary": entries})
    if not doc_disks:
        return None
    k = D.relator_root.alphabet_size
    doc = {"relator": render(D.relator_root), "power": D.power, "alphabet_size": k,
           "edges": [{"id": e, "letter": letter_text(x, k)} for e, x in sorted(letters.items())],
           "disks": doc_disks}
    return validate_diagram(doc)
