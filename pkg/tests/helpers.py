"""Generators and brute-force oracles shared by the test modules."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction
from pathlib import Path

from lallop.diagram import validate_diagram
from lallop.errors import DiagramError
from lallop.pods import FollowGraph, rectangles_of
from lallop.words import Word, letter_text, minimal_period, parse_word

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"

R2 = "abABaBBAbb"
R3 = "abABaBBBAbbb"
R4 = "abABaBBBBAbbbb"
V_WORD = "aaaabABAbaBAAbAB"


def random_reduced(rng: random.Random, n: int, k: int) -> tuple:
    out = []
    while len(out) < n:
        x = rng.choice([g for g in range(1, k + 1)] + [-g for g in range(1, k + 1)])
        if out and out[-1] == -x:
            continue
        out.append(x)
    return tuple(out)


def random_root(rng: random.Random, max_len: int = 12, k: int = 2, commutator: bool = False) -> Word:
    """Random cyclically reduced, root-free word (optionally with zero exponent sums)."""
    while True:
        n = rng.randrange(2, max_len + 1)
        if commutator and n % 2:
            continue
        w = random_reduced(rng, n, k)
        if w[0] == -w[-1] or minimal_period(w) != n:
            continue
        if commutator:
            sums = [0] * k
            for x in w:
                sums[abs(x) - 1] += 1 if x > 0 else -1
            if any(sums):
                continue
        return Word(w, k)


def random_pod(rng: random.Random, r: Word, max_k: int = 10):
    """Random closed walk in the follows graph (R_{j+1} follows R_j), or None."""
    G = FollowGraph(r)
    if not G.rects:
        return None
    for _ in range(50):
        k = rng.randrange(2, max_k + 1)
        start = rng.choice(G.rects)
        # can_reach[m] = rectangles from which `start` is reachable in exactly m steps
        can_reach = [{start}]
        for _m in range(k):
            prev = can_reach[-1]
            can_reach.append({R for R in G.rects if any(S in prev for S in G.succ[R])})
        if start not in can_reach[k]:
            continue
        walk = [start]
        cur = start
        for m in range(k - 1, 0, -1):
            options = [S for S in G.succ[cur] if S in can_reach[m]]
            cur = rng.choice(options)
            walk.append(cur)
        return tuple(walk)
    return None


def brute_rectangles(r: Word) -> set:
    n = len(r)
    out = set()
    for i, j in itertools.product(range(1, n + 1), repeat=2):
        for s, t in itertools.product((1, -1), repeat=2):
            if i != j and r.letters[i - 1] * s == -(r.letters[j - 1] * t):
                out.add((i, s, j, t))
    return out


def brute_max_piece(r: Word) -> int:
    """Quadratic oracle: compare r against every position-distinct conjugate of r and r^-1."""
    n = len(r)
    inv = r.inverse()
    conj = [(r.rotate(i), ("r", i)) for i in range(n)] + [(inv.rotate(i), ("R", i)) for i in range(n)]
    best = 0
    for (a, ka), (b, kb) in itertools.combinations(conj, 2):
        k = 0
        while k < n and a[k] == b[k]:
            k += 1
        best = max(best, k)
    return best


def random_glued_document(rng: random.Random, relator: str, max_disks: int = 4, max_degree: int = 2):
    """Glue sides reading x to sides reading x^-1 at random; returns a diagram document."""
    k = max(2, max(ord(c.lower()) - 96 for c in relator))
    r = parse_word(relator, k)
    m = rng.randrange(1, max_disks + 1)
    degrees = [rng.choice([d for d in range(-max_degree, max_degree + 1) if d]) for _ in range(m)]
    labels = []
    for deg in degrees:
        w = r ** deg
        rot = rng.randrange(len(w))
        labels.append(w.rotate(rot))
    by_letter = {}
    for d, lab in enumerate(labels):
        for p, x in enumerate(lab):
            by_letter.setdefault(x, []).append((d, p))
    boundary = [[None] * len(lab) for lab in labels]
    edges = []
    for g in range(1, k + 1):
        pos, neg = by_letter.get(g, []), list(by_letter.get(-g, []))
        rng.shuffle(neg)
        for (d1, p1), (d2, p2) in zip(pos, neg):
            eid = len(edges) + 1
            edges.append({"id": eid, "letter": letter_text(g, k)})
            boundary[d1][p1] = {"edge": eid, "reversed": False}
            boundary[d2][p2] = {"edge": eid, "reversed": True}
    return {"relator": relator, "power": 1, "edges": edges,
            "disks": [{"degree": deg, "boundary": b} for deg, b in zip(degrees, boundary)]}


def random_glued_diagram(rng: random.Random, relator: str, **kw):
    while True:
        try:
            return validate_diagram(random_glued_document(rng, relator, **kw))
        except DiagramError:
            continue


def vertex_enumeration(lp):
    """Brute force: best objective over all basic feasible solutions of a small LP (or None)."""
    n = lp.num_vars
    rows = []
    for con in lp.constraints:
        rows.append((dict(con.coeffs), con.relation, con.rhs))
    # inequality form with slacks turned into tight/non-tight choices: choose n active constraints
    # among rows (as equalities) and bounds x_j = 0
    cands = [("row", i) for i in range(len(rows))] + [("bound", j) for j in range(n)]
    best = None
    sign = 1 if lp.sense == "min" else -1
    for active in itertools.combinations(cands, n):
        eqs = []
        for kind, idx in active:
            if kind == "row":
                eqs.append(([rows[idx][0].get(j, Fraction(0)) for j in range(n)], rows[idx][2]))
            else:
                eqs.append(([Fraction(int(j == idx)) for j in range(n)], Fraction(0)))
        x = _solve_square(eqs, n)
        if x is None:
            continue
        point = {j: v for j, v in enumerate(x) if v}
        if lp.violations(point):
            continue
        val = lp.objective_value(point)
        if best is None or sign * val < sign * best:
            best = val
    return best


def _solve_square(eqs, n):
    """Gauss-Jordan over the rationals; None when singular."""
    A = [list(map(Fraction, row)) + [Fraction(b)] for row, b in eqs]
    for col in range(n):
        piv = next((r for r in range(col, n) if A[r][col] != 0), None)
        if piv is None:
            return None
        A[col], A[piv] = A[piv], A[col]
        inv = 1 / A[col][col]
        A[col] = [v * inv for v in A[col]]
        for r in range(n):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [a - f * b for a, b in zip(A[r], A[col])]
    return [A[i][n] for i in range(n)]
