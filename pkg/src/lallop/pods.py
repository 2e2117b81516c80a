"""Rectangles, pods and the finite fragment basis.

A rectangle ``(i, s, j, t)`` records the two disk-side readings of one
oriented edge: the left disk reads ``x_i^s``, the right disk reads
``x_j^t = (x_i^s)^-1``.  Positions are 1-based over the root ``r``.

Fragments are plain tuples tagged by kind::

    ("BP", R1, R2)          bipod
    ("TP", R1, R2, R3)      tripod
    ("OT1", R, P, T)        open tripod, center R, predecessor P, successor T
    ("OT2", R, P, S)        open tripod, center R, predecessor P, spine S
    ("DOTP", S, P, T)       doubly open tripod, spine S, closed corner P -> T

A k-pod ``[R1..Rk]`` with k >= 4 breaks into
``OT1(R1; Rk, R2) + sum DOTP(Rk; Ri, Ri+1) + OT2(R(k-1); R(k-2), Rk)``.
Open slots are ordered pairs: OT1 emits (T, P), DOTP consumes (P, S) and
emits (T, S), OT2 consumes (P, S).
"""

from __future__ import annotations

from collections import Counter, defaultdict
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, NamedTuple

from .errors import EmptyWord, InvalidPod, MixedBasis
from .words import Word, render


class Rectangle(NamedTuple):
    i: int
    s: int
    j: int
    t: int

    def flip(self) -> Rectangle:
        return Rectangle(self.j, self.t, self.i, self.s)

    def __str__(self):
        return f"({self.i}{'+' if self.s > 0 else '-'},{self.j}{'+' if self.t > 0 else '-'})"


def letter_at(r: Word, i: int, s: int) -> int:
    return r.letters[i - 1] * s


def rectangles_of(r: Word, M: int = 1) -> list[Rectangle]:
    """All rectangles over the root ``r``; the set does not depend on ``M``."""
    if not r:
        raise EmptyWord("no rectangles over the empty word")
    return list(_rectangles(r.letters))


@lru_cache(maxsize=64)
def _rectangles(letters: tuple[int, ...]) -> tuple[Rectangle, ...]:
    n = len(letters)
    out = []
    for i in range(1, n + 1):
        for s in (1, -1):
            x = letters[i - 1] * s
            for j in range(1, n + 1):
                if j == i:
                    continue
                for t in (1, -1):
                    if letters[j - 1] * -t == x:
                        out.append(Rectangle(i, s, j, t))
    return tuple(out)


def is_rectangle(R: Rectangle, r: Word) -> bool:
    n = len(r)
    return (1 <= R.i <= n and 1 <= R.j <= n and R.i != R.j and R.s in (1, -1) and R.t in (1, -1)
            and letter_at(r, R.i, R.s) == -letter_at(r, R.j, R.t))


def _wrap(i: int, n: int) -> int:
    return (i - 1) % n + 1


def follows(a: Rectangle, b: Rectangle, n: int) -> bool:
    """True iff ``a`` follows ``b``: the corner from ``b`` to ``a`` is a disk corner."""
    if a.t != b.s:
        return False
    return a.j == _wrap(b.i + a.t, n)


class FollowGraph:
    """Successor/predecessor lists of the follows relation over Rec(r)."""

    def __init__(self, r: Word):
        self.r = r
        self.n = len(r)
        self.rects = rectangles_of(r)
        by_second = defaultdict(list)
        for R in self.rects:
            by_second[(R.j, R.t)].append(R)
        self.succ = {}
        self.pred = defaultdict(list)
        for R in self.rects:
            # a follows R  <=>  a.t == R.s and a.j == R.i + R.s
            nxt = by_second.get((_wrap(R.i + R.s, self.n), R.s), [])
            self.succ[R] = nxt
            for a in nxt:
                self.pred[a].append(R)
        self.pred = dict(self.pred)


# --- pods ---------------------------------------------------------------------

def canonical_rotation(rects: tuple) -> tuple:
    k = len(rects)
    return min(rects[i:] + rects[:i] for i in range(k))


def is_pod(rects: Iterable[Rectangle], r: Word) -> bool:
    rects = tuple(rects)
    n = len(r)
    if len(rects) < 2 or not all(is_rectangle(R, r) for R in rects):
        return False
    k = len(rects)
    return all(follows(rects[(m + 1) % k], rects[m], n) for m in range(k))


def check_pod(rects, r: Word) -> tuple:
    rects = tuple(Rectangle(*R) for R in rects)
    if not is_pod(rects, r):
        raise InvalidPod(f"[{', '.join(map(str, rects))}] is not a pod over {render(r)}")
    return rects


def phi0_decompose(pod, r: Word | None = None) -> Counter:
    """Break a pod into bipods/tripods/open tripods/doubly open tripods."""
    pod = tuple(pod)
    if r is not None:
        pod = check_pod(pod, r)
    k = len(pod)
    if k < 2:
        raise InvalidPod("a pod has at least two rectangles")
    if k == 2:
        return Counter({("BP",) + canonical_rotation(pod): 1})
    if k == 3:
        return Counter({("TP",) + canonical_rotation(pod): 1})
    out = Counter()
    out[("OT1", pod[0], pod[-1], pod[1])] += 1
    for m in range(1, k - 3):
        out[("DOTP", pod[-1], pod[m], pod[m + 1])] += 1
    out[("OT2", pod[-2], pod[-3], pod[-1])] += 1
    return out


def phi0(vec: Mapping) -> dict:
    """Linear extension of :func:`phi0_decompose` to a pod vector."""
    out = defaultdict(Fraction)
    for pod, coeff in vec.items():
        for frag, m in phi0_decompose(pod).items():
            out[frag] += coeff * m
    return {f: c for f, c in out.items() if c}


# --- fragment structure ---------------------------------------------------------

FRAGMENT_KINDS = ("BP", "TP", "OT1", "OT2", "DOTP")


def is_fragment(x) -> bool:
    return isinstance(x, tuple) and len(x) > 0 and x[0] in FRAGMENT_KINDS


def owned_rectangles(frag) -> tuple:
    kind = frag[0]
    if kind in ("BP", "TP"):
        return frag[1:]
    if kind in ("OT1", "OT2"):
        return (frag[1], frag[3])
    return (frag[3],)


def emitted_pair(frag):
    kind = frag[0]
    if kind == "OT1":
        return (frag[3], frag[2])
    if kind == "DOTP":
        return (frag[3], frag[1])
    return None


def consumed_pair(frag):
    kind = frag[0]
    if kind == "OT2":
        return (frag[2], frag[3])
    if kind == "DOTP":
        return (frag[2], frag[1])
    return None


def fragment_follows_ok(frag, n: int) -> bool:
    kind = frag[0]
    if kind in ("BP", "TP"):
        rects = frag[1:]
        k = len(rects)
        return all(follows(rects[(m + 1) % k], rects[m], n) for m in range(k))
    if kind in ("OT1", "OT2"):
        R, P, T = frag[1:]
        return follows(R, P, n) and follows(T, R, n)
    S, P, T = frag[1:]
    return follows(T, P, n)


def render_fragment(frag) -> str:
    kind = frag[0]
    rects = frag[1:]
    if kind in ("BP", "TP"):
        return f"{kind}[{', '.join(map(str, rects))}]"
    return f"{kind}({rects[0]}; {rects[1]}, {rects[2]})"


def render_pod(pod) -> str:
    return "[" + ", ".join(map(str, pod)) + "]"


# --- functionals -----------------------------------------------------------------

def normalization(r: Word, M: int) -> Fraction:
    """Each disk-side letter is seen from both edge endpoints, hence the factor 2."""
    return Fraction(1, 2 * M * len(r))


def pod_values(pod, c: Fraction) -> tuple:
    k = len(pod)
    lam = Fraction(k - 2, 2)
    nu = c * sum(R.s + R.t for R in pod)
    nubar = c * 2 * k
    return lam, nu, nubar


def fragment_values(frag, c: Fraction) -> tuple:
    kind = frag[0]
    if kind in ("BP", "TP"):
        return pod_values(frag[1:], c)
    half = Fraction(1, 2)
    if kind in ("OT1", "OT2"):
        R, P, T = frag[1:]
        return half, c * (P.s + R.t + R.s + T.t), 4 * c
    S, P, T = frag[1:]
    return half, c * (P.s + T.t), 2 * c


def _basis_kind(vec: Mapping) -> str | None:
    kinds = {("B" if is_fragment(x) else "V") for x in vec}
    if len(kinds) > 1:
        raise MixedBasis("vector mixes pods and fragments")
    return kinds.pop() if kinds else None


def functional_values(vec: Mapping, r: Word, M: int = 1) -> tuple:
    """(lambda, nu, nubar) of a pod vector or a fragment vector."""
    c = normalization(r, M)
    kind = _basis_kind(vec)
    lam = nu = nubar = Fraction(0)
    for x, coeff in vec.items():
        vals = fragment_values(x, c) if kind == "B" else pod_values(tuple(x), c)
        lam += coeff * vals[0]
        nu += coeff * vals[1]
        nubar += coeff * vals[2]
    return lam, nu, nubar


# --- membership -------------------------------------------------------------------

def rectangle_counts(vec: Mapping) -> dict:
    """Occurrences of each rectangle (full counting for pods, owned counting for fragments)."""
    kind = _basis_kind(vec)
    counts = defaultdict(Fraction)
    for x, coeff in vec.items():
        rects = owned_rectangles(x) if kind == "B" else tuple(x)
        for R in rects:
            counts[R] += coeff
    return counts


def slot_balance(vec: Mapping) -> dict:
    """emits(P) - consumes(P) for each ordered pair P touched by ``vec``."""
    bal = defaultdict(Fraction)
    for frag, coeff in vec.items():
        e, c = emitted_pair(frag), consumed_pair(frag)
        if e is not None:
            bal[e] += coeff
        if c is not None:
            bal[c] -= coeff
    return bal


def check_membership(vec: Mapping, space: str = "A") -> tuple:
    """Exact membership test for A (pods) or A0 (fragments).

    Returns ``(ok, witness)`` where ``witness`` names the first violated clause.
    """
    kind = _basis_kind(vec)
    expected = {"A": "V", "A0": "B"}[space]
    if kind is not None and kind != expected:
        raise MixedBasis(f"space {space} expects {'pods' if expected == 'V' else 'fragments'}")
    for x, coeff in vec.items():
        if coeff < 0:
            return False, ("negative", x, coeff)
    counts = rectangle_counts(vec)
    for R, m in counts.items():
        if m != counts.get(R.flip(), 0):
            return False, ("flip", R, m, counts.get(R.flip(), 0))
    if space == "A0":
        for pair, b in slot_balance(vec).items():
            if b:
                return False, ("slot", pair, b)
    return True, None


# --- reassembly -------------------------------------------------------------------

def reassemble(bvec: Mapping, max_nodes: int = 200000):
    """Find a multiset of pods whose Phi0-image is the integral vector ``bvec``.

    Chains OT1 -> DOTP* -> OT2 are matched through their slot pairs with a
    backtracking search; bipods and tripods pass through unchanged.  Returns
    a Counter of pods, or None when no reconstruction exists.
    """
    remaining = Counter()
    for frag, coeff in bvec.items():
        if coeff < 0 or Fraction(coeff).denominator != 1:
            raise ValueError("reassembly needs a non-negative integral vector")
        if coeff:
            remaining[frag] = int(coeff)
    pods = Counter()
    for frag in list(remaining):
        if frag[0] in ("BP", "TP"):
            pods[frag[1:]] += remaining.pop(frag)
    by_consumed = defaultdict(list)
    for frag in remaining:
        cp = consumed_pair(frag)
        if cp is not None:
            by_consumed[cp].append(frag)
    budget = [max_nodes]

    def search():
        budget[0] -= 1
        if budget[0] < 0:
            return None
        starts = [f for f, m in remaining.items() if m and f[0] == "OT1"]
        if not starts:
            return Counter() if not +remaining else None
        start = starts[0]
        remaining[start] -= 1
        R1, Rk, R2 = start[1:]
        result = extend([R1, R2], Rk, (R2, Rk))
        remaining[start] += 1
        return result

    def extend(chain, spine, pair):
        budget[0] -= 1
        if budget[0] < 0:
            return None
        for frag in by_consumed.get(pair, ()):
            if not remaining[frag]:
                continue
            remaining[frag] -= 1
            if frag[0] == "OT2":
                rest = search()
                if rest is not None:
                    remaining[frag] += 1
                    rest[tuple(chain) + (frag[1], spine)] += 1
                    return rest
            else:
                T = frag[3]
                res = extend(chain + [T], spine, (T, spine))
                if res is not None:
                    remaining[frag] += 1
                    return res
            remaining[frag] += 1
        return None

    rest = search()
    if rest is None:
        return None
    pods.update(rest)
    return pods
