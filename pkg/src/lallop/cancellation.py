"""Pieces, the C'(1/N) small cancellation test, and structural bounds.

Piece lengths are taken over the symmetrized set of cyclic conjugates of
``r`` and ``r^-1``, so the answer does not depend on which rotation of the
relator the caller passes in.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .errors import (EmptyWord, InvalidScl, IsProperPower, NotCyclicallyReduced,
                     NotInCommutatorSubgroup)
from .words import (Word, abelianize, cyclically_reduce, in_commutator_subgroup,
                    minimal_period, primitive_root, render)

SCL_GAP = Fraction(1, 2)


@dataclass(frozen=True)
class PieceReport:
    word: Word
    max_piece_length: int
    # (offset, inverse flag) of the two conjugates sharing the piece, and the piece itself
    witness: Optional[tuple]
    c_prime_threshold: Optional[int]

    def satisfies(self, n: int) -> bool:
        return self.max_piece_length * n <= len(self.word)


def _check_relator(r: Word):
    if not r:
        raise EmptyWord("relator must be non-empty")
    if not r.is_cyclically_reduced():
        raise NotCyclicallyReduced(f"{render(r)} is not cyclically reduced")


def _common_prefix(a, b) -> int:
    k = 0
    for x, y in zip(a, b):
        if x != y:
            break
        k += 1
    return k


def max_piece_length(r: Word) -> PieceReport:
    """Longest common prefix of two distinct cyclic conjugates of ``r`` or ``r^-1``.

    Sorting the 2|r| conjugates puts every longest common prefix between
    neighbours, so only adjacent pairs are compared.
    """
    _check_relator(r)
    n = len(r)
    if minimal_period(r.letters) != n:
        raise IsProperPower(f"{render(r)} is a proper power; use its primitive root")
    inv = r.inverse()
    conjugates = [(r.rotate(i), i, False) for i in range(n)] + [(inv.rotate(i), i, True) for i in range(n)]
    conjugates.sort(key=lambda c: c[0])
    best, witness = 0, None
    for (a, ia, fa), (b, ib, fb) in zip(conjugates, conjugates[1:]):
        k = _common_prefix(a, b)
        if k > best:
            best = k
            witness = ((ia, fa), (ib, fb), render(Word(a[:k], r.alphabet_size)))
    threshold = n // best if best else None
    return PieceReport(r, best, witness, threshold)


def satisfies_c_prime(r: Word, n: int) -> bool:
    """C'(1/n): every piece has length at most |r|/n (non-strict)."""
    if n < 1:
        raise ValueError("N must be a positive integer")
    return max_piece_length(r).satisfies(n)


# --- decomposable relators ----------------------------------------------------

@dataclass(frozen=True)
class Decomposition:
    """``r`` is conjugate to ``r1 r2`` (kind 1) or ``r1 t r2 t^-1`` (kind 2)."""

    kind: int
    r1: Word
    r2: Word
    t: Optional[int]
    rotation: int

    def reassemble(self) -> Word:
        if self.kind == 1:
            return self.r1 * self.r2
        t = Word((self.t,), self.r1.alphabet_size)
        return self.r1 * t * self.r2 * t.inverse()

    def describe(self) -> dict:
        out = {"kind": self.kind, "r1": render(self.r1), "r2": render(self.r2), "rotation": self.rotation}
        if self.t is not None:
            out["t"] = render(Word((self.t,), self.r1.alphabet_size))
        return out


def detect_decomposable(r: Word) -> Optional[Decomposition]:
    """Search the cyclic rotations of ``r`` for the two decomposable shapes (kind 2 first)."""
    r, _ = cyclically_reduce(r)
    n = len(r)
    k = r.alphabet_size
    # the conjugated shape is more specific, so it is reported first
    for rot in range(n):
        rho = r.rotate(rot)
        t_inv = rho[-1]
        g = abs(t_inv)
        if sum(1 for x in rho if abs(x) == g) != 2:
            continue
        i = rho.index(-t_inv)
        r1, r2 = Word(rho[:i], k), Word(rho[i + 1:-1], k)
        if r1 and r2 and in_commutator_subgroup(r1) and in_commutator_subgroup(r2):
            return Decomposition(2, r1, r2, -t_inv, rot)
    for rot in range(n):
        rho = r.rotate(rot)
        for cut in range(1, n):
            r1, r2 = Word(rho[:cut], k), Word(rho[cut:], k)
            if (len(r1) == cut and len(r2) == n - cut and not (r1.support() & r2.support())
                    and in_commutator_subgroup(r1) and in_commutator_subgroup(r2)):
                return Decomposition(1, r1, r2, None, rot)
    return None


# --- bound report -----------------------------------------------------------

@dataclass(frozen=True)
class Bound:
    quantity: str       # "simvol" or "scl"
    side: str           # "lower" or "upper"
    value: Fraction
    strict: bool
    provenance: str


@dataclass
class BoundReport:
    word: Word
    scl_input: Optional[Fraction]
    bounds: list = field(default_factory=list)
    root: Optional[Word] = None
    power: int = 1
    piece_report: Optional[PieceReport] = None
    decomposition: Optional[Decomposition] = None

    def interval(self, quantity: str = "simvol") -> tuple:
        """Best (lower, upper) pair; ``None`` where nothing was emitted."""
        lows = [b.value for b in self.bounds if b.quantity == quantity and b.side == "lower"]
        ups = [b.value for b in self.bounds if b.quantity == quantity and b.side == "upper"]
        return (max(lows) if lows else None, min(ups) if ups else None)

    def contains(self, value: Fraction, quantity: str = "simvol") -> bool:
        for b in self.bounds:
            if b.quantity != quantity:
                continue
            if b.side == "lower" and (value < b.value):
                return False
            if b.side == "upper" and (value > b.value or (b.strict and value == b.value)):
                return False
        return True


def small_cancellation_simvol_floor(n: int) -> Fraction:
    """Lower bound for the simplicial volume of a C'(1/n) relator, n >= 7, without scl."""
    return Fraction((n - 6) ** 2, 3 * n)


def bound_report(r: Word, scl: Optional[Fraction] = None) -> BoundReport:
    if not r:
        raise EmptyWord("relator must be non-trivial")
    if not in_commutator_subgroup(r):
        raise NotInCommutatorSubgroup(f"{render(r)} has abelianization {abelianize(r)}")
    if scl is not None:
        scl = Fraction(scl)
        if scl < SCL_GAP:
            raise InvalidScl(f"scl = {scl} violates the 1/2 gap for non-trivial elements of F'")
    dec = primitive_root(r)
    report = BoundReport(r, scl, root=dec.root, power=dec.exponent)
    add = report.bounds.append

    if scl is not None:
        add(Bound("simvol", "upper", 4 * scl, True, "weak-upper"))

    if dec.exponent == 1:
        pieces = max_piece_length(dec.root)
        report.piece_report = pieces
        n = pieces.c_prime_threshold
        if n is not None and n >= 7:
            scl_floor = Fraction(n - 6, 12)
            if scl is not None and scl < scl_floor:
                raise InvalidScl(f"scl = {scl} is below {scl_floor}, forced by C'(1/{n})")
            add(Bound("scl", "lower", scl_floor, False, f"small-cancellation-floor C'(1/{n})"))
            add(Bound("simvol", "lower", small_cancellation_simvol_floor(n), False,
                      f"small-cancellation-floor C'(1/{n})"))
            if scl is not None:
                add(Bound("simvol", "lower", (1 - Fraction(6, n)) * 4 * scl, False,
                          f"small-cancellation C'(1/{n})"))
    elif dec.exponent >= 7:
        if scl is not None:
            m = dec.exponent
            add(Bound("simvol", "lower", (1 - Fraction(6, m)) * 4 * scl, False, f"proper-power N={m}"))

    decomposition = detect_decomposable(dec.root ** dec.exponent)
    report.decomposition = decomposition
    if decomposition is not None and scl is not None:
        exact = 4 * (scl - SCL_GAP)
        add(Bound("simvol", "lower", exact, False, f"decomposable case {decomposition.kind}"))
        add(Bound("simvol", "upper", exact, False, f"decomposable case {decomposition.kind}"))

    for quantity in ("simvol", "scl"):
        lo, hi = report.interval(quantity)
        if lo is not None and hi is not None and (lo > hi or (lo == hi and any(
                b.strict and b.value == hi for b in report.bounds if b.quantity == quantity and b.side == "upper"))):
            raise InvalidScl(f"supplied scl = {scl} yields an empty {quantity} interval [{lo}, {hi}]")
    return report
