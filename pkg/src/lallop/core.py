"""The lallop linear program.

Variables are fragment weights.  Rows are, in order: the slice
``nu0 = 1`` (row 0), one flip-balance row per rectangle pair ``{R, iota R}``,
and one slot-balance row per ordered pair that some fragment emits or
consumes.  Everything is scaled by ``K = 2 M |r|`` so that the matrix and
the costs are small integers: the slice reads ``sum nu_int * a = K`` and the
objective ``2 (lambda0 - nubar0)`` equals ``sum cost_int * a / K``.

The full matrix is materialized.  The exact solve runs the rational simplex
on a working set of columns and prices every other column exactly against
the working duals (partial pricing), so the final answer carries a dual
certificate checked against all columns.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Optional

import numpy as np
from scipy import sparse

from . import pods as P
from .errors import (EmptyWord, InternalModelError, NotInCommutatorSubgroup, NotRootFree,
                     NumericallyUnstable, ResourceLimit)
from .ratlp import INFEASIBLE, OPTIMAL, UNBOUNDED, IncrementalSimplex, LinearProgram
from .words import Word, abelianize, cyclically_reduce, in_commutator_subgroup, minimal_period, primitive_root, render

DEFAULT_BUDGET = 5_000_000
MODES = ("full", "truncated")


def enumerate_fragments(r: Word, mode: str = "full") -> dict:
    """Fragments by kind; bipods and tripods in canonical rotation."""
    G = P.FollowGraph(r)
    succ = {R: set(v) for R, v in G.succ.items()}
    out = {k: [] for k in P.FRAGMENT_KINDS}
    bp, tp = set(), set()
    for A in G.rects:
        for B in G.succ[A]:
            if A in succ[B]:
                bp.add(P.canonical_rotation((A, B)))
            for C in G.succ[B]:
                if A in succ[C]:
                    tp.add(P.canonical_rotation((A, B, C)))
    out["BP"] = [("BP",) + p for p in sorted(bp)]
    out["TP"] = [("TP",) + p for p in sorted(tp)]
    for R in G.rects:
        for Pr in G.pred.get(R, ()):
            for T in G.succ[R]:
                out["OT1"].append(("OT1", R, Pr, T))
                out["OT2"].append(("OT2", R, Pr, T))
    if mode == "full":
        edges = [(A, B) for A in G.rects for B in G.succ[A]]
        for S in G.rects:
            for A, B in edges:
                out["DOTP"].append(("DOTP", S, A, B))
    return out


def fragment_count(r: Word, mode: str = "full") -> int:
    """Column count without materializing DOTP columns."""
    G = P.FollowGraph(r)
    succ = {R: set(v) for R, v in G.succ.items()}
    edges = sum(len(v) for v in G.succ.values())
    bp = {P.canonical_rotation((A, B)) for A in G.rects for B in G.succ[A] if A in succ[B]}
    tp = {P.canonical_rotation((A, B, C)) for A in G.rects for B in G.succ[A] for C in G.succ[B] if A in succ[C]}
    ot = sum(len(G.pred.get(R, ())) * len(G.succ[R]) for R in G.rects)
    dotp = len(G.rects) * edges if mode == "full" else 0
    return len(bp) + len(tp) + 2 * ot + dotp


@dataclass
class LallopProgram:
    root: Word
    M: int
    mode: str
    rects: list
    fragments: list
    cost: np.ndarray             # int64, scaled by K
    nu: np.ndarray               # int64, scaled by K
    matrix: sparse.csc_matrix    # int64 rows x columns
    row_labels: list
    K: int
    timings: dict = field(default_factory=dict)

    @property
    def num_columns(self) -> int:
        return len(self.fragments)

    @property
    def num_rows(self) -> int:
        return len(self.row_labels)

    def counts(self) -> dict:
        out = {k: 0 for k in P.FRAGMENT_KINDS}
        for f in self.fragments:
            out[f[0]] += 1
        return out

    def column(self, j: int) -> list:
        lo, hi = self.matrix.indptr[j], self.matrix.indptr[j + 1]
        return list(zip(self.matrix.indices[lo:hi].tolist(), self.matrix.data[lo:hi].tolist()))

    def rhs(self, i: int) -> int:
        return self.K if i == 0 else 0

    def to_linear_program(self, cols=None) -> tuple:
        """Exact LP over ``cols`` (all by default) and the rows they touch.

        Returns ``(lp, cols, rows)``; the objective is scaled by ``1/K`` so
        the LP value is the lallop value.
        """
        cols = list(range(self.num_columns)) if cols is None else list(cols)
        colrows = [self.column(j) for j in cols]
        rows = sorted({0} | {i for cr in colrows for i, _ in cr})
        pos = {i: k for k, i in enumerate(rows)}
        lp = LinearProgram("min")
        coeffs = [dict() for _ in rows]
        for k, (j, cr) in enumerate(zip(cols, colrows)):
            lp.add_variable(P.render_fragment(self.fragments[j]), Fraction(int(self.cost[j]), self.K))
            for i, v in cr:
                coeffs[pos[i]][k] = v
        for k, i in enumerate(rows):
            lp.add_constraint(coeffs[k], "=", self.rhs(i), name=self.row_labels[i])
        return lp, cols, rows


def _check_input(r: Word, M: int):
    if not r:
        raise EmptyWord("the trivial word has no lallop program")
    if not r.is_cyclically_reduced():
        raise NotRootFree(f"{render(r)} is not cyclically reduced")
    if minimal_period(r.letters) != len(r):
        raise NotRootFree(f"{render(r)} is a proper power; pass its root and M")
    if M < 1:
        raise ValueError("M must be a positive integer")
    if not in_commutator_subgroup(r ** M):
        raise NotInCommutatorSubgroup(f"{render(r ** M)} has abelianization {abelianize(r ** M)}")


def build_program(r: Word, M: int = 1, mode: str = "full", budget: int = DEFAULT_BUDGET) -> LallopProgram:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    _check_input(r, M)
    t0 = time.perf_counter()
    expected = fragment_count(r, mode)
    if expected > budget:
        raise ResourceLimit(f"{expected} fragments exceed the budget of {budget}")
    frags = enumerate_fragments(r, mode)
    fragments = [f for k in P.FRAGMENT_KINDS for f in frags[k]]
    rects = P.rectangles_of(r)
    K = 2 * M * len(r)

    row_labels = ["slice"]
    flip_row = {}
    for R in rects:
        key = min(R, R.flip())
        if key not in flip_row:
            flip_row[key] = len(row_labels)
            row_labels.append(f"flip {key}~{key.flip()}")
    slot_row = {}

    def slot(pair):
        if pair not in slot_row:
            slot_row[pair] = len(row_labels)
            row_labels.append(f"slot {pair[0]}|{pair[1]}")
        return slot_row[pair]

    one = Fraction(1)
    cost = np.empty(len(fragments), dtype=np.int64)
    nu = np.empty(len(fragments), dtype=np.int64)
    indptr = [0]
    indices, data = [], []
    for j, f in enumerate(fragments):
        lam, nu_j, nubar_j = P.fragment_values(f, one)
        cost[j] = int(K * 2 * lam - 2 * nubar_j)
        nu[j] = int(nu_j)
        col = {}
        if nu[j]:
            col[0] = int(nu_j)
        for R in P.owned_rectangles(f):
            key = min(R, R.flip())
            col[flip_row[key]] = col.get(flip_row[key], 0) + (1 if R == key else -1)
        e, c = P.emitted_pair(f), P.consumed_pair(f)
        if e is not None:
            i = slot(e)
            col[i] = col.get(i, 0) + 1
        if c is not None:
            i = slot(c)
            col[i] = col.get(i, 0) - 1
        for i in sorted(col):
            if col[i]:
                indices.append(i)
                data.append(col[i])
        indptr.append(len(indices))
    matrix = sparse.csc_matrix((np.array(data, dtype=np.int64), np.array(indices, dtype=np.int64),
                                np.array(indptr, dtype=np.int64)), shape=(len(row_labels), len(fragments)))
    prog = LallopProgram(r, M, mode, rects, fragments, cost, nu, matrix, row_labels, K)
    prog.timings["build"] = time.perf_counter() - t0
    return prog


# --- exact pricing ------------------------------------------------------------------

_LIMB = 1 << 30


def _exact_transpose_product(AT: sparse.csr_matrix, Y: list) -> np.ndarray:
    """``AT @ Y`` for arbitrary Python integers ``Y``, exactly, as an object array.

    Y is split into base-2^30 limbs so each partial product fits in int64.
    """
    out = np.zeros(AT.shape[0], dtype=object)
    for sign in (1, -1):
        mags = [max(sign * y, 0) for y in Y]
        shift = 0
        while any(mags):
            limb = np.array([m % _LIMB for m in mags], dtype=np.int64)
            part = AT @ limb
            out += part.astype(object) * (sign << shift) if shift else part.astype(object) * sign
            mags = [m // _LIMB for m in mags]
            shift += 30
    return out


def reduced_costs(prog: LallopProgram, duals: dict, phase: int = 2) -> tuple:
    """Exact reduced costs of every column, as ``(numerators, L)`` with rc_j = numerators[j] / L.

    ``duals`` maps row index to Fraction (missing rows are 0) for the
    program scaled so the objective is ``cost / K``.  Phase 1 uses zero costs.
    """
    L = lcm(*(Fraction(y).denominator for y in duals.values())) if duals else 1
    Y = [0] * prog.num_rows
    for i, y in duals.items():
        Y[i] = int(Fraction(y) * L)
    AT = prog._at if hasattr(prog, "_at") else None
    if AT is None:
        AT = prog.matrix.T.tocsr()
        prog._at = AT
    ay = _exact_transpose_product(AT, Y)
    if phase == 1:
        return -ay, L
    # cost_j / K - (A^T y)_j   scaled by K * L
    return prog.cost.astype(object) * L - ay * prog.K, L * prog.K


# --- solving -------------------------------------------------------------------------

@dataclass
class LallopResult:
    value: Optional[Fraction]
    root: Word
    M: int
    mode: str
    solver: str
    certificate: dict              # fragment -> Fraction weight
    duals: dict                    # row label -> Fraction
    verified: bool
    float_value: Optional[float] = None
    basis_size: int = 0
    counts: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    info: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        from .ratlp import _frac

        return {
            "value": _frac(self.value) if self.value is not None else None,
            "float_value": self.float_value,
            "verified": self.verified,
            "root": render(self.root),
            "M": self.M,
            "mode": self.mode,
            "solver": self.solver,
            "basis_size": self.basis_size,
            "fragment_counts": self.counts,
            "timings": {k: round(v, 3) for k, v in self.timings.items()},
        }

    def certificate_document(self) -> dict:
        from .ratlp import _frac

        doc = self.as_dict()
        doc["fragments"] = [{"fragment": P.render_fragment(f), "kind": f[0],
                             "rectangles": [list(R) for R in f[1:]], "weight": _frac(w)}
                            for f, w in sorted(self.certificate.items())]
        doc["duals"] = {k: _frac(v) for k, v in sorted(self.duals.items()) if v}
        return doc


def solve_program(prog: LallopProgram, seed=(), batch: int = 60, log=None, max_rounds: int = 100000):
    """Exact optimum of the full program; returns (value, weights, duals by row index, rounds)."""
    master = IncrementalSimplex()
    master.add_row(0, prog.K)

    def add(cols):
        for j in cols:
            entries = prog.column(j)
            for i, _ in entries:
                if not master.has_row(i):
                    master.add_row(i, prog.rhs(i))
            master.add_column(j, dict(entries), Fraction(int(prog.cost[j]), prog.K))

    seed = sorted(set(seed))
    if not seed:
        seed = [j for j, f in enumerate(prog.fragments) if f[0] in ("BP", "TP")]
    add(seed)
    for rnd in range(max_rounds):
        sol = master.solve()
        if sol.status == UNBOUNDED:
            raise InternalModelError("lallop program is unbounded")
        phase = 1 if sol.status == INFEASIBLE else 2
        duals = sol.duals
        rc, _ = reduced_costs(prog, duals, phase)
        neg = np.nonzero(rc < 0)[0]
        if log:
            log(f"round {rnd}: {len(master.col_of)} columns, {len(master.rows)} rows, {sol.status}"
                f"{'' if phase == 1 else ' value ' + str(sol.value)}, {len(neg)} improving")
        if len(neg) == 0:
            if phase == 1:
                raise InternalModelError("lallop program has no normalizable point")
            weights = {j: v for j, v in sol.point.items() if v}
            return sol.value, weights, duals, rnd + 1
        order = sorted(neg.tolist(), key=lambda j: rc[j])
        add(order[:batch])
    raise InternalModelError("pricing did not converge")


def float_solve(prog: LallopProgram, tol: float = 1e-9):
    """HiGHS on the full program; returns (value, support columns, float duals, float reduced costs)."""
    from scipy.optimize import linprog

    A = prog.matrix.astype(np.float64)
    b = np.zeros(prog.num_rows)
    b[0] = prog.K
    c = prog.cost.astype(np.float64) / prog.K
    res = linprog(c, A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    if res.status == 3:
        raise InternalModelError("lallop program is unbounded")
    if res.status == 2:
        raise InternalModelError("lallop program has no normalizable point")
    if res.status != 0:
        raise NumericallyUnstable(f"HiGHS failed: {res.message}")
    resid = float(np.max(np.abs(A @ res.x - b))) if prog.num_rows else 0.0
    if resid > tol * prog.K * 10:
        raise NumericallyUnstable(f"float residual {resid:.3g} exceeds tolerance")
    y = res.eqlin.marginals
    rc = c - A.T @ y
    support = np.nonzero(res.x > tol)[0].tolist()
    return float(res.fun), support, y, rc


def _rational_duals(prog: LallopProgram, y, value: Fraction):
    """Snap float duals to nearby rationals; keep them only if they certify ``value`` exactly."""
    for den in (10 ** 4, 10 ** 6, 10 ** 9):
        yq = {}
        for i, v in enumerate(y):
            if abs(v) > 1e-12:
                q = Fraction(float(v)).limit_denominator(den)
                if q:
                    yq[i] = q
        if yq.get(0, 0) * prog.K != value:
            continue
        rc, _ = reduced_costs(prog, yq, 2)
        if not np.any(rc < 0):
            return yq
    return None


def _solve_from_float(prog: LallopProgram, tol: float, log=None):
    float_value, support, y, rc = float_solve(prog, tol)
    master = IncrementalSimplex()
    master.add_row(0, prog.K)
    for j in support:
        for i, _ in prog.column(j):
            if not master.has_row(i):
                master.add_row(i, prog.rhs(i))
        master.add_column(j, dict(prog.column(j)), Fraction(int(prog.cost[j]), prog.K))
    sol = master.solve()
    if sol.status == OPTIMAL:
        duals = _rational_duals(prog, y, sol.value)
        if duals is not None:
            if log:
                log(f"float duals certify {sol.value} on a support of {len(support)} columns")
            return float_value, sol.value, dict(sol.point), duals, 0
    if log:
        log("float duals do not certify the support; pricing exactly")
    near = np.nonzero(rc < 1e-7)[0].tolist()
    value, weights, duals, rounds = solve_program(prog, set(support) | set(near), log=log)
    return float_value, value, weights, duals, rounds


def verify_weights(prog: LallopProgram, weights: dict, value: Fraction, duals: Optional[dict] = None) -> bool:
    """Exact check that ``weights`` is feasible with objective ``value``, and that the duals prove optimality."""
    lhs = {}
    for j, w in weights.items():
        if w < 0:
            return False
        for i, v in prog.column(j):
            lhs[i] = lhs.get(i, 0) + v * w
    for i in range(prog.num_rows):
        if lhs.get(i, 0) != prog.rhs(i):
            return False
    obj = sum((Fraction(int(prog.cost[j]), prog.K) * w for j, w in weights.items()), Fraction(0))
    if obj != value:
        return False
    if duals is not None:
        rc, _ = reduced_costs(prog, duals, 2)
        if np.any(rc < 0):
            return False
        if Fraction(duals.get(0, 0)) * prog.K != value:
            return False
    return True


def lallop(w: Word, mode: str = "full", solver: str = "exact", tol: float = 1e-9,
           budget: int = DEFAULT_BUDGET, log=None) -> LallopResult:
    """Exact lallop value of ``w`` (its primitive root and power are found first)."""
    if not w:
        raise EmptyWord("lallop of the trivial word is undefined")
    if not in_commutator_subgroup(w):
        raise NotInCommutatorSubgroup(f"{render(w)} has abelianization {abelianize(w)}")
    core, _ = cyclically_reduce(w)
    dec = primitive_root(core)
    prog = build_program(dec.root, dec.exponent, mode, budget)
    timings = dict(prog.timings)
    float_value = None
    t0 = time.perf_counter()
    if solver == "float":
        float_value, value, weights, duals, rounds = _solve_from_float(prog, tol, log)
        if abs(float(value) - float_value) > max(tol, 1e-6) * (1 + abs(float(value))):
            raise NumericallyUnstable(f"float value {float_value} disagrees with exact {value}")
    elif solver == "exact":
        value, weights, duals, rounds = solve_program(prog, log=log)
    else:
        raise ValueError("solver must be 'exact' or 'float'")
    timings["solve"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    verified = verify_weights(prog, weights, value, duals)
    timings["verify"] = time.perf_counter() - t0
    if not verified:
        raise InternalModelError("exact certificate failed verification")
    return LallopResult(value, dec.root, dec.exponent, mode, solver,
                        {prog.fragments[j]: v for j, v in weights.items()},
                        {prog.row_labels[i]: y for i, y in duals.items()},
                        verified, float_value, len(weights), prog.counts(), timings,
                        {"pricing_rounds": rounds, "columns": prog.num_columns, "rows": prog.num_rows})


def verify_certificate(doc: dict, word: Word) -> bool:
    """Re-check a certificate document produced by :meth:`LallopResult.certificate_document`."""
    core, _ = cyclically_reduce(word)
    dec = primitive_root(core)
    prog = build_program(dec.root, dec.exponent, doc["mode"])
    index = {f: j for j, f in enumerate(prog.fragments)}
    Rect = P.Rectangle
    weights = {}
    for item in doc["fragments"]:
        frag = (item["kind"],) + tuple(Rect(*R) for R in item["rectangles"])
        if frag not in index:
            return False
        weights[index[frag]] = Fraction(item["weight"])
    labels = {lab: i for i, lab in enumerate(prog.row_labels)}
    duals = {}
    for lab, y in doc.get("duals", {}).items():
        if lab not in labels:
            return False
        duals[labels[lab]] = Fraction(y)
    return verify_weights(prog, weights, Fraction(doc["value"]), duals if "duals" in doc else None)


def write_certificate(result: LallopResult, path):
    with open(path, "w") as fh:
        json.dump(result.certificate_document(), fh, indent=2)
        fh.write("\n")
