"""Exact-rational linear programming.

``solve_exact`` is a two-phase primal simplex over :class:`fractions.Fraction`
with sparse tableau rows.  Pricing is Dantzig's rule; after a run of
degenerate pivots it falls back to Bland's rule until the objective moves,
which rules out cycling.  Every optimal answer carries a dual vector and is
re-verified against the original constraints before it is returned.

``solve_columns`` runs the same exact simplex on a growing subset of the
columns and prices the rest exactly (column generation).  The lallop
programs have hundreds of thousands of columns but small optimal supports,
so this is how they are solved exactly; ``solve_float`` seeds it with the
support of a HiGHS solution.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .errors import NoNormalizablePoint, NumericallyUnstable

OPTIMAL = "Optimal"
INFEASIBLE = "Infeasible"
UNBOUNDED = "Unbounded"
RELATIONS = ("=", "<=", ">=")


@dataclass
class Constraint:
    coeffs: dict
    relation: str
    rhs: Fraction
    name: Optional[str] = None


class LinearProgram:
    """Variables are non-negative; rows are sparse dicts ``{var index: coefficient}``."""

    def __init__(self, sense: str = "min"):
        self.sense = sense
        self.var_names: list = []
        self.constraints: list[Constraint] = []
        self.objective: dict = {}
        self._columns = None

    @property
    def num_vars(self) -> int:
        return len(self.var_names)

    def add_variable(self, name=None, cost=0) -> int:
        idx = len(self.var_names)
        self.var_names.append(name if name is not None else f"x{idx}")
        if cost:
            self.objective[idx] = Fraction(cost)
        self._columns = None
        return idx

    def add_variables(self, count: int, prefix: str = "x") -> list:
        return [self.add_variable(f"{prefix}{self.num_vars}") for _ in range(count)]

    def add_constraint(self, coeffs, relation: str, rhs=0, name=None) -> int:
        if relation not in RELATIONS:
            raise ValueError(f"relation must be one of {RELATIONS}")
        row = {int(j): Fraction(v) for j, v in dict(coeffs).items() if v}
        for j in row:
            if not 0 <= j < self.num_vars:
                raise IndexError(f"unknown variable {j}")
        self.constraints.append(Constraint(row, relation, Fraction(rhs), name))
        self._columns = None
        return len(self.constraints) - 1

    def set_objective(self, coeffs, sense: Optional[str] = None):
        self.objective = {int(j): Fraction(v) for j, v in dict(coeffs).items() if v}
        if sense is not None:
            self.sense = sense

    def columns(self) -> list:
        if self._columns is None:
            cols = [[] for _ in range(self.num_vars)]
            for i, con in enumerate(self.constraints):
                for j, v in con.coeffs.items():
                    cols[j].append((i, v))
            self._columns = cols
        return self._columns

    def objective_value(self, point: dict) -> Fraction:
        return sum((c * point.get(j, 0) for j, c in self.objective.items()), Fraction(0))

    def violations(self, point: dict) -> list:
        bad = []
        for j, v in point.items():
            if v < 0:
                bad.append(("bound", j, v))
        for i, con in enumerate(self.constraints):
            lhs = sum((c * point.get(j, 0) for j, c in con.coeffs.items()), Fraction(0))
            ok = {"=": lhs == con.rhs, "<=": lhs <= con.rhs, ">=": lhs >= con.rhs}[con.relation]
            if not ok:
                bad.append(("row", i, lhs, con.relation, con.rhs))
        return bad

    def restricted(self, cols: Sequence[int]) -> tuple:
        """Sub-program on the given columns; returns (lp, column map sub -> full)."""
        cols = list(cols)
        pos = {j: k for k, j in enumerate(cols)}
        sub = LinearProgram(self.sense)
        sub.var_names = [self.var_names[j] for j in cols]
        sub.objective = {pos[j]: c for j, c in self.objective.items() if j in pos}
        for con in self.constraints:
            sub.constraints.append(Constraint({pos[j]: v for j, v in con.coeffs.items() if j in pos},
                                              con.relation, con.rhs, con.name))
        return sub, cols

    # -- plain-text export ------------------------------------------------------------

    def to_text(self) -> str:
        """CPLEX-LP-style text with rationals rendered ``p/q``."""

        def term(c, j, first):
            sign = "-" if c < 0 else ("" if first else "+")
            mag = abs(c)
            coef = "" if mag == 1 else f"{_frac(mag)} "
            return f"{sign} {coef}{self.var_names[j]}".strip() if first else f"{sign} {coef}{self.var_names[j]}"

        def expr(row):
            if not row:
                return "0"
            items = sorted(row.items())
            return " ".join(term(c, j, k == 0) for k, (j, c) in enumerate(items))

        lines = ["Minimize" if self.sense == "min" else "Maximize", f" obj: {expr(self.objective)}", "Subject To"]
        for i, con in enumerate(self.constraints):
            name = con.name or f"c{i}"
            lines.append(f" {name}: {expr(con.coeffs)} {con.relation} {_frac(con.rhs)}")
        lines.append("Bounds")
        for name in self.var_names:
            lines.append(f" {name} >= 0")
        lines.append("End")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> LinearProgram:
        lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.strip().startswith("\\")]
        sense = "min" if lines[0].lower().startswith("min") else "max"
        lp = cls(sense)
        names = {}
        section = None
        pending = []
        for ln in lines[1:]:
            low = ln.lower()
            if low in ("subject to", "st", "s.t."):
                section = "st"
                continue
            if low == "bounds":
                section = "bounds"
                continue
            if low == "end":
                break
            if section is None:
                pending.append(("obj", ln.split(":", 1)[1]))
            elif section == "st":
                pending.append(("row", ln))
            elif section == "bounds":
                var = ln.split(">=")[0].strip()
                if var not in names:
                    names[var] = lp.add_variable(var)

        def parse_expr(s):
            toks = s.replace("+", " + ").replace("-", " - ").split()
            row = {}
            sign, coef = 1, Fraction(1)
            for tok in toks:
                if tok == "+":
                    sign, coef = 1, Fraction(1)
                elif tok == "-":
                    sign, coef = -1, Fraction(1)
                elif tok == "0" and not row:
                    continue
                elif tok[0].isdigit():
                    coef = Fraction(tok)
                else:
                    if tok not in names:
                        names[tok] = lp.add_variable(tok)
                    row[names[tok]] = row.get(names[tok], 0) + sign * coef
                    sign, coef = 1, Fraction(1)
            return row

        rows = []
        for kind, body in pending:
            if kind == "obj":
                obj = parse_expr(body)
            else:
                name, rest = body.split(":", 1)
                for rel in ("<=", ">=", "="):
                    if rel in rest:
                        lhs, rhs = rest.split(rel)
                        rows.append((parse_expr(lhs), rel, Fraction(rhs.strip()), name.strip()))
                        break
        lp.set_objective(obj)
        for row, rel, rhs, name in rows:
            lp.add_constraint(row, rel, rhs, name)
        return lp


def _frac(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass
class Solution:
    status: str
    value: Optional[Fraction] = None
    point: dict = field(default_factory=dict)
    basis: list = field(default_factory=list)
    duals: list = field(default_factory=list)       # one per constraint, sign convention of the LP sense
    ray: dict = field(default_factory=dict)
    exact: bool = True
    verified: bool = False
    residual: float = 0.0
    iterations: int = 0
    info: dict = field(default_factory=dict)


# --- tableau simplex ------------------------------------------------------------------


class _Tableau:
    """Standard-form tableau ``min c x, A x = b, x >= 0, b >= 0`` with sparse rows."""

    def __init__(self, lp: LinearProgram):
        m, n = len(lp.constraints), lp.num_vars
        self.m, self.n = m, n
        rows, rhs, ident, flipped = [], [], [], []
        extra = n
        kinds = {}
        for con in lp.constraints:
            row = dict(con.coeffs)
            b = con.rhs
            rel = con.relation
            flip = b < 0
            if flip:
                row = {j: -v for j, v in row.items()}
                b = -b
                rel = {"=": "=", "<=": ">=", ">=": "<="}[rel]
            if rel != "=":
                s = extra
                extra += 1
                row[s] = Fraction(1 if rel == "<=" else -1)
                kinds[s] = "slack"
            if rel == "<=":
                ident.append(s)
            else:
                a = extra
                extra += 1
                row[a] = Fraction(1)
                kinds[a] = "art"
                ident.append(a)
            rows.append(row)
            rhs.append(b)
            flipped.append(flip)
        self.rows, self.rhs = rows, rhs
        self.ident, self.flipped = ident, flipped
        self.kinds = kinds
        self.ncols = extra
        self.basis = list(ident)
        self.where = {b: i for i, b in enumerate(self.basis)}
        self.iterations = 0

    def is_art(self, j) -> bool:
        return self.kinds.get(j) == "art"

    def reduced_costs(self, cost: dict) -> dict:
        d = {}
        for j, c in cost.items():
            d[j] = Fraction(c)
        for i, b in enumerate(self.basis):
            cb = cost.get(b, 0)
            if cb:
                for j, v in self.rows[i].items():
                    d[j] = d.get(j, 0) - cb * v
        return d

    def objective(self, cost: dict) -> Fraction:
        return sum((cost.get(b, 0) * self.rhs[i] for i, b in enumerate(self.basis)), Fraction(0))

    def pivot(self, r: int, e: int, d: dict):
        row = self.rows[r]
        pv = row[e]
        if pv != 1:
            inv = 1 / pv
            row = {j: v * inv for j, v in row.items()}
            self.rows[r] = row
            self.rhs[r] *= inv
        b_r = self.rhs[r]
        for i, other in enumerate(self.rows):
            if i == r:
                continue
            f = other.get(e)
            if not f:
                continue
            for j, v in row.items():
                nv = other.get(j, 0) - f * v
                if nv:
                    other[j] = nv
                else:
                    other.pop(j, None)
            self.rhs[i] -= f * b_r
        f = d.get(e)
        if f:
            for j, v in row.items():
                nv = d.get(j, 0) - f * v
                if nv:
                    d[j] = nv
                else:
                    d.pop(j, None)
        old = self.basis[r]
        del self.where[old]
        self.basis[r] = e
        self.where[e] = r
        self.iterations += 1

    def run(self, d: dict, allowed: Callable[[int], bool], max_iter: int) -> str:
        degenerate_streak = 0
        bland = False
        while True:
            if self.iterations >= max_iter:
                raise RuntimeError("simplex iteration limit reached")
            cands = [(v, j) for j, v in d.items() if v < 0 and j not in self.where and allowed(j)]
            if not cands:
                return OPTIMAL
            e = min(cands, key=lambda t: t[1])[1] if bland else min(cands)[1]
            best, r = None, None
            for i, row in enumerate(self.rows):
                a = row.get(e)
                if a is not None and a > 0:
                    ratio = self.rhs[i] / a
                    if best is None or ratio < best or (ratio == best and self.basis[i] < self.basis[r]):
                        best, r = ratio, i
            if r is None:
                self.unbounded_column = e
                return UNBOUNDED
            if best == 0:
                degenerate_streak += 1
                if degenerate_streak > 50:
                    bland = True
            else:
                degenerate_streak = 0
                bland = False
            self.pivot(r, e, d)

    def duals(self, d: dict, cost: dict) -> list:
        """y = c_B B^-1 read off the identity columns, mapped back to original row signs."""
        ys = []
        for i, col in enumerate(self.ident):
            y = cost.get(col, 0) - d.get(col, 0)
            ys.append(-y if self.flipped[i] else y)
        return ys


def solve_exact(lp: LinearProgram, max_iter: int = 10 ** 7) -> Solution:
    """Two-phase exact simplex; returns a verified Solution."""
    tab = _Tableau(lp)
    sign = 1 if lp.sense == "min" else -1
    cost = {j: sign * c for j, c in lp.objective.items()}

    arts = [j for j in range(tab.ncols) if tab.is_art(j)]
    phase1 = {a: Fraction(1) for a in arts}
    if arts:
        d1 = tab.reduced_costs(phase1)
        tab.run(d1, lambda j: True, max_iter)
        if tab.objective(phase1) > 0:
            farkas = tab.duals(d1, phase1)
            return Solution(INFEASIBLE, duals=farkas, iterations=tab.iterations)
        # drive artificials out of the basis where possible
        for i in range(tab.m):
            b = tab.basis[i]
            if tab.is_art(b):
                for j, v in tab.rows[i].items():
                    if not tab.is_art(j) and v != 0:
                        tab.pivot(i, j, d1)
                        break

    d2 = tab.reduced_costs(cost)
    status = tab.run(d2, lambda j: not tab.is_art(j), max_iter)
    if status == UNBOUNDED:
        e = tab.unbounded_column
        ray = {e: Fraction(1)} if e < lp.num_vars else {}
        for i, b in enumerate(tab.basis):
            a = tab.rows[i].get(e)
            if a and b < lp.num_vars:
                ray[b] = -a
        return Solution(UNBOUNDED, ray=ray, iterations=tab.iterations)

    point = {b: tab.rhs[i] for i, b in enumerate(tab.basis) if b < lp.num_vars and tab.rhs[i]}
    duals = tab.duals(d2, cost)
    if sign < 0:
        duals = [-y for y in duals]
    sol = Solution(OPTIMAL, lp.objective_value(point), point,
                   [b for b in tab.basis if b < lp.num_vars], duals, iterations=tab.iterations)
    verify_solution(lp, sol)
    return sol


def dual_violations(lp: LinearProgram, duals: Sequence, cols: Optional[Iterable[int]] = None) -> list:
    """Columns whose reduced cost has the wrong sign for optimality, plus row-sign violations."""
    sign = 1 if lp.sense == "min" else -1
    bad = []
    for i, con in enumerate(lp.constraints):
        y = sign * duals[i]
        if (con.relation == ">=" and y < 0) or (con.relation == "<=" and y > 0):
            bad.append(("dual-sign", i, duals[i]))
    columns = lp.columns()
    for j in (range(lp.num_vars) if cols is None else cols):
        rc = sign * lp.objective.get(j, 0) - sum((sign * duals[i] * v for i, v in columns[j]), Fraction(0))
        if rc < 0:
            bad.append(("reduced-cost", j, rc))
    return bad


def verify_solution(lp: LinearProgram, sol: Solution):
    """Exact primal feasibility, objective, dual feasibility and zero duality gap."""
    if lp.violations(sol.point):
        raise AssertionError(f"primal point violates {lp.violations(sol.point)[:3]}")
    if lp.objective_value(sol.point) != sol.value:
        raise AssertionError("objective mismatch")
    if dual_violations(lp, sol.duals):
        raise AssertionError(f"dual infeasible: {dual_violations(lp, sol.duals)[:3]}")
    dual_obj = sum((y * con.rhs for y, con in zip(sol.duals, lp.constraints)), Fraction(0))
    if dual_obj != sol.value:
        raise AssertionError(f"duality gap {sol.value - dual_obj}")
    sol.verified = True


# --- column generation -----------------------------------------------------------------

def solve_columns(lp: LinearProgram, seed: Iterable[int] = (), batch: int = 200,
                  pricer: Optional[Callable] = None, max_rounds: int = 10000, log=None) -> Solution:
    """Exact simplex over a growing column subset with exact pricing of the rest.

    ``pricer(duals, phase)`` may replace the default pricing; it must return
    column indices with strictly improving reduced cost (empty when none).
    The returned Solution is verified against the full program.
    """
    active = sorted(set(seed))
    sign = 1 if lp.sense == "min" else -1
    columns = lp.columns()

    def default_pricer(duals, phase):
        scored = []
        for j in range(lp.num_vars):
            c = sign * lp.objective.get(j, 0) if phase == 2 else 0
            rc = c - sum((sign * duals[i] * v if phase == 2 else duals[i] * v for i, v in columns[j]),
                         Fraction(0))
            if rc < 0:
                scored.append((rc, j))
        scored.sort()
        return [j for _, j in scored]

    pricer = pricer or default_pricer
    total_iter = 0
    for rnd in range(max_rounds):
        sub, cols = lp.restricted(active)
        sol = solve_exact(sub)
        total_iter += sol.iterations
        active_set = set(active)
        if sol.status == UNBOUNDED:
            ray = {cols[k]: v for k, v in sol.ray.items()}
            return Solution(UNBOUNDED, ray=ray, iterations=total_iter, info={"rounds": rnd + 1})
        phase = 1 if sol.status == INFEASIBLE else 2
        new = [j for j in pricer(sol.duals, phase) if j not in active_set][:batch]
        if log:
            log(f"round {rnd}: {len(active)} columns, status {sol.status}, "
                f"value {sol.value}, {len(new)} priced in")
        if not new:
            if phase == 1:
                return Solution(INFEASIBLE, duals=sol.duals, iterations=total_iter, info={"rounds": rnd + 1})
            point = {cols[k]: v for k, v in sol.point.items()}
            full = Solution(OPTIMAL, sol.value, point, [cols[k] for k in sol.basis], sol.duals,
                            iterations=total_iter, info={"rounds": rnd + 1, "active_columns": len(active)})
            if pricer is default_pricer:
                verify_solution(lp, full)
            return full
        active = sorted(active_set | set(new))
    raise RuntimeError("column generation did not converge")


# --- Charnes-Cooper ------------------------------------------------------------------------

@dataclass
class FractionalProgram:
    """minimize/maximize (num . x + num0) / (den . x + den0) subject to constraints, x >= 0.

    ``constraints`` are ``(coeffs, relation, rhs)`` triples; when every rhs and
    both constant terms vanish the program is scale invariant and the
    ``floor`` row ``den . x >= floor`` only excludes the origin.
    """

    num_vars: int
    numerator: dict
    denominator: dict
    constraints: list = field(default_factory=list)
    numerator_const: Fraction = Fraction(0)
    denominator_const: Fraction = Fraction(0)
    floor: Fraction = Fraction(1)
    sense: str = "min"

    def homogeneous(self) -> bool:
        return (all(Fraction(rhs) == 0 for _, _, rhs in self.constraints)
                and not self.numerator_const and not self.denominator_const)

    def ratio(self, x: dict) -> Fraction:
        num = sum((Fraction(c) * x.get(j, 0) for j, c in self.numerator.items()), Fraction(self.numerator_const))
        den = sum((Fraction(c) * x.get(j, 0) for j, c in self.denominator.items()),
                  Fraction(self.denominator_const))
        return num / den


def charnes_cooper(fp: FractionalProgram) -> tuple:
    """Linear program equivalent to ``fp`` plus a map from LP points to fp points.

    Homogeneous programs become the slice ``den . x = 1``.  Otherwise the
    classical substitution ``y = t x``, ``t = 1 / (den . x + den0)`` is used
    with an extra variable ``t`` as the last column.
    """
    if not any(fp.denominator.values()) and not fp.denominator_const:
        raise NoNormalizablePoint("denominator is identically zero")
    lp = LinearProgram(fp.sense)
    for j in range(fp.num_vars):
        lp.add_variable(f"x{j}")
    if fp.homogeneous():
        for coeffs, rel, _ in fp.constraints:
            lp.add_constraint(coeffs, rel, 0)
        lp.add_constraint(fp.denominator, "=", 1, name="slice")
        lp.set_objective(fp.numerator)
        return lp, lambda point: dict(point)
    t = lp.add_variable("t")
    for coeffs, rel, rhs in fp.constraints:
        row = dict(coeffs)
        row[t] = row.get(t, 0) - Fraction(rhs)
        lp.add_constraint(row, rel, 0)
    den = dict(fp.denominator)
    den[t] = Fraction(fp.denominator_const)
    lp.add_constraint(den, "=", 1, name="slice")
    obj = dict(fp.numerator)
    obj[t] = Fraction(fp.numerator_const)
    lp.set_objective(obj)

    def back(point):
        tv = point.get(t, 0)
        if not tv:
            raise NoNormalizablePoint("optimum is attained only at infinity")
        return {j: v / tv for j, v in point.items() if j != t}

    return lp, back


def solve_fractional(fp: FractionalProgram, solver=None) -> Solution:
    lp, back = charnes_cooper(fp)
    sol = (solver or solve_exact)(lp)
    if sol.status == INFEASIBLE:
        raise NoNormalizablePoint("no feasible point with positive denominator")
    if sol.status == OPTIMAL:
        sol.info["fractional_point"] = back(sol.point)
    return sol


# --- floating point path ------------------------------------------------------------------

def to_scipy(lp: LinearProgram):
    from scipy import sparse

    sign = 1 if lp.sense == "min" else -1
    c = np.zeros(lp.num_vars)
    for j, v in lp.objective.items():
        c[j] = sign * float(v)
    ub_rows, ub_b, eq_rows, eq_b = [], [], [], []
    for con in lp.constraints:
        if con.relation == "=":
            eq_rows.append(con.coeffs)
            eq_b.append(float(con.rhs))
        elif con.relation == "<=":
            ub_rows.append(con.coeffs)
            ub_b.append(float(con.rhs))
        else:
            ub_rows.append({j: -v for j, v in con.coeffs.items()})
            ub_b.append(-float(con.rhs))

    def mat(rows):
        if not rows:
            return None
        data, ri, ci = [], [], []
        for i, row in enumerate(rows):
            for j, v in row.items():
                data.append(float(v))
                ri.append(i)
                ci.append(j)
        return sparse.csr_matrix((data, (ri, ci)), shape=(len(rows), lp.num_vars))

    return c, mat(ub_rows), np.array(ub_b) if ub_rows else None, mat(eq_rows), np.array(eq_b) if eq_rows else None


def solve_float(lp: LinearProgram, tol: float = 1e-9, verify: bool = False) -> Solution:
    """HiGHS solve; with ``verify`` the support seeds an exact column-generation solve."""
    from scipy.optimize import linprog

    t0 = time.perf_counter()
    c, A_ub, b_ub, A_eq, b_eq = to_scipy(lp)
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    sign = 1 if lp.sense == "min" else -1
    if res.status == 2:
        return Solution(INFEASIBLE, exact=False)
    if res.status == 3:
        return Solution(UNBOUNDED, exact=False)
    if res.status != 0:
        raise NumericallyUnstable(f"HiGHS failed: {res.message}")
    x = res.x
    residual = 0.0
    if A_eq is not None:
        residual = max(residual, float(np.max(np.abs(A_eq @ x - b_eq))) if len(b_eq) else 0.0)
    if A_ub is not None:
        residual = max(residual, float(np.max(np.maximum(A_ub @ x - b_ub, 0))) if len(b_ub) else 0.0)
    residual = max(residual, float(np.max(np.maximum(-x, 0))) if len(x) else 0.0)
    if residual > tol:
        raise NumericallyUnstable(f"residual {residual:.3g} exceeds tolerance {tol:.3g}")
    value = sign * res.fun
    point = {j: float(v) for j, v in enumerate(x) if abs(v) > tol}
    sol = Solution(OPTIMAL, value, point, exact=False, residual=residual,
                   info={"float_seconds": time.perf_counter() - t0})
    if verify:
        support = [j for j, v in enumerate(x) if v > tol]
        exact = solve_columns(lp, seed=support)
        exact.info.update(sol.info)
        exact.info["float_value"] = value
        if exact.status == OPTIMAL and abs(float(exact.value) - value) > max(tol, 1e-6) * (1 + abs(value)):
            raise NumericallyUnstable(f"float value {value} disagrees with exact {exact.value}")
        return exact
    return sol


def rationalize(x: float, max_den: int = 10 ** 6) -> Fraction:
    return Fraction(x).limit_denominator(max_den)


def is_close(a, b, tol: float) -> bool:
    return math.isclose(float(a), float(b), rel_tol=0, abs_tol=tol * (1 + abs(float(b))))


# --- incremental exact simplex ------------------------------------------------------------

class IncrementalSimplex:
    """Exact equality-form simplex that accepts new rows and columns between solves.

    Every row owns an artificial column (identity), kept in the tableau so
    that ``B^-1`` is always available: a new column enters the tableau as
    ``B^-1 a``.  A new row starts with its artificial basic at level 0.  In
    phase 2 artificials never enter, and a basic artificial at level 0 is
    pivoted out as soon as the entering column touches its row, so it never
    becomes positive.  Columns are keyed by caller ids, rows by caller labels.
    """

    def __init__(self):
        self.rows: list = []            # tableau rows: dict col -> Fraction
        self.rhs: list = []
        self.row_index: dict = {}       # caller label -> tableau row
        self.row_labels: list = []
        self.flipped: list = []
        self.art: list = []             # artificial column of each row
        self.basis: list = []
        self.where: dict = {}
        self.cost: dict = {}            # phase-2 costs of structural columns
        self.col_ids: list = []         # tableau column -> caller id (None for artificials)
        self.col_of: dict = {}
        self.iterations = 0

    def _new_col(self, ident) -> int:
        self.col_ids.append(ident)
        return len(self.col_ids) - 1

    def has_row(self, label) -> bool:
        return label in self.row_index

    def add_row(self, label, rhs=0):
        rhs = Fraction(rhs)
        flip = rhs < 0
        a = self._new_col(None)
        i = len(self.rows)
        self.rows.append({a: Fraction(1)})
        self.rhs.append(-rhs if flip else rhs)
        self.row_index[label] = i
        self.row_labels.append(label)
        self.flipped.append(flip)
        self.art.append(a)
        self.basis.append(a)
        self.where[a] = i

    def add_column(self, ident, entries: dict, cost):
        """``entries`` maps row labels (already added) to coefficients."""
        if ident in self.col_of:
            return
        j = self._new_col(ident)
        self.col_of[ident] = j
        self.cost[j] = Fraction(cost)
        col = {}
        for label, v in entries.items():
            k = self.row_index[label]
            col[k] = Fraction(-v if self.flipped[k] else v)
        # tableau column = B^-1 a, read off the artificial (identity) columns
        for i, row in enumerate(self.rows):
            t = Fraction(0)
            for k, v in col.items():
                b = row.get(self.art[k])
                if b:
                    t += b * v
            if t:
                row[j] = t

    def _is_art(self, j) -> bool:
        return self.col_ids[j] is None

    def _reduced(self, costs) -> dict:
        d = {j: c for j, c in costs.items() if c}
        for i, b in enumerate(self.basis):
            cb = costs.get(b, 0)
            if cb:
                for j, v in self.rows[i].items():
                    nv = d.get(j, 0) - cb * v
                    if nv:
                        d[j] = nv
                    else:
                        d.pop(j, None)
        return d

    def _pivot(self, r, e, d):
        row = self.rows[r]
        pv = row[e]
        if pv != 1:
            inv = 1 / pv
            row = {j: v * inv for j, v in row.items()}
            self.rows[r] = row
            self.rhs[r] *= inv
        b_r = self.rhs[r]
        for i, other in enumerate(self.rows):
            if i == r:
                continue
            f = other.get(e)
            if not f:
                continue
            for j, v in row.items():
                nv = other.get(j, 0) - f * v
                if nv:
                    other[j] = nv
                else:
                    del other[j]
            if b_r:
                self.rhs[i] -= f * b_r
        f = d.get(e)
        if f:
            for j, v in row.items():
                nv = d.get(j, 0) - f * v
                if nv:
                    d[j] = nv
                else:
                    d.pop(j, None)
        del self.where[self.basis[r]]
        self.basis[r] = e
        self.where[e] = r
        self.iterations += 1

    def _run(self, d, phase, max_iter):
        streak, bland = 0, False
        while True:
            if self.iterations >= max_iter:
                raise RuntimeError("simplex iteration limit reached")
            cands = [(v, j) for j, v in d.items()
                     if v < 0 and j not in self.where and (phase == 1 or not self._is_art(j))]
            if not cands:
                return OPTIMAL
            e = min(cands, key=lambda t: t[1])[1] if bland else min(cands)[1]
            best, r, art_row = None, None, None
            for i, row in enumerate(self.rows):
                a = row.get(e)
                if a is None:
                    continue
                if phase == 2 and self._is_art(self.basis[i]) and not self.rhs[i]:
                    if art_row is None:
                        art_row = i
                    continue
                if a > 0:
                    ratio = self.rhs[i] / a
                    if best is None or ratio < best or (ratio == best and self.basis[i] < self.basis[r]):
                        best, r = ratio, i
            if art_row is not None:
                r, best = art_row, Fraction(0)
            if r is None:
                self.unbounded_column = e
                return UNBOUNDED
            if best == 0:
                streak += 1
                if streak > 50:
                    bland = True
            else:
                streak, bland = 0, False
            self._pivot(r, e, d)

    def _duals(self, d, costs) -> dict:
        out = {}
        for k, label in enumerate(self.row_labels):
            a = self.art[k]
            y = costs.get(a, 0) - d.get(a, 0)
            if y:
                out[label] = -y if self.flipped[k] else y
        return out

    def solve(self, max_iter: int = 10 ** 8) -> Solution:
        """Optimize from the current basis.  Duals are keyed by row label."""
        if any(self._is_art(b) and self.rhs[i] for i, b in enumerate(self.basis)):
            phase1 = {a: Fraction(1) for a in self.art}
            d1 = self._reduced(phase1)
            self._run(d1, 1, max_iter)
            infeas = sum((self.rhs[i] for i, b in enumerate(self.basis) if self._is_art(b)), Fraction(0))
            if infeas > 0:
                return Solution(INFEASIBLE, duals=self._duals(d1, phase1), iterations=self.iterations)
        d2 = self._reduced(self.cost)
        status = self._run(d2, 2, max_iter)
        if status == UNBOUNDED:
            return Solution(UNBOUNDED, iterations=self.iterations)
        point = {self.col_ids[b]: self.rhs[i] for i, b in enumerate(self.basis)
                 if not self._is_art(b) and self.rhs[i]}
        value = sum((self.cost[self.col_of[j]] * v for j, v in point.items()), Fraction(0))
        return Solution(OPTIMAL, value, point, [self.col_ids[b] for b in self.basis if not self._is_art(b)],
                        self._duals(d2, self.cost), iterations=self.iterations)
