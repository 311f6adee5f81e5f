"""Exact rational linear programming.

Two-phase primal simplex over ``flint.fmpq``.  Pivoting follows Bland's
index-minimal rule, so it always terminates.  Every verdict carries a
certificate that can be re-checked by plain ``Fraction`` arithmetic with
:func:`verify_certificate`:

* optimal    -- primal point plus dual multipliers proving optimality
* infeasible -- Farkas multipliers
* unbounded  -- a feasible point plus an improving recession ray

Constraint multipliers are reported on the "<=" orientation of each row
(">=" rows are negated), so they are nonnegative for inequalities and free
for equalities.  For a minimisation the duals certify the maximum of the
negated objective.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence, Union

import flint

Number = Union[int, Fraction]

RELATIONS = ("<=", "==", ">=")

class MalformedProblem(ValueError):
    pass


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool) or isinstance(x, float):
        raise TypeError(f"exact scalar required, got {x!r}")
    if isinstance(x, flint.fmpq):
        return Fraction(int(x.p), int(x.q))
    return Fraction(x)


def _fmpq(x: Fraction) -> flint.fmpq:
    return flint.fmpq(x.numerator, x.denominator)


@dataclass(frozen=True)
class Constraint:
    """Sparse row ``sum coeffs[j] * x_j  (relation)  rhs``."""

    coeffs: tuple  # ((index, Fraction), ...) sorted by index, no zeros
    relation: str
    rhs: Fraction
    name: str = ""

    @staticmethod
    def make(coeffs, relation: str, rhs, name: str = "") -> "Constraint":
        if relation not in RELATIONS:
            raise MalformedProblem(f"unknown relation {relation!r}")
        if isinstance(coeffs, Mapping):
            items = coeffs.items()
        else:
            items = enumerate(coeffs)
        acc: dict[int, Fraction] = {}
        for j, a in items:
            a = _frac(a)
            if a:
                acc[j] = acc.get(j, Fraction(0)) + a
        row = tuple(sorted((j, a) for j, a in acc.items() if a))
        return Constraint(row, relation, _frac(rhs), name)

    def lhs(self, x: Sequence[Fraction]) -> Fraction:
        return sum((a * x[j] for j, a in self.coeffs), Fraction(0))


@dataclass
class RationalLPProblem:
    variables: list
    objective: list  # dense Fraction vector
    sense: str = "max"  # "max" | "min" | "feasibility"
    constraints: list = field(default_factory=list)
    lower: list = field(default_factory=list)  # Fraction or None (= -inf)
    upper: list = field(default_factory=list)  # Fraction or None (= +inf)

    def validate(self) -> None:
        n = len(self.variables)
        if n == 0:
            raise MalformedProblem("empty variable list")
        if len(self.objective) != n:
            raise MalformedProblem("objective length differs from variable list")
        if len(self.lower) != n or len(self.upper) != n:
            raise MalformedProblem("bounds length differs from variable list")
        if self.sense not in ("max", "min", "feasibility"):
            raise MalformedProblem(f"unknown sense {self.sense!r}")
        for k, con in enumerate(self.constraints):
            for j, _ in con.coeffs:
                if not 0 <= j < n:
                    raise MalformedProblem(
                        f"constraint {k} ({con.name}) references undeclared variable {j}")
        for j, (lo, up) in enumerate(zip(self.lower, self.upper)):
            if lo is not None and up is not None and lo > up:
                raise MalformedProblem(f"variable {self.variables[j]} has lower > upper")


class LPBuilder:
    """Incremental construction of a :class:`RationalLPProblem`."""

    def __init__(self, sense: str = "max"):
        self.sense = sense
        self.names: list[str] = []
        self.lower: list = []
        self.upper: list = []
        self.obj: dict[int, Fraction] = {}
        self.rows: list[Constraint] = []

    def var(self, name: str, lower=0, upper=None) -> int:
        self.names.append(name)
        self.lower.append(None if lower is None else _frac(lower))
        self.upper.append(None if upper is None else _frac(upper))
        return len(self.names) - 1

    def free(self, name: str) -> int:
        return self.var(name, None, None)

    def objective(self, coeffs: Mapping[int, Number]) -> None:
        self.obj = {j: _frac(a) for j, a in coeffs.items()}

    def add(self, coeffs: Mapping[int, Number], relation: str, rhs, name: str = "") -> int:
        self.rows.append(Constraint.make(coeffs, relation, rhs, name))
        return len(self.rows) - 1

    def build(self) -> RationalLPProblem:
        objective = [self.obj.get(j, Fraction(0)) for j in range(len(self.names))]
        return RationalLPProblem(list(self.names), objective, self.sense,
                                 list(self.rows), list(self.lower), list(self.upper))


@dataclass(frozen=True)
class LPOutcome:
    verdict: str  # "optimal" | "infeasible" | "unbounded"
    primal: Optional[tuple] = None
    value: Optional[Fraction] = None
    duals: Optional[tuple] = None
    farkas: Optional[tuple] = None
    ray: Optional[tuple] = None
    pivots: int = 0

    @property
    def optimal(self) -> bool:
        return self.verdict == "optimal"

    @property
    def feasible(self) -> bool:
        return self.verdict != "infeasible"


# ---------------------------------------------------------------------------
# standard form


class _StandardForm:
    """``A x = b, x >= 0, b >= 0`` with bookkeeping back to the original."""

    def __init__(self, problem: RationalLPProblem, rows: list):
        n = len(problem.variables)
        self.n_orig = n
        # original var j  ->  offset + sum(coef * std_col)
        self.var_map: list[list[tuple[int, int]]] = []
        self.offset: list[Fraction] = []
        ncol = 0
        bound_rows = []  # (std_col, rhs) for x' <= u - l
        for j in range(n):
            lo, up = problem.lower[j], problem.upper[j]
            if lo is not None:
                self.var_map.append([(ncol, 1)])
                self.offset.append(lo)
                if up is not None:
                    bound_rows.append((ncol, up - lo))
                ncol += 1
            elif up is not None:
                self.var_map.append([(ncol, -1)])
                self.offset.append(up)
                ncol += 1
            else:
                self.var_map.append([(ncol, 1), (ncol + 1, -1)])
                self.offset.append(Fraction(0))
                ncol += 2
        self.n_struct = ncol

        # each std row: dict col->coef, rhs, slack sign (+1/-1/0), origin
        srows = []
        for k in rows:
            con = problem.constraints[k]
            coefs: dict[int, flint.fmpq] = {}
            rhs = con.rhs
            for j, a in con.coeffs:
                if self.offset[j]:
                    rhs -= a * self.offset[j]
                af = _fmpq(a)
                for c, s in self.var_map[j]:
                    coefs[c] = coefs.get(c, 0) + (af if s == 1 else -af)
            slack = {"<=": 1, ">=": -1, "==": 0}[con.relation]
            srows.append((coefs, rhs, slack, ("row", k)))
        for c, ub in bound_rows:
            srows.append(({c: flint.fmpq(1)}, ub, 1, ("bound", c)))

        m = len(srows)
        self.m = m
        self.origin = [r[3] for r in srows]
        self.sign = []
        self.slack_col: list[Optional[int]] = []
        col = ncol
        for coefs, rhs, slack, _ in srows:
            if slack:
                self.slack_col.append(col)
                col += 1
            else:
                self.slack_col.append(None)
        self.n_slack_end = col
        # artificial columns for rows without a +1 unit column
        self.basis_init: list[int] = []
        self.art_cols: set[int] = set()
        for i, (coefs, rhs, slack, _) in enumerate(srows):
            sigma = -1 if rhs < 0 else 1
            self.sign.append(sigma)
            if slack and slack * sigma == 1:
                self.basis_init.append(self.slack_col[i])
            else:
                self.basis_init.append(col)
                self.art_cols.add(col)
                col += 1
        self.ncols = col

        entries = [flint.fmpq(0)] * ((m + 1) * (col + 1))
        width = col + 1
        for i, (coefs, rhs, slack, _) in enumerate(srows):
            sigma = self.sign[i]
            base = i * width
            for c, a in coefs.items():
                if a:
                    entries[base + c] = a if sigma == 1 else -a
            if slack:
                entries[base + self.slack_col[i]] = flint.fmpq(slack * sigma)
            if self.basis_init[i] in self.art_cols:
                entries[base + self.basis_init[i]] = flint.fmpq(1)
            entries[base + col] = _fmpq(rhs * sigma)
        self.T = [entries[i * width:(i + 1) * width] for i in range(m + 1)]
        self.basis = list(self.basis_init)

    # -- objective rows -----------------------------------------------------

    def set_objective(self, cost: dict[int, flint.fmpq]) -> None:
        """Install reduced-cost row ``z_j = c_B B^-1 A_j - c_j`` for ``cost``."""
        m, width = self.m, self.ncols + 1
        T = self.T
        row = [flint.fmpq(0)] * width
        for j, cj in cost.items():
            row[j] -= cj
        for i, bcol in enumerate(self.basis):
            cb = cost.get(bcol)
            if cb:
                for j in range(width):
                    tij = T[i][j]
                    if tij:
                        row[j] += cb * tij
        for j in range(width):
            T[m][j] = row[j]
        self.cost = cost

    def pivot(self, r: int, c: int) -> None:
        T = self.T
        prow = T[r]
        p = prow[c]
        prow = [v / p if v else v for v in prow]
        T[r] = prow
        nz = [j for j, v in enumerate(prow) if v]
        for i, row in enumerate(T):
            f = row[c]
            if i != r and f:
                for j in nz:
                    row[j] -= f * prow[j]
        self.basis[r] = c

    def run(self, allowed, max_pivots: int) -> tuple[str, Optional[int], int]:
        """Primal simplex on the current objective row with Bland's rule.

        The entering column is the lowest-index one with negative reduced
        cost and the ratio test breaks ties by the smallest basic index, so
        the method cannot cycle.
        """
        m = self.m
        rhs = self.ncols
        count = 0
        while True:
            T = self.T
            zrow = T[m]
            entering = None
            for j in range(self.ncols):
                if zrow[j] < 0 and allowed(j):
                    entering = j
                    break
            if entering is None:
                return "optimal", None, count
            best = None
            best_ratio = None
            basis = self.basis
            for i in range(m):
                row = T[i]
                a = row[entering]
                if a > 0:
                    ratio = row[rhs] / a
                    if (best is None or ratio < best_ratio
                            or (ratio == best_ratio and basis[i] < basis[best])):
                        best, best_ratio = i, ratio
            if best is None:
                return "unbounded", entering, count
            self.pivot(best, entering)
            count += 1
            if count > max_pivots:
                raise RuntimeError("simplex pivot limit exceeded")

    # -- extraction ---------------------------------------------------------

    def std_values(self) -> list[flint.fmpq]:
        x = [flint.fmpq(0)] * self.ncols
        rhs = self.ncols
        for i, b in enumerate(self.basis):
            x[b] = self.T[i][rhs]
        return x

    def row_duals(self) -> list[flint.fmpq]:
        """``y = c_B B^-1`` read off the columns of the initial unit basis."""
        m = self.m
        return [self.T[m][self.basis_init[i]] + self.cost.get(self.basis_init[i], 0)
                for i in range(m)]

    def to_original(self, std: list) -> list[Fraction]:
        out = []
        for j in range(self.n_orig):
            v = self.offset[j]
            for c, s in self.var_map[j]:
                v += _frac(std[c]) * s
            out.append(v)
        return out

    def ray_original(self, std: list) -> list[Fraction]:
        out = []
        for j in range(self.n_orig):
            v = Fraction(0)
            for c, s in self.var_map[j]:
                v += _frac(std[c]) * s
            out.append(v)
        return out

    def multipliers(self, problem: RationalLPProblem, y: list, nrows: int,
                    kept: list) -> list[Fraction]:
        """Map std-row duals to "<=" oriented multipliers per original row."""
        w = [Fraction(0)] * nrows
        for i in range(self.m):
            kind, k = self.origin[i]
            if kind != "row":
                continue
            val = _frac(y[i]) * self.sign[i]
            if problem.constraints[kept[k]].relation == ">=":
                val = -val
            w[kept[k]] = val
        return w


def _dedupe_rows(problem: RationalLPProblem) -> list[int]:
    seen = set()
    kept = []
    for k, con in enumerate(problem.constraints):
        key = (con.coeffs, con.relation, con.rhs)
        if key in seen:
            continue
        seen.add(key)
        kept.append(k)
    return kept


class _RowView:
    """Problem proxy whose ``constraints`` are a subset of the original rows."""

    def __init__(self, problem: RationalLPProblem, kept: list[int]):
        self.variables = problem.variables
        self.lower = problem.lower
        self.upper = problem.upper
        self.constraints = [problem.constraints[k] for k in kept]


def solve(problem: RationalLPProblem, max_pivots: int = 100000) -> LPOutcome:
    """Solve ``problem`` exactly; the pivot sequence is deterministic."""
    problem.validate()
    kept = _dedupe_rows(problem)
    view = _RowView(problem, kept)
    sf = _StandardForm(view, list(range(len(kept))))
    nrows = len(problem.constraints)

    sign = -1 if problem.sense == "min" else 1
    pivots = 0

    # phase 1
    if sf.art_cols:
        sf.set_objective({c: flint.fmpq(-1) for c in sf.art_cols})
        status, _, count = sf.run(lambda j: True, max_pivots)
        pivots += count
        value = sf.T[sf.m][sf.ncols]
        if value < 0:
            y = sf.row_duals()
            w = sf.multipliers(problem, y, nrows, kept)
            w = _normalise_farkas(problem, w)
            return LPOutcome("infeasible", farkas=tuple(w), pivots=pivots)
        # drive artificials out of the basis where possible
        for i in range(sf.m):
            if sf.basis[i] in sf.art_cols:
                for j in range(sf.ncols):
                    if j not in sf.art_cols and sf.T[i][j] != 0:
                        sf.pivot(i, j)
                        pivots += 1
                        break

    cost: dict[int, flint.fmpq] = {}
    if problem.sense != "feasibility":
        for j, cj in enumerate(problem.objective):
            if cj:
                for c, s in sf.var_map[j]:
                    cost[c] = cost.get(c, flint.fmpq(0)) + _fmpq(cj * sign * s)
    sf.set_objective(cost)
    arts = sf.art_cols
    status, entering, count = sf.run(lambda j: j not in arts, max_pivots)
    pivots += count
    std = sf.std_values()
    x = sf.to_original(std)
    if status == "unbounded":
        d = [flint.fmpq(0)] * sf.ncols
        d[entering] = flint.fmpq(1)
        for i, b in enumerate(sf.basis):
            d[b] = -sf.T[i][entering]
        ray = sf.ray_original(d)
        return LPOutcome("unbounded", primal=tuple(x), ray=tuple(ray), pivots=pivots)
    y = sf.row_duals()
    w = sf.multipliers(problem, y, nrows, kept)
    value = sum((c * xi for c, xi in zip(problem.objective, x)), Fraction(0))
    if problem.sense == "feasibility":
        value = Fraction(0)
    return LPOutcome("optimal", primal=tuple(x), value=value, duals=tuple(w), pivots=pivots)


# ---------------------------------------------------------------------------
# certificate checks (plain Fraction arithmetic, independent of flint)


def _oriented(con: Constraint):
    """Coefficients and rhs of the "<=" orientation of a row."""
    if con.relation == ">=":
        return [(j, -a) for j, a in con.coeffs], -con.rhs
    return list(con.coeffs), con.rhs


def _combine(problem: RationalLPProblem, w: Sequence[Fraction]):
    n = len(problem.variables)
    g = [Fraction(0)] * n
    rhs = Fraction(0)
    for con, wk in zip(problem.constraints, w):
        if not wk:
            continue
        coeffs, b = _oriented(con)
        for j, a in coeffs:
            g[j] += wk * a
        rhs += wk * b
    return g, rhs


def _box_extreme(problem: RationalLPProblem, g: Sequence[Fraction], maximise: bool):
    """max (or min) of g.x over the variable box; None when infinite."""
    total = Fraction(0)
    for j, gj in enumerate(g):
        if not gj:
            continue
        want_upper = (gj > 0) == maximise
        bound = problem.upper[j] if want_upper else problem.lower[j]
        if bound is None:
            return None
        total += gj * bound
    return total


def _normalise_farkas(problem: RationalLPProblem, w: list[Fraction]) -> list[Fraction]:
    g, rhs = _combine(problem, w)
    lo = _box_extreme(problem, g, maximise=False)
    if lo is None or lo <= rhs:
        return w
    gap = lo - rhs
    return [v / gap for v in w]


def _multiplier_signs(problem, w) -> Optional[str]:
    for k, (con, wk) in enumerate(zip(problem.constraints, w)):
        if con.relation != "==" and wk < 0:
            return f"negative multiplier {wk} on inequality row {k} ({con.name})"
    return None


def primal_violations(problem: RationalLPProblem, x: Sequence[Fraction]) -> list[str]:
    out = []
    for j, xj in enumerate(x):
        lo, up = problem.lower[j], problem.upper[j]
        if lo is not None and xj < lo:
            out.append(f"variable {problem.variables[j]} = {xj} below lower bound {lo}")
        if up is not None and xj > up:
            out.append(f"variable {problem.variables[j]} = {xj} above upper bound {up}")
    for k, con in enumerate(problem.constraints):
        lhs = con.lhs(x)
        ok = {"<=": lhs <= con.rhs, ">=": lhs >= con.rhs, "==": lhs == con.rhs}[con.relation]
        if not ok:
            out.append(f"constraint {k} ({con.name}) violated: {lhs} {con.relation} {con.rhs}")
    return out


def verify_certificate(problem: RationalLPProblem, outcome: LPOutcome) -> Optional[str]:
    """Re-check ``outcome`` against ``problem``.  Returns None when it holds."""
    if len(problem.variables) == 0:
        return "empty problem"
    if outcome.verdict == "optimal":
        x = outcome.primal
        if x is None or len(x) != len(problem.variables):
            return "missing primal point"
        bad = primal_violations(problem, x)
        if bad:
            return bad[0]
        value = sum((c * xi for c, xi in zip(problem.objective, x)), Fraction(0))
        if problem.sense == "feasibility":
            return None
        if value != outcome.value:
            return f"objective {value} differs from reported value {outcome.value}"
        w = outcome.duals
        if w is None:
            return "missing dual multipliers"
        msg = _multiplier_signs(problem, w)
        if msg:
            return msg
        sign = 1 if problem.sense == "max" else -1
        g, rhs = _combine(problem, w)
        reduced = [sign * c - gj for c, gj in zip(problem.objective, g)]
        box = _box_extreme(problem, reduced, maximise=True)
        if box is None:
            return "dual multipliers leave an unbounded reduced objective"
        bound = rhs + box
        if bound != sign * value:
            return f"dual bound {sign * bound} does not match objective {value}"
        return None
    if outcome.verdict == "infeasible":
        w = outcome.farkas
        if w is None or len(w) != len(problem.constraints):
            return "missing Farkas multipliers"
        msg = _multiplier_signs(problem, w)
        if msg:
            return msg
        g, rhs = _combine(problem, w)
        lo = _box_extreme(problem, g, maximise=False)
        if lo is None:
            return "Farkas combination is unbounded below on the variable box"
        if not lo > rhs:
            return f"Farkas combination gives {lo} <= {rhs}, no contradiction"
        return None
    if outcome.verdict == "unbounded":
        x, d = outcome.primal, outcome.ray
        if x is None or d is None:
            return "missing point or ray"
        bad = primal_violations(problem, x)
        if bad:
            return bad[0]
        for j, dj in enumerate(d):
            if dj < 0 and problem.lower[j] is not None:
                return f"ray leaves lower bound of {problem.variables[j]}"
            if dj > 0 and problem.upper[j] is not None:
                return f"ray leaves upper bound of {problem.variables[j]}"
        for k, con in enumerate(problem.constraints):
            a = con.lhs(d)
            ok = {"<=": a <= 0, ">=": a >= 0, "==": a == 0}[con.relation]
            if not ok:
                return f"ray violates recession of constraint {k} ({con.name})"
        gain = sum((c * dj for c, dj in zip(problem.objective, d)), Fraction(0))
        sign = 1 if problem.sense == "max" else -1
        if problem.sense == "feasibility" or sign * gain <= 0:
            return "ray does not improve the objective"
        return None
    return f"unknown verdict {outcome.verdict!r}"


def dump_lp(problem: RationalLPProblem) -> str:
    """Plain-text listing for external audit; rationals as ``num/den``."""
    lines = [f"{problem.sense}: " + " + ".join(
        f"{c} {v}" for c, v in zip(problem.objective, problem.variables) if c) or "0"]
    lines.append("subject to")
    for k, con in enumerate(problem.constraints):
        lhs = " + ".join(f"{a} {problem.variables[j]}" for j, a in con.coeffs) or "0"
        tag = con.name or f"c{k}"
        lines.append(f"  {tag}: {lhs} {con.relation} {con.rhs}")
    lines.append("bounds")
    for name, lo, up in zip(problem.variables, problem.lower, problem.upper):
        lo_s = "-inf" if lo is None else str(lo)
        up_s = "+inf" if up is None else str(up)
        lines.append(f"  {lo_s} <= {name} <= {up_s}")
    return "\n".join(lines) + "\n"
