"""Exact two-phase primal simplex with Bland's rule and bounded variables.

Works on ``A v = b, lo <= v <= hi`` over rationals (gmpy2 ``mpq``).  The
tableau is kept in sparse dictionary form, one dict per basic row, with a
column index so a pivot only touches the rows that contain the entering
column.  A small exact presolve first fixes variables that the equalities
force to a single value.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from gmpy2 import mpq

ZERO = mpq(0)
ONE = mpq(1)


class Infeasible(ValueError):
    pass


class Unbounded(RuntimeError):
    pass


def _q(x) -> mpq:
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    return mpq(x)


def to_fraction(x) -> Fraction:
    return Fraction(int(x.numerator), int(x.denominator))


@dataclass
class LPResult:
    value: Fraction
    values: list[Fraction]  # one per input column
    pivots: int
    phase1_pivots: int


def presolve(rows, rhs, lo, hi):
    """Fix variables forced by the equalities; returns (fixed, live rows).

    Rules, applied to a fixpoint: a row whose remaining coefficients all share
    a sign and whose bound activity meets the right-hand side exactly pins
    every variable at the matching bound; a one-variable row pins that
    variable.
    """
    fixed: dict[int, mpq] = {}
    rows = [dict(r) for r in rows]
    rhs = list(rhs)
    col_rows: dict[int, set[int]] = {}
    for i, r in enumerate(rows):
        for j in r:
            col_rows.setdefault(j, set()).add(i)
    alive = set(range(len(rows)))
    queue = list(range(len(rows)))
    queued = set(queue)
    # activity bounds kept incrementally so long rows are not re-summed on every fix
    free = [0] * len(rows)
    min_act = [ZERO] * len(rows)
    max_act = [ZERO] * len(rows)

    def spread(j, a):
        if a > 0:
            return a * lo[j], a * hi[j]
        return a * hi[j], a * lo[j]

    for i, r in enumerate(rows):
        for j, a in r.items():
            if hi[j] is None:
                free[i] += 1
            else:
                low, high = spread(j, a)
                min_act[i] += low
                max_act[i] += high

    def fix(j, value):
        if value < lo[j] or (hi[j] is not None and value > hi[j]):
            raise Infeasible(f"column {j} forced to {value} outside its bounds")
        fixed[j] = value
        for i in col_rows.pop(j, ()):
            a = rows[i].pop(j)
            rhs[i] -= a * value
            if hi[j] is None:
                free[i] -= 1
            else:
                low, high = spread(j, a)
                min_act[i] -= low
                max_act[i] -= high
            if i not in queued and i in alive:
                queue.append(i)
                queued.add(i)

    while queue:
        i = queue.pop()
        queued.discard(i)
        if i not in alive:
            continue
        r = rows[i]
        if not r:
            if rhs[i] != 0:
                raise Infeasible(f"row {i} reduces to 0 = {rhs[i]}")
            alive.discard(i)
            continue
        if len(r) == 1:
            (j, a), = r.items()
            alive.discard(i)
            fix(j, rhs[i] / a)
            continue
        if free[i]:
            continue
        if rhs[i] < min_act[i] or rhs[i] > max_act[i]:
            raise Infeasible(f"row {i} cannot reach its right-hand side")
        if rhs[i] == min_act[i] or rhs[i] == max_act[i]:
            at_min = rhs[i] == min_act[i]
            alive.discard(i)
            for j, a in list(r.items()):
                fix(j, (lo[j] if (a > 0) == at_min else hi[j]))
    live = sorted(alive)
    return fixed, [(rows[i], rhs[i]) for i in live]


class _Tableau:
    """Dictionary form: basic[r] + sum_j T[r][j] * x_j = const (values tracked in ``val``)."""

    def __init__(self, n_cols, lo, hi):
        self.lo = lo
        self.hi = hi
        self.n = n_cols
        self.val = [lo[j] for j in range(n_cols)]
        self.T: list[dict[int, mpq]] = []
        self.basic: list[int] = []
        self.row_of: dict[int, int] = {}
        self.col: dict[int, set[int]] = {}
        self.pivots = 0

    def add_row(self, basic_var, coeffs):
        r = len(self.T)
        self.T.append(coeffs)
        self.basic.append(basic_var)
        self.row_of[basic_var] = r
        for j in coeffs:
            self.col.setdefault(j, set()).add(r)

    def pivot(self, r, j, obj: dict[int, mpq] | None):
        """Exchange basic var of row r with nonbasic j (values already updated)."""
        self.pivots += 1
        row = self.T[r]
        a = row.pop(j)
        old = self.basic[r]
        inv = ONE / a
        new = {k: c * inv for k, c in row.items()}
        new[old] = inv
        for k in row:
            self.col[k].discard(r)
        self.col[j].discard(r)
        self.T[r] = new
        for k in new:
            self.col.setdefault(k, set()).add(r)
        self.basic[r] = j
        del self.row_of[old]
        self.row_of[j] = r
        for i in list(self.col.get(j, ())):
            if i == r:
                continue
            ri = self.T[i]
            f = ri.pop(j)
            self.col[j].discard(i)
            for k, c in new.items():
                v = ri.get(k, ZERO) - f * c
                if v:
                    if k not in ri:
                        self.col.setdefault(k, set()).add(i)
                    ri[k] = v
                elif k in ri:
                    del ri[k]
                    self.col[k].discard(i)
        if obj is not None and j in obj:
            f = obj.pop(j)
            for k, c in new.items():
                v = obj.get(k, ZERO) - f * c
                if v:
                    obj[k] = v
                else:
                    obj.pop(k, None)

    def step(self, j, obj) -> bool:
        """One Bland iteration with entering column j; returns False if unbounded."""
        lo, hi, val = self.lo, self.hi, self.val
        up = val[j] == lo[j]  # moving away from the lower bound
        sgn = ONE if up else -ONE
        best_t = hi[j] - lo[j] if hi[j] is not None else None
        best_var = j if best_t is not None else None
        best_row = None
        for i in self.col.get(j, ()):
            a = self.T[i][j] * sgn  # basic changes by -a * t
            b = self.basic[i]
            if a > 0:
                t = (val[b] - lo[b]) / a
            else:
                if hi[b] is None:
                    continue
                t = (hi[b] - val[b]) / (-a)
            if best_t is None or t < best_t or (t == best_t and b < best_var):
                best_t, best_var, best_row = t, b, i
        if best_t is None:
            return False
        t = best_t
        if t:
            for i in self.col.get(j, ()):
                b = self.basic[i]
                val[b] -= self.T[i][j] * sgn * t
            val[j] += sgn * t
        if best_row is None:
            # bound flip of the entering column itself
            val[j] = hi[j] if up else lo[j]
            self.pivots += 1
            return True
        b = self.basic[best_row]
        # snap the leaving variable exactly onto the bound it reached
        a = self.T[best_row][j] * sgn
        val[b] = lo[b] if a > 0 else hi[b]
        self.pivot(best_row, j, obj)
        return True

    def run(self, obj: dict[int, mpq], limit: int | None = None) -> None:
        """Minimise; ``obj`` holds reduced costs of nonbasic columns."""
        lo, hi, val = self.lo, self.hi, self.val
        while True:
            enter = None
            for j in sorted(obj):
                d = obj[j]
                if j in self.row_of:
                    continue
                if d < 0 and (hi[j] is None or val[j] < hi[j]):
                    enter = j
                    break
                if d > 0 and val[j] > lo[j]:
                    enter = j
                    break
            if enter is None:
                return
            if not self.step(enter, obj):
                raise Unbounded("objective unbounded")
            if limit is not None and self.pivots > limit:
                raise RuntimeError("pivot limit exceeded")


def eliminate(live, cost, lo, hi, fixed):
    """Substitute out columns that touch at most two rows.

    A column is removed through one of its rows only when that row alone
    already implies the column's lower bound.  Its upper bound is dropped,
    so the reduced problem is a relaxation; callers must check the recovered
    values against the dropped bounds.  Returns (rows, cost, steps) where each
    step ``(j, row, rhs, a)`` recovers ``v_j = (rhs - row . v) / a``.
    """
    rows = [dict(r) for r, _ in live]
    rhs = [b for _, b in live]
    cost = dict(cost)
    col: dict[int, set[int]] = {}
    for i, r in enumerate(rows):
        for j in r:
            col.setdefault(j, set()).add(i)
    alive = set(range(len(rows)))
    steps = []

    def implied_lower(i, j):
        r = rows[i]
        a = r[j]
        if any(hi[k] is None for k in r if k != j):
            return False
        # v_j = (rhs - sum a_k v_k) / a; its minimum over the box of the others
        if a > 0:
            worst = rhs[i] - sum((c * (hi[k] if c > 0 else lo[k]) for k, c in r.items() if k != j), ZERO)
        else:
            worst = rhs[i] - sum((c * (lo[k] if c > 0 else hi[k]) for k, c in r.items() if k != j), ZERO)
        return worst / a >= lo[j]

    for limit in (1, 2):
        for j in sorted(col):
            rs = col.get(j)
            if not rs or len(rs) > limit or j in fixed:
                continue
            order = sorted(rs, key=lambda i: (len(rows[i]), i))
            pick = next((i for i in order if implied_lower(i, j)), None)
            if pick is None:
                continue
            r = rows[pick]
            a = r[j]
            rest = {k: c for k, c in r.items() if k != j}
            steps.append((j, rest, rhs[pick], a))
            for i in rs - {pick}:
                f = rows[i].pop(j) / a
                for k, c in rest.items():
                    v = rows[i].get(k, ZERO) - f * c
                    if v:
                        rows[i][k] = v
                        col.setdefault(k, set()).add(i)
                    else:
                        rows[i].pop(k, None)
                        col[k].discard(i)
                rhs[i] -= f * rhs[pick]
            if j in cost:
                f = cost.pop(j) / a
                for k, c in rest.items():
                    v = cost.get(k, ZERO) - f * c
                    if v:
                        cost[k] = v
                    else:
                        cost.pop(k, None)
            for k in r:
                col[k].discard(pick)
            del col[j]
            alive.discard(pick)
            rows[pick] = {}
    kept = [(rows[i], rhs[i]) for i in sorted(alive)]
    return kept, cost, steps


def solve(rows, rhs, cost, n_cols, lo=None, hi=None, sense="min", reduce=True) -> LPResult:
    """Optimise ``cost`` subject to ``rows[i] . v = rhs[i]`` and bounds.

    ``rows`` is a list of {column: coefficient}; ``hi`` entries may be None.
    With ``reduce`` the substitution presolve runs first; if the recovered
    point breaks a dropped bound the full problem is solved instead.
    """
    lo = [ZERO] * n_cols if lo is None else [_q(x) for x in lo]
    hi = [ONE] * n_cols if hi is None else [None if x is None else _q(x) for x in hi]
    rows = [{j: _q(a) for j, a in r.items() if a} for r in rows]
    rhs = [_q(b) for b in rhs]
    sign = -ONE if sense == "max" else ONE
    c = {j: _q(x) * sign for j, x in cost.items() if x}

    fixed, live = presolve(rows, rhs, lo, hi)
    steps = []
    if reduce:
        live, c_red, steps = eliminate(live, c, lo, hi, fixed)
    else:
        c_red = c
    hidden = {j for j, *_ in steps}
    val, pivots, p1 = _two_phase(live, c_red, n_cols, lo, hi, fixed, hidden)
    for j, rest, b, a in reversed(steps):
        val[j] = (b - sum((cf * val[k] for k, cf in rest.items()), ZERO)) / a
    if steps and any(val[j] < lo[j] or (hi[j] is not None and val[j] > hi[j]) for j in hidden):
        return solve(rows, rhs, cost, n_cols, lo, hi, sense, reduce=False)
    values = [to_fraction(val[j]) for j in range(n_cols)]
    value = sum((to_fraction(_q(x)) * values[j] for j, x in cost.items()), Fraction(0))
    return LPResult(value, values, pivots, p1)


def _two_phase(live, c, n_cols, lo, hi, fixed, hidden):
    n_art = len(live)
    total = n_cols + n_art
    lo_all = lo + [ZERO] * n_art
    hi_all = hi + [None] * n_art
    tab = _Tableau(total, lo_all, hi_all)
    for j, v in fixed.items():
        tab.val[j] = v
        tab.lo[j] = tab.hi[j] = v
    for j in hidden:
        tab.val[j] = ZERO
    # artificial a_i = rhs_i - sum a_ij x_j, all structurals start at their lower bound
    for i, (r, b) in enumerate(live):
        act = sum((a * tab.val[j] for j, a in r.items()), ZERO)
        resid = b - act
        coeffs = dict(r)
        if resid < 0:
            coeffs = {j: -a for j, a in coeffs.items()}
            resid = -resid
        art = n_cols + i
        tab.val[art] = resid
        tab.add_row(art, coeffs)

    # crash: swap zero-valued artificials for structural columns that touch at
    # most two rows, which keeps fill-in negligible
    for i in range(n_art):
        art = n_cols + i
        if tab.basic[i] != art or tab.val[art] != 0:
            continue
        cands = [
            j for j in tab.T[i]
            if j < n_cols and j not in tab.row_of and tab.lo[j] != tab.hi[j] and len(tab.col[j]) <= 2
        ]
        if cands:
            j = min(cands, key=lambda k: (len(tab.col[k]), k))
            tab.pivot(i, j, None)
    tab.pivots = 0

    # artificials at zero are pinned there; phase 1 only has to drive out the rest
    phase1 = {}
    for i in range(n_art):
        art = n_cols + i
        if art not in tab.row_of or tab.val[art] == 0:
            tab.hi[art] = ZERO
        else:
            for j, a in tab.T[tab.row_of[art]].items():
                phase1[j] = phase1.get(j, ZERO) - a
    phase1 = {j: d for j, d in phase1.items() if d}
    tab.run(phase1)
    infeas = sum((tab.val[b] for b in tab.basic if b >= n_cols), ZERO)
    if infeas != 0:
        raise Infeasible("phase 1 ended with positive artificial sum")
    p1 = tab.pivots
    for i in range(n_art):
        tab.hi[n_cols + i] = ZERO

    # phase 2
    obj: dict[int, mpq] = {}
    for j, cj in c.items():
        if j in fixed:
            continue
        if j in tab.row_of:
            for k, a in tab.T[tab.row_of[j]].items():
                obj[k] = obj.get(k, ZERO) - cj * a
        else:
            obj[j] = obj.get(j, ZERO) + cj
    obj = {j: d for j, d in obj.items() if d}
    tab.run(obj)
    return tab.val, tab.pivots, p1
