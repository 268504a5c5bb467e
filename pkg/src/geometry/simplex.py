# src/geometry/simplex.py
"""
Exact dictionary simplex over fractions.Fraction.

    maximize    c·x
    subject to  A x <= b
                x_j >= 0 for j in `nonneg`, every other x_j free

Free variables are split as x = x⁺ - x⁻. Phase 1 uses a single auxiliary
variable x0 (w = b - A x + x0, maximize -x0); both phases pivot with Bland's
smallest-label rule, so the run terminates and is a fixed function of the
constraint order.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Sequence

logger = logging.getLogger(__name__)

ZERO = Fraction(0)


class LPStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LPResult:
    status: LPStatus
    x: tuple[Fraction, ...] | None = None
    objective: Fraction | None = None
    pivots: int = 0

    @property
    def is_optimal(self) -> bool:
        return self.status is LPStatus.OPTIMAL


class _Dictionary:
    """
    basic[i]  = b[i] - Σ_k A[i][k] * nonbasic[k]
    z         = z0   + Σ_k c[k]    * nonbasic[k]
    """

    def __init__(self, A: list[list[Fraction]], b: list[Fraction], n_vars: int):
        self.A = A
        self.b = b
        self.c = [ZERO] * n_vars
        self.z0 = ZERO
        self.nonbasic = list(range(n_vars))
        self.basic = list(range(n_vars, n_vars + len(b)))
        self.pivots = 0

    def pivot(self, i: int, j: int) -> None:
        row = self.A[i]
        inv = 1 / row[j]
        new_row = [a * inv for a in row]
        new_row[j] = inv
        bi = self.b[i] * inv

        for r, other in enumerate(self.A):
            if r == i:
                continue
            f = other[j]
            if f == 0:
                continue
            for k in range(len(other)):
                other[k] = -f * inv if k == j else other[k] - f * new_row[k]
            self.b[r] -= f * bi

        f = self.c[j]
        if f != 0:
            for k in range(len(self.c)):
                self.c[k] = -f * inv if k == j else self.c[k] - f * new_row[k]
            self.z0 += f * bi

        self.A[i] = new_row
        self.b[i] = bi
        self.basic[i], self.nonbasic[j] = self.nonbasic[j], self.basic[i]
        self.pivots += 1

    def bland(self) -> LPStatus:
        while True:
            candidates = [(self.nonbasic[k], k) for k in range(len(self.c)) if self.c[k] > 0]
            if not candidates:
                return LPStatus.OPTIMAL
            _, j = min(candidates)
            rows = [
                (self.b[i] / self.A[i][j], self.basic[i], i)
                for i in range(len(self.b))
                if self.A[i][j] > 0
            ]
            if not rows:
                return LPStatus.UNBOUNDED
            _, _, i = min(rows)
            self.pivot(i, j)

    def drop_column(self, label: int) -> None:
        k = self.nonbasic.index(label)
        del self.nonbasic[k]
        del self.c[k]
        for row in self.A:
            del row[k]

    def drop_row(self, i: int) -> None:
        del self.A[i]
        del self.b[i]
        del self.basic[i]

    def set_objective(self, cost: dict[int, Fraction]) -> None:
        """Install `maximize Σ cost[label] * x_label` in terms of the current nonbasics."""
        self.c = [cost.get(label, ZERO) for label in self.nonbasic]
        self.z0 = ZERO
        for i, label in enumerate(self.basic):
            w = cost.get(label)
            if not w:
                continue
            self.z0 += w * self.b[i]
            row = self.A[i]
            for k in range(len(self.c)):
                self.c[k] -= w * row[k]

    def values(self) -> dict[int, Fraction]:
        return {label: self.b[i] for i, label in enumerate(self.basic)}


def _phase_one(d: _Dictionary, n_cols: int) -> bool:
    """Drive the dictionary to a feasible basis; False when A x <= b has no solution."""
    if all(bi >= 0 for bi in d.b):
        return True

    aux = n_cols + len(d.b)
    for row in d.A:
        row.append(Fraction(-1))
    d.nonbasic.append(aux)
    d.c = [ZERO] * (len(d.nonbasic) - 1) + [Fraction(-1)]
    d.z0 = ZERO

    _, _, leave = min((bi, d.basic[i], i) for i, bi in enumerate(d.b))
    d.pivot(leave, len(d.nonbasic) - 1)
    d.bland()

    if d.z0 < 0:
        return False

    if aux in d.basic:
        i = d.basic.index(aux)
        nonzero = [(d.nonbasic[k], k) for k, a in enumerate(d.A[i]) if a != 0]
        if nonzero:
            d.pivot(i, min(nonzero)[1])
        else:
            d.drop_row(i)
    if aux in d.nonbasic:
        d.drop_column(aux)
    return True


def solve_lp(
    A: Sequence[Sequence[Fraction]],
    b: Sequence[Fraction],
    c: Sequence[Fraction] | None = None,
    *,
    nonneg: Sequence[bool] | None = None,
) -> LPResult:
    """
    Maximize c·x subject to A x <= b. With c None only feasibility is decided and
    the phase-1 point is returned.
    """
    n = len(A[0]) if A else (len(c) if c is not None else 0)
    if nonneg is None:
        nonneg = [False] * n
    if len(nonneg) != n or any(len(row) != n for row in A) or len(b) != len(A):
        raise ValueError("inconsistent LP dimensions")

    # expanded column -> (original index, sign)
    columns: list[tuple[int, int]] = []
    for j in range(n):
        columns.append((j, 1))
        if not nonneg[j]:
            columns.append((j, -1))

    rows = [[Fraction(row[j]) * s for j, s in columns] for row in A]
    d = _Dictionary(rows, [Fraction(v) for v in b], len(columns))

    if not _phase_one(d, len(columns)):
        logger.debug("LP infeasible after %d pivots", d.pivots)
        return LPResult(LPStatus.INFEASIBLE, pivots=d.pivots)

    status = LPStatus.OPTIMAL
    if c is not None:
        cost: dict[int, Fraction] = {}
        for label, (j, s) in enumerate(columns):
            if c[j]:
                cost[label] = Fraction(c[j]) * s
        d.set_objective(cost)
        status = d.bland()
        if status is LPStatus.UNBOUNDED:
            logger.debug("LP unbounded after %d pivots", d.pivots)
            return LPResult(status, pivots=d.pivots)

    values = d.values()
    x = [ZERO] * n
    for label, (j, s) in enumerate(columns):
        x[j] += s * values.get(label, ZERO)
    objective = sum((Fraction(cj) * xj for cj, xj in zip(c, x)), ZERO) if c is not None else None
    return LPResult(status, tuple(x), objective, d.pivots)
