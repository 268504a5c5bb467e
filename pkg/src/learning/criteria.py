# src/learning/criteria.py
from __future__ import annotations

import itertools
import logging
from fractions import Fraction
from typing import Iterable, Sequence

from core.errors import InvalidInput, TaskTooLarge
from core.utils import Vec, sq_norm, sub
from geometry.feasibility import contains
from geometry.regions import Ball, ConvexRegion, Halfspace
from geometry.simplex import solve_lp
from learning.tasks import Atom, Criterion, CriterionKind, EmpiricalTask, LinearHypothesis

logger = logging.getLogger(__name__)


def _check_dims(c: Criterion, dim: int, task: EmpiricalTask) -> None:
    if c.kind.is_linear:
        if task.dim_y != 1:
            raise InvalidInput(f"{c.kind.value} needs scalar outputs, task {task.task_id} has dim_y={task.dim_y}")
        if task.dim_x != dim:
            raise InvalidInput(f"parameter of dim {dim} vs inputs of dim {task.dim_x} (task {task.task_id})")
    else:
        if task.dim_x != 0:
            raise InvalidInput(f"{c.kind.value} takes output-only tasks, task {task.task_id} has inputs")
        if task.dim_y != dim:
            raise InvalidInput(f"parameter of dim {dim} vs outputs of dim {task.dim_y} (task {task.task_id})")


def task_dim(c: Criterion, task: EmpiricalTask) -> int:
    """Dimension of Θ implied by a task under a criterion."""
    return task.dim_x if c.kind.is_linear else task.dim_y


def _abs_residuals(theta: Sequence[Fraction], task: EmpiricalTask) -> list[Fraction]:
    h = LinearHypothesis(tuple(theta))
    return [abs(h.residual(atom)) for atom in task.atoms]


def _mean(values: Sequence[Fraction]) -> Fraction:
    return sum(values, Fraction(0)) / len(values)


def evaluate_criterion(c: Criterion, theta: Sequence[Fraction], task: EmpiricalTask) -> int:
    _check_dims(c, len(theta), task)
    if c.kind is CriterionKind.PER_SAMPLE_ABS:
        ok = all(r <= c.epsilon for r in _abs_residuals(theta, task))
    elif c.kind is CriterionKind.MEAN_ABS:
        ok = _mean(_abs_residuals(theta, task)) <= c.epsilon
    else:
        ok = _mean([sq_norm(sub(y, theta)) for _, y in task.atoms]) <= c.epsilon
    return int(ok)


def _linear_constraint(normal: Vec, offset: Fraction) -> Halfspace | bool:
    """Halfspace normal·θ <= offset, or the constant truth value when normal == 0."""
    if all(a == 0 for a in normal):
        return offset >= 0
    return Halfspace(normal, offset)


def _collect(dim: int, constraints: Iterable[Halfspace | bool]) -> ConvexRegion:
    halfspaces = []
    for item in constraints:
        if item is False:
            return ConvexRegion.empty(dim)
        if item is not True:
            halfspaces.append(item)
    return ConvexRegion(dim, tuple(halfspaces)).canonical()


def sat_region(c: Criterion, task: EmpiricalTask) -> ConvexRegion:
    """
    Sat(P̂) as a ConvexRegion. Linear criteria give canonical (deduplicated,
    sorted) halfspace lists so that Sat-equal tasks built by repeating or
    reordering atoms produce identical regions.
    """
    dim = task_dim(c, task)
    _check_dims(c, dim, task)
    eps = c.epsilon

    if c.kind is CriterionKind.PER_SAMPLE_ABS:
        def per_atom():
            for x, (y,) in task.atoms:
                yield _linear_constraint(tuple(-a for a in x), eps - y)
                yield _linear_constraint(x, eps + y)
        return _collect(dim, per_atom())

    if c.kind is CriterionKind.MEAN_ABS:
        if task.n > c.sign_cap:
            raise TaskTooLarge(f"MeanAbs region needs 2^{task.n} halfspaces; sign_cap is {c.sign_cap}")
        total = task.n * eps

        def per_pattern():
            for signs in itertools.product((1, -1), repeat=task.n):
                normal = [Fraction(0)] * dim
                rhs = total
                for s, (x, (y,)) in zip(signs, task.atoms):
                    rhs -= s * y
                    for k in range(dim):
                        normal[k] -= s * x[k]
                yield _linear_constraint(tuple(normal), rhs)
        return _collect(dim, per_pattern())

    ys = [y for _, y in task.atoms]
    mean = tuple(_mean([y[k] for y in ys]) for k in range(dim))
    variance = _mean([sq_norm(sub(y, mean)) for y in ys])
    if eps < variance:
        return ConvexRegion.empty(dim)
    return ConvexRegion(dim, balls=(Ball(mean, eps - variance),))


def region_criterion_consistency(c: Criterion, task: EmpiricalTask, probes: Iterable[Sequence[Fraction]]) -> bool:
    """C(θ, P̂) = 1  <=>  θ ∈ Sat(P̂), for every probe."""
    region = sat_region(c, task)
    for theta in probes:
        if bool(evaluate_criterion(c, theta, task)) != contains(region, theta):
            logger.warning("Sat identity broken at %s for task %d", theta, task.task_id)
            return False
    return True


# -------------------------------
# Exact fits
# -------------------------------

def minimax_fit(atoms: Sequence[Atom]) -> tuple[Vec, Fraction]:
    """argmin_θ max_i |y_i - θ·x_i| and its value, as an exact LP over (θ, s)."""
    atoms = sorted(set(atoms))
    dim = len(atoms[0][0])
    A, b = [], []
    for x, (y,) in atoms:
        A.append(tuple(-a for a in x) + (Fraction(-1),))
        b.append(-y)
        A.append(tuple(x) + (Fraction(-1),))
        b.append(y)
    c = (Fraction(0),) * dim + (Fraction(-1),)
    result = solve_lp(A, b, c, nonneg=[False] * dim + [True])
    return result.x[:-1], result.x[-1]


def lad_fit(task: EmpiricalTask) -> tuple[Vec, Fraction]:
    """
    Least absolute deviations: θ* = argmin_θ (1/n) Σ |y_i - θ·x_i| and the
    minimum ε_t, the smallest epsilon whose MeanAbs Sat set is nonempty.
    """
    dim, n = task.dim_x, task.n
    A, b = [], []
    for i, (x, (y,)) in enumerate(task.atoms):
        u = tuple(Fraction(-1 if k == i else 0) for k in range(n))
        A.append(tuple(-a for a in x) + u)
        b.append(-y)
        A.append(tuple(x) + u)
        b.append(y)
    c = (Fraction(0),) * dim + (Fraction(-1, n),) * n
    result = solve_lp(A, b, c, nonneg=[False] * dim + [True] * n)
    return result.x[:dim], -result.objective
