# src/learning/tasks.py
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Sequence

from core.config import DEFAULT_CONFIG
from core.errors import InvalidInput
from core.utils import Vec, dot

Atom = tuple[Vec, Vec]  # (x, y)


class CriterionKind(Enum):
    PER_SAMPLE_ABS = "per_sample_abs"
    MEAN_ABS = "mean_abs"
    MEAN_SQ_EUCLID = "mean_sq_euclid"

    @classmethod
    def parse(cls, name: str) -> CriterionKind:
        key = name.strip().lower().replace("-", "_")
        aliases = {
            "persampleabs": cls.PER_SAMPLE_ABS,
            "per_sample": cls.PER_SAMPLE_ABS,
            "meanabs": cls.MEAN_ABS,
            "mean": cls.MEAN_ABS,
            "meansqeuclid": cls.MEAN_SQ_EUCLID,
            "ball": cls.MEAN_SQ_EUCLID,
        }
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            raise InvalidInput(f"unknown criterion {name!r}") from None

    @property
    def is_linear(self) -> bool:
        return self is not CriterionKind.MEAN_SQ_EUCLID


@dataclass(frozen=True)
class Criterion:
    kind: CriterionKind
    epsilon: Fraction = DEFAULT_CONFIG.epsilon
    sign_cap: int = DEFAULT_CONFIG.sign_cap

    def __post_init__(self):
        object.__setattr__(self, "epsilon", Fraction(self.epsilon))
        if self.epsilon < 0:
            raise InvalidInput(f"epsilon must be >= 0, got {self.epsilon}")


@dataclass(frozen=True)
class EmpiricalTask:
    """
    Uniform empirical measure over `atoms`. Scalar-output tasks keep y as a
    1-vector; output-only tasks (MeanSqEuclid) have x == ().
    """
    atoms: tuple[Atom, ...]
    task_id: int = 0

    def __post_init__(self):
        atoms = tuple(
            (tuple(Fraction(v) for v in x), tuple(Fraction(v) for v in y)) for x, y in self.atoms
        )
        object.__setattr__(self, "atoms", atoms)
        if not atoms:
            raise InvalidInput(f"task {self.task_id} has no atoms")
        dx, dy = len(atoms[0][0]), len(atoms[0][1])
        if dy < 1:
            raise InvalidInput(f"task {self.task_id}: outputs must have dimension >= 1")
        for x, y in atoms:
            if len(x) != dx or len(y) != dy:
                raise InvalidInput(f"task {self.task_id}: atoms of mixed dimensions")

    @classmethod
    def scalar(cls, pairs: Iterable[tuple[Sequence[Fraction], Fraction]], task_id: int = 0) -> EmpiricalTask:
        """Build a task from (x, y) pairs with scalar y."""
        return cls(tuple((tuple(x), (Fraction(y),)) for x, y in pairs), task_id)

    @classmethod
    def outputs(cls, ys: Iterable[Sequence[Fraction]], task_id: int = 0) -> EmpiricalTask:
        """Output-only task (no inputs)."""
        return cls(tuple(((), tuple(y)) for y in ys), task_id)

    @property
    def n(self) -> int:
        return len(self.atoms)

    @property
    def dim_x(self) -> int:
        return len(self.atoms[0][0])

    @property
    def dim_y(self) -> int:
        return len(self.atoms[0][1])

    def duplicated(self, times: int = 2) -> EmpiricalTask:
        return EmpiricalTask(self.atoms * times, self.task_id)

    def permuted(self, order: Sequence[int]) -> EmpiricalTask:
        return EmpiricalTask(tuple(self.atoms[i] for i in order), self.task_id)


@dataclass(frozen=True)
class LinearHypothesis:
    theta: Vec

    def predict(self, x: Sequence[Fraction]) -> Fraction:
        return dot(self.theta, x)

    def residual(self, atom: Atom) -> Fraction:
        x, y = atom
        return y[0] - self.predict(x)
