# src/harness/streams.py
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from core.config import DEFAULT_CONFIG
from core.errors import InvalidSpec
from core.utils import Vec, dot
from learning.tasks import Criterion, CriterionKind, EmpiricalTask

logger = logging.getLogger(__name__)


class StreamKind(Enum):
    PLANTED = "planted"
    ADVERSARIAL = "adversarial"
    SINGLETON = "singleton"
    BALL_MEANS = "ball"

    @classmethod
    def parse(cls, name: str) -> StreamKind:
        key = name.strip().lower().replace("-", "_")
        aliases = {
            "planted_feasible": cls.PLANTED,
            "plantedfeasible": cls.PLANTED,
            "adversarial_shift": cls.ADVERSARIAL,
            "adversarialshift": cls.ADVERSARIAL,
            "singleton_sat": cls.SINGLETON,
            "singletonsat": cls.SINGLETON,
            "ball_means": cls.BALL_MEANS,
            "ballmeans": cls.BALL_MEANS,
        }
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            raise InvalidSpec(f"unknown stream kind {name!r}") from None


@dataclass(frozen=True)
class StreamSpec:
    kind: StreamKind
    seed: int = 0
    dim: int = 2
    T: int = 5
    n_per_task: int = 2
    epsilon: Fraction = DEFAULT_CONFIG.epsilon
    margin: Fraction = Fraction(1, 8)
    anchor: Fraction | None = None
    criterion: CriterionKind = CriterionKind.PER_SAMPLE_ABS
    grid_bits: int = DEFAULT_CONFIG.grid_bits

    def validate(self) -> None:
        if self.dim < 1 or self.T < 1 or self.n_per_task < 1:
            raise InvalidSpec(f"dim, T and n_per_task must be >= 1 (got {self.dim}, {self.T}, {self.n_per_task})")
        if self.epsilon < 0:
            raise InvalidSpec("epsilon must be >= 0")
        if self.kind is StreamKind.PLANTED:
            if not 0 < self.margin < self.epsilon:
                raise InvalidSpec(f"planted streams need 0 < margin < epsilon (margin={self.margin}, epsilon={self.epsilon})")
            if self.criterion is CriterionKind.MEAN_SQ_EUCLID:
                raise InvalidSpec("planted streams are regression tasks; use the ball stream for MeanSqEuclid")
        if self.kind is StreamKind.BALL_MEANS and self.epsilon <= BALL_SPREAD ** 2:
            raise InvalidSpec(f"ball streams have variance {BALL_SPREAD ** 2}; epsilon must exceed it")

    @property
    def criterion_kind(self) -> CriterionKind:
        if self.kind is StreamKind.BALL_MEANS:
            return CriterionKind.MEAN_SQ_EUCLID
        if self.kind in (StreamKind.ADVERSARIAL, StreamKind.SINGLETON):
            return CriterionKind.PER_SAMPLE_ABS
        return self.criterion

    def make_criterion(self, sign_cap: int = DEFAULT_CONFIG.sign_cap) -> Criterion:
        return Criterion(self.criterion_kind, self.epsilon, sign_cap)


# every ball-stream atom sits at this distance from its task mean
BALL_SPREAD = Fraction(1, 4)


def _grid(rng: np.random.Generator, limit: Fraction, bits: int, size) -> np.ndarray:
    """Integers k with |k / 2^bits| <= limit."""
    k = math.floor(limit * (1 << bits))
    return rng.integers(-k, k, size=size, endpoint=True)


def _rat(k, bits: int) -> Fraction:
    return Fraction(int(k), 1 << bits)


def _planted(spec: StreamSpec) -> list[EmpiricalTask]:
    """
    θ* is drawn once; x uniform on [-2, 2]^d, y = θ*·x + noise with
    |noise| <= epsilon - margin, so θ* satisfies every task with room to spare.
    """
    rng = np.random.default_rng(spec.seed)
    bits = spec.grid_bits
    theta_star = tuple(_rat(k, bits) for k in _grid(rng, Fraction(1), bits, spec.dim))
    tasks = []
    for t in range(1, spec.T + 1):
        xs = _grid(rng, Fraction(2), bits, (spec.n_per_task, spec.dim))
        noise = _grid(rng, spec.epsilon - spec.margin, bits, spec.n_per_task)
        pairs = []
        for row, k in zip(xs, noise):
            x = tuple(_rat(v, bits) for v in row)
            pairs.append((x, dot(theta_star, x) + _rat(k, bits)))
        tasks.append(EmpiricalTask.scalar(pairs, t))
    logger.debug("planted stream seed=%d theta*=%s", spec.seed, theta_star)
    return tasks


def _adversarial(spec: StreamSpec) -> list[EmpiricalTask]:
    """
    Two tasks in d=2 under PerSampleAbs (written for epsilon = 1/2):

      task 1: x=(4, 0),   y=0   ->  Sat₁ = {|θ₁| <= ε/4}, a thin slab through 0
      task 2: x=(32, 32), y=96  ->  Sat₂ = {|θ₁+θ₂-3| <= ε/32}

    (0, 3) lies in both, so Sat₁∩Sat₂ ≠ ∅. With λ=10 the regularizer stays at
    θ₁ = 0 for task 1 (zero hinge at the anchor). For task 2 the hinge pulls
    along the diagonal with slope 32√2 ≈ 45 against the penalty slope 20ρ; the
    balance point ρ ≈ 2.26 lies past the slab (ρ ≈ 2.12), so the minimizer is
    the slab point nearest the origin, ≈ (1.49, 1.49) with objective ≈ 44.5,
    while every point with |θ₁| <= 1/8 costs at least ≈ 66. θ₂ leaves Sat₁.
    """
    if spec.dim != 2 or spec.T != 2:
        logger.info("adversarial stream is fixed at dim=2, T=2 (requested dim=%d, T=%d)", spec.dim, spec.T)
    return [
        EmpiricalTask.scalar([((Fraction(4), Fraction(0)), Fraction(0))], 1),
        EmpiricalTask.scalar([((Fraction(32), Fraction(32)), Fraction(96))], 2),
    ]


def _singleton(spec: StreamSpec) -> list[EmpiricalTask]:
    """
    d=1: odd tasks hold the atom (x=1, y=a), even tasks (x=1, y=a+2ε), so
    Sat₁ = [a-ε, a+ε], Sat₂ = [a+ε, a+3ε] and Sat_{1:t} = {a+ε} from t=2 on.
    """
    if spec.anchor is not None:
        a = Fraction(spec.anchor)
    else:
        rng = np.random.default_rng(spec.seed)
        a = _rat(_grid(rng, Fraction(2), spec.grid_bits, None), spec.grid_bits)
    one = (Fraction(1),)
    return [
        EmpiricalTask.scalar([(one, a if t % 2 else a + 2 * spec.epsilon)], t)
        for t in range(1, spec.T + 1)
    ]


def _ball_means(spec: StreamSpec) -> list[EmpiricalTask]:
    """
    Output-only tasks: means m_t = μ + offset_t with offsets in [-margin, margin]^d;
    atoms come in pairs m_t ± BALL_SPREAD·e_k, so every task has mean m_t and
    variance exactly BALL_SPREAD².
    """
    rng = np.random.default_rng(spec.seed)
    bits = spec.grid_bits
    mu = [_rat(k, bits) for k in _grid(rng, Fraction(1), bits, spec.dim)]
    pairs = (spec.n_per_task + 1) // 2
    tasks = []
    for t in range(1, spec.T + 1):
        offset = [_rat(k, bits) for k in _grid(rng, spec.margin, bits, spec.dim)]
        mean = [m + o for m, o in zip(mu, offset)]
        ys: list[Vec] = []
        for p in range(pairs):
            axis = p % spec.dim
            for s in (1, -1):
                ys.append(tuple(v + s * BALL_SPREAD if k == axis else v for k, v in enumerate(mean)))
        tasks.append(EmpiricalTask.outputs(ys, t))
    return tasks


_GENERATORS = {
    StreamKind.PLANTED: _planted,
    StreamKind.ADVERSARIAL: _adversarial,
    StreamKind.SINGLETON: _singleton,
    StreamKind.BALL_MEANS: _ball_means,
}


def generate(spec: StreamSpec) -> list[EmpiricalTask]:
    spec.validate()
    return _GENERATORS[spec.kind](spec)
