# src/learning/algorithms.py
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from core.config import DEFAULT_CONFIG, Config
from core.errors import InfeasibleRegion, InfeasibleStep, InvalidInput, TaskTooLarge, UnknownAlgorithm
from core.utils import Vec, parse_rat, snap_vec, sq_norm, sub, zeros
from geometry.feasibility import chebyshev_center, intersect, lp_feasible, region_feasible
from geometry.regions import ConvexRegion
from learning.criteria import minimax_fit, sat_region
from learning.engine import CLAlgorithm, CLState, Memory
from learning.tasks import Atom, Criterion, EmpiricalTask, LinearHypothesis

logger = logging.getLogger(__name__)


# -------------------------------
# Exact (perfect memory)
# -------------------------------

@dataclass(frozen=True)
class ExactMemory(Memory):
    region: ConvexRegion

    @property
    def size(self) -> int:
        return self.region.constraint_count

    def oracle_set(self, theta: Vec) -> ConvexRegion:
        return self.region


class ExactAlgorithm(CLAlgorithm):
    """Keeps Sat_{1:t} verbatim and answers with its Chebyshev center."""
    liftable = True

    def __init__(self, bound: Fraction = DEFAULT_CONFIG.bound):
        self.bound = Fraction(bound)
        self.name = "exact"

    def initial_memory(self, dim: int) -> Memory:
        return ExactMemory(ConvexRegion.whole(dim))

    def step_region(self, state: CLState, region: ConvexRegion) -> CLState:
        t = state.t + 1
        candidate = intersect(state.memory.region, region)

        if candidate.is_polytope:
            if lp_feasible(candidate).is_empty:
                raise InfeasibleStep(t)
            try:
                theta = chebyshev_center(candidate, self.bound)
            except InfeasibleRegion:
                # nonempty, but only outside the bounding box
                logger.warning("Sat_{1:%d} lies outside [-%s, %s]^d; using the LP witness", t, self.bound, self.bound)
                theta = lp_feasible(candidate).witness
        else:
            decision = region_feasible(candidate)
            if not decision.is_feasible:
                raise InfeasibleStep(t, decision.status.value)
            theta = decision.witness

        return CLState(theta, ExactMemory(candidate), t)

    def step(self, state: CLState, task: EmpiricalTask, criterion: Criterion) -> CLState:
        return self.step_region(state, sat_region(criterion, task))


# -------------------------------
# Replay / coreset
# -------------------------------

@dataclass(frozen=True)
class ReplayMemory(Memory):
    coreset: tuple[Atom, ...]
    k: int | None
    criterion: Criterion | None = None
    policy: str = "max_residual"

    @property
    def size(self) -> int:
        return len(self.coreset)

    def oracle_set(self, theta: Vec) -> ConvexRegion:
        if not self.coreset or self.criterion is None:
            return ConvexRegion.whole(len(theta))
        try:
            return sat_region(self.criterion, EmpiricalTask(self.coreset))
        except TaskTooLarge as e:
            logger.warning("replay coreset too large to rebuild its region (%s); falling back to {θ_t}", e)
            return ConvexRegion.point(theta)


def _score(atom: Atom, theta: Vec, criterion: Criterion) -> Fraction:
    if criterion.kind.is_linear:
        return abs(LinearHypothesis(theta).residual(atom))
    return sq_norm(sub(atom[1], theta))


def select_k(atoms: Sequence[Atom], theta: Vec, k: int | None, criterion: Criterion) -> tuple[Atom, ...]:
    """Greedy max-residual under the current θ, ties broken by atom index."""
    if k is None or k >= len(atoms):
        order = range(len(atoms))
    else:
        scores = [_score(a, theta, criterion) for a in atoms]
        order = sorted(range(len(atoms)), key=lambda i: (-scores[i], i))[:k]
    return tuple(atoms[i] for i in order)


class ReplayAlgorithm(CLAlgorithm):
    """
    Stores up to k atoms per task and refits on the whole coreset: minimax
    residual (exact LP) for linear criteria, the mean output for MeanSqEuclid.
    """

    def __init__(self, k: int | None = None):
        if k is not None and k < 1:
            raise InvalidInput(f"replay needs k >= 1, got {k}")
        self.k = k
        self.name = f"replay:k={'all' if k is None else k}"

    def initial_memory(self, dim: int) -> Memory:
        return ReplayMemory((), self.k)

    def step(self, state: CLState, task: EmpiricalTask, criterion: Criterion) -> CLState:
        coreset = state.memory.coreset + select_k(task.atoms, state.theta, self.k, criterion)
        if criterion.kind.is_linear:
            theta, _ = minimax_fit(coreset)
        else:
            ys = [y for _, y in coreset]
            theta = tuple(sum((y[k] for y in ys), Fraction(0)) / len(ys) for k in range(len(ys[0])))
        return CLState(theta, ReplayMemory(coreset, self.k, criterion), state.t + 1)


# -------------------------------
# Quadratic penalty (regularization)
# -------------------------------

@dataclass(frozen=True)
class RegMemory(Memory):
    anchor: Vec
    lam: Fraction

    @property
    def size(self) -> int:
        return 1

    def oracle_set(self, theta: Vec) -> ConvexRegion:
        return ConvexRegion.point(theta)


class RegAlgorithm(CLAlgorithm):
    """
    Minimizes Σ_i max(0, |y_i - θ·x_i| - ε) + λ ||θ - anchor||² with `iters`
    normalized subgradient steps of size eta / sqrt(k), starting at the anchor
    (θ_{t-1}). The lowest-objective iterate is kept and snapped to k/2^snap_bits.
    """

    def __init__(
        self,
        lam: Fraction,
        iters: int = DEFAULT_CONFIG.reg_iters,
        eta: float = DEFAULT_CONFIG.reg_eta,
        snap_bits: int = DEFAULT_CONFIG.snap_bits,
    ):
        self.lam = Fraction(lam)
        if self.lam < 0:
            raise InvalidInput(f"lambda must be >= 0, got {lam}")
        self.iters = iters
        self.eta = eta
        self.snap_bits = snap_bits
        self.name = f"reg:lambda={self.lam}"

    def initial_memory(self, dim: int) -> Memory:
        return RegMemory(zeros(dim), self.lam)

    def step(self, state: CLState, task: EmpiricalTask, criterion: Criterion) -> CLState:
        if not criterion.kind.is_linear:
            raise InvalidInput("the quadratic-penalty learner needs PerSampleAbs or MeanAbs")
        anchor = state.memory.anchor
        X = np.array([[float(v) for v in x] for x, _ in task.atoms], dtype=float)
        y = np.array([float(yy[0]) for _, yy in task.atoms], dtype=float)
        a = np.array([float(v) for v in anchor], dtype=float)
        eps, lam = float(criterion.epsilon), float(self.lam)

        def objective(theta: np.ndarray) -> float:
            hinge = np.maximum(0.0, np.abs(y - X @ theta) - eps).sum()
            return float(hinge + lam * ((theta - a) ** 2).sum())

        theta = a.copy()
        best, best_value = theta.copy(), objective(theta)
        for k in range(1, self.iters + 1):
            r = y - X @ theta
            active = np.abs(r) > eps
            g = -(np.sign(r[active])[:, None] * X[active]).sum(axis=0) + 2.0 * lam * (theta - a)
            g_norm = float(np.linalg.norm(g))
            if g_norm == 0.0:
                break
            theta = theta - (self.eta / math.sqrt(k)) * g / g_norm
            value = objective(theta)
            if value < best_value:
                best, best_value = theta.copy(), value

        logger.debug("%s: t=%d objective %.6g", self.name, state.t + 1, best_value)
        new_theta = snap_vec(best, self.snap_bits)
        return CLState(new_theta, RegMemory(new_theta, self.lam), state.t + 1)


# -------------------------------
# Names
# -------------------------------

def _options(text: str) -> dict[str, str]:
    out = {}
    for part in filter(None, text.split(",")):
        key, sep, value = part.partition("=")
        if not sep:
            raise UnknownAlgorithm(f"expected key=value, got {part!r}")
        out[key.strip().lower()] = value.strip()
    return out


def parse_algorithm(name: str, config: Config = DEFAULT_CONFIG) -> CLAlgorithm:
    """"exact", "replay[:k=<int>|all]", "reg:lambda=<rat>[,iters=<int>][,eta=<float>]"."""
    head, _, rest = name.strip().partition(":")
    head = head.lower()
    try:
        opts = _options(rest)
        if head == "exact" and not opts:
            return ExactAlgorithm(config.bound)
        if head == "replay" and set(opts) <= {"k"}:
            k = opts.get("k", "all")
            return ReplayAlgorithm(None if k.lower() in ("all", "inf") else int(k))
        if head == "reg" and "lambda" in opts and set(opts) <= {"lambda", "iters", "eta"}:
            return RegAlgorithm(
                parse_rat(opts["lambda"]),
                iters=int(opts.get("iters", config.reg_iters)),
                eta=float(opts.get("eta", config.reg_eta)),
                snap_bits=config.snap_bits,
            )
    except (ValueError, InvalidInput) as e:
        raise UnknownAlgorithm(f"bad algorithm name {name!r}: {e}") from None
    raise UnknownAlgorithm(f"unknown algorithm {name!r} (expected exact, replay:k=<int>, reg:lambda=<rat>)")
