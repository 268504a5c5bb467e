# src/core/config.py
from __future__ import annotations

import logging
import os
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Mapping

logger = logging.getLogger(__name__)

SEED_ENV = "SATCL_SEED"
WORKERS_ENV = "SATCL_WORKERS"


@dataclass(frozen=True)
class Config:
    # criteria
    epsilon: Fraction = Fraction(1, 2)
    sign_cap: int = 12

    # geometry
    bound: Fraction = Fraction(2 ** 10)
    ball_tol: Fraction = Fraction(1, 2 ** 20)
    ball_max_iter: int = 5000

    # regularization heuristic
    reg_iters: int = 2000
    reg_eta: float = 1.0

    # cell enumeration
    cell_slack: Fraction = Fraction(1, 2 ** 20)
    max_regions: int = 12
    max_constraints: int = 24

    # harness
    grid_bits: int = 10       # random rationals are k / 2^grid_bits
    snap_bits: int = 20       # float iterates are snapped to k / 2^snap_bits
    probe_radius: Fraction = Fraction(4)
    seed: int = 0
    workers: int = 1
    record_timings: bool = True


DEFAULT_CONFIG = Config()


def load_config(env: Mapping[str, str] | None = None, **overrides) -> Config:
    """
    Defaults, then environment (SATCL_SEED, SATCL_WORKERS), then explicit overrides.
    """
    env = os.environ if env is None else env
    cfg = DEFAULT_CONFIG

    raw_seed = env.get(SEED_ENV)
    if raw_seed:
        try:
            cfg = replace(cfg, seed=int(raw_seed))
        except ValueError:
            logger.warning("Ignoring non-integer %s=%r", SEED_ENV, raw_seed)

    raw_workers = env.get(WORKERS_ENV)
    if raw_workers:
        try:
            cfg = replace(cfg, workers=max(1, int(raw_workers)))
        except ValueError:
            logger.warning("Ignoring non-integer %s=%r", WORKERS_ENV, raw_workers)

    overrides = {k: v for k, v in overrides.items() if v is not None}
    return replace(cfg, **overrides) if overrides else cfg
