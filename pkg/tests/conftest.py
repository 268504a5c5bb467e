# tests/conftest.py
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parent.parent
SRC_DIR = ROOT / "src"

if str(SRC_DIR) not in sys.path:
    sys.path.insert(0, str(SRC_DIR))

DATA_DIR = ROOT / "data"


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def rat_vec(rng):
    """Random dyadic vectors k/2^bits in [-radius, radius]^dim."""

    def draw(dim, radius=4, bits=10):
        scale = 1 << bits
        ks = rng.integers(-radius * scale, radius * scale, size=dim, endpoint=True)
        return tuple(Fraction(int(k), scale) for k in ks)

    return draw


@pytest.fixture
def data_dir():
    return DATA_DIR
