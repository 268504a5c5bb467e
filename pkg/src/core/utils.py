# src/core/utils.py
from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Iterable, Sequence

Rat = Fraction
Vec = tuple[Fraction, ...]

_RAT_RE = re.compile(r"^\s*[+-]?\d+(\s*/\s*[+-]?\d+)?\s*$")


def parse_rat(text: str | int | Fraction) -> Fraction:
    """
    Parse "3/4", "-2", "5" (or an int / Fraction) into an exact rational.
    Decimal literals such as "0.1" are refused.
    """
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int) and not isinstance(text, bool):
        return Fraction(text)
    if not isinstance(text, str) or not _RAT_RE.match(text):
        raise ValueError(f"not a rational literal: {text!r}")
    num, _, den = text.replace(" ", "").partition("/")
    if den and int(den) == 0:
        raise ValueError(f"zero denominator: {text!r}")
    return Fraction(int(num), int(den) if den else 1)


def format_rat(q: Fraction) -> str:
    # Fraction.__str__ already gives "p/q" in lowest terms, "p" for integers.
    return str(q)


def vec(*coords: int | str | Fraction) -> Vec:
    return tuple(parse_rat(c) for c in coords)


def zeros(dim: int) -> Vec:
    return (Fraction(0),) * dim


def parse_vec(text: str) -> Vec:
    text = text.strip()
    if not text:
        return ()
    return tuple(parse_rat(part) for part in text.split(";"))


def format_vec(v: Iterable[Fraction]) -> str:
    return ";".join(format_rat(c) for c in v)


def dot(a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def sub(a: Sequence[Fraction], b: Sequence[Fraction]) -> Vec:
    return tuple(x - y for x, y in zip(a, b))


def sq_norm(a: Sequence[Fraction]) -> Fraction:
    return dot(a, a)


def sqrt_upper(q: Fraction, bits: int = 32) -> Fraction:
    """
    Smallest multiple of 1/(den * 2^bits) that is >= sqrt(q).
    Exact (equal to sqrt(q)) whenever q is the square of a rational.
    """
    if q < 0:
        raise ValueError("sqrt of a negative rational")
    p, d = q.numerator, q.denominator
    scaled = p * d * 4 ** bits
    r = math.isqrt(scaled)
    if r * r < scaled:
        r += 1
    return Fraction(r, d * 2 ** bits)


def snap(x: float, bits: int) -> Fraction:
    """Round a float to the dyadic grid k / 2^bits."""
    return Fraction(round(x * (1 << bits)), 1 << bits)


def snap_vec(xs: Iterable[float], bits: int) -> Vec:
    return tuple(snap(float(x), bits) for x in xs)
