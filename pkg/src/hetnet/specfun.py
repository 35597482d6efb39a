"""Special-function kernel: log-gamma, gamma ratios, normalized sinc and
the Gauss hypergeometric function at negative real arguments."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SERIES_TOL = 1e-12
SERIES_MAX_TERMS = 1_000_000
_CHUNK = 512


class ConvergenceError(ArithmeticError):
    """Raised when a hypergeometric series fails to settle within the term cap."""


def log_gamma(x: float) -> float:
    """Natural log of Gamma(x) for x > 0."""
    if not x > 0:
        raise ValueError(f"log_gamma requires x > 0, got {x!r}")
    return math.lgamma(x)


def gamma_ratio(a: float, d: float) -> float:
    """Gamma(a + d) / Gamma(a), evaluated in log space."""
    if not a > 0:
        raise ValueError(f"gamma_ratio requires a > 0, got {a!r}")
    if not 0 < d < 1:
        raise ValueError(f"gamma_ratio requires 0 < d < 1, got {d!r}")
    return math.exp(math.lgamma(a + d) - math.lgamma(a))


def log_pochhammer(a: float, n: int) -> float:
    """log of the rising factorial (a)_n for a > 0."""
    return math.lgamma(a + n) - math.lgamma(a)


def sinc_norm(d: float) -> float:
    """Normalized sinc, sin(pi d) / (pi d), on 0 < d < 1."""
    if not 0 < d < 1:
        raise ValueError(f"sinc_norm requires 0 < d < 1, got {d!r}")
    return math.sin(math.pi * d) / (math.pi * d)


@dataclass(frozen=True)
class Hyp2F1Params:
    """Arguments of 2F1(a, b; c; -x) with x >= 0."""

    a: float
    b: float
    c: float
    x: float

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError(f"c must be positive, got {self.c!r}")
        if not self.x >= 0:
            raise ValueError(f"x must be nonnegative, got {self.x!r}")


def _series_at(a: float, b: float, c: float, w: float) -> float:
    """Sum the defining series of 2F1(a, b; c; w) for 0 <= w < 1.

    Terms are generated in vectorized chunks from their ratios. Stops once
    three consecutive terms, each inflated by a geometric bound on the remaining
    tail, are below SERIES_TOL relative to the running sum.
    """
    if w == 0.0:
        return 1.0
    total = 1.0
    term = 1.0
    tail = np.zeros(2, dtype=bool)
    n0 = 0
    while n0 < SERIES_MAX_TERMS:
        n = np.arange(n0, n0 + _CHUNK, dtype=float)
        ratios = (a + n) * (b + n) / ((c + n) * (n + 1.0)) * w
        terms = term * np.cumprod(ratios)
        partial = total + np.cumsum(terms)
        # geometric bound on the remaining tail, valid once the ratio drops below 1
        nxt = np.append(ratios[1:], (a + n0 + _CHUNK) * (b + n0 + _CHUNK) / ((c + n0 + _CHUNK) * (n0 + _CHUNK + 1.0)) * w)
        with np.errstate(divide="ignore"):
            tail_factor = np.where(np.abs(nxt) < 1.0, 1.0 / (1.0 - np.abs(nxt)), np.inf)
        small = np.abs(terms) * tail_factor <= SERIES_TOL * np.abs(partial)
        # prepend the tail of the previous chunk so runs can straddle chunks
        flags = np.concatenate([tail, small])
        hits = np.flatnonzero(flags[2:] & flags[1:-1] & flags[:-2])
        if hits.size:
            return float(partial[hits[0]])
        tail = small[-2:]
        total = float(partial[-1])
        term = terms[-1]
        if term == 0.0:
            return total
        n0 += _CHUNK
    raise ConvergenceError(
        f"2F1 series did not converge within {SERIES_MAX_TERMS} terms "
        f"(a={a}, b={b}, c={c}, transformed argument w={w})"
    )


def gauss_2f1_neg(p: Hyp2F1Params) -> float:
    """2F1(a, b; c; -x) via the Pfaff transformation.

    2F1(a, b; c; -x) = (1 + x)^(-b) 2F1(c - a, b; c; x / (1 + x)), and the
    transformed argument is always in [0, 1).
    """
    if p.x == 0.0:
        return 1.0
    w = p.x / (1.0 + p.x)
    return (1.0 + p.x) ** (-p.b) * _series_at(p.c - p.a, p.b, p.c, w)


def log_gauss_2f1_neg(a: float, b: float, c: float, x: float) -> float:
    """log 2F1(a, b; c; -x) for families where the transformed series is positive.

    Keeps the (1 + x)^(-b) prefactor in log space so large b does not underflow.
    """
    if x == 0.0:
        return 0.0
    w = x / (1.0 + x)
    s = _series_at(c - a, b, c, w)
    if not s > 0:
        raise ConvergenceError(f"transformed 2F1 series is nonpositive ({s}) at w={w}")
    return -b * math.log1p(x) + math.log(s)
