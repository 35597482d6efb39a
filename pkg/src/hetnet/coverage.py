"""Exact and asymptotic success probability.

The exact per-tier value is computed from the power series whose
coefficients q_i fill the lower-triangular Toeplitz matrix: the first D_k
coefficients of 1/F(z) are the first column of its inverse, so the success
probability is A times their sum. No matrix is ever formed here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .model import DegenerateNetworkError, NetworkModel, coefficient_vectors
from .specfun import ConvergenceError, gamma_ratio, log_gauss_2f1_neg, sinc_norm

# floating residue allowed before a probability is declared out of range
_PROB_SLACK = 1e-12


class InactiveTierError(ValueError):
    def __init__(self, k: int):
        super().__init__(f"tier {k} inactive: conditional success probability undefined")
        self.tier = k


class SeriesSignError(ArithmeticError):
    """A coefficient violated its sign invariant; points at a special-function fault."""


@dataclass(frozen=True)
class SeriesCoefficients:
    values: np.ndarray
    tier_index: int
    gamma_hat: float
    kind: Literal["q-series", "reciprocal"]

    def __len__(self) -> int:
        return len(self.values)


def q_coefficients(model: NetworkModel, k: int, gamma_hat: float, n: int) -> SeriesCoefficients:
    """First ``n`` coefficients q_0..q_{n-1} of F(z) for serving tier ``k``."""
    if not gamma_hat > 0:
        raise ValueError(f"gamma_hat must be positive, got {gamma_hat!r}")
    if n < 1:
        raise ValueError("need at least one coefficient")
    delta = model.delta
    U = model.users
    B = model.bias
    weight = model.lam * model.weights
    q = np.zeros(n)
    for j in range(model.K):
        if weight[j] == 0.0:
            continue
        Uj = float(U[j])
        x = U[k] * B[k] / (Uj * B[j]) * gamma_hat
        for i in range(n):
            a, b, c = i - delta, Uj + i, i + 1 - delta
            try:
                log_f = log_gauss_2f1_neg(a, b, c, x)
            except ConvergenceError as exc:
                raise ConvergenceError(f"q_{i}, interfering tier {j}: {exc}") from exc
            # log of Gamma(U+i) / (Gamma(U) i!) x^i
            log_mag = math.lgamma(Uj + i) - math.lgamma(Uj) - math.lgamma(i + 1.0) + i * math.log(x)
            q[i] += weight[j] * delta / (delta - i) * math.exp(log_mag + log_f)
    # q_i < 0 for i >= 1; exact zeros only arise from underflow at tiny thresholds
    if not q[0] > 0 or np.any(q[1:] > 0):
        raise SeriesSignError(f"q-series sign invariant violated for tier {k}: {q}")
    return SeriesCoefficients(q, k, float(gamma_hat), "q-series")


def reciprocal_series(q: SeriesCoefficients, length: int) -> SeriesCoefficients:
    """First ``length`` coefficients of 1/F(z) by the power-series reciprocal recursion."""
    if length < 1 or length > len(q):
        raise ValueError(f"length must be in [1, {len(q)}], got {length}")
    qv = q.values
    if qv[0] == 0.0:
        raise ZeroDivisionError("q_0 = 0: series has no reciprocal")
    t = np.zeros(length)
    t[0] = 1.0 / qv[0]
    for n in range(1, length):
        t[n] = -np.dot(qv[n:0:-1], t[:n]) / qv[0]
    return SeriesCoefficients(t, q.tier_index, q.gamma_hat, "reciprocal")


def _check_tier(model: NetworkModel, k: int) -> None:
    if not 0 <= k < model.K:
        raise IndexError(f"tier index {k} out of range for {model.K} tiers")
    if model.is_degenerate():
        raise DegenerateNetworkError()
    if not model.tiers[k].lam > 0:
        raise InactiveTierError(k)


def ps_exact_tier(model: NetworkModel, k: int, gamma_hat: float) -> float:
    """Success probability of a user served by tier ``k``."""
    _check_tier(model, k)
    D = model.tiers[k].dof
    q = q_coefficients(model, k, gamma_hat, D)
    t = reciprocal_series(q, D).values
    if np.any(t < 0):
        raise SeriesSignError(f"reciprocal coefficients must be nonnegative, got {t}")
    p = model.A * float(t.sum())
    if p > 1 + _PROB_SLACK:
        raise SeriesSignError(f"success probability {p} exceeds 1 for tier {k}")
    return min(max(p, 0.0), 1.0)


def ps_exact_tiers(model: NetworkModel, gamma_hat: float) -> np.ndarray:
    """Per-tier success probabilities; NaN for inactive tiers."""
    return np.array(
        [ps_exact_tier(model, k, gamma_hat) if t.lam > 0 else math.nan for k, t in enumerate(model.tiers)]
    )


def ps_exact(model: NetworkModel, gamma_hat: float) -> float:
    """Overall success probability sum_k A_k p_s(k)."""
    if model.is_degenerate():
        raise DegenerateNetworkError()
    w = model.lam * model.weights
    per_tier = ps_exact_tiers(model, gamma_hat)
    active = w > 0
    p = float(np.dot(w[active], per_tier[active]) / w.sum())
    return min(max(p, 0.0), 1.0)


def ps_asymptotic_tier(model: NetworkModel, k: int, gamma_hat: float) -> float:
    """High-threshold approximation of p_s(k); unclamped and possibly above 1."""
    if model.is_degenerate():
        raise DegenerateNetworkError()
    if not gamma_hat > 0:
        raise ValueError(f"gamma_hat must be positive, got {gamma_hat!r}")
    delta = model.delta
    tier = model.tiers[k]
    cv = coefficient_vectors(model)
    num = (tier.users * tier.bias) ** (-delta) * gamma_ratio(tier.dof, delta)
    return model.A * gamma_hat ** (-delta) * sinc_norm(delta) * num / float(cv.d @ model.lam)


def ps_asymptotic(model: NetworkModel, gamma_hat: float) -> float:
    """gamma^-delta sinc(delta) (c.lam)/(d.lam); unclamped."""
    if model.is_degenerate():
        raise DegenerateNetworkError()
    if not gamma_hat > 0:
        raise ValueError(f"gamma_hat must be positive, got {gamma_hat!r}")
    cv = coefficient_vectors(model)
    lam = model.lam
    return gamma_hat ** (-model.delta) * sinc_norm(model.delta) * float(cv.c @ lam) / float(cv.d @ lam)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)
