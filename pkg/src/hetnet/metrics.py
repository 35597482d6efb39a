"""Area spectral efficiency and structural diagnostics of the density
dependence: monotonicity signs and the maximum achievable reliability."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .coverage import ps_asymptotic, ps_exact_tier
from .model import DegenerateNetworkError, NetworkModel, coefficient_vectors
from .specfun import sinc_norm

KM2_PER_M2 = 1e-6
SIGN_DEADBAND = 1e-14


class ModeError(ValueError):
    pass


@dataclass(frozen=True)
class TradeoffPoint:
    theta: float
    lambda_vec: np.ndarray
    ase: float
    ps: float
    feasible: bool

    @property
    def ase_m2(self) -> float:
        return self.ase * KM2_PER_M2


def ase(model: NetworkModel, gamma_hat: float, ps_per_tier: Sequence[float]) -> float:
    """sum_k lam_k U_k p_s(k) log2(1 + gamma), in bit/s/Hz per km^2.

    Entries of ``ps_per_tier`` for zero-density tiers are ignored (may be NaN).
    """
    ps = np.asarray(ps_per_tier, dtype=float)
    if ps.shape != (model.K,):
        raise ValueError(f"expected {model.K} per-tier probabilities, got shape {ps.shape}")
    lam = model.lam
    active = lam > 0
    if np.any((ps[active] < 0) | (ps[active] > 1)):
        raise ValueError(f"per-tier success probabilities must lie in [0, 1], got {ps}")
    return float(np.sum(lam[active] * model.users[active] * ps[active]) * math.log2(1.0 + gamma_hat))


def ase_asymptotic(model: NetworkModel, gamma_hat: float) -> float:
    """Quadratic-over-linear high-threshold ASE, bit/s/Hz per km^2."""
    if model.is_degenerate():
        raise DegenerateNetworkError()
    cv = coefficient_vectors(model)
    lam = model.lam
    scale = gamma_hat ** (-model.delta) * sinc_norm(model.delta) * math.log2(1.0 + gamma_hat)
    return scale * float(cv.c1 @ lam) * float(cv.c2 @ lam) / float(cv.d @ lam)


def monotonicity_signs(model: NetworkModel) -> np.ndarray:
    """Sign of d/d lam_i of (c.lam)/(d.lam) at the current densities.

    The numerator sum_j d_i d_j lam_j (c_i/d_i - c_j/d_j) does not depend on
    lam_i itself, so the sign holds over the whole range of lam_i.
    """
    if model.is_degenerate():
        raise DegenerateNetworkError()
    cv = coefficient_vectors(model)
    r = cv.ratio
    lam = model.lam
    num = cv.d * np.array([np.sum(cv.d * lam * (r[i] - r)) for i in range(model.K)])
    signs = np.sign(num).astype(int)
    signs[np.abs(num) < SIGN_DEADBAND] = 0
    return signs


@dataclass(frozen=True)
class PsMax:
    value: float
    tier: int
    tied: tuple[int, ...]
    mode: str


def ps_max(model: NetworkModel, gamma_hat: float, mode: Literal["exact", "asymptotic"] = "asymptotic") -> PsMax:
    """Largest reliability attainable by choosing densities, and the single tier that attains it.

    Asymptotic mode picks the tier with the largest c_k/d_k ratio. Exact mode
    is only defined for unbiased U-SDMA networks, where it picks the tier with
    the most antennas. Ties go to the lowest index; all tied tiers are reported.
    """
    if mode == "asymptotic":
        key = coefficient_vectors(model).ratio
        best = np.max(key)
        tied = tuple(int(i) for i in np.flatnonzero(np.isclose(key, best, rtol=1e-12, atol=0)))
        k = tied[0]
        value = gamma_hat ** (-model.delta) * sinc_norm(model.delta) * float(key[k])
    elif mode == "exact":
        if not model.is_usdma():
            raise ModeError(
                "exact maximum reliability is only established for unbiased U-SDMA networks; "
                "use mode='asymptotic'"
            )
        M = model.antennas
        tied = tuple(int(i) for i in np.flatnonzero(M == M.max()))
        k = tied[0]
        value = ps_exact_tier(model.only_tier(k, _positive_density(model, k)), k, gamma_hat)
    else:
        raise ModeError(f"unknown mode {mode!r}")
    return PsMax(float(value), k, tied, mode)


def _positive_density(model: NetworkModel, k: int) -> float:
    lam = model.tiers[k].lambda_max
    return lam if lam > 0 else 1.0
