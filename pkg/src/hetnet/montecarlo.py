"""Seeded Monte Carlo estimate of the success probability.

Each tier is a homogeneous PPP on a disc around the typical user at the
origin. The user associates with the tier of largest biased received power
from its nearest BS, the serving gain is Gamma(D_k, 1) and every other BS
contributes interference with gain Gamma(U_j, 1).

Trial ``i`` draws from its own stream keyed by (seed, i), so results do not
depend on how trials are split across workers.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .model import NetworkModel

PER_M2_PER_KM2 = 1e-6
MIN_TOTAL_BS = 1e4
MIN_DENSEST_BS = 1e3
MAX_REDRAWS = 1000


@dataclass(frozen=True)
class SimConfig:
    trials: int
    seed: int = 0
    region_radius: float = 0.0  # meters; 0 selects auto_radius
    gamma_hat_grid: tuple[float, ...] = (1.0,)

    def __post_init__(self):
        object.__setattr__(self, "gamma_hat_grid", tuple(float(g) for g in self.gamma_hat_grid))
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.region_radius < 0:
            raise ValueError("region_radius must be >= 0")
        if not self.gamma_hat_grid or any(not g > 0 for g in self.gamma_hat_grid):
            raise ValueError("gamma_hat_grid must hold positive thresholds")


@dataclass
class SimulationReport:
    gamma_hat: np.ndarray
    ps_hat: np.ndarray
    stderr: np.ndarray
    association_freq: np.ndarray
    tier_served: np.ndarray  # trials served by each tier
    tier_success: np.ndarray  # (K, len(gamma)) conditional success frequency; NaN if never served
    trials_used: int
    seed: int
    region_radius: float
    redraws: int = 0
    radius_rule: str = ""
    serving_distance: list[np.ndarray] | None = field(default=None, repr=False)


def auto_radius(model: NetworkModel) -> float:
    """Disc radius (m) holding >= 1e4 BSs in expectation, and >= 1e3 of the densest tier."""
    lam = model.lam * PER_M2_PER_KM2
    if not np.any(lam > 0):
        raise ValueError("degenerate network: all tier densities are zero")
    area = max(MIN_TOTAL_BS / lam.sum(), MIN_DENSEST_BS / lam.max())
    return math.sqrt(area / math.pi)


def trial_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


@dataclass(frozen=True)
class TrialOutcome:
    success: np.ndarray
    serving_tier: int
    serving_distance: float
    sir: float
    redraws: int = 0


def run_trial(model: NetworkModel, gamma_hat_grid: Sequence[float], rng: np.random.Generator, radius: float) -> TrialOutcome:
    """One PPP deployment, association and SIR draw for the typical user."""
    half_alpha = model.alpha / 2.0
    lam = model.lam * PER_M2_PER_KM2
    area = math.pi * radius * radius
    P, B, U, D = model.power, model.bias, model.users, model.dof
    for redraws in range(MAX_REDRAWS):
        counts = rng.poisson(lam * area)
        if counts.sum() > 0:
            break
    else:
        raise RuntimeError("every tier was empty in all redraws; region too small")

    r2 = [radius * radius * rng.random(n) for n in counts]
    # association on the nearest BS of each tier
    best_k, best_pow, best_i = -1, -np.inf, -1
    for j in range(model.K):
        if counts[j] == 0:
            continue
        i = int(np.argmin(r2[j]))
        pw = P[j] * B[j] * r2[j][i] ** (-half_alpha)
        if pw > best_pow:
            best_k, best_pow, best_i = j, pw, i

    interference = 0.0
    for j in range(model.K):
        if counts[j] == 0:
            continue
        g = rng.standard_exponential(counts[j]) if U[j] == 1 else rng.standard_gamma(U[j], counts[j])
        contrib = g * r2[j] ** (-half_alpha)
        if j == best_k:
            contrib[best_i] = 0.0
        interference += P[j] / U[j] * float(contrib.sum())

    k = best_k
    d_serv = r2[k][best_i]
    signal = P[k] / U[k] * rng.standard_gamma(D[k]) * d_serv ** (-half_alpha)
    sir = signal / interference if interference > 0 else math.inf
    success = sir >= np.asarray(gamma_hat_grid)
    return TrialOutcome(success, k, math.sqrt(d_serv), sir, redraws)


def _run_block(model, grid, seed, radius, start, stop, record):
    K, G = model.K, len(grid)
    succ = np.zeros(G, dtype=np.int64)
    served = np.zeros(K, dtype=np.int64)
    tier_succ = np.zeros((K, G), dtype=np.int64)
    dist = [[] for _ in range(K)] if record else None
    redraws = 0
    for idx in range(start, stop):
        out = run_trial(model, grid, trial_rng(seed, idx), radius)
        succ += out.success
        served[out.serving_tier] += 1
        tier_succ[out.serving_tier] += out.success
        redraws += out.redraws
        if record:
            dist[out.serving_tier].append(out.serving_distance)
    return succ, served, tier_succ, redraws, dist


def worker_count() -> int:
    """Parallelism cap from HETNET_THREADS (0 or unset = all CPUs)."""
    try:
        n = int(os.environ.get("HETNET_THREADS", "0"))
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


def simulate_ps(model: NetworkModel, sim: SimConfig, workers: int | None = None, record_distances: bool = False) -> SimulationReport:
    """Aggregate ``sim.trials`` independent trials into empirical success frequencies."""
    if model.is_degenerate():
        raise ValueError("degenerate network: all tier densities are zero")
    radius = sim.region_radius if sim.region_radius > 0 else auto_radius(model)
    rule = "given" if sim.region_radius > 0 else (
        f"auto: E[total BS] >= {MIN_TOTAL_BS:.0f} and E[densest tier BS] >= {MIN_DENSEST_BS:.0f}"
    )
    grid = np.asarray(sim.gamma_hat_grid)
    workers = worker_count() if workers is None else max(1, workers)
    workers = min(workers, sim.trials)

    bounds = np.linspace(0, sim.trials, workers + 1).astype(int)
    blocks = list(zip(bounds[:-1], bounds[1:]))
    if workers == 1:
        parts = [_run_block(model, grid, sim.seed, radius, a, b, record_distances) for a, b in blocks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            futs = [ex.submit(_run_block, model, grid, sim.seed, radius, a, b, record_distances) for a, b in blocks]
            parts = [f.result() for f in futs]

    succ = sum(p[0] for p in parts)
    served = sum(p[1] for p in parts)
    tier_succ = sum(p[2] for p in parts)
    redraws = sum(p[3] for p in parts)
    n = sim.trials
    ps_hat = succ / n
    with np.errstate(invalid="ignore", divide="ignore"):
        tier_freq = np.where(served[:, None] > 0, tier_succ / served[:, None], np.nan)
    dist = None
    if record_distances:
        dist = [np.array([d for p in parts for d in p[4][k]]) for k in range(model.K)]
    return SimulationReport(
        gamma_hat=grid,
        ps_hat=ps_hat,
        stderr=np.sqrt(ps_hat * (1 - ps_hat) / n),
        association_freq=served / n,
        tier_served=served,
        tier_success=tier_freq,
        trials_used=n,
        seed=sim.seed,
        region_radius=radius,
        redraws=int(redraws),
        radius_rule=rule,
        serving_distance=dist,
    )


def serving_distance_cdf(model: NetworkModel, k: int, r) -> np.ndarray:
    """CDF of the serving distance (m) given association with tier ``k``."""
    lam = model.lam * PER_M2_PER_KM2
    w = model.power * model.bias
    s = float(np.sum(lam * (w / w[k]) ** model.delta))
    r = np.asarray(r, dtype=float)
    return 1.0 - np.exp(-math.pi * r * r * s)
