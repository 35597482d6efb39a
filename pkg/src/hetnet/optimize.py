"""Density optimization: maximize ASE subject to a reliability floor.

Two solvers are provided. ``optimize_usdma`` is the greedy exact solution
for unbiased U-SDMA networks, where the problem is a linear program in
y_k = p_s(k) lam_k. ``optimize_general`` handles arbitrary networks on the
high-threshold forms, combining a Dinkelbach outer loop on the
quadratic-over-linear ASE with sequential linearization of its numerator.
``grid_search_oracle`` brute-forces the density box for cross-checking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .coverage import ps_exact, ps_exact_tier
from .metrics import ps_max
from .model import NetworkModel, coefficient_vectors
from .specfun import sinc_norm

FEAS_TOL = 1e-9


class InfeasibleError(ValueError):
    def __init__(self, theta: float, ps_max_value: float):
        super().__init__(
            f"reliability target {theta:.6g} exceeds the maximum achievable {ps_max_value:.6g}"
        )
        self.theta = theta
        self.ps_max = ps_max_value


@dataclass
class OptimizationResult:
    lambda_opt: np.ndarray
    ase: float
    ps: float
    feasible: bool
    converged: bool = True
    trace: dict = field(default_factory=dict)
    restarts: int = 1
    best_restart: int = 0
    ps_exact: float | None = None
    method: str = ""

    @property
    def ase_m2(self) -> float:
        return self.ase * 1e-6


def feasibility(model: NetworkModel, theta: float, gamma_hat: float, mode: str = "asymptotic") -> tuple[bool, float]:
    """Whether ``theta`` is attainable, together with the maximum reliability."""
    if not 0 <= theta <= 1:
        raise ValueError(f"theta must lie in [0, 1], got {theta!r}")
    best = ps_max(model, gamma_hat, mode).value
    return theta <= best, best


# -- U-SDMA -----------------------------------------------------------------


def usdma_tier_ps(model: NetworkModel, gamma_hat: float) -> np.ndarray:
    """Per-tier exact p_s(k) of an unbiased U-SDMA network.

    These do not depend on densities or powers, so each is evaluated on the
    single-tier network of that tier.
    """
    if not model.is_usdma():
        raise ValueError("model is not an unbiased U-SDMA network")
    return np.array([ps_exact_tier(model.only_tier(k, 1.0), k, gamma_hat) for k in range(model.K)])


def optimize_usdma(model: NetworkModel, theta: float, gamma_hat: float) -> OptimizationResult:
    """Greedy exact solver for unbiased U-SDMA networks.

    Starts with every tier at its deployed density and, while the reliability
    constraint sum_k b_k y_k >= 0 is violated, switches off tiers in
    ascending order of b_k = (P_k/U)^delta (1 - theta/p_s(k)); the last tier
    touched is set fractionally so the constraint binds.
    """
    if not model.is_usdma():
        raise ValueError("optimize_usdma requires an unbiased U-SDMA network (common U and bias)")
    ok, best = feasibility(model, theta, gamma_hat, "exact")
    if not ok:
        raise InfeasibleError(theta, best)
    U = float(model.users[0])
    pk = usdma_tier_ps(model, gamma_hat)
    w = (model.power / U) ** model.delta
    b = w * (1.0 - theta / pk)
    y = pk * model.lambda_max

    order = np.argsort(b, kind="stable")
    reduced: list[int] = []
    pivot = None
    for i in order:
        if b @ y >= 0:
            break
        y[i] = 0.0
        reduced.append(int(i))
        s = float(b @ y)
        if s >= 0:
            y[i] = s / -b[i]
            pivot = int(i)
            break

    lam = model.lambda_max.copy()
    for i in reduced:
        lam[i] = min(max(y[i] / pk[i], 0.0), lam[i])
    ase_val = U * math.log2(1.0 + gamma_hat) * float(pk @ lam)
    ps_val = float((w * pk) @ lam / (w @ lam)) if np.any(lam > 0) else 0.0
    return OptimizationResult(
        lambda_opt=lam,
        ase=ase_val,
        ps=ps_val,
        feasible=ps_val >= theta - FEAS_TOL,
        trace={"b": b, "ps_tier": pk, "order": [int(i) for i in order], "deactivated": reduced, "pivot": pivot},
        method="usdma",
    )


# -- LP subproblem ------------------------------------------------------------


def solve_lp_box_halfspace(g, a, lambda_max) -> np.ndarray:
    """Maximize g.lam over {0 <= lam <= lambda_max, a.lam >= 0}.

    From the box optimum, the halfspace deficit is closed by the cheapest
    moves first: lowering a coordinate with g > 0, a < 0 costs g_i per unit
    of a_i, raising one with g <= 0, a > 0 costs -g_i. This is a continuous
    knapsack, so ratio order is exact.
    """
    g = np.asarray(g, dtype=float)
    a = np.asarray(a, dtype=float)
    u = np.asarray(lambda_max, dtype=float)
    lam = np.where(g > 0, u, 0.0)
    deficit = -float(a @ lam)
    if deficit <= 0:
        return lam

    cand = np.flatnonzero(((g > 0) & (a < 0) | (g <= 0) & (a > 0)) & (u > 0))
    ratio = np.abs(g[cand]) / np.abs(a[cand])
    for i in cand[np.argsort(ratio, kind="stable")]:
        gain = abs(a[i]) * u[i]
        if gain < deficit:
            lam[i] = 0.0 if a[i] < 0 else u[i]
            deficit -= gain
            continue
        # partial move; solve for the coordinate that makes a.lam = 0
        rest = float(a @ lam) - a[i] * lam[i]
        lam[i] = min(max(-rest / a[i], 0.0), u[i])
        return lam
    return lam


# -- general networks -----------------------------------------------------------


def _general_forms(model: NetworkModel, theta: float, gamma_hat: float):
    cv = coefficient_vectors(model)
    ps_scale = gamma_hat ** (-model.delta) * sinc_norm(model.delta)
    ase_scale = ps_scale * math.log2(1.0 + gamma_hat)
    return cv, ps_scale, ase_scale, ps_scale * cv.c - theta * cv.d


def numerator(cv, lam) -> float:
    return float(cv.c1 @ lam) * float(cv.c2 @ lam)


def numerator_grad(cv, lam) -> np.ndarray:
    """Gradient of (c1.lam)(c2.lam)."""
    return cv.c1 * float(cv.c2 @ lam) + cv.c2 * float(cv.c1 @ lam)


def _line_search(cv, t, lo, hi) -> np.ndarray:
    """Best point of N(lam) - t d.lam on the segment [lo, hi] (exact, it is quadratic)."""
    h = hi - lo
    quad = float(cv.c1 @ h) * float(cv.c2 @ h)
    lin = float(numerator_grad(cv, lo) @ h) - t * float(cv.d @ h)
    cands = [0.0, 1.0]
    if quad < 0:
        cands.append(min(max(-lin / (2 * quad), 0.0), 1.0))
    vals = [lin * s + quad * s * s for s in cands]
    return lo + cands[int(np.argmax(vals))] * h


def _dinkelbach_scp(cv, a, lam_max, lam0, t_eps, max_iters):
    lam_n = lam0.copy()
    dl = float(cv.d @ lam_n)
    t = numerator(cv, lam_n) / dl if dl > 0 else 0.0
    ts, residuals, scp_steps = [], [], []
    converged = False
    feasible_n = False
    lam_star = lam_n
    total = 0
    while total < max_iters:
        steps = 0
        while total < max_iters:
            total += 1
            steps += 1
            g = numerator_grad(cv, lam_n) - t * cv.d
            lam_star = solve_lp_box_halfspace(g, a, lam_max)
            if feasible_n:
                phi = lambda x: numerator(cv, x) - t * float(cv.d @ x)  # noqa: E731
                if phi(lam_star) < phi(lam_n):
                    lam_star = _line_search(cv, t, lam_n, lam_star)
            norm_n = float(np.linalg.norm(lam_n))
            diff = float(np.linalg.norm(lam_star - lam_n))
            rel = diff / norm_n if norm_n > 0 else diff
            lam_n, feasible_n = lam_star, True
            if rel < t_eps:
                break
        scp_steps.append(steps)
        resid = numerator(cv, lam_star) - t * float(cv.d @ lam_star)
        ts.append(t)
        residuals.append(resid)
        if resid < t_eps:
            converged = True
            break
        dl = float(cv.d @ lam_star)
        t = numerator(cv, lam_star) / dl if dl > 0 else 0.0
    return lam_star, converged, {"t": ts, "residual": residuals, "scp_steps": scp_steps}


def optimize_general(
    model: NetworkModel,
    theta: float,
    gamma_hat: float,
    restarts: int = 20,
    epsilon: float = 1e-6,
    max_iters: int = 500,
    seed: int = 0,
    rescore_exact: bool = True,
) -> OptimizationResult:
    """Locally optimal densities for a general network via Dinkelbach + SCP.

    Reliability uses the high-threshold form. Initial points are uniform on
    the density box, drawn from ``seed``; the best feasible restart wins
    (ties to the lowest restart index).
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    ok, best_ps = feasibility(model, theta, gamma_hat, "asymptotic")
    if not ok:
        raise InfeasibleError(theta, best_ps)
    cv, ps_scale, ase_scale, a = _general_forms(model, theta, gamma_hat)
    lam_max = model.lambda_max
    rng = np.random.default_rng(seed)

    best = None
    runs = []
    for r in range(restarts):
        lam0 = rng.uniform(0.0, lam_max)
        lam, conv, tr = _dinkelbach_scp(cv, a, lam_max, lam0, epsilon, max_iters)
        dl = float(cv.d @ lam)
        obj = numerator(cv, lam) / dl if dl > 0 else 0.0
        ps_val = ps_scale * float(cv.c @ lam) / dl if dl > 0 else 0.0
        feas = dl > 0 and ps_val >= theta - FEAS_TOL
        runs.append({"init": lam0, "lambda": lam, "objective": obj, "converged": conv, "feasible": feas, **tr})
        if feas and (best is None or obj > runs[best]["objective"]):
            best = r

    if best is None:
        return OptimizationResult(
            lambda_opt=np.array([]), ase=0.0, ps=0.0, feasible=False, converged=False,
            trace={"seed": seed, "runs": runs}, restarts=restarts, best_restart=-1, method="general",
        )
    run = runs[best]
    lam = run["lambda"]
    dl = float(cv.d @ lam)
    result = OptimizationResult(
        lambda_opt=lam,
        ase=ase_scale * run["objective"],
        ps=ps_scale * float(cv.c @ lam) / dl,
        feasible=True,
        converged=run["converged"],
        trace={"seed": seed, "runs": runs},
        restarts=restarts,
        best_restart=best,
        method="general",
    )
    if rescore_exact:
        result.ps_exact = ps_exact(model.with_densities(lam), gamma_hat)
    return result


# -- brute force ----------------------------------------------------------------


def grid_search_oracle(
    model: NetworkModel,
    theta: float,
    gamma_hat: float,
    resolution: int = 100,
    objective: Literal["asymptotic", "usdma"] = "asymptotic",
) -> OptimizationResult:
    """Best feasible point of a uniform grid over the density box.

    ``objective="asymptotic"`` scores the high-threshold ASE and reliability;
    ``"usdma"`` scores the exact U-SDMA forms, for checking ``optimize_usdma``.
    """
    K = model.K
    if K > 4:
        raise ValueError(f"grid search is limited to K <= 4 tiers, got {K}")
    if resolution < 50:
        raise ValueError("resolution must be at least 50 points per axis")

    if objective == "asymptotic":
        cv, ps_scale, ase_scale, _ = _general_forms(model, theta, gamma_hat)
        num_c, den_d = ps_scale * cv.c, cv.d

        def score(L):
            return ase_scale * (L @ cv.c1) * (L @ cv.c2) / (L @ cv.d)
    elif objective == "usdma":
        pk = usdma_tier_ps(model, gamma_hat)
        w = (model.power / float(model.users[0])) ** model.delta
        num_c, den_d = w * pk, w
        coef = float(model.users[0]) * math.log2(1.0 + gamma_hat) * pk

        def score(L):
            return L @ coef
    else:
        raise ValueError(f"unknown objective {objective!r}")

    axes = [np.linspace(0.0, u, resolution) for u in model.lambda_max]
    rest = np.stack(np.meshgrid(*axes[1:], indexing="ij"), axis=-1).reshape(-1, K - 1) if K > 1 else np.zeros((1, 0))
    best_val, best_lam = -np.inf, None
    for x0 in axes[0]:
        L = np.column_stack([np.full(len(rest), x0), rest])
        den = L @ den_d
        ok = den > 0
        with np.errstate(invalid="ignore", divide="ignore"):
            ps = np.where(ok, (L @ num_c) / den, -np.inf)
        ok &= ps >= theta - 1e-12
        if not np.any(ok):
            continue
        vals = np.where(ok, score(np.where(ok[:, None], L, 1.0)), -np.inf)
        i = int(np.argmax(vals))
        if vals[i] > best_val:
            best_val, best_lam = float(vals[i]), L[i].copy()

    if best_lam is None:
        return OptimizationResult(np.array([]), 0.0, 0.0, False, method=f"grid-{objective}",
                                  trace={"resolution": resolution})
    ps_val = float((best_lam @ num_c) / (best_lam @ den_d))
    return OptimizationResult(best_lam, best_val, ps_val, True, method=f"grid-{objective}",
                              trace={"resolution": resolution})
