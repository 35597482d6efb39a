"""Network description: per-tier parameters, validation, association
probabilities and the density-free coefficient vectors."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Mapping, Sequence

import numpy as np

from .specfun import gamma_ratio


class ConfigError(ValueError):
    """Invalid network description."""


class DegenerateNetworkError(ConfigError):
    """Every tier has zero density."""

    def __init__(self, msg: str = "degenerate network: all tier densities are zero"):
        super().__init__(msg)


@dataclass(frozen=True)
class TierConfig:
    """One tier of base stations.

    Densities are BSs per km^2; power in watts. ``lambda_max`` is the
    deployed density and caps any optimized density.
    """

    lam: float
    power: float
    bias: float
    antennas: int
    users: int
    lambda_max: float | None = None

    def __post_init__(self):
        if self.lambda_max is None:
            object.__setattr__(self, "lambda_max", float(self.lam))
        if not (isinstance(self.antennas, (int, np.integer)) and self.antennas >= 1):
            raise ConfigError(f"antennas must be an integer >= 1, got {self.antennas!r}")
        if not (isinstance(self.users, (int, np.integer)) and self.users >= 1):
            raise ConfigError(f"users must be an integer >= 1, got {self.users!r}")
        if self.users > self.antennas:
            raise ConfigError(
                f"users ({self.users}) must not exceed antennas ({self.antennas}) for zero-forcing"
            )
        if not self.power > 0:
            raise ConfigError(f"power must be positive, got {self.power!r}")
        if not self.bias > 0:
            raise ConfigError(f"bias must be positive, got {self.bias!r}")
        if not (math.isfinite(self.lam) and self.lam >= 0):
            raise ConfigError(f"density must be finite and >= 0, got {self.lam!r}")
        if not self.lam <= self.lambda_max:
            raise ConfigError(
                f"density {self.lam} exceeds the deployed density lambda_max={self.lambda_max}"
            )

    @property
    def dof(self) -> int:
        """Serving-link diversity order D = M - U + 1."""
        return self.antennas - self.users + 1


@dataclass(frozen=True)
class NetworkModel:
    tiers: tuple[TierConfig, ...]
    alpha: float
    delta: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "tiers", tuple(self.tiers))
        if not self.tiers:
            raise ConfigError("at least one tier is required")
        if not (math.isfinite(self.alpha) and self.alpha > 2):
            raise ConfigError(f"alpha must exceed 2, got {self.alpha!r}")
        object.__setattr__(self, "delta", 2.0 / self.alpha)

    @property
    def K(self) -> int:
        return len(self.tiers)

    @property
    def lam(self) -> np.ndarray:
        return np.array([t.lam for t in self.tiers], dtype=float)

    @property
    def lambda_max(self) -> np.ndarray:
        return np.array([t.lambda_max for t in self.tiers], dtype=float)

    @property
    def power(self) -> np.ndarray:
        return np.array([t.power for t in self.tiers], dtype=float)

    @property
    def bias(self) -> np.ndarray:
        return np.array([t.bias for t in self.tiers], dtype=float)

    @property
    def antennas(self) -> np.ndarray:
        return np.array([t.antennas for t in self.tiers], dtype=int)

    @property
    def users(self) -> np.ndarray:
        return np.array([t.users for t in self.tiers], dtype=int)

    @property
    def dof(self) -> np.ndarray:
        return np.array([t.dof for t in self.tiers], dtype=int)

    @property
    def weights(self) -> np.ndarray:
        """Per-tier association weight (P_k B_k)^delta, density excluded."""
        return (self.power * self.bias) ** self.delta

    @property
    def A(self) -> float:
        """Normalizer sum_j lambda_j (P_j B_j)^delta."""
        return float(self.lam @ self.weights)

    def is_degenerate(self) -> bool:
        return not np.any(self.lam > 0)

    def is_usdma(self) -> bool:
        """Unbiased U-SDMA: all tiers serve the same number of users and share one bias.

        A bias common to every tier cancels out of association and SIR, so
        it is treated as unbiased.
        """
        return len(set(self.users.tolist())) == 1 and len(set(self.bias.tolist())) == 1

    def with_densities(self, lam: Sequence[float]) -> "NetworkModel":
        """Copy with new active densities; deployed ceilings are kept unless exceeded."""
        lam = np.asarray(lam, dtype=float)
        if lam.shape != (self.K,):
            raise ValueError(f"expected {self.K} densities, got shape {lam.shape}")
        tiers = tuple(
            replace(t, lam=float(x), lambda_max=max(float(t.lambda_max), float(x)))
            for t, x in zip(self.tiers, lam)
        )
        return NetworkModel(tiers, self.alpha)

    def with_alpha(self, alpha: float) -> "NetworkModel":
        return NetworkModel(self.tiers, alpha)

    def only_tier(self, k: int, lam: float | None = None) -> "NetworkModel":
        """Model with every tier except ``k`` switched off."""
        x = np.zeros(self.K)
        x[k] = self.tiers[k].lambda_max if lam is None else lam
        return self.with_densities(x)


def validate(raw: Mapping[str, Any]) -> NetworkModel:
    """Build a NetworkModel from a parsed configuration mapping.

    Expected keys: ``alpha`` and ``tiers``, each tier holding
    ``lambda_per_km2``, ``power_w``, ``bias``, ``antennas``, ``users`` and
    optionally ``lambda_max_per_km2``. ``bias`` may be the string ``"1/U"``.
    Errors carry the offending field path.
    """
    if not isinstance(raw, Mapping):
        raise ConfigError("configuration must be a JSON object")
    if "alpha" not in raw:
        raise ConfigError("missing field 'alpha'")
    try:
        alpha = float(raw["alpha"])
    except (TypeError, ValueError):
        raise ConfigError(f"alpha: expected a number, got {raw['alpha']!r}") from None
    if not alpha > 2:
        raise ConfigError(f"alpha must exceed 2, got {alpha!r}")
    tiers_raw = raw.get("tiers")
    if not isinstance(tiers_raw, Sequence) or isinstance(tiers_raw, (str, bytes)) or not tiers_raw:
        raise ConfigError("tiers: expected a non-empty array")

    tiers = []
    for i, t in enumerate(tiers_raw):
        where = f"tiers[{i}]"
        if not isinstance(t, Mapping):
            raise ConfigError(f"{where}: expected an object")
        for key in ("lambda_per_km2", "power_w", "antennas", "users"):
            if key not in t:
                raise ConfigError(f"{where}: missing field '{key}'")
        try:
            users = _as_int(t["users"], f"{where}.users")
            antennas = _as_int(t["antennas"], f"{where}.antennas")
            bias = t.get("bias", 1.0)
            if isinstance(bias, str):
                if bias.replace(" ", "") != "1/U":
                    raise ConfigError(f"{where}.bias: only the string '1/U' is accepted, got {bias!r}")
                bias = 1.0 / users
            lam = float(t["lambda_per_km2"])
            lam_max = t.get("lambda_max_per_km2")
            tiers.append(
                TierConfig(
                    lam=lam,
                    power=float(t["power_w"]),
                    bias=float(bias),
                    antennas=antennas,
                    users=users,
                    lambda_max=None if lam_max is None else float(lam_max),
                )
            )
        except ConfigError as exc:
            msg = str(exc)
            raise ConfigError(msg if msg.startswith(where) else f"{where}: {msg}") from None
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{where}: {exc}") from None

    model = NetworkModel(tuple(tiers), alpha)
    if model.is_degenerate():
        raise DegenerateNetworkError()
    return model


def _as_int(v: Any, where: str) -> int:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or int(v) != v:
        raise ConfigError(f"{where}: expected an integer, got {v!r}")
    return int(v)


def to_config(model: NetworkModel) -> dict:
    """Inverse of :func:`validate` (bias written numerically)."""
    return {
        "alpha": model.alpha,
        "tiers": [
            {
                "lambda_per_km2": t.lam,
                "lambda_max_per_km2": t.lambda_max,
                "power_w": t.power,
                "bias": t.bias,
                "antennas": t.antennas,
                "users": t.users,
            }
            for t in model.tiers
        ],
    }


def association_probabilities(model: NetworkModel) -> np.ndarray:
    """Probability that the typical user associates with each tier."""
    if model.is_degenerate():
        raise DegenerateNetworkError()
    w = model.lam * model.weights
    return w / w.sum()


@dataclass(frozen=True)
class CoefficientVectors:
    """Density-free vectors of the asymptotic reliability and ASE forms.

    ``c`` and ``d`` give p_s ~ gamma^-delta sinc(delta) (c.lam)/(d.lam);
    ``c1`` and ``c2`` give ASE ~ (...) (c1.lam)(c2.lam)/(d.lam).
    """

    c: np.ndarray
    d: np.ndarray
    c1: np.ndarray
    c2: np.ndarray

    @property
    def ratio(self) -> np.ndarray:
        return self.c / self.d


def coefficient_vectors(model: NetworkModel) -> CoefficientVectors:
    delta = model.delta
    P, B, U, D = model.power, model.bias, model.users, model.dof
    gd = np.array([gamma_ratio(float(x), delta) for x in D])
    gu = np.array([gamma_ratio(float(x), delta) for x in U])
    per_user = (P / U) ** delta
    return CoefficientVectors(
        c=per_user * gd,
        d=per_user * gu,
        c1=(P * B) ** delta,
        c2=U ** (1.0 - delta) * B ** (-delta) * gd,
    )
