"""Buyer satisfaction, satisfaction-driven discount factors and alliance aggregates."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .quality import QualityVector
from .shapley import UtilityMatrix

# accuracy, completeness, consistency, timeliness, utility
SATISFACTION_WEIGHTS = (0.27, 0.10, 0.16, 0.05, 0.42)


class SatisfactionError(ValueError):
    pass


class DiscountBoundError(SatisfactionError):
    """Platform-adjusted discount factor reached 1; bargaining is undefined."""

    def __init__(self, value: float):
        super().__init__(f"platform-adjusted discount {value:.6g} >= 1")
        self.value = value


@dataclass(frozen=True)
class SatisfactionScore:
    buyer_id: str
    seller_id: str
    value: float


@dataclass(frozen=True)
class DiscountParams:
    k: float = 10.0
    midpoint: float = 0.0
    eta: float = 0.0

    def __post_init__(self):
        if self.k <= 0:
            raise SatisfactionError(f"logistic steepness k must be positive, got {self.k}")
        if not 0.0 <= self.eta < 1.0:
            raise SatisfactionError(f"disclosure eta must lie in [0, 1), got {self.eta}")


@dataclass(frozen=True)
class AllianceView:
    seller_id: str
    delta_b: float
    delta_eta_b: float
    r_b: float
    members: tuple[str, ...] = ()


def buyer_satisfaction(xi: float, q: QualityVector, w5=SATISFACTION_WEIGHTS,
                       buyer_id: str = "", seller_id: str = "") -> SatisfactionScore:
    """Weighted blend of utility and the four quality scores; zero utility gives zero."""
    if not 0.0 <= xi <= 1.0:
        raise SatisfactionError(f"utility must lie in [0, 1], got {xi}")
    w = np.asarray(w5, dtype=float)
    if w.shape != (5,) or np.any(w < 0) or not math.isclose(w.sum(), 1.0, abs_tol=1e-9):
        raise SatisfactionError(f"need 5 nonnegative weights summing to 1, got {list(w5)}")
    if xi == 0:
        return SatisfactionScore(buyer_id, seller_id, 0.0)
    value = float(w[:4] @ q.scores + w[4] * xi)
    return SatisfactionScore(buyer_id, seller_id, value)


def logistic_discount(satisfaction: SatisfactionScore | float, p: DiscountParams = DiscountParams()) -> float:
    i = satisfaction.value if isinstance(satisfaction, SatisfactionScore) else float(satisfaction)
    x = p.k * (i - p.midpoint)
    # 1 - 1/(1+exp(-x)) == 1/(1+exp(x)), written to avoid overflow either way
    if x >= 0:
        e = math.exp(-x)
        return e / (1.0 + e)
    return 1.0 / (1.0 + math.exp(x))


def alliance_discount(deltas: Sequence[float], budgets: Sequence[float]) -> float:
    """Budget-share weighted mean of member discount factors."""
    if len(deltas) != len(budgets):
        raise SatisfactionError("deltas and budgets must align")
    u = np.asarray(budgets, dtype=float)
    if np.any(u < 0) or u.sum() <= 0:
        raise SatisfactionError("budgets must be nonnegative with a positive total")
    return float(np.asarray(deltas, dtype=float) @ (u / u.sum()))


def platform_adjust(delta_b: float, eta: float, strict: bool = True) -> float:
    if not 0.0 <= eta < 1.0:
        raise SatisfactionError(f"disclosure eta must lie in [0, 1), got {eta}")
    value = (1.0 + eta) * delta_b
    if strict and value >= 1.0:
        raise DiscountBoundError(value)
    return value


def alliance_budget(xi: UtilityMatrix, budgets: Sequence[float], seller_id: str) -> float:
    """Sum of buyers' budgets weighted by their (row-normalized) utility for the seller."""
    if not xi.normalized:
        raise SatisfactionError("alliance budget needs a row-normalized utility matrix")
    return float(xi.column(seller_id) @ np.asarray(budgets, dtype=float))
