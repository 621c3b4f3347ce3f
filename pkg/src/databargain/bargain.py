"""Alternating-offers bargaining between one seller and a buyer alliance.

The seller offers at odd stages, the alliance counters at even stages.  The
alliance is unsure whether the seller is a high-price type (prior ``p1``,
posterior ``p2``); a low-price seller would settle at ``(1 + alpha) * r_s``.
Stationarity (the seller's stage-1 and stage-3 offers coincide) yields the
closed-form equilibrium price in :func:`equilibrium_price`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace


class BargainError(ValueError):
    pass


class FixedPointError(ArithmeticError):
    def __init__(self, message: str, last: float):
        super().__init__(f"{message} (last iterate {last!r})")
        self.last = last


@dataclass(frozen=True)
class BargainParams:
    r_s: float
    r_b: float
    delta_s: float
    delta_eta_b: float
    p1: float = 0.9
    p2: float = 0.45
    alpha: float = 0.0
    tau: float = 0.0

    def __post_init__(self):
        if self.r_s < 0 or self.r_b < 0:
            raise BargainError(f"reserve and budget must be nonnegative (r_s={self.r_s}, r_b={self.r_b})")
        if not 0.0 <= self.delta_s <= 1.0:
            raise BargainError(f"delta_s must lie in [0, 1], got {self.delta_s}")
        if not 0.0 <= self.delta_eta_b < 1.0:
            raise BargainError(f"delta_eta_b must lie in [0, 1), got {self.delta_eta_b}")
        if not 0.0 < self.p2 <= self.p1 <= 1.0:
            raise BargainError(f"need 0 < p2 <= p1 <= 1, got p1={self.p1}, p2={self.p2}")
        if self.alpha < 0:
            raise BargainError(f"alpha must be nonnegative, got {self.alpha}")
        if not 0.0 <= self.tau < 1.0:
            raise BargainError(f"commission tau must lie in [0, 1), got {self.tau}")

    @property
    def denominator(self) -> float:
        return self.p1 - self.delta_s * self.delta_eta_b

    def with_(self, **changes) -> "BargainParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class StagePayoffs:
    stage: int
    price: float
    is_profit: float
    ib_profit: float


@dataclass(frozen=True)
class EquilibriumResult:
    price: float
    seller_extra: float
    buyer_extra: float
    feasible: bool
    commission: float = 0.0


def _alliance_value(params: BargainParams, p_high: float, price: float) -> float:
    # high-type seller is paid `price`; low-type settles at (1 + alpha) r_s
    low = params.r_b - (1.0 + params.alpha) * params.r_s
    return p_high * (params.r_b - price) + (1.0 - p_high) * low


def stage_payoffs(params: BargainParams, stage: int, offer: float) -> StagePayoffs:
    """Seller margin and alliance payoff if ``offer`` is accepted at ``stage``.

    Stage 3 reuses the posterior ``p2``.
    """
    if stage not in (1, 2, 3):
        raise BargainError(f"stage must be 1, 2 or 3, got {stage}")
    t = stage - 1
    belief = params.p1 if stage == 1 else params.p2
    seller = params.delta_s ** t * (offer - params.r_s)
    buyer = params.delta_eta_b ** t * _alliance_value(params, belief, offer)
    return StagePayoffs(stage, offer, seller, buyer)


def buyer_counteroffer(params: BargainParams, p3_price: float) -> float:
    """Lowest stage-2 counter the seller weakly prefers to waiting for ``p3_price``."""
    return params.r_s + params.delta_s * (p3_price - params.r_s)


def _check_denominator(params: BargainParams) -> None:
    if params.denominator <= 0:
        raise BargainError(
            f"p1 must exceed delta_s * delta_eta_b ({params.p1} <= "
            f"{params.delta_s} * {params.delta_eta_b})")


def equilibrium_price(params: BargainParams) -> EquilibriumResult:
    """Closed-form stationary price; infeasible prices are flagged, not clipped."""
    _check_denominator(params)
    p, d = params, params.delta_eta_b
    coef = p.alpha * (p.p1 - 1.0) + d * (1.0 - p.alpha * (p.p2 - 1.0)) - 1.0
    price = p.r_s + ((1.0 - d) * p.r_b + coef * p.r_s) / p.denominator
    commission = p.tau * price
    feasible = p.r_s <= price <= p.r_b
    return EquilibriumResult(price, price - commission - p.r_s, p.r_b - price, feasible, commission)


def fixed_point_oracle(params: BargainParams, tol: float = 1e-14, max_iter: int = 1_000_000,
                       continuation: str = "derivation") -> float:
    """Solve the stationary price by iterating the alliance indifference condition.

    Starting from an offer P, the alliance's best counter is
    ``buyer_counteroffer(P)``; the next seller offer P' makes the alliance
    indifferent between accepting P' at stage 1 and countering at stage 2.

    ``continuation`` selects the stage-2 alliance value used on the right:

    ``"derivation"``
        ``delta_eta_b * (r_b - P2 - (1 - p2) * alpha * r_s)``, the expression
        whose fixed point is :func:`equilibrium_price`.
    ``"stage"``
        ``stage_payoffs(params, 2, P2).ib_profit``; its fixed point has
        denominator ``p1 - delta_s * delta_eta_b * p2`` and differs from the
        closed form unless ``p2 == 1``.
    """
    _check_denominator(params)
    if continuation not in ("derivation", "stage"):
        raise ValueError(f"unknown continuation {continuation!r}")
    p = params
    low = p.r_b - (1.0 - p.p1) * (1.0 + p.alpha) * p.r_s
    price = p.r_b
    for _ in range(max_iter):
        counter = buyer_counteroffer(p, price)
        if continuation == "stage":
            target = stage_payoffs(p, 2, counter).ib_profit
        else:
            target = p.delta_eta_b * (p.r_b - counter - (1.0 - p.p2) * p.alpha * p.r_s)
        nxt = (low - target) / p.p1
        if not math.isfinite(nxt):
            raise FixedPointError("iteration diverged", nxt)
        if abs(nxt - price) <= tol * max(1.0, abs(nxt)):
            return nxt
        price = nxt
    raise FixedPointError(f"no convergence within {max_iter} iterations", price)


def classical_rubinstein_shares(delta_a: float, delta_b: float) -> tuple[float, float]:
    """Complete-information split of a unit surplus, first mover first."""
    if not (0.0 <= delta_a <= 1.0 and 0.0 <= delta_b <= 1.0):
        raise BargainError("discount factors must lie in [0, 1]")
    denom = 1.0 - delta_a * delta_b
    if denom == 0:
        raise BargainError("delta_a * delta_b == 1 has no equilibrium split")
    return (1.0 - delta_b) / denom, delta_a * (1.0 - delta_b) / denom
