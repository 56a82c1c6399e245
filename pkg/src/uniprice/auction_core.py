"""Single-shot K-unit uniform-price auction mechanics.

The learner submits a non-increasing profile of K bids, the aggregated
adversary another K.  All 2K bids are pooled; the clearing price is the
K-th highest bid under last-accepted-bid (LAB) pricing or the (K+1)-th
highest under first-rejected-bid (FRB) pricing.  Winners pay the clearing
price for every item they receive.

All functions here are pure and operate on immutable values.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import (
    NotMonotone,
    NotMonotoneResult,
    OffGrid,
    OffsetTooLarge,
    OutOfRange,
    TieDetected,
    WrongLength,
)


class PricingRule(enum.Enum):
    LAB = "lab"
    FRB = "frb"


class PriceSetter(enum.Enum):
    LEARNER_BID = "learner_bid"
    ADVERSARY_BID = "adversary_bid"
    ZERO_WIN = "zero_win"


@dataclass(frozen=True)
class BidProfile:
    """A non-increasing sequence of K bids in [0, 1].

    ``grid_flag`` records whether every bid is an exact multiple of the grid
    step the profile was validated against.
    """

    bids: tuple[float, ...]
    grid_flag: bool = False

    @property
    def k(self) -> int:
        return len(self.bids)


@dataclass(frozen=True)
class Valuation:
    """Marginal value of the k-th item, k = 1..K.  Monotonicity not assumed."""

    values: tuple[float, ...]

    @property
    def k(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class AuctionOutcome:
    """Result of clearing one auction from the learner's point of view."""

    price: float
    allocation: int
    utility: float
    price_setter: PriceSetter


def grid_level(x: float, epsilon: float) -> Optional[int]:
    """Return j such that x is the j-th grid point exactly, else None.

    1/epsilon is an integer everywhere in this package, and grid points are
    canonically the float quotients j / (1/epsilon) - correctly rounded, and
    exactly 0 and 1 at the ends for every grid size - so the check is exact
    float equality against the canonical value.
    """
    m = round(1.0 / epsilon)
    j = round(x * m)
    if j / m == x:
        return j
    return None


def utility_sum(values: Sequence[float], allocation: int, price: float) -> float:
    """Quasi-linear utility of winning ``allocation`` items at ``price``.

    Shared by the clearing and the per-node sub-utilities so that both sides
    run bitwise-identical arithmetic.
    """
    total = 0.0
    for l in range(allocation):
        total += values[l] - price
    return total


def validate_bid_profile(
    bids: Sequence[float],
    k: int,
    *,
    epsilon: Optional[float] = None,
    require_grid: bool = False,
    require_off_grid: bool = False,
) -> BidProfile:
    """Check a raw bid sequence and return an immutable profile.

    ``require_grid`` enforces that every bid is an exact multiple of
    ``epsilon`` (learner contract).  ``require_off_grid`` enforces the
    adversary contract: bids strictly inside (0, 1) and off the grid, which
    is what guarantees tie-free clearings against a grid-playing learner.
    """
    bids = tuple(float(b) for b in bids)
    if len(bids) != k:
        raise WrongLength(f"expected {k} bids, got {len(bids)}")
    for b in bids:
        if not (0.0 <= b <= 1.0):
            raise OutOfRange(f"bid {b} outside [0, 1]")
    for a, b in zip(bids, bids[1:]):
        if a < b:
            raise NotMonotone(f"bids must be non-increasing, got {bids}")

    grid_flag = False
    if require_grid or require_off_grid:
        if epsilon is None:
            raise ValueError("epsilon is required for grid checks")
    if epsilon is not None:
        on_grid = all(grid_level(b, epsilon) is not None for b in bids)
        if require_grid and not on_grid:
            bad = next(b for b in bids if grid_level(b, epsilon) is None)
            raise OffGrid(f"bid {bad} is not a multiple of {epsilon}")
        if require_off_grid:
            for b in bids:
                if not (0.0 < b < 1.0) or grid_level(b, epsilon) is not None:
                    raise TieDetected(
                        f"adversary bid {b} violates the off-grid contract "
                        f"(must lie in (0,1) off the {epsilon}-grid)"
                    )
        grid_flag = on_grid
    return BidProfile(bids, grid_flag)


def clear_auction(
    learner: BidProfile,
    adversary: BidProfile,
    rule: PricingRule,
    values: Valuation,
) -> AuctionOutcome:
    """Clear one K-unit uniform-price auction.

    LAB: price is the K-th highest pooled bid; the learner wins its bids at
    or above the price, capped by the K - (adversary bids above price) items
    actually left.  The cap matters only when the learner holds several bids
    exactly at the price; counting them all would hand out more than K items.

    FRB: price is the (K+1)-th highest pooled bid; the learner wins bids
    strictly above it.

    Raises TieDetected only when a learner/adversary collision makes the
    outcome genuinely ambiguous (contested items at the clearing price, or a
    learner bid sitting at the FRB boundary).
    """
    b, beta = learner.bids, adversary.bids
    kk = len(b)
    if len(beta) != kk:
        raise WrongLength("learner and adversary profiles must have equal length")
    if values.k != kk:
        raise WrongLength("valuation length must match the number of items")

    pooled = sorted(b + beta, reverse=True)
    if rule is PricingRule.LAB:
        price = pooled[kk - 1]
    else:
        price = pooled[kk]

    b_above = sum(1 for x in b if x > price)
    b_at = sum(1 for x in b if x == price)
    a_above = sum(1 for x in beta if x > price)
    a_at = sum(1 for x in beta if x == price)

    if rule is PricingRule.LAB:
        slots_at = kk - b_above - a_above  # items left for bids equal to the price
        if b_at and a_at and b_at + a_at > slots_at:
            raise TieDetected(
                f"learner and adversary both bid {price} with only "
                f"{slots_at} item(s) left at that price"
            )
        if a_at and not b_at:
            allocation = b_above
        else:
            allocation = b_above + min(b_at, slots_at)
    else:
        if pooled[kk - 1] == price and b_at:
            # Learner bids at the boundary price would contend for the items
            # left there; the strict ">" counting rule is ambiguous then.
            raise TieDetected(
                f"learner bid equal to the FRB clearing price {price} "
                "with a collapsed boundary"
            )
        allocation = b_above

    utility = utility_sum(values.values, allocation, price)
    if allocation == 0:
        setter = PriceSetter.ZERO_WIN
    elif any(x == price for x in b):
        setter = PriceSetter.LEARNER_BID
    else:
        setter = PriceSetter.ADVERSARY_BID
    return AuctionOutcome(price, allocation, utility, setter)


def clip_dominated(bids: BidProfile, values: Valuation) -> BidProfile:
    """Clip every bid at its marginal value: b_i -> min(v_i, b_i).

    The clipped profile never earns less than the original against any
    adversary.  If the valuation ordering breaks monotonicity of the result,
    that is reported rather than silently repaired.
    """
    if values.k != bids.k:
        raise WrongLength("valuation length must match the profile")
    clipped = tuple(min(v, b) for v, b in zip(values.values, bids.bids))
    for a, b in zip(clipped, clipped[1:]):
        if a < b:
            raise NotMonotoneResult(
                f"clipping against {values.values} breaks monotonicity: {clipped}"
            )
    if clipped == bids.bids:
        return bids
    return BidProfile(clipped, grid_flag=False)


def apply_tie_offset(bids: BidProfile, offset: float, epsilon: float) -> BidProfile:
    """Shift a grid-aligned profile by a common offset in [0, epsilon).

    Drawing the offset uniformly puts the bids off any fixed adversary
    support almost surely.  Shifted bids are capped at 1, which perturbs the
    top grid point only and by less than the offset itself.
    """
    if not (0.0 <= offset < epsilon):
        raise OffsetTooLarge(f"offset {offset} must lie in [0, {epsilon})")
    for b in bids.bids:
        if grid_level(b, epsilon) is None:
            raise OffGrid(f"bid {b} is not aligned to the {epsilon}-grid")
    if offset == 0.0:
        return bids
    shifted = tuple(min(b + offset, 1.0) for b in bids.bids)
    return BidProfile(shifted, grid_flag=False)
