"""The bid / bid-gap action graph.

A grid bid profile (b_1 >= ... >= b_K, each a multiple of epsilon = 1/M) is
re-encoded as a sequence of binary variables:

* a *bid node* (k, j) states that the k-th bid equals j*epsilon;
* a *gap node* (k+1/2, j) states that b_k >= (j+1)*epsilon and
  b_{k+1} <= j*epsilon, i.e. the open price band (j*eps, (j+1)*eps) lies
  between two consecutive bids.

Listing the active variables in lexicographic order (k increasing, j
decreasing within a run) yields a path in a DAG whose maximal paths are in
bijection with the grid profiles.  Against a fixed off-grid adversary, each
node either "fires" (its price/allocation event is realized whenever the
node is played) or not, independently of the rest of the path; firing nodes
carry the whole utility of any action containing them.

Nodes are stored as (k2, j) with k2 = 2k, so even k2 means a bid node and
odd k2 a gap node.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import numpy as np

from .auction_core import BidProfile, Valuation, grid_level, utility_sum
from .errors import MalformedPath, OffGrid, TooLarge

_BETA_HIGH = 2.0  # sentinel above any bid, stands in for beta_0
_BETA_LOW = -1.0  # sentinel below any bid, stands in for beta_{K+1}


@dataclass(frozen=True)
class PseudoNode:
    """One bid or bid-gap variable; k2 = 2k, j the grid level."""

    k2: int
    j: int

    @property
    def is_bid(self) -> bool:
        return self.k2 % 2 == 0

    @property
    def k_floor(self) -> int:
        """floor(k): the allocation credited when this node fires."""
        return self.k2 // 2

    @property
    def sort_key(self) -> tuple[int, int]:
        """Lexicographic position: k increasing, level decreasing."""
        return (self.k2, -self.j)

    def __repr__(self) -> str:
        if self.is_bid:
            return f"h({self.k2 // 2},{self.j})"
        return f"h({self.k2 // 2}.5,{self.j})"


PseudoPath = tuple[PseudoNode, ...]


class PseudoGraph:
    """DAG over all bid/bid-gap nodes for K items on a 1/M grid.

    Rows alternate bid(1), gap(1.5), bid(2), ..., bid(K) in topological
    order; bid rows hold levels 0..M, gap rows 0..M-1 (a gap needs
    (j+1)*eps <= 1).  Node ids are row-major for flat numpy storage.
    """

    def __init__(self, k: int, inv_epsilon: int):
        if k < 1:
            raise ValueError("need at least one item")
        if inv_epsilon < 0:
            raise ValueError("inv_epsilon must be non-negative")
        self.k = k
        self.inv_epsilon = inv_epsilon
        self.epsilon = 1.0 / inv_epsilon if inv_epsilon > 0 else 1.0
        m = inv_epsilon
        self._bid_offset = {}
        self._gap_offset = {}
        nxt = 0
        for kk in range(1, k + 1):
            self._bid_offset[kk] = nxt
            nxt += m + 1
            if kk < k:
                self._gap_offset[kk] = nxt
                nxt += m
        self.n_nodes = nxt
        self.levels = np.arange(m + 1) / max(m, 1)  # canonical grid prices
        self._bid_ids = {
            kk: np.arange(self._bid_offset[kk], self._bid_offset[kk] + m + 1)
            for kk in range(1, k + 1)
        }
        self._gap_ids = {
            kk: np.arange(self._gap_offset[kk], self._gap_offset[kk] + m)
            for kk in range(1, k)
        }

    # --- node <-> id -----------------------------------------------------

    def node_id(self, node: PseudoNode) -> int:
        if node.is_bid:
            return self._bid_offset[node.k2 // 2] + node.j
        return self._gap_offset[node.k2 // 2] + node.j

    def node_from_id(self, node_id: int) -> PseudoNode:
        for kk in range(1, self.k + 1):
            off = self._bid_offset[kk]
            if off <= node_id <= off + self.inv_epsilon:
                return PseudoNode(2 * kk, node_id - off)
            if kk < self.k:
                off = self._gap_offset[kk]
                if off <= node_id < off + self.inv_epsilon:
                    return PseudoNode(2 * kk + 1, node_id - off)
        raise KeyError(node_id)

    def bid_ids(self, kk: int) -> np.ndarray:
        """Node ids of bid row k, levels 0..M.  Shared array; do not mutate."""
        return self._bid_ids[kk]

    def gap_ids(self, kk: int) -> np.ndarray:
        """Node ids of gap row k+1/2, levels 0..M-1.  Shared array; do not mutate."""
        return self._gap_ids[kk]

    def nodes(self) -> list[PseudoNode]:
        out = []
        m = self.inv_epsilon
        for kk in range(1, self.k + 1):
            out.extend(PseudoNode(2 * kk, j) for j in range(m + 1))
            if kk < self.k:
                out.extend(PseudoNode(2 * kk + 1, j) for j in range(m))
        return out

    def contains(self, node: PseudoNode) -> bool:
        m = self.inv_epsilon
        if node.is_bid:
            return 2 <= node.k2 <= 2 * self.k and 0 <= node.j <= m
        return 3 <= node.k2 <= 2 * self.k - 1 and 0 <= node.j <= m - 1

    # --- graph structure --------------------------------------------------

    def start_nodes(self) -> list[PseudoNode]:
        """Entry nodes h_{1,j}, listed lexicographically (j descending)."""
        return [PseudoNode(2, j) for j in range(self.inv_epsilon, -1, -1)]

    def successors(self, node: PseudoNode) -> tuple[PseudoNode, ...]:
        """Possible next elements of an action after ``node``.

        Bid and gap nodes at the same (k, j) share successors: descend one
        gap level, or place the next bid at the current level.  Level 0 can
        only be followed by the next bid at 0.  Bid nodes at k = K are
        terminal.
        """
        kk = node.k2 // 2
        if node.is_bid and kk == self.k:
            return ()
        if node.j == 0:
            return (PseudoNode(2 * (kk + 1), 0),)
        return (
            PseudoNode(2 * kk + 1, node.j - 1),
            PseudoNode(2 * (kk + 1), node.j),
        )

    def n_paths(self) -> int:
        """|B_eps| = C(M + K, K): non-increasing K-tuples over M+1 levels."""
        return math.comb(self.inv_epsilon + self.k, self.k)


def build_graph(k: int, inv_epsilon: int) -> PseudoGraph:
    """Construct the action graph for K items on a 1/inv_epsilon grid."""
    return PseudoGraph(k, inv_epsilon)


def encode(bids: BidProfile, inv_epsilon: int) -> PseudoPath:
    """Map a grid-aligned profile to its node sequence.

    The path holds bid node (k, b_k/eps) for every k, with the gap nodes for
    every whole grid band lying between consecutive bids.
    """
    epsilon = 1.0 / inv_epsilon if inv_epsilon > 0 else 1.0
    levels = []
    for b in bids.bids:
        j = grid_level(b, epsilon)
        if j is None or not (0 <= j <= inv_epsilon):
            raise OffGrid(f"bid {b} is not on the 1/{inv_epsilon} grid")
        levels.append(j)
    k = len(levels)
    path: list[PseudoNode] = []
    for kk in range(1, k + 1):
        path.append(PseudoNode(2 * kk, levels[kk - 1]))
        if kk < k:
            for j in range(levels[kk - 1] - 1, levels[kk] - 1, -1):
                path.append(PseudoNode(2 * kk + 1, j))
    return tuple(path)


def decode(path: PseudoPath, inv_epsilon: int) -> BidProfile:
    """Map a node sequence back to its grid profile, validating structure."""
    epsilon = 1.0 / inv_epsilon if inv_epsilon > 0 else 1.0
    if not path:
        raise MalformedPath("empty path")
    first = path[0]
    if first.k2 != 2 or not (0 <= first.j <= inv_epsilon):
        raise MalformedPath(f"path must start at a first-bid node, got {first}")
    levels = {}
    prev: Optional[PseudoNode] = None
    k_max = 0
    for node in path:
        if node.j < 0 or node.j > (inv_epsilon if node.is_bid else inv_epsilon - 1):
            raise MalformedPath(f"node {node} outside the level range")
        if prev is not None:
            succs = (
                (PseudoNode(2 * (prev.k2 // 2 + 1), 0),)
                if prev.j == 0
                else (
                    PseudoNode(2 * (prev.k2 // 2) + 1, prev.j - 1),
                    PseudoNode(2 * (prev.k2 // 2 + 1), prev.j),
                )
            )
            if node not in succs:
                raise MalformedPath(f"{node} does not follow {prev}")
        if node.is_bid:
            kk = node.k2 // 2
            if kk in levels:
                raise MalformedPath(f"duplicate bid node for k={kk}")
            levels[kk] = node.j
            k_max = max(k_max, kk)
        prev = node
    if prev is None or not prev.is_bid:
        raise MalformedPath("path must end at a bid node")
    if sorted(levels) != list(range(1, k_max + 1)):
        raise MalformedPath("path must contain one bid node per k")
    bids = tuple(levels[kk] / max(inv_epsilon, 1) for kk in range(1, k_max + 1))
    return BidProfile(bids, grid_flag=True)


def _beta_at(beta: Sequence[float], i: int) -> float:
    """i-th highest adversary bid with the boundary sentinels."""
    if i <= 0:
        return _BETA_HIGH
    if i > len(beta):
        return _BETA_LOW
    return beta[i - 1]


def node_fires(
    node: PseudoNode, adversary: BidProfile, epsilon: float
) -> tuple[bool, Optional[float]]:
    """Decide whether the node's outcome event is realized against ``adversary``.

    Bid node (k, j) fires iff exactly K-k adversary bids exceed j*eps
    (beta_{K-k} > j*eps > beta_{K-k+1}); the price is then the learner's own
    bid j*eps.  Gap node (k+1/2, j) fires iff beta_{K-k} falls inside the
    band (j*eps, (j+1)*eps); the price is that adversary bid, kept exact.
    The indicator is the same for every action containing the node.
    """
    beta = adversary.bids
    kk = len(beta)
    m = node.k2 // 2
    grid = round(1.0 / epsilon)
    if node.is_bid:
        level = node.j / grid
        if _beta_at(beta, kk - m) > level > _beta_at(beta, kk - m + 1):
            return True, level
        return False, None
    p = _beta_at(beta, kk - m)
    if node.j / grid < p < (node.j + 1) / grid:
        return True, p
    return False, None


def sub_utility(
    node: PseudoNode,
    adversary: BidProfile,
    values: Valuation,
    epsilon: float,
) -> float:
    """Utility credited to a single node: zero unless the node fires, in
    which case it is the full utility of winning floor(k) items at the
    node's price."""
    fires, price = node_fires(node, adversary, epsilon)
    if not fires:
        return 0.0
    return utility_sum(values.values, node.k_floor, price)


def path_utility(
    path: PseudoPath,
    adversary: BidProfile,
    values: Valuation,
    epsilon: float,
) -> float:
    """Sum of sub-utilities over the path; equals the LAB clearing utility
    of the decoded profile exactly."""
    total = 0.0
    for node in path:
        total += sub_utility(node, adversary, values, epsilon)
    return total


def firing_node(
    path: PseudoPath, adversary: BidProfile, epsilon: float
) -> Optional[PseudoNode]:
    """The unique node on the path whose event is realized, if any.

    Absent exactly when the decoded action wins nothing.
    """
    for node in path:
        fires, _ = node_fires(node, adversary, epsilon)
        if fires:
            return node
    return None


def observed_set_membership(node: PseudoNode, outcome, epsilon: float) -> bool:
    """Whether all-winner feedback for ``outcome`` reveals enough to evaluate
    the node's sub-utility.

    Membership rule: k > x, or k = x with j*eps >= p.  ``outcome`` needs
    only ``allocation`` and ``price`` attributes.  A zero allocation reveals
    every adversary bid, so everything is observable.
    """
    x = outcome.allocation
    if node.k2 > 2 * x:
        return True
    if node.k2 == 2 * x:
        return node.j / round(1.0 / epsilon) >= outcome.price
    return False


def enumerate_paths(graph: PseudoGraph, cap: int = 10**6) -> Iterator[PseudoPath]:
    """Yield every maximal path exactly once, in lexicographic order.

    Raises TooLarge when the instance holds more than ``cap`` actions.
    """
    total = graph.n_paths()
    if total > cap:
        raise TooLarge(f"{total} paths exceed the cap of {cap}")

    def walk(prefix: list[PseudoNode]) -> Iterator[PseudoPath]:
        succs = graph.successors(prefix[-1])
        if not succs:
            yield tuple(prefix)
            return
        for nxt in succs:
            prefix.append(nxt)
            yield from walk(prefix)
            prefix.pop()

    for start in graph.start_nodes():
        yield from walk([start])


def firing_set(
    adversary: BidProfile, graph: PseudoGraph
) -> list[tuple[PseudoNode, float]]:
    """All nodes that fire against ``adversary``, with their prices.

    There are at most 2(K^2 + M) of them: per allocation k, one grid level
    range of bid nodes plus at most one gap band.
    """
    beta = adversary.bids
    kk = graph.k
    m = graph.inv_epsilon
    levels = graph.levels
    out: list[tuple[PseudoNode, float]] = []
    for k in range(1, kk + 1):
        hi = _beta_at(beta, kk - k)
        lo = _beta_at(beta, kk - k + 1)
        for j in np.nonzero((levels < hi) & (levels > lo))[0]:
            out.append((PseudoNode(2 * k, int(j)), float(levels[j])))
        if k < kk:
            p = _beta_at(beta, kk - k)
            j = math.floor(p * m)
            if 0 <= j < m and j / m < p < (j + 1) / m:
                out.append((PseudoNode(2 * k + 1, j), p))
    return out
