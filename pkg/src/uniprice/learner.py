"""Component-based exponential weighting on the bid/bid-gap graph.

One weight per node, updated multiplicatively from per-node utility signals.
Actions are sampled exactly from the induced product distribution with a
weight-pushing pass: a backward accumulator Gamma(h) sums the weight
products of all path suffixes after h, so the walk start / transition
probabilities W(h') Gamma(h') / Gamma(h) reproduce path probabilities
proportional to the product of node weights.  A symmetric forward pass
yields exact node inclusion probabilities, which the partial-feedback
estimators divide by.

Everything runs in the log domain; the raw accumulators overflow after a
few thousand rounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .auction_core import BidProfile, Valuation, grid_level, utility_sum
from .errors import HorizonTooShort, ZeroMarginal, ZeroObservationProbability
from .pseudo_space import (
    _BETA_HIGH,
    PseudoGraph,
    PseudoNode,
    PseudoPath,
    firing_set,
    observed_set_membership,
)


class FeedbackMode(Enum):
    FULL_INFORMATION = "full"
    BANDIT = "bandit"
    ALL_WINNER = "allwinner"


#: Sparse per-node signal fed to the weight update.
EstimateVector = dict


@dataclass
class WeightState:
    """Log-domain node weights plus the backward/forward accumulators."""

    graph: PseudoGraph
    log_w: np.ndarray
    backward: np.ndarray
    forward: np.ndarray
    log_gamma0: float = math.nan
    round: int = 0
    fresh: bool = False


def init_state(graph: PseudoGraph) -> WeightState:
    """All weights start at 1 (log 0)."""
    n = graph.n_nodes
    return WeightState(
        graph=graph,
        log_w=np.zeros(n),
        backward=np.full(n, -np.inf),
        forward=np.full(n, -np.inf),
    )


def _logsumexp(a: np.ndarray) -> float:
    m = float(np.max(a))
    if not math.isfinite(m):
        return m
    return m + math.log(float(np.sum(np.exp(a - m))))


def _chain_lse(mult: np.ndarray, add: np.ndarray) -> np.ndarray:
    """Solve G[0] = add[0], G[i] = logaddexp(mult[i-1] + G[i-1], add[i]).

    Rewritten as a cumulative log-sum-exp so numpy does the scan:
    with P[i] = mult[0] + ... + mult[i-1],
    G[i] = P[i] + LSE_{i' <= i} (add[i'] - P[i']).
    """
    if add.size == 1:
        return add.copy()
    p = np.concatenate(([0.0], np.cumsum(mult)))
    return p + np.logaddexp.accumulate(add - p)


def backward_pass(state: WeightState) -> WeightState:
    """Fill Gamma: suffix weight products.  Gamma = 1 on the last bid row;
    elsewhere Gamma(h) = sum over successors h' of W(h') Gamma(h').

    Bid and gap nodes at the same (k, j) share successors, so one scan per
    k-level fills both rows.
    """
    g = state.graph
    m = g.inv_epsilon
    lw, lg = state.log_w, state.backward
    lg[g.bid_ids(g.k)] = 0.0
    for kk in range(g.k - 1, 0, -1):
        nxt = g.bid_ids(kk + 1)
        c = lw[nxt] + lg[nxt]
        if m == 0:
            g_ext = c
        else:
            gap = g.gap_ids(kk)
            g_ext = _chain_lse(lw[gap], c)
            lg[gap] = g_ext[:m]
        lg[g.bid_ids(kk)] = g_ext
    b1 = g.bid_ids(1)
    state.log_gamma0 = _logsumexp(lw[b1] + lg[b1])
    return state


def forward_pass(state: WeightState) -> WeightState:
    """Fill F: prefix weight products including the node's own weight.
    F(h) = W(h) * sum over predecessors h' of F(h'), seeded on the first
    bid row with F = W."""
    g = state.graph
    m = g.inv_epsilon
    lw, lf = state.log_w, state.forward
    b1 = g.bid_ids(1)
    lf[b1] = lw[b1]
    for kk in range(1, g.k):
        cur = g.bid_ids(kk)
        nxt = g.bid_ids(kk + 1)
        if m == 0:
            lf[nxt] = lw[nxt] + lf[cur]
            continue
        gap = g.gap_ids(kk)
        # gap row, from the top level down:
        # F_gap(j) = W_gap(j) * (F_bid(j+1) + F_gap(j+1))
        a_rev = lw[gap][::-1]
        c_rev = lf[cur][m:0:-1]
        h = _chain_lse(a_rev[1:], a_rev + c_rev)
        lf[gap] = h[::-1]
        out = np.empty(m + 1)
        out[:m] = lw[nxt][:m] + np.logaddexp(lf[cur][:m], lf[gap])
        out[m] = lw[nxt][m] + lf[cur][m]
        lf[nxt] = out
    return state


def ensure_passes(state: WeightState) -> WeightState:
    if not state.fresh:
        backward_pass(state)
        forward_pass(state)
        state.fresh = True
    return state


def marginals(state: WeightState) -> np.ndarray:
    """Inclusion probability of every node under the current distribution:
    P(h in sampled path) = F(h) Gamma(h) / Gamma_0."""
    ensure_passes(state)
    out = np.exp(state.forward + state.backward - state.log_gamma0)
    return np.clip(out, 0.0, 1.0)


def node_marginal(state: WeightState, node: PseudoNode) -> float:
    ensure_passes(state)
    g = state.graph
    i = g.node_id(node)
    v = math.exp(state.forward[i] + state.backward[i] - state.log_gamma0)
    return min(max(v, 0.0), 1.0)


def sample_path(state: WeightState, rng: np.random.Generator) -> PseudoPath:
    """Draw one action with probability (prod of its node weights) / Gamma_0.

    Walks the graph sampling each next node with probability
    W(h') Gamma(h') / Gamma(h); level-0 nodes have a single successor and
    consume no randomness.  Bid and gap nodes at the same (k, j) share both
    successors and Gamma, so the walk only tracks (stage, level).
    """
    ensure_passes(state)
    g = state.graph
    lw, lg = state.log_w, state.backward
    b1 = g.bid_ids(1)
    probs = np.exp(lw[b1] + lg[b1] - state.log_gamma0)
    u = rng.random()
    acc = 0.0
    j = g.inv_epsilon
    for jj, pr in enumerate(probs):
        acc += pr
        if u < acc:
            j = jj
            break
    path = [PseudoNode(2, j)]
    for kk in range(1, g.k):
        bid_off = g._bid_offset[kk]
        gap_off = g._gap_offset[kk]
        while j > 0:
            gi = gap_off + j - 1
            p_gap = math.exp(lw[gi] + lg[gi] - lg[bid_off + j])
            if rng.random() >= p_gap:
                break
            j -= 1
            path.append(PseudoNode(2 * kk + 1, j))
        path.append(PseudoNode(2 * (kk + 1), j))
    return tuple(path)


def path_log_probability(state: WeightState, path: PseudoPath) -> float:
    """Log probability of ``path`` under the sampler, as the explicit product
    of its start and transition conditionals."""
    ensure_passes(state)
    g = state.graph
    lw, lg = state.log_w, state.backward
    i0 = g.node_id(path[0])
    total = lw[i0] + lg[i0] - state.log_gamma0
    for prev, node in zip(path, path[1:]):
        i, ip = g.node_id(node), g.node_id(prev)
        total += lw[i] + lg[i] - lg[ip]
    return float(total)


def update_weights(state: WeightState, signal: EstimateVector, eta: float) -> WeightState:
    """Multiply each signalled node's weight by exp(eta * signal)."""
    if eta <= 0:
        raise ValueError("eta must be positive")
    g = state.graph
    for node, v in signal.items():
        state.log_w[g.node_id(node)] += eta * v
    state.round += 1
    state.fresh = False
    return state


# --- feedback signals ---------------------------------------------------


def full_info_signal(
    adversary: BidProfile, values: Valuation, graph: PseudoGraph
) -> EstimateVector:
    """True sub-utility of every firing node; all other entries are zero
    and omitted."""
    return {
        node: utility_sum(values.values, node.k_floor, price)
        for node, price in firing_set(adversary, graph)
    }


def fired_node_from_feedback(
    bids: BidProfile, allocation: int, price: float, graph: PseudoGraph
) -> Optional[PseudoNode]:
    """Identify the played action's firing node from (allocation, price)
    alone: a price equal to the learner's own allocation-th bid is a bid
    node, any other price lands in the gap band below the next grid point."""
    if allocation == 0:
        return None
    if price == bids.bids[allocation - 1]:
        j = grid_level(price, graph.epsilon)
        if j is not None:
            return PseudoNode(2 * allocation, j)
    return PseudoNode(2 * allocation + 1, math.floor(price * graph.inv_epsilon))


def bandit_signal(
    played: PseudoPath,
    feedback,
    state: WeightState,
    values: Valuation,
    fired: Optional[PseudoNode] = None,
) -> EstimateVector:
    """Single-entry estimate at the fired node: (w - K) / P(node played).

    ``feedback`` needs only ``allocation`` and ``price``.  The constant -K
    shift keeps every entry non-positive, which controls the estimator's
    range; the bias is the same for all actions and cancels in the regret.
    Empty when the action won nothing.
    """
    x = feedback.allocation
    if x == 0:
        return {}
    g = state.graph
    if fired is None:
        own = BidProfile(
            tuple(float(g.levels[n.j]) for n in played if n.is_bid), grid_flag=True
        )
        fired = fired_node_from_feedback(own, x, feedback.price, g)
    w = utility_sum(values.values, x, feedback.price)
    p_node = node_marginal(state, fired)
    if p_node <= 0.0:
        raise ZeroMarginal(f"played node {fired} has zero inclusion probability")
    return {fired: (w - g.k) / p_node}


def _observable_firing(feedback, graph: PseudoGraph):
    """All firing nodes whose indicator and price the all-winner feedback
    pins down, i.e. those in the observed set A(outcome).

    The feedback reveals the adversary's K - x winning bids and implies the
    rest sit below the price, which decides the firing indicator for every
    node with k > x, and for k = x at levels at or above the price.
    """
    k, m = graph.k, max(graph.inv_epsilon, 1)
    x, p = feedback.allocation, feedback.price
    top = feedback.adversary_winning_bids

    def beta_rev(i: int) -> float:
        return _BETA_HIGH if i <= 0 else top[i - 1]

    out: list[tuple[PseudoNode, float]] = []
    for kk in range(max(x, 1), k + 1):
        hi = beta_rev(k - kk)
        if kk > x:
            lo = beta_rev(k - kk + 1)
        else:
            lo = None  # beta_{K-x+1} <= p is below every admissible level
        for j in range(m + 1):
            level = j / m
            if kk == x and level < p:
                continue
            fires = (hi > level > lo) if lo is not None else hi > level
            if fires:
                out.append((PseudoNode(2 * kk, j), level))
        if x <= kk < k:
            beta_val = beta_rev(k - kk)
            j = math.floor(beta_val * m)
            if 0 <= j < m and j / m < beta_val < (j + 1) / m:
                out.append((PseudoNode(2 * kk + 1, j), beta_val))
    return out


def _exclusion_rank(node: PseudoNode, price: float) -> float:
    """Composite key ordering outcome classes: allocation first, price next.

    A firing node h is observable under outcome class o iff
    rank(o) <= rank(h); prices never reach 2, so 2x + p is lexicographic.
    """
    if node.is_bid:
        return 2.0 * node.k_floor + price
    return 2.0 * node.k_floor + 1.5  # any price beats a gap of lower k


def allwinner_signal(
    feedback, state: WeightState, values: Valuation
) -> EstimateVector:
    """Estimates at every observable firing node: (w - K) / P(observable).

    The observation probability is one minus the mass of sampled actions
    whose outcome would hide the node - exactly the outcome classes ranked
    above it, all of which the feedback also makes evaluable.
    """
    g = state.graph
    observable = _observable_firing(feedback, g)
    if not observable:
        return {}
    marg = marginals(state)
    ranks = np.array([_exclusion_rank(n, pr) for n, pr in observable])
    mass = marg[[g.node_id(n) for n, _ in observable]]
    order = np.argsort(ranks, kind="stable")
    sorted_ranks = ranks[order]
    suffix = np.concatenate((np.cumsum(mass[order][::-1])[::-1], [0.0]))
    out: EstimateVector = {}
    for (node, price), r in zip(observable, ranks):
        # mass of firing nodes ranked strictly above this one
        idx = int(np.searchsorted(sorted_ranks, r, side="right"))
        q = 1.0 - float(suffix[idx])
        if q <= 0.0:
            raise ZeroObservationProbability(
                f"node {node} has zero observation probability"
            )
        w = utility_sum(values.values, node.k_floor, price)
        out[node] = (w - g.k) / q
    return out


@dataclass(frozen=True)
class _ClassOutcome:
    allocation: int
    price: float


def observation_probability(
    node: PseudoNode, state: WeightState, adversary: BidProfile
) -> float:
    """P over the sampled action that ``node`` lands in the observed set.

    Partitions on the outcome class: each firing node is an outcome with
    probability equal to its inclusion marginal, and zero allocation (which
    reveals everything) takes the remaining mass.  Membership is evaluated
    directly per class; meant for oracles and tests, since it reads the raw
    adversary profile.
    """
    g = state.graph
    eps = g.epsilon
    marg = marginals(state)
    total = 0.0
    fired_mass = 0.0
    for o, price in firing_set(adversary, g):
        p_o = float(marg[g.node_id(o)])
        fired_mass += p_o
        if observed_set_membership(node, _ClassOutcome(o.k_floor, price), eps):
            total += p_o
    total += max(0.0, 1.0 - fired_mass)  # zero allocation reveals all bids
    return min(total, 1.0)


# --- expected utility and parameters -------------------------------------


def expected_utility(
    state: WeightState, adversary: BidProfile, values: Valuation
) -> float:
    """Exact one-round expected utility of the current distribution:
    sum over firing nodes of marginal * sub-utility."""
    g = state.graph
    marg = marginals(state)
    total = 0.0
    for node, price in firing_set(adversary, g):
        total += float(marg[g.node_id(node)]) * utility_sum(
            values.values, node.k_floor, price
        )
    return total


def default_parameters(
    k: int, t: int, mode: FeedbackMode, form: str = "default"
) -> tuple[float, float]:
    """Grid step and learning rate prescribed for each feedback model.

    Bandit: eps = (K/T)^(1/3), eta = K^(-1/3) T^(-2/3) sqrt(log(T/K)/3).
    Full information: eps = sqrt(K/T), eta = sqrt(log(T/K) / (2KT)).
    All-winner: eps = sqrt(K^3/T), eta = 1/(K sqrt(T)).

    1/eps is rounded up to the nearest integer (with a snap tolerance so
    exact analytic values survive float noise).  ``form="grid"`` recomputes
    eta from the realized grid step instead of the closed forms in K and T
    alone.
    """
    if t <= k:
        raise HorizonTooShort(f"horizon {t} must exceed the number of items {k}")
    if mode is FeedbackMode.BANDIT:
        m_raw = (t / k) ** (1.0 / 3.0)
    elif mode is FeedbackMode.FULL_INFORMATION:
        m_raw = math.sqrt(t / k)
    else:
        m_raw = math.sqrt(t / k**3)
    m = max(1, math.ceil(m_raw - 1e-9))
    epsilon = 1.0 / m

    if form == "default":
        if mode is FeedbackMode.BANDIT:
            eta = k ** (-1.0 / 3.0) * t ** (-2.0 / 3.0) * math.sqrt(math.log(t / k) / 3.0)
        elif mode is FeedbackMode.FULL_INFORMATION:
            eta = math.sqrt(math.log(t / k) / (2.0 * k * t))
        else:
            eta = 1.0 / (k * math.sqrt(t))
    elif form == "grid":
        if mode is FeedbackMode.BANDIT:
            eta = math.sqrt(epsilon * math.log(m) / (k * t)) if m > 1 else 1.0 / math.sqrt(k * t)
        elif mode is FeedbackMode.FULL_INFORMATION:
            eta = math.sqrt(math.log(m) / (k * t)) if m > 1 else math.sqrt(1.0 / (k * t))
        else:
            eta = 1.0 / (k * math.sqrt(t))
    else:
        raise ValueError(f"unknown parameter form {form!r}")
    return epsilon, eta
