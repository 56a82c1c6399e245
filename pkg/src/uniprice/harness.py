"""Experiment orchestration: seeded replications of the learning loop,
regret traces, CSV and SVG emission.

A run is fully determined by (config, seed): every replication derives its
own counter-based random streams from the pair, so results are identical
regardless of how replications are scheduled across workers.
"""

from __future__ import annotations

import enum
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .adversaries import AdversarySpec, next_bids
from .auction_core import (
    BidProfile,
    PricingRule,
    Valuation,
    apply_tie_offset,
    clear_auction,
    utility_sum,
)
from .errors import ConfigError
from .feedback import make_feedback
from .learner import (
    FeedbackMode,
    allwinner_signal,
    bandit_signal,
    default_parameters,
    init_state,
    marginals,
    sample_path,
    update_weights,
)
from .oracle import best_fixed_total
from .pseudo_space import build_graph, firing_set


class TieMode(enum.Enum):
    VALIDATE = "validate"
    PERTURB = "perturb"


class PlotScale(enum.Enum):
    LINEAR = "linear"
    LOGLOG = "loglog"


@dataclass(frozen=True)
class RunConfig:
    """Everything a reproducible experiment needs."""

    k: int
    horizon: int
    feedback: FeedbackMode
    values: tuple[float, ...]
    adversary: AdversarySpec
    seed: int
    pricing: PricingRule = PricingRule.LAB
    replications: int = 1
    epsilon: Optional[float] = None
    eta: Optional[float] = None
    tie_mode: TieMode = TieMode.VALIDATE
    param_form: str = "default"
    workers: int = 1
    out: Optional[str] = None
    plot: Optional[str] = None
    scale: PlotScale = PlotScale.LINEAR


@dataclass
class RegretTrace:
    """Per-round record of one replication."""

    run: int
    realized_utility: np.ndarray
    expected_utility: np.ndarray
    cum_expected_regret: np.ndarray
    discretization_bound: np.ndarray
    price: np.ndarray
    allocation: np.ndarray
    final_regret: float
    wall_clock: float
    epsilon: float
    eta: float


def validate_config(config: RunConfig) -> None:
    if config.k < 1:
        raise ConfigError("need at least one item")
    if config.horizon < 1:
        raise ConfigError("horizon must be at least 1")
    if config.replications < 1:
        raise ConfigError("need at least one replication")
    if config.workers < 1:
        raise ConfigError("need at least one worker")
    if len(config.values) != config.k:
        raise ConfigError(f"expected {config.k} values, got {len(config.values)}")
    if any(not (0.0 <= v <= 1.0) for v in config.values):
        raise ConfigError("values must lie in [0, 1]")
    if config.pricing is not PricingRule.LAB:
        raise ConfigError(
            "learning runs require LAB pricing; FRB is supported for "
            "single clearings only"
        )
    if config.epsilon is not None:
        m = round(1.0 / config.epsilon)
        if m < 1 or abs(m * config.epsilon - 1.0) > 1e-9:
            raise ConfigError("epsilon must be the inverse of a positive integer")
    if config.eta is not None and config.eta <= 0:
        raise ConfigError("eta must be positive")
    if config.adversary.k != config.k:
        raise ConfigError("adversary spec is for a different number of items")


def resolve_parameters(config: RunConfig) -> tuple[float, float]:
    """Fill (epsilon, eta) from the feedback model's defaults, honoring
    explicit overrides."""
    epsilon, eta = config.epsilon, config.eta
    if epsilon is None or eta is None:
        eps_def, eta_def = default_parameters(
            config.k, config.horizon, config.feedback, config.param_form
        )
        epsilon = eps_def if epsilon is None else epsilon
        eta = eta_def if eta is None else eta
    return epsilon, eta


def _run_replication(config: RunConfig, rep: int) -> RegretTrace:
    t_start = time.perf_counter()
    root = np.random.SeedSequence(entropy=config.seed, spawn_key=(rep,))
    seed_learn, seed_adv, seed_tie = root.spawn(3)
    rng_learn = np.random.Generator(np.random.Philox(seed_learn))
    rng_adv = np.random.Generator(np.random.Philox(seed_adv))
    rng_tie = np.random.Generator(np.random.Philox(seed_tie))

    epsilon, eta = resolve_parameters(config)
    m = round(1.0 / epsilon)
    graph = build_graph(config.k, m)
    state = init_state(graph)
    values = Valuation(config.values)
    horizon = config.horizon
    perturb = config.tie_mode is TieMode.PERTURB
    offset = float(rng_tie.uniform(0.0, epsilon / 100.0)) if perturb else 0.0

    node_totals = np.zeros(graph.n_nodes)
    realized = np.empty(horizon)
    expected = np.empty(horizon)
    cum_regret = np.empty(horizon)
    disc_bound = np.empty(horizon)
    prices = np.empty(horizon)
    allocations = np.empty(horizon, dtype=int)
    cum_expected = 0.0

    for t in range(1, horizon + 1):
        beta_market = next_bids(
            config.adversary, t, rng_adv, epsilon, require_off_grid=not perturb
        )
        if perturb:
            beta_node = BidProfile(
                tuple(b - offset for b in beta_market.bids), grid_flag=False
            )
        else:
            beta_node = beta_market

        path = sample_path(state, rng_learn)
        grid_bids = BidProfile(
            tuple(float(graph.levels[n.j]) for n in path if n.is_bid), grid_flag=True
        )
        if perturb:
            market_bids = apply_tie_offset(grid_bids, offset, epsilon)
            outcome_market = clear_auction(
                market_bids, beta_market, config.pricing, values
            )
            outcome_node = clear_auction(grid_bids, beta_node, config.pricing, values)
        else:
            outcome_market = clear_auction(
                grid_bids, beta_market, config.pricing, values
            )
            outcome_node = outcome_market

        # exact expected utility and comparator totals, in market terms
        marg = marginals(state)
        fs = firing_set(beta_node, graph)
        exp_market = 0.0
        for node, price in fs:
            w_market = utility_sum(values.values, node.k_floor, price + offset)
            i = graph.node_id(node)
            exp_market += float(marg[i]) * w_market
            node_totals[i] += w_market
        cum_expected += exp_market

        fb = make_feedback(config.feedback, outcome_node, beta_node)
        if config.feedback is FeedbackMode.FULL_INFORMATION:
            # same values full_info_signal would compute; reuses the scan
            signal = {
                node: utility_sum(values.values, node.k_floor, price)
                for node, price in fs
            }
        elif config.feedback is FeedbackMode.BANDIT:
            signal = bandit_signal(path, fb, state, values)
        else:
            signal = allwinner_signal(fb, state, values)
        update_weights(state, signal, eta)

        comparator_total = best_fixed_total(node_totals, graph)
        idx = t - 1
        realized[idx] = outcome_market.utility
        expected[idx] = exp_market
        cum_regret[idx] = comparator_total - cum_expected
        disc_bound[idx] = config.k * t * epsilon
        prices[idx] = outcome_market.price
        allocations[idx] = outcome_market.allocation

    return RegretTrace(
        run=rep,
        realized_utility=realized,
        expected_utility=expected,
        cum_expected_regret=cum_regret,
        discretization_bound=disc_bound,
        price=prices,
        allocation=allocations,
        final_regret=float(cum_regret[-1]),
        wall_clock=time.perf_counter() - t_start,
        epsilon=epsilon,
        eta=eta,
    )


def run_experiment(config: RunConfig) -> list[RegretTrace]:
    """Run every replication and return traces ordered by replication index.

    Replications are independent given (seed, index), so worker count and
    scheduling cannot change any output byte.
    """
    validate_config(config)
    reps = range(config.replications)
    if config.workers > 1 and config.replications > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            traces = list(pool.map(_run_replication, [config] * config.replications, reps))
    else:
        traces = [_run_replication(config, rep) for rep in reps]
    traces.sort(key=lambda tr: tr.run)
    return traces


# --- output ---------------------------------------------------------------

CSV_HEADER = (
    "run,t,realized_utility,expected_utility,cum_expected_regret,"
    "discretization_bound,price,allocation"
)


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def csv_bytes(traces: Sequence[RegretTrace]) -> bytes:
    if not traces:
        raise ValueError("no traces to write")
    lines = [CSV_HEADER]
    for tr in traces:
        for i in range(len(tr.realized_utility)):
            lines.append(
                f"{tr.run},{i + 1},{_fmt(tr.realized_utility[i])},"
                f"{_fmt(tr.expected_utility[i])},{_fmt(tr.cum_expected_regret[i])},"
                f"{_fmt(tr.discretization_bound[i])},{_fmt(tr.price[i])},"
                f"{int(tr.allocation[i])}"
            )
    return ("\n".join(lines) + "\n").encode("ascii")


def write_csv(traces: Sequence[RegretTrace], path: str) -> None:
    """One row per (replication, round); identical traces give identical bytes."""
    data = csv_bytes(traces)
    with open(path, "wb") as fh:
        fh.write(data)


def fit_loglog_slope(ts: np.ndarray, ys: np.ndarray) -> float:
    """Least-squares slope of log y against log t over the positive points."""
    mask = (ts > 0) & (ys > 0)
    if mask.sum() < 2:
        raise ValueError("need at least two positive points for a slope fit")
    return float(np.polyfit(np.log(ts[mask]), np.log(ys[mask]), 1)[0])


def _nice_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    ticks = []
    v = first
    while v <= hi + 1e-12 * step:
        ticks.append(v)
        v += step
    return ticks


def svg_bytes(traces: Sequence[RegretTrace], scale: PlotScale = PlotScale.LINEAR) -> bytes:
    """Static self-contained SVG: mean cumulative regret with a min-max band
    across replications; log-log mode annotates the fitted slope."""
    if not traces:
        raise ValueError("no traces to plot")
    horizon = len(traces[0].cum_expected_regret)
    stack = np.vstack([tr.cum_expected_regret for tr in traces])
    mean = stack.mean(axis=0)
    lo_band = stack.min(axis=0)
    hi_band = stack.max(axis=0)
    ts = np.arange(1, horizon + 1, dtype=float)

    slope_text = ""
    if scale is PlotScale.LOGLOG:
        slope = fit_loglog_slope(ts, mean)
        slope_text = f"fitted slope: {slope:.3f}"
        mask = mean > 0
        ts_plot = np.log10(ts[mask])
        mean_p = np.log10(mean[mask])
        lo_p = np.log10(np.maximum(lo_band[mask], 1e-300))
        hi_p = np.log10(np.maximum(hi_band[mask], 1e-300))
        x_label, y_label = "log10 t", "log10 cumulative regret"
    else:
        ts_plot, mean_p, lo_p, hi_p = ts, mean, lo_band, hi_band
        x_label, y_label = "t", "cumulative regret"
    if ts_plot.size == 0:
        raise ValueError("nothing to plot on a log scale")

    width, height = 720.0, 480.0
    ml, mr, mt, mb = 70.0, 20.0, 30.0, 50.0
    x0, x1 = float(ts_plot[0]), float(ts_plot[-1])
    y0 = float(min(lo_p.min(), 0.0 if scale is PlotScale.LINEAR else lo_p.min()))
    y1 = float(hi_p.max())
    if y1 <= y0:
        y1 = y0 + 1.0
    if x1 <= x0:
        x1 = x0 + 1.0

    def sx(x: float) -> float:
        return ml + (x - x0) / (x1 - x0) * (width - ml - mr)

    def sy(y: float) -> float:
        return height - mb - (y - y0) / (y1 - y0) * (height - mt - mb)

    def poly(xs, ys) -> str:
        return " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))

    band = (
        poly(ts_plot, hi_p)
        + " "
        + " ".join(
            f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(ts_plot[::-1], lo_p[::-1])
        )
    )
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" '
        f'height="{height:.0f}" viewBox="0 0 {width:.0f} {height:.0f}">',
        f'<rect width="{width:.0f}" height="{height:.0f}" fill="white"/>',
        f'<polygon points="{band}" fill="#9ecae1" fill-opacity="0.45" stroke="none"/>',
        f'<polyline points="{poly(ts_plot, mean_p)}" fill="none" '
        'stroke="#08519c" stroke-width="1.8"/>',
    ]
    axis = 'stroke="#333" stroke-width="1"'
    parts.append(
        f'<line x1="{ml:.1f}" y1="{height - mb:.1f}" x2="{width - mr:.1f}" '
        f'y2="{height - mb:.1f}" {axis}/>'
    )
    parts.append(
        f'<line x1="{ml:.1f}" y1="{mt:.1f}" x2="{ml:.1f}" y2="{height - mb:.1f}" {axis}/>'
    )
    font = 'font-family="sans-serif" font-size="12"'
    for tx in _nice_ticks(x0, x1):
        px = sx(tx)
        parts.append(
            f'<line x1="{px:.1f}" y1="{height - mb:.1f}" x2="{px:.1f}" '
            f'y2="{height - mb + 5:.1f}" {axis}/>'
        )
        parts.append(
            f'<text x="{px:.1f}" y="{height - mb + 18:.1f}" text-anchor="middle" '
            f"{font}>{tx:.6g}</text>"
        )
    for ty in _nice_ticks(y0, y1):
        py = sy(ty)
        parts.append(
            f'<line x1="{ml - 5:.1f}" y1="{py:.1f}" x2="{ml:.1f}" y2="{py:.1f}" {axis}/>'
        )
        parts.append(
            f'<text x="{ml - 8:.1f}" y="{py + 4:.1f}" text-anchor="end" '
            f"{font}>{ty:.6g}</text>"
        )
    parts.append(
        f'<text x="{(ml + width - mr) / 2:.1f}" y="{height - 10:.1f}" '
        f'text-anchor="middle" {font}>{x_label}</text>'
    )
    parts.append(
        f'<text x="18" y="{(mt + height - mb) / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 18 {(mt + height - mb) / 2:.1f})" {font}>{y_label}</text>'
    )
    if slope_text:
        parts.append(
            f'<text x="{width - mr - 8:.1f}" y="{mt + 16:.1f}" text-anchor="end" '
            f"{font}>{slope_text}</text>"
        )
    parts.append("</svg>")
    return ("\n".join(parts) + "\n").encode("ascii")


def write_svg(
    traces: Sequence[RegretTrace], path: str, scale: PlotScale = PlotScale.LINEAR
) -> None:
    data = svg_bytes(traces, scale)
    with open(path, "wb") as fh:
        fh.write(data)
