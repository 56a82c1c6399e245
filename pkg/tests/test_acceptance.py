"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines as they complete.
"""

import itertools
import math
import time

import numpy as np
import pytest
import scipy.stats

from uniprice import (
    AdversaryKind,
    AdversarySpec,
    BidProfile,
    FeedbackMode,
    PricingRule,
    PseudoNode,
    RunConfig,
    Valuation,
    best_fixed_action_dp,
    best_fixed_action_exhaustive,
    build_graph,
    clear_auction,
    clip_dominated,
    decode,
    encode,
    enumerate_paths,
    exact_estimator_expectation,
    exact_path_distribution,
    exact_second_moment,
    full_info_signal,
    init_state,
    node_fires,
    node_totals_from_history,
    path_log_probability,
    path_utility,
    reduction_consistency_check,
    run_experiment,
    sample_path,
    update_weights,
)
from uniprice.harness import csv_bytes, fit_loglog_slope


def report(num, ok, detail=""):
    print(f"[criterion {num:2d}] {'PASS' if ok else 'FAIL'} {detail}")


def off_grid_profile(rng, k, m):
    while True:
        draws = sorted(rng.uniform(0, 1, k), reverse=True)
        if all(round(b * m) / m != b and 0 < b < 1 for b in draws):
            return BidProfile(tuple(draws))


def all_grid_profiles(k, m):
    return [
        BidProfile(tuple(j / m for j in sorted(combo, reverse=True)), grid_flag=True)
        for combo in itertools.combinations_with_replacement(range(m + 1), k)
    ]


def random_state(graph, rng, scale=1.0):
    s = init_state(graph)
    s.log_w[:] = rng.normal(0.0, scale, graph.n_nodes)
    return s


def test_criterion_1_bijection():
    """decode(encode(b)) is the identity on every grid profile; path counts
    are C(K + 1/eps, K); runtime under 5 s."""
    t0 = time.perf_counter()
    checked = 0
    for k in (1, 2, 3):
        for m in range(1, 7):
            g = build_graph(k, m)
            profiles = all_grid_profiles(k, m)
            assert len(profiles) == math.comb(k + m, k)
            paths = list(enumerate_paths(g))
            assert len(paths) == math.comb(k + m, k)
            for b in profiles:
                assert decode(encode(b, m), m).bids == b.bids
            for path in paths:
                assert encode(decode(path, m), m) == path
            checked += len(profiles)
    elapsed = time.perf_counter() - t0
    ok = elapsed < 5.0
    report(1, ok, f"{checked} profiles across 18 instances in {elapsed:.2f}s")
    assert ok


def test_criterion_2_decomposition():
    """Sum of per-node sub-utilities equals the clearing utility bitwise;
    at most one node per action fires."""
    rng = np.random.default_rng(20240201)
    checked = 0
    for k in (1, 2, 3):
        for m in (2, 4):
            g = build_graph(k, m)
            paths = list(enumerate_paths(g))
            for _ in range(200):
                beta = off_grid_profile(rng, k, m)
                v = Valuation(tuple(rng.uniform(0, 1, k)))
                for path in paths:
                    o = clear_auction(decode(path, m), beta, PricingRule.LAB, v)
                    assert path_utility(path, beta, v, g.epsilon) == o.utility
                    fired = sum(
                        1 for n in path if node_fires(n, beta, g.epsilon)[0]
                    )
                    assert fired <= 1
                    assert (fired == 1) == (o.allocation > 0)
                    checked += 1
    report(2, True, f"{checked} (action, adversary) clearings matched exactly")


def test_criterion_3_sampler_exactness():
    """Sampled frequencies pass a chi-squared test against the exact action
    distribution; conditional path probabilities match enumeration."""
    t0 = time.perf_counter()
    g = build_graph(2, 2)
    beta = BidProfile((0.83, 0.31))
    v = Valuation((1.0, 0.5))

    def uniform():
        return init_state(g)

    def boosted():
        s = init_state(g)
        s.log_w[g.node_id(PseudoNode(2, 1))] = 1.0  # weight e on one start node
        return s

    def updated():
        s = init_state(g)
        update_weights(s, full_info_signal(beta, v, g), 0.8)
        return s

    n_draws = 100_000
    worst_p = 1.0
    worst_gap = 0.0
    for maker, seed in ((uniform, 11), (boosted, 12), (updated, 13)):
        s = maker()
        dist = exact_path_distribution(s)
        paths = list(dist)
        for path in paths:
            gap = abs(math.exp(path_log_probability(s, path)) - dist[path])
            worst_gap = max(worst_gap, gap)
        rng = np.random.Generator(np.random.Philox(seed))
        counts = {path: 0 for path in paths}
        for _ in range(n_draws):
            counts[sample_path(s, rng)] += 1
        observed = np.array([counts[p] for p in paths])
        expected = np.array([dist[p] * n_draws for p in paths])
        stat = scipy.stats.chisquare(observed, expected)
        worst_p = min(worst_p, stat.pvalue)
    elapsed = time.perf_counter() - t0
    ok = worst_p >= 0.01 and worst_gap <= 1e-10 and elapsed < 10.0
    report(
        3,
        ok,
        f"min chi2 p-value {worst_p:.3f}, max prob gap {worst_gap:.1e}, "
        f"{elapsed:.1f}s",
    )
    assert worst_p >= 0.01
    assert worst_gap <= 1e-10
    assert elapsed < 10.0


def _bias_triples(m, count, seed):
    rng = np.random.default_rng(seed)
    g = build_graph(2, m)
    for _ in range(count):
        yield (
            g,
            random_state(g, rng),
            off_grid_profile(rng, 2, m),
            Valuation(tuple(rng.uniform(0, 1, 2))),
        )


def test_criterion_4_estimator_bias():
    """Exact expected estimated utility is u - K for winning comparator
    actions and 0 for zero-allocation ones, in both partial-feedback modes."""
    worst = 0.0
    for m, seed in ((2, 301), (4, 302)):
        for g, s, beta, v in _bias_triples(m, 10, seed):
            for mode in (FeedbackMode.BANDIT, FeedbackMode.ALL_WINNER):
                exp = exact_estimator_expectation(s, beta, v, mode)
                for path, e in exp.items():
                    o = clear_auction(decode(path, m), beta, PricingRule.LAB, v)
                    target = o.utility - 2.0 if o.allocation > 0 else 0.0
                    worst = max(worst, abs(e - target))
    ok = worst <= 1e-9
    report(4, ok, f"max |expectation - target| = {worst:.2e} over 20 triples")
    assert ok


def test_criterion_5_second_moment_bounds():
    """Exact second moments stay under the stated bandit and all-winner
    bounds; the computed values are reported."""
    worst_bandit = worst_aw = 0.0
    for m, seed in ((2, 301), (4, 302)):
        bound_bandit = 4 * 4 * max(4, m)
        bound_aw = 8 * 16 * math.log(2 * m)
        for g, s, beta, v in _bias_triples(m, 10, seed):
            mb = exact_second_moment(s, beta, v, FeedbackMode.BANDIT)
            ma = exact_second_moment(s, beta, v, FeedbackMode.ALL_WINNER)
            assert mb <= bound_bandit
            assert ma <= bound_aw
            worst_bandit = max(worst_bandit, mb)
            worst_aw = max(worst_aw, ma)
    report(
        5,
        True,
        f"max bandit moment {worst_bandit:.2f} (bound 64), "
        f"max all-winner moment {worst_aw:.2f} (bounds {8*16*math.log(4):.1f}/{8*16*math.log(8):.1f})",
    )


def test_criterion_6_best_in_hindsight():
    """Dynamic-programming comparator equals exhaustive search on random
    histories for every small instance."""
    rng = np.random.default_rng(777)
    instances = 0
    for k in (1, 2, 3):
        for m in (1, 2, 3, 4):
            g = build_graph(k, m)
            for _ in range(100):
                history = [off_grid_profile(rng, k, m) for _ in range(50)]
                v = Valuation(tuple(rng.uniform(0, 1, k)))
                ex_path, ex_total = best_fixed_action_exhaustive(history, g, v)
                dp_path, dp_total = best_fixed_action_dp(
                    node_totals_from_history(history, g, v), g
                )
                assert dp_path == ex_path
                assert abs(dp_total - ex_total) <= 1e-9
            instances += 1
    report(6, True, f"{instances} instances x 100 histories, paths identical")


def test_criterion_7_dominance():
    """Value-clipping never decreases utility against any adversary."""
    rng = np.random.default_rng(4242)
    g = build_graph(2, 4)
    profiles = all_grid_profiles(2, 4)
    checked = 0
    for _ in range(200):
        beta = off_grid_profile(rng, 2, 4)
        v = Valuation(tuple(sorted(rng.uniform(0, 1, 2), reverse=True)))
        for b in profiles:
            raw = clear_auction(b, beta, PricingRule.LAB, v).utility
            clipped_profile = clip_dominated(b, v)
            clipped = clear_auction(clipped_profile, beta, PricingRule.LAB, v).utility
            assert clipped >= raw - 1e-12
            checked += 1
    report(7, True, f"{checked} (action, adversary) pairs, clipping never hurt")


def test_criterion_8_lower_bound_reduction():
    """The first-price reduction environment reproduces the single-item
    first-price utility and bandit feedback exactly, for every grid bid."""
    rng = np.random.default_rng(31415)
    checked = 0
    for k in (2, 3):
        v = Valuation((1.0,) + (0.0,) * (k - 1))
        for b1 in (0.25, 0.5, 0.75, 1.0):
            for _ in range(50):
                h = float(rng.uniform(0.005, 0.995))
                if round(h * 4) * 0.25 == h:
                    continue
                utility, feedback = reduction_consistency_check(b1, h, v)
                if b1 > h:
                    assert utility == 1.0 - b1
                    assert feedback == (1, b1)
                else:
                    assert utility == 0.0
                    assert feedback == (0, None)
                checked += 1
    report(8, True, f"{checked} (bid, opposing) pairs matched the formulas exactly")


def test_criterion_9_regret_slopes():
    """Log-log slopes of mean final regret across horizons, per feedback
    model, against the stated windows."""
    t0 = time.perf_counter()
    horizons = [2**e for e in range(9, 14)]
    spec = AdversarySpec(AdversaryKind.IID_UNIFORM, 2)
    slopes = {}
    for mode in (
        FeedbackMode.BANDIT,
        FeedbackMode.FULL_INFORMATION,
        FeedbackMode.ALL_WINNER,
    ):
        finals = []
        for horizon in horizons:
            cfg = RunConfig(
                k=2,
                horizon=horizon,
                feedback=mode,
                values=(1.0, 0.5),
                adversary=spec,
                seed=20240607,
                replications=20,
                workers=4,
            )
            traces = run_experiment(cfg)
            finals.append(float(np.mean([tr.final_regret for tr in traces])))
        slopes[mode] = fit_loglog_slope(np.array(horizons, float), np.array(finals))
    elapsed = time.perf_counter() - t0

    failures = []
    if not 0.50 <= slopes[FeedbackMode.BANDIT] <= 0.80:
        failures.append(f"bandit slope {slopes[FeedbackMode.BANDIT]:.3f} not in [0.50, 0.80]")
    if not 0.35 <= slopes[FeedbackMode.FULL_INFORMATION] <= 0.65:
        failures.append(
            f"full-information slope {slopes[FeedbackMode.FULL_INFORMATION]:.3f} "
            "not in [0.35, 0.65]"
        )
    if not 0.35 <= slopes[FeedbackMode.ALL_WINNER] <= 0.65:
        failures.append(
            f"all-winner slope {slopes[FeedbackMode.ALL_WINNER]:.3f} not in [0.35, 0.65]"
        )
    if not slopes[FeedbackMode.BANDIT] > slopes[FeedbackMode.FULL_INFORMATION]:
        failures.append("bandit slope does not exceed full-information slope")
    detail = (
        f"bandit {slopes[FeedbackMode.BANDIT]:.3f}, "
        f"full {slopes[FeedbackMode.FULL_INFORMATION]:.3f}, "
        f"all-winner {slopes[FeedbackMode.ALL_WINNER]:.3f} ({elapsed/60:.1f} min)"
    )
    report(9, not failures, detail)
    assert elapsed < 600
    assert not failures, "; ".join(failures)


def test_criterion_10_determinism():
    """Identical config and seed give byte-identical CSV, independent of the
    worker count."""
    spec = AdversarySpec(AdversaryKind.IID_UNIFORM, 2)

    def cfg(workers):
        return RunConfig(
            k=2,
            horizon=50,
            feedback=FeedbackMode.BANDIT,
            values=(1.0, 0.5),
            adversary=spec,
            seed=123456789,
            replications=4,
            workers=workers,
        )

    first = csv_bytes(run_experiment(cfg(1)))
    second = csv_bytes(run_experiment(cfg(1)))
    pooled = csv_bytes(run_experiment(cfg(2)))
    ok = first == second == pooled
    report(10, ok, f"{len(first)} CSV bytes identical across reruns and worker counts")
    assert ok
