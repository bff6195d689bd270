import math

import numpy as np
import pytest
from statsmodels.stats.proportion import proportion_confint

from randomflight.distributions import Constant, Exponential, LogNormal, TwoPoint, UniformInterval
from randomflight.errors import UsageError
from randomflight.geometry import TriangleSides, triangle_event_probability
from randomflight.montecarlo import (
    DOMINANCE_EXPERIMENT,
    FARTHER_EXPERIMENT,
    RETURN_EXPERIMENT,
    ComparisonSpec,
    Draw,
    ProportionEstimate,
    Walk,
    WalkSpec,
    estimate_dominance_probability,
    estimate_farther_probability,
    estimate_return_probability,
    farther_substreams,
    sample_source,
    shard_bounds,
    simulate_walk_distance,
    trial_stream,
    walk_distances_batch,
    wilson_interval,
)
from randomflight.streams import RandomStream, StreamSeed, child_keys

MILLION = 10**6
SEED = StreamSeed(20261017)


def grid_fraction(predicate, points=2_000_000):
    """Midpoint-grid fraction of relative angles in [0, 2*pi) satisfying ``predicate``."""
    theta = (np.arange(points) + 0.5) * (2 * math.pi / points)
    return float(np.mean(predicate(theta)))


# ---------------------------------------------------------------- wilson


def test_wilson_reference_value():
    low, high = wilson_interval(500, 1000, 0.95)
    ref_low, ref_high = proportion_confint(500, 1000, alpha=0.05, method="wilson")
    assert (low, high) == pytest.approx((ref_low, ref_high), abs=1e-12)
    assert (round(low, 3), round(high, 3)) == (0.469, 0.531)


@pytest.mark.parametrize(
    "k,n,level",
    [(0, 10, 0.95), (10, 10, 0.95), (1, 3, 0.999), (333, 1000, 0.999), (7, 10**6, 0.9)],
)
def test_wilson_matches_statsmodels(k, n, level):
    ref = proportion_confint(k, n, alpha=1 - level, method="wilson")
    assert wilson_interval(k, n, level) == pytest.approx(ref, abs=1e-12)


def test_wilson_edges():
    assert wilson_interval(0, 50, 0.99)[0] == 0.0
    assert wilson_interval(50, 50, 0.99)[1] == 1.0


@pytest.mark.parametrize("args", [(-1, 10, 0.9), (11, 10, 0.9), (1, 0, 0.9), (1, 10, 1.0), (1, 10, 0.0)])
def test_wilson_rejects_bad_input(args):
    with pytest.raises(ValueError):
        wilson_interval(*args)


def check_estimate_invariants(est: ProportionEstimate):
    assert 0 <= est.successes <= est.trials
    assert 0.0 <= est.ci_low <= est.p_hat <= est.ci_high <= 1.0
    assert est.p_hat == est.successes / est.trials


# ---------------------------------------------------------------- walks


def test_walk_spec_examples():
    stream = RandomStream(1)
    assert simulate_walk_distance(WalkSpec(0, Exponential(1.0)), stream) == 0.0
    assert all(simulate_walk_distance(WalkSpec(1, Constant(1.0)), stream) == 1.0 for _ in range(100))
    with pytest.raises(UsageError):
        WalkSpec(-1, Constant(1.0))


def test_sample_source_examples():
    stream = RandomStream(2)
    assert sample_source(Draw(Constant(2.0)), stream) == 2.0
    assert sample_source(Walk(WalkSpec(1, Constant(1.0))), stream) == 1.0
    assert sample_source(Walk(WalkSpec(0, Constant(1.0))), stream) == 0.0


@pytest.mark.parametrize(
    "spec",
    [
        WalkSpec(0, Constant(1.0)),
        WalkSpec(1, Exponential(1.0)),
        WalkSpec(3, Constant(1.0)),
        WalkSpec(4, LogNormal(0.0, 0.5)),
        WalkSpec(5, TwoPoint(1.0, 3.0, 0.25)),
    ],
    ids=str,
)
def test_batch_walks_match_scalar_walks(spec):
    seed = StreamSeed(77)
    keys = child_keys(seed.key, np.arange(300, dtype=np.uint64))
    batch = walk_distances_batch(spec, keys)
    scalar = [simulate_walk_distance(spec, RandomStream.from_seed(seed.child(t))) for t in range(300)]
    np.testing.assert_allclose(batch, scalar, rtol=0, atol=1e-12)


def test_two_step_return_grid_oracle():
    # 2|cos(theta/2)| < 1 on a fine grid of relative angles
    assert grid_fraction(lambda t: 2 * np.abs(np.cos(t / 2)) < 1) == pytest.approx(1 / 3, abs=1e-6)


def test_two_step_walk_rayleigh():
    est = estimate_return_probability(WalkSpec(2, Constant(1.0)), 1.0, MILLION, SEED)
    check_estimate_invariants(est)
    assert est.contains(1 / 3)


def test_three_step_return():
    est = estimate_return_probability(WalkSpec(3, Constant(1.0)), 1.0, MILLION, SEED)
    assert est.contains(1 / 4)


def test_single_step_never_strictly_inside_unit_radius():
    est = estimate_return_probability(WalkSpec(1, Constant(1.0)), 1.0, 10_000, SEED)
    assert est.successes == 0 and est.p_hat == 0.0
    assert est.ties == 10_000


def test_return_radius_monotone():
    spec = WalkSpec(4, Exponential(1.0))
    counts = [
        estimate_return_probability(spec, r, 20_000, SEED).successes for r in (0.25, 0.5, 1.0, 1.5, 3.0)
    ]
    assert counts == sorted(counts)


def test_return_rejects_bad_radius():
    with pytest.raises(UsageError):
        estimate_return_probability(WalkSpec(2, Constant(1.0)), 0.0, 10, SEED)


# ---------------------------------------------------------------- two walkers


def test_comparison_spec():
    assert ComparisonSpec(1, 2, Constant(1.0)).theorem_applies
    assert not ComparisonSpec(1, 1, Constant(1.0)).theorem_applies
    assert ComparisonSpec(2, 0, Constant(1.0)).total_steps == 2
    with pytest.raises(UsageError):
        ComparisonSpec(0, 0, Constant(1.0))


def test_one_step_beats_zero_steps():
    est = estimate_farther_probability(ComparisonSpec(1, 0, Constant(1.0)), 5_000, SEED)
    assert est.p_hat == 1.0


def test_farther_one_vs_two_unit_steps():
    est = estimate_farther_probability(ComparisonSpec(1, 2, Constant(1.0)), MILLION, SEED)
    check_estimate_invariants(est)
    assert est.contains(1 / 3)
    assert est.ties == 0


def test_farther_two_vs_two_uniform_steps():
    est = estimate_farther_probability(ComparisonSpec(2, 2, UniformInterval(0.5, 1.5)), MILLION, SEED)
    assert est.contains(1 / 2)


def test_farther_matches_scalar_replay():
    spec = ComparisonSpec(2, 3, Exponential(1.0))
    trials = 2_000
    est = estimate_farther_probability(spec, trials, SEED)
    key_m, key_n = farther_substreams(spec.m, spec.n)
    successes = 0
    for t in range(trials):
        d_m = simulate_walk_distance(WalkSpec(2, spec.dist), trial_stream(SEED, FARTHER_EXPERIMENT, t, key_m))
        d_n = simulate_walk_distance(WalkSpec(3, spec.dist), trial_stream(SEED, FARTHER_EXPERIMENT, t, key_n))
        successes += d_m > d_n
    assert est.successes == successes


def test_return_matches_scalar_replay():
    spec = WalkSpec(3, UniformInterval(0.5, 1.5))
    est = estimate_return_probability(spec, 1.0, 2_000, SEED)
    replay = sum(
        simulate_walk_distance(spec, trial_stream(SEED, RETURN_EXPERIMENT, t, 0)) < 1.0
        for t in range(2_000)
    )
    assert est.successes == replay


@pytest.mark.parametrize("m,n", [(1, 2), (3, 1), (2, 5), (4, 4)])
def test_shard_invariance(m, n):
    spec = ComparisonSpec(m, n, LogNormal(0.0, 0.5))
    results = {
        (e.successes, e.ties, e.trials)
        for e in (estimate_farther_probability(spec, 100_003, SEED, shards=k) for k in (1, 2, 8, 64))
    }
    assert len(results) == 1


def test_shard_bounds_cover_trials():
    assert shard_bounds(10, 3) == [(0, 3), (3, 6), (6, 10)]
    assert shard_bounds(2, 4)[-1] == (0, 2)


@pytest.mark.parametrize("m,n", [(1, 2), (2, 3), (1, 5), (3, 5)])
def test_complement_identity_at_sample_level(m, n):
    dist = Exponential(1.0)
    forward = estimate_farther_probability(ComparisonSpec(m, n, dist), MILLION, SEED)
    backward = estimate_farther_probability(ComparisonSpec(n, m, dist), MILLION, SEED)
    assert forward.ties == backward.ties == 0
    assert forward.successes + backward.successes + forward.ties == MILLION


@pytest.mark.parametrize("m,n", [(1, 2), (2, 3), (3, 3)])
def test_comparison_is_scale_invariant(m, n):
    a = estimate_farther_probability(ComparisonSpec(m, n, Constant(1.0)), 50_000, SEED)
    b = estimate_farther_probability(ComparisonSpec(m, n, Constant(7.3)), 50_000, SEED)
    assert a.successes == b.successes


def test_distinct_seeds_give_distinct_counts():
    spec = ComparisonSpec(2, 3, Constant(1.0))
    a = estimate_farther_probability(spec, 50_000, StreamSeed(1))
    b = estimate_farther_probability(spec, 50_000, StreamSeed(2))
    assert a.successes != b.successes


def test_estimator_argument_checks():
    spec = ComparisonSpec(1, 2, Constant(1.0))
    with pytest.raises(UsageError):
        estimate_farther_probability(spec, 0, SEED)
    with pytest.raises(UsageError):
        estimate_farther_probability(spec, 10, SEED, shards=0)


# ---------------------------------------------------------------- dominance


def unit_draws():
    return [Draw(Constant(1.0)), Draw(Constant(1.0))]


def test_dominance_degenerate():
    est = estimate_dominance_probability(Draw(Constant(2.0)), unit_draws(), MILLION, SEED)
    assert est.contains(1.0)


def test_dominance_equilateral():
    est = estimate_dominance_probability(Draw(Constant(1.0)), unit_draws(), MILLION, SEED)
    assert est.contains(1 / 3)


def test_dominance_right_angle_oracles():
    a = math.sqrt(2)
    exact = triangle_event_probability(TriangleSides(a, 1.0, 1.0))
    # independent grid route: a > |1 + e^{i theta}|
    grid = grid_fraction(lambda t: a > np.sqrt(2 + 2 * np.cos(t)))
    assert exact == pytest.approx(0.5, abs=1e-15)
    assert grid == pytest.approx(0.5, abs=1e-6)
    est = estimate_dominance_probability(Draw(Constant(a)), unit_draws(), MILLION, SEED)
    assert est.contains(0.5)


def test_dominance_single_rest_source():
    est = estimate_dominance_probability(Draw(Constant(2.0)), [Draw(Constant(1.0))], 1_000, SEED)
    assert est.p_hat == 1.0


def test_dominance_matches_scalar_replay():
    lhs = Walk(WalkSpec(2, Constant(1.0)))
    rest = [Draw(Exponential(1.0)), Draw(UniformInterval(0.5, 1.5))]
    est = estimate_dominance_probability(lhs, rest, 2_000, SEED)
    successes = 0
    for t in range(2_000):
        left = sample_source(lhs, trial_stream(SEED, DOMINANCE_EXPERIMENT, t, 0))
        lengths = [sample_source(s, trial_stream(SEED, DOMINANCE_EXPERIMENT, t, i + 1)) for i, s in enumerate(rest)]
        directions = trial_stream(SEED, DOMINANCE_EXPERIMENT, t, len(rest) + 1)
        x = y = 0.0
        for length in lengths:
            theta = directions.next_angle()
            x += length * math.cos(theta)
            y += length * math.sin(theta)
        successes += left > math.hypot(x, y)
    assert est.successes == successes


def test_dominance_needs_rest():
    with pytest.raises(UsageError):
        estimate_dominance_probability(Draw(Constant(1.0)), [], 10, SEED)
