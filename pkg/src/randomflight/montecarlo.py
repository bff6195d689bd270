"""Monte Carlo engine for random-flight distances.

Every trial owns a substream keyed by its global trial index under an
experiment key, so counts do not depend on how trials are split into shards.
Within a trial, a walk of ``k`` steps reads outputs ``2j`` (length) and
``2j + 1`` (direction) of its stream for ``j = 0..k-1``.

Two code paths exist: scalar functions operating on a :class:`RandomStream`
(``simulate_walk_distance``, ``sample_source``) and batch kernels evaluating
whole blocks of trials with numpy. They consume the streams identically.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from statistics import NormalDist
from typing import Callable, Sequence, Union

import numpy as np

from .distributions import Constant, StepDistribution, sample_length
from .errors import UsageError
from .geometry import walk_distance
from .streams import (
    RandomStream,
    StreamSeed,
    angles_at,
    child_keys,
    sample_angle,
    uniforms_at,
)

# experiment identifiers appended to the caller's seed path
FARTHER_EXPERIMENT = 0x46
RETURN_EXPERIMENT = 0x52
DOMINANCE_EXPERIMENT = 0x44

DEFAULT_LEVEL = 0.999
CHUNK = 1 << 16


@dataclass(frozen=True)
class WalkSpec:
    steps: int
    dist: StepDistribution

    def __post_init__(self) -> None:
        if self.steps < 0:
            raise UsageError(f"steps must be non-negative, got {self.steps}")


@dataclass(frozen=True)
class Walk:
    """Distance reached by a walk of ``spec.steps`` random-direction steps."""

    spec: WalkSpec

    def __str__(self) -> str:
        return f"walk:{self.spec.steps}:{self.spec.dist}"


@dataclass(frozen=True)
class Draw:
    """A single raw draw from a step distribution."""

    dist: StepDistribution

    def __str__(self) -> str:
        return f"draw:{self.dist}"


DistanceSource = Union[Walk, Draw]


@dataclass(frozen=True)
class ComparisonSpec:
    """Two independent walkers with ``m`` and ``n`` steps drawn from ``dist``."""

    m: int
    n: int
    dist: StepDistribution

    def __post_init__(self) -> None:
        if self.m < 0 or self.n < 0:
            raise UsageError(f"step counts must be non-negative, got m={self.m}, n={self.n}")
        if self.m + self.n < 1:
            raise UsageError("m + n must be at least 1")

    @property
    def total_steps(self) -> int:
        return self.m + self.n

    @property
    def theorem_applies(self) -> bool:
        return self.m + self.n > 2


def wilson_interval(successes: int, trials: int, level: float) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if not 0 <= successes <= trials:
        raise ValueError(f"successes must lie in [0, {trials}], got {successes}")
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must lie in (0, 1), got {level}")
    z = NormalDist().inv_cdf(0.5 + 0.5 * level)
    p = successes / trials
    z2n = z * z / trials
    centre = (p + 0.5 * z2n) / (1.0 + z2n)
    half = z * math.sqrt(p * (1.0 - p) / trials + 0.25 * z2n / trials) / (1.0 + z2n)
    low = 0.0 if successes == 0 else max(0.0, min(p, centre - half))
    high = 1.0 if successes == trials else min(1.0, max(p, centre + half))
    return low, high


@dataclass(frozen=True)
class ProportionEstimate:
    successes: int
    trials: int
    p_hat: float
    ci_low: float
    ci_high: float
    level: float
    seed: StreamSeed
    ties: int = 0

    @classmethod
    def from_counts(
        cls, successes: int, trials: int, level: float, seed: StreamSeed, ties: int = 0
    ) -> ProportionEstimate:
        low, high = wilson_interval(successes, trials, level)
        return cls(successes, trials, successes / trials, low, high, level, seed, ties)

    def contains(self, value: float) -> bool:
        return self.ci_low <= value <= self.ci_high


# ---------------------------------------------------------------------------
# scalar path


def simulate_walk_distance(spec: WalkSpec, stream: RandomStream) -> float:
    lengths = []
    angles = []
    for _ in range(spec.steps):
        lengths.append(sample_length(spec.dist, stream))
        angles.append(sample_angle(stream))
    return walk_distance(lengths, angles)


def sample_source(src: DistanceSource, stream: RandomStream) -> float:
    if isinstance(src, Walk):
        return simulate_walk_distance(src.spec, stream)
    return sample_length(src.dist, stream)


# ---------------------------------------------------------------------------
# batch kernels


def _lengths_batch(dist: StepDistribution, keys: np.ndarray, counter: int) -> np.ndarray:
    if isinstance(dist, Constant):
        # counter-based streams need no advancing, so skip the unused draw
        return np.full(keys.shape, dist.value)
    return dist.ppf(uniforms_at(keys, counter))


def walk_distances_batch(spec: WalkSpec, keys: np.ndarray) -> np.ndarray:
    """Walk distance for every stream key, matching :func:`simulate_walk_distance`."""
    if spec.steps == 0:
        return np.zeros(keys.shape)
    if spec.steps == 1:
        return _lengths_batch(spec.dist, keys, 0)
    x = np.zeros(keys.shape)
    y = np.zeros(keys.shape)
    for j in range(spec.steps):
        lengths = _lengths_batch(spec.dist, keys, 2 * j)
        theta = angles_at(keys, 2 * j + 1)
        x += lengths * np.cos(theta)
        y += lengths * np.sin(theta)
    return np.hypot(x, y)


def source_batch(src: DistanceSource, keys: np.ndarray) -> np.ndarray:
    if isinstance(src, Walk):
        return walk_distances_batch(src.spec, keys)
    return _lengths_batch(src.dist, keys, 0)


def _resultant_batch(lengths: Sequence[np.ndarray], direction_keys: np.ndarray) -> np.ndarray:
    if len(lengths) == 1:
        return lengths[0]
    x = np.zeros(direction_keys.shape)
    y = np.zeros(direction_keys.shape)
    for j, length in enumerate(lengths):
        theta = angles_at(direction_keys, j)
        x += length * np.cos(theta)
        y += length * np.sin(theta)
    return np.hypot(x, y)


# ---------------------------------------------------------------------------
# sharded execution

CountKernel = Callable[[np.ndarray], tuple[int, int]]


def shard_bounds(trials: int, shards: int) -> list[tuple[int, int]]:
    """Contiguous trial blocks; the last shard absorbs the remainder."""
    size = trials // shards
    bounds = [(k * size, (k + 1) * size) for k in range(shards)]
    bounds[-1] = (bounds[-1][0], trials)
    return bounds


def _run_sharded(kernel: CountKernel, trials: int, shards: int) -> tuple[int, int]:
    if trials < 1:
        raise UsageError(f"trials must be >= 1, got {trials}")
    if shards < 1:
        raise UsageError(f"shards must be >= 1, got {shards}")

    def run_block(bounds: tuple[int, int]) -> tuple[int, int]:
        start, stop = bounds
        successes = ties = 0
        for lo in range(start, stop, CHUNK):
            idx = np.arange(lo, min(lo + CHUNK, stop), dtype=np.uint64)
            s, t = kernel(idx)
            successes += s
            ties += t
        return successes, ties

    blocks = shard_bounds(trials, shards)
    workers = min(shards, os.cpu_count() or 1)
    if workers == 1:
        results = [run_block(b) for b in blocks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_block, blocks))
    return sum(r[0] for r in results), sum(r[1] for r in results)


def _trial_keys(seed: StreamSeed, experiment: int, idx: np.ndarray) -> np.ndarray:
    return child_keys(seed.child(experiment).key, idx)


def trial_stream(seed: StreamSeed, experiment: int, trial: int, sub: int) -> RandomStream:
    """Scalar view of substream ``sub`` of one trial, as used by the batch kernels."""
    return RandomStream.from_seed(seed.child(experiment).child(trial).child(sub))


def farther_substreams(m: int, n: int) -> tuple[int, int]:
    """Substream keys of the m-walker and the n-walker.

    The shorter walk always takes key 0, so (m, n) and (n, m) replay the same
    pair of walks under one seed.
    """
    return (0, 1) if m <= n else (1, 0)


# ---------------------------------------------------------------------------
# estimators


def estimate_farther_probability(
    spec: ComparisonSpec,
    trials: int,
    seed: StreamSeed,
    shards: int = 1,
    level: float = DEFAULT_LEVEL,
) -> ProportionEstimate:
    """Estimate Pr(D_m > D_n) for independent walks; ties count as failures."""
    walk_m = WalkSpec(spec.m, spec.dist)
    walk_n = WalkSpec(spec.n, spec.dist)
    key_m, key_n = farther_substreams(spec.m, spec.n)

    def kernel(idx: np.ndarray) -> tuple[int, int]:
        keys = _trial_keys(seed, FARTHER_EXPERIMENT, idx)
        d_m = walk_distances_batch(walk_m, child_keys(keys, key_m))
        d_n = walk_distances_batch(walk_n, child_keys(keys, key_n))
        return int(np.count_nonzero(d_m > d_n)), int(np.count_nonzero(d_m == d_n))

    successes, ties = _run_sharded(kernel, trials, shards)
    return ProportionEstimate.from_counts(successes, trials, level, seed, ties)


def estimate_return_probability(
    spec: WalkSpec,
    radius: float,
    trials: int,
    seed: StreamSeed,
    shards: int = 1,
    level: float = DEFAULT_LEVEL,
) -> ProportionEstimate:
    """Estimate Pr(walk distance < radius)."""
    if not (math.isfinite(radius) and radius > 0):
        raise UsageError(f"radius must be positive, got {radius!r}")

    def kernel(idx: np.ndarray) -> tuple[int, int]:
        keys = child_keys(_trial_keys(seed, RETURN_EXPERIMENT, idx), 0)
        d = walk_distances_batch(spec, keys)
        return int(np.count_nonzero(d < radius)), int(np.count_nonzero(d == radius))

    successes, ties = _run_sharded(kernel, trials, shards)
    return ProportionEstimate.from_counts(successes, trials, level, seed, ties)


def estimate_dominance_probability(
    lhs: DistanceSource,
    rest: Sequence[DistanceSource],
    trials: int,
    seed: StreamSeed,
    shards: int = 1,
    level: float = DEFAULT_LEVEL,
) -> ProportionEstimate:
    """Estimate Pr(lhs > resultant of ``rest`` taken as random-direction steps).

    Per trial, ``lhs`` reads substream 0, ``rest[i]`` reads substream ``i + 1``
    and the step directions are outputs ``0..len(rest)-1`` of substream
    ``len(rest) + 1``.
    """
    rest = list(rest)
    if not rest:
        raise UsageError("rest must contain at least one source")

    def kernel(idx: np.ndarray) -> tuple[int, int]:
        keys = _trial_keys(seed, DOMINANCE_EXPERIMENT, idx)
        left = source_batch(lhs, child_keys(keys, 0))
        lengths = [source_batch(src, child_keys(keys, i + 1)) for i, src in enumerate(rest)]
        right = _resultant_batch(lengths, child_keys(keys, len(rest) + 1))
        return int(np.count_nonzero(left > right)), int(np.count_nonzero(left == right))

    successes, ties = _run_sharded(kernel, trials, shards)
    return ProportionEstimate.from_counts(successes, trials, level, seed, ties)


def default_shards() -> int:
    return max(1, min(os.cpu_count() or 1, 64))
