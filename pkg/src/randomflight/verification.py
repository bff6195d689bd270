"""Statistical verification suites and their machine-readable reports.

A statistical check passes when its expected value lies inside the
confidence interval of the estimate. Checks combining several estimates use
conservative interval arithmetic: if every underlying interval covers its
true value, the combined interval covers the combined truth. The union-bound
false-failure budget of a suite is therefore ``(1 - level)`` times the number
of distinct estimates it runs.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import oracles
from .distributions import Constant, Exponential, LogNormal, StepDistribution, TwoPoint, UniformInterval
from .errors import HypothesisError, UsageError
from .montecarlo import (
    DEFAULT_LEVEL,
    ComparisonSpec,
    DistanceSource,
    Draw,
    ProportionEstimate,
    Walk,
    WalkSpec,
    estimate_dominance_probability,
    estimate_farther_probability,
    estimate_return_probability,
)
from .streams import StreamSeed

COLUMNS = (
    "suite",
    "check",
    "m",
    "n",
    "dist",
    "trials",
    "seed",
    "expected",
    "p_hat",
    "ci_low",
    "ci_high",
    "level",
    "ties",
    "passed",
)
FORMATS = ("csv", "jsonl")
SUITE_ALPHA = 0.05

PASS = "pass"
FAIL = "fail"
EXCLUDED = "excluded"

DEFAULT_RAYLEIGH_N = tuple(range(2, 11))
DEFAULT_THEOREM_DISTS: tuple[StepDistribution, ...] = (
    Constant(1.0),
    UniformInterval(0.5, 1.5),
    Exponential(1.0),
    LogNormal(0.0, 0.5),
    TwoPoint(1.0, 3.0, 0.25),
)
DEFAULT_THEOREM_PAIRS = tuple(
    (m, s - m) for s in range(3, 9) for m in range(1, s)
)
DEFAULT_LEMMA_TRIPLES: tuple[tuple[DistanceSource, DistanceSource, DistanceSource], ...] = (
    (Draw(Constant(1.0)), Draw(Constant(1.0)), Draw(Constant(1.0))),
    (Draw(Constant(5.0)), Draw(Constant(1.0)), Draw(Constant(1.0))),
    (Walk(WalkSpec(2, Constant(1.0))), Draw(Exponential(1.0)), Draw(UniformInterval(0.5, 1.5))),
)
DEFAULT_ADDITIVITY_S = (3, 4, 5)
DEFAULT_ADDITIVITY_DISTS: tuple[StepDistribution, ...] = (Constant(1.0), Exponential(1.0))


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    expected: float
    p_hat: float
    ci_low: float
    ci_high: float
    trials: int
    level: float
    seed: str
    status: str
    ties: int = 0
    m: int | None = None
    n: int | None = None
    dist: str = ""
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def row(self) -> dict:
        return {
            "suite": self.suite,
            "check": self.name,
            "m": self.m,
            "n": self.n,
            "dist": self.dist,
            "trials": self.trials,
            "seed": self.seed,
            "expected": None if math.isnan(self.expected) else self.expected,
            "p_hat": self.p_hat,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "level": self.level,
            "ties": self.ties,
            "passed": {PASS: "true", FAIL: "false"}.get(self.status, self.status),
        }


@dataclass
class SuiteReport:
    name: str
    seed: StreamSeed
    checks: list[CheckResult] = field(default_factory=list)
    estimates: int = 0
    level: float = DEFAULT_LEVEL

    @property
    def passed(self) -> int:
        return sum(c.status == PASS for c in self.checks)

    @property
    def failed(self) -> int:
        return sum(c.status == FAIL for c in self.checks)

    @property
    def ok(self) -> bool:
        return self.failed == 0

    @property
    def alpha(self) -> float:
        """Union-bound probability that a correct implementation fails a check."""
        return min(1.0, self.estimates * (1.0 - self.level))


def budget_level(estimates: int, alpha: float = SUITE_ALPHA, base: float = DEFAULT_LEVEL) -> float:
    """Per-estimate level keeping the suite's union bound within ``alpha``.

    Suites with up to ``alpha / (1 - base)`` estimates simply use ``base``.
    """
    return max(base, 1.0 - alpha / max(estimates, 1))


def statistical_check(
    suite: str,
    name: str,
    expected: float,
    est: ProportionEstimate,
    **meta,
) -> CheckResult:
    status = PASS if est.contains(expected) else FAIL
    return CheckResult(
        suite, name, expected, est.p_hat, est.ci_low, est.ci_high, est.trials,
        est.level, str(est.seed), status, est.ties, **meta,
    )


def combined_check(
    suite: str,
    name: str,
    expected: float,
    terms: Sequence[tuple[int, ProportionEstimate]],
    seed: StreamSeed,
    **meta,
) -> CheckResult:
    """Check on a signed sum of estimates using conservative interval arithmetic."""
    p_hat = sum(sign * e.p_hat for sign, e in terms)
    low = sum(sign * (e.ci_low if sign > 0 else e.ci_high) for sign, e in terms)
    high = sum(sign * (e.ci_high if sign > 0 else e.ci_low) for sign, e in terms)
    first = terms[0][1]
    status = PASS if low <= expected <= high else FAIL
    return CheckResult(
        suite, name, expected, p_hat, low, high, first.trials, first.level,
        str(seed), status, sum(e.ties for _, e in terms), **meta,
    )


def run_rayleigh_suite(
    n_values: Iterable[int] = DEFAULT_RAYLEIGH_N,
    trials: int = 1_000_000,
    seed: StreamSeed = StreamSeed(0),
    shards: int = 1,
    level: float | None = None,
) -> SuiteReport:
    """Return-within-one-step probability of unit-step walks against 1/(n+1)."""
    n_values = list(n_values)
    bad = [n for n in n_values if n <= 1]
    if bad:
        raise HypothesisError(f"the unit-step return formula needs n > 1, got {bad}")
    level = budget_level(len(n_values)) if level is None else level
    report = SuiteReport("rayleigh", seed, estimates=len(n_values), level=level)
    dist = Constant(1.0)
    for n in n_values:
        est = estimate_return_probability(
            WalkSpec(n, dist), 1.0, trials, seed.child_named(f"rayleigh/{n}"), shards, level
        )
        report.checks.append(
            statistical_check("rayleigh", f"return[{n}]", oracles.exact_return_probability(n), est,
                         n=n, dist=str(dist))
        )
    return report


def run_theorem_suite(
    pairs: Iterable[tuple[int, int]] = DEFAULT_THEOREM_PAIRS,
    dists: Iterable[StepDistribution] = DEFAULT_THEOREM_DISTS,
    trials: int = 1_000_000,
    seed: StreamSeed = StreamSeed(0),
    shards: int = 1,
    level: float | None = None,
) -> SuiteReport:
    """Pr(D_m > D_n) against m/(m+n) for every (pair, distribution)."""
    pairs = [(int(m), int(n)) for m, n in pairs]
    dists = list(dists)
    for m, n in pairs:
        if m < 0 or n < 0 or m + n <= 2:
            raise HypothesisError(f"pair (m={m}, n={n}) is outside m + n > 2")
    count = len(pairs) * len(dists)
    level = budget_level(count) if level is None else level
    report = SuiteReport("theorem", seed, estimates=count, level=level)
    for (m, n), dist in itertools.product(pairs, dists):
        est = estimate_farther_probability(
            ComparisonSpec(m, n, dist), trials, seed.child_named(f"theorem/{m}/{n}/{dist}"),
            shards, level,
        )
        report.checks.append(
            statistical_check("theorem", f"farther[{m},{n}]", oracles.exact_farther_probability(m, n),
                         est, m=m, n=n, dist=str(dist))
        )
    return report


def _is_constant_draw(src: DistanceSource) -> bool:
    return isinstance(src, Draw) and isinstance(src.dist, Constant)


def run_lemma_suite(
    triples: Iterable[Sequence[DistanceSource]] = DEFAULT_LEMMA_TRIPLES,
    trials: int = 1_000_000,
    seed: StreamSeed = StreamSeed(0),
    shards: int = 1,
    level: float | None = None,
) -> SuiteReport:
    """Sum of the three dominance probabilities of a triple against 1.

    Triples of constant draws also get one check per term against the exact
    triangle probabilities.
    """
    triples = [tuple(t) for t in triples]
    for t in triples:
        if len(t) != 3:
            raise UsageError(f"lemma triples need exactly three sources, got {len(t)}")
    level = budget_level(3 * len(triples)) if level is None else level
    report = SuiteReport("lemma", seed, estimates=3 * len(triples), level=level)
    for triple in triples:
        label = "|".join(str(s) for s in triple)
        terms = []
        for k in range(3):
            others = [triple[j] for j in range(3) if j != k]
            terms.append(
                estimate_dominance_probability(
                    triple[k], others, trials, seed.child_named(f"lemma/{label}/{k}"), shards, level
                )
            )
        if all(_is_constant_draw(s) for s in triple):
            exact = oracles.exact_triangle_terms(*(s.dist.value for s in triple))
            for k, (value, est) in enumerate(zip(exact, terms)):
                report.checks.append(statistical_check("lemma", f"term[{k}]", value, est, dist=label))
        report.checks.append(
            combined_check("lemma", "sum", oracles.LEMMA_SUM, [(1, e) for e in terms],
                      seed.child_named(f"lemma/{label}"), dist=label)
        )
    return report


def run_additivity_suite(
    s: int,
    dist: StepDistribution = Constant(1.0),
    trials: int = 1_000_000,
    seed: StreamSeed = StreamSeed(0),
    shards: int = 1,
    level: float | None = None,
) -> SuiteReport:
    """Estimates p_i = Pr(D_i > D_{s-i}) for i = 0..s and checks the
    complement, additivity and linearity identities between them."""
    if s <= 2:
        raise HypothesisError(f"the additivity identities need s > 2, got s={s}")
    level = budget_level(s + 1) if level is None else level
    report = SuiteReport(f"additivity[{s}]", seed, estimates=s + 1, level=level)
    suite = report.name
    p = {}
    for i in range(s + 1):
        p[i] = estimate_farther_probability(
            ComparisonSpec(i, s - i, dist), trials, seed.child_named(f"additivity/{s}/{dist}/{i}"),
            shards, level,
        )
    exact = {i: oracles.exact_farther_probability(i, s - i) for i in range(s + 1)}
    meta = {"dist": str(dist)}
    for i in range(s // 2 + 1):
        j = s - i
        report.checks.append(
            combined_check(suite, f"complement[{i},{j}]", exact[i] + exact[j],
                      [(1, p[i]), (1, p[j])], seed, m=i, n=j, **meta)
        )
    for i in range(1, s):
        for j in range(i, s - i + 1):
            report.checks.append(
                combined_check(suite, f"additive[{i},{j}]", exact[i] + exact[j] - exact[i + j],
                          [(1, p[i]), (1, p[j]), (-1, p[i + j])], seed, m=i, n=j, **meta)
            )
    for i in range(s + 1):
        report.checks.append(
            statistical_check(suite, f"linear[{i}]", exact[i], p[i], m=i, n=s - i, **meta)
        )
    return report


# ---------------------------------------------------------------------------
# rendering


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_report(report: SuiteReport | Sequence[SuiteReport], fmt: str = "csv") -> bytes:
    """Serialise one or more reports; column order is fixed by ``COLUMNS``."""
    reports = [report] if isinstance(report, SuiteReport) else list(report)
    rows = [c.row() for r in reports for c in r.checks]
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(COLUMNS)
        for row in rows:
            writer.writerow([_cell(row[col]) for col in COLUMNS])
        return buf.getvalue().encode("utf-8")
    if fmt in ("jsonl", "json-lines"):
        lines = [json.dumps({col: row[col] for col in COLUMNS}, allow_nan=False) for row in rows]
        return "".join(line + "\n" for line in lines).encode("utf-8")
    raise UsageError(f"unsupported report format {fmt!r}; expected one of {FORMATS}")


_INT_COLUMNS = ("m", "n", "trials", "ties")
_FLOAT_COLUMNS = ("expected", "p_hat", "ci_low", "ci_high", "level")


def parse_report(data: bytes, fmt: str = "csv") -> list[dict]:
    """Inverse of :func:`render_report`, returning one dict per row."""
    text = data.decode("utf-8")
    if fmt == "csv":
        raw = list(csv.DictReader(io.StringIO(text)))
        rows = []
        for r in raw:
            row = dict(r)
            for col in _INT_COLUMNS:
                row[col] = int(row[col]) if row[col] != "" else None
            for col in _FLOAT_COLUMNS:
                row[col] = float(row[col]) if row[col] != "" else None
            rows.append(row)
        return rows
    if fmt in ("jsonl", "json-lines"):
        return [json.loads(line) for line in text.splitlines() if line.strip()]
    raise UsageError(f"unsupported report format {fmt!r}; expected one of {FORMATS}")
