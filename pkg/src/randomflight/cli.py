"""Command-line front end.

Exit codes: 0 when every check passed, 1 when a statistical check failed,
2 on usage, configuration or I/O errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import oracles, verification
from .distributions import Constant, parse_distribution
from .errors import HypothesisError, UsageError
from .montecarlo import (
    DEFAULT_LEVEL,
    ComparisonSpec,
    DistanceSource,
    Draw,
    Walk,
    WalkSpec,
    default_shards,
    estimate_farther_probability,
    estimate_return_probability,
)
from .streams import StreamSeed

COMMANDS = ("estimate", "rayleigh", "theorem", "lemma", "additivity", "oracle")
SEEDED = ("estimate", "rayleigh", "theorem", "lemma", "additivity")
CONFIG_KEYS = ("dist", "m", "n", "radius", "trials", "seed", "shards", "level", "format", "out", "method")

EPILOG = """\
distributions: constant:C  uniform:LO,HI  exp:RATE  lognormal:MU,SIGMA  twopoint:V1,V2,P
lemma sources: a distribution (a single draw) or walk:K:DIST (distance after K steps)

--m/--n take comma-separated lists where a command sweeps several values;
for `additivity`, --n lists the total step counts s.

config files are JSON objects with keys among: {keys}.
explicit flags override config values.

exit codes: 0 all checks passed, 1 a statistical check failed, 2 usage/config/I-O error
""".format(keys=", ".join(CONFIG_KEYS))


@dataclass(frozen=True)
class RunConfig:
    command: str
    dists: tuple[str, ...] = ()
    m: tuple[int, ...] = ()
    n: tuple[int, ...] = ()
    radius: float | None = None
    trials: int = 1_000_000
    seed: int | None = None
    shards: int = dataclasses.field(default_factory=default_shards)
    level: float | None = None
    format: str = "csv"
    out: str = "-"
    method: str = "exact"


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


def _build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--dist", action="append", help="step distribution (repeatable)")
    common.add_argument("--m", help="steps of the first walker (comma list)")
    common.add_argument("--n", help="steps of the second walker / walk length (comma list)")
    common.add_argument("--radius", type=float, help="target radius for return estimates")
    common.add_argument("--trials", type=int, help="Monte Carlo trials per estimate (default 1000000)")
    common.add_argument("--seed", type=int, help="root seed (required for simulations)")
    common.add_argument("--shards", type=int, help="parallel trial blocks (default: CPU count, max 64)")
    common.add_argument("--level", type=float, help="confidence level per estimate")
    common.add_argument("--format", choices=("csv", "jsonl", "json-lines"), help="report format")
    common.add_argument("--out", help="output path, '-' for standard output (default)")
    common.add_argument("--method", choices=("exact", "quadrature"), help="oracle route")
    common.add_argument("--config", help="JSON config file")

    parser = _Parser(
        prog="randomflight",
        description="Random-flight distance estimators, oracles and verification suites.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    helps = {
        "estimate": "estimate Pr(D_m > D_n) (--m, --n) or Pr(D_n < radius) (--n, --radius)",
        "rayleigh": "unit-step return probabilities against 1/(n+1)",
        "theorem": "two-walker comparisons against m/(m+n)",
        "lemma": "three-source dominance probabilities summing to 1",
        "additivity": "complement, additivity and linearity of p_i for total steps s",
        "oracle": "print an exact or quadrature value",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name], epilog=EPILOG,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    return parser


def _int_list(value, flag: str) -> tuple[int, ...]:
    if value is None:
        return ()
    items = value if isinstance(value, list) else str(value).split(",")
    try:
        return tuple(int(str(v).strip()) for v in items)
    except ValueError:
        raise UsageError(f"{flag} expects integers, got {value!r}") from None


def _load_config(path: str) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError(f"config {path} must hold a JSON object")
    unknown = sorted(set(data) - set(CONFIG_KEYS))
    if unknown:
        raise UsageError(f"unknown config field(s): {', '.join(unknown)}")
    return data


def parse_args(argv: Sequence[str]) -> RunConfig:
    ns = _build_parser().parse_args(list(argv))
    if ns.command is None:
        raise UsageError(f"a command is required: {', '.join(COMMANDS)}")
    values = _load_config(ns.config) if ns.config else {}
    for key in CONFIG_KEYS:
        flag = getattr(ns, key)
        if flag is not None:
            values[key] = flag

    dists = values.get("dist", ())
    dists = (dists,) if isinstance(dists, str) else tuple(dists)
    fmt = values.get("format", "csv")
    kwargs = dict(
        command=ns.command,
        dists=dists,
        m=_int_list(values.get("m"), "--m"),
        n=_int_list(values.get("n"), "--n"),
        radius=values.get("radius"),
        seed=values.get("seed"),
        level=values.get("level"),
        format="jsonl" if fmt == "json-lines" else fmt,
        out=values.get("out", "-"),
        method=values.get("method", "exact"),
    )
    for key in ("trials", "shards"):
        if key in values:
            kwargs[key] = int(values[key])
    config = RunConfig(**kwargs)
    _validate(config)
    return config


def _validate(c: RunConfig) -> None:
    for text in c.dists:
        if c.command == "lemma":
            _parse_source(text)
        else:
            parse_distribution(text)
    if c.format not in verification.FORMATS:
        raise UsageError(f"unsupported format {c.format!r}")
    if c.trials < 1:
        raise UsageError("--trials must be >= 1")
    if c.shards < 1:
        raise UsageError("--shards must be >= 1")
    if c.level is not None and not 0.0 < c.level < 1.0:
        raise UsageError("--level must lie in (0, 1)")
    if c.radius is not None and not c.radius > 0:
        raise UsageError("--radius must be positive")
    if any(v < 0 for v in c.m + c.n):
        raise UsageError("step counts must be non-negative")

    if c.command == "estimate":
        if len(c.n) != 1 or len(c.m) > 1:
            raise UsageError("`estimate` takes a single --n and at most one --m")
        if c.m and c.radius is not None:
            raise UsageError("`estimate` takes either --m or --radius, not both")
        if c.m and c.m[0] + c.n[0] < 1:
            raise UsageError("m + n must be at least 1: no event is defined for two empty walks")
        if len(c.dists) > 1:
            raise UsageError("`estimate` takes a single --dist")
    elif c.command == "rayleigh":
        bad = [n for n in c.n if n <= 1]
        if bad:
            raise HypothesisError(f"the unit-step return formula holds only for n > 1, got {bad}")
    elif c.command == "theorem":
        if bool(c.m) != bool(c.n):
            raise UsageError("`theorem` takes both --m and --n, or neither for the default sweep")
        for m in c.m:
            for n in c.n:
                if m + n <= 2:
                    raise HypothesisError(f"pair (m={m}, n={n}) is outside m + n > 2")
    elif c.command == "lemma":
        if len(c.dists) not in (0, 1, 3):
            raise UsageError("`lemma` takes one source (used three times) or three sources")
    elif c.command == "additivity":
        bad = [s for s in c.n if s <= 2]
        if bad:
            raise HypothesisError(f"the additivity identities need s > 2, got {bad}")
    elif c.command == "oracle":
        if len(c.n) != 1 or len(c.m) > 1:
            raise UsageError("`oracle` takes a single --n and at most one --m")
        if c.method == "exact" and c.m:
            oracles.exact_farther_probability(c.m[0], c.n[0])
        elif c.method == "exact":
            oracles.exact_return_probability(c.n[0])
    if c.command in SEEDED and c.seed is None:
        raise UsageError(f"`{c.command}` needs an explicit --seed")


def _parse_source(text: str) -> DistanceSource:
    if text.startswith("walk:"):
        steps, sep, dist = text[len("walk:"):].partition(":")
        if not sep:
            raise UsageError(f"walk sources look like walk:K:DIST, got {text!r}")
        try:
            k = int(steps)
        except ValueError:
            raise UsageError(f"bad step count in {text!r}") from None
        if k < 0:
            raise UsageError(f"step count must be non-negative in {text!r}")
        return Walk(WalkSpec(k, parse_distribution(dist)))
    if text.startswith("draw:"):
        text = text[len("draw:"):]
    return Draw(parse_distribution(text))


def _estimate_report(c: RunConfig, seed: StreamSeed) -> verification.SuiteReport:
    dist = parse_distribution(c.dists[0]) if c.dists else Constant(1.0)
    level = DEFAULT_LEVEL if c.level is None else c.level
    report = verification.SuiteReport("estimate", seed, estimates=1, level=level)
    n = c.n[0]
    if c.m:
        m = c.m[0]
        spec = ComparisonSpec(m, n, dist)
        est = estimate_farther_probability(spec, c.trials, seed, c.shards, level)
        expected = oracles.exact_farther_probability(m, n) if spec.theorem_applies else None
        name, meta = f"farther[{m},{n}]", {"m": m, "n": n}
    else:
        radius = 1.0 if c.radius is None else c.radius
        est = estimate_return_probability(WalkSpec(n, dist), radius, c.trials, seed, c.shards, level)
        # the closed form covers unit steps with unit radius, and its rescalings
        applies = isinstance(dist, Constant) and radius == dist.value and n > 1
        expected = oracles.exact_return_probability(n) if applies else None
        name, meta = f"return[{n},{radius!r}]", {"n": n}
    if expected is None:
        check = verification.CheckResult(
            "estimate", name, float("nan"), est.p_hat, est.ci_low, est.ci_high, est.trials,
            est.level, str(seed), verification.EXCLUDED, est.ties, dist=str(dist),
            detail="outside the hypotheses of the closed forms", **meta,
        )
    else:
        check = verification.statistical_check("estimate", name, expected, est, dist=str(dist), **meta)
    report.checks.append(check)
    return report


def _suite_reports(c: RunConfig) -> list[verification.SuiteReport]:
    seed = StreamSeed(c.seed)
    common = dict(trials=c.trials, seed=seed, shards=c.shards, level=c.level)
    if c.command == "estimate":
        return [_estimate_report(c, seed)]
    if c.command == "rayleigh":
        return [verification.run_rayleigh_suite(c.n or verification.DEFAULT_RAYLEIGH_N, **common)]
    if c.command == "theorem":
        pairs = [(m, n) for m in c.m for n in c.n] or verification.DEFAULT_THEOREM_PAIRS
        dists = [parse_distribution(d) for d in c.dists] or verification.DEFAULT_THEOREM_DISTS
        return [verification.run_theorem_suite(pairs, dists, **common)]
    if c.command == "lemma":
        if not c.dists:
            triples = verification.DEFAULT_LEMMA_TRIPLES
        else:
            sources = [_parse_source(d) for d in c.dists]
            triples = [tuple(sources * 3) if len(sources) == 1 else tuple(sources)]
        return [verification.run_lemma_suite(triples, **common)]
    if c.command == "additivity":
        dists = [parse_distribution(d) for d in c.dists] or verification.DEFAULT_ADDITIVITY_DISTS
        s_values = c.n or verification.DEFAULT_ADDITIVITY_S
        return [verification.run_additivity_suite(s, d, **common) for s in s_values for d in dists]
    raise UsageError(f"unknown command {c.command!r}")


def _oracle_value(c: RunConfig) -> float:
    n = c.n[0]
    if c.method == "exact":
        if c.m:
            return oracles.exact_farther_probability(c.m[0], n)
        return oracles.exact_return_probability(n)
    dist = parse_distribution(c.dists[0]) if c.dists else Constant(1.0)
    if not isinstance(dist, Constant):
        raise UsageError("quadrature oracles need a constant step length")
    if c.m:
        return oracles.quadrature_farther_probability(c.m[0], n, dist.value)
    radius = dist.value if c.radius is None else c.radius
    return oracles.quadrature_return_probability(n, [dist.value] * n, radius)


def _write(data: bytes, out: str) -> None:
    if out == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
    else:
        Path(out).write_bytes(data)


def run(config: RunConfig) -> int:
    if config.command == "oracle":
        _write(f"{_oracle_value(config)!r}\n".encode(), config.out)
        return 0
    reports = _suite_reports(config)
    _write(verification.render_report(reports, config.format), config.out)
    for r in reports:
        print(
            f"{r.name}: {r.passed} passed, {r.failed} failed, "
            f"level {r.level:.6g}, union-bound alpha {r.alpha:.3g}",
            file=sys.stderr,
        )
    return 0 if all(r.ok for r in reports) else 1


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        return run(parse_args(argv))
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
