"""Ground truth for the simulation engine.

Two independent routes: the closed forms ``m / (m + n)`` and ``1 / (n + 1)``,
and a deterministic quadrature over step directions for walks with constant
step lengths.

The quadrature fixes the first direction of each walk at 0 (rotational
invariance) and treats the last step of one walk analytically: given the partial resultant
``R`` of the other steps, the chance that a final step of length ``L`` in a
uniform direction lands within distance ``r`` is the triangle-event
probability of ``(r, R, L)``. The remaining directions are integrated with
nested adaptive Simpson rules on the unit interval (``theta = 2*pi*u``), so
results are probabilities directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .errors import DomainError, HypothesisError, UsageError
from .geometry import TWO_PI, TriangleSides, combine_pair, triangle_event_probability

LEMMA_SUM = 1.0


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-10
    max_depth: int = 40
    # outer integrals see inner-quadrature noise, so they run at a looser tolerance
    outer_tol_factor: float = 100.0

    def __post_init__(self) -> None:
        if not self.abs_tol > 0:
            raise ValueError(f"abs_tol must be positive, got {self.abs_tol}")
        if self.max_depth < 1:
            raise ValueError(f"max_depth must be >= 1, got {self.max_depth}")


def exact_farther_probability(m: int, n: int) -> float:
    if m < 0 or n < 0:
        raise UsageError(f"step counts must be non-negative, got m={m}, n={n}")
    if m + n <= 2:
        raise HypothesisError(f"closed form needs m + n > 2, got m={m}, n={n}")
    return m / (m + n)


def exact_return_probability(n: int) -> float:
    if n <= 1:
        raise HypothesisError(f"closed form needs n > 1 unit steps, got n={n}")
    return 1.0 / (n + 1)


def exact_triangle_terms(a: float, b: float, c: float) -> tuple[float, float, float]:
    """The three dominance probabilities of constant lengths, each against the
    random-direction resultant of the other two."""
    return (
        triangle_event_probability(TriangleSides(a, b, c)),
        triangle_event_probability(TriangleSides(b, a, c)),
        triangle_event_probability(TriangleSides(c, a, b)),
    )


# ---------------------------------------------------------------------------
# adaptive Simpson


def _simpson(fa: float, fm: float, fb: float, width: float) -> float:
    return width * (fa + 4.0 * fm + fb) / 6.0


def integrate(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float,
    max_depth: int = 40,
    panels: int = 16,
) -> float:
    """Adaptive Simpson quadrature of ``f`` on [lo, hi].

    The range is first cut into ``panels`` equal pieces sharing ``tol``. A
    panel is accepted when its two-half Simpson estimate agrees with the
    whole-panel one to ``15 * tol``; at ``max_depth`` it is accepted as is.
    """
    total = 0.0
    step = (hi - lo) / panels
    for k in range(panels):
        a = lo + k * step
        b = hi if k == panels - 1 else a + step
        m = 0.5 * (a + b)
        fa, fm, fb = f(a), f(m), f(b)
        stack = [(a, b, fa, fm, fb, _simpson(fa, fm, fb, b - a), tol / panels, 0)]
        while stack:
            a, b, fa, fm, fb, whole, eps, depth = stack.pop()
            m = 0.5 * (a + b)
            lm = 0.5 * (a + m)
            rm = 0.5 * (m + b)
            flm, frm = f(lm), f(rm)
            left = _simpson(fa, flm, fm, m - a)
            right = _simpson(fm, frm, fb, b - m)
            delta = left + right - whole
            if depth >= max_depth or abs(delta) <= 15.0 * eps:
                total += left + right + delta / 15.0
            else:
                stack.append((a, m, fa, flm, fm, left, 0.5 * eps, depth + 1))
                stack.append((m, b, fm, frm, fb, right, 0.5 * eps, depth + 1))
    return total


def _integrate_unit_cube(
    f: Callable[[tuple[float, ...]], float], dims: int, cfg: QuadratureConfig
) -> float:
    if dims == 0:
        return f(())
    if dims == 1:
        return integrate(lambda u: f((u,)), 0.0, 1.0, cfg.abs_tol, cfg.max_depth)
    if dims == 2:
        def inner(u: float) -> float:
            return integrate(lambda v: f((u, v)), 0.0, 1.0, cfg.abs_tol, cfg.max_depth)

        return integrate(inner, 0.0, 1.0, cfg.abs_tol * cfg.outer_tol_factor, cfg.max_depth)
    raise UsageError(f"at most two numerically integrated directions are supported, got {dims}")


def _resultant(lengths: Sequence[float], fractions: Sequence[float]) -> float:
    """Distance after steps of ``lengths``; the first points along angle 0 and
    step ``k >= 1`` along ``2*pi*fractions[k-1]``."""
    if not lengths:
        return 0.0
    if len(lengths) == 1:
        return lengths[0]
    x = lengths[0]
    y = 0.0
    for length, u in zip(lengths[1:], fractions):
        theta = TWO_PI * u
        x += length * math.cos(theta)
        y += length * math.sin(theta)
    return math.hypot(x, y)


def _within(radius: float, partial: float, last: float) -> float:
    """Pr(|partial + last * e^{i phi}| < radius) for uniform phi."""
    if radius <= 0.0:
        return 0.0
    if partial <= 0.0:
        return 1.0 if last < radius else 0.0
    return triangle_event_probability(TriangleSides(radius, partial, last))


def quadrature_return_probability(
    n: int,
    lengths: Sequence[float],
    radius: float,
    cfg: QuadratureConfig = QuadratureConfig(),
) -> float:
    """Pr(l_1 + ... + l_n lands within ``radius``) for fixed lengths, by quadrature."""
    if n not in (2, 3, 4):
        raise UsageError(f"quadrature supports n in {{2, 3, 4}}, got {n}")
    lengths = [float(x) for x in lengths]
    if len(lengths) != n:
        raise UsageError(f"expected {n} lengths, got {len(lengths)}")
    if not all(math.isfinite(x) and x > 0 for x in lengths):
        raise DomainError(f"lengths must be positive, got {lengths}")
    if not (math.isfinite(radius) and radius > 0):
        raise DomainError(f"radius must be positive, got {radius!r}")
    head, last = lengths[:-1], lengths[-1]

    def f(us: tuple[float, ...]) -> float:
        return _within(radius, _resultant(head, us), last)

    return _integrate_unit_cube(f, n - 2, cfg)


def quadrature_farther_probability(
    m: int, n: int, length: float = 1.0, cfg: QuadratureConfig = QuadratureConfig()
) -> float:
    """Pr(D_m > D_n) for constant step ``length``, by quadrature over directions."""
    if m < 1 or n < 1:
        raise UsageError(f"quadrature needs m, n >= 1, got m={m}, n={n}")
    if (m - 1) + (n - 1) > 3:
        raise UsageError(f"at most 3 relative directions are supported, got m={m}, n={n}")
    if not (math.isfinite(length) and length > 0):
        raise DomainError(f"length must be positive, got {length!r}")

    # the last step of the shorter walk (with at least two steps) is analytic;
    # conditioning on the full longer walk keeps the integrand smooth
    if n >= 2 and (m < 2 or n < m):
        def f(us: tuple[float, ...]) -> float:
            d_m = _resultant([length] * m, us[: m - 1])
            partial = _resultant([length] * (n - 1), us[m - 1 :])
            return _within(d_m, partial, length)

        return _integrate_unit_cube(f, (m - 1) + (n - 2), cfg)
    if m >= 2:
        # Pr(D_m == D_n) is zero once m >= 2
        def g(us: tuple[float, ...]) -> float:
            d_n = _resultant([length] * n, us[: n - 1])
            partial = _resultant([length] * (m - 1), us[n - 1 :])
            return 1.0 - _within(d_n, partial, length)

        return _integrate_unit_cube(g, (n - 1) + (m - 2), cfg)
    # m == n == 1: both distances equal `length`, the strict event never happens
    return 0.0


def quadrature_triangle_event_probability(
    a: float, b: float, c: float, cfg: QuadratureConfig = QuadratureConfig()
) -> float:
    """Pr(a > b (+) c) by direct quadrature of the indicator over the relative angle."""
    return integrate(
        lambda u: 1.0 if a > combine_pair(b, c, TWO_PI * u) else 0.0,
        0.0,
        1.0,
        cfg.abs_tol,
        cfg.max_depth,
        panels=256,
    )
