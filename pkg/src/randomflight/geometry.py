"""Deterministic geometry of planar steps.

Angles are radians, lengths are plain floats. Everything here is a pure
function of its inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import DomainError, UsageError

TWO_PI = 2.0 * math.pi


def normalize_angle(theta: float) -> float:
    """Map ``theta`` into the canonical range [0, 2*pi)."""
    if not math.isfinite(theta):
        raise DomainError(f"angle must be finite, got {theta!r}")
    out = math.fmod(theta, TWO_PI)
    if out < 0.0:
        out += TWO_PI
    # fmod of a tiny negative value can round back up to exactly 2*pi
    return 0.0 if out >= TWO_PI else out


def _check_length(name: str, value: float) -> None:
    if not (math.isfinite(value) and value > 0.0):
        raise DomainError(f"{name} must be a finite positive length, got {value!r}")


def combine_pair(a: float, b: float, theta: float) -> float:
    """Distance from the origin after a step of length ``a`` followed by a
    step of length ``b`` turned by ``theta`` relative to the first.
    """
    _check_length("a", a)
    _check_length("b", b)
    theta = normalize_angle(theta)
    radicand = a * a + b * b + 2.0 * a * b * math.cos(theta)
    return math.sqrt(max(0.0, radicand))


def walk_distance(lengths: Sequence[float], angles: Sequence[float]) -> float:
    """End-to-origin distance of a walk with the given absolute step directions.

    Accumulates Cartesian coordinates step by step. A single step returns its
    length exactly.
    """
    if len(lengths) != len(angles):
        raise UsageError(
            f"lengths and angles differ in size ({len(lengths)} != {len(angles)})"
        )
    if len(lengths) == 0:
        return 0.0
    for k, length in enumerate(lengths):
        _check_length(f"lengths[{k}]", length)
    if len(lengths) == 1:
        return float(lengths[0])
    x = 0.0
    y = 0.0
    for length, theta in zip(lengths, angles):
        x += length * math.cos(theta)
        y += length * math.sin(theta)
    return math.hypot(x, y)


@dataclass(frozen=True)
class TriangleSides:
    """Three positive lengths; need not satisfy the triangle inequality."""

    a: float
    b: float
    c: float

    def __post_init__(self) -> None:
        _check_length("a", self.a)
        _check_length("b", self.b)
        _check_length("c", self.c)

    @property
    def is_proper(self) -> bool:
        a, b, c = self.a, self.b, self.c
        return a < b + c and b < a + c and c < a + b


def _four_area(a: float, b: float, c: float) -> float:
    # Kahan's ordering of Heron's formula; accurate for needle-like triangles
    x, y, z = sorted((a, b, c), reverse=True)
    product = (x + (y + z)) * (z - (x - y)) * (z + (x - y)) * (x + (y - z))
    return math.sqrt(max(0.0, product))


def _opposite_angle(a: float, b: float, c: float) -> float:
    """Angle opposite ``a``; equals arccos((b^2 + c^2 - a^2) / 2bc) clamped to [0, pi].

    Evaluated as atan2(4 * area, b^2 + c^2 - a^2), which stays accurate where
    arccos loses digits (angles near 0 or pi).
    """
    y, z = (b, c) if b >= c else (c, b)
    # b^2 + c^2 - a^2 with the cancelling pair differenced first
    return math.atan2(_four_area(a, b, c), (y - a) * (y + a) + z * z)


def triangle_event_probability(sides: TriangleSides) -> float:
    """Probability that ``a`` exceeds the resultant of ``b`` and ``c`` when
    their relative direction is uniform on the circle.

    Boundary cases where ``a == b + c`` count as certain.
    """
    a, b, c = sides.a, sides.b, sides.c
    if a >= b + c:
        return 1.0
    if b >= a + c or c >= a + b:
        return 0.0
    return _opposite_angle(a, b, c) / math.pi


def interior_angles(sides: TriangleSides) -> tuple[float, float, float]:
    """Angles opposite ``a``, ``b`` and ``c`` of a proper triangle."""
    if not sides.is_proper:
        raise DomainError(f"{sides} do not form a proper triangle")
    a, b, c = sides.a, sides.b, sides.c
    return (
        _opposite_angle(a, b, c),
        _opposite_angle(b, a, c),
        _opposite_angle(c, a, b),
    )
