"""Counter-based random streams with deterministic hierarchical seeding.

A stream is identified by a 64-bit key. Output number ``j`` of the stream is
``mix64(key + (j + 1) * GOLDEN)`` (SplitMix64), so any output can be computed
directly from ``(key, j)`` and whole batches of streams can be evaluated with
numpy.

Keys are derived from a :class:`StreamSeed` by folding its path::

    key(root, [])        = mix64(root)
    key(root, path + [k]) = mix64(key(root, path) ^ mix64(k + GOLDEN))

These constants and formulas are part of the reproducibility contract; changing
any of them changes every simulated number.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_MUL1 = 0xBF58476D1CE4E5B9
_MUL2 = 0x94D049BB133111EB

# uniforms use the top 52 bits so that (k + 0.5) is exact and u stays inside (0, 1);
# angles use the top 53 bits and stay strictly below 2*pi
UNIFORM_SCALE = 2.0**-52
ANGLE_SCALE = 2.0 * math.pi * 2.0**-53

_GOLDEN_U = np.uint64(GOLDEN)
_MUL1_U = np.uint64(_MUL1)
_MUL2_U = np.uint64(_MUL2)
_S11 = np.uint64(11)
_S12 = np.uint64(12)
_S27 = np.uint64(27)
_S30 = np.uint64(30)
_S31 = np.uint64(31)


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a Python int."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MUL1) & MASK64
    z = ((z ^ (z >> 27)) * _MUL2) & MASK64
    return z ^ (z >> 31)


def mix64_array(z: np.ndarray) -> np.ndarray:
    """Vectorised :func:`mix64`; uint64 arithmetic wraps modulo 2**64."""
    with np.errstate(over="ignore"):
        z = z ^ (z >> _S30)
        z *= _MUL1_U
        z ^= z >> _S27
        z *= _MUL2_U
        z ^= z >> _S31
    return z


def child_key(parent: int, key: int) -> int:
    return mix64(parent ^ mix64(key + GOLDEN))


def child_keys(parents: np.ndarray | int, keys: np.ndarray | int) -> np.ndarray:
    """Vectorised :func:`child_key`; either argument may be a scalar."""
    parents = np.asarray(parents, dtype=np.uint64)
    keys = np.asarray(keys, dtype=np.uint64)
    with np.errstate(over="ignore"):
        salted = keys + _GOLDEN_U
    return mix64_array(parents ^ mix64_array(salted))


def label_key(label: str) -> int:
    """Stable 64-bit key for a text label."""
    digest = hashlib.blake2b(label.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


@dataclass(frozen=True)
class StreamSeed:
    """Root seed plus a path of 64-bit substream keys."""

    root: int
    path: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if not 0 <= self.root <= MASK64:
            raise ValueError(f"root must be an unsigned 64-bit integer, got {self.root}")
        object.__setattr__(self, "path", tuple(int(k) for k in self.path))
        for k in self.path:
            if not 0 <= k <= MASK64:
                raise ValueError(f"path keys must be unsigned 64-bit integers, got {k}")

    def child(self, key: int) -> StreamSeed:
        return StreamSeed(self.root, self.path + (key,))

    def child_named(self, label: str) -> StreamSeed:
        return self.child(label_key(label))

    @property
    def key(self) -> int:
        h = mix64(self.root)
        for k in self.path:
            h = child_key(h, k)
        return h

    def __str__(self) -> str:
        return "/".join(str(part) for part in (self.root, *self.path))

    @classmethod
    def parse(cls, text: str) -> StreamSeed:
        parts = [int(p) for p in str(text).split("/")]
        return cls(parts[0], tuple(parts[1:]))


class RandomStream:
    """Sequential view of one counter-based stream.

    Single owner; advancing the counter is the only mutation.
    """

    __slots__ = ("key", "counter")

    def __init__(self, key: int, counter: int = 0) -> None:
        self.key = key & MASK64
        self.counter = counter

    @classmethod
    def from_seed(cls, seed: StreamSeed) -> RandomStream:
        return cls(seed.key)

    def next_u64(self) -> int:
        out = mix64(self.key + (self.counter + 1) * GOLDEN)
        self.counter += 1
        return out

    def next_uniform(self) -> float:
        """Uniform draw on the open interval (0, 1)."""
        return ((self.next_u64() >> 12) + 0.5) * UNIFORM_SCALE

    def next_angle(self) -> float:
        """Uniform draw on [0, 2*pi)."""
        return (self.next_u64() >> 11) * ANGLE_SCALE


def derive_stream(seed: StreamSeed, key: int) -> RandomStream:
    return RandomStream.from_seed(seed.child(key))


def sample_angle(stream: RandomStream) -> float:
    return stream.next_angle()


def _u64_at(keys: np.ndarray, counter: int) -> np.ndarray:
    offset = np.uint64(((counter + 1) * GOLDEN) & MASK64)
    with np.errstate(over="ignore"):
        shifted = keys + offset
    return mix64_array(shifted)


def uniforms_at(keys: np.ndarray, counter: int) -> np.ndarray:
    """Output ``counter`` of every stream in ``keys`` as a uniform on (0, 1)."""
    return ((_u64_at(keys, counter) >> _S12).astype(np.float64) + 0.5) * UNIFORM_SCALE


def angles_at(keys: np.ndarray, counter: int) -> np.ndarray:
    """Output ``counter`` of every stream in ``keys`` as an angle in [0, 2*pi)."""
    return (_u64_at(keys, counter) >> _S11).astype(np.float64) * ANGLE_SCALE
