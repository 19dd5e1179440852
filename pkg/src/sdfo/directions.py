"""Deterministic direction sequences on the unit sphere.

The quasi-random scheme pushes Halton points through the inverse normal
CDF coordinate-wise and normalizes, which spreads a low-discrepancy cube
sequence over the sphere in any dimension.  Direction choice never looks
at function estimates, so the measurability requirement of the optimizers
holds by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .stats import inverse_normal_cdf

_PRIMES = (
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47,
    53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113,
)

_DEGENERATE_NORM = 1e-8


def first_primes(count: int) -> tuple[int, ...]:
    if count < 1:
        raise ValueError("count must be >= 1")
    if count > len(_PRIMES):
        raise ValueError(f"only the first {len(_PRIMES)} primes are tabulated")
    return _PRIMES[:count]


def radical_inverse(index: int, base: int) -> float:
    """Reflect the base-b digits of ``index`` about the radix point."""
    if index < 0:
        raise ValueError("index must be nonnegative")
    if base < 2:
        raise ValueError("base must be >= 2")
    value = 0.0
    factor = 1.0 / base
    while index > 0:
        index, digit = divmod(index, base)
        value += digit * factor
        factor /= base
    return value


def halton_point(index: int, bases) -> np.ndarray:
    """The index-th Halton point in [0, 1)^d for the given prime bases."""
    bases = tuple(int(b) for b in bases)
    if len(bases) != len(set(bases)):
        raise ValueError("bases must be distinct")
    return np.array([radical_inverse(index, b) for b in bases])


@dataclass(frozen=True)
class QuasiRandomSphere:
    """Halton points mapped through the normal quantile and normalized."""


@dataclass(frozen=True)
class UniformRandomSphere:
    """Seeded i.i.d. uniform directions; the k-th draw depends only on (seed, k)."""

    seed: int = 0


class FixedCycle:
    """Cycle through an explicit list of unit vectors."""

    def __init__(self, vectors) -> None:
        vecs = []
        for v in vectors:
            arr = np.asarray(v, dtype=float)
            if arr.ndim != 1:
                raise ValueError("cycle entries must be vectors")
            if abs(np.linalg.norm(arr) - 1.0) > 1e-12:
                raise ValueError(f"cycle entry {arr} is not a unit vector")
            vecs.append(arr.copy())
        if not vecs:
            raise ValueError("cycle must contain at least one vector")
        self.vectors = tuple(vecs)

    def __eq__(self, other) -> bool:
        return isinstance(other, FixedCycle) and all(
            np.array_equal(a, b) for a, b in zip(self.vectors, other.vectors)
        ) and len(self.vectors) == len(other.vectors)


class DirectionGenerator:
    """Reproducible stream of unit vectors.

    The state is ``(scheme, cursor)``: a fresh generator advanced ``cursor``
    times emits the same continuation.  Every emitted vector has Euclidean
    norm 1 up to 1e-12.
    """

    def __init__(self, dimension: int, scheme, cursor: int = 0) -> None:
        if dimension < 1:
            raise ValueError("dimension must be >= 1")
        if cursor < 0:
            raise ValueError("cursor must be nonnegative")
        self.dimension = dimension
        self.scheme = scheme
        self.cursor = 0
        if isinstance(scheme, QuasiRandomSphere):
            self._bases = first_primes(dimension)
            # Index 0 maps to the origin; the sequence starts at 1.
            self._halton_index = 0
        elif isinstance(scheme, FixedCycle):
            for v in scheme.vectors:
                if v.shape != (dimension,):
                    raise ValueError("cycle vectors must match the generator dimension")
        elif not isinstance(scheme, UniformRandomSphere):
            raise ValueError(f"unknown direction scheme: {scheme!r}")
        for _ in range(cursor):
            self.next_direction()

    def clone(self) -> "DirectionGenerator":
        fresh = DirectionGenerator(self.dimension, self.scheme)
        fresh.cursor = self.cursor
        if isinstance(self.scheme, QuasiRandomSphere):
            fresh._halton_index = self._halton_index
        return fresh

    def next_direction(self) -> np.ndarray:
        if isinstance(self.scheme, FixedCycle):
            vecs = self.scheme.vectors
            direction = vecs[self.cursor % len(vecs)].copy()
        elif isinstance(self.scheme, UniformRandomSphere):
            direction = self._uniform_direction(self.cursor)
        else:
            direction = self._quasi_random_direction()
        self.cursor += 1
        return direction

    def _uniform_direction(self, index: int) -> np.ndarray:
        seq = np.random.SeedSequence(entropy=self.scheme.seed, spawn_key=(index,))
        rng = np.random.default_rng(seq)
        while True:
            z = rng.standard_normal(self.dimension)
            norm = float(np.linalg.norm(z))
            if norm >= _DEGENERATE_NORM:
                return z / norm

    def _quasi_random_direction(self) -> np.ndarray:
        while True:
            self._halton_index += 1
            u = halton_point(self._halton_index, self._bases)
            z = np.array([inverse_normal_cdf(c) for c in u])
            norm = float(np.linalg.norm(z))
            if norm >= _DEGENERATE_NORM:
                return z / norm


def next_direction(gen: DirectionGenerator) -> np.ndarray:
    """Emit the cursor-th direction and advance the cursor."""
    return gen.next_direction()
