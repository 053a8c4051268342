"""Support-set algebra and masked complex-vector primitives.

A support set is the list of tap indices an estimator currently treats
as active. All selection is by squared magnitude with ties broken
toward the smaller index, so repeated runs are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SupportSet:
    """Strictly increasing tap indices drawn from ``[0, capacity)``."""

    indices: tuple[int, ...]
    capacity: int

    def __post_init__(self):
        if self.capacity < 1:
            raise ValueError(f"capacity must be positive, got {self.capacity}")
        prev = -1
        for i in self.indices:
            if i <= prev:
                raise ValueError("indices must be strictly increasing (no duplicates)")
            if not 0 <= i < self.capacity:
                raise ValueError(f"index {i} out of range [0, {self.capacity})")
            prev = i

    @classmethod
    def from_iterable(cls, indices, capacity: int) -> "SupportSet":
        """Build from any iterable of indices; sorts and deduplicates."""
        return cls(tuple(sorted(set(int(i) for i in indices))), capacity)

    @classmethod
    def full(cls, capacity: int) -> "SupportSet":
        return cls(tuple(range(capacity)), capacity)

    @classmethod
    def empty(cls, capacity: int) -> "SupportSet":
        return cls((), capacity)

    def __len__(self) -> int:
        return len(self.indices)

    def __contains__(self, index) -> bool:
        return int(index) in set(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=np.intp)

    def mask(self) -> np.ndarray:
        """Boolean membership mask of length ``capacity``."""
        m = np.zeros(self.capacity, dtype=bool)
        m[self.as_array()] = True
        return m

    def union(self, other: "SupportSet") -> "SupportSet":
        if self.capacity != other.capacity:
            raise ValueError(
                f"capacity mismatch: {self.capacity} vs {other.capacity}"
            )
        return SupportSet.from_iterable(self.indices + other.indices, self.capacity)

    def intersection(self, other: "SupportSet") -> "SupportSet":
        if self.capacity != other.capacity:
            raise ValueError(
                f"capacity mismatch: {self.capacity} vs {other.capacity}"
            )
        return SupportSet.from_iterable(
            set(self.indices) & set(other.indices), self.capacity
        )


def top_s_support(v: np.ndarray, s: int) -> SupportSet:
    """Indices of the ``s`` largest-magnitude entries of ``v``.

    Comparison is on |v_i|^2 (same ordering, no square roots); ties go
    to the smaller index via a stable sort.
    """
    v = np.asarray(v)
    if not 1 <= s <= v.size:
        raise ValueError(f"s must be in [1, {v.size}], got {s}")
    # stable sort on negated magnitude keeps smaller indices first among ties
    order = np.argsort(-(v.real**2 + v.imag**2), kind="stable")
    return SupportSet(tuple(sorted(int(i) for i in order[:s])), v.size)


def support_union(a: SupportSet, b: SupportSet) -> SupportSet:
    """Set union over a common capacity, sorted ascending."""
    return a.union(b)


def apply_mask(x: np.ndarray, lambda_set: SupportSet) -> np.ndarray:
    """Zero every entry of ``x`` outside ``lambda_set``.

    Equivalent to multiplying by the 0/1 diagonal selection matrix
    without materializing it. Returns a new array.
    """
    x = np.asarray(x)
    if lambda_set.capacity != x.size:
        raise ValueError(
            f"support capacity {lambda_set.capacity} != vector length {x.size}"
        )
    out = np.zeros_like(x)
    idx = lambda_set.as_array()
    out[idx] = x[idx]
    return out


def sparsify(h: np.ndarray, keep: SupportSet) -> np.ndarray:
    """Applied-estimator projection: keep ``h`` on ``keep``, zero elsewhere."""
    return apply_mask(h, keep)
