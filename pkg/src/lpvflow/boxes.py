"""Axis-aligned boxes used for parameter sets and gain sets."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, SchemaError


@dataclass(frozen=True)
class Box:
    """Closed box { x : lo <= x <= hi }; degenerate faces (lo = hi) allowed."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        if lo.ndim != 1 or hi.ndim != 1 or lo.shape != hi.shape:
            raise DimensionMismatch(
                f"bounds must be equal-length vectors, got {lo.shape} and {hi.shape}"
            )
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise SchemaError("box bounds must be finite")
        if not np.all(lo <= hi):
            raise SchemaError("each lower bound must not exceed its upper bound")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return self.lo.shape[0]

    def _check_dim(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.shape[0] != self.dim:
            raise DimensionMismatch(f"point has dim {x.shape[0]}, box has {self.dim}")
        return x

    def contains(self, x: np.ndarray, tol: float = 0.0) -> bool:
        x = self._check_dim(x)
        return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))

    def clamp(self, x: np.ndarray) -> np.ndarray:
        return np.clip(self._check_dim(x), self.lo, self.hi)

    def vertices(self) -> list[np.ndarray]:
        """All 2^dim corners, lexicographic with (lo, hi) per coordinate.

        The first vertex is all-lows, the last all-highs. Degenerate
        coordinates yield repeated corners; the count stays 2^dim.
        """
        pairs = [(self.lo[i], self.hi[i]) for i in range(self.dim)]
        return [np.array(picks, dtype=float) for picks in itertools.product(*pairs)]

    def grid(self, density: int) -> np.ndarray:
        """Uniform grid, ``density`` points per axis, shape (density^dim, dim)."""
        if density < 2:
            raise SchemaError("grid density must be at least 2")
        axes = [np.linspace(self.lo[i], self.hi[i], density) for i in range(self.dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.reshape(-1) for m in mesh], axis=-1)

    def sample(self, rng: np.random.Generator, count: int = 1) -> np.ndarray:
        """Uniform samples, shape (count, dim)."""
        return rng.uniform(self.lo, self.hi, size=(count, self.dim))

    def center(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    def widths(self) -> np.ndarray:
        return self.hi - self.lo

    def inflate(self, eps: float):
        """Box grown outward by eps on every face (same concrete type)."""
        return type(self)(self.lo - eps, self.hi + eps)

    def as_dict(self) -> dict:
        return {"lo": self.lo.tolist(), "hi": self.hi.tolist()}

    @classmethod
    def from_dict(cls, d: dict):
        try:
            return cls(np.asarray(d["lo"], dtype=float), np.asarray(d["hi"], dtype=float))
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaError(f"bad box payload: {e}") from e

    @classmethod
    def from_pairs(cls, pairs) -> "Box":
        """Build from [(lo_1, hi_1), ..., (lo_d, hi_d)]."""
        arr = np.asarray(pairs, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise SchemaError(f"expected a list of [lo, hi] pairs, got shape {arr.shape}")
        return cls(arr[:, 0], arr[:, 1])


@dataclass(frozen=True)
class HyperRectangle(Box):
    """Box with nonempty interior: lo < hi componentwise.

    Used for gain constraint sets, where the interior must be a real set for
    the flow to live in.
    """

    def __post_init__(self):
        super().__post_init__()
        if not np.all(self.lo < self.hi):
            raise SchemaError("gain box needs strict lo < hi on every coordinate")
