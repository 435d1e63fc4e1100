"""Regions, point patterns, bin grids and binning.

Points are stored as numpy arrays: shape ``(m,)`` on an interval and
``(m, 2)`` on a rectangle. Grid cells are half-open ``[lo, hi)`` except the
last cell along each axis, which is closed, so every point of the (closed)
region falls in exactly one cell.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidArgumentError

__all__ = [
    "Region",
    "PointPattern",
    "PointPatternSeries",
    "BinGrid",
    "BinnedCountSeries",
    "make_bin_grid",
    "bin_counts",
    "bin_series",
    "restrict",
]


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Region:
    """Axis-aligned bounded region: an interval (dim 1) or a rectangle (dim 2)."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != len(hi) or len(lo) not in (1, 2):
            raise InvalidArgumentError("region must have 1 or 2 axes")
        for a, b in zip(lo, hi):
            if not (np.isfinite(a) and np.isfinite(b)):
                raise InvalidArgumentError("region bounds must be finite")
            if not a < b:
                raise InvalidArgumentError(f"region bound lo={a} must be < hi={b}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def interval(cls, lo=0.0, hi=1.0) -> Region:
        return cls((lo,), (hi,))

    @classmethod
    def rectangle(cls, xlo=0.0, xhi=1.0, ylo=0.0, yhi=1.0) -> Region:
        return cls((xlo, ylo), (xhi, yhi))

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def kind(self) -> str:
        return "interval" if self.dim == 1 else "rectangle"

    @property
    def measure(self) -> float:
        return float(np.prod(np.subtract(self.hi, self.lo)))

    def contains(self, points) -> np.ndarray:
        """Boolean mask of points inside the closed region."""
        pts = _as_points(points, self.dim)
        if self.dim == 1:
            return (pts >= self.lo[0]) & (pts <= self.hi[0])
        return np.all((pts >= self.lo) & (pts <= self.hi), axis=1)

    def includes(self, other: Region) -> bool:
        """True if ``other`` lies inside this region."""
        return other.dim == self.dim and all(
            a <= c and d <= b for a, b, c, d in zip(self.lo, self.hi, other.lo, other.hi)
        )


def _as_points(points, dim):
    pts = np.asarray(points, dtype=float)
    if dim == 1:
        if pts.ndim == 2 and pts.shape[1] == 1:
            pts = pts[:, 0]
        if pts.size == 0:
            return pts.reshape(0)
        if pts.ndim != 1:
            raise InvalidArgumentError("interval points must be scalars")
    else:
        if pts.size == 0:
            return pts.reshape(0, 2)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise InvalidArgumentError("rectangle points must be (x, y) pairs")
    return pts


@dataclass(frozen=True, eq=False)
class PointPattern:
    """A finite set of points observed in ``region``."""

    points: np.ndarray
    region: Region

    def __post_init__(self):
        pts = _as_points(self.points, self.region.dim)
        if not np.all(np.isfinite(pts)):
            raise InvalidArgumentError("point coordinates must be finite")
        if not np.all(self.region.contains(pts)):
            raise InvalidArgumentError("pattern has points outside its region")
        object.__setattr__(self, "points", _frozen(pts))

    def __len__(self):
        return len(self.points)

    def __eq__(self, other):
        if not isinstance(other, PointPattern):
            return NotImplemented
        return self.region == other.region and np.array_equal(self.points, other.points)


@dataclass(frozen=True, eq=False)
class PointPatternSeries:
    """Patterns ``X_1..X_n`` on one shared region."""

    patterns: tuple[PointPattern, ...]

    def __post_init__(self):
        pats = tuple(self.patterns)
        if not pats:
            raise InvalidArgumentError("a series needs at least one pattern")
        region = pats[0].region
        if any(p.region != region for p in pats):
            raise InvalidArgumentError("all patterns in a series must share one region")
        object.__setattr__(self, "patterns", pats)

    @classmethod
    def from_points(cls, point_lists: Sequence, region: Region) -> PointPatternSeries:
        return cls(tuple(PointPattern(p, region) for p in point_lists))

    @property
    def region(self) -> Region:
        return self.patterns[0].region

    @property
    def n(self) -> int:
        return len(self.patterns)

    def __len__(self):
        return len(self.patterns)

    def __getitem__(self, t):
        return self.patterns[t]

    def __iter__(self):
        return iter(self.patterns)

    def __eq__(self, other):
        if not isinstance(other, PointPatternSeries):
            return NotImplemented
        return len(self) == len(other) and all(
            a == b for a, b in zip(self.patterns, other.patterns)
        )


@dataclass(frozen=True)
class BinGrid:
    """Equal-measure partition of ``region``.

    ``shape`` is ``(d,)`` for an interval and ``(rows, cols)`` for a
    rectangle. Rows split the y axis and columns the x axis; cells are numbered
    row-major starting from the lower-left corner.
    """

    region: Region
    shape: tuple[int, ...]

    def __post_init__(self):
        shape = tuple(int(v) for v in self.shape)
        if len(shape) != self.region.dim:
            raise InvalidArgumentError("grid shape does not match region dimension")
        if any(v < 1 for v in shape):
            raise InvalidArgumentError("bin counts per axis must be positive")
        object.__setattr__(self, "shape", shape)

    @property
    def d(self) -> int:
        return int(np.prod(self.shape))

    def edges(self, axis: int) -> np.ndarray:
        """Cell boundaries along ``axis`` (0 = x, 1 = y)."""
        m = self.shape[0] if self.region.dim == 1 else (self.shape[1], self.shape[0])[axis]
        lo, hi = self.region.lo[axis], self.region.hi[axis]
        return lo + (hi - lo) * np.arange(m + 1) / m

    def cells(self) -> list[Region]:
        """Cell regions in index order."""
        if self.region.dim == 1:
            e = self.edges(0)
            return [Region.interval(e[j], e[j + 1]) for j in range(self.d)]
        ex, ey = self.edges(0), self.edges(1)
        rows, cols = self.shape
        return [
            Region.rectangle(ex[c], ex[c + 1], ey[r], ey[r + 1])
            for r in range(rows)
            for c in range(cols)
        ]

    @property
    def cell_measure(self) -> float:
        return self.region.measure / self.d

    def locate(self, points) -> np.ndarray:
        """Cell index of each point (points assumed inside the region)."""
        pts = _as_points(points, self.region.dim)
        if self.region.dim == 1:
            return np.searchsorted(self.edges(0)[1:-1], pts, side="right")
        col = np.searchsorted(self.edges(0)[1:-1], pts[:, 0], side="right")
        row = np.searchsorted(self.edges(1)[1:-1], pts[:, 1], side="right")
        return row * self.shape[1] + col


@dataclass(frozen=True, eq=False)
class BinnedCountSeries:
    """The ``n x d`` count matrix ``Y`` with the grid that produced it."""

    counts: np.ndarray
    grid: BinGrid

    def __post_init__(self):
        y = np.asarray(self.counts)
        if y.ndim != 2 or y.shape[1] != self.grid.d:
            raise InvalidArgumentError("counts must be an n x d matrix")
        if np.any(y < 0):
            raise InvalidArgumentError("counts must be nonnegative")
        object.__setattr__(self, "counts", _frozen(y, dtype=np.int64))

    @property
    def n(self) -> int:
        return self.counts.shape[0]

    @property
    def d(self) -> int:
        return self.counts.shape[1]


def make_bin_grid(region: Region, d: int | None = None, *, rows=None, cols=None) -> BinGrid:
    """Equal-measure grid with ``d`` cells (interval) or ``rows x cols`` cells.

    For a rectangle, passing only ``d`` requires ``d`` to be a perfect square.
    """
    if region.dim == 1:
        if d is None or rows is not None or cols is not None:
            raise InvalidArgumentError("an interval grid is specified by d only")
        if int(d) < 1:
            raise InvalidArgumentError(f"d must be positive, got {d}")
        return BinGrid(region, (int(d),))
    if rows is None and cols is None:
        if d is None:
            raise InvalidArgumentError("a rectangle grid needs rows and cols")
        r = int(round(np.sqrt(d)))
        if d < 1 or r * r != d:
            raise InvalidArgumentError(f"d={d} is not a positive perfect square; pass rows/cols")
        rows = cols = r
    if rows is None or cols is None or int(rows) < 1 or int(cols) < 1:
        raise InvalidArgumentError("rows and cols must both be positive")
    return BinGrid(region, (int(rows), int(cols)))


def bin_counts(pattern: PointPattern, grid: BinGrid) -> np.ndarray:
    if pattern.region != grid.region:
        raise InvalidArgumentError("pattern region does not match grid region")
    idx = grid.locate(pattern.points)
    return np.bincount(idx, minlength=grid.d).astype(np.int64)


def bin_series(series: PointPatternSeries, grid: BinGrid) -> BinnedCountSeries:
    if series.region != grid.region:
        raise InvalidArgumentError("series region does not match grid region")
    y = np.zeros((series.n, grid.d), dtype=np.int64)
    for t, pattern in enumerate(series):
        y[t] = bin_counts(pattern, grid)
    return BinnedCountSeries(y, grid)


def restrict(pattern: PointPattern, sub: Region) -> PointPattern:
    if not pattern.region.includes(sub):
        raise InvalidArgumentError("restriction region is not inside the pattern region")
    keep = sub.contains(pattern.points)
    return PointPattern(pattern.points[keep], sub)
