"""Finite pointed metric spaces and their purely metric quantities.

All quantities here are exact finite minima/maxima computed by exhaustive,
numpy-vectorised scans. Derived reals are compared with an absolute
threshold ``snap = tol_eq * diameter``; Gromov products below it are treated
as exactly zero. That single convention is what keeps segment membership, the
pairwise (Z) margin and the Gromov-infimum criterion mutually consistent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    AsymmetryError,
    BadBaseIndex,
    DegeneratePair,
    DuplicatePoint,
    NonFiniteEntry,
    NonZeroDiagonal,
    NotSquareError,
    TriangleViolation,
)

INF = float("inf")


@dataclass(frozen=True)
class Config:
    """Numerical tolerances.

    ``tol_triangle`` is relative to the largest matrix entry, ``tol_eq`` is
    relative to the diameter, ``tol_margin`` applies to dimensionless ratios.
    """

    tol_triangle: float = 1e-9
    tol_eq: float = 1e-9
    tol_margin: float = 1e-9

    def __post_init__(self):
        for name in ("tol_triangle", "tol_eq", "tol_margin"):
            value = getattr(self, name)
            if not (0.0 < value < 1.0):
                raise ValueError(f"{name} must lie in (0, 1), got {value!r}")
        if self.tol_margin > self.tol_eq:
            # a nonzero Gromov product above the snap threshold must never
            # produce a ratio that counts as zero
            raise ValueError("tol_margin must not exceed tol_eq")

    def as_dict(self) -> dict:
        return {"tol_triangle": self.tol_triangle, "tol_eq": self.tol_eq,
                "tol_margin": self.tol_margin}


DEFAULT_CONFIG = Config()


@dataclass(frozen=True, order=True)
class PairId:
    """An ordered pair of distinct points, stored canonically (lo < hi)."""

    lo: int
    hi: int
    flipped: bool = False

    @classmethod
    def of(cls, x: int, y: int) -> "PairId":
        x, y = int(x), int(y)
        if x == y:
            raise DegeneratePair(f"pair ({x},{y}) is degenerate")
        return cls(x, y, False) if x < y else cls(y, x, True)

    @property
    def x(self) -> int:
        return self.hi if self.flipped else self.lo

    @property
    def y(self) -> int:
        return self.lo if self.flipped else self.hi

    def reversed(self) -> "PairId":
        return PairId(self.lo, self.hi, not self.flipped)

    def as_list(self) -> list[int]:
        return [self.x, self.y]

    def __iter__(self):
        return iter((self.x, self.y))

    def __repr__(self) -> str:
        return f"PairId({self.x}, {self.y})"


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    """A validated pointed metric on ``n`` points. Build with :func:`validate_space`."""

    dist: np.ndarray
    base: int = 0
    labels: tuple[str, ...] | None = None
    coords: np.ndarray | None = None
    name: str = ""
    cfg: Config = field(default=DEFAULT_CONFIG)

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    @property
    def diameter(self) -> float:
        return float(self.dist.max()) if self.n > 1 else 0.0

    @property
    def snap(self) -> float:
        """Absolute threshold below which derived lengths count as zero."""
        return self.cfg.tol_eq * (self.diameter if self.n > 1 else 1.0)

    @property
    def mesh(self) -> float:
        """Largest nearest-neighbour distance: the resolution of the sample."""
        return mesh_size(self)

    def d(self, i: int, j: int) -> float:
        return float(self.dist[i, j])

    def label(self, i: int) -> str:
        return self.labels[i] if self.labels is not None else str(i)

    def index_of(self, label: str) -> int:
        if self.labels is None:
            raise KeyError(label)
        return self.labels.index(label)

    def nearest_index(self, coord: float | Sequence[float]) -> int:
        """Index of the point whose provenance coordinates are closest to ``coord``."""
        if self.coords is None:
            raise ValueError("space carries no coordinates")
        target = np.atleast_1d(np.asarray(coord, dtype=float))
        pts = self.coords.reshape(self.n, -1)
        return int(np.argmin(np.abs(pts - target).sum(axis=1)))

    def with_base(self, base: int) -> "FiniteMetricSpace":
        _check_base(base, self.n)
        return FiniteMetricSpace(self.dist, int(base), self.labels, self.coords,
                                 self.name, self.cfg)

    def pairs(self) -> Iterable[tuple[int, int]]:
        n = self.n
        for x in range(n):
            for y in range(x + 1, n):
                yield x, y


def _check_base(base, n):
    if not isinstance(base, (int, np.integer)) or not (0 <= base < n):
        raise BadBaseIndex(f"base point {base!r} is not an index in [0, {n})")


def validate_space(matrix, base: int = 0, cfg: Config | None = None, *,
                   labels: Sequence[str] | None = None, coords=None,
                   name: str = "") -> FiniteMetricSpace:
    """Check ``matrix`` against the metric axioms and wrap it as a space.

    Raises the most specific :class:`~lipfree.errors.ValidationError`
    subclass; a triangle violation reports the worst triple ``(i, j, k)``
    with ``d(i,k) - d(i,j) - d(j,k)`` as its defect.
    """
    cfg = cfg or DEFAULT_CONFIG
    D = np.array(matrix, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1] or D.shape[0] < 1:
        raise NotSquareError(f"distance matrix must be square and non-empty, got shape {D.shape}")
    n = D.shape[0]
    if not np.all(np.isfinite(D)):
        raise NonFiniteEntry("distance matrix has non-finite entries")
    if np.any(D < 0):
        i, j = np.argwhere(D < 0)[0]
        raise NonFiniteEntry(f"negative distance at ({i},{j})")
    scale = float(D.max()) if n > 1 else 1.0
    tol = cfg.tol_triangle * max(scale, np.finfo(float).tiny)

    diag = np.abs(np.diag(D))
    if np.any(diag > tol):
        raise NonZeroDiagonal(f"d[{int(np.argmax(diag))}][{int(np.argmax(diag))}] is nonzero")
    asym = np.abs(D - D.T)
    if np.any(asym > tol):
        i, j = np.unravel_index(int(np.argmax(asym)), asym.shape)
        raise AsymmetryError(min(i, j), max(i, j), asym[i, j])
    D = (D + D.T) / 2.0
    np.fill_diagonal(D, 0.0)

    off = D + np.diag(np.full(n, np.inf))
    if n > 1 and off.min() <= tol:
        i, j = np.unravel_index(int(np.argmin(off)), off.shape)
        raise DuplicatePoint(min(i, j), max(i, j))

    worst, where = triangle_defect(D)
    if worst > tol:
        raise TriangleViolation(*where, worst)

    _check_base(base, n)
    if labels is not None:
        labels = tuple(str(s) for s in labels)
        if len(labels) != n:
            raise NotSquareError(f"{len(labels)} labels for {n} points")
    if coords is not None:
        coords = np.array(coords, dtype=float).reshape(n, -1)
        coords.setflags(write=False)
    D.setflags(write=False)
    return FiniteMetricSpace(D, int(base), labels, coords, name, cfg)


def triangle_defect(D: np.ndarray) -> tuple[float, tuple[int, int, int]]:
    """Largest ``d(i,k) - d(i,j) - d(j,k)`` over all triples, with its argmax."""
    n = D.shape[0]
    worst, where = -INF, (0, 0, 0)
    for j in range(n):
        excess = D - (D[:, j, None] + D[None, j, :])
        flat = int(np.argmax(excess))
        if excess.flat[flat] > worst:
            i, k = divmod(flat, n)
            worst, where = float(excess.flat[flat]), (i, j, k)
    return worst, where


def mesh_size(M: FiniteMetricSpace) -> float:
    if M.n < 2:
        return 0.0
    off = M.dist + np.diag(np.full(M.n, np.inf))
    return float(off.min(axis=1).max())


def is_resolved(M: FiniteMetricSpace, x: int, y: int) -> bool:
    """True when the pair is separated by more than the sample's mesh."""
    return M.dist[x, y] > mesh_size(M) * (1.0 + M.cfg.tol_eq)


def _check_pair(M: FiniteMetricSpace, x: int, y: int) -> None:
    n = M.n
    for i in (x, y):
        if not (0 <= i < n):
            raise IndexError(f"point index {i} out of range for n={n}")
    if x == y:
        raise DegeneratePair(f"pair ({x},{y}) is degenerate")


# -- Gromov products -----------------------------------------------------------


def _snap(values: np.ndarray, snap: float) -> np.ndarray:
    return np.where(values <= snap, 0.0, values)


def gromov_rows(M: FiniteMetricSpace, x: int, ys) -> np.ndarray:
    """``G[k, z] = (x, ys[k])_z`` for every point ``z``, snapped at ``M.snap``."""
    D = M.dist
    ys = np.atleast_1d(np.asarray(ys, dtype=int))
    G = 0.5 * (D[x][None, :] + D[ys] - D[x, ys][:, None])
    return _snap(G, M.snap)


def gromov_product(M: FiniteMetricSpace, x: int, y: int, z: int) -> float:
    """``(x, y)_z = (d(x,z) + d(y,z) - d(x,y)) / 2``; rounding noise is clamped to 0."""
    for i in (x, y, z):
        if not (0 <= i < M.n):
            raise IndexError(f"point index {i} out of range for n={M.n}")
    D = M.dist
    g = 0.5 * (D[x, z] + D[y, z] - D[x, y])
    return 0.0 if g <= M.snap else float(g)


# -- midpoints and segments --------------------------------------------------------


def midpoint_set(M: FiniteMetricSpace, x: int, y: int, delta: float) -> set[int]:
    """Points ``z`` with ``max(d(x,z), d(y,z)) <= (1 + delta)/2 * d(x,y)``."""
    _check_pair(M, x, y)
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    D = M.dist
    radius = 0.5 * (1.0 + delta) * D[x, y] + M.snap
    far = np.maximum(D[x], D[y])
    return set(np.flatnonzero(far <= radius).tolist())


def _midpoint_excess(M: FiniteMetricSpace, x: int, ys: np.ndarray) -> np.ndarray:
    D = M.dist
    best = np.maximum(D[x][None, :], D[ys]).min(axis=1)
    excess = best - 0.5 * D[x, ys]
    return np.where(excess <= M.snap, 0.0, excess)


def midpoint_defect(M: FiniteMetricSpace, x: int, y: int) -> float:
    """``min_z max(d(x,z), d(z,y)) / (d(x,y)/2) - 1``; zero iff a metric midpoint exists."""
    _check_pair(M, x, y)
    excess = _midpoint_excess(M, x, np.array([y]))[0]
    return float(excess / (0.5 * M.dist[x, y]))


def metric_segment(M: FiniteMetricSpace, x: int, y: int) -> set[int]:
    """``[x, y] = {z : d(x,z) + d(z,y) = d(x,y)}`` up to the snap threshold."""
    _check_pair(M, x, y)
    G = gromov_rows(M, x, [y])[0]
    return set(np.flatnonzero(G == 0.0).tolist())


def segment_sizes(M: FiniteMetricSpace, x: int, ys) -> np.ndarray:
    return (gromov_rows(M, x, ys) == 0.0).sum(axis=1)


def z_ratio_rows(M: FiniteMetricSpace, x: int, ys) -> np.ndarray:
    """``(x,y)_z / min(d(x,z), d(y,z))`` for each ``y`` in ``ys`` and every ``z``;
    ``+inf`` at ``z in {x, y}``."""
    ys = np.atleast_1d(np.asarray(ys, dtype=int))
    D = M.dist
    G = gromov_rows(M, x, ys)
    denom = np.minimum(D[x][None, :], D[ys])
    with np.errstate(divide="ignore", invalid="ignore"):
        R = G / denom
    R[:, x] = INF
    R[np.arange(len(ys)), ys] = INF
    return R


def pair_z_margin(M: FiniteMetricSpace, x: int, y: int) -> float:
    """How far the pair is from the pairwise property (Z).

    ``min over z not in {x,y} of (x,y)_z / min(d(x,z), d(y,z))``; ``+inf``
    for a two-point space. Zero exactly when the metric segment ``[x,y]``
    contains a third point.
    """
    _check_pair(M, x, y)
    return float(z_ratio_rows(M, x, [y])[0].min())


# -- whole-space diagnostics -------------------------------------------------------


@dataclass(frozen=True)
class SpaceDiagnostics:
    """Aggregates over all pairs.

    ``length_defect`` is the worst absolute midpoint excess
    ``min_z max(d(x,z), d(z,y)) - d(x,y)/2`` over resolved pairs (pairs farther
    apart than the mesh); for a sample of a length space at mesh ``h`` it is
    ``O(h)``. This is a diagnostic, never a verdict.
    """

    n: int
    diameter: float
    mesh: float
    length_defect: float
    length_defect_pair: PairId | None
    max_midpoint_defect: float
    z_defect: float
    z_defect_pair: PairId | None
    trivial_segment_pairs: list[PairId]
    mesh_pair_count: int
    mesh_trivial_count: int

    def as_dict(self) -> dict:
        def pid(p):
            return None if p is None else p.as_list()
        return {
            "n": self.n,
            "diameter": self.diameter,
            "mesh": self.mesh,
            "length_defect": self.length_defect,
            "length_defect_pair": pid(self.length_defect_pair),
            "max_midpoint_defect": self.max_midpoint_defect,
            "z_defect": self.z_defect,
            "z_defect_pair": pid(self.z_defect_pair),
            "trivial_segment_pairs": [p.as_list() for p in self.trivial_segment_pairs],
            "mesh_pair_count": self.mesh_pair_count,
            "mesh_trivial_count": self.mesh_trivial_count,
        }


def space_diagnostics(M: FiniteMetricSpace) -> SpaceDiagnostics:
    """Length and property-(Z) defects of the sample.

    Pairs at mesh distance are reported only as counts: in any finite space a
    closest pair has a trivial segment, so they carry no information about
    the space being sampled.
    """
    n = M.n
    h = mesh_size(M)
    cut = h * (1.0 + M.cfg.tol_eq)
    length, length_pair = 0.0, None
    mid_rel = 0.0
    zdef, zpair = 0.0, None
    trivial: list[PairId] = []
    mesh_pairs = mesh_trivial = 0
    for x in range(n - 1):
        ys = np.arange(x + 1, n)
        d = M.dist[x, ys]
        resolved = d > cut
        excess = _midpoint_excess(M, x, ys)
        zmarg = z_ratio_rows(M, x, ys).min(axis=1)
        seg = segment_sizes(M, x, ys)
        mesh_pairs += int((~resolved).sum())
        mesh_trivial += int(((~resolved) & (seg <= 2)).sum())
        for k in np.flatnonzero(resolved):
            y = int(ys[k])
            if excess[k] > length:
                length, length_pair = float(excess[k]), PairId.of(x, y)
            mid_rel = max(mid_rel, float(excess[k] / (0.5 * d[k])))
            if np.isfinite(zmarg[k]) and zmarg[k] > zdef:
                zdef, zpair = float(zmarg[k]), PairId.of(x, y)
            if seg[k] <= 2:
                trivial.append(PairId.of(x, y))
    return SpaceDiagnostics(n, M.diameter, h, length, length_pair, mid_rel, zdef, zpair,
                            trivial, mesh_pairs, mesh_trivial)
