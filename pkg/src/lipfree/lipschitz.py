"""Lipschitz functions on finite spaces and the explicit constructions built from them."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    BallsOverlap,
    DegeneratePair,
    LipFreeError,
    NormOverflow,
    NotLLipschitzOnSubset,
    PairConditionViolated,
    PointsInSubset,
    PrescriptionNotLipschitz,
    SingletonSpace,
)
from .metric import FiniteMetricSpace, PairId, _check_pair, pair_z_margin

_CHUNK = 256


def _slope_rows(v, D, idx, rows):
    diff = np.abs(v[rows, None] - v[None, :])
    if idx is None:
        dist = D[rows[0]:rows[-1] + 1]
    else:
        dist = D[np.ix_(idx[rows], idx)]
    with np.errstate(divide="ignore", invalid="ignore"):
        S = diff / dist
    S[np.arange(len(v))[None, :] <= rows[:, None]] = -np.inf
    return S


def _max_slope(values: np.ndarray, D: np.ndarray, idx: np.ndarray | None = None,
               rtol: float = 0.0):
    """Largest ``|v_i - v_j| / d(i, j)`` over ``i < j`` (restricted to ``idx``).

    Returns ``(slope, i, j)``. The pair is the lexicographically smallest
    one whose slope is within a relative ``rtol`` of the maximum, so
    rounding noise does not decide between pairs of equal slope.
    """
    v = values if idx is None else values[idx]
    m = len(v)
    chunks = [np.arange(s, min(s + _CHUNK, m - 1)) for s in range(0, m - 1, _CHUNK)]
    blocks = {}
    tops = []
    for k, rows in enumerate(chunks):
        S = _slope_rows(v, D, idx, rows)
        tops.append(float(S.max()))
        if len(chunks) == 1:
            blocks[k] = S
    best = max(tops)
    cut = best * (1.0 - rtol)
    for k, (rows, top) in enumerate(zip(chunks, tops)):
        if top < cut:
            continue
        S = blocks[k] if k in blocks else _slope_rows(v, D, idx, rows)
        hit = np.flatnonzero(S.ravel() >= cut)
        r, c = divmod(int(hit[0]), m)
        pick = (int(rows[r]), c) if idx is None else (int(idx[rows[r]]), int(idx[c]))
        return best, pick[0], pick[1]
    return best, -1, -1


@dataclass(frozen=True)
class SlopeWitness:
    pair: PairId
    slope: float


@dataclass(frozen=True, eq=False)
class LipschitzFunction:
    """Values of a real function on the points of ``space``.

    The Lipschitz norm and an attaining pair are computed once at
    construction. ``flags`` lists points a construction had to fill by
    convention (see :func:`peaking_candidate`).
    """

    space: FiniteMetricSpace
    values: np.ndarray
    flags: tuple[int, ...] = ()
    cached_norm: float = field(init=False)
    witness: SlopeWitness | None = field(init=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float).reshape(-1)
        if vals.shape[0] != self.space.n:
            raise ValueError(f"{vals.shape[0]} values for a space of {self.space.n} points")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if self.space.n < 2:
            object.__setattr__(self, "cached_norm", 0.0)
            object.__setattr__(self, "witness", None)
            return
        s, i, j = _max_slope(vals, self.space.dist, rtol=self.space.cfg.tol_eq)
        pair = PairId.of(i, j)
        if vals[i] < vals[j]:
            pair = pair.reversed()
        object.__setattr__(self, "cached_norm", s)
        object.__setattr__(self, "witness", SlopeWitness(pair, abs(self.slope(i, j))))

    @property
    def norm(self) -> float:
        return self.cached_norm

    def __call__(self, i: int) -> float:
        return float(self.values[i])

    def slope(self, u: int, v: int) -> float:
        return float((self.values[u] - self.values[v]) / self.space.dist[u, v])

    def rebased(self) -> "LipschitzFunction":
        """The same function shifted so it vanishes at the base point."""
        return LipschitzFunction(self.space, self.values - self.values[self.space.base],
                                 self.flags)

    def is_base_normalized(self) -> bool:
        return abs(self.values[self.space.base]) <= self.space.snap

    def scaled(self, c: float) -> "LipschitzFunction":
        return LipschitzFunction(self.space, c * self.values, self.flags)

    def __add__(self, other: "LipschitzFunction") -> "LipschitzFunction":
        return LipschitzFunction(self.space, self.values + other.values)

    def __sub__(self, other: "LipschitzFunction") -> "LipschitzFunction":
        return LipschitzFunction(self.space, self.values - other.values)


def lip_norm(f: LipschitzFunction) -> tuple[float, SlopeWitness]:
    """Exact Lipschitz norm with an attaining pair, oriented so its slope is nonnegative."""
    if f.space.n < 2:
        raise SingletonSpace("the Lipschitz norm needs at least two points")
    return f.cached_norm, f.witness


def distance_to(M: FiniteMetricSpace, p: int) -> LipschitzFunction:
    return LipschitzFunction(M, M.dist[p].copy())


# -- extensions ------------------------------------------------------------------


def _prepare_subset(M: FiniteMetricSpace, N, g) -> tuple[np.ndarray, np.ndarray]:
    N = np.asarray(N, dtype=int).reshape(-1)
    g = np.asarray(g, dtype=float).reshape(-1)
    if N.size == 0:
        raise ValueError("subset must be nonempty")
    if N.shape != g.shape:
        raise ValueError(f"{g.size} values for a subset of {N.size} points")
    if np.any((N < 0) | (N >= M.n)):
        raise IndexError("subset index out of range")
    if len(set(N.tolist())) != N.size:
        raise ValueError("subset has repeated indices")
    return N, g


def _check_feasible(M: FiniteMetricSpace, N: np.ndarray, g: np.ndarray, L: float) -> None:
    if N.size < 2:
        return
    full = np.zeros(M.n)
    full[N] = g
    s, i, j = _max_slope(full, M.dist, N)
    if s > L * (1.0 + M.cfg.tol_eq):
        raise NotLLipschitzOnSubset(i, j, s, L)


def mcshane_extend(M: FiniteMetricSpace, N, g, L: float) -> LipschitzFunction:
    """Largest ``L``-Lipschitz extension: ``u -> min over x in N of g(x) + L d(x,u)``."""
    N, g = _prepare_subset(M, N, g)
    _check_feasible(M, N, g, L)
    vals = (g[:, None] + L * M.dist[N]).min(axis=0)
    vals[N] = g
    return LipschitzFunction(M, vals)


def whitney_extend(M: FiniteMetricSpace, N, g, L: float) -> LipschitzFunction:
    """Smallest ``L``-Lipschitz extension: ``u -> max over x in N of g(x) - L d(x,u)``."""
    N, g = _prepare_subset(M, N, g)
    _check_feasible(M, N, g, L)
    vals = (g[:, None] - L * M.dist[N]).max(axis=0)
    vals[N] = g
    return LipschitzFunction(M, vals)


def daugavet_extension(M: FiniteMetricSpace, N, f, u: int, v: int,
                       eps: float) -> LipschitzFunction:
    """Extend a 1-Lipschitz ``f`` on ``N`` to a ``(1+eps)``-Lipschitz function
    with ``F(u) - F(v) >= d(u, v)``.

    ``F(u)`` is the McShane value over ``N``, ``F(v)`` the Whitney value over
    ``N + {u}``, both with constant ``1 + eps``; the result is the McShane
    extension of those prescriptions. Requires
    ``(d(x,y) + d(u,v)) / (1+eps) <= d(x,u) + d(y,v)`` for all ``x, y`` in ``N``.
    """
    N, f = _prepare_subset(M, N, f)
    _check_pair(M, u, v)
    if u in N or v in N:
        raise PointsInSubset(f"u={u} and v={v} must lie outside the subset")
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    _check_feasible(M, N, f, 1.0)
    D = M.dist
    L = 1.0 + eps
    lhs = (D[np.ix_(N, N)] + D[u, v]) / L
    rhs = D[N, u][:, None] + D[N, v][None, :]
    gap = lhs - rhs
    k = int(np.argmax(gap))
    if gap.flat[k] > M.snap:
        a, b = divmod(k, N.size)
        raise PairConditionViolated(N[a], N[b], lhs.flat[k], rhs.flat[k])
    fu = float((f + L * D[N, u]).min())
    ext = np.append(f, fu)
    fv = float((ext - L * D[np.append(N, u), v]).max())
    return mcshane_extend(M, np.append(N, [u, v]), np.append(ext, fv), L)


# -- explicit functions ------------------------------------------------------------


def f_xy(M: FiniteMetricSpace, x: int, y: int, rebase: bool = False) -> LipschitzFunction:
    """``t -> d(x,y)/2 * (d(t,y) - d(t,x)) / (d(t,y) + d(t,x))``.

    Takes the value ``d(x,y)/2`` at ``x`` and ``-d(x,y)/2`` at ``y`` and is
    1-Lipschitz.
    """
    _check_pair(M, x, y)
    D = M.dist
    vals = 0.5 * D[x, y] * (D[y] - D[x]) / (D[y] + D[x])
    f = LipschitzFunction(M, vals)
    return f.rebased() if rebase else f


def peaking_candidate(M: FiniteMetricSpace, x: int, y: int, eps1: float) -> LipschitzFunction:
    """Candidate peaking function at ``(x, y)``: ``g = (f + f_xy) / 2``.

    ``f`` is the two-branch tent function

    * ``max(d/2 - (1-eps1) d(z,x), 0)`` where ``d(z,y) >= d(z,x)`` and
      ``d(z,y) + (1-2 eps1) d(z,x) >= d``,
    * ``-max(d/2 - (1-eps1) d(z,y), 0)`` where ``d(z,x) >= d(z,y)`` and
      ``d(z,x) + (1-2 eps1) d(z,y) >= d``,

    with ``d = d(x,y)``. Points satisfying neither branch get ``f = 0`` and
    are listed in ``flags``; this only happens when the pair has property (Z)
    to within ``eps1``, and then the norm check usually fails.

    Raises :class:`NormOverflow` if ``||g||_L > 1`` beyond tolerance.
    """
    _check_pair(M, x, y)
    if not (0.0 < eps1 < 0.5):
        raise ValueError("eps1 must lie in (0, 1/2)")
    margin = pair_z_margin(M, x, y)
    if not (eps1 / (1.0 - eps1) < margin / 4.0):
        warnings.warn(
            f"eps1={eps1} does not satisfy eps1/(1-eps1) < margin/4 for margin {margin:.6g}",
            stacklevel=2,
        )
    D = M.dist
    d = D[x, y]
    dx, dy = D[x], D[y]
    first = (dy >= dx) & (dy + (1.0 - 2.0 * eps1) * dx >= d)
    second = (dx >= dy) & (dx + (1.0 - 2.0 * eps1) * dy >= d)
    tent = np.zeros(M.n)
    tent[second] = -np.maximum(0.5 * d - (1.0 - eps1) * dy[second], 0.0)
    # where both hold d(z,x) = d(z,y) and both branches give 0
    tent[first] = np.maximum(0.5 * d - (1.0 - eps1) * dx[first], 0.0)
    flagged = tuple(np.flatnonzero(~(first | second)).tolist())
    g = LipschitzFunction(M, 0.5 * (tent + f_xy(M, x, y).values), flagged)
    if g.norm > 1.0 + M.cfg.tol_eq:
        raise NormOverflow(g.norm, list(flagged))
    return g


# -- the averaging family -----------------------------------------------------------


@dataclass(frozen=True)
class AveragingResult:
    functions: list[LipschitzFunction]
    defect: float
    bound: float
    max_disagreement: int
    disagreement_counts: np.ndarray

    @property
    def slack(self) -> float:
        return self.bound - self.defect


def _ball(M: FiniteMetricSpace, center: int, r: float) -> np.ndarray:
    return M.dist[center] < r


def averaging_family(M: FiniteMetricSpace, f: LipschitzFunction, g: LipschitzFunction,
                     pairs: Sequence[tuple[int, int]], r: float,
                     eps: float) -> AveragingResult:
    """Build ``f_1..f_n`` with ``f_i = f`` on ``{x_i, y_i}`` and ``f_i = g``
    outside ``B(x_i, r)``, each the McShane ``(1+eps)``-extension of that
    prescription, and measure ``||g - mean(f_i)||_L`` against ``(4 + 2 eps)/n``.
    """
    n = len(pairs)
    if n == 0:
        raise ValueError("need at least one pair")
    L = 1.0 + eps
    balls = []
    for i, (xi, yi) in enumerate(pairs):
        _check_pair(M, xi, yi)
        ball = _ball(M, xi, r)
        if not ball[yi]:
            raise LipFreeError(f"y_{i}={yi} is not inside B(x_{i}, r)")
        for j, other in enumerate(balls):
            if np.any(ball & other):
                raise BallsOverlap(j, i)
        balls.append(ball)

    functions = []
    for i, ((xi, yi), ball) in enumerate(zip(pairs, balls)):
        outside = np.flatnonzero(~ball)
        dom = np.concatenate(([xi, yi], outside))
        vals = np.concatenate(([f.values[xi], f.values[yi]], g.values[outside]))
        try:
            functions.append(mcshane_extend(M, dom, vals, L))
        except NotLLipschitzOnSubset as exc:
            raise PrescriptionNotLipschitz(i, exc.x, exc.y, exc.slope) from None

    stack = np.stack([fi.values for fi in functions])
    mean = stack.mean(axis=0)
    defect = LipschitzFunction(M, g.values - mean).norm
    counts = (np.abs(stack - g.values[None, :]) > M.snap).sum(axis=0)
    return AveragingResult(functions, defect, (4.0 + 2.0 * eps) / n,
                           int(counts.max()), counts)


def spread_slope_pairs(M: FiniteMetricSpace, f: LipschitzFunction, count: int, r: float,
                       eps: float) -> list[tuple[int, int]]:
    """Greedily pick ``count`` pairs with slope above ``(1 - eps) ||f||_L``,
    ``d(x_i, y_i) < r`` and pairwise disjoint balls ``B(x_i, r)``.

    Returns fewer pairs when the space does not have room for them.
    """
    D = M.dist
    thr = (1.0 - eps) * f.norm
    cand = []
    for u in range(M.n):
        with np.errstate(divide="ignore", invalid="ignore"):
            s = (f.values[u] - f.values) / D[u]
        ok = (D[u] < r) & (s > thr)
        ok[u] = False
        for v in np.flatnonzero(ok):
            cand.append((-s[v], D[u, v], u, int(v)))
    cand.sort()
    chosen, balls = [], []
    for _, _, u, v in cand:
        ball = _ball(M, u, r)
        if any(np.any(ball & b) for b in balls):
            continue
        chosen.append((u, v))
        balls.append(ball)
        if len(chosen) == count:
            break
    return chosen
