"""Executable forms of the Daugavet and strong-exposure characterisations.

Every search here is exhaustive over the finite space. Results that speak
about the Daugavet property of the space being sampled are evidence at the
sample's mesh, never proofs.
"""

from __future__ import annotations

import dataclasses
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    CriteriaDisagreement,
    NotNormOne,
    NotSlopeOneAtPair,
    PreconditionSlope,
    ScaleBelowMesh,
)
from .free_space import Chain, kr_norm_primal, molecule
from .lipschitz import LipschitzFunction, f_xy
from .metric import (
    INF,
    Config,
    FiniteMetricSpace,
    PairId,
    _check_pair,
    gromov_rows,
    mesh_size,
    segment_sizes,
    z_ratio_rows,
)


def _with_cfg(M: FiniteMetricSpace, cfg: Config | None) -> FiniteMetricSpace:
    return M if cfg is None or cfg == M.cfg else dataclasses.replace(M, cfg=cfg)


def threads_from_env() -> int:
    try:
        return max(1, int(os.environ.get("LIPFREE_THREADS", "1")))
    except ValueError:
        return 1


# -- Gromov-product criterion ----------------------------------------------------


def _ball_cut(M: FiniteMetricSpace) -> float:
    return max(M.cfg.tol_eq, M.cfg.tol_triangle) * M.diameter


def _gromov_inf_rows(M: FiniteMetricSpace, x: int, ys: np.ndarray,
                     eps_ball: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Both one-sided infima for the pairs ``(x, y)``, ``y`` in ``ys``.

    First: ``inf over u not in {x} + B(y, eps) of (y,x)_u / (u,y)_x``.
    Second: ``inf over u not in {y} + B(x, eps) of (y,x)_u / (u,x)_y``.
    ``alpha / 0 = +inf``; an empty domain gives ``+inf``.
    """
    D = M.dist
    snap = M.snap
    cut = _ball_cut(M)
    num = gromov_rows(M, x, ys)
    dxy = D[x, ys][:, None]
    den_x = 0.5 * (D[x][None, :] + dxy - D[ys])
    den_y = 0.5 * (D[ys] + dxy - D[x][None, :])
    den_x = np.where(den_x <= snap, 0.0, den_x)
    den_y = np.where(den_y <= snap, 0.0, den_y)
    with np.errstate(divide="ignore", invalid="ignore"):
        r_x = np.where(den_x > 0, num / den_x, INF)
        r_y = np.where(den_y > 0, num / den_y, INF)
    eps = eps_ball[:, None]
    dom_x = D[ys] >= eps - cut
    dom_x[:, x] = False
    dom_y = np.broadcast_to(D[x][None, :] >= eps - cut, r_y.shape).copy()
    dom_y[np.arange(len(ys)), ys] = False
    inf_x = np.where(dom_x, r_x, INF).min(axis=1)
    inf_y = np.where(dom_y, r_y, INF).min(axis=1)
    return inf_x, inf_y


def gromov_infimum(M: FiniteMetricSpace, x: int, y: int, eps_ball: float) -> float:
    """``inf over u not in {x} + B(y, eps_ball) of (y,x)_u / (u,y)_x``.

    Uses ``alpha / 0 = +inf`` and returns ``+inf`` when the domain is empty.
    Swap ``x`` and ``y`` for the other one-sided infimum.
    """
    _check_pair(M, x, y)
    if not eps_ball > 0:
        raise ValueError("eps_ball must be positive")
    inf_x, _ = _gromov_inf_rows(M, x, np.array([y]), np.array([float(eps_ball)]))
    return float(inf_x[0])


# -- pair classification ------------------------------------------------------------


class Verdict(str, Enum):
    STRONGLY_EXPOSED_CANDIDATE = "StronglyExposedCandidate"
    Z_WITNESSED = "ZWitnessed"


@dataclass(frozen=True)
class PairClassification:
    pair: PairId
    z_margin: float
    gromov_inf_xy: float
    gromov_inf_yx: float
    segment_size: int
    verdict: Verdict
    resolved: bool = True

    def as_dict(self) -> dict:
        return {
            "pair": self.pair.as_list(),
            "z_margin": self.z_margin,
            "gromov_inf_xy": self.gromov_inf_xy,
            "gromov_inf_yx": self.gromov_inf_yx,
            "segment_size": self.segment_size,
            "verdict": self.verdict.value,
            "resolved": self.resolved,
        }


def _classify_rows(M: FiniteMetricSpace, x: int, ys: np.ndarray,
                   mesh: float) -> list[PairClassification]:
    tol = M.cfg.tol_margin
    D = M.dist
    zm = z_ratio_rows(M, x, ys).min(axis=1)
    inf_x, inf_y = _gromov_inf_rows(M, x, ys, 0.5 * D[x, ys])
    seg = segment_sizes(M, x, ys)
    out = []
    cut = mesh * (1.0 + M.cfg.tol_eq)
    for k, y in enumerate(ys.tolist()):
        by_z = zm[k] <= tol
        by_gromov = min(inf_x[k], inf_y[k]) <= tol
        by_segment = seg[k] > 2
        if not (by_z == by_gromov == by_segment):
            raise CriteriaDisagreement(x, y, zm[k], inf_x[k], inf_y[k], seg[k])
        verdict = Verdict.Z_WITNESSED if by_z else Verdict.STRONGLY_EXPOSED_CANDIDATE
        out.append(PairClassification(PairId.of(x, y), float(zm[k]), float(inf_x[k]),
                                      float(inf_y[k]), int(seg[k]), verdict,
                                      bool(D[x, y] > cut)))
    return out


def classify_pair(M: FiniteMetricSpace, x: int, y: int,
                  cfg: Config | None = None) -> PairClassification:
    """Is the molecule of ``(x, y)`` a candidate strongly exposed point?

    Runs three criteria and insists they agree: the pairwise (Z) margin is
    zero, one of the two Gromov-product infima (ball radius ``d(x,y)/2``) is
    zero, the metric segment ``[x, y]`` has a third point. The verdict comes
    from the (Z) margin.
    """
    M = _with_cfg(M, cfg)
    _check_pair(M, x, y)
    rec = _classify_rows(M, x, np.array([y]), mesh_size(M))[0]
    if rec.pair.x != x:
        rec = dataclasses.replace(rec, pair=rec.pair.reversed())
    return rec


@dataclass(frozen=True)
class ClassificationSummary:
    records: list[PairClassification]
    mesh: float
    pair_count: int
    strongly_exposed: list[PairId]
    strongly_exposed_resolved: list[PairId]
    z_witnessed_count: int
    max_z_margin: float
    min_positive_gromov_inf: float

    def as_dict(self, include_records: bool = True) -> dict:
        out = {
            "mesh": self.mesh,
            "pair_count": self.pair_count,
            "strongly_exposed_count": len(self.strongly_exposed),
            "strongly_exposed_resolved": [p.as_list() for p in self.strongly_exposed_resolved],
            "mesh_scale_strongly_exposed_count": (len(self.strongly_exposed)
                                                  - len(self.strongly_exposed_resolved)),
            "z_witnessed_count": self.z_witnessed_count,
            "max_z_margin": self.max_z_margin,
            "min_positive_gromov_inf": self.min_positive_gromov_inf,
        }
        if include_records:
            out["records"] = [r.as_dict() for r in self.records]
        return out


def classify_all(M: FiniteMetricSpace, cfg: Config | None = None,
                 threads: int | None = None) -> ClassificationSummary:
    """Classify every unordered pair.

    ``strongly_exposed_resolved`` keeps only pairs farther apart than the
    mesh. A closest pair of any finite space has a trivial segment, so
    mesh-scale candidates exist in every sample and are counted separately;
    the resolved list is what distinguishes a sampled length space (empty)
    from a space with a genuine gap.
    """
    M = _with_cfg(M, cfg)
    n = M.n
    if n < 2:
        raise ValueError("classification needs at least two points")
    h = mesh_size(M)
    threads = threads or threads_from_env()
    rows = [(x, np.arange(x + 1, n)) for x in range(n - 1)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda r: _classify_rows(M, r[0], r[1], h), rows))
    else:
        parts = [_classify_rows(M, x, ys, h) for x, ys in rows]
    records = [rec for part in parts for rec in part]
    se = [r.pair for r in records if r.verdict is Verdict.STRONGLY_EXPOSED_CANDIDATE]
    se_res = [r.pair for r in records
              if r.verdict is Verdict.STRONGLY_EXPOSED_CANDIDATE and r.resolved]
    finite = [r.z_margin for r in records if np.isfinite(r.z_margin)]
    ginf = [v for r in records for v in (r.gromov_inf_xy, r.gromov_inf_yx)
            if v > M.cfg.tol_margin and np.isfinite(v)]
    return ClassificationSummary(
        records, h, len(records), se, se_res, len(records) - len(se),
        max(finite) if finite else INF, min(ginf) if ginf else INF)


# -- peaking -------------------------------------------------------------------------


def peak_verify(M: FiniteMetricSpace, x: int, y: int, g: LipschitzFunction,
                rho: float) -> float:
    """``1 - max |slope of g|`` over pairs outside the neighbourhood
    ``U = {(u,v) : d(u,x) < rho, d(v,y) < rho}`` and its mirror.

    A positive value certifies that ``g`` peaks at ``(x, y)`` at resolution
    ``rho`` on this sample. Returns 1 when ``rho`` reaches the diameter.
    """
    _check_pair(M, x, y)
    tol = M.cfg.tol_eq
    if g.norm > 1.0 + tol:
        raise NotNormOne(f"function has norm {g.norm:.12g} > 1")
    if abs(g.slope(x, y) - 1.0) > tol:
        raise NotSlopeOneAtPair(f"slope at ({x},{y}) is {g.slope(x, y):.12g}, not 1")
    if rho >= M.diameter:
        return 1.0
    D = M.dist
    near_x = D[x] < rho
    near_y = D[y] < rho
    worst = -INF
    v = g.values
    for u in range(M.n - 1):
        w = np.arange(u + 1, M.n)
        inside = (near_x[u] & near_y[w]) | (near_x[w] & near_y[u])
        s = np.abs(v[u] - v[w]) / D[u, w]
        s = s[~inside]
        if s.size:
            worst = max(worst, float(s.max()))
    return 1.0 if worst == -INF else 1.0 - worst


# -- Daugavet pair search ----------------------------------------------------------


@dataclass(frozen=True)
class DaugavetSearchResult:
    subset: list[int]
    pair: PairId | None
    achieved_margin: float
    slope: float
    best_pair: PairId | None
    eps: float
    candidates: int

    @property
    def found(self) -> bool:
        return self.pair is not None

    def extension_eps(self) -> float:
        """The ``eps'`` for which the found pair meets the extension precondition."""
        return max(0.0, 1.0 / self.achieved_margin - 1.0)

    def as_dict(self) -> dict:
        return {
            "subset": self.subset,
            "pair": None if self.pair is None else self.pair.as_list(),
            "achieved_margin": self.achieved_margin,
            "slope": self.slope,
            "best_pair": None if self.best_pair is None else self.best_pair.as_list(),
            "eps": self.eps,
            "candidates": self.candidates,
            "interpretation": ("pair found" if self.pair is not None
                               else "no pair at this mesh (evidence, not disproof)"),
        }


def daugavet_margin(M: FiniteMetricSpace, N, u: int, v: int) -> float:
    """``min over x, y in N of (d(x,u) + d(y,v)) / (d(x,y) + d(u,v))``."""
    N = np.asarray(N, dtype=int)
    D = M.dist
    num = D[N, u][:, None] + D[N, v][None, :]
    den = D[np.ix_(N, N)] + D[u, v]
    return float((num / den).min())


def find_daugavet_pair(M: FiniteMetricSpace, N, g: LipschitzFunction, eps: float,
                       exclude_subset: bool = True) -> DaugavetSearchResult:
    """Exhaustive bottleneck search for a Daugavet pair.

    Among ordered pairs ``(u, v)`` with ``(g(u) - g(v)) / d(u,v) > 1 - eps``
    find the one maximising :func:`daugavet_margin`; it is reported as found
    when the margin reaches ``1 - eps``. Points of ``N`` are skipped as
    ``u`` or ``v`` when ``exclude_subset`` is set, so a found pair can feed
    the extension construction directly. Ties go to the lexicographically
    smallest ``(u, v)``.
    """
    N = sorted({int(i) for i in N})
    if not N:
        raise ValueError("subset must be nonempty")
    if abs(g.norm - 1.0) > M.cfg.tol_eq:
        raise NotNormOne(f"probe function has norm {g.norm:.12g}, not 1")
    D = M.dist
    Na = np.array(N)
    DNN = D[np.ix_(Na, Na)]
    allowed = np.ones(M.n, dtype=bool)
    if exclude_subset:
        allowed[Na] = False
    best, best_uv, best_slope, count = -INF, None, 0.0, 0
    vals = g.values
    for u in range(M.n):
        if not allowed[u]:
            continue
        with np.errstate(divide="ignore", invalid="ignore"):
            s = (vals[u] - vals) / D[u]
        ok = allowed & (s > 1.0 - eps)
        ok[u] = False
        vs = np.flatnonzero(ok)
        if vs.size == 0:
            continue
        count += vs.size
        num = D[Na, u][:, None, None] + D[np.ix_(Na, vs)][None, :, :]
        den = DNN[:, :, None] + D[u, vs][None, None, :]
        marg = (num / den).min(axis=(0, 1))
        k = int(np.argmax(marg))
        if marg[k] > best:
            best, best_uv, best_slope = float(marg[k]), (u, int(vs[k])), float(s[vs[k]])
    if best_uv is None:
        return DaugavetSearchResult(N, None, 0.0, 0.0, None, eps, 0)
    best_pair = PairId.of(*best_uv)
    if best_pair.x != best_uv[0]:
        best_pair = best_pair.reversed()
    found = best >= 1.0 - eps
    return DaugavetSearchResult(N, best_pair if found else None, best, best_slope,
                                best_pair, eps, count)


def slice_daugavet_witness(M: FiniteMetricSpace, mu: Chain, g: LipschitzFunction,
                           alpha: float, max_candidates: int = 64):
    """Best ``||mu + m||`` over molecules ``m`` in the slice ``S(g, alpha)``.

    Slice form of the Daugavet condition restricted to molecules: for a
    norm-one ``mu`` a value near 2 means the slice reaches almost
    diametrically away from ``mu``. Candidates are ranked by their Daugavet
    margin against ``supp(mu) + {base}`` and the top ``max_candidates`` are
    normed exactly. Returns ``(value, PairId)`` or ``(0.0, None)`` when the
    slice holds no molecule.
    """
    N = sorted(set(mu.support) | {M.base})
    D = M.dist
    vals = g.values
    ranked = []
    for u in range(M.n):
        with np.errstate(divide="ignore", invalid="ignore"):
            s = (vals[u] - vals) / D[u]
        for v in np.flatnonzero(s > 1.0 - alpha):
            if v != u:
                ranked.append((-daugavet_margin(M, N, u, int(v)), u, int(v)))
    ranked.sort()
    best, arg = 0.0, None
    for _, u, v in ranked[:max_candidates]:
        value = kr_norm_primal(M, mu + molecule(M, u, v).chain).cost
        if value > best:
            best, arg = value, _ordered(u, v)
    return best, arg


# -- locality ----------------------------------------------------------------------


@dataclass(frozen=True)
class LocalSlopeResult:
    distance: float
    pair: PairId | None


def _ordered(u: int, v: int) -> PairId:
    p = PairId.of(u, v)
    return p if p.x == u else p.reversed()


def _shortest_qualifying(M: FiniteMetricSpace, f: LipschitzFunction,
                         threshold: float) -> LocalSlopeResult:
    D = M.dist
    vals = f.values
    best, arg = INF, None
    for u in range(M.n):
        with np.errstate(divide="ignore", invalid="ignore"):
            s = (vals[u] - vals) / D[u]
        s[u] = -INF
        ok = np.flatnonzero(s > threshold)
        if ok.size == 0:
            continue
        k = int(ok[np.argmin(D[u, ok])])
        if D[u, k] < best:
            best, arg = float(D[u, k]), _ordered(u, k)
    return LocalSlopeResult(best, arg)


def local_slope_search(M: FiniteMetricSpace, f: LipschitzFunction,
                       eps: float) -> LocalSlopeResult:
    """Shortest pair with slope above ``||f||_L - eps`` (``+inf`` if none)."""
    if M.n < 2:
        raise ValueError("needs at least two points")
    return _shortest_qualifying(M, f, f.norm - eps)


@dataclass(frozen=True)
class ContractionResult:
    success: bool
    pair: PairId | None
    ratio: float
    bound: float


def contraction_probe(M: FiniteMetricSpace, f: LipschitzFunction, x: int,
                      y: int) -> LipschitzFunction:
    """``(f + d(y,.) - d(x,.) + f_xy) / 4``.

    A pair where this average has slope close to 1 has slope close to 1 for
    all four summands, which pins it near the segment ``[x, y]`` and oriented
    along it.
    """
    _check_pair(M, x, y)
    vals = (f.values + M.dist[y] - M.dist[x] + f_xy(M, x, y).values) / 4.0
    return LipschitzFunction(M, vals)


def lemalocal_experiment(M: FiniteMetricSpace, f: LipschitzFunction, x: int, y: int,
                         eps: float) -> ContractionResult:
    """Look for ``(u, v)`` with slope above ``(1 - eps) ||f||_L`` and
    ``d(u, v) < eps / (1 - eps)**2 * d(x, y)``.

    Only meaningful on fine samples of length spaces; a failure is evidence
    that the sample does not behave like one at this scale.
    """
    _check_pair(M, x, y)
    if not (0.0 < eps < 0.25):
        raise PreconditionSlope(f"eps={eps} is outside (0, 1/4)")
    norm = f.norm
    if not f.slope(x, y) > (1.0 - eps) * norm:
        raise PreconditionSlope(
            f"slope {f.slope(x, y):.12g} at ({x},{y}) does not exceed (1-eps)||f||")
    bound = eps / (1.0 - eps) ** 2
    res = _shortest_qualifying(M, f, (1.0 - eps) * norm)
    ratio = res.distance / M.dist[x, y]
    return ContractionResult(bool(ratio < bound), res.pair, float(ratio), bound)


def spreading_local_set(M: FiniteMetricSpace, f: LipschitzFunction, eps: float,
                        delta: float) -> set[int]:
    """Points ``c`` where ``f`` restricted to ``B(c, delta)`` has norm above
    ``||f||_L - eps``. Empty for a constant ``f`` by convention."""
    off = M.dist[~np.eye(M.n, dtype=bool)]
    if off.size and delta < off.min():
        raise ScaleBelowMesh(f"delta={delta} is below the smallest distance {off.min():.6g}")
    norm = f.norm
    if norm <= M.snap:
        return set()
    thr = norm - eps
    D = M.dist
    vals = f.values
    out = set()
    for c in range(M.n):
        idx = np.flatnonzero(D[c] < delta)
        if idx.size < 2:
            continue
        sub = D[np.ix_(idx, idx)]
        with np.errstate(divide="ignore", invalid="ignore"):
            S = np.abs(vals[idx][:, None] - vals[idx][None, :]) / sub
        np.fill_diagonal(S, -INF)
        if S.max() > thr:
            out.add(c)
    return out


__all__ = [
    "Verdict", "PairClassification", "ClassificationSummary", "DaugavetSearchResult",
    "LocalSlopeResult", "ContractionResult", "gromov_infimum", "classify_pair",
    "classify_all", "peak_verify", "daugavet_margin", "find_daugavet_pair",
    "slice_daugavet_witness", "local_slope_search", "contraction_probe",
    "lemalocal_experiment", "spreading_local_set", "threads_from_env",
]
