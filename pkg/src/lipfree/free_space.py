"""Finitely supported elements of the Lipschitz-free space and their norm.

The norm of a balanced chain is the optimal transport cost between its
positive and negative parts with ground cost ``d``. It is computed by
successive shortest augmenting paths on the complete bipartite graph
sources -> sinks, using Dijkstra with node potentials. The final potentials
are a feasible dual solution; extending the sink potentials with McShane's
formula (constant 1) turns them into a norming 1-Lipschitz function.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import NotBetween, NotNormalized, UnbalancedChain
from .lipschitz import LipschitzFunction
from .metric import FiniteMetricSpace, PairId, _check_pair, metric_segment

DROP = 1e-12


def tol_gap(cost: float) -> float:
    return 1e-8 * max(1.0, abs(cost))


@dataclass(frozen=True, eq=False)
class Chain:
    """A finitely supported balanced combination ``sum w_i delta_i``."""

    space: FiniteMetricSpace
    weights: Mapping[int, float] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for k, w in sorted(dict(self.weights).items()):
            k = int(k)
            if not (0 <= k < self.space.n):
                raise IndexError(f"chain index {k} out of range for n={self.space.n}")
            w = float(w)
            if abs(w) >= DROP:
                clean[k] = w
        total = sum(clean.values())
        mass = sum(abs(w) for w in clean.values())
        if abs(total) > self.space.cfg.tol_eq * max(1.0, mass):
            raise UnbalancedChain(f"chain weights sum to {total:.6g}, not 0")
        object.__setattr__(self, "weights", clean)

    @classmethod
    def delta(cls, M: FiniteMetricSpace, x: int) -> "Chain":
        """``delta_x``, written against the base point as ``{x: 1, base: -1}``."""
        if x == M.base:
            return cls(M, {})
        return cls(M, {x: 1.0, M.base: -1.0})

    @classmethod
    def from_dense(cls, M: FiniteMetricSpace, w) -> "Chain":
        w = np.asarray(w, dtype=float)
        return cls(M, {int(i): float(w[i]) for i in np.flatnonzero(w)})

    def dense(self) -> np.ndarray:
        out = np.zeros(self.space.n)
        for k, w in self.weights.items():
            out[k] = w
        return out

    @property
    def support(self) -> list[int]:
        return list(self.weights)

    def pair(self, f: LipschitzFunction | np.ndarray) -> float:
        vals = f.values if isinstance(f, LipschitzFunction) else np.asarray(f)
        return float(sum(w * vals[k] for k, w in self.weights.items()))

    def __add__(self, other: "Chain") -> "Chain":
        return Chain.from_dense(self.space, self.dense() + other.dense())

    def __sub__(self, other: "Chain") -> "Chain":
        return Chain.from_dense(self.space, self.dense() - other.dense())

    def __mul__(self, c: float) -> "Chain":
        return Chain(self.space, {k: c * w for k, w in self.weights.items()})

    __rmul__ = __mul__

    def __neg__(self) -> "Chain":
        return self * -1.0


@dataclass(frozen=True)
class Molecule:
    pair: PairId
    chain: Chain


@dataclass(frozen=True)
class FlowSolution:
    arcs: list[tuple[int, int, float]]
    cost: float

    def divergence(self, n: int) -> np.ndarray:
        out = np.zeros(n)
        for a, b, fl in self.arcs:
            out[a] += fl
            out[b] -= fl
        return out


@dataclass(frozen=True)
class DualCertificate:
    f: LipschitzFunction
    value: float


def _transport(C: np.ndarray, a: np.ndarray, b: np.ndarray):
    """Min-cost transport from supplies ``a`` to demands ``b`` with costs ``C``.

    Successive shortest paths on the residual network
    ``s -> sources -> sinks -> t``. Returns ``(flow, potentials)`` where the
    potentials ``p`` satisfy ``C[i,j] + p_src[i] - p_snk[j] >= 0`` with
    equality wherever ``flow[i,j] > 0``.
    """
    S, T = len(a), len(b)
    V = S + T + 2
    s, t = 0, V - 1
    src = np.arange(1, S + 1)
    snk = np.arange(S + 1, S + T + 1)
    flow = np.zeros((S, T))
    sent = np.zeros(S)
    got = np.zeros(T)
    pot = np.zeros(V)
    mass = max(a.sum(), b.sum())
    eps_mass = DROP * max(1.0, mass)
    tiny = 1e-2 * eps_mass

    while min(a.sum() - sent.sum(), b.sum() - got.sum()) > eps_mass:
        W = np.full((V, V), np.inf)
        W[np.ix_(src, snk)] = C
        live = a - sent > tiny
        W[s, src[live]] = 0.0
        W[src[sent > 0], s] = 0.0
        back = flow > 0
        Wt = W[np.ix_(snk, src)]
        Wt[back.T] = -C.T[back.T]
        W[np.ix_(snk, src)] = Wt
        open_ = b - got > tiny
        W[snk[open_], t] = 0.0
        W[t, snk[got > 0]] = 0.0
        R = np.maximum(W + pot[:, None] - pot[None, :], 0.0)

        dist = np.full(V, np.inf)
        parent = np.full(V, -1)
        done = np.zeros(V, dtype=bool)
        dist[s] = 0.0
        for _ in range(V):
            cand = np.where(done, np.inf, dist)
            k = int(np.argmin(cand))
            if not np.isfinite(cand[k]):
                break
            done[k] = True
            alt = dist[k] + R[k]
            better = alt < dist
            dist[better] = alt[better]
            parent[better] = k
        if not np.isfinite(dist[t]):
            break
        pot += np.minimum(dist, dist[t])

        path = [t]
        while path[-1] != s:
            path.append(int(parent[path[-1]]))
        path.reverse()
        push = np.inf
        for u, v in zip(path, path[1:]):
            if u == s:
                push = min(push, a[v - 1] - sent[v - 1])
            elif v == s:
                push = min(push, sent[u - 1])
            elif v == t:
                push = min(push, b[u - S - 1] - got[u - S - 1])
            elif u == t:
                push = min(push, got[v - S - 1])
            elif u <= S:
                pass
            else:
                push = min(push, flow[v - 1, u - S - 1])
        if not push > 0:
            break
        for u, v in zip(path, path[1:]):
            if u == s:
                sent[v - 1] += push
            elif v == s:
                sent[u - 1] -= push
            elif v == t:
                got[u - S - 1] += push
            elif u == t:
                got[v - S - 1] -= push
            elif u <= S:
                flow[u - 1, v - S - 1] += push
            else:
                flow[v - 1, u - S - 1] -= push
                if flow[v - 1, u - S - 1] < 0:
                    flow[v - 1, u - S - 1] = 0.0
    return flow, pot[src], pot[snk]


def _solve(M: FiniteMetricSpace, mu: Chain) -> tuple[FlowSolution, DualCertificate]:
    if mu.space is not M and mu.space.n != M.n:
        raise ValueError("chain lives on a different space")
    total = sum(mu.weights.values())
    mass = sum(abs(w) for w in mu.weights.values())
    if abs(total) > M.cfg.tol_eq * max(1.0, mass):
        raise UnbalancedChain(f"chain weights sum to {total:.6g}, not 0")
    pos = [(k, w) for k, w in mu.weights.items() if w > 0]
    neg = [(k, -w) for k, w in mu.weights.items() if w < 0]
    if not pos or not neg:
        zero = LipschitzFunction(M, np.zeros(M.n))
        return FlowSolution([], 0.0), DualCertificate(zero, 0.0)
    P = np.array([k for k, _ in pos])
    Q = np.array([k for k, _ in neg])
    a = np.array([w for _, w in pos])
    b = np.array([w for _, w in neg])
    C = M.dist[np.ix_(P, Q)]
    flow, _, p_snk = _transport(C, a, b)

    arcs = [(int(P[i]), int(Q[j]), float(flow[i, j]))
            for i, j in zip(*np.nonzero(flow > 0))]
    cost = float((flow * C).sum())

    # sink values -p_snk are a dual solution; McShane-extend them with L = 1
    f_vals = (-p_snk[:, None] + M.dist[Q]).min(axis=0)
    f = LipschitzFunction(M, f_vals - f_vals[M.base])
    return FlowSolution(arcs, cost), DualCertificate(f, mu.pair(f))


def kr_norm_primal(M: FiniteMetricSpace, mu: Chain) -> FlowSolution:
    """Optimal transport plan realising ``||mu||`` in the free space."""
    return _solve(M, mu)[0]


def kr_norm_dual(M: FiniteMetricSpace, mu: Chain) -> DualCertificate:
    """A base-normalised 1-Lipschitz ``f`` maximising ``<f, mu>``."""
    return _solve(M, mu)[1]


def kr_norm(M: FiniteMetricSpace, mu: Chain) -> tuple[FlowSolution, DualCertificate]:
    """Primal flow and dual certificate from a single solve."""
    return _solve(M, mu)


def molecule(M: FiniteMetricSpace, x: int, y: int) -> Molecule:
    """``(delta_x - delta_y) / d(x, y)``."""
    _check_pair(M, x, y)
    w = 1.0 / M.dist[x, y]
    return Molecule(PairId.of(x, y), Chain(M, {x: w, y: -w}))


def slice_membership(M: FiniteMetricSpace, f: LipschitzFunction, alpha: float,
                     mu: Chain) -> bool:
    """Is ``mu`` in the slice ``{nu in the unit ball : <f, nu> > 1 - alpha}``?"""
    if abs(f.norm - 1.0) > M.cfg.tol_eq:
        raise NotNormalized(f"functional has norm {f.norm:.12g}, not 1")
    cost = kr_norm_primal(M, mu).cost
    if abs(cost - 1.0) > tol_gap(cost):
        raise NotNormalized(f"chain has norm {cost:.12g}, not 1")
    return mu.pair(f) > 1.0 - alpha


def molecule_decompose(M: FiniteMetricSpace, x: int, y: int, z: int):
    """Split the molecule of ``(x, y)`` through a point ``z`` of the segment ``[x, y]``.

    Returns ``((d(x,z)/d(x,y), d(z,y)/d(x,y)), (molecule(x,z), molecule(z,y)))``.
    """
    _check_pair(M, x, y)
    if z in (x, y) or z not in metric_segment(M, x, y):
        raise NotBetween(f"point {z} does not lie strictly inside [{x},{y}]")
    D = M.dist
    coeffs = (float(D[x, z] / D[x, y]), float(D[z, y] / D[x, y]))
    return coeffs, (molecule(M, x, z), molecule(M, z, y))


__all__ = [
    "Chain", "Molecule", "FlowSolution", "DualCertificate", "kr_norm_primal", "kr_norm_dual",
    "kr_norm", "molecule", "slice_membership", "molecule_decompose", "tol_gap",
]
