"""Independent reference implementations used only by the tests.

Everything here is written from the definitions with explicit loops or a
generic solver, sharing no code with the package.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.optimize import linprog

INF = math.inf


# -- metric quantities by plain loops -------------------------------------------


def gromov(D, x, y, z):
    return 0.5 * (D[x][z] + D[y][z] - D[x][y])


def segment(D, x, y, tol):
    return {z for z in range(len(D)) if D[x][z] + D[z][y] <= D[x][y] + tol}


def z_margin(D, x, y):
    best = INF
    for z in range(len(D)):
        if z in (x, y):
            continue
        g = max(gromov(D, x, y, z), 0.0)
        best = min(best, g / min(D[x][z], D[y][z]))
    return best


def midpoint_defect(D, x, y):
    return min(max(D[x][z], D[z][y]) for z in range(len(D))) / (0.5 * D[x][y]) - 1.0


def gromov_inf(D, x, y, eps_ball, snap):
    """inf over u outside {x} and the open ball B(y, eps_ball) of (y,x)_u / (u,y)_x.

    The ball radius gets a relative 1e-9 shave so boundary points count as outside.
    """
    best = INF
    for u in range(len(D)):
        if u == x or D[y][u] < eps_ball * (1 - 1e-9):
            continue
        num = gromov(D, y, x, u)
        den = gromov(D, u, y, x)
        num = 0.0 if num <= snap else num
        den = 0.0 if den <= snap else den
        best = min(best, INF if den == 0 else num / den)
    return best


def lip_norm(vals, D):
    n = len(vals)
    best = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                best = max(best, abs(vals[i] - vals[j]) / D[i][j])
    return best


# -- transport --------------------------------------------------------------------


def _split(weights):
    P = [k for k, w in weights.items() if w > 0]
    Q = [k for k, w in weights.items() if w < 0]
    a = np.array([weights[k] for k in P], dtype=float)
    b = np.array([-weights[k] for k in Q], dtype=float)
    return P, Q, a, b


def transport_lp(D, weights):
    """Min-cost transport by a generic LP solver."""
    P, Q, a, b = _split(weights)
    if not P:
        return 0.0
    S, T = len(P), len(Q)
    C = np.array([[D[p][q] for q in Q] for p in P]).ravel()
    A = np.zeros((S + T, S * T))
    for i in range(S):
        A[i, i * T:(i + 1) * T] = 1.0
    for j in range(T):
        A[S + j, j::T] = 1.0
    res = linprog(C, A_eq=A, b_eq=np.concatenate([a, b]), bounds=(0, None), method="highs")
    assert res.status == 0
    return float(res.fun)


def transport_enumerate(D, weights):
    """Min-cost transport by enumerating every basic solution.

    A vertex of the transportation polytope is supported on at most
    ``S + T - 1`` cells; every such cell set is tried and the linear
    equalities solved directly. Feasible for ``S * T`` up to about 16.
    """
    P, Q, a, b = _split(weights)
    if not P:
        return 0.0
    S, T = len(P), len(Q)
    cells = [(i, j) for i in range(S) for j in range(T)]
    rhs = np.concatenate([a, b])
    best = INF
    for k in range(1, S + T):
        for chosen in itertools.combinations(cells, k):
            A = np.zeros((S + T, k))
            for c, (i, j) in enumerate(chosen):
                A[i, c] = 1.0
                A[S + j, c] = 1.0
            if np.linalg.matrix_rank(A) < k:
                continue
            x, *_ = np.linalg.lstsq(A, rhs, rcond=None)
            if np.abs(A @ x - rhs).max() > 1e-9 * max(1.0, rhs.max()) or x.min() < -1e-12:
                continue
            best = min(best, sum(x[c] * D[P[i]][Q[j]] for c, (i, j) in enumerate(chosen)))
    return float(best)


# -- random instances ------------------------------------------------------------


def random_chain(rng, n, max_support=10, integer=False):
    k = int(rng.integers(2, min(max_support, n) + 1))
    idx = rng.choice(n, size=k, replace=False)
    if integer:
        w = rng.integers(-3, 4, size=k).astype(float)
        w[-1] -= w.sum()
        if not np.any(w):
            w[0], w[1] = 1.0, -1.0
    else:
        w = rng.normal(size=k)
        w -= w.mean()
    return {int(i): float(v) for i, v in zip(idx, w)}
