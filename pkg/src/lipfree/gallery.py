"""Builders for the example spaces."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import BadSpec
from .metric import Config, FiniteMetricSpace, validate_space

KINDS = ("interval", "circle", "two_intervals", "euclidean_points", "r_tree_star", "random")
NORMS = {"euclidean": 2, "sup": np.inf, "taxicab": 1}

DEFAULTS: dict[str, dict[str, Any]] = {
    "interval": {"n": 65, "start": 0.0, "length": 1.0},
    "circle": {"n": 256, "circumference": 2 * math.pi, "chordal": False},
    "two_intervals": {"mesh": 1 / 64},
    "euclidean_points": {"coords": None, "norm": "euclidean"},
    "r_tree_star": {"legs": 3, "leg_points": 33, "leg_length": 1.0},
    "random": {"n": 10, "seed": 0, "method": "cube", "dim": 2, "norm": "euclidean"},
}


@dataclass(frozen=True)
class SpaceSpec:
    kind: str
    params: dict = field(default_factory=dict)

    def resolved(self) -> dict:
        if self.kind not in KINDS:
            raise BadSpec(f"unknown space kind {self.kind!r}; expected one of {KINDS}")
        unknown = set(self.params) - set(DEFAULTS[self.kind])
        if unknown:
            raise BadSpec(f"unknown parameter(s) for {self.kind}: {sorted(unknown)}")
        return {**DEFAULTS[self.kind], **self.params}


def _fmt(t: float) -> str:
    return f"{t:.12g}"


def pairwise(coords: np.ndarray, norm: str = "euclidean") -> np.ndarray:
    if norm not in NORMS:
        raise BadSpec(f"unknown ambient norm {norm!r}")
    diff = coords[:, None, :] - coords[None, :, :]
    return np.linalg.norm(diff, ord=NORMS[norm], axis=-1)


def shortest_path_closure(W: np.ndarray) -> np.ndarray:
    """Min-plus closure, iterated to a floating-point fixed point.

    At the fixed point ``D[i,k] <= D[i,j] + D[j,k]`` holds for the computed
    sums, so the triangle defect is exactly zero.
    """
    D = np.array(W, dtype=float)
    n = D.shape[0]
    while True:
        before = D.copy()
        for k in range(n):
            np.minimum(D, D[:, k, None] + D[None, k, :], out=D)
        if np.array_equal(before, D):
            return D


def _positive_int(p: dict, key: str, low: int = 1) -> int:
    v = p[key]
    if isinstance(v, bool) or int(v) != v or int(v) < low:
        raise BadSpec(f"{key} must be an integer >= {low}, got {v!r}")
    return int(v)


def _positive(p: dict, key: str) -> float:
    v = float(p[key])
    if not v > 0 or not math.isfinite(v):
        raise BadSpec(f"{key} must be positive, got {p[key]!r}")
    return v


def build(spec: SpaceSpec | str, cfg: Config | None = None, **params) -> FiniteMetricSpace:
    """Build a gallery space; ``build("circle", n=64)`` is shorthand for a spec."""
    if isinstance(spec, str):
        spec = SpaceSpec(spec, params)
    p = spec.resolved()
    kind = spec.kind

    if kind == "interval":
        n = _positive_int(p, "n")
        length = _positive(p, "length")
        t = float(p["start"]) + length * np.arange(n) / max(n - 1, 1)
        D = np.abs(t[:, None] - t[None, :])
        return validate_space(D, 0, cfg, labels=[_fmt(v) for v in t], coords=t,
                              name=f"interval_n{n}")

    if kind == "circle":
        n = _positive_int(p, "n")
        C = _positive(p, "circumference")
        k = np.abs(np.arange(n)[:, None] - np.arange(n)[None, :])
        k = np.minimum(k, n - k)
        radius = C / (2 * math.pi)
        theta = 2 * math.pi * np.arange(n) / n
        coords = np.column_stack([radius * np.cos(theta), radius * np.sin(theta)])
        if p["chordal"]:
            D = 2 * radius * np.sin(math.pi * k / n)
        else:
            D = k * (C / n)
        kind_name = "chordal" if p["chordal"] else "geodesic"
        return validate_space(D, 0, cfg, labels=[str(i) for i in range(n)], coords=coords,
                              name=f"circle_{kind_name}_n{n}")

    if kind == "two_intervals":
        mesh = _positive(p, "mesh")
        m = round(1 / mesh)
        if m < 1 or abs(m * mesh - 1) > 1e-12:
            raise BadSpec(f"mesh must divide 1 evenly, got {mesh!r}")
        left = np.arange(m + 1) / m
        t = np.concatenate([left, 2 + left])
        D = np.abs(t[:, None] - t[None, :])
        return validate_space(D, 0, cfg, labels=[_fmt(v) for v in t], coords=t,
                              name=f"two_intervals_m{m}")

    if kind == "euclidean_points":
        if p["coords"] is None:
            raise BadSpec("euclidean_points needs coords")
        coords = np.array(p["coords"], dtype=float)
        if coords.ndim == 1:
            coords = coords[:, None]
        if coords.ndim != 2 or coords.shape[0] < 1:
            raise BadSpec("coords must be a nonempty list of points")
        D = pairwise(coords, p["norm"])
        return validate_space(D, 0, cfg, coords=coords, name=f"points_{p['norm']}")

    if kind == "r_tree_star":
        legs = _positive_int(p, "legs")
        per = _positive_int(p, "leg_points")
        length = _positive(p, "leg_length")
        radius = np.concatenate([[0.0], np.tile(np.arange(1, per + 1) * (length / per), legs)])
        leg = np.concatenate([[-1], np.repeat(np.arange(legs), per)])
        same = leg[:, None] == leg[None, :]
        D = np.where(same, np.abs(radius[:, None] - radius[None, :]),
                     radius[:, None] + radius[None, :])
        labels = ["c"] + [f"{l}:{_fmt(r)}" for l, r in zip(leg[1:], radius[1:])]
        return validate_space(D, 0, cfg, labels=labels, name=f"r_tree_star_{legs}x{per}")

    # random
    n = _positive_int(p, "n")
    rng = np.random.default_rng(int(p["seed"]))
    if p["method"] == "cube":
        dim = _positive_int(p, "dim")
        coords = rng.random((n, dim))
        D = pairwise(coords, p["norm"])
        return validate_space(D, 0, cfg, coords=coords,
                              name=f"random_cube_{p['norm']}_n{n}_s{p['seed']}")
    if p["method"] == "closure":
        W = rng.uniform(0.1, 1.0, (n, n))
        W = np.triu(W, 1)
        W = W + W.T
        return validate_space(shortest_path_closure(W), 0, cfg,
                              name=f"random_closure_n{n}_s{p['seed']}")
    raise BadSpec(f"unknown random method {p['method']!r}")


def gallery(cfg: Config | None = None) -> dict[str, FiniteMetricSpace]:
    """The standard spaces used by the acceptance suite."""
    return {
        "interval": build("interval", cfg, n=65),
        "circle": build("circle", cfg, n=256),
        "two_intervals": build("two_intervals", cfg, mesh=1 / 64),
        "r_tree_star": build("r_tree_star", cfg, legs=3, leg_points=33),
    }
