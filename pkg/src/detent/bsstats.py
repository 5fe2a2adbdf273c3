"""Local (Benjamini-Schramm) statistics of graph-kernel pairs.

A decorated ball is the rooted r-ball of the base graph together with the
kernel entries on the ball's elements.  Two decorated balls are compared
through root-preserving isomorphisms of the ball graphs, minimising the
largest entrywise kernel deviation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import rng
from .errors import BallTooLarge, UsageError
from .graph import Graph, RootedBall, ball
from .kernels import Kernel

MAX_BALL = 64
DEFAULT_MATCH_TOL = 1e-6
DEFAULT_TAIL_RADII = (0, 1, 2, 5, 10)
DEFAULT_TAIL_TOL = 0.05


@dataclass(frozen=True, eq=False)
class DecoratedBall:
    ball: RootedBall
    submatrix: np.ndarray = field(repr=False)
    n_labels: int = 1

    @property
    def radius(self) -> int:
        return self.ball.radius

    @property
    def root_vertex(self) -> int:
        return self.ball.vertex_map[0]


@dataclass(frozen=True)
class BallMatch:
    isomorphic: bool
    max_deviation: float
    mapping: tuple[int, ...] | None = None
    approximate: bool = False


@dataclass(frozen=True)
class TightnessProfile:
    """Distance-resolved squared kernel mass per vertex; key ``math.inf`` is the t = inf bucket."""

    mass: dict

    @property
    def total(self) -> float:
        return math.fsum(self.mass.values())

    def tail(self, R: int) -> float:
        """Mass at distances ``> R``, including infinity."""
        return math.fsum(v for t, v in self.mass.items() if t > R)

    def as_dict(self) -> dict:
        return {("inf" if t == math.inf else str(t)): v for t, v in sorted(self.mass.items())}


def _base(k: Kernel, graph: Graph | None) -> Graph:
    g = graph or k.ground.base_graph
    if g.vertex_count != k.ground.vertex_count:
        raise UsageError("graph does not match the kernel's ground set")
    return g


def decorated_ball(k: Kernel, root: int, r: int, graph: Graph | None = None) -> DecoratedBall:
    g = _base(k, graph)
    b = ball(g, root, r)
    elems = k.ground.elements_of(b.vertex_map)
    sub = np.array(k.matrix[np.ix_(elems, elems)])
    sub.flags.writeable = False
    return DecoratedBall(b, sub, k.ground.n_labels)


def tightness_profile(k: Kernel, graph: Graph | None = None) -> TightnessProfile:
    g = _base(k, graph)
    nl = k.ground.n_labels
    dist = g.all_distances
    sq = k.matrix ** 2
    # fold labels: squared mass between vertex pairs
    vsq = sq.reshape(g.vertex_count, nl, g.vertex_count, nl).sum(axis=(1, 3))
    nv = g.vertex_count
    mass = {}
    for t in np.unique(dist):
        key = math.inf if t < 0 else int(t)
        mass[key] = math.fsum(vsq[dist == t].tolist()) / nv
    return TightnessProfile(mass)


def _multiplicity(g: Graph) -> np.ndarray:
    a = np.zeros((g.vertex_count, g.vertex_count), dtype=np.int64)
    for u, v, _ in g.edges:
        a[u, v] += 1
        a[v, u] += 1
    return a


def _fingerprint_match(a: DecoratedBall, b: DecoratedBall) -> BallMatch:
    da = sorted(a.ball.graph.degrees.tolist())
    db = sorted(b.ball.graph.degrees.tolist())
    if da != db or a.ball.graph.edge_count != b.ball.graph.edge_count:
        return BallMatch(False, math.inf, None, True)
    dev = float(np.max(np.abs(np.sort(np.diag(a.submatrix)) - np.sort(np.diag(b.submatrix)))))
    dev = max(dev, abs(float(a.submatrix[0, 0] - b.submatrix[0, 0])))
    return BallMatch(True, dev, None, True)


def ball_distance(a: DecoratedBall, b: DecoratedBall, allow_approximate: bool = False) -> BallMatch:
    """Best root-preserving isomorphism by exact backtracking with branch and bound."""
    if a.n_labels != b.n_labels:
        raise UsageError("decorated balls have different label sets")
    if a.radius != b.radius:
        raise UsageError("decorated balls have different radii")
    ga, gb = a.ball.graph, b.ball.graph
    n = ga.vertex_count
    if n > MAX_BALL or gb.vertex_count > MAX_BALL:
        if allow_approximate:
            return _fingerprint_match(a, b)
        raise BallTooLarge(f"ball with {max(n, gb.vertex_count)} vertices exceeds {MAX_BALL}")
    if (
        n != gb.vertex_count
        or ga.edge_count != gb.edge_count
        or sorted(zip(a.ball.distances, ga.degrees.tolist()))
        != sorted(zip(b.ball.distances, gb.degrees.tolist()))
    ):
        return BallMatch(False, math.inf)

    nl = a.n_labels
    ma, mb = _multiplicity(ga), _multiplicity(gb)
    ta = a.submatrix.reshape(n, nl, n, nl)
    tb = b.submatrix.reshape(n, nl, n, nl)
    dist_a, dist_b = a.ball.distances, b.ball.distances
    deg_a, deg_b = ga.degrees, gb.degrees
    # earlier-placed neighbour of each vertex (ball order is BFS order)
    parent = [-1] * n
    for v in range(1, n):
        nbrs = [w for w in ga.neighbors(v) if w < v]
        parent[v] = min(nbrs) if nbrs else -1

    best = [math.inf, None]
    psi = [-1] * n
    used = [False] * n

    def step_cost(v, w, placed):
        idx_a = placed + [v]
        idx_b = [psi[x] for x in placed] + [w]
        row = np.abs(ta[v][:, idx_a, :] - tb[w][:, idx_b, :])
        return float(row.max()) if row.size else 0.0

    def rec(v, placed, cur):
        if cur >= best[0] and best[1] is not None:
            return
        if v == n:
            best[0], best[1] = cur, tuple(psi)
            return
        if parent[v] >= 0:
            cands = sorted(set(gb.neighbors(psi[parent[v]])))
        else:
            cands = range(n)
        for w in cands:
            if used[w] or dist_b[w] != dist_a[v] or deg_b[w] != deg_a[v]:
                continue
            if any(ma[v, x] != mb[w, psi[x]] for x in placed):
                continue
            c = max(cur, step_cost(v, w, placed))
            if c >= best[0] and best[1] is not None:
                continue
            psi[v], used[w] = w, True
            placed.append(v)
            rec(v + 1, placed, c)
            placed.pop()
            psi[v], used[w] = -1, False

    rec(0, [], 0.0)
    if best[1] is None:
        return BallMatch(False, math.inf)
    return BallMatch(True, best[0], best[1])


def sample_roots(n_vertices: int, n_roots: int, seed: int, item: int = 0) -> np.ndarray:
    u = rng.uniforms(seed, np.arange(n_roots) + (item << 32), 1, stream=rng.ROOTS)[:, 0]
    return np.minimum((u * n_vertices).astype(np.int64), n_vertices - 1)


def empirical_stats(k: Kernel, r: int, n_roots: int, seed: int, graph: Graph | None = None,
                    item: int = 0) -> list[DecoratedBall]:
    """Decorated balls around ``n_roots`` uniform roots drawn with replacement."""
    if r < 0:
        raise UsageError("radius must be non-negative")
    g = _base(k, graph)
    cache = {}
    out = []
    for v in sample_roots(g.vertex_count, n_roots, seed, item).tolist():
        if v not in cache:
            cache[v] = decorated_ball(k, v, r, g)
        out.append(cache[v])
    return out


def _deviation_matrix(balls_a, balls_b):
    cache = {}
    dev = np.empty((len(balls_a), len(balls_b)))
    approx = False
    for i, x in enumerate(balls_a):
        for j, y in enumerate(balls_b):
            key = (id(x), id(y))
            if key not in cache:
                cache[key] = ball_distance(x, y, allow_approximate=True)
            res = cache[key]
            approx |= res.approximate
            dev[i, j] = res.max_deviation if res.isomorphic else math.inf
    return dev, approx


def match_balls(balls_a, balls_b, match_tol: float = DEFAULT_MATCH_TOL) -> dict:
    """Greedy minimum-deviation matching of two ball multisets."""
    if not balls_a or not balls_b:
        return {"empirical_distance": 0.0 if not balls_a and not balls_b else 1.0,
                "unmatched_fraction": 0.0 if not balls_a and not balls_b else 1.0,
                "approximate": False}
    dev, approx = _deviation_matrix(balls_a, balls_b)
    order = np.argsort(dev, axis=None, kind="stable")
    free_a = np.ones(len(balls_a), dtype=bool)
    free_b = np.ones(len(balls_b), dtype=bool)
    chosen = []
    for flat in order:
        i, j = divmod(int(flat), len(balls_b))
        if free_a[i] and free_b[j]:
            free_a[i] = free_b[j] = False
            chosen.append(dev[i, j])
            if not free_a.any() or not free_b.any():
                break
    chosen = np.array(chosen)
    pairs = max(len(balls_a), len(balls_b))
    capped = np.minimum(chosen, 1.0)
    # leftover balls (unequal sample sizes) count as distance 1
    distance = (math.fsum(capped.tolist()) + (pairs - len(chosen))) / pairs
    unmatched = (int(np.sum(chosen > match_tol)) + pairs - len(chosen)) / pairs
    return {"empirical_distance": distance, "unmatched_fraction": unmatched, "approximate": approx}


def sequence_report(items: Sequence[tuple[Graph, Kernel]], r: int, n_roots: int, seed: int,
                    match_tol: float = DEFAULT_MATCH_TOL,
                    tail_radii: Sequence[int] = DEFAULT_TAIL_RADII,
                    tail_tol: float = DEFAULT_TAIL_TOL) -> dict:
    """Consecutive-pair ball-statistics distances and per-item tightness tails."""
    if len(items) < 2:
        raise UsageError("sequence_report needs at least two items")
    stats = [empirical_stats(k, r, n_roots, seed, g, item=i) for i, (g, k) in enumerate(items)]
    pairs = []
    for i in range(len(items) - 1):
        res = match_balls(stats[i], stats[i + 1], match_tol)
        res["items"] = [i, i + 1]
        pairs.append(res)
    per_item = []
    worst = 0.0
    radii = sorted(int(x) for x in tail_radii)
    for g, k in items:
        prof = tightness_profile(k, g)
        tails = {str(R): prof.tail(R) for R in radii}
        worst = max(worst, tails[str(radii[-1])])
        per_item.append({"tail_mass": tails, "total_mass": prof.total, "mass_at_inf": prof.mass.get(math.inf, 0.0)})
    flags = {
        "non_tight": worst >= tail_tol,
        "max_tail_mass": worst,
        "approximate": any(p["approximate"] for p in pairs),
    }
    return {"radius": r, "n_roots": n_roots, "seed": seed, "match_tol": match_tol,
            "pairs": pairs, "items": per_item, "flags": flags}
