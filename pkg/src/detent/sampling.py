"""Exact sampling, inclusion probabilities and pmf enumeration.

The sampler visits elements in a fixed order and includes each with the
current conditional probability (the diagonal of the conditioned kernel),
then applies the matching rank-one update.  Draws are batched over a
leading axis; draw ``i`` of a batch is bit-identical to
``sample_dpp(k, seed, draw=i)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import rng
from .conditioning import exclude_update, include_update
from .errors import Disconnected, GroundSetTooLarge, KernelDrift
from .graph import Graph
from .kernels import PROJECTION, Kernel, dilate

CLIP_TOL = 1e-12
DRIFT_TOL = 1e-9
PRUNE_TOL = 1e-12
RENORM_TOL = 1e-9
MAX_ENUM = 24
BATCH_FLOATS = 1 << 22


@dataclass(frozen=True)
class SampleDraw:
    subset: np.ndarray
    trace: tuple[tuple[int, float], ...] | None = None

    @property
    def elements(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.subset))


@dataclass(frozen=True)
class ExactPmf:
    support: tuple[tuple[tuple[int, ...], float], ...]

    def as_dict(self) -> dict:
        return dict(self.support)

    def probabilities(self) -> np.ndarray:
        return np.array([p for _, p in self.support])


def clip_probability(p):
    """Clip conditional probabilities; values outside ``[-1e-9, 1+1e-9]`` signal drift."""
    p = np.asarray(p, dtype=np.float64)
    if np.any(p < -DRIFT_TOL) or np.any(p > 1 + DRIFT_TOL) or np.any(~np.isfinite(p)):
        raise KernelDrift(f"conditional probability out of range: {p[(p < -DRIFT_TOL) | (p > 1 + DRIFT_TOL)][:3]}")
    p = np.clip(p, 0.0, 1.0)
    p = np.where(p < CLIP_TOL, 0.0, p)
    return np.where(p > 1 - CLIP_TOL, 1.0, p)


def condition_step(mats, j, include, active=None):
    """One include/exclude step on stacked kernels ``mats`` (N x m x m), in place.

    ``j`` (N,) element per row; ``include`` (N,) bool; rows with
    ``active`` false are left untouched.
    """
    n = mats.shape[0]
    rows = np.arange(n)
    if active is None:
        active = np.ones(n, dtype=bool)
    p = mats[rows, j, j]
    col = mats[rows, :, j].copy()
    den = np.where(include, p, 1.0 - p)
    den = np.where(active & (den > 0), den, 1.0)
    coef = np.where(include, -1.0, 1.0) / den
    coef = np.where(active, coef, 0.0)
    mats += coef[:, None, None] * (col[:, :, None] * col[:, None, :])
    ra, ja = rows[active], j[active]
    mats[ra, ja, :] = 0.0
    mats[ra, :, ja] = 0.0
    mats[ra, ja, ja] = include[active].astype(np.float64)


def run_sequential(mats, order, u, active=None, record=False):
    """Sequential conditioning over ``order`` (N x T element ids).

    ``u`` (N x T) uniforms drive the Bernoulli decisions.  Returns the
    decisions and, with ``record``, the conditional probabilities used.
    """
    n, steps = order.shape
    decided = np.zeros((n, steps), dtype=bool)
    probs = np.zeros((n, steps)) if record else None
    rows = np.arange(n)
    for s in range(steps):
        j = order[:, s]
        act = None if active is None else active[:, s]
        p = clip_probability(mats[rows, j, j])
        x = u[:, s] < p
        if act is not None:
            x &= act
        condition_step(mats, j, x, act)
        decided[:, s] = x
        if record:
            probs[:, s] = p
    return decided, probs


def _batches(total, m):
    size = max(1, BATCH_FLOATS // max(m * m, 1))
    for start in range(0, total, size):
        yield np.arange(start, min(total, start + size))


def _projection_draws(k: Kernel, seed, draws, record=False):
    m = k.size
    out = np.zeros((len(draws), m), dtype=bool)
    probs = np.zeros((len(draws), m)) if record else None
    order_row = np.arange(m)
    pos = 0
    for chunk in _batches(len(draws), m):
        ids = np.asarray(draws)[chunk]
        mats = np.repeat(k.matrix[None, :, :], len(ids), axis=0)
        order = np.broadcast_to(order_row, (len(ids), m))
        u = rng.uniforms(seed, ids, m, stream=rng.SAMPLE)
        x, p = run_sequential(mats, order, u, record=record)
        out[pos:pos + len(ids)] = x
        if record:
            probs[pos:pos + len(ids)] = p
        pos += len(ids)
    return out, probs


def _original_mask(big: Kernel, n_labels: int) -> np.ndarray:
    labels = np.arange(big.size) % big.ground.n_labels
    return labels < n_labels


def sample_many(k: Kernel, n: int, seed: int, start: int = 0) -> np.ndarray:
    """``n`` independent draws as an ``(n, |ground set|)`` boolean array.

    Contraction kernels are sampled through their dilation and the draw is
    restricted to the original labels.
    """
    draws = np.arange(start, start + n)
    if k.kind == PROJECTION:
        return _projection_draws(k, seed, draws)[0]
    big = dilate(k)
    x, _ = _projection_draws(big, seed, draws)
    return x[:, _original_mask(big, k.ground.n_labels)]


def sample_dpp(k: Kernel, seed: int, draw: int = 0, trace: bool = False) -> SampleDraw:
    if k.kind == PROJECTION:
        big, keep = k, None
    else:
        big = dilate(k)
        keep = _original_mask(big, k.ground.n_labels)
    x, p = _projection_draws(big, seed, np.array([draw]), record=trace)
    x = x[0]
    tr = tuple((int(i), float(q)) for i, q in enumerate(p[0])) if trace else None
    if keep is not None:
        x = x[keep]
    return SampleDraw(x, tr)


def inclusion_probability(k: Kernel, F: Sequence[int]) -> float:
    F = sorted(set(int(x) for x in F))
    if not F:
        return 1.0
    d = float(np.linalg.det(k.matrix[np.ix_(F, F)]))
    if -CLIP_TOL <= d < 0:
        d = 0.0
    return d


def enumerate_pmf(k: Kernel) -> ExactPmf:
    """Exact law of ``B`` by depth-first include/exclude recursion.

    Works for contractions as well as projections.  Branches below
    ``PRUNE_TOL`` are dropped.
    """
    m = k.size
    if m > MAX_ENUM:
        raise GroundSetTooLarge(f"ground set of size {m} exceeds enumeration guard {MAX_ENUM}")
    leaves = []

    def rec(mat, i, prob, chosen):
        if i == m:
            leaves.append((tuple(chosen), prob))
            return
        p = float(clip_probability(mat[i, i]))
        if prob * p >= PRUNE_TOL:
            nxt = include_update(mat, i) if i + 1 < m else mat
            chosen.append(i)
            rec(nxt, i + 1, prob * p, chosen)
            chosen.pop()
        if prob * (1 - p) >= PRUNE_TOL:
            nxt = exclude_update(mat, i) if i + 1 < m else mat
            rec(nxt, i + 1, prob * (1 - p), chosen)

    rec(np.array(k.matrix), 0, 1.0, [])
    total = sum(p for _, p in leaves)
    if abs(total - 1.0) > RENORM_TOL:
        raise KernelDrift(f"enumerated probabilities sum to {total!r}")
    return ExactPmf(tuple((s, p / total) for s, p in leaves))


def wilson_ust(g: Graph, seed: int, draw: int = 0, root: int = 0) -> tuple[int, ...]:
    """Weighted uniform spanning tree by loop-erased random walks.

    Returns the sorted edge ids of a tree drawn with probability
    ``w(T) / Z(G, w)``.
    """
    if not g.is_connected():
        raise Disconnected("Wilson's algorithm needs a connected graph")
    gen = rng.generator(seed, draw, stream=rng.WALK)
    return _wilson(g, gen, root, _walk_tables(g))


def wilson_many(g: Graph, n: int, seed: int, start: int = 0) -> list[tuple[int, ...]]:
    if not g.is_connected():
        raise Disconnected("Wilson's algorithm needs a connected graph")
    tables = _walk_tables(g)
    return [
        _wilson(g, rng.generator(seed, d, stream=rng.WALK), 0, tables)
        for d in range(start, start + n)
    ]


def _walk_tables(g):
    tables = []
    for inc in g.incident:
        w = np.array([g.edges[e].weight for e, _ in inc])
        cum = np.cumsum(w)
        tables.append((cum / cum[-1], [e for e, _ in inc], [x for _, x in inc]))
    return tables


def _wilson(g, gen, root, tables):
    n = g.vertex_count
    in_tree = [False] * n
    in_tree[root] = True
    next_edge = [-1] * n
    next_vertex = [-1] * n
    for start in range(n):
        x = start
        while not in_tree[x]:
            cum, eids, others = tables[x]
            i = int(np.searchsorted(cum, gen.random(), side="right"))
            i = min(i, len(eids) - 1)
            next_edge[x] = eids[i]
            next_vertex[x] = others[i]
            x = others[i]
        x = start
        while not in_tree[x]:
            in_tree[x] = True
            x = next_vertex[x]
    return tuple(sorted(next_edge[v] for v in range(n) if v != root))
