"""Shannon entropy of determinantal measures (natural log).

Exact routes enumerate the law or walk the chain-rule conditioning tree.
Monte-Carlo routes sum binary entropies of conditional inclusion
probabilities along a sequential draw (unbiased for ``H`` under any order),
or estimate the per-element functional ``hbar`` through a Bernoulli(t)
percolation of the ground set with ``t ~ U[0, 1]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from . import rng
from .errors import Disconnected, GroundSetTooLarge, InvalidRadius, UsageError
from .conditioning import exclude_update, include_update
from .graph import Graph, ball
from .kernels import Kernel
from .sampling import MAX_ENUM, PRUNE_TOL, clip_probability, enumerate_pmf, run_sequential

EXACT = "exact"
CHAIN_EXACT = "chain_exact"
MC_CHAIN = "mc_chain"
HBAR_PERCOLATION = "hbar_percolation"
HBAR_LOCAL = "hbar_local"
LYONS = "lyons_formula"

BATCH_FLOATS = 1 << 22
DEFAULT_KMAX = 10_000


@dataclass(frozen=True)
class EntropyEstimate:
    value: float
    std_error: float
    replicates: int
    method: str
    extras: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        d = {
            "method": self.method,
            "value": float(self.value),
            "std_error": float(self.std_error),
            "replicates": self.replicates,
        }
        d.update(self.extras)
        return d


@dataclass(frozen=True)
class LabelOrder:
    """Visiting order as a permutation; real labels are sorted ascending."""

    permutation: tuple[int, ...]

    @classmethod
    def identity(cls, m: int) -> "LabelOrder":
        return cls(tuple(range(m)))

    @classmethod
    def from_labels(cls, labels: Sequence[float]) -> "LabelOrder":
        labels = np.asarray(labels, dtype=np.float64)
        if len(np.unique(labels)) != len(labels):
            raise UsageError("labels must be distinct")
        return cls(tuple(int(i) for i in np.argsort(labels, kind="stable")))

    def __post_init__(self):
        perm = tuple(int(i) for i in self.permutation)
        if sorted(perm) != list(range(len(perm))):
            raise UsageError("order must be a permutation of the ground set")
        object.__setattr__(self, "permutation", perm)


def binary_entropy(x):
    """``-x log x - (1-x) log(1-x)`` with ``g(0) = g(1) = 0``."""
    x = np.asarray(x, dtype=np.float64)
    if np.any(x < -1e-12) or np.any(x > 1 + 1e-12):
        raise UsageError(f"binary entropy argument outside [0, 1]: {x}")
    x = np.clip(x, 0.0, 1.0)
    inner = (x > 1e-12) & (x < 1 - 1e-12)
    xs = np.where(inner, x, 0.5)
    out = np.where(inner, -xs * np.log(xs) - (1 - xs) * np.log1p(-xs), 0.0)
    return float(out) if out.ndim == 0 else out


def exact_entropy(k: Kernel) -> EntropyEstimate:
    pmf = enumerate_pmf(k)
    h = -math.fsum(p * math.log(p) for _, p in pmf.support if p > 0)
    return EntropyEstimate(max(h, 0.0), 0.0, 1, EXACT, {"support_size": len(pmf.support)})


def chain_entropy_exact(k: Kernel, order: LabelOrder | None = None) -> EntropyEstimate:
    """Sum over the conditioning tree of ``P(branch) * g(conditional probability)``."""
    m = k.size
    if m > MAX_ENUM:
        raise GroundSetTooLarge(f"ground set of size {m} exceeds enumeration guard {MAX_ENUM}")
    perm = (order or LabelOrder.identity(m)).permutation
    if len(perm) != m:
        raise UsageError("order length does not match the ground set")
    terms = []

    def rec(mat, i, prob):
        if i == m:
            return
        e = perm[i]
        p = float(clip_probability(mat[e, e]))
        terms.append(prob * binary_entropy(p))
        if prob * p >= PRUNE_TOL:
            rec(include_update(mat, e), i + 1, prob * p)
        if prob * (1 - p) >= PRUNE_TOL:
            rec(exclude_update(mat, e), i + 1, prob * (1 - p))

    rec(np.array(k.matrix), 0, 1.0)
    return EntropyEstimate(max(math.fsum(terms), 0.0), 0.0, 1, CHAIN_EXACT)


def _summary(samples, method, extras=None) -> EntropyEstimate:
    samples = np.asarray(samples, dtype=np.float64)
    n = len(samples)
    mean = math.fsum(samples) / n
    sd = math.sqrt(math.fsum((samples - mean) ** 2) / (n - 1)) if n > 1 else 0.0
    return EntropyEstimate(mean, sd / math.sqrt(n), n, method, extras or {})


def _chunks(total, m):
    size = max(1, BATCH_FLOATS // max(m * m, 1))
    for s in range(0, total, size):
        yield np.arange(s, min(total, s + size))


def mc_entropy_samples(k: Kernel, n_samples: int, seed: int) -> np.ndarray:
    """Per-replicate chain-rule sums along uniformly random orders."""
    m = k.size
    out = np.empty(n_samples)
    for ids in _chunks(n_samples, m):
        order = np.argsort(rng.uniforms(seed, ids, m, stream=rng.ORDER), axis=1)
        u = rng.uniforms(seed, ids, m, stream=rng.SAMPLE)
        mats = np.repeat(k.matrix[None], len(ids), axis=0)
        _, probs = run_sequential(mats, order, u, record=True)
        out[ids] = binary_entropy(probs).sum(axis=1)
    return out


def mc_entropy(k: Kernel, n_samples: int, seed: int) -> EntropyEstimate:
    if n_samples < 1:
        raise UsageError("n_samples must be >= 1")
    return _summary(mc_entropy_samples(k, n_samples, seed), MC_CHAIN, {"seed": seed})


def _hbar_samples(matrix, target, elem_ids, seed, draws):
    """``g(<P_{/C-D} e, e>)`` with ``(C, D)`` from a Bernoulli(t) percolation.

    ``matrix`` is the kernel on the local elements (global ids ``elem_ids``),
    ``target`` a local index.  Uniforms are keyed by global element id so
    runs at different radii share randomness on common elements.
    """
    m = matrix.shape[0]
    out = np.empty(len(draws))
    pos = 0
    for chunk in _chunks(len(draws), m):
        ids = np.asarray(draws)[chunk]
        t = rng.uniforms(seed, ids, 1, stream=rng.THRESHOLD)[:, 0]
        perc = rng.uniforms_at(seed, ids, elem_ids, stream=rng.PERCOLATION) < t[:, None]
        perc[:, target] = False
        u = rng.uniforms_at(seed, ids, elem_ids, stream=rng.SAMPLE)
        mats = np.repeat(matrix[None], len(ids), axis=0)
        order = np.broadcast_to(np.arange(m), (len(ids), m))
        run_sequential(mats, order, u, active=perc)
        out[pos:pos + len(ids)] = binary_entropy(clip_probability(mats[:, target, target]))
        pos += len(ids)
    return out


def hbar_percolation(k: Kernel, e: int, n_samples: int, seed: int) -> EntropyEstimate:
    """Estimate ``hbar(e) = E H(I(e) | I(f) for labels below e's)``."""
    if not 0 <= e < k.size:
        raise UsageError(f"element {e} outside ground set")
    if n_samples < 1:
        raise UsageError("n_samples must be >= 1")
    elems = np.arange(k.size)
    s = _hbar_samples(k.matrix, int(e), elems, seed, np.arange(n_samples) * k.size + e)
    return _summary(s, HBAR_PERCOLATION, {"seed": seed, "element": int(e)})


def _parse_radius(r):
    if r is None or r == math.inf or (isinstance(r, str) and r.lower() in ("inf", "infinity")):
        return None
    try:
        r = int(r)
    except (TypeError, ValueError):
        raise InvalidRadius(f"radius must be a non-negative integer or inf, got {r!r}") from None
    if r < 0:
        raise InvalidRadius("radius must be non-negative")
    return r


def choose_roots(n_vertices: int, roots, seed: int) -> np.ndarray:
    """``roots`` is ``"all"``, an int (uniform draws with replacement) or explicit vertices."""
    if isinstance(roots, str):
        if roots != "all":
            raise UsageError(f"unknown roots spec {roots!r}")
        return np.arange(n_vertices)
    if isinstance(roots, (int, np.integer)):
        u = rng.uniforms(seed, np.arange(int(roots)), 1, stream=rng.ROOTS)[:, 0]
        return np.minimum((u * n_vertices).astype(np.int64), n_vertices - 1)
    out = np.asarray(list(roots), dtype=np.int64)
    if np.any(out < 0) or np.any(out >= n_vertices):
        raise UsageError("root outside the base graph")
    return out


def hbar_graph_sum(k: Kernel, roots="all", r=None, n_samples: int = 100, seed: int = 0,
                   graph: Graph | None = None) -> EntropyEstimate:
    """Average over roots of ``sum_labels hbar_r((root, label))``.

    With ``r=None`` (infinite radius) the percolation and conditioning run
    over the whole ground set and ``|V| * value`` estimates ``H(B)``; with a
    finite ``r`` they are confined to the radius-``r`` ball of the root in
    the base graph, giving an upper-bound estimator.
    """
    radius = _parse_radius(r)
    g = graph or k.ground.base_graph
    nl = k.ground.n_labels
    roots_arr = choose_roots(g.vertex_count, roots, seed)
    samples = np.zeros((len(roots_arr), n_samples))
    cache = {}
    for ri, v in enumerate(roots_arr.tolist()):
        if v not in cache:
            if radius is None:
                elems = np.arange(k.size)
            else:
                elems = k.ground.elements_of(ball(g, v, radius).vertex_map)
            cache[v] = (elems, k.matrix[np.ix_(elems, elems)])
        elems, sub = cache[v]
        local = {int(x): i for i, x in enumerate(elems)}
        for lab in range(nl):
            gid = k.ground.element(v, lab)
            draws = (np.arange(n_samples) + ri * n_samples) * nl + lab
            samples[ri] += _hbar_samples(sub, local[gid], elems, seed, draws)
    n_roots = len(roots_arr)
    value = math.fsum(samples.ravel()) / samples.size
    if isinstance(roots, (int, np.integer)) and n_roots > 1:
        # random roots: root-level clusters are the independent units
        se = float(np.std(samples.mean(axis=1), ddof=1)) / math.sqrt(n_roots)
    elif n_samples > 1:
        se = math.sqrt(float(np.sum(samples.var(axis=1, ddof=1))) / n_samples) / n_roots
    else:
        se = 0.0
    return EntropyEstimate(value, se, int(samples.size), HBAR_LOCAL, {
        "seed": seed,
        "radius": "inf" if radius is None else radius,
        "roots": n_roots,
    })


def transition_matrix(g: Graph, weighted: bool = False) -> sp.csr_matrix:
    adj = sp.lil_matrix((g.vertex_count, g.vertex_count))
    for u, v, w in g.edges:
        x = w if weighted else 1.0
        adj[u, v] += x
        adj[v, u] += x
    adj = adj.tocsr()
    deg = np.asarray(adj.sum(axis=1)).ravel()
    return sp.diags(1.0 / deg) @ adj


def return_probabilities(g: Graph, roots: Sequence[int], k_max: int, weighted: bool = False) -> np.ndarray:
    """``p_k(o)`` for ``k = 1..k_max`` and each root, shape ``(k_max, len(roots))``."""
    pt = transition_matrix(g, weighted).T.tocsr()
    roots = np.asarray(roots, dtype=np.int64)
    x = np.zeros((g.vertex_count, len(roots)))
    x[roots, np.arange(len(roots))] = 1.0
    out = np.empty((k_max, len(roots)))
    cols = np.arange(len(roots))
    for step in range(k_max):
        x = pt @ x
        out[step] = x[roots, cols]
    return out


def lyons_formula(g: Graph, roots="all", k_max: int = DEFAULT_KMAX, weighted: bool | None = None,
                  seed: int = 0) -> EntropyEstimate:
    """``E[log deg(o) - sum_{k <= k_max} p_k(o) / k]`` by exact walk recursion.

    The weighted variant uses ``log pi(o)`` and the walk ``p(x, y) = w(xy) / pi(x)``.
    """
    if k_max < 1:
        raise UsageError("k_max must be >= 1")
    if not g.is_connected():
        raise Disconnected("Lyons' formula needs a connected graph")
    if weighted is None:
        weighted = g.is_weighted
    roots_arr = choose_roots(g.vertex_count, roots, seed)
    uniq, inverse = np.unique(roots_arr, return_inverse=True)
    pk = return_probabilities(g, uniq, k_max, weighted)
    inv_k = 1.0 / np.arange(1, k_max + 1)
    terms = pk * inv_k[:, None]
    series = np.array([math.fsum(terms[:, i]) for i in range(len(uniq))])
    base = np.log(g.weighted_degrees if weighted else g.degrees.astype(np.float64))[uniq]
    per_root = (base - series)[inverse]
    last = float(np.mean(terms[-1][inverse]))
    est = _summary(per_root, LYONS, {"k_max": k_max, "last_increment": last})
    if isinstance(roots, str):
        est = EntropyEstimate(est.value, 0.0, est.replicates, est.method, est.extras)
    return est


def matrix_tree_logZ(g: Graph) -> float:
    """``log`` of a cofactor of the weighted Laplacian (``log tau`` if unweighted)."""
    if not g.is_connected():
        raise Disconnected("matrix-tree count needs a connected graph")
    if g.vertex_count == 1:
        return 0.0
    lap = g.laplacian(weighted=True)[1:, 1:]
    sign, logdet = np.linalg.slogdet(lap)
    if sign <= 0:
        raise Disconnected("reduced Laplacian is singular")
    return float(logdet)
