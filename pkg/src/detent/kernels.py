"""DPP kernels on ground sets ``V x K``.

Elements are ordered lexicographically by (vertex, label), so element
``v * n_labels + k`` is vertex ``v`` with label ``k``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import Disconnected, EmptyGraph, EmptyLabelSet, NotContraction, NotSymmetric, UsageError
from .graph import Graph, incidence_matrix, line_graph

SYMMETRY_TOL = 1e-10
CONTRACTION_TOL = 1e-8
PROJECTION_TOL = 1e-8
# eigenvalues farther than this outside [0, 1] trigger a spectral clip
CLIP_EPS = 1e-12
PINV_RTOL = 1e-10

PROJECTION = "projection"
CONTRACTION = "contraction"


@dataclass(frozen=True, eq=False)
class GroundSet:
    """Index set ``V(base_graph) x range(n_labels)``.

    ``source_graph`` is set for edge ground sets (transfer currents): the
    base graph is then its line graph and vertex ``i`` of the base graph is
    edge ``i`` of the source.
    """

    base_graph: Graph
    n_labels: int = 1
    source_graph: Graph | None = None

    def __post_init__(self):
        if self.n_labels < 1:
            raise EmptyLabelSet("label set must be non-empty")

    @property
    def size(self) -> int:
        return self.base_graph.vertex_count * self.n_labels

    @property
    def vertex_count(self) -> int:
        return self.base_graph.vertex_count

    def element(self, vertex: int, label: int = 0) -> int:
        return vertex * self.n_labels + label

    def vertex_label(self, element: int) -> tuple[int, int]:
        return divmod(element, self.n_labels)

    def elements_of(self, vertices: Sequence[int]) -> np.ndarray:
        v = np.asarray(vertices, dtype=np.int64)
        return (v[:, None] * self.n_labels + np.arange(self.n_labels)[None, :]).ravel()

    def rebased(self, graph: Graph) -> "GroundSet":
        if graph.vertex_count != self.vertex_count:
            raise UsageError("new base graph must have the same vertex count")
        return GroundSet(graph, self.n_labels, self.source_graph)


@dataclass(frozen=True, eq=False)
class Kernel:
    ground: GroundSet
    matrix: np.ndarray = field(repr=False)
    kind: str

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_projection(self) -> bool:
        return self.kind == PROJECTION

    def rank(self) -> int:
        """Number of eigenvalues >= 1/2 (the rank, for projections)."""
        return int(np.sum(np.linalg.eigvalsh(self.matrix) >= 0.5))

    def rebased(self, graph: Graph) -> "Kernel":
        return Kernel(self.ground.rebased(graph), self.matrix, self.kind)


@dataclass(frozen=True)
class SpectralSummary:
    eigenvalues: np.ndarray
    normalized_trace: float
    weight: float

    @property
    def total_mass(self) -> float:
        return self.weight * len(self.eigenvalues)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.flags.writeable = False
    return a


def validate_kernel(matrix, ground: GroundSet, clip: bool = True) -> Kernel:
    """Check symmetry and the contraction range, then classify.

    Tiny asymmetries are averaged out and, with ``clip``, eigenvalues that
    leave ``[0, 1]`` by more than ``CLIP_EPS`` are clipped back.  A matrix
    that needs neither is stored bit-for-bit.
    """
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise UsageError(f"kernel must be square, got shape {m.shape}")
    if m.shape[0] != ground.size:
        raise UsageError(f"kernel size {m.shape[0]} does not match ground set size {ground.size}")
    if not np.all(np.isfinite(m)):
        raise NotContraction("kernel has non-finite entries")
    asym = float(np.max(np.abs(m - m.T))) if m.size else 0.0
    if asym > SYMMETRY_TOL:
        raise NotSymmetric(f"max |M - M^T| = {asym:.3e} exceeds {SYMMETRY_TOL}")
    if asym > 0:
        m = (m + m.T) / 2
    if m.size:
        lam, vec = np.linalg.eigh(m)
        lo, hi = float(lam[0]), float(lam[-1])
        if lo < -CONTRACTION_TOL or hi > 1 + CONTRACTION_TOL:
            raise NotContraction(f"eigenvalues span [{lo:.3e}, {hi:.3e}], outside [0, 1]")
        if clip and (lo < -CLIP_EPS or hi > 1 + CLIP_EPS):
            m = (vec * np.clip(lam, 0.0, 1.0)) @ vec.T
            m = (m + m.T) / 2
        idem = float(np.max(np.abs(m @ m - m)))
    else:
        idem = 0.0
    kind = PROJECTION if idem <= PROJECTION_TOL else CONTRACTION
    return Kernel(ground, _frozen(m), kind)


def laplacian_pinv(lap: np.ndarray) -> np.ndarray:
    lam, vec = np.linalg.eigh(lap)
    cut = PINV_RTOL * max(float(lam[-1]), 0.0)
    inv = np.where(lam > cut, 1.0 / np.where(lam > cut, lam, 1.0), 0.0)
    return (vec * inv) @ vec.T


def transfer_current(g: Graph) -> Kernel:
    """Projection onto the row space of the (weighted) incidence matrix.

    Its DPP is the weighted spanning-tree measure ``w(T)/Z(G, w)``.
    """
    if g.edge_count == 0:
        raise EmptyGraph("transfer current needs at least one edge")
    if not g.is_connected():
        raise Disconnected("transfer current needs a connected graph")
    a = incidence_matrix(g, weighted=True)
    p = a.T @ laplacian_pinv(a @ a.T) @ a
    p = (p + p.T) / 2
    lg, _ = line_graph(g)
    return validate_kernel(p, GroundSet(lg, 1, source_graph=g))


def _vertex_major(n_vertices, n_labels, blocks):
    """Permutation taking label-major block order to (vertex, label) order."""
    n_blocks = len(blocks)
    big = np.block(blocks)
    # label-major index of (vertex v, new label b*n_labels + k)
    v = np.arange(n_vertices)[:, None, None]
    b = np.arange(n_blocks)[None, :, None]
    k = np.arange(n_labels)[None, None, :]
    perm = (b * n_vertices * n_labels + v * n_labels + k).ravel()
    return big[np.ix_(perm, perm)]


def dilate(t: Kernel) -> Kernel:
    """Standard extension ``[[T, q(T)], [q(T), I - T]]`` with ``q(x) = sqrt(x(1-x))``.

    The original labels keep indices ``0..|K|-1``; the added copies get
    ``|K|..2|K|-1``.
    """
    m = t.matrix
    lam, vec = np.linalg.eigh(m)
    lam = np.clip(lam, 0.0, 1.0)
    q = (vec * np.sqrt(lam * (1.0 - lam))) @ vec.T
    q = (q + q.T) / 2
    eye = np.eye(m.shape[0])
    big = _vertex_major(t.ground.vertex_count, t.ground.n_labels, [[m, q], [q, eye - m]])
    ground = GroundSet(t.ground.base_graph, 2 * t.ground.n_labels, t.ground.source_graph)
    return validate_kernel(big, ground, clip=False)


def restrict(k: Kernel, labels: Sequence[int]) -> Kernel:
    labels = sorted(set(int(x) for x in labels))
    if not labels:
        raise EmptyLabelSet("restrict needs a non-empty label set")
    if labels[0] < 0 or labels[-1] >= k.ground.n_labels:
        raise UsageError(f"labels must lie in [0, {k.ground.n_labels})")
    n, kk = k.ground.vertex_count, k.ground.n_labels
    idx = (np.arange(n)[:, None] * kk + np.asarray(labels)[None, :]).ravel()
    sub = k.matrix[np.ix_(idx, idx)]
    ground = GroundSet(k.ground.base_graph, len(labels), k.ground.source_graph)
    return validate_kernel(sub, ground, clip=False)


def spectral_summary(k: Kernel) -> SpectralSummary:
    lam = np.linalg.eigvalsh(k.matrix)
    nv = max(k.ground.vertex_count, 1)
    return SpectralSummary(_frozen(lam), float(np.sum(lam)) / nv, 1.0 / nv)


def identity_kernel(ground: GroundSet, scale: float = 1.0) -> Kernel:
    return validate_kernel(scale * np.eye(ground.size), ground)
