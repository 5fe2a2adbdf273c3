"""Finite bounded-degree multigraphs.

Edges carry stable integer ids (their position in ``Graph.edges``) and an
orientation ``u -> v``.  Parallel edges are allowed, self-loops are not.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    BadFamily,
    BadParams,
    DegreeBoundExceeded,
    Disconnected,
    EmptyGraph,
    FormatError,
    InvalidVertex,
    NonpositiveWeight,
    SelfLoop,
    UsageError,
)

__all__ = [
    "Edge",
    "Graph",
    "RootedBall",
    "build_graph",
    "generate_family",
    "ball",
    "line_graph",
    "incidence_matrix",
    "empty_graph",
    "read_graph",
    "write_graph",
    "format_graph",
    "parse_graph",
    "FAMILIES",
]

MAX_REGULAR_RETRIES = 1000


class Edge(NamedTuple):
    u: int
    v: int
    weight: float = 1.0


@dataclass(frozen=True, eq=False)
class Graph:
    vertex_count: int
    edges: tuple[Edge, ...]
    degree_bound: int

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.vertex_count, self.edges, self.degree_bound) == (
            other.vertex_count,
            other.edges,
            other.degree_bound,
        )

    def __hash__(self):
        return hash((self.vertex_count, self.edges, self.degree_bound))

    def __repr__(self):
        return f"Graph(n={self.vertex_count}, m={len(self.edges)}, D={self.degree_bound})"

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @cached_property
    def incident(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        """Per vertex, the ``(edge_id, other_endpoint)`` pairs in edge-id order."""
        inc = [[] for _ in range(self.vertex_count)]
        for i, (u, v, _) in enumerate(self.edges):
            inc[u].append((i, v))
            inc[v].append((i, u))
        return tuple(tuple(x) for x in inc)

    @cached_property
    def degrees(self) -> np.ndarray:
        deg = np.array([len(x) for x in self.incident], dtype=np.int64)
        deg.flags.writeable = False
        return deg

    @cached_property
    def weighted_degrees(self) -> np.ndarray:
        pi = np.zeros(self.vertex_count)
        for u, v, w in self.edges:
            pi[u] += w
            pi[v] += w
        pi.flags.writeable = False
        return pi

    @cached_property
    def is_weighted(self) -> bool:
        return any(e.weight != 1.0 for e in self.edges)

    def neighbors(self, v: int) -> list[int]:
        return [w for _, w in self.incident[v]]

    def distances_from(self, source: int) -> np.ndarray:
        """Unweighted BFS distances; unreachable vertices get -1."""
        if not 0 <= source < self.vertex_count:
            raise InvalidVertex(f"vertex {source} not in [0, {self.vertex_count})")
        dist = np.full(self.vertex_count, -1, dtype=np.int64)
        dist[source] = 0
        queue = deque([source])
        inc = self.incident
        while queue:
            x = queue.popleft()
            for _, y in inc[x]:
                if dist[y] < 0:
                    dist[y] = dist[x] + 1
                    queue.append(y)
        return dist

    @cached_property
    def all_distances(self) -> np.ndarray:
        """All-pairs BFS distances, -1 for pairs in different components."""
        from scipy.sparse import csr_matrix
        from scipy.sparse.csgraph import shortest_path

        n = self.vertex_count
        if self.edge_count == 0:
            out = np.full((n, n), -1, dtype=np.int64)
            np.fill_diagonal(out, 0)
        else:
            u = np.array([e.u for e in self.edges])
            v = np.array([e.v for e in self.edges])
            adj = csr_matrix((np.ones(len(u)), (u, v)), shape=(n, n))
            d = shortest_path(adj, directed=False, unweighted=True)
            out = np.where(np.isinf(d), -1, d).astype(np.int64)
        out.flags.writeable = False
        return out

    def is_connected(self) -> bool:
        if self.vertex_count == 0:
            return False
        return bool(np.all(self.distances_from(0) >= 0))

    def require_connected(self):
        if not self.is_connected():
            raise Disconnected("graph is not connected")

    def adjacency_matrix(self, weighted: bool = False) -> np.ndarray:
        adj = np.zeros((self.vertex_count, self.vertex_count))
        for u, v, w in self.edges:
            x = w if weighted else 1.0
            adj[u, v] += x
            adj[v, u] += x
        return adj

    def laplacian(self, weighted: bool = True) -> np.ndarray:
        adj = self.adjacency_matrix(weighted=weighted)
        return np.diag(adj.sum(axis=1)) - adj

    def reoriented(self, flips: Sequence[bool]) -> "Graph":
        """Same graph with edge ``i`` reversed wherever ``flips[i]`` is true."""
        edges = tuple(
            Edge(e.v, e.u, e.weight) if f else e for e, f in zip(self.edges, flips)
        )
        return Graph(self.vertex_count, edges, self.degree_bound)


@dataclass(frozen=True)
class RootedBall:
    """Induced r-ball around ``root``.

    Ball vertices are ordered by (distance to root, original index), so the
    root is always ball vertex 0.
    """

    graph: Graph
    radius: int
    vertex_map: tuple[int, ...]
    distances: tuple[int, ...] = field(repr=False)
    root: int = 0

    @property
    def size(self) -> int:
        return self.graph.vertex_count


def _check_edges(n, edges, degree_bound):
    deg = [0] * n
    out = []
    for item in edges:
        if len(item) == 2:
            u, v = item
            w = 1.0
        elif len(item) == 3:
            u, v, w = item
        else:
            raise BadParams(f"edge must be (u, v) or (u, v, w), got {item!r}")
        u, v, w = int(u), int(v), float(w)
        if u < 0 or v < 0 or u >= n or v >= n:
            raise InvalidVertex(f"edge ({u}, {v}) has a vertex outside [0, {n})")
        if u == v:
            raise SelfLoop(f"self-loop at vertex {u}")
        if not (w > 0 and math.isfinite(w)):
            raise NonpositiveWeight(f"edge ({u}, {v}) has weight {w}")
        deg[u] += 1
        deg[v] += 1
        out.append(Edge(u, v, w))
    for x, d in enumerate(deg):
        if d > degree_bound:
            raise DegreeBoundExceeded(
                f"vertex {x} has degree {d} > degree bound {degree_bound}"
            )
    return tuple(out)


def build_graph(edge_list, degree_bound: int, vertex_count: int | None = None) -> Graph:
    """Build a validated graph; orientation follows the listed order ``u -> v``."""
    edge_list = list(edge_list)
    if vertex_count is None:
        vertex_count = 0
        for item in edge_list:
            if min(item[0], item[1]) < 0:
                raise InvalidVertex(f"negative vertex index in {item!r}")
            vertex_count = max(vertex_count, int(item[0]) + 1, int(item[1]) + 1)
    if degree_bound < 0:
        raise BadParams("degree bound must be non-negative")
    edges = _check_edges(vertex_count, edge_list, degree_bound)
    return Graph(int(vertex_count), edges, int(degree_bound))


def empty_graph(n: int) -> Graph:
    return Graph(int(n), (), 0)


def _max_degree(n, pairs):
    deg = [0] * n
    for u, v in pairs:
        deg[u] += 1
        deg[v] += 1
    return max(deg, default=0)


def _lex(pairs):
    return [(min(u, v), max(u, v)) for u, v in pairs]


def _cycle(n):
    if n < 3:
        raise BadParams("cycle needs n >= 3")
    return _lex([(i, (i + 1) % n) for i in range(n)]), n


def _path(n):
    if n < 1:
        raise BadParams("path needs n >= 1")
    return [(i, i + 1) for i in range(n - 1)], n


def _complete(n):
    if n < 1:
        raise BadParams("complete needs n >= 1")
    return [(i, j) for i in range(n) for j in range(i + 1, n)], n


def _torus2d(rows, cols=None):
    cols = rows if cols is None else cols
    if rows < 3 or cols < 3:
        raise BadParams("torus2d sides must be >= 3")
    pairs = []
    for i in range(rows):
        for j in range(cols):
            v = i * cols + j
            pairs.append((v, i * cols + (j + 1) % cols))
            pairs.append((v, ((i + 1) % rows) * cols + j))
    return _lex(pairs), rows * cols


def _doubled_star(arms=3):
    if arms < 1:
        raise BadParams("doubled_star needs arms >= 1")
    pairs = []
    for leaf in range(1, arms + 1):
        pairs += [(0, leaf), (0, leaf)]
    return pairs, arms + 1


def _hypercube(d):
    if d < 1:
        raise BadParams("hypercube needs d >= 1")
    n = 1 << d
    return [(v, v | (1 << b)) for v in range(n) for b in range(d) if not v & (1 << b)], n


def _random_regular(n, d, seed):
    if seed is None:
        raise BadParams("random_regular requires a seed")
    if n < 1 or d < 0 or d >= n or (n * d) % 2:
        raise BadParams("random_regular needs 0 <= d < n and n*d even")
    from .rng import generator

    rng = generator(seed, 0, stream=0x7267)
    stubs = np.repeat(np.arange(n), d)
    for _ in range(MAX_REGULAR_RETRIES):
        perm = rng.permutation(stubs)
        pairs = _lex(zip(perm[0::2].tolist(), perm[1::2].tolist()))
        if all(u != v for u, v in pairs) and len(set(pairs)) == len(pairs):
            return sorted(pairs), n
    raise BadParams(f"no simple {d}-regular graph on {n} vertices after {MAX_REGULAR_RETRIES} tries")


FAMILIES = {
    "cycle": _cycle,
    "path": _path,
    "complete": _complete,
    "torus2d": _torus2d,
    "doubled_star": _doubled_star,
    "hypercube": _hypercube,
    "random_regular": _random_regular,
}


def generate_family(name: str, *args, seed: int | None = None, degree_bound: int | None = None, **params) -> Graph:
    """Deterministic graph families.

    >>> generate_family("complete", 4).edge_count
    6
    >>> generate_family("torus2d", 8).vertex_count
    64
    """
    try:
        maker = FAMILIES[name]
    except KeyError:
        raise BadFamily(f"unknown family {name!r}; choose from {sorted(FAMILIES)}") from None
    try:
        if name == "random_regular":
            pairs, n = maker(*args, seed=seed, **params)
        else:
            pairs, n = maker(*args, **params)
    except TypeError as exc:
        raise BadParams(f"bad parameters for {name}: {exc}") from None
    bound = _max_degree(n, pairs) if degree_bound is None else degree_bound
    return build_graph(pairs, bound, vertex_count=n)


def ball(g: Graph, root: int, r: int) -> RootedBall:
    if r < 0:
        raise BadParams("radius must be non-negative")
    dist = g.distances_from(root)
    inside = [v for v in range(g.vertex_count) if 0 <= dist[v] <= r]
    inside.sort(key=lambda v: (dist[v], v))
    index = {v: i for i, v in enumerate(inside)}
    edges = [
        Edge(index[u], index[v], w)
        for u, v, w in g.edges
        if u in index and v in index
    ]
    sub = Graph(len(inside), tuple(edges), g.degree_bound)
    return RootedBall(sub, r, tuple(inside), tuple(int(dist[v]) for v in inside))


def line_graph(g: Graph) -> tuple[Graph, tuple[int, ...]]:
    """Line graph; edge ``i`` of ``g`` becomes vertex ``i``.

    Two edges get one adjacency per shared endpoint, so parallel edges are
    joined twice.
    """
    if g.edge_count == 0:
        raise EmptyGraph("line graph of a graph without edges")
    pairs = []
    for inc in g.incident:
        ids = [i for i, _ in inc]
        for a in range(len(ids)):
            for b in range(a + 1, len(ids)):
                pairs.append((min(ids[a], ids[b]), max(ids[a], ids[b])))
    pairs.sort()
    bound = max(2 * (g.degree_bound - 1), 0)
    lg = Graph(g.edge_count, tuple(Edge(u, v) for u, v in pairs), bound)
    return lg, tuple(range(g.edge_count))


def incidence_matrix(g: Graph, weighted: bool = False) -> np.ndarray:
    """Vertex-edge incidence matrix: +1 where the edge enters, -1 where it leaves."""
    a = np.zeros((g.vertex_count, g.edge_count))
    for i, (u, v, w) in enumerate(g.edges):
        s = math.sqrt(w) if weighted else 1.0
        a[u, i] = -s
        a[v, i] = s
    return a


# text format: "graph <n> <D>" header, then "u v [w]" per edge, '#' comments


def format_graph(g: Graph) -> str:
    lines = [f"graph {g.vertex_count} {g.degree_bound}"]
    for u, v, w in g.edges:
        lines.append(f"{u} {v}" if w == 1.0 else f"{u} {v} {w!r}")
    return "\n".join(lines) + "\n"


def parse_graph(text: str) -> Graph:
    header = None
    edges, deg = [], {}
    offset = 0
    for raw in text.splitlines(keepends=True):
        line = raw.split("#", 1)[0].strip()
        if line:
            parts = line.split()
            if header is None:
                if parts[0] != "graph" or len(parts) != 3:
                    raise FormatError("expected header 'graph <n_vertices> <degree_bound>'", offset)
                try:
                    header = (int(parts[1]), int(parts[2]))
                except ValueError:
                    raise FormatError("non-integer in graph header", offset) from None
            else:
                if len(parts) not in (2, 3):
                    raise FormatError("edge line must be 'u v [w]'", offset)
                try:
                    item = (int(parts[0]), int(parts[1])) + tuple(float(x) for x in parts[2:])
                except ValueError:
                    raise FormatError("unparsable edge line", offset) from None
                try:
                    # per-line check so the offset points at the culprit
                    _check_edges(header[0], [item], max(header[1], 1))
                except UsageError as exc:
                    raise FormatError(str(exc), offset) from None
                edges.append(item)
                for x in item[:2]:
                    deg[x] = deg.get(x, 0) + 1
                if max(deg[item[0]], deg[item[1]]) > header[1]:
                    raise FormatError(f"degree bound {header[1]} exceeded", offset)
        offset += len(raw.encode())
    if header is None:
        raise FormatError("missing graph header", 0)
    try:
        return build_graph(edges, header[1], vertex_count=header[0])
    except UsageError as exc:
        raise FormatError(str(exc), 0) from None


def write_graph(path, g: Graph) -> None:
    with open(path, "w") as fh:
        fh.write(format_graph(g))


def read_graph(path) -> Graph:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise FormatError(f"cannot read graph file {path}: {exc}") from None
    except UnicodeDecodeError as exc:
        raise FormatError(f"graph file {path} is not text", exc.start) from None
    return parse_graph(text)
