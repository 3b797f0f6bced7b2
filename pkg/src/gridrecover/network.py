"""Electrical network model: weighted graphs, Laplacian and admittance matrices.

A network is an undirected graph without loops.  Each edge of a DC network
carries a non-negative conductance; an AC edge carries a non-negative
conductance and susceptance, combined into the complex admittance ``c - i*s``.
Matrices are dense; the intended scale is a few dozen nodes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

Edge = tuple[int, int]

DC = "dc"
AC = "ac"


def _canonical_edges(n: int, edges: Iterable[Sequence[int]]) -> tuple[Edge, ...]:
    """Validate 1-based endpoints and orient every edge as (j, k) with j < k."""
    out: list[Edge] = []
    seen: set[Edge] = set()
    for j, k in edges:
        j, k = int(j), int(k)
        if j == k:
            raise ValueError(f"loop edge ({j},{j}) is not allowed")
        if not (1 <= j <= n and 1 <= k <= n):
            raise ValueError(f"edge ({j},{k}) out of range for n={n}")
        if j > k:
            j, k = k, j
        if (j, k) in seen:
            raise ValueError(f"duplicate edge ({j},{k})")
        seen.add((j, k))
        out.append((j, k))
    return tuple(out)


def _weight_array(values, count: int, label: str) -> np.ndarray:
    w = np.array(values, dtype=float)
    if w.shape != (count,):
        raise ValueError(f"{label} must have exactly one entry per edge")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise ValueError(f"{label} must be finite and non-negative")
    w.setflags(write=False)
    return w


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Undirected graph with a single non-negative real weight per edge."""

    n: int
    edges: tuple[Edge, ...]
    w: np.ndarray

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one node")
        object.__setattr__(self, "edges", _canonical_edges(self.n, self.edges))
        object.__setattr__(self, "w", _weight_array(self.w, len(self.edges), "weights"))

    def __eq__(self, other):
        return (
            isinstance(other, WeightedGraph)
            and self.n == other.n
            and self.edges == other.edges
            and np.array_equal(self.w, other.w)
        )

    def positive(self) -> "WeightedGraph":
        """Drop zero-weight edges."""
        keep = self.w > 0
        edges = tuple(e for e, k in zip(self.edges, keep) if k)
        return WeightedGraph(self.n, edges, self.w[keep])


@dataclass(frozen=True, eq=False)
class Network:
    """Electrical network: nodes 1..n, canonical edges, per-edge weights.

    ``kind`` is ``"dc"`` or ``"ac"``.  DC networks must have all
    susceptances equal to zero.  Zero-weight edges are allowed (they do not
    change the state space) but are dropped by :meth:`normalized`.
    """

    kind: str
    n: int
    edges: tuple[Edge, ...]
    c: np.ndarray
    s: np.ndarray

    def __post_init__(self):
        if self.kind not in (DC, AC):
            raise ValueError(f"kind must be 'dc' or 'ac', got {self.kind!r}")
        if self.n < 1:
            raise ValueError("need at least one node")
        object.__setattr__(self, "edges", _canonical_edges(self.n, self.edges))
        ne = len(self.edges)
        object.__setattr__(self, "c", _weight_array(self.c, ne, "conductances"))
        object.__setattr__(self, "s", _weight_array(self.s, ne, "susceptances"))
        if self.kind == DC and np.any(self.s != 0):
            raise ValueError("DC networks must have zero susceptance everywhere")
        object.__setattr__(self, "_index", {e: i for i, e in enumerate(self.edges)})

    @classmethod
    def dc(cls, n: int, edges, conductances) -> "Network":
        edges = tuple(edges)
        return cls(DC, n, edges, conductances, np.zeros(len(edges)))

    @classmethod
    def ac(cls, n: int, edges, conductances, susceptances) -> "Network":
        return cls(AC, n, tuple(edges), conductances, susceptances)

    def __eq__(self, other):
        return (
            isinstance(other, Network)
            and self.kind == other.kind
            and self.n == other.n
            and self.edges == other.edges
            and np.array_equal(self.c, other.c)
            and np.array_equal(self.s, other.s)
        )

    def edge_index(self, j: int, k: int) -> int:
        """Index of edge (j, k), looked up symmetrically."""
        if j > k:
            j, k = k, j
        return self._index[(j, k)]

    def has_edge(self, j: int, k: int) -> bool:
        if j > k:
            j, k = k, j
        return (j, k) in self._index

    def weight(self, j: int, k: int) -> complex:
        """Complex admittance c - i*s of an edge; 0 for absent edges."""
        if not self.has_edge(j, k):
            return 0.0
        i = self.edge_index(j, k)
        return complex(self.c[i], -self.s[i])

    def normalized(self) -> "Network":
        """Drop edges whose conductance and susceptance are both zero."""
        keep = (self.c > 0) | (self.s > 0)
        edges = tuple(e for e, k in zip(self.edges, keep) if k)
        return Network(self.kind, self.n, edges, self.c[keep], self.s[keep])

    def support_graph(self) -> WeightedGraph:
        """Graph of edges with any positive weight, weighted by c + s."""
        return WeightedGraph(self.n, self.edges, self.c + self.s).positive()


def split_graphs(net: Network) -> tuple[WeightedGraph, WeightedGraph]:
    """Conductance and susceptance graphs, same edge carrier, weights c and s."""
    cg = WeightedGraph(net.n, net.edges, net.c)
    sg = WeightedGraph(net.n, net.edges, net.s)
    return cg, sg


def laplacian(g: WeightedGraph) -> np.ndarray:
    """Dense Laplacian: -w on edges, weighted degrees on the diagonal."""
    L = np.zeros((g.n, g.n))
    for (j, k), w in zip(g.edges, g.w):
        a, b = j - 1, k - 1
        L[a, b] -= w
        L[b, a] -= w
        L[a, a] += w
        L[b, b] += w
    return L


def admittance_matrix(net: Network) -> np.ndarray:
    """Complex admittance matrix, the conductance Laplacian minus i times the
    susceptance Laplacian.  For DC networks the imaginary part is identically
    zero (but the dtype is still complex)."""
    cg, sg = split_graphs(net)
    return laplacian(cg) - 1j * laplacian(sg)


def series_equivalent(w1: complex, w2: complex) -> complex:
    """Admittance of the single edge equivalent to two edges in series.

    Satisfies 1/w = 1/w1 + 1/w2.  Open circuits (zero admittance) have no
    series equivalent and raise ValueError.
    """
    if w1 == 0 or w2 == 0:
        raise ValueError("series equivalent of a zero admittance is undefined")
    total = w1 + w2
    if total == 0:
        raise ValueError("admittances cancel; series equivalent is unbounded")
    return w1 * w2 / total


def connectivity(g: WeightedGraph) -> np.ndarray:
    """Component label per node.  Zero-weight edges are treated as absent.

    Labels are 0-based and increase with the smallest node of each component.
    """
    parent = list(range(g.n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for (j, k), w in zip(g.edges, g.w):
        if w <= 0:
            continue
        ra, rb = find(j - 1), find(k - 1)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    roots = [find(a) for a in range(g.n)]
    relabel: dict[int, int] = {}
    labels = np.empty(g.n, dtype=int)
    for a, r in enumerate(roots):
        labels[a] = relabel.setdefault(r, len(relabel))
    return labels


def component_count(g: WeightedGraph) -> int:
    return int(connectivity(g).max()) + 1


def is_connected(g: WeightedGraph) -> bool:
    return component_count(g) == 1


def is_spanning_tree(g: WeightedGraph) -> bool:
    """True iff the positive-weight edges form a spanning tree of all n nodes."""
    npos = int(np.count_nonzero(g.w > 0))
    return npos == g.n - 1 and is_connected(g)


def complete_edges(n: int) -> tuple[Edge, ...]:
    """All n(n-1)/2 edges of the complete graph, in lexicographic order."""
    return tuple((j, k) for j in range(1, n + 1) for k in range(j + 1, n + 1))
