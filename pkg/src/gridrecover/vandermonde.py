"""Design-matrix assembly for power-flow parameter fitting.

For a candidate edge set E and a data set of m states, the stacked
coefficient matrix has one row per power-flow equation per state and one
column per edge parameter; multiplying it by a parameter vector and
subtracting the stacked injection vector reproduces every residual.  DC
systems are nm x |E| with entries e_j*(e_j - e_k); AC systems are
2nm x 2|E| with 2x2 blocks [[a, -b], [b, a]] built from
a = e_j^2 + f_j^2 - e_j*e_k - f_j*f_k and b = e_j*f_k - e_k*f_j.

Columns are ordered lexicographically by edge, conductance before
susceptance, so column maps are deterministic across runs and a subset
system is exactly a column restriction of a larger one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .network import DC, Edge, Network, _canonical_edges
from .states import State, StateSet

Column = tuple[Edge, str]  # (edge, "c" | "s")

RANK_RTOL = 1e-13


@dataclass(frozen=True, eq=False)
class VandermondeSystem:
    """Assembled system: matrix, response vector, and the column map."""

    kind: str
    n: int
    m: int
    matrix: np.ndarray
    rhs: np.ndarray
    columns: tuple[Column, ...]

    def __post_init__(self):
        self.matrix.flags.writeable = False
        self.rhs.flags.writeable = False

    @property
    def edges(self) -> tuple[Edge, ...]:
        seen: list[Edge] = []
        for e, which in self.columns:
            if which == "c":
                seen.append(e)
        return tuple(seen)

    def column_index(self, edge: Edge, which: str = "c") -> int:
        return self.columns.index((edge, which))


def _sorted_edges(n: int, edges: Iterable[Edge]) -> tuple[Edge, ...]:
    canon = _canonical_edges(n, edges)
    if not canon:
        raise ValueError("edge set must be nonempty")
    return tuple(sorted(canon))


def row_block(edges: Iterable[Edge], x: State) -> np.ndarray:
    """Coefficient block of a single state: n x |E| (DC) or 2n x 2|E| (AC)."""
    n = x.n
    cols = _sorted_edges(n, edges)
    e, f = x.e, x.f
    if x.kind == DC:
        B = np.zeros((n, len(cols)))
        for t, (j, k) in enumerate(cols):
            a, b = j - 1, k - 1
            B[a, t] = e[a] * e[a] - e[a] * e[b]
            B[b, t] = e[b] * e[b] - e[b] * e[a]
        return B
    B = np.zeros((2 * n, 2 * len(cols)))
    for t, (j, k) in enumerate(cols):
        a, b = j - 1, k - 1
        alpha_jk = e[a] * e[a] + f[a] * f[a] - e[a] * e[b] - f[a] * f[b]
        alpha_kj = e[b] * e[b] + f[b] * f[b] - e[b] * e[a] - f[b] * f[a]
        beta_jk = e[a] * f[b] - e[b] * f[a]
        B[2 * a, 2 * t] = alpha_jk
        B[2 * a, 2 * t + 1] = -beta_jk
        B[2 * a + 1, 2 * t] = beta_jk
        B[2 * a + 1, 2 * t + 1] = alpha_jk
        B[2 * b, 2 * t] = alpha_kj
        B[2 * b, 2 * t + 1] = beta_jk  # beta_kj = -beta_jk
        B[2 * b + 1, 2 * t] = -beta_jk
        B[2 * b + 1, 2 * t + 1] = alpha_kj
    return B


def assemble(edges: Iterable[Edge], states: StateSet) -> VandermondeSystem:
    """Stack the per-state blocks over the whole data set.

    For any parameter vector w laid out per the column map,
    ``matrix @ w - rhs`` equals the residual vector of the corresponding
    network on these states.
    """
    cols = _sorted_edges(states.n, edges)
    E, F = states.e, states.f
    m, n = E.shape
    if states.kind == DC:
        M = np.zeros((n * m, len(cols)))
        base = np.arange(m) * n
        for t, (j, k) in enumerate(cols):
            a, b = j - 1, k - 1
            M[base + a, t] = E[:, a] * E[:, a] - E[:, a] * E[:, b]
            M[base + b, t] = E[:, b] * E[:, b] - E[:, b] * E[:, a]
        rhs = states.p.ravel().copy()
        columns = tuple((e, "c") for e in cols)
    else:
        M = np.zeros((2 * n * m, 2 * len(cols)))
        base = np.arange(m) * 2 * n
        for t, (j, k) in enumerate(cols):
            a, b = j - 1, k - 1
            ea, eb, fa, fb = E[:, a], E[:, b], F[:, a], F[:, b]
            alpha_jk = ea * ea + fa * fa - ea * eb - fa * fb
            alpha_kj = eb * eb + fb * fb - eb * ea - fb * fa
            beta_jk = ea * fb - eb * fa
            M[base + 2 * a, 2 * t] = alpha_jk
            M[base + 2 * a, 2 * t + 1] = -beta_jk
            M[base + 2 * a + 1, 2 * t] = beta_jk
            M[base + 2 * a + 1, 2 * t + 1] = alpha_jk
            M[base + 2 * b, 2 * t] = alpha_kj
            M[base + 2 * b, 2 * t + 1] = beta_jk
            M[base + 2 * b + 1, 2 * t] = -beta_jk
            M[base + 2 * b + 1, 2 * t + 1] = alpha_kj
        out = np.empty((m, 2 * n))
        out[:, 0::2] = states.p
        out[:, 1::2] = states.q
        rhs = out.ravel()
        columns = tuple(col for e in cols for col in ((e, "c"), (e, "s")))
    return VandermondeSystem(states.kind, n, m, M, rhs, columns)


def restrict(system: VandermondeSystem, edges: Iterable[Edge]) -> VandermondeSystem:
    """Column restriction to a subset of edges; identical to re-assembling."""
    sub = _sorted_edges(system.n, edges)
    missing = set(sub) - set(system.edges)
    if missing:
        raise ValueError(f"edges {sorted(missing)} not present in the system")
    if system.kind == DC:
        idx = [system.column_index(e, "c") for e in sub]
    else:
        idx = []
        for e in sub:
            idx.append(system.column_index(e, "c"))
            idx.append(system.column_index(e, "s"))
    return VandermondeSystem(
        system.kind,
        system.n,
        system.m,
        system.matrix[:, idx],
        system.rhs,
        tuple(system.columns[i] for i in idx),
    )


def condition_number(system, rank_rtol: float = RANK_RTOL) -> float:
    """sigma_max / sigma_min; +inf when rank-deficient at the given threshold."""
    A = system.matrix if isinstance(system, VandermondeSystem) else np.asarray(system)
    sv = np.linalg.svd(A, compute_uv=False)
    smax = float(sv[0])
    if smax == 0.0:
        return float("inf")
    smin = float(sv[-1])
    if smin / smax < rank_rtol:
        return float("inf")
    return smax / smin


def parameter_vector(net: Network, edges: Iterable[Edge] | None = None) -> np.ndarray:
    """Network weights laid out in the column order of :func:`assemble`.

    Edges absent from the network contribute zeros.
    """
    cols = _sorted_edges(net.n, net.edges if edges is None else edges)
    if net.kind == DC:
        return np.array(
            [net.c[net.edge_index(*e)] if net.has_edge(*e) else 0.0 for e in cols]
        )
    w = np.zeros(2 * len(cols))
    for t, e in enumerate(cols):
        if net.has_edge(*e):
            i = net.edge_index(*e)
            w[2 * t] = net.c[i]
            w[2 * t + 1] = net.s[i]
    return w


def network_from_columns(
    kind: str, n: int, columns: tuple[Column, ...], w: np.ndarray
) -> Network:
    """Inverse of :func:`parameter_vector`: build a network from a solution."""
    w = np.asarray(w, dtype=float)
    if len(w) != len(columns):
        raise ValueError("solution length must match the column map")
    if kind == DC:
        edges = tuple(e for e, _ in columns)
        return Network.dc(n, edges, w)
    edges = tuple(e for e, which in columns if which == "c")
    c = np.zeros(len(edges))
    s = np.zeros(len(edges))
    pos = {e: t for t, e in enumerate(edges)}
    for (e, which), val in zip(columns, w):
        if which == "c":
            c[pos[e]] = val
        else:
            s[pos[e]] = val
    return Network.ac(n, edges, c, s)
