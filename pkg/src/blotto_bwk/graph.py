"""Layered path-planning graphs whose s,d-paths biject with troop allocations.

Node ``(i, j)`` means "``j`` troops spent on battlefields ``1..i``"; an edge
``(i-1, j) -> (i, j')`` puts ``j' - j`` troops on battlefield ``i``.  Three
shapes are supported:

* ``original``: layers ``0..n``, destination ``(n, m)``; paths are allocations
  spending exactly ``m``.
* ``fixed``: layers ``0..n`` with a full last layer plus a dummy destination
  reached through auxiliary edges; paths are allocations spending at most ``m``.
* ``reduced``: the original shape with ``m`` replaced by the remaining budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .exceptions import InvalidInputError
from .validation import check_allocation

AUX = -1

ORIGINAL = "original"
FIXED = "fixed"
REDUCED = "reduced"


@dataclass(frozen=True, eq=False)
class LayeredGraph:
    kind: str
    n: int
    cap: int
    node_layer: np.ndarray
    node_level: np.ndarray
    edge_src: np.ndarray
    edge_dst: np.ndarray
    edge_battlefield: np.ndarray
    source: int = 0
    dest: int = field(default=-1)

    def __post_init__(self):
        for name in ("node_layer", "node_level", "edge_src", "edge_dst", "edge_battlefield"):
            getattr(self, name).flags.writeable = False
        n_layers = int(self.node_layer.max()) + 1
        layer_nodes = [np.flatnonzero(self.node_layer == L) for L in range(n_layers)]
        local = np.empty(self.n_nodes, dtype=np.int64)
        for nodes in layer_nodes:
            local[nodes] = np.arange(nodes.size)
        edge_layer = self.node_layer[self.edge_src]
        transitions = []
        for L in range(n_layers - 1):
            ids = np.flatnonzero(edge_layer == L)
            transitions.append((ids, local[self.edge_src[ids]], local[self.edge_dst[ids]]))
        # padded out-edge table used by the vectorized sampler
        out_deg = np.bincount(self.edge_src, minlength=self.n_nodes)
        out_edges = np.full((self.n_nodes, max(int(out_deg.max()), 1)), -1, dtype=np.int64)
        fill = np.zeros(self.n_nodes, dtype=np.int64)
        for e, a in enumerate(self.edge_src):
            out_edges[a, fill[a]] = e
            fill[a] += 1
        object.__setattr__(self, "_layer_nodes", layer_nodes)
        object.__setattr__(self, "_local", local)
        object.__setattr__(self, "_transitions", transitions)
        object.__setattr__(self, "out_edges", out_edges)
        object.__setattr__(self, "edge_layer", edge_layer)
        object.__setattr__(
            self,
            "_edge_index",
            {self.edge_key(e): e for e in range(self.n_edges)},
        )

    @property
    def n_nodes(self):
        return self.node_layer.shape[0]

    @property
    def n_edges(self):
        return self.edge_src.shape[0]

    @property
    def n_layers(self):
        return len(self._layer_nodes)

    @property
    def auxiliary(self):
        return self.edge_battlefield == AUX

    @property
    def edge_consumption(self):
        cons = self.node_level[self.edge_dst] - self.node_level[self.edge_src]
        return np.where(self.auxiliary, 0, cons)

    @property
    def path_length(self):
        """Number of edges on every s,d-path."""
        return self.n_layers - 1

    def node_coords(self, v):
        return int(self.node_layer[v]), int(self.node_level[v])

    def edge_key(self, e):
        """Coordinates ``((layer, level), (layer, level))`` of edge ``e``."""
        return self.node_coords(self.edge_src[e]), self.node_coords(self.edge_dst[e])

    def edge_id(self, key):
        return self._edge_index[key]

    def has_edge(self, key):
        return key in self._edge_index


def _build(kind, n, cap, with_aux):
    if n < 1:
        raise InvalidInputError(f"need at least one battlefield, got n={n}")
    if cap < 0:
        raise InvalidInputError(f"troop cap must be nonnegative, got {cap}")
    layers = [[0]]
    for i in range(1, n):
        layers.append(list(range(cap + 1)))
    layers.append(list(range(cap + 1)) if with_aux else [cap])
    if with_aux:
        layers.append([0])
    coords = [(L, j) for L, levels in enumerate(layers) for j in levels]
    index = {c: k for k, c in enumerate(coords)}
    src, dst, bf = [], [], []
    # nodes are already sorted by (layer, level): emitting targets in
    # increasing level yields lexicographic (layer, source, target) edge ids
    for L in range(1, n + 1):
        for j in layers[L - 1]:
            for jj in layers[L]:
                if jj >= j:
                    src.append(index[(L - 1, j)])
                    dst.append(index[(L, jj)])
                    bf.append(L - 1)
    if with_aux:
        d = index[(n + 1, 0)]
        for j in layers[n]:
            src.append(index[(n, j)])
            dst.append(d)
            bf.append(AUX)
    arr = np.asarray(coords, dtype=np.int64)
    return LayeredGraph(
        kind=kind,
        n=n,
        cap=cap,
        node_layer=arr[:, 0].copy(),
        node_level=arr[:, 1].copy(),
        edge_src=np.asarray(src, dtype=np.int64),
        edge_dst=np.asarray(dst, dtype=np.int64),
        edge_battlefield=np.asarray(bf, dtype=np.int64),
        source=0,
        dest=len(coords) - 1,
    )


def build_original(m, n):
    """Graph whose paths are the allocations spending exactly ``m`` troops."""
    return _build(ORIGINAL, n, m, with_aux=False)


def build_fixed(m, n):
    """Graph whose paths are the allocations spending at most ``m`` troops."""
    if m < 1:
        raise InvalidInputError(f"fixed action set needs m >= 1, got {m}")
    return _build(FIXED, n, m, with_aux=True)


def build_reduced(x, n):
    """Graph for the terminal round: allocations spending exactly ``x``."""
    return _build(REDUCED, n, x, with_aux=False)


def expected_edge_count(m, n):
    """Closed-form edge count of the fixed-set graph."""
    return (m + 1) * ((m + 2) * (n - 1) + 4) // 2


def carry_weights(source, weights, target):
    """Copy per-edge values from ``source`` onto the coinciding edges of ``target``.

    Edges are matched by their node coordinates; every edge of ``target``
    must exist in ``source``.
    """
    weights = np.asarray(weights)
    idx = np.empty(target.n_edges, dtype=np.int64)
    for e in range(target.n_edges):
        key = target.edge_key(e)
        if not source.has_edge(key):
            raise InvalidInputError(f"edge {key} of target graph is absent from source graph")
        idx[e] = source.edge_id(key)
    return weights[idx].copy()


# -- path <-> allocation -----------------------------------------------------


def path_edges(g, p):
    """Edge ids selected by a 0/1 path vector, after checking connectivity."""
    p = np.asarray(p)
    if p.shape != (g.n_edges,):
        raise InvalidInputError(f"path vector must have length {g.n_edges}, got {p.shape}")
    if not np.all((p == 0) | (p == 1)):
        raise InvalidInputError("path vector must be 0/1")
    edges = np.flatnonzero(p)
    if edges.size != g.path_length:
        raise InvalidInputError(
            f"path vector selects {edges.size} edges, an s,d-path has {g.path_length}"
        )
    edges = edges[np.argsort(g.edge_layer[edges], kind="stable")]
    node = g.source
    for e in edges:
        if g.edge_src[e] != node:
            raise InvalidInputError("path vector does not describe a connected s,d-path")
        node = g.edge_dst[e]
    if node != g.dest:
        raise InvalidInputError("path vector does not end at the destination")
    return edges


def edges_to_vector(g, edges):
    p = np.zeros(g.n_edges, dtype=np.int8)
    p[np.asarray(edges, dtype=np.int64)] = 1
    return p


def path_to_allocation(g, p):
    edges = path_edges(g, p)
    return _edges_to_allocation(g, edges)


def _edges_to_allocation(g, edges):
    u = np.zeros(g.n, dtype=np.int64)
    real = edges[g.edge_battlefield[edges] != AUX]
    u[g.edge_battlefield[real]] = g.edge_consumption[real]
    return u


def allocation_to_edges(g, u):
    u = check_allocation(u, g.n, "allocation")
    total = int(u.sum())
    if g.kind == FIXED and total > g.cap:
        raise InvalidInputError(f"allocation spends {total} > cap {g.cap}")
    if g.kind != FIXED and total != g.cap:
        raise InvalidInputError(f"allocation must spend exactly {g.cap}, spends {total}")
    edges = []
    level = 0
    for i, k in enumerate(u):
        edges.append(g.edge_id(((i, level), (i + 1, level + int(k)))))
        level += int(k)
    if g.kind == FIXED:
        edges.append(g.edge_id(((g.n, level), (g.n + 1, 0))))
    return np.asarray(edges, dtype=np.int64)


def allocation_to_path(g, u):
    return edges_to_vector(g, allocation_to_edges(g, u))


def enumerate_paths(g):
    """Every s,d-path as an array of edge ids (exponential; for tests and oracles)."""
    out = []
    stack = [(g.source, [])]
    while stack:
        node, acc = stack.pop()
        if node == g.dest:
            out.append(np.asarray(acc, dtype=np.int64))
            continue
        for e in g.out_edges[node]:
            if e >= 0:
                stack.append((int(g.edge_dst[e]), acc + [int(e)]))
    out.sort(key=lambda es: tuple(es))
    return out


# -- dynamic programs ----------------------------------------------------------


def count_paths(g):
    """Exact number of s,d-paths and its natural log."""
    counts = [0] * g.n_nodes
    counts[g.source] = 1
    for ids, _, _ in g._transitions:
        for e in ids:
            counts[g.edge_dst[e]] += counts[g.edge_src[e]]
    # log-domain pass so that ln S stays finite even when S overflows a float
    logc = np.full(g.n_nodes, -np.inf)
    logc[g.source] = 0.0
    for ids, _, _ in g._transitions:
        for v in np.unique(g.edge_dst[ids]):
            into = ids[g.edge_dst[ids] == v]
            logc[v] = logsumexp(logc[g.edge_src[into]])
    return counts[g.dest], float(logc[g.dest])


def _transfer(g, L, w):
    ids, a, b = g._transitions[L]
    W = np.zeros((g._layer_nodes[L].size, g._layer_nodes[L + 1].size))
    W[a, b] = w[ids]
    return W


def forward_backward(g, weights):
    """Weighted path sums from the source (``F``) and to the destination (``B``).

    ``F[d] == B[s]`` is the total weight ``Z`` of all s,d-paths.
    """
    w = np.asarray(weights, dtype=float)
    F = np.zeros(g.n_nodes)
    Bk = np.zeros(g.n_nodes)
    mats = [_transfer(g, L, w) for L in range(g.n_layers - 1)]
    f = np.ones(1)
    F[g._layer_nodes[0]] = f
    for L, W in enumerate(mats):
        f = f @ W
        F[g._layer_nodes[L + 1]] = f
    b = np.ones(1)
    Bk[g._layer_nodes[-1]] = b
    for L in range(len(mats) - 1, -1, -1):
        b = mats[L] @ b
        Bk[g._layer_nodes[L]] = b
    return F, Bk


def node_pair_sums(g, weights):
    """``M[a, b]``: total weight of a->b paths (``M[a, a] = 1``)."""
    w = np.asarray(weights, dtype=float)
    V = g.n_nodes
    M = np.zeros((V, V))
    last = g._layer_nodes[-1]
    M[last, last] = 1.0
    for L in range(g.n_layers - 2, -1, -1):
        rows = g._layer_nodes[L]
        nxt = g._layer_nodes[L + 1]
        M[rows] = _transfer(g, L, w) @ M[nxt]
        M[rows, rows] = 1.0
    return M


def to_edge_list(g):
    """Plain-text edge list: ``id from_layer from_index to_layer to_index battlefield|AUX``."""
    lines = []
    for e in range(g.n_edges):
        (la, ja), (lb, jb) = g.edge_key(e)
        bf = "AUX" if g.edge_battlefield[e] == AUX else str(int(g.edge_battlefield[e]))
        lines.append(f"{e} {la} {ja} {lb} {jb} {bf}")
    return "\n".join(lines) + "\n"


def n_paths_formula(m, n, kind):
    """Closed-form path counts: C(m+n-1, n-1) exact-sum, C(m+n, n) at-most."""
    if kind == FIXED:
        return math.comb(m + n, n)
    return math.comb(m + n - 1, n - 1)


def path_value_range(g, values):
    """Min and max of ``values @ u`` over all s,d-path vectors ``u``."""
    values = np.asarray(values, dtype=float)
    lo = np.zeros(1)
    hi = np.zeros(1)
    for L, (ids, a, b) in enumerate(g._transitions):
        shape = (g._layer_nodes[L].size, g._layer_nodes[L + 1].size)
        cand = np.full(shape, np.inf)
        cand[a, b] = lo[a] + values[ids]
        lo = cand.min(axis=0)
        cand.fill(-np.inf)
        cand[a, b] = hi[a] + values[ids]
        hi = cand.max(axis=0)
    return float(lo[0]), float(hi[0])
