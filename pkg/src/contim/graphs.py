"""Undirected graphs for cascade experiments.

Provides the immutable Graph container used everywhere else, a powerlaw
cluster generator (preferential attachment growth with triad closure), and
a plain-text edge list format for persistence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Graph",
    "GraphGenConfig",
    "generate_powerlaw_cluster",
    "save_edge_list",
    "load_edge_list",
    "degree_stats",
]


class Graph:
    """Simple undirected graph with stable edge ids.

    Nodes are 0..node_count-1. Edges are stored canonically as (u, v) with
    u < v, sorted lexicographically, so edge id k always means the same edge
    for a given edge set. The per-edge activation probability used by the
    cascade model travels with the graph.
    """

    def __init__(self, node_count, edges, edge_prob):
        if node_count < 0:
            raise ValueError("node_count must be nonnegative")
        if not 0.0 <= edge_prob <= 1.0:
            raise ValueError(f"edge_prob must be in [0, 1], got {edge_prob}")
        canon = []
        seen = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            if not (0 <= u < node_count and 0 <= v < node_count):
                raise ValueError(f"edge endpoint out of range: ({u}, {v})")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValueError(f"duplicate edge ({key[0]}, {key[1]})")
            seen.add(key)
            canon.append(key)
        canon.sort()
        self.node_count = int(node_count)
        self.edge_prob = float(edge_prob)
        self.edge_array = np.array(canon, dtype=np.int64).reshape(-1, 2)
        self._adj = None
        self._adj_eids = None
        self._arc_cache = None
        self._head_scatter = None
        self._dense_adj = None
        self._component_cache = None
        self._exact_memo = {}

    @property
    def edge_count(self):
        return self.edge_array.shape[0]

    def neighbors(self, u):
        """Sorted neighbor array of node u."""
        return self.adjacency()[u]

    def adjacency(self):
        """List of sorted neighbor arrays, one per node (cached)."""
        self._build_adj()
        return self._adj

    def adjacency_edge_ids(self):
        """Edge id arrays aligned entry for entry with adjacency()."""
        self._build_adj()
        return self._adj_eids

    def _build_adj(self):
        if self._adj is not None:
            return
        pairs = [[] for _ in range(self.node_count)]
        for eid, (u, v) in enumerate(self.edge_array):
            pairs[u].append((v, eid))
            pairs[v].append((u, eid))
        adj, eids = [], []
        for lst in pairs:
            lst.sort()
            adj.append(np.array([v for v, _ in lst], dtype=np.int64))
            eids.append(np.array([e for _, e in lst], dtype=np.int64))
        self._adj = adj
        self._adj_eids = eids

    def arcs(self):
        """Directed view of the edge set for vectorized propagation.

        Returns (tail, head, edge_id) int arrays of length 2*edge_count:
        each undirected edge contributes both orientations and both carry
        the same edge id, so one liveness coin governs both directions.
        """
        if self._arc_cache is None:
            e = self.edge_array
            tail = np.concatenate([e[:, 0], e[:, 1]])
            head = np.concatenate([e[:, 1], e[:, 0]])
            eid = np.concatenate([np.arange(len(e)), np.arange(len(e))])
            self._arc_cache = (tail, head, eid.astype(np.int64))
        return self._arc_cache

    def head_scatter(self):
        """Float32 (2*edge_count, node_count) arc-head indicator matrix.

        Multiplying a per-arc activity row vector by this matrix counts, for
        every node, how many live arcs point at it; used by the vectorized
        cascade propagation.
        """
        if self._head_scatter is None:
            _, head, _ = self.arcs()
            mat = np.zeros((len(head), self.node_count), dtype=np.float32)
            mat[np.arange(len(head)), head] = 1.0
            self._head_scatter = mat
        return self._head_scatter

    def dense_adjacency(self):
        """Symmetric float64 adjacency matrix (cached)."""
        if self._dense_adj is None:
            mat = np.zeros((self.node_count, self.node_count), dtype=np.float64)
            for u, v in self.edge_array:
                mat[u, v] = 1.0
                mat[v, u] = 1.0
            self._dense_adj = mat
        return self._dense_adj

    def __repr__(self):
        return (
            f"Graph(node_count={self.node_count}, edge_count={self.edge_count}, "
            f"edge_prob={self.edge_prob})"
        )


@dataclass(frozen=True)
class GraphGenConfig:
    """Knobs for the powerlaw cluster generator.

    Attributes:
        num_nodes: total node count n, must be > edges_per_node.
        edges_per_node: edges m contributed by each node added during growth.
        triangle_prob: probability that an edge closes a triangle instead of
            attaching preferentially.
        rng_seed: seed material for the generator's private RNG stream (an
            int, or a tuple of ints for derived per-graph streams).
    """

    num_nodes: int
    edges_per_node: int
    triangle_prob: float
    rng_seed: object

    def __post_init__(self):
        if self.edges_per_node < 1:
            raise ValueError("edges_per_node must be >= 1")
        if self.num_nodes <= self.edges_per_node:
            raise ValueError("num_nodes must exceed edges_per_node")
        if not 0.0 <= self.triangle_prob <= 1.0:
            raise ValueError("triangle_prob must be in [0, 1]")


def generate_powerlaw_cluster(cfg, edge_prob):
    """Grow a connected powerlaw cluster graph.

    Starts from m isolated nodes; each later node joins with exactly m edges.
    The first edge of a joining node always attaches preferentially (nodes
    weighted by degree); each subsequent edge closes a triangle through the
    previous target with probability triangle_prob, falling back to another
    preferential pick when no closable neighbor remains. Every added edge is
    new, so the result always has exactly m * (n - m) edges and is connected.

    Args:
        cfg: GraphGenConfig.
        edge_prob: cascade activation probability stored on the graph.

    Returns:
        Graph with cfg.num_nodes nodes.
    """
    n, m = cfg.num_nodes, cfg.edges_per_node
    rng = np.random.default_rng(cfg.rng_seed)
    # Attachment pool holds one entry per unit of degree, plus one bootstrap
    # entry per founding node so the first join has something to sample.
    pool = list(range(m))
    adj = {u: set() for u in range(n)}
    edges = []

    def add_edge(u, v):
        adj[u].add(v)
        adj[v].add(u)
        edges.append((u, v))
        pool.append(v)

    for source in range(m, n):
        target = _draw_new_target(rng, pool, adj[source], source)
        add_edge(source, target)
        made = 1
        while made < m:
            closable = sorted(adj[target] - adj[source] - {source})
            if closable and rng.random() < cfg.triangle_prob:
                nbr = closable[int(rng.integers(len(closable)))]
                add_edge(source, nbr)
            else:
                target = _draw_new_target(rng, pool, adj[source], source)
                add_edge(source, target)
            made += 1
        pool.extend([source] * m)
    return Graph(n, edges, edge_prob)


def _draw_new_target(rng, pool, exclude, source):
    # Rejection sampling over the degree-weighted pool; terminates because a
    # joining node has at most m - 1 prior targets among >= m earlier nodes.
    while True:
        cand = pool[int(rng.integers(len(pool)))]
        if cand != source and cand not in exclude:
            return cand


def save_edge_list(graph, path):
    """Write the graph as a plain edge list.

    Format: a header line "n <node_count>" followed by one "u v" line per
    edge in canonical order, ASCII decimal, newline-terminated. Output is
    byte-identical for equal graphs.
    """
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"n {graph.node_count}\n")
        for u, v in graph.edge_array:
            fh.write(f"{u} {v}\n")


def load_edge_list(path, edge_prob):
    """Read a graph written by save_edge_list.

    Malformed input raises ValueError naming the offending line number
    (missing header, non-integer tokens, out-of-range endpoints, self-loops,
    duplicate edges).
    """
    with open(path, "r", encoding="ascii") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ValueError(f"{path}: empty file, expected 'n <count>' header")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "n":
        raise ValueError(f"{path}: bad header at line 1, expected 'n <count>'")
    try:
        node_count = int(head[1])
    except ValueError:
        raise ValueError(f"{path}: bad node count at line 1") from None
    edges = []
    seen = set()
    for idx, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"{path}: expected 'u v' at line {idx}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValueError(f"{path}: non-integer endpoint at line {idx}") from None
        if u == v:
            raise ValueError(f"{path}: self-loop at line {idx}")
        if not (0 <= u < node_count and 0 <= v < node_count):
            raise ValueError(f"{path}: endpoint out of range at line {idx}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise ValueError(f"{path}: duplicate edge at line {idx}")
        seen.add(key)
        edges.append(key)
    return Graph(node_count, edges, edge_prob)


def degree_stats(graph):
    """Return (min_degree, max_degree, mean_degree) over all nodes."""
    if graph.node_count == 0:
        return (0, 0, 0.0)
    deg = np.zeros(graph.node_count, dtype=np.int64)
    for u, v in graph.edge_array:
        deg[u] += 1
        deg[v] += 1
    return (int(deg.min()), int(deg.max()), float(deg.mean()))
