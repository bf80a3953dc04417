"""Independent cascade simulation and influence estimation.

The cascade is simulated in its live-edge form: every undirected edge is
attempted at most once during a cascade, so drawing one activation coin per
edge up front and taking reachability over the live edges is distributed
identically to the frontier process. That representation gives us three
things at once: a cheap vectorized multi-simulation path, common random
numbers for paired comparisons (evaluate several seed sets on the same coin
matrix), and an exact estimator that enumerates live-edge subsets outright
on small graphs.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "simulate_ic_once",
    "InfluenceEstimator",
    "marginal_contribution",
]

# Exhaustive enumeration walks 2^|E| live-edge subsets; past this it is not
# a realistic oracle on one core.
MAX_EXACT_EDGES = 20

# Component labels for every subset are precomputed and cached when the
# table stays small; beyond these limits enumeration streams subset by
# subset instead.
_LABEL_CACHE_MAX_EDGES = 16
_LABEL_CACHE_MAX_NODES = 64


def _check_seeds(graph, seeds):
    out = sorted({int(s) for s in seeds})
    for s in out:
        if not 0 <= s < graph.node_count:
            raise ValueError(
                f"seed {s} out of range for graph with {graph.node_count} nodes"
            )
    return out


def simulate_ic_once(graph, seeds, rng):
    """Run one independent cascade and return the activated node set.

    Draws one uniform coin per edge (consuming exactly edge_count draws from
    rng), marks edges live with probability graph.edge_prob, then grows the
    activated set from the seeds along live edges, processing each frontier
    in node-index order.

    Args:
        graph: Graph.
        seeds: iterable of seed node ids.
        rng: numpy Generator.

    Returns:
        Set of activated node ids (always includes the seeds).
    """
    seeds = _check_seeds(graph, seeds)
    live = rng.random(graph.edge_count) < graph.edge_prob
    adj = graph.adjacency()
    eids = graph.adjacency_edge_ids()
    active = set(seeds)
    frontier = list(seeds)
    while frontier:
        nxt = set()
        for u in frontier:
            for v, e in zip(adj[u], eids[u]):
                if live[e] and v not in active:
                    active.add(int(v))
                    nxt.add(int(v))
        frontier = sorted(nxt)
    return active


def _reach_counts(graph, live, seed_mask):
    """Count live-edge-reachable nodes per simulation.

    live is a (num_sims, edge_count) boolean matrix; seed_mask a boolean
    node mask. Returns an int array of activated-set sizes, one per row,
    equal to BFS reachability on each row's live subgraph.
    """
    num_sims = live.shape[0]
    active = np.repeat(seed_mask[None, :], num_sims, axis=0)
    if graph.edge_count == 0 or not seed_mask.any():
        return active.sum(axis=1)
    tail, _, eid = graph.arcs()
    arc_live = live[:, eid]
    scatter = graph.head_scatter()
    while True:
        src = (active[:, tail] & arc_live).astype(np.float32)
        reached = (src @ scatter) > 0.0
        new = reached & ~active
        if not new.any():
            break
        active |= new
    return active.sum(axis=1)


class InfluenceEstimator:
    """Expected cascade size, by sampling or by exhaustive enumeration.

    Monte Carlo mode owns a private RNG stream and reports the sample mean
    of num_sims cascades. Exact mode enumerates every live-edge subset
    (refusing graphs with more than MAX_EXACT_EDGES edges) and memoizes the
    value per seed set. call_counter counts influence evaluations requested
    over the estimator's lifetime, memoized or not.
    """

    def __init__(self, mode, num_sims=None, rng=None, memoize=True):
        if mode not in ("monte_carlo", "exact"):
            raise ValueError(f"unknown estimator mode {mode!r}")
        if mode == "monte_carlo":
            if num_sims is None or num_sims < 1:
                raise ValueError("monte_carlo mode needs num_sims >= 1")
        self.mode = mode
        self.num_sims = num_sims
        self._rng = rng
        self._memoize = memoize
        self.call_counter = 0

    @classmethod
    def monte_carlo(cls, num_sims, rng_seed):
        """Sampling estimator with its own stream seeded by rng_seed."""
        return cls("monte_carlo", num_sims=num_sims,
                   rng=np.random.default_rng(rng_seed))

    @classmethod
    def exact_enumeration(cls, memoize=True):
        """Exhaustive live-edge estimator for small graphs."""
        return cls("exact", memoize=memoize)

    def estimate_influence(self, graph, seeds):
        """Expected number of activated nodes for one seed set."""
        return self.influence_batch(graph, [seeds])[0]

    def influence_batch(self, graph, seed_sets):
        """Evaluate several seed sets together.

        In Monte Carlo mode every set in the batch is evaluated on the same
        per-edge coin matrix (common random numbers), so within-batch
        differences are paired. Increments call_counter once per set.
        """
        checked = [_check_seeds(graph, s) for s in seed_sets]
        self.call_counter += len(checked)
        if self.mode == "monte_carlo":
            coins = self._rng.random((self.num_sims, graph.edge_count))
            live = coins < graph.edge_prob
            out = []
            for seeds in checked:
                mask = np.zeros(graph.node_count, dtype=bool)
                mask[seeds] = True
                out.append(float(_reach_counts(graph, live, mask).mean()))
            return out
        return [self._exact_value(graph, seeds) for seeds in checked]

    def _exact_value(self, graph, seeds_sorted):
        if graph.edge_count > MAX_EXACT_EDGES:
            raise ValueError(
                f"exact enumeration over 2^{graph.edge_count} live-edge subsets "
                f"refused; the limit is {MAX_EXACT_EDGES} edges"
            )
        key = tuple(seeds_sorted)
        if self._memoize and key in graph._exact_memo:
            return graph._exact_memo[key]
        if not seeds_sorted:
            value = 0.0
        elif graph.edge_count == 0:
            value = float(len(seeds_sorted))
        else:
            value = _enumerate_influence(graph, seeds_sorted)
        if self._memoize:
            graph._exact_memo[key] = value
        return value


def _subset_weights(edge_count, edge_prob):
    """Probability of each live-edge subset, indexed by bitmask."""
    masks = np.arange(1 << edge_count, dtype=np.uint64)
    pop = np.bitwise_count(masks).astype(np.int64)
    return (edge_prob ** pop) * ((1.0 - edge_prob) ** (edge_count - pop))


def _enumerate_influence(graph, seeds_sorted):
    weights = _subset_weights(graph.edge_count, graph.edge_prob)
    table = _component_table(graph)
    if table is not None:
        labels, sizes = table
        # Sum component sizes over seeds, counting each component once: a
        # seed contributes only when no earlier seed shares its label.
        acc = np.zeros(len(weights))
        for i, s in enumerate(seeds_sorted):
            term = sizes[:, s].astype(np.float64)
            for t in seeds_sorted[:i]:
                term *= labels[:, t] != labels[:, s]
            acc += term
        return float(acc @ weights)
    total = 0.0
    for mask in range(len(weights)):
        labels_row, sizes_row = _components_for_mask(graph, mask)
        seen = set()
        reach = 0
        for s in seeds_sorted:
            lab = labels_row[s]
            if lab not in seen:
                seen.add(lab)
                reach += sizes_row[s]
        total += weights[mask] * reach
    return float(total)


def _component_table(graph):
    """Cached (labels, sizes) arrays over all live-edge subsets, or None.

    Row m of labels assigns every node a connected-component id under the
    live subset with bitmask m; sizes holds the matching component sizes.
    Only built for graphs small enough to keep the table cheap.
    """
    if (graph.edge_count > _LABEL_CACHE_MAX_EDGES
            or graph.node_count > _LABEL_CACHE_MAX_NODES):
        return None
    if graph._component_cache is None:
        num_masks = 1 << graph.edge_count
        labels = np.empty((num_masks, graph.node_count), dtype=np.int16)
        sizes = np.empty((num_masks, graph.node_count), dtype=np.int16)
        for mask in range(num_masks):
            labels[mask], sizes[mask] = _components_for_mask(graph, mask)
        graph._component_cache = (labels, sizes)
    return graph._component_cache


def _components_for_mask(graph, mask):
    """Union-find component labels and sizes for one live-edge subset."""
    parent = list(range(graph.node_count))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for eid in range(graph.edge_count):
        if mask >> eid & 1:
            u, v = graph.edge_array[eid]
            ru, rv = find(int(u)), find(int(v))
            if ru != rv:
                parent[max(ru, rv)] = min(ru, rv)
    labels = np.fromiter((find(x) for x in range(graph.node_count)),
                         dtype=np.int16, count=graph.node_count)
    counts = np.bincount(labels, minlength=graph.node_count)
    return labels, counts[labels].astype(np.int16)


def marginal_contribution(est, graph, base_seeds, candidate):
    """Influence gain from adding candidate to base_seeds.

    Both seed sets are evaluated in one batch, so in Monte Carlo mode the
    difference is taken on a shared coin matrix (common random numbers) and
    is pathwise nonnegative. Counts as two evaluations on the estimator.
    """
    base = _check_seeds(graph, base_seeds)
    candidate = int(candidate)
    if candidate in base:
        raise ValueError(f"candidate {candidate} already in the base seed set")
    if not 0 <= candidate < graph.node_count:
        raise ValueError(f"candidate {candidate} out of range")
    with_c = sorted(base + [candidate])
    lo, hi = est.influence_batch(graph, [base, with_c])
    return hi - lo
