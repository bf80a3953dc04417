"""Shared test helpers: reference oracles, graph factories, state builders.

The oracles here are deliberately written from scratch against the model
definitions (plain-python subset enumeration and breadth-first search), so
they share no code path with the implementations they check.
"""

from __future__ import annotations

import itertools

import numpy as np

from contim.env import EnvConfig, EnvState
from contim.graphs import Graph


# ---------------------------------------------------------------------------
# reference oracles

def brute_force_influence(graph, seeds):
    """Expected cascade size by enumerating every live-edge subset.

    For each of the 2^edge_count subsets the activated set is grown by
    breadth-first search over the live edges only, and its size is weighted
    by the subset probability. Exponential, so only for small graphs.

    Args:
        graph: Graph (only node_count, edge_array and edge_prob are read).
        seeds: iterable of seed node ids.

    Returns:
        Expected activated-node count as a float.
    """
    edges = [(int(u), int(v)) for u, v in graph.edge_array]
    seeds = sorted({int(s) for s in seeds})
    if not seeds:
        return 0.0
    p = graph.edge_prob
    total = 0.0
    for mask in range(1 << len(edges)):
        adj = {u: [] for u in range(graph.node_count)}
        weight = 1.0
        for i, (u, v) in enumerate(edges):
            if mask >> i & 1:
                adj[u].append(v)
                adj[v].append(u)
                weight *= p
            else:
                weight *= 1.0 - p
        seen = set(seeds)
        stack = list(seeds)
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        total += weight * len(seen)
    return total


def enumerated_expected_gain(graph, willing, pending, action, willing_prob,
                             influence=None):
    """Expected influence gain of a pick, by enumerating pending outcomes.

    Every subset of the pending nodes is taken as the willing outcome,
    weighted by q^|subset| * (1-q)^(rest), and the gain of action on top of
    willing + subset is averaged under those weights.

    Args:
        graph: Graph.
        willing: confirmed seed nodes.
        pending: nodes picked this round with unknown willingness.
        action: candidate node.
        willing_prob: per-node participation probability q.
        influence: influence function (graph, seeds) -> float; defaults to
            brute_force_influence.

    Returns:
        Expected gain as a float.
    """
    fn = influence if influence is not None else brute_force_influence
    pending = sorted(pending)
    q = willing_prob
    total = 0.0
    for r in range(len(pending) + 1):
        for subset in itertools.combinations(pending, r):
            base = sorted(set(willing) | set(subset))
            weight = (q ** r) * ((1.0 - q) ** (len(pending) - r))
            total += weight * (fn(graph, base + [action]) - fn(graph, base))
    return total


def all_edge_sets(node_count):
    """Yield every undirected edge set over node_count nodes."""
    pairs = list(itertools.combinations(range(node_count), 2))
    for mask in range(1 << len(pairs)):
        yield [pairs[i] for i in range(len(pairs)) if mask >> i & 1]


# ---------------------------------------------------------------------------
# graph factories

def single_edge(edge_prob):
    return Graph(2, [(0, 1)], edge_prob)


def path_graph(node_count, edge_prob):
    return Graph(node_count, [(i, i + 1) for i in range(node_count - 1)],
                 edge_prob)


def cycle_graph(node_count, edge_prob):
    edges = [(i, i + 1) for i in range(node_count - 1)] + [(0, node_count - 1)]
    return Graph(node_count, edges, edge_prob)


def star_graph(node_count, edge_prob):
    return Graph(node_count, [(0, i) for i in range(1, node_count)], edge_prob)


def complete_graph(node_count, edge_prob):
    return Graph(node_count,
                 list(itertools.combinations(range(node_count), 2)), edge_prob)


def triangle_plus_isolate(edge_prob):
    return Graph(4, [(0, 1), (0, 2), (1, 2)], edge_prob)


def random_graph(rng, node_count, edge_prob, density=0.5, max_edges=None):
    """Random edge subset over node_count nodes, optionally capped in size."""
    pairs = list(itertools.combinations(range(node_count), 2))
    keep = [pairs[i] for i in np.flatnonzero(rng.random(len(pairs)) < density)]
    if max_edges is not None and len(keep) > max_edges:
        idx = rng.choice(len(keep), size=max_edges, replace=False)
        keep = [keep[i] for i in sorted(idx)]
    return Graph(node_count, keep, edge_prob)


# ---------------------------------------------------------------------------
# environment helpers

def build_state(graph, willing=(), pending=(), declined=(), willing_prob=0.5,
                num_rounds=1, round_budget=None, round_no=1):
    """Mid-round EnvState with the given masks, built directly.

    The state sits at the slot after the pending picks, with the budget
    defaulting to exactly one more pick. willing, pending and declined must
    be disjoint; feasible is everything else.
    """
    willing, pending, declined = set(willing), set(pending), set(declined)
    assert not (willing & pending or willing & declined or pending & declined)
    n = graph.node_count
    budget = len(pending) + 1 if round_budget is None else round_budget
    cfg = EnvConfig(num_rounds=num_rounds, round_budget=budget,
                    willing_prob=willing_prob)

    def mask(nodes):
        out = np.zeros(n, dtype=bool)
        out[list(nodes)] = True
        return out

    return EnvState(
        willing=mask(willing),
        declined=mask(declined),
        pending=mask(pending),
        round_no=round_no,
        slot_no=len(pending) + 1,
        feasible=frozenset(range(n)) - willing - pending - declined,
        round_complete=False,
        cfg=cfg,
        node_count=n,
    )


class ScriptedRng:
    """Feeds preset uniforms to code that only calls random().

    Used to force specific willingness outcomes; draws beyond the script
    raise so over-consumption shows up as a test failure.
    """

    def __init__(self, values):
        self._values = list(values)
        self.draws = 0

    def random(self, size=None):
        if size is None:
            self.draws += 1
            return self._values.pop(0)
        out = np.array([self._values.pop(0) for _ in range(int(size))])
        self.draws += int(size)
        return out


class CountingRng:
    """Real generator that counts how many uniforms were drawn."""

    def __init__(self, seed=0):
        self._rng = np.random.default_rng(seed)
        self.draws = 0

    def random(self, size=None):
        self.draws += 1 if size is None else int(np.prod(size))
        return self._rng.random(size)

    def integers(self, *args, **kwargs):
        return self._rng.integers(*args, **kwargs)
