"""Graph-embedding action-value network, in plain numpy.

Node embeddings come from a fixed number of message-passing iterations with
shared weights: each node's state entry is lifted affinely, summed neighbor
embeddings and the node's own carried embedding are mixed in linearly, and
a rectifier is applied. The Q-head concatenates the pooled (summed) graph
embedding with the candidate's embedding and pushes it through one hidden
rectifier layer to a scalar.

Everything is float64 with hand-written gradients, which keeps finite
difference checks tight and makes checkpoints trivially portable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

__all__ = [
    "QNetworkParams",
    "CheckpointError",
    "param_shapes",
    "init_params",
    "q_values",
    "q_forward",
    "q_backward",
    "q_gradient",
    "save_checkpoint",
    "load_checkpoint",
]

_MAGIC = "contimq"
_VERSION = 1


class CheckpointError(RuntimeError):
    pass


@dataclass
class QNetworkParams:
    """Weight container; shapes are fixed by the three dims at creation."""

    embed_dim: int
    embed_iters: int
    hidden_dim: int
    weights: dict

    def copy(self):
        return QNetworkParams(
            self.embed_dim, self.embed_iters, self.hidden_dim,
            {k: v.copy() for k, v in self.weights.items()},
        )


def param_shapes(embed_dim, hidden_dim):
    """Canonical (name, shape) list; the checkpoint payload follows it."""
    d, h = embed_dim, hidden_dim
    return [
        ("lift_w", (d,)),
        ("lift_b", (d,)),
        ("agg_w", (d, d)),
        ("self_w", (d, d)),
        ("head_w1", (h, 2 * d)),
        ("head_b1", (h,)),
        ("head_w2", (h,)),
        ("head_b2", (1,)),
    ]


_FAN_IN = {
    "lift_w": lambda d, h: 1,
    "lift_b": lambda d, h: 1,
    "agg_w": lambda d, h: d,
    "self_w": lambda d, h: d,
    "head_w1": lambda d, h: 2 * d,
    "head_b1": lambda d, h: 2 * d,
    "head_w2": lambda d, h: h,
    "head_b2": lambda d, h: h,
}


def init_params(rng, embed_dim=64, embed_iters=3, hidden_dim=128):
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) init for every tensor."""
    weights = {}
    for name, shape in param_shapes(embed_dim, hidden_dim):
        bound = 1.0 / np.sqrt(_FAN_IN[name](embed_dim, hidden_dim))
        weights[name] = rng.uniform(-bound, bound, size=shape)
    return QNetworkParams(embed_dim, embed_iters, hidden_dim, weights)


def q_forward(params, graph, node_values, candidates):
    """Q-values for the candidate nodes, plus the cache backward needs.

    node_values is the abstracted per-node state vector; candidates is the
    list of nodes to score (only these pass through the head). Returns
    (q, cache) with q aligned to the candidate order given.
    """
    w = params.weights
    x = np.asarray(node_values, dtype=np.float64)
    if x.shape != (graph.node_count,):
        raise ValueError(
            f"node_values has shape {x.shape}, expected ({graph.node_count},)"
        )
    cand = np.asarray(list(candidates), dtype=np.int64)
    if cand.size == 0:
        raise ValueError("no candidates to score")
    if cand.min() < 0 or cand.max() >= graph.node_count:
        raise ValueError("candidate out of range")
    adj = graph.dense_adjacency()
    lift = np.outer(x, w["lift_w"]) + w["lift_b"]
    embed = np.zeros((graph.node_count, params.embed_dim))
    embeds = [embed]
    pres = []
    for _ in range(params.embed_iters):
        pre = lift + (adj @ embed) @ w["agg_w"].T + embed @ w["self_w"].T
        embed = np.maximum(pre, 0.0)
        pres.append(pre)
        embeds.append(embed)
    pooled = embed.sum(axis=0)
    joint = np.concatenate(
        [np.repeat(pooled[None, :], len(cand), axis=0), embed[cand]], axis=1
    )
    head_pre = joint @ w["head_w1"].T + w["head_b1"]
    head_act = np.maximum(head_pre, 0.0)
    q = head_act @ w["head_w2"] + w["head_b2"][0]
    cache = (x, adj, cand, embeds, pres, joint, head_pre, head_act)
    return q, cache


def q_values(params, graph, node_values, candidates):
    """Forward pass only."""
    q, _ = q_forward(params, graph, node_values, candidates)
    return q


def q_backward(params, graph, cache, dq):
    """Gradients of sum_i dq[i] * q[candidate_i] w.r.t. every parameter."""
    w = params.weights
    x, adj, cand, embeds, pres, joint, head_pre, head_act = cache
    d = params.embed_dim
    dq = np.asarray(dq, dtype=np.float64)
    grads = {k: np.zeros_like(v) for k, v in params.weights.items()}

    grads["head_w2"] = head_act.T @ dq
    grads["head_b2"][0] = dq.sum()
    dact = np.outer(dq, w["head_w2"])
    dpre = dact * (head_pre > 0.0)
    grads["head_w1"] = dpre.T @ joint
    grads["head_b1"] = dpre.sum(axis=0)
    djoint = dpre @ w["head_w1"]

    dpooled = djoint[:, :d].sum(axis=0)
    dembed = np.repeat(dpooled[None, :], graph.node_count, axis=0)
    np.add.at(dembed, cand, djoint[:, d:])

    dlift = np.zeros((graph.node_count, d))
    for k in reversed(range(params.embed_iters)):
        dz = dembed * (pres[k] > 0.0)
        dlift += dz
        prev = embeds[k]
        grads["agg_w"] += dz.T @ (adj @ prev)
        grads["self_w"] += dz.T @ prev
        # adjacency is symmetric, so its transpose is itself
        dembed = adj @ (dz @ w["agg_w"]) + dz @ w["self_w"]
    grads["lift_w"] = x @ dlift
    grads["lift_b"] = dlift.sum(axis=0)
    return grads


def q_gradient(params, graph, node_values, candidate):
    """Gradient of a single candidate's Q-value (for derivative checks)."""
    q, cache = q_forward(params, graph, node_values, [candidate])
    return float(q[0]), q_backward(params, graph, cache, np.ones(1))


def save_checkpoint(params, path):
    """Write params as a versioned, self-describing binary file.

    Layout: an ASCII magic line "contimq <version>", one JSON header line
    (dims plus the ordered shape table), then the raw little-endian float64
    payload in shape-table order.
    """
    shapes = param_shapes(params.embed_dim, params.hidden_dim)
    header = {
        "embed_dim": params.embed_dim,
        "embed_iters": params.embed_iters,
        "hidden_dim": params.hidden_dim,
        "params": [[name, list(shape)] for name, shape in shapes],
    }
    with open(path, "wb") as fh:
        fh.write(f"{_MAGIC} {_VERSION}\n".encode("ascii"))
        fh.write((json.dumps(header, sort_keys=True) + "\n").encode("ascii"))
        for name, _ in shapes:
            fh.write(params.weights[name].astype("<f8").tobytes())


def load_checkpoint(path, embed_dim=None, embed_iters=None, hidden_dim=None):
    """Read a checkpoint written by save_checkpoint.

    The optional dim arguments declare what the caller expects; any
    mismatch with the file is an error rather than a silent reshape, as is
    an unsupported version or a payload whose size disagrees with the
    header.
    """
    with open(path, "rb") as fh:
        magic_line = fh.readline().decode("ascii", errors="replace").strip()
        parts = magic_line.split()
        if len(parts) != 2 or parts[0] != _MAGIC:
            raise CheckpointError(f"{path}: not a {_MAGIC} checkpoint")
        if parts[1] != str(_VERSION):
            raise CheckpointError(
                f"{path}: checkpoint version {parts[1]}, supported version "
                f"is {_VERSION}"
            )
        try:
            header = json.loads(fh.readline().decode("ascii"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise CheckpointError(f"{path}: bad checkpoint header: {exc}") from None
        payload = fh.read()
    for key in ("embed_dim", "embed_iters", "hidden_dim"):
        if key not in header:
            raise CheckpointError(f"{path}: checkpoint header missing {key}")
    for key, expected in (
        ("embed_dim", embed_dim),
        ("embed_iters", embed_iters),
        ("hidden_dim", hidden_dim),
    ):
        if expected is not None and header[key] != expected:
            raise CheckpointError(
                f"{path}: checkpoint {key} is {header[key]}, expected {expected}"
            )
    shapes = param_shapes(header["embed_dim"], header["hidden_dim"])
    declared = [[name, list(shape)] for name, shape in shapes]
    if header.get("params") != declared:
        raise CheckpointError(f"{path}: checkpoint shape table is inconsistent")
    total = sum(int(np.prod(shape)) for _, shape in shapes)
    if len(payload) != total * 8:
        raise CheckpointError(
            f"{path}: payload holds {len(payload)} bytes, expected {total * 8}"
        )
    weights = {}
    offset = 0
    for name, shape in shapes:
        count = int(np.prod(shape))
        flat = np.frombuffer(payload, dtype="<f8", count=count, offset=offset * 8)
        weights[name] = flat.astype(np.float64).reshape(shape)
        offset += count
    return QNetworkParams(
        header["embed_dim"], header["embed_iters"], header["hidden_dim"], weights
    )
