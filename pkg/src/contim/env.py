"""Sequential seeding environment with uncertain seed participation.

An episode runs num_rounds rounds. Within a round the agent picks
round_budget nodes one at a time (sub-steps); at the end of the round each
picked node independently turns out willing with probability willing_prob.
Willing nodes become cascade seeds, unwilling ones are burned: they never
return to the feasible set. The cascade itself only runs conceptually at
the end of the episode, over the union of all willing nodes.

States are values: every transition returns a fresh EnvState and never
mutates its input.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "EnvConfig",
    "EnvState",
    "RoundRealization",
    "reset",
    "step_sub",
    "step_round_end",
    "realization_probability",
    "abstract_state",
    "terminal_influence",
]


@dataclass(frozen=True)
class EnvConfig:
    """Episode shape: num_rounds rounds of round_budget picks each."""

    num_rounds: int
    round_budget: int
    willing_prob: float
    rng_seed: int = 0

    def __post_init__(self):
        if self.num_rounds < 1:
            raise ValueError("num_rounds must be >= 1")
        if self.round_budget < 1:
            raise ValueError("round_budget must be >= 1")
        if not 0.0 <= self.willing_prob <= 1.0:
            raise ValueError("willing_prob must be in [0, 1]")


@dataclass(frozen=True, eq=False)
class EnvState:
    """Snapshot of one decision point.

    willing, declined and pending are disjoint boolean node masks: confirmed
    seeds from closed rounds, nodes that were picked but refused, and picks
    of the current round whose willingness is still unknown. round_no and
    slot_no are 1-based; slot_no is the index of the next pick while the
    round is open. feasible holds the nodes still available to pick.
    """

    willing: np.ndarray
    declined: np.ndarray
    pending: np.ndarray
    round_no: int
    slot_no: int
    feasible: frozenset = field(repr=False)
    round_complete: bool
    cfg: EnvConfig
    node_count: int

    @property
    def is_finished(self):
        return self.round_no > self.cfg.num_rounds

    def willing_support(self):
        return [int(v) for v in np.flatnonzero(self.willing)]

    def pending_support(self):
        return [int(v) for v in np.flatnonzero(self.pending)]


@dataclass(frozen=True)
class RoundRealization:
    """Outcome of one round's willingness draw."""

    willing: np.ndarray
    willing_count: int


def reset(graph, cfg):
    """Fresh episode state over graph.

    Raises ValueError when the total budget num_rounds * round_budget
    exceeds the node count (the feasible set would run dry mid-episode).
    """
    total = cfg.num_rounds * cfg.round_budget
    if total > graph.node_count:
        raise ValueError(
            f"total budget {total} exceeds node count {graph.node_count}"
        )
    n = graph.node_count
    zeros = np.zeros(n, dtype=bool)
    return EnvState(
        willing=zeros.copy(),
        declined=zeros.copy(),
        pending=zeros.copy(),
        round_no=1,
        slot_no=1,
        feasible=frozenset(range(n)),
        round_complete=False,
        cfg=cfg,
        node_count=n,
    )


def step_sub(state, action):
    """Apply one pick and return the successor state.

    The action must come from the feasible set; it moves into pending and
    leaves feasible for the rest of the episode. The pick that exhausts the
    round's budget marks the state round-complete, after which only
    step_round_end may follow.
    """
    if state.is_finished:
        raise ValueError("episode already finished")
    if state.round_complete:
        raise ValueError("round budget exhausted, call step_round_end")
    action = int(action)
    if action not in state.feasible:
        raise ValueError(f"action {action} not in the feasible set")
    pending = state.pending.copy()
    pending[action] = True
    last = state.slot_no == state.cfg.round_budget
    return EnvState(
        willing=state.willing,
        declined=state.declined,
        pending=pending,
        round_no=state.round_no,
        slot_no=state.slot_no if last else state.slot_no + 1,
        feasible=state.feasible - {action},
        round_complete=last,
        cfg=state.cfg,
        node_count=state.node_count,
    )


def step_round_end(state, rng):
    """Sample the round's willingness outcome and close the round.

    Each pending node flips an independent coin with success probability
    willing_prob; coins are drawn in ascending node order, consuming exactly
    round_budget uniforms from rng. Willing nodes join the confirmed seed
    set, the rest are marked declined. Closing the final round finishes the
    episode.
    """
    if not state.round_complete:
        raise ValueError("round still open, the budget is not exhausted yet")
    picked = np.flatnonzero(state.pending)
    coins = rng.random(len(picked))
    willing_nodes = picked[coins < state.cfg.willing_prob]
    willing = state.willing.copy()
    willing[willing_nodes] = True
    declined = state.declined.copy()
    declined[picked[coins >= state.cfg.willing_prob]] = True
    realized = np.zeros(state.node_count, dtype=bool)
    realized[willing_nodes] = True
    next_state = EnvState(
        willing=willing,
        declined=declined,
        pending=np.zeros(state.node_count, dtype=bool),
        round_no=state.round_no + 1,
        slot_no=1,
        feasible=state.feasible,
        round_complete=False,
        cfg=state.cfg,
        node_count=state.node_count,
    )
    return next_state, RoundRealization(realized, int(len(willing_nodes)))


def realization_probability(round_budget, willing_count, willing_prob):
    """Probability of one specific willingness outcome for a full round.

    A specific assignment with willing_count successes out of round_budget
    picks has probability q^willing_count * (1-q)^(round_budget-willing_count);
    outcomes differing only in which nodes succeeded share this value.
    """
    if not 0 <= willing_count <= round_budget:
        raise ValueError(
            f"willing_count {willing_count} outside 0..{round_budget}"
        )
    q = willing_prob
    return (q ** willing_count) * ((1.0 - q) ** (round_budget - willing_count))


def abstract_state(state, willing_prob):
    """Collapse the state masks into one expected-willingness vector.

    Confirmed willing nodes count 1, pending picks count willing_prob, and
    everything else (including declined nodes, whose exclusion lives in the
    feasible set) counts 0.
    """
    return state.willing.astype(np.float64) + willing_prob * state.pending


def terminal_influence(graph, state, est):
    """Influence of the realized willing set; only valid once finished."""
    if not state.is_finished:
        raise ValueError("episode not finished yet")
    return est.estimate_influence(graph, state.willing_support())
