"""Q-learning agent: replay, TD updates, and the training loop.

Training interleaves environment sub-steps with one TD update per sub-step
once the replay buffer can fill a batch. Rewards are the shaped two-point
estimates (or one of the single-extreme ablation variants); the willingness
outcome at each round end is sampled, so the agent trains on realized
trajectories. Every validation_interval sub-steps the current greedy policy
is scored on the validation graphs with fixed per-episode seed material,
and the best-scoring snapshot is what train() returns.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from . import env as envmod
from .diffusion import InfluenceEstimator
from .policies import ablation_reward
from .qnet import init_params, q_backward, q_forward, q_values
from .rewards import compute_reward_terms, surrogate_reward

__all__ = [
    "TrainConfig",
    "TransitionRecord",
    "ReplayBuffer",
    "LogRow",
    "TrainingDiverged",
    "epsilon_schedule",
    "select_action",
    "td_update",
    "AdamState",
    "GreedyQPolicy",
    "run_validation",
    "train",
]

REWARD_MODES = ("surrogate", "optimistic", "pessimistic")


class TrainingDiverged(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters of one training run.

    epsilon_decay_steps of 0 means "half of max_train_steps". num_sims is
    the Monte Carlo width used for shaped rewards and validation scoring.
    """

    embed_dim: int = 64
    embed_iters: int = 3
    hidden_dim: int = 128
    gamma: float = 0.99
    learning_rate: float = 1e-3
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    batch_size: int = 32
    replay_capacity: int = 4096
    max_train_steps: int = 2000
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_decay_steps: int = 0
    target_sync_interval: int = 50
    validation_interval: int = 20
    validation_episodes: int = 20
    num_sims: int = 100
    reward_mode: str = "surrogate"
    rng_seed: int = 0

    def __post_init__(self):
        if self.reward_mode not in REWARD_MODES:
            raise ValueError(
                f"reward_mode must be one of {REWARD_MODES}, "
                f"got {self.reward_mode!r}"
            )
        if self.batch_size < 1 or self.replay_capacity < self.batch_size:
            raise ValueError("need replay_capacity >= batch_size >= 1")

    @property
    def decay_steps(self):
        if self.epsilon_decay_steps > 0:
            return self.epsilon_decay_steps
        return max(1, self.max_train_steps // 2)


@dataclass(frozen=True)
class TransitionRecord:
    """One sub-step as stored in replay.

    state_values / next_values are abstracted state vectors; next_feasible
    is the successor's candidate tuple (already past the round end when the
    sub-step closed a round). terminal marks episode-ending transitions,
    whose targets take no bootstrap term.
    """

    graph: object
    state_values: np.ndarray
    action: int
    reward: float
    next_values: np.ndarray
    next_feasible: tuple
    terminal: bool


class ReplayBuffer:
    """Uniform-sampling FIFO buffer."""

    def __init__(self, capacity):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self._items = deque(maxlen=capacity)
        self.capacity = capacity

    def __len__(self):
        return len(self._items)

    def push(self, record):
        self._items.append(record)

    def sample(self, rng, batch_size):
        if batch_size > len(self._items):
            raise ValueError("not enough records to fill a batch")
        idx = rng.choice(len(self._items), size=batch_size, replace=False)
        return [self._items[int(i)] for i in idx]


def epsilon_schedule(step, cfg):
    """Linear decay from epsilon_start to epsilon_end; step is 1-based."""
    frac = min(1.0, max(0, step - 1) / cfg.decay_steps)
    return cfg.epsilon_start + frac * (cfg.epsilon_end - cfg.epsilon_start)


def select_action(q, feasible_sorted, epsilon, rng):
    """Epsilon-greedy over the sorted feasible list.

    Draws the explore coin first, so the rng stream advances identically
    whether or not the greedy branch is taken. Greedy ties resolve to the
    lowest node index.
    """
    if len(feasible_sorted) == 0:
        raise ValueError("feasible set is empty")
    if rng.random() < epsilon:
        return int(feasible_sorted[int(rng.integers(len(feasible_sorted)))])
    return int(feasible_sorted[int(np.argmax(q))])


class AdamState:
    """First/second moment accumulators for one parameter set."""

    def __init__(self, params):
        self.step = 0
        self.m = {k: np.zeros_like(v) for k, v in params.weights.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.weights.items()}

    def apply(self, params, grads, cfg):
        self.step += 1
        b1, b2 = cfg.adam_beta1, cfg.adam_beta2
        corr1 = 1.0 - b1 ** self.step
        corr2 = 1.0 - b2 ** self.step
        for key, g in grads.items():
            self.m[key] = b1 * self.m[key] + (1.0 - b1) * g
            self.v[key] = b2 * self.v[key] + (1.0 - b2) * g * g
            step = (cfg.learning_rate * (self.m[key] / corr1)
                    / (np.sqrt(self.v[key] / corr2) + cfg.adam_eps))
            params.weights[key] -= step


def td_update(params, target_params, batch, cfg, adam):
    """One gradient step on the batch's squared TD error.

    Targets bootstrap with the target network's best next-action value,
    except on terminal records. Returns the batch loss measured before the
    update. Raises TrainingDiverged if the loss stops being finite.
    """
    preds = np.zeros(len(batch))
    targets = np.zeros(len(batch))
    caches = []
    for i, rec in enumerate(batch):
        q, cache = q_forward(params, rec.graph, rec.state_values, [rec.action])
        preds[i] = q[0]
        caches.append(cache)
        bootstrap = 0.0
        if not rec.terminal and rec.next_feasible:
            nxt = q_values(target_params, rec.graph, rec.next_values,
                           list(rec.next_feasible))
            bootstrap = cfg.gamma * float(nxt.max())
        targets[i] = rec.reward + bootstrap
    loss = float(np.mean((preds - targets) ** 2))
    if not np.isfinite(loss):
        raise TrainingDiverged(f"TD loss became {loss}")
    dq = 2.0 * (preds - targets) / len(batch)
    total = None
    for i, rec in enumerate(batch):
        grads = q_backward(params, rec.graph, caches[i], dq[i:i + 1])
        if total is None:
            total = grads
        else:
            for key in total:
                total[key] += grads[key]
    adam.apply(params, total, cfg)
    return loss


class GreedyQPolicy:
    """Pure exploitation policy around a parameter snapshot."""

    name = "rl4im"

    def __init__(self, params, willing_prob):
        self.params = params
        self.willing_prob = willing_prob

    def select(self, graph, state, rng=None):
        feasible = sorted(state.feasible)
        values = envmod.abstract_state(state, self.willing_prob)
        q = q_values(self.params, graph, values, feasible)
        return int(feasible[int(np.argmax(q))])


@dataclass(frozen=True)
class LogRow:
    step: int
    loss: float
    val_mean: float
    val_std: float


def run_validation(policy, graphs, env_cfg, num_sims, base_seed,
                   episodes_per_graph):
    """Mean and std of terminal influence under fixed seed material.

    Episode (g, e) always draws its willingness coins and its scoring
    estimator from SeedSequence((base_seed, g, e)), so repeated calls with
    different policies or parameter snapshots are paired sample by sample.
    """
    scores = []
    for g_idx, graph in enumerate(graphs):
        for ep in range(episodes_per_graph):
            seq = np.random.SeedSequence((base_seed, g_idx, ep))
            env_seed, est_seed = seq.spawn(2)
            env_rng = np.random.default_rng(env_seed)
            state = envmod.reset(graph, env_cfg)
            while not state.is_finished:
                action = policy.select(graph, state, env_rng)
                state = envmod.step_sub(state, action)
                if state.round_complete:
                    state, _ = envmod.step_round_end(state, env_rng)
            est = InfluenceEstimator.monte_carlo(num_sims, est_seed)
            scores.append(envmod.terminal_influence(graph, state, est))
    arr = np.asarray(scores)
    return float(arr.mean()), float(arr.std()), scores


def train(train_graphs, val_graphs, env_cfg, cfg):
    """Run the full training loop.

    Args:
        train_graphs: graphs sampled uniformly per episode.
        val_graphs: graphs scored at every validation checkpoint.
        env_cfg: EnvConfig shared by training and validation episodes.
        cfg: TrainConfig.

    Returns:
        (best_params, log): the parameter snapshot with the highest
        validation mean (ties keep the earliest) and the list of LogRow
        entries, one per validation checkpoint. With no checkpoints the
        final (possibly untouched) parameters are returned and the log is
        empty.
    """
    if not train_graphs:
        raise ValueError("no training graphs")
    root = np.random.SeedSequence(cfg.rng_seed)
    init_seq, explore_seq, episode_seq, reward_seq, replay_seq = root.spawn(5)
    params = init_params(np.random.default_rng(init_seq),
                         embed_dim=cfg.embed_dim, embed_iters=cfg.embed_iters,
                         hidden_dim=cfg.hidden_dim)
    target = params.copy()
    adam = AdamState(params)
    explore_rng = np.random.default_rng(explore_seq)
    replay_rng = np.random.default_rng(replay_seq)
    reward_est = InfluenceEstimator.monte_carlo(cfg.num_sims, reward_seq)
    buffer = ReplayBuffer(cfg.replay_capacity)

    log = []
    best = params.copy()
    best_mean = -np.inf
    last_loss = float("nan")
    step = 0
    updates = 0
    q = env_cfg.willing_prob

    while step < cfg.max_train_steps:
        graph = train_graphs[int(explore_rng.integers(len(train_graphs)))]
        env_rng = np.random.default_rng(episode_seq.spawn(1)[0])
        state = envmod.reset(graph, env_cfg)
        while not state.is_finished and step < cfg.max_train_steps:
            step += 1
            feasible = sorted(state.feasible)
            values = envmod.abstract_state(state, q)
            eps = epsilon_schedule(step, cfg)
            if explore_rng.random() < eps:
                action = int(feasible[int(explore_rng.integers(len(feasible)))])
            else:
                action = int(feasible[int(np.argmax(
                    q_values(params, graph, values, feasible)))])
            terms = compute_reward_terms(graph, state, action, reward_est)
            if cfg.reward_mode == "surrogate":
                reward = surrogate_reward(terms, q)
            else:
                reward = ablation_reward(cfg.reward_mode, terms)
            nxt = envmod.step_sub(state, action)
            if nxt.round_complete:
                nxt, _ = envmod.step_round_end(nxt, env_rng)
            buffer.push(TransitionRecord(
                graph=graph,
                state_values=values,
                action=action,
                reward=float(reward),
                next_values=envmod.abstract_state(nxt, q),
                next_feasible=tuple(sorted(nxt.feasible)),
                terminal=nxt.is_finished,
            ))
            state = nxt
            if len(buffer) >= cfg.batch_size:
                batch = buffer.sample(replay_rng, cfg.batch_size)
                last_loss = td_update(params, target, batch, cfg, adam)
                updates += 1
                if updates % cfg.target_sync_interval == 0:
                    target = params.copy()
            if step % cfg.validation_interval == 0:
                policy = GreedyQPolicy(params, q)
                mean, std, _ = run_validation(
                    policy, val_graphs, env_cfg, cfg.num_sims,
                    cfg.rng_seed, cfg.validation_episodes)
                log.append(LogRow(step, last_loss, mean, std))
                if mean > best_mean:
                    best_mean = mean
                    best = params.copy()
    if not log:
        best = params
    return best, log
