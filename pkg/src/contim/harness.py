"""Experiment harness: dataset generation, training, evaluation, timing.

Everything here is deterministic given the config seeds. Willingness coins
and influence-scoring noise during evaluation are keyed by (eval seed,
purpose, graph, run) and never by method, so per-(graph, run) comparisons
across methods are paired. All delimited output is re-read by this module
itself; summary lines ride along as '# summary,...' comments so the data
rows stay plain CSV.
"""

from __future__ import annotations

import os
import time

import numpy as np

from . import env as envmod
from .agent import GreedyQPolicy, TrainConfig, train
from .config import (
    REWARD_MODE_METHOD,
    ConfigError,
    dump_config,
    parse_config_lines,
    parse_methods,
    parse_sweep,
)
from .diffusion import InfluenceEstimator
from .env import EnvConfig, EnvState
from .graphs import GraphGenConfig, generate_powerlaw_cluster, load_edge_list, save_edge_list
from .policies import AdaptiveGreedyPolicy, RandomPolicy
from .qnet import load_checkpoint, save_checkpoint
from .rewards import (
    compute_reward_terms,
    evaluation_count_audit,
    exact_expected_reward,
    gap_bound,
    surrogate_reward,
)

__all__ = [
    "cmd_generate",
    "cmd_train",
    "cmd_evaluate",
    "cmd_benchmark",
    "run_reward_audit",
    "load_manifest",
    "read_results_csv",
    "read_training_log",
    "read_timing_csv",
    "checkpoint_path",
    "training_log_path",
]

_SPLIT_CODES = {"train": 0, "val": 1, "test": 2}

# Seed-material purpose tags for evaluation streams.
_PURPOSE_WILLING = 1
_PURPOSE_SCORING = 2
_PURPOSE_GREEDY = 3
_PURPOSE_POLICY = 4
_PURPOSE_BENCH = 5


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


# ---------------------------------------------------------------------------
# generate

def _graph_file(split, idx):
    return os.path.join("graphs", f"{split}_{idx:03d}.edges")


def cmd_generate(cfg, out_dir):
    """Generate the train/val/test graph splits plus a manifest.

    Per-graph seed material is (graph.seed, split code, index), so reruns
    with the same config rewrite byte-identical files.
    """
    graph_dir = os.path.join(out_dir, "graphs")
    os.makedirs(graph_dir, exist_ok=True)
    files = {}
    for split, count in (
        ("train", cfg.graph_num_train),
        ("val", cfg.graph_num_val),
        ("test", cfg.graph_num_test),
    ):
        files[split] = []
        for idx in range(count):
            gen = GraphGenConfig(
                num_nodes=cfg.graph_n,
                edges_per_node=cfg.graph_m,
                triangle_prob=cfg.graph_triangle_prob,
                rng_seed=(cfg.graph_seed, _SPLIT_CODES[split], idx),
            )
            graph = generate_powerlaw_cluster(gen, cfg.env_edge_prob)
            rel = _graph_file(split, idx)
            save_edge_list(graph, os.path.join(out_dir, rel))
            files[split].append(rel)
    _write_manifest(cfg, files, out_dir)
    return files


def _write_manifest(cfg, files, out_dir):
    lines = ["# experiment manifest"]
    lines += [f"config.{line}" for line in dump_config(cfg)]
    for split in ("train", "val", "test"):
        for idx, rel in enumerate(files[split]):
            lines.append(f"file.{split}.{idx:03d} = {rel}")
    with open(os.path.join(out_dir, "manifest.txt"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_manifest(out_dir):
    """Read manifest.txt back into (config, split file lists)."""
    path = os.path.join(out_dir, "manifest.txt")
    if not os.path.exists(path):
        raise FileNotFoundError(
            f"no manifest at {path}; run the generate step first"
        )
    config_lines = []
    files = {"train": [], "val": [], "test": []}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh.read().splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = (p.strip() for p in line.partition("="))
            if not sep:
                raise ValueError(f"{path}: bad manifest line {lineno}")
            if key.startswith("config."):
                config_lines.append(f"{key[len('config.'):]} = {value}")
            elif key.startswith("file."):
                parts = key.split(".")
                if len(parts) != 3 or parts[1] not in files:
                    raise ValueError(f"{path}: bad file entry at line {lineno}")
                files[parts[1]].append(value)
            else:
                raise ValueError(
                    f"{path}: unknown manifest key {key!r} at line {lineno}"
                )
    cfg = parse_config_lines(config_lines, source=path)
    return cfg, files


def _load_split(out_dir, files, split, edge_prob):
    return [
        load_edge_list(os.path.join(out_dir, rel), edge_prob)
        for rel in files[split]
    ]


# ---------------------------------------------------------------------------
# train

def _method_for_cfg(cfg):
    return REWARD_MODE_METHOD[cfg.train_reward_mode]


def checkpoint_path(out_dir, method):
    return os.path.join(out_dir, f"checkpoint_{method}.ckpt")


def training_log_path(out_dir, method):
    return os.path.join(out_dir, f"training_log_{method}.csv")


def train_config_from(cfg):
    return TrainConfig(
        embed_dim=cfg.train_embed_dim,
        embed_iters=cfg.train_embed_iters,
        hidden_dim=cfg.train_hidden_dim,
        gamma=cfg.train_gamma,
        learning_rate=cfg.train_learning_rate,
        batch_size=cfg.train_batch_size,
        replay_capacity=cfg.train_replay_capacity,
        max_train_steps=cfg.train_max_steps,
        epsilon_start=cfg.train_epsilon_start,
        epsilon_end=cfg.train_epsilon_end,
        epsilon_decay_steps=cfg.train_epsilon_decay_steps,
        target_sync_interval=cfg.train_target_sync,
        validation_interval=cfg.train_validation_interval,
        validation_episodes=cfg.train_validation_episodes,
        num_sims=cfg.env_num_sims,
        reward_mode=cfg.train_reward_mode,
        rng_seed=cfg.train_seed,
    )


def env_config_from(cfg, willing_prob=None, rounds=None):
    return EnvConfig(
        num_rounds=cfg.env_rounds if rounds is None else rounds,
        round_budget=cfg.env_budget,
        willing_prob=(cfg.env_willing_prob if willing_prob is None
                      else willing_prob),
    )


def cmd_train(cfg, out_dir):
    """Train the configured reward mode and write checkpoint plus log."""
    _, files = load_manifest(out_dir)
    train_graphs = _load_split(out_dir, files, "train", cfg.env_edge_prob)
    val_graphs = _load_split(out_dir, files, "val", cfg.env_edge_prob)
    best, log = train(train_graphs, val_graphs, env_config_from(cfg),
                      train_config_from(cfg))
    method = _method_for_cfg(cfg)
    save_checkpoint(best, checkpoint_path(out_dir, method))
    log_path = training_log_path(out_dir, method)
    with open(log_path, "w", encoding="utf-8") as fh:
        fh.write("step,loss,val_mean,val_std\n")
        for row in log:
            fh.write(f"{row.step},{_fmt(row.loss)},{_fmt(row.val_mean)},"
                     f"{_fmt(row.val_std)}\n")
    best_val = max((row.val_mean for row in log), default=float("nan"))
    return {"method": method, "best_val_mean": best_val,
            "checkpoint": checkpoint_path(out_dir, method), "log": log_path}


def read_training_log(path):
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != "step,loss,val_mean,val_std":
        raise ValueError(f"{path}: unexpected training log header")
    for line in lines[1:]:
        if not line or line.startswith("#"):
            continue
        step, loss, mean, std = line.split(",")
        rows.append((int(step), float(loss), float(mean), float(std)))
    return rows


# ---------------------------------------------------------------------------
# evaluate

def _run_episode(graph, env_cfg, policy, env_rng, policy_rng):
    """Play one episode; returns (final state, seconds spent selecting)."""
    state = envmod.reset(graph, env_cfg)
    spent = 0.0
    while not state.is_finished:
        t0 = time.perf_counter()
        action = policy.select(graph, state, policy_rng)
        spent += time.perf_counter() - t0
        state = envmod.step_sub(state, action)
        if state.round_complete:
            state, _ = envmod.step_round_end(state, env_rng)
    return state, spent


def _sweep_settings(cfg, out_dir, files):
    """Expand the sweep spec into (column, value, env_cfg, graphs) rows."""
    test_graphs = _load_split(out_dir, files, "test", cfg.env_edge_prob)
    sweep = parse_sweep(cfg.eval_sweep)
    if sweep is None:
        return None, [(None, env_config_from(cfg), test_graphs)]
    column, values = sweep
    settings = []
    for value in values:
        if column == "q":
            settings.append((value, env_config_from(cfg, willing_prob=value),
                             test_graphs))
        elif column == "T":
            if value * cfg.env_budget > cfg.graph_n:
                raise ConfigError(
                    f"sweep rounds {value} times budget {cfg.env_budget} "
                    f"exceeds graph.n {cfg.graph_n}"
                )
            settings.append((value, env_config_from(cfg, rounds=value),
                             test_graphs))
        else:
            if cfg.env_rounds * cfg.env_budget > value:
                raise ConfigError(
                    f"sweep node count {value} is below the total budget"
                )
            graphs = [
                generate_powerlaw_cluster(
                    GraphGenConfig(
                        num_nodes=value,
                        edges_per_node=cfg.graph_m,
                        triangle_prob=cfg.graph_triangle_prob,
                        rng_seed=(cfg.graph_seed, 3, value, idx),
                    ),
                    cfg.env_edge_prob,
                )
                for idx in range(cfg.graph_num_test)
            ]
            settings.append((value, env_config_from(cfg), graphs))
    return column, settings


def _load_method_params(method, out_dir, cfg):
    path = checkpoint_path(out_dir, method)
    if not os.path.exists(path):
        raise FileNotFoundError(
            f"missing checkpoint for {method}: {path}; train it first"
        )
    return load_checkpoint(
        path,
        embed_dim=cfg.train_embed_dim,
        embed_iters=cfg.train_embed_iters,
        hidden_dim=cfg.train_hidden_dim,
    )


def _method_policy(method, cfg, env_cfg, params, graph_idx, run_idx):
    if method == "random":
        return RandomPolicy()
    if method == "greedy":
        est = InfluenceEstimator.monte_carlo(
            cfg.env_num_sims,
            np.random.SeedSequence(
                (cfg.eval_seed, _PURPOSE_GREEDY, graph_idx, run_idx)),
        )
        return AdaptiveGreedyPolicy(est)
    return GreedyQPolicy(params, env_cfg.willing_prob)


def cmd_evaluate(cfg, out_dir, methods=None):
    """Score methods on the test graphs and write results.csv.

    Each (graph, run) pair fixes one willingness coin stream and one
    scoring estimator shared by every method. The sweep setting, when
    configured, is appended as an extra column.
    """
    methods = parse_methods(methods if methods is not None else cfg.eval_methods)
    _, files = load_manifest(out_dir)
    sweep_column, settings = _sweep_settings(cfg, out_dir, files)
    params = {
        m: _load_method_params(m, out_dir, cfg)
        for m in methods if m not in ("random", "greedy")
    }
    rows = []
    for value, env_cfg, graphs in settings:
        for m_idx, method in enumerate(methods):
            for g_idx, graph in enumerate(graphs):
                for run in range(cfg.eval_runs_per_graph):
                    env_rng = np.random.default_rng(np.random.SeedSequence(
                        (cfg.eval_seed, _PURPOSE_WILLING, g_idx, run)))
                    policy_rng = np.random.default_rng(np.random.SeedSequence(
                        (cfg.eval_seed, _PURPOSE_POLICY, m_idx, g_idx, run)))
                    policy = _method_policy(method, cfg, env_cfg,
                                            params.get(method), g_idx, run)
                    final, seconds = _run_episode(graph, env_cfg, policy,
                                                  env_rng, policy_rng)
                    scorer = InfluenceEstimator.monte_carlo(
                        cfg.env_num_sims,
                        np.random.SeedSequence(
                            (cfg.eval_seed, _PURPOSE_SCORING, g_idx, run)))
                    influence = envmod.terminal_influence(graph, final, scorer)
                    row = {
                        "method": method,
                        "graph_id": g_idx,
                        "run_id": run,
                        "influence": influence,
                        "normalized_influence": influence / graph.node_count,
                        "inference_seconds": seconds,
                    }
                    if sweep_column is not None:
                        row[sweep_column] = value
                    rows.append(row)
    path = os.path.join(out_dir, "results.csv")
    write_results_csv(path, rows, sweep_column)
    return path


def method_summaries(rows):
    """Per-method (mean, std) of normalized influence, in row order."""
    order = []
    grouped = {}
    for row in rows:
        m = row["method"]
        if m not in grouped:
            grouped[m] = []
            order.append(m)
        grouped[m].append(row["normalized_influence"])
    return {
        m: (float(np.mean(grouped[m])), float(np.std(grouped[m])))
        for m in order
    }


def write_results_csv(path, rows, sweep_column=None):
    cols = ["method", "graph_id", "run_id", "influence",
            "normalized_influence", "inference_seconds"]
    if sweep_column is not None:
        cols.append(sweep_column)
    summaries = method_summaries(rows)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(cols) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row[c]) for c in cols) + "\n")
        for method, (mean, std) in summaries.items():
            fh.write(f"# summary,{method},{_fmt(mean)},{_fmt(std)}\n")
    return summaries


def read_results_csv(path):
    """Parse results.csv into (rows, summaries).

    Comment lines are skipped as data; '# summary,...' lines are collected
    into the summaries dict.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ValueError(f"{path}: empty results file")
    cols = lines[0].split(",")
    fixed = ["method", "graph_id", "run_id", "influence",
             "normalized_influence", "inference_seconds"]
    if cols[:6] != fixed or len(cols) > 7:
        raise ValueError(f"{path}: unexpected results header {lines[0]!r}")
    rows = []
    summaries = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        if line.startswith("#"):
            if line.startswith("# summary,"):
                parts = line[len("# summary,"):].split(",")
                if len(parts) != 3:
                    raise ValueError(f"{path}: bad summary at line {lineno}")
                summaries[parts[0]] = (float(parts[1]), float(parts[2]))
            continue
        parts = line.split(",")
        if len(parts) != len(cols):
            raise ValueError(f"{path}: wrong field count at line {lineno}")
        row = {
            "method": parts[0],
            "graph_id": int(parts[1]),
            "run_id": int(parts[2]),
            "influence": float(parts[3]),
            "normalized_influence": float(parts[4]),
            "inference_seconds": float(parts[5]),
        }
        if len(cols) == 7:
            row[cols[6]] = float(parts[6])
        rows.append(row)
    return rows, summaries


# ---------------------------------------------------------------------------
# benchmark

def cmd_benchmark(cfg, out_dir, methods=None):
    """Time full-episode selections per method and test graph."""
    methods = parse_methods(methods if methods is not None else cfg.bench_methods)
    _, files = load_manifest(out_dir)
    graphs = _load_split(out_dir, files, "test", cfg.env_edge_prob)
    env_cfg = env_config_from(cfg)
    params = {
        m: _load_method_params(m, out_dir, cfg)
        for m in methods if m not in ("random", "greedy")
    }
    rows = []
    for m_idx, method in enumerate(methods):
        for g_idx, graph in enumerate(graphs):
            times = []
            for rep in range(cfg.bench_runs):
                seq = np.random.SeedSequence(
                    (cfg.eval_seed, _PURPOSE_BENCH, m_idx, g_idx, rep))
                env_seed, policy_seed, greedy_seed = seq.spawn(3)
                policy = _method_policy(method, cfg, env_cfg,
                                        params.get(method), g_idx, rep)
                if method == "greedy":
                    policy = AdaptiveGreedyPolicy(InfluenceEstimator.monte_carlo(
                        cfg.env_num_sims, greedy_seed))
                _, seconds = _run_episode(
                    graph, env_cfg, policy,
                    np.random.default_rng(env_seed),
                    np.random.default_rng(policy_seed))
                times.append(seconds)
            rows.append((method, g_idx, float(np.mean(times))))
    path = os.path.join(out_dir, "timing.csv")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("method,graph_id,seconds\n")
        for method, g_idx, seconds in rows:
            fh.write(f"{method},{g_idx},{_fmt(seconds)}\n")
    return path


def read_timing_csv(path):
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != "method,graph_id,seconds":
        raise ValueError(f"{path}: unexpected timing header")
    rows = []
    for line in lines[1:]:
        if not line or line.startswith("#"):
            continue
        method, g_idx, seconds = line.split(",")
        rows.append((method, int(g_idx), float(seconds)))
    return rows


# ---------------------------------------------------------------------------
# reward audit

def _audit_state(graph, willing, pending, env_cfg):
    n = graph.node_count
    w = np.zeros(n, dtype=bool)
    w[list(willing)] = True
    p = np.zeros(n, dtype=bool)
    p[list(pending)] = True
    taken = set(willing) | set(pending)
    return EnvState(
        willing=w,
        declined=np.zeros(n, dtype=bool),
        pending=p,
        round_no=1,
        slot_no=len(pending) + 1,
        feasible=frozenset(range(n)) - taken,
        round_complete=False,
        cfg=env_cfg,
        node_count=n,
    )


def _audit_graphs(rng):
    """Deterministic grab bag of small graphs for the audit checks."""
    from .graphs import Graph

    graphs = []
    for n, edge_prob in ((5, 0.3), (5, 0.7), (6, 0.5)):
        all_pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
        keep = rng.random(len(all_pairs)) < 0.6
        edges = [e for e, k in zip(all_pairs, keep) if k]
        graphs.append(Graph(n, edges, edge_prob))
    return graphs


def run_reward_audit(rng_seed=2024):
    """Run the reward-shaping invariant checks; returns (name, ok, detail)."""
    results = []

    def check(name, ok, detail=""):
        results.append((name, bool(ok), detail))

    # Blend equals enumeration whenever per-level gains interpolate linearly.
    worst = 0.0
    for pending_count in range(0, 12):
        for q in np.linspace(0.1, 0.9, 9):
            base, step = 3.7, -0.41
            levels = [base + k * step for k in range(pending_count + 1)]
            total = 0.0
            for mask in range(1 << pending_count):
                k = bin(mask).count("1")
                total += (q ** k) * ((1 - q) ** (pending_count - k)) * levels[k]
            blend = (1 - q) * levels[0] + q * levels[-1]
            worst = max(worst, abs(total - blend))
    check("two-point blend matches enumerated expectation", worst <= 1e-12,
          f"max |diff| {worst:.2e}")

    # Realization probabilities over all outcomes of a round sum to one.
    worst = 0.0
    for budget in range(1, 11):
        for q in (0.2, 0.5, 0.8):
            total = sum(
                envmod.realization_probability(budget, bin(m).count("1"), q)
                for m in range(1 << budget)
            )
            worst = max(worst, abs(total - 1.0))
    check("realization probabilities sum to one", worst <= 1e-12,
          f"max |sum - 1| {worst:.2e}")

    rng = np.random.default_rng(rng_seed)
    graphs = _audit_graphs(rng)
    est = InfluenceEstimator.exact_enumeration()
    env_cfg = EnvConfig(num_rounds=1, round_budget=4, willing_prob=0.5)

    # With at most one pending node the blend is the exact expectation.
    worst = 0.0
    for graph in graphs:
        for q in (0.2, 0.6):
            for pending in ([], [1]):
                state = _audit_state(graph, [0], pending, env_cfg)
                terms = compute_reward_terms(graph, state, 2, est)
                exact = exact_expected_reward(graph, state, 2, q, est)
                worst = max(worst, abs(surrogate_reward(terms, q) - exact))
    check("blend is exact up to one pending node", worst <= 1e-12,
          f"max |diff| {worst:.2e}")

    # Extremes sandwich the expectation and the blend stays inside the bound.
    sandwich_ok = True
    bound_ok = True
    for graph in graphs:
        for q in (0.2, 0.5, 0.8):
            for pending in ([1], [1, 3], [1, 3, 4]):
                state = _audit_state(graph, [0], pending, env_cfg)
                terms = compute_reward_terms(graph, state, 2, est)
                exact = exact_expected_reward(graph, state, 2, q, est)
                lo, hi = terms.gain_all_willing, terms.gain_none_willing
                if not (lo - 1e-9 <= exact <= hi + 1e-9):
                    sandwich_ok = False
                gap = abs(surrogate_reward(terms, q) - exact)
                if gap > gap_bound(terms, q, len(pending) + 1) + 1e-9:
                    bound_ok = False
    check("extreme gains sandwich the exact expectation", sandwich_ok)
    check("blend error stays within the stated bound", bound_ok)

    # Evaluation accounting: 4 flat vs 2^slot for the exact expectation.
    counts_ok = True
    graph = graphs[2]
    wide_cfg = EnvConfig(num_rounds=1, round_budget=6, willing_prob=0.5)
    for slot in range(1, 7):
        pending = list(range(1, slot))
        state = _audit_state(graph, [], pending, wide_cfg)
        before = est.call_counter
        compute_reward_terms(graph, state, 0, est)
        flat = est.call_counter - before
        before = est.call_counter
        exact_expected_reward(graph, state, 0, 0.5, est)
        full = est.call_counter - before
        if flat != evaluation_count_audit("surrogate", slot):
            counts_ok = False
        if full != evaluation_count_audit("exact", slot):
            counts_ok = False
    check("evaluation accounting (4 versus 2^slot)", counts_ok)
    return results
