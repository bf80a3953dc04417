"""Flat key-value experiment configuration.

Config files hold one "section.key = value" assignment per line; blank
lines and full-line comments starting with # are skipped. Every key has a
default, so a config file only lists overrides and an absent file means
"all defaults". Unknown keys and unparseable values are errors that name
the offending line.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "default_config",
    "parse_config_lines",
    "load_config",
    "dump_config",
    "KNOWN_METHODS",
]

KNOWN_METHODS = (
    "rl4im",
    "greedy",
    "random",
    "ablation-optimistic",
    "ablation-pessimistic",
)

# Methods implemented as trained Q-networks, keyed by reward mode.
REWARD_MODE_METHOD = {
    "surrogate": "rl4im",
    "optimistic": "ablation-optimistic",
    "pessimistic": "ablation-pessimistic",
}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    graph_n: int = 200
    graph_m: int = 2
    graph_triangle_prob: float = 0.05
    graph_num_train: int = 200
    graph_num_val: int = 5
    graph_num_test: int = 10
    graph_seed: int = 7

    env_rounds: int = 2
    env_budget: int = 4
    env_willing_prob: float = 0.6
    env_edge_prob: float = 0.1
    env_num_sims: int = 100

    train_seed: int = 11
    train_embed_dim: int = 64
    train_embed_iters: int = 3
    train_hidden_dim: int = 128
    train_gamma: float = 0.99
    train_learning_rate: float = 1e-3
    train_batch_size: int = 32
    train_replay_capacity: int = 4096
    train_max_steps: int = 2000
    train_epsilon_start: float = 1.0
    train_epsilon_end: float = 0.05
    train_epsilon_decay_steps: int = 0
    train_target_sync: int = 50
    train_validation_interval: int = 20
    train_validation_episodes: int = 20
    train_reward_mode: str = "surrogate"

    eval_seed: int = 13
    eval_runs_per_graph: int = 20
    eval_methods: str = "rl4im,greedy,random"
    eval_sweep: str = ""

    bench_runs: int = 1
    bench_methods: str = "rl4im,greedy"


def _schema():
    """(config key, attribute, converter) triples in file order."""
    out = []
    for f in fields(ExperimentConfig):
        section, _, rest = f.name.partition("_")
        out.append((f"{section}.{rest}", f.name, f.type))
    return out


_CONVERTERS = {"int": int, "float": float, "str": str}


def default_config():
    return ExperimentConfig()


def parse_config_lines(lines, source="<config>"):
    """Build an ExperimentConfig from override lines."""
    by_key = {key: (attr, typ) for key, attr, typ in _schema()}
    cfg = ExperimentConfig()
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = (part.strip() for part in line.partition("="))
        if not sep:
            raise ConfigError(
                f"{source}: expected 'key = value' at line {lineno}"
            )
        if key not in by_key:
            raise ConfigError(
                f"{source}: unknown config key {key!r} at line {lineno}"
            )
        attr, typ = by_key[key]
        try:
            setattr(cfg, attr, _CONVERTERS[typ](value))
        except ValueError:
            raise ConfigError(
                f"{source}: bad {typ} value {value!r} for {key} "
                f"at line {lineno}"
            ) from None
    validate_config(cfg, source)
    return cfg


def load_config(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config_lines(lines, source=str(path))


def validate_config(cfg, source="<config>"):
    def bad(msg):
        raise ConfigError(f"{source}: {msg}")

    if cfg.graph_m < 1 or cfg.graph_n <= cfg.graph_m:
        bad("need graph.n > graph.m >= 1")
    for key, value in (
        ("graph.triangle_prob", cfg.graph_triangle_prob),
        ("env.willing_prob", cfg.env_willing_prob),
        ("env.edge_prob", cfg.env_edge_prob),
    ):
        if not 0.0 <= value <= 1.0:
            bad(f"{key} must be in [0, 1]")
    for key, value in (
        ("graph.num_train", cfg.graph_num_train),
        ("graph.num_val", cfg.graph_num_val),
        ("graph.num_test", cfg.graph_num_test),
        ("env.rounds", cfg.env_rounds),
        ("env.budget", cfg.env_budget),
        ("env.num_sims", cfg.env_num_sims),
        ("eval.runs_per_graph", cfg.eval_runs_per_graph),
        ("bench.runs", cfg.bench_runs),
    ):
        if value < 1:
            bad(f"{key} must be >= 1")
    if cfg.env_rounds * cfg.env_budget > cfg.graph_n:
        bad(
            f"total budget {cfg.env_rounds * cfg.env_budget} exceeds "
            f"graph.n {cfg.graph_n}"
        )
    if cfg.train_reward_mode not in REWARD_MODE_METHOD:
        bad(
            f"train.reward_mode must be one of "
            f"{sorted(REWARD_MODE_METHOD)}, got {cfg.train_reward_mode!r}"
        )
    parse_methods(cfg.eval_methods, source)
    parse_methods(cfg.bench_methods, source)
    parse_sweep(cfg.eval_sweep, source)


def parse_methods(spec, source="<config>"):
    """Comma-separated method list -> validated tuple."""
    methods = tuple(m.strip() for m in spec.split(",") if m.strip())
    if not methods:
        raise ConfigError(f"{source}: empty method list")
    for m in methods:
        if m not in KNOWN_METHODS:
            raise ConfigError(
                f"{source}: unknown method {m!r}, known methods are "
                f"{', '.join(KNOWN_METHODS)}"
            )
    return methods


def parse_sweep(spec, source="<config>"):
    """Sweep spec 'col:v1,v2,...' -> (column, values) or None.

    The column names the swept setting: q (willing probability), T (round
    count) or V (node count).
    """
    spec = spec.strip()
    if not spec:
        return None
    column, sep, rest = spec.partition(":")
    column = column.strip()
    if not sep or column not in ("q", "T", "V"):
        raise ConfigError(
            f"{source}: eval.sweep must look like 'q:0.2,0.4' with column "
            f"q, T or V"
        )
    try:
        if column == "q":
            values = tuple(float(v) for v in rest.split(","))
        else:
            values = tuple(int(v) for v in rest.split(","))
    except ValueError:
        raise ConfigError(f"{source}: bad sweep value list {rest!r}") from None
    if not values:
        raise ConfigError(f"{source}: empty sweep value list")
    return column, values


def dump_config(cfg):
    """Canonical override lines for every key, in schema order."""
    out = []
    for key, attr, _ in _schema():
        out.append(f"{key} = {getattr(cfg, attr)}")
    return out
