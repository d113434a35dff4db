"""Tabular Q-learning over the 7x7 frog-centered observation window."""

from __future__ import annotations

import csv
import json
import random
from dataclasses import dataclass, field

import numpy as np

from . import env, serialize
from .env import ACTIONS, Action, EnvConfig, GameState, Status

WINDOW = 7


def observe(state: GameState, window: int = WINDOW) -> str:
    """Canonical 49-symbol observation key (row-major, '#'-padded)."""
    return "".join(serialize.serialize_focused(state, window))


@dataclass
class AgentConfig:
    alpha: float = 0.1
    gamma: float = 0.95
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_decay_episodes: int | None = None  # default: 80% of episodes
    episodes: int = 50_000
    seed: int = 0

    def validate(self) -> None:
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must be in (0, 1]")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must be in [0, 1)")
        if not 1.0 >= self.epsilon_start >= self.epsilon_end >= 0.0:
            raise ValueError("need 1 >= epsilon_start >= epsilon_end >= 0")

    def epsilon_at(self, episode: int) -> float:
        decay = self.epsilon_decay_episodes
        if decay is None:
            decay = max(1, int(0.8 * self.episodes))
        frac = min(1.0, episode / decay)
        return self.epsilon_start + frac * (self.epsilon_end - self.epsilon_start)


@dataclass
class QTable:
    values: dict[str, np.ndarray] = field(default_factory=dict)
    visits: dict[str, int] = field(default_factory=dict)

    def q(self, key: str) -> np.ndarray:
        row = self.values.get(key)
        if row is None:
            return np.zeros(len(ACTIONS))
        return row

    def __len__(self) -> int:
        return len(self.values)


def q_update(
    q: QTable,
    s: str,
    a: Action,
    r: float,
    s_next: str,
    terminal: bool,
    cfg: AgentConfig,
) -> QTable:
    """Watkins update in place; touches exactly the (s, a) cell."""
    row = q.values.get(s)
    if row is None:
        row = np.zeros(len(ACTIONS))
        q.values[s] = row
    target = r
    if not terminal:
        target += cfg.gamma * float(np.max(q.q(s_next)))
    ai = ACTIONS.index(a)
    row[ai] += cfg.alpha * (target - row[ai])
    q.visits[s] = q.visits.get(s, 0) + 1
    return q


def select_action(q: QTable, s: str, epsilon: float, rng: random.Random) -> Action:
    """Epsilon-greedy; greedy ties break by the fixed action order."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must be a probability")
    if epsilon > 0 and rng.random() < epsilon:
        return ACTIONS[rng.randrange(len(ACTIONS))]
    return ACTIONS[int(np.argmax(q.q(s)))]


@dataclass
class TrainStats:
    episodes: list[int] = field(default_factory=list)
    returns: list[float] = field(default_factory=list)
    successes: list[bool] = field(default_factory=list)

    def success_rate(self, last: int | None = None) -> float:
        window = self.successes[-last:] if last else self.successes
        return sum(window) / len(window) if window else 0.0


def train_agent(env_cfg: EnvConfig, cfg: AgentConfig) -> tuple[QTable, TrainStats]:
    cfg.validate()
    env_cfg.validate()
    q = QTable()
    stats = TrainStats()
    rng = random.Random(cfg.seed)
    for episode in range(cfg.episodes):
        epsilon = cfg.epsilon_at(episode)
        state = env.new_game(env.with_seed(env_cfg, env_cfg.seed + episode))
        total = 0.0
        while state.status == Status.RUNNING:
            key = observe(state)
            action = select_action(q, key, epsilon, rng)
            state, outcome = env.step(env_cfg, state, action)
            q_update(
                q,
                key,
                action,
                outcome.reward,
                observe(state),
                state.status != Status.RUNNING,
                cfg,
            )
            total += outcome.reward
        stats.episodes.append(episode)
        stats.returns.append(total)
        stats.successes.append(state.status == Status.WON)
    return q, stats


def rollout(
    q: QTable, env_cfg: EnvConfig, seed: int
) -> list[tuple[GameState, Action]]:
    """Greedy (epsilon = 0) trajectory of (state-before-action, action) pairs."""
    rng = random.Random(seed)
    state = env.new_game(env.with_seed(env_cfg, seed))
    pairs = []
    while state.status == Status.RUNNING:
        action = select_action(q, observe(state), 0.0, rng)
        pairs.append((state, action))
        state, _ = env.step(env_cfg, state, action)
    return pairs


def evaluate(q: QTable, env_cfg: EnvConfig, episodes: int, seed: int = 10**6) -> float:
    """Greedy success rate over `episodes` fresh boards."""
    wins = 0
    for i in range(episodes):
        state = env.new_game(env.with_seed(env_cfg, seed + i))
        while state.status == Status.RUNNING:
            action = select_action(q, observe(state), 0.0, random.Random(0))
            state, _ = env.step(env_cfg, state, action)
        wins += state.status == Status.WON
    return wins / episodes


def save_qtable(q: QTable, path: str) -> None:
    data = {key: [float(v) for v in row] for key, row in sorted(q.values.items())}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh)


def load_qtable(path: str) -> QTable:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    q = QTable()
    for key, row in data.items():
        q.values[key] = np.asarray(row, dtype=float)
    return q


def save_stats(stats: TrainStats, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["episode", "return", "success"])
        for e, r, s in zip(stats.episodes, stats.returns, stats.successes):
            writer.writerow([e, r, int(s)])
