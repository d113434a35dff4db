import random

import numpy as np
import pytest

from frogger_rationale import agent, env
from frogger_rationale.env import Action, GameState, Status

from conftest import goal_one_up_config


def _bare_state(rows, frog):
    return GameState(rows=tuple(rows), frog=frog, lives=3, tick=0)


def test_observe_center_of_empty_board():
    state = _bare_state(["." * 7] * 7, (3, 3))
    key = agent.observe(state)
    assert len(key) == 49
    assert key[24] == "F"
    assert key.count(".") == 48


def test_observe_corner_padding(default_cfg):
    state = env.new_game(default_cfg)
    state = GameState(rows=state.rows, frog=(0, 0), lives=3, tick=0)
    key = agent.observe(state)
    assert key.count("#") == 33  # 49 - 4x4 in-board cells


def test_observe_deterministic(default_cfg):
    state = env.new_game(default_cfg)
    assert agent.observe(state) == agent.observe(state)


def test_q_update_examples():
    cfg = agent.AgentConfig(alpha=0.1, gamma=0.95)
    q = agent.QTable()
    agent.q_update(q, "s", Action.UP, 1.0, "s2", False, cfg)
    assert q.values["s"][0] == pytest.approx(0.1)

    q = agent.QTable()
    agent.q_update(q, "s", Action.UP, -100.0, "s2", True, cfg)
    assert q.values["s"][0] == pytest.approx(-10.0)

    q = agent.QTable()
    q.values["s"] = np.array([1.0, 2.0, 3.0, 4.0])
    before = q.values["s"].copy()
    agent.q_update(q, "s", Action.LEFT, 5.0, "s2", False,
                   agent.AgentConfig(alpha=1e-12, gamma=0.95))
    assert np.allclose(q.values["s"], before)


def test_q_update_touches_one_cell():
    cfg = agent.AgentConfig()
    q = agent.QTable()
    q.values["a"] = np.array([1.0, 1.0, 1.0, 1.0])
    q.values["b"] = np.array([2.0, 2.0, 2.0, 2.0])
    agent.q_update(q, "a", Action.DOWN, 3.0, "b", False, cfg)
    assert q.values["a"][0] == 1.0 and q.values["a"][2] == 1.0
    assert np.all(q.values["b"] == 2.0)


def test_select_action_greedy_and_ties():
    q = agent.QTable()
    q.values["s"] = np.array([2.0, 0.0, 0.0, 0.0])
    assert agent.select_action(q, "s", 0.0, random.Random(0)) == Action.UP
    q.values["s"] = np.zeros(4)
    assert agent.select_action(q, "s", 0.0, random.Random(0)) == Action.UP


def test_select_action_uniform_at_epsilon_one():
    q = agent.QTable()
    rng = random.Random(1)
    counts = {a: 0 for a in env.ACTIONS}
    n = 100_000
    for _ in range(n):
        counts[agent.select_action(q, "s", 1.0, rng)] += 1
    for a in env.ACTIONS:
        assert abs(counts[a] / n - 0.25) < 0.01


def test_train_agent_zero_episodes(default_cfg):
    q, stats = agent.train_agent(default_cfg, agent.AgentConfig(episodes=0))
    assert len(q) == 0
    assert stats.episodes == []


def test_train_agent_deterministic(default_cfg):
    cfg = agent.AgentConfig(episodes=40, seed=5)
    q1, s1 = agent.train_agent(default_cfg, cfg)
    q2, s2 = agent.train_agent(default_cfg, cfg)
    assert s1.returns == s2.returns
    assert set(q1.values) == set(q2.values)
    assert all(np.array_equal(q1.values[k], q2.values[k]) for k in q1.values)


def test_degenerate_board_learns_up():
    cfg = goal_one_up_config()
    q, _ = agent.train_agent(cfg, agent.AgentConfig(episodes=150, seed=0))
    start = env.new_game(cfg)
    action = agent.select_action(q, agent.observe(start), 0.0, random.Random(0))
    assert action == Action.UP


def test_rollout_empty_table_repeats_up(default_cfg):
    pairs = agent.rollout(agent.QTable(), default_cfg, seed=3)
    assert all(action == Action.UP for _, action in pairs)
    assert 0 < len(pairs) <= default_cfg.max_steps


def test_rollout_deterministic(default_cfg):
    cfg = agent.AgentConfig(episodes=100, seed=2)
    q, _ = agent.train_agent(default_cfg, cfg)
    r1 = agent.rollout(q, default_cfg, seed=11)
    r2 = agent.rollout(q, default_cfg, seed=11)
    assert [(s.frog, a) for s, a in r1] == [(s.frog, a) for s, a in r2]
    final, _ = env.step(default_cfg, *r1[-1])
    assert final.status != Status.RUNNING or final.tick >= default_cfg.max_steps


def test_q_value_bound_under_random_updates():
    cfg = agent.AgentConfig(alpha=0.5, gamma=0.95)
    bound = 100.0 / (1.0 - cfg.gamma)
    q = agent.QTable()
    rng = random.Random(0)
    keys = [f"k{i}" for i in range(10)]
    for _ in range(5000):
        agent.q_update(
            q,
            rng.choice(keys),
            rng.choice(env.ACTIONS),
            rng.uniform(-100, 100),
            rng.choice(keys),
            rng.random() < 0.1,
            cfg,
        )
    for row in q.values.values():
        assert np.all(np.abs(row) <= bound + 1e-9)


def test_qtable_json_round_trip(default_cfg, tmp_path):
    q, _ = agent.train_agent(default_cfg, agent.AgentConfig(episodes=20, seed=1))
    path = tmp_path / "q.json"
    agent.save_qtable(q, str(path))
    loaded = agent.load_qtable(str(path))
    assert set(loaded.values) == set(q.values)
    assert all(np.array_equal(loaded.values[k], q.values[k]) for k in q.values)
