import pytest

from frogger_rationale import corpus, env


@pytest.fixture(scope="session")
def default_cfg():
    return env.default_config()


@pytest.fixture(scope="session")
def small_corpus(default_cfg):
    return corpus.synth_corpus(default_cfg, 40, seed=3)


def safe_walk_config(height: int = 7, width: int = 7) -> env.EnvConfig:
    """Hazard-free board: goal on top, start one row below the medians."""
    lanes = [env.LaneSpec(env.LaneKind.GOAL)]
    lanes += [env.LaneSpec(env.LaneKind.MEDIAN) for _ in range(height - 2)]
    lanes += [env.LaneSpec(env.LaneKind.START)]
    return env.EnvConfig(width=width, height=height, lanes=tuple(lanes))


def goal_one_up_config() -> env.EnvConfig:
    """Degenerate board: the start row sits directly under the goal."""
    lanes = [
        env.LaneSpec(env.LaneKind.GOAL),
        env.LaneSpec(env.LaneKind.START),
    ]
    lanes += [env.LaneSpec(env.LaneKind.MEDIAN) for _ in range(5)]
    return env.EnvConfig(width=7, height=7, lanes=tuple(lanes))
