"""Turn-based Frogger-style gridworld.

The world advances exactly one tick per player action: the frog moves,
then every moving lane shifts, then collisions/drowning are resolved.
All transitions are pure (state in, state out) so trajectories are
bit-identical for a fixed (config, action sequence).
"""

from __future__ import annotations

import enum
import json
import random
from dataclasses import dataclass, field, replace

# Sprite symbols (the serialization alphabet reuses these).
EMPTY = "."
CAR = "C"
LOG = "L"
WATER = "W"
MEDIAN = "M"
GOAL = "G"
FROG = "F"
OUT_OF_BOUNDS = "#"

GOAL_REWARD = 100.0
DEATH_REWARD = -100.0
PROGRESS_REWARD = 1.0
RETREAT_REWARD = -1.0


class ConfigError(ValueError):
    """Raised for an EnvConfig that violates its invariants."""


class IllegalTransition(RuntimeError):
    """Raised when stepping a terminal state."""


class Action(enum.Enum):
    UP = "up"
    DOWN = "down"
    LEFT = "left"
    RIGHT = "right"


# Fixed order used for argmax tie-breaking and table layout.
ACTIONS = (Action.UP, Action.DOWN, Action.LEFT, Action.RIGHT)

_DELTAS = {
    Action.UP: (0, -1),
    Action.DOWN: (0, 1),
    Action.LEFT: (-1, 0),
    Action.RIGHT: (1, 0),
}


class LaneKind(enum.Enum):
    GOAL = "goal"
    WATER = "water"
    MEDIAN = "median"
    ROAD = "road"
    START = "start"


class Event(enum.Enum):
    MOVED = "moved"
    BLOCKED_BY_WALL = "blocked_by_wall"
    DIED = "died"
    REACHED_GOAL = "reached_goal"
    CARRIED_BY_LOG = "carried_by_log"


@dataclass(frozen=True)
class LaneSpec:
    kind: LaneKind
    direction: str = "none"  # "left" | "right" | "none"
    period: int = 0  # ticks per one-cell shift; 0 = static
    pattern: str = ""  # occupancy bits, length = board width

    def validate(self, width: int) -> None:
        if self.direction not in ("left", "right", "none"):
            raise ConfigError(f"bad lane direction {self.direction!r}")
        if self.kind in (LaneKind.GOAL, LaneKind.MEDIAN, LaneKind.START):
            if self.direction != "none" or self.pattern:
                raise ConfigError(f"{self.kind.value} lane must be static and empty")
        if (self.period == 0) != (self.direction == "none"):
            raise ConfigError("period = 0 iff direction = none")
        if self.kind in (LaneKind.WATER, LaneKind.ROAD):
            if len(self.pattern) != width:
                raise ConfigError(
                    f"pattern length {len(self.pattern)} != width {width}"
                )
            if set(self.pattern) - {"0", "1"}:
                raise ConfigError("pattern must be a 0/1 string")
        if self.kind is LaneKind.ROAD and self.pattern == "1" * width:
            raise ConfigError("road lane cannot be fully occupied")


@dataclass(frozen=True)
class EnvConfig:
    width: int
    height: int
    lanes: tuple[LaneSpec, ...]
    lives_initial: int = 3
    max_steps: int = 200
    seed: int = 0

    def validate(self) -> None:
        if self.width < 7 or self.height < 7:
            raise ConfigError("board must be at least 7x7")
        if len(self.lanes) != self.height:
            raise ConfigError("exactly one lane per row required")
        kinds = [lane.kind for lane in self.lanes]
        if kinds.count(LaneKind.GOAL) != 1:
            raise ConfigError("exactly one goal row required")
        if kinds.count(LaneKind.START) != 1:
            raise ConfigError("exactly one start row required")
        if self.lives_initial < 1 or self.max_steps < 1:
            raise ConfigError("lives_initial and max_steps must be positive")
        for lane in self.lanes:
            lane.validate(self.width)

    @property
    def goal_row(self) -> int:
        return next(i for i, l in enumerate(self.lanes) if l.kind == LaneKind.GOAL)

    @property
    def start_row(self) -> int:
        return next(i for i, l in enumerate(self.lanes) if l.kind == LaneKind.START)


class Status(enum.Enum):
    RUNNING = "running"
    WON = "won"
    LOST = "lost"


@dataclass(frozen=True)
class GameState:
    """Immutable snapshot of the board.

    `rows` holds the base sprite grid without the frog overlay; lane
    shifting is a string rotation of the affected row. Reward shaping
    bookkeeping (`best_dist`, `retreat_penalized`) rides along so that
    step() stays a pure function.
    """

    rows: tuple[str, ...]
    frog: tuple[int, int]  # (col, row)
    lives: int
    tick: int
    status: Status = Status.RUNNING
    last_action: Action | None = None
    best_dist: int = field(default=10**9, compare=False)
    retreat_penalized: bool = field(default=False, compare=False)

    @property
    def width(self) -> int:
        return len(self.rows[0])

    @property
    def height(self) -> int:
        return len(self.rows)

    def sprite_at(self, col: int, row: int) -> str:
        """Sprite symbol at (col, row); frog overlay applied, OOB padded."""
        if not (0 <= col < self.width and 0 <= row < self.height):
            return OUT_OF_BOUNDS
        if (col, row) == self.frog:
            return FROG
        return self.rows[row][col]


@dataclass(frozen=True)
class StepOutcome:
    reward: float
    event: Event
    terminal: bool


def _lane_row_sprites(lane: LaneSpec, width: int) -> str:
    if lane.kind == LaneKind.GOAL:
        return GOAL * width
    if lane.kind == LaneKind.MEDIAN:
        return MEDIAN * width
    if lane.kind == LaneKind.START:
        return EMPTY * width
    occupied = CAR if lane.kind == LaneKind.ROAD else LOG
    background = EMPTY if lane.kind == LaneKind.ROAD else WATER
    return "".join(occupied if bit == "1" else background for bit in lane.pattern)


def _rotate(row: str, direction: str) -> str:
    if direction == "right":
        return row[-1] + row[:-1]
    return row[1:] + row[0]


def new_game(config: EnvConfig) -> GameState:
    config.validate()
    rng = random.Random(config.seed)
    rows = []
    for lane in config.lanes:
        row = _lane_row_sprites(lane, config.width)
        if lane.period > 0:
            # Lane phase is a seeded rotation; same seed => same board.
            for _ in range(rng.randrange(config.width)):
                row = _rotate(row, lane.direction)
        rows.append(row)
    start = (config.width // 2, config.start_row)
    state = GameState(
        rows=tuple(rows),
        frog=start,
        lives=config.lives_initial,
        tick=0,
        best_dist=abs(config.start_row - config.goal_row),
    )
    return state


def step(config: EnvConfig, state: GameState, action: Action) -> tuple[GameState, StepOutcome]:
    if state.status != Status.RUNNING:
        raise IllegalTransition("cannot step a terminal state")

    width, height = config.width, config.height
    col, row = state.frog
    dx, dy = _DELTAS[action]
    ncol, nrow = col + dx, row + dy
    blocked = not (0 <= ncol < width and 0 <= nrow < height)
    if blocked:
        ncol, nrow = col, row

    tick = state.tick + 1
    on_log_before_shift = state.rows[nrow][ncol] == LOG

    new_rows = []
    carried = False
    carried_off = False
    for i, lane in enumerate(config.lanes):
        lane_row = state.rows[i]
        if lane.period > 0 and tick % lane.period == 0:
            lane_row = _rotate(lane_row, lane.direction)
            if i == nrow and on_log_before_shift:
                carried = True
                ncol += 1 if lane.direction == "right" else -1
                if not (0 <= ncol < width):
                    carried_off = True
                    ncol = min(max(ncol, 0), width - 1)
        new_rows.append(lane_row)
    rows = tuple(new_rows)

    landing = rows[nrow][ncol]
    died = carried_off or landing == CAR or landing == WATER
    won = not died and config.lanes[nrow].kind == LaneKind.GOAL

    lives = state.lives
    status = Status.RUNNING
    if died:
        lives -= 1
        if lives <= 0:
            status = Status.LOST
        else:
            ncol, nrow = width // 2, config.start_row
    elif won:
        status = Status.WON
    if status == Status.RUNNING and tick >= config.max_steps:
        status = Status.LOST

    # Shaping: +1 on each first entry into a closer row; a single -1 the
    # first time the frog retreats from its best row (flag resets when a
    # new best is reached) so episode reward stays bounded.
    best_dist = state.best_dist
    retreat_penalized = state.retreat_penalized
    if won:
        reward = GOAL_REWARD
    elif died:
        reward = DEATH_REWARD
    else:
        dist = abs(nrow - config.goal_row)
        if dist < best_dist:
            reward = PROGRESS_REWARD
            best_dist = dist
            retreat_penalized = False
        elif dist > abs(row - config.goal_row) and not retreat_penalized:
            reward = RETREAT_REWARD
            retreat_penalized = True
        else:
            reward = 0.0

    if died:
        event = Event.DIED
    elif won:
        event = Event.REACHED_GOAL
    elif carried:
        event = Event.CARRIED_BY_LOG
    elif blocked:
        event = Event.BLOCKED_BY_WALL
    else:
        event = Event.MOVED

    next_state = GameState(
        rows=rows,
        frog=(ncol, nrow),
        lives=lives,
        tick=tick,
        status=status,
        last_action=action,
        best_dist=best_dist,
        retreat_penalized=retreat_penalized,
    )
    return next_state, StepOutcome(reward, event, status != Status.RUNNING)


def render_ascii(state: GameState) -> str:
    col, row = state.frog
    lines = []
    for r, line in enumerate(state.rows):
        if r == row:
            line = line[:col] + FROG + line[col + 1 :]
        lines.append(line)
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Config serialization

def config_to_dict(config: EnvConfig) -> dict:
    return {
        "width": config.width,
        "height": config.height,
        "lives_initial": config.lives_initial,
        "max_steps": config.max_steps,
        "seed": config.seed,
        "lanes": [
            {
                "kind": lane.kind.value,
                "direction": lane.direction,
                "period": lane.period,
                "pattern": lane.pattern,
            }
            for lane in config.lanes
        ],
    }


def config_from_dict(data: dict) -> EnvConfig:
    try:
        lanes = tuple(
            LaneSpec(
                kind=LaneKind(l["kind"]),
                direction=l.get("direction", "none"),
                period=l.get("period", 0),
                pattern=l.get("pattern", ""),
            )
            for l in data["lanes"]
        )
        config = EnvConfig(
            width=data["width"],
            height=data["height"],
            lanes=lanes,
            lives_initial=data.get("lives_initial", 3),
            max_steps=data.get("max_steps", 200),
            seed=data.get("seed", 0),
        )
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad env config: {exc}") from exc
    config.validate()
    return config


def load_config(path: str) -> EnvConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return config_from_dict(json.load(fh))


def default_config(seed: int = 0) -> EnvConfig:
    """13x11 board: goal, 4 log lanes, median, 4 car lanes, start."""
    water = "1111001111000"
    road = "1000000100000"
    lanes = (
        LaneSpec(LaneKind.GOAL),
        LaneSpec(LaneKind.WATER, "left", 1, water),
        LaneSpec(LaneKind.WATER, "right", 1, water),
        LaneSpec(LaneKind.WATER, "left", 1, water),
        LaneSpec(LaneKind.WATER, "right", 1, water),
        LaneSpec(LaneKind.MEDIAN),
        LaneSpec(LaneKind.ROAD, "right", 1, road),
        LaneSpec(LaneKind.ROAD, "left", 1, road),
        LaneSpec(LaneKind.ROAD, "right", 1, road),
        LaneSpec(LaneKind.ROAD, "left", 1, road),
        LaneSpec(LaneKind.START),
    )
    return EnvConfig(width=13, height=11, lanes=lanes, seed=seed)


def with_seed(config: EnvConfig, seed: int) -> EnvConfig:
    return replace(config, seed=seed)
