"""Game state -> model input token sequences (focused / complete views)."""

from __future__ import annotations

import random
from dataclasses import dataclass

from . import env
from .env import GameState

# Sprite -> single-character symbol (bijective); the dummy symbol used
# for complete-view noise is distinct from every sprite symbol.
DEFAULT_ALPHABET = {
    "empty": env.EMPTY,
    "car": env.CAR,
    "log": env.LOG,
    "water": env.WATER,
    "median": env.MEDIAN,
    "goal": env.GOAL,
    "frog": env.FROG,
    "out_of_bounds": env.OUT_OF_BOUNDS,
}
DEFAULT_DUMMY = "?"

SPRITE_SYMBOLS = tuple(DEFAULT_ALPHABET.values())


class ViewError(ValueError):
    pass


@dataclass(frozen=True)
class ViewConfig:
    mode: str  # "focused" | "complete"
    window: int = 7
    noise_prob: float = 0.2
    dummy: str = DEFAULT_DUMMY

    def validate(self) -> None:
        if self.mode not in ("focused", "complete"):
            raise ViewError(f"unknown view mode {self.mode!r}")
        if self.window < 3 or self.window % 2 == 0:
            raise ViewError("window must be odd and >= 3")
        if not 0.0 <= self.noise_prob <= 1.0:
            raise ViewError("noise_prob must be a probability")
        if self.dummy in SPRITE_SYMBOLS:
            raise ViewError("dummy symbol collides with a sprite symbol")


@dataclass(frozen=True)
class InputSequence:
    grid_symbols: tuple[str, ...]
    frog_col_token: str
    frog_row_token: str
    action_token: str
    lives_token: str

    def tokens(self) -> list[str]:
        return [
            *self.grid_symbols,
            self.frog_col_token,
            self.frog_row_token,
            self.action_token,
            self.lives_token,
        ]


def serialize_full(state: GameState) -> list[str]:
    """Row-major board symbols with the frog cell overlaid."""
    out = []
    fcol, frow = state.frog
    for r, row in enumerate(state.rows):
        if r == frow:
            row = row[:fcol] + env.FROG + row[fcol + 1 :]
        out.extend(row)
    return out


def serialize_focused(state: GameState, window: int = 7) -> list[str]:
    """window x window frog-centered symbols, '#'-padded off the board."""
    if window < 3 or window % 2 == 0:
        raise ViewError("window must be odd and >= 3")
    half = window // 2
    fcol, frow = state.frog
    out = []
    for r in range(frow - half, frow + half + 1):
        for c in range(fcol - half, fcol + half + 1):
            out.append(state.sprite_at(c, r))
    return out


def apply_noise(
    symbols: list[str], noise_prob: float, dummy: str, rng: random.Random
) -> list[str]:
    """Replace each non-frog symbol with `dummy` at probability noise_prob.

    The frog's own cell is exempt so the position anchor survives.
    """
    if not 0.0 <= noise_prob <= 1.0:
        raise ViewError("noise_prob must be a probability")
    out = []
    for sym in symbols:
        if sym != env.FROG and rng.random() < noise_prob:
            out.append(dummy)
        else:
            out.append(sym)
    return out


def position_tokens(state: GameState) -> tuple[str, str]:
    col, row = state.frog
    return f"COL_{col}", f"ROW_{row}"


def action_token(action: env.Action) -> str:
    return f"ACT_{action.value.upper()}"


def lives_token(lives: int) -> str:
    return f"LIVES_{lives}"


def build_input(
    state: GameState,
    action: env.Action,
    view: ViewConfig,
    rng: random.Random | None = None,
    train: bool = False,
) -> InputSequence:
    """Assemble the full input sequence for one (state, action) pair.

    Noise is a train-time regularizer for the complete view only;
    inference inputs stay clean.
    """
    view.validate()
    if view.mode == "focused":
        grid = serialize_focused(state, view.window)
    else:
        grid = serialize_full(state)
        if train and view.noise_prob > 0:
            if rng is None:
                raise ViewError("train-time complete view needs an rng")
            grid = apply_noise(grid, view.noise_prob, view.dummy, rng)
    col_tok, row_tok = position_tokens(state)
    return InputSequence(
        grid_symbols=tuple(grid),
        frog_col_token=col_tok,
        frog_row_token=row_tok,
        action_token=action_token(action),
        lives_token=lives_token(state.lives),
    )
