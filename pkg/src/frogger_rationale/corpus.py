"""Corpus data model: records, tokenizer, vocabulary, JSONL storage,
splits, and the synthetic template-rationale oracle."""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field

from . import env, serialize
from .env import Action, EnvConfig, GameState, Status

PAD, SOS, EOS, UNK = 0, 1, 2, 3
RESERVED = ("<pad>", "<sos>", "<eos>", "<unk>")

_PUNCT = ".,!?'\""


class CorpusFormatError(ValueError):
    pass


@dataclass
class CorpusRecord:
    """One (state, action, rationale) triple.

    The full board snapshot is stored (with the frog overlay baked in)
    so either view's input can be derived later.
    """

    id: str
    grid: str  # row-major full-board symbol string
    frog: tuple[int, int]
    lives: int
    tick: int
    action: Action
    rationale: str
    participant: str | None = None
    redo_of: str | None = None
    edited: bool = False
    ts: float = 0.0

    def state(self, width: int) -> GameState:
        """Rebuild a (non-steppable) GameState for serialization."""
        if len(self.grid) % width:
            raise CorpusFormatError("grid length is not a multiple of width")
        rows = tuple(
            self.grid[i : i + width] for i in range(0, len(self.grid), width)
        )
        return GameState(
            rows=rows,
            frog=tuple(self.frog),
            lives=self.lives,
            tick=self.tick,
            status=Status.RUNNING,
            last_action=self.action,
        )


def record_from_state(
    rid: str,
    state: GameState,
    action: Action,
    rationale: str,
    participant: str | None = None,
    redo_of: str | None = None,
    edited: bool = False,
    ts: float = 0.0,
) -> CorpusRecord:
    if not rationale.strip():
        raise CorpusFormatError("rationale must be non-empty")
    return CorpusRecord(
        id=rid,
        grid="".join(serialize.serialize_full(state)),
        frog=tuple(state.frog),
        lives=state.lives,
        tick=state.tick,
        action=action,
        rationale=rationale,
        participant=participant,
        redo_of=redo_of,
        edited=edited,
        ts=ts,
    )


# ---------------------------------------------------------------------------
# Tokenization / vocabulary

def tokenize(text: str) -> list[str]:
    """Lowercase, whitespace split, punctuation detached as own tokens."""
    text = text.lower()
    for ch in _PUNCT:
        text = text.replace(ch, f" {ch} ")
    return text.split()


@dataclass
class Vocabulary:
    tokens: list[str]
    token_to_id: dict[str, int] = field(init=False)
    min_freq: int = 1

    def __post_init__(self) -> None:
        self.token_to_id = {tok: i for i, tok in enumerate(self.tokens)}

    def __len__(self) -> int:
        return len(self.tokens)

    def id(self, token: str) -> int:
        return self.token_to_id.get(token, UNK)

    def token(self, idx: int) -> str:
        if not 0 <= idx < len(self.tokens):
            raise CorpusFormatError(f"token id {idx} out of range")
        return self.tokens[idx]

    def hash(self) -> str:
        return hashlib.sha256(json.dumps(self.tokens).encode()).hexdigest()


def input_token_space(env_cfg: EnvConfig, dummy: str = serialize.DEFAULT_DUMMY) -> list[str]:
    """Every token a serialized input can contain; always in the vocab."""
    toks = list(serialize.SPRITE_SYMBOLS) + [dummy]
    toks += [f"COL_{c}" for c in range(env_cfg.width)]
    toks += [f"ROW_{r}" for r in range(env_cfg.height)]
    toks += [serialize.action_token(a) for a in env.ACTIONS]
    toks += [f"LIVES_{n}" for n in range(env_cfg.lives_initial + 1)]
    return toks


def build_vocab(
    records: list[CorpusRecord], env_cfg: EnvConfig, min_freq: int = 1
) -> Vocabulary:
    counts: dict[str, int] = {}
    for rec in records:
        for tok in tokenize(rec.rationale):
            counts[tok] = counts.get(tok, 0) + 1
    tokens = list(RESERVED) + input_token_space(env_cfg)
    seen = set(tokens)
    # Frequency desc then lexicographic: stable across rebuilds.
    for tok in sorted(counts, key=lambda t: (-counts[t], t)):
        if counts[tok] >= min_freq and tok not in seen:
            tokens.append(tok)
            seen.add(tok)
    return Vocabulary(tokens=tokens, min_freq=min_freq)


@dataclass(frozen=True)
class TokenizedPair:
    input_ids: tuple[int, ...]
    target_ids: tuple[int, ...]  # SOS ... EOS


def encode(input_tokens: list[str], rationale: str, vocab: Vocabulary) -> TokenizedPair:
    inp = tuple(vocab.id(t) for t in input_tokens)
    tgt = (SOS,) + tuple(vocab.id(t) for t in tokenize(rationale)) + (EOS,)
    return TokenizedPair(input_ids=inp, target_ids=tgt)


def decode(ids, vocab: Vocabulary) -> str:
    """Join tokens, stopping at the first EOS and skipping PAD/SOS."""
    out = []
    for idx in ids:
        idx = int(idx)
        if idx == EOS:
            break
        if idx in (PAD, SOS):
            continue
        out.append(vocab.token(idx))
    return " ".join(out)


def encode_record(
    rec: CorpusRecord,
    view: serialize.ViewConfig,
    vocab: Vocabulary,
    width: int,
    rng: random.Random | None = None,
    train: bool = False,
) -> TokenizedPair:
    state = rec.state(width)
    seq = serialize.build_input(state, rec.action, view, rng=rng, train=train)
    return encode(seq.tokens(), rec.rationale, vocab)


# ---------------------------------------------------------------------------
# JSONL storage

def record_to_json(rec: CorpusRecord) -> dict:
    return {
        "id": rec.id,
        "grid": rec.grid,
        "frog": list(rec.frog),
        "lives": rec.lives,
        "tick": rec.tick,
        "action": rec.action.value,
        "rationale": rec.rationale,
        "participant": rec.participant,
        "redo_of": rec.redo_of,
        "edited": rec.edited,
        "ts": rec.ts,
    }


def record_from_json(data: dict) -> CorpusRecord:
    return CorpusRecord(
        id=data["id"],
        grid=data["grid"],
        frog=tuple(data["frog"]),
        lives=data["lives"],
        tick=data["tick"],
        action=Action(data["action"]),
        rationale=data["rationale"],
        participant=data.get("participant"),
        redo_of=data.get("redo_of"),
        edited=bool(data.get("edited", False)),
        ts=data.get("ts", 0.0),
    )


def save_jsonl(records: list[CorpusRecord], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(record_to_json(rec)) + "\n")


def load_jsonl(path: str) -> list[CorpusRecord]:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                records.append(record_from_json(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise CorpusFormatError(f"line {lineno}: {exc}") from exc
    return records


# ---------------------------------------------------------------------------
# Splits

@dataclass(frozen=True)
class SplitSpec:
    train: float = 0.8
    val: float = 0.1
    test: float = 0.1
    seed: int = 0

    def validate(self) -> None:
        if min(self.train, self.val, self.test) < 0:
            raise ValueError("split ratios must be non-negative")
        if abs(self.train + self.val + self.test - 1.0) > 1e-9:
            raise ValueError("split ratios must sum to 1")


def split(
    records: list[CorpusRecord], spec: SplitSpec
) -> tuple[list[CorpusRecord], list[CorpusRecord], list[CorpusRecord]]:
    spec.validate()
    shuffled = list(records)
    random.Random(spec.seed).shuffle(shuffled)
    n = len(shuffled)
    n_train = round(n * spec.train)
    n_val = round(n * spec.val)
    n_val = min(n_val, n - n_train)
    return (
        shuffled[:n_train],
        shuffled[n_train : n_train + n_val],
        shuffled[n_train + n_val :],
    )


# ---------------------------------------------------------------------------
# Synthetic rationale oracle

# One deterministic sentence per (hazard condition, direction). Wording
# is deliberately varied across cells so random-baseline n-gram overlap
# stays low; that margin is what the learnability check measures.
_TEMPLATES = {
    ("goal_ahead", "up"): "i moved up because the goal is just ahead",
    ("goal_ahead", "down"): "i stepped down although the goal is right there",
    ("goal_ahead", "left"): "i shifted left to line up with the goal above",
    ("goal_ahead", "right"): "i shifted right to line up with the goal above",
    ("car_left", "right"): "i moved right because there is a car to my left",
    ("car_left", "up"): "i hopped up since a car was closing in from the left",
    ("car_left", "down"): "i dropped back since a car was closing in from the left",
    ("car_left", "left"): "i risked moving left even with a car close on that side",
    ("car_right", "left"): "i moved left because there is a car to my right",
    ("car_right", "up"): "i jumped up as a car approached from the right",
    ("car_right", "down"): "i backed away as a car approached from the right",
    ("car_right", "right"): "i risked moving right even with a car close on that side",
    ("car_ahead", "up"): "i pushed up anyway despite the car ahead of me",
    ("car_ahead", "down"): "i retreated down because a car was directly ahead",
    ("car_ahead", "left"): "i dodged left to avoid the car in front of me",
    ("car_ahead", "right"): "i dodged right to avoid the car in front of me",
    ("car_behind", "up"): "i sped up because a car was right behind me",
    ("car_behind", "down"): "i went down even though a car sat behind me",
    ("car_behind", "left"): "i slid left to shake the car behind me",
    ("car_behind", "right"): "i slid right to shake the car behind me",
    ("log_ride", "up"): "i jumped up onto the log so i can ride it",
    ("log_ride", "down"): "i moved down instead of taking the log above",
    ("log_ride", "left"): "i moved left to get a better angle on the log above",
    ("log_ride", "right"): "i moved right to get a better angle on the log above",
    ("water_ahead", "up"): "i still went up although there is water ahead",
    ("water_ahead", "down"): "i pulled back down because there is water ahead",
    ("water_ahead", "left"): "i went left looking for a dry way past the water",
    ("water_ahead", "right"): "i went right looking for a dry way past the water",
    ("water_left", "right"): "i kept right because the water sits just to my left",
    ("water_right", "left"): "i kept left because the water sits just to my right",
    ("edge_left", "right"): "i moved right to keep away from the edge",
    ("edge_left", "up"): "i climbed up hugging the wall on my left",
    ("edge_left", "down"): "i eased down hugging the wall on my left",
    ("edge_left", "left"): "i pressed left even though the edge is right there",
    ("edge_right", "left"): "i moved left to keep away from the edge",
    ("edge_right", "up"): "i climbed up hugging the wall on my right",
    ("edge_right", "down"): "i eased down hugging the wall on my right",
    ("edge_right", "right"): "i pressed right even though the edge is right there",
    ("clear", "up"): "i moved up because the path ahead is clear",
    ("clear", "down"): "i dropped down since nothing was threatening me",
    ("clear", "left"): "i wandered left since the area looked calm",
    ("clear", "right"): "i wandered right since the area looked calm",
}


def template_rationale(window: str, action: Action) -> str:
    """Deterministic rationale from the 7x7 window and the action taken.

    The first matching hazard condition wins; identical (window, action)
    always yields the identical sentence, which is what makes the
    learnability acceptance test well-posed.
    """
    if len(window) != 49:
        raise ValueError("window must be exactly 49 symbols")
    direction = action.value
    up = window[2 * 7 + 3]
    down = window[4 * 7 + 3]
    left = window[3 * 7 + 2]
    right = window[3 * 7 + 4]
    if up == env.GOAL:
        condition = "goal_ahead"
    elif left == env.CAR:
        condition = "car_left"
    elif right == env.CAR:
        condition = "car_right"
    elif up == env.CAR:
        condition = "car_ahead"
    elif down == env.CAR:
        condition = "car_behind"
    elif up == env.LOG:
        condition = "log_ride"
    elif up == env.WATER:
        condition = "water_ahead"
    elif left == env.WATER and action == Action.RIGHT:
        condition = "water_left"
    elif right == env.WATER and action == Action.LEFT:
        condition = "water_right"
    elif left == env.OUT_OF_BOUNDS:
        condition = "edge_left"
    elif right == env.OUT_OF_BOUNDS:
        condition = "edge_right"
    else:
        condition = "clear"
    return _TEMPLATES[(condition, direction)]


def synth_corpus(env_cfg: EnvConfig, n: int, seed: int) -> list[CorpusRecord]:
    """n records from seeded random-policy play, labeled by the oracle."""
    if n < 0:
        raise ValueError("n must be >= 0")
    rng = random.Random(seed)
    records: list[CorpusRecord] = []
    episode = 0
    while len(records) < n:
        state = env.new_game(env.with_seed(env_cfg, seed + episode))
        episode += 1
        while state.status == Status.RUNNING and len(records) < n:
            action = env.ACTIONS[rng.randrange(len(env.ACTIONS))]
            window = "".join(serialize.serialize_focused(state, 7))
            records.append(
                record_from_state(
                    rid=f"synth-{len(records):06d}",
                    state=state,
                    action=action,
                    rationale=template_rationale(window, action),
                    participant="oracle",
                    ts=float(len(records)),
                )
            )
            state, _ = env.step(env_cfg, state, action)
    return records


def fingerprint(records: list[CorpusRecord]) -> str:
    digest = hashlib.sha256()
    for rec in records:
        digest.update(json.dumps(record_to_json(rec), sort_keys=True).encode())
    return digest.hexdigest()
