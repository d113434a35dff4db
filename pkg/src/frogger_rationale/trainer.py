"""Training orchestration: corpus -> view inputs -> epochs -> checkpoints."""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass, field

import numpy as np

from . import corpus as corpus_mod
from . import env, model, serialize
from .corpus import CorpusRecord, TokenizedPair, Vocabulary
from .model import Hyperparams, PAD


class TrainingError(RuntimeError):
    pass


@dataclass
class TrainRun:
    view: serialize.ViewConfig
    hyper: Hyperparams
    vocab: Vocabulary
    params: dict  # best-validation parameters
    loss_curve: list[float] = field(default_factory=list)
    val_curve: list[float] = field(default_factory=list)
    best_epoch: int = -1
    corpus_fingerprint: str = ""


def _pad_targets(pairs: list[TokenizedPair]) -> np.ndarray:
    width = max(len(p.target_ids) for p in pairs)
    out = np.full((len(pairs), width), PAD, dtype=int)
    for i, p in enumerate(pairs):
        out[i, : len(p.target_ids)] = p.target_ids
    return out


def _batches(pairs: list[TokenizedPair], batch_size: int):
    for start in range(0, len(pairs), batch_size):
        chunk = pairs[start : start + batch_size]
        inputs = np.asarray([p.input_ids for p in chunk], dtype=int)
        yield inputs, _pad_targets(chunk)


def _encode_all(
    records: list[CorpusRecord],
    view: serialize.ViewConfig,
    vocab: Vocabulary,
    width: int,
    noise_rng: random.Random | None = None,
    train: bool = False,
) -> list[TokenizedPair]:
    return [
        corpus_mod.encode_record(rec, view, vocab, width, rng=noise_rng, train=train)
        for rec in records
    ]


def dataset_loss(
    pairs: list[TokenizedPair], params: dict, hyper: Hyperparams
) -> float:
    """Token-mean cross-entropy over a whole set (teacher-forced, clean)."""
    eval_hyper = Hyperparams(**{**hyper.__dict__, "teacher_forcing_ratio": 1.0})
    total, tokens = 0.0, 0
    for inputs, targets in _batches(pairs, hyper.batch_size):
        loss, trace = model.forward_batch(inputs, targets, params, eval_hyper)
        total += loss * trace.n_tokens
        tokens += trace.n_tokens
    return total / tokens


def train(
    records: list[CorpusRecord],
    view: serialize.ViewConfig,
    hyper: Hyperparams,
    env_cfg: env.EnvConfig | None = None,
    val_records: list[CorpusRecord] | None = None,
    vocab: Vocabulary | None = None,
    min_freq: int = 1,
) -> TrainRun:
    """Train one generator configuration.

    Complete-view inputs are re-noised every epoch (train-time
    regularizer); validation always runs on clean inputs.
    """
    if not records:
        raise TrainingError("empty training corpus")
    view.validate()
    hyper.validate()
    if env_cfg is None:
        env_cfg = env.default_config()
    if vocab is None:
        vocab = corpus_mod.build_vocab(records, env_cfg, min_freq=min_freq)

    width = env_cfg.width
    noisy = view.mode == "complete" and view.noise_prob > 0
    clean_pairs = _encode_all(records, view, vocab, width)
    val_pairs = (
        _encode_all(val_records, view, vocab, width) if val_records else []
    )

    params = model.init_params(len(vocab), hyper, np.random.default_rng(hyper.seed))
    opt = model.AdamState()
    tf_rng = np.random.default_rng(hyper.seed + 1)

    run = TrainRun(
        view=view,
        hyper=hyper,
        vocab=vocab,
        params={k: v.copy() for k, v in params.items()},
        corpus_fingerprint=corpus_mod.fingerprint(records),
    )
    best_val = float("inf")
    for epoch in range(hyper.epochs):
        if noisy:
            noise_rng = random.Random(hyper.seed * 1_000_003 + epoch)
            pairs = _encode_all(records, view, vocab, width, noise_rng, train=True)
        else:
            pairs = clean_pairs
        order = list(range(len(pairs)))
        random.Random(hyper.seed + epoch).shuffle(order)
        pairs = [pairs[i] for i in order]

        total, tokens = 0.0, 0
        for inputs, targets in _batches(pairs, hyper.batch_size):
            loss, trace = model.forward_batch(inputs, targets, params, hyper, tf_rng)
            if not np.isfinite(loss):
                raise TrainingError(f"non-finite loss at epoch {epoch}")
            grads = model.backward(trace, params)
            model.apply_update(params, grads, opt, hyper)
            total += loss * trace.n_tokens
            tokens += trace.n_tokens
        run.loss_curve.append(total / tokens)

        if val_pairs:
            vloss = dataset_loss(val_pairs, params, hyper)
            run.val_curve.append(vloss)
            if vloss < best_val:
                best_val = vloss
                run.best_epoch = epoch
                run.params = {k: v.copy() for k, v in params.items()}
        else:
            run.best_epoch = epoch
            run.params = {k: v.copy() for k, v in params.items()}
    return run


def save_run(run: TrainRun, ckpt_path: str, curve_path: str | None = None) -> None:
    model.save_checkpoint(ckpt_path, run.params, run.hyper, run.vocab.tokens)
    if curve_path:
        with open(curve_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["epoch", "train_loss", "val_loss"])
            for i, loss in enumerate(run.loss_curve):
                val = run.val_curve[i] if i < len(run.val_curve) else ""
                writer.writerow([i, loss, val])


def generate_text(
    params: dict,
    vocab: Vocabulary,
    state: env.GameState,
    action: env.Action,
    view: serialize.ViewConfig,
    mode: str = "greedy",
    beam_width: int = 3,
    max_decode_len: int = 40,
) -> str:
    """Decode a rationale for one (state, action) under a view (clean input)."""
    seq = serialize.build_input(state, action, view)
    ids = [vocab.id(t) for t in seq.tokens()]
    out = model.generate(
        ids, params, mode=mode, beam_width=beam_width, max_decode_len=max_decode_len
    )
    return corpus_mod.decode(out, vocab)


def overfit_sanity(
    n: int = 10,
    seed: int = 0,
    epochs: int = 500,
    hidden_size: int = 64,
    embed_size: int = 32,
    learning_rate: float = 1e-2,
    negate_gradients: bool = False,
) -> dict:
    """Memorization smoke test on n synthetic pairs.

    Passes iff greedy decoding reproduces >= n-1 targets token-exactly.
    `negate_gradients` is a mutation hook used to prove the test can fail.
    """
    env_cfg = env.default_config()
    records = corpus_mod.synth_corpus(env_cfg, n, seed)
    view = serialize.ViewConfig(mode="focused")
    vocab = corpus_mod.build_vocab(records, env_cfg)
    hyper = Hyperparams(
        hidden_size=hidden_size,
        embed_size=embed_size,
        learning_rate=learning_rate,
        batch_size=n,
        epochs=epochs,
        seed=seed,
    )
    pairs = _encode_all(records, view, vocab, env_cfg.width)
    params = model.init_params(len(vocab), hyper, np.random.default_rng(seed))
    opt = model.AdamState()
    losses = []
    for _ in range(epochs):
        inputs, targets = next(_batches(pairs, n))
        loss, trace = model.forward_batch(inputs, targets, params, hyper)
        grads = model.backward(trace, params)
        if negate_gradients:
            grads = {k: -g for k, g in grads.items()}
        model.apply_update(params, grads, opt, hyper)
        losses.append(loss)
        if loss < 0.01:
            break

    exact = 0
    for rec, pair in zip(records, pairs):
        out = model.generate(list(pair.input_ids), params, max_decode_len=hyper.max_decode_len)
        if tuple(out) == tuple(pair.target_ids[1:-1]):
            exact += 1
    return {
        "n": n,
        "final_loss": losses[-1],
        "loss_curve": losses,
        "exact": exact,
        "passed": exact >= n - 1,
    }
