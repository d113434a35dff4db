"""Evaluation: perplexity, BLEU-4 vs the random-rationale baseline, and
study stimulus export (candidate / random / exemplary slots)."""

from __future__ import annotations

import json
import math
import random
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from . import corpus as corpus_mod
from . import env, model, serialize, trainer
from .corpus import CorpusRecord, TokenizedPair, Vocabulary
from .model import Hyperparams


class EvalError(ValueError):
    pass


def perplexity(params: dict, pairs: list[TokenizedPair], hyper: Hyperparams) -> float:
    """exp of the token-mean masked cross-entropy over the set."""
    if not pairs:
        raise EvalError("empty evaluation set")
    return math.exp(trainer.dataset_loss(pairs, params, hyper))


def _ngram_counts(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _clipped_matches(cand: list[str], ref: list[str], n: int) -> tuple[int, int]:
    total = max(len(cand) - n + 1, 0)
    if total == 0:
        return 0, 0
    cc = _ngram_counts(cand, n)
    rc = _ngram_counts(ref, n)
    matched = sum(min(count, rc[g]) for g, count in cc.items())
    return matched, total

def _bleu_from_counts(matches, totals, cand_len: int, ref_len: int) -> float:
    log_p = 0.0
    for m, t in zip(matches, totals):
        if t == 0:
            p = 1.0  # candidate shorter than n: vacuous order
        elif m == 0:
            p = 1.0 / (t + 1)  # add-1 smoothing on empty matches
        else:
            p = m / t
        log_p += math.log(p) / 4.0
    bp = 1.0 if cand_len >= ref_len else math.exp(1.0 - ref_len / max(cand_len, 1))
    return bp * math.exp(log_p)


def bleu4(candidate_tokens: list[str], reference_tokens: list[str]) -> float:
    """Sentence BLEU, n <= 4, brevity penalty exp(1 - r/c) when c < r."""
    if not candidate_tokens:
        return 0.0
    matches, totals = [], []
    for n in range(1, 5):
        m, t = _clipped_matches(candidate_tokens, reference_tokens, n)
        matches.append(m)
        totals.append(t)
    return _bleu_from_counts(matches, totals, len(candidate_tokens), len(reference_tokens))


def corpus_bleu4(candidates: list[list[str]], references: list[list[str]]) -> float:
    """Corpus BLEU: n-gram counts pooled across all pairs."""
    if len(candidates) != len(references):
        raise EvalError("candidate/reference count mismatch")
    if not candidates or all(not c for c in candidates):
        return 0.0
    matches = [0] * 4
    totals = [0] * 4
    cand_len = ref_len = 0
    for cand, ref in zip(candidates, references):
        cand_len += len(cand)
        ref_len += len(ref)
        for n in range(1, 5):
            m, t = _clipped_matches(cand, ref, n)
            matches[n - 1] += m
            totals[n - 1] += t
    return _bleu_from_counts(matches, totals, cand_len, ref_len)


def random_baseline(records: list[CorpusRecord], rng: random.Random) -> str:
    """Uniform draw of a rationale, ignoring the action entirely."""
    if not records:
        raise EvalError("empty corpus")
    return records[rng.randrange(len(records))].rationale


@dataclass
class EvalReport:
    perplexity: float
    bleu4: float
    random_baseline_bleu4: float
    outputs: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "perplexity": self.perplexity,
            "bleu4": self.bleu4,
            "random_baseline_bleu4": self.random_baseline_bleu4,
            "outputs": self.outputs,
        }


def evaluate_model(
    params: dict,
    vocab: Vocabulary,
    hyper: Hyperparams,
    view: serialize.ViewConfig,
    test_records: list[CorpusRecord],
    baseline_records: list[CorpusRecord],
    env_cfg: env.EnvConfig,
    seed: int = 0,
) -> EvalReport:
    """Score one trained generator on held-out records (clean inputs)."""
    if not test_records:
        raise EvalError("empty test set")
    pairs = [
        corpus_mod.encode_record(rec, view, vocab, env_cfg.width)
        for rec in test_records
    ]
    ppl = perplexity(params, pairs, hyper)
    rng = random.Random(seed)
    cands, refs, rand_cands, outputs = [], [], [], []
    for rec, pair in zip(test_records, pairs):
        out_ids = model.generate(
            list(pair.input_ids), params, max_decode_len=hyper.max_decode_len
        )
        cand = corpus_mod.decode(out_ids, vocab).split()
        ref = corpus_mod.tokenize(rec.rationale)
        rand = corpus_mod.tokenize(random_baseline(baseline_records, rng))
        cands.append(cand)
        refs.append(ref)
        rand_cands.append(rand)
        outputs.append(
            {
                "id": rec.id,
                "action": rec.action.value,
                "reference": " ".join(ref),
                "candidate": " ".join(cand),
                "random": " ".join(rand),
            }
        )
    return EvalReport(
        perplexity=ppl,
        bleu4=corpus_bleu4(cands, refs),
        random_baseline_bleu4=corpus_bleu4(rand_cands, refs),
        outputs=outputs,
    )


def compare_configs(
    ckpt_focused: str,
    ckpt_complete: str,
    test_records: list[CorpusRecord],
    baseline_records: list[CorpusRecord],
    env_cfg: env.EnvConfig,
    seed: int = 0,
) -> tuple[EvalReport, EvalReport]:
    """Paired reports over identical test actions, one per configuration."""
    p_f, hy_f, vocab_f, hash_f = model.load_checkpoint(ckpt_focused)
    p_c, hy_c, vocab_c, hash_c = model.load_checkpoint(ckpt_complete)
    if hash_f != hash_c:
        raise EvalError("checkpoints were trained with different vocabularies")
    vocab = Vocabulary(tokens=list(vocab_f))
    report_f = evaluate_model(
        p_f, vocab, hy_f, serialize.ViewConfig(mode="focused"),
        test_records, baseline_records, env_cfg, seed,
    )
    report_c = evaluate_model(
        p_c, vocab, hy_c, serialize.ViewConfig(mode="complete"),
        test_records, baseline_records, env_cfg, seed,
    )
    return report_f, report_c


# ---------------------------------------------------------------------------
# Study stimuli

SLOTS = ("candidate", "random", "exemplary")
PERCEPTION_DIMENSIONS = (
    "confidence",
    "human-likeness",
    "adequate justification",
    "understandability",
)


def export_stimuli(
    action_records: list[CorpusRecord],
    ckpt_path: str,
    corpus_records: list[CorpusRecord],
    env_cfg: env.EnvConfig,
    seed: int = 0,
    view: serialize.ViewConfig | None = None,
) -> list[dict]:
    """Build study stimuli: one per action, slot order counterbalanced by
    cycling the three rotations of (candidate, random, exemplary).

    The exemplary slot is always left null for human curation.
    """
    if not action_records:
        raise EvalError("need at least one action record")
    params, hyper, vocab_tokens, _ = model.load_checkpoint(ckpt_path)
    vocab = Vocabulary(tokens=list(vocab_tokens))
    if view is None:
        view = serialize.ViewConfig(mode="focused")
    rng = random.Random(seed)
    stimuli = []
    for i, rec in enumerate(action_records):
        state = rec.state(env_cfg.width)
        candidate = trainer.generate_text(
            params, vocab, state, rec.action, view, max_decode_len=hyper.max_decode_len
        )
        order = SLOTS[i % 3 :] + SLOTS[: i % 3]
        stimuli.append(
            {
                "record_id": rec.id,
                "action": rec.action.value,
                "board": env.render_ascii(state),
                "candidate_rationale": candidate,
                "random_rationale": random_baseline(corpus_records, rng),
                "exemplary_rationale": None,
                "presentation_order": list(order),
                "rating_dimensions": list(PERCEPTION_DIMENSIONS),
            }
        )
    return stimuli


def save_stimuli(stimuli: list[dict], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"stimuli": stimuli}, fh, indent=2)
