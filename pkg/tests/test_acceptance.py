"""End-to-end acceptance suite for the rationale generation pipeline.

Each test pins one release criterion at a stated tolerance and prints a
one-line verdict. The heavy corpus and the two hidden-64 training runs
are shared across tests through module-scoped fixtures; the hidden-256
reference run is its own test because it dominates the wall clock.
"""

import json
import random
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from frogger_rationale import agent, corpus, env, evaluate, model, serialize, trainer
from frogger_rationale.model import EOS, SOS, Hyperparams
from frogger_rationale.service import create_app

FOCUSED = serialize.ViewConfig(mode="focused")
COMPLETE = serialize.ViewConfig(mode="complete")

CORPUS_SIZE = 2200
TEST_SIZE = 200


@pytest.fixture(scope="module")
def big_corpus(default_cfg):
    records = corpus.synth_corpus(default_cfg, CORPUS_SIZE, seed=7)
    return records[:-TEST_SIZE], records[-TEST_SIZE:]


@pytest.fixture(scope="module")
def shared_vocab(default_cfg, big_corpus):
    train_recs, _ = big_corpus
    return corpus.build_vocab(train_recs, default_cfg)


def _train_hyper(**kw):
    defaults = dict(hidden_size=64, embed_size=64, learning_rate=2e-3,
                    batch_size=32, epochs=40, seed=0)
    defaults.update(kw)
    return Hyperparams(**defaults)


@pytest.fixture(scope="module")
def focused_run(default_cfg, big_corpus, shared_vocab):
    train_recs, _ = big_corpus
    start = time.monotonic()
    run = trainer.train(
        train_recs, FOCUSED, _train_hyper(), env_cfg=default_cfg, vocab=shared_vocab
    )
    run_seconds = time.monotonic() - start
    return run, run_seconds


@pytest.fixture(scope="module")
def complete_run(default_cfg, big_corpus, shared_vocab):
    train_recs, _ = big_corpus
    return trainer.train(
        train_recs, COMPLETE, _train_hyper(epochs=6), env_cfg=default_cfg,
        vocab=shared_vocab,
    )


def test_criterion_1_gradient_fidelity():
    """Analytic gradients match central differences on a tiny model."""
    start = time.monotonic()
    hyper = Hyperparams(hidden_size=8, embed_size=8, seed=0)
    params = model.init_params(12, hyper, np.random.default_rng(0))
    for k in params:
        params[k] = params[k] * 12.0  # away from the near-uniform init regime
    errs = model.finite_difference_check(
        params, [4, 5, 6, 7, 8], [SOS, 9, 10, EOS], hyper, epsilon=1e-5
    )
    worst = max(errs.values())
    elapsed = time.monotonic() - start
    print(f"[criterion 1] max relative gradient error {worst:.3e} in {elapsed:.1f}s")
    assert worst < 1e-5
    assert elapsed < 60.0


def test_criterion_2_overfit_ten_pairs():
    """Ten synthetic pairs are memorized within 500 epochs."""
    start = time.monotonic()
    report = trainer.overfit_sanity(n=10, seed=0, epochs=500)
    elapsed = time.monotonic() - start
    print(
        f"[criterion 2] loss {report['final_loss']:.4f}, "
        f"exact {report['exact']}/10 in {elapsed:.1f}s"
    )
    assert report["final_loss"] < 0.05
    assert report["exact"] >= 9
    assert elapsed < 300.0


def test_criterion_3_focused_view_beats_random(default_cfg, big_corpus, focused_run):
    """Held-out BLEU-4 >= 0.60 and >= 3x the random-rationale baseline."""
    train_recs, test_recs = big_corpus
    run, run_seconds = focused_run
    report = evaluate.evaluate_model(
        run.params, run.vocab, run.hyper, FOCUSED, test_recs, train_recs,
        default_cfg, seed=0,
    )
    ratio = report.bleu4 / max(report.random_baseline_bleu4, 1e-12)
    print(
        f"[criterion 3] BLEU-4 {report.bleu4:.3f}, "
        f"random {report.random_baseline_bleu4:.3f} (x{ratio:.1f}), "
        f"trained in {run_seconds:.0f}s"
    )
    assert len(report.outputs) == TEST_SIZE
    assert report.bleu4 >= 0.60
    assert ratio >= 3.0
    assert run_seconds < 1800.0


def test_criterion_3_reference_settings_complete(default_cfg, big_corpus, shared_vocab):
    """The full-size configuration (hidden 256, 100 epochs) runs to completion."""
    train_recs, _ = big_corpus
    hyper = Hyperparams(hidden_size=256, embed_size=128, learning_rate=1e-3,
                        batch_size=32, epochs=100, seed=0)
    run = trainer.train(
        train_recs, FOCUSED, hyper, env_cfg=default_cfg, vocab=shared_vocab
    )
    print(
        f"[criterion 3b] reference run finished: "
        f"loss {run.loss_curve[0]:.3f} -> {run.loss_curve[-1]:.3f}"
    )
    assert len(run.loss_curve) == 100
    assert all(np.isfinite(x) for x in run.loss_curve)
    assert run.loss_curve[-1] < run.loss_curve[0]


def test_criterion_4_view_contrast(default_cfg, big_corpus, focused_run,
                                   complete_run, tmp_path):
    """Both views evaluate on the same held-out actions; input lengths differ."""
    train_recs, test_recs = big_corpus
    run_f, _ = focused_run
    ckpt_f = str(tmp_path / "focused.npz")
    ckpt_c = str(tmp_path / "complete.npz")
    trainer.save_run(focused_run[0], ckpt_f)
    trainer.save_run(complete_run, ckpt_c)
    rep_f, rep_c = evaluate.compare_configs(
        ckpt_f, ckpt_c, test_recs, train_recs, default_cfg
    )
    assert len(rep_f.outputs) == len(rep_c.outputs) == TEST_SIZE

    state = test_recs[0].state(default_cfg.width)
    n_complete = len(serialize.build_input(state, test_recs[0].action, COMPLETE).tokens())
    n_focused = len(serialize.build_input(state, test_recs[0].action, FOCUSED).tokens())
    print(
        f"[criterion 4] complete input {n_complete} tokens, focused {n_focused}; "
        f"BLEU focused {rep_f.bleu4:.3f} vs complete {rep_c.bleu4:.3f}"
    )
    assert n_complete == default_cfg.width * default_cfg.height + 4 == 147
    assert n_focused == 7 * 7 + 4 == 53


def test_criterion_5_noise_rate(default_cfg):
    """Dummy-symbol fraction tracks p over >= 1e5 symbols; p=0 is identity."""
    state = env.new_game(default_cfg)
    symbols = serialize.serialize_full(state)
    rng = random.Random(0)
    dummies = total = 0
    for _ in range(800):  # 800 x 142 maskable symbols > 1e5
        noised = serialize.apply_noise(symbols, 0.2, "?", rng)
        dummies += noised.count("?")
        total += sum(1 for s in symbols if s != env.FROG)
    frac = dummies / total
    clean = serialize.apply_noise(symbols, 0.0, "?", random.Random(1))
    print(f"[criterion 5] observed noise fraction {frac:.4f} over {total} symbols")
    assert total >= 100_000
    assert 0.19 <= frac <= 0.21
    assert "".join(clean) == "".join(symbols)


def test_criterion_6_agent_reaches_goal(default_cfg):
    """Tabular Q-learning wins >= 60% of greedy evaluation episodes."""
    start = time.monotonic()
    cfg = agent.AgentConfig(episodes=20_000, seed=0)
    q, _ = agent.train_agent(default_cfg, cfg)
    success = agent.evaluate(q, default_cfg, episodes=100)
    elapsed = time.monotonic() - start
    bound = 100.0 / (1.0 - cfg.gamma)
    worst = max(float(np.max(np.abs(row))) for row in q.values.values())
    print(
        f"[criterion 6] greedy success {success:.2f} over 100 episodes, "
        f"|Q| <= {worst:.0f} (bound {bound:.0f}), {elapsed:.0f}s"
    )
    assert success >= 0.60
    assert worst <= bound
    assert elapsed < 600.0


def test_criterion_7_stage_determinism(default_cfg):
    """Every pipeline stage is bit-identical under a fixed seed."""
    recs_a = corpus.synth_corpus(default_cfg, 30, seed=11)
    recs_b = corpus.synth_corpus(default_cfg, 30, seed=11)
    assert corpus.fingerprint(recs_a) == corpus.fingerprint(recs_b)

    cfg = agent.AgentConfig(episodes=50, seed=1)
    q1, _ = agent.train_agent(default_cfg, cfg)
    q2, _ = agent.train_agent(default_cfg, cfg)
    assert sorted(q1.values) == sorted(q2.values)
    for key in q1.values:
        assert np.array_equal(q1.values[key], q2.values[key])

    state = recs_a[0].state(default_cfg.width)
    seq1 = serialize.build_input(state, recs_a[0].action, COMPLETE,
                                 rng=random.Random(3), train=True)
    seq2 = serialize.build_input(state, recs_a[0].action, COMPLETE,
                                 rng=random.Random(3), train=True)
    assert seq1 == seq2

    hyper = _train_hyper(hidden_size=16, embed_size=16, epochs=2, batch_size=8)
    run1 = trainer.train(recs_a, FOCUSED, hyper, env_cfg=default_cfg)
    run2 = trainer.train(recs_a, FOCUSED, hyper, env_cfg=default_cfg)
    assert run1.loss_curve == run2.loss_curve
    for k in run1.params:
        assert np.array_equal(run1.params[k], run2.params[k])

    rep1 = evaluate.evaluate_model(run1.params, run1.vocab, hyper, FOCUSED,
                                   recs_a[20:], recs_a[:20], default_cfg, seed=0)
    rep2 = evaluate.evaluate_model(run2.params, run2.vocab, hyper, FOCUSED,
                                   recs_a[20:], recs_a[:20], default_cfg, seed=0)
    assert rep1.to_dict() == rep2.to_dict()
    print("[criterion 7] synthesis, agent, serialization, training and "
          "evaluation all reproduce bit-identically")


def test_criterion_8_persistence_round_trips(default_cfg, big_corpus, tmp_path):
    """2000-record JSONL round trip plus an HTTP session export that loads
    back through the standard corpus reader with no cleaning."""
    train_recs, _ = big_corpus
    path = str(tmp_path / "corpus.jsonl")
    corpus.save_jsonl(train_recs, path)
    loaded = corpus.load_jsonl(path)
    assert len(loaded) == len(train_recs) == 2000
    assert loaded == train_recs

    client = TestClient(create_app(env_cfg=default_cfg))
    sid = client.post("/sessions").json()["id"]
    assert client.post(f"/sessions/{sid}/phase",
                       json={"phase": "collecting"}).status_code == 200
    moves = ["left", "right", "left", "right", "left"]
    for i, action in enumerate(moves):
        assert client.post(f"/sessions/{sid}/action",
                           json={"action": action}).status_code == 200
        assert client.post(f"/sessions/{sid}/rationale",
                           json={"text": f"step {i}: staying out of the road"}
                           ).status_code == 200
    export_path = tmp_path / "session.jsonl"
    export_path.write_text(client.get(f"/sessions/{sid}/export").text)
    session_recs = corpus.load_jsonl(str(export_path))
    print(f"[criterion 8] 2000-record round trip ok; "
          f"session export loaded {len(session_recs)} records")
    assert len(session_recs) == len(moves)
    assert [r.action.value for r in session_recs] == moves
    assert all(r.participant for r in session_recs)
