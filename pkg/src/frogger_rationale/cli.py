"""Command-line entry points for the rationale generation pipeline.

Every command accepts --seed and prints machine-readable JSON to stdout
on success; failures exit non-zero with a message on stderr.
"""

from __future__ import annotations

import json
import random
import sys

import click

from . import agent as agent_mod
from . import corpus as corpus_mod
from . import env, evaluate, model, serialize, trainer


def _load_env(config_path: str | None, seed: int) -> env.EnvConfig:
    if config_path:
        return env.with_seed(env.load_config(config_path), seed)
    return env.default_config(seed=seed)


def _emit(payload: dict) -> None:
    click.echo(json.dumps(payload, indent=2))


def _fail(message: str) -> None:
    raise click.ClickException(message)


@click.group()
def main() -> None:
    """Frogger rationale generation pipeline."""


@main.command()
@click.option("--n", default=2000, show_default=True, help="records to generate")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--seed", default=0, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def synth(n, out, seed, config_path):
    """Generate a synthetic template-oracle corpus (JSONL)."""
    env_cfg = _load_env(config_path, seed)
    records = corpus_mod.synth_corpus(env_cfg, n, seed)
    corpus_mod.save_jsonl(records, out)
    _emit({"written": len(records), "path": out})


@main.command("agent-train")
@click.option("--episodes", default=50_000, show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--stats", "stats_path", type=click.Path(dir_okay=False), default=None)
@click.option("--seed", default=0, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--eval-episodes", default=100, show_default=True)
def agent_train(episodes, out, stats_path, seed, config_path, eval_episodes):
    """Train the tabular Q-learning agent and save its table as JSON."""
    env_cfg = _load_env(config_path, seed)
    cfg = agent_mod.AgentConfig(episodes=episodes, seed=seed)
    q, stats = agent_mod.train_agent(env_cfg, cfg)
    agent_mod.save_qtable(q, out)
    if stats_path:
        agent_mod.save_stats(stats, stats_path)
    _emit(
        {
            "episodes": episodes,
            "states": len(q),
            "greedy_success_rate": agent_mod.evaluate(q, env_cfg, eval_episodes),
            "qtable": out,
        }
    )


@main.command()
@click.option("--qtable", "qtable_path", required=True, type=click.Path(exists=True))
@click.option("--seed", default=0, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def rollout(qtable_path, seed, config_path):
    """Greedy rollout of a trained agent; prints the trajectory."""
    env_cfg = _load_env(config_path, seed)
    q = agent_mod.load_qtable(qtable_path)
    pairs = agent_mod.rollout(q, env_cfg, seed)
    _emit(
        {
            "length": len(pairs),
            "steps": [
                {
                    "tick": state.tick,
                    "frog": list(state.frog),
                    "action": action.value,
                    "board": env.render_ascii(state),
                }
                for state, action in pairs
            ],
        }
    )


@main.command()
@click.option("--view", type=click.Choice(["focused", "complete"]), required=True)
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--curve", "curve_path", type=click.Path(dir_okay=False), default=None)
@click.option("--epochs", default=100, show_default=True)
@click.option("--hidden", default=256, show_default=True)
@click.option("--embed", default=128, show_default=True)
@click.option("--lr", default=1e-3, show_default=True)
@click.option("--batch", default=32, show_default=True)
@click.option("--val-ratio", default=0.1, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def train(view, corpus_path, out, curve_path, epochs, hidden, embed, lr, batch,
          val_ratio, seed, config_path):
    """Train a rationale generator for one view configuration."""
    env_cfg = _load_env(config_path, seed)
    try:
        records = corpus_mod.load_jsonl(corpus_path)
    except corpus_mod.CorpusFormatError as exc:
        _fail(str(exc))
    if not records:
        _fail("corpus is empty")
    spec = corpus_mod.SplitSpec(train=1.0 - val_ratio, val=val_ratio, test=0.0, seed=seed)
    train_recs, val_recs, _ = corpus_mod.split(records, spec)
    hyper = model.Hyperparams(
        hidden_size=hidden, embed_size=embed, learning_rate=lr,
        batch_size=batch, epochs=epochs, seed=seed,
    )
    view_cfg = serialize.ViewConfig(mode=view)
    try:
        run = trainer.train(
            train_recs, view_cfg, hyper, env_cfg=env_cfg, val_records=val_recs
        )
    except trainer.TrainingError as exc:
        _fail(str(exc))
    trainer.save_run(run, out, curve_path)
    _emit(
        {
            "checkpoint": out,
            "view": view,
            "epochs": epochs,
            "final_train_loss": run.loss_curve[-1] if run.loss_curve else None,
            "best_epoch": run.best_epoch,
            "best_val_loss": run.val_curve[run.best_epoch]
            if run.val_curve and run.best_epoch >= 0
            else None,
        }
    )


@main.command()
@click.option("--ckpt", required=True, type=click.Path())
@click.option("--state", "state_path", required=True, type=click.Path())
@click.option("--view", type=click.Choice(["focused", "complete"]), default="focused",
              show_default=True)
@click.option("--mode", type=click.Choice(["greedy", "beam"]), default="greedy",
              show_default=True)
@click.option("--beam-width", default=3, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def generate(ckpt, state_path, view, mode, beam_width, seed, config_path):
    """Generate a rationale for one recorded (state, action) pair.

    --state is a JSON file using the corpus record schema.
    """
    env_cfg = _load_env(config_path, seed)
    try:
        params, hyper, vocab_tokens, _ = model.load_checkpoint(ckpt)
    except (model.CheckpointError, FileNotFoundError) as exc:
        _fail(f"cannot load checkpoint: {exc}")
    try:
        with open(state_path, "r", encoding="utf-8") as fh:
            rec = corpus_mod.record_from_json(json.load(fh))
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        _fail(f"cannot load state: {exc}")
    vocab = corpus_mod.Vocabulary(tokens=list(vocab_tokens))
    text = trainer.generate_text(
        params, vocab, rec.state(env_cfg.width), rec.action,
        serialize.ViewConfig(mode=view), mode=mode, beam_width=beam_width,
        max_decode_len=hyper.max_decode_len,
    )
    _emit({"action": rec.action.value, "rationale": text})


@main.command("eval")
@click.option("--ckpt-focused", required=True, type=click.Path(exists=True))
@click.option("--ckpt-complete", required=True, type=click.Path(exists=True))
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--test-ratio", default=0.1, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def eval_cmd(ckpt_focused, ckpt_complete, corpus_path, test_ratio, seed, config_path):
    """Compare the focused- and complete-view generators on held-out data."""
    env_cfg = _load_env(config_path, seed)
    records = corpus_mod.load_jsonl(corpus_path)
    spec = corpus_mod.SplitSpec(
        train=1.0 - test_ratio, val=0.0, test=test_ratio, seed=seed
    )
    train_recs, _, test_recs = corpus_mod.split(records, spec)
    if not test_recs:
        _fail("test split is empty")
    try:
        report_f, report_c = evaluate.compare_configs(
            ckpt_focused, ckpt_complete, test_recs, train_recs, env_cfg, seed
        )
    except (evaluate.EvalError, model.CheckpointError) as exc:
        _fail(str(exc))
    _emit(
        {
            "focused": report_f.to_dict() | {"outputs": len(report_f.outputs)},
            "complete": report_c.to_dict() | {"outputs": len(report_c.outputs)},
        }
    )


@main.command()
@click.option("--ckpt", required=True, type=click.Path(exists=True))
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--n", default=5, show_default=True, help="number of stimuli")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--seed", default=0, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def stimuli(ckpt, corpus_path, n, out, seed, config_path):
    """Export perception-study stimuli (candidate/random/exemplary slots)."""
    env_cfg = _load_env(config_path, seed)
    records = corpus_mod.load_jsonl(corpus_path)
    if not records:
        _fail("corpus is empty")
    picked = random.Random(seed).sample(records, min(n, len(records)))
    items = evaluate.export_stimuli(picked, ckpt, records, env_cfg, seed)
    evaluate.save_stimuli(items, out)
    _emit({"stimuli": len(items), "path": out})


@main.command()
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--journal-dir", type=click.Path(file_okay=False), default=None)
def serve(port, host, seed, config_path, journal_dir):
    """Run the HTTP collection service."""
    import uvicorn

    from .service import create_app

    env_cfg = _load_env(config_path, seed)
    app = create_app(env_cfg=env_cfg, journal_dir=journal_dir)
    click.echo(json.dumps({"serving": f"http://{host}:{port}"}))
    sys.stdout.flush()
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
