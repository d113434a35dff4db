"""Frogger rationale generation pipeline: gridworld, tabular Q-agent,
state serialization, corpus tooling, a from-scratch GRU attention
seq2seq generator, evaluation, and a think-aloud collection service."""

__version__ = "0.1.0"
