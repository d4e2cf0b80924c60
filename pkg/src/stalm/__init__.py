"""LLM-warm-started hybrid MCTS for 2D geometric task and motion planning."""

__version__ = "0.1.0"
