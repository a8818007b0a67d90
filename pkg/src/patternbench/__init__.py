"""Workbench for mining design patterns from known-use narratives with an LLM in the loop."""

__version__ = "0.1.0"
