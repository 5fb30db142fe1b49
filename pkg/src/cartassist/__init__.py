"""Simulated AI shopping-assistant cart.

Store modeling, marker-based localization, semantic product search, A* route
guidance with humanized instructions, and a button-driven five-stage voice
pipeline, all runnable offline against a deterministic 2-D simulator.
"""

__version__ = "0.1.0"
