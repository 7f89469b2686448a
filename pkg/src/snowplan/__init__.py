"""snowplan: certified ball-move-optimal plans for snowman-building puzzles."""

__version__ = "0.1.0"
