"""Tick-driven simulator of scale-diversified trend-follower populations."""

from ._scalepop import *  # noqa: F401,F403
from ._scalepop import __version__  # noqa: F401
