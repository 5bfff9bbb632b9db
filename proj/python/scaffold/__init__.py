"""Scene-graph and 7-DoF grounding toolkit."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
