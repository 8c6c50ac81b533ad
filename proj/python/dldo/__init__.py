"""Digital LDO modeling laboratory: sampled-data loop models, an exact
event-driven simulator of the quantized control loop, limit-cycle mode
prediction, and design-space sweeps."""

from ._core import *  # noqa: F401,F403

__all__ = [name for name in dir() if not name.startswith("_")]
