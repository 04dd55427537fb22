"""Simulation and verification laboratory for multi-species exclusion processes."""

__version__ = "0.1.0"

from .clocks import LEFT, RIGHT, ArrowEvent, ClockWindow, JumpRates, make_rates, sample_clock_window

__all__ = [
    "LEFT",
    "RIGHT",
    "ArrowEvent",
    "ClockWindow",
    "JumpRates",
    "make_rates",
    "sample_clock_window",
    "__version__",
]
