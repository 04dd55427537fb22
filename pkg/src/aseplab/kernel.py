"""Backend dispatch for the event-application kernels.

The compiled extension is preferred when importable; set ASEPLAB_KERNEL to
"python" or "compiled" to force a backend (forcing "compiled" raises if the
extension is missing rather than silently degrading).
"""

from __future__ import annotations

import os

_choice = os.environ.get("ASEPLAB_KERNEL", "").strip().lower()

if _choice == "python":
    from . import _kernel_py as _impl

    BACKEND = "python"
elif _choice == "compiled":
    from . import _kernel as _impl  # type: ignore[attr-defined]

    BACKEND = "compiled"
elif _choice == "":
    try:
        from . import _kernel as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from . import _kernel_py as _impl

        BACKEND = "python"
else:
    raise ValueError(f"ASEPLAB_KERNEL must be 'python' or 'compiled', got {_choice!r}")

HOLE = int(_impl.HOLE)

apply_events = _impl.apply_events
apply_events_batch = _impl.apply_events_batch
coupled_order_first_violation = _impl.coupled_order_first_violation
coupled_height_first_violation = _impl.coupled_height_first_violation

__all__ = [
    "BACKEND",
    "HOLE",
    "apply_events",
    "apply_events_batch",
    "coupled_order_first_violation",
    "coupled_height_first_violation",
]
