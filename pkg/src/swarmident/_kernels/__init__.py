"""Kernel backend selection.

The compiled extension is preferred when present; the pure-Python mirror is
the fallback. Both produce bit-identical results (see test_kernels_parity).
Set SWARMIDENT_BACKEND=pure|compiled to force a choice.
"""

from __future__ import annotations

import os

from . import _pure

_requested = os.environ.get("SWARMIDENT_BACKEND", "").strip().lower()

if _requested == "pure":
    impl = _pure
    BACKEND = "pure"
else:
    try:
        from . import _core as impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        impl = _pure
        BACKEND = "pure"

wrap_angle = impl.wrap_angle
sense = impl.sense
run_trial = impl.run_trial
elman_final_outputs = impl.elman_final_outputs


def backend_name() -> str:
    return BACKEND
