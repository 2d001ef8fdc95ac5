"""Kernel backend selection.

Prefers the compiled Cython core; falls back to the numpy implementation
when the extension is missing (pure-Python install) or when the
``RISKRANK_PURE_PYTHON`` environment variable is set to a non-empty value
other than "0".  ``BACKEND`` records which one was picked.
"""

import os

_forced = os.environ.get("RISKRANK_PURE_PYTHON", "") not in ("", "0")

if _forced:
    from ._fallback import csc_matvec, dtw_cost, dtw_table

    BACKEND = "python"
else:
    try:
        from ._core import csc_matvec, dtw_cost, dtw_table

        BACKEND = "compiled"
    except ImportError:
        from ._fallback import csc_matvec, dtw_cost, dtw_table

        BACKEND = "python"

__all__ = ["csc_matvec", "dtw_cost", "dtw_table", "BACKEND"]
