"""Hot loops: compiled core when available, numpy fallback otherwise.

Set AV2_PURE_PYTHON=1 to force the fallback (used by the equivalence tests
and the benchmark). ``BACKEND`` names the implementation in use.
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("AV2_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

qd_eval = _impl.qd_eval
pushforward = _impl.pushforward
escape_classify = _impl.escape_classify


def compiled_available() -> bool:
    try:
        from . import _kernels  # type: ignore[attr-defined]  # noqa: F401
    except ImportError:
        return False
    return True
