"""Select the compiled kernels when available, else the pure-Python fallback.

Set ``HACKINT_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("HACKINT_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels

smo_solve = _impl.smo_solve
nw_loo_predictions = _impl.nw_loo_predictions
nw_predict = _impl.nw_predict
UNDERFLOW = _pykernels.UNDERFLOW
